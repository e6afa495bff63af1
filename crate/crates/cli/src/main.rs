use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bibrace::algebra::{spec_from_theta, theta_from_spec, AlgebraSpec, ClassTwoAlgebra};
use bibrace::automorphism::{
    are_isomorphic, aut_group_unidim, enumerate_aut_bruteforce, is_automorphism, is_isomorphism, sample_automorphism,
    IsoVerdict,
};
use bibrace::differential::{
    ddt, last_round_key_recovery, trail_search, trapdoor_pipeline, DiffOp, Trail, TrapdoorParams,
};
use bibrace::format::{self, Record};
use bibrace::spn::{validate_cipher, CipherSpec, SBox};
use bibrace::{BitMat, BitVec, Error};

#[derive(Parser)]
#[command(
    name = "bibrace",
    version,
    about = "Class-two algebras, their automorphisms and circle-difference cryptanalysis of toy SPNs"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OpName {
    Xor,
    Circle,
}

/// Exit codes: 0 success, 1 domain failure, 2 usage or parse error.
#[derive(Subcommand)]
enum Command {
    /// Check an algebra, theta or cipher file.
    Validate(ValidateArgs),
    /// Print the invariants of an algebra.
    Info(AlgebraArg),
    /// Convert between algebra and theta files.
    Theta(ThetaArgs),
    /// Automorphism group order, sampling and membership.
    Aut(AutArgs),
    /// Decide whether two algebras are isomorphic, or check a map.
    Iso(IsoArgs),
    /// Difference distribution table of an s-box.
    Ddt(DdtArgs),
    /// Best differential trail of a cipher.
    Trail(TrailArgs),
    /// Encrypt one block.
    Encrypt(CryptArgs),
    /// Decrypt one block.
    Decrypt(CryptArgs),
    /// Last-round key recovery with an (r-1)-round trail.
    Attack(AttackArgs),
    /// Search for a trapdoor algebra and diffusion layer for an s-box.
    Trapdoor(TrapdoorArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, group = "input")]
    algebra: Option<PathBuf>,
    #[arg(long, group = "input")]
    theta: Option<PathBuf>,
    #[arg(long, group = "input")]
    spec: Option<PathBuf>,
    /// Also check every algebra axiom exhaustively.
    #[arg(long)]
    axioms: bool,
}

#[derive(Args)]
struct AlgebraArg {
    #[arg(long)]
    algebra: PathBuf,
}

#[derive(Args)]
struct ThetaArgs {
    /// Print the theta matrix of this algebra.
    #[arg(long, group = "input")]
    algebra: Option<PathBuf>,
    /// Print the algebra of this theta matrix.
    #[arg(long, group = "input")]
    theta: Option<PathBuf>,
}

#[derive(Args)]
struct AutArgs {
    #[arg(long)]
    algebra: PathBuf,
    /// Print a random automorphism.
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check whether the matrix in this file is an automorphism.
    #[arg(long)]
    check: Option<PathBuf>,
}

#[derive(Args)]
struct IsoArgs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    other: PathBuf,
    /// Check whether the matrix in this file is an isomorphism.
    #[arg(long)]
    check: Option<PathBuf>,
}

#[derive(Args)]
struct DdtArgs {
    #[arg(long)]
    sbox: PathBuf,
    #[arg(long, value_enum, default_value_t = OpName::Xor)]
    op: OpName,
    /// Brick algebra, required for the circle operation.
    #[arg(long)]
    algebra: Option<PathBuf>,
}

#[derive(Args)]
struct TrailArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Brick algebra; selects the circle operation unless --op says otherwise.
    #[arg(long)]
    algebra: Option<PathBuf>,
    #[arg(long, value_enum)]
    op: Option<OpName>,
    /// Number of rounds; defaults to the cipher's.
    #[arg(long)]
    rounds: Option<usize>,
}

#[derive(Args)]
struct CryptArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Block as hex.
    #[arg(long = "in")]
    input: String,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    algebra: Option<PathBuf>,
    #[arg(long, value_enum)]
    op: Option<OpName>,
    #[arg(long, default_value_t = 4096)]
    pairs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrapdoorArgs {
    #[arg(long)]
    sbox: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    d: usize,
    /// Number of bricks of the diffusion layer.
    #[arg(long, default_value_t = 2)]
    h: usize,
    #[arg(long, default_value_t = 16)]
    candidates: usize,
    /// Sampled algebras when m > 4.
    #[arg(long, default_value_t = 64)]
    algebra_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Result of a subcommand: text and structured renderings plus success.
struct Report {
    text: Vec<String>,
    record: Record,
    ok: bool,
}

impl Report {
    fn new() -> Self {
        Self {
            text: Vec::new(),
            record: Record::new(),
            ok: true,
        }
    }

    fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.text.push(s.into());
        self
    }

    fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.record.push(key, value);
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            let out = match cli.format {
                OutputFormat::Text => report.text.iter().map(|l| format!("{l}\n")).collect(),
                OutputFormat::Structured => report.record.emit(),
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn read(path: &Path) -> bibrace::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_algebra_unchecked(path: &Path) -> bibrace::Result<AlgebraSpec> {
    format::parse_algebra(&read(path)?)
}

fn load_algebra(path: &Path) -> bibrace::Result<AlgebraSpec> {
    let spec = load_algebra_unchecked(path)?;
    let report = spec.validate();
    if !report.is_valid() {
        return Err(Error::InvalidAlgebra(report.to_string()));
    }
    Ok(spec)
}

fn load_matrix(path: &Path) -> bibrace::Result<BitMat> {
    format::parse_matrix(&read(path)?)
}

fn load_sbox(path: &Path) -> bibrace::Result<SBox> {
    let (n, table) = format::parse_sbox(&read(path)?)?;
    SBox::new(n, table)
}

fn load_cipher(path: &Path) -> bibrace::Result<CipherSpec> {
    CipherSpec::from_parts(format::parse_cipher(&read(path)?, path.parent())?)
}

fn select_op(op: Option<OpName>, algebra: Option<&PathBuf>) -> bibrace::Result<DiffOp> {
    match (op, algebra) {
        (Some(OpName::Xor), _) | (None, None) => Ok(DiffOp::Xor),
        (_, Some(path)) => Ok(DiffOp::Circle(load_algebra(path)?)),
        (Some(OpName::Circle), None) => Err(Error::Parse("--op circle requires --algebra".into())),
    }
}

/// `<e1+e3, e2>` with 1-based coordinates.
fn span_string(basis: &[BitVec]) -> String {
    let parts: Vec<String> = basis
        .iter()
        .map(|v| {
            let terms: Vec<String> = v.ones().map(|i| format!("e{}", i + 1)).collect();
            terms.join("+")
        })
        .collect();
    format!("<{}>", parts.join(", "))
}

fn rows_string(m: &BitMat) -> String {
    (0..m.rows())
        .map(|r| m.row(r).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn bits(v: u64, len: usize) -> String {
    BitVec::from_u64(v, len).to_string()
}

fn run(cmd: &Command) -> bibrace::Result<Report> {
    match cmd {
        Command::Validate(a) => validate(a),
        Command::Info(a) => info(&a.algebra),
        Command::Theta(a) => theta(a),
        Command::Aut(a) => aut(a),
        Command::Iso(a) => iso(a),
        Command::Ddt(a) => ddt_cmd(a),
        Command::Trail(a) => trail(a),
        Command::Encrypt(a) => crypt(a, true),
        Command::Decrypt(a) => crypt(a, false),
        Command::Attack(a) => attack(a),
        Command::Trapdoor(a) => trapdoor(a),
    }
}

fn validate(a: &ValidateArgs) -> bibrace::Result<Report> {
    let mut r = Report::new();
    if let Some(path) = &a.spec {
        let parts = format::parse_cipher(&read(path)?, path.parent())?;
        let report = validate_cipher(&parts);
        r.ok = report.is_valid();
        r.line(report.to_string());
        r.field("valid", report.is_valid());
        for (i, issue) in report.issues.iter().enumerate() {
            r.field(&format!("issue.{i}"), issue);
        }
        return Ok(r);
    }
    let spec = match (&a.algebra, &a.theta) {
        (Some(p), _) => load_algebra_unchecked(p)?,
        (None, Some(p)) => match format::parse_theta(&read(p)?) {
            Ok(t) => spec_from_theta(&t)?,
            Err(Error::InvalidTheta(msg)) => {
                r.ok = false;
                r.line(format!("invalid theta: {msg}"));
                r.field("valid", false).field("issue.0", msg);
                return Ok(r);
            }
            Err(e) => return Err(e),
        },
        (None, None) => return Err(Error::Parse("one of --algebra, --theta or --spec is required".into())),
    };
    let report = spec.validate();
    r.ok = report.is_valid();
    r.line(report.to_string());
    r.field("valid", report.is_valid());
    for (i, v) in report.violations.iter().enumerate() {
        r.field(&format!("issue.{i}"), v);
    }
    if a.axioms && report.is_valid() {
        let axioms = spec.validate_axioms()?;
        r.ok = axioms.all_passed();
        r.line(axioms.to_string());
        r.field("axioms", if axioms.all_passed() { "pass" } else { "fail" });
        for c in &axioms.checks {
            r.field(&format!("axiom.{}", c.name), if c.passed { "pass" } else { "fail" });
        }
    }
    Ok(r)
}

fn info(path: &Path) -> bibrace::Result<Report> {
    let spec = load_algebra(path)?;
    let ann = spec.annihilator();
    let soc = spec.socle();
    let r2 = spec.r_squared();
    let theta = theta_from_spec(&spec).as_matrix();
    let weak = 1u128 << soc.len();
    let mut r = Report::new();
    r.line(format!("m = {}, d = {}, n = {}", spec.m(), spec.d(), spec.n()))
        .line(format!("dim R² = {}", r2.len()))
        .line(format!("R² = {}", span_string(&r2)))
        .line(format!("Ann = {}", span_string(&ann)))
        .line(format!("Soc = {}, weak keys: {weak}", span_string(&soc)))
        .line("Theta =")
        .line(theta.to_string());
    r.field("m", spec.m())
        .field("d", spec.d())
        .field("n", spec.n())
        .field("dim_r2", r2.len())
        .field("r2", span_string(&r2))
        .field("ann", span_string(&ann))
        .field("soc", span_string(&soc))
        .field("weak_keys", weak)
        .field("theta", rows_string(&theta));
    Ok(r)
}

fn theta(a: &ThetaArgs) -> bibrace::Result<Report> {
    let mut r = Report::new();
    if let Some(p) = &a.algebra {
        let t = theta_from_spec(&load_algebra(p)?);
        r.line(format::emit_theta(&t).trim_end());
        r.field("m", t.m())
            .field("d", t.d())
            .field("theta", rows_string(&t.as_matrix()));
    } else if let Some(p) = &a.theta {
        let spec = spec_from_theta(&format::parse_theta(&read(p)?)?)?;
        r.line(format::emit_algebra(&spec).trim_end());
        r.field("m", spec.m()).field("d", spec.d());
        for (k, b) in spec.defining().iter().enumerate() {
            r.field(&format!("b{}", k + 1), rows_string(b));
        }
    } else {
        return Err(Error::Parse("one of --algebra or --theta is required".into()));
    }
    Ok(r)
}

fn aut(a: &AutArgs) -> bibrace::Result<Report> {
    let spec = load_algebra(&a.algebra)?;
    let mut r = Report::new();
    if let Some(p) = &a.check {
        let g = load_matrix(p)?;
        let member = g.rows() == spec.n() && g.cols() == spec.n() && is_automorphism(&spec, &g);
        r.ok = member;
        r.line(if member { "automorphism" } else { "not an automorphism" });
        r.field("automorphism", member);
        return Ok(r);
    }
    match aut_group_unidim(&spec) {
        Ok(group) => {
            r.line(format!("order: {}", group.order));
            r.field("order_sp", &group.order.sp)
                .field("order_fix", &group.order.fix)
                .field("order_unipotent_exp", group.order.unipotent_exp)
                .field("order", group.order.total())
                .field("method", "structure");
        }
        Err(Error::NotUniDimensional(k)) => {
            let all = enumerate_aut_bruteforce(&spec).map_err(|_| Error::NotUniDimensional(k))?;
            r.line(format!("order: {} (exhaustive)", all.len()));
            r.field("order", all.len()).field("method", "exhaustive");
        }
        Err(e) => return Err(e),
    }
    if a.sample {
        let g = sample_automorphism(&spec, a.seed)?;
        r.line(format!("sample (seed {}):", a.seed)).line(g.to_string());
        r.field("seed", a.seed).field("sample", rows_string(&g));
    }
    Ok(r)
}

fn iso(a: &IsoArgs) -> bibrace::Result<Report> {
    let rs = load_algebra(&a.algebra)?;
    let ss = load_algebra(&a.other)?;
    let mut r = Report::new();
    if let Some(p) = &a.check {
        let g = load_matrix(p)?;
        let ok = g.rows() == rs.n() && g.cols() == ss.n() && is_isomorphism(&rs, &ss, &g);
        r.ok = ok;
        r.line(if ok { "isomorphism" } else { "not an isomorphism" });
        r.field("isomorphism", ok);
        return Ok(r);
    }
    match are_isomorphic(&rs, &ss)? {
        IsoVerdict::Isomorphic(map) => {
            let g = map.matrix();
            r.line("isomorphic").line(g.to_string());
            r.field("isomorphic", "yes").field("map", rows_string(&g));
        }
        IsoVerdict::NotIsomorphic(reason) => {
            r.line(format!("not isomorphic: {reason}"));
            r.field("isomorphic", "no").field("reason", reason);
        }
        IsoVerdict::Indeterminate(reason) => {
            r.line(format!("indeterminate: {reason}"));
            r.field("isomorphic", "unknown").field("reason", reason);
        }
    }
    Ok(r)
}

fn ddt_cmd(a: &DdtArgs) -> bibrace::Result<Report> {
    let sbox = load_sbox(&a.sbox)?;
    let op = select_op(Some(a.op), a.algebra.as_ref())?;
    let table = ddt(&sbox, &op)?;
    let bias = table.max_bias();
    let mut r = Report::new();
    r.line(table.to_string());
    r.field("op", op.name())
        .field("n", table.n)
        .field("max_bias_input", bits(u64::from(bias.input), table.n))
        .field("max_bias_output", bits(u64::from(bias.output), table.n))
        .field("max_bias_count", bias.count);
    for x in 0..table.size() as u32 {
        let row: Vec<String> = table.row(x).iter().map(u32::to_string).collect();
        r.field(&format!("row.{x}"), row.join(" "));
    }
    Ok(r)
}

fn trail_report(r: &mut Report, t: &Trail) {
    r.line(t.to_string());
    r.field("op", t.op)
        .field("rounds", t.rounds.len())
        .field("input", bits(t.input(), t.block_len))
        .field("output", bits(t.output(), t.block_len))
        .field("probability", t.probability)
        .field("weight", format!("{:.6}", t.weight()));
    for (i, round) in t.rounds.iter().enumerate() {
        r.field(
            &format!("round.{}", i + 1),
            format!(
                "{} {} {} {} {}",
                bits(round.input, t.block_len),
                bits(round.sbox_output, t.block_len),
                bits(round.output, t.block_len),
                round.sbox_probability,
                round.key_factor
            ),
        );
    }
}

fn trail(a: &TrailArgs) -> bibrace::Result<Report> {
    let cipher = load_cipher(&a.spec)?;
    let op = select_op(a.op, a.algebra.as_ref())?;
    let t = trail_search(&cipher, &op, a.rounds.unwrap_or(cipher.rounds()))?;
    let mut r = Report::new();
    trail_report(&mut r, &t);
    Ok(r)
}

fn crypt(a: &CryptArgs, forward: bool) -> bibrace::Result<Report> {
    let cipher = load_cipher(&a.spec)?;
    let x = format::parse_hex(&a.input, cipher.block_len())?;
    let y = if forward {
        cipher.encrypt(&x)?
    } else {
        cipher.decrypt(&x)?
    };
    let mut r = Report::new();
    r.line(format::hex_of(&y));
    r.field("input", format::hex_of(&x)).field("output", format::hex_of(&y));
    Ok(r)
}

fn attack(a: &AttackArgs) -> bibrace::Result<Report> {
    let cipher = load_cipher(&a.spec)?;
    let op = select_op(a.op, a.algebra.as_ref())?;
    if cipher.rounds() < 2 {
        return Err(Error::InvalidCipher("key recovery needs at least two rounds".into()));
    }
    let t = trail_search(&cipher, &op, cipher.rounds() - 1)?;
    let res = last_round_key_recovery(&cipher, &op, &t, a.pairs, a.seed)?;
    let mut r = Report::new();
    {
        r.line(format!(
            "trail: {} rounds, {} -> {}, probability {}",
            t.rounds.len(),
            bits(t.input(), t.block_len),
            bits(t.output(), t.block_len),
            t.probability
        ));
        r.field("trail_input", bits(t.input(), t.block_len))
            .field("trail_output", bits(t.output(), t.block_len))
            .field("trail_probability", t.probability);
    }
    let n = cipher.n();
    let ranking: Vec<String> = res
        .ranking
        .iter()
        .map(|(k, c)| format!("{}:{c}", bits(u64::from(*k), n)))
        .collect();
    r.line(format!("target brick: {}", res.target_brick))
        .line(format!("pairs: {}, seed: {}", res.pairs, res.seed))
        .line(format!("ranking: {}", ranking.join(" ")))
        .line(format!(
            "correct key {} ranked {}",
            bits(u64::from(res.correct_key), n),
            res.correct_rank()
        ));
    r.field("op", op.name())
        .field("target_brick", res.target_brick)
        .field("pairs", res.pairs)
        .field("seed", res.seed)
        .field("ranking", ranking.join(" "))
        .field("correct_key", bits(u64::from(res.correct_key), n))
        .field("correct_rank", res.correct_rank());
    Ok(r)
}

fn trapdoor(a: &TrapdoorArgs) -> bibrace::Result<Report> {
    let sbox = load_sbox(&a.sbox)?;
    let params = TrapdoorParams {
        m: a.m,
        d: a.d,
        h: a.h,
        mu_candidates: a.candidates,
        algebra_samples: a.algebra_samples,
        seed: a.seed,
    };
    let res = trapdoor_pipeline(&sbox, &params)?;
    let n = sbox.n();
    let mut r = Report::new();
    r.line(format!("algebras scored: {}", res.algebras_scored))
        .line(format!(
            "xor max-bias: {} -> {} count {}",
            bits(u64::from(res.xor_bias.input), n),
            bits(u64::from(res.xor_bias.output), n),
            res.xor_bias.count
        ))
        .line(format!(
            "circle max-bias: {} -> {} count {}",
            bits(u64::from(res.circle_bias.input), n),
            bits(u64::from(res.circle_bias.output), n),
            res.circle_bias.count
        ))
        .line(format!("improved: {}", if res.improved { "yes" } else { "no" }))
        .line("algebra:")
        .line(format::emit_algebra(&res.algebra).trim_end())
        .line(format!(
            "mu ({} candidates, diffusion {}):",
            res.mu_candidates, res.diffusion
        ))
        .line(res.mu.to_string())
        .line(format!("seed: {}", res.seed));
    r.field("algebras_scored", res.algebras_scored)
        .field("xor_max_bias", res.xor_bias.count)
        .field("circle_max_bias", res.circle_bias.count)
        .field("improved", res.improved)
        .field("m", res.algebra.m())
        .field("d", res.algebra.d());
    for (k, b) in res.algebra.defining().iter().enumerate() {
        r.field(&format!("b{}", k + 1), rows_string(b));
    }
    r.field("mu", rows_string(&res.mu))
        .field("pi", res.pi.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
        .field("diffusion", res.diffusion)
        .field("seed", res.seed);
    Ok(r)
}
