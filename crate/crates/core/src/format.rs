//! Text file formats.
//!
//! Matrix: a line `rows cols`, then `rows` lines of exactly `cols` characters
//! from `{0,1}`. Coordinate 0 is the leftmost character. Blank lines and
//! lines starting with `#` are ignored everywhere.
//!
//! Algebra: a line `m d`, then the matrices `B_1 .. B_d`, each `m m`.
//!
//! Theta: a line `theta m d`, then the `m × m·d` matrix.
//!
//! S-box: either one run of `2^n` hex digits (n ≤ 4) or `2^n` whitespace
//! separated hex numbers. Entry `i` is `S(i)`; the leftmost bit of a brick
//! is the most significant bit of its integer.
//!
//! Cipher: `key = value` lines with keys `h`, `n`, `r`, `sbox`, `mu` and
//! `keys`. `mu` is either `@path` (a matrix file, relative to the cipher
//! file) or the rows separated by commas. `keys` lists `r` hex strings of
//! `h·n` bits. Brick `i` occupies coordinates `[i·n, (i+1)·n)`.
//!
//! Structured output: one `key=value` per line.

use std::path::Path;

use crate::algebra::{AlgebraSpec, ThetaMatrix};
use crate::error::{Error, Result};
use crate::gf2::{BitMat, BitVec};
use crate::spn::{CipherParts, CipherSpec};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

fn parse_usize(line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, got '{tok}'")))
}

fn read_matrix<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<BitMat> {
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing matrix header 'rows cols'".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(ln, format!("expected 'rows cols', got '{header}'")));
    }
    let rows = parse_usize(ln, toks[0])?;
    let cols = parse_usize(ln, toks[1])?;
    let mut data = Vec::with_capacity(rows);
    for r in 0..rows {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("matrix ends after {r} of {rows} rows")))?;
        if row.len() != cols {
            return Err(parse_err(ln, format!("expected {cols} columns, got {}", row.len())));
        }
        data.push(BitVec::parse_bits(row).map_err(|_| parse_err(ln, format!("invalid bit row '{row}'")))?);
    }
    if rows == 0 {
        return Ok(BitMat::zeros(0, cols));
    }
    BitMat::from_rows(data)
}

fn expect_end<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<()> {
    match lines.next() {
        Some((ln, l)) => Err(parse_err(ln, format!("unexpected trailing content '{l}'"))),
        None => Ok(()),
    }
}

pub fn parse_matrix(text: &str) -> Result<BitMat> {
    let mut lines = content_lines(text);
    let m = read_matrix(&mut lines)?;
    expect_end(&mut lines)?;
    Ok(m)
}

pub fn emit_matrix(m: &BitMat) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        out.push_str(&m.row(r).to_string());
        out.push('\n');
    }
    out
}

/// Parses an algebra file without checking the algebra conditions; shape
/// errors are parse errors.
pub fn parse_algebra(text: &str) -> Result<AlgebraSpec> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| Error::Parse("empty algebra file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(ln, format!("expected 'm d', got '{header}'")));
    }
    let m = parse_usize(ln, toks[0])?;
    let d = parse_usize(ln, toks[1])?;
    let mut defining = Vec::with_capacity(d);
    for k in 0..d {
        let b = read_matrix(&mut lines)?;
        if b.rows() != m || b.cols() != m {
            return Err(Error::Parse(format!(
                "matrix B_{} is {}x{}, expected {m}x{m}",
                k + 1,
                b.rows(),
                b.cols()
            )));
        }
        defining.push(b);
    }
    expect_end(&mut lines)?;
    Ok(AlgebraSpec::new_unchecked(m, d, defining))
}

pub fn emit_algebra(spec: &AlgebraSpec) -> String {
    let mut out = format!("{} {}\n", spec.m(), spec.d());
    for b in spec.defining() {
        out.push_str(&emit_matrix(b));
    }
    out
}

pub fn parse_theta(text: &str) -> Result<ThetaMatrix> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| Error::Parse("empty theta file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != "theta" {
        return Err(parse_err(ln, format!("expected 'theta m d', got '{header}'")));
    }
    let m = parse_usize(ln, toks[1])?;
    let d = parse_usize(ln, toks[2])?;
    let mat = read_matrix(&mut lines)?;
    expect_end(&mut lines)?;
    ThetaMatrix::from_matrix(m, d, &mat)
}

pub fn emit_theta(theta: &ThetaMatrix) -> String {
    format!("theta {} {}\n{}", theta.m(), theta.d(), emit_matrix(&theta.as_matrix()))
}

/// Parses an s-box table; returns `(n, table)`.
pub fn parse_sbox(text: &str) -> Result<(usize, Vec<u32>)> {
    let toks: Vec<&str> = content_lines(text).flat_map(|(_, l)| l.split_whitespace()).collect();
    let values: Vec<u32> = if toks.len() == 1 {
        toks[0]
            .chars()
            .map(|c| {
                c.to_digit(16)
                    .ok_or_else(|| Error::Parse(format!("invalid hex digit '{c}'")))
            })
            .collect::<Result<_>>()?
    } else {
        toks.iter()
            .map(|t| u32::from_str_radix(t, 16).map_err(|_| Error::Parse(format!("invalid hex value '{t}'"))))
            .collect::<Result<_>>()?
    };
    let len = values.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::Parse(format!(
            "s-box has {len} entries, expected a power of two"
        )));
    }
    Ok((len.trailing_zeros() as usize, values))
}

pub fn emit_sbox(n: usize, table: &[u32]) -> String {
    if n <= 4 {
        table.iter().map(|v| format!("{v:x}")).collect()
    } else {
        let w = n.div_ceil(4);
        table.iter().map(|v| format!("{v:0w$x}")).collect::<Vec<_>>().join(" ")
    }
}

/// Hex string of a bit vector whose length is a multiple of 4; coordinate 0
/// is the most significant bit of the first digit.
pub fn hex_of(v: &BitVec) -> String {
    let bits: Vec<bool> = v.bits().collect();
    bits.chunks(4)
        .map(|c| {
            let x = c.iter().fold(0u32, |a, &b| (a << 1) | u32::from(b)) << (4 - c.len());
            char::from_digit(x, 16).expect("nibble")
        })
        .collect()
}

/// Parses a hex string into `len` bits; `len` must match the digit count.
pub fn parse_hex(s: &str, len: usize) -> Result<BitVec> {
    let s = s.trim();
    let s = s.strip_prefix("0x").unwrap_or(s);
    if s.len() != len.div_ceil(4) {
        return Err(Error::Parse(format!(
            "hex value '{s}' has {} digits, expected {} for {len} bits",
            s.len(),
            len.div_ceil(4)
        )));
    }
    let mut out = BitVec::zeros(len);
    for (i, c) in s.chars().enumerate() {
        let x = c
            .to_digit(16)
            .ok_or_else(|| Error::Parse(format!("invalid hex digit '{c}'")))?;
        for b in 0..4 {
            let pos = 4 * i + b;
            if (x >> (3 - b)) & 1 == 1 {
                if pos >= len {
                    return Err(Error::Parse(format!("hex value '{s}' exceeds {len} bits")));
                }
                out.set(pos, true);
            }
        }
    }
    Ok(out)
}

/// Parses `key = value` lines into pairs, preserving order.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    content_lines(text)
        .map(|(ln, l)| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| parse_err(ln, format!("expected 'key = value', got '{l}'")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Parses a cipher file; `base` resolves `mu = @path` references.
pub fn parse_cipher(text: &str, base: Option<&Path>) -> Result<CipherParts> {
    let fields = parse_key_values(text)?;
    let get = |key: &str| -> Result<&str> {
        let mut hits = fields.iter().filter(|(k, _)| k == key);
        let v = hits
            .next()
            .ok_or_else(|| Error::Parse(format!("cipher file lacks field '{key}'")))?;
        if hits.next().is_some() {
            return Err(Error::Parse(format!("field '{key}' given twice")));
        }
        Ok(v.1.as_str())
    };
    for (k, _) in &fields {
        if !["h", "n", "r", "sbox", "mu", "keys"].contains(&k.as_str()) {
            return Err(Error::Parse(format!("unknown cipher field '{k}'")));
        }
    }
    let num = |key: &str| -> Result<usize> {
        let v = get(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("field '{key}': expected an integer, got '{v}'")))
    };
    let (h, n, rounds) = (num("h")?, num("n")?, num("r")?);
    let (sbox_n, sbox) = parse_sbox(get("sbox")?)?;
    if sbox_n != n {
        return Err(Error::Parse(format!("s-box has width {sbox_n}, field n = {n}")));
    }
    let mu_field = get("mu")?;
    let mu = if let Some(path) = mu_field.strip_prefix('@') {
        let path = path.trim();
        let full = base.map_or_else(|| Path::new(path).to_path_buf(), |b| b.join(path));
        parse_matrix(&std::fs::read_to_string(&full)?)?
    } else {
        let rows: Vec<BitVec> = mu_field
            .split(',')
            .map(|r| BitVec::parse_bits(r.trim()).map_err(|_| Error::Parse(format!("invalid mu row '{}'", r.trim()))))
            .collect::<Result<_>>()?;
        BitMat::from_rows(rows).map_err(|_| Error::Parse("mu rows have unequal lengths".into()))?
    };
    let keys = get("keys")?
        .split_whitespace()
        .map(|k| parse_hex(k, h * n))
        .collect::<Result<Vec<_>>>()?;
    Ok(CipherParts {
        h,
        n,
        rounds,
        sbox,
        mu,
        keys,
    })
}

/// Emits a cipher file with `mu` inline.
pub fn emit_cipher(c: &CipherSpec) -> String {
    let mu = c.mu();
    let rows: Vec<String> = (0..mu.rows()).map(|r| mu.row(r).to_string()).collect();
    let keys: Vec<String> = c.keys().iter().map(hex_of).collect();
    format!(
        "h = {}\nn = {}\nr = {}\nsbox = {}\nmu = {}\nkeys = {}\n",
        c.h(),
        c.n(),
        c.rounds(),
        emit_sbox(c.n(), c.sbox().table()),
        rows.join(","),
        keys.join(" ")
    )
}

/// Ordered `key=value` record for structured output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Record {
    fields: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    /// Keys may not contain `=` or newlines; values may not contain newlines.
    pub fn emit(&self) -> String {
        self.fields.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let fields = text
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| Error::Parse(format!("structured line lacks '=': '{l}'")))
            })
            .collect::<Result<_>>()?;
        Ok(Self { fields })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::theta_from_spec;
    use crate::catalog;
    use crate::spn::SBox;
    use proptest::prelude::*;

    #[test]
    fn matrix_with_comments() {
        let m = parse_matrix("# a comment\n\n2 3\n101\n# inside\n011\n").unwrap();
        assert_eq!(m, BitMat::from_strs(&["101", "011"]));
        assert_eq!(parse_matrix(&emit_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn matrix_errors() {
        assert!(parse_matrix("2 3\n101\n").is_err());
        assert!(parse_matrix("2 3\n101\n01\n").is_err());
        assert!(parse_matrix("2 3\n101\n012\n").is_err());
        assert!(parse_matrix("2 3\n101\n011\n111\n").is_err());
        assert!(parse_matrix("x 3\n").is_err());
    }

    #[test]
    fn algebra_round_trip() {
        for spec in [catalog::minimal(), catalog::square_full(), catalog::square_deficient()] {
            assert_eq!(parse_algebra(&emit_algebra(&spec)).unwrap(), spec);
        }
        assert!(parse_algebra("2 1\n3 3\n000\n000\n000\n").is_err());
    }

    #[test]
    fn unchecked_algebra_parses() {
        let spec = parse_algebra("2 1\n2 2\n11\n10\n").unwrap();
        assert!(!spec.validate().is_valid());
    }

    #[test]
    fn theta_round_trip() {
        let theta = theta_from_spec(&catalog::square_full());
        assert_eq!(parse_theta(&emit_theta(&theta)).unwrap(), theta);
        assert!(parse_theta("4 16\n").is_err());
    }

    #[test]
    fn sbox_forms() {
        let (n, t) = parse_sbox("f2be9a5c037d4816\n").unwrap();
        assert_eq!(n, 4);
        assert_eq!(t[0], 15);
        assert_eq!(emit_sbox(4, &t), "f2be9a5c037d4816");
        let (n, t) = parse_sbox("# pairs\n3 1\n0 2\n").unwrap();
        assert_eq!((n, t), (2, vec![3, 1, 0, 2]));
        assert!(parse_sbox("f2b").is_err());
        assert!(parse_sbox("zz").is_err());
    }

    #[test]
    fn hex_conversions() {
        let v = BitVec::parse_bits("10100011").unwrap();
        assert_eq!(hex_of(&v), "a3");
        assert_eq!(parse_hex("a3", 8).unwrap(), v);
        assert_eq!(parse_hex("0xa3", 8).unwrap(), v);
        assert!(parse_hex("a3", 12).is_err());
        assert_eq!(parse_hex("c", 2).unwrap(), BitVec::parse_bits("11").unwrap());
        assert!(parse_hex("d", 2).is_err());
    }

    #[test]
    fn cipher_round_trip() {
        let sbox = SBox::new(4, vec![15, 2, 11, 14, 9, 10, 5, 12, 0, 3, 7, 13, 4, 8, 1, 6]).unwrap();
        let keys = vec![BitVec::from_u64(0x3c, 8), BitVec::from_u64(0x01, 8)];
        let c = CipherSpec::new(2, sbox, BitMat::identity(8), keys).unwrap();
        let parts = parse_cipher(&emit_cipher(&c), None).unwrap();
        assert_eq!(CipherSpec::from_parts(parts).unwrap(), c);
    }

    #[test]
    fn cipher_mu_reference() {
        let dir = std::env::temp_dir().join(format!("bibrace-format-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("mu.mat"), emit_matrix(&BitMat::identity(4))).unwrap();
        let text = "h = 2\nn = 2\nr = 1\nsbox = 3 1 0 2\nmu = @mu.mat\nkeys = 9\n";
        let parts = parse_cipher(text, Some(&dir)).unwrap();
        assert_eq!(parts.mu, BitMat::identity(4));
        assert_eq!(parts.keys[0], BitVec::parse_bits("1001").unwrap());
        assert!(parse_cipher("h = 2\nh = 3\n", None).is_err());
        assert!(parse_cipher(&format!("{text}extra = 1\n"), Some(&dir)).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn record_round_trip(pairs in proptest::collection::vec(("[a-z_]{1,8}", "[ -~]{0,20}"), 0..8)) {
            let mut r = Record::new();
            for (k, v) in &pairs {
                r.push(k, v);
            }
            let text = r.emit();
            let parsed = Record::parse(&text).unwrap();
            prop_assert_eq!(parsed.emit(), text);
        }

        #[test]
        fn matrix_round_trip(rows in 1usize..6, cols in 1usize..9, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = BitMat::random(rows, cols, &mut rng);
            prop_assert_eq!(parse_matrix(&emit_matrix(&m)).unwrap(), m);
        }
    }
}
