//! Binary alternating algebras of nilpotency class two and the matching
//! binary bi-braces `x∘y = x + y + x·y`.
//!
//! An [`AlgebraSpec`] lives on `F2^m ⊕ F2^d`: the first `m` coordinates span a
//! complement `V` of the annihilator, the last `d` coordinates span the
//! annihilator `W`. The product is `(x₁,y₁)·(x₂,y₂) = (0, φ(x₁,x₂))` with
//! `φ(x₁,x₂) = (x₁B₁x₂ᵗ, …, x₁B_dx₂ᵗ)`.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::{hconcat_rank, reduce_basis, BitMat, BitVec, MatSpace};

/// Exhaustive axiom checks refuse beyond this dimension.
pub const AXIOM_GUARD: usize = 12;
/// Enumeration of `{x·y}` refuses beyond this dimension.
pub const IMAGE_GUARD: usize = 24;

/// Common surface of class-two products on `F2^n`, whether a single brick or a
/// direct sum of bricks.
pub trait ClassTwoAlgebra {
    fn dim(&self) -> usize;

    /// The product `x·y`. Panics on length mismatch.
    fn product(&self, x: &BitVec, y: &BitVec) -> BitVec;

    fn circle(&self, x: &BitVec, y: &BitVec) -> BitVec {
        let mut out = self.product(x, y);
        out.xor_assign(x);
        out.xor_assign(y);
        out
    }

    /// Matrix of `x ↦ x∘y + y = x + x·y`.
    fn lambda(&self, y: &BitVec) -> BitMat {
        let n = self.dim();
        let rows = (0..n)
            .map(|i| {
                let e = BitVec::unit(n, i);
                let mut r = self.product(&e, y);
                r.xor_assign(&e);
                r
            })
            .collect();
        BitMat::from_rows(rows).expect("square")
    }

    /// `{y : x·y = 0 = y·x for all x}`, from the product structure constants.
    fn annihilator(&self) -> Vec<BitVec> {
        let n = self.dim();
        // Row j lists e_i·e_j and e_j·e_i for every i; y is in Ann iff y kills every column.
        let rows: Vec<BitVec> = (0..n)
            .map(|j| {
                let ej = BitVec::unit(n, j);
                (0..n).fold(BitVec::zeros(0), |acc, i| {
                    let ei = BitVec::unit(n, i);
                    acc.concat(&self.product(&ei, &ej)).concat(&self.product(&ej, &ei))
                })
            })
            .collect();
        BitMat::from_rows(rows).expect("rectangular").left_kernel()
    }

    /// `{y : x∘y = x + y for all x}` computed as the kernel of `y ↦ λ_y + 1`.
    fn socle(&self) -> Vec<BitVec> {
        let n = self.dim();
        let id = BitMat::identity(n);
        let rows: Vec<BitVec> = (0..n)
            .map(|j| (&self.lambda(&BitVec::unit(n, j)) + &id).flatten())
            .collect();
        BitMat::from_rows(rows).expect("rectangular").left_kernel()
    }

    /// Reduced basis of `R² = ⟨x·y⟩`.
    fn r_squared(&self) -> Vec<BitVec> {
        let n = self.dim();
        let prods = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.product(&BitVec::unit(n, i), &BitVec::unit(n, j)))
            .collect();
        reduce_basis(prods)
    }
}

/// One violated defining-matrix condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MatrixCount { expected: usize, got: usize },
    Shape { matrix: usize, rows: usize, cols: usize },
    NonzeroDiagonal { matrix: usize, index: usize },
    NotSymmetric { matrix: usize, row: usize, col: usize },
    Degenerate { rank: usize, m: usize },
    EmptyDimension,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MatrixCount { expected, got } => {
                write!(f, "expected {expected} defining matrices, got {got}")
            }
            Violation::Shape { matrix, rows, cols } => {
                write!(f, "defining matrix B{} has shape {rows}x{cols}", matrix + 1)
            }
            Violation::NonzeroDiagonal { matrix, index } => write!(
                f,
                "condition (i) Theta_{{i,i}} = 0 violated: B{} has a nonzero diagonal entry at ({}, {})",
                matrix + 1,
                index + 1,
                index + 1
            ),
            Violation::NotSymmetric { matrix, row, col } => write!(
                f,
                "condition (ii) Theta_{{i,j}} = Theta_{{j,i}} violated: B{} is not symmetric at ({}, {})",
                matrix + 1,
                row + 1,
                col + 1
            ),
            Violation::Degenerate { rank, m } => write!(
                f,
                "condition (iii) Theta_1..Theta_m linearly independent violated: rank(B1 ... Bd) = {rank} < m = {m} (bilinear map is degenerate)"
            ),
            Violation::EmptyDimension => write!(f, "m and d must both be positive"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// `(m, d, B₁ … B_d)`: simultaneously a binary alternating algebra, a binary
/// bi-brace and its translation group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraSpec {
    m: usize,
    d: usize,
    defining: Vec<BitMat>,
}

impl AlgebraSpec {
    /// Validated constructor.
    pub fn new(m: usize, d: usize, defining: Vec<BitMat>) -> Result<Self> {
        let spec = Self::new_unchecked(m, d, defining);
        let report = spec.validate();
        if report.is_valid() {
            Ok(spec)
        } else {
            Err(Error::InvalidAlgebra(report.to_string()))
        }
    }

    /// Skips validation. Shapes are still required to be `m×m`; useful to
    /// study what breaks when the defining conditions fail.
    pub fn new_unchecked(m: usize, d: usize, defining: Vec<BitMat>) -> Self {
        Self { m, d, defining }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.m + self.d
    }

    pub fn defining(&self) -> &[BitMat] {
        &self.defining
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.m == 0 || self.d == 0 {
            violations.push(Violation::EmptyDimension);
        }
        if self.defining.len() != self.d {
            violations.push(Violation::MatrixCount {
                expected: self.d,
                got: self.defining.len(),
            });
        }
        let mut shapes_ok = true;
        for (k, b) in self.defining.iter().enumerate() {
            if b.rows() != self.m || b.cols() != self.m {
                shapes_ok = false;
                violations.push(Violation::Shape {
                    matrix: k,
                    rows: b.rows(),
                    cols: b.cols(),
                });
                continue;
            }
            if let Some(i) = (0..self.m).find(|&i| b.get(i, i)) {
                violations.push(Violation::NonzeroDiagonal { matrix: k, index: i });
            }
            let asym = (0..self.m)
                .flat_map(|i| ((i + 1)..self.m).map(move |j| (i, j)))
                .find(|&(i, j)| b.get(i, j) != b.get(j, i));
            if let Some((row, col)) = asym {
                violations.push(Violation::NotSymmetric { matrix: k, row, col });
            }
        }
        if shapes_ok && !self.defining.is_empty() && self.m > 0 {
            let rank = hconcat_rank(&self.defining).unwrap_or(0);
            if rank < self.m {
                violations.push(Violation::Degenerate { rank, m: self.m });
            }
        } else if self.defining.is_empty() && self.m > 0 {
            violations.push(Violation::Degenerate { rank: 0, m: self.m });
        }
        ValidationReport { violations }
    }

    /// `φ(x, y)` on `V`-vectors of length `m`.
    pub fn phi(&self, x: &BitVec, y: &BitVec) -> BitVec {
        BitVec::from_bits(self.defining.iter().map(|b| b.bilinear(x, y)))
    }

    fn check_len(&self, v: &BitVec) -> Result<()> {
        if v.len() == self.n() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "expected a vector of length {}, got {}",
                self.n(),
                v.len()
            )))
        }
    }

    pub fn dot(&self, x: &BitVec, y: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.product(x, y))
    }

    pub fn circle_checked(&self, x: &BitVec, y: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.circle(x, y))
    }

    /// The block upper-unitriangular matrix `(1_m  (B₁y_Vᵗ … B_dy_Vᵗ); 0  1_d)`.
    pub fn lambda_of(&self, y: &BitVec) -> Result<BitMat> {
        self.check_len(y)?;
        let yv = y.slice(0, self.m);
        let mut out = BitMat::identity(self.n());
        for (k, b) in self.defining.iter().enumerate() {
            let col = b.mul_vec_right(&yv);
            for i in col.ones() {
                out.set(i, self.m + k, true);
            }
        }
        Ok(out)
    }

    /// The translation `τ_y : x ↦ x·λ_y + y`.
    pub fn translation_of(&self, y: &BitVec) -> Result<AffineMap> {
        Ok(AffineMap {
            linear: self.lambda_of(y)?,
            shift: y.clone(),
        })
    }

    /// Standing-basis annihilator `⟨e_{m+1}, …, e_{m+d}⟩`.
    pub fn standard_annihilator(&self) -> Vec<BitVec> {
        (self.m..self.n()).map(|i| BitVec::unit(self.n(), i)).collect()
    }

    /// Basis of `R²`, embedded in the last `d` coordinates.
    pub fn r_squared_basis(&self) -> Vec<BitVec> {
        self.r_squared()
    }

    pub fn defining_span(&self) -> MatSpace {
        MatSpace::span(self.m, &self.defining).expect("shapes validated")
    }

    pub fn r_squared_dim(&self) -> usize {
        self.defining_span().dim()
    }

    /// The exact set `{x·y}`; it need not be a subspace.
    pub fn product_image(&self) -> Result<BTreeSet<BitVec>> {
        if self.n() > IMAGE_GUARD {
            return Err(Error::SizeGuard(format!(
                "product image enumeration limited to n <= {IMAGE_GUARD}, got n = {}",
                self.n()
            )));
        }
        let packed = PackedAlgebra::new(self)?;
        let m = self.m;
        let values: BTreeSet<u64> = (0u64..(1 << m))
            .into_par_iter()
            .fold(BTreeSet::new, |mut acc, xv| {
                for yv in 0u64..(1 << m) {
                    acc.insert(packed.phi(xv, yv));
                }
                acc
            })
            .reduce(BTreeSet::new, |mut a, b| {
                a.extend(b);
                a
            });
        Ok(values.into_iter().map(|w| BitVec::from_u64(w, self.n())).collect())
    }

    /// The `∘`-difference after XOR key addition: `(x+k) ∘ ((x∘Δ)+k)`.
    pub fn key_addition_difference(&self, x: &BitVec, k: &BitVec, delta: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        self.check_len(k)?;
        self.check_len(delta)?;
        let left = x + k;
        let right = &self.circle(x, delta) + k;
        Ok(self.circle(&left, &right))
    }

    /// Exhaustively checks every bi-brace axiom, every alternating-algebra
    /// identity, both normalisations of the translation group, the
    /// λ-homomorphism and `Soc = Ann = ker λ`.
    pub fn validate_axioms(&self) -> Result<AxiomReport> {
        if self.n() > AXIOM_GUARD {
            return Err(Error::SizeGuard(format!(
                "exhaustive axiom checks limited to n <= {AXIOM_GUARD}, got n = {}",
                self.n()
            )));
        }
        let packed = PackedAlgebra::new(self)?;
        Ok(axioms::run(self, &packed))
    }
}

impl ClassTwoAlgebra for AlgebraSpec {
    fn dim(&self) -> usize {
        self.n()
    }

    fn product(&self, x: &BitVec, y: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.n(), "product operand length");
        assert_eq!(y.len(), self.n(), "product operand length");
        let phi = self.phi(&x.slice(0, self.m), &y.slice(0, self.m));
        let mut out = BitVec::zeros(self.n());
        out.splice(self.m, &phi);
        out
    }
}

/// Affine map `x ↦ x·linear + shift`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub linear: BitMat,
    pub shift: BitVec,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        Self {
            linear: BitMat::identity(n),
            shift: BitVec::zeros(n),
        }
    }

    pub fn apply(&self, x: &BitVec) -> BitVec {
        let mut out = self.linear.mul_vec_left(x);
        out.xor_assign(&self.shift);
        out
    }

    /// `self` followed by `next` (maps act on the right).
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        let mut shift = next.linear.mul_vec_left(&self.shift);
        shift.xor_assign(&next.shift);
        AffineMap {
            linear: &self.linear * &next.linear,
            shift,
        }
    }
}

/// Compact presentation `Θ = (Θ₁ … Θ_m)` of a bi-brace. Row `j` of the `m×d`
/// block `Θ_i` is `φ(e_j, e_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaMatrix {
    m: usize,
    d: usize,
    blocks: Vec<BitMat>,
}

impl ThetaMatrix {
    pub fn from_blocks(m: usize, d: usize, blocks: Vec<BitMat>) -> Result<Self> {
        if blocks.len() != m || blocks.iter().any(|b| b.rows() != m || b.cols() != d) {
            return Err(Error::InvalidTheta(format!("expected {m} blocks of shape {m}x{d}")));
        }
        let theta = Self { m, d, blocks };
        theta.validate()?;
        Ok(theta)
    }

    /// Splits an `m×(m·d)` matrix into its blocks.
    pub fn from_matrix(m: usize, d: usize, mat: &BitMat) -> Result<Self> {
        if mat.rows() != m || mat.cols() != m * d {
            return Err(Error::InvalidTheta(format!(
                "expected a {m}x{} matrix, got {}x{}",
                m * d,
                mat.rows(),
                mat.cols()
            )));
        }
        let blocks = (0..m).map(|i| mat.block(0, i * d, m, d)).collect();
        Self::from_blocks(m, d, blocks)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &[BitMat] {
        &self.blocks
    }

    pub fn as_matrix(&self) -> BitMat {
        BitMat::hconcat(&self.blocks).expect("blocks share row count")
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.m {
            if !self.blocks[i].row(i).is_zero() {
                return Err(Error::InvalidTheta(format!(
                    "condition (i) violated: Theta_{{{0},{0}}} is nonzero",
                    i + 1
                )));
            }
            for j in (i + 1)..self.m {
                if self.blocks[i].row(j) != self.blocks[j].row(i) {
                    return Err(Error::InvalidTheta(format!(
                        "condition (ii) violated: Theta_{{{},{}}} != Theta_{{{},{}}}",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let flat: Vec<BitVec> = self.blocks.iter().map(BitMat::flatten).collect();
        let rank = reduce_basis(flat).len();
        if rank < self.m {
            return Err(Error::InvalidTheta(format!(
                "condition (iii) violated: Theta_1..Theta_m span a space of dimension {rank} < {}",
                self.m
            )));
        }
        Ok(())
    }
}

pub fn theta_from_spec(spec: &AlgebraSpec) -> ThetaMatrix {
    let (m, d) = (spec.m(), spec.d());
    let blocks = (0..m)
        .map(|i| {
            let mut block = BitMat::zeros(m, d);
            for (k, b) in spec.defining().iter().enumerate() {
                for j in 0..m {
                    block.set(j, k, b.get(j, i));
                }
            }
            block
        })
        .collect();
    ThetaMatrix { m, d, blocks }
}

pub fn spec_from_theta(theta: &ThetaMatrix) -> Result<AlgebraSpec> {
    let (m, d) = (theta.m(), theta.d());
    let defining = (0..d)
        .map(|k| {
            let mut b = BitMat::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    b.set(j, i, theta.blocks()[i].get(j, k));
                }
            }
            b
        })
        .collect();
    AlgebraSpec::new(m, d, defining)
}

/// Direct sum `S = R₁ ⊕ … ⊕ R_h` with brick-wise product. Brick `i` occupies
/// coordinates `[offset_i, offset_i + n_i)`, bricks laid out one after the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelAlgebra {
    bricks: Vec<AlgebraSpec>,
}

impl ParallelAlgebra {
    pub fn direct_sum(bricks: Vec<AlgebraSpec>) -> Result<Self> {
        if bricks.is_empty() {
            return Err(Error::Dimension("direct sum needs at least one brick".into()));
        }
        Ok(Self { bricks })
    }

    pub fn bricks(&self) -> &[AlgebraSpec] {
        &self.bricks
    }

    pub fn h(&self) -> usize {
        self.bricks.len()
    }

    pub fn offset(&self, brick: usize) -> usize {
        self.bricks[..brick].iter().map(AlgebraSpec::n).sum()
    }

    /// True when all bricks share `(m, d)`.
    pub fn is_uniform(&self) -> bool {
        let (m, d) = (self.bricks[0].m(), self.bricks[0].d());
        self.bricks.iter().all(|b| b.m() == m && b.d() == d)
    }

    pub fn split(&self, x: &BitVec) -> Vec<BitVec> {
        let mut start = 0;
        self.bricks
            .iter()
            .map(|b| {
                let part = x.slice(start, start + b.n());
                start += b.n();
                part
            })
            .collect()
    }

    pub fn join(&self, parts: &[BitVec]) -> BitVec {
        let mut out = BitVec::zeros(self.dim());
        let mut start = 0;
        for p in parts {
            out.splice(start, p);
            start += p.len();
        }
        out
    }
}

/// The `h`-fold parallel extension of one brick.
pub fn parallel_extend(spec: &AlgebraSpec, h: usize) -> Result<ParallelAlgebra> {
    if h == 0 {
        return Err(Error::Dimension("brick count h must be at least 1".into()));
    }
    ParallelAlgebra::direct_sum(vec![spec.clone(); h])
}

impl ClassTwoAlgebra for ParallelAlgebra {
    fn dim(&self) -> usize {
        self.bricks.iter().map(AlgebraSpec::n).sum()
    }

    fn product(&self, x: &BitVec, y: &BitVec) -> BitVec {
        let xs = self.split(x);
        let ys = self.split(y);
        let parts: Vec<BitVec> = self
            .bricks
            .iter()
            .zip(xs.iter().zip(&ys))
            .map(|(b, (xi, yi))| b.product(xi, yi))
            .collect();
        self.join(&parts)
    }
}

/// A class-two product given by its structure constants `e_i·e_j`, in any basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableAlgebra {
    n: usize,
    table: Vec<BitVec>,
}

impl TableAlgebra {
    pub fn new(n: usize, table: Vec<BitVec>) -> Result<Self> {
        if table.len() != n * n || table.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension(format!(
                "structure table needs {n}x{n} vectors of length {n}"
            )));
        }
        Ok(Self { n, table })
    }

    pub fn from_product<A: ClassTwoAlgebra>(alg: &A) -> Self {
        let n = alg.dim();
        let table = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| alg.product(&BitVec::unit(n, i), &BitVec::unit(n, j)))
            .collect();
        Self { n, table }
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &BitVec {
        &self.table[i * self.n + j]
    }
}

impl ClassTwoAlgebra for TableAlgebra {
    fn dim(&self) -> usize {
        self.n
    }

    fn product(&self, x: &BitVec, y: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let mut out = BitVec::zeros(self.n);
        for i in x.ones() {
            for j in y.ones() {
                out.xor_assign(&self.table[i * self.n + j]);
            }
        }
        out
    }
}

/// Word-packed form of an [`AlgebraSpec`] for exhaustive loops. Elements are
/// `u64` with coordinate 0 as the most significant of the low `n` bits, so
/// `x >> d` is the `V`-part and `x & (2^d - 1)` the `W`-part.
#[derive(Clone, Debug)]
pub struct PackedAlgebra {
    m: usize,
    d: usize,
    /// `rows[k][i]` = row `i` of `B_k` as an `m`-bit mask.
    rows: Vec<Vec<u64>>,
    table: Option<Vec<u32>>,
}

impl PackedAlgebra {
    pub fn new(spec: &AlgebraSpec) -> Result<Self> {
        if spec.n() > 32 {
            return Err(Error::SizeGuard(format!(
                "packed algebra limited to n <= 32, got {}",
                spec.n()
            )));
        }
        let m = spec.m();
        let rows = spec
            .defining()
            .iter()
            .map(|b| (0..m).map(|i| b.row(i).to_u64()).collect())
            .collect();
        let mut packed = Self {
            m,
            d: spec.d(),
            rows,
            table: None,
        };
        if m <= 8 {
            let table = (0u64..(1 << (2 * m)))
                .map(|code| packed.phi_slow(code >> m, code & ((1 << m) - 1)) as u32)
                .collect();
            packed.table = Some(table);
        }
        Ok(packed)
    }

    pub fn n(&self) -> usize {
        self.m + self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn phi_slow(&self, xv: u64, yv: u64) -> u64 {
        let mut out = 0u64;
        for (k, rows) in self.rows.iter().enumerate() {
            let mut t = 0u64;
            let mut bits = xv;
            while bits != 0 {
                let pos = 63 - bits.leading_zeros() as usize; // bit position from LSB
                let i = self.m - 1 - pos;
                t ^= rows[i];
                bits &= !(1u64 << pos);
            }
            if (t & yv).count_ones() & 1 == 1 {
                out |= 1 << (self.d - 1 - k);
            }
        }
        out
    }

    /// `φ` on `V`-parts, as a `d`-bit `W`-value.
    #[inline]
    pub fn phi(&self, xv: u64, yv: u64) -> u64 {
        match &self.table {
            Some(t) => u64::from(t[((xv << self.m) | yv) as usize]),
            None => self.phi_slow(xv, yv),
        }
    }

    #[inline]
    pub fn dot(&self, x: u64, y: u64) -> u64 {
        self.phi(x >> self.d, y >> self.d)
    }

    #[inline]
    pub fn circle(&self, x: u64, y: u64) -> u64 {
        x ^ y ^ self.dot(x, y)
    }
}

/// Outcome of one exhaustive identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.checks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
            if let Some(ce) = &c.counterexample {
                write!(f, " ({ce})")?;
            }
        }
        Ok(())
    }
}

mod axioms {
    use super::*;

    pub const GROUP: &str = "bi-brace: (R,o) is a group";
    pub const CIRCLE_NIL: &str = "bi-brace: x o x = 0";
    pub const RIGHT_DISTRIB: &str = "bi-brace: (x+y) o z = x o z + z + y o z";
    pub const BI_SKEW: &str = "bi-brace: x o y + z = (x+z) o z o (y+z)";
    pub const SCALAR: &str = "bi-brace: d(x o y) = x o (d y) + (d+1) x for d in F2";
    pub const CIRCLE_COMM: &str = "commutativity x o y = y o x";
    pub const BILINEAR: &str = "alternating algebra: distributivity of the product";
    pub const CLASS_TWO: &str = "alternating algebra: (x.y).z = 0 = x.(y.z)";
    pub const ALTERNATING: &str = "alternating algebra: x.x = 0";
    pub const DOT_COMM: &str = "commutativity x.y = y.x";
    pub const TRANSLATIONS: &str = "translation group: x tau_y = x lambda_y + y = x o y";
    pub const REGULAR: &str = "translation group: regular, exactly one y with 0 tau_y = b";
    pub const ELEMENTARY: &str = "translation group: elementary abelian: tau_y tau_z = tau_(y o z)";
    pub const PLUS_NORMALISES: &str = "translation group: T+ normalises T_o";
    pub const CIRCLE_NORMALISES: &str = "translation group: T_o normalises T+";
    pub const LAMBDA_HOM: &str = "lambda_y lambda_z = lambda_(y o z)";
    pub const SOCLE: &str = "Soc = Ann = ker lambda = <e_(m+1..n)>";

    fn pair_check<F>(size: u64, f: F) -> Option<String>
    where
        F: Fn(u64, u64) -> Option<String> + Sync,
    {
        (0..size)
            .into_par_iter()
            .find_map_first(|x| (0..size).find_map(|y| f(x, y)))
    }

    fn triple_check<F>(size: u64, f: F) -> Option<String>
    where
        F: Fn(u64, u64, u64) -> Option<String> + Sync,
    {
        (0..size)
            .into_par_iter()
            .find_map_first(|x| (0..size).find_map(|y| (0..size).find_map(|z| f(x, y, z))))
    }

    fn single_check<F>(size: u64, f: F) -> Option<String>
    where
        F: Fn(u64) -> Option<String> + Sync + Send,
    {
        (0..size).into_par_iter().find_map_first(f)
    }

    fn check(name: &'static str, counterexample: Option<String>) -> AxiomCheck {
        AxiomCheck {
            name,
            passed: counterexample.is_none(),
            counterexample,
        }
    }

    pub fn run(spec: &AlgebraSpec, p: &PackedAlgebra) -> AxiomReport {
        let n = p.n();
        let size = 1u64 << n;
        let fmt = |v: u64| BitVec::from_u64(v, n).to_string();
        let c = |x: u64, y: u64| p.circle(x, y);
        let dot = |x: u64, y: u64| p.dot(x, y);

        // circle inverses, found by scan so the group check does not presuppose x o x = 0
        let inverse: Vec<Option<u64>> = (0..size).map(|x| (0..size).find(|&y| c(x, y) == 0)).collect();

        let mut checks = Vec::new();

        let group = single_check(size, |x| {
            if c(x, 0) != x || c(0, x) != x {
                return Some(format!("0 is not neutral for x = {}", fmt(x)));
            }
            match inverse[x as usize] {
                Some(y) if c(y, x) == 0 => None,
                _ => Some(format!("x = {} has no two-sided inverse", fmt(x))),
            }
        })
        .or_else(|| {
            triple_check(size, |x, y, z| {
                (c(c(x, y), z) != c(x, c(y, z)))
                    .then(|| format!("associativity fails at x = {}, y = {}, z = {}", fmt(x), fmt(y), fmt(z)))
            })
        });
        checks.push(check(GROUP, group));

        checks.push(check(
            CIRCLE_NIL,
            single_check(size, |x| (c(x, x) != 0).then(|| format!("x = {}", fmt(x)))),
        ));
        checks.push(check(
            RIGHT_DISTRIB,
            triple_check(size, |x, y, z| {
                (c(x ^ y, z) != c(x, z) ^ z ^ c(y, z))
                    .then(|| format!("x = {}, y = {}, z = {}", fmt(x), fmt(y), fmt(z)))
            }),
        ));
        checks.push(check(
            BI_SKEW,
            triple_check(size, |x, y, z| {
                (c(x, y) ^ z != c(c(x ^ z, z), y ^ z))
                    .then(|| format!("x = {}, y = {}, z = {}", fmt(x), fmt(y), fmt(z)))
            }),
        ));
        checks.push(check(
            SCALAR,
            pair_check(size, |x, y| {
                // d = 0: 0 = x o 0 + x ; d = 1: x o y = x o y
                let zero_case = c(x, 0) ^ x;
                let one_case = c(x, y) ^ c(x, y);
                (zero_case != 0 || one_case != 0).then(|| format!("x = {}, y = {}", fmt(x), fmt(y)))
            }),
        ));
        checks.push(check(
            CIRCLE_COMM,
            pair_check(size, |x, y| {
                (c(x, y) != c(y, x)).then(|| format!("x = {}, y = {}", fmt(x), fmt(y)))
            }),
        ));

        checks.push(check(
            BILINEAR,
            triple_check(size, |x, y, z| {
                (dot(x ^ y, z) != dot(x, z) ^ dot(y, z) || dot(x, y ^ z) != dot(x, y) ^ dot(x, z))
                    .then(|| format!("x = {}, y = {}, z = {}", fmt(x), fmt(y), fmt(z)))
            }),
        ));
        checks.push(check(
            CLASS_TWO,
            triple_check(size, |x, y, z| {
                (dot(dot(x, y), z) != 0 || dot(x, dot(y, z)) != 0)
                    .then(|| format!("x = {}, y = {}, z = {}", fmt(x), fmt(y), fmt(z)))
            }),
        ));
        checks.push(check(
            ALTERNATING,
            single_check(size, |x| (dot(x, x) != 0).then(|| format!("x = {}", fmt(x)))),
        ));
        checks.push(check(
            DOT_COMM,
            pair_check(size, |x, y| {
                (dot(x, y) != dot(y, x)).then(|| format!("x = {}, y = {}", fmt(x), fmt(y)))
            }),
        ));

        // λ_y as images of the basis vectors e_0..e_{n-1}
        let basis: Vec<u64> = (0..n).map(|i| 1u64 << (n - 1 - i)).collect();
        let lambda_rows = |y: u64| -> Vec<u64> { basis.iter().map(|&e| e ^ dot(e, y)).collect() };
        let apply_rows = |rows: &[u64], x: u64| -> u64 {
            rows.iter()
                .enumerate()
                .filter(|(i, _)| (x >> (n - 1 - i)) & 1 == 1)
                .fold(0, |acc, (_, r)| acc ^ r)
        };
        let lambdas: Vec<Vec<u64>> = (0..size).map(lambda_rows).collect();
        let tau_slow = |y: u64, x: u64| apply_rows(&lambdas[y as usize], x) ^ y;
        // full table while it stays small (n <= 10 is 8 MiB)
        let tau_table: Option<Vec<u64>> =
            (n <= 10).then(|| (0..size).flat_map(|y| (0..size).map(move |x| tau_slow(y, x))).collect());
        let tau = |y: u64, x: u64| match &tau_table {
            Some(t) => t[((y << n) | x) as usize],
            None => tau_slow(y, x),
        };

        // the BitMat route for λ must agree with the packed table on every y
        let translations = single_check(size, |y| {
            let lam = spec.lambda_of(&BitVec::from_u64(y, n)).expect("length matches");
            (0..size).find_map(|x| {
                let via_mat = lam.mul_vec_left(&BitVec::from_u64(x, n)).to_u64() ^ y;
                (via_mat != c(x, y) || tau(y, x) != c(x, y)).then(|| format!("x = {}, y = {}", fmt(x), fmt(y)))
            })
        });
        checks.push(check(TRANSLATIONS, translations));

        let regular = single_check(size, |b| {
            let count = (0..size).filter(|&y| tau(y, 0) == b).count();
            (count != 1).then(|| format!("b = {} reached by {count} translations", fmt(b)))
        });
        checks.push(check(REGULAR, regular));

        let elementary = pair_check(size, |y, z| {
            let yz = c(y, z);
            (0..size)
                .find(|&x| tau(z, tau(y, x)) != tau(yz, x) || tau(y, tau(y, x)) != x)
                .map(|x| format!("y = {}, z = {}, x = {}", fmt(y), fmt(z), fmt(x)))
        });
        checks.push(check(ELEMENTARY, elementary));

        // σ_k⁻¹ τ_y σ_k must be the translation τ_z with z its image of 0.
        let plus_norm = pair_check(size, |k, y| {
            let z = tau(y, k) ^ k;
            (0..size)
                .find(|&x| tau(y, x ^ k) ^ k != tau(z, x))
                .map(|x| format!("k = {}, y = {}, x = {}", fmt(k), fmt(y), fmt(x)))
        });
        checks.push(check(PLUS_NORMALISES, plus_norm));

        // τ_y⁻¹ σ_k τ_y must be the XOR translation by its image of 0.
        let circle_norm = pair_check(size, |y, k| {
            let Some(yinv) = inverse[y as usize] else {
                return Some(format!("y = {} has no inverse", fmt(y)));
            };
            let conj = |x: u64| tau(y, tau(yinv, x) ^ k);
            let shift = conj(0);
            (0..size)
                .find(|&x| conj(x) != x ^ shift)
                .map(|x| format!("y = {}, k = {}, x = {}", fmt(y), fmt(k), fmt(x)))
        });
        checks.push(check(CIRCLE_NORMALISES, circle_norm));

        let lambda_hom = pair_check(size, |y, z| {
            let lz = &lambdas[z as usize];
            let composed = lambdas[y as usize].iter().map(|&r| apply_rows(lz, r));
            (!composed.eq(lambdas[c(y, z) as usize].iter().copied())).then(|| format!("y = {}, z = {}", fmt(y), fmt(z)))
        });
        checks.push(check(LAMBDA_HOM, lambda_hom));

        let w_mask = (1u64 << p.d()) - 1;
        let socle = single_check(size, |y| {
            let in_w = y & !w_mask == 0;
            let in_soc = (0..size).all(|x| c(x, y) == x ^ y);
            let in_ann = (0..size).all(|x| dot(x, y) == 0 && dot(y, x) == 0);
            let in_ker = lambdas[y as usize] == basis;
            (in_soc != in_w || in_ann != in_w || in_ker != in_w).then(|| {
                format!(
                    "y = {}: standard {in_w}, socle {in_soc}, annihilator {in_ann}, ker lambda {in_ker}",
                    fmt(y)
                )
            })
        });
        checks.push(check(SOCLE, socle));

        AxiomReport { checks }
    }
}

pub use axioms::{
    ALTERNATING as AXIOM_ALTERNATING, BILINEAR as AXIOM_BILINEAR, BI_SKEW as AXIOM_BI_SKEW,
    CIRCLE_COMM as AXIOM_CIRCLE_COMMUTATIVE, CIRCLE_NIL as AXIOM_CIRCLE_NIL,
    CIRCLE_NORMALISES as AXIOM_CIRCLE_NORMALISES, CLASS_TWO as AXIOM_CLASS_TWO, DOT_COMM as AXIOM_DOT_COMMUTATIVE,
    ELEMENTARY as AXIOM_ELEMENTARY, GROUP as AXIOM_GROUP, LAMBDA_HOM as AXIOM_LAMBDA_HOM,
    PLUS_NORMALISES as AXIOM_PLUS_NORMALISES, REGULAR as AXIOM_REGULAR, RIGHT_DISTRIB as AXIOM_RIGHT_DISTRIB,
    SCALAR as AXIOM_SCALAR, SOCLE as AXIOM_SOCLE, TRANSLATIONS as AXIOM_TRANSLATIONS,
};
