//! Isomorphisms and automorphisms of class-two algebras: self-equivalences of
//! the bilinear map, congruence of defining spans, symplectic groups over F2
//! and automorphisms of direct sums.
//!
//! Every matrix acts on row vectors from the right. A block automorphism is
//! `(A C; 0 D)` with `A` acting on `V = F2^m` and `D` on `W = F2^d`.

use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{AlgebraSpec, ClassTwoAlgebra, ParallelAlgebra, TableAlgebra};
use crate::error::{Error, Result};
use crate::gf2::{general_linear_group, span_elements, BitMat, BitVec, MatSpace};

/// Brute-force enumeration refuses beyond this dimension.
pub const BRUTE_FORCE_GUARD: usize = 6;
/// Rank profiles are only computed for spans up to this dimension.
const PROFILE_GUARD: usize = 16;

/// Block upper-triangular map `(A C; 0 D)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockAut {
    pub a: BitMat,
    pub c: BitMat,
    pub d: BitMat,
}

impl BlockAut {
    pub fn new(a: BitMat, c: BitMat, d: BitMat) -> Result<Self> {
        let (m, dd) = (a.rows(), d.rows());
        if !a.is_square() || !d.is_square() || c.rows() != m || c.cols() != dd {
            return Err(Error::Dimension(format!(
                "block shapes A {}x{}, C {}x{}, D {}x{} do not fit",
                a.rows(),
                a.cols(),
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            )));
        }
        Ok(Self { a, c, d })
    }

    pub fn identity(m: usize, d: usize) -> Self {
        Self {
            a: BitMat::identity(m),
            c: BitMat::zeros(m, d),
            d: BitMat::identity(d),
        }
    }

    pub fn matrix(&self) -> BitMat {
        let (m, d) = (self.a.rows(), self.d.rows());
        BitMat::from_blocks(&self.a, &self.c, &BitMat::zeros(d, m), &self.d).expect("shapes checked")
    }

    /// Splits `β` into blocks; `None` when the lower-left block is nonzero.
    pub fn from_matrix(m: usize, d: usize, beta: &BitMat) -> Option<Self> {
        if beta.rows() != m + d || beta.cols() != m + d || !beta.block(m, 0, d, m).is_zero() {
            return None;
        }
        Some(Self {
            a: beta.block(0, 0, m, m),
            c: beta.block(0, m, m, d),
            d: beta.block(m, m, d, d),
        })
    }
}

/// `(e_iβ)·(e_jβ) = (e_i·e_j)β` for all basis pairs, from `R` to `S`.
pub fn is_homomorphism<R: ClassTwoAlgebra, S: ClassTwoAlgebra>(r: &R, s: &S, beta: &BitMat) -> bool {
    let n = r.dim();
    if beta.rows() != n || beta.cols() != s.dim() {
        return false;
    }
    (0..n).all(|i| {
        (i..n).all(|j| {
            let lhs = beta.mul_vec_left(&r.product(&BitVec::unit(n, i), &BitVec::unit(n, j)));
            lhs == s.product(beta.row(i), beta.row(j))
                && beta.mul_vec_left(&r.product(&BitVec::unit(n, j), &BitVec::unit(n, i)))
                    == s.product(beta.row(j), beta.row(i))
        })
    })
}

pub fn is_isomorphism<R: ClassTwoAlgebra, S: ClassTwoAlgebra>(r: &R, s: &S, beta: &BitMat) -> bool {
    r.dim() == s.dim() && beta.is_invertible() && is_homomorphism(r, s, beta)
}

/// Invertible and compatible with the product on basis pairs, which suffices
/// by bilinearity.
pub fn is_automorphism<R: ClassTwoAlgebra>(r: &R, beta: &BitMat) -> bool {
    is_isomorphism(r, r, beta)
}

/// `φ_R(e_i, e_j)·D = φ_S(e_iA, e_jA)` for all basis pairs.
pub fn is_equivalence(r: &AlgebraSpec, s: &AlgebraSpec, a: &BitMat, d: &BitMat) -> bool {
    let m = r.m();
    if a.rows() != m || a.cols() != s.m() || d.rows() != r.d() || d.cols() != s.d() {
        return false;
    }
    (0..m).all(|i| {
        (0..m).all(|j| d.mul_vec_left(&r.phi(&BitVec::unit(m, i), &BitVec::unit(m, j))) == s.phi(a.row(i), a.row(j)))
    })
}

pub fn is_self_equivalence(spec: &AlgebraSpec, a: &BitMat, d: &BitMat) -> bool {
    is_equivalence(spec, spec, a, d)
}

/// `A·B·Aᵗ = B` with `A` invertible.
pub fn sp_membership(b: &BitMat, a: &BitMat) -> bool {
    a.is_invertible() && a.congruence_apply(b).is_ok_and(|x| &x == b)
}

/// Matrix of the transvection `x ↦ x + φ_B(x, v)·v`.
pub fn transvection(b: &BitMat, v: &BitVec) -> BitMat {
    &BitMat::identity(b.rows()) + &BitMat::outer(&b.mul_vec_right(v), v)
}

/// Transvections over every `e_i` and every `e_i + e_j`.
pub fn symplectic_generators(b: &BitMat) -> Vec<BitMat> {
    let m = b.rows();
    let mut out: Vec<BitMat> = (0..m).map(|i| transvection(b, &BitVec::unit(m, i))).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            let v = &BitVec::unit(m, i) + &BitVec::unit(m, j);
            out.push(transvection(b, &v));
        }
    }
    out
}

/// Closure of a generating set under multiplication, sorted. Returns `None`
/// once more than `limit` elements have been found.
pub fn group_closure(generators: &[BitMat], limit: usize) -> Option<Vec<BitMat>> {
    let Some(first) = generators.first() else {
        return Some(Vec::new());
    };
    let mut seen = std::collections::BTreeSet::new();
    let id = BitMat::identity(first.rows());
    seen.insert(id.clone());
    let mut frontier = vec![id];
    while let Some(g) = frontier.pop() {
        for s in generators {
            let h = &g * s;
            if seen.insert(h.clone()) {
                if seen.len() > limit {
                    return None;
                }
                frontier.push(h);
            }
        }
    }
    Some(seen.into_iter().collect())
}

/// `|GL(n, 2)|`.
pub fn gl_order(n: usize) -> BigUint {
    let two_n = BigUint::from(1u8) << n;
    (0..n).fold(BigUint::from(1u8), |acc, i| acc * (&two_n - (BigUint::from(1u8) << i)))
}

/// `|Sp(m, 2)| = 2^{k²}·Π_{i=1..k}(2^{2i} − 1)` for `m = 2k`.
pub fn sp_order(m: usize) -> BigUint {
    assert!(m.is_multiple_of(2), "symplectic groups need even dimension");
    let k = m / 2;
    (1..=k).fold(BigUint::from(1u8) << (k * k), |acc, i| {
        acc * ((BigUint::from(1u8) << (2 * i)) - 1u8)
    })
}

/// `|Fix(b)| = |GL(d−1, 2)|·2^{d−1}` for nonzero `b`.
pub fn fix_order(d: usize) -> BigUint {
    gl_order(d - 1) << (d - 1)
}

/// All `D ∈ GL(d, 2)` with `b₁D = b₂`, in lexicographic order (`d ≤ 4`).
pub fn d_transport_set(b1: &BitVec, b2: &BitVec) -> Vec<BitMat> {
    general_linear_group(b1.len())
        .into_iter()
        .filter(|d| &d.mul_vec_left(b1) == b2)
        .collect()
}

/// `Fix(b)` by enumeration (`d ≤ 4`).
pub fn fix_group(b: &BitVec) -> Vec<BitMat> {
    d_transport_set(b, b)
}

/// An invertible `P` with `b·P = e_d` (the last basis vector).
pub fn fix_basis(b: &BitVec) -> Result<BitMat> {
    let d = b.len();
    if b.is_zero() {
        return Err(Error::Dimension("fix basis needs a nonzero vector".into()));
    }
    // Q has last row b, completed by unit vectors; then e_d·Q = b and P = Q⁻¹.
    let mut rows: Vec<BitVec> = Vec::with_capacity(d);
    let mut span = vec![b.clone()];
    for i in 0..d {
        if rows.len() == d - 1 {
            break;
        }
        let mut cand = span.clone();
        cand.push(BitVec::unit(d, i));
        if crate::gf2::reduce_basis(cand).len() == span.len() + 1 {
            span.push(BitVec::unit(d, i));
            rows.push(BitVec::unit(d, i));
        }
    }
    rows.push(b.clone());
    BitMat::from_rows(rows)?.inverse()
}

/// Uniform element of `Fix(b)`, sampled in the basis where `b` is the last
/// basis vector.
pub fn sample_fix<R: Rng + ?Sized>(b: &BitVec, rng: &mut R) -> Result<BitMat> {
    let d = b.len();
    let p = fix_basis(b)?;
    let p_inv = p.inverse()?;
    let last = BitVec::unit(d, d - 1);
    let inner = loop {
        let mut rows: Vec<BitVec> = (0..d - 1).map(|_| BitVec::random(d, rng)).collect();
        rows.push(last.clone());
        let cand = BitMat::from_rows(rows)?;
        if cand.is_invertible() {
            break cand;
        }
    };
    Ok(&(&p * &inner) * &p_inv)
}

/// Generator `B` of the defining span and `b` with `B_k = b_k·B`.
pub fn unidim_data(spec: &AlgebraSpec) -> Result<(BitMat, BitVec)> {
    let span = spec.defining_span();
    if span.dim() != 1 {
        return Err(Error::NotUniDimensional(span.dim()));
    }
    let b_mat = span.basis()[0].clone();
    let b = BitVec::from_bits(spec.defining().iter().map(|bk| !bk.is_zero()));
    Ok((b_mat, b))
}

/// Data describing `Sp(B)` and `Fix(b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SympWitness {
    pub b_mat: BitMat,
    pub generators: Vec<BitMat>,
    pub b: BitVec,
}

/// Factored order `|Sp| · |Fix(b)| · 2^{m·d}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutOrder {
    pub sp: BigUint,
    pub fix: BigUint,
    pub unipotent_exp: usize,
}

impl AutOrder {
    pub fn total(&self) -> BigUint {
        (&self.sp * &self.fix) << self.unipotent_exp
    }
}

impl fmt::Display for AutOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} * {} * 2^{} = {}",
            self.sp,
            self.fix,
            self.unipotent_exp,
            self.total()
        )
    }
}

/// `Aut(R)` when `dim R² = 1`: the semidirect product of `Sp(B) × Fix(b)`
/// with the unipotent blocks `(1 C; 0 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniDimAut {
    pub witness: SympWitness,
    /// `P` with `b·P = e_d`; `Fix(b) = P·{D′ : e_d D′ = e_d}·P⁻¹`.
    pub fix_basis: BitMat,
    pub order: AutOrder,
}

pub fn aut_group_unidim(spec: &AlgebraSpec) -> Result<UniDimAut> {
    let (b_mat, b) = unidim_data(spec)?;
    let generators = symplectic_generators(&b_mat);
    Ok(UniDimAut {
        fix_basis: fix_basis(&b)?,
        order: AutOrder {
            sp: sp_order(spec.m()),
            fix: fix_order(spec.d()),
            unipotent_exp: spec.m() * spec.d(),
        },
        witness: SympWitness { b_mat, generators, b },
    })
}

/// Random element of `Sp(B)` by a lazy random walk on the transvection
/// generators; laziness avoids parity traps.
pub fn sample_symplectic<R: Rng + ?Sized>(b_mat: &BitMat, generators: &[BitMat], rng: &mut R) -> BitMat {
    let m = b_mat.rows();
    let steps = 8 * m * m + 16;
    let mut a = BitMat::identity(m);
    for _ in 0..steps {
        if rng.random::<bool>() {
            a = &a * &generators[rng.random_range(0..generators.len())];
        }
    }
    a
}

fn sample_unidim_blocks<R: Rng + ?Sized>(aut: &UniDimAut, d: usize, rng: &mut R) -> Result<BlockAut> {
    let m = aut.witness.b_mat.rows();
    let a = sample_symplectic(&aut.witness.b_mat, &aut.witness.generators, rng);
    let c = BitMat::random(m, d, rng);
    let dd = sample_fix(&aut.witness.b, rng)?;
    BlockAut::new(a, c, dd)
}

/// Reproducible random automorphism for a given seed (`dim R² = 1`).
pub fn sample_automorphism(spec: &AlgebraSpec, seed: u64) -> Result<BitMat> {
    let aut = aut_group_unidim(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_unidim_blocks(&aut, spec.d(), &mut rng)?.matrix())
}

/// Every automorphism, by definitional check. For `n ≤ 4` the whole of
/// `GL(n, 2)` is scanned; for `n ≤ 6` only block upper-triangular candidates
/// are generated, with `(A, D)` filtered first since `C` never meets a product.
pub fn enumerate_aut_bruteforce(spec: &AlgebraSpec) -> Result<Vec<BitMat>> {
    let (m, d, n) = (spec.m(), spec.d(), spec.n());
    if n > BRUTE_FORCE_GUARD || m > 4 || d > 4 {
        return Err(Error::SizeGuard(format!(
            "brute-force automorphism enumeration limited to n <= {BRUTE_FORCE_GUARD}, got n = {n}"
        )));
    }
    let mut out: Vec<BitMat> = if n <= 4 {
        general_linear_group(n)
            .into_par_iter()
            .filter(|beta| is_automorphism(spec, beta))
            .collect()
    } else {
        let gl_d = general_linear_group(d);
        let cs: Vec<BitMat> = (0u64..(1 << (m * d)))
            .map(|code| BitMat::unflatten(&BitVec::from_u64(code, m * d), m, d))
            .collect();
        general_linear_group(m)
            .into_par_iter()
            .flat_map_iter(|a| {
                let pairs: Vec<(BitMat, BitMat)> = gl_d
                    .iter()
                    .filter(|dd| {
                        let cand = BlockAut::new(a.clone(), BitMat::zeros(m, d), (*dd).clone()).expect("shapes");
                        is_automorphism(spec, &cand.matrix())
                    })
                    .map(|dd| (a.clone(), dd.clone()))
                    .collect();
                pairs.into_iter().flat_map(|(a, dd)| {
                    cs.iter()
                        .map(move |c| {
                            BlockAut::new(a.clone(), c.clone(), dd.clone())
                                .expect("shapes")
                                .matrix()
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect()
    };
    out.sort();
    Ok(out)
}

fn check_same_shape(r: &AlgebraSpec, s: &AlgebraSpec) -> Result<()> {
    if r.m() != s.m() || r.d() != s.d() {
        return Err(Error::Dimension(format!(
            "algebras have shapes (m, d) = ({}, {}) and ({}, {})",
            r.m(),
            r.d(),
            s.m(),
            s.d()
        )));
    }
    Ok(())
}

/// Explicit isomorphism `R → S` when both have `dim R² = 1`: `A·B_S·Aᵗ = B_R`
/// from two symplectic reductions, `D` with `b_R·D = b_S`, `C = 0`.
pub fn iso_unidim(r: &AlgebraSpec, s: &AlgebraSpec) -> Result<BlockAut> {
    check_same_shape(r, s)?;
    let (br, vr) = unidim_data(r)?;
    let (bs, vs) = unidim_data(s)?;
    let (ar, _) = br.symplectic_reduce()?;
    let (as_, _) = bs.symplectic_reduce()?;
    let a = &ar.inverse()? * &as_;
    let d = if r.d() <= 2 {
        d_transport_set(&vr, &vs).into_iter().next().ok_or(Error::NoSolution)?
    } else {
        &fix_basis(&vr)? * &fix_basis(&vs)?.inverse()?
    };
    BlockAut::new(a, BitMat::zeros(r.m(), r.d()), d)
}

/// Three-valued isomorphism verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoVerdict {
    Isomorphic(BlockAut),
    NotIsomorphic(String),
    Indeterminate(String),
}

impl IsoVerdict {
    pub fn is_isomorphic(&self) -> Option<bool> {
        match self {
            IsoVerdict::Isomorphic(_) => Some(true),
            IsoVerdict::NotIsomorphic(_) => Some(false),
            IsoVerdict::Indeterminate(_) => None,
        }
    }
}

/// Decides whether `R ≅ S` via invariants of the defining spans, then a
/// constructive search. The returned witness maps `R → S`.
pub fn are_isomorphic(r: &AlgebraSpec, s: &AlgebraSpec) -> Result<IsoVerdict> {
    check_same_shape(r, s)?;
    let (span_r, span_s) = (r.defining_span(), s.defining_span());
    if span_r.dim() != span_s.dim() {
        return Ok(IsoVerdict::NotIsomorphic(format!(
            "defining spans have dimensions {} and {}",
            span_r.dim(),
            span_s.dim()
        )));
    }
    if span_r.dim() <= PROFILE_GUARD {
        let (pr, ps) = (span_r.rank_profile(), span_s.rank_profile());
        if pr != ps {
            return Ok(IsoVerdict::NotIsomorphic(format!(
                "rank profiles of the defining spans differ: {pr:?} vs {ps:?}"
            )));
        }
    }
    if span_r.dim() == 1 {
        return Ok(IsoVerdict::Isomorphic(iso_unidim(r, s)?));
    }
    if r.m() > 4 {
        return Ok(IsoVerdict::Indeterminate(format!(
            "congruence search limited to m <= 4, got m = {}",
            r.m()
        )));
    }
    let found = general_linear_group(r.m())
        .into_par_iter()
        .find_map_first(|a| solve_d(r, &span_r, s, &a).map(|d| (a, d)));
    Ok(match found {
        Some((a, d)) => IsoVerdict::Isomorphic(BlockAut::new(a, BitMat::zeros(r.m(), r.d()), d)?),
        None => IsoVerdict::NotIsomorphic("no A in GL(m, 2) makes the defining spans congruent".into()),
    })
}

/// Some invertible `D` with `A·C_j·Aᵗ = Σ_i B_i·D[i, j]`, if one exists.
fn solve_d(r: &AlgebraSpec, span_r: &MatSpace, s: &AlgebraSpec, a: &BitMat) -> Option<BitMat> {
    let d = r.d();
    let targets: Vec<BitMat> = s
        .defining()
        .iter()
        .map(|c| a.congruence_apply(c).expect("square"))
        .collect();
    if !targets.iter().all(|t| span_r.contains(t)) {
        return None;
    }
    let coeffs = BitMat::from_rows(r.defining().iter().map(BitMat::flatten).collect()).ok()?;
    let kernel = coeffs.left_kernel();
    if kernel.len() * d > 16 {
        return None;
    }
    let columns: Vec<Vec<BitVec>> = targets
        .iter()
        .map(|t| {
            let base = coeffs.solve_left(&t.flatten()).expect("target lies in the span");
            span_elements(&kernel, d).into_iter().map(|k| &base + &k).collect()
        })
        .collect();
    // Enumerate one solution per column and keep the first invertible D.
    let per = columns[0].len();
    (0..per.pow(d as u32)).find_map(|code| {
        let mut dm = BitMat::zeros(d, d);
        let mut rest = code;
        for (j, col) in columns.iter().enumerate() {
            let v = &col[rest % per];
            rest /= per;
            for i in v.ones() {
                dm.set(i, j, true);
            }
        }
        dm.is_invertible().then_some(dm)
    })
}

/// Re-expresses a class-two product in a basis whose last `d` vectors span
/// the annihilator. Returns the spec and `P` with `(x·_spec y)P = xP · yP`.
pub fn to_standard_basis<A: ClassTwoAlgebra>(alg: &A) -> Result<(AlgebraSpec, BitMat)> {
    let n = alg.dim();
    let ann = alg.annihilator();
    let d = ann.len();
    let m = n - d;
    let mut complement = Vec::with_capacity(m);
    let mut span = ann.clone();
    for i in 0..n {
        let mut cand = span.clone();
        cand.push(BitVec::unit(n, i));
        if crate::gf2::reduce_basis(cand).len() > span.len() {
            span.push(BitVec::unit(n, i));
            complement.push(BitVec::unit(n, i));
        }
    }
    let w = BitMat::from_rows(ann.clone())?;
    let mut defining = vec![BitMat::zeros(m, m); d];
    for (i, vi) in complement.iter().enumerate() {
        for (j, vj) in complement.iter().enumerate() {
            let coords = w
                .solve_left(&alg.product(vi, vj))
                .map_err(|_| Error::InvalidAlgebra("product does not land in the annihilator".into()))?;
            for k in coords.ones() {
                defining[k].set(i, j, true);
            }
        }
    }
    let spec = AlgebraSpec::new(m, d, defining)?;
    let p = BitMat::from_rows(complement.into_iter().chain(ann).collect())?;
    Ok((spec, p))
}

/// The product transported along `β`: `x ⋆ y = ((xβ⁻¹)·(yβ⁻¹))β`, so that
/// `β` is an isomorphism from `alg` to the result.
pub fn conjugate<A: ClassTwoAlgebra>(alg: &A, beta: &BitMat) -> Result<TableAlgebra> {
    let n = alg.dim();
    let inv = beta.inverse()?;
    let table = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| beta.mul_vec_left(&alg.product(inv.row(i), inv.row(j))))
        .collect();
    TableAlgebra::new(n, table)
}

/// Automorphism of an `h`-fold direct sum, kept as its `h×h` block grid.
/// Block `(i, j)` maps input brick `i` to output brick `j`; `pi[j]` is the
/// input brick feeding the `V`-part of output brick `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectSumAut {
    pub h: usize,
    pub blocks: Vec<Vec<BitMat>>,
    pub pi: Vec<usize>,
}

impl DirectSumAut {
    pub fn matrix(&self) -> BitMat {
        let nb = self.blocks[0][0].rows();
        let mut g = BitMat::zeros(self.h * nb, self.h * nb);
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                g.set_block(i * nb, j * nb, b);
            }
        }
        g
    }
}

/// Outcome of the block-condition check on a direct sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsumVerdict {
    pub member: bool,
    pub pi: Option<Vec<usize>>,
    pub reason: Option<String>,
}

impl DsumVerdict {
    fn reject(reason: String, pi: Option<Vec<usize>>) -> Self {
        Self {
            member: false,
            pi,
            reason: Some(reason),
        }
    }
}

fn uniform_shape(par: &ParallelAlgebra) -> Result<(usize, usize)> {
    if !par.is_uniform() {
        return Err(Error::Dimension(
            "direct-sum automorphisms need bricks of equal (m, d)".into(),
        ));
    }
    Ok((par.bricks()[0].m(), par.bricks()[0].d()))
}

/// Checks `G` against the block conditions: zero lower-left blocks, one
/// invertible `A`-block per block-column (giving `π`), the per-block
/// equivalence `φ_{jπ}(x, y)·D_{jπ,j} = φ_j(xA, yA)`, `R_i²·D_{i,j} = 0` off
/// that block, and an invertible `D`-grid.
pub fn dsum_aut_membership(par: &ParallelAlgebra, g: &BitMat) -> Result<DsumVerdict> {
    let (m, d) = uniform_shape(par)?;
    let (h, nb) = (par.h(), m + d);
    if g.rows() != h * nb || g.cols() != h * nb {
        return Err(Error::Dimension(format!(
            "expected a {0}x{0} matrix, got {1}x{2}",
            h * nb,
            g.rows(),
            g.cols()
        )));
    }
    let block = |i: usize, j: usize| g.block(i * nb, j * nb, nb, nb);
    for i in 0..h {
        for j in 0..h {
            if !block(i, j).block(m, 0, d, m).is_zero() {
                return Ok(DsumVerdict::reject(
                    format!("block ({}, {}) has a nonzero lower-left block", i + 1, j + 1),
                    None,
                ));
            }
        }
    }
    let mut pi = Vec::with_capacity(h);
    for j in 0..h {
        let nonzero: Vec<usize> = (0..h).filter(|&i| !block(i, j).block(0, 0, m, m).is_zero()).collect();
        if nonzero.len() != 1 {
            return Ok(DsumVerdict::reject(
                format!("block-column {} has {} nonzero A-blocks", j + 1, nonzero.len()),
                None,
            ));
        }
        if !block(nonzero[0], j).block(0, 0, m, m).is_invertible() {
            return Ok(DsumVerdict::reject(
                format!("A-block ({}, {}) is singular", nonzero[0] + 1, j + 1),
                None,
            ));
        }
        pi.push(nonzero[0]);
    }
    let mut sorted = pi.clone();
    sorted.sort_unstable();
    if sorted != (0..h).collect::<Vec<_>>() {
        return Ok(DsumVerdict::reject("A-blocks do not form a permutation".into(), None));
    }
    let pi = Some(pi);
    let bricks = par.bricks();
    for j in 0..h {
        let src = pi.as_ref().expect("set")[j];
        for i in 0..h {
            let b = block(i, j);
            let dij = b.block(m, m, d, d);
            if i == src {
                if !is_equivalence(&bricks[i], &bricks[j], &b.block(0, 0, m, m), &dij) {
                    return Ok(DsumVerdict::reject(
                        format!(
                            "block ({}, {}) is not an equivalence of the bilinear maps",
                            i + 1,
                            j + 1
                        ),
                        pi,
                    ));
                }
            } else if bricks[i]
                .r_squared()
                .iter()
                .any(|v| !dij.mul_vec_left(&v.slice(m, nb)).is_zero())
            {
                return Ok(DsumVerdict::reject(
                    format!("D-block ({}, {}) does not kill R^2", i + 1, j + 1),
                    pi,
                ));
            }
        }
    }
    let mut dgrid = BitMat::zeros(h * d, h * d);
    for i in 0..h {
        for j in 0..h {
            dgrid.set_block(i * d, j * d, &block(i, j).block(m, m, d, d));
        }
    }
    if !dgrid.is_invertible() {
        return Ok(DsumVerdict::reject("the D-grid is singular".into(), pi));
    }
    Ok(DsumVerdict {
        member: true,
        pi,
        reason: None,
    })
}

/// Assembles `G` from `π`, the `A`-blocks `a[j] = A_{jπ,j}`, the full `C`- and
/// `D`-grids, and validates it.
pub fn dsum_aut_construct(
    par: &ParallelAlgebra,
    pi: &[usize],
    a: &[BitMat],
    c: &[Vec<BitMat>],
    d_grid: &[Vec<BitMat>],
) -> Result<DirectSumAut> {
    let (m, d) = uniform_shape(par)?;
    let h = par.h();
    let shapes_ok = pi.len() == h
        && a.len() == h
        && c.len() == h
        && d_grid.len() == h
        && a.iter().all(|x| x.rows() == m && x.cols() == m)
        && c.iter()
            .all(|r| r.len() == h && r.iter().all(|x| x.rows() == m && x.cols() == d))
        && d_grid
            .iter()
            .all(|r| r.len() == h && r.iter().all(|x| x.rows() == d && x.cols() == d));
    if !shapes_ok {
        return Err(Error::Dimension("direct-sum block data has the wrong shape".into()));
    }
    let blocks: Vec<Vec<BitMat>> = (0..h)
        .map(|i| {
            (0..h)
                .map(|j| {
                    let ablock = if pi[j] == i { a[j].clone() } else { BitMat::zeros(m, m) };
                    BitMat::from_blocks(&ablock, &c[i][j], &BitMat::zeros(d, m), &d_grid[i][j]).expect("shapes")
                })
                .collect()
        })
        .collect();
    let aut = DirectSumAut {
        h,
        blocks,
        pi: pi.to_vec(),
    };
    let verdict = dsum_aut_membership(par, &aut.matrix())?;
    if !verdict.member {
        return Err(Error::DirectSumCondition(verdict.reason.unwrap_or_default()));
    }
    Ok(aut)
}

/// Random automorphism of a direct sum of bricks with `dim R² = 1`: random
/// `π`, per-block isomorphisms composed with random brick automorphisms,
/// random `C`, and off-diagonal `D`-blocks with `b_i·D = 0` (resampled until
/// the `D`-grid is invertible).
pub fn sample_dsum_aut<R: Rng + ?Sized>(par: &ParallelAlgebra, rng: &mut R) -> Result<DirectSumAut> {
    let (m, d) = uniform_shape(par)?;
    let h = par.h();
    let bricks = par.bricks();
    let auts: Vec<UniDimAut> = bricks.iter().map(aut_group_unidim).collect::<Result<_>>()?;
    let mut pi: Vec<usize> = (0..h).collect();
    pi.shuffle(rng);
    let mut a = Vec::with_capacity(h);
    let mut diag_d = Vec::with_capacity(h);
    for j in 0..h {
        let src = pi[j];
        let iso = iso_unidim(&bricks[src], &bricks[j])?;
        let own = sample_unidim_blocks(&auts[src], d, rng)?;
        a.push(&own.a * &iso.a);
        diag_d.push(&own.d * &iso.d);
    }
    let c: Vec<Vec<BitMat>> = (0..h)
        .map(|_| (0..h).map(|_| BitMat::random(m, d, rng)).collect())
        .collect();
    for _ in 0..64 {
        let d_grid: Vec<Vec<BitMat>> = (0..h)
            .map(|i| {
                (0..h)
                    .map(|j| {
                        if pi[j] == i {
                            diag_d[j].clone()
                        } else {
                            random_killing(&auts[i].witness.b, rng)
                        }
                    })
                    .collect()
            })
            .collect();
        match dsum_aut_construct(par, &pi, &a, &c, &d_grid) {
            Ok(aut) => return Ok(aut),
            Err(Error::DirectSumCondition(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    // Off-diagonal zero D-blocks always give an invertible grid.
    let d_grid: Vec<Vec<BitMat>> = (0..h)
        .map(|i| {
            (0..h)
                .map(|j| {
                    if pi[j] == i {
                        diag_d[j].clone()
                    } else {
                        BitMat::zeros(d, d)
                    }
                })
                .collect()
        })
        .collect();
    dsum_aut_construct(par, &pi, &a, &c, &d_grid)
}

/// Uniform `D` with `b·D = 0`.
fn random_killing<R: Rng + ?Sized>(b: &BitVec, rng: &mut R) -> BitMat {
    let d = b.len();
    let mut dm = BitMat::random(d, d, rng);
    let pivot = b.first_one().expect("b is nonzero");
    let mut fix = BitVec::zeros(d);
    for k in b.ones().filter(|&k| k != pivot) {
        fix.xor_assign(dm.row(k));
    }
    for col in 0..d {
        dm.set(pivot, col, fix.get(col));
    }
    dm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parallel_extend;
    use crate::catalog;

    fn bv(s: &str) -> BitVec {
        BitVec::parse_bits(s).unwrap()
    }

    #[test]
    fn automorphism_examples() {
        let r = catalog::minimal();
        assert!(is_automorphism(&r, &BitMat::identity(3)));
        let swap = BitMat::from_strs(&["010", "100", "001"]);
        assert!(is_automorphism(&r, &swap));
        let to_ann = BitMat::from_strs(&["001", "010", "100"]);
        assert!(!is_automorphism(&r, &to_ann));
    }

    #[test]
    fn orders() {
        assert_eq!(sp_order(2), BigUint::from(6u8));
        assert_eq!(sp_order(4), BigUint::from(720u16));
        assert_eq!(sp_order(6), BigUint::from(1_451_520u32));
        assert_eq!(gl_order(3), BigUint::from(168u8));
        assert_eq!(fix_order(1), BigUint::from(1u8));
        assert_eq!(fix_order(2), BigUint::from(2u8));
        assert_eq!(fix_order(3), BigUint::from(24u8));
    }

    #[test]
    fn symplectic_generators_close_to_full_group() {
        for (m, order) in [(2, 6), (4, 720)] {
            let b = catalog::standard_form(m);
            let gens = symplectic_generators(&b);
            assert!(gens.iter().all(|g| sp_membership(&b, g)));
            assert_eq!(group_closure(&gens, 1000).unwrap().len(), order);
        }
        let b = catalog::b1();
        let gens = symplectic_generators(&b);
        let closure = group_closure(&gens, 1000).unwrap();
        let scan = general_linear_group(4)
            .into_iter()
            .filter(|a| sp_membership(&b, a))
            .count();
        assert_eq!(closure.len(), scan);
    }

    #[test]
    fn sp_of_plane_is_gl2() {
        let b = catalog::standard_form(2);
        assert_eq!(
            general_linear_group(2).iter().filter(|a| sp_membership(&b, a)).count(),
            6
        );
    }

    #[test]
    fn self_equivalence_examples() {
        let spec = catalog::uni_dim(2, &bv("11"));
        assert!(is_self_equivalence(&spec, &BitMat::identity(2), &BitMat::identity(2)));
        let swap = BitMat::from_strs(&["01", "10"]);
        assert!(is_self_equivalence(&spec, &BitMat::identity(2), &swap));
        let other = BitMat::from_strs(&["10", "11"]);
        assert!(!is_self_equivalence(&spec, &BitMat::identity(2), &other));
    }

    #[test]
    fn fix_groups_of_m6_sequences() {
        let gen = |s: &[&str]| BitMat::from_strs(s);
        assert_eq!(fix_group(&bv("11")), vec![gen(&["01", "10"]), BitMat::identity(2)]);
        assert_eq!(fix_group(&bv("10")), vec![BitMat::identity(2), gen(&["10", "11"])]);
        assert_eq!(fix_group(&bv("01")), vec![BitMat::identity(2), gen(&["11", "01"])]);
    }

    #[test]
    fn fix_basis_maps_to_last_vector() {
        for code in 1..16 {
            let b = BitVec::from_u64(code, 4);
            let p = fix_basis(&b).unwrap();
            assert_eq!(p.mul_vec_left(&b), BitVec::unit(4, 3));
        }
    }

    #[test]
    fn unidim_orders_match_brute_force() {
        let r = catalog::minimal();
        assert_eq!(aut_group_unidim(&r).unwrap().order.to_string(), "6 * 1 * 2^2 = 24");
        assert_eq!(enumerate_aut_bruteforce(&r).unwrap().len(), 24);
        let r = catalog::uni_dim(2, &bv("11"));
        assert_eq!(aut_group_unidim(&r).unwrap().order.total(), BigUint::from(192u8));
        assert_eq!(enumerate_aut_bruteforce(&r).unwrap().len(), 192);
        assert!(matches!(
            aut_group_unidim(&catalog::square_full()),
            Err(Error::NotUniDimensional(4))
        ));
        assert!(enumerate_aut_bruteforce(&catalog::square_full()).is_err());
    }

    #[test]
    fn samples_cover_the_group() {
        let r = catalog::minimal();
        let all = enumerate_aut_bruteforce(&r).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..1000 {
            let beta = sample_automorphism(&r, seed).unwrap();
            assert!(is_automorphism(&r, &beta));
            seen.insert(beta);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), all);
        assert_eq!(sample_automorphism(&r, 7).unwrap(), sample_automorphism(&r, 7).unwrap());
    }

    #[test]
    fn iso_unidim_examples() {
        let j = catalog::standard_form(6);
        let z = BitMat::zeros(6, 6);
        let seqs = [vec![j.clone(), j.clone()], vec![j.clone(), z.clone()], vec![z, j]];
        let specs: Vec<AlgebraSpec> = seqs.into_iter().map(|s| AlgebraSpec::new(6, 2, s).unwrap()).collect();
        for r in &specs {
            for s in &specs {
                let iso = iso_unidim(r, s).unwrap();
                assert!(is_isomorphism(r, s, &iso.matrix()));
            }
        }
        let r = catalog::minimal();
        assert_eq!(iso_unidim(&r, &r).unwrap(), BlockAut::identity(2, 1));
        // different generators of the same shape
        let b = catalog::b1();
        let r = AlgebraSpec::new(4, 1, vec![b]).unwrap();
        let s = catalog::uni_dim(4, &bv("1"));
        let iso = iso_unidim(&r, &s).unwrap();
        assert!(is_isomorphism(&r, &s, &iso.matrix()));
    }

    #[test]
    fn are_isomorphic_examples() {
        let v = are_isomorphic(&catalog::square_full(), &catalog::square_deficient()).unwrap();
        assert!(matches!(&v, IsoVerdict::NotIsomorphic(why) if why.contains("dimensions 4 and 3")));
        let v = are_isomorphic(&catalog::rank_two_span(), &catalog::rank_four_span()).unwrap();
        assert!(matches!(&v, IsoVerdict::NotIsomorphic(why) if why.contains("rank profiles")));
        let r = catalog::square_full();
        match are_isomorphic(&r, &r).unwrap() {
            IsoVerdict::Isomorphic(w) => assert!(is_isomorphism(&r, &r, &w.matrix())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn are_isomorphic_finds_conjugated_copy() {
        let r = catalog::square_deficient();
        let a = BitMat::from_strs(&["1100", "0100", "0011", "1001"]);
        let d = BitMat::from_strs(&["1000", "1100", "0110", "0001"]);
        let beta = BlockAut::new(a, BitMat::zeros(4, 4), d).unwrap().matrix();
        let (s, p) = to_standard_basis(&conjugate(&r, &beta).unwrap()).unwrap();
        assert!(is_isomorphism(&s, &conjugate(&r, &beta).unwrap(), &p));
        match are_isomorphic(&r, &s).unwrap() {
            IsoVerdict::Isomorphic(w) => assert!(is_isomorphism(&r, &s, &w.matrix())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn standard_basis_of_a_skewed_presentation() {
        let r = catalog::minimal();
        let beta = BitMat::from_strs(&["101", "011", "001"]);
        let skewed = conjugate(&r, &beta).unwrap();
        let (spec, p) = to_standard_basis(&skewed).unwrap();
        assert_eq!((spec.m(), spec.d()), (2, 1));
        assert!(is_isomorphism(&spec, &skewed, &p));
    }

    #[test]
    fn dsum_membership_examples() {
        let r = catalog::minimal();
        let par = parallel_extend(&r, 2).unwrap();
        let auts = enumerate_aut_bruteforce(&r).unwrap();
        let mut diag = BitMat::zeros(6, 6);
        diag.set_block(0, 0, &auts[5]);
        diag.set_block(3, 3, &auts[17]);
        let v = dsum_aut_membership(&par, &diag).unwrap();
        assert!(v.member);
        assert_eq!(v.pi, Some(vec![0, 1]));
        let mut swap = BitMat::zeros(6, 6);
        swap.set_block(0, 3, &auts[3]);
        swap.set_block(3, 0, &auts[9]);
        let v = dsum_aut_membership(&par, &swap).unwrap();
        assert!(v.member && is_automorphism(&par, &swap));
        assert_eq!(v.pi, Some(vec![1, 0]));
        let mut mixed = BitMat::identity(6);
        mixed.set(0, 3, true);
        assert!(!dsum_aut_membership(&par, &mixed).unwrap().member);
        assert!(!is_automorphism(&par, &mixed));
    }

    #[test]
    fn dsum_diagonal_d_block_may_be_singular() {
        let r = catalog::uni_dim(2, &bv("11"));
        let par = parallel_extend(&r, 2).unwrap();
        let id = BitMat::identity(2);
        let zc = BitMat::zeros(2, 2);
        let d_grid = vec![
            vec![BitMat::from_strs(&["11", "00"]), BitMat::from_strs(&["01", "01"])],
            vec![BitMat::from_strs(&["10", "10"]), id.clone()],
        ];
        let c = vec![vec![zc.clone(), zc.clone()], vec![zc.clone(), zc]];
        let aut = dsum_aut_construct(&par, &[0, 1], &[id.clone(), id], &c, &d_grid).unwrap();
        assert!(is_automorphism(&par, &aut.matrix()));
        assert!(!aut.blocks[0][0].block(2, 2, 2, 2).is_invertible());
    }

    #[test]
    fn dsum_construct_rejects_singular_grid() {
        let r = catalog::minimal();
        let par = parallel_extend(&r, 2).unwrap();
        let id = BitMat::identity(2);
        let c = vec![vec![BitMat::zeros(2, 1); 2]; 2];
        let d_grid = vec![vec![BitMat::zeros(1, 1); 2]; 2];
        assert!(matches!(
            dsum_aut_construct(&par, &[0, 1], &[id.clone(), id.clone()], &c, &d_grid),
            Err(Error::DirectSumCondition(_))
        ));
        let one = parallel_extend(&r, 1).unwrap();
        let aut = dsum_aut_construct(
            &one,
            &[0],
            &[id],
            &[vec![BitMat::zeros(2, 1)]],
            &[vec![BitMat::identity(1)]],
        )
        .unwrap();
        assert_eq!(aut.matrix(), BitMat::identity(3));
    }

    #[test]
    fn sampled_dsum_auts_are_automorphisms() {
        let r = catalog::uni_dim(2, &bv("11"));
        let par = parallel_extend(&r, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = sample_dsum_aut(&par, &mut rng).unwrap().matrix();
            assert!(is_automorphism(&par, &g));
        }
    }
}
