//! Dense bit-packed linear algebra over GF(2).
//!
//! Vectors are row vectors and matrices act on the right: `x ↦ x·M`.
//! Coordinate 0 is the leftmost coordinate everywhere (text formats, integer
//! conversions, lexicographic order). Packing is an internal detail: bit `i`
//! lives in word `i / 64` at position `i % 64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A vector over GF(2) of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// The canonical basis vector `e_i` (0-based).
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from the low `len` bits of `value`, coordinate 0 being
    /// the most significant of them.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        for i in 0..len {
            if (value >> (len - 1 - i)) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Uniformly random vector.
    pub fn random<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self::from_bits((0..len).map(|_| rng.random::<bool>()))
    }

    /// Inverse of [`BitVec::from_u64`].
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | u64::from(self.get(i)))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the leftmost set coordinate.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + t)
                }
            })
        })
    }

    /// Standard inner product `x·yᵗ`.
    pub fn inner(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "inner product length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Coordinates `[start, end)` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        assert!(start <= end && end <= self.len);
        BitVec::from_bits((start..end).map(|i| self.get(i)))
    }

    pub fn concat(&self, other: &BitVec) -> BitVec {
        BitVec::from_bits(
            (0..self.len)
                .map(|i| self.get(i))
                .chain((0..other.len).map(|i| other.get(i))),
        )
    }

    /// Writes `part` into coordinates starting at `start`.
    pub fn splice(&mut self, start: usize, part: &BitVec) {
        assert!(start + part.len <= self.len);
        for i in 0..part.len {
            self.set(start + i, part.get(i));
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_bits(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVec::from_bits)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

/// Lexicographic order on coordinates, coordinate 0 first, with `0 < 1`.
impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in 0..self.len.min(other.len) {
            match (self.get(i), other.get(i)) {
                (false, true) => return Ordering::Less,
                (true, false) => return Ordering::Greater,
                _ => {}
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &BitVec {
    type Output = BitVec;
    fn add(self, rhs: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl Add for BitVec {
    type Output = BitVec;
    fn add(mut self, rhs: BitVec) -> BitVec {
        self.xor_assign(&rhs);
        self
    }
}

impl AddAssign<&BitVec> for BitVec {
    fn add_assign(&mut self, rhs: &BitVec) {
        self.xor_assign(rhs);
    }
}

/// A dense matrix over GF(2), stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMat {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl BitMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// The anti-diagonal permutation matrix, i.e. the standard alternating
    /// form used as canonical target of [`BitMat::symplectic_reduce`].
    pub fn anti_diagonal(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, n - 1 - i, true);
        }
        m
    }

    /// Uniformly random matrix.
    pub fn random<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            rows,
            cols,
            data: (0..rows).map(|_| BitVec::random(cols, rng)).collect(),
        }
    }

    /// Uniformly random invertible matrix, by rejection.
    pub fn random_invertible<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(n, n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("rows have different lengths".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    /// Builds a matrix from a slice of `0`/`1` row strings. Panics on malformed
    /// input; intended for literals in code and tests.
    pub fn from_strs(rows: &[&str]) -> Self {
        let rows = rows
            .iter()
            .map(|r| BitVec::parse_bits(r).expect("valid bit string"))
            .collect();
        Self::from_rows(rows).expect("rectangular matrix")
    }

    /// Outer product `uᵗ·v` of a column `u` and a row `v`.
    pub fn outer(u: &BitVec, v: &BitVec) -> Self {
        let data = u
            .bits()
            .map(|b| if b { v.clone() } else { BitVec::zeros(v.len()) })
            .collect();
        Self {
            rows: u.len(),
            cols: v.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.data[r].set(c, value);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.data
    }

    pub fn col(&self, c: usize) -> BitVec {
        BitVec::from_bits(self.data.iter().map(|r| r.get(c)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> BitMat {
        let mut t = BitMat::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Row vector times matrix.
    pub fn mul_vec_left(&self, x: &BitVec) -> BitVec {
        assert_eq!(x.len(), self.rows, "vector length does not match matrix rows");
        let mut out = BitVec::zeros(self.cols);
        for i in x.ones() {
            out.xor_assign(&self.data[i]);
        }
        out
    }

    /// Matrix times column vector, returned as a vector.
    pub fn mul_vec_right(&self, y: &BitVec) -> BitVec {
        assert_eq!(y.len(), self.cols, "vector length does not match matrix cols");
        BitVec::from_bits(self.data.iter().map(|r| r.inner(y)))
    }

    /// Bilinear form `x·M·yᵗ`.
    pub fn bilinear(&self, x: &BitVec, y: &BitVec) -> bool {
        self.mul_vec_left(x).inner(y)
    }

    pub fn try_mul(&self, other: &BitMat) -> Result<BitMat> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().map(|r| other.mul_vec_left(r)).collect();
        Ok(BitMat {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn try_add(&self, other: &BitMat) -> Result<BitMat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("matrix sum of different shapes".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(BitMat {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Sub-block with rows `[r0, r0+h)` and columns `[c0, c0+w)`.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> BitMat {
        assert!(r0 + h <= self.rows && c0 + w <= self.cols, "block out of range");
        let data = (r0..r0 + h).map(|r| self.data[r].slice(c0, c0 + w)).collect();
        BitMat { rows: h, cols: w, data }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &BitMat) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "block out of range"
        );
        for r in 0..b.rows {
            self.data[r0 + r].splice(c0, &b.data[r]);
        }
    }

    /// Assembles `(tl tr; bl br)`.
    pub fn from_blocks(tl: &BitMat, tr: &BitMat, bl: &BitMat, br: &BitMat) -> Result<BitMat> {
        if tl.rows != tr.rows || bl.rows != br.rows || tl.cols != bl.cols || tr.cols != br.cols {
            return Err(Error::Dimension("inconsistent block shapes".into()));
        }
        let mut m = BitMat::zeros(tl.rows + bl.rows, tl.cols + tr.cols);
        m.set_block(0, 0, tl);
        m.set_block(0, tl.cols, tr);
        m.set_block(tl.rows, 0, bl);
        m.set_block(tl.rows, tl.cols, br);
        Ok(m)
    }

    pub fn hconcat(mats: &[BitMat]) -> Result<BitMat> {
        let first = mats
            .first()
            .ok_or_else(|| Error::Dimension("cannot concatenate an empty list".into()))?;
        if mats.iter().any(|m| m.rows != first.rows) {
            return Err(Error::Dimension("hconcat of matrices with different row counts".into()));
        }
        let cols = mats.iter().map(|m| m.cols).sum();
        let mut out = BitMat::zeros(first.rows, cols);
        let mut c0 = 0;
        for m in mats {
            out.set_block(0, c0, m);
            c0 += m.cols;
        }
        Ok(out)
    }

    /// Row-major flattening into a vector of length `rows·cols`.
    pub fn flatten(&self) -> BitVec {
        BitVec::from_bits(self.data.iter().flat_map(|r| r.bits().collect::<Vec<_>>()))
    }

    pub fn unflatten(v: &BitVec, rows: usize, cols: usize) -> BitMat {
        assert_eq!(v.len(), rows * cols);
        let data = (0..rows).map(|r| v.slice(r * cols, (r + 1) * cols)).collect();
        BitMat { rows, cols, data }
    }

    pub fn rank(&self) -> usize {
        Echelon::new(self.data.clone(), self.cols).rank
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<BitMat> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "inverse of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        // Gauss-Jordan on [M | I].
        let mut aug: Vec<BitVec> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, r)| r.concat(&BitVec::unit(n, i)))
            .collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| aug[r].get(col)).ok_or(Error::Singular)?;
            aug.swap(col, pivot);
            let prow = aug[col].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != col && row.get(col) {
                    row.xor_assign(&prow);
                }
            }
        }
        let data = aug.iter().map(|r| r.slice(n, 2 * n)).collect();
        Ok(BitMat { rows: n, cols: n, data })
    }

    /// `A·X·Aᵗ` with `self = A`.
    pub fn congruence_apply(&self, x: &BitMat) -> Result<BitMat> {
        if !self.is_square() || !x.is_square() || self.cols != x.rows {
            return Err(Error::Dimension(format!(
                "congruence needs square matrices of equal size, got {}x{} and {}x{}",
                self.rows, self.cols, x.rows, x.cols
            )));
        }
        self.try_mul(x)?.try_mul(&self.transpose())
    }

    /// Symmetric with zero diagonal (equivalently, skew-symmetric over GF(2)).
    pub fn is_skew_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| !self.get(i, i)) && *self == self.transpose()
    }

    /// Finds an invertible `A` with `A·B·Aᵗ = J`, `J` the anti-diagonal form.
    ///
    /// Symplectic Gram-Schmidt with leftmost choices: the first remaining
    /// vector is paired with the first remaining partner of form value one,
    /// the pair `t` lands in rows `t` and `m-1-t`.
    pub fn symplectic_reduce(&self) -> Result<(BitMat, BitMat)> {
        if !self.is_skew_symmetric() {
            return Err(Error::NotSkewSymmetric);
        }
        let m = self.rows;
        let rank = self.rank();
        if rank != m {
            return Err(Error::NotSymplectic { rank, size: m });
        }
        let form = |x: &BitVec, y: &BitVec| self.bilinear(x, y);
        let mut pool: Vec<BitVec> = (0..m).map(|i| BitVec::unit(m, i)).collect();
        let mut a = BitMat::zeros(m, m);
        let mut t = 0;
        while !pool.is_empty() {
            let u = pool.remove(0);
            let k = pool
                .iter()
                .position(|w| form(&u, w))
                .expect("nondegenerate form always has a partner");
            let v = pool.remove(k);
            for w in pool.iter_mut() {
                let wv = form(w, &v);
                let wu = form(w, &u);
                if wv {
                    w.xor_assign(&u);
                }
                if wu {
                    w.xor_assign(&v);
                }
            }
            a.data[t] = u;
            a.data[m - 1 - t] = v;
            t += 1;
        }
        let j = BitMat::anti_diagonal(m);
        debug_assert_eq!(a.congruence_apply(self).ok().as_ref(), Some(&j));
        Ok((a, j))
    }

    /// Basis of the left kernel `{x : x·M = 0}` in reduced form: each basis
    /// vector has a distinct leftmost one and the others vanish there.
    pub fn left_kernel(&self) -> Vec<BitVec> {
        let n = self.rows;
        let aug: Vec<BitVec> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, r)| r.concat(&BitVec::unit(n, i)))
            .collect();
        let ech = Echelon::new(aug, self.cols);
        let kernel: Vec<BitVec> = ech.rows[ech.rank..]
            .iter()
            .map(|r| r.slice(self.cols, self.cols + n))
            .collect();
        reduce_basis(kernel)
    }

    /// Lexicographically least `x` with `x·M = b`.
    pub fn solve_left(&self, b: &BitVec) -> Result<BitVec> {
        if b.len() != self.cols {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, matrix has {} columns",
                b.len(),
                self.cols
            )));
        }
        let n = self.rows;
        let aug: Vec<BitVec> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, r)| r.concat(&BitVec::unit(n, i)))
            .collect();
        let ech = Echelon::new(aug, self.cols);
        // Express b through the pivot rows.
        let mut rest = b.clone();
        let mut x = BitVec::zeros(n);
        for (row, &col) in ech.rows.iter().zip(&ech.pivots) {
            if rest.get(col) {
                rest.xor_assign(&row.slice(0, self.cols));
                x.xor_assign(&row.slice(self.cols, self.cols + n));
            }
        }
        if !rest.is_zero() {
            return Err(Error::NoSolution);
        }
        let kernel = reduce_basis(
            ech.rows[ech.rank..]
                .iter()
                .map(|r| r.slice(self.cols, self.cols + n))
                .collect(),
        );
        for k in &kernel {
            let p = k.first_one().expect("kernel vectors are nonzero");
            if x.get(p) {
                x.xor_assign(k);
            }
        }
        Ok(x)
    }

    /// Number of matching leading coordinates in row-major order; used as total order.
    fn cmp_rowmajor(&self, other: &BitMat) -> Ordering {
        (self.rows, self.cols)
            .cmp(&(other.rows, other.cols))
            .then_with(|| self.data.cmp(&other.data))
    }
}

impl Ord for BitMat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_rowmajor(other)
    }
}

impl PartialOrd for BitMat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mul for &BitMat {
    type Output = BitMat;
    fn mul(self, rhs: &BitMat) -> BitMat {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl Add for &BitMat {
    type Output = BitMat;
    fn add(self, rhs: &BitMat) -> BitMat {
        self.try_add(rhs).expect("matrix shapes must agree")
    }
}

impl fmt::Display for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.data.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMat[{}x{}](", self.rows, self.cols)?;
        for (i, r) in self.data.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// Row echelon form restricted to the first `width` columns (extra columns
/// ride along as a transform record). Pivots are chosen leftmost-first and
/// from the topmost available row.
struct Echelon {
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
    rank: usize,
}

impl Echelon {
    fn new(mut rows: Vec<BitVec>, width: usize) -> Self {
        let mut rank = 0;
        let mut pivots = Vec::new();
        for col in 0..width {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let prow = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&prow);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        Self { rows, pivots, rank }
    }
}

/// Reduced row echelon basis of the span of `vectors` (zero vectors dropped).
pub fn reduce_basis(vectors: Vec<BitVec>) -> Vec<BitVec> {
    let Some(width) = vectors.first().map(BitVec::len) else {
        return Vec::new();
    };
    let ech = Echelon::new(vectors, width);
    ech.rows.into_iter().take(ech.rank).collect()
}

/// Rank of the horizontal concatenation `(B₁ … B_d)`.
pub fn hconcat_rank(mats: &[BitMat]) -> Result<usize> {
    Ok(BitMat::hconcat(mats)?.rank())
}

/// Enumerates every vector of the span of a basis, in Gray-code order.
pub fn span_elements(basis: &[BitVec], len: usize) -> Vec<BitVec> {
    assert!(basis.len() < 32, "span too large to enumerate");
    let mut out = Vec::with_capacity(1 << basis.len());
    let mut cur = BitVec::zeros(len);
    out.push(cur.clone());
    for i in 1u32..(1u32 << basis.len()) {
        cur.xor_assign(&basis[i.trailing_zeros() as usize]);
        out.push(cur.clone());
    }
    out
}

/// A subspace of `m×m` matrices, kept as a reduced basis of flattened matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatSpace {
    size: usize,
    basis: Vec<BitMat>,
}

impl MatSpace {
    pub fn span(size: usize, mats: &[BitMat]) -> Result<Self> {
        if mats.iter().any(|b| b.rows() != size || b.cols() != size) {
            return Err(Error::Dimension(format!("span expects {size}x{size} matrices")));
        }
        let flat = reduce_basis(mats.iter().map(BitMat::flatten).collect());
        let basis = flat.iter().map(|v| BitMat::unflatten(v, size, size)).collect();
        Ok(Self { size, basis })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BitMat] {
        &self.basis
    }

    pub fn contains(&self, x: &BitMat) -> bool {
        if x.rows() != self.size || x.cols() != self.size {
            return false;
        }
        let mut rest = x.flatten();
        for b in &self.basis {
            let f = b.flatten();
            let p = f.first_one().expect("basis matrices are nonzero");
            if rest.get(p) {
                rest.xor_assign(&f);
            }
        }
        rest.is_zero()
    }

    /// All `2^dim` elements of the space.
    pub fn elements(&self) -> Vec<BitMat> {
        let flat: Vec<BitVec> = self.basis.iter().map(BitMat::flatten).collect();
        span_elements(&flat, self.size * self.size)
            .iter()
            .map(|v| BitMat::unflatten(v, self.size, self.size))
            .collect()
    }

    /// Sorted multiset of ranks over all elements; invariant under congruence.
    pub fn rank_profile(&self) -> Vec<usize> {
        let mut ranks: Vec<usize> = self.elements().iter().map(BitMat::rank).collect();
        ranks.sort_unstable();
        ranks
    }
}

/// Enumerates `GL(n, 2)` in row-major lexicographic order (small `n` only).
pub fn general_linear_group(n: usize) -> Vec<BitMat> {
    assert!(n <= 4, "GL(n,2) enumeration is limited to n <= 4");
    let total = 1u64 << (n * n);
    (0..total)
        .map(|code| BitMat::unflatten(&BitVec::from_u64(code, n * n), n, n))
        .filter(BitMat::is_invertible)
        .collect()
}
