//! Toy substitution-permutation networks with independent round keys.
//!
//! A round is `x ↦ γ(x)·μ + k_i`: the s-box `γ` on every brick, then the
//! linear layer `μ`, then XOR with the round key. Brick `j` occupies
//! coordinates `[j·n, (j+1)·n)`; inside a brick the leftmost bit is the most
//! significant bit of the s-box index.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{BitMat, BitVec};

/// A bijective `n`-bit s-box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SBox {
    n: usize,
    table: Vec<u32>,
    inverse: Vec<u32>,
}

impl SBox {
    pub fn new(n: usize, table: Vec<u32>) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::InvalidCipher(format!("s-box width must be in 1..=16, got {n}")));
        }
        if table.len() != 1 << n {
            return Err(Error::InvalidCipher(format!(
                "s-box of width {n} needs {} entries, got {}",
                1 << n,
                table.len()
            )));
        }
        let mut inverse = vec![u32::MAX; table.len()];
        for (x, &y) in table.iter().enumerate() {
            if y as usize >= table.len() || inverse[y as usize] != u32::MAX {
                return Err(Error::InvalidCipher(format!("s-box is not a bijection (value {y:#x})")));
            }
            inverse[y as usize] = x as u32;
        }
        Ok(Self { n, table, inverse })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(n, (0..1u32 << n).collect()).expect("identity is a bijection")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.table[x as usize]
    }

    #[inline]
    pub fn invert(&self, y: u32) -> u32 {
        self.inverse[y as usize]
    }
}

/// One failed cipher-spec check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CipherIssue {
    SBoxNotBijective(String),
    SBoxWidth { expected: usize, got: usize },
    MuShape { expected: usize, rows: usize, cols: usize },
    MuSingular,
    KeyCount { expected: usize, got: usize },
    KeyLength { index: usize, expected: usize, got: usize },
    EmptyState,
}

impl fmt::Display for CipherIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CipherIssue::SBoxNotBijective(why) => write!(f, "s-box: {why}"),
            CipherIssue::SBoxWidth { expected, got } => {
                write!(f, "s-box width {got} does not match brick width n = {expected}")
            }
            CipherIssue::MuShape { expected, rows, cols } => {
                write!(f, "mu is {rows}x{cols}, expected {expected}x{expected} (N = h*n)")
            }
            CipherIssue::MuSingular => write!(f, "mu is singular"),
            CipherIssue::KeyCount { expected, got } => write!(f, "expected {expected} round keys, got {got}"),
            CipherIssue::KeyLength { index, expected, got } => {
                write!(f, "round key {} has {got} bits, expected {expected}", index + 1)
            }
            CipherIssue::EmptyState => write!(f, "h and n must both be positive"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CipherReport {
    pub issues: Vec<CipherIssue>,
}

impl CipherReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for CipherReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        let lines: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

/// Unvalidated cipher description, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherParts {
    pub h: usize,
    pub n: usize,
    pub rounds: usize,
    pub sbox: Vec<u32>,
    pub mu: BitMat,
    pub keys: Vec<BitVec>,
}

pub fn validate_cipher(parts: &CipherParts) -> CipherReport {
    let mut issues = Vec::new();
    if parts.h == 0 || parts.n == 0 {
        issues.push(CipherIssue::EmptyState);
    }
    if parts.sbox.len() != 1usize.checked_shl(parts.n as u32).unwrap_or(0) {
        issues.push(CipherIssue::SBoxWidth {
            expected: parts.n,
            got: parts.sbox.len().max(1).ilog2() as usize,
        });
    } else if let Err(Error::InvalidCipher(why)) = SBox::new(parts.n, parts.sbox.clone()) {
        issues.push(CipherIssue::SBoxNotBijective(why));
    }
    let big_n = parts.h * parts.n;
    if parts.mu.rows() != big_n || parts.mu.cols() != big_n {
        issues.push(CipherIssue::MuShape {
            expected: big_n,
            rows: parts.mu.rows(),
            cols: parts.mu.cols(),
        });
    } else if !parts.mu.is_invertible() {
        issues.push(CipherIssue::MuSingular);
    }
    if parts.keys.len() != parts.rounds {
        issues.push(CipherIssue::KeyCount {
            expected: parts.rounds,
            got: parts.keys.len(),
        });
    }
    for (index, k) in parts.keys.iter().enumerate() {
        if k.len() != big_n {
            issues.push(CipherIssue::KeyLength {
                index,
                expected: big_n,
                got: k.len(),
            });
        }
    }
    CipherReport { issues }
}

/// Validated SPN.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherSpec {
    h: usize,
    sbox: SBox,
    mu: BitMat,
    mu_inv: BitMat,
    keys: Vec<BitVec>,
}

impl CipherSpec {
    pub fn new(h: usize, sbox: SBox, mu: BitMat, keys: Vec<BitVec>) -> Result<Self> {
        let parts = CipherParts {
            h,
            n: sbox.n(),
            rounds: keys.len(),
            sbox: sbox.table().to_vec(),
            mu,
            keys,
        };
        Self::from_parts(parts)
    }

    pub fn from_parts(parts: CipherParts) -> Result<Self> {
        let report = validate_cipher(&parts);
        if !report.is_valid() {
            return Err(Error::InvalidCipher(report.to_string()));
        }
        Ok(Self {
            h: parts.h,
            sbox: SBox::new(parts.n, parts.sbox)?,
            mu_inv: parts.mu.inverse()?,
            mu: parts.mu,
            keys: parts.keys,
        })
    }

    pub fn to_parts(&self) -> CipherParts {
        CipherParts {
            h: self.h,
            n: self.n(),
            rounds: self.rounds(),
            sbox: self.sbox.table().to_vec(),
            mu: self.mu.clone(),
            keys: self.keys.clone(),
        }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.sbox.n()
    }

    pub fn block_len(&self) -> usize {
        self.h * self.n()
    }

    pub fn rounds(&self) -> usize {
        self.keys.len()
    }

    pub fn sbox(&self) -> &SBox {
        &self.sbox
    }

    pub fn mu(&self) -> &BitMat {
        &self.mu
    }

    pub fn mu_inv(&self) -> &BitMat {
        &self.mu_inv
    }

    pub fn keys(&self) -> &[BitVec] {
        &self.keys
    }

    /// Same cipher with other round keys (the count may change).
    pub fn with_keys(&self, keys: Vec<BitVec>) -> Result<Self> {
        Self::new(self.h, self.sbox.clone(), self.mu.clone(), keys)
    }

    fn check_len(&self, x: &BitVec) -> Result<()> {
        if x.len() != self.block_len() {
            return Err(Error::Dimension(format!(
                "block has {} bits, cipher state has {}",
                x.len(),
                self.block_len()
            )));
        }
        Ok(())
    }

    pub fn sbox_layer(&self, x: &BitVec) -> BitVec {
        self.brick_map(x, |v| self.sbox.apply(v))
    }

    pub fn inverse_sbox_layer(&self, x: &BitVec) -> BitVec {
        self.brick_map(x, |v| self.sbox.invert(v))
    }

    fn brick_map(&self, x: &BitVec, f: impl Fn(u32) -> u32) -> BitVec {
        let n = self.n();
        let mut out = BitVec::zeros(x.len());
        for j in 0..self.h {
            let v = x.slice(j * n, (j + 1) * n).to_u64() as u32;
            out.splice(j * n, &BitVec::from_u64(u64::from(f(v)), n));
        }
        out
    }

    /// Round `i` (1-based).
    pub fn round(&self, i: usize, x: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        if i == 0 || i > self.rounds() {
            return Err(Error::Dimension(format!(
                "round index {i} outside 1..={}",
                self.rounds()
            )));
        }
        let mut y = self.mu.mul_vec_left(&self.sbox_layer(x));
        y.xor_assign(&self.keys[i - 1]);
        Ok(y)
    }

    pub fn encrypt(&self, x: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        (1..=self.rounds()).try_fold(x.clone(), |acc, i| self.round(i, &acc))
    }

    pub fn decrypt(&self, y: &BitVec) -> Result<BitVec> {
        self.check_len(y)?;
        let mut x = y.clone();
        for k in self.keys.iter().rev() {
            x.xor_assign(k);
            x = self.inverse_sbox_layer(&self.mu_inv.mul_vec_left(&x));
        }
        Ok(x)
    }

    /// Word-packed form for bulk experiments (`N ≤ 64`).
    pub fn packed(&self) -> Result<PackedCipher> {
        PackedCipher::new(self)
    }
}

/// A linear map on `u64` states via byte lookup tables.
#[derive(Clone, Debug)]
pub struct PackedLinear {
    len: usize,
    tables: Vec<[u64; 256]>,
}

impl PackedLinear {
    pub fn new(mat: &BitMat) -> Self {
        let len = mat.rows();
        assert!(len <= 64 && mat.cols() <= 64, "packed maps are limited to 64 bits");
        let rows: Vec<u64> = (0..len).map(|i| mat.row(i).to_u64()).collect();
        let chunks = len.div_ceil(8);
        let tables = (0..chunks)
            .map(|c| {
                let mut t = [0u64; 256];
                for (byte, slot) in t.iter_mut().enumerate() {
                    for b in 0..8 {
                        // bit b of the chunk is coordinate len-1-(8c+b)
                        let pos = 8 * c + b;
                        if pos < len && (byte >> b) & 1 == 1 {
                            *slot ^= rows[len - 1 - pos];
                        }
                    }
                }
                t
            })
            .collect();
        Self { len, tables }
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        self.tables
            .iter()
            .enumerate()
            .fold(0, |acc, (c, t)| acc ^ t[((x >> (8 * c)) & 0xff) as usize])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Cipher on `u64` states; coordinate 0 is the most significant of the low
/// `N` bits, so brick `j` sits at shift `(h−1−j)·n`.
#[derive(Clone, Debug)]
pub struct PackedCipher {
    h: usize,
    n: usize,
    sbox: SBox,
    mu: PackedLinear,
    mu_inv: PackedLinear,
    keys: Vec<u64>,
}

impl PackedCipher {
    pub fn new(spec: &CipherSpec) -> Result<Self> {
        if spec.block_len() > 64 {
            return Err(Error::SizeGuard(format!(
                "packed cipher limited to N <= 64, got {}",
                spec.block_len()
            )));
        }
        Ok(Self {
            h: spec.h(),
            n: spec.n(),
            sbox: spec.sbox().clone(),
            mu: PackedLinear::new(spec.mu()),
            mu_inv: PackedLinear::new(spec.mu_inv()),
            keys: spec.keys().iter().map(BitVec::to_u64).collect(),
        })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.h * self.n
    }

    pub fn rounds(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn sbox(&self) -> &SBox {
        &self.sbox
    }

    pub fn brick(&self, x: u64, j: usize) -> u32 {
        ((x >> ((self.h - 1 - j) * self.n)) & ((1 << self.n) - 1)) as u32
    }

    fn brick_map(&self, x: u64, f: impl Fn(u32) -> u32) -> u64 {
        (0..self.h).fold(0, |acc, j| {
            acc | (u64::from(f(self.brick(x, j))) << ((self.h - 1 - j) * self.n))
        })
    }

    #[inline]
    pub fn sbox_layer(&self, x: u64) -> u64 {
        self.brick_map(x, |v| self.sbox.apply(v))
    }

    #[inline]
    pub fn inverse_sbox_layer(&self, x: u64) -> u64 {
        self.brick_map(x, |v| self.sbox.invert(v))
    }

    #[inline]
    pub fn mu(&self, x: u64) -> u64 {
        self.mu.apply(x)
    }

    #[inline]
    pub fn mu_inv(&self, x: u64) -> u64 {
        self.mu_inv.apply(x)
    }

    /// Encrypts with the given round keys (their count sets the rounds).
    #[inline]
    pub fn encrypt_with(&self, x: u64, keys: &[u64]) -> u64 {
        keys.iter().fold(x, |acc, k| self.mu(self.sbox_layer(acc)) ^ k)
    }

    pub fn encrypt(&self, x: u64) -> u64 {
        self.encrypt_with(x, &self.keys)
    }

    pub fn decrypt(&self, y: u64) -> u64 {
        self.keys
            .iter()
            .rev()
            .fold(y, |acc, k| self.inverse_sbox_layer(self.mu_inv(acc ^ k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOY: [u32; 16] = [15, 2, 11, 14, 9, 10, 5, 12, 0, 3, 7, 13, 4, 8, 1, 6];

    fn toy_cipher(keys: &[u64]) -> CipherSpec {
        let mu = BitMat::from_strs(&[
            "10000001", "01000010", "00100100", "00011000", "00011001", "00100110", "01000100", "10001000",
        ]);
        let keys = keys.iter().map(|&k| BitVec::from_u64(k, 8)).collect();
        CipherSpec::new(2, SBox::new(4, TOY.to_vec()).unwrap(), mu, keys).unwrap()
    }

    #[test]
    fn identity_round() {
        let c = CipherSpec::new(2, SBox::identity(4), BitMat::identity(8), vec![BitVec::zeros(8)]).unwrap();
        let x = BitVec::parse_bits("10110010").unwrap();
        assert_eq!(c.round(1, &x).unwrap(), x);
        assert!(c.round(2, &x).is_err());
    }

    #[test]
    fn bricks_are_left_to_right() {
        let c = CipherSpec::new(
            2,
            SBox::new(4, TOY.to_vec()).unwrap(),
            BitMat::identity(8),
            vec![BitVec::zeros(8)],
        )
        .unwrap();
        // 0x1 ↦ 0x2 on brick 0, 0xf ↦ 0x6 on brick 1
        let x = BitVec::parse_bits("00011111").unwrap();
        assert_eq!(c.round(1, &x).unwrap().to_string(), "00100110");
    }

    #[test]
    fn round_matches_straight_line_oracle() {
        let c = toy_cipher(&[0x5a]);
        let x = 0xc3u64;
        // s-box by hand: 0xc ↦ 0x4, 0x3 ↦ 0xe ; state 0x4e = 01001110
        let s = [0u8, 1, 0, 0, 1, 1, 1, 0];
        let mu = c.mu();
        let mut y = [0u8; 8];
        for (i, &bit) in s.iter().enumerate() {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj ^= bit & u8::from(mu.get(i, j));
            }
        }
        let expected = y.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b)) ^ 0x5a;
        assert_eq!(c.round(1, &BitVec::from_u64(x, 8)).unwrap().to_u64(), expected);
    }

    #[test]
    fn round_trip_and_packed_agreement() {
        let c = toy_cipher(&[0x13, 0xa7, 0x5e, 0xf0]);
        let p = c.packed().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let x = BitVec::random(8, &mut rng);
            let y = c.encrypt(&x).unwrap();
            assert_eq!(c.decrypt(&y).unwrap(), x);
            assert_eq!(p.encrypt(x.to_u64()), y.to_u64());
            assert_eq!(p.decrypt(y.to_u64()), x.to_u64());
        }
    }

    #[test]
    fn zero_rounds_is_identity() {
        let c = toy_cipher(&[]);
        let x = BitVec::from_u64(0x9d, 8);
        assert_eq!(c.encrypt(&x).unwrap(), x);
    }

    #[test]
    fn first_key_matters() {
        let a = toy_cipher(&[0x00, 0x11]);
        let b = toy_cipher(&[0x01, 0x11]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let differs = (0..256).any(|_| {
            let x = BitVec::from_u64(rng.random_range(0..256), 8);
            a.encrypt(&x).unwrap() != b.encrypt(&x).unwrap()
        });
        assert!(differs);
    }

    #[test]
    fn validation_names_failures() {
        let good = toy_cipher(&[1, 2]).to_parts();
        assert!(validate_cipher(&good).is_valid());
        let mut bad = good.clone();
        bad.sbox[1] = bad.sbox[0];
        let report = validate_cipher(&bad);
        assert!(matches!(report.issues[..], [CipherIssue::SBoxNotBijective(_)]));
        let mut bad = good.clone();
        bad.mu = BitMat::zeros(8, 8);
        assert_eq!(validate_cipher(&bad).issues, vec![CipherIssue::MuSingular]);
        let mut bad = good;
        bad.keys.pop();
        assert!(validate_cipher(&bad).to_string().contains("round keys"));
    }

    #[test]
    fn xor_difference_through_key_and_mu() {
        let c = toy_cipher(&[0]);
        for x in 0..256u64 {
            for delta in [1u64, 0x30, 0xff] {
                let k = (x * 37) & 0xff;
                assert_eq!((x ^ k) ^ ((x ^ delta) ^ k), delta);
                let (xv, dv) = (BitVec::from_u64(x, 8), BitVec::from_u64(delta, 8));
                assert_eq!(
                    &c.mu().mul_vec_left(&xv) + &c.mu().mul_vec_left(&(&xv + &dv)),
                    c.mu().mul_vec_left(&dv)
                );
            }
        }
    }
}
