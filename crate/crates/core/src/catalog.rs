//! Small named algebras used by tests, fixtures and the CLI.

use crate::algebra::AlgebraSpec;
use crate::gf2::{BitMat, BitVec};

/// `m = 2`, `d = 1`, `B = (0 1; 1 0)`: the smallest binary alternating algebra.
pub fn minimal() -> AlgebraSpec {
    AlgebraSpec::new(2, 1, vec![BitMat::anti_diagonal(2)]).expect("valid")
}

pub fn b1() -> BitMat {
    BitMat::from_strs(&["0011", "0010", "1101", "1010"])
}

pub fn b2() -> BitMat {
    BitMat::from_strs(&["0000", "0011", "0100", "0100"])
}

pub fn b3() -> BitMat {
    BitMat::from_strs(&["0001", "0011", "0100", "1100"])
}

pub fn b4() -> BitMat {
    BitMat::from_strs(&["0111", "1011", "1101", "1110"])
}

/// `m = d = 4` with independent `B₁ … B₄`, so `R² = Ann(R)`.
pub fn square_full() -> AlgebraSpec {
    AlgebraSpec::new(4, 4, vec![b1(), b2(), b3(), b4()]).expect("valid")
}

/// `m = d = 4` with `(B₁, B₂, B₃, B₁+B₂+B₃)`, so `dim R² = 3`.
pub fn square_deficient() -> AlgebraSpec {
    let b = &(&b1() + &b2()) + &b3();
    AlgebraSpec::new(4, 4, vec![b1(), b2(), b3(), b]).expect("valid")
}

/// The Θ matrix of [`square_full`].
pub fn square_full_theta() -> BitMat {
    BitMat::from_strs(&[
        "0000000110011011",
        "0001000011110111",
        "1001111100001001",
        "1011011110010000",
    ])
}

/// Span of two rank-2 forms and their sum (`m = d = 4`).
pub fn rank_two_span() -> AlgebraSpec {
    let c1 = BitMat::from_strs(&["0100", "1000", "0000", "0000"]);
    let c2 = BitMat::from_strs(&["0000", "0000", "0001", "0010"]);
    let c3 = &c1 + &c2;
    AlgebraSpec::new(4, 4, vec![c1, c2, c3, BitMat::zeros(4, 4)]).expect("valid")
}

/// Span of two rank-4 forms whose sum is rank 4 as well (`m = d = 4`).
pub fn rank_four_span() -> AlgebraSpec {
    let c1 = BitMat::from_strs(&["0010", "0011", "1100", "0100"]);
    let c2 = BitMat::from_strs(&["0011", "0001", "1000", "1100"]);
    let c3 = &c1 + &c2;
    AlgebraSpec::new(4, 4, vec![c1, c2, c3, BitMat::zeros(4, 4)]).expect("valid")
}

/// The standard alternating form: the `m×m` anti-diagonal matrix.
pub fn standard_form(m: usize) -> BitMat {
    BitMat::anti_diagonal(m)
}

/// Algebra with `R² = ⟨(0, b)⟩` and defining matrices `B_k = b_k·J`.
pub fn uni_dim(m: usize, b: &BitVec) -> AlgebraSpec {
    let defining = b
        .bits()
        .map(|bit| if bit { standard_form(m) } else { BitMat::zeros(m, m) })
        .collect();
    AlgebraSpec::new(m, b.len(), defining).expect("valid for even m and nonzero b")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_valid() {
        for spec in [
            minimal(),
            square_full(),
            square_deficient(),
            rank_two_span(),
            rank_four_span(),
        ] {
            assert!(spec.validate().is_valid());
        }
        assert_eq!(b1().rank(), 4);
        assert_eq!(
            uni_dim(6, &BitVec::parse_bits("11").unwrap()).defining()[1],
            standard_form(6)
        );
    }
}
