use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bibrace::algebra::{parallel_extend, spec_from_theta, theta_from_spec, AlgebraSpec, PackedAlgebra};
use bibrace::automorphism::{is_automorphism, is_isomorphism, iso_unidim, sample_automorphism, sample_dsum_aut};
use bibrace::catalog;
use bibrace::differential::{BlockOp, DiffOp};
use bibrace::spn::{CipherSpec, PackedLinear, SBox};
use bibrace::{BitMat, BitVec};

fn random_skew(m: usize, rng: &mut ChaCha8Rng) -> BitMat {
    let mut b = BitMat::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            if rng.random::<bool>() {
                b.set(i, j, true);
                b.set(j, i, true);
            }
        }
    }
    b
}

/// A random algebra with the given shape; resamples until valid, so odd `m`
/// needs `d >= 2`.
fn random_spec(m: usize, d: usize, seed: u64) -> AlgebraSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let defining = (0..d).map(|_| random_skew(m, &mut rng)).collect();
        if let Ok(spec) = AlgebraSpec::new(m, d, defining) {
            return spec;
        }
    }
}

/// A random uni-dimensional algebra: `B_k = b_k·B` with `B` of full rank.
fn random_unidim(m: usize, d: usize, seed: u64) -> AlgebraSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = loop {
        let b = random_skew(m, &mut rng);
        if b.rank() == m {
            break b;
        }
    };
    let coeffs = loop {
        let v = BitVec::random(d, &mut rng);
        if !v.is_zero() {
            break v;
        }
    };
    let defining = coeffs
        .bits()
        .map(|on| if on { b.clone() } else { BitMat::zeros(m, m) })
        .collect();
    AlgebraSpec::new(m, d, defining).unwrap()
}

fn random_permutation(n: usize, seed: u64) -> Vec<u32> {
    use rand::seq::SliceRandom;
    let mut t: Vec<u32> = (0..1u32 << n).collect();
    t.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    t
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn inverse_is_two_sided(n in 1usize..12, seed in any::<u64>()) {
        let m = BitMat::random_invertible(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let inv = m.inverse().unwrap();
        prop_assert_eq!(&m * &inv, BitMat::identity(n));
        prop_assert_eq!(&inv * &m, BitMat::identity(n));
    }

    #[test]
    fn rank_plus_kernel_is_rows(rows in 1usize..10, cols in 1usize..10, seed in any::<u64>()) {
        let m = BitMat::random(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed));
        let kernel = m.left_kernel();
        prop_assert_eq!(m.rank() + kernel.len(), rows);
        for v in &kernel {
            prop_assert!(m.mul_vec_left(v).is_zero());
        }
    }

    #[test]
    fn theta_round_trip(m in 2usize..6, d in 2usize..5, seed in any::<u64>()) {
        let spec = random_spec(m, d, seed);
        prop_assert_eq!(spec_from_theta(&theta_from_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn circle_is_associative_and_nil(m in 2usize..6, d in 2usize..4, seed in any::<u64>(), xs in any::<[u64; 3]>()) {
        let spec = random_spec(m, d, seed);
        let p = PackedAlgebra::new(&spec).unwrap();
        let mask = (1u64 << spec.n()) - 1;
        let [x, y, z] = xs.map(|v| v & mask);
        prop_assert_eq!(p.circle(p.circle(x, y), z), p.circle(x, p.circle(y, z)));
        prop_assert_eq!(p.circle(x, x), 0);
        prop_assert_eq!(p.circle(x, y), p.circle(y, x));
    }

    #[test]
    fn sampled_automorphisms_are_automorphisms(half in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
        let spec = random_unidim(2 * half, d, seed);
        let g = sample_automorphism(&spec, seed ^ 1).unwrap();
        prop_assert!(is_automorphism(&spec, &g));
    }

    #[test]
    fn unidim_isomorphisms(half in 1usize..4, d in 1usize..4, s1 in any::<u64>(), s2 in any::<u64>()) {
        let r = random_unidim(2 * half, d, s1);
        let s = random_unidim(2 * half, d, s2);
        let iso = iso_unidim(&r, &s).unwrap();
        prop_assert!(is_isomorphism(&r, &s, &iso.matrix()));
    }

    #[test]
    fn decrypt_inverts_encrypt(seed in any::<u64>(), rounds in 0usize..5, x in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sbox = SBox::new(4, random_permutation(4, seed)).unwrap();
        let mu = BitMat::random_invertible(12, &mut rng);
        let keys = (0..rounds).map(|_| BitVec::random(12, &mut rng)).collect();
        let c = CipherSpec::new(3, sbox, mu, keys).unwrap();
        let x = BitVec::from_u64(x & 0xfff, 12);
        let y = c.encrypt(&x).unwrap();
        prop_assert_eq!(c.decrypt(&y).unwrap(), x.clone());
        let packed = c.packed().unwrap();
        prop_assert_eq!(packed.encrypt(x.to_u64()), y.to_u64());
    }

    #[test]
    fn xor_difference_through_linear_layer(seed in any::<u64>(), x in 0u64..4096, delta in 0u64..4096) {
        let mu = BitMat::random_invertible(12, &mut ChaCha8Rng::seed_from_u64(seed));
        let lin = PackedLinear::new(&mu);
        prop_assert_eq!(lin.apply(x) ^ lin.apply(x ^ delta), lin.apply(delta));
    }

    #[test]
    fn circle_difference_through_direct_sum_automorphism(
        d in 1usize..3, h in 2usize..4, seed in any::<u64>(), x in any::<u64>(), delta in any::<u64>()
    ) {
        let spec = random_unidim(2, d, seed);
        let par = parallel_extend(&spec, h).unwrap();
        let g = sample_dsum_aut(&par, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap().matrix();
        let bop = BlockOp::new(&DiffOp::Circle(spec.clone()), h, spec.n()).unwrap();
        let lin = PackedLinear::new(&g);
        let mask = (1u64 << (h * spec.n())) - 1;
        let (x, delta) = (x & mask, delta & mask);
        prop_assert_eq!(bop.combine(lin.apply(x), lin.apply(bop.combine(x, delta))), lin.apply(delta));
    }
}

#[test]
fn catalog_fixtures_match_files() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
    assert_eq!(
        bibrace::format::parse_algebra(&read("minimal.alg")).unwrap(),
        catalog::minimal()
    );
    assert_eq!(
        bibrace::format::parse_algebra(&read("square_full.alg")).unwrap(),
        catalog::square_full()
    );
    assert_eq!(
        bibrace::format::parse_algebra(&read("square_deficient.alg")).unwrap(),
        catalog::square_deficient()
    );
    let (n, table) = bibrace::format::parse_sbox(&read("present.sbox")).unwrap();
    assert!(SBox::new(n, table).is_ok());
    let parts = bibrace::format::parse_cipher(&read("trapdoor.cipher"), Some(&dir)).unwrap();
    let cipher = CipherSpec::from_parts(parts).unwrap();
    let spec = bibrace::format::parse_algebra(&read("trapdoor.alg")).unwrap();
    assert!(is_automorphism(&parallel_extend(&spec, 2).unwrap(), cipher.mu()));
}
