use num_rational::Ratio;
use pdc_core::gf::{toeplitz_apply, FieldElem, FieldVec, ToeplitzSeed};
use pdc_core::hashing::{
    collision_probability, collision_probability_enumerated, f_s, join_m_prime, psi_s,
    split_m_prime, y_of, HashParams, SeedS, SeedSPrime,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 5] = [2, 3, 5, 7, 13];

fn elem() -> impl Strategy<Value = (u32, u64, u64, u64)> {
    (0..PRIMES.len(), any::<u64>(), any::<u64>(), any::<u64>())
        .prop_map(|(i, a, b, c)| (PRIMES[i], a, b, c))
}

proptest! {
    #[test]
    fn field_axioms((p, a, b, c) in elem()) {
        let f = |v: u64| FieldElem::new(v % p as u64, p).unwrap();
        let (a, b, c) = (f(a), f(b), f(c));
        prop_assert_eq!(a + b, b + a);
        prop_assert_eq!(a * (b + c), a * b + a * c);
        prop_assert_eq!((a - b) + b, a);
        prop_assert_eq!(a + (-a), FieldElem::zero(p));
        if !a.is_zero() {
            prop_assert_eq!(a * a.inv().unwrap(), FieldElem::one(p));
            prop_assert_eq!(a.pow(p as u64 - 1), FieldElem::one(p));
        }
    }

    #[test]
    fn toeplitz_is_linear(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ToeplitzSeed::random(rows, cols, 3, &mut rng).unwrap();
        let x = FieldVec::random(cols, 3, &mut rng);
        let y = FieldVec::random(cols, 3, &mut rng);
        let lhs = toeplitz_apply(&t, &x.add(&y).unwrap()).unwrap();
        let rhs = toeplitz_apply(&t, &x).unwrap().add(&toeplitz_apply(&t, &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn encoding_inverts_hash(seed in any::<u64>(), n2 in 1usize..3, n3 in 1usize..3, extra in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = HashParams::new(3, n2 + n3 + extra, n2, n3).unwrap();
        let s = SeedS::random(hp, &mut rng);
        let sp = SeedSPrime::random(hp, &mut rng);
        let m = FieldVec::random(n2, 3, &mut rng);
        let c = FieldVec::random(n3, 3, &mut rng);
        let y = y_of(&m, &sp, &c).unwrap();
        let l2 = FieldVec::random(extra, 3, &mut rng);
        let l = psi_s(&s, &m, &y, &l2).unwrap();
        let (y2, m2) = split_m_prime(&hp, &f_s(&s, &l).unwrap()).unwrap();
        prop_assert_eq!(&y2, &y);
        prop_assert_eq!(&m2, &m);
        prop_assert_eq!(join_m_prime(&hp, &y, &m).unwrap(), f_s(&s, &l).unwrap());
    }
}

#[test]
fn ternary_collisions_match_enumeration() {
    let hp = HashParams::new(3, 3, 1, 1).unwrap();
    let all: Vec<FieldVec> = FieldVec::enumerate(3, 3).collect();
    for a in &all {
        for b in all.iter().filter(|b| *b != a) {
            let closed = collision_probability(a, b, &hp).unwrap();
            assert_eq!(closed, collision_probability_enumerated(a, b, &hp).unwrap());
            assert!(closed == Ratio::from_integer(0) || closed == Ratio::new(1, 9));
        }
    }
}
