use gbf_core::arith::{self, FactorConfig};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_u64_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = FactorConfig::default();
    for _ in 0..10_000 {
        let n: u64 = rng.gen_range(2..=u64::MAX);
        let f = arith::factor_with(&BigUint::from(n), &cfg).unwrap();
        assert_eq!(f.product(), BigUint::from(n));
        assert!(f.primes().all(arith::is_prime));
        assert!(f.factors.windows(2).all(|w| w[0].0 < w[1].0));
    }
}

#[test]
fn seed_does_not_change_results() {
    let n = BigUint::from(1_099_511_627_791u64) * BigUint::from(1_099_511_628_401u64);
    let a = arith::factor_with(&n, &FactorConfig { seed: 1, ..Default::default() }).unwrap();
    let b = arith::factor_with(&n, &FactorConfig { seed: 99, ..Default::default() }).unwrap();
    assert_eq!(a, b);
}
