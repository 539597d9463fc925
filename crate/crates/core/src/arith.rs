//! Integer number theory on arbitrary-precision integers.
//!
//! Everything here is a pure function of its inputs. Values that fit in a
//! machine word take a `u64`/`u128` fast path; the big-integer path is only
//! used above `2^64`.
//!
//! Primality below `2^64` is exact (Miller-Rabin with the first twelve prime
//! bases). Above that the same twelve bases are followed by 64 rounds with
//! bases drawn from a ChaCha stream keyed by a seed, so a composite survives
//! with probability below `4^-64` and the verdict for a given seed never
//! changes between runs.

use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Seed used by the convenience wrappers that take no configuration.
pub const DEFAULT_SEED: u64 = 0x6762_665f_7365_6564;

/// Miller-Rabin bases; exact for every `n < 2^64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Extra random rounds above `2^64`.
const MR_RANDOM_ROUNDS: usize = 64;

/// Trial division bound before switching to rho.
const TRIAL_LIMIT: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("gcd({a}, {m}) != 1")]
    NotCoprime { a: BigUint, m: BigUint },
    #[error("factoring {n} exceeded the budget of {budget} rho steps")]
    FactorBudget { n: BigUint, budget: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Knobs for the randomized parts of factoring and primality testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorConfig {
    /// Total rho iterations allowed for one call to [`factor_with`].
    pub max_rho_steps: u64,
    /// Keys the rho starting points and the random Miller-Rabin bases.
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { max_rho_steps: 100_000_000, seed: DEFAULT_SEED }
    }
}

/// Complete factorization, primes ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub value: BigUint,
    #[serde(serialize_with = "crate::serde_big::factor_pairs")]
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Multiplies the factors back together.
    pub fn product(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }
}

/// Multiplicative order of `base` modulo `modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderResult {
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub base: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub modulus: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub order: BigUint,
}

// ---------------------------------------------------------------------------
// word-sized helpers

#[inline]
pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for machine words.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn small_primes(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Budget {
    used: u64,
    max: u64,
}

impl Budget {
    fn spend(&mut self, steps: u64) -> bool {
        self.used += steps;
        self.used <= self.max
    }
}

// Brent's cycle finding with products of differences batched per gcd.
// Returns Ok(None) when the walk degenerates (gcd == n) so the caller can
// retry with another constant.
fn brent_u64(n: u64, c: u64, x0: u64, budget: &mut Budget) -> Result<Option<u64>, ()> {
    const BATCH: u64 = 128;
    let f = |x: u64| ((mul_mod_u64(x, x, n) as u128 + c as u128) % n as u128) as u64;
    let (mut y, mut r, mut q, mut g) = (x0 % n, 1u64, 1u64, 1u64);
    let (mut x, mut ys) = (y, y);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        if !budget.spend(r) {
            return Err(());
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let m = BATCH.min(r - k);
            for _ in 0..m {
                y = f(y);
                q = mul_mod_u64(q, x.abs_diff(y), n);
            }
            if !budget.spend(m) {
                return Err(());
            }
            g = q.gcd(&n);
            k += m;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 {
                break;
            }
            if !budget.spend(1) {
                return Err(());
            }
        }
    }
    Ok((g != n).then_some(g))
}

fn brent_big(n: &BigUint, c: &BigUint, x0: &BigUint, budget: &mut Budget) -> Result<Option<BigUint>, ()> {
    const BATCH: u64 = 128;
    let f = |x: &BigUint| (x * x + c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let mut y = x0 % n;
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        if !budget.spend(r) {
            return Err(());
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let m = BATCH.min(r - k);
            for _ in 0..m {
                y = f(&y);
                q = (q * diff(&x, &y)) % n;
            }
            if !budget.spend(m) {
                return Err(());
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
            if !budget.spend(1) {
                return Err(());
            }
        }
    }
    Ok((&g != n).then_some(g))
}

fn is_perfect_square(n: &BigUint) -> Option<BigUint> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

// Finds a nontrivial factor of the odd composite `n`.
fn split(n: &BigUint, cfg: &FactorConfig, budget: &mut Budget) -> Result<BigUint, ArithError> {
    if let Some(r) = is_perfect_square(n) {
        return Ok(r);
    }
    let mut state = cfg.seed ^ 0x7268_6f00;
    for _attempt in 0..64 {
        let c = splitmix(&mut state) | 1;
        let x0 = splitmix(&mut state);
        let found = match n.to_u64() {
            Some(w) => brent_u64(w, c % w, x0 % w, budget).map(|o| o.map(BigUint::from)),
            None => brent_big(n, &BigUint::from(c), &BigUint::from(x0), budget),
        };
        match found {
            Ok(Some(d)) => return Ok(d),
            Ok(None) => continue,
            Err(()) => break,
        }
    }
    Err(ArithError::FactorBudget { n: n.clone(), budget: cfg.max_rho_steps })
}

// ---------------------------------------------------------------------------
// public big-integer surface

/// Primality with the default seed.
pub fn is_prime(n: &BigUint) -> bool {
    is_prime_seeded(n, DEFAULT_SEED)
}

/// Primality test; the seed only matters for `n >= 2^64`.
pub fn is_prime_seeded(n: &BigUint, seed: u64) -> bool {
    if let Some(w) = n.to_u64() {
        return is_prime_u64(w);
    }
    if n.is_even() {
        return false;
    }
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            return false;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };
    if MR_BASES.iter().any(|&a| witness(&BigUint::from(a))) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = BigUint::from(2u32);
    (0..MR_RANDOM_ROUNDS).all(|_| !witness(&rng.gen_biguint_range(&lo, &n_minus_1)))
}

/// Factors `n` with the default configuration.
pub fn factor(n: &BigUint) -> Result<Factorization, ArithError> {
    factor_with(n, &FactorConfig::default())
}

/// Trial division below `2^12`, then Brent's rho with seeded starting
/// points. The output is deterministic for a fixed `cfg`.
pub fn factor_with(n: &BigUint, cfg: &FactorConfig) -> Result<Factorization, ArithError> {
    if n < &BigUint::from(2u32) {
        return Err(ArithError::InvalidInput(format!("cannot factor {n}")));
    }
    let mut found: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = n.clone();
    for p in small_primes(TRIAL_LIMIT) {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        while (&rest % p).is_zero() {
            rest /= p;
            *found.entry(pb.clone()).or_default() += 1;
        }
    }
    let mut budget = Budget { used: 0, max: cfg.max_rho_steps };
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_prime_seeded(&m, cfg.seed) {
            *found.entry(m).or_default() += 1;
            continue;
        }
        let d = split(&m, cfg, &mut budget)?;
        stack.push(&m / &d);
        stack.push(d);
    }
    Ok(Factorization { value: n.clone(), factors: found.into_iter().collect() })
}

/// Factors a machine word; convenience for the sieve-driven scans.
pub fn factor_u64(n: u64, cfg: &FactorConfig) -> Result<Vec<(u64, u32)>, ArithError> {
    let f = factor_with(&BigUint::from(n), cfg)?;
    Ok(f.factors
        .into_iter()
        .map(|(p, e)| (p.to_u64().expect("factor of a u64"), e))
        .collect())
}

/// The 2-part of `a`: the largest power of two dividing it.
pub fn two_part(a: &BigUint) -> BigUint {
    match a.trailing_zeros() {
        Some(v) => BigUint::one() << v,
        None => BigUint::zero(),
    }
}

// Strips primes from a known exponent of `a` mod `m` until it is minimal.
fn strip_order(a: &BigUint, m: &BigUint, exponent: &BTreeMap<BigUint, u32>) -> BigUint {
    let mut order = exponent
        .iter()
        .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
    for (p, e) in exponent {
        for _ in 0..*e {
            let candidate = &order / p;
            if a.modpow(&candidate, m).is_one() {
                order = candidate;
            } else {
                break;
            }
        }
    }
    order
}

fn merge_max(into: &mut BTreeMap<BigUint, u32>, p: BigUint, e: u32) {
    let slot = into.entry(p).or_default();
    *slot = (*slot).max(e);
}

/// `ord_m(a)` with the default configuration.
pub fn mult_order(a: &BigUint, m: &BigUint) -> Result<OrderResult, ArithError> {
    mult_order_with(a, m, &FactorConfig::default())
}

/// `ord_m(a)`: factor the Carmichael exponent of `(Z/mZ)^x` and strip.
pub fn mult_order_with(a: &BigUint, m: &BigUint, cfg: &FactorConfig) -> Result<OrderResult, ArithError> {
    if m < &BigUint::from(2u32) {
        return Err(ArithError::InvalidInput(format!("modulus {m} < 2")));
    }
    if !a.gcd(m).is_one() {
        return Err(ArithError::NotCoprime { a: a.clone(), m: m.clone() });
    }
    let mut exponent = BTreeMap::new();
    for (p, k) in factor_with(m, cfg)?.factors {
        if p == BigUint::from(2u32) {
            let e = if k >= 3 { k - 2 } else { k - 1 };
            if e > 0 {
                merge_max(&mut exponent, p, e);
            }
            continue;
        }
        if k > 1 {
            merge_max(&mut exponent, p.clone(), k - 1);
        }
        let pm1 = &p - 1u32;
        if !pm1.is_one() {
            for (r, e) in factor_with(&pm1, cfg)?.factors {
                merge_max(&mut exponent, r, e);
            }
        }
    }
    let order = strip_order(&(a % m), m, &exponent);
    Ok(OrderResult { base: a.clone(), modulus: m.clone(), order })
}

fn check_odd_prime(a: &BigUint, p: &BigUint, e: u32) -> Result<(), ArithError> {
    if e == 0 {
        return Err(ArithError::InvalidInput("exponent e must be >= 1".into()));
    }
    if p.is_even() || !is_prime(p) {
        return Err(ArithError::InvalidInput(format!("{p} is not an odd prime")));
    }
    if (a % p).is_zero() {
        return Err(ArithError::NotCoprime { a: a.clone(), m: p.clone() });
    }
    Ok(())
}

/// `ord_{p^e}(a)`.
///
/// For `e > 1` and `a^f != 1 (mod p^2)`, where `f = ord_p(a)`, the order
/// lifts unchanged: `ord_{p^e}(a) = f p^(e-1)`. Otherwise the order is
/// stripped directly from `phi(p^e)`.
pub fn ord_prime_power(a: &BigUint, p: &BigUint, e: u32) -> Result<OrderResult, ArithError> {
    ord_prime_power_with(a, p, e, &FactorConfig::default())
}

pub fn ord_prime_power_with(a: &BigUint, p: &BigUint, e: u32, cfg: &FactorConfig) -> Result<OrderResult, ArithError> {
    check_odd_prime(a, p, e)?;
    let base = mult_order_with(a, p, cfg)?;
    if e == 1 {
        return Ok(base);
    }
    let p2 = p * p;
    if a.modpow(&base.order, &p2).is_one() {
        return ord_prime_power_direct_with(a, p, e, cfg);
    }
    let modulus = p.pow(e);
    let order = base.order * p.pow(e - 1);
    debug_assert!(a.modpow(&order, &modulus).is_one());
    Ok(OrderResult { base: a.clone(), modulus, order })
}

/// `ord_{p^e}(a)` by stripping `phi(p^e) = p^(e-1)(p-1)`, never using the
/// lifting shortcut.
pub fn ord_prime_power_direct(a: &BigUint, p: &BigUint, e: u32) -> Result<OrderResult, ArithError> {
    ord_prime_power_direct_with(a, p, e, &FactorConfig::default())
}

pub fn ord_prime_power_direct_with(a: &BigUint, p: &BigUint, e: u32, cfg: &FactorConfig) -> Result<OrderResult, ArithError> {
    check_odd_prime(a, p, e)?;
    let modulus = p.pow(e);
    let mut exponent: BTreeMap<BigUint, u32> = factor_with(&(p - 1u32), cfg)?
        .factors
        .into_iter()
        .collect();
    if e > 1 {
        exponent.insert(p.clone(), e - 1);
    }
    exponent.retain(|q, _| !q.is_one());
    let order = strip_order(&(a % &modulus), &modulus, &exponent);
    Ok(OrderResult { base: a.clone(), modulus, order })
}

/// True when `q^(p-1) = 1 (mod p^2)`, i.e. `p` is a base-`q` Wieferich prime.
pub fn is_wieferich_base(q: &BigUint, p: &BigUint) -> bool {
    let p2 = p * p;
    q.modpow(&(p - 1u32), &p2).is_one()
}

/// Word-sized variant of [`is_wieferich_base`].
pub fn is_wieferich_base_u64(q: u64, p: u64) -> bool {
    match p.checked_mul(p) {
        Some(p2) => pow_mod_u64(q % p2, p - 1, p2) == 1,
        None => is_wieferich_base(&BigUint::from(q), &BigUint::from(p)),
    }
}

/// `ord_p(a)` for a prime `p` that fits a word, given the factorization of
/// a multiple `exponent` of the order.
pub fn order_from_exponent_u64(a: u64, p: u64, exponent: u64, factors: &[(u64, u32)]) -> u64 {
    let mut order = exponent;
    for &(q, e) in factors {
        for _ in 0..e {
            if order % q == 0 && pow_mod_u64(a, order / q, p) == 1 {
                order /= q;
            } else {
                break;
            }
        }
    }
    order
}
