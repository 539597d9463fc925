//! Prime scans with order filters, density counts and Wieferich scans.
//!
//! All scans walk their range in contiguous chunks. Inside a chunk the
//! candidates are evaluated through [`Exec`], and the results are merged in
//! ascending order, so output never depends on the worker count.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, ArithError, FactorConfig};
use crate::criterion::{self, Certificate, CriterionError};
use crate::exec::Exec;

/// Largest `x` accepted by [`density`] and [`wieferich_scan`] by default.
pub const DEFAULT_CEILING: u64 = 100_000_000;

/// Default number of candidates a scan may examine before giving up.
pub const DEFAULT_SCAN_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("scan budget of {budget} candidates exhausted; next candidate {next}")]
    BudgetExceeded { budget: u64, next: BigUint },
    #[error("x = {x} is above the ceiling {ceiling}")]
    CeilingExceeded { x: u64, ceiling: u64 },
    #[error(transparent)]
    Criterion(#[from] CriterionError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FParity {
    #[default]
    Any,
    Odd,
    Even,
}

impl FParity {
    fn admits(self, f: &BigUint) -> bool {
        match self {
            FParity::Any => true,
            FParity::Odd => f.is_odd(),
            FParity::Even => f.is_even(),
        }
    }
}

/// Predicates on a prime `p` in `[lo, hi]`, with `f = ord_p(q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanFilter {
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub q: BigUint,
    /// Required `(p - 1) / f`.
    pub g: Option<u64>,
    pub f_parity: FParity,
    pub p_mod_8: Option<u32>,
    /// Keep only primes certified by the criterion for `(n, e)`.
    pub require_certified: Option<(u64, u32)>,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub lo: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub hi: BigUint,
}

impl ScanFilter {
    /// Base-2 filter over `[lo, hi]` with no predicates.
    pub fn range(lo: BigUint, hi: BigUint) -> Self {
        ScanFilter {
            q: BigUint::from(2u32),
            g: None,
            f_parity: FParity::Any,
            p_mod_8: None,
            require_certified: None,
            lo,
            hi,
        }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        let bad = |m: String| Err(ScanError::InvalidFilter(m));
        if self.lo < BigUint::from(3u32) {
            return bad(format!("lo = {} is below 3", self.lo));
        }
        if self.hi < self.lo {
            return bad(format!("hi = {} is below lo = {}", self.hi, self.lo));
        }
        if !arith::is_prime(&self.q) {
            return bad(format!("q = {} is not prime", self.q));
        }
        if self.g == Some(0) {
            return bad("g must be positive".into());
        }
        if let Some(r) = self.p_mod_8 {
            if r >= 8 || r % 2 == 0 {
                return bad(format!("p mod 8 = {r} admits no odd prime"));
            }
        }
        if let Some((n, e)) = self.require_certified {
            if n % 2 == 0 || e == 0 {
                return bad(format!("certification needs odd n and e >= 1, got ({n}, {e})"));
            }
        }
        Ok(())
    }

    fn step(&self) -> u32 {
        if self.p_mod_8.is_some() {
            8
        } else {
            2
        }
    }

    fn first_candidate(&self) -> BigUint {
        let lo = &self.lo;
        match self.p_mod_8 {
            Some(r) => {
                let cur = (lo % 8u32).to_u32().expect("residue");
                lo + (r + 8 - cur) % 8
            }
            None if lo.is_even() => lo + 1u32,
            None => lo.clone(),
        }
    }
}

/// A prime that passed every predicate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanHit {
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub p: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub f: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub g: BigUint,
    pub certificate: Option<Certificate>,
}

/// Result of [`scan`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub hits: Vec<ScanHit>,
    /// Primes whose `p - 1` could not be factored within the budget.
    #[serde(serialize_with = "crate::serde_big::uint_vec")]
    pub skipped: Vec<BigUint>,
    pub examined: u64,
    /// True when the whole range was covered (rather than stopping at
    /// `max_results`).
    pub complete: bool,
}

/// Work limits for [`scan`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanConfig {
    pub budget: u64,
    pub chunk: u64,
    pub factor: FactorConfig,
    pub exec: Exec,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { budget: DEFAULT_SCAN_BUDGET, chunk: 4096, factor: FactorConfig::default(), exec: Exec::default() }
    }
}

enum Probe {
    Miss,
    Hit(Box<ScanHit>),
    Skipped(BigUint),
}

fn probe(filter: &ScanFilter, p: &BigUint, cfg: &FactorConfig) -> Result<Probe, ScanError> {
    let pm1 = p - 1u32;
    if let Some(g) = filter.g {
        if !(&pm1 % g).to_u64().is_some_and(|r| r == 0) {
            return Ok(Probe::Miss);
        }
        // f odd forces v2(p - 1) = v2(g)
        if filter.f_parity == FParity::Odd && pm1.trailing_zeros() != Some(g.trailing_zeros() as u64) {
            return Ok(Probe::Miss);
        }
    }
    if p == &filter.q || !arith::is_prime(p) {
        return Ok(Probe::Miss);
    }
    if let Some(g) = filter.g {
        // f | (p - 1)/g is necessary for (p - 1)/f = g
        if !filter.q.modpow(&(&pm1 / g), p).is_one() {
            return Ok(Probe::Miss);
        }
    }
    let f = match arith::mult_order_with(&filter.q, p, cfg) {
        Ok(o) => o.order,
        Err(ArithError::FactorBudget { .. }) => {
            log::warn!("skipping {p}: p - 1 resists factoring");
            return Ok(Probe::Skipped(p.clone()));
        }
        Err(e) => return Err(CriterionError::from(e).into()),
    };
    let g = &pm1 / &f;
    if filter.g.is_some_and(|want| g != BigUint::from(want)) || !filter.f_parity.admits(&f) {
        return Ok(Probe::Miss);
    }
    let certificate = match filter.require_certified {
        None => None,
        Some((n, e)) => {
            let c = criterion::build_certificate(&filter.q, n, p, e, f.clone());
            if !c.is_certified() {
                return Ok(Probe::Miss);
            }
            Some(c)
        }
    };
    Ok(Probe::Hit(Box::new(ScanHit { p: p.clone(), f, g, certificate })))
}

/// Ascending primes in the filter's range matching every predicate, at most
/// `max_results` of them.
pub fn scan(filter: &ScanFilter, max_results: usize, cfg: &ScanConfig) -> Result<ScanOutcome, ScanError> {
    filter.validate()?;
    let step = filter.step();
    let mut next = filter.first_candidate();
    let mut out = ScanOutcome { hits: Vec::new(), skipped: Vec::new(), examined: 0, complete: false };
    if max_results == 0 {
        out.complete = next > filter.hi;
        return Ok(out);
    }
    let chunk = cfg.chunk.max(1);
    let shard = (chunk / cfg.exec.workers() as u64).max(16);
    while next <= filter.hi {
        if out.examined >= cfg.budget {
            return Err(ScanError::BudgetExceeded { budget: cfg.budget, next });
        }
        // candidates left in range, capped by chunk and budget
        let left = ((&filter.hi - &next) / step + 1u32).to_u64().unwrap_or(u64::MAX);
        let take = left.min(chunk).min(cfg.budget - out.examined);
        let starts: Vec<u64> = (0..take).step_by(shard as usize).collect();
        let base = next.clone();
        let results = cfg.exec.map(&starts, |&s| {
            let mut local = Vec::new();
            for i in s..(s + shard).min(take) {
                let p = &base + i * step as u64;
                match probe(filter, &p, &cfg.factor) {
                    Ok(Probe::Miss) => {}
                    Ok(r) => local.push(Ok(r)),
                    Err(e) => {
                        local.push(Err(e));
                        break;
                    }
                }
            }
            local
        });
        for r in results.into_iter().flatten() {
            match r? {
                Probe::Hit(h) => {
                    out.hits.push(*h);
                    if out.hits.len() == max_results {
                        out.examined += take;
                        return Ok(out);
                    }
                }
                Probe::Skipped(p) => out.skipped.push(p),
                Probe::Miss => {}
            }
        }
        out.examined += take;
        next = &base + take * step as u64;
    }
    out.complete = true;
    Ok(out)
}

/// Exponent `2B(l) + n l` of the bound, with `l` implied by `g` and the
/// parity of `f`.
pub fn floor_exponent(n: u64, g: u64, parity: FParity) -> Option<u64> {
    let l = match parity {
        FParity::Odd => g / 2,
        FParity::Even => g,
        FParity::Any => return None,
    };
    Some(2 * (1u64 << l.trailing_zeros()) + n * l)
}

/// Least prime with `(p - 1)/f = g`, the given parity of `f` and residue
/// mod 8 that the criterion certifies for `(n, 1)`.
///
/// The walk starts at `2^(2B(l) + n l) + 1`. With `FParity::Any` it starts at
/// the lower of the two parity floors.
pub fn smallest_certified(
    n: u64,
    g: u64,
    f_parity: FParity,
    p_mod_8: Option<u32>,
    cfg: &ScanConfig,
) -> Result<ScanHit, ScanError> {
    if n % 2 == 0 || g == 0 || g % 2 == 1 {
        return Err(ScanError::InvalidFilter(format!("need odd n and even positive g, got n={n}, g={g}")));
    }
    let exp = match f_parity {
        FParity::Any => floor_exponent(n, g, FParity::Odd).min(floor_exponent(n, g, FParity::Even)),
        _ => floor_exponent(n, g, f_parity),
    }
    .expect("parity fixed above");
    let lo = (BigUint::one() << exp) + 1u32;
    let filter = ScanFilter {
        q: BigUint::from(2u32),
        g: Some(g),
        f_parity,
        p_mod_8,
        require_certified: Some((n, 1)),
        hi: &lo << 1,
        lo,
    };
    let out = scan(&filter, 1, cfg)?;
    out.hits.into_iter().next().ok_or(ScanError::BudgetExceeded { budget: cfg.budget, next: filter.hi })
}

/// Odd-only sieve of Eratosthenes; `primes_up_to(x)` lists every prime `<= x`.
pub fn primes_up_to(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    // bit i stands for 2i + 1
    let len = (x as usize).div_ceil(2) + 1;
    let mut composite = vec![0u64; len.div_ceil(64)];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= x as usize {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while 2 * j < x as usize {
                composite[j / 64] |= 1 << (j % 64);
                j += p;
            }
        }
        i += 1;
    }
    let mut out = vec![2];
    out.extend(
        (1..len)
            .filter(|&i| composite[i / 64] >> (i % 64) & 1 == 0)
            .map(|i| (2 * i + 1) as u64)
            .take_while(|&p| p <= x),
    );
    out
}

/// Counts behind `M_{q^n, g}(x) / pi(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub q: u64,
    pub n: u64,
    pub g: u64,
    pub x: u64,
    /// Whether the size condition `p > 4^B(l) q^(n l)` was applied.
    pub bound_applied: bool,
    pub m: u64,
    pub pi_x: u64,
    /// `m / pi_x` in lowest terms, as `"a/b"`.
    pub ratio: String,
    pub ratio_f64: f64,
}

// Factors m by trial division with the given primes, which must cover sqrt(m).
fn factor_small(mut m: u64, primes: &[u64]) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for &r in primes {
        if r * r > m {
            break;
        }
        if m % r == 0 {
            let mut e = 0;
            while m % r == 0 {
                m /= r;
                e += 1;
            }
            out.push((r, e));
        }
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// `ord_p(q)` for a prime `p` that fits a word, with `primes` covering
/// `sqrt(p)`.
fn order_small(q: u64, p: u64, primes: &[u64]) -> u64 {
    let factors = factor_small(p - 1, primes);
    arith::order_from_exponent_u64(q % p, p, p - 1, &factors)
}

/// `p > 4^B(l) q^(n l)`, with `l` from `f`.
fn size_condition(q: u64, n: u64, p: u64, f: u64) -> bool {
    let l = criterion::l_by_cases(&BigUint::from(p), &BigUint::from(f));
    let b = arith::two_part(&l);
    criterion::exceeds_bound(&BigUint::from(p), &BigUint::from(q), &b, &(l * n))
}

/// Counts primes `p <= x` with `(p - 1)/ord_p(q) = g`, `ord_p(q) > 1` and,
/// when `apply_bound`, `p > 4^B(l) q^(n l)`.
pub fn density(q: u64, n: u64, g: u64, x: u64, apply_bound: bool, ceiling: u64, exec: Exec) -> Result<DensityReport, ScanError> {
    if x > ceiling {
        return Err(ScanError::CeilingExceeded { x, ceiling });
    }
    if g == 0 || n == 0 || !arith::is_prime_u64(q) {
        return Err(ScanError::InvalidFilter(format!("need prime q and positive n, g; got q={q}, n={n}, g={g}")));
    }
    let primes = primes_up_to(x);
    let small: Vec<u64> = primes.iter().copied().take_while(|&r| r.saturating_mul(r) <= x).collect();
    let chunks: Vec<&[u64]> = primes.chunks(1 << 14).collect();
    let counts = exec.map(&chunks, |chunk| {
        chunk
            .iter()
            .filter(|&&p| {
                if p == q || (p - 1) % g != 0 {
                    return false;
                }
                // cheap necessary condition: f divides (p - 1)/g
                if arith::pow_mod_u64(q % p, (p - 1) / g, p) != 1 {
                    return false;
                }
                let f = order_small(q, p, &small);
                f > 1 && (p - 1) / f == g && (!apply_bound || size_condition(q, n, p, f))
            })
            .count() as u64
    });
    let m: u64 = counts.iter().sum();
    let pi_x = primes.len() as u64;
    let d = m.gcd(&pi_x).max(1);
    let ratio_f64 = if pi_x == 0 { 0.0 } else { m as f64 / pi_x as f64 };
    Ok(DensityReport {
        q,
        n,
        g,
        x,
        bound_applied: apply_bound,
        m,
        pi_x,
        ratio: format!("{}/{}", m / d, if pi_x == 0 { 1 } else { pi_x / d }),
        ratio_f64,
    })
}

/// Every prime `p <= limit` with `q^(p-1) = 1 (mod p^2)`.
pub fn wieferich_scan(q: u64, limit: u64, ceiling: u64, exec: Exec) -> Result<Vec<u64>, ScanError> {
    if limit > ceiling {
        return Err(ScanError::CeilingExceeded { x: limit, ceiling });
    }
    if q < 2 {
        return Err(ScanError::InvalidFilter(format!("base q = {q} must be at least 2")));
    }
    let primes = primes_up_to(limit);
    let chunks: Vec<&[u64]> = primes.chunks(1 << 14).collect();
    let hits = exec.map(&chunks, |chunk| {
        chunk
            .iter()
            .copied()
            .filter(|&p| q % p != 0 && arith::is_wieferich_base_u64(q, p))
            .collect::<Vec<_>>()
    });
    Ok(hits.into_iter().flatten().collect())
}
