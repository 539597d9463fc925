//! Generalized bent functions: exact Fourier spectra in `Z[zeta_t]`.
//!
//! Points of `(Z/tZ)^n` and function tables are indexed mixed-radix,
//! least-significant coordinate first: `x = (x_1, ..., x_n)` sits at index
//! `x_1 + x_2 t + ... + x_n t^(n-1)`. Exhaustive search enumerates tables in
//! lexicographic order of `(table[0], table[1], ...)`.

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::cyclotomic::{CycloError, CyclotomicInt};
use crate::exec::Exec;

/// Default cap on the number of candidate tables an exhaustive search
/// will enumerate.
pub const DEFAULT_SEARCH_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GbfError {
    #[error("malformed candidate: {0}")]
    Malformed(String),
    #[error("{candidates} candidate tables exceed the search limit {limit}")]
    LimitExceeded { candidates: String, limit: u128 },
    #[error(transparent)]
    Cyclo(#[from] CycloError),
}

/// A function table `(Z/tZ)^n -> Z/tZ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GbfCandidate {
    n: u32,
    t: u32,
    table: Vec<u32>,
}

/// One value of the Fourier transform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub lambda: usize,
    pub value: CyclotomicInt,
    pub flat: bool,
}

fn domain_size(n: u32, t: u32) -> Result<usize, GbfError> {
    (t as usize)
        .checked_pow(n)
        .filter(|&s| s <= 1 << 24)
        .ok_or_else(|| GbfError::Malformed(format!("domain (Z/{t}Z)^{n} is too large")))
}

impl GbfCandidate {
    pub fn new(n: u32, t: u32, table: Vec<u32>) -> Result<Self, GbfError> {
        if n == 0 || t < 2 {
            return Err(GbfError::Malformed(format!("need n >= 1 and t >= 2, got n={n}, t={t}")));
        }
        let size = domain_size(n, t)?;
        if table.len() != size {
            return Err(GbfError::Malformed(format!("table has {} entries, expected {size}", table.len())));
        }
        if let Some(v) = table.iter().find(|&&v| v >= t) {
            return Err(GbfError::Malformed(format!("value {v} not in [0, {t})")));
        }
        Ok(GbfCandidate { n, t, table })
    }

    /// Tabulates `f` over `(Z/tZ)^n`.
    pub fn from_fn(n: u32, t: u32, f: impl Fn(&[u32]) -> u32) -> Result<Self, GbfError> {
        let size = domain_size(n, t)?;
        let table = (0..size).map(|i| f(&point(i, n, t)) % t).collect();
        Self::new(n, t, table)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    fn domain(&self) -> usize {
        self.table.len()
    }

    // Exponent histogram of zeta^(f(x) - x.lambda).
    fn fourier_counts(&self, lambda: usize) -> Vec<i64> {
        let t = self.t as usize;
        let mut counts = vec![0i64; t];
        let lam = point(lambda, self.n, self.t);
        let mut x = vec![0u32; self.n as usize];
        let mut dot = 0usize;
        for &fx in &self.table {
            let e = (fx as usize + t - dot) % t;
            counts[e] += 1;
            // odometer step on x, keeping x.lambda mod t current
            for (xi, &li) in x.iter_mut().zip(&lam) {
                *xi += 1;
                dot = (dot + li as usize) % t;
                if *xi < self.t {
                    break;
                }
                // li added t times: dot is back where it started
                *xi = 0;
            }
        }
        counts
    }

    /// `F(lambda) = sum_x zeta_t^(f(x) - x.lambda)`.
    pub fn fourier(&self, lambda: &[u32]) -> Result<CyclotomicInt, GbfError> {
        if lambda.len() != self.n as usize || lambda.iter().any(|&l| l >= self.t) {
            return Err(GbfError::Malformed(format!("lambda {lambda:?} not in (Z/{}Z)^{}", self.t, self.n)));
        }
        Ok(self.fourier_at(index(lambda, self.t)))
    }

    /// [`GbfCandidate::fourier`] by mixed-radix index.
    pub fn fourier_at(&self, lambda: usize) -> CyclotomicInt {
        CyclotomicInt::from_exponent_counts(self.t, &self.fourier_counts(lambda))
            .expect("conductor checked at construction")
    }

    fn target(&self) -> BigInt {
        BigInt::from(self.domain())
    }

    fn is_flat(&self, v: &CyclotomicInt) -> bool {
        (v * &v.conj()).as_integer() == Some(self.target())
    }

    pub fn spectrum(&self) -> Vec<SpectrumEntry> {
        (0..self.domain())
            .map(|lambda| {
                let value = self.fourier_at(lambda);
                let flat = self.is_flat(&value);
                SpectrumEntry { lambda, value, flat }
            })
            .collect()
    }

    /// Exact flatness `F(lambda) conj(F(lambda)) = t^n` for every lambda.
    pub fn is_gbf(&self) -> bool {
        (0..self.domain()).all(|lambda| self.is_flat(&self.fourier_at(lambda)))
    }

    /// `sum_lambda |F(lambda)|^2 = t^(2n)`, exactly.
    pub fn parseval_holds(&self) -> bool {
        let m = self.t;
        let mut acc = CyclotomicInt::zero(m).expect("valid conductor");
        for v in (0..self.domain()).map(|l| self.fourier_at(l)) {
            acc = &acc + &(&v * &v.conj());
        }
        let size = self.target();
        acc.as_integer() == Some(&size * &size)
    }

    /// `sum_lambda F(lambda) zeta^(x.lambda) = t^n zeta^(f(x))` for all `x`.
    pub fn inversion_holds(&self) -> bool {
        let spectrum: Vec<CyclotomicInt> = (0..self.domain()).map(|l| self.fourier_at(l)).collect();
        let t = self.t as i64;
        let size = self.target();
        (0..self.domain()).all(|xi| {
            let x = point(xi, self.n, self.t);
            let mut acc = CyclotomicInt::zero(self.t).expect("valid conductor");
            for (li, f) in spectrum.iter().enumerate() {
                let lam = point(li, self.n, self.t);
                let dot: i64 = x.iter().zip(&lam).map(|(&a, &b)| a as i64 * b as i64).sum();
                let w = CyclotomicInt::zeta_pow(self.t, dot % t).expect("valid conductor");
                acc = &acc + &(f * &w);
            }
            let expected = CyclotomicInt::zeta_pow(self.t, self.table[xi] as i64)
                .expect("valid conductor")
                .scale(&size);
            acc == expected
        })
    }
}

/// Mixed-radix digits of `i`, least significant first.
pub fn point(mut i: usize, n: u32, t: u32) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let d = (i % t as usize) as u32;
            i /= t as usize;
            d
        })
        .collect()
}

/// Inverse of [`point`].
pub fn index(x: &[u32], t: u32) -> usize {
    x.iter().rev().fold(0, |acc, &d| acc * t as usize + d as usize)
}

/// Result of an exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub n: u32,
    pub t: u32,
    pub candidates: u64,
    pub count: u64,
    /// Every GBF table found, in lexicographic order.
    pub tables: Vec<Vec<u32>>,
}

/// Number of function tables of type `[n, t]`, i.e. `t^(t^n)`, if it fits.
pub fn candidate_count(n: u32, t: u32) -> Option<u128> {
    let size = (t as u128).checked_pow(n)?;
    (t as u128).checked_pow(u32::try_from(size).ok()?)
}

// Lexicographic rank -> table, table[0] most significant.
fn table_at(rank: u64, len: usize, t: u32) -> Vec<u32> {
    let mut out = vec![0u32; len];
    let mut r = rank;
    for slot in out.iter_mut().rev() {
        *slot = (r % t as u64) as u32;
        r /= t as u64;
    }
    out
}

/// Enumerates every table of type `[n, t]` and keeps the GBFs.
///
/// Work is cut into contiguous rank shards; shard results are concatenated
/// in order, so the output is identical for every [`Exec`].
pub fn exhaustive_search(n: u32, t: u32, limit: u128, exec: Exec) -> Result<SearchReport, GbfError> {
    if n == 0 || t < 2 {
        return Err(GbfError::Malformed(format!("need n >= 1 and t >= 2, got n={n}, t={t}")));
    }
    let total = candidate_count(n, t).filter(|&c| c <= limit).ok_or_else(|| GbfError::LimitExceeded {
        candidates: format!("{t}^({t}^{n})"),
        limit,
    })?;
    let total = total as u64;
    let len = domain_size(n, t)?;
    let shard = 1024u64;
    let shards: Vec<u64> = (0..total.div_ceil(shard)).collect();
    let found = exec.map(&shards, |&s| {
        (s * shard..((s + 1) * shard).min(total))
            .filter_map(|rank| {
                let c = GbfCandidate { n, t, table: table_at(rank, len, t) };
                c.is_gbf().then_some(c.table)
            })
            .collect::<Vec<_>>()
    });
    let tables: Vec<Vec<u32>> = found.into_iter().flatten().collect();
    Ok(SearchReport { n, t, candidates: total, count: tables.len() as u64, tables })
}

/// Every table of type `[n, t]` in search order; for exhaustive identity
/// checks at tiny types.
pub fn all_candidates(n: u32, t: u32, limit: u128) -> Result<impl Iterator<Item = GbfCandidate>, GbfError> {
    let total = candidate_count(n, t).filter(|&c| c <= limit).ok_or_else(|| GbfError::LimitExceeded {
        candidates: format!("{t}^({t}^{n})"),
        limit,
    })? as u64;
    let len = domain_size(n, t)?;
    Ok((0..total).map(move |rank| GbfCandidate { n, t, table: table_at(rank, len, t) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_function_spectrum() {
        let c = GbfCandidate::from_fn(2, 3, |_| 0).unwrap();
        assert_eq!(c.fourier(&[0, 0]).unwrap().as_integer(), Some(BigInt::from(9)));
        for l in 1..9 {
            assert!(c.fourier_at(l).is_zero());
        }
    }

    #[test]
    fn constant_function_at_zero() {
        for k in 0..6 {
            let c = GbfCandidate::from_fn(1, 6, |_| k).unwrap();
            let expected = CyclotomicInt::zeta_pow(6, k as i64).unwrap().scale(&BigInt::from(6));
            assert_eq!(c.fourier_at(0), expected);
        }
    }

    #[test]
    fn definition_examples() {
        let rothaus = GbfCandidate::from_fn(2, 2, |x| x[0] * x[1]).unwrap();
        assert!(rothaus.spectrum().iter().all(|e| e.flat));
        assert!(rothaus.is_gbf());
        for f in 0..4u32 {
            let c = GbfCandidate::new(1, 2, vec![f & 1, f >> 1]).unwrap();
            assert!(!c.is_gbf());
        }
        assert!(GbfCandidate::from_fn(1, 3, |x| x[0] * x[0]).unwrap().is_gbf());
    }

    #[test]
    fn fourier_matches_direct_sum() {
        let c = GbfCandidate::from_fn(2, 4, |x| (x[0] * x[0] + 3 * x[1]) % 4).unwrap();
        for li in 0..16 {
            let lam = point(li, 2, 4);
            let mut direct = CyclotomicInt::zero(4).unwrap();
            for xi in 0..16 {
                let x = point(xi, 2, 4);
                let dot = (x[0] * lam[0] + x[1] * lam[1]) as i64;
                direct = &direct + &CyclotomicInt::zeta_pow(4, c.table()[xi] as i64 - dot).unwrap();
            }
            assert_eq!(c.fourier(&lam).unwrap(), direct);
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(GbfCandidate::new(1, 2, vec![0]).is_err());
        assert!(GbfCandidate::new(1, 2, vec![0, 2]).is_err());
        assert!(GbfCandidate::new(0, 2, vec![0]).is_err());
        let c = GbfCandidate::from_fn(1, 3, |_| 0).unwrap();
        assert!(c.fourier(&[3]).is_err());
        assert!(c.fourier(&[0, 0]).is_err());
    }

    #[test]
    fn search_examples() {
        let r = exhaustive_search(1, 2, DEFAULT_SEARCH_LIMIT, Exec::Sequential).unwrap();
        assert_eq!((r.candidates, r.count), (4, 0));
        let r = exhaustive_search(2, 2, DEFAULT_SEARCH_LIMIT, Exec::Parallel).unwrap();
        assert_eq!((r.candidates, r.count), (16, 8));
        // x1 x2 + affine: exactly the tables with an odd number of ones
        assert!(r.tables.iter().all(|t| t.iter().sum::<u32>() % 2 == 1));
        assert!(matches!(
            exhaustive_search(2, 6, DEFAULT_SEARCH_LIMIT, Exec::Sequential),
            Err(GbfError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn search_is_strategy_independent() {
        let a = exhaustive_search(1, 4, DEFAULT_SEARCH_LIMIT, Exec::Sequential).unwrap();
        let b = exhaustive_search(1, 4, DEFAULT_SEARCH_LIMIT, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.count > 0);
    }

    #[test]
    fn parseval_and_inversion_on_all_small_candidates() {
        for t in 2..=4 {
            for c in all_candidates(1, t, DEFAULT_SEARCH_LIMIT).unwrap() {
                assert!(c.parseval_holds(), "{c:?}");
                assert!(c.inversion_holds(), "{c:?}");
            }
        }
    }

    fn candidate() -> impl Strategy<Value = GbfCandidate> {
        (1u32..=2, 2u32..=6).prop_flat_map(|(n, t)| {
            let size = (t as usize).pow(n);
            proptest::collection::vec(0..t, size).prop_map(move |table| GbfCandidate::new(n, t, table).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn parseval(c in candidate()) {
            prop_assert!(c.parseval_holds());
        }

        #[test]
        fn inversion(c in candidate()) {
            prop_assert!(c.inversion_holds());
        }

        #[test]
        fn bentness_survives_affine_shifts(a in proptest::collection::vec(0u32..4, 2), b in 0u32..4) {
            // x1 x2 over Z/4 is bent for even n; shift by a.x + b
            let f = GbfCandidate::from_fn(2, 4, |x| x[0] * x[1]).unwrap();
            prop_assert!(f.is_gbf());
            let g = GbfCandidate::from_fn(2, 4, |x| x[0] * x[1] + a[0] * x[0] + a[1] * x[1] + b).unwrap();
            prop_assert!(g.is_gbf());
        }
    }
}
