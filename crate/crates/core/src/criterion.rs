//! Nonexistence criteria for the norm equation `alpha conj(alpha) = q^n` and
//! for GBFs of type `[n, 2p^e]`, with full certificates.
//!
//! With `f = ord_p(q)`, `l = 2(p-1) / ((3 - (-1)^f) f)` and `B(l)` the 2-part
//! of `l`, the equation has no solution in the ring of integers of the
//! decomposition field of `q` in `Q(zeta_{p^e})` when
//!
//! * `f > 1`,
//! * `e = 1` or `q^f != 1 (mod p^2)`,
//! * `p > 4^B(l) q^(n l)`.
//!
//! For `q = 2` the bound is `2^(2B(l) + n l)` and a solution is forced by any
//! GBF of type `[n, 2p^e]` with `n` odd, so the same test rules those out.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, ArithError, FactorConfig};

/// Bounds with more bits than this are reported by size only.
pub const MAX_BOUND_BITS: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CriterionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    NonexistenceCertified,
    Inconclusive,
}

/// One hypothesis of the criterion and whether it was verified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub q: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub n: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub p: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub e: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub f: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub g: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub l: BigUint,
    #[serde(serialize_with = "crate::serde_big::uint")]
    pub two_part_l: BigUint,
    /// `4^B(l) q^(n l)`; `None` when it has more than [`MAX_BOUND_BITS`] bits.
    #[serde(serialize_with = "crate::serde_big::opt_uint")]
    pub bound: Option<BigUint>,
    /// The bound as a power product, e.g. `2^20` or `4^2 * 3^9`.
    pub bound_expr: String,
    /// `log2` of the bound, exact up to float rounding.
    pub bound_log2: f64,
    /// `q^f != 1 (mod p^2)`; `None` when `e = 1` and the condition is void.
    pub wieferich_ok: Option<bool>,
    pub verdict: Verdict,
    pub reasons: Vec<Condition>,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::NonexistenceCertified
    }

    /// Recomputes the certificate from `(q, n, p, e)` and compares every
    /// field.
    pub fn replay(&self) -> Result<bool, CriterionError> {
        let (Some(n), Some(e)) = (self.n.to_u64(), self.e.to_u32()) else {
            return Ok(false);
        };
        Ok(norm_criterion(&self.q, n, &self.p, e)? == *self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Which earlier nonexistence results already cover `[n, 2p^e]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KnownResultFlags {
    /// Some `s >= 1` has `2^s = -1 (mod p^e)`.
    pub kumar_applies: bool,
    pub p_mod_8: u32,
    pub f_parity: Parity,
    pub n_is_one: bool,
    /// `p = 1 (mod 8)`, `n >= 3` and `f` odd: none of the above applies.
    pub new_case: bool,
}

/// `l = 2(p-1) / ((3 - (-1)^f) f)`.
pub fn l_closed_form(p: &BigUint, f: &BigUint) -> BigUint {
    let sign_term: u32 = if f.is_even() { 2 } else { 4 };
    (BigUint::from(2u32) * (p - 1u32)) / (f * sign_term)
}

/// `l` by cases: `(p-1)/f` for even `f`, `(p-1)/(2f)` for odd `f`.
pub fn l_by_cases(p: &BigUint, f: &BigUint) -> BigUint {
    if f.is_even() {
        (p - 1u32) / f
    } else {
        (p - 1u32) / (f * 2u32)
    }
}

fn bits(x: &BigUint) -> u64 {
    x.bits()
}

/// Decides `p > 4^b q^k` (with `b = B(l)`, `k = n l`) by bit length first,
/// building the power only when the lengths are within one of each other.
pub fn exceeds_bound(p: &BigUint, q: &BigUint, b: &BigUint, k: &BigUint) -> bool {
    let pb = BigUint::from(bits(p));
    let two_b = b * 2u32;
    if q == &BigUint::from(2u32) {
        // bound = 2^E, and p >= 2^(bits(p) - 1) with equality only for powers of two
        if p.is_zero() {
            return false;
        }
        let e = &two_b + k;
        let top = pb - 1u32;
        return top > e || (top == e && p.count_ones() > 1);
    }
    let qb = BigUint::from(bits(q));
    // bits(q^k) lies in [k(bits(q) - 1) + 1, k bits(q)]
    let lo = &two_b + k * (&qb - 1u32) + 1u32;
    let hi = &two_b + k * &qb;
    if pb < lo {
        return false;
    }
    if pb > hi {
        return true;
    }
    let (Some(b), Some(k)) = (b.to_u32(), k.to_u32()) else {
        return false;
    };
    p > &(BigUint::from(4u32).pow(b) * q.pow(k))
}

fn log2(x: &BigUint) -> f64 {
    let b = bits(x);
    if b <= 64 {
        return x.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let top = (x >> (b - 64)).to_f64().expect("64-bit value");
    top.log2() + (b - 64) as f64
}

fn materialize_bound(q: &BigUint, b: &BigUint, k: &BigUint, log2_bound: f64) -> Option<BigUint> {
    if log2_bound > MAX_BOUND_BITS as f64 {
        return None;
    }
    let b = b.to_u32()?;
    let k = k.to_u32()?;
    Some(BigUint::from(4u32).pow(b) * q.pow(k))
}

fn check_inputs(q: &BigUint, n: u64, p: &BigUint, e: u32) -> Result<(), CriterionError> {
    let bad = |m: String| Err(CriterionError::InvalidInput(m));
    if n == 0 || n % 2 == 0 {
        return bad(format!("n must be odd and positive, got {n}"));
    }
    if e < 1 {
        return bad("e must be at least 1".into());
    }
    if q == p {
        return bad(format!("q and p must differ, both are {p}"));
    }
    if !arith::is_prime(q) {
        return bad(format!("q = {q} is not prime"));
    }
    if p.is_even() || !arith::is_prime(p) {
        return bad(format!("p = {p} is not an odd prime"));
    }
    Ok(())
}

/// Evaluates the norm-equation criterion for `(q, n, p, e)`.
pub fn norm_criterion(q: &BigUint, n: u64, p: &BigUint, e: u32) -> Result<Certificate, CriterionError> {
    norm_criterion_with(q, n, p, e, &FactorConfig::default())
}

pub fn norm_criterion_with(
    q: &BigUint,
    n: u64,
    p: &BigUint,
    e: u32,
    cfg: &FactorConfig,
) -> Result<Certificate, CriterionError> {
    check_inputs(q, n, p, e)?;
    let f = arith::mult_order_with(q, p, cfg)?.order;
    Ok(build_certificate(q, n, p, e, f))
}

// Everything after the order computation; shared with the scanner, which
// gets `f` from a word-sized path.
pub(crate) fn build_certificate(q: &BigUint, n: u64, p: &BigUint, e: u32, f: BigUint) -> Certificate {
    let g = (p - 1u32) / &f;
    let l = l_closed_form(p, &f);
    debug_assert_eq!(l, l_by_cases(p, &f));
    let b = arith::two_part(&l);
    let k = &l * n;
    let mut reasons = Vec::new();

    let f_ok = f > BigUint::one();
    reasons.push(Condition { name: "f_gt_1", holds: f_ok, detail: format!("f = ord_p(q) = {f}") });
    reasons.push(Condition { name: "n_odd", holds: true, detail: format!("n = {n}") });

    let wieferich_ok = (e > 1).then(|| !q.modpow(&f, &(p * p)).is_one());
    reasons.push(match wieferich_ok {
        None => Condition { name: "q_f_not_1_mod_p2", holds: true, detail: "e = 1, not required".into() },
        Some(ok) => Condition {
            name: "q_f_not_1_mod_p2",
            holds: ok,
            detail: format!("q^f mod p^2 = {}", q.modpow(&f, &(p * p))),
        },
    });

    let two_b = &b * 2u32;
    let is_two = q == &BigUint::from(2u32);
    let bound_expr = if is_two {
        format!("2^{}", &two_b + &k)
    } else {
        format!("4^{b} * {q}^{k}")
    };
    let bound_log2 = two_b.to_f64().unwrap_or(f64::INFINITY) + k.to_f64().unwrap_or(f64::INFINITY) * log2(q);
    let bound = materialize_bound(q, &b, &k, bound_log2);
    let above = exceeds_bound(p, q, &b, &k);
    reasons.push(Condition {
        name: "p_gt_bound",
        holds: above,
        detail: format!("p has {} bits, bound {bound_expr} has log2 {bound_log2:.3}", bits(p)),
    });

    let verdict = if reasons.iter().all(|c| c.holds) { Verdict::NonexistenceCertified } else { Verdict::Inconclusive };
    Certificate {
        q: q.clone(),
        n: BigUint::from(n),
        p: p.clone(),
        e: BigUint::from(e),
        f,
        g,
        l,
        two_part_l: b,
        bound,
        bound_expr,
        bound_log2,
        wieferich_ok,
        verdict,
        reasons,
    }
}

/// The criterion with `q = 2`: certified means no GBF of type `[n, 2p^e]`.
pub fn gbf_criterion(n: u64, p: &BigUint, e: u32) -> Result<Certificate, CriterionError> {
    norm_criterion(&BigUint::from(2u32), n, p, e)
}

pub fn gbf_criterion_with(n: u64, p: &BigUint, e: u32, cfg: &FactorConfig) -> Result<Certificate, CriterionError> {
    norm_criterion_with(&BigUint::from(2u32), n, p, e, cfg)
}

/// Flags for the earlier results covering type `[n, 2p^e]`.
pub fn classify_known(n: u64, p: &BigUint, e: u32) -> Result<KnownResultFlags, CriterionError> {
    check_inputs(&BigUint::from(2u32), n, p, e)?;
    let two = BigUint::from(2u32);
    let f = arith::mult_order(&two, p)?.order;
    let modulus = p.pow(e);
    let ord = arith::ord_prime_power(&two, p, e)?.order;
    // (Z/p^eZ)^* is cyclic, so -1 is a power of 2 iff ord is even, and then
    // it is 2^(ord/2)
    let kumar_applies = ord.is_even() && two.modpow(&(&ord >> 1), &modulus) == &modulus - 1u32;
    let p_mod_8 = (p % 8u32).to_u32().expect("residue");
    let f_parity = if f.is_even() { Parity::Even } else { Parity::Odd };
    let n_is_one = n == 1;
    let new_case = p_mod_8 == 1 && n >= 3 && f_parity == Parity::Odd;
    Ok(KnownResultFlags { kumar_applies, p_mod_8, f_parity, n_is_one, new_case })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x: u128) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn smallest_example() {
        let c = norm_criterion(&b(2), 3, &b(1_049_177), 1).unwrap();
        assert_eq!(c.f, b(131_147));
        assert_eq!(c.g, b(8));
        assert_eq!(c.l, b(4));
        assert_eq!(c.two_part_l, b(4));
        assert_eq!(c.bound, Some(b(1 << 20)));
        assert_eq!(c.bound_expr, "2^20");
        assert_eq!(c.wieferich_ok, None);
        assert_eq!(c.verdict, Verdict::NonexistenceCertified);
        assert!(c.replay().unwrap());
    }

    #[test]
    fn inconclusive_examples() {
        let c = norm_criterion(&b(2), 3, &b(89), 1).unwrap();
        assert_eq!((c.f.clone(), c.l.clone()), (b(11), b(4)));
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(!c.reasons.iter().find(|r| r.name == "p_gt_bound").unwrap().holds);

        let c = norm_criterion(&b(2), 3, &b(7), 1).unwrap();
        assert_eq!((c.f.clone(), c.l.clone(), c.two_part_l.clone()), (b(3), b(1), b(1)));
        assert_eq!(c.bound, Some(b(32)));
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn large_examples() {
        let c = gbf_criterion(11, &b(4_503_599_627_370_889), 1).unwrap();
        assert!(c.is_certified(), "{c:?}");
        assert_eq!(c.g, b(8));
        let c = gbf_criterion(15, &b(295_147_905_179_352_827_401), 1).unwrap();
        assert!(c.is_certified(), "{c:?}");
        assert!(c.replay().unwrap());
    }

    #[test]
    fn wieferich_blocks_prime_powers() {
        let c = gbf_criterion(3, &b(1093), 2).unwrap();
        assert_eq!(c.wieferich_ok, Some(false));
        assert_eq!(c.verdict, Verdict::Inconclusive);
        let c = gbf_criterion(3, &b(1_049_177), 3).unwrap();
        assert_eq!(c.wieferich_ok, Some(true));
        assert!(c.is_certified());
    }

    #[test]
    fn invalid_inputs() {
        for (q, n, p, e) in [(2u128, 3u64, 2u128, 1u32), (2, 4, 7, 1), (2, 3, 7, 0), (4, 3, 7, 1), (2, 3, 9, 1)] {
            assert!(matches!(norm_criterion(&b(q), n, &b(p), e), Err(CriterionError::InvalidInput(_))));
        }
    }

    #[test]
    fn classification_examples() {
        let k = classify_known(3, &b(89), 1).unwrap();
        assert!(k.new_case);
        assert_eq!((k.p_mod_8, k.f_parity), (1, Parity::Odd));
        assert!(!classify_known(1, &b(7), 1).unwrap().new_case);
        assert!(classify_known(1, &b(7), 1).unwrap().n_is_one);
        assert!(classify_known(3, &b(5), 1).unwrap().kumar_applies);
        assert!(!classify_known(3, &b(7), 1).unwrap().kumar_applies);
    }

    #[test]
    fn kumar_flag_matches_direct_search() {
        for p in (3u64..400).filter(|&p| arith::is_prime_u64(p)) {
            for e in 1..=2u32 {
                let m = p.pow(e);
                let direct = (1..=m).any(|s| arith::pow_mod_u64(2, s, m) == m - 1);
                assert_eq!(classify_known(1, &b(p as u128), e).unwrap().kumar_applies, direct, "p={p} e={e}");
            }
        }
    }

    #[test]
    fn bound_comparison_matches_exact() {
        for q in [2u32, 3, 5, 7, 101] {
            for bb in [1u32, 2, 4, 8] {
                for k in [1u32, 3, 7, 12] {
                    let bound = BigUint::from(4u32).pow(bb) * BigUint::from(q).pow(k);
                    for delta in [-2i64, -1, 0, 1, 2] {
                        let p = if delta < 0 { &bound - (-delta) as u32 } else { &bound + delta as u32 };
                        assert_eq!(
                            exceeds_bound(&p, &b(q as u128), &b(bb as u128), &b(k as u128)),
                            p > bound,
                            "q={q} b={bb} k={k} delta={delta}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_bounds_are_not_materialized() {
        // ord_p(2) = 61 for p = 2^61 - 1, so l is about 2^54
        let c = gbf_criterion(3, &b((1 << 61) - 1), 1).unwrap();
        assert!(c.bound.is_none());
        assert!(c.bound_log2 > MAX_BOUND_BITS as f64);
        assert_eq!(c.verdict, Verdict::Inconclusive);
    }

    fn next_prime(mut p: u64) -> u64 {
        p |= 1;
        while !arith::is_prime_u64(p) {
            p += 2;
        }
        p
    }

    #[test]
    fn monotone_in_n_near_floor() {
        let mut certified = 0;
        let mut p = next_prime(1 << 20);
        while p < (1 << 20) + 20_000 {
            let best = (1..=7u64).step_by(2).filter(|&n| gbf_criterion(n, &b(p as u128), 1).unwrap().is_certified()).max();
            if let Some(top) = best {
                certified += 1;
                for n in (1..=top).step_by(2) {
                    assert!(gbf_criterion(n, &b(p as u128), 1).unwrap().is_certified(), "p={p} n={n}");
                }
            }
            p = next_prime(p + 2);
        }
        assert!(certified > 0);
    }

    proptest! {
        #[test]
        fn l_forms_agree(p in (3u64..200_000).prop_map(next_prime)) {
            for q in [2u32, 3, 5] {
                if p % q as u64 == 0 { continue; }
                let f = arith::mult_order(&b(q as u128), &b(p as u128)).unwrap().order;
                prop_assert_eq!(l_closed_form(&b(p as u128), &f), l_by_cases(&b(p as u128), &f));
            }
        }

        #[test]
        fn monotone_in_n(p in (3u64..3_000_000).prop_map(next_prime), n in (1u64..20).prop_map(|k| 2 * k + 1)) {
            let c = gbf_criterion(n, &b(p as u128), 1).unwrap();
            if c.is_certified() {
                for m in (1..n).step_by(2) {
                    prop_assert!(gbf_criterion(m, &b(p as u128), 1).unwrap().is_certified());
                }
            }
        }

        #[test]
        fn replay_reproduces(p in (3u64..1_000_000).prop_map(next_prime), n in (0u64..5).prop_map(|k| 2 * k + 1), e in 1u32..3) {
            let c = gbf_criterion(n, &b(p as u128), e).unwrap();
            prop_assert!(c.replay().unwrap());
        }
    }
}
