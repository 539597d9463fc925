//! Exact arithmetic in `Z[zeta_m]` and in subfields of `Q(zeta_p)`.
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^(phi(m)-1)`
//! reduced modulo the cyclotomic polynomial, so equality is coefficient
//! equality. A subfield `E` of `Q(zeta_p)` is named by the subgroup
//! `H <= (Z/pZ)^x` fixing it; `E` is complex exactly when `-1` is not in `H`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith;

/// Largest conductor accepted by any constructor.
pub const MAX_CONDUCTOR: u32 = 10_000;

/// Tolerance for the sign checks on embeddings, relative to the largest
/// embedding in absolute value.
pub const EMBEDDING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("conductor mismatch: {left} vs {right}")]
    ConductorMismatch { left: u32, right: u32 },
    #[error("conductor {0} outside [2, {MAX_CONDUCTOR}]")]
    ConductorOutOfRange(u32),
    #[error("gcd({t}, {m}) != 1")]
    NotCoprime { t: u64, m: u32 },
    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),
    #[error("not a subgroup of (Z/{p}Z)^x: {reason}")]
    NotSubgroup { p: u32, reason: String },
    #[error("-1 lies in the subgroup, so the fixed field is real")]
    RealFixedField,
    #[error("zero has no norm")]
    ZeroElement,
    #[error("element is not fixed by the subgroup")]
    NotInSubfield,
    #[error("quotient is not integral")]
    NotIntegral,
    #[error("norm routes disagree: conjugates give {by_conjugates}, resultant gives {by_resultant}")]
    NormMismatch { by_conjugates: BigInt, by_resultant: BigInt },
}

// ---------------------------------------------------------------------------
// cyclotomic polynomials

fn mobius(mut n: u32) -> i32 {
    let mut mu = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

/// Euler's totient.
pub fn euler_phi(m: u32) -> u32 {
    let mut n = m;
    let mut out = m;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            while n % d == 0 {
                n /= d;
            }
            out -= out / d;
        }
        d += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

// Phi_m = prod_{d | m} (1 - x^d)^{mu(m/d)} for m > 1, evaluated as a power
// series truncated above degree phi(m).
fn compute_cyclotomic(m: u32) -> Vec<i64> {
    let deg = euler_phi(m) as usize;
    let mut series = vec![BigInt::zero(); deg + 1];
    series[0] = BigInt::one();
    let divisors: Vec<u32> = (1..=m).filter(|d| m % d == 0).collect();
    let (mul, div): (Vec<u32>, Vec<u32>) = divisors
        .into_iter()
        .filter(|d| mobius(m / d) != 0)
        .partition(|d| mobius(m / d) == 1);
    for d in mul {
        let d = d as usize;
        for i in (d..=deg).rev() {
            let t = series[i - d].clone();
            series[i] -= t;
        }
    }
    for d in div {
        let d = d as usize;
        for i in d..=deg {
            let t = series[i - d].clone();
            series[i] += t;
        }
    }
    series
        .into_iter()
        .map(|c| c.to_i64().expect("cyclotomic coefficient fits i64"))
        .collect()
}

/// Coefficients of `Phi_m`, lowest degree first. Cached per conductor.
pub fn cyclotomic_polynomial(m: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&m) {
        return hit.clone();
    }
    let poly = Arc::new(if m == 1 { vec![-1, 1] } else { compute_cyclotomic(m) });
    cache.lock().unwrap().entry(m).or_insert(poly).clone()
}

fn check_conductor(m: u32) -> Result<(), CycloError> {
    if (2..=MAX_CONDUCTOR).contains(&m) {
        Ok(())
    } else {
        Err(CycloError::ConductorOutOfRange(m))
    }
}

// ---------------------------------------------------------------------------
// elements

/// An element of `Z[zeta_m]` in the reduced power basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInt {
    conductor: u32,
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for CyclotomicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z[zeta_{}](", self.conductor)?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}*z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

// Reduces a coefficient vector of any length modulo x^m - 1 and Phi_m.
fn reduce(m: u32, mut v: Vec<BigInt>) -> Vec<BigInt> {
    let m_us = m as usize;
    if v.len() > m_us {
        let tail = v.split_off(m_us);
        for (i, c) in tail.into_iter().enumerate() {
            v[i % m_us] += c;
        }
    }
    let phi = cyclotomic_polynomial(m);
    let deg = phi.len() - 1;
    for i in (deg..v.len()).rev() {
        let c = std::mem::take(&mut v[i]);
        if c.is_zero() {
            continue;
        }
        for (j, &pj) in phi[..deg].iter().enumerate() {
            if pj != 0 {
                v[i - deg + j] -= &c * pj;
            }
        }
    }
    v.resize(deg, BigInt::zero());
    v
}

impl CyclotomicInt {
    /// Element with the given coefficients on `1, zeta, zeta^2, ...`; any
    /// length is accepted and reduced.
    pub fn from_coeffs(m: u32, coeffs: Vec<BigInt>) -> Result<Self, CycloError> {
        check_conductor(m)?;
        Ok(CyclotomicInt { conductor: m, coeffs: reduce(m, coeffs) })
    }

    /// `sum_k counts[k] zeta^k`.
    pub fn from_exponent_counts(m: u32, counts: &[i64]) -> Result<Self, CycloError> {
        Self::from_coeffs(m, counts.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(m: u32) -> Result<Self, CycloError> {
        Self::from_coeffs(m, Vec::new())
    }

    pub fn one(m: u32) -> Result<Self, CycloError> {
        Self::integer(m, BigInt::one())
    }

    pub fn integer(m: u32, c: BigInt) -> Result<Self, CycloError> {
        Self::from_coeffs(m, vec![c])
    }

    /// `zeta_m^k`, with `k` taken modulo `m`.
    pub fn zeta_pow(m: u32, k: i64) -> Result<Self, CycloError> {
        check_conductor(m)?;
        let k = k.rem_euclid(m as i64) as usize;
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = BigInt::one();
        Self::from_coeffs(m, v)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// Power-basis coordinates; length is always `phi(m)`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if any.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coeffs[0].clone())
    }

    fn same_conductor(&self, other: &Self) -> Result<(), CycloError> {
        if self.conductor == other.conductor {
            Ok(())
        } else {
            Err(CycloError::ConductorMismatch { left: self.conductor, right: other.conductor })
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CycloError> {
        self.same_conductor(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CyclotomicInt { conductor: self.conductor, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CycloError> {
        self.same_conductor(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(CyclotomicInt { conductor: self.conductor, coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, CycloError> {
        self.same_conductor(other)?;
        let n = self.coeffs.len();
        let mut prod = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in other.coeffs.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                prod[i + j] += a * b;
            }
        }
        Ok(CyclotomicInt { conductor: self.conductor, coeffs: reduce(self.conductor, prod) })
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CyclotomicInt { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact division of every coordinate by `k`, if it divides them all.
    pub fn div_exact(&self, k: &BigInt) -> Option<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            coeffs.push(q);
        }
        Some(CyclotomicInt { conductor: self.conductor, coeffs })
    }

    /// The automorphism `zeta -> zeta^t`.
    pub fn galois_apply(&self, t: u64) -> Result<Self, CycloError> {
        let m = self.conductor as u64;
        if t.gcd(&m) != 1 {
            return Err(CycloError::NotCoprime { t, m: self.conductor });
        }
        let mut v = vec![BigInt::zero(); self.conductor as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[((i as u64 * t) % m) as usize] += c;
        }
        Ok(CyclotomicInt { conductor: self.conductor, coeffs: reduce(self.conductor, v) })
    }

    /// Complex conjugation, `zeta -> zeta^(m-1)`.
    pub fn conj(&self) -> Self {
        self.galois_apply(self.conductor as u64 - 1)
            .expect("m - 1 is a unit")
    }

    /// Units `t` of `Z/mZ`, i.e. the indices of the Galois group.
    pub fn units(m: u32) -> Vec<u64> {
        (1..m as u64).filter(|t| t.gcd(&(m as u64)) == 1).collect()
    }

    /// One complex value per embedding `zeta -> exp(2 pi i t / m)`,
    /// `t` running over [`CyclotomicInt::units`].
    pub fn embeddings(&self) -> Vec<Complex64> {
        let m = self.conductor as u64;
        let roots: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / m as f64))
            .collect();
        let coeffs: Vec<f64> = self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        Self::units(self.conductor)
            .into_iter()
            .map(|t| {
                coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(i, c)| roots[((i as u64 * t) % m) as usize] * c)
                    .sum()
            })
            .collect()
    }

    /// `N_{Q(zeta_m)/Q}` as the product of all Galois conjugates.
    pub fn norm_by_conjugates(&self) -> Result<BigInt, CycloError> {
        if self.is_zero() {
            return Err(CycloError::ZeroElement);
        }
        let mut acc = CyclotomicInt::one(self.conductor)?;
        for t in Self::units(self.conductor) {
            acc = acc.checked_mul(&self.galois_apply(t)?)?;
        }
        Ok(acc.as_integer().expect("a full Galois product is rational"))
    }

    /// `N_{Q(zeta_m)/Q}` as `Res(Phi_m, A)` where `A` is the representing
    /// polynomial; `Phi_m` is monic so this is exactly the product of `A`
    /// over the primitive roots.
    pub fn norm_by_resultant(&self) -> Result<BigInt, CycloError> {
        if self.is_zero() {
            return Err(CycloError::ZeroElement);
        }
        let phi: Vec<BigInt> = cyclotomic_polynomial(self.conductor)
            .iter()
            .map(|&c| BigInt::from(c))
            .collect();
        let mut a = self.coeffs.clone();
        while a.len() > 1 && a.last().is_some_and(Zero::is_zero) {
            a.pop();
        }
        Ok(resultant(&phi, &a))
    }

    /// Absolute norm, computed both ways; an error if they ever disagree.
    pub fn absolute_norm(&self) -> Result<BigInt, CycloError> {
        let by_conjugates = self.norm_by_conjugates()?;
        let by_resultant = self.norm_by_resultant()?;
        if by_conjugates != by_resultant {
            return Err(CycloError::NormMismatch { by_conjugates, by_resultant });
        }
        Ok(by_conjugates)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&CyclotomicInt> for &CyclotomicInt {
            type Output = CyclotomicInt;
            /// Panics on conductor mismatch; use the `checked_` form to
            /// get an error instead.
            fn $method(self, rhs: &CyclotomicInt) -> CyclotomicInt {
                self.$checked(rhs).expect("conductor mismatch")
            }
        }
        impl $tr<CyclotomicInt> for CyclotomicInt {
            type Output = CyclotomicInt;
            fn $method(self, rhs: CyclotomicInt) -> CyclotomicInt {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        CyclotomicInt { conductor: self.conductor, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Neg for CyclotomicInt {
    type Output = CyclotomicInt;
    fn neg(self) -> CyclotomicInt {
        -&self
    }
}

// Sylvester resultant by fraction-free (Bareiss) elimination.
fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let df = f.len() - 1;
    let dg = g.len() - 1;
    if dg == 0 {
        return Pow::pow(&g[0], df);
    }
    if df == 0 {
        return Pow::pow(&f[0], dg);
    }
    let n = df + dg;
    let mut mat = vec![vec![BigInt::zero(); n]; n];
    // Rows hold coefficients highest degree first.
    for r in 0..dg {
        for (k, c) in f.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..df {
        for (k, c) in g.iter().rev().enumerate() {
            mat[dg + r][r + k] = c.clone();
        }
    }
    bareiss_det(mat)
}

trait Pow {
    fn pow(&self, e: usize) -> BigInt;
}

impl Pow for BigInt {
    fn pow(&self, e: usize) -> BigInt {
        num_traits::pow(self.clone(), e)
    }
}

fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

// ---------------------------------------------------------------------------
// subfields of Q(zeta_p)

/// Subfield `E` of `Q(zeta_p)` given by the subgroup `H` fixing it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SubfieldSpec {
    p: u32,
    subgroup: Vec<u32>,
}

fn check_odd_prime(p: u32) -> Result<(), CycloError> {
    if p % 2 == 1 && arith::is_prime_u64(p as u64) {
        check_conductor(p)
    } else {
        Err(CycloError::NotOddPrime(p))
    }
}

impl SubfieldSpec {
    /// Validates that `elements` (reduced mod `p`) form a subgroup.
    pub fn new(p: u32, elements: &[u64]) -> Result<Self, CycloError> {
        check_odd_prime(p)?;
        let mut h: Vec<u32> = elements.iter().map(|&x| (x % p as u64) as u32).collect();
        h.sort_unstable();
        h.dedup();
        let bad = |reason: String| CycloError::NotSubgroup { p, reason };
        if h.first() == Some(&0) {
            return Err(bad("0 is not a unit".into()));
        }
        if !h.contains(&1) {
            return Err(bad("missing 1".into()));
        }
        for &a in &h {
            for &b in &h {
                let c = (a as u64 * b as u64 % p as u64) as u32;
                if h.binary_search(&c).is_err() {
                    return Err(bad(format!("{a}*{b} = {c} not in H")));
                }
            }
        }
        Ok(SubfieldSpec { p, subgroup: h })
    }

    /// The subgroup generated by `gens`.
    pub fn generated_by(p: u32, gens: &[u64]) -> Result<Self, CycloError> {
        check_odd_prime(p)?;
        let pm = p as u64;
        let mut h = vec![1u64];
        let mut i = 0;
        while i < h.len() {
            for &g in gens {
                if g % pm == 0 {
                    return Err(CycloError::NotSubgroup { p, reason: format!("{g} is not a unit") });
                }
                let c = h[i] * (g % pm) % pm;
                if !h.contains(&c) {
                    h.push(c);
                }
            }
            i += 1;
        }
        Self::new(p, &h)
    }

    /// Decomposition field of the prime `q`: fixed field of `<q mod p>`.
    pub fn decomposition_field(p: u32, q: u64) -> Result<Self, CycloError> {
        Self::generated_by(p, &[q])
    }

    /// Every complex subfield: one per odd divisor `d` of `p - 1`, fixed by
    /// the unique subgroup of order `d`.
    pub fn complex_subfields(p: u32) -> Result<Vec<Self>, CycloError> {
        check_odd_prime(p)?;
        let root = primitive_root(p);
        (1..p as u64)
            .filter(|d| (p as u64 - 1) % d == 0 && d % 2 == 1)
            .map(|d| {
                let g = arith::pow_mod_u64(root, (p as u64 - 1) / d, p as u64);
                Self::generated_by(p, &[g])
            })
            .collect()
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn subgroup(&self) -> &[u32] {
        &self.subgroup
    }

    /// `[E : Q] = (p - 1) / |H|`.
    pub fn degree(&self) -> u32 {
        (self.p - 1) / self.subgroup.len() as u32
    }

    pub fn is_complex(&self) -> bool {
        !self.subgroup.contains(&(self.p - 1))
    }

    pub fn contains(&self, t: u64) -> bool {
        self.subgroup.binary_search(&((t % self.p as u64) as u32)).is_ok()
    }

    /// Coset representatives of `G / K` where `K` is `H` enlarged by
    /// `extra`; the smallest element of each coset is returned.
    pub fn transversal(&self, extra: &[u64]) -> Vec<u64> {
        let p = self.p as u64;
        let mut gens: Vec<u64> = self.subgroup.iter().map(|&h| h as u64).collect();
        gens.extend_from_slice(extra);
        let big = SubfieldSpec::generated_by(self.p, &gens).expect("units generate a subgroup");
        let mut seen = vec![false; self.p as usize];
        let mut reps = Vec::new();
        for t in 1..p {
            if seen[t as usize] {
                continue;
            }
            reps.push(t);
            for &h in &big.subgroup {
                seen[(t * h as u64 % p) as usize] = true;
            }
        }
        reps
    }

    /// Gaussian periods `sum_{h in H} zeta^(c h)`, one per coset `cH`; they
    /// form a Z-basis of the ring of integers of `E`.
    pub fn gaussian_periods(&self) -> Vec<CyclotomicInt> {
        let p = self.p as u64;
        self.transversal(&[])
            .into_iter()
            .map(|c| {
                let mut counts = vec![0i64; self.p as usize];
                for &h in &self.subgroup {
                    counts[(c * h as u64 % p) as usize] += 1;
                }
                CyclotomicInt::from_exponent_counts(self.p, &counts).expect("valid conductor")
            })
            .collect()
    }

    /// Random element of the ring of integers of `E`: a combination of the
    /// Gaussian periods with coefficients in `[-bound, bound]`.
    pub fn random_integral<R: rand::Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> CyclotomicInt {
        let mut acc = CyclotomicInt::zero(self.p).expect("valid conductor");
        for eta in self.gaussian_periods() {
            acc = &acc + &eta.scale(&BigInt::from(rng.gen_range(-bound..=bound)));
        }
        acc
    }

    fn check_element(&self, a: &CyclotomicInt) -> Result<(), CycloError> {
        if a.conductor != self.p {
            return Err(CycloError::ConductorMismatch { left: a.conductor, right: self.p });
        }
        Ok(())
    }

    /// True when every `sigma_h`, `h` in `H`, fixes `a`.
    pub fn fixes(&self, a: &CyclotomicInt) -> bool {
        a.conductor == self.p
            && self
                .subgroup
                .iter()
                .all(|&h| a.galois_apply(h as u64).map(|b| &b == a).unwrap_or(false))
    }
}

fn primitive_root(p: u32) -> u64 {
    let p = p as u64;
    let factors = arith::factor_u64(p - 1, &arith::FactorConfig::default()).expect("small factorization");
    (2..p)
        .find(|&g| factors.iter().all(|&(q, _)| arith::pow_mod_u64(g, (p - 1) / q, p) != 1))
        .unwrap_or(1)
}

/// `N_{K/E}(a) = prod_{h in H} sigma_h(a)` for `K = Q(zeta_p)`.
pub fn subfield_norm(a: &CyclotomicInt, spec: &SubfieldSpec) -> Result<CyclotomicInt, CycloError> {
    spec.check_element(a)?;
    let mut acc = CyclotomicInt::one(spec.p)?;
    for &h in &spec.subgroup {
        acc = acc.checked_mul(&a.galois_apply(h as u64)?)?;
    }
    if !spec.fixes(&acc) {
        return Err(CycloError::NotInSubfield);
    }
    Ok(acc)
}

/// `gamma = zeta_p - zeta_p^(-1)`.
pub fn gamma(p: u32) -> Result<CyclotomicInt, CycloError> {
    check_odd_prime(p)?;
    Ok(CyclotomicInt::zeta_pow(p, 1)? - CyclotomicInt::zeta_pow(p, -1)?)
}

/// `xi = N_{K/E}(gamma)`.
pub fn xi(spec: &SubfieldSpec) -> Result<CyclotomicInt, CycloError> {
    subfield_norm(&gamma(spec.p)?, spec)
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub tolerance: Option<f64>,
    pub detail: String,
}

/// Audit of `gamma`, `xi = N_{K/E}(gamma)` and `delta = xi * conj(xi)` for
/// a complex subfield `E`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaReport {
    pub p: u32,
    pub subgroup: Vec<u32>,
    /// `[E : Q]`.
    pub field_degree: u32,
    /// `[F : Q]` for the maximal real subfield `F` of `E`.
    pub real_degree: u32,
    #[serde(serialize_with = "crate::serde_big::int_vec")]
    pub gamma: Vec<BigInt>,
    #[serde(serialize_with = "crate::serde_big::int_vec")]
    pub xi: Vec<BigInt>,
    #[serde(serialize_with = "crate::serde_big::int_vec")]
    pub delta: Vec<BigInt>,
    /// `N_{K/Q}(delta)`; equals `p^(2|H|)`.
    #[serde(serialize_with = "crate::serde_big::int")]
    pub abs_norm_delta: BigInt,
    /// `N_{F/Q}(delta)`; equals `p`.
    #[serde(serialize_with = "crate::serde_big::int")]
    pub real_norm_delta: BigInt,
    /// `[re, im]` per embedding of `Q(zeta_p)`.
    pub embeddings_delta: Vec<[f64; 2]>,
    pub checks: Vec<Check>,
}

impl DeltaReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Builds `gamma`, `xi`, `delta` for the complex subfield `spec` and checks
/// `conj(xi) = -xi`, `xi^2 = -delta`, `N_{F/Q}(delta) = p` and that every
/// embedding of `delta` is nonnegative.
pub fn delta_report(spec: &SubfieldSpec) -> Result<DeltaReport, CycloError> {
    if !spec.is_complex() {
        return Err(CycloError::RealFixedField);
    }
    let p = spec.p;
    let gamma = gamma(p)?;
    let xi = subfield_norm(&gamma, spec)?;
    let xi_bar = xi.conj();
    let delta = &xi * &xi_bar;
    let mut checks = Vec::new();

    checks.push(Check {
        name: "conj_xi_is_minus_xi".into(),
        passed: xi_bar == -&xi,
        tolerance: None,
        detail: "conj(xi) == -xi in Z[zeta_p]".into(),
    });

    checks.push(Check {
        name: "xi_squared_is_minus_delta".into(),
        passed: &xi * &xi == -&delta,
        tolerance: None,
        detail: "xi^2 == -delta in Z[zeta_p]".into(),
    });

    // N_{F/Q}: product over G / <H, -1>.
    let mut real_norm = CyclotomicInt::one(p)?;
    for t in spec.transversal(&[p as u64 - 1]) {
        real_norm = &real_norm * &delta.galois_apply(t)?;
    }
    let real_norm_delta = real_norm.as_integer().unwrap_or_else(BigInt::zero);
    let abs_norm_delta = delta.absolute_norm()?;
    let expected_abs = num_traits::pow(BigInt::from(p), 2 * spec.subgroup.len());
    checks.push(Check {
        name: "norm_delta_is_p".into(),
        passed: real_norm.as_integer().is_some()
            && real_norm_delta == BigInt::from(p)
            && abs_norm_delta == expected_abs,
        tolerance: None,
        detail: format!(
            "N_F/Q(delta) = {real_norm_delta}; N_K/Q(delta) = {abs_norm_delta} (expected p^{})",
            2 * spec.subgroup.len()
        ),
    });

    let emb = delta.embeddings();
    let scale = emb.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let tol = EMBEDDING_TOLERANCE * scale;
    let numeric_ok = emb.iter().all(|z| z.re >= -tol && z.im.abs() <= tol);
    let exact_real = delta.conj() == delta;
    checks.push(Check {
        name: "delta_totally_nonnegative".into(),
        passed: numeric_ok && exact_real,
        tolerance: Some(EMBEDDING_TOLERANCE),
        detail: format!(
            "min re = {:.3e}, max |im| = {:.3e}, scale = {scale:.3e}; conj(delta) == delta: {exact_real}",
            emb.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
            emb.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        ),
    });

    Ok(DeltaReport {
        p,
        subgroup: spec.subgroup.clone(),
        field_degree: spec.degree(),
        real_degree: spec.degree() / 2,
        gamma: gamma.coeffs,
        xi: xi.coeffs,
        delta: delta.coeffs,
        abs_norm_delta,
        real_norm_delta,
        embeddings_delta: emb.iter().map(|z| [z.re, z.im]).collect(),
        checks,
    })
}

/// Writes elements of the ring of integers of a complex subfield `E` as
/// `(x + y xi) / 2` with `x, y` in the real subfield.
///
/// Precomputes `xi` and the product of its nontrivial conjugates so that
/// division by `xi` is one multiplication and an exact integer division.
pub struct HalfRepresenter {
    spec: SubfieldSpec,
    xi: CyclotomicInt,
    cofactor: CyclotomicInt,
    norm: BigInt,
}

impl HalfRepresenter {
    pub fn new(spec: &SubfieldSpec) -> Result<Self, CycloError> {
        if !spec.is_complex() {
            return Err(CycloError::RealFixedField);
        }
        let xi = xi(spec)?;
        let mut cofactor = CyclotomicInt::one(spec.p)?;
        for t in CyclotomicInt::units(spec.p).into_iter().skip(1) {
            cofactor = &cofactor * &xi.galois_apply(t)?;
        }
        let norm = (&cofactor * &xi).as_integer().ok_or(CycloError::NotIntegral)?;
        Ok(HalfRepresenter { spec: spec.clone(), xi, cofactor, norm })
    }

    pub fn xi(&self) -> &CyclotomicInt {
        &self.xi
    }

    /// Returns `(x, y)` with `2 beta = x + y xi`.
    pub fn split(&self, beta: &CyclotomicInt) -> Result<(CyclotomicInt, CyclotomicInt), CycloError> {
        self.spec.check_element(beta)?;
        if !self.spec.fixes(beta) {
            return Err(CycloError::NotInSubfield);
        }
        let beta_bar = beta.conj();
        let x = beta + &beta_bar;
        let diff = beta - &beta_bar;
        let y = (&diff * &self.cofactor)
            .div_exact(&self.norm)
            .ok_or(CycloError::NotIntegral)?;
        // Z[zeta_p] is the full ring of integers, so integer coordinates
        // mean x and y are algebraic integers.
        if &x + &(&y * &self.xi) != beta.scale(&BigInt::from(2)) {
            return Err(CycloError::NotIntegral);
        }
        debug_assert!(y.conj() == y && x.conj() == x);
        Ok((x, y))
    }
}

/// One-shot form of [`HalfRepresenter::split`].
pub fn half_representation(
    beta: &CyclotomicInt,
    spec: &SubfieldSpec,
) -> Result<(CyclotomicInt, CyclotomicInt), CycloError> {
    HalfRepresenter::new(spec)?.split(beta)
}

/// Smallest real part over all embeddings.
pub fn min_real_embedding(a: &CyclotomicInt) -> f64 {
    a.embeddings().iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
}
