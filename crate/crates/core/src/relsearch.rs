//! Relation search in the class group of the decomposition field `E` of 2.
//!
//! Write `2 O_E = P_1 ... P_g` with `P_{j+u}` the conjugate of `P_j`
//! (`u = g/2`), and `x_j` for the class of `P_j` in the additive group
//! `Cl(E) = Z/d_1 + ... + Z/d_r`. A GBF of type `[n, 2p]` forces a solution of
//!
//! ```text
//! sum_{j=1..u} n_j x_j + (n - n_j) x_{j+u} = 0,    0 <= n_j <= n,
//! ```
//!
//! so when no solution exists for every odd `n' <= n`, no GBF of those types
//! exists either. The class group itself comes from an external CAS through
//! the fixture format parsed here.
//!
//! Fixture text, version 1:
//!
//! ```text
//! gbf-fixture v1
//! p=89
//! g=8
//! invariants=113
//! vector 1 = 1
//! ...
//! vector 8 = 44
//! pairing = 3,6,1,8,7,2,5,4
//! provenance = free text
//! ```
//!
//! `#` starts a comment except on the provenance line. `invariants` may be
//! empty for a trivial class group. Ideals are re-indexed on load so that
//! `pairing(j) = j + u` for `j <= u`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::arith;
use crate::exec::Exec;

pub const FORMAT_HEADER: &str = "gbf-fixture v1";
pub const DEFAULT_NP_MAX: u64 = 45;
/// Largest `(n + 1)^u` the search accepts by default.
pub const DEFAULT_EVAL_LIMIT: u128 = 1_000_000_000;
/// Largest class number the oracle will tabulate.
pub const ORACLE_GROUP_LIMIT: u64 = 100_000;
/// Largest `(n + 1)^u` the oracle accepts.
pub const ORACLE_EVAL_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixtureError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("check `{check}` failed: {message}")]
    Invariant { check: &'static str, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelsearchError {
    #[error("n must be odd and positive, got {0}")]
    InvalidN(u64),
    #[error("search space (n+1)^u = {size} exceeds the limit {limit}")]
    SearchSpace { size: String, limit: u128 },
    #[error("oracle refuses: {0}")]
    OracleGuard(String),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
}

/// Validated class-group data with conjugate pairs in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGroupFixture {
    p: u64,
    g: usize,
    invariants: Vec<u64>,
    vectors: Vec<Vec<u64>>,
    pairing: Vec<usize>,
    provenance: String,
}

fn invariant(check: &'static str, message: String) -> FixtureError {
    FixtureError::Invariant { check, message }
}

impl ClassGroupFixture {
    /// Checks every invariant and re-indexes the ideals so that
    /// `pairing(j) = j + u`. `pairing` is 1-based; coordinates are reduced
    /// modulo the invariant factors.
    pub fn new(
        p: u64,
        invariants: Vec<u64>,
        vectors: Vec<Vec<i64>>,
        pairing: Vec<usize>,
        provenance: String,
    ) -> Result<Self, FixtureError> {
        let g = vectors.len();
        if !arith::is_prime_u64(p) || p == 2 {
            return Err(invariant("p_prime", format!("p = {p} is not an odd prime")));
        }
        if g < 2 || g % 2 == 1 {
            return Err(invariant("g_even", format!("g = {g} must be even and at least 2")));
        }
        if (p - 1) % g as u64 != 0 {
            return Err(invariant("g_divides_p_minus_1", format!("g = {g} does not divide p - 1 = {}", p - 1)));
        }
        if let Some(d) = invariants.iter().find(|&&d| d == 0) {
            return Err(invariant("invariant_positive", format!("invariant factor {d} is not positive")));
        }
        if let Some(w) = invariants.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(invariant("invariant_chain", format!("{} does not divide {}", w[0], w[1])));
        }
        let r = invariants.len();
        if let Some((j, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != r) {
            return Err(invariant(
                "vector_length",
                format!("vector {} has {} coordinates, expected {r}", j + 1, v.len()),
            ));
        }
        let vectors: Vec<Vec<u64>> = vectors
            .iter()
            .map(|v| v.iter().zip(&invariants).map(|(&c, &d)| c.rem_euclid(d as i64) as u64).collect())
            .collect();
        let mut total = vec![0u64; r];
        for v in &vectors {
            add_into(&mut total, v, &invariants);
        }
        if total.iter().any(|&c| c != 0) {
            return Err(invariant(
                "two_principal",
                format!("2 is not principal: the prime classes sum to {total:?}, not 0"),
            ));
        }
        if pairing.len() != g {
            return Err(invariant("pairing_length", format!("pairing has {} entries, expected {g}", pairing.len())));
        }
        for (j, &pj) in pairing.iter().enumerate() {
            let ok = (1..=g).contains(&pj) && pj != j + 1 && pairing[pj - 1] == j + 1;
            if !ok {
                return Err(invariant(
                    "pairing_involution",
                    format!("pairing is not a fixed-point-free involution at {}", j + 1),
                ));
            }
        }
        // first members of each pair in order, then their partners
        let firsts: Vec<usize> = (1..=g).filter(|&j| j < pairing[j - 1]).collect();
        let order: Vec<usize> = firsts.iter().copied().chain(firsts.iter().map(|&j| pairing[j - 1])).collect();
        let u = g / 2;
        Ok(ClassGroupFixture {
            p,
            g,
            invariants,
            vectors: order.iter().map(|&j| vectors[j - 1].clone()).collect(),
            pairing: (1..=g).map(|j| if j <= u { j + u } else { j - u }).collect(),
            provenance,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn u(&self) -> usize {
        self.g / 2
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    /// Class of `P_j`, `j` 1-based, in normalized order.
    pub fn vector(&self, j: usize) -> &[u64] {
        &self.vectors[j - 1]
    }

    pub fn pairing(&self) -> &[usize] {
        &self.pairing
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `h = d_1 ... d_r`.
    pub fn class_number(&self) -> BigUint {
        self.invariants.iter().map(|&d| BigUint::from(d)).product()
    }

    /// Drops the invariant factor at `index`, projecting the classes onto
    /// the remaining factors.
    pub fn quotient_without(&self, index: usize) -> ClassGroupFixture {
        let mut out = self.clone();
        out.invariants.remove(index);
        for v in &mut out.vectors {
            v.remove(index);
        }
        out
    }

    /// Fixture text in normal form; parses back to an equal fixture.
    pub fn to_text(&self) -> String {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        writeln!(s, "{FORMAT_HEADER}").unwrap();
        writeln!(s, "p={}", self.p).unwrap();
        writeln!(s, "g={}", self.g).unwrap();
        writeln!(s, "invariants={}", list(&self.invariants)).unwrap();
        for (j, v) in self.vectors.iter().enumerate() {
            writeln!(s, "vector {} = {}", j + 1, list(v)).unwrap();
        }
        let pairing: Vec<u64> = self.pairing.iter().map(|&j| j as u64).collect();
        writeln!(s, "pairing = {}", list(&pairing)).unwrap();
        writeln!(s, "provenance = {}", self.provenance).unwrap();
        s
    }
}

fn add_into(acc: &mut [u64], v: &[u64], d: &[u64]) {
    for ((a, &x), &m) in acc.iter_mut().zip(v).zip(d) {
        *a += x;
        if *a >= m {
            *a -= m;
        }
    }
}

fn scaled(v: &[u64], k: u64, d: &[u64]) -> Vec<u64> {
    v.iter().zip(d).map(|(&x, &m)| ((x as u128 * k as u128) % m as u128) as u64).collect()
}

// ---------------------------------------------------------------------------
// parsing

struct Field<T> {
    value: T,
    line: usize,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> FixtureError {
    FixtureError::Parse { line, column, message: message.into() }
}

fn parse_list(value: &str, line: usize, column: usize) -> Result<Vec<i64>, FixtureError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut col = column;
    for item in value.split(',') {
        let lead = item.len() - item.trim_start().len();
        let t = item.trim();
        let v = t
            .parse::<i64>()
            .map_err(|_| parse_err(line, col + lead, format!("expected an integer, found `{t}`")))?;
        out.push(v);
        col += item.len() + 1;
    }
    Ok(out)
}

fn parse_scalar(value: &str, line: usize, column: usize) -> Result<u64, FixtureError> {
    value
        .trim()
        .parse::<u64>()
        .map_err(|_| parse_err(line, column, format!("expected a nonnegative integer, found `{}`", value.trim())))
}

fn set_once<T>(slot: &mut Option<Field<T>>, value: T, key: &str, line: usize) -> Result<(), FixtureError> {
    if let Some(prev) = slot {
        return Err(parse_err(line, 1, format!("duplicate `{key}` (first on line {})", prev.line)));
    }
    *slot = Some(Field { value, line });
    Ok(())
}

/// Parses and validates fixture text.
pub fn parse_fixture(text: &str) -> Result<ClassGroupFixture, FixtureError> {
    let mut header = false;
    let mut p = None;
    let mut g = None;
    let mut invariants = None;
    let mut pairing = None;
    let mut provenance = None;
    let mut vectors: Vec<(usize, usize, usize, Vec<i64>)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let is_provenance = raw.trim_start().starts_with("provenance");
        let content = if is_provenance { raw } else { raw.split('#').next().unwrap_or("") };
        if content.trim().is_empty() {
            continue;
        }
        if !header {
            if content.trim() != FORMAT_HEADER {
                return Err(parse_err(line, 1, format!("expected `{FORMAT_HEADER}`")));
            }
            header = true;
            continue;
        }
        let Some(eq) = content.find('=') else {
            let col = content.len() - content.trim_start().len() + 1;
            return Err(parse_err(line, col, "expected `key = value`"));
        };
        let key = content[..eq].trim();
        let rest = &content[eq + 1..];
        let vcol = eq + 2 + (rest.len() - rest.trim_start().len());
        let value = rest.trim();
        match key {
            "p" => set_once(&mut p, parse_scalar(value, line, vcol)?, key, line)?,
            "g" => set_once(&mut g, parse_scalar(value, line, vcol)?, key, line)?,
            "invariants" => {
                let list = parse_list(rest, line, eq + 2)?;
                if let Some(pos) = list.iter().position(|&d| d <= 0) {
                    return Err(parse_err(line, vcol, format!("invariant factor #{} is not positive", pos + 1)));
                }
                set_once(&mut invariants, list.into_iter().map(|d| d as u64).collect::<Vec<_>>(), key, line)?
            }
            "pairing" => {
                let list = parse_list(rest, line, eq + 2)?;
                if list.iter().any(|&j| j <= 0) {
                    return Err(parse_err(line, vcol, "pairing entries must be positive"));
                }
                set_once(&mut pairing, list.into_iter().map(|j| j as usize).collect::<Vec<_>>(), key, line)?
            }
            "provenance" => set_once(&mut provenance, value.to_string(), key, line)?,
            _ => {
                let Some(j) = key.strip_prefix("vector").map(str::trim) else {
                    let col = content.len() - content.trim_start().len() + 1;
                    return Err(parse_err(line, col, format!("unknown key `{key}`")));
                };
                let jcol = content.find("vector").unwrap_or(0) + 7;
                let j = j.parse::<usize>().map_err(|_| parse_err(line, jcol, format!("bad vector index `{j}`")))?;
                if vectors.iter().any(|v| v.0 == j) {
                    return Err(parse_err(line, jcol, format!("duplicate vector {j}")));
                }
                vectors.push((j, line, jcol, parse_list(rest, line, eq + 2)?));
            }
        }
    }

    if !header {
        return Err(parse_err(last_line.max(1), 1, format!("missing `{FORMAT_HEADER}` header")));
    }
    let missing = |key: &str| parse_err(last_line, 1, format!("missing `{key}`"));
    let p = p.ok_or_else(|| missing("p"))?;
    let g = g.ok_or_else(|| missing("g"))?;
    let invariants = invariants.ok_or_else(|| missing("invariants"))?.value;
    let pairing = pairing.ok_or_else(|| missing("pairing"))?.value;
    let provenance = provenance.ok_or_else(|| missing("provenance"))?.value;
    let gv = g.value as usize;
    if let Some(v) = vectors.iter().find(|v| v.0 == 0 || v.0 > gv) {
        return Err(parse_err(v.1, v.2, format!("vector index {} outside 1..={gv}", v.0)));
    }
    if vectors.len() != gv {
        return Err(invariant("vector_count", format!("found {} vectors, g = {gv}", vectors.len())));
    }
    vectors.sort_by_key(|v| v.0);
    ClassGroupFixture::new(p.value, invariants, vectors.into_iter().map(|v| v.3).collect(), pairing, provenance)
}

/// Reads and parses one fixture file.
pub fn load_fixture(path: &Path) -> Result<ClassGroupFixture, FixtureError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FixtureError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_fixture(&text).map_err(|e| FixtureError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Every `*.fx` file directly inside `dir`, sorted by `p`.
pub fn load_fixture_dir(dir: &Path) -> Result<Vec<(PathBuf, ClassGroupFixture)>, FixtureError> {
    let io = |e: std::io::Error| FixtureError::Io { path: dir.display().to_string(), message: e.to_string() };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "fx") {
            let fx = load_fixture(&path)?;
            out.push((path, fx));
        }
    }
    out.sort_by(|a, b| (a.1.p, &a.0).cmp(&(b.1.p, &b.0)));
    Ok(out)
}

// ---------------------------------------------------------------------------
// search

/// A solution `(n_1, ..., n_u)` of the relation for a given `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RelationWitness {
    pub n: u64,
    pub exponents: Vec<u64>,
}

impl RelationWitness {
    /// Evaluates the relation directly.
    pub fn verify(&self, fx: &ClassGroupFixture) -> bool {
        if self.exponents.len() != fx.u() || self.exponents.iter().any(|&k| k > self.n) {
            return false;
        }
        let d = &fx.invariants;
        let mut acc = vec![0u64; d.len()];
        for (j, &k) in self.exponents.iter().enumerate() {
            add_into(&mut acc, &scaled(fx.vector(j + 1), k, d), d);
            add_into(&mut acc, &scaled(fx.vector(j + 1 + fx.u()), self.n - k, d), d);
        }
        acc.iter().all(|&c| c == 0)
    }

    /// `(n - n_1, ..., n - n_u)`, the image under complex conjugation.
    pub fn conjugate(&self) -> RelationWitness {
        RelationWitness { n: self.n, exponents: self.exponents.iter().map(|&k| self.n - k).collect() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Full lexicographic order; the least witness is returned.
    #[default]
    LeastWitness,
    /// `n_1 <= n/2` only, which loses no solvability by conjugation.
    Halved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub mode: SearchMode,
    pub limit: u128,
    pub exec: Exec,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { mode: SearchMode::LeastWitness, limit: DEFAULT_EVAL_LIMIT, exec: Exec::default() }
    }
}

fn search_space(n: u64, u: usize) -> Option<u128> {
    (n as u128 + 1).checked_pow(u as u32)
}

fn check_n(n: u64) -> Result<(), RelsearchError> {
    if n == 0 || n % 2 == 0 {
        return Err(RelsearchError::InvalidN(n));
    }
    Ok(())
}

struct Prepared<'a> {
    d: &'a [u64],
    // x_j - x_{j+u}
    diffs: Vec<Vec<u64>>,
    n: u64,
}

impl Prepared<'_> {
    // Lexicographically least completion of `prefix` from `level` on.
    fn dfs(&self, level: usize, acc: &mut Vec<u64>, prefix: &mut Vec<u64>) -> bool {
        if level == self.diffs.len() {
            return acc.iter().all(|&c| c == 0);
        }
        let saved = acc.clone();
        for k in 0..=self.n {
            prefix.push(k);
            if self.dfs(level + 1, acc, prefix) {
                return true;
            }
            prefix.pop();
            add_into(acc, &self.diffs[level], self.d);
        }
        *acc = saved;
        false
    }
}

/// Searches `(n_1, ..., n_u)` in `[0, n]^u` for a solution of the relation.
///
/// The work is split by the value of `n_1`; the leftmost split with a
/// solution wins, so the result does not depend on `opts.exec`.
pub fn relation_solvable(
    fx: &ClassGroupFixture,
    n: u64,
    opts: &SearchOptions,
) -> Result<Option<RelationWitness>, RelsearchError> {
    check_n(n)?;
    let u = fx.u();
    match search_space(n, u) {
        Some(s) if s <= opts.limit => {}
        s => {
            return Err(RelsearchError::SearchSpace {
                size: s.map_or_else(|| format!("{}^{u}", n + 1), |s| s.to_string()),
                limit: opts.limit,
            })
        }
    }
    let d = fx.invariants();
    let mut base = vec![0u64; d.len()];
    for j in u + 1..=fx.g() {
        add_into(&mut base, &scaled(fx.vector(j), n, d), d);
    }
    let diffs: Vec<Vec<u64>> = (1..=u)
        .map(|j| {
            fx.vector(j)
                .iter()
                .zip(fx.vector(j + u))
                .zip(d)
                .map(|((&a, &b), &m)| (a + m - b) % m)
                .collect()
        })
        .collect();
    let prep = Prepared { d, diffs, n };
    let top = match opts.mode {
        SearchMode::LeastWitness => n,
        SearchMode::Halved => n / 2,
    };
    let firsts: Vec<u64> = (0..=top).collect();
    let found = opts.exec.find_map_first(&firsts, |&k| {
        let mut acc = base.clone();
        add_into(&mut acc, &scaled(&prep.diffs[0], k, d), d);
        let mut prefix = vec![k];
        prep.dfs(1, &mut acc, &mut prefix).then_some(prefix)
    });
    Ok(found.map(|exponents| RelationWitness { n, exponents }))
}

/// Decides solvability by dynamic programming over explicit tables of the
/// whole group, independently of [`relation_solvable`].
pub fn brute_oracle(fx: &ClassGroupFixture, n: u64) -> Result<bool, RelsearchError> {
    check_n(n)?;
    let h = fx.invariants().iter().try_fold(1u64, |acc, &d| acc.checked_mul(d));
    let h = match h {
        Some(h) if h <= ORACLE_GROUP_LIMIT => h as usize,
        _ => return Err(RelsearchError::OracleGuard(format!("class number {} above {ORACLE_GROUP_LIMIT}", fx.class_number()))),
    };
    if !search_space(n, fx.u()).is_some_and(|s| s <= ORACLE_EVAL_LIMIT) {
        return Err(RelsearchError::OracleGuard(format!("(n+1)^u above {ORACLE_EVAL_LIMIT}")));
    }
    let d = fx.invariants();
    // element index <-> coordinates, first coordinate fastest
    let coords: Vec<Vec<u64>> = (0..h)
        .map(|mut i| {
            d.iter()
                .map(|&m| {
                    let c = (i as u64) % m;
                    i /= m as usize;
                    c
                })
                .collect()
        })
        .collect();
    let encode = |c: &[u64]| c.iter().zip(d).rev().fold(0usize, |acc, (&x, &m)| acc * m as usize + x as usize);
    let add = |a: usize, b: usize| {
        let s: Vec<u64> = coords[a].iter().zip(&coords[b]).zip(d).map(|((&x, &y), &m)| (x + y) % m).collect();
        encode(&s)
    };
    let class = |j: usize| encode(fx.vector(j));
    let mut reach = vec![false; h];
    reach[0] = true;
    for j in 1..=fx.u() {
        let (x, xbar) = (class(j), class(j + fx.u()));
        // k x + (n - k) xbar for k = 0..n
        let mut shift = (0..n).fold(0, |acc, _| add(acc, xbar));
        let mut shifts = Vec::with_capacity(n as usize + 1);
        for _ in 0..=n {
            shifts.push(shift);
            shift = add(add(shift, x), inverse(&coords, xbar, d, &encode));
        }
        let mut next = vec![false; h];
        for e in (0..h).filter(|&e| reach[e]) {
            for &s in &shifts {
                next[add(e, s)] = true;
            }
        }
        reach = next;
    }
    Ok(reach[0])
}

fn inverse(coords: &[Vec<u64>], a: usize, d: &[u64], encode: &impl Fn(&[u64]) -> usize) -> usize {
    let c: Vec<u64> = coords[a].iter().zip(d).map(|(&x, &m)| (m - x) % m).collect();
    encode(&c)
}

/// Outcome of [`max_np`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum NpOutcome {
    /// Already solvable at `n = 1`.
    Absent { witness: RelationWitness },
    /// Unsolvable for odd `n <= np`, solvable at `np + 2`.
    Exact { np: u64, witness: RelationWitness },
    /// Unsolvable for every odd `n <= n_max`.
    AtLeast { n_max: u64 },
}

impl NpOutcome {
    pub fn np(&self) -> Option<u64> {
        match self {
            NpOutcome::Exact { np, .. } => Some(*np),
            _ => None,
        }
    }
}

/// Largest odd `n_p <= n_max` with the relation unsolvable for every odd
/// `n <= n_p`.
pub fn max_np(fx: &ClassGroupFixture, n_max: u64, opts: &SearchOptions) -> Result<NpOutcome, RelsearchError> {
    check_n(n_max)?;
    for n in (1..=n_max).step_by(2) {
        if let Some(witness) = relation_solvable(fx, n, opts)? {
            return Ok(if n == 1 { NpOutcome::Absent { witness } } else { NpOutcome::Exact { np: n - 2, witness } });
        }
    }
    Ok(NpOutcome::AtLeast { n_max })
}

// ---------------------------------------------------------------------------
// synthetic fixtures and batches

/// Random valid fixture with `r <= max_r` invariant factors, each at most
/// `max_d`, and `g` primes over 2.
pub fn synthetic_fixture<R: Rng + ?Sized>(rng: &mut R, max_r: usize, max_d: u64, g: usize) -> ClassGroupFixture {
    assert!(g >= 2 && g % 2 == 0 && max_d >= 2);
    let r = rng.gen_range(0..=max_r);
    let mut invariants: Vec<u64> = Vec::with_capacity(r);
    for _ in 0..r {
        let prev = invariants.last().copied().unwrap_or(1);
        let choices: Vec<u64> = (2..=max_d / prev).map(|k| k * prev).filter(|&d| d >= 2).collect();
        match choices.as_slice() {
            [] => break,
            c => invariants.push(*c.choose(rng).expect("nonempty")),
        }
    }
    let mut vectors: Vec<Vec<i64>> = (0..g - 1)
        .map(|_| invariants.iter().map(|&d| rng.gen_range(0..d) as i64).collect())
        .collect();
    let last: Vec<i64> = invariants
        .iter()
        .enumerate()
        .map(|(i, &d)| (-vectors.iter().map(|v| v[i]).sum::<i64>()).rem_euclid(d as i64))
        .collect();
    vectors.push(last);
    let mut ids: Vec<usize> = (1..=g).collect();
    ids.shuffle(rng);
    let mut pairing = vec![0usize; g];
    for pair in ids.chunks(2) {
        pairing[pair[0] - 1] = pair[1];
        pairing[pair[1] - 1] = pair[0];
    }
    let p = (1..).map(|k| k * g as u64 + 1).find(|&p| p > 2 && arith::is_prime_u64(p)).expect("primes in progression");
    ClassGroupFixture::new(p, invariants, vectors, pairing, "synthetic".into()).expect("valid by construction")
}

/// One fixture's result in a batch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchEntry {
    pub p: u64,
    pub path: String,
    /// Least odd `n <= n_limit` with a solution, if any.
    pub solvable_at: Option<u64>,
    pub witness: Option<RelationWitness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchReport {
    pub n_limit: u64,
    pub expected: usize,
    pub present: usize,
    /// Expected primes with no fixture.
    pub missing: Vec<u64>,
    /// Fixtures for primes outside the expected set; not evaluated.
    pub unexpected: Vec<u64>,
    pub entries: Vec<BatchEntry>,
    /// Present primes with a solution for some odd `n <= n_limit`.
    pub solvable: Vec<u64>,
    /// `complete` when every expected prime had a fixture, else `partial`.
    pub coverage: &'static str,
}

/// Checks the relation for every odd `n <= n_limit` on each fixture whose
/// prime is in `expected`.
pub fn batch_check(
    fixtures: &[(PathBuf, ClassGroupFixture)],
    expected: &[u64],
    n_limit: u64,
    opts: &SearchOptions,
) -> Result<BatchReport, RelsearchError> {
    check_n(n_limit)?;
    let mut want: Vec<u64> = expected.to_vec();
    want.sort_unstable();
    want.dedup();
    let chosen: Vec<&(PathBuf, ClassGroupFixture)> =
        fixtures.iter().filter(|(_, fx)| want.binary_search(&fx.p).is_ok()).collect();
    let mut unexpected: Vec<u64> = fixtures.iter().map(|(_, fx)| fx.p).filter(|p| want.binary_search(p).is_err()).collect();
    unexpected.sort_unstable();
    unexpected.dedup();
    let inner = SearchOptions { exec: Exec::Sequential, ..*opts };
    let results = opts.exec.map(&chosen, |(path, fx)| -> Result<BatchEntry, RelsearchError> {
        for n in (1..=n_limit).step_by(2) {
            if let Some(w) = relation_solvable(fx, n, &inner)? {
                return Ok(BatchEntry { p: fx.p, path: path.display().to_string(), solvable_at: Some(n), witness: Some(w) });
            }
        }
        Ok(BatchEntry { p: fx.p, path: path.display().to_string(), solvable_at: None, witness: None })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut seen: Vec<u64> = entries.iter().map(|e| e.p).collect();
    seen.sort_unstable();
    seen.dedup();
    let missing: Vec<u64> = want.iter().copied().filter(|p| seen.binary_search(p).is_err()).collect();
    let solvable = entries.iter().filter(|e| e.solvable_at.is_some()).map(|e| e.p).collect();
    Ok(BatchReport {
        n_limit,
        expected: want.len(),
        present: seen.len(),
        coverage: if missing.is_empty() { "complete" } else { "partial" },
        missing,
        unexpected,
        entries,
        solvable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THREE: &str = "gbf-fixture v1\np=3\ng=2\ninvariants=3\nvector 1 = 1\nvector 2 = 2\npairing = 2,1\nprovenance = hand\n";

    fn trivial(g: usize) -> ClassGroupFixture {
        let pairing = (1..=g).map(|j| if j % 2 == 1 { j + 1 } else { j - 1 }).collect();
        ClassGroupFixture::new(17, vec![], vec![vec![]; g], pairing, "trivial".into()).unwrap()
    }

    #[test]
    fn parses_small_fixtures() {
        let fx = parse_fixture(THREE).unwrap();
        assert_eq!((fx.p(), fx.g(), fx.u()), (3, 2, 1));
        assert_eq!(fx.class_number(), BigUint::from(3u32));
        let t = trivial(8);
        assert_eq!(t.class_number(), BigUint::from(1u32));
        assert_eq!(parse_fixture(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn normalizes_pairing() {
        let text = "gbf-fixture v1\np=17\ng=4\ninvariants=5\nvector 1 = 1\nvector 2 = 2\nvector 3 = 4\nvector 4 = 3\npairing = 3,4,1,2\nprovenance = x\n";
        let fx = parse_fixture(text).unwrap();
        assert_eq!(fx.pairing(), &[3, 4, 1, 2]);
        let text = "gbf-fixture v1\np=17\ng=4\ninvariants=5\nvector 1 = 1\nvector 2 = 2\nvector 3 = 4\nvector 4 = 3\npairing = 2,1,4,3\nprovenance = x\n";
        let fx = parse_fixture(text).unwrap();
        assert_eq!(fx.pairing(), &[3, 4, 1, 2]);
        // new order is P1, P3, P2, P4
        let got: Vec<u64> = (1..=4).map(|j| fx.vector(j)[0]).collect();
        assert_eq!(got, vec![1, 4, 2, 3]);
    }

    #[test]
    fn rejects_bad_fixtures() {
        let bad_sum = THREE.replace("vector 2 = 2", "vector 2 = 1");
        let err = parse_fixture(&bad_sum).unwrap_err();
        assert!(err.to_string().contains("2 is not principal"), "{err}");
        assert!(matches!(err, FixtureError::Invariant { check: "two_principal", .. }));

        let err = parse_fixture(&THREE.replace("vector 2 = 2", "vector 2 = x")).unwrap_err();
        assert_eq!(err, parse_err(6, 12, "expected an integer, found `x`"));
        let err = parse_fixture(&THREE.replace("gbf-fixture v1", "gbf-fixture v2")).unwrap_err();
        assert!(matches!(err, FixtureError::Parse { line: 1, column: 1, .. }));
        let err = parse_fixture(&THREE.replace("pairing = 2,1", "pairing = 1,2")).unwrap_err();
        assert!(matches!(err, FixtureError::Invariant { check: "pairing_involution", .. }));
        let err = parse_fixture(&THREE.replace("invariants=3", "invariants=3,4")).unwrap_err();
        assert!(matches!(err, FixtureError::Invariant { check: "invariant_chain", .. }));
        let err = parse_fixture(&THREE.replace("p=3", "p=4")).unwrap_err();
        assert!(matches!(err, FixtureError::Invariant { check: "p_prime", .. }));
        let err = parse_fixture(&THREE.replace("vector 2 = 2\n", "")).unwrap_err();
        assert!(matches!(err, FixtureError::Invariant { check: "vector_count", .. }));
        let err = parse_fixture(&THREE.replace("vector 2", "vector 3")).unwrap_err();
        assert!(matches!(err, FixtureError::Parse { line: 6, .. }));
        let err = parse_fixture(&format!("{THREE}p=5\n")).unwrap_err();
        assert!(matches!(err, FixtureError::Parse { line: 9, .. }));
    }

    #[test]
    fn comments_and_provenance() {
        let text = THREE.replace("p=3", "# a comment\np=3 # trailing").replace("provenance = hand", "provenance = ver #3");
        let fx = parse_fixture(&text).unwrap();
        assert_eq!(fx.provenance(), "ver #3");
    }

    #[test]
    fn synthetic_examples() {
        let fx = parse_fixture(THREE).unwrap();
        let opts = SearchOptions::default();
        assert_eq!(relation_solvable(&fx, 1, &opts).unwrap(), None);
        assert!(!brute_oracle(&fx, 1).unwrap());
        let w = relation_solvable(&fx, 3, &opts).unwrap().unwrap();
        assert_eq!(w.exponents, vec![0]);
        assert!(w.verify(&fx));
        assert!(brute_oracle(&fx, 3).unwrap());
        assert!(matches!(relation_solvable(&fx, 2, &opts), Err(RelsearchError::InvalidN(2))));
    }

    #[test]
    fn trivial_group() {
        let fx = trivial(8);
        let w = relation_solvable(&fx, 7, &SearchOptions::default()).unwrap().unwrap();
        assert_eq!(w.exponents, vec![0; 4]);
        assert!(brute_oracle(&fx, 7).unwrap());
        assert!(matches!(max_np(&fx, 45, &SearchOptions::default()).unwrap(), NpOutcome::Absent { .. }));
    }

    #[test]
    fn guards() {
        let fx = trivial(8);
        let opts = SearchOptions { limit: 1000, ..SearchOptions::default() };
        assert!(matches!(relation_solvable(&fx, 9, &opts), Err(RelsearchError::SearchSpace { .. })));
        assert!(brute_oracle(&fx, 99).is_err());
    }

    fn least_by_enumeration(fx: &ClassGroupFixture, n: u64) -> Option<Vec<u64>> {
        let u = fx.u();
        let total = (n + 1).pow(u as u32);
        (0..total).find_map(|mut i| {
            let mut e = vec![0u64; u];
            for slot in e.iter_mut().rev() {
                *slot = i % (n + 1);
                i /= n + 1;
            }
            RelationWitness { n, exponents: e.clone() }.verify(fx).then_some(e)
        })
    }

    #[test]
    fn oracle_agreement_on_random_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..300 {
            let g = [2, 4, 6, 8][i % 4];
            let fx = synthetic_fixture(&mut rng, 3, 20, g);
            for n in (1..=7).step_by(2) {
                let seq = relation_solvable(&fx, n, &SearchOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
                let par = relation_solvable(&fx, n, &SearchOptions::default()).unwrap();
                let half = relation_solvable(&fx, n, &SearchOptions { mode: SearchMode::Halved, ..Default::default() }).unwrap();
                assert_eq!(seq, par);
                assert_eq!(seq.is_some(), half.is_some());
                assert_eq!(seq.is_some(), brute_oracle(&fx, n).unwrap(), "{}", fx.to_text());
                assert_eq!(seq.as_ref().map(|w| w.exponents.clone()), least_by_enumeration(&fx, n));
                if let Some(w) = seq {
                    assert!(w.verify(&fx));
                    assert!(w.conjugate().verify(&fx));
                }
            }
        }
    }

    #[test]
    fn batch_labels_partial_coverage() {
        let fx = parse_fixture(THREE).unwrap();
        let t = trivial(2);
        let fixtures = vec![(PathBuf::from("a.fx"), fx), (PathBuf::from("b.fx"), t)];
        let r = batch_check(&fixtures, &[3, 5], 3, &SearchOptions::default()).unwrap();
        assert_eq!(r.coverage, "partial");
        assert_eq!(r.missing, vec![5]);
        assert_eq!(r.unexpected, vec![17]);
        assert_eq!(r.solvable, vec![3]);
        assert_eq!(r.entries[0].solvable_at, Some(3));
        let r = batch_check(&fixtures, &[3], 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.coverage, "complete");
        assert!(r.solvable.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn text_round_trip(seed in any::<u64>(), gi in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fx = synthetic_fixture(&mut rng, 3, 20, 2 * (gi + 1));
            prop_assert_eq!(parse_fixture(&fx.to_text()).unwrap(), fx);
        }

        #[test]
        fn quotients_never_raise_np(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fx = synthetic_fixture(&mut rng, 3, 20, 4);
            prop_assume!(!fx.invariants().is_empty());
            let opts = SearchOptions::default();
            let np = |f: &ClassGroupFixture| match max_np(f, 15, &opts).unwrap() {
                NpOutcome::Absent { .. } => -1i64,
                NpOutcome::Exact { np, .. } => np as i64,
                NpOutcome::AtLeast { n_max } => n_max as i64 + 2,
            };
            let whole = np(&fx);
            for i in 0..fx.invariants().len() {
                prop_assert!(np(&fx.quotient_without(i)) <= whole);
            }
        }
    }
}
