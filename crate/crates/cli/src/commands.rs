//! One function per subcommand. Each returns its echoed parameters and
//! either an [`Outcome`] or a [`Failure`] carrying the exit code.

use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, ValueEnum};
use gbf_core::criterion::{self, Verdict};
use gbf_core::cyclotomic::{self, CycloError, HalfRepresenter, SubfieldSpec};
use gbf_core::gbf::{self, GbfError, DEFAULT_SEARCH_LIMIT};
use gbf_core::relsearch::{self, NpOutcome, RelsearchError, SearchMode, SearchOptions, DEFAULT_EVAL_LIMIT, DEFAULT_NP_MAX};
use gbf_core::scanner::{self, FParity, ScanConfig, ScanError, ScanFilter, DEFAULT_CEILING, DEFAULT_SCAN_BUDGET};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{exit, Outcome, Table};
use crate::{big, Global};

pub struct Failure {
    pub status: &'static str,
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { status: "input_error", code: exit::USAGE, message: message.to_string() }
    }

    fn budget(message: impl ToString) -> Self {
        Failure { status: "budget_exceeded", code: exit::BUDGET, message: message.to_string() }
    }
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::BudgetExceeded { .. } | ScanError::CeilingExceeded { .. } => Failure::budget(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<RelsearchError> for Failure {
    fn from(e: RelsearchError) -> Self {
        match e {
            RelsearchError::SearchSpace { .. } | RelsearchError::OracleGuard(_) => Failure::budget(e),
            _ => Failure::usage(e),
        }
    }
}

type Run = (Value, Result<Outcome, Failure>);

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn globals(g: &Global) -> Value {
    json!({ "seed": g.seed.to_string(), "threads": g.threads })
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ParityArg {
    Any,
    Odd,
    Even,
}

impl From<ParityArg> for FParity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Any => FParity::Any,
            ParityArg::Odd => FParity::Odd,
            ParityArg::Even => FParity::Even,
        }
    }
}

fn parity_name(p: ParityArg) -> &'static str {
    match p {
        ParityArg::Any => "any",
        ParityArg::Odd => "odd",
        ParityArg::Even => "even",
    }
}

/// Accepts plain integers and `1e6`-style powers of ten.
fn count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| format!("bad mantissa in `{s}`"))?;
        let e: u32 = e.parse().map_err(|_| format!("bad exponent in `{s}`"))?;
        return 10u64.checked_pow(e).and_then(|t| t.checked_mul(m)).ok_or_else(|| format!("`{s}` overflows"));
    }
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn count128(s: &str) -> Result<u128, String> {
    count(s).map(u128::from)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Odd dimension n.
    #[arg(long)]
    n: u64,
    /// Odd prime p.
    #[arg(long, value_parser = big)]
    p: BigUint,
    #[arg(long, default_value_t = 1)]
    e: u32,
    /// Base prime q; 2 gives the GBF form.
    #[arg(long, value_parser = big, default_value = "2")]
    q: BigUint,
}

pub fn certify(a: &CertifyArgs, g: &Global) -> Run {
    let params = json!({ "n": a.n, "p": a.p.to_string(), "e": a.e, "q": a.q.to_string(), "global": globals(g) });
    let run = || {
        let cert = criterion::norm_criterion_with(&a.q, a.n, &a.p, a.e, &g.factor_config()).map_err(Failure::usage)?;
        let known = if a.q == BigUint::from(2u32) {
            Some(criterion::classify_known(a.n, &a.p, a.e).map_err(Failure::usage)?)
        } else {
            None
        };
        let (status, code) = match cert.verdict {
            Verdict::NonexistenceCertified => ("certified", exit::OK),
            Verdict::Inconclusive => ("inconclusive", exit::INCONCLUSIVE),
        };
        let mut t = Table::new(vec!["field", "value"]);
        for (k, v) in [
            ("q", cert.q.to_string()),
            ("n", cert.n.to_string()),
            ("p", cert.p.to_string()),
            ("e", cert.e.to_string()),
            ("f", cert.f.to_string()),
            ("g", cert.g.to_string()),
            ("l", cert.l.to_string()),
            ("B(l)", cert.two_part_l.to_string()),
            ("bound", cert.bound_expr.clone()),
            ("wieferich_ok", format!("{:?}", cert.wieferich_ok)),
            ("verdict", format!("{:?}", cert.verdict)),
        ] {
            t.row(vec![k.to_string(), v]);
        }
        for c in &cert.reasons {
            t.row(vec![format!("check {}", c.name), format!("{} ({})", if c.holds { "holds" } else { "fails" }, c.detail)]);
        }
        let results = json!({ "certificate": to_value(&cert), "known_results": known.as_ref().map(to_value) });
        Ok(Outcome::new(status, code, results).with_table(t))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, value_parser = big, default_value = "2")]
    q: BigUint,
    /// Required (p - 1)/ord_p(q).
    #[arg(long)]
    g: Option<u64>,
    #[arg(long, value_enum, default_value = "any")]
    f_parity: ParityArg,
    /// Required residue of p mod 8.
    #[arg(long)]
    mod8: Option<u32>,
    /// Keep only primes certified for this odd n.
    #[arg(long)]
    certify_n: Option<u64>,
    /// Exponent e used with --certify-n.
    #[arg(long, default_value_t = 1)]
    certify_e: u32,
    /// Start of the range (inclusive).
    #[arg(long, value_parser = big)]
    from: BigUint,
    /// End of the range (inclusive); defaults to 2^64 times --from.
    #[arg(long, value_parser = big)]
    to: Option<BigUint>,
    /// Stop after this many primes.
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Candidates to examine before giving up.
    #[arg(long, value_parser = count, default_value_t = DEFAULT_SCAN_BUDGET)]
    budget: u64,
}

fn hit_rows(hits: &[scanner::ScanHit]) -> (Table, Vec<Value>) {
    let mut t = Table::new(vec!["p", "f", "g", "bound", "verdict"]);
    let mut lines = Vec::new();
    for h in hits {
        let (bound, verdict) = match &h.certificate {
            Some(c) => (c.bound_expr.clone(), format!("{:?}", c.verdict)),
            None => ("-".into(), "-".into()),
        };
        t.row(vec![h.p.to_string(), h.f.to_string(), h.g.to_string(), bound, verdict]);
        lines.push(to_value(h));
    }
    (t, lines)
}

pub fn scan(a: &ScanArgs, g: &Global) -> Run {
    let hi = a.to.clone().unwrap_or_else(|| &a.from << 64);
    let params = json!({
        "q": a.q.to_string(), "g": a.g, "f_parity": parity_name(a.f_parity), "mod8": a.mod8,
        "certify_n": a.certify_n, "certify_e": a.certify_e, "from": a.from.to_string(), "to": hi.to_string(),
        "count": a.count, "budget": a.budget, "global": globals(g),
    });
    let run = || {
        let filter = ScanFilter {
            q: a.q.clone(),
            g: a.g,
            f_parity: a.f_parity.into(),
            p_mod_8: a.mod8,
            require_certified: a.certify_n.map(|n| (n, a.certify_e)),
            lo: a.from.clone(),
            hi: hi.clone(),
        };
        let cfg = ScanConfig { budget: a.budget, factor: g.factor_config(), exec: g.exec(), ..Default::default() };
        let out = scanner::scan(&filter, a.count, &cfg)?;
        let (t, lines) = hit_rows(&out.hits);
        Ok(Outcome::new("ok", exit::OK, to_value(&out)).with_table(t).with_lines(lines))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SmallestArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    g: u64,
    #[arg(long, value_enum, default_value = "odd")]
    f_parity: ParityArg,
    #[arg(long)]
    mod8: Option<u32>,
    #[arg(long, value_parser = count, default_value_t = DEFAULT_SCAN_BUDGET)]
    budget: u64,
}

pub fn smallest(a: &SmallestArgs, g: &Global) -> Run {
    let params = json!({
        "n": a.n, "g": a.g, "f_parity": parity_name(a.f_parity), "mod8": a.mod8, "budget": a.budget, "global": globals(g),
    });
    let run = || {
        let cfg = ScanConfig { budget: a.budget, factor: g.factor_config(), exec: g.exec(), ..Default::default() };
        let hit = scanner::smallest_certified(a.n, a.g, a.f_parity.into(), a.mod8, &cfg)?;
        let (t, lines) = hit_rows(std::slice::from_ref(&hit));
        Ok(Outcome::new("certified", exit::OK, to_value(&hit)).with_table(t).with_lines(lines))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Exponent n in the size condition p > 4^B(l) q^(n l).
    #[arg(long, default_value_t = 3)]
    n: u64,
    #[arg(long)]
    g: u64,
    /// One or more limits, comma separated; one row each.
    #[arg(long, value_parser = count, value_delimiter = ',', required = true)]
    x: Vec<u64>,
    /// Drop the size condition and count by g alone.
    #[arg(long)]
    no_bound: bool,
    #[arg(long, value_parser = count, default_value_t = DEFAULT_CEILING)]
    ceiling: u64,
}

pub fn density(a: &DensityArgs, g: &Global) -> Run {
    let params = json!({
        "q": a.q, "n": a.n, "g": a.g, "x": a.x, "no_bound": a.no_bound, "ceiling": a.ceiling, "global": globals(g),
    });
    let run = || {
        let mut rows = Vec::new();
        let mut t = Table::new(vec!["x", "M", "pi(x)", "ratio", "ratio_f64"]);
        for &x in &a.x {
            let r = scanner::density(a.q, a.n, a.g, x, !a.no_bound, a.ceiling, g.exec())?;
            t.row(vec![r.x.to_string(), r.m.to_string(), r.pi_x.to_string(), r.ratio.clone(), format!("{:.6}", r.ratio_f64)]);
            rows.push(to_value(&r));
        }
        Ok(Outcome::new("ok", exit::OK, json!({ "rows": rows })).with_table(t).with_lines(rows))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct WieferichArgs {
    #[arg(long, default_value_t = 2)]
    q: u64,
    #[arg(long, value_parser = count)]
    limit: u64,
    #[arg(long, value_parser = count, default_value_t = DEFAULT_CEILING)]
    ceiling: u64,
}

pub fn wieferich(a: &WieferichArgs, g: &Global) -> Run {
    let params = json!({ "q": a.q, "limit": a.limit, "ceiling": a.ceiling, "global": globals(g) });
    let run = || {
        let ps = scanner::wieferich_scan(a.q, a.limit, a.ceiling, g.exec())?;
        let mut t = Table::new(vec!["p"]);
        for p in &ps {
            t.row(vec![p.to_string()]);
        }
        let lines = ps.iter().map(|p| json!({ "p": p.to_string() })).collect();
        let primes: Vec<String> = ps.iter().map(u64::to_string).collect();
        Ok(Outcome::new("ok", exit::OK, json!({ "primes": primes })).with_table(t).with_lines(lines))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("field").required(true).args(["subgroup", "all"])))]
pub struct CycloArgs {
    #[arg(long)]
    p: u32,
    /// Elements of the subgroup H, comma separated.
    #[arg(long, value_delimiter = ',')]
    subgroup: Option<Vec<u64>>,
    /// Check every complex subfield of Q(zeta_p).
    #[arg(long)]
    all: bool,
    /// Random integral elements to split as (x + y xi)/2 per subfield.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    /// Coefficient bound for the random elements.
    #[arg(long, default_value_t = 100)]
    coeff_bound: i64,
}

fn cyclo_failure(e: CycloError) -> Failure {
    match e {
        CycloError::NotIntegral | CycloError::NormMismatch { .. } => {
            Failure { status: "verification_failed", code: exit::VERIFICATION, message: e.to_string() }
        }
        _ => Failure::usage(e),
    }
}

pub fn cyclo_verify(a: &CycloArgs, g: &Global) -> Run {
    let params = json!({
        "p": a.p, "subgroup": a.subgroup, "all": a.all, "samples": a.samples, "coeff_bound": a.coeff_bound,
        "global": globals(g),
    });
    let run = || {
        let specs = match &a.subgroup {
            Some(h) => vec![SubfieldSpec::new(a.p, h).map_err(cyclo_failure)?],
            None => SubfieldSpec::complex_subfields(a.p).map_err(cyclo_failure)?,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let mut reports = Vec::new();
        let mut halves = Vec::new();
        let mut ok = true;
        let mut t = Table::new(vec!["degree", "subgroup", "check", "result"]);
        for spec in &specs {
            let r = cyclotomic::delta_report(spec).map_err(cyclo_failure)?;
            ok &= r.all_passed();
            for c in &r.checks {
                t.row(vec![
                    r.field_degree.to_string(),
                    format!("{:?}", r.subgroup),
                    c.name.clone(),
                    if c.passed { "pass".into() } else { format!("FAIL: {}", c.detail) },
                ]);
            }
            reports.push(to_value(&r));
            if a.samples > 0 {
                let rep = HalfRepresenter::new(spec).map_err(cyclo_failure)?;
                let mut passed = 0;
                for _ in 0..a.samples {
                    let beta = spec.random_integral(&mut rng, a.coeff_bound);
                    if rep.split(&beta).is_ok() {
                        passed += 1;
                    }
                }
                ok &= passed == a.samples;
                t.row(vec![
                    r.field_degree.to_string(),
                    format!("{:?}", r.subgroup),
                    "half_representation".into(),
                    format!("{passed}/{}", a.samples),
                ]);
                halves.push(json!({ "subgroup": spec.subgroup(), "samples": a.samples, "passed": passed }));
            }
        }
        let (status, code) = if ok { ("ok", exit::OK) } else { ("verification_failed", exit::VERIFICATION) };
        let results = json!({ "reports": reports, "half_representation": halves });
        Ok(Outcome::new(status, code, results).with_table(t))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct GbfSearchArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    t: u32,
    /// Refuse when t^(t^n) exceeds this.
    #[arg(long, value_parser = count128, default_value_t = DEFAULT_SEARCH_LIMIT)]
    limit: u128,
}

/// Tables are listed only up to this many GBFs.
const MAX_LISTED_TABLES: u64 = 100;

pub fn gbf_search(a: &GbfSearchArgs, g: &Global) -> Run {
    let params = json!({ "n": a.n, "t": a.t, "limit": a.limit.to_string(), "global": globals(g) });
    let run = || {
        let r = gbf::exhaustive_search(a.n, a.t, a.limit, g.exec()).map_err(|e| match e {
            GbfError::LimitExceeded { .. } => Failure::budget(e),
            _ => Failure::usage(e),
        })?;
        let mut t = Table::new(vec!["type", "candidates", "gbfs"]);
        t.row(vec![format!("[{}, {}]", r.n, r.t), r.candidates.to_string(), r.count.to_string()]);
        let listed = r.count <= MAX_LISTED_TABLES;
        let results = json!({
            "n": r.n, "t": r.t, "candidates": r.candidates.to_string(), "count": r.count.to_string(),
            "tables": if listed { to_value(&r.tables) } else { Value::Null },
        });
        Ok(Outcome::new("ok", exit::OK, results).with_table(t))
    };
    (params, run())
}

// ---------------------------------------------------------------------------

/// Relative fixture paths are looked up in `GBF_FIXTURE_DIR` first, then
/// as given.
pub fn resolve_fixture(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os("GBF_FIXTURE_DIR") {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn fixture_root() -> PathBuf {
    std::env::var_os("GBF_FIXTURE_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures"))
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Least,
    Halved,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Least => SearchMode::LeastWitness,
            ModeArg::Halved => SearchMode::Halved,
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("task").required(true).args(["n", "max_np"])))]
pub struct RelsearchArgs {
    /// Fixture file.
    #[arg(long)]
    fixture: PathBuf,
    /// Decide solvability for this odd n.
    #[arg(long)]
    n: Option<u64>,
    /// Compute n_p.
    #[arg(long)]
    max_np: bool,
    /// Largest odd n tried by --max-np.
    #[arg(long, default_value_t = DEFAULT_NP_MAX)]
    n_max: u64,
    #[arg(long, value_enum, default_value = "least")]
    mode: ModeArg,
    /// Refuse when (n + 1)^(g/2) exceeds this.
    #[arg(long, value_parser = count128, default_value_t = DEFAULT_EVAL_LIMIT)]
    limit: u128,
}

pub fn relsearch(a: &RelsearchArgs, g: &Global) -> Run {
    let path = resolve_fixture(&a.fixture);
    let params = json!({
        "fixture": path.display().to_string(), "n": a.n, "max_np": a.max_np, "n_max": a.n_max,
        "mode": format!("{:?}", a.mode).to_lowercase(), "limit": a.limit.to_string(), "global": globals(g),
    });
    let run = || {
        let fx = relsearch::load_fixture(&path).map_err(Failure::usage)?;
        let opts = SearchOptions { mode: a.mode.into(), limit: a.limit, exec: g.exec() };
        let provenance = vec![format!("{}: {}", path.display(), fx.provenance())];
        let mut t = Table::new(vec!["p", "h", "n", "result", "witness"]);
        let h = fx.class_number().to_string();
        let outcome = if let Some(n) = a.n {
            let w = relsearch::relation_solvable(&fx, n, &opts)?;
            let (status, code) = if w.is_some() { ("solvable", exit::OK) } else { ("unsolvable", exit::INCONCLUSIVE) };
            t.row(vec![
                fx.p().to_string(),
                h.clone(),
                n.to_string(),
                status.into(),
                w.as_ref().map_or("-".into(), |w| format!("{:?}", w.exponents)),
            ]);
            let results = json!({ "p": fx.p(), "class_number": h, "n": n, "solvable": w.is_some(), "witness": w.as_ref().map(to_value) });
            Outcome::new(status, code, results)
        } else {
            let out = relsearch::max_np(&fx, a.n_max, &opts)?;
            let (status, code, result) = match &out {
                NpOutcome::Exact { np, .. } => ("ok", exit::OK, format!("n_p = {np}")),
                NpOutcome::Absent { .. } => ("ok", exit::OK, "solvable at n = 1".into()),
                NpOutcome::AtLeast { n_max } => ("inconclusive", exit::INCONCLUSIVE, format!("n_p >= {n_max}")),
            };
            let witness = match &out {
                NpOutcome::Exact { witness, .. } | NpOutcome::Absent { witness } => format!("n = {}: {:?}", witness.n, witness.exponents),
                NpOutcome::AtLeast { .. } => "-".into(),
            };
            t.row(vec![fx.p().to_string(), h.clone(), "-".into(), result, witness]);
            let results = json!({ "p": fx.p(), "class_number": h, "np": out.np(), "outcome": to_value(&out) });
            Outcome::new(status, code, results)
        };
        Ok(Outcome { provenance, ..outcome.with_table(t) })
    };
    (params, run())
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// Fixture directories; defaults to the two scan sets under the
    /// fixture directory.
    #[arg(long = "dir")]
    dirs: Vec<PathBuf>,
    /// Check every qualifying prime below this bound.
    #[arg(long, value_parser = count, default_value_t = 1_049_177)]
    below: u64,
    #[arg(long, default_value_t = 8)]
    g: u64,
    /// Largest odd n checked.
    #[arg(long, default_value_t = 3)]
    n_limit: u64,
}

pub fn relsearch_batch(a: &BatchArgs, g: &Global) -> Run {
    let dirs: Vec<PathBuf> = if a.dirs.is_empty() {
        let root = fixture_root();
        vec![root.join("scan-lt3000"), root.join("scan-3000-1049177")]
    } else {
        a.dirs.iter().map(|d| resolve_fixture(d)).collect()
    };
    let params = json!({
        "dirs": dirs.iter().map(|d| d.display().to_string()).collect::<Vec<_>>(),
        "below": a.below, "g": a.g, "n_limit": a.n_limit, "global": globals(g),
    });
    let run = || {
        let filter = ScanFilter {
            g: Some(a.g),
            f_parity: FParity::Odd,
            ..ScanFilter::range(BigUint::from(3u32), BigUint::from(a.below.max(4) - 1))
        };
        let cfg = ScanConfig { factor: g.factor_config(), exec: g.exec(), ..Default::default() };
        let expected: Vec<u64> = scanner::scan(&filter, usize::MAX, &cfg)?
            .hits
            .iter()
            .map(|h| h.p.to_string().parse().expect("below a u64 bound"))
            .collect();
        let mut fixtures = Vec::new();
        for d in &dirs {
            if d.is_dir() {
                fixtures.extend(relsearch::load_fixture_dir(d).map_err(Failure::usage)?);
            } else {
                log::warn!("fixture directory {} not found", d.display());
            }
        }
        fixtures.sort_by_key(|(_, fx)| fx.p());
        fixtures.dedup_by_key(|(_, fx)| fx.p());
        let opts = SearchOptions { exec: g.exec(), ..Default::default() };
        let report = relsearch::batch_check(&fixtures, &expected, a.n_limit, &opts)?;
        let provenance = fixtures
            .iter()
            .filter(|(_, fx)| expected.binary_search(&fx.p()).is_ok())
            .map(|(p, fx)| format!("{}: {}", p.display(), fx.provenance()))
            .collect();
        let mut t = Table::new(vec!["p", "solvable_at", "witness"]);
        let mut lines = Vec::new();
        for e in &report.entries {
            t.row(vec![
                e.p.to_string(),
                e.solvable_at.map_or("-".into(), |n| n.to_string()),
                e.witness.as_ref().map_or("-".into(), |w| format!("{:?}", w.exponents)),
            ]);
            lines.push(to_value(e));
        }
        t.row(vec![
            format!("coverage {}", report.coverage),
            format!("{}/{} present", report.present, report.expected),
            format!("solvable: {:?}", report.solvable),
        ]);
        let (status, code) = if report.coverage == "complete" { ("ok", exit::OK) } else { ("partial", exit::INCONCLUSIVE) };
        Ok(Outcome { provenance, ..Outcome::new(status, code, to_value(&report)).with_table(t).with_lines(lines) })
    };
    (params, run())
}
