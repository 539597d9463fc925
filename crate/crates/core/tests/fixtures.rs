use std::path::{Path, PathBuf};

use gbf_core::relsearch::{self, NpOutcome, SearchMode, SearchOptions, DEFAULT_NP_MAX};
use gbf_core::Exec;
use num_bigint::BigUint;

const TABLE: [(u64, u64); 10] = [
    (89, 3),
    (233, 7),
    (937, 7),
    (1289, 13),
    (1433, 17),
    (1609, 23),
    (1721, 19),
    (1913, 25),
    (2441, 31),
    (2969, 33),
];

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn recorded_h(provenance: &str) -> Option<BigUint> {
    provenance
        .split(';')
        .find_map(|part| part.trim().strip_prefix("h="))
        .and_then(|h| h.parse().ok())
}

#[test]
fn table_fixtures_reproduce_np() {
    for (p, np) in TABLE {
        let fx = relsearch::load_fixture(&fixture_dir().join(format!("p{p}.fx"))).unwrap();
        assert_eq!(fx.p(), p);
        assert_eq!(fx.g(), 8);
        assert_eq!(recorded_h(fx.provenance()), Some(fx.class_number()), "p={p}");
        let out = relsearch::max_np(&fx, DEFAULT_NP_MAX, &SearchOptions::default()).unwrap();
        assert_eq!(out.np(), Some(np), "p={p}");
        if let NpOutcome::Exact { witness, .. } = out {
            assert!(witness.verify(&fx));
            assert_eq!(witness.n, np + 2);
        }
    }
}

#[test]
fn search_modes_agree_on_table_fixtures() {
    for (p, np) in TABLE {
        let fx = relsearch::load_fixture(&fixture_dir().join(format!("p{p}.fx"))).unwrap();
        let halved = SearchOptions { mode: SearchMode::Halved, exec: Exec::Sequential, ..Default::default() };
        let out = relsearch::max_np(&fx, DEFAULT_NP_MAX, &halved).unwrap();
        assert_eq!(out.np(), Some(np), "p={p}");
    }
}

#[test]
fn small_scan_set_matches_table() {
    // every qualifying p < 3000 has a fixture; 73 is solvable at n = 3
    let dir = fixture_dir().join("scan-lt3000");
    let fixtures = relsearch::load_fixture_dir(&dir).unwrap();
    let ps: Vec<u64> = fixtures.iter().map(|(_, fx)| fx.p()).collect();
    let mut want: Vec<u64> = TABLE.iter().map(|t| t.0).collect();
    want.insert(0, 73);
    assert_eq!(ps, want);
    let fx73 = &fixtures[0].1;
    let out = relsearch::max_np(fx73, DEFAULT_NP_MAX, &SearchOptions::default()).unwrap();
    assert_eq!(out.np(), Some(1));
    for (path, fx) in &fixtures {
        assert_eq!(recorded_h(fx.provenance()), Some(fx.class_number()), "{}", path.display());
    }
}

#[test]
fn closing_batch_over_present_fixtures() {
    use gbf_core::scanner::{self, FParity, ScanConfig, ScanFilter};

    let filter = ScanFilter {
        g: Some(8),
        f_parity: FParity::Odd,
        ..ScanFilter::range(BigUint::from(3u32), BigUint::from(1_049_176u32))
    };
    let expected: Vec<u64> = scanner::scan(&filter, usize::MAX, &ScanConfig::default())
        .unwrap()
        .hits
        .iter()
        .map(|h| h.p.to_string().parse().unwrap())
        .collect();
    assert_eq!(expected.len(), 1929);

    let mut fixtures = relsearch::load_fixture_dir(&fixture_dir().join("scan-lt3000")).unwrap();
    let big = fixture_dir().join("scan-3000-1049177");
    if big.is_dir() {
        fixtures.extend(relsearch::load_fixture_dir(&big).unwrap());
    }
    for (path, fx) in &fixtures {
        assert_eq!(recorded_h(fx.provenance()), Some(fx.class_number()), "{}", path.display());
    }
    let report = relsearch::batch_check(&fixtures, &expected, 3, &SearchOptions::default()).unwrap();
    assert!(report.unexpected.is_empty(), "{:?}", report.unexpected);
    assert_eq!(report.solvable, vec![73]);
    assert_eq!(report.present + report.missing.len(), expected.len());
    assert_eq!(report.coverage == "complete", report.missing.is_empty());
    for e in &report.entries {
        if let Some(w) = &e.witness {
            let fx = &fixtures.iter().find(|(_, fx)| fx.p() == e.p).unwrap().1;
            assert!(w.verify(fx));
        }
    }
}
