use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn gbf(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_gbf"))
        .args(args)
        .current_dir(root())
        .env_remove("GBF_FIXTURE_DIR")
        .output()
        .unwrap();
    Run { code: out.status.code().unwrap(), stdout: String::from_utf8(out.stdout).unwrap() }
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("docs/report.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(v: &Value) {
    let schema = validator();
    let errors: Vec<String> = schema.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v:#}");
}

#[test]
fn certify_exit_codes() {
    let r = gbf(&["certify", "--n", "3", "--p", "1049177"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["status"], "certified");
    assert_eq!(v["results"]["certificate"]["bound"], "1048576");
    assert_eq!(v["results"]["known_results"]["new_case"], true);

    let r = gbf(&["certify", "--n", "3", "--p", "89"]);
    assert_eq!(r.code, 10);
    assert_valid(&r.json());

    let r = gbf(&["certify", "--n", "4", "--p", "89"]);
    assert_eq!(r.code, 2);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["status"], "input_error");
}

#[test]
fn scan_and_wieferich() {
    let r = gbf(&["scan", "--g", "8", "--f-parity", "odd", "--mod8", "1", "--certify-n", "3", "--from", "1048576", "--count", "5"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    let ps: Vec<&str> = v["results"]["hits"].as_array().unwrap().iter().map(|h| h["p"].as_str().unwrap()).collect();
    assert_eq!(ps, ["1049177", "1050169", "1050233", "1050473", "1051961"]);

    let r = gbf(&["wieferich", "--q", "2", "--limit", "10000"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["results"]["primes"], serde_json::json!(["1093", "3511"]));

    let r = gbf(&["scan", "--g", "8", "--from", "1048576", "--count", "5", "--budget", "10"]);
    assert_eq!(r.code, 20);
    assert_valid(&r.json());
}

#[test]
fn jsonl_rows() {
    let r = gbf(&["--jsonl", "scan", "--g", "8", "--f-parity", "odd", "--mod8", "1", "--certify-n", "3", "--from", "1048576", "--count", "3"]);
    assert_eq!(r.code, 0);
    let rows: Vec<Value> = r.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["p"], "1050233");
}

#[test]
fn density_row() {
    let r = gbf(&["density", "--q", "2", "--g", "8", "--x", "10000", "--no-bound"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    let row = &v["results"]["rows"][0];
    assert_eq!(row["pi_x"], 1229);
    // independent count: primes below 10^4 where 2 has order exactly (p - 1)/8
    let naive = (3u64..=10_000)
        .filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .filter(|&p| (p - 1) % 8 == 0)
        .filter(|&p| {
            let mut x = 1u64;
            let mut k = 0;
            loop {
                x = x * 2 % p;
                k += 1;
                if x == 1 {
                    break k == (p - 1) / 8;
                }
            }
        })
        .count();
    assert_eq!(row["m"], naive as u64);
}

#[test]
fn cyclo_verify_codes() {
    for args in [["--p", "7", "--subgroup", "1,2,4"], ["--p", "5", "--subgroup", "1"]] {
        let mut full = vec!["cyclo-verify"];
        full.extend(args);
        let r = gbf(&full);
        assert_eq!(r.code, 0, "{}", r.stdout);
        assert_valid(&r.json());
    }
    let r = gbf(&["cyclo-verify", "--p", "7", "--subgroup", "1,6"]);
    assert_eq!(r.code, 2);
    assert_valid(&r.json());

    let r = gbf(&["cyclo-verify", "--p", "13", "--all", "--samples", "20"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    // complex subfields correspond to the odd-order subgroups: orders 1 and 3
    assert_eq!(v["results"]["reports"].as_array().unwrap().len(), 2);
    assert!(v["results"]["half_representation"].as_array().unwrap().iter().all(|h| h["passed"] == 20));
}

#[test]
fn gbf_search_codes() {
    let r = gbf(&["gbf-search", "--n", "1", "--t", "6"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["results"]["count"], "0");
    let r = gbf(&["gbf-search", "--n", "2", "--t", "2"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["results"]["count"], "8");
    assert_eq!(v["results"]["tables"].as_array().unwrap().len(), 8);
    let r = gbf(&["gbf-search", "--n", "2", "--t", "6"]);
    assert_eq!(r.code, 20);
}

#[test]
fn relsearch_fixtures() {
    let r = gbf(&["relsearch", "--fixture", "fixtures/p89.fx", "--max-np"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["results"]["np"], 3);
    assert!(v["provenance"][0].as_str().unwrap().contains("h=113"));

    let r = gbf(&["relsearch", "--fixture", "fixtures/p2441.fx", "--max-np", "--mode", "halved"]);
    assert_eq!(r.json()["results"]["np"], 31);

    let r = gbf(&["relsearch", "--fixture", "fixtures/p89.fx", "--n", "1"]);
    assert_eq!(r.code, 10);
    assert_eq!(r.json()["status"], "unsolvable");

    let r = gbf(&["relsearch", "--fixture", "fixtures/missing.fx", "--n", "1"]);
    assert_eq!(r.code, 2);
    assert_valid(&r.json());
}

#[test]
fn relsearch_trivial_fixture() {
    let dir = std::env::temp_dir().join(format!("gbf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trivial.fx");
    std::fs::write(
        &path,
        "gbf-fixture v1\np=7\ng=2\ninvariants=7\nvector 1 = 1\nvector 2 = 6\npairing = 2,1\nprovenance = hand-made\n",
    )
    .unwrap();
    let r = gbf(&["relsearch", "--fixture", path.to_str().unwrap(), "--n", "7"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["results"]["witness"]["exponents"], serde_json::json!([0]));

    // relative paths resolve against GBF_FIXTURE_DIR first
    let out = Command::new(env!("CARGO_BIN_EXE_gbf"))
        .args(["relsearch", "--fixture", "trivial.fx", "--n", "7"])
        .current_dir(root())
        .env("GBF_FIXTURE_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn batch_over_small_set() {
    let r = gbf(&["relsearch-batch", "--dir", "fixtures/scan-lt3000", "--below", "3000"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["results"]["coverage"], "complete");
    assert_eq!(v["results"]["solvable"], serde_json::json!([73]));

    let r = gbf(&["relsearch-batch", "--dir", "fixtures/scan-lt3000", "--below", "5000"]);
    assert_eq!(r.code, 10);
    assert_eq!(r.json()["results"]["coverage"], "partial");
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["gbf-search", "--n", "1", "--t", "4"];
    let one = gbf(&[&["--threads", "1"][..], &args[..]].concat()).json();
    let four = gbf(&[&["--threads", "4"][..], &args[..]].concat()).json();
    assert_eq!(one["results"], four["results"]);
    assert_eq!(gbf(&["--threads", "0", "certify", "--n", "3", "--p", "89"]).code, 2);
}

#[test]
fn table_output() {
    let r = gbf(&["--table", "certify", "--n", "3", "--p", "1049177"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("bound"));
    assert!(r.stdout.contains("status: certified (exit 0)"));
}
