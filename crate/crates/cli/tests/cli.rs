use std::path::Path;
use std::process::{Command, Output};

fn xbf(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_xbf"))
        .current_dir(dir)
        .args(args)
        .env("XBF_LOG", "error")
        .output()
        .unwrap();
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = xbf(dir, args);
    assert!(out.status.success(), "xbf {args:?} failed");
    String::from_utf8(out.stdout).unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn csv_rows(p: impl AsRef<Path>) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(p)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn gen_ba_500_is_deterministic_with_1992_links() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--ba", "500", "2", "--seed", "1", "--out", "a"]);
    ok(d, &["gen", "--ba", "500", "2", "--seed", "1", "--out", "b"]);
    let a = read(d.join("a/ba-500-2.tsv"));
    assert_eq!(a.lines().count(), 1992);
    assert_eq!(a, read(d.join("b/ba-500-2.tsv")));
    assert_eq!(
        read(d.join("a/gen.provenance.json")),
        read(d.join("b/gen.provenance.json"))
    );
    let prov: serde_json::Value =
        serde_json::from_str(&read(d.join("a/gen.provenance.json"))).unwrap();
    assert_eq!(prov["seed"], 1);
    assert_eq!(prov["descriptor"]["topology"]["n"], 500);
}

#[test]
fn gen_complete_er() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "--er", "10", "1.0", "--out", "."]);
    assert_eq!(read(dir.path().join("er-10-1.tsv")).lines().count(), 90);
}

#[test]
fn small_input_gives_one_partition_and_no_poppers() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["partition", "--er", "8", "1.0", "--out", "p"]);
    let q: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("p/quality.json"))).unwrap();
    assert_eq!(q["partition_count"], 1);
    assert_eq!(q["popper_count"], 0);
    assert_eq!(q["totalv"], 0.0);
    let export: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("p/partitioning.json"))).unwrap();
    assert_eq!(export["assignment"].as_array().unwrap().len(), 56);
}

#[test]
fn jigsaw_beats_powergraph_on_the_same_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--ba", "300", "2", "--seed", "3", "--out", "."]);
    let common = ["--topology", "ba-300-2.tsv", "--max-partition-size", "64"];
    let mut a = vec!["partition", "--out", "j"];
    a.extend(common);
    ok(d, &a);
    let mut b = vec!["partition", "--partitioner", "powergraph", "--out", "g"];
    b.extend(common);
    ok(d, &b);
    let q = |p: &str| -> serde_json::Value { serde_json::from_str(&read(d.join(p))).unwrap() };
    let (j, g) = (q("j/quality.json"), q("g/quality.json"));
    assert!(j["totalv"].as_f64().unwrap() <= g["totalv"].as_f64().unwrap());
}

#[test]
fn single_trial_simulation() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate", "--er", "6", "1.0", "--sinks", "1", "--trials", "1", "--out", "s",
        ],
    );
    let rows = csv_rows(dir.path().join("s/trials.csv"));
    assert_eq!(rows.len(), 1);
    let head = csv::Reader::from_path(dir.path().join("s/trials.csv"))
        .unwrap()
        .headers()
        .unwrap()
        .clone();
    assert_eq!(
        head.iter().collect::<Vec<_>>().join(","),
        "topology,scheme,sinks,trial,hdr_bits,hdr_bits_compressed,partitions,poppers_on_tree,pops,false_firings,loop"
    );
    assert_eq!(&rows[0][9], "0");
    assert_eq!(&rows[0][10], "false");
    let summary: serde_json::Value =
        serde_json::from_str(&read(dir.path().join("s/summary.json"))).unwrap();
    assert!(summary["per_sinks"][0]["hdr_bits"]["p95"].is_number());
}

#[test]
fn saturated_classical_filters_misfire() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate",
            "--ba",
            "200",
            "2",
            "--scheme",
            "classical",
            "--classical-m",
            "64",
            "--sinks",
            "40",
            "--trials",
            "20",
            "--out",
            "c",
        ],
    );
    let rows = csv_rows(dir.path().join("c/trials.csv"));
    assert!(rows.iter().any(|r| r[9].parse::<usize>().unwrap() > 0));
}

#[test]
fn lps_on_two_nodes_is_tiny_and_rows_are_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("pair.tsv"), "a\tb\t1\nb\ta\t1\n").unwrap();
    ok(
        d,
        &[
            "lps",
            "--topology",
            "pair.tsv",
            "--sinks",
            "1",
            "--p",
            "0.5",
            "--trials",
            "200",
            "--out",
            "l",
        ],
    );
    let rows = csv_rows(d.join("l/lps.csv"));
    assert!(rows[0][1].parse::<usize>().unwrap() <= 8);

    ok(
        d,
        &[
            "lps", "--ba", "120", "2", "--sinks", "1,5,10", "--p", "0.9,0.99", "--trials", "200",
            "--out", "m",
        ],
    );
    let rows = csv_rows(d.join("m/lps.csv"));
    assert_eq!(rows.len(), 2);
    let mut prev_row: Option<Vec<usize>> = None;
    for r in &rows {
        let v: Vec<usize> = r.iter().skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1]), "{v:?}");
        if let Some(p) = &prev_row {
            assert!(p.iter().zip(&v).all(|(a, b)| a <= b));
        }
        prev_row = Some(v);
    }
}

#[test]
fn explicit_header_roundtrips_through_decode() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "headers",
            "--ba",
            "120",
            "2",
            "--max-partition-size",
            "32",
            "--source",
            "0",
            "--to",
            "50,77,119",
            "--out",
            "h",
        ],
    );
    let rows = csv_rows(d.join("h/headers.csv"));
    assert_eq!(rows.len(), 1);
    let raw_bits: usize = rows[0][6].parse().unwrap();
    let parts: usize = rows[0][5].parse().unwrap();
    let decoded = ok(d, &["headers", "--decode", &rows[0][10]]);
    let v: serde_json::Value = serde_json::from_str(&decoded).unwrap();
    assert_eq!(v["format"], "raw");
    assert_eq!(v["zbf"].as_array().unwrap().len(), parts);
    assert_eq!(
        raw_bits,
        32 + v["partition_count"].as_u64().unwrap() as usize + parts * 32
    );
    let again: serde_json::Value =
        serde_json::from_str(&ok(d, &["headers", "--decode", &rows[0][11]])).unwrap();
    assert_eq!(again["format"], "compressed");
    assert_eq!(again["zbf"], v["zbf"]);
    assert_eq!(again["ibf"], v["ibf"]);
}

#[test]
fn descriptor_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        r#"
seed = 5
sinks = [2]
trials = 3
out = "from-file"

[topology]
kind = "ba"
n = 80
m = 2

[partition]
max_partition_size = 40

[traffic]
kind = "high_demand"
fraction = 0.1
multiplier = 10.0
"#,
    )
    .unwrap();
    ok(d, &["simulate", "-c", "run.toml", "--trials", "4"]);
    let rows = csv_rows(d.join("from-file/trials.csv"));
    assert_eq!(rows.len(), 4);
    let prov: serde_json::Value =
        serde_json::from_str(&read(d.join("from-file/simulate.provenance.json"))).unwrap();
    assert_eq!(prov["descriptor"]["trials"], 4);
    assert_eq!(prov["descriptor"]["traffic"]["kind"], "high_demand");
    assert_eq!(prov["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn compare_writes_all_variants() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "compare",
            "--ba",
            "150",
            "2",
            "--max-partition-size",
            "64",
            "--sinks",
            "5",
            "--trials",
            "30",
            "--out",
            "c",
        ],
    );
    let rows = csv_rows(dir.path().join("c/compare.csv"));
    let variants: Vec<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    assert_eq!(
        variants,
        ["jigsaw", "jigsaw-blind", "powergraph", "classical"]
    );
    // XBF variants never misfire
    for r in &rows[..3] {
        assert_eq!(r[9].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn failures_exit_nonzero_and_leave_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = xbf(
        d,
        &[
            "simulate", "--er", "5", "1.0", "--sinks", "9", "--trials", "2", "--out", "bad",
        ],
    );
    assert!(!out.status.success());
    assert!(!d.join("bad").exists());
    let out = xbf(d, &["gen", "--topology", "missing.tsv", "--out", "bad"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.tsv"));
    let out = xbf(
        d,
        &[
            "partition",
            "--ba",
            "50",
            "2",
            "--imbalance",
            "0.5",
            "--out",
            "bad",
        ],
    );
    assert!(!out.status.success());
    assert!(!d.join("bad").exists());
    let out = xbf(d, &["headers", "--decode", "5b01zz"]);
    assert!(!out.status.success());
}

#[test]
fn symmetrize_adds_reverse_links() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("path.tsv"), "# one-way chain\na\tb\t2\nb\tc\t3\n").unwrap();
    ok(
        d,
        &[
            "gen",
            "--topology",
            "path.tsv",
            "--symmetrize",
            "--out",
            "o",
        ],
    );
    let text = read(d.join("o/path.tsv"));
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("b\ta\t2"));
    assert!(text.contains("c\tb\t3"));
}
