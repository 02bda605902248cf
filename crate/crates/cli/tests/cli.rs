use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shipcast::commands::evaluate::read_records;
use shipcast_core::corpus::CorpusManifest;
use shipcast_core::eval::EvalReport;

fn shipcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shipcast"))
        .args(args)
        .env_clear()
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(out: &Path, seed: u64, days: usize) {
    let o = shipcast(&[
        "--out", s(out), "--seed", &seed.to_string(),
        "synth", "--days", &days.to_string(), "--resolution", "1.0", "--bulletins",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    synth(&t.path().join("syn"), 5, 1);
    let grids = t.path().join("syn/2024-01-01");
    for out in ["a", "b"] {
        let o = shipcast(&["--out", s(&t.path().join(out)), "generate", "--grids", s(&grids), "--summary"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["forecast.txt", "bulletins.jsonl", "data_summary.txt"] {
        let a = fs::read(t.path().join("a").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, fs::read(t.path().join("b").join(f)).unwrap(), "{f}");
    }
    let forecast = fs::read_to_string(t.path().join("a/forecast.txt")).unwrap();
    assert!(forecast.starts_with("General synopsis."));
    assert_eq!(forecast, fs::read_to_string(grids.join("forecast.txt")).unwrap());
}

#[test]
fn missing_bundle_is_an_input_error_naming_the_attribute() {
    let t = tempfile::tempdir().unwrap();
    synth(&t.path().join("syn"), 1, 1);
    let grids = t.path().join("syn/2024-01-01");
    fs::remove_dir_all(grids.join("wave_height")).unwrap();
    let o = shipcast(&["--out", s(&t.path().join("out")), "generate", "--grids", s(&grids)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("wave_height"));
    assert!(!t.path().join("out/forecast.txt").exists());
}

#[test]
fn validate_exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = t.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let good = write("good.txt", "Dover. Westerly 4 to 5, northwesterly 6 later. Slight or moderate. Rain later. Good, occasionally poor.\n");
    let o = shipcast(&["validate", s(&good)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let long = write("long.txt", "Dover. Westerly 4. Slight. Rain then squally showers with hail. Good.\n");
    let o = shipcast(&["validate", s(&long)]);
    assert_eq!(code(&o), 1);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("long.txt:1: WeatherTooLong"), "{stdout}");

    let junk = write("junk.txt", "this is not a bulletin at all\n");
    assert_eq!(code(&shipcast(&["validate", s(&junk)])), 2);
    assert_eq!(code(&shipcast(&["validate", s(&t.path().join("absent.txt"))])), 2);
}

#[test]
fn generated_forecasts_validate_clean() {
    let t = tempfile::tempdir().unwrap();
    synth(&t.path().join("syn"), 8, 2);
    for day in ["2024-01-01", "2024-01-02"] {
        let f = t.path().join("syn").join(day).join("forecast.txt");
        let o = shipcast(&["validate", s(&f)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn corpus_split_is_seeded_and_complete() {
    let t = tempfile::tempdir().unwrap();
    let syn = t.path().join("syn");
    synth(&syn, 2, 20);
    let build = |out: &str, seed: &str| {
        let out = t.path().join(out);
        let o = shipcast(&[
            "--out", s(&out), "--seed", seed,
            "corpus", "--input", s(&syn), "--area", "Dover", "--size", "50x30",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (CorpusManifest::load(&out).unwrap(), out)
    };
    let (a, root) = build("a", "42");
    assert_eq!((a.counts.train, a.counts.validation, a.counts.test), (14, 3, 3));
    assert!(a.missing_files(&root).is_empty());
    assert!(a.orphans.is_empty());
    let (b, _) = build("b", "42");
    assert_eq!(a, b);
    let (c, _) = build("c", "43");
    let ids = |m: &CorpusManifest| m.entries.iter().map(|e| e.entry.id.clone()).collect::<Vec<_>>();
    assert_ne!(ids(&a), ids(&c));
    let mut sa = ids(&a);
    let mut sc = ids(&c);
    sa.sort();
    sc.sort();
    assert_eq!(sa, sc);
    let frames = fs::read_dir(root.join("frames/2024-01-01/dover/wind")).unwrap().count();
    assert_eq!(frames, 49);
}

#[test]
fn corpus_input_errors() {
    let t = tempfile::tempdir().unwrap();
    let empty = t.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = t.path().join("out");
    assert_eq!(code(&shipcast(&["--out", s(&out), "--seed", "1", "corpus", "--input", s(&empty)])), 2);
    synth(&t.path().join("syn"), 1, 1);
    let syn = t.path().join("syn");
    assert_eq!(code(&shipcast(&["--out", s(&out), "corpus", "--input", s(&syn)])), 2);
    let o = shipcast(&["--out", s(&out), "--seed", "1", "corpus", "--input", s(&syn), "--size", "100x50"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn corpus_orphans_unpairable_days() {
    let t = tempfile::tempdir().unwrap();
    let syn = t.path().join("syn");
    synth(&syn, 4, 2);
    fs::remove_dir_all(syn.join("2024-01-02/visibility")).unwrap();
    let out = t.path().join("out");
    let o = shipcast(&["--out", s(&out), "--seed", "1", "corpus", "--input", s(&syn), "--area", "Dover", "--size", "50x30"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = CorpusManifest::load(&out).unwrap();
    assert_eq!(m.counts.total(), 1);
    assert_eq!(m.orphans.len(), 1);
    assert_eq!(m.orphans[0].id, "2024-01-02/dover");
}

#[test]
fn evaluate_local_against_itself_and_a_second_system() {
    let t = tempfile::tempdir().unwrap();
    let syn = t.path().join("syn");
    synth(&syn, 6, 2);
    let out = t.path().join("ev");
    let o = shipcast(&["--out", s(&out), "evaluate", "--input", s(&syn)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.excluded_count > 0);
    assert!(report.scored_count > 0);
    for row in &report.rows {
        assert_eq!((row.precision, row.recall, row.f1), (1.0, 1.0, 1.0), "{row:?}");
    }

    // A second system with every wind sentence blanked.
    let local = out.join("generated/local.jsonl");
    let mut records = read_records(&local).unwrap();
    for r in records.iter_mut().filter(|r| r.key.attribute == shipcast_core::bulletin::Attribute::Wind) {
        r.text.clear();
    }
    let blank = t.path().join("blank.jsonl");
    fs::write(&blank, shipcast::commands::evaluate::records_jsonl(&records)).unwrap();
    let out2 = t.path().join("ev2");
    let spec = format!("blank={}", s(&blank));
    let o = shipcast(&["--out", s(&out2), "evaluate", "--input", s(&syn), "--system", &spec]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out2.join("report.txt")).unwrap();
    assert!(table.contains("local") && table.contains("blank"), "{table}");
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(out2.join("report.json")).unwrap()).unwrap();
    let wind = report.row(shipcast_core::bulletin::Attribute::Wind, "blank").unwrap();
    assert_eq!(wind.recall, 0.0);
    assert!(report.aggregate_for("blank").unwrap().average_f1 < 0.8);

    // Dropping a record breaks alignment.
    records.pop();
    fs::write(&blank, shipcast::commands::evaluate::records_jsonl(&records)).unwrap();
    let o = shipcast(&["--out", s(&out2), "--backend", "none", "evaluate", "--input", s(&syn), "--system", &spec]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unreachable_remote_backend_scores_empty() {
    let t = tempfile::tempdir().unwrap();
    let syn = t.path().join("syn");
    synth(&syn, 6, 1);
    let out = t.path().join("ev");
    let o = Command::new(env!("CARGO_BIN_EXE_shipcast"))
        .args(["--out", s(&out), "--backend", "remote", "evaluate", "--input", s(&syn), "--parallelism", "4"])
        .env_clear()
        .env("FF_ENDPOINT_URL", "http://127.0.0.1:9/generate")
        .env("FF_MAX_RETRIES", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.aggregate_for("remote").unwrap().f1, 0.0);
}
