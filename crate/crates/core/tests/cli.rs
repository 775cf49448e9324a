use std::path::Path;
use std::process::{Command, Output};

use dehnlab::filling::fill_loop_word;
use dehnlab::runner::{ResultRecord, CSV_COLUMNS};
use dehnlab::GroupSpec;

fn dehnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dehnlab"))
        .args(args)
        .env_remove("DEHNLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn enumerate_reports_five_loops() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("out.json");
    let csv = dir.path().join("out.csv");
    let cfg = write(
        dir.path(),
        "cfg.toml",
        &format!(
            "group = \"z2\"\nkind = \"enumerate\"\nn = 2\n[output]\njson = {:?}\ncsv = {:?}\n",
            json, csv
        ),
    );
    let out = dehnlab(&["run", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record: ResultRecord =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(record.extra["lengths"][0]["loops"], 5);
    assert_eq!(record.config_hash.len(), 64);
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert!(csv.lines().any(|l| l.contains(",loops,2,5.0,")), "{csv}");
}

#[test]
fn unknown_group_is_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.toml", "kind = \"enumerate\"\nn = 2\ngroup = \"z9\"\n");
    let out = dehnlab(&["run", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`group`") && err.contains("line 3"), "{err}");
}

#[test]
fn flag_overrides_change_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.toml",
        "group = \"z2\"\nkind = \"avg-area\"\nn_list = [8, 16]\nsamples = 20\nareas = [\"winding\"]\n",
    );
    let run = |extra: &[&str]| {
        let mut args = vec!["run", "-c", cfg.as_str(), "--print"];
        args.extend_from_slice(extra);
        let out = dehnlab(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice::<ResultRecord>(&out.stdout).unwrap()
    };
    let a = run(&[]);
    let b = run(&["--workers", "1"]);
    let c = run(&["--seed", "9"]);
    assert_eq!(a.config_hash, b.config_hash);
    assert_eq!(a.series, b.series);
    assert_ne!(a.config_hash, c.config_hash);
    assert_eq!(c.seed, 9);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = GroupSpec::parse("z2").unwrap();
    let cert = fill_loop_word(&spec, &"abAB".parse().unwrap()).unwrap();
    let tsv = cert.to_tsv();
    let good = write(dir.path(), "good.tsv", &tsv);
    let out = dehnlab(&["verify", "-g", "z2", "-w", "abAB", &good]);
    assert_eq!(out.status.code(), Some(0));

    let tampered =
        if tsv.contains("+1") { tsv.replacen("+1", "-1", 1) } else { tsv.replacen("-1", "+1", 1) };
    let bad = write(dir.path(), "bad.tsv", &tampered);
    assert_eq!(dehnlab(&["verify", "-g", "z2", "-w", "abAB", &bad]).status.code(), Some(1));

    let first = tsv.lines().next().unwrap();
    let cut = &first[..first.rfind('\t').unwrap()];
    let truncated = write(dir.path(), "cut.tsv", cut);
    assert_eq!(dehnlab(&["verify", "-g", "z2", "-w", "abAB", &truncated]).status.code(), Some(2));

    assert_eq!(dehnlab(&["verify", "-g", "z9", "-w", "abAB", &good]).status.code(), Some(2));
}

#[test]
fn smoke_suite_passes() {
    let out = dehnlab(&["suite", "--level", "smoke", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l["passed"] == true));
}

#[test]
fn central_moments_slope_on_heisenberg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.toml",
        "group = \"heis3\"\nkind = \"central-moments\"\nn_list = [32, 64, 128, 256]\nsamples = 400\nseed = 11\n",
    );
    let out = dehnlab(&["run", "-c", &cfg, "--print"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record: ResultRecord = serde_json::from_slice(&out.stdout).unwrap();
    let fit = record.series[0].fit.as_ref().unwrap();
    assert!((fit.slope - 1.5).abs() < 0.25, "slope {}", fit.slope);
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            dehnlab::runner::ExperimentConfig::from_file(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
