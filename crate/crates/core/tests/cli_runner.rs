use std::path::PathBuf;
use std::process::Command;

use hypersturm::config::RunConfig;
use hypersturm::report::{compare, reference_ids, reference_table, Report};
use hypersturm::runner::{plotdata, run};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn table3() -> RunConfig {
    RunConfig::load(&configs().join("table3.toml")).unwrap()
}

#[test]
fn every_config_parses_and_names_a_bundled_table() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let id = cfg.reference.as_deref().expect("every shipped config has a reference");
        assert!(!reference_table(id).unwrap().is_empty());
        // resolved TOML reloads to the same configuration
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        n += 1;
    }
    assert!(n >= 17);
    for t in 1..=7 {
        assert!(reference_ids().contains(&format!("table{t}")));
    }
}

#[test]
fn config_errors() {
    let base = std::fs::read_to_string(configs().join("table3.toml")).unwrap();
    let bad = base.replace("pairs = [[0, 0], [1, 1], [2, 2], [3, 3], [4, 4], [5, 5], [6, 6], [7, 7], [8, 8]]", "pairs = []");
    assert!(RunConfig::from_toml(&bad).is_err());
    let bad = base.replace("reference = \"table3\"", "reference = \"table9\"");
    assert!(RunConfig::from_toml(&bad).is_err());
    let bad = base.replace("mode = \"bound\"", "mode = \"resonance\"");
    assert!(RunConfig::from_toml(&bad).is_err(), "resonance mode without a [resonance] section");
    let bad = base.replace("count = 5\ninclude_v0", "count = 5\nunknown_key = 1\ninclude_v0");
    assert!(RunConfig::from_toml(&bad).is_err());
    assert!(RunConfig::from_toml("not toml at all [").is_err());
    assert!(reference_table("table4-X").is_err());
}

#[test]
fn report_tsv_round_trip() {
    let mut r = Report::new("t", "a = 1\nb = \"x\"\n".into(), &["energy", "dim"]);
    r.push("(0,0)/1s2", vec![-2.879025923, 25.0]);
    r.push("(1,1)/1s2", vec![-2.9005099765, 50.0]);
    let text = r.to_tsv();
    let back = Report::from_tsv(&text).unwrap();
    assert_eq!(back.columns, r.columns);
    assert_eq!(back.config, r.config);
    assert_eq!(back.rows.len(), 2);
    assert_eq!(back.to_tsv(), text);
    assert_eq!(back.value("(1,1)/1s2", "energy"), Some(-2.9005099765));
    assert!(Report::from_tsv("key\ta\nrow\t1\t2\n").is_err());
    assert!(Report::from_tsv("# nothing\n").is_err());
}

#[test]
fn reruns_are_byte_identical_and_match_table3() {
    let cfg = table3();
    let a = run(&cfg).unwrap();
    let b = run(&cfg).unwrap();
    assert_eq!(a.to_tsv(), b.to_tsv());
    let cmp = compare(&a, "table3").unwrap();
    assert_eq!(cmp.len(), 9);
    assert!(cmp.iter().all(|c| c.pass), "{:?}", cmp.iter().filter(|c| !c.pass).collect::<Vec<_>>());
}

#[test]
fn perturbed_basis_is_flagged() {
    let mut cfg = table3();
    cfg.radial[0].kappa = 1.6;
    let rep = run(&cfg).unwrap();
    let cmp = compare(&rep, "table3").unwrap();
    assert!(cmp.iter().any(|c| !c.pass));
}

#[test]
fn plotdata_sections() {
    let cfg = RunConfig::load(&configs().join("table4-S.toml")).unwrap();
    let out = plotdata(&cfg, 50).unwrap();
    let sections: Vec<&str> = out.split("\n\n").collect();
    assert_eq!(sections.len(), 3);
    assert!(sections[0].starts_with("## reduced_charge\nalpha\tcalZ=0.7\tcalZ=0.5"));
    // C̃ = −w ≤ 0 everywhere, and the 𝒵 = 0.5 curve touches zero at π/4
    let rows: Vec<Vec<f64>> = sections[0]
        .lines()
        .skip(2)
        .map(|l| l.split('\t').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[1] <= 1e-12 && r[2] <= 1e-12));
    let mid = &rows[24];
    assert!(mid[2].abs() < 0.05 && mid[1] < -0.1);
    assert!(sections[1].starts_with("## functions (0,0)"));
    let eig: Vec<f64> =
        sections[2].lines().skip(2).filter_map(|l| l.split('\t').nth(2)).filter(|v| !v.is_empty()).map(|v| v.parse().unwrap()).collect();
    assert_eq!(eig.len(), 44);
    assert!(eig.windows(2).all(|w| w[0] < w[1]));
    assert!(plotdata(&cfg, 1).is_err());
}

#[test]
fn cli_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_hypersturm");
    let dir = std::env::temp_dir().join(format!("hypersturm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("t3.tsv");
    let st = Command::new(exe)
        .args(["run", configs().join("table3.toml").to_str().unwrap(), "-o", out.to_str().unwrap(), "--compare"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(String::from_utf8_lossy(&st.stdout).contains("PASS"));

    let st = Command::new(exe).args(["compare", out.to_str().unwrap(), "table3"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    // the He report against the H⁻ table fails row by row
    let st = Command::new(exe).args(["compare", out.to_str().unwrap(), "table2-5x5"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    let st = Command::new(exe).args(["compare", out.to_str().unwrap(), "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(exe).args(["run", dir.join("missing.toml").to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).starts_with("error:"));
    let st = Command::new(exe).args(["plotdata", configs().join("table3.toml").to_str().unwrap(), "--grid", "10"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).ok();
}
