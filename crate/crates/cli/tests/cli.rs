use std::path::PathBuf;
use std::process::{Command, Output};

fn prewell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prewell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prewell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn bound_reproduces_reference_well() {
    let o = prewell(&["bound"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# config {"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    let kappas: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    for (got, want) in kappas.iter().zip([1.0881921, 0.9010378, 0.5052799]) {
        assert!((got - want).abs() < 1e-6, "{got}");
    }
}

#[test]
fn unit_flag_and_set_override() {
    let o = prewell(&["bound", "--units.ev-to-inv-nm2=2.0", "--set", "profile.0.height_ev=-0.2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\"ev_to_inv_nm2\":2.0"));
    assert!(text.contains("\"height_ev\":-0.2"));
    // 0.4 nm⁻² deep, 7 nm wide: z0 = 2.21, two levels.
    assert_eq!(data_rows(&text).len(), 2);
}

#[test]
fn config_file_is_merged() {
    let cfg = scratch("transmit.json");
    std::fs::write(&cfg, r#"{"energy_ev": {"start": 0.01, "stop": 0.05, "count": 5}}"#).unwrap();
    let o = prewell(&["transmit", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    for r in rows {
        let (t, refl): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((t + refl - 1.0).abs() < 1e-12);
    }
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(prewell(&["bound", "--set", "no_such_key=1"]).status.code(), Some(2));
    assert_eq!(prewell(&["bound", "--set", "grid_n=abc"]).status.code(), Some(2));
    assert_eq!(prewell(&["transmit", "--set", "energy_ev.count=1"]).status.code(), Some(2));
    assert_eq!(prewell(&["squeeze", "--set", "nu=3"]).status.code(), Some(2));
    assert_eq!(prewell(&["bound", "--config", "/nonexistent/prewell.json"]).status.code(), Some(2));
    assert_eq!(prewell(&["figure", "fig2"]).status.code(), Some(2));
    assert_eq!(prewell(&["bound", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    let o = prewell(&["check", "oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("7 passed, 0 failed"));
    let o = prewell(&["check", "summary1"]);
    assert_eq!(o.status.code(), Some(0));
    // The reference-well level count claims do not hold at these parameters.
    let o = prewell(&["check", "summary3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL level count at a=0.5a1"));
}

#[test]
fn fig1_columns() {
    let o = prewell(&["figure", "fig1", "--set", "a_nm.count=11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1), Some("a_nm,T_eps1,T_eps0.1,T_eps0.01,T_delta_nu1"));
    assert_eq!(data_rows(&text).len(), 11);
}

#[test]
fn output_is_independent_of_thread_count() {
    let args = ["figure", "fig4", "--set", "a_nm.count=40"];
    let one = prewell(&[&args[..], &["--threads", "1"]].concat());
    let four = prewell(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert!(text.contains("\nreference,"));
    assert!(text.lines().all(|l| !l.contains('\r')));

    let args = ["figure", "fig3", "--set", "a_nm.count=12", "--set", "lb_nm.count=9"];
    let one = prewell(&[&args[..], &["--threads", "1"]].concat());
    let three = prewell(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(data_rows(&stdout(&one)).len(), 12 * 9);
}

#[test]
fn fig5_writes_one_file_per_panel() {
    let out = scratch("fig5.csv");
    let o = prewell(&["figure", "fig5", "--set", "eps.count=5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for p in ["a", "b", "c"] {
        let path = out.with_file_name(format!("fig5_{p}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().nth(1), Some("series,epsilon,level_index,kappa_inv_nm"));
        assert!(text.contains("\nlimit,"));
    }
}

#[test]
fn bilayer_on_resonance_matches_limit() {
    let o = prewell(&["bilayer", "--set", "energy_ev.count=10"]);
    assert!(o.status.success());
    for r in data_rows(&stdout(&o)) {
        let (t, lim): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert_eq!(r[3], "1");
        assert!((t - lim).abs() < 1e-3, "{t} vs {lim}");
    }
}
