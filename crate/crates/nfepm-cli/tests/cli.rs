use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = "[wave]\nlambda = 0.1\n\n[array]\nd_r = 5.0\nl_s = 0.1\n\n[prior]\nh1 = 3.0\nh2 = 5.0\n";

fn nfepm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfepm")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_config(sub: &str, text: &str, extra: &[&str]) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cfg.toml", text);
    let out = dir.path().join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (nfepm(&args), dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn minimal_ecrb_config_gives_one_row() {
    let (o, dir) = run_config("ecrb", &format!("snr_db = [30.0]\n{BASE}"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/ecrb.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "snr_db,ecrb_z,ecrb_t,ecrb_ao_t");
    assert_eq!(rows.len(), 2);
    let vals: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(vals[0], 30.0);
    assert!(vals[1] > 0.0 && vals[2] >= vals[3]);
    assert!(csv.starts_with("# nfepm "));
    assert!(csv.contains("# seed = 2024"));
    assert!(csv.contains("# subcommand = ecrb"));
}

#[test]
fn prior_order_violation_exits_1() {
    let (o, _d) = run_config("ecrb", &format!("snr_db = [30.0]\n{}", BASE.replace("h2 = 5.0", "h2 = 3.0")), &[]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("invariant violation") && e.contains("H1 < H2"), "{e}");
}

#[test]
fn short_array_with_pa_solver_exits_1() {
    let text = "[wave]\nlambda = 0.1\n[array]\nd_r = 0.4\nl_s = 0.05\n[prior]\nh1 = 5.0\nh2 = 6.0\n[solve]\nsolver = \"case2-pa\"\nu = 4\nv = 4\n";
    let (o, _d) = run_config("solve", text, &[]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("validity violation") && e.contains("4.8 lambda"), "{e}");
}

#[test]
fn parse_errors_report_line() {
    let (o, _d) = run_config("ecrb", "snr_db = [30.0]\n[wave]\nlambda = \n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let (o, _d) = run_config("ecrb", &format!("snr_db = [30.0]\nunknown = 1\n{BASE}"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_2() {
    let text = format!("snr_db = [30.0]\n{BASE}\n[zzb]\nn_delta = 4\nn_theta_z = 2\nn_theta_t = 2\nn_max_search = 2\nrel_tol = 1e-15\nmax_subdivisions = 1\n");
    let (o, _d) = run_config("zzb", &text, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("numerical failure"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(nfepm(&["ecrb"]).status.code(), Some(1));
    assert_eq!(nfepm(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nfepm(&["--help"]).status.code(), Some(0));
    let (o, _d) = run_config("zzb", &format!("scenario = \"ecrb\"\nsnr_db = [30.0]\n{BASE}"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scenario"));
}

/// Stripping the comment markers off the echoed config and running it again
/// reproduces the file, apart from the timestamp.
#[test]
fn header_echo_reproduces_output() {
    let text = format!("snr_db = [0.0, 40.0]\n{BASE}\n[zzb]\nn_delta = 8\nn_theta_z = 4\nn_theta_t = 4\nn_max_search = 4\n");
    let (o, dir) = run_config("zzb", &text, &["--override", "zzb.n_delta=6", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = fs::read_to_string(dir.path().join("out/zzb.csv")).unwrap();
    assert!(first.contains("# n_delta = 6") && first.contains("# seed = 9"));

    let mut echoed = String::new();
    let mut inside = false;
    for l in first.lines() {
        if l == "# [resolved config]" {
            inside = true;
        } else if inside && l.starts_with('#') {
            echoed.push_str(l.strip_prefix("# ").unwrap_or(""));
            echoed.push('\n');
        } else if inside {
            break;
        }
    }
    let (o, dir2) = run_config("zzb", &echoed, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let second = fs::read_to_string(dir2.path().join("out/zzb.csv")).unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# generated_at_unix")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn map_mc_is_deterministic() {
    let text = format!("snr_db = [50.0]\n{BASE}\n[map]\nn_z = 32\nn_t = 16\nrefine_levels = 1\ntrials = 6\n");
    let (o1, d1) = run_config("map-mc", &text, &["--seed", "5"]);
    let (o2, d2) = run_config("map-mc", &text, &["--seed", "5"]);
    assert_eq!(o1.status.code(), Some(0), "{}", stderr(&o1));
    assert_eq!(o2.status.code(), Some(0));
    let a = fs::read_to_string(d1.path().join("out/map-mc.csv")).unwrap();
    let b = fs::read_to_string(d2.path().join("out/map-mc.csv")).unwrap();
    assert_eq!(data_rows(&a), data_rows(&b));
    assert_eq!(data_rows(&a)[0], "snr_db,mse_z,mse_t,se_z,se_t,trials,seed");
    assert!(data_rows(&a)[1].ends_with(",6,5"));
}

#[test]
fn channel_sweep_and_output_name() {
    let text = "output = \"profile.csv\"\n[wave]\nlambda = 0.01\n[channel]\nz_t = [0.01, 0.05, 0.1]\nt_z = 0.5\ny_r = 0.1\n";
    let (o, dir) = run_config("channel", text, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/profile.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "z_t,z_over_lambda,h_re,h_im,rerr_nfem,rerr_afem,rerr_nusw,rerr_usw");
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        let v: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[4] < v[5] && v[4] < v[6] && v[4] < v[7]);
    }
}

#[test]
fn table2_preset_with_coarse_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = nfepm(&["preset", "table2", "--out", out, "--override", "solve.u=20", "--override", "solve.v=20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("table2.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 10);
    assert!(rows[1].starts_with("case1,case1,1.0,0.5,0.05,0.5,0.9,,"));
    assert!(csv.contains("# overrides = [solve.u=20, solve.v=20]"));
    let mis = fs::read_to_string(dir.path().join("table2_mismatch.csv")).unwrap();
    assert_eq!(data_rows(&mis).len(), 8);
}

#[test]
fn presets_reject_physical_overrides() {
    let o = nfepm(&["preset", "fig4", "--override", "wave.lambda=0.2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not overridable"));
    assert_eq!(nfepm(&["preset", "fig42"]).status.code(), Some(1));
}

#[test]
fn fig3_preset_columns() {
    let dir = TempDir::new().unwrap();
    let o = nfepm(&["preset", "fig3", "--out", dir.path().to_str().unwrap(), "--override", "sweep.points=5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for t in ["0.1", "0.5", "0.9"] {
        let csv = fs::read_to_string(dir.path().join(format!("fig3_tzsq{t}.csv"))).unwrap();
        assert_eq!(data_rows(&csv).len(), 6);
    }
}
