//! End-to-end checks of the command-line surface: file formats, config
//! loading, comparisons, and batch mode.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splitdyn"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("splitdyn-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn simulate_csv_schema() {
    let dir = scratch("schema");
    let csv_path = dir.join("run.csv");
    let st = bin()
        .args(["simulate", "--preset", "rotation", "--xi", "0.8", "--out"])
        .arg(&csv_path)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(st.success());
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x0,x1,xdot0,xdot1,norm_xdot,norm_T,norm_residual,energy,objective"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 10);
    // rotation problem carries no objective; the column is empty
    assert_eq!(first[9], "");
    assert!((first[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-15);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(csv_path.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(report["anchor"]["kind"], "known_zero");
    assert!(report["rate_fits"]["speed"]["slope"].as_f64().unwrap() < -1.0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn iterate_csv_schema_and_zero_run() {
    let dir = scratch("iter");
    let csv_path = dir.join("it.csv");
    let st = bin()
        .args([
            "iterate",
            "--preset",
            "rotation",
            "--set",
            "x0=0,0",
            "--set",
            "x1=0,0",
            "--set",
            "n_iters=25",
            "--out",
        ])
        .arg(&csv_path)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(st.success());
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,x0,x1,norm_dx_times_k,norm_residual_times_gamma,norm_xy_times_k,inner_iters"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 25);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        for c in &cols[1..6] {
            assert_eq!(c.parse::<f64>().unwrap(), 0.0, "row {row}");
        }
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn objective_column_present_for_minimization_problems() {
    let dir = scratch("obj");
    let csv_path = dir.join("nons.csv");
    let st = bin()
        .args(["simulate", "--preset", "nonsmooth", "--out"])
        .arg(&csv_path)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(st.success());
    let text = fs::read_to_string(&csv_path).unwrap();
    let second = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = second.split(',').collect();
    // 1-d problem: t, x0, xdot0, norms, energy, objective = 8 columns
    assert_eq!(cols.len(), 8);
    assert!(cols[7].parse::<f64>().is_ok());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn config_file_round_trip() {
    let dir = scratch("file");
    let cfg = dir.join("exp.cfg");
    fs::write(
        &cfg,
        "# rotation with damping\nproblem = rotation_identity\nmode = general\nalpha = 7\n\
         xi = 0.8\nlambda0 = 0.056\ngamma = const:1.5\nt0 = 1\nt_end = 20\nx0 = 1,2\nu0 = -1,-1\n\
         out = from_file.csv\n",
    )
    .unwrap();
    let st = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(dir.join("from_file.csv").exists());
    assert!(dir.join("from_file.json").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn compare_identical_configs_gives_ratio_one() {
    let dir = scratch("cmp");
    let out = bin()
        .args([
            "compare",
            "--a",
            "preset:rotation",
            "--b",
            "preset:rotation",
            "--metric",
            "x_norm",
        ])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ratio a/b = 1.000000e0"), "{stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn compare_rejects_mismatched_problems() {
    let dir = scratch("cmp2");
    let out = bin()
        .args([
            "compare",
            "--a",
            "preset:rotation",
            "--b",
            "preset:nonsmooth",
        ])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn oscillation_attenuation_visible_through_compare() {
    let dir = scratch("osc");
    let out = bin()
        .args([
            "compare",
            "--a",
            "preset:quadratic",
            "--b",
            "preset:quadratic",
            "--set-b",
            "xi=0.2",
            "--metric",
            "sign_changes:1",
        ])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    // the summary line ends with "... = <a> vs <b>"
    let tail = stdout.rsplit('=').next().unwrap();
    let counts: Vec<usize> = tail
        .split("vs")
        .filter_map(|p| p.trim().parse().ok())
        .collect();
    assert_eq!(counts.len(), 2, "{stdout}");
    assert!(counts[1] < counts[0], "{stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn batch_jobs_run_multiple_presets() {
    let dir = scratch("jobs");
    let st = bin()
        .args([
            "simulate",
            "--preset",
            "rotation",
            "--preset",
            "nonsmooth",
            "--jobs",
            "2",
        ])
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(st.success());
    assert!(dir.join("rotation_simulate.csv").exists());
    assert!(dir.join("nonsmooth_simulate.csv").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn inner_solver_stall_exits_4() {
    let dir = scratch("inner");
    let out = bin()
        .args([
            "iterate",
            "--preset",
            "rotation",
            "--set",
            "inner_max=2",
        ])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn divergence_exits_3() {
    let dir = scratch("div");
    let out = bin()
        .args([
            "simulate",
            "--preset",
            "rotation",
            "--set",
            "x0=5e12,0",
        ])
        .current_dir(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn resolvent_scheme_matches_generic_through_cli() {
    let dir = scratch("scheme");
    let a = dir.join("g.csv");
    let b = dir.join("r.csv");
    for (path, scheme) in [(&a, "generic"), (&b, "resolvent")] {
        let st = bin()
            .args([
                "iterate",
                "--preset",
                "nonsmooth",
                "--scheme",
                scheme,
                "--set",
                "n_iters=50",
                "--out",
            ])
            .arg(path)
            .current_dir(&dir)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let parse = |p: &PathBuf| -> Vec<Vec<f64>> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                l.split(',')
                    .take(2)
                    .map(|c| c.parse().unwrap())
                    .collect()
            })
            .collect()
    };
    for (ra, rb) in parse(&a).iter().zip(parse(&b).iter()) {
        assert!((ra[1] - rb[1]).abs() <= 1e-8, "{ra:?} vs {rb:?}");
    }
    let _ = fs::remove_dir_all(&dir);
}
