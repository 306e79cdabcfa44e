use std::path::{Path, PathBuf};
use std::process::Command;

use hpa_cli::config::{load, resolve};
use hpa_cli::manifest::parse_resolved;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn hpa(out: &Path, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_hpa"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs");
    status.status.code().expect("exited normally")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

/// Data section of a CSV output: header row plus records, comments dropped.
fn body(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn records(path: &Path) -> Vec<csv::StringRecord> {
    let text = body(path);
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

fn field(r: &csv::StringRecord, i: usize) -> f64 {
    r[i].parse().unwrap()
}

#[test]
fn default_preset_has_three_equilibria() {
    let out = TempDir::new().unwrap();
    assert_eq!(hpa(out.path(), &["--preset", "paper-s6", "equilibria"]), 0);
    let rows = records(&out.path().join("equilibria.csv"));
    let labels: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(labels, ["Ed", "Eu", "En"]);
    let en = &rows[2];
    for (i, want) in [7.659, 21.0, 3.055, 0.1].into_iter().enumerate() {
        assert!((field(en, 2 + i) - want).abs() <= 1e-6 * want);
    }
    let report = std::fs::read_to_string(out.path().join("equilibria.txt")).unwrap();
    assert_eq!(report.matches("inside box").count(), 3);
}

#[test]
fn non_cooperative_gr_loop_has_one_row() {
    let out = TempDir::new().unwrap();
    let cfg = write_config(
        out.path(),
        "[calibration]\nmeans = [7.659, 21.0, 3.055, 0.1]\nhalf_lives = [4.0, 19.9, 76.4]\n\
         w4 = 0.001\nxi = 0.1\neta = 1.0\nmu = 1.0\nalpha1 = 4.0\nalpha2 = 4.0\nalpha3 = 1.0\n\
         c1 = 2.0\nc2 = 0.8\nc3 = 0.8\n",
    );
    assert_eq!(hpa(out.path(), &["--config", &cfg, "equilibria"]), 0);
    assert_eq!(records(&out.path().join("equilibria.csv")).len(), 1);
}

#[test]
fn bad_configs_exit_2() {
    let out = TempDir::new().unwrap();
    for text in [
        "[kernels.h33]\nfamily = \"dirac\"\ntau = 1.0\n",
        "[params]\nk1 = -1.0\n",
        "preset = \"nope\"\n",
        "[params\n",
        "[initial]\nnear = \"En\"\nstate = [1.0, 1.0, 1.0, 0.1]\n",
    ] {
        let cfg = write_config(out.path(), text);
        assert_eq!(
            hpa(out.path(), &["--config", &cfg, "equilibria"]),
            2,
            "{text}"
        );
    }
    assert_eq!(
        hpa(
            out.path(),
            &["--config", "/does/not/exist.toml", "equilibria"]
        ),
        2
    );
    assert_eq!(
        hpa(out.path(), &["--tolerance", "box_slak=1", "equilibria"]),
        2
    );
    // simulate without kernels
    assert_eq!(hpa(out.path(), &["simulate"]), 2);
    assert_eq!(hpa(out.path(), &["frobnicate"]), 2);
}

#[test]
fn stability_verdicts() {
    let out = TempDir::new().unwrap();
    assert_eq!(hpa(out.path(), &["stability"]), 0);
    let rows = records(&out.path().join("stability.csv"));
    let verdicts: Vec<(&str, &str, &str)> = rows.iter().map(|r| (&r[0], &r[11], &r[12])).collect();
    assert_eq!(
        verdicts,
        [
            ("En", "stable", "stable"),
            ("Eu", "unstable", "unstable"),
            ("Ed", "stable", "stable")
        ]
    );
}

#[test]
fn hopf_values() {
    let out = TempDir::new().unwrap();
    assert_eq!(
        hpa(out.path(), &["hopf", "--kernel", "dirac", "--pmax", "2"]),
        0
    );
    let rows = records(&out.path().join("hopf.csv"));
    // label,status,omega0,q_re,q_im,tau_0..
    assert!((field(&rows[0], 5) - 49.8505).abs() < 0.01);
    assert!((field(&rows[2], 5) - 37.8362).abs() < 0.01);
    assert!(rows[1][1].starts_with("hypothesis failed"));
    assert!(rows[1][2].is_empty());

    assert_eq!(
        hpa(out.path(), &["hopf", "--kernel", "gamma", "--order", "4"]),
        0
    );
    let rows = records(&out.path().join("hopf.csv"));
    // label,status,omega0,order,omega,theta,total_delay,residual
    assert!((field(&rows[0], 5) - 18.9).abs() < 0.05);
    assert!((field(&rows[2], 5) - 12.625).abs() < 0.05);
    assert!(field(&rows[0], 7) <= 1e-7);
}

#[test]
fn gamma_kernels_select_the_configured_order() {
    let out = TempDir::new().unwrap();
    assert_eq!(hpa(out.path(), &["--preset", "fig-gamma-19", "hopf"]), 0);
    let rows = records(&out.path().join("hopf.csv"));
    assert_eq!(&rows[0][3], "4");
}

#[test]
fn plots_are_well_formed_svg() {
    let out = TempDir::new().unwrap();
    let cfg = configs().join("fig-dirac-50.toml");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(hpa(out.path(), &["--config", cfg, "simulate", "--plot"]), 0);
    for name in ["x1.svg", "x2.svg", "x3.svg", "x4.svg", "phase_x1_x3.svg"] {
        let text = std::fs::read_to_string(out.path().join(name)).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(doc.descendants().any(|n| n.has_tag_name("polyline")));
    }
    let traj = std::fs::read_to_string(out.path().join("trajectory.csv")).unwrap();
    assert!(traj.contains("# class: limit-cycle"));
    assert!(traj.contains("# invariant events: 0"));
}

#[test]
fn short_delay_converges_to_its_equilibrium() {
    let out = TempDir::new().unwrap();
    let cfg = write_config(
        out.path(),
        "[kernels]\nh1 = { family = \"dirac\", tau = 0.0 }\nh2 = { family = \"dirac\", tau = 12.0 }\n\
         h31 = { family = \"dirac\", tau = 8.0 }\nh32 = { family = \"dirac\", tau = 8.0 }\n\
         h34 = { family = \"dirac\", tau = 8.0 }\n[initial]\nnear = \"Ed\"\n",
    );
    assert_eq!(hpa(out.path(), &["--config", &cfg, "simulate"]), 0);
    let report = std::fs::read_to_string(out.path().join("simulate.txt")).unwrap();
    assert!(report.contains("class: converged-to-point"), "{report}");
    assert!(report.contains("nearest equilibrium: Ed"), "{report}");
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = write_config(
        a.path(),
        "preset = \"fig-gamma-19\"\n[integration]\nt_end = 600.0\n",
    );
    for dir in [&a, &b] {
        assert_eq!(hpa(dir.path(), &["--config", &cfg, "simulate"]), 0);
        assert_eq!(hpa(dir.path(), &["--config", &cfg, "equilibria"]), 0);
    }
    for name in ["trajectory.csv", "equilibria.csv"] {
        let (x, y) = (body(&a.path().join(name)), body(&b.path().join(name)));
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn manifest_echoes_the_resolved_configuration() {
    let out = TempDir::new().unwrap();
    let path = configs().join("fig-dirac-50.toml");
    let cfg = path.to_str().unwrap();
    assert_eq!(
        hpa(
            out.path(),
            &[
                "--config",
                cfg,
                "--tolerance",
                "cycle_min_peaks=5",
                "equilibria"
            ]
        ),
        0
    );
    let expected = resolve(&load(&path).unwrap(), None, &["cycle_min_peaks=5".into()]).unwrap();
    for name in ["equilibria.csv", "equilibria.txt"] {
        let text = std::fs::read_to_string(out.path().join(name)).unwrap();
        assert_eq!(parse_resolved(&text).unwrap(), expected, "{name}");
    }
}

#[test]
fn degenerate_sweep_repeats_rows() {
    let out = TempDir::new().unwrap();
    let cfg = write_config(
        out.path(),
        "preset = \"fig-dirac-50\"\n[integration]\nt_end = 1500.0\n",
    );
    assert_eq!(
        hpa(
            out.path(),
            &[
                "--config", &cfg, "sweep", "--param", "tau", "--from", "40", "--to", "40",
                "--steps", "2"
            ]
        ),
        0
    );
    let rows = records(&out.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], rows[2]);
    assert_eq!(rows[1], rows[3]);
    assert_eq!(
        hpa(
            out.path(),
            &["--config", &cfg, "sweep", "--from", "40", "--to", "30"]
        ),
        2
    );
    assert_eq!(
        hpa(
            out.path(),
            &["--config", &cfg, "sweep", "--param", "theta", "--from", "1", "--to", "2"]
        ),
        2
    );
}

#[test]
fn out_dir_from_environment() {
    let out = TempDir::new().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_hpa"))
        .env("HPA_OUT_DIR", out.path().join("nested"))
        .arg("equilibria")
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(out.path().join("nested/equilibria.csv").exists());
}

#[test]
fn gamma_sweep_brackets_the_critical_scales() {
    let out = TempDir::new().unwrap();
    let args = [
        "--preset",
        "fig-gamma-19",
        "sweep",
        "--from",
        "10",
        "--to",
        "22",
        "--steps",
        "13",
    ];
    assert_eq!(hpa(out.path(), &args), 0);
    let report = std::fs::read_to_string(out.path().join("sweep.txt")).unwrap();
    assert!(
        report.contains("branch En  onset of oscillation in (18, 19]"),
        "{report}"
    );
    assert!(
        report.contains("branch Ed  onset of oscillation in (12, 13]"),
        "{report}"
    );
}
