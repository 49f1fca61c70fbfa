//! End-to-end runs of the `bch-factor` binary.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::Command;

use approx::assert_abs_diff_eq;
use bch_factor::io::{self, Format};
use num_complex::Complex64;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn bch(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_bch-factor"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Header and single data row of a one-record CSV report, as key/value pairs.
fn report(csv_text: &str) -> Vec<(String, String)> {
    let mut lines = csv_text.lines();
    let keys = lines.next().unwrap().split(',');
    let values = lines.next().unwrap().split(',');
    keys.zip(values).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn field(pairs: &[(String, String)], key: &str) -> f64 {
    pairs.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1.parse().unwrap()
}

fn printed_norm(stderr: &str, label: &str) -> f64 {
    let line = stderr.lines().find(|l| l.starts_with(label)).expect("summary line");
    line[label.len()..].trim().parse().unwrap()
}

fn gaussian(x: f64, x0: f64, p0: f64, s: f64) -> Complex64 {
    let amplitude = (s * PI.sqrt()).recip().sqrt() * (-(x - x0).powi(2) / (2.0 * s * s)).exp();
    Complex64::from_polar(amplitude, p0 * x - x0 * p0 / 2.0)
}

#[test]
fn factorize_oscillator_at_zero_is_all_zero() {
    let run = bch(&["factorize", "oscillator", "--t", "0"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let pairs = report(&run.stdout);
    for name in ["delta", "alpha", "beta", "gamma"] {
        for part in ["re", "im"] {
            let text = &pairs.iter().find(|(k, _)| *k == format!("{name}_{part}")).unwrap().1;
            assert_eq!(text, "0.00000000000000e0");
        }
    }
}

#[test]
fn factorize_oscillator_at_quarter_period() {
    let run = bch(&["factorize", "oscillator", "--t", "0.7853981633974483"]);
    assert_eq!(run.code, 0);
    let pairs = report(&run.stdout);
    assert_abs_diff_eq!(field(&pairs, "alpha_re"), -0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(field(&pairs, "gamma_re"), 0.5, epsilon = 1e-15);
    // β = -ln cos(π/4) = ln 2 / 2, δ = β/2.
    assert_abs_diff_eq!(field(&pairs, "beta_re"), 2f64.ln() / 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(field(&pairs, "delta_re"), 2f64.ln() / 4.0, epsilon = 1e-14);
    // 15 significant digits.
    let alpha = &pairs.iter().find(|(k, _)| k == "alpha_re").unwrap().1;
    assert_eq!(alpha, "-5.00000000000000e-1");
}

#[test]
#[allow(clippy::approx_constant)] // the truncated angle is the point of the example
fn factorize_squeeze_ode_check() {
    let run = bch(&["factorize", "squeeze", "--r", "0.8", "--phi", "1.0471975512", "--t", "1", "--ode-check"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let pairs = report(&run.stdout);
    assert!(field(&pairs, "ode_deviation") < 1e-8);
    // α = γ = sin φ sinh r / (2 𝒮), 𝒮 = cosh r + cos φ sinh r.
    let (r, phi) = (0.8f64, 1.0471975512f64);
    let scale = r.cosh() + phi.cos() * r.sinh();
    assert_abs_diff_eq!(field(&pairs, "alpha_re"), phi.sin() * r.sinh() / (2.0 * scale), epsilon = 1e-14);
    assert_abs_diff_eq!(field(&pairs, "beta_re"), -scale.ln(), epsilon = 1e-14);
}

#[test]
fn factorize_json_is_one_object() {
    let run = bch(&["factorize", "squeeze", "--r", "0.5", "--format", "json"]);
    assert_eq!(run.code, 0);
    let value: serde_json::Value = serde_json::from_str(run.stdout.trim()).unwrap();
    assert_eq!(value["family"], "squeeze");
    assert!(value["gamma_re"].is_f64());
}

#[test]
fn factorize_at_caustic_fails() {
    let run = bch(&["factorize", "oscillator", "--t", &FRAC_PI_2.to_string()]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("singular"), "{}", run.stderr);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(bch(&["factorize", "squeeze"]).code, 2);
    assert_eq!(bch(&["evolve", "--op", "rotate:t=1"]).code, 2);
    assert_eq!(bch(&["evolve", "--initial", "coherent:x0=nan"]).code, 2);
    assert_eq!(bch(&["density", "--sign", "0"]).code, 2);
    assert_eq!(bch(&["verify", "all", "--grid-n", "1000"]).code, 2);
}

#[test]
fn verify_refuses_small_basis() {
    let run = bch(&["verify", "fock", "--dim", "4"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("below the minimum of 8"), "{}", run.stderr);
    assert!(run.stdout.is_empty());
}

#[test]
fn verify_fock_at_64_states() {
    let run = bch(&["verify", "fock", "--fock-dim", "64", "--format", "json"]);
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let checks: Vec<serde_json::Value> = run.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let diagonal = checks.iter().find(|c| c["check"] == "diagonal_phase_t0.3").unwrap();
    assert_eq!(diagonal["pass"], true);
    assert!(diagonal["measured"].as_f64().unwrap() < 1e-8);
    assert!(checks.iter().all(|c| c["suite"] == "fock" && c["pass"] == true));
}

#[test]
fn verify_failure_exits_1() {
    let run = bch(&["verify", "analytic", "--tol-ode", "1e-300"]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.contains("squeeze_ode_vs_closed_form"));
    assert!(run.stdout.lines().any(|l| l.ends_with(",false")));
}

fn evolve_to_file(dir: &Path, name: &str, args: &[&str]) -> (Run, bch_factor::WaveFunction) {
    let path = dir.join(name);
    let format = if name.ends_with(".json") { Format::Json } else { Format::Csv };
    let mut full = vec!["evolve", "--out", path.to_str().unwrap()];
    if format == Format::Json {
        full.extend(["--format", "json"]);
    }
    full.extend_from_slice(args);
    let run = bch(&full);
    let psi = io::read_wavefunction(std::fs::File::open(&path).unwrap(), format).unwrap();
    (run, psi)
}

#[test]
fn evolve_real_squeeze_of_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let (run, psi) = evolve_to_file(dir.path(), "sq.csv", &["--initial", "ground", "--op", "squeeze:r=1,phi=0"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let e = 1f64.exp();
    let worst =
        psi.grid().points().zip(psi.samples()).map(|(x, v)| (v - gaussian(x, 0.0, 0.0, e)).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
    assert_abs_diff_eq!(psi.norm(), printed_norm(&run.stderr, "final norm"), epsilon = 1e-12);
}

#[test]
fn evolve_coherent_state_over_a_period() {
    let dir = tempfile::tempdir().unwrap();
    let (run, psi) = evolve_to_file(
        dir.path(),
        "period.json",
        &["--initial", "coherent:x0=2,p0=0", "--op", "time:t=6.283185307179586,substeps=8"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let dx = psi.grid().dx();
    let l2: f64 = psi
        .grid()
        .points()
        .zip(psi.samples())
        .map(|(x, v)| (v.norm_sqr() - gaussian(x, 2.0, 0.0, 1.0).norm_sqr()).powi(2))
        .sum::<f64>()
        * dx;
    assert!(l2.sqrt() < 1e-6, "{:e}", l2.sqrt());
    assert_abs_diff_eq!(psi.norm(), printed_norm(&run.stderr, "final norm"), epsilon = 1e-12);
}

#[test]
fn evolve_without_operators_echoes_the_state() {
    let run = bch(&["evolve", "--initial", "squeezed:x0=1,p0=0.5,r=0.5,phi=1"]);
    assert_eq!(run.code, 0);
    let psi = io::read_wavefunction(run.stdout.as_bytes(), Format::Csv).unwrap();
    let expected: bch_factor::cli::StateSpec = "squeezed:x0=1,p0=0.5,r=0.5,phi=1".parse().unwrap();
    assert_eq!(psi.samples(), expected.sample(*psi.grid()).samples());
    assert_eq!(printed_norm(&run.stderr, "initial norm"), printed_norm(&run.stderr, "final norm"));
}

#[test]
fn evolve_json_records_the_run() {
    let run =
        bch(&["evolve", "--op", "displace:x0=1,p0=-0.5", "--op", "time:t=0.5", "--format", "json", "--grid-n", "512"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let (table, config) = io::read_json(run.stdout.as_bytes()).unwrap();
    assert_eq!(table.columns, io::WAVEFUNCTION_COLUMNS);
    assert_eq!(table.rows.len(), 512);
    assert_eq!(config["operators"][0], "displace:x0=1.0,p0=-0.5");
    assert_eq!(config["run"]["grid_n"], 512);
}

#[test]
fn evolve_norm_drift_over_tolerance_fails() {
    let run = bch(&["evolve", "--op", "squeeze:r=0.5,phi=1", "--tol", "1e-300"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("exceeds --tol"));
    // The state is still written.
    assert!(run.stdout.starts_with("x,re,im,density"));
}

fn density_rows(args: &[&str]) -> (Run, bch_factor::io::Table) {
    let run = bch(args);
    let table = io::read_csv(run.stdout.as_bytes()).unwrap();
    (run, table)
}

#[test]
fn odd_density_vanishes_at_origin() {
    let (run, table) = density_rows(&["density", "--x0", "2", "--s", "1.5", "--sign", "-1", "--t-steps", "8"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let x = table.column_index("x").unwrap();
    let printed = table.column_index("rho_raw").unwrap();
    let analytic = table.column_index("rho_analytic").unwrap();
    let at_origin: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[x] == 0.0).collect();
    assert_eq!(at_origin.len(), 9);
    assert!(at_origin.iter().all(|r| r[printed] == 0.0 && r[analytic] == 0.0));
}

#[test]
fn density_trace_matches_grid_and_crosses_the_caustic() {
    let (run, table) =
        density_rows(&["density", "--x0", "2", "--s", "1.5", "--t-max", &PI.to_string(), "--t-steps", "64"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(table.columns, bch_factor::cli::DENSITY_COLUMNS);
    assert_eq!(table.rows.len(), 65 * 2048);
    assert!(table.rows.iter().flatten().all(|v| v.is_finite()));
    let t = table.column("t").unwrap();
    assert!(t.contains(&FRAC_PI_2));
    let worst = table.column("abs_diff").unwrap().into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst:e}");
    // Raw integral of the printed even density at t = 0: (1 + e)/(1 + s e), e = exp(-x0²/s²).
    let e = (-4.0f64 / 2.25).exp();
    assert_abs_diff_eq!(table.column("raw_integral").unwrap()[0], (1.0 + e) / (1.0 + 1.5 * e), epsilon = 1e-9);
}

#[test]
fn density_stride_and_json() {
    let run = bch(&["density", "--t-steps", "2", "--x-stride", "16", "--format", "json", "--grid-n", "256"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let (table, config) = io::read_json(run.stdout.as_bytes()).unwrap();
    assert_eq!(table.rows.len(), 3 * 16);
    assert_eq!(config["sign"], 1);
    assert!(config["max_abs_diff"].as_f64().unwrap() < 1e-5);
}

#[test]
fn commands_are_deterministic() {
    let args = ["evolve", "--initial", "evenodd:x0=2,s=1.5,sign=-1", "--op", "time:t=2", "--grid-n", "512"];
    assert_eq!(bch(&args).stdout, bch(&args).stdout);
}
