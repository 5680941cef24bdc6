//! Scenario execution: simulation, certificate evaluation, decay-rate
//! fitting, and CSV/JSON artifact writing.

use std::io::Write;
use std::path::{Path, PathBuf};

use hkdelay_core::meanfield::{evolve_case1, evolve_case2, MeasureHistory};
use hkdelay_core::particle::{simulate, ConsensusCertificate};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{Mode, Scenario};

/// Points with a diameter below this floor count as numerically collapsed
/// and are dropped from the decay fit.
pub const DECAY_FLOOR: f64 = 1e-14;

/// Number of evenly spaced certificate checkpoints on `[0, t_end]`.
const CHECK_COUNT: usize = 200;

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
}

/// Empirical decay rate, or the signal that the series collapsed to
/// consensus before a rate could be fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GammaEmp {
    Rate(f64),
    Signal(&'static str),
}

pub const CONSENSUS_REACHED: &str = "consensus_reached";

/// Least-squares slope of `ln d(t)` on `t >= t_min`, sign-flipped so
/// decay gives a positive rate. Points below the floor are dropped;
/// `None` means fewer than two usable points remain (consensus reached).
pub fn fit_decay_rate(series: &[(f64, f64)], t_min: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, d)| t >= t_min && d >= DECAY_FLOOR)
        .map(|&(t, d)| (t, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let tbar = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(t, y) in &pts {
        num += (t - tbar) * (y - ybar);
        den += (t - tbar) * (t - tbar);
    }
    if den == 0.0 {
        return None;
    }
    Some(-(num / den) + 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsOut {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub psi0: f64,
    pub phi0: f64,
    pub rho0: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "Ctilde")]
    pub c_tilde: f64,
    pub gamma: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOut {
    pub t: f64,
    pub d: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub constants: ConstantsOut,
    pub gamma_emp: GammaEmp,
    pub checks: Vec<CheckOut>,
    pub mode: Mode,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub certificate_passed: bool,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

fn report_from_certificate(
    cert: &ConsensusCertificate<f64>,
    tau: f64,
    mode: Mode,
    seed: Option<u64>,
) -> RunReport {
    let checks: Vec<CheckOut> = cert
        .checks
        .iter()
        .map(|c| CheckOut { t: c.t, d: c.diameter, bound: c.bound, pass: c.pass })
        .collect();
    let series: Vec<(f64, f64)> = checks.iter().map(|c| (c.t, c.d)).collect();
    let gamma_emp = match fit_decay_rate(&series, 2.0 * tau) {
        Some(rate) => GammaEmp::Rate(rate),
        None => GammaEmp::Signal(CONSENSUS_REACHED),
    };
    RunReport {
        constants: ConstantsOut {
            k: cert.constants.k,
            c0: cert.constants.c0,
            psi0: cert.constants.psi0,
            phi0: cert.constants.phi0,
            rho0: cert.constants.rho0,
            lambda: cert.constants.lambda,
            c: cert.constants.c,
            c_tilde: cert.constants.c_tilde,
            gamma: cert.constants.gamma,
            d0: cert.d0,
        },
        gamma_emp,
        checks,
        mode,
        seed,
    }
}

/// Runs a simulation scenario and writes the CSV series and JSON report.
pub fn run(scenario: &Scenario, out_dir: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let seed = overrides.seed.or(scenario.seed());
    let step = overrides.step.unwrap_or(scenario.numerics.step);
    let t_end = overrides.t_end.unwrap_or(scenario.numerics.t_end);
    let delays = scenario.delays()?;
    let tau = delays.tau();
    let sample_times: Vec<f64> = (0..=CHECK_COUNT)
        .map(|k| t_end * k as f64 / CHECK_COUNT as f64)
        .collect();
    let spw = scenario.numerics.samples_per_window.max(2);

    let cert = match scenario.mode {
        Mode::Particle => {
            let config = scenario.build_config(overrides.seed)?;
            let traj = simulate(&config, t_end, step)?;
            traj.certificate(
                &config.psi,
                &config.phi,
                &config.rho,
                &config.delays,
                &sample_times,
                spw,
            )?
        }
        Mode::MeanfieldCase1 => {
            let (leaders, followers) = scenario.build_histories(
                scenario.population.m,
                scenario.population.n,
                overrides.seed,
            )?;
            let g = MeasureHistory::uniform(followers)?;
            let traj = evolve_case1(
                &scenario.kernels.psi.build()?,
                &scenario.kernels.phi.build()?,
                &scenario.kernels.rho.build()?,
                &delays,
                leaders,
                g,
                t_end,
                step,
            )?;
            traj.certificate(&sample_times, spw)?
        }
        Mode::MeanfieldCase2 => {
            let (leaders, followers) = scenario.build_histories(
                scenario.population.m,
                scenario.population.n,
                overrides.seed,
            )?;
            let f = MeasureHistory::uniform(leaders)?;
            let g = MeasureHistory::uniform(followers)?;
            let traj = evolve_case2(
                &scenario.kernels.psi.build()?,
                &scenario.kernels.phi.build()?,
                &scenario.kernels.rho.build()?,
                &delays,
                f,
                g,
                t_end,
                step,
            )?;
            traj.certificate(&sample_times, spw)?
        }
        other => {
            return Err(Error::Scenario(format!(
                "mode {other:?} is driven by its dedicated subcommand, not `run`"
            )));
        }
    };

    let passed = cert.passed;
    let report = report_from_certificate(&cert, tau, scenario.mode, seed);
    let (csv_path, json_path) = write_artifacts(scenario, out_dir, &report)?;
    Ok(RunOutcome { report, certificate_passed: passed, csv_path, json_path })
}

fn write_artifacts(
    scenario: &Scenario,
    out_dir: &Path,
    report: &RunReport,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let csv_path = out_dir.join(&scenario.output.csv);
    let json_path = out_dir.join(&scenario.output.json);

    let mut csv = String::from("t,d,bound,pass\n");
    for c in &report.checks {
        // 17 significant digits round-trip f64 exactly
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", c.t, c.d, c.bound, c.pass));
    }
    write_file(&csv_path, csv.as_bytes())?;

    let json = serde_json::to_string_pretty(report)?;
    write_file(&json_path, json.as_bytes())?;
    Ok((csv_path, json_path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(rate: f64, amp: f64) -> Vec<(f64, f64)> {
        (0..=50).map(|k| {
            let t = 0.1 * k as f64;
            (t, amp * (-rate * t).exp())
        })
        .collect()
    }

    #[test]
    fn exact_on_pure_exponentials() {
        let fit = fit_decay_rate(&series(0.3, 1.0), 0.0).unwrap();
        assert!((fit - 0.3).abs() < 1e-9, "fit = {fit}");
    }

    #[test]
    fn zero_on_constant_series() {
        let fit = fit_decay_rate(&series(0.0, 2.0), 0.0).unwrap();
        assert!(fit.abs() < 1e-9, "fit = {fit}");
    }

    #[test]
    fn offset_window_and_amplitude_ignored() {
        let fit = fit_decay_rate(&series(1.0, 5.0), 1.0).unwrap();
        assert!((fit - 1.0).abs() < 1e-9, "fit = {fit}");
    }

    #[test]
    fn collapsed_series_signals_consensus() {
        let flat: Vec<(f64, f64)> = (0..=10).map(|k| (k as f64, 1e-16)).collect();
        assert_eq!(fit_decay_rate(&flat, 0.0), None);
    }

    #[test]
    fn drops_points_below_floor() {
        let mut s = series(0.5, 1.0);
        s.push((100.0, 0.0));
        let fit = fit_decay_rate(&s, 0.0).unwrap();
        assert!((fit - 0.5).abs() < 1e-9, "fit = {fit}");
    }
}
