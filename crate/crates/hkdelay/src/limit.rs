//! Mean-field limit study: refine the follower population by doubling
//! and watch the Wasserstein distance between consecutive refinements
//! shrink while the decay certificate stays bitwise identical.

use hkdelay_core::meanfield::{evolve_case1, MeasureHistory};
use hkdelay_core::wasserstein::dinf_uniform;
use hkdelay_core::EmpiricalMeasure64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{random_histories, HistoriesSpec, Mode, Scenario};

/// Consecutive-refinement distances may exceed the doubling bound by at
/// most this absolute slack.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct LimitLevel {
    pub n: usize,
    pub gamma: f64,
    pub certificate_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub counts: Vec<usize>,
    pub checkpoints: Vec<f64>,
    /// `distances[k][c]` = d_inf between refinement `k` (atoms duplicated)
    /// and refinement `k + 1` at checkpoint `c`.
    pub distances: Vec<Vec<f64>>,
    pub levels: Vec<LimitLevel>,
    pub gamma_identical: bool,
    pub cauchy_doubling: bool,
    pub passed: bool,
}

/// Runs the Case (i) flow at follower counts `n0 * 2^k` for
/// `k = 0..levels`, sharing one seeded history stream so each refinement
/// extends the previous one, and compares consecutive empirical measures
/// in the infinity-Wasserstein distance at five checkpoints.
pub fn limit_study(scenario: &Scenario, n0: usize, levels: usize) -> Result<LimitReport> {
    if scenario.mode != Mode::LimitStudy {
        return Err(Error::Scenario(format!(
            "limit study needs a limit_study scenario, got {:?}",
            scenario.mode
        )));
    }
    if n0 == 0 || levels < 2 {
        return Err(Error::Scenario(format!(
            "limit study needs n0 >= 1 and at least two levels, got n0 = {n0}, levels = {levels}"
        )));
    }
    let (seed, support_radius, style, dim) = match scenario.histories {
        HistoriesSpec::Random { seed, support_radius, style, dim } => {
            (seed, support_radius, style, dim)
        }
        HistoriesSpec::Explicit { .. } => {
            return Err(Error::Scenario(
                "limit study needs random histories: refinements draw from one seeded stream"
                    .into(),
            ));
        }
    };

    let delays = scenario.delays()?;
    let tau = delays.tau();
    let psi = scenario.kernels.psi.build()?;
    let phi = scenario.kernels.phi.build()?;
    let rho = scenario.kernels.rho.build()?;
    let t_end = scenario.numerics.t_end;
    let step = scenario.numerics.step;
    let spw = scenario.numerics.samples_per_window.max(2);
    let m = scenario.population.m;
    let max_n = n0 << (levels - 1);

    // one draw at the finest size: level k keeps the first n0 * 2^k
    // followers, so coarser levels are strict prefixes of finer ones
    let (leaders, follower_pool) =
        random_histories(seed, support_radius, style, dim, m, max_n, tau);

    let counts: Vec<usize> = (0..levels).map(|k| n0 << k).collect();
    let checkpoints: Vec<f64> = (0..=4).map(|k| t_end * k as f64 / 4.0).collect();
    let cert_times: Vec<f64> = (0..=20).map(|k| t_end * k as f64 / 20.0).collect();

    let mut trajectories = Vec::new();
    let mut level_reports = Vec::new();
    for &n in &counts {
        let g = MeasureHistory::uniform(follower_pool[..n].to_vec())?;
        let traj = evolve_case1(&psi, &phi, &rho, &delays, leaders.clone(), g, t_end, step)?;
        let cert = traj.certificate(&cert_times, spw)?;
        level_reports.push(LimitLevel {
            n,
            gamma: cert.constants.gamma,
            certificate_passed: cert.passed,
        });
        trajectories.push(traj);
    }

    let mut distances = Vec::new();
    for pair in trajectories.windows(2) {
        let mut row = Vec::new();
        for &t in &checkpoints {
            let coarse = pair[0].follower_measure_at(t)?;
            let fine = pair[1].follower_measure_at(t)?;
            // duplicate each coarse atom so both clouds have equal size
            // with uniform weights; the bottleneck distance is unchanged
            let doubled: Vec<_> = coarse
                .atoms()
                .iter()
                .flat_map(|a| [a.clone(), a.clone()])
                .collect();
            let (d, _) = dinf_uniform(&EmpiricalMeasure64::uniform(doubled)?, &fine)?;
            row.push(d);
        }
        distances.push(row);
    }

    let gamma_identical = level_reports
        .windows(2)
        .all(|w| w[0].gamma.to_bits() == w[1].gamma.to_bits());
    let cauchy_doubling = distances.windows(2).all(|w| {
        w[0].iter()
            .zip(&w[1])
            .all(|(&prev, &next)| next <= 2.0 * prev + MONOTONE_SLACK)
    });
    let finite = distances.iter().flatten().all(|d| d.is_finite());
    let certs_ok = level_reports.iter().all(|l| l.certificate_passed);
    let passed = gamma_identical && cauchy_doubling && finite && certs_ok;
    Ok(LimitReport {
        counts,
        checkpoints,
        distances,
        levels: level_reports,
        gamma_identical,
        cauchy_doubling,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        DelaysSpec, HistoryStyle, KernelSpec, KernelsSpec, NumericsSpec, OutputSpec,
        PopulationSpec,
    };

    fn scenario(mode: Mode) -> Scenario {
        Scenario {
            mode,
            kernels: KernelsSpec {
                psi: KernelSpec::Constant { level: 1.0 },
                phi: KernelSpec::Constant { level: 1.0 },
                rho: KernelSpec::Constant { level: 1.0 },
            },
            delays: DelaysSpec { tau1: 0.25, tau2: 0.25 },
            population: PopulationSpec { m: 2, n: 4 },
            histories: HistoriesSpec::Random {
                seed: 3,
                support_radius: 1.0,
                style: HistoryStyle::Constant,
                dim: 1,
            },
            numerics: NumericsSpec { step: 0.05, t_end: 1.0, samples_per_window: 4 },
            output: OutputSpec { dir: None, csv: "series.csv".into(), json: "report.json".into() },
        }
    }

    #[test]
    fn rejects_wrong_mode() {
        assert!(limit_study(&scenario(Mode::Particle), 4, 3).is_err());
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let s = scenario(Mode::LimitStudy);
        assert!(limit_study(&s, 0, 3).is_err());
        assert!(limit_study(&s, 4, 1).is_err());
    }

    #[test]
    fn rejects_explicit_histories() {
        let mut s = scenario(Mode::LimitStudy);
        s.histories = HistoriesSpec::Explicit { leaders: vec![], followers: vec![] };
        assert!(limit_study(&s, 4, 3).is_err());
    }

    #[test]
    fn small_study_passes_with_stable_rate() {
        let report = limit_study(&scenario(Mode::LimitStudy), 4, 2).unwrap();
        assert_eq!(report.counts, vec![4, 8]);
        assert!(report.gamma_identical);
        assert!(report.passed);
    }
}
