//! Stability study: how far two nearby initial data drift apart in
//! Wasserstein distance, relative to their initial discrepancy, across a
//! sweep of perturbation sizes.

use hkdelay_core::meanfield::{
    evolve_case1, evolve_case2, MeanFieldTrajectory, MeasureHistory,
};
use hkdelay_core::point::Point;
use hkdelay_core::wasserstein::{dinf_uniform, dp_uniform};
use hkdelay_core::EmpiricalMeasure64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{Mode, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl std::str::FromStr for PNorm {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(PNorm::One),
            "2" => Ok(PNorm::Two),
            "inf" => Ok(PNorm::Inf),
            other => Err(format!("p must be 1, 2, or inf, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    Random,
    Translation,
}

impl std::str::FromStr for PerturbationKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(PerturbationKind::Random),
            "translation" => Ok(PerturbationKind::Translation),
            other => Err(format!("perturbation must be random or translation, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRun {
    pub epsilon: f64,
    /// `(t, ratio)` at each checkpoint.
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub mode: Mode,
    pub p: PNorm,
    pub perturbation: PerturbationKind,
    pub runs: Vec<StabilityRun>,
    /// Relative spread of the max ratios across the epsilon sweep.
    pub sweep_variation: f64,
    pub passed: bool,
}

fn wasserstein(a: &EmpiricalMeasure64, b: &EmpiricalMeasure64, p: PNorm) -> Result<f64> {
    Ok(match p {
        PNorm::One => dp_uniform(a, b, 1.0)?.0,
        PNorm::Two => dp_uniform(a, b, 2.0)?.0,
        PNorm::Inf => dinf_uniform(a, b)?.0,
    })
}

fn leader_lp_mean(a: &[Point<f64>], b: &[Point<f64>], p: PNorm) -> f64 {
    let m = a.len() as f64;
    match p {
        PNorm::One => a.iter().zip(b).map(|(x, y)| x.dist(y)).sum::<f64>() / m,
        PNorm::Two => {
            (a.iter().zip(b).map(|(x, y)| x.dist(y).powi(2)).sum::<f64>() / m).sqrt()
        }
        PNorm::Inf => a.iter().zip(b).map(|(x, y)| x.dist(y)).fold(0.0, f64::max),
    }
}

/// Total discrepancy at one time: follower Wasserstein distance plus the
/// leader term (pointwise lp-mean in Case (i), leader Wasserstein in
/// Case (ii)).
fn discrepancy(
    a: &MeanFieldTrajectory<f64>,
    b: &MeanFieldTrajectory<f64>,
    t: f64,
    p: PNorm,
    case2: bool,
) -> Result<f64> {
    let follower = wasserstein(&a.follower_measure_at(t)?, &b.follower_measure_at(t)?, p)?;
    let leader = if case2 {
        wasserstein(&a.leader_measure_at(t)?, &b.leader_measure_at(t)?, p)?
    } else {
        leader_lp_mean(&a.leaders_at(t)?, &b.leaders_at(t)?, p)
    };
    Ok(follower + leader)
}

fn evolve(
    scenario: &Scenario,
    leaders: Vec<hkdelay_core::HistoryFunction64>,
    followers: Vec<hkdelay_core::HistoryFunction64>,
    case2: bool,
) -> Result<MeanFieldTrajectory<f64>> {
    let delays = scenario.delays()?;
    let psi = scenario.kernels.psi.build()?;
    let phi = scenario.kernels.phi.build()?;
    let rho = scenario.kernels.rho.build()?;
    let t_end = scenario.numerics.t_end;
    let step = scenario.numerics.step;
    let g = MeasureHistory::uniform(followers)?;
    Ok(if case2 {
        let f = MeasureHistory::uniform(leaders)?;
        evolve_case2(&psi, &phi, &rho, &delays, f, g, t_end, step)?
    } else {
        evolve_case1(&psi, &phi, &rho, &delays, leaders, g, t_end, step)?
    })
}

/// Runs the epsilon sweep `{eps, 2 eps, 4 eps}` and reports amplification
/// ratios at the checkpoints `{0, T/4, T/2, 3T/4, T}`.
pub fn stability_study(
    scenario: &Scenario,
    epsilon: f64,
    p: PNorm,
    kind: PerturbationKind,
) -> Result<StabilityReport> {
    let case2 = match scenario.mode {
        Mode::StabilityCase1 => false,
        Mode::StabilityCase2 => true,
        other => {
            return Err(Error::Scenario(format!(
                "stability study needs a stability_case1/2 scenario, got {other:?}"
            )));
        }
    };
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Scenario(format!("epsilon must be positive, got {epsilon}")));
    }
    let (m, n) = (scenario.population.m, scenario.population.n);
    let (leaders, followers) = scenario.build_histories(m, n, None)?;
    let dim = leaders[0].dim();
    let tau = scenario.delays()?.tau();
    let t_end = scenario.numerics.t_end;
    let checkpoints: Vec<f64> = (0..=4).map(|k| t_end * k as f64 / 4.0).collect();

    // one fixed offset pattern, scaled by each epsilon, so the sweep
    // probes linear response of the same perturbation direction
    let seed = scenario.seed().unwrap_or(0).wrapping_add(0x5eed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit_offsets: Vec<Point<f64>> = (0..m + n)
        .map(|_| match kind {
            PerturbationKind::Translation => {
                let mut v = vec![0.0; dim];
                v[0] = 1.0;
                Point::new(v).unwrap()
            }
            PerturbationKind::Random => {
                let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let p = Point::new(raw).unwrap();
                let norm = p.norm();
                if norm > 1e-6 {
                    p.scaled(rng.gen_range(0.5..1.0) / norm)
                } else {
                    let mut v = vec![0.0; dim];
                    v[0] = 1.0;
                    Point::new(v).unwrap()
                }
            }
        })
        .collect();

    let base = evolve(scenario, leaders.clone(), followers.clone(), case2)?;
    let mut runs = Vec::new();
    for level in 0..3u32 {
        let eps = epsilon * f64::from(1 << level);
        let shift = |idx: usize| unit_offsets[idx].scaled(eps);
        let pl: Vec<_> = leaders
            .iter()
            .enumerate()
            .map(|(i, h)| h.shifted(&shift(i)))
            .collect();
        let pf: Vec<_> = followers
            .iter()
            .enumerate()
            .map(|(i, h)| h.shifted(&shift(m + i)))
            .collect();
        let perturbed = evolve(scenario, pl, pf, case2)?;

        // initial discrepancy: sup over sampled s in [-tau, 0]
        let init_samples: Vec<f64> = if tau > 0.0 {
            (0..=8).map(|k| -tau + tau * k as f64 / 8.0).collect()
        } else {
            vec![0.0]
        };
        let mut init = 0.0f64;
        for &s in &init_samples {
            init = init.max(discrepancy(&base, &perturbed, s, p, case2)?);
        }
        if init == 0.0 {
            return Err(Error::Scenario(
                "zero initial discrepancy: amplification ratio undefined".into(),
            ));
        }
        let mut ratios = Vec::new();
        let mut max_ratio = 0.0f64;
        for &t in &checkpoints {
            let r = discrepancy(&base, &perturbed, t, p, case2)? / init;
            max_ratio = max_ratio.max(r);
            ratios.push((t, r));
        }
        runs.push(StabilityRun { epsilon: eps, ratios, max_ratio });
    }

    let max = runs.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = runs.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
    let sweep_variation = if min > 0.0 { (max - min) / min } else { f64::INFINITY };
    let passed = runs.iter().all(|r| r.max_ratio.is_finite()) && sweep_variation < 0.5;
    Ok(StabilityReport {
        mode: scenario.mode,
        p,
        perturbation: kind,
        runs,
        sweep_variation,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{
        DelaysSpec, HistoriesSpec, HistoryStyle, KernelSpec, KernelsSpec, NumericsSpec,
        OutputSpec, PopulationSpec,
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
    fn rejects_wrong_mode_and_bad_epsilon() {
        let s = scenario(Mode::Particle);
        assert!(stability_study(&s, 1e-3, PNorm::One, PerturbationKind::Random).is_err());
        let s = scenario(Mode::StabilityCase1);
        assert!(stability_study(&s, 0.0, PNorm::One, PerturbationKind::Random).is_err());
        assert!(stability_study(&s, -1.0, PNorm::One, PerturbationKind::Random).is_err());
    }

    #[test]
    fn translation_with_constant_kernels_has_unit_ratio() {
        for mode in [Mode::StabilityCase1, Mode::StabilityCase2] {
            let s = scenario(mode);
            let report =
                stability_study(&s, 1e-3, PNorm::Inf, PerturbationKind::Translation).unwrap();
            assert!(report.passed);
            for run in &report.runs {
                for &(_, ratio) in &run.ratios {
                    assert!((ratio - 1.0).abs() < 1e-9, "ratio = {ratio}");
                }
            }
        }
    }

    #[test]
    fn pnorm_parsing() {
        assert_eq!("1".parse::<PNorm>().unwrap(), PNorm::One);
        assert_eq!("inf".parse::<PNorm>().unwrap(), PNorm::Inf);
        assert!("3".parse::<PNorm>().is_err());
        assert_eq!(
            "translation".parse::<PerturbationKind>().unwrap(),
            PerturbationKind::Translation
        );
        assert!("shear".parse::<PerturbationKind>().is_err());
    }
}
