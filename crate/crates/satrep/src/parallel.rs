//! Multi-threaded versions of the Monte Carlo estimators and the sweep.
//!
//! Every unit of work owns an index-keyed random stream and results are
//! reduced in index order, so the numbers match the sequential estimators
//! bit for bit whatever the thread count.

use rayon::prelude::*;
use satrep_core::link_analysis::{LinkModel, Scenario};
use satrep_core::montecarlo::{
    interference_realization, zenith_block, FieldSampler, SimConfig, SuccessTarget, SuccessTrials, ZENITH_BLOCK,
};
use satrep_core::stats::{EmpiricalCdf, Estimate};
use satrep_core::sweep::{refine_optimum_with, run_sweep_with, Objective, SweepGrid, SweepPoint, SweepResult};
use satrep_core::Result;

pub fn estimate_interference(scenario: &Scenario, sim: &SimConfig) -> Result<Estimate> {
    sim.validate()?;
    let sampler = FieldSampler::new(&scenario.geometry, &scenario.channel, &scenario.policy)?;
    let values = (0..sim.n_realizations)
        .into_par_iter()
        .map(|r| interference_realization(&sampler, scenario, sim, r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&values))
}

pub fn estimate_success(model: &LinkModel, sim: &SimConfig, target: SuccessTarget) -> Result<Estimate> {
    let trials = SuccessTrials::new(model, sim, target)?;
    let successes = (0..sim.n_trials)
        .into_par_iter()
        .map(|i| trials.trial(sim, i).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::from_successes(successes, sim.n_trials))
}

pub fn estimate_zenith_cdf(scenario: &Scenario, sim: &SimConfig) -> Result<EmpiricalCdf> {
    sim.validate()?;
    let sampler = FieldSampler::new(&scenario.geometry, &scenario.channel, &scenario.policy)?;
    let blocks = sim.n_zenith_samples.div_ceil(ZENITH_BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let quota = ZENITH_BLOCK.min(sim.n_zenith_samples - b * ZENITH_BLOCK);
            zenith_block(&sampler, sim, b, quota)
        })
        .collect();
    Ok(EmpiricalCdf::new(parts.concat()))
}

fn batch<O: Objective + Sync + ?Sized>(objective: &O) -> impl FnMut(&[(f64, f64)]) -> Vec<Result<SweepPoint>> + '_ {
    move |pts| pts.par_iter().map(|&(a, t)| objective.evaluate(a, t)).collect()
}

pub fn run_sweep<O: Objective + Sync + ?Sized>(objective: &O, grid: &SweepGrid) -> Result<SweepResult> {
    run_sweep_with(batch(objective), grid)
}

pub fn refine_optimum<O: Objective + Sync + ?Sized>(
    objective: &O,
    coarse: &SweepResult,
    levels: u32,
) -> Result<SweepResult> {
    refine_optimum_with(batch(objective), coarse, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use satrep_core::geometry::ElevationAngle;
    use satrep_core::montecarlo as seq;

    fn scenario() -> Scenario {
        Scenario::reference()
            .with_tuning(1e-4, ElevationAngle::new(0.2).unwrap())
            .unwrap()
    }

    #[test]
    fn matches_sequential_estimators() {
        let s = scenario();
        let sim = SimConfig {
            seed: 5,
            n_realizations: 3000,
            n_trials: 5000,
            n_zenith_samples: 10_000,
            ..SimConfig::default()
        };
        assert_eq!(
            estimate_interference(&s, &sim).unwrap(),
            seq::estimate_interference(&s, &sim).unwrap()
        );
        let m = LinkModel::new(&s).unwrap();
        assert_eq!(
            estimate_success(&m, &sim, SuccessTarget::Averaged).unwrap(),
            seq::estimate_success(&m, &sim, SuccessTarget::Averaged).unwrap()
        );
        assert_eq!(
            estimate_zenith_cdf(&s, &sim).unwrap(),
            seq::estimate_zenith_cdf(&s.geometry, &s.channel, &s.policy, &sim).unwrap()
        );
    }
}
