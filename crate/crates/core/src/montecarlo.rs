//! Seeded Monte Carlo estimators for the analytic quantities.
//!
//! Every realization (a device field, a success trial, a block of zenith
//! samples) draws from its own ChaCha8 stream keyed by
//! `(seed, realization index, purpose)`, so the estimates are bit-identical
//! whatever order or thread the realizations run on. Drivers that want
//! parallelism call the per-realization functions and reduce with
//! [`Estimate::from_samples`] / [`Estimate::from_successes`] in index order.
//!
//! Device fields are sampled by thinning: candidates are uniform on the
//! admittance cap (uniform `cos phi`) with intensity `lambda0 D_max`, and each
//! is kept with probability `D(phi) / D_max`. This is the duty-cycle-thinned
//! PPP that the mean interference integrates, observed as a snapshot.

use alloc::vec::Vec;

use libm::{asin, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::channel::ChannelParams;
use crate::geometry::{OrbitGeometry, ZenithAngle};
use crate::link_analysis::{LinkModel, Scenario};
use crate::repetition::{DutyCycleProfile, RepetitionPolicy};
use crate::stats::{EmpiricalCdf, Estimate};
use crate::zenith_distribution::ZenithSampler;
use crate::{Error, Result};

/// Accepted zenith samples per random stream in [`estimate_zenith_cdf`].
pub const ZENITH_BLOCK: u64 = 4096;

/// Random-stream namespaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    DeviceField = 1,
    Success = 2,
    Zenith = 3,
    Custom = 4,
}

/// Independent stream for `(seed, index, purpose)`.
pub fn stream(seed: u64, index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (index & ((1 << 56) - 1)));
    rng
}

/// Interference seen by the success trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceMode {
    /// Every repeat is tested against the analytic mean `E[I]`.
    #[default]
    MeanField,
    /// Every repeat sees a freshly drawn device field (sensitivity analysis).
    PerRepeatField,
}

/// Which estimators a simulation run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorOutputs {
    pub zenith_cdf: bool,
    pub interference: bool,
    pub p_success: bool,
    pub p_global: bool,
}

impl Default for EstimatorOutputs {
    fn default() -> Self {
        EstimatorOutputs {
            zenith_cdf: true,
            interference: true,
            p_success: true,
            p_global: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Device-field realizations for the interference estimate.
    pub n_realizations: u64,
    /// Bernoulli trials for the success estimates.
    pub n_trials: u64,
    /// Active-device samples for the zenith CDF.
    pub n_zenith_samples: u64,
    /// Upper bound on candidates drawn for one field.
    pub n_devices_cap: Option<u64>,
    pub interference: InterferenceMode,
    pub outputs: EstimatorOutputs,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            n_realizations: 2000,
            n_trials: 100_000,
            n_zenith_samples: 1_000_000,
            n_devices_cap: Some(50_000_000),
            interference: InterferenceMode::MeanField,
            outputs: EstimatorOutputs::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::invalid("n_realizations", 0.0, "must be at least 1"));
        }
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", 0.0, "must be at least 1"));
        }
        if self.n_zenith_samples == 0 {
            return Err(Error::invalid("n_zenith_samples", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

/// A candidate device drawn uniformly on the cap.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// `1 - cos phi`.
    one_minus_cos: f64,
    cot_theta: f64,
}

/// Thinned-PPP sampler for one admittance region.
#[derive(Debug, Clone, Copy)]
pub struct FieldSampler {
    geom: OrbitGeometry,
    profile: DutyCycleProfile,
    alpha: f64,
    cap_one_minus_cos: f64,
    d_max: f64,
    mean_candidates: f64,
}

impl FieldSampler {
    pub fn new(geom: &OrbitGeometry, params: &ChannelParams, policy: &RepetitionPolicy) -> Result<Self> {
        policy.validate(geom)?;
        let profile = DutyCycleProfile::new(geom, params, policy);
        let cap = crate::geometry::one_minus_cos(policy.phi_max_rad);
        let r = geom.earth_radius_m();
        // D is non-decreasing in phi
        let d_max = profile.at(policy.phi_max_rad);
        let area = 2.0 * core::f64::consts::PI * r * r * cap;
        Ok(FieldSampler {
            geom: *geom,
            profile,
            alpha: geom.alpha(),
            cap_one_minus_cos: cap,
            d_max,
            mean_candidates: policy.lambda0 * area * d_max,
        })
    }

    /// Expected number of candidates per field, `lambda0 |cap| D_max`.
    pub fn mean_candidates(&self) -> f64 {
        self.mean_candidates
    }

    fn candidate<R: Rng + ?Sized>(&self, rng: &mut R) -> Candidate {
        let u: f64 = rng.random();
        let v = u * self.cap_one_minus_cos;
        let c = 1.0 - v;
        let s = sqrt(v * (2.0 - v));
        let den = c - self.alpha;
        let cot_theta = if den > 0.0 { s / den } else { f64::INFINITY };
        Candidate {
            one_minus_cos: v,
            cot_theta,
        }
    }

    fn accept<R: Rng + ?Sized>(&self, c: &Candidate, rng: &mut R) -> bool {
        let u: f64 = rng.random();
        u * self.d_max < self.profile.from_cot(c.cot_theta)
    }

    /// One accepted zenith angle (rejection loop).
    fn active_zenith<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let c = self.candidate(rng);
            if self.accept(&c, rng) {
                return zenith_from_one_minus_cos(c.one_minus_cos);
            }
        }
    }

    fn candidate_count<R: Rng + ?Sized>(&self, rng: &mut R, cap: Option<u64>) -> Result<u64> {
        let drawn = if self.mean_candidates > 0.0 {
            let pois = Poisson::new(self.mean_candidates)
                .map_err(|_| Error::invalid("mean device count", self.mean_candidates, "not a valid Poisson mean"))?;
            pois.sample(rng) as u64
        } else {
            0
        };
        if let Some(cap) = cap {
            if drawn > cap {
                return Err(Error::DeviceCapExceeded { cap, drawn });
            }
        }
        Ok(drawn)
    }

    /// Aggregate interference `sum kappa p_t zeta_i l_i` of one field.
    fn interference<R: Rng + ?Sized>(&self, s: &Scenario, rng: &mut R, cap: Option<u64>) -> Result<f64> {
        let n = self.candidate_count(rng, cap)?;
        let r = self.geom.earth_radius_m();
        let h = self.geom.altitude_m();
        let two_r_rh = 2.0 * r * (r + h);
        let mut total = 0.0;
        for _ in 0..n {
            let c = self.candidate(rng);
            if !self.accept(&c, rng) {
                continue;
            }
            let d = sqrt(h * h + two_r_rh * c.one_minus_cos);
            let l = s.channel.fspl_gain_at_range(d);
            let zeta = s.channel.mixture(s.channel.p_los_from_cot(c.cot_theta)).sample(rng);
            total += zeta * l;
        }
        Ok(s.budget.kappa * s.budget.tx_power_w * total)
    }
}

/// `phi` from `1 - cos phi` without cancellation.
fn zenith_from_one_minus_cos(v: f64) -> f64 {
    2.0 * asin(sqrt(0.5 * v).min(1.0))
}

/// Zenith angles of the concurrently active devices in one field.
pub fn sample_device_field<R: Rng + ?Sized>(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    rng: &mut R,
    n_devices_cap: Option<u64>,
) -> Result<Vec<ZenithAngle>> {
    let sampler = FieldSampler::new(geom, params, policy)?;
    let n = sampler.candidate_count(rng, n_devices_cap)?;
    let mut out = Vec::new();
    for _ in 0..n {
        let c = sampler.candidate(rng);
        if sampler.accept(&c, rng) {
            out.push(ZenithAngle::new(zenith_from_one_minus_cos(c.one_minus_cos))?);
        }
    }
    Ok(out)
}

/// Interference of field realization `index`.
pub fn interference_realization(
    sampler: &FieldSampler,
    scenario: &Scenario,
    sim: &SimConfig,
    index: u64,
) -> Result<f64> {
    let mut rng = stream(sim.seed, index, Purpose::DeviceField);
    sampler.interference(scenario, &mut rng, sim.n_devices_cap)
}

/// Mean aggregate interference over `sim.n_realizations` fields.
pub fn estimate_interference(scenario: &Scenario, sim: &SimConfig) -> Result<Estimate> {
    sim.validate()?;
    let sampler = FieldSampler::new(&scenario.geometry, &scenario.channel, &scenario.policy)?;
    let values = (0..sim.n_realizations)
        .map(|r| interference_realization(&sampler, scenario, sim, r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&values))
}

/// What a success trial conditions on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessTarget {
    /// Device at a fixed zenith angle; `repeat` selects `N(phi)` repeats
    /// instead of a single frame.
    AtZenith { phi: ZenithAngle, repeat: bool },
    /// Device zenith drawn from the active-device distribution, with repeats.
    Averaged,
}

/// Precomputed state for Bernoulli success trials.
#[derive(Debug, Clone)]
pub struct SuccessTrials<'a> {
    model: &'a LinkModel,
    target: SuccessTarget,
    sampler: Option<ZenithSampler>,
    field: Option<FieldSampler>,
}

impl<'a> SuccessTrials<'a> {
    pub fn new(model: &'a LinkModel, sim: &SimConfig, target: SuccessTarget) -> Result<Self> {
        sim.validate()?;
        let s = model.scenario();
        if let SuccessTarget::AtZenith { phi, .. } = target {
            s.geometry.check_visible(phi)?;
            s.policy.check_admitted(phi)?;
        }
        let sampler = match target {
            SuccessTarget::Averaged => Some(model.zenith().sampler()?),
            SuccessTarget::AtZenith { .. } => None,
        };
        let field = match sim.interference {
            InterferenceMode::MeanField => None,
            InterferenceMode::PerRepeatField => Some(FieldSampler::new(&s.geometry, &s.channel, &s.policy)?),
        };
        Ok(SuccessTrials {
            model,
            target,
            sampler,
            field,
        })
    }

    /// Outcome of trial `index`: did at least one frame clear the SINR
    /// threshold?
    pub fn trial(&self, sim: &SimConfig, index: u64) -> Result<bool> {
        let mut rng = stream(sim.seed, index, Purpose::Success);
        let s = self.model.scenario();
        let (phi, repeat) = match (self.target, &self.sampler) {
            (SuccessTarget::AtZenith { phi, repeat }, _) => (phi.radians(), repeat),
            (SuccessTarget::Averaged, Some(sampler)) => (sampler.sample(&mut rng).radians(), true),
            (SuccessTarget::Averaged, None) => unreachable!("sampler built for averaged trials"),
        };
        let n = if repeat { self.model.repetitions_rad(phi) } else { 1 };
        let l = s.channel.fspl_gain_at_range(s.geometry.slant_range_m(phi));
        let mixture = s
            .channel
            .mixture(s.channel.p_los_from_cot(s.geometry.cot_elevation(phi)));
        let signal_scale = s.budget.tx_power_w * l;
        for _ in 0..n {
            let zeta = mixture.sample(&mut rng);
            let interference = match &self.field {
                None => self.model.mean_interference(),
                Some(f) => f.interference(s, &mut rng, sim.n_devices_cap)?,
            };
            let sinr = signal_scale * zeta / (interference + s.budget.noise_power_w);
            if sinr > s.budget.sinr_threshold {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Fraction of successful trials with a Wilson standard error.
pub fn estimate_success(model: &LinkModel, sim: &SimConfig, target: SuccessTarget) -> Result<Estimate> {
    let trials = SuccessTrials::new(model, sim, target)?;
    let mut successes = 0;
    for i in 0..sim.n_trials {
        if trials.trial(sim, i)? {
            successes += 1;
        }
    }
    Ok(Estimate::from_successes(successes, sim.n_trials))
}

/// Block `index` of active-device zenith samples (`quota` of them).
pub fn zenith_block(sampler: &FieldSampler, sim: &SimConfig, index: u64, quota: u64) -> Vec<f64> {
    let mut rng = stream(sim.seed, index, Purpose::Zenith);
    (0..quota).map(|_| sampler.active_zenith(&mut rng)).collect()
}

/// Empirical CDF of `sim.n_zenith_samples` active-device zenith angles.
///
/// Conditioned on their number, the points of a thinned PPP are i.i.d. with
/// density proportional to the thinned intensity, so samples are drawn
/// straight from it rather than by generating whole fields.
pub fn estimate_zenith_cdf(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    sim: &SimConfig,
) -> Result<EmpiricalCdf> {
    sim.validate()?;
    let sampler = FieldSampler::new(geom, params, policy)?;
    let mut samples = Vec::with_capacity(sim.n_zenith_samples as usize);
    let blocks = sim.n_zenith_samples.div_ceil(ZENITH_BLOCK);
    for b in 0..blocks {
        let quota = ZENITH_BLOCK.min(sim.n_zenith_samples - b * ZENITH_BLOCK);
        samples.extend(zenith_block(&sampler, sim, b, quota));
    }
    Ok(EmpiricalCdf::new(samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ElevationAngle;
    use crate::link_analysis::LinkBudget;

    fn scenario(a: f64, theta_deg: f64) -> Scenario {
        Scenario::reference()
            .with_tuning(a, ElevationAngle::new(theta_deg.to_radians()).unwrap())
            .unwrap()
    }

    #[test]
    fn streams_are_keyed() {
        let a: u64 = stream(1, 0, Purpose::Success).random();
        let b: u64 = stream(1, 0, Purpose::Success).random();
        let c: u64 = stream(1, 1, Purpose::Success).random();
        let d: u64 = stream(1, 0, Purpose::Zenith).random();
        let e: u64 = stream(2, 0, Purpose::Success).random();
        assert_eq!(a, b);
        assert!(a != c && a != d && a != e && c != d);
    }

    #[test]
    fn empty_field_when_density_vanishes() {
        let s = scenario(1e-4, 10.0);
        let policy = RepetitionPolicy {
            lambda0: 1e-300,
            ..s.policy
        };
        let mut rng = stream(5, 0, Purpose::DeviceField);
        for _ in 0..100 {
            let f = sample_device_field(&s.geometry, &s.channel, &policy, &mut rng, None).unwrap();
            assert!(f.is_empty());
        }
        let quiet = Scenario { policy, ..s };
        let e = estimate_interference(
            &quiet,
            &SimConfig {
                n_realizations: 10,
                ..SimConfig::default()
            },
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn safety_cap() {
        let s = scenario(1e-3, 5.0);
        let mut rng = stream(5, 0, Purpose::DeviceField);
        let err = sample_device_field(&s.geometry, &s.channel, &s.policy, &mut rng, Some(10)).unwrap_err();
        assert!(matches!(err, Error::DeviceCapExceeded { cap: 10, .. }));
    }

    #[test]
    fn field_points_inside_admittance() {
        let s = scenario(2e-4, 10.0);
        let mut rng = stream(9, 3, Purpose::DeviceField);
        let f = sample_device_field(&s.geometry, &s.channel, &s.policy, &mut rng, None).unwrap();
        assert!(!f.is_empty());
        assert!(f.iter().all(|p| p.radians() <= s.policy.phi_max_rad));
    }

    #[test]
    fn success_certain_for_tiny_threshold() {
        let mut s = scenario(5e-5, 10.0);
        s.budget = LinkBudget {
            sinr_threshold: 1e-30,
            ..s.budget
        };
        let model = LinkModel::new(&s).unwrap();
        let sim = SimConfig {
            n_trials: 2000,
            ..SimConfig::default()
        };
        let e = estimate_success(&model, &sim, SuccessTarget::Averaged).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn zenith_blocks_are_order_independent() {
        let s = scenario(1e-5, 10.0);
        let sim = SimConfig {
            n_zenith_samples: 10_000,
            ..SimConfig::default()
        };
        let whole = estimate_zenith_cdf(&s.geometry, &s.channel, &s.policy, &sim).unwrap();
        let sampler = FieldSampler::new(&s.geometry, &s.channel, &s.policy).unwrap();
        let mut parts: Vec<f64> = Vec::new();
        for b in (0..3u64).rev() {
            let quota = ZENITH_BLOCK.min(10_000 - b * ZENITH_BLOCK);
            parts.extend(zenith_block(&sampler, &sim, b, quota));
        }
        assert_eq!(EmpiricalCdf::new(parts), whole);
        assert_eq!(whole.len(), 10_000);
    }
}
