//! Mean interference and frame success probabilities.
//!
//! Interference enters the SINR through its spatial mean
//!
//! ```text
//! E[I] = kappa p_t 2 pi R^2 lambda0 int_0^phi_max zeta_bar(phi) l(phi) sin(phi) D(phi) dphi
//! ```
//!
//! A single frame from zenith angle `phi` succeeds with
//! `p(1) = 1 - F_zeta(gamma (E[I] + W) / (p_t l(phi)))`, `N` independent
//! repeats with `p(N) = 1 - (1 - p(1))^N`, and the region average is
//! `int p(N) f_phi dphi`. A constellation of `k` disjoint spots multiplies
//! this by the spot availability `k (1 - cos phi_max) / 2`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{expm1, log1p, sin};

use crate::channel::ChannelParams;
use crate::geometry::{cap_fraction, ElevationAngle, OrbitGeometry, ZenithAngle};
use crate::quadrature::{integrate, Tolerance};
use crate::repetition::{admittance_bound, DutyCycleProfile, RepetitionPolicy};
use crate::zenith_distribution::ZenithDistribution;
use crate::{Error, Result};

/// Rows in [`CoverageResult::p_success_conditional`].
pub const CONDITIONAL_TABLE_POINTS: usize = 65;

/// Default ground device density: 0.05 devices per km^2, in devices per m^2.
/// At this density the mean interference is comparable to the noise floor.
pub const REFERENCE_DEVICE_DENSITY: f64 = 5e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    /// Average thermal noise power `W`.
    pub noise_power_w: f64,
    /// SINR threshold `gamma`, linear.
    pub sinr_threshold: f64,
    /// Coordination factor `kappa` in `(0, 1]`; 1 means uncoordinated access.
    pub kappa: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_power_w", self.tx_power_w),
            ("noise_power_w", self.noise_power_w),
            ("sinr_threshold", self.sinr_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, v, "must be positive"));
            }
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::invalid("kappa", self.kappa, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// A fully specified single-satellite configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub geometry: OrbitGeometry,
    pub channel: ChannelParams,
    pub policy: RepetitionPolicy,
    pub budget: LinkBudget,
}

impl Scenario {
    pub fn new(
        geometry: OrbitGeometry,
        channel: ChannelParams,
        policy: RepetitionPolicy,
        budget: LinkBudget,
    ) -> Result<Self> {
        let s = Scenario {
            geometry,
            channel,
            policy,
            budget,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.policy.validate(&self.geometry)?;
        self.budget.validate()
    }

    /// The reference operating point: 550 km orbit, 2 GHz, 23 dBm devices,
    /// -138 dBm noise, `D0 = 1e-6`, `a = 5e-5`, `theta_min = 10 deg`,
    /// `gamma = -10 dB`, `kappa = 1` and [`REFERENCE_DEVICE_DENSITY`].
    pub fn reference() -> Self {
        let geometry =
            OrbitGeometry::new(crate::geometry::DEFAULT_EARTH_RADIUS_M, 550_000.0).expect("reference geometry");
        let theta_min = ElevationAngle::new(10f64.to_radians()).expect("10 deg");
        let policy = RepetitionPolicy::with_min_elevation(&geometry, 1e-6, 5e-5, theta_min, REFERENCE_DEVICE_DENSITY)
            .expect("reference policy");
        let budget = LinkBudget {
            tx_power_w: 0.199_526_231_496_887_97,
            noise_power_w: 1.584_893_192_461_114_3e-17,
            sinr_threshold: 0.1,
            kappa: 1.0,
        };
        Scenario::new(geometry, ChannelParams::default(), policy, budget).expect("reference scenario")
    }

    /// Same scenario with a different tuning factor and minimum elevation.
    pub fn with_tuning(&self, a: f64, theta_min: ElevationAngle) -> Result<Self> {
        let policy = RepetitionPolicy {
            a,
            phi_max_rad: admittance_bound(&self.geometry, theta_min),
            ..self.policy
        };
        Scenario::new(self.geometry, self.channel, policy, self.budget)
    }
}

/// `1 - (1 - p)^n`, accurate for small `p`.
pub fn success_after_repeats(p_single: f64, n: u64) -> f64 {
    let p = p_single.clamp(0.0, 1.0);
    if n == 0 || p == 0.0 {
        return 0.0;
    }
    if p == 1.0 || n == 1 {
        return p;
    }
    (-expm1(n as f64 * log1p(-p))).clamp(p, 1.0)
}

/// `k (1 - cos phi_max) / 2`; errors when disjoint spots would cover more
/// than the whole sphere.
pub fn p_spot(geom: &OrbitGeometry, k: u32, phi_max: ZenithAngle) -> Result<f64> {
    geom.check_visible(phi_max)?;
    if k == 0 {
        return Err(Error::invalid("k", 0.0, "need at least one satellite"));
    }
    let v = k as f64 * cap_fraction(phi_max);
    if v > 1.0 + 1e-12 {
        return Err(Error::SpotOverlap(v));
    }
    Ok(v.min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    MonteCarlo,
}

/// Provenance of a [`CoverageResult`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMeta {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub quadrature_rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPoint {
    pub phi_rad: f64,
    pub theta_rad: f64,
    pub repetitions: u64,
    pub p_single: f64,
    pub p_repeated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub mean_interference_w: f64,
    pub p_success_conditional: Vec<ConditionalPoint>,
    pub p_success_avg: f64,
    pub p_spot: f64,
    pub p_global: f64,
    pub method: Method,
    pub meta: RunMeta,
}

/// Analytic model of one scenario with the mean interference and the zenith
/// distribution precomputed.
#[derive(Debug, Clone)]
pub struct LinkModel {
    scenario: Scenario,
    zenith: ZenithDistribution,
    mean_interference_w: f64,
    tolerance: Tolerance,
}

impl LinkModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Self::with_tolerance(scenario, Tolerance::default())
    }

    pub fn with_tolerance(scenario: &Scenario, tolerance: Tolerance) -> Result<Self> {
        scenario.validate()?;
        let zenith =
            ZenithDistribution::with_tolerance(&scenario.geometry, &scenario.channel, &scenario.policy, tolerance)?;
        let mean_interference_w = interference_integral(scenario, tolerance)?;
        Ok(LinkModel {
            scenario: *scenario,
            zenith,
            mean_interference_w,
            tolerance,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn zenith(&self) -> &ZenithDistribution {
        &self.zenith
    }

    pub fn mean_interference(&self) -> f64 {
        self.mean_interference_w
    }

    /// `gamma (E[I] + W) / p_t`: the excess gain a frame needs, times `l`.
    pub fn gain_threshold_numerator(&self) -> f64 {
        let b = &self.scenario.budget;
        b.sinr_threshold * (self.mean_interference_w + b.noise_power_w) / b.tx_power_w
    }

    fn check(&self, phi: ZenithAngle) -> Result<f64> {
        self.scenario.geometry.check_visible(phi)?;
        self.scenario.policy.check_admitted(phi)?;
        Ok(phi.radians())
    }

    pub(crate) fn p_single_rad(&self, phi_rad: f64) -> f64 {
        let s = &self.scenario;
        let g = &s.geometry;
        let l = s.channel.fspl_gain_at_range(g.slant_range_m(phi_rad));
        let p_los = s.channel.p_los_from_cot(g.cot_elevation(phi_rad));
        let x = self.gain_threshold_numerator() / l;
        s.channel.mixture(p_los).sf(x)
    }

    pub(crate) fn repetitions_rad(&self, phi_rad: f64) -> u64 {
        self.zenith.profile().repetitions_at(phi_rad)
    }

    pub fn p_success_single(&self, phi: ZenithAngle) -> Result<f64> {
        Ok(self.p_single_rad(self.check(phi)?))
    }

    pub fn p_success_repeated(&self, phi: ZenithAngle) -> Result<f64> {
        let x = self.check(phi)?;
        Ok(success_after_repeats(self.p_single_rad(x), self.repetitions_rad(x)))
    }

    /// `int_0^phi_max p(N | phi) f(phi) dphi`, integrated piecewise between
    /// the steps of `N(phi)`.
    pub fn p_success_avg(&self) -> Result<f64> {
        Ok(self
            .average_over_zenith(|m, x, n| success_after_repeats(m.p_single_rad(x), n))?
            .clamp(0.0, 1.0))
    }

    /// `int_0^phi_max g(phi, N(phi)) f(phi) dphi`. `N` is constant on each
    /// integration piece, so `g` may jump wherever the repetition count does.
    pub fn average_over_zenith<G: Fn(&Self, f64, u64) -> f64>(&self, g: G) -> Result<f64> {
        let phi_max = self.zenith.phi_max_rad();
        let mut edges = Vec::new();
        edges.push(0.0);
        edges.extend(self.zenith.profile().breakpoints(phi_max));
        edges.push(phi_max);
        let mut parts = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let n = self.repetitions_rad(0.5 * (lo + hi));
            let tol = self.tolerance.with_abs(self.tolerance.abs * (hi - lo) / phi_max);
            let r = integrate(|x| g(self, x, n) * self.zenith.density(x), lo, hi, tol)?;
            parts.push(r.value);
        }
        Ok(crate::stats::pairwise_sum(&parts))
    }

    pub fn p_spot(&self, k: u32) -> Result<f64> {
        p_spot(&self.scenario.geometry, k, self.scenario.policy.phi_max())
    }

    pub fn p_global(&self, k: u32) -> Result<CoverageResult> {
        let p_spot = self.p_spot(k)?;
        let p_avg = self.p_success_avg()?;
        Ok(CoverageResult {
            mean_interference_w: self.mean_interference_w,
            p_success_conditional: self.conditional_table(CONDITIONAL_TABLE_POINTS),
            p_success_avg: p_avg,
            p_spot,
            p_global: p_spot * p_avg,
            method: Method::Analytic,
            meta: RunMeta {
                quadrature_rel_tol: Some(self.tolerance.rel),
                ..RunMeta::default()
            },
        })
    }

    /// Conditional success on `points` evenly spaced zenith angles in
    /// `[0, phi_max]`.
    pub fn conditional_table(&self, points: usize) -> Vec<ConditionalPoint> {
        let phi_max = self.zenith.phi_max_rad();
        let g = &self.scenario.geometry;
        (0..points)
            .map(|i| {
                let x = if points > 1 {
                    phi_max * i as f64 / (points - 1) as f64
                } else {
                    0.0
                };
                let n = self.repetitions_rad(x);
                let p1 = self.p_single_rad(x);
                ConditionalPoint {
                    phi_rad: x,
                    theta_rad: g.elevation_rad(x),
                    repetitions: n,
                    p_single: p1,
                    p_repeated: success_after_repeats(p1, n),
                }
            })
            .collect()
    }
}

fn interference_integral(s: &Scenario, tol: Tolerance) -> Result<f64> {
    let g = &s.geometry;
    let profile = DutyCycleProfile::new(g, &s.channel, &s.policy);
    // scaled so the integrand is O(1): l / l(0) and D / D0
    let l0 = s.channel.fspl_gain_at_range(g.altitude_m());
    let d0 = s.policy.d0;
    let r = integrate(
        |x| {
            let cot = g.cot_elevation(x);
            let zeta = s.channel.mixture(s.channel.p_los_from_cot(cot)).mean();
            let l = s.channel.fspl_gain_at_range(g.slant_range_m(x)) / l0;
            zeta * l * sin(x) * profile.from_cot(cot) / d0
        },
        0.0,
        s.policy.phi_max_rad,
        tol,
    )?;
    let radius = g.earth_radius_m();
    Ok(s.budget.kappa * s.budget.tx_power_w * 2.0 * PI * radius * radius * s.policy.lambda0 * l0 * d0 * r.value)
}

pub fn mean_interference(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    budget: &LinkBudget,
) -> Result<f64> {
    let s = Scenario::new(*geom, *params, *policy, *budget)?;
    interference_integral(&s, Tolerance::default())
}

pub fn p_success_single(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    budget: &LinkBudget,
    phi: ZenithAngle,
) -> Result<f64> {
    LinkModel::new(&Scenario::new(*geom, *params, *policy, *budget)?)?.p_success_single(phi)
}

pub fn p_success_repeated(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    budget: &LinkBudget,
    phi: ZenithAngle,
) -> Result<f64> {
    LinkModel::new(&Scenario::new(*geom, *params, *policy, *budget)?)?.p_success_repeated(phi)
}

pub fn p_success_avg(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    budget: &LinkBudget,
) -> Result<f64> {
    LinkModel::new(&Scenario::new(*geom, *params, *policy, *budget)?)?.p_success_avg()
}

pub fn p_global(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    budget: &LinkBudget,
    k: u32,
) -> Result<CoverageResult> {
    LinkModel::new(&Scenario::new(*geom, *params, *policy, *budget)?)?.p_global(k)
}
