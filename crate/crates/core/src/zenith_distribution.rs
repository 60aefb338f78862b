//! Distribution of the serving zenith angle over *active* devices.
//!
//! Devices form a homogeneous PPP on the sphere, thinned by the duty cycle,
//! so the active intensity on the strip at `phi` is proportional to
//! `sin(phi) D(phi)`. Hence
//!
//! ```text
//! F(phi_o) = int_0^phi_o sin D dphi / int_0^phi_max sin D dphi
//! f(phi_o) = sin(phi_o) D(phi_o) / int_0^phi_max sin D dphi
//! ```

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::sin;
use rand::Rng;

use crate::channel::ChannelParams;
use crate::geometry::{OrbitGeometry, ZenithAngle};
use crate::quadrature::{gauss_kronrod_15, integrate, Tolerance};
use crate::repetition::{DutyCycleProfile, RepetitionPolicy};
use crate::Result;

/// Nodes in the sampler's cumulative table.
pub const SAMPLER_TABLE_SIZE: usize = 1024;

const QUANTILE_TOL_RAD: f64 = 1e-12;

/// `int_0^phi sin(x) D(x) dx`.
fn strip_integral(profile: &DutyCycleProfile, lo: f64, hi: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let r = integrate(|x| sin(x) * profile.at(x), lo, hi, tol)?;
    Ok((r.value, r.error_estimate))
}

/// Expected number of active devices within zenith angle `phi`:
/// `K(phi) = 2 pi R^2 lambda0 int_0^phi sin(x) D(x) dx`.
pub fn avg_point_count(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    phi: ZenithAngle,
) -> Result<f64> {
    geom.check_visible(phi)?;
    policy.check_admitted(phi)?;
    let profile = DutyCycleProfile::new(geom, params, policy);
    let (v, _) = strip_integral(&profile, 0.0, phi.radians(), Tolerance::default())?;
    let r = geom.earth_radius_m();
    Ok(2.0 * PI * r * r * policy.lambda0 * v)
}

/// Zenith-angle law of the active devices inside one admittance region.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenithDistribution {
    profile: DutyCycleProfile,
    phi_max_rad: f64,
    normalizer: f64,
    normalizer_error: f64,
    tolerance: Tolerance,
}

impl ZenithDistribution {
    pub fn new(geom: &OrbitGeometry, params: &ChannelParams, policy: &RepetitionPolicy) -> Result<Self> {
        Self::with_tolerance(geom, params, policy, Tolerance::default())
    }

    pub fn with_tolerance(
        geom: &OrbitGeometry,
        params: &ChannelParams,
        policy: &RepetitionPolicy,
        tolerance: Tolerance,
    ) -> Result<Self> {
        policy.validate(geom)?;
        let profile = DutyCycleProfile::new(geom, params, policy);
        let (normalizer, normalizer_error) = strip_integral(&profile, 0.0, policy.phi_max_rad, tolerance)?;
        Ok(ZenithDistribution {
            profile,
            phi_max_rad: policy.phi_max_rad,
            normalizer,
            normalizer_error,
            tolerance,
        })
    }

    /// `int_0^phi_max sin(phi) D(phi) dphi`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn normalizer_error(&self) -> f64 {
        self.normalizer_error
    }

    pub fn quadrature_tolerance(&self) -> Tolerance {
        self.tolerance
    }

    pub fn phi_max_rad(&self) -> f64 {
        self.phi_max_rad
    }

    pub fn profile(&self) -> &DutyCycleProfile {
        &self.profile
    }

    fn check(&self, phi: ZenithAngle) -> Result<f64> {
        let x = phi.radians();
        if x > self.phi_max_rad {
            return Err(crate::Error::OutOfDomain {
                name: "zenith angle",
                value: x,
                min: 0.0,
                max: self.phi_max_rad,
            });
        }
        Ok(x)
    }

    pub fn cdf(&self, phi: ZenithAngle) -> Result<f64> {
        let x = self.check(phi)?;
        if x == self.phi_max_rad {
            return Ok(1.0);
        }
        let (v, _) = strip_integral(&self.profile, 0.0, x, self.tolerance)?;
        Ok((v / self.normalizer).clamp(0.0, 1.0))
    }

    pub fn pdf(&self, phi: ZenithAngle) -> Result<f64> {
        let x = self.check(phi)?;
        Ok(self.density(x))
    }

    pub(crate) fn density(&self, x: f64) -> f64 {
        sin(x) * self.profile.at(x) / self.normalizer
    }

    /// Builds the inverse-CDF sampler.
    pub fn sampler(&self) -> Result<ZenithSampler> {
        ZenithSampler::new(self.clone())
    }
}

/// Inverse-CDF sampler: a cumulative table brackets the quantile, then a
/// safeguarded Newton iteration solves `F(phi) = u` to `1e-12` rad.
#[derive(Debug, Clone, PartialEq)]
pub struct ZenithSampler {
    dist: ZenithDistribution,
    nodes: Vec<f64>,
    /// Unnormalised `int_0^nodes[k] sin D`.
    cumulative: Vec<f64>,
}

impl ZenithSampler {
    fn new(dist: ZenithDistribution) -> Result<Self> {
        let n = SAMPLER_TABLE_SIZE;
        let phi_max = dist.phi_max_rad;
        let nodes: Vec<f64> = (0..=n).map(|k| phi_max * k as f64 / n as f64).collect();
        let seg_tol = dist.tolerance.with_abs(dist.tolerance.abs / n as f64);
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            let (v, _) = strip_integral(&dist.profile, w[0], w[1], seg_tol)?;
            acc += v;
            cumulative.push(acc);
        }
        Ok(ZenithSampler {
            dist,
            nodes,
            cumulative,
        })
    }

    pub fn distribution(&self) -> &ZenithDistribution {
        &self.dist
    }

    fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    fn piece(&self, lo: f64, hi: f64) -> f64 {
        let profile = &self.dist.profile;
        gauss_kronrod_15(&mut |x| sin(x) * profile.at(x), lo, hi).0
    }

    /// Table-based CDF.
    pub fn cdf(&self, phi: ZenithAngle) -> Result<f64> {
        let x = self.dist.check(phi)?;
        Ok(self.cdf_rad(x))
    }

    pub(crate) fn cdf_rad(&self, x: f64) -> f64 {
        let k = self.segment_of(x);
        ((self.cumulative[k] + self.piece(self.nodes[k], x)) / self.total()).clamp(0.0, 1.0)
    }

    fn segment_of(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&n| n <= x);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Zenith angle with `F(phi) = u`, `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let target = u * self.total();
        let k = self
            .cumulative
            .partition_point(|&c| c <= target)
            .saturating_sub(1)
            .min(self.nodes.len() - 2);
        let (mut lo, mut hi) = (self.nodes[k], self.nodes[k + 1]);
        let rest = target - self.cumulative[k];
        let base = self.nodes[k];
        let scale = self.dist.normalizer;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let g = self.piece(base, x) - rest;
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let slope = self.dist.density(x) * scale;
            let newton = if slope > 0.0 { x - g / slope } else { f64::NAN };
            let next = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let step = (next - x).abs();
            x = next;
            if step < QUANTILE_TOL_RAD || hi - lo < QUANTILE_TOL_RAD {
                break;
            }
        }
        x
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ZenithAngle {
        let u: f64 = rng.random();
        ZenithAngle::new(self.quantile(u)).expect("quantile stays inside the admittance region")
    }
}

/// Draws one zenith angle from `dist` (builds a sampler each call; reuse a
/// [`ZenithSampler`] for bulk sampling).
pub fn sample_zenith<R: Rng + ?Sized>(dist: &ZenithDistribution, rng: &mut R) -> Result<ZenithAngle> {
    Ok(dist.sampler()?.sample(rng))
}
