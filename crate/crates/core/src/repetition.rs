//! Elevation-shaped repetition policy.
//!
//! A device at zenith angle `phi` uses the duty cycle
//!
//! ```text
//! D(phi) = D0 + (1 - D0) [1 - exp(-a beta sin phi / (cos phi - alpha))]
//! ```
//!
//! and repeats its frame `N(phi) = ceil(D(phi) / D0)` times. The density of
//! concurrently active devices is the duty-cycle thinning `lambda0 D(phi)`.

use alloc::vec::Vec;

use libm::{expm1, log1p, round};

use crate::channel::ChannelParams;
use crate::geometry::{ElevationAngle, OrbitGeometry, ZenithAngle};
use crate::{Error, Result};

/// Limit used for the admittance bound when the minimum elevation is zero,
/// where `D` has a removable singularity at the horizon.
pub const HORIZON_CLEARANCE_RAD: f64 = 1e-9;

/// Ratios within this distance of an integer are snapped before `ceil`.
const CEIL_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionPolicy {
    /// Base duty cycle `D0` in `(0, 1]`.
    pub d0: f64,
    /// Tuning factor `a` in `[0, 1]`.
    pub a: f64,
    /// Admittance bound `phi_max`.
    pub phi_max_rad: f64,
    /// Ground device density in devices per square metre.
    pub lambda0: f64,
}

impl RepetitionPolicy {
    pub fn new(geom: &OrbitGeometry, d0: f64, a: f64, phi_max_rad: f64, lambda0: f64) -> Result<Self> {
        let policy = RepetitionPolicy {
            d0,
            a,
            phi_max_rad,
            lambda0,
        };
        policy.validate(geom)?;
        Ok(policy)
    }

    /// Builds the policy from a minimum elevation angle. `theta_min = 0`
    /// admits everything up to just short of the horizon.
    pub fn with_min_elevation(
        geom: &OrbitGeometry,
        d0: f64,
        a: f64,
        theta_min: ElevationAngle,
        lambda0: f64,
    ) -> Result<Self> {
        Self::new(geom, d0, a, admittance_bound(geom, theta_min), lambda0)
    }

    pub fn validate(&self, geom: &OrbitGeometry) -> Result<()> {
        if !(self.d0 > 0.0 && self.d0 <= 1.0) {
            return Err(Error::invalid("d0", self.d0, "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::invalid("a", self.a, "must lie in [0, 1]"));
        }
        if !(self.phi_max_rad > 0.0 && self.phi_max_rad <= geom.phi_horizon_rad()) {
            return Err(Error::OutOfDomain {
                name: "phi_max",
                value: self.phi_max_rad,
                min: 0.0,
                max: geom.phi_horizon_rad(),
            });
        }
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(Error::invalid("lambda0", self.lambda0, "must be positive"));
        }
        Ok(())
    }

    pub fn phi_max(&self) -> ZenithAngle {
        ZenithAngle::new(self.phi_max_rad).expect("validated admittance bound")
    }

    pub fn check_admitted(&self, phi: ZenithAngle) -> Result<()> {
        if phi.radians() > self.phi_max_rad {
            return Err(Error::OutOfDomain {
                name: "zenith angle",
                value: phi.radians(),
                min: 0.0,
                max: self.phi_max_rad,
            });
        }
        Ok(())
    }
}

/// `phi_max` for a minimum elevation, kept strictly inside the horizon.
pub fn admittance_bound(geom: &OrbitGeometry, theta_min: ElevationAngle) -> f64 {
    let phi = geom.zenith_from_elevation(theta_min).radians();
    phi.min(geom.phi_horizon_rad() - HORIZON_CLEARANCE_RAD)
}

/// The scalars needed to evaluate `D(phi)` in tight loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DutyCycleProfile {
    geom: OrbitGeometry,
    d0: f64,
    a_beta: f64,
}

impl DutyCycleProfile {
    pub fn new(geom: &OrbitGeometry, params: &ChannelParams, policy: &RepetitionPolicy) -> Self {
        DutyCycleProfile {
            geom: *geom,
            d0: policy.d0,
            a_beta: policy.a * params.beta,
        }
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    /// `D(phi)` without domain checks.
    pub fn at(&self, phi_rad: f64) -> f64 {
        self.from_cot(self.geom.cot_elevation(phi_rad))
    }

    /// `D` as a function of `cot theta`.
    pub fn from_cot(&self, cot_theta: f64) -> f64 {
        if self.a_beta == 0.0 {
            return self.d0;
        }
        let shaping = -expm1(-self.a_beta * cot_theta);
        self.d0 + (1.0 - self.d0) * shaping
    }

    pub fn repetitions_at(&self, phi_rad: f64) -> u64 {
        ceil_snapped(self.at(phi_rad) / self.d0)
    }

    /// Zenith angles in `(0, phi_max)` where `N` steps from `n` to `n + 1`,
    /// in increasing order. Empty when `a = 0` or `D0 = 1`.
    pub fn breakpoints(&self, phi_max_rad: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if self.a_beta == 0.0 || self.d0 >= 1.0 {
            return out;
        }
        let n_max = self.repetitions_at(phi_max_rad);
        for n in 1..n_max {
            // N leaves n where D / D0 = n + snap, i.e.
            // 1 - exp(-a beta t) = (n + snap - 1) D0 / (1 - D0)
            let s = (n as f64 + CEIL_SNAP - 1.0) * self.d0 / (1.0 - self.d0);
            if s >= 1.0 {
                break;
            }
            let cot = -log1p(-s) / self.a_beta;
            let theta = libm::atan2(1.0, cot);
            let phi = self.geom.zenith_rad(theta);
            if phi > 0.0 && phi < phi_max_rad {
                out.push(phi);
            }
        }
        out.dedup();
        out
    }
}

/// `ceil(x)` that first snaps `x` to a nearby integer, so that a ratio such
/// as `D / D0 = 3 + 1e-13` counts as 3 repetitions.
pub(crate) fn ceil_snapped(x: f64) -> u64 {
    let r = round(x);
    let v = if (x - r).abs() < CEIL_SNAP { r } else { libm::ceil(x) };
    if v < 1.0 {
        1
    } else {
        v as u64
    }
}

fn checked(geom: &OrbitGeometry, policy: &RepetitionPolicy, phi: ZenithAngle) -> Result<()> {
    geom.check_visible(phi)?;
    policy.check_admitted(phi)
}

pub fn effective_duty_cycle(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    phi: ZenithAngle,
) -> Result<f64> {
    checked(geom, policy, phi)?;
    Ok(DutyCycleProfile::new(geom, params, policy).at(phi.radians()))
}

pub fn repetitions(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    phi: ZenithAngle,
) -> Result<u64> {
    checked(geom, policy, phi)?;
    Ok(DutyCycleProfile::new(geom, params, policy).repetitions_at(phi.radians()))
}

/// Density of concurrently active devices, `lambda0 D(phi)`.
pub fn effective_density(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    policy: &RepetitionPolicy,
    phi: ZenithAngle,
) -> Result<f64> {
    Ok(policy.lambda0 * effective_duty_cycle(geom, params, policy, phi)?)
}
