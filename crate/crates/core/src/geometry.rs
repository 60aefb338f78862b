//! Spherical geometry of a satellite at altitude `h` above a spherical Earth.
//!
//! The zenith angle `phi` is the angle at the Earth's centre between the
//! sub-satellite point and a ground device; the elevation angle `theta` is the
//! angle between the satellite direction and the device's local horizon.
//! The two are related by `theta = acot(sin phi / (cos phi - alpha))` with
//! `alpha = R / (R + h)`, and the satellite sets at `phi_h = acos(alpha)`.

use core::f64::consts::{FRAC_PI_2, PI};

use libm::{acos, atan2, cos, sin, sqrt};

use crate::{Error, Result};

/// Mean Earth radius.
pub const DEFAULT_EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Zenith angle in radians, `0 <= phi <= pi`.
///
/// Whether the angle is visible from a particular orbit is checked by the
/// operations that take an [`OrbitGeometry`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ZenithAngle(f64);

impl ZenithAngle {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() || !(0.0..=PI).contains(&radians) {
            return Err(Error::OutOfDomain {
                name: "zenith angle",
                value: radians,
                min: 0.0,
                max: PI,
            });
        }
        Ok(ZenithAngle(radians))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Elevation angle in radians, `0 <= theta <= pi/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ElevationAngle(f64);

impl ElevationAngle {
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() || !(0.0..=FRAC_PI_2).contains(&radians) {
            return Err(Error::OutOfDomain {
                name: "elevation angle",
                value: radians,
                min: 0.0,
                max: FRAC_PI_2,
            });
        }
        Ok(ElevationAngle(radians))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Earth/orbit pair with the derived ratio `alpha` and horizon zenith angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry {
    earth_radius_m: f64,
    altitude_m: f64,
    alpha: f64,
    phi_horizon_rad: f64,
}

impl OrbitGeometry {
    pub fn new(earth_radius_m: f64, altitude_m: f64) -> Result<Self> {
        if !(earth_radius_m.is_finite() && earth_radius_m > 0.0) {
            return Err(Error::invalid(
                "earth_radius_m",
                earth_radius_m,
                "must be finite and positive",
            ));
        }
        if !(altitude_m.is_finite() && altitude_m > 0.0) {
            return Err(Error::invalid("altitude_m", altitude_m, "must be finite and positive"));
        }
        let alpha = earth_radius_m / (earth_radius_m + altitude_m);
        if alpha >= 1.0 {
            // altitude below the resolution of the radius
            return Err(Error::invalid(
                "altitude_m",
                altitude_m,
                "too small relative to the Earth radius",
            ));
        }
        Ok(OrbitGeometry {
            earth_radius_m,
            altitude_m,
            alpha,
            phi_horizon_rad: acos(alpha),
        })
    }

    pub fn earth_radius_m(&self) -> f64 {
        self.earth_radius_m
    }

    pub fn altitude_m(&self) -> f64 {
        self.altitude_m
    }

    /// `R / (R + h)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Zenith angle at which the satellite sits on the horizon, `acos(alpha)`.
    pub fn phi_horizon_rad(&self) -> f64 {
        self.phi_horizon_rad
    }

    pub fn phi_horizon(&self) -> ZenithAngle {
        ZenithAngle(self.phi_horizon_rad)
    }

    /// Rejects zenith angles beyond the horizon.
    pub fn check_visible(&self, phi: ZenithAngle) -> Result<()> {
        if phi.0 > self.phi_horizon_rad {
            return Err(Error::OutOfDomain {
                name: "zenith angle",
                value: phi.0,
                min: 0.0,
                max: self.phi_horizon_rad,
            });
        }
        Ok(())
    }

    /// `sin phi / (cos phi - alpha)`, i.e. `cot theta`; infinite at and past
    /// the horizon.
    pub(crate) fn cot_elevation(&self, phi_rad: f64) -> f64 {
        let den = cos(phi_rad) - self.alpha;
        if den <= 0.0 {
            f64::INFINITY
        } else {
            sin(phi_rad) / den
        }
    }

    pub fn elevation_from_zenith(&self, phi: ZenithAngle) -> Result<ElevationAngle> {
        self.check_visible(phi)?;
        Ok(ElevationAngle(self.elevation_rad(phi.0)))
    }

    /// `acot(sin phi / (cos phi - alpha))` with `acot(x) = atan2(1, x)`,
    /// written as `atan2(cos phi - alpha, sin phi)` so that `phi = 0` needs
    /// no division.
    pub(crate) fn elevation_rad(&self, phi_rad: f64) -> f64 {
        atan2(cos(phi_rad) - self.alpha, sin(phi_rad)).clamp(0.0, FRAC_PI_2)
    }

    /// Inverse of [`elevation_from_zenith`](Self::elevation_from_zenith):
    /// `phi = acos(alpha cos theta) - theta`.
    pub fn zenith_from_elevation(&self, theta: ElevationAngle) -> ZenithAngle {
        ZenithAngle(self.zenith_rad(theta.0))
    }

    pub(crate) fn zenith_rad(&self, theta_rad: f64) -> f64 {
        (acos(self.alpha * cos(theta_rad)) - theta_rad).clamp(0.0, self.phi_horizon_rad)
    }

    /// Satellite-to-device distance in metres.
    pub fn slant_range(&self, phi: ZenithAngle) -> Result<f64> {
        self.check_visible(phi)?;
        Ok(self.slant_range_m(phi.0))
    }

    /// Law of cosines on the Earth-centre triangle, in the form
    /// `d^2 = h^2 + 4 R (R + h) sin^2(phi / 2)` which gives `d(0) = h` exactly.
    pub(crate) fn slant_range_m(&self, phi_rad: f64) -> f64 {
        let r = self.earth_radius_m;
        let h = self.altitude_m;
        let s = sin(0.5 * phi_rad);
        sqrt(h * h + 4.0 * r * (r + h) * s * s)
    }

    /// Ground area of the cap `[0, phi]` in square metres.
    pub fn cap_area_m2(&self, phi: ZenithAngle) -> f64 {
        let r = self.earth_radius_m;
        4.0 * PI * r * r * cap_fraction(phi)
    }
}

/// Same as [`OrbitGeometry::new`].
pub fn make_geometry(earth_radius_m: f64, altitude_m: f64) -> Result<OrbitGeometry> {
    OrbitGeometry::new(earth_radius_m, altitude_m)
}

/// Fraction of the sphere covered by a cap of half-angle `phi_max`:
/// `(1 - cos phi_max) / 2`.
pub fn cap_fraction(phi_max: ZenithAngle) -> f64 {
    one_minus_cos(phi_max.0) / 2.0
}

/// `1 - cos x` without cancellation for small `x`.
pub(crate) fn one_minus_cos(x: f64) -> f64 {
    let s = sin(0.5 * x);
    2.0 * s * s
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = 6_371_000.0;
    const H: f64 = 550_000.0;

    fn leo() -> OrbitGeometry {
        OrbitGeometry::new(R, H).unwrap()
    }

    fn phi(x: f64) -> ZenithAngle {
        ZenithAngle::new(x).unwrap()
    }

    fn theta(x: f64) -> ElevationAngle {
        ElevationAngle::new(x).unwrap()
    }

    /// Independent inverse: bisection on the forward map.
    fn zenith_by_bisection(g: &OrbitGeometry, target: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, g.phi_horizon_rad());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            // elevation decreases with phi
            if g.elevation_rad(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn alpha_and_horizon_for_550_km() {
        let g = leo();
        assert!((g.alpha() - 0.920_531_715_070_076_6).abs() < 1e-15);
        assert!((g.phi_horizon_rad() - 0.401_356_975_327_341_2).abs() < 1e-14);
        assert!((g.phi_horizon_rad().to_degrees() - 23.0).abs() < 0.05);
    }

    #[test]
    fn tiny_altitude_sees_only_the_subsatellite_point() {
        let g = OrbitGeometry::new(R, 1e-3).unwrap();
        assert!(1.0 - g.alpha() < 1e-9);
        assert!(g.phi_horizon_rad() < 1e-4);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(OrbitGeometry::new(0.0, H).is_err());
        assert!(OrbitGeometry::new(R, -1.0).is_err());
        assert!(OrbitGeometry::new(f64::NAN, H).is_err());
        assert!(OrbitGeometry::new(R, f64::INFINITY).is_err());
    }

    #[test]
    fn elevation_endpoints_and_reference_value() {
        let g = leo();
        let top = g.elevation_from_zenith(phi(0.0)).unwrap();
        assert_eq!(top.radians(), FRAC_PI_2);
        let edge = g.elevation_from_zenith(g.phi_horizon()).unwrap();
        assert!(edge.radians().abs() < 1e-12);
        let mid = g.elevation_from_zenith(phi(0.2)).unwrap();
        assert!((mid.radians() - 0.291_152_279_956_197_8).abs() < 1e-13);
    }

    #[test]
    fn elevation_rejects_angles_past_the_horizon() {
        let g = leo();
        assert!(g.elevation_from_zenith(phi(0.41)).is_err());
        assert!(ZenithAngle::new(-0.1).is_err());
        assert!(ElevationAngle::new(1.6).is_err());
    }

    #[test]
    fn elevation_strictly_decreasing() {
        let g = leo();
        let n = 1000;
        let mut prev = f64::INFINITY;
        for i in 0..=n {
            let p = g.phi_horizon_rad() * i as f64 / n as f64;
            let t = g.elevation_rad(p);
            assert!(t < prev, "not decreasing at phi={p}");
            prev = t;
        }
    }

    #[test]
    fn zenith_from_elevation_matches_bisection() {
        let g = leo();
        for deg in [0.0, 1.0, 5.0, 10.0, 15.0, 30.0, 45.0, 60.0, 89.0, 90.0] {
            let t: f64 = f64::to_radians(deg);
            let closed = g.zenith_from_elevation(theta(t)).radians();
            let bisect = zenith_by_bisection(&g, t);
            assert!((closed - bisect).abs() < 1e-12, "deg={deg}");
        }
        assert_eq!(g.zenith_from_elevation(theta(FRAC_PI_2)).radians(), 0.0);
        assert_eq!(g.zenith_from_elevation(theta(0.0)).radians(), g.phi_horizon_rad());
        let p10 = g.zenith_from_elevation(theta(10f64.to_radians()));
        assert!((p10.radians() - 0.261_233_562_861_679_8).abs() < 1e-13);
        let back = g.elevation_from_zenith(p10).unwrap().radians();
        assert!((back - 10f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn slant_range_reference_values() {
        let g = leo();
        assert_eq!(g.slant_range(phi(0.0)).unwrap(), H);
        let horizon = g.slant_range(g.phi_horizon()).unwrap();
        assert!((horizon - 2_703_812.123_650_606).abs() < 1e-6);
        let tangent = libm::sqrt((R + H) * (R + H) - R * R);
        assert!((horizon - tangent).abs() < 1e-6);
        let d = g.slant_range(phi(0.2)).unwrap();
        assert!((d - 1_435_401.098_815_828_9).abs() < 1e-6);
        let mut prev = 0.0;
        for i in 0..=500 {
            let d = g.slant_range_m(g.phi_horizon_rad() * i as f64 / 500.0);
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn cap_fraction_values() {
        assert_eq!(cap_fraction(phi(0.0)), 0.0);
        assert!((cap_fraction(phi(PI)) - 1.0).abs() < 1e-15);
        assert!((cap_fraction(phi(0.401358)) - 0.039_734_342_618_530_73).abs() < 1e-15);
        for i in 0..=100 {
            let x = PI * i as f64 / 100.0;
            let sum = cap_fraction(phi(x)) + cap_fraction(phi(PI - x));
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }
}
