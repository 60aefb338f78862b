//! Satellite-to-ground channel: LoS probability, free-space gain and the
//! clutter excess gain.
//!
//! The excess *loss* in dB is Gaussian, `N(mu, sigma^2)`, with one pair of
//! parameters for the LoS state and one for NLoS. The linear gain
//! `zeta = 10^(-loss/10) = exp(-rho * loss)` is therefore a two-component
//! lognormal mixture with `ln zeta ~ N(-rho mu, (rho sigma)^2)` and
//! `rho = ln(10) / 10`. This is the only module that works in dB.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{erfc, exp, log};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{OrbitGeometry, ZenithAngle};
use crate::{Error, Result};

/// `ln(10) / 10`: converts a dB quantity into a natural-log exponent.
pub const RHO: f64 = core::f64::consts::LN_10 / 10.0;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Clutter and carrier parameters.
///
/// The defaults describe a suburban-like environment. They are placeholders:
/// override them for any concrete deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Clutter parameter of `p_LoS = exp(-beta cot theta)`.
    pub beta: f64,
    pub mu_los_db: f64,
    pub sigma_los_db: f64,
    pub mu_nlos_db: f64,
    pub sigma_nlos_db: f64,
    pub frequency_hz: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            beta: 0.3,
            mu_los_db: 1.0,
            sigma_los_db: 2.0,
            mu_nlos_db: 20.0,
            sigma_nlos_db: 8.0,
            frequency_hz: 2.0e9,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid("beta", self.beta, "must be positive"));
        }
        for (name, v) in [("mu_los_db", self.mu_los_db), ("mu_nlos_db", self.mu_nlos_db)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, v, "must be finite"));
            }
        }
        for (name, v) in [
            ("sigma_los_db", self.sigma_los_db),
            ("sigma_nlos_db", self.sigma_nlos_db),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, v, "must be non-negative"));
            }
        }
        if self.mu_nlos_db < self.mu_los_db {
            return Err(Error::invalid(
                "mu_nlos_db",
                self.mu_nlos_db,
                "NLoS excess loss must be at least the LoS excess loss",
            ));
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(Error::invalid("frequency_hz", self.frequency_hz, "must be positive"));
        }
        Ok(())
    }

    /// Excess-gain mixture for a link with the given LoS probability.
    pub fn mixture(&self, p_los: f64) -> ExcessGainMixture {
        ExcessGainMixture {
            p_los,
            los: LogNormalDb {
                mu_db: self.mu_los_db,
                sigma_db: self.sigma_los_db,
            },
            nlos: LogNormalDb {
                mu_db: self.mu_nlos_db,
                sigma_db: self.sigma_nlos_db,
            },
        }
    }

    pub(crate) fn p_los_from_cot(&self, cot_theta: f64) -> f64 {
        if cot_theta.is_infinite() {
            0.0
        } else {
            exp(-self.beta * cot_theta)
        }
    }

    /// `(c / (4 pi d f))^2` for a slant range `d` in metres.
    pub(crate) fn fspl_gain_at_range(&self, d_m: f64) -> f64 {
        let x = SPEED_OF_LIGHT_M_S / (4.0 * PI * d_m * self.frequency_hz);
        x * x
    }
}

/// Gain whose loss in dB is `N(mu_db, sigma_db^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalDb {
    pub mu_db: f64,
    pub sigma_db: f64,
}

impl LogNormalDb {
    pub fn mean(&self) -> f64 {
        let s = RHO * self.sigma_db;
        exp(-RHO * self.mu_db + 0.5 * s * s)
    }

    /// `P(gain <= x)`, a step at `exp(-rho mu)` when `sigma = 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let z = log(x) + RHO * self.mu_db;
        if self.sigma_db == 0.0 {
            return if z >= 0.0 { 1.0 } else { 0.0 };
        }
        0.5 * erfc(-z / (RHO * self.sigma_db) * FRAC_1_SQRT_2)
    }

    /// `P(gain > x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let z = log(x) + RHO * self.mu_db;
        if self.sigma_db == 0.0 {
            return if z >= 0.0 { 0.0 } else { 1.0 };
        }
        0.5 * erfc(z / (RHO * self.sigma_db) * FRAC_1_SQRT_2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n: f64 = rng.sample(StandardNormal);
        exp(-RHO * (self.mu_db + self.sigma_db * n))
    }
}

/// LoS/NLoS mixture of two [`LogNormalDb`] components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessGainMixture {
    pub p_los: f64,
    pub los: LogNormalDb,
    pub nlos: LogNormalDb,
}

impl ExcessGainMixture {
    pub fn mean(&self) -> f64 {
        self.p_los * self.los.mean() + (1.0 - self.p_los) * self.nlos.mean()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.p_los * self.los.cdf(x) + (1.0 - self.p_los) * self.nlos.cdf(x)).clamp(0.0, 1.0)
    }

    pub fn sf(&self, x: f64) -> f64 {
        (self.p_los * self.los.sf(x) + (1.0 - self.p_los) * self.nlos.sf(x)).clamp(0.0, 1.0)
    }

    /// Picks the state with a Bernoulli(`p_los`) draw, then the gain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.p_los {
            self.los.sample(rng)
        } else {
            self.nlos.sample(rng)
        }
    }
}

/// `exp(-beta sin phi / (cos phi - alpha))`; zero at the horizon.
pub fn p_los(geom: &OrbitGeometry, params: &ChannelParams, phi: ZenithAngle) -> Result<f64> {
    geom.check_visible(phi)?;
    Ok(params.p_los_from_cot(geom.cot_elevation(phi.radians())))
}

/// Reciprocal free-space path loss at the slant range of `phi`.
pub fn fspl_gain(geom: &OrbitGeometry, params: &ChannelParams, phi: ZenithAngle) -> Result<f64> {
    let d = geom.slant_range(phi)?;
    Ok(params.fspl_gain_at_range(d))
}

pub fn excess_gain_mixture(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    phi: ZenithAngle,
) -> Result<ExcessGainMixture> {
    Ok(params.mixture(p_los(geom, params, phi)?))
}

/// Mean of the excess gain, `p_LoS E[zeta_LoS] + p_NLoS E[zeta_NLoS]`.
pub fn mean_excess_gain(geom: &OrbitGeometry, params: &ChannelParams, phi: ZenithAngle) -> Result<f64> {
    Ok(excess_gain_mixture(geom, params, phi)?.mean())
}

pub fn excess_gain_cdf(geom: &OrbitGeometry, params: &ChannelParams, phi: ZenithAngle, x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::invalid("x", x, "excess gain must be positive"));
    }
    Ok(excess_gain_mixture(geom, params, phi)?.cdf(x))
}

pub fn sample_excess_gain<R: Rng + ?Sized>(
    geom: &OrbitGeometry,
    params: &ChannelParams,
    phi: ZenithAngle,
    rng: &mut R,
) -> Result<f64> {
    Ok(excess_gain_mixture(geom, params, phi)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_distance;
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn leo() -> OrbitGeometry {
        OrbitGeometry::new(6_371_000.0, 550_000.0).unwrap()
    }

    fn phi(x: f64) -> ZenithAngle {
        ZenithAngle::new(x).unwrap()
    }

    fn example_params() -> ChannelParams {
        ChannelParams::default()
    }

    #[test]
    fn rho_value() {
        assert!((RHO - 0.230_258_509_299_404_6).abs() < 1e-16);
    }

    #[test]
    fn p_los_reference_values() {
        let g = leo();
        let p = example_params();
        assert_eq!(p_los(&g, &p, phi(0.0)).unwrap(), 1.0);
        assert_eq!(p_los(&g, &p, g.phi_horizon()).unwrap(), 0.0);
        let v = p_los(&g, &p, phi(0.2)).unwrap();
        assert!((v - 0.367_472_230_301_489_9).abs() < 1e-13);
        // both forms of the LoS law
        let theta = g.elevation_from_zenith(phi(0.2)).unwrap().radians();
        let via_theta = exp(-p.beta / libm::tan(theta));
        assert!((v - via_theta).abs() < 1e-12);
    }

    #[test]
    fn p_los_monotone_in_phi_and_beta() {
        let g = leo();
        let mut prev = 2.0;
        for i in 0..200 {
            let x = g.phi_horizon_rad() * i as f64 / 200.0;
            let v = p_los(&g, &example_params(), phi(x)).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        let mut prev = 2.0;
        for i in 1..=200 {
            let params = ChannelParams {
                beta: i as f64 * 0.05,
                ..example_params()
            };
            let v = p_los(&g, &params, phi(0.3)).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn free_space_gain() {
        let g = leo();
        let p = example_params();
        let l0 = fspl_gain(&g, &p, phi(0.0)).unwrap();
        let loss_db = -10.0 * libm::log10(l0);
        assert!((loss_db - 153.275_636_925_047_87).abs() < 1e-9);
        let d = 550_000.0;
        assert!((p.fspl_gain_at_range(d) / p.fspl_gain_at_range(2.0 * d) - 4.0).abs() < 1e-12);
        let p2 = ChannelParams {
            frequency_hz: 4.0e9,
            ..p
        };
        assert!((p.fspl_gain_at_range(d) / p2.fspl_gain_at_range(d) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mean_excess_gain_values() {
        let flat = ChannelParams {
            mu_los_db: 0.0,
            sigma_los_db: 0.0,
            mu_nlos_db: 0.0,
            sigma_nlos_db: 0.0,
            ..example_params()
        };
        assert_eq!(flat.mixture(0.37).mean(), 1.0);
        let g = leo();
        let zenith_los = ChannelParams {
            mu_los_db: 0.0,
            sigma_los_db: 0.0,
            ..example_params()
        };
        assert_eq!(mean_excess_gain(&g, &zenith_los, phi(0.0)).unwrap(), 1.0);
        let m = example_params().mixture(0.5).mean();
        assert!((m - 0.468_869_557_349_657_7).abs() < 1e-14);
    }

    #[test]
    fn cdf_edge_cases() {
        let point = ChannelParams {
            mu_los_db: 0.0,
            sigma_los_db: 0.0,
            mu_nlos_db: 0.0,
            sigma_nlos_db: 0.0,
            ..example_params()
        }
        .mixture(0.4);
        assert_eq!(point.cdf(0.999), 0.0);
        assert_eq!(point.cdf(1.0), 1.0);
        assert_eq!(point.cdf(1.001), 1.0);

        let los_only = example_params().mixture(1.0);
        let median = exp(-RHO * example_params().mu_los_db);
        assert!((los_only.cdf(median) - 0.5).abs() < 1e-15);

        let g = leo();
        assert!(excess_gain_cdf(&g, &example_params(), phi(0.1), 0.0).is_err());
        assert!(excess_gain_cdf(&g, &example_params(), phi(0.1), -1.0).is_err());
        let mix = example_params().mixture(0.5);
        assert!(mix.cdf(1e-300) < 1e-12);
        assert!(mix.cdf(1e300) > 1.0 - 1e-12);
        assert!((mix.cdf(0.5) - 0.570_282_611_607_658_2).abs() < 1e-14);
    }

    #[test]
    fn sampler_degenerate_mixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = ChannelParams {
            mu_los_db: 3.0,
            sigma_los_db: 0.0,
            mu_nlos_db: 3.0,
            sigma_nlos_db: 0.0,
            ..example_params()
        };
        let mix = params.mixture(0.5);
        let expected = libm::pow(10.0, -0.3);
        for _ in 0..100 {
            assert!((mix.sample(&mut rng) - expected).abs() < 1e-15);
        }
        // p_LoS = 1 at the zenith: NLoS (20 dB mean) never appears
        let g = leo();
        let tight = ChannelParams {
            sigma_los_db: 0.5,
            ..example_params()
        };
        for _ in 0..1000 {
            let z = sample_excess_gain(&g, &tight, phi(0.0), &mut rng).unwrap();
            assert!(z > 0.3, "NLoS-like draw {z}");
        }
    }

    #[test]
    fn sampler_matches_cdf() {
        let mix = example_params().mixture(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let mut xs: Vec<f64> = (0..n).map(|_| mix.sample(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let ks = ks_distance(&xs, |x| mix.cdf(x));
        assert!(ks < 0.002, "KS = {ks}");

        // empirical CDF at 0.5 within 3 standard errors
        let below = xs.partition_point(|&x| x <= 0.5) as f64 / n as f64;
        let f = mix.cdf(0.5);
        let se = libm::sqrt(f * (1.0 - f) / n as f64);
        assert!((below - f).abs() < 3.0 * se);
    }
}
