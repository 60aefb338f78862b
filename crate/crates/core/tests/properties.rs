use proptest::prelude::*;
use satrep_core::channel::ChannelParams;
use satrep_core::geometry::{ElevationAngle, OrbitGeometry, ZenithAngle};
use satrep_core::link_analysis::{success_after_repeats, LinkModel, Scenario};
use satrep_core::repetition::{effective_duty_cycle, repetitions, RepetitionPolicy};
use satrep_core::zenith_distribution::ZenithDistribution;

fn tuned(a: f64, theta_min_deg: f64) -> Scenario {
    Scenario::reference()
        .with_tuning(a, ElevationAngle::new(theta_min_deg.to_radians()).unwrap())
        .unwrap()
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (
        -7.0f64..-2.5,
        1.0f64..60.0,
        0.05f64..1.5,
        0.0f64..4.0,
        0.0f64..6.0,
        10.0f64..30.0,
        0.0f64..12.0,
        -20.0f64..10.0,
    )
        .prop_map(|(log_a, theta, beta, mu_l, s_l, mu_n, s_n, gamma_db)| {
            let mut s = tuned(10f64.powf(log_a), theta);
            s.channel = ChannelParams {
                beta,
                mu_los_db: mu_l,
                sigma_los_db: s_l,
                mu_nlos_db: mu_n,
                sigma_nlos_db: s_n,
                ..s.channel
            };
            s.budget.sinr_threshold = 10f64.powf(gamma_db / 10.0);
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn zenith_elevation_round_trip(h_km in 200.0f64..36_000.0, u in 0.0f64..=1.0) {
        let g = OrbitGeometry::new(6_371_000.0, h_km * 1e3).unwrap();
        let phi = u * (g.phi_horizon_rad() - 1e-9);
        let theta = g.elevation_from_zenith(ZenithAngle::new(phi).unwrap()).unwrap();
        let back = g.zenith_from_elevation(theta).radians();
        prop_assert!((back - phi).abs() <= 1e-12, "phi {phi} -> {back}");
    }

    #[test]
    fn slant_range_is_monotone(u in 0.0f64..0.999, v in 0.0f64..0.999) {
        let g = Scenario::reference().geometry;
        let (x, y) = (u.min(v) * g.phi_horizon_rad(), u.max(v) * g.phi_horizon_rad());
        let dx = g.slant_range(ZenithAngle::new(x).unwrap()).unwrap();
        let dy = g.slant_range(ZenithAngle::new(y).unwrap()).unwrap();
        prop_assert!(dx <= dy);
        prop_assert!(dx >= g.altitude_m() * (1.0 - 1e-15));
    }

    #[test]
    fn duty_cycle_and_repeats_grow_with_zenith(a in 0.0f64..1e-2, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let s = tuned(a, 5.0);
        let pm = s.policy.phi_max_rad;
        let (x, y) = (u.min(v) * pm, u.max(v) * pm);
        let dx = effective_duty_cycle(&s.geometry, &s.channel, &s.policy, ZenithAngle::new(x).unwrap()).unwrap();
        let dy = effective_duty_cycle(&s.geometry, &s.channel, &s.policy, ZenithAngle::new(y).unwrap()).unwrap();
        prop_assert!(s.policy.d0 <= dx && dx <= dy && dy <= 1.0);
        let nx = repetitions(&s.geometry, &s.channel, &s.policy, ZenithAngle::new(x).unwrap()).unwrap();
        let ny = repetitions(&s.geometry, &s.channel, &s.policy, ZenithAngle::new(y).unwrap()).unwrap();
        prop_assert!(1 <= nx && nx <= ny);
    }

    #[test]
    fn repeats_never_hurt(p in 0.0f64..=1.0, n in 1u64..100_000) {
        let pn = success_after_repeats(p, n);
        prop_assert!((0.0..=1.0).contains(&pn));
        prop_assert!(pn >= p);
        prop_assert!(success_after_repeats(p, n + 1) >= pn);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn probabilities_stay_in_unit_interval(s in scenario_strategy(), u in 0.0f64..=1.0) {
        let m = LinkModel::new(&s).unwrap();
        let phi = ZenithAngle::new(u * s.policy.phi_max_rad).unwrap();
        let p1 = m.p_success_single(phi).unwrap();
        let pn = m.p_success_repeated(phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!((0.0..=1.0).contains(&pn));
        prop_assert!(pn >= p1);
        let r = m.p_global(3).unwrap();
        for p in [r.p_success_avg, r.p_spot, r.p_global] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
        let cdf = m.zenith().cdf(phi).unwrap();
        prop_assert!((0.0..=1.0).contains(&cdf));
    }

    #[test]
    fn zenith_cdf_is_monotone(a in 0.0f64..1e-2, theta in 1.0f64..60.0) {
        let s = tuned(a, theta);
        let z = ZenithDistribution::new(&s.geometry, &s.channel, &s.policy).unwrap();
        let mut last = 0.0;
        for i in 0..=32 {
            let x = s.policy.phi_max_rad * f64::from(i) / 32.0;
            let c = z.cdf(ZenithAngle::new(x).unwrap()).unwrap();
            prop_assert!(c >= last - 1e-14);
            last = c;
        }
        prop_assert!((last - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interference_grows_with_tuning(log_a in -7.0f64..-2.5, theta in 1.0f64..45.0) {
        let a = 10f64.powf(log_a);
        let lo = LinkModel::new(&tuned(a, theta)).unwrap().mean_interference();
        let hi = LinkModel::new(&tuned(a * 1.5, theta)).unwrap().mean_interference();
        prop_assert!(hi > lo);
    }

    #[test]
    fn single_frame_success_monotone_in_budget(theta in 1.0f64..45.0, u in 0.0f64..=1.0, k in 1.1f64..10.0) {
        let s = tuned(5e-5, theta);
        let phi = ZenithAngle::new(u * s.policy.phi_max_rad).unwrap();
        let p = |s: &Scenario| LinkModel::new(s).unwrap().p_success_single(phi).unwrap();
        let base = p(&s);
        let mut t = s;
        t.budget.sinr_threshold *= k;
        prop_assert!(p(&t) <= base);
        let mut t = s;
        t.budget.noise_power_w *= k;
        prop_assert!(p(&t) <= base);
        let mut t = s;
        t.budget.tx_power_w *= k;
        prop_assert!(p(&t) >= base);
        let mut t = s;
        t.budget.kappa /= k;
        prop_assert!(p(&t) >= base);
    }
}

#[test]
fn admittance_bound_respects_horizon() {
    let g = Scenario::reference().geometry;
    let p = RepetitionPolicy::with_min_elevation(&g, 1e-6, 0.0, ElevationAngle::new(0.0).unwrap(), 1e-8).unwrap();
    assert!(p.phi_max_rad < g.phi_horizon_rad());
    assert!(g.phi_horizon_rad() - p.phi_max_rad <= 1e-9 + 1e-15);
}
