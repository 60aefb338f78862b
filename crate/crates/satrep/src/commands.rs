//! Command implementations. Each returns the tables it produced; writing
//! them is left to the caller.

use satrep_core::channel::{fspl_gain, mean_excess_gain, p_los};
use satrep_core::geometry::{ElevationAngle, ZenithAngle};
use satrep_core::link_analysis::{LinkModel, CONDITIONAL_TABLE_POINTS};
use satrep_core::montecarlo::SuccessTarget;
use satrep_core::repetition::{effective_duty_cycle, repetitions};
use satrep_core::stats::Estimate;
use satrep_core::sweep::logspace;
use satrep_core::zenith_distribution::avg_point_count;

use crate::config::{apply_override, Config};
use crate::figures::{self, Failures};
use crate::output::{format_float, Cell, Table};
use crate::{parallel, CliError};

fn dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Closed-form and quadrature results for the configured scenario.
pub fn analytic(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let s = cfg.scenario()?;
    let m = LinkModel::new(&s)?;
    let k = cfg.constellation.k;
    let r = m.p_global(k)?;
    let g = &s.geometry;
    let phi_max = s.policy.phi_max_rad;

    let mut summary = Table::new("analytic_summary", &["quantity", "value"]);
    let rows: [(&str, Cell); 12] = [
        ("alpha", g.alpha().into()),
        ("phi_horizon_deg", g.phi_horizon_rad().to_degrees().into()),
        ("phi_max_deg", phi_max.to_degrees().into()),
        ("theta_min_deg", cfg.repetition.theta_min_deg.into()),
        ("max_repetitions", m.zenith().profile().repetitions_at(phi_max).into()),
        (
            "active_devices",
            avg_point_count(g, &s.channel, &s.policy, s.policy.phi_max())?.into(),
        ),
        ("mean_interference_w", r.mean_interference_w.into()),
        ("mean_interference_dbm", dbm(r.mean_interference_w).into()),
        ("noise_w", s.budget.noise_power_w.into()),
        ("p_success_avg", r.p_success_avg.into()),
        ("p_spot", r.p_spot.into()),
        ("p_global", r.p_global.into()),
    ];
    for (q, v) in rows {
        summary.push(vec![q.into(), v]);
    }
    summary.note("k", k.to_string());

    let mut conditional = Table::new(
        "analytic_conditional",
        &[
            "phi_deg",
            "theta_deg",
            "duty_cycle",
            "repetitions",
            "p_single",
            "p_repeated",
            "zenith_cdf",
            "zenith_pdf",
        ],
    );
    let mut failures = Failures::default();
    for c in m.conditional_table(CONDITIONAL_TABLE_POINTS) {
        let phi = ZenithAngle::new(c.phi_rad)?;
        conditional.push(vec![
            c.phi_rad.to_degrees().into(),
            c.theta_rad.to_degrees().into(),
            m.zenith().profile().at(c.phi_rad).into(),
            c.repetitions.into(),
            c.p_single.into(),
            c.p_repeated.into(),
            failures.cell(|| format!("cdf at phi={}", c.phi_rad), m.zenith().cdf(phi)),
            failures.cell(|| format!("pdf at phi={}", c.phi_rad), m.zenith().pdf(phi)),
        ]);
    }
    failures.attach(&mut conditional);
    Ok(vec![summary, conditional])
}

fn estimate_row(table: &mut Table, quantity: &str, analytic: f64, e: &Estimate) {
    table.push(vec![
        quantity.into(),
        analytic.into(),
        e.value.into(),
        e.std_error.into(),
        e.n.into(),
        e.z_score(analytic).into(),
    ]);
}

/// Monte Carlo estimates next to their analytic values.
pub fn simulate(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let s = cfg.scenario()?;
    let sim = cfg.sim_config();
    let m = LinkModel::new(&s)?;
    let k = cfg.constellation.k;
    let mut summary = Table::new(
        "simulate_summary",
        &["quantity", "analytic", "mc", "mc_std_error", "samples", "z_score"],
    );
    let mut tables = Vec::new();
    if sim.outputs.interference {
        let e = parallel::estimate_interference(&s, &sim)?;
        estimate_row(&mut summary, "mean_interference_w", m.mean_interference(), &e);
    }
    if sim.outputs.p_success || sim.outputs.p_global {
        let e = parallel::estimate_success(&m, &sim, SuccessTarget::Averaged)?;
        let p_avg = m.p_success_avg()?;
        if sim.outputs.p_success {
            estimate_row(&mut summary, "p_success_avg", p_avg, &e);
        }
        if sim.outputs.p_global {
            let spot = m.p_spot(k)?;
            let scaled = Estimate {
                value: spot * e.value,
                std_error: spot * e.std_error,
                n: e.n,
            };
            estimate_row(&mut summary, "p_global", spot * p_avg, &scaled);
        }
    }
    if sim.outputs.zenith_cdf {
        let ecdf = parallel::estimate_zenith_cdf(&s, &sim)?;
        let sampler = m.zenith().sampler()?;
        let ks = ecdf.ks_distance(|x| {
            sampler
                .cdf(ZenithAngle::new(x).expect("sample in range"))
                .unwrap_or(f64::NAN)
        });
        let mut t = Table::new("simulate_zenith_cdf", &["phi_deg", "cdf_analytic", "cdf_mc"]);
        let phi_max = s.policy.phi_max_rad;
        for i in 0..=100 {
            let phi = phi_max * f64::from(i) / 100.0;
            t.push(vec![
                phi.to_degrees().into(),
                m.zenith().cdf(ZenithAngle::new(phi)?)?.into(),
                ecdf.eval(phi).into(),
            ]);
        }
        t.note("ks_distance", format_float(ks));
        t.note("samples", sim.n_zenith_samples.to_string());
        tables.push(t);
    }
    summary.note("interference_model", format!("{:?}", cfg.sim.interference));
    summary.note("k", k.to_string());
    tables.insert(0, summary);
    Ok(tables)
}

pub fn sweep(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let r = figures::run_sweep(cfg)?;
    Ok(figures::sweep_tables(cfg, "sweep", &r))
}

/// Quantities available to `custom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CustomOp {
    PLos,
    SlantRangeM,
    PathGainDb,
    MeanExcessGain,
    DutyCycle,
    Repetitions,
    ZenithCdf,
    ZenithPdf,
    PSingle,
    PRepeated,
    MeanInterferenceW,
    PSuccessAvg,
    PSpot,
    PGlobal,
}

impl CustomOp {
    /// Evaluated at one angle rather than once per scenario.
    pub fn pointwise(self) -> bool {
        !matches!(
            self,
            CustomOp::MeanInterferenceW | CustomOp::PSuccessAvg | CustomOp::PSpot | CustomOp::PGlobal
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            CustomOp::PLos => "p_los",
            CustomOp::SlantRangeM => "slant_range_m",
            CustomOp::PathGainDb => "path_gain_db",
            CustomOp::MeanExcessGain => "mean_excess_gain",
            CustomOp::DutyCycle => "duty_cycle",
            CustomOp::Repetitions => "repetitions",
            CustomOp::ZenithCdf => "zenith_cdf",
            CustomOp::ZenithPdf => "zenith_pdf",
            CustomOp::PSingle => "p_single",
            CustomOp::PRepeated => "p_repeated",
            CustomOp::MeanInterferenceW => "mean_interference_w",
            CustomOp::PSuccessAvg => "p_success_avg",
            CustomOp::PSpot => "p_spot",
            CustomOp::PGlobal => "p_global",
        }
    }
}

/// One operation evaluated over a swept variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpec {
    pub op: CustomOp,
    /// `elevation_deg` or `zenith_deg` for pointwise operations, otherwise a
    /// numeric config key such as `repetition.a`.
    pub var: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl CustomSpec {
    fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(CliError::Usage(
                "custom sweep needs finite bounds and at least one point".into(),
            ));
        }
        if self.log {
            if !(self.from > 0.0 && self.to > 0.0) {
                return Err(CliError::Usage("log spacing needs positive bounds".into()));
            }
            return Ok(logspace(self.from, self.to, self.points));
        }
        Ok(match self.points {
            1 => vec![self.from],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.to
                    } else {
                        self.from + (self.to - self.from) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        })
    }
}

fn pointwise_value(cfg: &Config, m: &LinkModel, op: CustomOp, phi: ZenithAngle) -> Result<Cell, CliError> {
    let s = m.scenario();
    let (g, c, p) = (&s.geometry, &s.channel, &s.policy);
    Ok(match op {
        CustomOp::PLos => p_los(g, c, phi)?.into(),
        CustomOp::SlantRangeM => g.slant_range(phi)?.into(),
        CustomOp::PathGainDb => (10.0 * fspl_gain(g, c, phi)?.log10()).into(),
        CustomOp::MeanExcessGain => mean_excess_gain(g, c, phi)?.into(),
        CustomOp::DutyCycle => effective_duty_cycle(g, c, p, phi)?.into(),
        CustomOp::Repetitions => repetitions(g, c, p, phi)?.into(),
        CustomOp::ZenithCdf => m.zenith().cdf(phi)?.into(),
        CustomOp::ZenithPdf => m.zenith().pdf(phi)?.into(),
        CustomOp::PSingle => m.p_success_single(phi)?.into(),
        CustomOp::PRepeated => m.p_success_repeated(phi)?.into(),
        _ => unreachable!("scenario-level op {op:?} with config {}", cfg.hash()),
    })
}

fn scenario_value(cfg: &Config, op: CustomOp) -> Result<Cell, CliError> {
    let m = LinkModel::new(&cfg.scenario()?)?;
    Ok(match op {
        CustomOp::MeanInterferenceW => m.mean_interference().into(),
        CustomOp::PSuccessAvg => m.p_success_avg()?.into(),
        CustomOp::PSpot => m.p_spot(cfg.constellation.k)?.into(),
        CustomOp::PGlobal => m.p_global(cfg.constellation.k)?.p_global.into(),
        _ => unreachable!("pointwise op {op:?}"),
    })
}

pub fn custom(cfg: &Config, spec: &CustomSpec) -> Result<Vec<Table>, CliError> {
    let xs = spec.values()?;
    let mut table = Table::with_columns("custom", vec![spec.var.clone(), spec.op.name().to_string()]);
    let mut failures = Failures::default();
    if spec.op.pointwise() {
        let m = LinkModel::new(&cfg.scenario()?)?;
        let g = m.scenario().geometry;
        for x in xs {
            let phi = match spec.var.as_str() {
                "elevation_deg" => ElevationAngle::new(x.to_radians()).map(|t| g.zenith_from_elevation(t)),
                "zenith_deg" => ZenithAngle::new(x.to_radians()),
                other => {
                    return Err(CliError::Usage(format!(
                        "{} is evaluated per angle; sweep elevation_deg or zenith_deg, not {other}",
                        spec.op.name()
                    )))
                }
            };
            let v = phi
                .map_err(CliError::from)
                .and_then(|phi| pointwise_value(cfg, &m, spec.op, phi));
            let cell = failures.cell(|| format!("{}={x}", spec.var), v);
            table.push(vec![x.into(), cell]);
        }
    } else {
        let base = toml::Table::try_from(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
        for x in xs {
            let mut doc = base.clone();
            apply_override(&mut doc, &format!("{}={}", spec.var, format_float(x)))?;
            let v = Config::from_toml_str(&toml::to_string(&doc).expect("table serializes"), &[])
                .map_err(CliError::from)
                .and_then(|c| scenario_value(&c, spec.op));
            let cell = failures.cell(|| format!("{}={x}", spec.var), v);
            table.push(vec![x.into(), cell]);
        }
    }
    table.note("op", spec.op.name());
    failures.attach(&mut table);
    Ok(vec![table])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn custom_p_los_is_monotone_in_elevation() {
        let spec = CustomSpec {
            op: CustomOp::PLos,
            var: "elevation_deg".into(),
            from: 0.0,
            to: 90.0,
            points: 91,
            log: false,
        };
        let t = &custom(&Config::default(), &spec).unwrap()[0];
        let ys: Vec<f64> = t.floats("p_los").into_iter().map(Option::unwrap).collect();
        assert_eq!(ys.len(), 91);
        assert!(ys.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(ys[0], 0.0);
        assert_eq!(ys[90], 1.0);
    }

    #[test]
    fn custom_scenario_sweep_records_failures() {
        let spec = CustomSpec {
            op: CustomOp::MeanInterferenceW,
            var: "repetition.a".into(),
            from: 0.0,
            to: 2.0,
            points: 5,
            log: false,
        };
        let t = &custom(&Config::default(), &spec).unwrap()[0];
        let ys = t.floats("mean_interference_w");
        assert!(ys[0].is_some() && ys[1].is_some());
        assert!(ys[4].is_none());
        assert!(t
            .notes
            .iter()
            .any(|(k, v)| k.starts_with("failure") && v.contains("repetition.a")));
    }

    #[test]
    fn pointwise_ops_reject_config_vars() {
        let spec = CustomSpec {
            op: CustomOp::PSingle,
            var: "repetition.a".into(),
            from: 0.0,
            to: 1.0,
            points: 2,
            log: false,
        };
        assert!(matches!(custom(&Config::default(), &spec), Err(CliError::Usage(_))));
    }
}
