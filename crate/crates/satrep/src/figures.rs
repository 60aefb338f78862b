//! Plot-ready tables for figures 2 to 9.
//!
//! Each figure fixes the tuning factor, minimum elevation and SINR threshold
//! named in its caption and takes every other input from the configuration.

use satrep_core::geometry::{ElevationAngle, ZenithAngle};
use satrep_core::link_analysis::{LinkModel, Scenario};
use satrep_core::repetition::DutyCycleProfile;
use satrep_core::sweep::{logspace, CoverageObjective, SweepResult};

use crate::config::{db_to_linear, Config};
use crate::output::{Cell, Table};
use crate::{parallel, CliError};

/// Elevation grid for the per-angle figures: 0 to 90 degrees in 0.5 steps.
pub fn elevation_grid_deg() -> Vec<f64> {
    (0..=180).map(|i| f64::from(i) * 0.5).collect()
}

/// `1e-5`, `5e-5`, `0`, `1` style labels for column names.
pub fn label(x: f64) -> String {
    let s = format!("{x:e}");
    s.strip_suffix("e0").map(str::to_string).unwrap_or(s)
}

fn deg(x: f64) -> f64 {
    x.to_degrees()
}

/// Collects per-cell failures so a figure run can continue past them.
#[derive(Debug, Default)]
pub struct Failures(Vec<String>);

impl Failures {
    pub fn cell<T: Into<Cell>, E: std::fmt::Display>(
        &mut self,
        what: impl FnOnce() -> String,
        r: Result<T, E>,
    ) -> Cell {
        match r {
            Ok(v) => v.into(),
            Err(e) => {
                self.0.push(format!("{}: {e}", what()));
                Cell::Missing
            }
        }
    }

    pub fn attach(self, table: &mut Table) {
        for (i, f) in self.0.into_iter().enumerate() {
            table.note(format!("failure_{i}"), f);
        }
    }
}

/// Config scenario with the caption's tuning factor, minimum elevation and
/// optionally SINR threshold.
pub fn tuned(cfg: &Config, a: f64, theta_min_deg: f64, gamma_db: Option<f64>) -> Result<Scenario, CliError> {
    let mut s = cfg
        .scenario()?
        .with_tuning(a, ElevationAngle::new(theta_min_deg.to_radians())?)?;
    if let Some(g) = gamma_db {
        s.budget.sinr_threshold = db_to_linear(g);
    }
    Ok(s)
}

fn per_elevation(
    cfg: &Config,
    name: &str,
    prefix: &str,
    value: impl Fn(&DutyCycleProfile, f64) -> Cell,
) -> Result<Table, CliError> {
    let a_values = [1e-5, 5e-5, 2e-4];
    let theta_mins = [5.0, 15.0];
    let mut curves = Vec::new();
    let mut columns = vec!["theta_deg".to_string(), "phi_deg".to_string()];
    for &t in &theta_mins {
        for &a in &a_values {
            let s = tuned(cfg, a, t, None)?;
            curves.push((t, DutyCycleProfile::new(&s.geometry, &s.channel, &s.policy)));
            columns.push(format!("{prefix}_a{}_tmin{}", label(a), label(t)));
        }
    }
    let geom = cfg.geometry()?;
    let mut table = Table::with_columns(name, columns);
    for theta in elevation_grid_deg() {
        let phi = geom
            .zenith_from_elevation(ElevationAngle::new(theta.to_radians())?)
            .radians();
        let mut row = vec![theta.into(), deg(phi).into()];
        for (t, profile) in &curves {
            row.push(if theta >= *t {
                value(profile, phi)
            } else {
                Cell::Missing
            });
        }
        table.push(row);
    }
    table.note("a_values", "1e-5 5e-5 2e-4");
    table.note("theta_min_deg", "5 15");
    table.note("blank_cells", "elevations below theta_min");
    Ok(table)
}

/// Effective duty cycle against elevation.
pub fn figure2(cfg: &Config) -> Result<Vec<Table>, CliError> {
    Ok(vec![per_elevation(cfg, "figure2", "d", |p, phi| p.at(phi).into())?])
}

/// Repetition count against elevation.
pub fn figure3(cfg: &Config) -> Result<Vec<Table>, CliError> {
    Ok(vec![per_elevation(cfg, "figure3", "n", |p, phi| {
        p.repetitions_at(phi).into()
    })?])
}

/// Zenith-angle CDF, analytic and Monte Carlo, at `theta_min = 10 deg`.
pub fn figure4(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let a_values = [0.0, 1e-5, 1.0];
    let sim = cfg.sim_config();
    let mut models = Vec::new();
    let mut ecdfs = Vec::new();
    for &a in &a_values {
        let s = tuned(cfg, a, 10.0, None)?;
        ecdfs.push(parallel::estimate_zenith_cdf(&s, &sim)?);
        models.push(LinkModel::new(&s)?);
    }
    let phi_max = models[0].zenith().phi_max_rad();
    let mut columns = vec!["phi_deg".to_string(), "theta_deg".to_string()];
    columns.extend(a_values.iter().map(|a| format!("cdf_analytic_a{}", label(*a))));
    columns.extend(a_values.iter().map(|a| format!("cdf_mc_a{}", label(*a))));
    let mut table = Table::with_columns("figure4", columns);
    let geom = cfg.geometry()?;
    let mut failures = Failures::default();
    for i in 0..=100 {
        let phi = phi_max * f64::from(i) / 100.0;
        let mut row = vec![
            deg(phi).into(),
            deg(geom.elevation_from_zenith(ZenithAngle::new(phi)?)?.radians()).into(),
        ];
        for (m, a) in models.iter().zip(a_values) {
            row.push(failures.cell(
                || format!("cdf a={a} phi={phi}"),
                m.zenith().cdf(ZenithAngle::new(phi)?),
            ));
        }
        for e in &ecdfs {
            row.push(e.eval(phi).into());
        }
        table.push(row);
    }
    for ((m, e), a) in models.iter().zip(&ecdfs).zip(a_values) {
        let sampler = m.zenith().sampler()?;
        let ks = e.ks_distance(|x| {
            sampler
                .cdf(ZenithAngle::new(x).expect("sample in range"))
                .unwrap_or(f64::NAN)
        });
        table.note(format!("ks_distance_a{}", label(a)), crate::output::format_float(ks));
    }
    table.note("theta_min_deg", "10");
    table.note("mc_samples", sim.n_zenith_samples.to_string());
    failures.attach(&mut table);
    Ok(vec![table])
}

/// Mean interference against the tuning factor, analytic and Monte Carlo.
pub fn figure5(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let theta_mins = [5.0, 10.0, 15.0];
    let sim = cfg.sim_config();
    let mut columns = vec!["a".to_string()];
    for t in theta_mins {
        let t = label(t);
        columns.push(format!("i_analytic_w_tmin{t}"));
        columns.push(format!("i_mc_w_tmin{t}"));
        columns.push(format!("i_mc_stderr_w_tmin{t}"));
    }
    let mut table = Table::with_columns("figure5", columns);
    let mut failures = Failures::default();
    for a in logspace(1e-6, 1e-3, 13) {
        let mut row = vec![a.into()];
        for t in theta_mins {
            let s = tuned(cfg, a, t, None)?;
            row.push(failures.cell(
                || format!("analytic a={a} tmin={t}"),
                LinkModel::new(&s).map(|m| m.mean_interference()),
            ));
            match parallel::estimate_interference(&s, &sim) {
                Ok(e) => {
                    row.push(e.value.into());
                    row.push(e.std_error.into());
                }
                Err(e) => {
                    row.push(failures.cell(|| format!("mc a={a} tmin={t}"), Err::<f64, _>(e)));
                    row.push(Cell::Missing);
                }
            }
        }
        table.push(row);
    }
    table.note("mc_realizations", sim.n_realizations.to_string());
    failures.attach(&mut table);
    Ok(vec![table])
}

/// Conditional success against elevation at `a = 2e-4`, `gamma = -10 dB`.
pub fn figure6(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let curves = [
        (2e-4, 5.0, "p_rep_tmin5"),
        (2e-4, 10.0, "p_rep_tmin10"),
        (2e-4, 15.0, "p_rep_tmin15"),
        (0.0, 10.0, "p_norep_tmin10"),
    ];
    let mut columns = vec!["theta_deg".to_string(), "phi_deg".to_string()];
    let mut models = Vec::new();
    for (a, t, name) in curves {
        models.push((t, LinkModel::new(&tuned(cfg, a, t, Some(-10.0))?)?));
        columns.push(name.to_string());
    }
    let geom = cfg.geometry()?;
    let mut table = Table::with_columns("figure6", columns);
    let mut failures = Failures::default();
    for theta in elevation_grid_deg() {
        let phi = geom.zenith_from_elevation(ElevationAngle::new(theta.to_radians())?);
        let mut row = vec![theta.into(), deg(phi.radians()).into()];
        for (t, m) in &models {
            row.push(if theta >= *t {
                failures.cell(|| format!("theta={theta} tmin={t}"), m.p_success_repeated(phi))
            } else {
                Cell::Missing
            });
        }
        table.push(row);
    }
    table.note("sinr_threshold_db", "-10");
    table.note("blank_cells", "elevations below theta_min");
    failures.attach(&mut table);
    Ok(vec![table])
}

/// Average success in one admittance region against `theta_min`, with and
/// without repetition, at `a = 5e-5`, `gamma = -10 dB`.
pub fn figure7(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let mut table = Table::new("figure7", &["theta_min_deg", "p_avg_rep", "p_avg_norep"]);
    let mut failures = Failures::default();
    for t in 1..=45 {
        let t = f64::from(t);
        let mut row = vec![t.into()];
        for a in [5e-5, 0.0] {
            let s = tuned(cfg, a, t, Some(-10.0))?;
            row.push(failures.cell(
                || format!("a={a} tmin={t}"),
                LinkModel::new(&s).and_then(|m| m.p_success_avg()),
            ));
        }
        table.push(row);
    }
    table.note("a", "5e-5");
    table.note("sinr_threshold_db", "-10");
    failures.attach(&mut table);
    Ok(vec![table])
}

/// Global success against `theta_min` in 1..=45 degrees at `a = 5e-5`,
/// `gamma = -10 dB`.
///
/// `theta_min = 0` is left out: the admittance region then reaches the
/// horizon, where `cot(theta)` diverges and a sliver of devices with up to
/// `1 / D0` repeats dominates the zenith law.
pub fn figure8(cfg: &Config) -> Result<Vec<Table>, CliError> {
    let k = cfg.constellation.k;
    let mut table = Table::new("figure8", &["theta_min_deg", "p_global", "p_spot", "p_avg"]);
    let mut failures = Failures::default();
    let mut best: Option<(f64, f64)> = None;
    for t in 1..=45 {
        let t = f64::from(t);
        let s = tuned(cfg, 5e-5, t, Some(-10.0))?;
        match LinkModel::new(&s).and_then(|m| m.p_global(k)) {
            Ok(r) => {
                if best.map_or(true, |(_, p)| r.p_global > p) {
                    best = Some((t, r.p_global));
                }
                table.push(vec![
                    t.into(),
                    r.p_global.into(),
                    r.p_spot.into(),
                    r.p_success_avg.into(),
                ]);
            }
            Err(e) => {
                let c = failures.cell(|| format!("tmin={t}"), Err::<f64, _>(e));
                table.push(vec![t.into(), c, Cell::Missing, Cell::Missing]);
            }
        }
    }
    table.note("a", "5e-5");
    table.note("sinr_threshold_db", "-10");
    table.note("k", k.to_string());
    if let Some((t, p)) = best {
        table.note("argmax_theta_min_deg", crate::output::format_float(t));
        table.note("max_p_global", crate::output::format_float(p));
    }
    failures.attach(&mut table);
    Ok(vec![table])
}

/// Surface and optimal frontier of the global success over the sweep grid.
pub fn figure9(cfg: &Config) -> Result<Vec<Table>, CliError> {
    Ok(sweep_tables(cfg, "figure9", &run_sweep(cfg)?))
}

pub fn run_sweep(cfg: &Config) -> Result<SweepResult, CliError> {
    let grid = cfg.sweep_grid();
    let objective = CoverageObjective {
        base: cfg.scenario()?,
        k: grid.k,
    };
    Ok(parallel::run_sweep(&objective, &grid)?)
}

pub fn sweep_tables(cfg: &Config, stem: &str, r: &SweepResult) -> Vec<Table> {
    let mut surface = Table::new(
        format!("{stem}_surface"),
        &[
            "a",
            "theta_min_deg",
            "level",
            "p_global",
            "p_spot",
            "p_avg",
            "mean_interference_w",
            "error",
        ],
    );
    for row in &r.rows {
        let mut cells = vec![row.a.into(), deg(row.theta_min_rad).into(), u64::from(row.level).into()];
        match &row.outcome {
            Ok(p) => {
                cells.extend([
                    p.p_global.into(),
                    p.p_spot.into(),
                    p.p_avg.into(),
                    p.mean_interference_w.into(),
                ]);
                cells.push(Cell::Missing);
            }
            Err(e) => {
                cells.extend([Cell::Missing, Cell::Missing, Cell::Missing, Cell::Missing]);
                cells.push(Cell::Text(e.to_string()));
            }
        }
        surface.push(cells);
    }
    let mut frontier = Table::new(format!("{stem}_frontier"), &["theta_min_deg", "a_opt", "p_global"]);
    for p in &r.frontier {
        frontier.push(vec![deg(p.theta_min_rad).into(), p.a.into(), p.p_global.into()]);
    }
    let f = crate::output::format_float;
    for t in [&mut surface, &mut frontier] {
        t.note("k", r.grid.k.to_string());
        t.note("sinr_threshold_db", f(cfg.budget.sinr_threshold_db));
        t.note(
            "tie_break",
            "largest p_global, then smallest theta_min, then smallest a",
        );
        t.note("optimum_a", f(r.optimum.a));
        t.note("optimum_theta_min_deg", f(deg(r.optimum.theta_min_rad)));
        t.note("optimum_p_global", f(r.optimum.p_global));
        t.note("failed_points", r.failures().count().to_string());
        if let Some(info) = r.refinement {
            t.note("refine_levels_run", info.levels_run.to_string());
            t.note("refine_converged", info.converged.to_string());
            t.note("refine_half_width_log10_a", f(info.half_width_log10_a));
            t.note("refine_half_width_theta_min_deg", f(deg(info.half_width_theta_rad)));
        }
    }
    vec![surface, frontier]
}

pub fn figure(cfg: &Config, n: u32) -> Result<Vec<Table>, CliError> {
    match n {
        2 => figure2(cfg),
        3 => figure3(cfg),
        4 => figure4(cfg),
        5 => figure5(cfg),
        6 => figure6(cfg),
        7 => figure7(cfg),
        8 => figure8(cfg),
        9 => figure9(cfg),
        _ => Err(CliError::Usage(format!("no figure {n}; choose 2 to 9"))),
    }
}
