//! Grid search over the tuning factor `a` and the minimum elevation
//! `theta_min` for the global success probability.
//!
//! Grid points are independent, so evaluation is delegated to a batch
//! evaluator: [`run_sweep`] evaluates sequentially, and callers with a thread
//! pool pass their own batch function to [`run_sweep_with`]. Results are
//! placed by index, so the outcome does not depend on evaluation order.
//! Ties in the argmax are broken by smallest `theta_min`, then smallest `a`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::FRAC_PI_2;

use libm::{log10, pow};

use crate::geometry::ElevationAngle;
use crate::link_analysis::{LinkModel, Scenario};
use crate::{Error, Result};

/// Refinement stops once a level improves the optimum by less than this.
pub const REFINE_CONVERGENCE: f64 = 1e-6;

/// Points per axis evaluated at each refinement level.
const REFINE_POINTS: usize = 5;

/// Largest admissible `theta_min` used when a refinement box is clipped.
const THETA_CEILING: f64 = FRAC_PI_2 - 1e-6;

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (l0, l1) = (log10(lo), log10(hi));
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        pow(10.0, l0 + (l1 - l0) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    /// Sorted tuning factors in `[0, 1]`.
    pub a_values: Vec<f64>,
    /// Sorted minimum elevations in `[0, pi/2)`.
    pub theta_min_values_rad: Vec<f64>,
    /// Satellites in the constellation.
    pub k: u32,
    pub refine_levels: u32,
}

impl SweepGrid {
    /// 25 log-spaced `a` in `[1e-6, 1e-2]` by `theta_min` = 1..=45 degrees.
    pub fn standard(k: u32) -> Self {
        SweepGrid {
            a_values: logspace(1e-6, 1e-2, 25),
            theta_min_values_rad: (1..=45).map(|d| f64::from(d).to_radians()).collect(),
            k,
            refine_levels: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_values.is_empty() || self.theta_min_values_rad.is_empty() {
            return Err(Error::EmptySweep);
        }
        for w in self.a_values.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(Ordering::Less) {
                return Err(Error::invalid("a_values", w[1], "must be strictly increasing"));
            }
        }
        for w in self.theta_min_values_rad.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(Ordering::Less) {
                return Err(Error::invalid("theta_min_values", w[1], "must be strictly increasing"));
            }
        }
        for &a in &self.a_values {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::invalid("a_values", a, "must lie in [0, 1]"));
            }
        }
        for &t in &self.theta_min_values_rad {
            if !(0.0..FRAC_PI_2).contains(&t) {
                return Err(Error::invalid("theta_min_values", t, "must lie in [0, pi/2)"));
            }
        }
        if self.k == 0 {
            return Err(Error::invalid("k", 0.0, "need at least one satellite"));
        }
        Ok(())
    }

    /// Grid points in evaluation order: `theta_min`-major, `a`-minor.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.a_values.len() * self.theta_min_values_rad.len());
        for &t in &self.theta_min_values_rad {
            for &a in &self.a_values {
                out.push((a, t));
            }
        }
        out
    }
}

/// One evaluated `(a, theta_min)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub a: f64,
    pub theta_min_rad: f64,
    pub p_global: f64,
    pub p_spot: f64,
    pub p_avg: f64,
    pub mean_interference_w: f64,
}

impl SweepPoint {
    /// Strictly preferable to `other` under the documented tie-breaking.
    pub fn beats(&self, other: &SweepPoint) -> bool {
        if self.p_global != other.p_global {
            return self.p_global > other.p_global;
        }
        if self.theta_min_rad != other.theta_min_rad {
            return self.theta_min_rad < other.theta_min_rad;
        }
        self.a < other.a
    }
}

/// Anything that scores a `(a, theta_min)` pair.
pub trait Objective {
    fn evaluate(&self, a: f64, theta_min_rad: f64) -> Result<SweepPoint>;
}

impl<F: Fn(f64, f64) -> Result<SweepPoint>> Objective for F {
    fn evaluate(&self, a: f64, theta_min_rad: f64) -> Result<SweepPoint> {
        self(a, theta_min_rad)
    }
}

/// Global success probability of a base scenario retuned to each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageObjective {
    pub base: Scenario,
    pub k: u32,
}

impl Objective for CoverageObjective {
    fn evaluate(&self, a: f64, theta_min_rad: f64) -> Result<SweepPoint> {
        let s = self.base.with_tuning(a, ElevationAngle::new(theta_min_rad)?)?;
        let model = LinkModel::new(&s)?;
        let p_spot = model.p_spot(self.k)?;
        let p_avg = model.p_success_avg()?;
        Ok(SweepPoint {
            a,
            theta_min_rad,
            p_global: p_spot * p_avg,
            p_spot,
            p_avg,
            mean_interference_w: model.mean_interference(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub theta_min_rad: f64,
    /// `Err` marks a missing point, excluded from the argmax.
    pub outcome: Result<SweepPoint>,
    /// 0 for the coarse grid, `n` for refinement level `n`.
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub levels_run: u32,
    pub converged: bool,
    /// Half-widths of the last box searched (`log10 a`, radians).
    pub half_width_log10_a: f64,
    pub half_width_theta_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub rows: Vec<SweepRow>,
    pub optimum: SweepPoint,
    /// Best point for every distinct `theta_min`, in increasing `theta_min`.
    pub frontier: Vec<SweepPoint>,
    pub refinement: Option<Refinement>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }

    pub fn successes(&self) -> impl Iterator<Item = &SweepPoint> {
        self.rows.iter().filter_map(|r| r.outcome.as_ref().ok())
    }
}

fn argmax<'a>(points: impl Iterator<Item = &'a SweepPoint>) -> Option<SweepPoint> {
    let mut best: Option<SweepPoint> = None;
    for p in points {
        if best.as_ref().map_or(true, |b| p.beats(b)) {
            best = Some(*p);
        }
    }
    best
}

fn frontier(rows: &[SweepRow]) -> Vec<SweepPoint> {
    let mut pts: Vec<SweepPoint> = rows.iter().filter_map(|r| r.outcome.as_ref().ok().copied()).collect();
    pts.sort_by(|x, y| x.theta_min_rad.total_cmp(&y.theta_min_rad).then(x.a.total_cmp(&y.a)));
    let mut out: Vec<SweepPoint> = Vec::new();
    for p in pts {
        match out.last_mut() {
            Some(last) if last.theta_min_rad == p.theta_min_rad => {
                if p.beats(last) {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

fn sanitize(outcome: Result<SweepPoint>) -> Result<SweepPoint> {
    match outcome {
        Ok(p) if !p.p_global.is_finite() => Err(Error::invalid("p_global", p.p_global, "not finite")),
        other => other,
    }
}

fn finish(grid: SweepGrid, rows: Vec<SweepRow>, refinement: Option<Refinement>) -> Result<SweepResult> {
    let optimum = argmax(rows.iter().filter_map(|r| r.outcome.as_ref().ok())).ok_or(Error::EmptySweep)?;
    let frontier = frontier(&rows);
    Ok(SweepResult {
        grid,
        rows,
        optimum,
        frontier,
        refinement,
    })
}

/// Builds a [`SweepResult`] from outcomes listed in [`SweepGrid::points`]
/// order.
pub fn assemble(grid: &SweepGrid, outcomes: Vec<Result<SweepPoint>>) -> Result<SweepResult> {
    grid.validate()?;
    let points = grid.points();
    assert_eq!(points.len(), outcomes.len(), "one outcome per grid point");
    let rows = points
        .into_iter()
        .zip(outcomes)
        .map(|((a, t), outcome)| SweepRow {
            a,
            theta_min_rad: t,
            outcome: sanitize(outcome),
            level: 0,
        })
        .collect();
    finish(grid.clone(), rows, None)
}

/// Evaluates every grid point with `batch` (which must return one outcome per
/// input point, in order), then refines `grid.refine_levels` times.
pub fn run_sweep_with<B>(mut batch: B, grid: &SweepGrid) -> Result<SweepResult>
where
    B: FnMut(&[(f64, f64)]) -> Vec<Result<SweepPoint>>,
{
    grid.validate()?;
    let outcomes = batch(&grid.points());
    let coarse = assemble(grid, outcomes)?;
    if grid.refine_levels == 0 {
        return Ok(coarse);
    }
    refine_optimum_with(batch, &coarse, grid.refine_levels)
}

pub fn run_sweep<O: Objective + ?Sized>(objective: &O, grid: &SweepGrid) -> Result<SweepResult> {
    run_sweep_with(|pts| sequential(objective, pts), grid)
}

fn sequential<O: Objective + ?Sized>(objective: &O, pts: &[(f64, f64)]) -> Vec<Result<SweepPoint>> {
    pts.iter().map(|&(a, t)| objective.evaluate(a, t)).collect()
}

/// Largest gap between `x` and its neighbours in `values`.
fn neighbour_gap(values: &[f64], x: f64) -> f64 {
    let Some(i) = values.iter().position(|&v| v == x) else {
        return 0.0;
    };
    let mut gap: f64 = 0.0;
    if i > 0 {
        gap = gap.max(x - values[i - 1]);
    }
    if i + 1 < values.len() {
        gap = gap.max(values[i + 1] - x);
    }
    gap
}

fn axis(center: f64, half: f64, lo: f64, hi: f64) -> Vec<f64> {
    if half == 0.0 {
        return alloc::vec![center];
    }
    let mut v: Vec<f64> = (0..REFINE_POINTS)
        .map(|i| {
            let t = -1.0 + 2.0 * i as f64 / (REFINE_POINTS - 1) as f64;
            (center + half * t).clamp(lo, hi)
        })
        .collect();
    v.dedup();
    v
}

/// Local grid refinement around the incumbent optimum.
///
/// The first box spans the neighbouring coarse grid values (in `log10 a`
/// and `theta_min`); each level evaluates a 5x5 grid over the box, moves to
/// the best point and shrinks the box by 4. Stops early when a level gains
/// less than [`REFINE_CONVERGENCE`].
pub fn refine_optimum_with<B>(mut batch: B, coarse: &SweepResult, levels: u32) -> Result<SweepResult>
where
    B: FnMut(&[(f64, f64)]) -> Vec<Result<SweepPoint>>,
{
    if levels == 0 {
        return Ok(coarse.clone());
    }
    let mut rows = coarse.rows.clone();
    let mut best = coarse.optimum;
    let log_a_values: Vec<f64> = coarse
        .grid
        .a_values
        .iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| log10(a))
        .collect();
    let mut half_a = if best.a > 0.0 {
        neighbour_gap(&log_a_values, log10(best.a))
    } else {
        0.0
    };
    let mut half_t = neighbour_gap(&coarse.grid.theta_min_values_rad, best.theta_min_rad);
    let mut info = Refinement {
        levels_run: 0,
        converged: false,
        half_width_log10_a: half_a,
        half_width_theta_rad: half_t,
    };

    for level in 1..=levels {
        let a_axis: Vec<f64> = if best.a > 0.0 {
            axis(log10(best.a), half_a, f64::NEG_INFINITY, 0.0)
                .into_iter()
                .map(|la| if la == log10(best.a) { best.a } else { pow(10.0, la) })
                .collect()
        } else {
            alloc::vec![best.a]
        };
        let t_axis = axis(best.theta_min_rad, half_t, 0.0, THETA_CEILING);
        let mut pts = Vec::new();
        for &t in &t_axis {
            for &a in &a_axis {
                if a == best.a && t == best.theta_min_rad {
                    continue;
                }
                pts.push((a, t));
            }
        }
        let outcomes = batch(&pts);
        assert_eq!(outcomes.len(), pts.len(), "one outcome per refinement point");
        let before = best.p_global;
        for (&(a, t), outcome) in pts.iter().zip(outcomes) {
            let outcome = sanitize(outcome);
            if let Ok(p) = &outcome {
                if p.beats(&best) {
                    best = *p;
                }
            }
            rows.push(SweepRow {
                a,
                theta_min_rad: t,
                outcome,
                level,
            });
        }
        info.levels_run = level;
        info.half_width_log10_a = half_a;
        info.half_width_theta_rad = half_t;
        half_a /= 4.0;
        half_t /= 4.0;
        if best.p_global - before < REFINE_CONVERGENCE {
            info.converged = true;
            break;
        }
    }
    finish(coarse.grid.clone(), rows, Some(info))
}

pub fn refine_optimum<O: Objective + ?Sized>(objective: &O, coarse: &SweepResult, levels: u32) -> Result<SweepResult> {
    refine_optimum_with(|pts| sequential(objective, pts), coarse, levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a0: f64, t0: f64) -> impl Fn(f64, f64) -> Result<SweepPoint> {
        move |a: f64, t: f64| {
            let la = log10(a) - log10(a0);
            let p = 1.0 - la * la - (t - t0) * (t - t0);
            Ok(SweepPoint {
                a,
                theta_min_rad: t,
                p_global: p,
                p_spot: 0.0,
                p_avg: 0.0,
                mean_interference_w: 0.0,
            })
        }
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1e-6, 1e-2, 25);
        assert_eq!(v.len(), 25);
        assert_eq!(v[0], 1e-6);
        assert_eq!(v[24], 1e-2);
        assert!((v[6] - 1e-5).abs() < 1e-18);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_point_grid() {
        let grid = SweepGrid {
            a_values: alloc::vec![1e-4],
            theta_min_values_rad: alloc::vec![0.2],
            k: 1,
            refine_levels: 0,
        };
        let r = run_sweep(&synthetic(1e-3, 0.3), &grid).unwrap();
        assert_eq!(r.optimum.a, 1e-4);
        assert_eq!(r.optimum.theta_min_rad, 0.2);
        assert_eq!(r.frontier.len(), 1);
    }

    #[test]
    fn ties_prefer_small_theta_then_small_a() {
        let flat = |a: f64, t: f64| {
            Ok(SweepPoint {
                a,
                theta_min_rad: t,
                p_global: 0.5,
                p_spot: 0.0,
                p_avg: 0.0,
                mean_interference_w: 0.0,
            })
        };
        let grid = SweepGrid {
            a_values: alloc::vec![1e-5, 1e-4],
            theta_min_values_rad: alloc::vec![0.1, 0.2],
            k: 1,
            refine_levels: 0,
        };
        let r = run_sweep(&flat, &grid).unwrap();
        assert_eq!((r.optimum.a, r.optimum.theta_min_rad), (1e-5, 0.1));
    }

    #[test]
    fn failed_points_are_recorded_and_skipped() {
        let flaky = |a: f64, t: f64| {
            if a > 1e-4 {
                Err(Error::EmptySweep)
            } else {
                synthetic(1e-2, 0.3)(a, t)
            }
        };
        let grid = SweepGrid {
            a_values: alloc::vec![1e-5, 1e-4, 1e-3],
            theta_min_values_rad: alloc::vec![0.1, 0.3],
            k: 1,
            refine_levels: 0,
        };
        let r = run_sweep(&flaky, &grid).unwrap();
        assert_eq!(r.failures().count(), 2);
        assert_eq!(r.optimum.a, 1e-4);
        assert_eq!(r.optimum.theta_min_rad, 0.3);
        let all_fail = |_: f64, _: f64| -> Result<SweepPoint> { Err(Error::EmptySweep) };
        assert_eq!(run_sweep(&all_fail, &grid).unwrap_err(), Error::EmptySweep);
    }

    #[test]
    fn evaluation_order_does_not_matter() {
        let grid = SweepGrid {
            a_values: logspace(1e-6, 1e-2, 9),
            theta_min_values_rad: (1..=7).map(|d| f64::from(d) * 0.05).collect(),
            k: 1,
            refine_levels: 0,
        };
        let obj = synthetic(3e-4, 0.17);
        let forward = run_sweep(&obj, &grid).unwrap();
        let reversed = run_sweep_with(
            |pts: &[(f64, f64)]| {
                let mut out: Vec<_> = pts.iter().rev().map(|&(a, t)| obj(a, t)).collect();
                out.reverse();
                out
            },
            &grid,
        )
        .unwrap();
        assert_eq!(forward, reversed);
        let best = forward.successes().map(|p| p.p_global).fold(f64::MIN, f64::max);
        assert_eq!(forward.optimum.p_global, best);
        assert!(forward.frontier.iter().all(|p| p.p_global <= best));
    }

    #[test]
    fn refinement_recovers_synthetic_optimum() {
        let (a0, t0) = (3.7e-4, 0.213);
        let obj = synthetic(a0, t0);
        let grid = SweepGrid {
            a_values: logspace(1e-6, 1e-2, 9),
            theta_min_values_rad: (1..=9).map(|d| f64::from(d) * 0.05).collect(),
            k: 1,
            refine_levels: 0,
        };
        let coarse = run_sweep(&obj, &grid).unwrap();
        assert_eq!(refine_optimum(&obj, &coarse, 0).unwrap(), coarse);
        let fine = refine_optimum(&obj, &coarse, 8).unwrap();
        let info = fine.refinement.unwrap();
        assert!(fine.optimum.p_global >= coarse.optimum.p_global);
        assert!((log10(fine.optimum.a) - log10(a0)).abs() <= info.half_width_log10_a);
        assert!((fine.optimum.theta_min_rad - t0).abs() <= info.half_width_theta_rad);
        let best = fine.successes().map(|p| p.p_global).fold(f64::MIN, f64::max);
        assert_eq!(fine.optimum.p_global, best);
    }
}
