//! Conditioned transition probabilities and Gaussian heat-kernel bounds.

use serde::Serialize;

use super::measure::step_measure;
use super::table::{sweep_tables, ProbabilityTable, TableOptions};
use crate::error::{Error, Result};
use crate::group::ball::growth_degree;
use crate::group::metric::{bfs_ball, Metric};
use crate::group::{GroupElement, GroupSpec};

/// Transition `x -> y` at time `t` of the walk conditioned to be back at the
/// identity at time `n`. `tables[k]` must hold `p^(k)` for `k <= max(t, n-t-1)`.
pub fn hat_p(
    spec: &GroupSpec,
    x: &GroupElement,
    y: &GroupElement,
    t: usize,
    n: usize,
    tables: &[ProbabilityTable],
) -> Result<f64> {
    if t >= n {
        return Err(Error::Domain(format!("time {t} is not before the end {n}")));
    }
    let remaining = n - t - 1;
    if tables.len() <= t.max(remaining) {
        return Err(Error::Domain(format!(
            "need tables up to {} steps, got {}",
            t.max(remaining),
            tables.len().saturating_sub(1)
        )));
    }
    if !(tables[t].get(x) > 0.0) {
        return Err(Error::Domain(format!("{x} is not reachable at time {t}")));
    }
    let measure = step_measure(spec)?;
    let step = spec.left_quotient(x, y)?;
    let mut numerator = 0.0;
    let mut total = 0.0;
    for (_, g, p) in &measure.support {
        let w = spec.mul(x, g)?;
        let weight = p * tables[remaining].get(&spec.inverse(&w)?);
        total += weight;
        if *g == step {
            numerator = weight;
        }
    }
    if !(total > 0.0) {
        return Err(Error::Domain(format!("no return to the identity from {x} at time {t}")));
    }
    Ok(numerator / total)
}

#[derive(Clone, Debug)]
pub struct HscOptions {
    /// Lower bound is checked on `B(e, n / ball_divisor)`.
    pub ball_divisor: f64,
    /// Candidate Gaussian widths.
    pub width_grid: Vec<f64>,
    pub table: TableOptions,
}

impl Default for HscOptions {
    fn default() -> Self {
        HscOptions {
            ball_divisor: 8.0,
            width_grid: (0..=60).map(|i| 0.5 * 1.1f64.powi(i)).collect(),
            table: TableOptions::default(),
        }
    }
}

/// Lower-bound failure at a point of the checked ball.
#[derive(Clone, Debug, Serialize)]
pub struct HscViolation {
    pub n: usize,
    pub element: Vec<i64>,
    pub distance: u32,
    pub probability: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HscLevel {
    pub n: usize,
    pub return_probability: f64,
    pub support: usize,
    pub lost_mass: f64,
    pub max_distance: u32,
    /// Smallest `C` for the upper bound at this level alone, at the fitted `C'`.
    pub upper_constant: f64,
    /// Smallest `C` for the lower bound at this level alone, at the fitted `C'`.
    pub lower_constant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HscReport {
    pub group: String,
    pub growth_degree: u32,
    pub ball_divisor: f64,
    /// `(C', smallest C >= 1)` over the width grid such that both bounds hold
    /// at every level.
    pub frontier: Vec<(f64, f64)>,
    /// Pair on the frontier minimising `C * C'`.
    pub constant: f64,
    pub width: f64,
    pub levels: Vec<HscLevel>,
    pub lower_violations: Vec<HscViolation>,
    /// Points of the checked balls, summed over `n`.
    pub lower_checked: usize,
}

struct Snapshot {
    n: usize,
    /// Largest `p * n^{D/2}` at each distance.
    peak_by_distance: Vec<f64>,
    /// Stored points of the checked ball: `(x, d, p)`.
    ball_points: Vec<(GroupElement, u32, f64)>,
    missing_in_ball: Vec<(GroupElement, u32)>,
    level: HscLevel,
}

/// Fit `p^(n)(x) <= C n^{-D/2} exp(-d^2 / (C' n))` over every stored `x` and
/// every `n` in `n_list`, then test `p^(n)(x) >= C^{-1} n^{-D/2} exp(-C' d^2 / n)`
/// on `B(e, n / C'')`.
pub fn hsc_check(spec: &GroupSpec, n_list: &[usize], opts: &HscOptions) -> Result<HscReport> {
    let d_growth = growth_degree(spec);
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let metric = Metric::new(spec, n_max as u32)?;
    let mut snapshots = Vec::new();
    sweep_tables(spec, n_max, opts.table, |table| {
        let n = table.step_count();
        if n == 0 || !n_list.contains(&n) {
            return Ok(());
        }
        let scale = (n as f64).powf(d_growth as f64 / 2.0);
        let ball_radius = (n as f64 / opts.ball_divisor).floor() as u32;
        let mut peak_by_distance = vec![0.0f64; n + 1];
        let mut ball_points = Vec::new();
        let mut support = 0;
        let mut err = None;
        table.for_each(|g, p| {
            if err.is_some() {
                return;
            }
            match metric.norm(&g) {
                Ok(d) => {
                    support += 1;
                    let peak = &mut peak_by_distance[d as usize];
                    *peak = peak.max(p * scale);
                    if d <= ball_radius {
                        ball_points.push((g, d, p));
                    }
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        // truncated entries inside the checked ball count as zero
        let mut missing_in_ball = Vec::new();
        let ball = bfs_ball(spec, ball_radius, opts.table.budget)?;
        if ball.len() != ball_points.len() {
            for (g, d) in ball {
                if !(table.get(&g) > 0.0) {
                    missing_in_ball.push((g, d));
                }
            }
        }
        let max_distance = peak_by_distance.iter().rposition(|&v| v > 0.0).unwrap_or(0) as u32;
        snapshots.push(Snapshot {
            n,
            peak_by_distance,
            ball_points,
            missing_in_ball,
            level: HscLevel {
                n,
                return_probability: table.get(&spec.identity()),
                support,
                lost_mass: table.lost_mass(),
                max_distance,
                upper_constant: f64::NAN,
                lower_constant: f64::NAN,
            },
        });
        Ok(())
    })?;

    // smallest C for a given C' so that both inequalities hold at level s
    let required = |s: &Snapshot, width: f64| -> (f64, f64) {
        let n = s.n as f64;
        let mut upper: f64 = 0.0;
        for (d, peak) in s.peak_by_distance.iter().enumerate() {
            if *peak > 0.0 {
                upper = upper.max(peak * ((d * d) as f64 / (width * n)).exp());
            }
        }
        let scale = n.powf(d_growth as f64 / 2.0);
        let mut lower: f64 = 0.0;
        for (_, d, p) in &s.ball_points {
            let b = (-width * (*d as f64).powi(2) / n).exp() / scale;
            lower = lower.max(b / p);
        }
        (upper, lower)
    };
    let mut frontier = Vec::with_capacity(opts.width_grid.len());
    for &width in &opts.width_grid {
        let c = snapshots
            .iter()
            .map(|s| {
                let (u, l) = required(s, width);
                u.max(l)
            })
            .fold(1.0f64, f64::max);
        frontier.push((width, c));
    }
    let &(width, constant) = frontier
        .iter()
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| (a.0 * a.1).total_cmp(&(b.0 * b.1)))
        .ok_or_else(|| Error::Domain("empty width grid".into()))?;
    for s in snapshots.iter_mut() {
        let (u, l) = required(s, width);
        s.level.upper_constant = u;
        s.level.lower_constant = l;
    }

    let mut lower_violations = Vec::new();
    let mut lower_checked = 0;
    for s in &snapshots {
        let n = s.n as f64;
        let scale = n.powf(d_growth as f64 / 2.0);
        let bound = |d: u32| (-width * (d as f64).powi(2) / n).exp() / (constant * scale);
        for (g, d, p) in &s.ball_points {
            lower_checked += 1;
            let b = bound(*d);
            if *p < b {
                lower_violations.push(HscViolation {
                    n: s.n,
                    element: g.coords().to_vec(),
                    distance: *d,
                    probability: *p,
                    bound: b,
                });
            }
        }
        for (g, d) in &s.missing_in_ball {
            lower_checked += 1;
            lower_violations.push(HscViolation {
                n: s.n,
                element: g.coords().to_vec(),
                distance: *d,
                probability: 0.0,
                bound: bound(*d),
            });
        }
    }

    Ok(HscReport {
        group: spec.name(),
        growth_degree: d_growth,
        ball_divisor: opts.ball_divisor,
        frontier,
        constant,
        width,
        levels: snapshots.into_iter().map(|s| s.level).collect(),
        lower_violations,
        lower_checked,
    })
}
