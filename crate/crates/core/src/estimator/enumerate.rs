//! Exact statistics by enumerating every loop of a given length, and ratio
//! limits from convolution tables.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use super::curve::{Curve, CurvePoint};
use super::experiments::{AreaEvaluator, AreaFn};
use crate::error::{Error, Result};
use crate::group::metric::Metric;
use crate::group::{GroupElement, GroupSpec, LazyWord, Letter};
use crate::walk::table::sweep_tables;
use crate::walk::TableOptions;

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// All loops of length `n`, each carrying probability `1 / loop_count`
/// under the uniform measure on loops.
#[derive(Clone, Debug)]
pub struct LoopEnumeration {
    pub group: String,
    pub n: usize,
    /// `(2d + 1)^n`.
    pub words: u128,
    /// Loops in lexicographic order of the lazy alphabet.
    pub loops: Vec<LazyWord>,
    pub area_fn: Option<AreaFn>,
    /// Area of each loop, when an area function was given.
    pub areas: Vec<u64>,
    /// `marginals[t]`: number of loops with `d(e, w(t)) = k`, keyed by `k`.
    pub marginals: Vec<BTreeMap<u32, u64>>,
}

impl LoopEnumeration {
    pub fn loop_count(&self) -> u64 {
        self.loops.len() as u64
    }

    pub fn loop_probability(&self) -> Ratio<u128> {
        Ratio::new(1, self.loops.len() as u128)
    }

    /// Exact mean area.
    pub fn mean_area(&self) -> Option<Ratio<u128>> {
        self.area_fn?;
        let total: u128 = self.areas.iter().map(|&a| a as u128).sum();
        Some(Ratio::new(total, self.loops.len() as u128))
    }

    pub fn area_distribution(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for &a in &self.areas {
            *out.entry(a).or_insert(0) += 1;
        }
        out
    }

    /// Exact `E[d(e, w(t))]`.
    pub fn mean_distance(&self, t: usize) -> Ratio<u128> {
        let total: u128 = self.marginals[t].iter().map(|(&k, &c)| k as u128 * c as u128).sum();
        Ratio::new(total, self.loops.len() as u128)
    }
}

fn walk(
    spec: &GroupSpec,
    moves: &[(Letter, GroupElement)],
    metric: &Metric,
    n: usize,
    word: &mut Vec<Letter>,
    at: GroupElement,
    out: &mut Vec<LazyWord>,
) -> Result<()> {
    let remaining = n - word.len();
    if remaining == 0 {
        if at.is_zero() {
            out.push(LazyWord::new(word.clone()));
        }
        return Ok(());
    }
    // no way back within the remaining steps
    match metric.norm(&at) {
        Ok(d) if d as usize > remaining => return Ok(()),
        Ok(_) => {}
        Err(Error::CapExceeded { .. }) => return Ok(()),
        Err(e) => return Err(e),
    }
    for (l, g) in moves {
        word.push(*l);
        walk(spec, moves, metric, n, word, spec.mul(&at, g)?, out)?;
        word.pop();
    }
    Ok(())
}

/// Every loop of length `n`, with exact area and distance statistics.
pub fn enumerate_loops(
    spec: &GroupSpec,
    n: usize,
    area: Option<AreaFn>,
    budget: u128,
) -> Result<LoopEnumeration> {
    let alphabet = spec.alphabet();
    let words = (alphabet.len() as u128)
        .checked_pow(n as u32)
        .filter(|&w| w <= budget)
        .ok_or(Error::BudgetExceeded { budget: budget.min(usize::MAX as u128) as usize })?;
    let moves: Vec<(Letter, GroupElement)> =
        alphabet.iter().map(|&l| Ok((l, spec.letter_element(l)?))).collect::<Result<_>>()?;
    let metric = Metric::new(spec, (n / 2).max(1) as u32)?;
    let loops: Vec<LazyWord> = if n == 0 {
        vec![LazyWord::empty()]
    } else {
        let parts: Vec<Vec<LazyWord>> = moves
            .par_iter()
            .map(|(l, g)| {
                let mut out = Vec::new();
                walk(spec, &moves, &metric, n, &mut vec![*l], *g, &mut out)?;
                Ok(out)
            })
            .collect::<Result<_>>()?;
        parts.into_iter().flatten().collect()
    };
    let areas = match area {
        Some(f) => {
            let eval = AreaEvaluator::new(spec, f, n)?;
            loops.par_iter().map(|w| eval.area(w)).collect::<Result<_>>()?
        }
        None => Vec::new(),
    };
    let mut marginals = vec![BTreeMap::new(); n + 1];
    for w in &loops {
        for (t, g) in spec.trace(w)?.prefixes.iter().enumerate() {
            *marginals[t].entry(metric.norm(g)?).or_insert(0u64) += 1;
        }
    }
    Ok(LoopEnumeration { group: spec.name(), n, words, loops, area_fn: area, areas, marginals })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactShiftReport {
    pub s: usize,
    pub t: usize,
    /// Distribution of `d(w(s), w(t))`.
    pub shifted: BTreeMap<u32, u64>,
    /// Distribution of `d(e, w(t - s))`.
    pub direct: BTreeMap<u32, u64>,
    pub identical: bool,
}

/// Exact comparison of `d(w(s), w(t))` and `d(e, w(t - s))` under the
/// uniform measure on loops, for every `0 <= s < t <= n`.
pub fn shift_invariance_exact(
    spec: &GroupSpec,
    enumeration: &LoopEnumeration,
) -> Result<Vec<ExactShiftReport>> {
    let n = enumeration.n;
    let metric = Metric::new(spec, (n / 2).max(1) as u32)?;
    let traces: Vec<Vec<GroupElement>> =
        enumeration.loops.iter().map(|w| Ok(spec.trace(w)?.prefixes)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for s in 0..n {
        for t in s + 1..=n {
            let mut shifted = BTreeMap::new();
            for p in &traces {
                *shifted.entry(metric.distance(&p[s], &p[t])?).or_insert(0u64) += 1;
            }
            let direct = enumeration.marginals[t - s].clone();
            let identical = shifted == direct;
            out.push(ExactShiftReport { s, t, shifted, direct, identical });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSeries {
    pub x: String,
    /// `p^(n)(x) / p^(n)(e)` at each `n` where `x` is in the support.
    pub curve: Curve,
    /// Lengths at which `x` was outside the support.
    pub missing: Vec<u64>,
    /// Lengths at which the ratio decreased from the previous one.
    pub monotonicity_violations: Vec<u64>,
    /// `L` of the least-squares fit `ratio ~ L + c / n`.
    pub fitted_limit: Option<f64>,
}

/// Ratios `p^(n)(x) / p^(n)(e)` from exact convolution powers.
pub fn ratio_limit_check(
    spec: &GroupSpec,
    xs: &[LazyWord],
    n_list: &[usize],
    opts: TableOptions,
) -> Result<Vec<RatioSeries>> {
    if n_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Domain("ratio lengths must be strictly increasing".into()));
    }
    let targets: Vec<GroupElement> = xs.iter().map(|w| spec.eval_word(w)).collect::<Result<_>>()?;
    let n_max = n_list.last().copied().unwrap_or(0);
    let mut ratios: Vec<Vec<(u64, Option<f64>)>> = vec![Vec::new(); xs.len()];
    let mut step = 0usize;
    sweep_tables(spec, n_max, opts, |table| {
        if n_list.contains(&step) {
            let at_e = table.get(&spec.identity());
            for (k, x) in targets.iter().enumerate() {
                let p = table.get(x);
                let r = (p > 0.0 && at_e > 0.0).then(|| p / at_e);
                ratios[k].push((step as u64, r));
            }
        }
        step += 1;
        Ok(())
    })?;
    xs.iter()
        .zip(ratios)
        .map(|(x, series)| {
            let present: Vec<(u64, f64)> =
                series.iter().filter_map(|&(n, r)| r.map(|r| (n, r))).collect();
            let missing = series.iter().filter(|p| p.1.is_none()).map(|p| p.0).collect();
            let monotonicity_violations =
                present.windows(2).filter(|p| p[1].1 < p[0].1).map(|p| p[1].0).collect();
            let curve =
                Curve::new(present.iter().map(|&(n, r)| CurvePoint::exact(n, r)).collect())?;
            Ok(RatioSeries {
                x: x.to_string(),
                curve,
                missing,
                monotonicity_violations,
                fitted_limit: fit_limit(&present),
            })
        })
        .collect()
}

/// Intercept of least squares `y = L + c / n`, skipping `n = 0`.
fn fit_limit(points: &[(u64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0).map(|&(n, r)| (1.0 / n as f64, r)).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - sxy / sxx * mx)
}
