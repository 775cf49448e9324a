//! Monte Carlo curves over random loops.
//!
//! Sample `i` at length `n` comes from substream `(n << 32) | i` of the
//! master seed, so every point of every curve is reproducible on its own and
//! points at different lengths are independent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{Curve, CurvePoint};
use super::stats::{ks_two_sample, merge_all, KsResult, Moments};
use crate::error::{Error, Result};
use crate::filling::central::central_extension;
use crate::filling::dyadic::Filler;
use crate::filling::search::exact_area_search;
use crate::filling::{centralized_area, verify_certificate, winding_area};
use crate::group::metric::Metric;
use crate::group::{GroupId, GroupSpec, LazyWord};
use crate::walk::{LoopSample, LoopSampler, SamplerKind, TableOptions};

/// Substream index of sample `i` at length `n`.
pub fn sample_index(n: usize, i: u64) -> u64 {
    ((n as u64) << 32) | i
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaFn {
    /// Kernel size in the relator-counting extension (lower proxy).
    Centralized,
    /// Area of the dyadic certificate (upper proxy).
    Dyadic,
    /// Winding number area, exact on `Z^2`.
    Winding,
    /// Exact search; samples over budget count as failures.
    Exact,
}

impl AreaFn {
    pub fn name(self) -> &'static str {
        match self {
            AreaFn::Centralized => "centralized",
            AreaFn::Dyadic => "dyadic",
            AreaFn::Winding => "winding",
            AreaFn::Exact => "exact",
        }
    }
}

pub const EXACT_SEARCH_BUDGET: u64 = 2_000_000;

/// Evaluates one area function on loops of one length.
pub struct AreaEvaluator {
    spec: GroupSpec,
    area: AreaFn,
    filler: Option<Filler>,
}

impl AreaEvaluator {
    pub fn new(spec: &GroupSpec, area: AreaFn, n: usize) -> Result<Self> {
        let filler = match area {
            AreaFn::Dyadic => Some(Filler::new(spec, (n / 2).max(1) as u32)?),
            AreaFn::Centralized if spec.id != GroupId::FreeAbelian(1) => {
                central_extension(spec)?;
                None
            }
            _ => None,
        };
        Ok(AreaEvaluator { spec: spec.clone(), area, filler })
    }

    pub fn area(&self, w: &LazyWord) -> Result<u64> {
        match self.area {
            AreaFn::Centralized => centralized_area(&self.spec, w),
            AreaFn::Winding => winding_area(w),
            AreaFn::Exact => exact_area_search(&self.spec, w, EXACT_SEARCH_BUDGET)?
                .ok_or_else(|| Error::Domain(format!("exact search over budget for {w}"))),
            AreaFn::Dyadic => {
                let cert = self.filler.as_ref().expect("built for dyadic").dyadic(w)?;
                if !verify_certificate(&self.spec, &cert) {
                    return Err(Error::Invariant(format!("dyadic certificate rejected for {w}")));
                }
                Ok(cert.area() as u64)
            }
        }
    }
}

/// A sampled curve with its failure accounting.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SampledCurve {
    pub curve: Curve,
    pub master_seed: u64,
    pub samples_per_point: u64,
    /// Samples that produced no value, per scale.
    pub failures: Vec<(u64, u64)>,
    /// Largest truncated table mass used by the samplers.
    pub lost_mass: f64,
    pub warnings: Vec<String>,
}

impl SampledCurve {
    pub fn partial(&self) -> bool {
        self.failures.iter().any(|&(_, f)| f > 0)
    }
}

/// Order-independent mean and variance of the successful values.
fn accumulate(values: &[Option<f64>]) -> Moments {
    let parts: Vec<Moments> =
        values.chunks(1024).map(|c| c.iter().flatten().copied().collect()).collect();
    merge_all(&parts)
}

pub struct SamplingPlan {
    pub kind: SamplerKind,
    pub samples: u64,
    pub master_seed: u64,
    pub max_attempts: u64,
    pub table: TableOptions,
}

impl SamplingPlan {
    pub fn new(kind: SamplerKind, samples: u64, master_seed: u64) -> Self {
        SamplingPlan {
            kind,
            samples,
            master_seed,
            max_attempts: crate::walk::sampler::DEFAULT_MAX_ATTEMPTS,
            table: TableOptions::default(),
        }
    }

    pub fn sampler(&self, spec: &GroupSpec, n: usize) -> Result<LoopSampler> {
        LoopSampler::new(spec, n, self.kind, self.max_attempts, self.table)
    }

    /// Applies `f` to samples `first..first + count` at length `n`, in
    /// parallel; sampler or evaluation errors become `None`.
    pub fn map_samples<T: Send>(
        &self,
        sampler: &LoopSampler,
        first: u64,
        count: u64,
        f: impl Fn(&LoopSample) -> Result<T> + Sync,
    ) -> Vec<Option<T>> {
        let n = sampler.len();
        (first..first + count)
            .into_par_iter()
            .map(|i| {
                let s = sampler.sample_indexed(self.master_seed, sample_index(n, i)).ok()?;
                f(&s).ok()
            })
            .collect()
    }
}

/// Mean filling area of random loops for each length in `n_list`.
pub fn avg_area_curve(
    spec: &GroupSpec,
    n_list: &[usize],
    area: AreaFn,
    plan: &SamplingPlan,
) -> Result<SampledCurve> {
    if plan.samples == 0 {
        return Err(Error::Domain("no samples requested".into()));
    }
    let mut out = SampledCurve {
        master_seed: plan.master_seed,
        samples_per_point: plan.samples,
        ..Default::default()
    };
    let mut points = Vec::new();
    for &n in n_list {
        let sampler = plan.sampler(spec, n)?;
        out.lost_mass = out.lost_mass.max(sampler.lost_mass());
        let eval = AreaEvaluator::new(spec, area, n)?;
        let values =
            plan.map_samples(&sampler, 0, plan.samples, |s| Ok(eval.area(&s.word)? as f64));
        let m = accumulate(&values);
        if m.count == 0 {
            return Err(Error::Domain(format!("no loops of length {n} were sampled")));
        }
        let failed = plan.samples - m.count;
        if failed > 0 {
            out.warnings.push(format!("{failed} of {} samples failed at n = {n}", plan.samples));
        }
        out.failures.push((n as u64, failed));
        points.push(CurvePoint::from_moments(n as u64, &m));
    }
    out.curve = Curve::new(points)?;
    Ok(out)
}

/// Mean `|l|_1` of the relator-counting kernel coordinates.
pub fn central_moment_curve(
    spec: &GroupSpec,
    n_list: &[usize],
    plan: &SamplingPlan,
) -> Result<SampledCurve> {
    central_extension(spec)?;
    avg_area_curve(spec, n_list, AreaFn::Centralized, plan)
}

/// `E[d(e, w(t))^m]` over loops of length `n`, for each `t` in `t_list`.
pub fn moment_curve(
    spec: &GroupSpec,
    n: usize,
    t_list: &[usize],
    m: u32,
    plan: &SamplingPlan,
) -> Result<SampledCurve> {
    if let Some(&t) = t_list.iter().find(|&&t| t >= n) {
        return Err(Error::Domain(format!("time {t} is not before the end {n}")));
    }
    if plan.samples == 0 {
        return Err(Error::Domain("no samples requested".into()));
    }
    let sampler = plan.sampler(spec, n)?;
    let metric = Metric::new(spec, (n / 2).max(1) as u32)?;
    let values = plan.map_samples(&sampler, 0, plan.samples, |s| {
        t_list
            .iter()
            .map(|&t| Ok((metric.norm(&s.trace.prefixes[t])? as f64).powi(m as i32)))
            .collect::<Result<Vec<f64>>>()
    });
    let mut out = SampledCurve {
        master_seed: plan.master_seed,
        samples_per_point: plan.samples,
        lost_mass: sampler.lost_mass(),
        ..Default::default()
    };
    let mut points = Vec::new();
    for (k, &t) in t_list.iter().enumerate() {
        let column: Vec<Option<f64>> = values.iter().map(|v| v.as_ref().map(|v| v[k])).collect();
        let mo = accumulate(&column);
        if mo.count == 0 {
            return Err(Error::Domain(format!("no loops of length {n} were sampled")));
        }
        out.failures.push((t as u64, plan.samples - mo.count));
        points.push(CurvePoint::from_moments(t as u64, &mo));
    }
    if out.partial() {
        let failed = values.iter().filter(|v| v.is_none()).count();
        out.warnings.push(format!("{failed} of {} samples failed", plan.samples));
    }
    out.curve = Curve::new(points)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledShiftReport {
    pub n: usize,
    pub s: usize,
    pub t: usize,
    pub samples: u64,
    pub ks: KsResult,
}

/// Compares `d(w(s), w(t))` on one batch of loops with `d(e, w(t - s))` on
/// an independent batch (sample indices `samples..2 samples`).
pub fn shift_invariance_sampled(
    spec: &GroupSpec,
    n: usize,
    s: usize,
    t: usize,
    plan: &SamplingPlan,
) -> Result<SampledShiftReport> {
    if !(s < t && t <= n) {
        return Err(Error::Domain(format!("need s < t <= n, got s = {s}, t = {t}, n = {n}")));
    }
    let sampler = plan.sampler(spec, n)?;
    let metric = Metric::new(spec, (n / 2).max(1) as u32)?;
    let shifted = plan.map_samples(&sampler, 0, plan.samples, |w| {
        Ok(metric.distance(&w.trace.prefixes[s], &w.trace.prefixes[t])? as f64)
    });
    let direct = plan.map_samples(&sampler, plan.samples, plan.samples, |w| {
        Ok(metric.norm(&w.trace.prefixes[t - s])? as f64)
    });
    let a: Vec<f64> = shifted.into_iter().flatten().collect();
    let b: Vec<f64> = direct.into_iter().flatten().collect();
    Ok(SampledShiftReport { n, s, t, samples: plan.samples, ks: ks_two_sample(&a, &b)? })
}
