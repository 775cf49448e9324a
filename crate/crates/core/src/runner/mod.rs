//! Experiment orchestration: configuration, dispatch and result files.

pub mod config;
pub mod record;

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

pub use config::{Arithmetic, ExperimentConfig, ExperimentKind, OutputPaths, ShiftMode};
pub use record::{write_atomic, Bracket, Fit, Point, ResultRecord, Series, CSV_COLUMNS, TOOL};

use crate::error::{Error, Result};
use crate::estimator::{
    avg_area_curve, central_moment_curve, enumerate_loops, moment_curve, ratio_limit_check,
    shift_invariance_exact, shift_invariance_sampled, AreaEvaluator, AreaFn, CurvePoint,
    SampledCurve, SamplingPlan, DEFAULT_ENUMERATION_BUDGET,
};
use crate::filling::{dyadic_fill, verify_certificate};
use crate::group::metric::Metric;
use crate::group::{GroupSpec, LazyWord};
use crate::walk::table::exact_tables;
use crate::walk::{hsc_check, HscOptions, SamplerKind, TableOptions};

/// Environment variable overriding the configured worker count.
pub const WORKERS_ENV: &str = "DEHNLAB_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

/// Lower-bound violations kept in an `hsc` record.
const MAX_REPORTED_VIOLATIONS: usize = 100;

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Worker count from the environment, then the config; `None` uses rayon's
/// default.
pub fn effective_workers(cfg: &ExperimentConfig) -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => {
                Err(Error::Parse(format!("{WORKERS_ENV}: expected a positive integer, got `{v}`")))
            }
        },
        _ => Ok(cfg.workers),
    }
}

/// Runs the experiment on a dedicated worker pool.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = effective_workers(cfg)? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Error::Invariant(e.to_string()))?;
    pool.install(|| execute(cfg))
}

/// Runs the experiment and writes the configured outputs atomically.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let record = run(cfg)?;
    if let Some(path) = &cfg.output.json {
        write_atomic(path, &record.to_json())?;
    }
    if let Some(path) = &cfg.output.csv {
        write_atomic(path, &record.to_csv()?)?;
    }
    Ok(record)
}

/// Exit status for a finished run.
pub fn exit_code(record: &ResultRecord) -> i32 {
    if record.partial {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    }
}

#[derive(Default)]
struct Body {
    series: Vec<Series>,
    brackets: Vec<Bracket>,
    extra: serde_json::Map<String, serde_json::Value>,
    lost_mass: f64,
    warnings: Vec<String>,
    partial: bool,
}

impl Body {
    fn absorb(&mut self, name: &str, c: &SampledCurve, fit: bool) {
        self.series.push(if fit {
            Series::from_curve(name, &c.curve)
        } else {
            Series::plain(name, points(&c.curve.points))
        });
        self.lost_mass = self.lost_mass.max(c.lost_mass);
        self.warnings.extend(c.warnings.iter().map(|w| format!("{name}: {w}")));
        self.partial |= c.partial();
    }
}

fn points(ps: &[CurvePoint]) -> Vec<Point> {
    ps.iter()
        .map(|p| Point { scale: p.scale, value: p.value, stderr: p.stderr, samples: p.samples })
        .collect()
}

fn execute(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.check()?;
    let spec = cfg.spec()?;
    let started_unix = unix_now();
    let body = match cfg.kind {
        ExperimentKind::Sample => sample(&spec, cfg)?,
        ExperimentKind::Fill => fill(&spec, cfg)?,
        ExperimentKind::AvgArea => avg_area(&spec, cfg)?,
        ExperimentKind::Moments => moments(&spec, cfg)?,
        ExperimentKind::CentralMoments => central_moments(&spec, cfg)?,
        ExperimentKind::Hsc => hsc(&spec, cfg)?,
        ExperimentKind::Ratio => ratio(&spec, cfg)?,
        ExperimentKind::ShiftTest => shift_test(&spec, cfg)?,
        ExperimentKind::Enumerate => enumerate(&spec, cfg)?,
    };
    let mut warnings = body.warnings;
    if body.lost_mass > 0.0 {
        warnings.push(format!("truncated probability mass up to {:.3e}", body.lost_mass));
    }
    Ok(ResultRecord {
        tool: TOOL.into(),
        version: record::version().into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        group: spec.name(),
        kind: cfg.kind.name().into(),
        started_unix,
        finished_unix: unix_now(),
        series: body.series,
        brackets: body.brackets,
        extra: serde_json::Value::Object(body.extra),
        lost_mass: body.lost_mass,
        warnings,
        partial: body.partial,
    })
}

fn plan(cfg: &ExperimentConfig, kind: SamplerKind) -> SamplingPlan {
    let mut p = SamplingPlan::new(kind, cfg.samples, cfg.seed);
    if let Some(a) = cfg.max_attempts {
        p.max_attempts = a;
    }
    p
}

/// Runs `f` with the configured sampler, then each fallback in turn while
/// it errors or loses samples. The last partial result is kept if no
/// sampler is clean.
fn with_fallback<T>(
    cfg: &ExperimentConfig,
    warnings: &mut Vec<String>,
    partial: impl Fn(&T) -> bool,
    f: impl Fn(&SamplingPlan) -> Result<T>,
) -> Result<T> {
    let chain: Vec<SamplerKind> =
        std::iter::once(cfg.sampler).chain(cfg.fallback.iter().copied()).collect();
    let mut last: Option<Result<T>> = None;
    for (k, &kind) in chain.iter().enumerate() {
        let more = k + 1 < chain.len();
        match f(&plan(cfg, kind)) {
            Ok(v) if !partial(&v) || !more => {
                if partial(&v) && last.is_some() {
                    warnings.push(format!("sampler {kind:?} also lost samples"));
                }
                return Ok(v);
            }
            Ok(v) => {
                warnings.push(format!("sampler {kind:?} lost samples; trying {:?}", chain[k + 1]));
                last = Some(Ok(v));
            }
            Err(e) if more => {
                warnings.push(format!("sampler {kind:?} failed: {e}; trying {:?}", chain[k + 1]));
                last = Some(Err(e));
            }
            Err(e) => return last.filter(|l| l.is_ok()).unwrap_or(Err(e)),
        }
    }
    last.unwrap_or_else(|| Err(Error::Invariant("empty sampler chain".into())))
}

fn sample(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let n = cfg.n.unwrap_or(0);
    let mut body = Body::default();
    let samples = with_fallback(
        cfg,
        &mut body.warnings,
        |v: &Vec<Option<(LazyWord, u64, u32)>>| v.iter().any(Option::is_none),
        |p| {
            let sampler = p.sampler(spec, n)?;
            let metric = Metric::new(spec, (n / 2).max(1) as u32)?;
            Ok(p.map_samples(&sampler, 0, p.samples, |s| {
                Ok((s.word.clone(), s.attempts, metric.norm(&s.trace.prefixes[n / 2])?))
            }))
        },
    )?;
    let ok: Vec<&(LazyWord, u64, u32)> = samples.iter().flatten().collect();
    let failed = samples.len() - ok.len();
    if failed > 0 {
        body.partial = true;
        body.warnings.push(format!("{failed} of {} samples failed", samples.len()));
    }
    if ok.is_empty() {
        return Err(Error::Domain(format!("no loops of length {n} were sampled")));
    }
    let m: crate::estimator::Moments = ok.iter().map(|s| s.2 as f64).collect();
    body.series.push(Series::plain(
        "midpoint-distance",
        points(&[CurvePoint::from_moments(n as u64, &m)]),
    ));
    let attempts: u64 = ok.iter().map(|s| s.1).sum();
    body.extra.insert("n".into(), json!(n));
    body.extra.insert("mean_attempts".into(), json!(attempts as f64 / ok.len() as f64));
    body.extra.insert(
        "words".into(),
        json!(samples.iter().map(|s| s.as_ref().map(|s| s.0.to_string())).collect::<Vec<_>>()),
    );
    Ok(body)
}

fn fill(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let word: LazyWord = cfg.word.as_ref().map(|w| w.get_ref().as_str()).unwrap_or("").parse()?;
    let n = word.len();
    let mut body = Body::default();
    let cert = dyadic_fill(spec, &word)?;
    let verified = verify_certificate(spec, &cert);
    if !verified {
        return Err(Error::Invariant(format!("dyadic certificate for {word} does not verify")));
    }
    if let Some(path) = &cfg.output.certificate {
        write_atomic(path, &cert.to_tsv())?;
    }
    let mut areas = BTreeMap::new();
    for &a in &cfg.areas {
        let value = AreaEvaluator::new(spec, a, n).and_then(|e| e.area(&word));
        match value {
            Ok(v) => {
                areas.insert(a.name(), v);
                body.series.push(Series::plain(
                    a.name(),
                    vec![Point { scale: n as u64, value: v as f64, stderr: 0.0, samples: 1 }],
                ));
            }
            Err(e) => body.warnings.push(format!("{}: {e}", a.name())),
        }
    }
    if let (Some(&lo), Some(&hi)) =
        (areas.get(AreaFn::Centralized.name()), areas.get(AreaFn::Dyadic.name()))
    {
        body.brackets.push(Bracket { scale: n as u64, lower: lo as f64, upper: hi as f64 });
    }
    body.extra.insert("word".into(), json!(word.to_string()));
    body.extra.insert("certificate_area".into(), json!(cert.area()));
    body.extra.insert("certificate_verified".into(), json!(verified));
    body.extra.insert("areas".into(), json!(areas));
    Ok(body)
}

fn avg_area(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let mut body = Body::default();
    for &a in &cfg.areas {
        let c = with_fallback(cfg, &mut body.warnings, SampledCurve::partial, |p| {
            avg_area_curve(spec, &cfg.n_list, a, p)
        })?;
        body.absorb(a.name(), &c, true);
    }
    let find = |name: &str| body.series.iter().find(|s| s.name == name).cloned();
    if let (Some(lo), Some(hi)) = (find(AreaFn::Centralized.name()), find(AreaFn::Dyadic.name())) {
        for (l, h) in lo.points.iter().zip(&hi.points) {
            body.brackets.push(Bracket { scale: l.scale, lower: l.value, upper: h.value });
        }
    }
    Ok(body)
}

fn moments(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let n = cfg.n.unwrap_or(0);
    let mut body = Body::default();
    for &m in &cfg.m {
        let c = with_fallback(cfg, &mut body.warnings, SampledCurve::partial, |p| {
            moment_curve(spec, n, &cfg.t_list, m, p)
        })?;
        body.absorb(&format!("moment-{m}"), &c, true);
    }
    body.extra.insert("n".into(), json!(n));
    Ok(body)
}

fn central_moments(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let mut body = Body::default();
    let c = with_fallback(cfg, &mut body.warnings, SampledCurve::partial, |p| {
        central_moment_curve(spec, &cfg.n_list, p)
    })?;
    body.absorb("central", &c, true);
    Ok(body)
}

/// `p^(n)(x)` for each length as exact `p/q` strings.
fn exact_probabilities(
    spec: &GroupSpec,
    xs: &[(String, crate::group::GroupElement)],
    n_list: &[usize],
) -> Result<serde_json::Value> {
    let tables = exact_tables(spec, n_list.iter().copied().max().unwrap_or(0))?;
    let mut out = serde_json::Map::new();
    for (name, x) in xs {
        let row: BTreeMap<String, String> =
            n_list.iter().map(|&n| (n.to_string(), tables[n].probability(x).to_string())).collect();
        out.insert(name.clone(), json!(row));
    }
    Ok(serde_json::Value::Object(out))
}

fn hsc(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let mut body = Body::default();
    let mut report = hsc_check(spec, &cfg.n_list, &HscOptions::default())?;
    let pts: Vec<CurvePoint> =
        report.levels.iter().map(|l| CurvePoint::exact(l.n as u64, l.return_probability)).collect();
    body.series.push(Series::from_curve("return-probability", &crate::estimator::Curve::new(pts)?));
    body.lost_mass = report.levels.iter().map(|l| l.lost_mass).fold(0.0, f64::max);
    let violations = report.lower_violations.len();
    if violations > 0 {
        body.warnings.push(format!(
            "{violations} of {} ball points fall below the lower bound",
            report.lower_checked
        ));
    }
    report.lower_violations.truncate(MAX_REPORTED_VIOLATIONS);
    body.extra.insert(
        "report".into(),
        serde_json::to_value(&report).map_err(|e| Error::Invariant(e.to_string()))?,
    );
    body.extra.insert("lower_violation_count".into(), json!(violations));
    if cfg.arithmetic == Arithmetic::Exact {
        let e = vec![("e".to_string(), spec.identity())];
        body.extra
            .insert("exact_return_probability".into(), exact_probabilities(spec, &e, &cfg.n_list)?);
    }
    Ok(body)
}

fn ratio(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let mut body = Body::default();
    let xs: Vec<LazyWord> = cfg.x_list.iter().map(|x| x.parse()).collect::<Result<_>>()?;
    let series = ratio_limit_check(spec, &xs, &cfg.n_list, TableOptions::default())?;
    let mut summary = serde_json::Map::new();
    for s in &series {
        body.series.push(Series::plain(format!("ratio-{}", s.x), points(&s.curve.points)));
        if !s.missing.is_empty() {
            body.warnings.push(format!("{} is outside the support at n = {:?}", s.x, s.missing));
        }
        summary.insert(
            s.x.clone(),
            json!({
                "fitted_limit": s.fitted_limit,
                "missing": s.missing,
                "monotonicity_violations": s.monotonicity_violations,
            }),
        );
    }
    body.extra.insert("ratios".into(), serde_json::Value::Object(summary));
    if cfg.arithmetic == Arithmetic::Exact {
        let mut targets = vec![("e".to_string(), spec.identity())];
        for x in &xs {
            targets.push((x.to_string(), spec.eval_word(x)?));
        }
        body.extra
            .insert("exact_probability".into(), exact_probabilities(spec, &targets, &cfg.n_list)?);
    }
    Ok(body)
}

fn shift_test(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let n = cfg.n.unwrap_or(0);
    let mut body = Body::default();
    match cfg.mode {
        ShiftMode::Exact => {
            let e = enumerate_loops(spec, n, None, DEFAULT_ENUMERATION_BUDGET)?;
            let reports = shift_invariance_exact(spec, &e)?;
            let differing: Vec<(usize, usize)> =
                reports.iter().filter(|r| !r.identical).map(|r| (r.s, r.t)).collect();
            if !differing.is_empty() {
                body.warnings.push(format!("distributions differ at (s, t) = {differing:?}"));
            }
            body.extra.insert("mode".into(), json!("exact"));
            body.extra.insert("pairs".into(), json!(reports.len()));
            body.extra.insert("all_identical".into(), json!(differing.is_empty()));
            body.extra.insert("differing".into(), json!(differing));
        }
        ShiftMode::Sampled => {
            let (s, t) = (cfg.s.unwrap_or(0), cfg.t.unwrap_or(0));
            let r = with_fallback(
                cfg,
                &mut body.warnings,
                |_| false,
                |p| shift_invariance_sampled(spec, n, s, t, p),
            )?;
            let lost = 2 * r.samples - (r.ks.n1 + r.ks.n2) as u64;
            if lost > 0 {
                body.partial = true;
                body.warnings.push(format!("{lost} of {} samples failed", 2 * r.samples));
            }
            body.extra.insert("mode".into(), json!("sampled"));
            body.extra.insert(
                "report".into(),
                serde_json::to_value(&r).map_err(|e| Error::Invariant(e.to_string()))?,
            );
        }
    }
    Ok(body)
}

fn enumerate(spec: &GroupSpec, cfg: &ExperimentConfig) -> Result<Body> {
    let mut body = Body::default();
    let exact = cfg.arithmetic == Arithmetic::Exact;
    let mut counts = Vec::new();
    let mut midpoint = Vec::new();
    let mut area_points: BTreeMap<&str, Vec<Point>> = BTreeMap::new();
    let mut per_n = Vec::new();
    for n in cfg.lengths() {
        let e = enumerate_loops(spec, n, None, DEFAULT_ENUMERATION_BUDGET)?;
        let loops = e.loop_count();
        counts.push(Point { scale: n as u64, value: loops as f64, stderr: 0.0, samples: loops });
        let mid = e.mean_distance(n / 2);
        midpoint.push(Point {
            scale: n as u64,
            value: ratio_f64(mid),
            stderr: 0.0,
            samples: loops,
        });
        let mut means = serde_json::Map::new();
        for &a in &cfg.areas {
            let values = AreaEvaluator::new(spec, a, n)
                .and_then(|ev| e.loops.iter().map(|w| ev.area(w)).collect::<Result<Vec<u64>>>());
            match values {
                Ok(v) => {
                    let total: u128 = v.iter().map(|&x| x as u128).sum();
                    let mean = num_rational::Ratio::new(total, loops as u128);
                    area_points.entry(a.name()).or_default().push(Point {
                        scale: n as u64,
                        value: ratio_f64(mean),
                        stderr: 0.0,
                        samples: loops,
                    });
                    means.insert(a.name().into(), number(mean, exact));
                }
                Err(err) => body.warnings.push(format!("{} at n = {n}: {err}", a.name())),
            }
        }
        per_n.push(json!({
            "n": n,
            "loops": loops,
            "words": e.words.to_string(),
            "loop_probability": e.loop_probability().to_string(),
            "mean_midpoint_distance": number(mid, exact),
            "mean_area": means,
        }));
    }
    body.series.push(Series::plain("loops", counts));
    body.series.push(Series::plain("midpoint-distance", midpoint));
    for (name, pts) in area_points {
        body.series.push(Series::plain(format!("area-{name}"), pts));
    }
    body.extra.insert("lengths".into(), json!(per_n));
    Ok(body)
}

fn ratio_f64(r: num_rational::Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn number(r: num_rational::Ratio<u128>, exact: bool) -> serde_json::Value {
    if exact {
        json!(r.to_string())
    } else {
        json!(ratio_f64(r))
    }
}
