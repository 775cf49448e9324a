//! Random lazy words and random closed loops.
//!
//! Every sample draws from its own ChaCha8 stream selected by
//! `(master seed, sample index)`, so a batch is reproducible bit for bit
//! regardless of how many worker threads produced it.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{step_measure, StepMeasure};
use super::table::{return_tables, ProbabilityTable, TableOptions};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupId, GroupSpec, LazyWord, Letter, PathTrace};

pub const DEFAULT_MAX_ATTEMPTS: u64 = 100_000_000;

/// Stream `index` of the generator seeded by `master`.
pub fn substream(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// `n` i.i.d. letters, uniform over the lazy alphabet.
pub fn sample_lazy_word<R: Rng + ?Sized>(spec: &GroupSpec, n: usize, rng: &mut R) -> LazyWord {
    let alphabet = spec.alphabet();
    let letters = (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    LazyWord::new(letters)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMethod {
    Rejection,
    Bridge,
    /// Bridge in the abelianization, then rejection on the remaining coordinates.
    QuotientBridge,
    Enumeration,
}

impl SampleMethod {
    pub fn name(self) -> &'static str {
        match self {
            SampleMethod::Rejection => "rejection",
            SampleMethod::Bridge => "bridge",
            SampleMethod::QuotientBridge => "quotient-bridge",
            SampleMethod::Enumeration => "enumeration",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub index: u64,
}

#[derive(Clone, Debug)]
pub struct LoopSample {
    pub word: LazyWord,
    pub trace: PathTrace,
    pub method: SampleMethod,
    pub provenance: Option<Provenance>,
    /// Candidate words drawn, including the accepted one.
    pub attempts: u64,
}

/// Rejection from i.i.d. letters: exact `rho-bar_n`.
pub fn sample_loop_rejection<R: Rng + ?Sized>(
    spec: &GroupSpec,
    n: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<LoopSample> {
    let alphabet = spec.alphabet();
    let elements: Vec<GroupElement> =
        alphabet.iter().map(|&l| spec.letter_element(l)).collect::<Result<_>>()?;
    let mut idx = vec![0usize; n];
    for attempt in 1..=max_attempts {
        let mut x = spec.identity();
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..alphabet.len());
            x = spec.mul(&x, &elements[*slot])?;
        }
        if x.is_zero() {
            let word = LazyWord::new(idx.iter().map(|&i| alphabet[i]).collect());
            let trace = spec.trace(&word)?;
            return Ok(LoopSample {
                word,
                trace,
                method: SampleMethod::Rejection,
                provenance: None,
                attempts: attempt,
            });
        }
    }
    Err(Error::AttemptsExhausted { attempts: max_attempts })
}

/// Conditioned walk driven by `p^(0..=n)` of `spec`.
fn bridge_letters<R: Rng + ?Sized>(
    spec: &GroupSpec,
    measure: &StepMeasure,
    n: usize,
    tables: &[ProbabilityTable],
    rng: &mut R,
) -> Result<Vec<Letter>> {
    if tables.len() < n.max(1) {
        return Err(Error::Domain(format!(
            "bridge needs tables up to {} steps, got {}",
            n.saturating_sub(1),
            tables.len().saturating_sub(1)
        )));
    }
    let mut x = spec.identity();
    let mut letters = Vec::with_capacity(n);
    let mut weights = vec![0.0; measure.len()];
    for t in 0..n {
        let remaining = &tables[n - t - 1];
        let mut total = 0.0;
        let mut nexts = Vec::with_capacity(measure.len());
        for (w, (_, g, p)) in weights.iter_mut().zip(&measure.support) {
            let y = spec.mul(&x, g)?;
            *w = p * remaining.get(&spec.inverse(&y)?);
            total += *w;
            nexts.push(y);
        }
        if !(total > 0.0) {
            return Err(Error::Invariant(format!(
                "bridge normalizer vanished at step {t} from {x}"
            )));
        }
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = weights.iter().rposition(|&w| w > 0.0).unwrap();
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        letters.push(measure.support[pick].0);
        x = nexts[pick];
    }
    if !x.is_zero() {
        return Err(Error::Invariant(format!("bridge ended at {x}")));
    }
    Ok(letters)
}

/// One loop from the conditioned walk; `tables = return_tables(spec, n)`
/// (only `p^(0..n)` are read).
pub fn sample_loop_bridge<R: Rng + ?Sized>(
    spec: &GroupSpec,
    n: usize,
    rng: &mut R,
    tables: &[ProbabilityTable],
) -> Result<LoopSample> {
    let measure = step_measure(spec)?;
    let word = LazyWord::new(bridge_letters(spec, &measure, n, tables, rng)?);
    let trace = spec.trace(&word)?;
    Ok(LoopSample { word, trace, method: SampleMethod::Bridge, provenance: None, attempts: 1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Bridge for abelian groups, quotient bridge otherwise.
    Auto,
    Rejection,
    Bridge,
    QuotientBridge,
}

impl SamplerKind {
    pub fn resolve(self, spec: &GroupSpec) -> SamplerKind {
        match (self, spec.id) {
            (SamplerKind::Auto, GroupId::FreeAbelian(_)) => SamplerKind::Bridge,
            (SamplerKind::Auto, _) => SamplerKind::QuotientBridge,
            (k, _) => k,
        }
    }
}

enum Engine {
    Rejection,
    Bridge { measure: StepMeasure, tables: Vec<ProbabilityTable> },
    QuotientBridge { base: GroupSpec, measure: StepMeasure, tables: Vec<ProbabilityTable> },
}

/// Loop sampler for a fixed group and length with any precomputation done.
pub struct LoopSampler {
    spec: GroupSpec,
    n: usize,
    max_attempts: u64,
    engine: Engine,
}

impl LoopSampler {
    pub fn new(
        spec: &GroupSpec,
        n: usize,
        kind: SamplerKind,
        max_attempts: u64,
        table_opts: TableOptions,
    ) -> Result<Self> {
        let engine = match kind.resolve(spec) {
            SamplerKind::Rejection => Engine::Rejection,
            SamplerKind::Bridge => Engine::Bridge {
                measure: step_measure(spec)?,
                tables: return_tables(spec, n.saturating_sub(1), table_opts)?,
            },
            SamplerKind::QuotientBridge => {
                let base = GroupSpec::new(GroupId::FreeAbelian(spec.generator_count as _))?;
                Engine::QuotientBridge {
                    measure: step_measure(&base)?,
                    tables: return_tables(&base, n.saturating_sub(1), table_opts)?,
                    base,
                }
            }
            SamplerKind::Auto => unreachable!(),
        };
        Ok(LoopSampler { spec: spec.clone(), n, max_attempts, engine })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn method(&self) -> SampleMethod {
        match self.engine {
            Engine::Rejection => SampleMethod::Rejection,
            Engine::Bridge { .. } => SampleMethod::Bridge,
            Engine::QuotientBridge { .. } => SampleMethod::QuotientBridge,
        }
    }

    /// Largest truncated mass over the tables in use.
    pub fn lost_mass(&self) -> f64 {
        match &self.engine {
            Engine::Rejection => 0.0,
            Engine::Bridge { tables, .. } | Engine::QuotientBridge { tables, .. } => {
                tables.iter().map(|t| t.lost_mass()).fold(0.0, f64::max)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LoopSample> {
        match &self.engine {
            Engine::Rejection => sample_loop_rejection(&self.spec, self.n, rng, self.max_attempts),
            Engine::Bridge { measure, tables } => {
                let word = LazyWord::new(bridge_letters(&self.spec, measure, self.n, tables, rng)?);
                let trace = self.spec.trace(&word)?;
                Ok(LoopSample {
                    word,
                    trace,
                    method: SampleMethod::Bridge,
                    provenance: None,
                    attempts: 1,
                })
            }
            Engine::QuotientBridge { base, measure, tables } => {
                for attempt in 1..=self.max_attempts {
                    let letters = bridge_letters(base, measure, self.n, tables, rng)?;
                    if self.spec.eval_letters(&letters)?.is_zero() {
                        let word = LazyWord::new(letters);
                        let trace = self.spec.trace(&word)?;
                        return Ok(LoopSample {
                            word,
                            trace,
                            method: SampleMethod::QuotientBridge,
                            provenance: None,
                            attempts: attempt,
                        });
                    }
                }
                Err(Error::AttemptsExhausted { attempts: self.max_attempts })
            }
        }
    }

    /// Sample `index` of the batch seeded by `master_seed`.
    pub fn sample_indexed(&self, master_seed: u64, index: u64) -> Result<LoopSample> {
        let mut rng = substream(master_seed, index);
        let mut s = self.sample(&mut rng)?;
        s.provenance = Some(Provenance { master_seed, index });
        Ok(s)
    }

    /// Samples `0..count` in parallel on the current rayon pool, in index order.
    pub fn sample_many(&self, count: usize, master_seed: u64) -> Result<Vec<LoopSample>> {
        (0..count as u64).into_par_iter().map(|i| self.sample_indexed(master_seed, i)).collect()
    }
}
