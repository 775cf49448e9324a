//! Experiment configuration files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::estimator::AreaFn;
use crate::group::{GroupSpec, LazyWord};
use crate::walk::SamplerKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Fill,
    AvgArea,
    Moments,
    CentralMoments,
    Hsc,
    Ratio,
    ShiftTest,
    Enumerate,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Fill => "fill",
            ExperimentKind::AvgArea => "avg-area",
            ExperimentKind::Moments => "moments",
            ExperimentKind::CentralMoments => "central-moments",
            ExperimentKind::Hsc => "hsc",
            ExperimentKind::Ratio => "ratio",
            ExperimentKind::ShiftTest => "shift-test",
            ExperimentKind::Enumerate => "enumerate",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    #[default]
    Float,
    Exact,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMode {
    #[default]
    Sampled,
    Exact,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Certificate TSV for `fill`.
    pub certificate: Option<PathBuf>,
}

fn default_sampler() -> SamplerKind {
    SamplerKind::Auto
}

fn default_samples() -> u64 {
    1000
}

fn default_m() -> Vec<u32> {
    vec![1]
}

fn default_areas() -> Vec<AreaFn> {
    vec![AreaFn::Centralized, AreaFn::Dyadic]
}

/// One experiment. Fields a kind does not use are ignored by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: Spanned<String>,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub t_list: Vec<usize>,
    #[serde(default = "default_m")]
    pub m: Vec<u32>,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerKind,
    /// Tried in order when the sampler cannot be built or gives up.
    #[serde(default)]
    pub fallback: Vec<SamplerKind>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default = "default_areas")]
    pub areas: Vec<AreaFn>,
    /// Loop for `fill`.
    #[serde(default)]
    pub word: Option<Spanned<String>>,
    /// Target words for `ratio`.
    #[serde(default)]
    pub x_list: Vec<String>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub mode: ShiftMode,
    #[serde(default)]
    pub max_attempts: Option<u64>,
    #[serde(default)]
    pub output: OutputPaths,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn at(
    text: Option<&str>,
    span: std::ops::Range<usize>,
    name: &str,
    msg: impl std::fmt::Display,
) -> Error {
    match text {
        Some(text) => {
            let (line, col) = line_col(text, span.start);
            Error::Parse(format!("line {line}, column {col}: `{name}`: {msg}"))
        }
        None => field(name, msg),
    }
}

fn field(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("`{field}`: {msg}"))
}

fn strictly_increasing(name: &str, v: &[usize]) -> Result<()> {
    if v.windows(2).any(|p| p[0] >= p[1]) {
        return Err(field(name, "must be strictly increasing"));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field and, where
    /// known, its line.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim_end().to_string()))?;
        cfg.validate(Some(text))?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn spec(&self) -> Result<GroupSpec> {
        GroupSpec::parse(self.group.get_ref())
    }

    /// Re-checks a config after programmatic changes such as flag overrides.
    pub fn check(&self) -> Result<()> {
        self.validate(None)
    }

    fn validate(&self, text: Option<&str>) -> Result<()> {
        let spec = GroupSpec::parse(self.group.get_ref())
            .map_err(|e| at(text, self.group.span(), "group", e))?;
        let need_n =
            || self.n.ok_or_else(|| field("n", format!("required for kind {}", self.kind.name())));
        let need_n_list = || {
            if self.n_list.is_empty() {
                Err(field("n_list", format!("required for kind {}", self.kind.name())))
            } else {
                strictly_increasing("n_list", &self.n_list)
            }
        };
        let need_samples = || {
            if self.samples == 0 {
                Err(field("samples", "must be positive"))
            } else {
                Ok(())
            }
        };
        if self.workers == Some(0) {
            return Err(field("workers", "must be positive"));
        }
        match self.kind {
            ExperimentKind::Sample => {
                need_n()?;
                need_samples()?;
            }
            ExperimentKind::Fill => {
                let w =
                    self.word.as_ref().ok_or_else(|| field("word", "required for kind fill"))?;
                let word: LazyWord =
                    w.get_ref().parse().map_err(|e| at(text, w.span(), "word", e))?;
                let is_loop = spec.is_loop(&word).map_err(|e| at(text, w.span(), "word", e))?;
                if !is_loop {
                    return Err(at(text, w.span(), "word", "not a loop in the group"));
                }
            }
            ExperimentKind::AvgArea => {
                need_n_list()?;
                need_samples()?;
                if self.areas.is_empty() {
                    return Err(field("areas", "must name at least one area function"));
                }
            }
            ExperimentKind::CentralMoments => {
                need_n_list()?;
                need_samples()?;
            }
            ExperimentKind::Moments => {
                let n = need_n()?;
                need_samples()?;
                if self.t_list.is_empty() {
                    return Err(field("t_list", "required for kind moments"));
                }
                strictly_increasing("t_list", &self.t_list)?;
                if self.t_list.iter().any(|&t| t >= n) {
                    return Err(field("t_list", format!("times must be below n = {n}")));
                }
                if self.m.is_empty() {
                    return Err(field("m", "must list at least one moment"));
                }
            }
            ExperimentKind::Hsc => need_n_list()?,
            ExperimentKind::Ratio => {
                need_n_list()?;
                if self.x_list.is_empty() {
                    return Err(field("x_list", "required for kind ratio"));
                }
                for x in &self.x_list {
                    let w: LazyWord = x.parse().map_err(|e| field("x_list", e))?;
                    spec.eval_word(&w).map_err(|e| field("x_list", e))?;
                }
            }
            ExperimentKind::ShiftTest => {
                let n = need_n()?;
                if self.mode == ShiftMode::Sampled {
                    need_samples()?;
                    let (s, t) = (
                        self.s.ok_or_else(|| field("s", "required for sampled shift-test"))?,
                        self.t.ok_or_else(|| field("t", "required for sampled shift-test"))?,
                    );
                    if !(s < t && t <= n) {
                        return Err(field("t", format!("need s < t <= n, got s = {s}, t = {t}")));
                    }
                }
            }
            ExperimentKind::Enumerate => {
                if self.n.is_none() && self.n_list.is_empty() {
                    return Err(field("n", "enumerate needs n or n_list"));
                }
                strictly_increasing("n_list", &self.n_list)?;
            }
        }
        Ok(())
    }

    /// Lengths for kinds that accept either `n` or `n_list`.
    pub fn lengths(&self) -> Vec<usize> {
        if self.n_list.is_empty() {
            self.n.into_iter().collect()
        } else {
            self.n_list.clone()
        }
    }

    /// SHA-256 of the settings that determine the statistics; worker count
    /// and output paths are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.output = OutputPaths::default();
        let canonical = serde_json::json!({
            "group": c.group.get_ref(),
            "kind": c.kind,
            "n": c.n,
            "n_list": c.n_list,
            "t_list": c.t_list,
            "m": c.m,
            "sampler": c.sampler,
            "fallback": c.fallback,
            "samples": c.samples,
            "seed": c.seed,
            "arithmetic": c.arithmetic,
            "areas": c.areas,
            "word": c.word.as_ref().map(|w| w.get_ref().clone()),
            "x_list": c.x_list,
            "s": c.s,
            "t": c.t,
            "mode": c.mode,
            "max_attempts": c.max_attempts,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_enumerate() {
        let c = ExperimentConfig::parse("group = \"z2\"\nkind = \"enumerate\"\nn = 2\n").unwrap();
        assert_eq!(c.kind, ExperimentKind::Enumerate);
        assert_eq!(c.lengths(), vec![2]);
        assert_eq!(c.sampler, SamplerKind::Auto);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn unknown_group_names_field_and_line() {
        let text = "kind = \"enumerate\"\nn = 2\ngroup = \"z9\"\n";
        let e = ExperimentConfig::parse(text).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(e.contains("`group`"), "{e}");
        assert!(e.contains("z9"), "{e}");
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let e =
            ExperimentConfig::parse("group = \"z2\"\nkind = \"enumerate\"\nn = 2\ncolour = 1\n")
                .unwrap_err()
                .to_string();
        assert!(e.contains("colour") && e.contains("line 4"), "{e}");
        assert!(ExperimentConfig::parse("group = \"z2\"\nkind = \"paint\"\n").is_err());
        assert!(ExperimentConfig::parse(
            "group = \"z2\"\nkind = \"moments\"\nn = 8\nt_list = [2, 8]\n"
        )
        .is_err());
        assert!(
            ExperimentConfig::parse("group = \"z2\"\nkind = \"fill\"\nword = \"ab\"\n").is_err()
        );
        assert!(ExperimentConfig::parse("group = \"z2\"\nkind = \"avg-area\"\nn_list = [8, 4]\n")
            .is_err());
    }

    #[test]
    fn hash_ignores_workers_and_outputs() {
        let a = ExperimentConfig::parse("group = \"z2\"\nkind = \"enumerate\"\nn = 2\n").unwrap();
        let b = ExperimentConfig::parse(
            "group = \"z2\"\nkind = \"enumerate\"\nn = 2\nworkers = 3\n[output]\njson = \"x.json\"\n",
        )
        .unwrap();
        let c = ExperimentConfig::parse("group = \"z2\"\nkind = \"enumerate\"\nn = 3\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn line_columns() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
