use crate::error::Result;
use crate::group::{GroupElement, GroupSpec, Letter};

/// Symmetric step distribution: uniform over the lazy letter and the
/// generators with their inverses.
#[derive(Clone, Debug)]
pub struct StepMeasure {
    pub support: Vec<(Letter, GroupElement, f64)>,
}

impl StepMeasure {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability(&self, g: &GroupElement) -> f64 {
        self.support.iter().filter(|(_, h, _)| h == g).map(|(_, _, p)| p).sum()
    }
}

/// `p(g) = 1/(2d+1)` on `{e, e_i^{+-1}}`.
pub fn step_measure(spec: &GroupSpec) -> Result<StepMeasure> {
    let letters = spec.alphabet();
    let p = 1.0 / letters.len() as f64;
    let support =
        letters.into_iter().map(|l| Ok((l, spec.letter_element(l)?, p))).collect::<Result<_>>()?;
    Ok(StepMeasure { support })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_over_lazy_alphabet() {
        for (id, size) in [("z2", 5), ("heis3", 5), ("z1", 3), ("z3", 7)] {
            let m = step_measure(&GroupSpec::parse(id).unwrap()).unwrap();
            assert_eq!(m.len(), size);
            let total: f64 = m.support.iter().map(|s| s.2).sum();
            assert!((total - 1.0).abs() < 1e-15);
            assert!(m.support.iter().all(|s| s.2 == 1.0 / size as f64));
        }
    }

    #[test]
    fn symmetric_and_lazy() {
        let spec = GroupSpec::parse("heis3").unwrap();
        let m = step_measure(&spec).unwrap();
        assert!(m.probability(&spec.identity()) > 0.0);
        for (_, g, p) in &m.support {
            assert_eq!(m.probability(&spec.inverse(g).unwrap()), *p);
        }
    }
}
