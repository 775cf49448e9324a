//! Bookkeeping shared by the rewriting fillers.
//!
//! A filler holds a current word `u` with `w = X_1 ... X_k u` in the free
//! group. Replacing a subword `s` of `u = A s B` by `t`, where
//! `s t^-1 = h^-1 r^e h`, gives `u = (A h^-1 r^e h A^-1) (A t B)`, so the new
//! step has conjugator `h A^-1`.

use rustc_hash::FxHashMap;

use super::certificate::CertificateStep;
use crate::error::{Error, Result};
use crate::group::word::{cyclic_reduce, free_reduce, inverse, push_reduced, word_string};
use crate::group::{GroupSpec, Letter};

/// `(h, relator index, sign)` with `word = h^-1 r^sign h` freely, if any.
pub fn match_conjugate(
    relators: &[Vec<Letter>],
    word: &[Letter],
) -> Option<(Vec<Letter>, usize, i8)> {
    let (y, q) = cyclic_reduce(word);
    if q.is_empty() {
        return None;
    }
    for (idx, r) in relators.iter().enumerate() {
        let (yr, qr) = cyclic_reduce(r);
        if qr.len() != q.len() {
            continue;
        }
        for sign in [1i8, -1] {
            let base = if sign > 0 { qr.clone() } else { inverse(&qr) };
            let len = base.len();
            for k in 0..len {
                if (0..len).all(|i| base[(k + i) % len] == q[i]) {
                    // q = A^-1 base A with A = base[..k]
                    let mut h = yr.clone();
                    push_reduced(&mut h, &base[..k]);
                    push_reduced(&mut h, &inverse(&y));
                    return Some((h, idx, sign));
                }
            }
        }
    }
    None
}

pub(crate) struct Recorder<'a> {
    spec: &'a GroupSpec,
    cache: FxHashMap<Vec<Letter>, (Vec<Letter>, usize, i8)>,
    pub steps: Vec<CertificateStep>,
}

impl<'a> Recorder<'a> {
    pub fn new(spec: &'a GroupSpec) -> Self {
        Recorder { spec, cache: FxHashMap::default(), steps: Vec::new() }
    }

    /// Record the replacement of `s` by `t` right after `prefix`.
    pub fn replace(&mut self, prefix: &[Letter], s: &[Letter], t: &[Letter]) -> Result<()> {
        let mut key = free_reduce(s);
        push_reduced(&mut key, &inverse(t));
        if key.is_empty() {
            return Ok(());
        }
        let (h, idx, sign) = match self.cache.get(&key) {
            Some(m) => m.clone(),
            None => {
                let m = match_conjugate(&self.spec.relators, &key).ok_or_else(|| {
                    Error::Invariant(format!(
                        "`{}` -> `{}` is not a single relator move",
                        word_string(s),
                        word_string(t)
                    ))
                })?;
                self.cache.insert(key, m.clone());
                m
            }
        };
        let mut conjugator = h;
        push_reduced(&mut conjugator, &inverse(prefix));
        self.steps.push(CertificateStep::new(conjugator, idx, sign));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::word::parse_word;

    fn w(s: &str) -> Vec<Letter> {
        parse_word(s).unwrap()
    }

    #[test]
    fn matches_rotations_and_inverses() {
        let spec = GroupSpec::parse("heis3").unwrap();
        for (i, r) in spec.relators.iter().enumerate() {
            for g in ["", "a", "Ba", "abb"] {
                for sign in [1i8, -1] {
                    let mut word = inverse(&w(g));
                    push_reduced(&mut word, &if sign > 0 { r.clone() } else { inverse(r) });
                    push_reduced(&mut word, &w(g));
                    let (h, idx, s) = match_conjugate(&spec.relators, &word).unwrap();
                    assert_eq!((idx, s), (i, sign));
                    let mut back = inverse(&h);
                    push_reduced(&mut back, &if s > 0 { r.clone() } else { inverse(r) });
                    push_reduced(&mut back, &h);
                    assert_eq!(back, word);
                }
            }
        }
        assert!(match_conjugate(&spec.relators, &w("abAB")).is_none());
        assert!(match_conjugate(&spec.relators, &[]).is_none());
    }

    #[test]
    fn recorder_tracks_prefix() {
        let spec = GroupSpec::parse("z2").unwrap();
        let mut rec = Recorder::new(&spec);
        // w = a (b a) A B with the middle pair swapped
        let word = w("abaAB");
        rec.replace(&word[..1], &word[1..3], &w("ab")).unwrap();
        assert_eq!(rec.steps.len(), 1);
        let mut product = Vec::new();
        for s in &rec.steps {
            s.expand_into(&spec, &mut product);
        }
        let mut expect = product.clone();
        push_reduced(&mut expect, &w("aabAB"));
        assert_eq!(expect, free_reduce(&word));
        assert!(rec.replace(&[], &w("ab"), &w("aa")).is_err());
    }
}
