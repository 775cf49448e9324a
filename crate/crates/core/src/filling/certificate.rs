//! Filling certificates: `w = prod_i g_i^-1 r_i^(s_i) g_i` in the free group.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::group::word::{inverse, parse_word, push_reduced, word_string};
use crate::group::{GroupSpec, LazyWord, Letter};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CertificateStep {
    /// Freely reduced conjugator `g`.
    pub conjugator: Vec<Letter>,
    /// Index into `GroupSpec::relators`.
    pub relator: usize,
    /// `+1` or `-1`.
    pub sign: i8,
}

impl CertificateStep {
    pub fn new(conjugator: Vec<Letter>, relator: usize, sign: i8) -> Self {
        CertificateStep { conjugator, relator, sign }
    }

    /// Append `g^-1 r^s g` to a reduced word.
    pub fn expand_into(&self, spec: &GroupSpec, out: &mut Vec<Letter>) {
        let r = &spec.relators[self.relator];
        push_reduced(out, &inverse(&self.conjugator));
        if self.sign > 0 {
            push_reduced(out, r);
        } else {
            push_reduced(out, &inverse(r));
        }
        push_reduced(out, &self.conjugator);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingCertificate {
    pub target: LazyWord,
    pub steps: Vec<CertificateStep>,
}

impl FillingCertificate {
    pub fn new(target: LazyWord, steps: Vec<CertificateStep>) -> Self {
        FillingCertificate { target, steps }
    }

    pub fn area(&self) -> usize {
        self.steps.len()
    }

    /// Reduced product of the conjugated relators.
    pub fn expand(&self, spec: &GroupSpec) -> Result<Vec<Letter>> {
        self.check_shape(spec)?;
        let mut out = Vec::new();
        for s in &self.steps {
            s.expand_into(spec, &mut out);
        }
        Ok(out)
    }

    fn check_shape(&self, spec: &GroupSpec) -> Result<()> {
        for (i, s) in self.steps.iter().enumerate() {
            if s.relator >= spec.relators.len() {
                return Err(Error::Parse(format!(
                    "step {i}: relator index {} out of range (0..{})",
                    s.relator,
                    spec.relators.len()
                )));
            }
            if s.sign != 1 && s.sign != -1 {
                return Err(Error::Parse(format!("step {i}: sign {} is not +1 or -1", s.sign)));
            }
            for &l in &s.conjugator {
                if l.is_lazy() {
                    return Err(Error::InvalidWord(format!("step {i}: lazy letter in conjugator")));
                }
                spec.check_letter(l)?;
            }
        }
        for &l in &self.target.letters {
            spec.check_letter(l)?;
        }
        Ok(())
    }

    /// One step per line: `conjugator TAB relator_index TAB sign`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            let sign = if step.sign > 0 { "+1" } else { "-1" };
            let _ = writeln!(s, "{}\t{}\t{}", word_string(&step.conjugator), step.relator, sign);
        }
        s
    }

    /// Inverse of [`to_tsv`](Self::to_tsv). Blank lines and `#` comments are
    /// skipped; an empty conjugator may also be written `.`.
    pub fn from_tsv(text: &str, target: LazyWord) -> Result<Self> {
        let mut steps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let err = |m: String| Error::Parse(format!("line {}: {m}", lineno + 1));
            if fields.len() != 3 {
                return Err(err(format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let conj = fields[0].trim();
            let conjugator = if conj == "." {
                Vec::new()
            } else {
                parse_word(conj).map_err(|e| err(e.to_string()))?
            };
            let relator = fields[1]
                .trim()
                .parse()
                .map_err(|_| err(format!("bad relator index `{}`", fields[1])))?;
            let sign = match fields[2].trim() {
                "+1" | "1" | "+" => 1,
                "-1" | "-" => -1,
                other => return Err(err(format!("bad sign `{other}`"))),
            };
            steps.push(CertificateStep { conjugator, relator, sign });
        }
        Ok(FillingCertificate { target, steps })
    }
}

/// Whether the certificate's product freely equals the target with lazy
/// letters removed. Malformed certificates are rejected, not errors.
pub fn verify_certificate(spec: &GroupSpec, cert: &FillingCertificate) -> bool {
    match cert.expand(spec) {
        Ok(product) => {
            let mut target = Vec::new();
            push_reduced(&mut target, &cert.target.letters);
            product == target
        }
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str) -> GroupSpec {
        GroupSpec::parse(id).unwrap()
    }

    fn lw(s: &str) -> LazyWord {
        s.parse().unwrap()
    }

    #[test]
    fn single_relator() {
        let s = spec("z2");
        let r = LazyWord::new(s.relators[0].clone());
        let c = FillingCertificate::new(r.clone(), vec![CertificateStep::new(vec![], 0, 1)]);
        assert!(verify_certificate(&s, &c));
        assert_eq!(c.area(), 1);
        let shifted =
            FillingCertificate::new(r, vec![CertificateStep::new(vec![Letter::gen(0)], 0, 1)]);
        assert!(!verify_certificate(&s, &shifted));
    }

    #[test]
    fn lazy_letters_and_free_cancellation_in_target() {
        let s = spec("z2");
        let c = FillingCertificate::new(lw("a.b.ABbB"), vec![CertificateStep::new(vec![], 0, 1)]);
        assert!(verify_certificate(&s, &c));
        let empty = FillingCertificate::new(lw("aA.."), vec![]);
        assert!(verify_certificate(&s, &empty));
    }

    #[test]
    fn malformed_steps_do_not_verify() {
        let s = spec("z2");
        let c = FillingCertificate::new(lw("abAB"), vec![CertificateStep::new(vec![], 3, 1)]);
        assert!(!verify_certificate(&s, &c));
        let c = FillingCertificate::new(lw("abAB"), vec![CertificateStep::new(vec![], 0, 2)]);
        assert!(!verify_certificate(&s, &c));
    }

    #[test]
    fn tsv_round_trip() {
        let s = spec("heis3");
        let c = FillingCertificate::new(
            lw("ab"),
            vec![
                CertificateStep::new(vec![], 1, -1),
                CertificateStep::new(parse_word("aB").unwrap(), 0, 1),
            ],
        );
        let text = c.to_tsv();
        assert_eq!(text, "\t1\t-1\naB\t0\t+1\n");
        let back = FillingCertificate::from_tsv(&text, lw("ab")).unwrap();
        assert_eq!(back, c);
        let dotted =
            FillingCertificate::from_tsv("# comment\n.\t1\t-1\n\naB\t0\t1\n", lw("ab")).unwrap();
        assert_eq!(dotted, c);
        assert!(verify_certificate(&s, &back) == verify_certificate(&s, &c));
        assert!(FillingCertificate::from_tsv("a\t0\n", lw("")).is_err());
        assert!(FillingCertificate::from_tsv("a\tx\t+1\n", lw("")).is_err());
        assert!(FillingCertificate::from_tsv("a\t0\t0\n", lw("")).is_err());
    }
}
