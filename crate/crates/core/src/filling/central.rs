//! Central extensions that count relators.
//!
//! A loop of the base group lifts to an element of the central kernel of the
//! extension; each relator moves that element by a bounded amount, so its
//! size is a lower bound for the filling area.
//!
//! * `FreeAbelian(d)` lifts to the free class-2 nilpotent group on `d`
//!   generators. The kernel coordinates are the signed areas `M_ij`, one per
//!   relator `[e_i, e_j]`.
//! * `Heisenberg3` lifts to `Filiform4` with `a -> t`, `b -> s`; the kernel is
//!   the class-3 coordinate, which counts `[a, [a, b]]` relators.

use crate::error::{Error, Result};
use crate::group::word::{commutator, power};
use crate::group::{GroupId, GroupSpec, LazyWord, Letter};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralExtensionEval {
    pub base: GroupId,
    pub extension: GroupId,
    /// Kernel coordinates read off the extension's normal form.
    pub extract: Vec<usize>,
    pub distortion_degree: u32,
}

/// The hard-coded extension for a catalog group.
pub fn central_extension(spec: &GroupSpec) -> Result<CentralExtensionEval> {
    match spec.id {
        GroupId::FreeAbelian(d) if d >= 2 => {
            let d = d as usize;
            Ok(CentralExtensionEval {
                base: spec.id,
                extension: GroupId::FreeNilpotentClass2(d as _),
                extract: (d..d + d * (d - 1) / 2).collect(),
                distortion_degree: 2,
            })
        }
        GroupId::Heisenberg3 => Ok(CentralExtensionEval {
            base: spec.id,
            extension: GroupId::Filiform4,
            extract: vec![0],
            distortion_degree: 3,
        }),
        _ => Err(Error::NoExtension(spec.name())),
    }
}

/// Signed areas `M_ij`, `i < j`, of the lift of `letters` to the free class-2
/// nilpotent group, together with the abelian endpoint.
fn class_two_lift(d: usize, letters: &[Letter]) -> Result<(Vec<i64>, Vec<i64>)> {
    let mut v = vec![0i64; d];
    let mut m = vec![0i64; d * (d - 1) / 2];
    let pair = |i: usize, j: usize| i * (2 * d - i - 1) / 2 + (j - i - 1);
    for &l in letters {
        let Some(j) = l.generator() else { continue };
        if j >= d {
            return Err(Error::InvalidWord(format!("letter `{}` out of range", l.to_char())));
        }
        let s = if l.is_inverse() { -1 } else { 1 };
        for i in 0..j {
            let k = pair(i, j);
            m[k] = m[k].checked_add(s * v[i]).ok_or(Error::Overflow)?;
        }
        v[j] += s;
    }
    Ok((v, m))
}

/// Kernel coordinates `l` of the lift of a loop.
pub fn central_coordinates(
    spec: &GroupSpec,
    eval: &CentralExtensionEval,
    w: &LazyWord,
) -> Result<Vec<i64>> {
    if eval.base != spec.id {
        return Err(Error::Domain(format!("extension of {} used for {}", eval.base, spec.name())));
    }
    if !spec.is_loop(w)? {
        return Err(Error::NotALoop(w.to_string()));
    }
    match eval.extension {
        GroupId::FreeNilpotentClass2(d) => Ok(class_two_lift(d as usize, &w.letters)?.1),
        GroupId::Filiform4 => {
            let ext = GroupSpec::new(GroupId::Filiform4)?;
            let g = ext.eval_word(w)?;
            Ok(eval.extract.iter().map(|&i| g.get(i)).collect())
        }
        other => Err(Error::NoExtension(other.name())),
    }
}

/// Lower bound for the filling area of a loop: the L1 norm of its kernel
/// coordinates. Exact centralized area for `FreeAbelian(d)`; for
/// `Heisenberg3` each relator moves the coordinate by at most one. Loops in
/// `Z` are freely trivial and score 0.
pub fn centralized_area(spec: &GroupSpec, w: &LazyWord) -> Result<u64> {
    if let GroupId::FreeAbelian(1) = spec.id {
        if !spec.is_loop(w)? {
            return Err(Error::NotALoop(w.to_string()));
        }
        return Ok(0);
    }
    let eval = central_extension(spec)?;
    Ok(central_coordinates(spec, &eval, w)?.iter().map(|c| c.unsigned_abs()).sum())
}

/// Witness family with kernel coordinate growing like `r^k`:
/// `[a^r, b^r]` for abelian groups, `[a^r, [a^r, b^r]]` for `Heisenberg3`.
pub fn distortion_witness(eval: &CentralExtensionEval, r: usize) -> Vec<Letter> {
    let a = power(&[Letter::gen(0)], r as i64);
    let b = power(&[Letter::gen(1)], r as i64);
    match eval.base {
        GroupId::Heisenberg3 => commutator(&a, &commutator(&a, &b)),
        _ => commutator(&a, &b),
    }
}

/// `(r, |l|)` of the witness family for `r = 0..=radius`, where the witness
/// for `r` has length `O(r)`.
pub fn distortion_probe(
    spec: &GroupSpec,
    eval: &CentralExtensionEval,
    radius: usize,
) -> Result<Vec<(usize, u64)>> {
    (0..=radius)
        .map(|r| {
            let w = LazyWord::new(distortion_witness(eval, r));
            let l = central_coordinates(spec, eval, &w)?;
            Ok((r, l.iter().map(|c| c.unsigned_abs()).sum()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::word::{inverse, parse_word};

    fn spec(id: &str) -> GroupSpec {
        GroupSpec::parse(id).unwrap()
    }

    fn lw(s: &str) -> LazyWord {
        s.parse().unwrap()
    }

    #[test]
    fn signed_area_of_the_commutator() {
        let s = spec("z2");
        let e = central_extension(&s).unwrap();
        assert_eq!(e.distortion_degree, 2);
        assert_eq!(central_coordinates(&s, &e, &lw("abAB")).unwrap(), vec![1]);
        // agrees with the Heisenberg z coordinate
        let h = spec("heis3");
        assert_eq!(h.eval_word(&lw("abAB")).unwrap().get(2), 1);
        assert_eq!(central_coordinates(&s, &e, &lw("")).unwrap(), vec![0]);
    }

    #[test]
    fn class_three_coordinate() {
        let s = spec("heis3");
        let e = central_extension(&s).unwrap();
        assert_eq!(e.distortion_degree, 3);
        let w = LazyWord::new(s.relators[0].clone());
        assert_eq!(central_coordinates(&s, &e, &w).unwrap(), vec![1]);
        let w = LazyWord::new(s.relators[1].clone());
        assert_eq!(central_coordinates(&s, &e, &w).unwrap(), vec![0]);
    }

    #[test]
    fn class_two_lift_matches_the_catalog_group() {
        for d in [2usize, 3] {
            let ext = GroupSpec::new(GroupId::FreeNilpotentClass2(d as _)).unwrap();
            for w in ["abAB", "abcABC", "aabACbbc", "cbaCBA", "abABacAC"] {
                let word = parse_word(w).unwrap();
                if word.iter().any(|l| l.generator().unwrap() >= d) {
                    continue;
                }
                let g = ext.eval_letters(&word).unwrap();
                let (v, m) = class_two_lift(d, &word).unwrap();
                assert_eq!(&g.coords()[..d], &v[..]);
                assert_eq!(&g.coords()[d..], &m[..], "{w}");
            }
        }
    }

    #[test]
    fn centralized_area_examples() {
        assert_eq!(centralized_area(&spec("z2"), &lw("abABabAB")).unwrap(), 2);
        assert_eq!(centralized_area(&spec("z3"), &lw("abABbcBC")).unwrap(), 2);
        let c = parse_word("abAB").unwrap();
        let mut w = c.clone();
        w.extend(inverse(&c));
        assert_eq!(centralized_area(&spec("z2"), &LazyWord::new(w)).unwrap(), 0);
        assert_eq!(centralized_area(&spec("z1"), &lw("aA.a.A")).unwrap(), 0);
        assert!(matches!(centralized_area(&spec("z2"), &lw("ab")), Err(Error::NotALoop(_))));
        assert!(matches!(
            centralized_area(&spec("filiform4"), &lw("")),
            Err(Error::NoExtension(_))
        ));
    }

    #[test]
    fn rotation_invariance() {
        let s = spec("heis3");
        let e = central_extension(&s).unwrap();
        let w = LazyWord::new(distortion_witness(&e, 3));
        let base = central_coordinates(&s, &e, &w).unwrap();
        for k in 0..w.len() {
            assert_eq!(central_coordinates(&s, &e, &w.rotated(k)).unwrap(), base);
        }
    }

    #[test]
    fn witness_growth() {
        let s = spec("z2");
        let e = central_extension(&s).unwrap();
        for (r, l) in distortion_probe(&s, &e, 6).unwrap() {
            assert_eq!(l, (r * r) as u64);
        }
        let s = spec("heis3");
        let e = central_extension(&s).unwrap();
        for (r, l) in distortion_probe(&s, &e, 8).unwrap() {
            assert_eq!(l, (r * r * r) as u64);
        }
    }
}
