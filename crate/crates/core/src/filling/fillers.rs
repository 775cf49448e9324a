//! Rewriting fillers for arbitrary loops of the groups that have one.
//!
//! * `FreeAbelian(d)`: bubble sort by generator index, one relator per
//!   transposition, on the cheapest cyclic rotation and direction; area at
//!   most `P^2` for a loop of length `P`.
//! * `Heisenberg3`: collection. Each swap `y x -> x y [y^-1, x^-1]` is free and
//!   leaves a conjugate of `k = [a, b]`, which is carried to the end of the
//!   word one letter (one relator) at a time; area `O(P^3)`.

use super::certificate::{CertificateStep, FillingCertificate};
use super::rewrite::Recorder;
use crate::error::{Error, Result};
use crate::group::word::{commutator, free_reduce, inverse, push_reduced, word_string};
use crate::group::{GroupId, GroupSpec, LazyWord, Letter};

/// Whether [`fill_loop_word`] supports the group.
pub fn has_filler(spec: &GroupSpec) -> bool {
    matches!(spec.id, GroupId::FreeAbelian(_) | GroupId::Heisenberg3)
}

/// Certificate steps for a loop given as a plain word (lazy letters ignored).
pub fn fill_loop_steps(spec: &GroupSpec, word: &[Letter]) -> Result<Vec<CertificateStep>> {
    let u = free_reduce(word);
    if u.is_empty() {
        return Ok(Vec::new());
    }
    match spec.id {
        GroupId::FreeAbelian(_) => sort_abelian(spec, u),
        GroupId::Heisenberg3 => collect_heisenberg(spec, u),
        _ => Err(Error::NoFiller(spec.name())),
    }
}

/// Rewriting certificate for a loop.
pub fn fill_loop_word(spec: &GroupSpec, w: &LazyWord) -> Result<FillingCertificate> {
    if !spec.is_loop(w)? {
        return Err(Error::NotALoop(w.to_string()));
    }
    Ok(FillingCertificate::new(w.clone(), fill_loop_steps(spec, &w.letters)?))
}

fn not_a_loop(u: &[Letter]) -> Error {
    Error::NotALoop(format!("rewriting stopped at `{}`", word_string(u)))
}

/// Rotations tried by the abelian sorter are capped at this many run starts.
const MAX_SORT_ROTATIONS: usize = 32;

/// Bubble sort with eager cancellation; returns the number of transpositions.
fn sort_pass(
    mut u: Vec<Letter>,
    key: impl Fn(Letter) -> usize,
    mut rec: Option<&mut Recorder>,
) -> Result<u64> {
    let mut swaps = 0;
    let mut i = 0;
    while i + 1 < u.len() {
        let (x, y) = (u[i], u[i + 1]);
        if x == y.inverse() {
            u.drain(i..i + 2);
            i = i.saturating_sub(1);
        } else if key(x) > key(y) {
            if let Some(rec) = rec.as_deref_mut() {
                rec.replace(&u[..i], &[x, y], &[y, x])?;
            }
            u.swap(i, i + 1);
            swaps += 1;
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    if !u.is_empty() {
        return Err(not_a_loop(&u));
    }
    Ok(swaps)
}

/// Transposition sort of a cyclic rotation of `u`, towards ascending or
/// descending generator order, whichever needs the fewest swaps.
fn sort_abelian(spec: &GroupSpec, u: Vec<Letter>) -> Result<Vec<CertificateStep>> {
    let d = spec.generator_count;
    let key = |descending: bool| {
        move |l: Letter| {
            let g = l.generator().unwrap();
            if descending {
                d - 1 - g
            } else {
                g
            }
        }
    };
    let n = u.len();
    let mut starts: Vec<usize> =
        (0..n).filter(|&i| i == 0 || u[i].generator() != u[(i + n - 1) % n].generator()).collect();
    starts.truncate(MAX_SORT_ROTATIONS);
    let rotate = |r: usize| -> Vec<Letter> { u[r..].iter().chain(&u[..r]).copied().collect() };
    let mut best = (u64::MAX, 0, false);
    for &r in &starts {
        for descending in [false, true] {
            let cost = sort_pass(rotate(r), key(descending), None)?;
            if cost < best.0 {
                best = (cost, r, descending);
            }
        }
    }
    let (_, r, descending) = best;
    let mut rec = Recorder::new(spec);
    sort_pass(rotate(r), key(descending), Some(&mut rec))?;
    // u = A B with |A| = r, and B A = u conjugated by A
    let a_inv = inverse(&u[..r]);
    Ok(rec
        .steps
        .into_iter()
        .map(|mut s| {
            push_reduced(&mut s.conjugator, &a_inv);
            s
        })
        .collect())
}

fn collect_heisenberg(spec: &GroupSpec, mut u: Vec<Letter>) -> Result<Vec<CertificateStep>> {
    let a = Letter::gen(0);
    let b = Letter::gen(1);
    let block = commutator(&[a], &[b]);
    let blocks = [block.clone(), inverse(&block)];
    let mut rec = Recorder::new(spec);
    let mut residues = Vec::with_capacity(4);
    for y in [b, b.inverse()] {
        for x in [a, a.inverse()] {
            residues.push(((y, x), swap_residue(&blocks, y, x)?));
        }
    }
    let mut tail: i64 = 0;
    let is_b = |l: Letter| l.generator() == Some(1);
    let is_a = |l: Letter| l.generator() == Some(0);
    loop {
        u = free_reduce(&u);
        // rightmost b-letter directly before an a-letter: shortest carry
        let Some(i) = (0..u.len().saturating_sub(1)).rev().find(|&i| is_b(u[i]) && is_a(u[i + 1]))
        else {
            break;
        };
        let (y, x) = (u[i], u[i + 1]);
        let (h, e) = residues.iter().find(|(k, _)| *k == (y, x)).unwrap().1.clone();
        let k = &blocks[if e > 0 { 0 } else { 1 }];
        // u = A x y h^-1 k h B freely; carry k right past h and B
        let mut before: Vec<Letter> = u[..i].to_vec();
        before.extend([x, y]);
        before.extend(inverse(&h));
        let mut after: Vec<Letter> = h.clone();
        after.extend_from_slice(&u[i + 2..]);
        for &z in &after {
            let mut t = vec![z];
            t.extend_from_slice(k);
            let mut s = k.clone();
            s.push(z);
            rec.replace(&before, &s, &t)?;
            before.push(z);
        }
        u = before;
        tail += e;
    }
    if !u.is_empty() || tail != 0 {
        return Err(not_a_loop(&u));
    }
    Ok(rec.steps)
}

/// `(h, e)` with `[y^-1, x^-1] = h^-1 k^e h` freely and `|h|` minimal.
fn swap_residue(blocks: &[Vec<Letter>; 2], y: Letter, x: Letter) -> Result<(Vec<Letter>, i64)> {
    let target = commutator(&[y.inverse()], &[x.inverse()]);
    let letters = [Letter::gen(0), Letter::gen_inv(0), Letter::gen(1), Letter::gen_inv(1)];
    let mut candidates: Vec<Vec<Letter>> = vec![Vec::new()];
    for len in 0..=3 {
        for h in candidates.iter().filter(|h| h.len() == len) {
            for (e, k) in [(1, &blocks[0]), (-1, &blocks[1])] {
                let mut c = inverse(h);
                push_reduced(&mut c, k);
                push_reduced(&mut c, h);
                if c == target {
                    return Ok((h.clone(), e));
                }
            }
        }
        let longer: Vec<Vec<Letter>> = candidates
            .iter()
            .filter(|h| h.len() == len)
            .flat_map(|h| {
                letters.iter().filter(move |&&l| h.last() != Some(&l.inverse())).map(move |&l| {
                    let mut g = h.clone();
                    g.push(l);
                    g
                })
            })
            .collect();
        candidates.extend(longer);
    }
    Err(Error::Invariant(format!(
        "no short conjugate for [{}, {}]",
        y.inverse().to_char(),
        x.inverse().to_char()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filling::certificate::verify_certificate;
    use crate::group::word::{commutator, parse_word, power};

    fn spec(id: &str) -> GroupSpec {
        GroupSpec::parse(id).unwrap()
    }

    fn fill(id: &str, w: &[Letter]) -> FillingCertificate {
        let s = spec(id);
        let c = fill_loop_word(&s, &LazyWord::new(w.to_vec())).unwrap();
        assert!(verify_certificate(&s, &c), "{id} {}", word_string(w));
        c
    }

    #[test]
    fn abelian_sort_counts_transpositions() {
        assert_eq!(fill("z2", &parse_word("abAB").unwrap()).area(), 1);
        assert_eq!(fill("z2", &parse_word("baBA").unwrap()).area(), 1);
        assert_eq!(fill("z2", &parse_word("aabbAABB").unwrap()).area(), 4);
        assert_eq!(fill("z2", &parse_word("aA").unwrap()).area(), 0);
        assert_eq!(fill("z3", &parse_word("abcABC").unwrap()).area(), 3);
    }

    #[test]
    fn heisenberg_relators_and_commutators() {
        let s = spec("heis3");
        for r in &s.relators {
            let c = fill("heis3", r);
            assert!(c.area() >= 1);
        }
        let a = parse_word("a").unwrap();
        let b = parse_word("b").unwrap();
        for r in 1..4 {
            let ar = power(&a, r);
            let br = power(&b, r);
            let w = commutator(&ar, &commutator(&ar, &br));
            fill("heis3", &w);
            let w = commutator(&br, &commutator(&ar, &br));
            fill("heis3", &w);
        }
        // a^4 b a^-4 b^-1 is not a loop
        let bad = LazyWord::new(parse_word("aaaabAAAAB").unwrap());
        assert!(matches!(fill_loop_word(&s, &bad), Err(Error::NotALoop(_))));
    }

    #[test]
    fn unsupported_groups() {
        let s = spec("filiform4");
        let r = LazyWord::new(s.relators[0].clone());
        assert!(matches!(fill_loop_word(&s, &r), Err(Error::NoFiller(_))));
    }
}
