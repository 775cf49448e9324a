//! Exact filling area by iterative deepening over relator applications.
//!
//! A state is a cyclically reduced word up to rotation and inversion, which
//! leaves the area unchanged. A move matches a prefix `u` of some rotation
//! `rho = u v` of a relator (or its inverse) against the word and replaces it
//! by `v^-1`. Any minimal van Kampen diagram has a face meeting the boundary
//! in an arc, so these moves reach the empty word in exactly `area` steps.
//!
//! Lower bounds: each move removes at most `R` letters, and moves each kernel
//! coordinate of the relator-counting extensions by at most one.

use rustc_hash::{FxHashMap, FxHashSet};

use super::central::{central_coordinates, central_extension};
use crate::error::{Error, Result};
use crate::group::word::{cyclic_reduce, inverse, min_rotation};
use crate::group::{GroupId, GroupSpec, LazyWord, Letter};

fn canonical(w: &[Letter]) -> Vec<Letter> {
    let (_, q) = cyclic_reduce(w);
    let a = min_rotation(&q);
    let b = min_rotation(&inverse(&q));
    a.min(b)
}

struct Search<'a> {
    spec: &'a GroupSpec,
    moves: Vec<Vec<Letter>>,
    max_len: usize,
    budget: u64,
    nodes: u64,
    seen: FxHashMap<Vec<Letter>, u64>,
    heuristic_cache: FxHashMap<Vec<Letter>, u64>,
}

enum Step {
    Found,
    Next(u64),
    OutOfBudget,
}

impl<'a> Search<'a> {
    fn new(spec: &'a GroupSpec, budget: u64) -> Self {
        let mut moves = FxHashSet::default();
        for r in &spec.relators {
            let (_, q) = cyclic_reduce(r);
            for base in [q.clone(), inverse(&q)] {
                for k in 0..base.len() {
                    let mut rot = base[k..].to_vec();
                    rot.extend_from_slice(&base[..k]);
                    moves.insert(rot);
                }
            }
        }
        let mut moves: Vec<_> = moves.into_iter().collect();
        moves.sort();
        let max_len = moves.iter().map(|m| m.len()).max().unwrap_or(1);
        Search {
            spec,
            moves,
            max_len,
            budget,
            nodes: 0,
            seen: FxHashMap::default(),
            heuristic_cache: FxHashMap::default(),
        }
    }

    fn heuristic(&mut self, w: &[Letter]) -> Result<u64> {
        if let Some(&h) = self.heuristic_cache.get(w) {
            return Ok(h);
        }
        let by_length = w.len().div_ceil(self.max_len) as u64;
        let central = central_lower_bound(self.spec, w)?;
        let h = by_length.max(central);
        self.heuristic_cache.insert(w.to_vec(), h);
        Ok(h)
    }

    fn children(&self, w: &[Letter]) -> Vec<Vec<Letter>> {
        let n = w.len();
        let mut out = FxHashSet::default();
        for p in 0..n {
            for rho in &self.moves {
                let mut k = 0;
                while k < rho.len().min(n) && rho[k] == w[(p + k) % n] {
                    k += 1;
                    let mut child = inverse(&rho[k..]);
                    child.extend((k..n).map(|i| w[(p + i) % n]));
                    out.insert(canonical(&child));
                }
            }
        }
        out.into_iter().collect()
    }

    fn dfs(&mut self, w: Vec<Letter>, g: u64, bound: u64) -> Result<Step> {
        let f = g + self.heuristic(&w)?;
        if f > bound {
            return Ok(Step::Next(f));
        }
        if w.is_empty() {
            return Ok(Step::Found);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Ok(Step::OutOfBudget);
        }
        match self.seen.get(&w) {
            Some(&best) if best <= g => return Ok(Step::Next(u64::MAX)),
            _ => {}
        }
        self.seen.insert(w.clone(), g);
        let mut kids = Vec::new();
        for c in self.children(&w) {
            let h = self.heuristic(&c)?;
            kids.push((h, c));
        }
        kids.sort();
        let mut next = u64::MAX;
        for (_, c) in kids {
            match self.dfs(c, g + 1, bound)? {
                Step::Found => return Ok(Step::Found),
                Step::OutOfBudget => return Ok(Step::OutOfBudget),
                Step::Next(t) => next = next.min(t),
            }
        }
        Ok(Step::Next(next))
    }
}

/// Area lower bound from the kernel coordinates of relator-counting
/// extensions; zero where none is registered.
fn central_lower_bound(spec: &GroupSpec, w: &[Letter]) -> Result<u64> {
    let word = LazyWord::new(w.to_vec());
    match spec.id {
        GroupId::FreeAbelian(d) if d >= 2 => {
            let eval = central_extension(spec)?;
            Ok(central_coordinates(spec, &eval, &word)?.iter().map(|c| c.unsigned_abs()).sum())
        }
        GroupId::Heisenberg3 => {
            let eval = central_extension(spec)?;
            let first = central_coordinates(spec, &eval, &word)?[0].unsigned_abs();
            // the same count with the generators exchanged
            let swapped: Vec<Letter> = w
                .iter()
                .map(|l| {
                    let g = 1 - l.generator().unwrap();
                    if l.is_inverse() {
                        Letter::gen_inv(g)
                    } else {
                        Letter::gen(g)
                    }
                })
                .collect();
            let second =
                central_coordinates(spec, &eval, &LazyWord::new(swapped))?[0].unsigned_abs();
            Ok(first + second)
        }
        _ => Ok(0),
    }
}

/// Exact area of a loop, or `None` if more than `budget` states would have
/// to be expanded.
pub fn exact_area_search(spec: &GroupSpec, w: &LazyWord, budget: u64) -> Result<Option<u64>> {
    if !spec.is_loop(w)? {
        return Err(Error::NotALoop(w.to_string()));
    }
    let start = canonical(&w.letters);
    let mut search = Search::new(spec, budget);
    let mut bound = search.heuristic(&start)?;
    loop {
        search.seen.clear();
        match search.dfs(start.clone(), 0, bound)? {
            Step::Found => return Ok(Some(bound)),
            Step::OutOfBudget => return Ok(None),
            Step::Next(u64::MAX) => {
                return Err(Error::Invariant(format!("search space exhausted for {w}")))
            }
            Step::Next(t) => bound = t,
        }
    }
}
