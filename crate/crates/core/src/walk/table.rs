//! Convolution powers `p^(t)` of the step measure.
//!
//! Floating tables keep three layouts: a dense grid for `Z` and `Z^2`, dense
//! central columns over a 2d grid for `Z^3` and the Heisenberg group (the
//! third coordinate is central and enters products additively), and a hash
//! map for everything else. Entries below `floor * max` are dropped after
//! each step and their mass is recorded in `lost_mass`; nothing is
//! renormalized.

use num_rational::Ratio;
use rustc_hash::FxHashMap;

use super::measure::{step_measure, StepMeasure};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};

pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-15;
pub const DEFAULT_TABLE_BUDGET: usize = 400_000_000;

#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    /// Truncation floor as a fraction of the largest entry.
    pub relative_floor: f64,
    /// Maximum number of stored entries summed over all requested tables.
    pub budget: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { relative_floor: DEFAULT_RELATIVE_FLOOR, budget: DEFAULT_TABLE_BUDGET }
    }
}

#[derive(Clone, Debug)]
struct Grid {
    lo: [i64; 2],
    dims: [usize; 2],
    vals: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
struct Column {
    off: i64,
    vals: Vec<f64>,
}

#[derive(Clone, Debug)]
struct Columns {
    lo: [i64; 2],
    dims: [usize; 2],
    cols: Vec<Column>,
}

#[derive(Clone, Debug)]
enum Storage {
    Grid(Grid),
    Columns(Columns),
    Sparse(FxHashMap<GroupElement, f64>),
}

/// `p^(t)` as a truncated table.
#[derive(Clone, Debug)]
pub struct ProbabilityTable {
    step_count: usize,
    arity: usize,
    relative_floor: f64,
    lost_mass: f64,
    storage: Storage,
}

impl ProbabilityTable {
    /// The point mass at the identity.
    pub fn delta(spec: &GroupSpec, relative_floor: f64) -> Self {
        let arity = spec.coordinate_arity;
        let storage = if spec.has_column_layout() && arity == 3 {
            Storage::Columns(Columns {
                lo: [0, 0],
                dims: [1, 1],
                cols: vec![Column { off: 0, vals: vec![1.0] }],
            })
        } else if spec.has_column_layout() {
            Storage::Grid(Grid { lo: [0, 0], dims: [1, 1], vals: vec![1.0] })
        } else {
            let mut m = FxHashMap::default();
            m.insert(spec.identity(), 1.0);
            Storage::Sparse(m)
        };
        ProbabilityTable { step_count: 0, arity, relative_floor, lost_mass: 0.0, storage }
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    pub fn lost_mass(&self) -> f64 {
        self.lost_mass
    }

    pub fn truncation_floor(&self) -> f64 {
        self.relative_floor
    }

    pub fn get(&self, x: &GroupElement) -> f64 {
        match &self.storage {
            Storage::Grid(g) => {
                let i = x.get(0) - g.lo[0];
                let j = if self.arity > 1 { x.get(1) } else { 0 } - g.lo[1];
                if i < 0 || j < 0 || i as usize >= g.dims[0] || j as usize >= g.dims[1] {
                    0.0
                } else {
                    g.vals[i as usize * g.dims[1] + j as usize]
                }
            }
            Storage::Columns(c) => {
                let i = x.get(0) - c.lo[0];
                let j = x.get(1) - c.lo[1];
                if i < 0 || j < 0 || i as usize >= c.dims[0] || j as usize >= c.dims[1] {
                    return 0.0;
                }
                let col = &c.cols[i as usize * c.dims[1] + j as usize];
                let k = x.get(2) - col.off;
                if k < 0 || k as usize >= col.vals.len() {
                    0.0
                } else {
                    col.vals[k as usize]
                }
            }
            Storage::Sparse(m) => m.get(x).copied().unwrap_or(0.0),
        }
    }

    /// Visit every stored nonzero entry.
    pub fn for_each(&self, mut f: impl FnMut(GroupElement, f64)) {
        match &self.storage {
            Storage::Grid(g) => {
                for i in 0..g.dims[0] {
                    for j in 0..g.dims[1] {
                        let v = g.vals[i * g.dims[1] + j];
                        if v > 0.0 {
                            let x = g.lo[0] + i as i64;
                            let e = if self.arity == 1 {
                                GroupElement::from_slice(&[x])
                            } else {
                                GroupElement::from_slice(&[x, g.lo[1] + j as i64])
                            };
                            f(e, v);
                        }
                    }
                }
            }
            Storage::Columns(c) => {
                for i in 0..c.dims[0] {
                    for j in 0..c.dims[1] {
                        let col = &c.cols[i * c.dims[1] + j];
                        for (k, &v) in col.vals.iter().enumerate() {
                            if v > 0.0 {
                                f(
                                    GroupElement::from_slice(&[
                                        c.lo[0] + i as i64,
                                        c.lo[1] + j as i64,
                                        col.off + k as i64,
                                    ]),
                                    v,
                                );
                            }
                        }
                    }
                }
            }
            Storage::Sparse(m) => {
                for (g, &v) in m {
                    if v > 0.0 {
                        f(*g, v);
                    }
                }
            }
        }
    }

    pub fn entries(&self) -> Vec<(GroupElement, f64)> {
        let mut out = Vec::new();
        self.for_each(|g, p| out.push((g, p)));
        out
    }

    /// Number of stored slots (including interior zeros of dense layouts).
    pub fn stored_len(&self) -> usize {
        match &self.storage {
            Storage::Grid(g) => g.vals.len(),
            Storage::Columns(c) => {
                c.cols.iter().map(|col| col.vals.len()).sum::<usize>() + c.cols.len()
            }
            Storage::Sparse(m) => m.len(),
        }
    }

    pub fn support_len(&self) -> usize {
        let mut n = 0;
        self.for_each(|_, _| n += 1);
        n
    }

    /// Sum of stored entries, compensated.
    pub fn mass(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        self.for_each(|_, p| {
            let t = sum + p;
            if sum.abs() >= p.abs() {
                comp += (sum - t) + p;
            } else {
                comp += (p - t) + sum;
            }
            sum = t;
        });
        sum + comp
    }

    pub fn max_entry(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.for_each(|_, p| m = m.max(p));
        m
    }

    /// One more step: `new(x) = sum_g old(x g^-1) m(g)`.
    pub fn convolve(&self, spec: &GroupSpec, measure: &StepMeasure) -> Result<ProbabilityTable> {
        let storage = match &self.storage {
            Storage::Grid(g) => Storage::Grid(convolve_grid(g, self.arity, measure)),
            Storage::Columns(c) => Storage::Columns(convolve_columns(c, spec, measure)?),
            Storage::Sparse(m) => {
                let mut out: FxHashMap<GroupElement, f64> =
                    FxHashMap::with_capacity_and_hasher(m.len() * 2, Default::default());
                for (y, &v) in m {
                    for (_, g, p) in &measure.support {
                        *out.entry(spec.mul(y, g)?).or_insert(0.0) += v * p;
                    }
                }
                Storage::Sparse(out)
            }
        };
        let mut next = ProbabilityTable {
            step_count: self.step_count + 1,
            arity: self.arity,
            relative_floor: self.relative_floor,
            lost_mass: self.lost_mass,
            storage,
        };
        next.truncate();
        Ok(next)
    }

    fn truncate(&mut self) {
        let floor = self.relative_floor * self.max_entry();
        let mut lost = 0.0;
        match &mut self.storage {
            Storage::Grid(g) => {
                for v in g.vals.iter_mut() {
                    if *v > 0.0 && *v < floor {
                        lost += *v;
                        *v = 0.0;
                    }
                }
                shrink_grid(g);
            }
            Storage::Columns(c) => {
                for col in c.cols.iter_mut() {
                    for v in col.vals.iter_mut() {
                        if *v > 0.0 && *v < floor {
                            lost += *v;
                            *v = 0.0;
                        }
                    }
                    trim_column(col);
                }
                shrink_columns(c);
            }
            Storage::Sparse(m) => {
                m.retain(|_, v| {
                    if *v < floor {
                        lost += *v;
                        false
                    } else {
                        true
                    }
                });
            }
        }
        self.lost_mass += lost;
    }
}

fn convolve_grid(g: &Grid, arity: usize, measure: &StepMeasure) -> Grid {
    let grow = [1usize, if arity > 1 { 1 } else { 0 }];
    let dims = [g.dims[0] + 2 * grow[0], g.dims[1] + 2 * grow[1]];
    let lo = [g.lo[0] - grow[0] as i64, g.lo[1] - grow[1] as i64];
    let mut vals = vec![0.0; dims[0] * dims[1]];
    for (_, step, p) in &measure.support {
        let s0 = step.get(0) + grow[0] as i64;
        let s1 = if arity > 1 { step.get(1) } else { 0 } + grow[1] as i64;
        for i in 0..g.dims[0] {
            let src = &g.vals[i * g.dims[1]..(i + 1) * g.dims[1]];
            let start = (i as i64 + s0) as usize * dims[1] + s1 as usize;
            let dst = &mut vals[start..start + g.dims[1]];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * p;
            }
        }
    }
    Grid { lo, dims, vals }
}

fn shrink_grid(g: &mut Grid) {
    let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
    for i in 0..g.dims[0] {
        for j in 0..g.dims[1] {
            if g.vals[i * g.dims[1] + j] > 0.0 {
                r0 = r0.min(i);
                r1 = r1.max(i);
                c0 = c0.min(j);
                c1 = c1.max(j);
            }
        }
    }
    if r0 == usize::MAX {
        *g = Grid { lo: [0, 0], dims: [0, 0], vals: Vec::new() };
        return;
    }
    if r0 == 0 && c0 == 0 && r1 + 1 == g.dims[0] && c1 + 1 == g.dims[1] {
        return;
    }
    let dims = [r1 - r0 + 1, c1 - c0 + 1];
    let mut vals = Vec::with_capacity(dims[0] * dims[1]);
    for i in r0..=r1 {
        vals.extend_from_slice(&g.vals[i * g.dims[1] + c0..i * g.dims[1] + c1 + 1]);
    }
    *g = Grid { lo: [g.lo[0] + r0 as i64, g.lo[1] + c0 as i64], dims, vals };
}

fn convolve_columns(c: &Columns, spec: &GroupSpec, measure: &StepMeasure) -> Result<Columns> {
    let dims = [c.dims[0] + 2, c.dims[1] + 2];
    let lo = [c.lo[0] - 1, c.lo[1] - 1];
    // (target column index, z shift) for each source column and step
    let mut routes: Vec<Vec<(usize, i64)>> = Vec::with_capacity(c.cols.len());
    for i in 0..c.dims[0] {
        for j in 0..c.dims[1] {
            let base = GroupElement::from_slice(&[c.lo[0] + i as i64, c.lo[1] + j as i64, 0]);
            let mut r = Vec::with_capacity(measure.len());
            for (_, step, _) in &measure.support {
                let t = spec.mul(&base, step)?;
                let ti = (t.get(0) - lo[0]) as usize;
                let tj = (t.get(1) - lo[1]) as usize;
                r.push((ti * dims[1] + tj, t.get(2)));
            }
            routes.push(r);
        }
    }
    let mut bounds = vec![(i64::MAX, i64::MIN); dims[0] * dims[1]];
    for (col, r) in c.cols.iter().zip(&routes) {
        if col.vals.is_empty() {
            continue;
        }
        for &(t, dz) in r {
            let b = &mut bounds[t];
            b.0 = b.0.min(col.off + dz);
            b.1 = b.1.max(col.off + dz + col.vals.len() as i64 - 1);
        }
    }
    let mut cols: Vec<Column> = bounds
        .iter()
        .map(|&(a, b)| {
            if a > b {
                Column::default()
            } else {
                Column { off: a, vals: vec![0.0; (b - a + 1) as usize] }
            }
        })
        .collect();
    for (col, r) in c.cols.iter().zip(&routes) {
        if col.vals.is_empty() {
            continue;
        }
        for (&(t, dz), (_, _, p)) in r.iter().zip(&measure.support) {
            let dst = &mut cols[t];
            let start = (col.off + dz - dst.off) as usize;
            for (d, s) in dst.vals[start..start + col.vals.len()].iter_mut().zip(&col.vals) {
                *d += s * p;
            }
        }
    }
    Ok(Columns { lo, dims, cols })
}

fn trim_column(col: &mut Column) {
    let first = col.vals.iter().position(|&v| v > 0.0);
    match first {
        None => *col = Column::default(),
        Some(a) => {
            let b = col.vals.iter().rposition(|&v| v > 0.0).unwrap();
            if a > 0 || b + 1 < col.vals.len() {
                col.vals = col.vals[a..=b].to_vec();
                col.off += a as i64;
            }
        }
    }
}

fn shrink_columns(c: &mut Columns) {
    let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
    for i in 0..c.dims[0] {
        for j in 0..c.dims[1] {
            if !c.cols[i * c.dims[1] + j].vals.is_empty() {
                r0 = r0.min(i);
                r1 = r1.max(i);
                c0 = c0.min(j);
                c1 = c1.max(j);
            }
        }
    }
    if r0 == usize::MAX {
        *c = Columns { lo: [0, 0], dims: [0, 0], cols: Vec::new() };
        return;
    }
    if r0 == 0 && c0 == 0 && r1 + 1 == c.dims[0] && c1 + 1 == c.dims[1] {
        return;
    }
    let dims = [r1 - r0 + 1, c1 - c0 + 1];
    let mut cols = Vec::with_capacity(dims[0] * dims[1]);
    for i in r0..=r1 {
        for j in c0..=c1 {
            cols.push(std::mem::take(&mut c.cols[i * c.dims[1] + j]));
        }
    }
    *c = Columns { lo: [c.lo[0] + r0 as i64, c.lo[1] + c0 as i64], dims, cols };
}

/// `p^(0), ..., p^(n)`.
pub fn return_tables(
    spec: &GroupSpec,
    n: usize,
    opts: TableOptions,
) -> Result<Vec<ProbabilityTable>> {
    let measure = step_measure(spec)?;
    let mut tables = vec![ProbabilityTable::delta(spec, opts.relative_floor)];
    let mut used = 1usize;
    for _ in 0..n {
        let next = tables.last().unwrap().convolve(spec, &measure)?;
        used += next.stored_len();
        if used > opts.budget {
            return Err(Error::BudgetExceeded { budget: opts.budget });
        }
        tables.push(next);
    }
    Ok(tables)
}

/// `p^(n)` alone, discarding intermediate tables.
pub fn power_table(spec: &GroupSpec, n: usize, opts: TableOptions) -> Result<ProbabilityTable> {
    let measure = step_measure(spec)?;
    let mut t = ProbabilityTable::delta(spec, opts.relative_floor);
    for _ in 0..n {
        t = t.convolve(spec, &measure)?;
        if t.stored_len() > opts.budget {
            return Err(Error::BudgetExceeded { budget: opts.budget });
        }
    }
    Ok(t)
}

/// `p^(t)` for `t = 0..=n_max`, handing each table to `visit` and keeping none.
pub fn sweep_tables(
    spec: &GroupSpec,
    n_max: usize,
    opts: TableOptions,
    mut visit: impl FnMut(&ProbabilityTable) -> Result<()>,
) -> Result<()> {
    let measure = step_measure(spec)?;
    let mut t = ProbabilityTable::delta(spec, opts.relative_floor);
    visit(&t)?;
    for _ in 0..n_max {
        t = t.convolve(spec, &measure)?;
        if t.stored_len() > opts.budget {
            return Err(Error::BudgetExceeded { budget: opts.budget });
        }
        visit(&t)?;
    }
    Ok(())
}

/// Exact table: `count(x)` words of length `t` end at `x`, out of `(2d+1)^t`.
#[derive(Clone, Debug)]
pub struct ExactTable {
    pub step_count: usize,
    pub alphabet_size: u128,
    pub counts: FxHashMap<GroupElement, u128>,
}

impl ExactTable {
    pub fn delta(spec: &GroupSpec) -> Self {
        let mut counts = FxHashMap::default();
        counts.insert(spec.identity(), 1);
        ExactTable { step_count: 0, alphabet_size: spec.alphabet().len() as u128, counts }
    }

    pub fn denominator(&self) -> u128 {
        self.alphabet_size.pow(self.step_count as u32)
    }

    pub fn probability(&self, x: &GroupElement) -> Ratio<u128> {
        Ratio::new(self.counts.get(x).copied().unwrap_or(0), self.denominator())
    }

    pub fn convolve(&self, spec: &GroupSpec) -> Result<ExactTable> {
        if self.denominator().checked_mul(self.alphabet_size).is_none() {
            return Err(Error::Overflow);
        }
        let moves: Vec<GroupElement> =
            spec.alphabet().into_iter().map(|l| spec.letter_element(l)).collect::<Result<_>>()?;
        let mut counts = FxHashMap::default();
        for (y, &c) in &self.counts {
            for g in &moves {
                *counts.entry(spec.mul(y, g)?).or_insert(0u128) += c;
            }
        }
        Ok(ExactTable {
            step_count: self.step_count + 1,
            alphabet_size: self.alphabet_size,
            counts,
        })
    }
}

pub fn exact_tables(spec: &GroupSpec, n: usize) -> Result<Vec<ExactTable>> {
    let mut out = vec![ExactTable::delta(spec)];
    for _ in 0..n {
        let next = out.last().unwrap().convolve(spec)?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::metric::Metric;
    use crate::group::LazyWord;

    fn spec(id: &str) -> GroupSpec {
        GroupSpec::parse(id).unwrap()
    }

    /// Brute force over all `(2d+1)^n` words.
    fn enumerate_endpoints(spec: &GroupSpec, n: usize) -> FxHashMap<GroupElement, u128> {
        let alphabet = spec.alphabet();
        let k = alphabet.len();
        let mut out = FxHashMap::default();
        let total = k.pow(n as u32);
        for mut code in 0..total {
            let mut letters = Vec::with_capacity(n);
            for _ in 0..n {
                letters.push(alphabet[code % k]);
                code /= k;
            }
            let g = spec.eval_word(&LazyWord::new(letters)).unwrap();
            *out.entry(g).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn one_step_is_the_measure() {
        for id in ["z1", "z2", "heis3", "filiform4"] {
            let s = spec(id);
            let m = step_measure(&s).unwrap();
            let t = ProbabilityTable::delta(&s, 0.0).convolve(&s, &m).unwrap();
            assert_eq!(t.support_len(), m.len());
            for (_, g, p) in &m.support {
                assert!((t.get(g) - p).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_step_return_probabilities() {
        // 25 pairs in Z^2, 5 of them loops; 9 pairs in Z, 3 loops
        let s = spec("z2");
        let t = power_table(&s, 2, TableOptions::default()).unwrap();
        assert!((t.get(&s.identity()) - 0.2).abs() < 1e-15);
        let s = spec("z1");
        let t = power_table(&s, 2, TableOptions::default()).unwrap();
        assert!((t.get(&s.identity()) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_tables_match_enumeration() {
        for (id, n) in [("z2", 4), ("z1", 6), ("heis3", 5)] {
            let s = spec(id);
            let exact = exact_tables(&s, n).unwrap();
            assert_eq!(exact[n].counts, enumerate_endpoints(&s, n), "{id}");
            assert_eq!(exact[0].probability(&s.identity()), Ratio::from_integer(1));
        }
        let s = spec("z2");
        let exact = exact_tables(&s, 4).unwrap();
        let float = power_table(&s, 4, TableOptions::default()).unwrap();
        for (g, c) in &exact[4].counts {
            assert!((float.get(g) - *c as f64 / 625.0).abs() < 1e-15);
        }
    }

    #[test]
    fn layouts_agree_with_sparse_reference() {
        // the same group through the sparse path must give the same numbers
        for id in ["z1", "z2", "z3", "heis3"] {
            let s = spec(id);
            let m = step_measure(&s).unwrap();
            let mut fast = ProbabilityTable::delta(&s, 0.0);
            let mut slow = ProbabilityTable {
                step_count: 0,
                arity: s.coordinate_arity,
                relative_floor: 0.0,
                lost_mass: 0.0,
                storage: Storage::Sparse(FxHashMap::from_iter([(s.identity(), 1.0)])),
            };
            for _ in 0..7 {
                fast = fast.convolve(&s, &m).unwrap();
                slow = slow.convolve(&s, &m).unwrap();
            }
            assert_eq!(fast.support_len(), slow.support_len(), "{id}");
            slow.for_each(|g, p| assert!((fast.get(&g) - p).abs() < 1e-16, "{id} {g}"));
        }
    }

    #[test]
    fn mass_symmetry_and_support() {
        for id in ["z2", "heis3", "filiform4"] {
            let s = spec(id);
            let metric = Metric::new(&s, 16).unwrap();
            let tables = return_tables(&s, 16, TableOptions::default()).unwrap();
            for (t, table) in tables.iter().enumerate() {
                assert_eq!(table.step_count(), t);
                assert!((table.mass() + table.lost_mass() - 1.0).abs() < 1e-12, "{id} t={t}");
                table.for_each(|g, p| {
                    assert!(metric.norm(&g).unwrap() as usize <= t);
                    assert!((table.get(&s.inverse(&g).unwrap()) - p).abs() < 1e-12);
                });
            }
        }
    }

    #[test]
    fn truncation_records_lost_mass_without_renormalizing() {
        let s = spec("z2");
        let t = power_table(&s, 64, TableOptions { relative_floor: 1e-6, ..Default::default() })
            .unwrap();
        assert!(t.lost_mass() > 0.0);
        assert!((t.mass() + t.lost_mass() - 1.0).abs() < 1e-12);
        assert!(t.mass() < 1.0);
    }

    #[test]
    fn parity_classes_fill_the_ball_in_z() {
        let s = spec("z1");
        let t =
            power_table(&s, 9, TableOptions { relative_floor: 0.0, ..Default::default() }).unwrap();
        // lazy walk on Z reaches every point of [-9, 9]
        assert_eq!(t.support_len(), 19);
    }

    #[test]
    fn budget_is_enforced() {
        let s = spec("heis3");
        let r = return_tables(&s, 30, TableOptions { budget: 1000, ..Default::default() });
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }
}
