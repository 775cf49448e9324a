//! Exact arithmetic for a fixed catalog of nilpotent groups.
//!
//! Every group is stored in an integer normal-form chart:
//!
//! * `FreeAbelian(d)`: `v in Z^d`, componentwise addition.
//! * `Heisenberg3`: `(x, y, z)` with `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x*y')`.
//! * `FreeNilpotentClass2(k)`: `(v, M)` with `v in Z^k`, `M` indexed by pairs
//!   `i < j`, product `(v+v', M+M'+v_i*v'_j)`.
//! * `Filiform4`: `(v1, v2, v3; m)`, the semidirect product `Z^3 x| Z` where
//!   `Z` acts through the unipotent Jordan block. Generators are `t = (0;1)`
//!   and `s = (e3;0)`, so `[t,s] = e2` and `[t,[t,s]] = e1` is central.
//!
//! Arithmetic is checked; overflow is an error, never wraparound.

pub mod ball;
pub mod metric;
pub mod word;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
pub use word::{LazyWord, Letter};

/// Largest coordinate arity in the catalog (`fnil2-3`: 3 + 3).
pub const MAX_COORDS: usize = 6;

/// Every catalog group id.
pub const CATALOG: [&str; 10] =
    ["z1", "z2", "z3", "z4", "z5", "z6", "heis3", "fnil2-2", "fnil2-3", "filiform4"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupId {
    FreeAbelian(u8),
    Heisenberg3,
    FreeNilpotentClass2(u8),
    Filiform4,
}

impl GroupId {
    pub fn name(self) -> String {
        match self {
            GroupId::FreeAbelian(d) => format!("z{d}"),
            GroupId::Heisenberg3 => "heis3".into(),
            GroupId::FreeNilpotentClass2(k) => format!("fnil2-{k}"),
            GroupId::Filiform4 => "filiform4".into(),
        }
    }
}

impl FromStr for GroupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s {
            "heis3" => GroupId::Heisenberg3,
            "filiform4" => GroupId::Filiform4,
            "fnil2-2" => GroupId::FreeNilpotentClass2(2),
            "fnil2-3" => GroupId::FreeNilpotentClass2(3),
            _ => match s.strip_prefix('z').and_then(|d| d.parse::<u8>().ok()) {
                Some(d) if (1..=6).contains(&d) && s == format!("z{d}") => GroupId::FreeAbelian(d),
                _ => return Err(Error::UnknownGroup(s.to_string())),
            },
        };
        Ok(id)
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// An element in normal-form coordinates. Unused trailing slots are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    arity: u8,
    coords: [i64; MAX_COORDS],
}

impl GroupElement {
    pub fn zero(arity: usize) -> Self {
        debug_assert!(arity <= MAX_COORDS);
        GroupElement { arity: arity as u8, coords: [0; MAX_COORDS] }
    }

    pub fn from_slice(coords: &[i64]) -> Self {
        let mut e = GroupElement::zero(coords.len());
        e.coords[..coords.len()].copy_from_slice(coords);
        e
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.arity as usize]
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn get(&self, i: usize) -> i64 {
        self.coords[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Prefix sequence `w(0), ..., w(n)` of a lazy word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTrace {
    pub prefixes: Vec<GroupElement>,
}

impl PathTrace {
    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn endpoint(&self) -> GroupElement {
        *self.prefixes.last().expect("trace always holds w(0)")
    }
}

/// A catalog group together with its presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub id: GroupId,
    pub generator_count: usize,
    pub relators: Vec<Vec<Letter>>,
    pub coordinate_arity: usize,
    generators: Vec<GroupElement>,
}

#[inline]
fn ck(v: Option<i64>) -> Result<i64> {
    v.ok_or(Error::Overflow)
}

fn pair_count(k: usize) -> usize {
    k * (k - 1) / 2
}

/// `binomial(m, 2)` for any integer `m`, which is what `phi^m` needs.
fn choose2(m: i64) -> Result<i64> {
    let p = ck(m.checked_mul(m - 1))?;
    Ok(p / 2)
}

impl GroupSpec {
    pub fn new(id: GroupId) -> Result<Self> {
        use word::{commutator, Letter as L};
        let a = |i: usize| vec![L::gen(i)];
        let (d, arity, relators) = match id {
            GroupId::FreeAbelian(d) => {
                let d = d as usize;
                if !(1..=MAX_COORDS).contains(&d) {
                    return Err(Error::UnknownGroup(id.name()));
                }
                let mut rels = Vec::new();
                for i in 0..d {
                    for j in i + 1..d {
                        rels.push(commutator(&a(i), &a(j)));
                    }
                }
                (d, d, rels)
            }
            GroupId::Heisenberg3 => {
                let c = commutator(&a(0), &a(1));
                (2, 3, vec![commutator(&a(0), &c), commutator(&a(1), &c)])
            }
            GroupId::FreeNilpotentClass2(k) => {
                let k = k as usize;
                if !(2..=3).contains(&k) {
                    return Err(Error::UnknownGroup(id.name()));
                }
                let mut rels = Vec::new();
                for i in 0..k {
                    for j in 0..k {
                        for l in j + 1..k {
                            rels.push(commutator(&a(i), &commutator(&a(j), &a(l))));
                        }
                    }
                }
                (k, k + pair_count(k), rels)
            }
            GroupId::Filiform4 => {
                let (t, s) = (a(0), a(1));
                let ts = commutator(&t, &s);
                let tts = commutator(&t, &ts);
                (2, 4, vec![commutator(&s, &ts), commutator(&t, &tts), commutator(&s, &tts)])
            }
        };
        let mut spec = GroupSpec {
            id,
            generator_count: d,
            relators,
            coordinate_arity: arity,
            generators: Vec::new(),
        };
        spec.generators = (0..d)
            .map(|i| {
                let mut g = GroupElement::zero(arity);
                match id {
                    // t = (0,0,0;1), s = (0,0,1;0)
                    GroupId::Filiform4 => g.coords[if i == 0 { 3 } else { 2 }] = 1,
                    _ => g.coords[i] = 1,
                }
                g
            })
            .collect();
        Ok(spec)
    }

    pub fn parse(id: &str) -> Result<Self> {
        GroupSpec::new(id.parse()?)
    }

    pub fn name(&self) -> String {
        self.id.name()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::zero(self.coordinate_arity)
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        self.generators[i]
    }

    /// Alphabet in the fixed order `. a A b B ...`.
    pub fn alphabet(&self) -> Vec<Letter> {
        let mut ls = vec![Letter::LAZY];
        for i in 0..self.generator_count {
            ls.push(Letter::gen(i));
            ls.push(Letter::gen_inv(i));
        }
        ls
    }

    /// Generator letters without the lazy letter, in canonical order.
    pub fn moves(&self) -> Vec<Letter> {
        self.alphabet().into_iter().skip(1).collect()
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        match l.generator() {
            Some(g) if g >= self.generator_count => Err(Error::InvalidWord(format!(
                "letter `{}` out of range for {} ({} generators)",
                l.to_char(),
                self.name(),
                self.generator_count
            ))),
            _ => Ok(()),
        }
    }

    pub fn letter_element(&self, l: Letter) -> Result<GroupElement> {
        self.check_letter(l)?;
        match l.generator() {
            None => Ok(self.identity()),
            Some(g) if l.is_inverse() => self.inverse(&self.generators[g]),
            Some(g) => Ok(self.generators[g]),
        }
    }

    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        let mut out = GroupElement::zero(self.coordinate_arity);
        let (p, q) = (&x.coords, &y.coords);
        let o = &mut out.coords;
        match self.id {
            GroupId::FreeAbelian(d) => {
                for i in 0..d as usize {
                    o[i] = ck(p[i].checked_add(q[i]))?;
                }
            }
            GroupId::Heisenberg3 => {
                o[0] = ck(p[0].checked_add(q[0]))?;
                o[1] = ck(p[1].checked_add(q[1]))?;
                let cross = ck(p[0].checked_mul(q[1]))?;
                o[2] = ck(p[2].checked_add(q[2]).and_then(|s| s.checked_add(cross)))?;
            }
            GroupId::FreeNilpotentClass2(k) => {
                let k = k as usize;
                for i in 0..k {
                    o[i] = ck(p[i].checked_add(q[i]))?;
                }
                let mut slot = k;
                for i in 0..k {
                    for j in i + 1..k {
                        let cross = ck(p[i].checked_mul(q[j]))?;
                        o[slot] =
                            ck(p[slot].checked_add(q[slot]).and_then(|s| s.checked_add(cross)))?;
                        slot += 1;
                    }
                }
            }
            GroupId::Filiform4 => {
                let acted = jordan_power(p[3], [q[0], q[1], q[2]])?;
                for i in 0..3 {
                    o[i] = ck(p[i].checked_add(acted[i]))?;
                }
                o[3] = ck(p[3].checked_add(q[3]))?;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, x: &GroupElement) -> Result<GroupElement> {
        let mut out = GroupElement::zero(self.coordinate_arity);
        let p = &x.coords;
        let o = &mut out.coords;
        let neg = |v: i64| ck(v.checked_neg());
        match self.id {
            GroupId::FreeAbelian(d) => {
                for i in 0..d as usize {
                    o[i] = neg(p[i])?;
                }
            }
            GroupId::Heisenberg3 => {
                o[0] = neg(p[0])?;
                o[1] = neg(p[1])?;
                o[2] = ck(ck(p[0].checked_mul(p[1]))?.checked_sub(p[2]))?;
            }
            GroupId::FreeNilpotentClass2(k) => {
                let k = k as usize;
                for i in 0..k {
                    o[i] = neg(p[i])?;
                }
                let mut slot = k;
                for i in 0..k {
                    for j in i + 1..k {
                        o[slot] = ck(ck(p[i].checked_mul(p[j]))?.checked_sub(p[slot]))?;
                        slot += 1;
                    }
                }
            }
            GroupId::Filiform4 => {
                let m = neg(p[3])?;
                let back = jordan_power(m, [p[0], p[1], p[2]])?;
                for i in 0..3 {
                    o[i] = neg(back[i])?;
                }
                o[3] = m;
            }
        }
        Ok(out)
    }

    /// `x^-1 y`.
    pub fn left_quotient(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.mul(&self.inverse(x)?, y)
    }

    pub fn eval_word(&self, w: &LazyWord) -> Result<GroupElement> {
        self.eval_letters(&w.letters)
    }

    pub fn eval_letters(&self, w: &[Letter]) -> Result<GroupElement> {
        let mut g = self.identity();
        for &l in w {
            if !l.is_lazy() {
                g = self.mul(&g, &self.letter_element(l)?)?;
            } else {
                self.check_letter(l)?;
            }
        }
        Ok(g)
    }

    pub fn trace(&self, w: &LazyWord) -> Result<PathTrace> {
        let mut prefixes = Vec::with_capacity(w.len() + 1);
        let mut g = self.identity();
        prefixes.push(g);
        for &l in &w.letters {
            g = self.mul(&g, &self.letter_element(l)?)?;
            prefixes.push(g);
        }
        Ok(PathTrace { prefixes })
    }

    pub fn is_loop(&self, w: &LazyWord) -> Result<bool> {
        Ok(self.eval_word(w)?.is_zero())
    }

    /// Abelianization `G -> Z^d` sending generator `i` to `e_i`.
    pub fn abelian_image(&self, x: &GroupElement) -> GroupElement {
        match self.id {
            GroupId::FreeAbelian(_) => *x,
            GroupId::Heisenberg3 | GroupId::FreeNilpotentClass2(_) => {
                GroupElement::from_slice(&x.coords[..self.generator_count])
            }
            GroupId::Filiform4 => GroupElement::from_slice(&[x.coords[3], x.coords[2]]),
        }
    }

    /// Whether the last coordinate is central and enters products additively,
    /// with the other coordinates fitting in a 2d grid.
    pub(crate) fn has_column_layout(&self) -> bool {
        matches!(self.id, GroupId::FreeAbelian(1..=3) | GroupId::Heisenberg3)
    }
}

/// `phi^m v` for the unipotent Jordan block `phi = I + N`, `N e3 = e2`, `N e2 = e1`.
fn jordan_power(m: i64, v: [i64; 3]) -> Result<[i64; 3]> {
    let c2 = choose2(m)?;
    let first = ck(v[0]
        .checked_add(ck(m.checked_mul(v[1]))?)
        .and_then(|s| c2.checked_mul(v[2]).and_then(|t| s.checked_add(t))))?;
    let second = ck(v[1].checked_add(ck(m.checked_mul(v[2]))?))?;
    Ok([first, second, v[2]])
}

/// Quotient `Filiform4 -> Heisenberg3` killing the distorted centre `<e1>`.
pub fn filiform_to_heisenberg(x: &GroupElement) -> GroupElement {
    GroupElement::from_slice(&[x.get(3), x.get(2), x.get(1)])
}

/// Quotient `Heisenberg3 -> Z^2`.
pub fn heisenberg_to_plane(x: &GroupElement) -> GroupElement {
    GroupElement::from_slice(&[x.get(0), x.get(1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: &str) -> GroupSpec {
        GroupSpec::parse(id).unwrap()
    }

    fn word(s: &str) -> LazyWord {
        s.parse().unwrap()
    }

    #[test]
    fn catalog_ids_round_trip() {
        for id in ["z1", "z2", "z3", "heis3", "fnil2-3", "filiform4"] {
            assert_eq!(spec(id).name(), id);
        }
        assert!(matches!(GroupSpec::parse("z9"), Err(Error::UnknownGroup(_))));
        assert!(GroupSpec::parse("z02").is_err());
    }

    #[test]
    fn heisenberg_commutator_is_central_generator() {
        let h = spec("heis3");
        assert_eq!(h.eval_word(&word("abAB")).unwrap().coords(), &[0, 0, 1]);
    }

    #[test]
    fn empty_word_is_identity() {
        for id in ["z2", "heis3", "fnil2-3", "filiform4"] {
            let s = spec(id);
            assert_eq!(s.eval_word(&LazyWord::empty()).unwrap(), s.identity());
        }
    }

    #[test]
    fn abelian_sums() {
        assert_eq!(spec("z2").eval_word(&word("aab")).unwrap().coords(), &[2, 1]);
    }

    #[test]
    fn out_of_range_letter_is_rejected() {
        assert!(matches!(spec("z2").eval_word(&word("ac")), Err(Error::InvalidWord(_))));
    }

    #[test]
    fn traces() {
        let t = spec("z1").trace(&word("a.A")).unwrap();
        let got: Vec<Vec<i64>> = t.prefixes.iter().map(|p| p.coords().to_vec()).collect();
        assert_eq!(got, vec![vec![0], vec![1], vec![1], vec![0]]);

        let t = spec("heis3").trace(&word("ab")).unwrap();
        let got: Vec<Vec<i64>> = t.prefixes.iter().map(|p| p.coords().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0, 0], vec![1, 0, 0], vec![1, 1, 1]]);

        let t = spec("heis3").trace(&LazyWord::empty()).unwrap();
        assert_eq!(t.prefixes, vec![spec("heis3").identity()]);
    }

    #[test]
    fn relators_are_trivial() {
        for id in ["z1", "z2", "z3", "z4", "heis3", "fnil2-2", "fnil2-3", "filiform4"] {
            let s = spec(id);
            for r in &s.relators {
                assert!(s.eval_letters(r).unwrap().is_zero(), "{id}: {}", word::word_string(r));
            }
        }
    }

    #[test]
    fn filiform_commutators() {
        let f = spec("filiform4");
        assert_eq!(f.eval_word(&word("abAB")).unwrap().coords(), &[0, 1, 0, 0]);
        let tts = word::commutator(&[Letter::gen(0)], &word::parse_word("abAB").unwrap());
        assert_eq!(f.eval_letters(&tts).unwrap().coords(), &[1, 0, 0, 0]);
    }

    #[test]
    fn overflow_is_an_error() {
        let h = spec("heis3");
        let big = GroupElement::from_slice(&[i64::MAX / 2, i64::MAX / 2, 0]);
        assert_eq!(h.mul(&big, &big), Err(Error::Overflow));
    }
}
