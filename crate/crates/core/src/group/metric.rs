//! Word metric and canonical geodesics.
//!
//! Three exact back ends:
//!
//! * `FreeAbelian`: the L1 norm.
//! * `Heisenberg3`: a lattice path from the origin with endpoint `(x, y)` and
//!   length `L` reaches exactly the `z` values in `[zmin_L(x,y), zmax_L(x,y)]`;
//!   both extremes satisfy a small recursion over `L`, so the distance is the
//!   least admissible `L`. Checked against breadth-first search in tests.
//! * everything else: breadth-first search from the identity, memoized.

use rustc_hash::FxHashMap;

use super::word::Letter;
use super::{GroupElement, GroupId, GroupSpec};
use crate::error::{Error, Result};

/// Default limit on the number of cached ball elements.
pub const DEFAULT_BALL_BUDGET: usize = 30_000_000;

#[derive(Clone, Debug)]
enum Backend {
    L1,
    Area(AreaProfile),
    Bfs(FxHashMap<GroupElement, u32>),
}

/// Word metric of a catalog group with respect to its standard generators,
/// exact up to `cap`. Immutable once built.
#[derive(Clone, Debug)]
pub struct Metric {
    spec: GroupSpec,
    cap: u32,
    backend: Backend,
}

impl Metric {
    /// Fastest exact back end for the group.
    pub fn new(spec: &GroupSpec, cap: u32) -> Result<Self> {
        let backend = match spec.id {
            GroupId::FreeAbelian(_) => Backend::L1,
            GroupId::Heisenberg3 => Backend::Area(AreaProfile::build(cap)),
            _ => Backend::Bfs(bfs_ball(spec, cap, DEFAULT_BALL_BUDGET)?),
        };
        Ok(Metric { spec: spec.clone(), cap, backend })
    }

    /// Breadth-first back end regardless of group.
    pub fn bfs(spec: &GroupSpec, cap: u32, budget: usize) -> Result<Self> {
        Ok(Metric { spec: spec.clone(), cap, backend: Backend::Bfs(bfs_ball(spec, cap, budget)?) })
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// `d(e, g)`.
    pub fn norm(&self, g: &GroupElement) -> Result<u32> {
        let exceeded = Error::CapExceeded { cap: self.cap };
        match &self.backend {
            Backend::L1 => {
                let d: u64 = g.coords().iter().map(|c| c.unsigned_abs()).sum();
                if d > self.cap as u64 {
                    Err(exceeded)
                } else {
                    Ok(d as u32)
                }
            }
            Backend::Area(p) => p.distance(g.get(0), g.get(1), g.get(2)).ok_or(exceeded),
            Backend::Bfs(ball) => ball.get(g).copied().ok_or(exceeded),
        }
    }

    /// `d(x, y) = d(e, x^-1 y)`.
    pub fn distance(&self, x: &GroupElement, y: &GroupElement) -> Result<u32> {
        self.norm(&self.spec.left_quotient(x, y)?)
    }

    /// Lexicographically least shortest word evaluating to `g`.
    fn lexmin_word(&self, g: &GroupElement) -> Result<Vec<Letter>> {
        let d = self.norm(g)?;
        let moves: Vec<(Letter, GroupElement)> = self
            .spec
            .moves()
            .into_iter()
            .map(|l| Ok((l, self.spec.letter_element(l.inverse())?)))
            .collect::<Result<_>>()?;
        let mut cur = *g;
        let mut out = Vec::with_capacity(d as usize);
        for remaining in (0..d).rev() {
            let mut advanced = false;
            for (l, inv) in &moves {
                let next = self.spec.mul(inv, &cur)?;
                match self.norm(&next) {
                    Ok(r) if r == remaining => {
                        out.push(*l);
                        cur = next;
                        advanced = true;
                        break;
                    }
                    Ok(_) | Err(Error::CapExceeded { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            if !advanced {
                return Err(Error::Invariant(format!("no geodesic step from {cur}")));
            }
        }
        Ok(out)
    }

    /// Canonical geodesic from `x` to `y`. The word for the pair is computed
    /// on whichever of `x^-1 y`, `y^-1 x` has the larger coordinates, so
    /// `geodesic(y, x)` is always the reversed inverse of `geodesic(x, y)`.
    pub fn geodesic(&self, x: &GroupElement, y: &GroupElement) -> Result<Vec<Letter>> {
        let g = self.spec.left_quotient(x, y)?;
        let g_inv = self.spec.inverse(&g)?;
        if g.coords() >= g_inv.coords() {
            self.lexmin_word(&g)
        } else {
            Ok(super::word::inverse(&self.lexmin_word(&g_inv)?))
        }
    }
}

/// Convenience wrapper building a metric for a single query.
pub fn word_metric(
    spec: &GroupSpec,
    x: &GroupElement,
    y: &GroupElement,
    radius_cap: u32,
) -> Result<u32> {
    Metric::new(spec, radius_cap)?.distance(x, y)
}

/// Breadth-first ball `B(e, radius)` with distances.
pub fn bfs_ball(
    spec: &GroupSpec,
    radius: u32,
    budget: usize,
) -> Result<FxHashMap<GroupElement, u32>> {
    let moves: Vec<GroupElement> =
        spec.moves().into_iter().map(|l| spec.letter_element(l)).collect::<Result<_>>()?;
    let mut dist = FxHashMap::default();
    dist.insert(spec.identity(), 0u32);
    let mut frontier = vec![spec.identity()];
    for r in 1..=radius {
        let mut next = Vec::new();
        for g in &frontier {
            for m in &moves {
                let h = spec.mul(g, m)?;
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(h) {
                    e.insert(r);
                    next.push(h);
                }
            }
        }
        if dist.len() > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        frontier = next;
    }
    Ok(dist)
}

/// Extremal `z` values of lattice paths of each length.
#[derive(Clone, Debug)]
struct AreaProfile {
    levels: Vec<AreaLevel>,
}

#[derive(Clone, Debug)]
struct AreaLevel {
    radius: i64,
    zmin: Vec<i32>,
    zmax: Vec<i32>,
}

impl AreaLevel {
    fn index(&self, x: i64, y: i64) -> Option<usize> {
        let r = self.radius;
        if x.abs() + y.abs() > r {
            return None;
        }
        let w = 2 * r + 1;
        Some(((x + r) * w + (y + r)) as usize)
    }

    fn range(&self, x: i64, y: i64) -> Option<(i64, i64)> {
        let i = self.index(x, y)?;
        if self.zmin[i] > self.zmax[i] {
            None
        } else {
            Some((self.zmin[i] as i64, self.zmax[i] as i64))
        }
    }
}

impl AreaProfile {
    fn build(cap: u32) -> Self {
        let mut levels = vec![AreaLevel { radius: 0, zmin: vec![0], zmax: vec![0] }];
        for len in 1..=cap as i64 {
            let prev = levels.last().unwrap();
            let w = (2 * len + 1) as usize;
            let mut zmin = vec![i32::MAX; w * w];
            let mut zmax = vec![i32::MIN; w * w];
            for x in -len..=len {
                let rest = len - x.abs();
                for y in -rest..=rest {
                    let mut lo = i64::MAX;
                    let mut hi = i64::MIN;
                    // last letter a, A, b, B: (x,y,z) = (px,py,pz) * letter
                    for (px, py, dz) in
                        [(x - 1, y, 0), (x + 1, y, 0), (x, y - 1, x), (x, y + 1, -x)]
                    {
                        if let Some((plo, phi)) = prev.range(px, py) {
                            lo = lo.min(plo + dz);
                            hi = hi.max(phi + dz);
                        }
                    }
                    if lo <= hi {
                        let i = ((x + len) * (2 * len + 1) + (y + len)) as usize;
                        zmin[i] = lo as i32;
                        zmax[i] = hi as i32;
                    }
                }
            }
            levels.push(AreaLevel { radius: len, zmin, zmax });
        }
        AreaProfile { levels }
    }

    fn distance(&self, x: i64, y: i64, z: i64) -> Option<u32> {
        let start = x.checked_abs()?.checked_add(y.checked_abs()?)?;
        let mut len = start;
        while (len as usize) < self.levels.len() {
            let (lo, hi) = self.levels[len as usize].range(x, y)?;
            if lo <= z && z <= hi {
                return Some(len as u32);
            }
            len += 2;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::word::word_string;

    fn spec(id: &str) -> GroupSpec {
        GroupSpec::parse(id).unwrap()
    }

    #[test]
    fn abelian_norm() {
        let s = spec("z2");
        let m = Metric::new(&s, 20).unwrap();
        assert_eq!(m.norm(&GroupElement::from_slice(&[3, -2])).unwrap(), 5);
        assert_eq!(m.norm(&s.identity()).unwrap(), 0);
        assert!(matches!(
            m.norm(&GroupElement::from_slice(&[30, 0])),
            Err(Error::CapExceeded { cap: 20 })
        ));
    }

    #[test]
    fn heisenberg_centre_has_length_four() {
        let s = spec("heis3");
        let c = GroupElement::from_slice(&[0, 0, 1]);
        assert_eq!(word_metric(&s, &s.identity(), &c, 10).unwrap(), 4);
        let bfs = Metric::bfs(&s, 6, 1 << 20).unwrap();
        assert_eq!(bfs.norm(&c).unwrap(), 4);
    }

    #[test]
    fn area_profile_matches_bfs() {
        let s = spec("heis3");
        let radius = 12;
        let ball = bfs_ball(&s, radius, 1 << 24).unwrap();
        let fast = Metric::new(&s, radius + 4).unwrap();
        for (g, d) in &ball {
            assert_eq!(fast.norm(g).unwrap(), *d, "{g}");
        }
        // points outside the BFS ball must be reported farther than the radius
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                for z in -30i64..=30 {
                    let g = GroupElement::from_slice(&[x, y, z]);
                    if !ball.contains_key(&g) {
                        match fast.norm(&g) {
                            Ok(d) => assert!(d > radius, "{g} -> {d}"),
                            Err(Error::CapExceeded { .. }) => {}
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn geodesics_are_canonical() {
        let s = spec("z2");
        let m = Metric::new(&s, 10).unwrap();
        let e = s.identity();
        let g = GroupElement::from_slice(&[1, 1]);
        assert_eq!(word_string(&m.geodesic(&e, &g).unwrap()), "ab");
        assert_eq!(word_string(&m.geodesic(&g, &e).unwrap()), "BA");
        assert!(m.geodesic(&g, &g).unwrap().is_empty());
    }

    #[test]
    fn heisenberg_geodesic_evaluates_correctly() {
        let s = spec("heis3");
        let m = Metric::new(&s, 30).unwrap();
        let e = s.identity();
        for coords in [[0, 0, 1], [2, -1, 3], [-3, 2, -7], [0, 0, -9]] {
            let g = GroupElement::from_slice(&coords);
            let w = m.geodesic(&e, &g).unwrap();
            assert_eq!(w.len() as u32, m.norm(&g).unwrap());
            assert_eq!(s.eval_letters(&w).unwrap(), g);
        }
    }
}
