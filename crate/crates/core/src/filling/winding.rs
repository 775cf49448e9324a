//! Exact filling area of planar lattice loops.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::group::LazyWord;

/// Sum over unit cells of the absolute winding number of a loop in `Z^2`
/// (letters `a`, `b` and inverses; lazy letters ignored).
pub fn winding_area(w: &LazyWord) -> Result<u64> {
    // column x -> (height, +-1) of horizontal edges crossing it
    let mut columns: FxHashMap<i64, Vec<(i64, i64)>> = FxHashMap::default();
    let (mut x, mut y) = (0i64, 0i64);
    for &l in &w.letters {
        match (l.generator(), l.is_inverse()) {
            (None, _) => {}
            // counterclockwise loops cross the top of a cell leftward
            (Some(0), false) => {
                columns.entry(x).or_default().push((y, -1));
                x += 1;
            }
            (Some(0), true) => {
                x -= 1;
                columns.entry(x).or_default().push((y, 1));
            }
            (Some(1), false) => y += 1,
            (Some(1), true) => y -= 1,
            _ => {
                return Err(Error::InvalidWord(format!(
                    "letter `{}` is not a plane step",
                    l.to_char()
                )))
            }
        }
    }
    if x != 0 || y != 0 {
        return Err(Error::NotALoop(w.to_string()));
    }
    let mut area = 0u64;
    for (_, mut edges) in columns {
        edges.sort_unstable();
        // winding of cell (x, j) = sum of edges with height > j; zero below
        // the lowest edge, and the sums telescope to zero above the highest
        let mut above: i64 = edges.iter().map(|e| e.1).sum();
        for k in 0..edges.len() {
            above -= edges[k].1;
            let next = if k + 1 < edges.len() { edges[k + 1].0 } else { edges[k].0 };
            area += above.unsigned_abs() * (next - edges[k].0) as u64;
        }
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(s: &str) -> u64 {
        winding_area(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(area("abAB"), 1);
        assert_eq!(area("baBA"), 1);
        assert_eq!(area("aabbAABB"), 4);
        // two cells of opposite orientation: signed area 0
        assert_eq!(area("abABAbaB"), 2);
        // one cell traversed both ways is freely trivial
        assert_eq!(area("abABbaBA"), 0);
        assert_eq!(area(""), 0);
        assert_eq!(area("a.A.."), 0);
        // the same cell twice
        assert_eq!(area("abABabAB"), 2);
    }

    #[test]
    fn rejects_non_loops() {
        assert!(matches!(winding_area(&"ab".parse().unwrap()), Err(Error::NotALoop(_))));
        assert!(matches!(winding_area(&"cC".parse().unwrap()), Err(Error::InvalidWord(_))));
    }
}
