//! Sphere and ball counts, polynomial growth degree.

use super::metric::bfs_ball;
use super::{GroupId, GroupSpec};
use crate::error::Result;

/// `#S(e, r)` for `r = 0..=radius`.
pub fn ball_census(spec: &GroupSpec, radius: u32, budget: usize) -> Result<Vec<u64>> {
    let ball = bfs_ball(spec, radius, budget)?;
    let mut spheres = vec![0u64; radius as usize + 1];
    for d in ball.values() {
        spheres[*d as usize] += 1;
    }
    Ok(spheres)
}

/// Partial sums `#B(e, r)`.
pub fn ball_sizes(spheres: &[u64]) -> Vec<u64> {
    spheres
        .iter()
        .scan(0u64, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect()
}

/// Degree `D` of polynomial volume growth, `#B(e, r) = Theta(r^D)`.
pub fn growth_degree(spec: &GroupSpec) -> u32 {
    match spec.id {
        GroupId::FreeAbelian(d) => d as u32,
        GroupId::Heisenberg3 => 4,
        GroupId::FreeNilpotentClass2(k) => {
            let k = k as u32;
            k + k * (k - 1)
        }
        GroupId::Filiform4 => 7,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_balls() {
        let z2 = GroupSpec::parse("z2").unwrap();
        let b = ball_sizes(&ball_census(&z2, 2, 1000).unwrap());
        assert_eq!(b, vec![1, 5, 13]);

        let h = GroupSpec::parse("heis3").unwrap();
        let b = ball_sizes(&ball_census(&h, 2, 1000).unwrap());
        assert_eq!(b, vec![1, 5, 17]);
    }

    #[test]
    fn catalog_degrees() {
        let d = |id: &str| growth_degree(&GroupSpec::parse(id).unwrap());
        assert_eq!(d("z2"), 2);
        assert_eq!(d("heis3"), 4);
        assert_eq!(d("fnil2-3"), 9);
        assert_eq!(d("filiform4"), 7);
    }
}
