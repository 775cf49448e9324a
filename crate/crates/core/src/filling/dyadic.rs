//! Geodesic triangle fills and the dyadic filling of a loop.
//!
//! Level `i` of a loop `w` of length `n` is the closed polygon through the
//! vertices `w(floor(j n / 2^i))`, `j = 0..=2^i`, joined by canonical
//! geodesics. Passing from level `i` to `i + 1` replaces each edge by two,
//! which costs one geodesic triangle per edge. At level `floor(log2 n) + 1`
//! consecutive vertices are at most one letter apart, so that polygon is `w`
//! itself with lazy letters removed; its triangles have a repeated vertex.

use rayon::prelude::*;

use super::certificate::{CertificateStep, FillingCertificate};
use super::fillers::fill_loop_steps;
use crate::error::{Error, Result};
use crate::group::metric::Metric;
use crate::group::word::{inverse, push_reduced};
use crate::group::{GroupElement, GroupSpec, LazyWord, Letter};

/// Vertex times `floor(j n / 2^level)` for `j = 0..=2^level`.
pub fn dyadic_vertices(n: usize, level: u32) -> Vec<usize> {
    let parts = 1u128 << level;
    (0..=parts).map(|j| (j * n as u128 / parts) as usize).collect()
}

/// Number of refinements needed to reach the loop itself.
pub fn dyadic_depth(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        n.ilog2() + 1
    }
}

/// Geodesic-triangle filler bound to one metric.
pub struct Filler {
    spec: GroupSpec,
    metric: Metric,
}

impl Filler {
    pub fn new(spec: &GroupSpec, radius_cap: u32) -> Result<Self> {
        if !super::fillers::has_filler(spec) {
            return Err(Error::NoFiller(spec.name()));
        }
        Ok(Filler { spec: spec.clone(), metric: Metric::new(spec, radius_cap)? })
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Boundary word `gamma(x,y) gamma(y,z) gamma(z,x)`.
    pub fn triangle_word(
        &self,
        x: &GroupElement,
        y: &GroupElement,
        z: &GroupElement,
    ) -> Result<Vec<Letter>> {
        let mut w = self.metric.geodesic(x, y)?;
        w.extend(self.metric.geodesic(y, z)?);
        w.extend(self.metric.geodesic(z, x)?);
        Ok(w)
    }

    pub fn triangle(
        &self,
        x: &GroupElement,
        y: &GroupElement,
        z: &GroupElement,
    ) -> Result<FillingCertificate> {
        let w = self.triangle_word(x, y, z)?;
        let steps = fill_loop_steps(&self.spec, &w)?;
        Ok(FillingCertificate::new(LazyWord::new(w), steps))
    }

    /// Dyadic certificate for a loop.
    pub fn dyadic(&self, w: &LazyWord) -> Result<FillingCertificate> {
        let trace = self.spec.trace(w)?;
        let n = w.len();
        if !trace.endpoint().is_zero() {
            return Err(Error::NotALoop(w.to_string()));
        }
        let mut blocks: Vec<Vec<CertificateStep>> = Vec::new();
        for level in 0..dyadic_depth(n) {
            let coarse = dyadic_vertices(n, level);
            let fine = dyadic_vertices(n, level + 1);
            let at = |t: usize| &trace.prefixes[t];
            // prefix of the coarse polygon before each edge
            let mut prefixes = Vec::with_capacity(coarse.len());
            let mut p: Vec<Letter> = Vec::new();
            for j in 0..coarse.len() - 1 {
                prefixes.push(p.clone());
                push_reduced(&mut p, &self.metric.geodesic(at(coarse[j]), at(coarse[j + 1]))?);
            }
            let level_steps: Vec<Vec<CertificateStep>> = (0..coarse.len() - 1)
                .into_par_iter()
                .map(|j| {
                    let (x, y, z) = (at(fine[2 * j]), at(fine[2 * j + 1]), at(fine[2 * j + 2]));
                    let tri = self.triangle_word(x, y, z)?;
                    let steps = fill_loop_steps(&self.spec, &tri)?;
                    let u_inv = inverse(&prefixes[j]);
                    Ok(steps
                        .into_iter()
                        .map(|mut s| {
                            push_reduced(&mut s.conjugator, &u_inv);
                            s
                        })
                        .collect())
                })
                .collect::<Result<_>>()?;
            blocks.push(level_steps.into_iter().flatten().collect());
        }
        let steps = blocks.into_iter().rev().flatten().collect();
        Ok(FillingCertificate::new(w.clone(), steps))
    }
}

/// Certificate for the geodesic triangle on `x, y, z`.
pub fn triangle_fill(
    spec: &GroupSpec,
    x: &GroupElement,
    y: &GroupElement,
    z: &GroupElement,
    radius_cap: u32,
) -> Result<FillingCertificate> {
    Filler::new(spec, radius_cap)?.triangle(x, y, z)
}

/// Dyadic certificate for a loop of length `n`; distances never exceed `n / 2`.
pub fn dyadic_fill(spec: &GroupSpec, w: &LazyWord) -> Result<FillingCertificate> {
    Filler::new(spec, (w.len() / 2).max(1) as u32)?.dyadic(w)
}
