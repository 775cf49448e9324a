//! Estimated curves and log-log exponent fits.

use serde::Serialize;

use super::stats::Moments;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub scale: u64,
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl CurvePoint {
    pub fn from_moments(scale: u64, m: &Moments) -> Self {
        CurvePoint { scale, value: m.mean, stderr: m.stderr(), samples: m.count }
    }

    /// A point known without sampling error.
    pub fn exact(scale: u64, value: f64) -> Self {
        CurvePoint { scale, value, stderr: 0.0, samples: 0 }
    }
}

/// Points with strictly increasing scales and finite, non-negative values.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        if points.windows(2).any(|p| p[0].scale >= p[1].scale) {
            return Err(Error::Domain("curve scales must be strictly increasing".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.value.is_finite() && p.value >= 0.0)) {
            return Err(Error::Domain(format!("bad curve value {} at scale {}", p.value, p.scale)));
        }
        if let Some(p) = points.iter().find(|p| !(p.stderr.is_finite() && p.stderr >= 0.0)) {
            return Err(Error::Domain(format!("bad stderr {} at scale {}", p.stderr, p.scale)));
        }
        Ok(Curve { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn at(&self, scale: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.scale == scale)
    }

    /// Values and standard errors multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Curve {
        Curve {
            points: self
                .points
                .iter()
                .map(|p| CurvePoint { value: p.value * c, stderr: p.stderr * c, ..*p })
                .collect(),
        }
    }

    /// Points with scale in `lo..=hi`.
    pub fn restricted(&self, lo: u64, hi: u64) -> Curve {
        Curve {
            points: self.points.iter().filter(|p| (lo..=hi).contains(&p.scale)).copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Scales that entered the fit.
    pub used: Vec<u64>,
    /// Leading scale left out for a relative stderr above `DROP_RELATIVE_STDERR`.
    pub dropped: Option<u64>,
}

pub const DROP_RELATIVE_STDERR: f64 = 0.2;

/// Least squares of `log value` on `log scale`, weighted by the inverse
/// squared relative stderr. Falls back to equal weights when any point has
/// zero stderr. The smallest scale is dropped when it is noisier than
/// `DROP_RELATIVE_STDERR` and at least three points remain.
pub fn exponent_fit(curve: &Curve) -> Result<ExponentFit> {
    if curve.len() < 3 {
        return Err(Error::Domain(format!("exponent fit needs 3 points, got {}", curve.len())));
    }
    if let Some(p) = curve.points.iter().find(|p| !(p.value > 0.0)) {
        return Err(Error::Domain(format!("non-positive value {} at scale {}", p.value, p.scale)));
    }
    let mut points = &curve.points[..];
    let mut dropped = None;
    let first = points[0];
    if points.len() >= 4 && first.stderr / first.value > DROP_RELATIVE_STDERR {
        dropped = Some(first.scale);
        points = &points[1..];
    }
    let weighted = points.iter().all(|p| p.stderr > 0.0);
    let xs: Vec<f64> = points.iter().map(|p| (p.scale as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.value.ln()).collect();
    let ws: Vec<f64> =
        points.iter().map(|p| if weighted { (p.value / p.stderr).powi(2) } else { 1.0 }).collect();
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += ws[i] * (xs[i] - mx).powi(2);
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let rss: f64 = (0..xs.len()).map(|i| (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
        (rss / (xs.len() - 2) as f64 / sxx).sqrt()
    };
    Ok(ExponentFit {
        slope,
        intercept,
        slope_stderr,
        used: points.iter().map(|p| p.scale).collect(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(u64, f64)]) -> Curve {
        Curve::new(points.iter().map(|&(s, v)| CurvePoint::exact(s, v)).collect()).unwrap()
    }

    #[test]
    fn power_law_and_constant() {
        let f = exponent_fit(&curve(&[(2, 4.0), (4, 16.0), (8, 64.0)])).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        let f = exponent_fit(&curve(&[(2, 3.0), (4, 3.0), (8, 3.0), (16, 3.0)])).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn scaling_shifts_only_the_intercept() {
        let c = Curve::new(vec![
            CurvePoint { scale: 4, value: 1.3, stderr: 0.1, samples: 10 },
            CurvePoint { scale: 8, value: 2.9, stderr: 0.2, samples: 10 },
            CurvePoint { scale: 16, value: 5.1, stderr: 0.2, samples: 10 },
            CurvePoint { scale: 32, value: 11.7, stderr: 0.9, samples: 10 },
        ])
        .unwrap();
        let a = exponent_fit(&c).unwrap();
        let b = exponent_fit(&c.scaled(7.0)).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((b.intercept - a.intercept - 7f64.ln()).abs() < 1e-12);
        assert!((a.slope_stderr - b.slope_stderr).abs() < 1e-12);
    }

    #[test]
    fn noisy_first_point_is_dropped() {
        let c = Curve::new(vec![
            CurvePoint { scale: 2, value: 1.0, stderr: 0.5, samples: 10 },
            CurvePoint { scale: 4, value: 4.0, stderr: 0.1, samples: 10 },
            CurvePoint { scale: 8, value: 16.0, stderr: 0.1, samples: 10 },
            CurvePoint { scale: 16, value: 64.0, stderr: 0.1, samples: 10 },
        ])
        .unwrap();
        let f = exponent_fit(&c).unwrap();
        assert_eq!(f.dropped, Some(2));
        assert_eq!(f.used, vec![4, 8, 16]);
        assert!((f.slope - 2.0).abs() < 1e-12);
        // never below three points
        let f = exponent_fit(&c.restricted(2, 8)).unwrap();
        assert_eq!(f.dropped, None);
    }

    #[test]
    fn domain_errors() {
        assert!(exponent_fit(&curve(&[(2, 4.0), (4, 16.0)])).is_err());
        assert!(exponent_fit(&curve(&[(2, 0.0), (4, 16.0), (8, 1.0)])).is_err());
        assert!(Curve::new(vec![CurvePoint::exact(4, 1.0), CurvePoint::exact(4, 2.0)]).is_err());
        assert!(Curve::new(vec![CurvePoint::exact(4, f64::NAN)]).is_err());
        assert!(Curve::new(vec![CurvePoint::exact(4, -1.0)]).is_err());
    }
}
