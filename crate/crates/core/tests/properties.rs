use std::sync::OnceLock;

use proptest::prelude::*;

use dehnlab::estimator::{exponent_fit, Curve, CurvePoint};
use dehnlab::filling::{dyadic_fill, fill_loop_word, has_filler, verify_certificate, winding_area};
use dehnlab::group::metric::Metric;
use dehnlab::group::CATALOG;
use dehnlab::{GroupSpec, LazyWord, Letter};

fn word_in(spec: &GroupSpec, picks: &[usize]) -> LazyWord {
    let alphabet = spec.alphabet();
    LazyWord::new(picks.iter().map(|&i| alphabet[i % alphabet.len()]).collect())
}

/// `u` followed by a geodesic back to the identity.
fn closed(spec: &GroupSpec, metric: &Metric, picks: &[usize]) -> LazyWord {
    let u = word_in(spec, picks);
    let end = spec.eval_word(&u).unwrap();
    let back = metric.geodesic(&end, &spec.identity()).unwrap();
    let mut letters = u.letters.clone();
    letters.extend(back);
    LazyWord::new(letters)
}

fn any_group() -> impl Strategy<Value = GroupSpec> {
    (0..CATALOG.len()).prop_map(|i| GroupSpec::parse(CATALOG[i]).unwrap())
}

/// Groups with a triangle filler.
fn filled_group() -> impl Strategy<Value = GroupSpec> {
    any_group().prop_filter("needs a filler", has_filler)
}

/// Radius 8 covers all distances between elements of word length 4; the
/// BFS balls of the larger groups are built once.
fn small_metric(spec: &GroupSpec) -> &'static Metric {
    static METRICS: OnceLock<Vec<Metric>> = OnceLock::new();
    let all = METRICS.get_or_init(|| {
        CATALOG.iter().map(|id| Metric::new(&GroupSpec::parse(id).unwrap(), 8).unwrap()).collect()
    });
    &all[CATALOG.iter().position(|id| *id == spec.name()).unwrap()]
}

fn picks(max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..64, 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(spec in any_group(), a in picks(10), b in picks(10), c in picks(10)) {
        let [x, y, z] = [&a, &b, &c].map(|p| spec.eval_word(&word_in(&spec, p)).unwrap());
        let e = spec.identity();
        let xy_z = spec.mul(&spec.mul(&x, &y).unwrap(), &z).unwrap();
        let x_yz = spec.mul(&x, &spec.mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(xy_z, x_yz);
        prop_assert_eq!(spec.mul(&x, &e).unwrap(), x);
        prop_assert_eq!(spec.mul(&e, &x).unwrap(), x);
        let inv = spec.inverse(&x).unwrap();
        prop_assert!(spec.mul(&x, &inv).unwrap().is_zero());
        prop_assert!(spec.mul(&inv, &x).unwrap().is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(spec in any_group(), a in picks(12), b in picks(12)) {
        let (u, v) = (word_in(&spec, &a), word_in(&spec, &b));
        let uv = spec.eval_word(&u.concat(&v)).unwrap();
        let prod = spec.mul(&spec.eval_word(&u).unwrap(), &spec.eval_word(&v).unwrap()).unwrap();
        prop_assert_eq!(uv, prod);
        let inv = spec.eval_word(&u.inverse()).unwrap();
        prop_assert_eq!(inv, spec.inverse(&spec.eval_word(&u).unwrap()).unwrap());
    }

    #[test]
    fn metric_invariants(spec in any_group(), a in picks(4), b in picks(4), c in picks(4)) {
        let metric = small_metric(&spec);
        let [x, y, z] = [&a, &b, &c].map(|p| spec.eval_word(&word_in(&spec, p)).unwrap());
        let dxy = metric.distance(&x, &y).unwrap();
        prop_assert_eq!(dxy, metric.distance(&y, &x).unwrap());
        prop_assert!(dxy <= metric.distance(&x, &z).unwrap() + metric.distance(&z, &y).unwrap());
        // left invariance
        let zx = spec.mul(&z, &x).unwrap();
        let zy = spec.mul(&z, &y).unwrap();
        prop_assert_eq!(dxy, metric.distance(&zx, &zy).unwrap());
        let u = word_in(&spec, &a);
        prop_assert!(metric.norm(&x).unwrap() as usize <= u.without_lazy().len());
        prop_assert_eq!(metric.norm(&x).unwrap() == 0, x.is_zero());
        let g = metric.geodesic(&spec.identity(), &x).unwrap();
        prop_assert_eq!(g.len() as u32, metric.norm(&x).unwrap());
        prop_assert_eq!(spec.eval_letters(&g).unwrap(), x);
    }

    #[test]
    fn exponent_fit_is_scale_invariant(
        slope in -2.0f64..3.0,
        base in 0.1f64..10.0,
        c in 0.01f64..100.0,
        noise in prop::collection::vec(0.9f64..1.1, 5),
    ) {
        let pts: Vec<CurvePoint> = [8u64, 16, 32, 64, 128]
            .iter()
            .zip(&noise)
            .map(|(&n, &k)| {
                let v = base * (n as f64).powf(slope) * k;
                CurvePoint { scale: n, value: v, stderr: 0.01 * v, samples: 100 }
            })
            .collect();
        let curve = Curve::new(pts).unwrap();
        let f = exponent_fit(&curve).unwrap();
        let g = exponent_fit(&curve.scaled(c)).unwrap();
        prop_assert!((f.slope - g.slope).abs() < 1e-9);
        prop_assert!((g.intercept - f.intercept - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn dyadic_certificates_verify(spec in filled_group(), a in picks(10), lazy in 0usize..4) {
        let metric = Metric::new(&spec, 32).unwrap();
        let mut w = closed(&spec, &metric, &a);
        w.letters.splice(0..0, std::iter::repeat(Letter::LAZY).take(lazy));
        let cert = dyadic_fill(&spec, &w).unwrap();
        prop_assert!(verify_certificate(&spec, &cert));
        let sorted = fill_loop_word(&spec, &w).unwrap();
        prop_assert!(verify_certificate(&spec, &sorted));
    }

    #[test]
    fn plane_sorter_dominates_winding(a in picks(14)) {
        let spec = GroupSpec::parse("z2").unwrap();
        let metric = Metric::new(&spec, 32).unwrap();
        let w = closed(&spec, &metric, &a);
        let cert = fill_loop_word(&spec, &w).unwrap();
        prop_assert!(cert.area() as u64 >= winding_area(&w).unwrap());
        prop_assert!(dyadic_fill(&spec, &w).unwrap().area() as u64 >= winding_area(&w).unwrap());
    }

    #[test]
    fn tampered_certificates_fail(a in picks(10), k in 0usize..64) {
        let spec = GroupSpec::parse("heis3").unwrap();
        let metric = Metric::new(&spec, 32).unwrap();
        let w = closed(&spec, &metric, &a);
        let mut cert = dyadic_fill(&spec, &w).unwrap();
        prop_assume!(!cert.steps.is_empty());
        let i = k % cert.steps.len();
        cert.steps[i].sign = -cert.steps[i].sign;
        prop_assert!(!verify_certificate(&spec, &cert));
    }
}
