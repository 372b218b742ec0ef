//! Root extraction for complex monic polynomials via companion-matrix
//! eigenvalues, with multiplicity clustering.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// All roots (with multiplicity, unclustered) of the monic polynomial
/// `x^n + a_{n-1} x^{n-1} + ... + a_0` given by `coeffs = [a_0, ..., a_{n-1}]`.
///
/// Eigenvalues of the companion matrix, polished by a few Newton steps away
/// from near-critical points. Sorted by `(re, im)`.
pub fn monic_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut roots = match n {
        0 => Vec::new(),
        1 => vec![-coeffs[0]],
        2 => quadratic_roots(coeffs[0], coeffs[1]),
        _ => companion_eigenvalues(coeffs),
    };
    for r in roots.iter_mut() {
        *r = newton_polish(coeffs, *r);
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    roots
}

/// Stable quadratic formula for `x^2 + bx + c`.
fn quadratic_roots(c: Complex64, b: Complex64) -> Vec<Complex64> {
    let disc = (b * b - 4.0 * c).sqrt();
    // pick the sign avoiding cancellation in -b -+ disc
    let q = if (b + disc).norm() >= (b - disc).norm() { -(b + disc) / 2.0 } else { (disc - b) / 2.0 };
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0); 2];
    }
    vec![q, c / q]
}

fn companion_eigenvalues(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i];
    }
    match m.try_schur(1e-14, 200_000) {
        Some(s) => {
            let (_, t) = s.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
        // Schur iteration failing to converge is effectively unreachable for
        // the small degrees used here; fall back to Durand-Kerner.
        None => durand_kerner(coeffs),
    }
}

fn eval_poly(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    // Horner on x^n + sum a_k x^k, returns (p(x), p'(x)).
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

fn newton_polish(coeffs: &[Complex64], mut x: Complex64) -> Complex64 {
    let scale = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for _ in 0..8 {
        let (p, dp) = eval_poly(coeffs, x);
        if dp.norm() <= 1e-3 * scale {
            break; // near a multiple root; Newton would amplify noise
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 0.5 {
            break;
        }
        x -= step;
        if step.norm() < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut xs: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4)
        })
        .collect();
    for _ in 0..500 {
        let mut shift = 0.0f64;
        for i in 0..n {
            let (p, _) = eval_poly(coeffs, xs[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= xs[i] - xs[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let d = p / denom;
            xs[i] -= d;
            shift = shift.max(d.norm());
        }
        if shift < 1e-14 * radius {
            break;
        }
    }
    xs
}

/// A distinct root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteredRoot {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Single-linkage clustering of a sorted root list at the given tolerance.
/// Returns centroids sorted by `(re, im)` together with the maximum
/// member-to-centroid distance observed over all clusters.
pub fn cluster_roots(roots: &[Complex64], tol: f64) -> (Vec<ClusteredRoot>, f64) {
    let n = roots.len();
    let mut assigned = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut stack = vec![i];
        let mut members = Vec::new();
        assigned[i] = id;
        while let Some(k) = stack.pop() {
            members.push(k);
            for j in 0..n {
                if assigned[j] == usize::MAX && (roots[k] - roots[j]).norm() <= tol {
                    assigned[j] = id;
                    stack.push(j);
                }
            }
        }
        clusters.push(members);
    }
    let mut out = Vec::with_capacity(clusters.len());
    let mut radius = 0.0f64;
    for members in &clusters {
        let mut centre = Complex64::new(0.0, 0.0);
        for &k in members {
            centre += roots[k];
        }
        centre /= members.len() as f64;
        for &k in members {
            radius = radius.max((roots[k] - centre).norm());
        }
        out.push(ClusteredRoot { value: centre, multiplicity: members.len() });
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .partial_cmp(&b.value.re)
            .unwrap()
            .then(a.value.im.partial_cmp(&b.value.im).unwrap())
    });
    (out, radius)
}

/// Clusters the roots of a monic polynomial at one character, reporting
/// ambiguity when two distinct clusters sit closer than ten times the
/// achieved clustering resolution (the observed cluster radius, floored at
/// the clustering tolerance).
pub fn clustered_roots_checked(
    coeffs: &[Complex64],
    point_id: &str,
) -> Result<Vec<ClusteredRoot>> {
    let max_coeff = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tol = 1e-7 * (1.0 + max_coeff);
    let roots = monic_roots(coeffs);
    let (clusters, radius) = cluster_roots(&roots, tol);
    let resolution = radius.max(tol);
    for (i, a) in clusters.iter().enumerate() {
        for b in clusters.iter().skip(i + 1) {
            if (a.value - b.value).norm() < 10.0 * resolution {
                return Err(Error::IllConditioned { point: point_id.to_string() });
            }
        }
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cubic_real_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let roots = monic_roots(&[c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0)]);
        assert!((roots[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!((roots[1] - c(2.0, 0.0)).norm() < 1e-10);
        assert!((roots[2] - c(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn complex_coefficients() {
        // (x - i)(x + 2i) = x^2 + ix + 2
        let roots = monic_roots(&[c(2.0, 0.0), c(0.0, 1.0)]);
        assert!(roots.iter().any(|r| (r - c(0.0, 1.0)).norm() < 1e-10));
        assert!(roots.iter().any(|r| (r - c(0.0, -2.0)).norm() < 1e-10));
    }

    #[test]
    fn double_root_clusters() {
        // x^2 - 2x + 1
        let clusters = clustered_roots_checked(&[c(1.0, 0.0), c(-2.0, 0.0)], "p").unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].multiplicity, 2);
        assert!((clusters[0].value - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn ambiguous_clustering_rejected() {
        // roots {0, 1.5e-7, 4e-7} with tolerance ~2e-7: the first pair
        // clusters with radius ~7.5e-8 while the third centroid sits within
        // ten radii of it
        let r1 = 1.5e-7;
        let r2 = 4.0e-7;
        // (x - 0)(x - r1)(x - r2) = x^3 - (r1+r2)x^2 + r1 r2 x
        let coeffs = [
            c(0.0, 0.0),
            c(r1 * r2, 0.0),
            c(-(r1 + r2), 0.0),
        ];
        match clustered_roots_checked(&coeffs, "p") {
            Err(crate::error::Error::IllConditioned { point }) => assert_eq!(point, "p"),
            other => panic!("expected IllConditioned, got {other:?}"),
        }
    }

    #[test]
    fn residuals_small_random() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let n: i32 = rng.random_range(1..=6);
            let coeffs: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            let scale = 1.0 + coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for r in monic_roots(&coeffs) {
                let (p, _) = eval_poly(&coeffs, r);
                assert!(p.norm() <= 1e-8 * scale.powi(n), "residual {}", p.norm());
            }
        }
    }
}
