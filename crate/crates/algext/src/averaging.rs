//! The unital, base-linear averaging operator `T` of an Arens-Hoffman
//! extension, in its two equivalent forms: the Newton-sum coefficient
//! formula `T(sum b_k x^k) = (1/n) sum b_k s_k` and the fibre average with
//! roots repeated by multiplicity.
//!
//! The norm-contraction hypothesis `(*)` reads `||s_j|| <= t^j n` for
//! `j = 0..n-1`; it is checked explicitly, and a rescaling search shrinks a
//! polynomial's roots until the condition holds under a chosen
//! norm-parameter policy. The spectral contraction `|T(u)^| <= |u^|` holds
//! regardless of `(*)`.

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::extension::{min_norm_param, AHElement, AHExtension, Extension};
use crate::fibration::FibredSpace;
use crate::poly::{newton_sums, MonicPoly, NewtonSums};

/// Outcome of the `(*)` check.
#[derive(Debug, Clone, Copy)]
pub struct Contraction {
    pub condition_ok: bool,
    /// The first violating index when the condition fails.
    pub witness: Option<usize>,
}

/// Checks `||s_j|| <= t^j n` for `j = 0..n-1` against a given norm
/// parameter.
pub fn check_contraction(alpha: &MonicPoly, t: f64) -> Contraction {
    let n = alpha.degree();
    let sums = newton_sums(alpha, n.saturating_sub(1));
    for j in 0..n {
        if sums.get(j).sup_norm() > t.powi(j as i32) * n as f64 + 1e-12 {
            return Contraction { condition_ok: false, witness: Some(j) };
        }
    }
    Contraction { condition_ok: true, witness: None }
}

/// The averaging operator of one extension, carrying the Newton sums
/// `s_0..s_{n-1}` and the verdict of the contraction check at the
/// extension's norm parameter.
#[derive(Debug)]
pub struct AveragingOperator {
    ext: Extension,
    sums: NewtonSums,
    contraction: Contraction,
}

impl AveragingOperator {
    pub fn new(ext: &Extension) -> AveragingOperator {
        let sums = newton_sums(ext.alpha(), ext.degree().saturating_sub(1));
        let contraction = check_contraction(ext.alpha(), ext.norm_param());
        AveragingOperator { ext: ext.clone(), sums, contraction }
    }

    pub fn extension(&self) -> &Extension {
        &self.ext
    }

    pub fn newton_sums(&self) -> &NewtonSums {
        &self.sums
    }

    pub fn contraction(&self) -> Contraction {
        self.contraction
    }

    /// The coefficient formula `(1/n) sum_k b_k s_k`.
    pub fn apply(&self, u: &AHElement) -> Result<Element> {
        if u.extension().id() != self.ext.id() {
            return Err(Error::MixedExtensions);
        }
        let n = self.ext.degree();
        let mut acc = Element::zero(self.ext.base());
        for (k, b) in u.coeffs().iter().enumerate() {
            acc = &acc + &(b * self.sums.get(k));
        }
        Ok(acc.scale(num_complex::Complex64::new(1.0 / n as f64, 0.0)))
    }
}

/// The fibre-average form: at each character, the mean of the Gelfand
/// transform over the fibre with roots repeated by multiplicity.
pub fn t_fibre_avg(fib: &FibredSpace, u: &AHElement) -> Result<Element> {
    if u.extension().id() != fib.extension().id() {
        return Err(Error::MixedExtensions);
    }
    let n = fib.extension().degree();
    let base = fib.base();
    let values = (0..base.len())
        .map(|w| {
            let mut sum = num_complex::Complex64::new(0.0, 0.0);
            for fp in fib.fibre(w) {
                sum += u.gelfand_at(w, fp.root) * fp.multiplicity as f64;
            }
            sum / n as f64
        })
        .collect();
    Element::new(base.clone(), values)
}

/// How the rescaling search picks the norm parameter for each candidate
/// `alpha^mu`.
#[derive(Debug, Clone, Copy)]
pub enum NormParamPolicy {
    /// Use `min_norm_param(alpha, floor)`; always a valid extension.
    Minimal { floor: f64 },
    /// Insist on a fixed `t`; candidates whose minimal parameter exceeds it
    /// are rejected, so the search also drives the coefficients below the
    /// `t`-condition.
    Fixed(f64),
}

impl Default for NormParamPolicy {
    fn default() -> Self {
        NormParamPolicy::Fixed(1.0)
    }
}

/// Result of [`enforce_by_rescaling`].
#[derive(Debug)]
pub struct Rescaled {
    pub mu: f64,
    pub alpha_mu: MonicPoly,
    pub t: f64,
    pub operator: AveragingOperator,
}

/// Halves `mu` through `1, 1/2, 1/4, ...` until `alpha^mu` admits the
/// policy's norm parameter and satisfies `(*)` with it. The roots of
/// `alpha^mu` are `mu` times the roots of `alpha`.
pub fn enforce_by_rescaling(alpha: &MonicPoly, policy: NormParamPolicy) -> Result<Rescaled> {
    const MAX_HALVINGS: usize = 60;
    let mut mu = 1.0f64;
    for _ in 0..=MAX_HALVINGS {
        let candidate = alpha.rescale(mu);
        let t = match policy {
            NormParamPolicy::Minimal { floor } => Some(min_norm_param(&candidate, floor)),
            NormParamPolicy::Fixed(t) => {
                if min_norm_param(&candidate, 1.0) <= t + 1e-12 {
                    Some(t)
                } else {
                    None
                }
            }
        };
        if let Some(t) = t {
            if check_contraction(&candidate, t).condition_ok {
                let ext = AHExtension::with_norm_param(candidate.clone(), t)?;
                return Ok(Rescaled {
                    mu,
                    alpha_mu: candidate,
                    t,
                    operator: AveragingOperator::new(&ext),
                });
            }
        }
        mu *= 0.5;
    }
    Err(Error::NotReached { halvings: MAX_HALVINGS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::AHExtension;
    use crate::space::{CharacterSpace, Space};
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_elem(s: &Space, rng: &mut impl Rng) -> Element {
        Element::from_fn(s, |_| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap()
    }

    fn random_ext(s: &Space, n: usize, rng: &mut impl Rng) -> Extension {
        AHExtension::new(
            MonicPoly::new((0..n).map(|_| random_elem(s, rng)).collect()).unwrap(),
        )
    }

    #[test]
    fn unital_on_embeddings() {
        let s = CharacterSpace::interval(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..20 {
            let ext = random_ext(&s, rng.random_range(1..=4), &mut rng);
            let op = AveragingOperator::new(&ext);
            let a = random_elem(&s, &mut rng);
            let u = AHElement::embed(&ext, &a).unwrap();
            assert!((&op.apply(&u).unwrap() - &a).sup_norm() <= 1e-12);
        }
    }

    #[test]
    fn square_root_kills_odd_part() {
        // alpha = x^2 - a: s_1 = 0, so T(b0 + b1 x) = b0
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let a = random_elem(&s, &mut rng);
        let ext = AHExtension::new(MonicPoly::new(vec![-&a, Element::zero(&s)]).unwrap());
        let op = AveragingOperator::new(&ext);
        let b0 = random_elem(&s, &mut rng);
        let b1 = random_elem(&s, &mut rng);
        let u = AHElement::new(&ext, vec![b0.clone(), b1]).unwrap();
        assert!((&op.apply(&u).unwrap() - &b0).sup_norm() <= 1e-12);

        // fibre average of x itself is 0: the two square roots cancel
        let fib = FibredSpace::build(&ext).unwrap();
        let x = AHElement::x_bar(&ext);
        assert!(t_fibre_avg(&fib, &x).unwrap().sup_norm() <= 1e-8);
    }

    #[test]
    fn base_linearity() {
        let s = CharacterSpace::interval(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..200 {
            let n = rng.random_range(1..=4);
            let ext = random_ext(&s, n, &mut rng);
            let op = AveragingOperator::new(&ext);
            let a = random_elem(&s, &mut rng);
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            let lhs = op.apply(&u.scale_by(&a)).unwrap();
            let rhs = &a * &op.apply(&u).unwrap();
            assert!((&lhs - &rhs).sup_norm() <= 1e-10);
        }
    }

    #[test]
    fn formula_equals_fibre_average() {
        let s = CharacterSpace::interval(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..300 {
            let n = rng.random_range(1..=5);
            let ext = random_ext(&s, n, &mut rng);
            let op = AveragingOperator::new(&ext);
            let fib = FibredSpace::build(&ext).unwrap();
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            let d = (&op.apply(&u).unwrap() - &t_fibre_avg(&fib, &u).unwrap()).sup_norm();
            assert!(d <= 1e-8, "formula vs fibre average differ by {d}");
        }
    }

    #[test]
    fn contraction_holds_for_small_coefficients() {
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        // ||a|| <= 1 and t = 1: s = (2, 0) so the condition holds
        let a = random_elem(&s, &mut rng);
        let a = a.scale(c(1.0 / (a.sup_norm() + 1e-9), 0.0));
        let alpha = MonicPoly::new(vec![-&a, Element::zero(&s)]).unwrap();
        assert!(check_contraction(&alpha, 1.0).condition_ok);
    }

    #[test]
    fn condition_always_holds_at_minimal_parameter() {
        // With the sup norm every root is bounded by the minimal norm
        // parameter, hence ||s_j|| <= n t^j: an exhaustive random search for
        // a violating instance comes up empty.
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..300 {
            let n = rng.random_range(1..=5);
            let mag = rng.random_range(0.5..100.0);
            let alpha = MonicPoly::new(
                (0..n)
                    .map(|_| random_elem(&s, &mut rng).scale(c(mag, 0.0)))
                    .collect(),
            )
            .unwrap();
            let t = min_norm_param(&alpha, 1.0);
            let verdict = check_contraction(&alpha, t);
            assert!(
                verdict.condition_ok,
                "violation at j = {:?} with t = {t}",
                verdict.witness
            );
        }
    }

    #[test]
    fn x_squared_minus_hundred_passes_at_its_minimal_parameter() {
        // t = 10; the check only runs j = 0..n-1 so s_2 is never consulted.
        let s = CharacterSpace::interval(3).unwrap();
        let alpha = MonicPoly::from_constants(&s, &[c(-100.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = min_norm_param(&alpha, 1.0);
        assert!((t - 10.0).abs() <= 1e-9);
        assert!(check_contraction(&alpha, t).condition_ok);
    }

    #[test]
    fn norm_contraction_under_condition() {
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let ext = random_ext(&s, n, &mut rng);
            let op = AveragingOperator::new(&ext);
            assert!(op.contraction().condition_ok);
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            assert!(op.apply(&u).unwrap().sup_norm() <= u.norm() + 1e-10);
        }
    }

    #[test]
    fn spectral_contraction_unconditional() {
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let ext = random_ext(&s, n, &mut rng);
            let op = AveragingOperator::new(&ext);
            let fib = FibredSpace::build(&ext).unwrap();
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            let tu = op.apply(&u).unwrap().sup_norm();
            let uhat = fib.gelfand_element(&u).unwrap().sup_norm();
            assert!(tu <= uhat + 1e-9, "|T(u)| = {tu} > |u^| = {uhat}");
        }
    }

    #[test]
    fn rescaling_trivial_when_compliant() {
        let s = CharacterSpace::interval(3).unwrap();
        let alpha = MonicPoly::from_constants(&s, &[c(-0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let r = enforce_by_rescaling(&alpha, NormParamPolicy::Fixed(1.0)).unwrap();
        assert_eq!(r.mu, 1.0);
    }

    #[test]
    fn rescaling_shrinks_large_polynomial() {
        let s = CharacterSpace::interval(3).unwrap();
        let alpha = MonicPoly::from_constants(&s, &[c(-100.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = enforce_by_rescaling(&alpha, NormParamPolicy::Fixed(1.0)).unwrap();
        assert!(r.mu <= 0.25, "expected mu <= 1/4, got {}", r.mu);
        // root correspondence: alpha^mu(eta) = 0 => alpha(eta/mu) = 0
        for w in 0..s.len() {
            for eta in r.alpha_mu.raw_roots(w) {
                let back = eta / r.mu;
                let coeffs = alpha.char_coeffs(w);
                let mut p = Complex64::new(1.0, 0.0);
                for &a in coeffs.iter().rev() {
                    p = p * back + a;
                }
                assert!(p.norm() <= 1e-8 * 100.0, "residual {}", p.norm());
            }
        }
    }
}
