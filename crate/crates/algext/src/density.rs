//! Invertible approximation in an Arens-Hoffman extension: any element can
//! be moved into the invertible group by perturbing its constant
//! coefficient only.
//!
//! Two strategies: a direct one that exploits the finite function model
//! (per character, a disk cannot be covered by the `n` roots of the
//! resultant polynomial `P`), and a chain strategy that replays the formal
//! derivative argument, randomly perturbing until each `P^(k)` is
//! invertible.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::extension::AHElement;
use crate::poly::{resultant, resultant_as_poly_in_c, MonicPoly, PolyOverA};
use crate::roots::monic_roots;

/// Margin defining "invertible with margin": resultant min-modulus must
/// exceed `MARGIN * scale`.
pub const MARGIN: f64 = 1e-9;

/// Record of the derivative-chain run: the intermediate centres
/// `c_{n-1}, ..., c_0` and the final perturbed coefficient, with per-step
/// norms and the achieved resultant min-modulus.
#[derive(Debug, Clone)]
pub struct PerturbationTrace {
    pub chain: Vec<Element>,
    pub step_norms: Vec<f64>,
    pub final_min_modulus: f64,
    pub seed: u64,
}

impl PerturbationTrace {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "steps": self.chain.len(),
            "step_norms": self.step_norms,
            "total_perturbation": self.step_norms.iter().sum::<f64>(),
            "final_min_modulus": self.final_min_modulus,
            "seed": self.seed,
        })
    }
}

fn min_modulus(e: &Element) -> f64 {
    e.values().iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

/// The resultant of `alpha` against the element's polynomial
/// representative.
pub fn element_resultant(u: &AHElement) -> Result<Element> {
    resultant(u.extension().alpha(), &u.as_poly())
}

/// Direct strategy: per character, choose the perturbed constant
/// coefficient inside `B(b_0(w), eps/2)` maximizing the distance to the
/// roots of the per-character resultant polynomial `P_w`; only coefficient
/// zero changes, the extension norm moves by less than `eps`, and the
/// resultant becomes invertible with margin.
pub fn approx_invertible_direct(u: &AHElement, eps: f64) -> Result<AHElement> {
    let ext = u.extension();
    let alpha = ext.alpha();
    let n = alpha.degree();
    let base = ext.base();
    let scale = alpha.coeff_scale();

    // accept the input unchanged when already invertible with margin
    let current = element_resultant(u)?;
    if min_modulus(&current) > MARGIN * scale {
        return Ok(u.clone());
    }

    let upper: Vec<Element> = u.coeffs()[1..].to_vec();
    let ps = resultant_as_poly_in_c(alpha, &upper)?;
    let radius = eps / 2.0;
    let mut new_b0 = Vec::with_capacity(base.len());
    for w in 0..base.len() {
        let b0 = u.coeffs()[0].value(w);
        // roots of P_w(c) = c^n + sum p_k(w) c^k
        let coeffs: Vec<Complex64> = ps.iter().map(|p| p.value(w)).collect();
        let roots = monic_roots(&coeffs);
        let dist_to_roots = |z: Complex64| -> f64 {
            roots
                .iter()
                .map(|r| (z - r).norm())
                .fold(f64::INFINITY, f64::min)
        };
        // candidate grid: centre plus rings of 2n+3 directions; a disk can
        // never be covered by n points, so some candidate clears them
        let mut best = b0;
        let mut best_d = dist_to_roots(b0);
        let dirs = 2 * n + 3;
        for &frac in &[0.35f64, 0.7, 0.999] {
            for k in 0..dirs {
                let angle = std::f64::consts::TAU * k as f64 / dirs as f64;
                let z = b0 + Complex64::from_polar(radius * frac, angle);
                let d = dist_to_roots(z);
                if d > best_d {
                    best = z;
                    best_d = d;
                }
            }
        }
        new_b0.push(best);
    }
    let mut coeffs = u.coeffs().to_vec();
    coeffs[0] = Element::new(base.clone(), new_b0)?;
    let out = AHElement::new(ext, coeffs)?;
    debug_assert!(out.try_sub(u).expect("same extension").norm() < eps);
    Ok(out)
}

/// Chain strategy: replays the formal-derivative argument. Starting from
/// `c_{n-1} = b_0`, each step randomly perturbs within `eps/n` until the
/// next formal derivative of `P` is invertible at the candidate, ending
/// with a perturbed coefficient at which `P` itself is invertible.
pub fn approx_invertible_chain(
    u: &AHElement,
    eps: f64,
    retries: usize,
    seed: u64,
) -> Result<(AHElement, PerturbationTrace)> {
    let ext = u.extension();
    let alpha = ext.alpha();
    let n = alpha.degree();
    let base = ext.base();
    let scale = alpha.coeff_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let upper: Vec<Element> = u.coeffs()[1..].to_vec();
    let ps = resultant_as_poly_in_c(alpha, &upper)?;
    // P as a polynomial with the implicit leading one made explicit
    let mut p_coeffs = ps.clone();
    p_coeffs.push(Element::one(base));
    let p_poly = PolyOverA::new(base, p_coeffs)?;
    // derivatives P^(1) .. P^(n-1)
    let mut derivatives = Vec::with_capacity(n);
    let mut d = p_poly.clone();
    for _ in 0..n {
        d = d.derivative();
        derivatives.push(d.clone());
    }

    let step_radius = eps / n as f64;
    let mut chain = vec![u.coeffs()[0].clone()];
    let mut step_norms = Vec::new();
    // steps k = n-1 down to 1 require P^(k)(c) invertible; the last step
    // requires P itself invertible
    for k in (0..n).rev() {
        let target: &PolyOverA = if k == 0 { &p_poly } else { &derivatives[k - 1] };
        let cur = chain.last().expect("chain is seeded").clone();
        let mut accepted = None;
        for attempt in 0..retries {
            let candidate = if attempt == 0 && k > 0 {
                cur.clone() // zero perturbation may already work
            } else {
                let pert = Element::from_fn(base, |_| {
                    let r = step_radius * rng.random_range(0.0..1.0f64).sqrt() * 0.999;
                    let th = rng.random_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, th)
                })?;
                &cur + &pert
            };
            let value = target.eval_elem(&candidate);
            if min_modulus(&value) > MARGIN * scale {
                accepted = Some(candidate);
                break;
            }
        }
        match accepted {
            Some(c) => {
                step_norms.push((&c - &cur).sup_norm());
                chain.push(c);
            }
            None => return Err(Error::RetriesExhausted { retries }),
        }
    }
    let final_b0 = chain.last().expect("chain nonempty").clone();
    let mut coeffs = u.coeffs().to_vec();
    coeffs[0] = final_b0;
    let out = AHElement::new(ext, coeffs)?;
    let res = element_resultant(&out)?;
    let trace = PerturbationTrace {
        chain,
        step_norms,
        final_min_modulus: min_modulus(&res),
        seed,
    };
    Ok((out, trace))
}

/// Witnesses that `a^n` lies in the closure of the invertible group: for
/// each epsilon, perturb the constant polynomial `beta = a` into an
/// invertible-resultant element and return `R_alpha(beta_eps)`, which tends
/// to `a^n`.
pub fn nth_power_witness(
    a: &Element,
    alpha: &MonicPoly,
    eps_seq: &[f64],
) -> Result<Vec<Element>> {
    if a.space().id() != alpha.space().id() {
        return Err(Error::MixedSpaces);
    }
    let ext = crate::extension::AHExtension::new(alpha.clone());
    let u = AHElement::embed(&ext, a)?;
    let mut out = Vec::with_capacity(eps_seq.len());
    for &eps in eps_seq {
        let approx = approx_invertible_direct(&u, eps)?;
        out.push(element_resultant(&approx)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::AHExtension;
    use crate::space::{CharacterSpace, Space};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_elem(s: &Space, rng: &mut impl Rng) -> Element {
        Element::from_fn(s, |_| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap()
    }

    #[test]
    fn already_invertible_untouched() {
        let s = CharacterSpace::interval(4).unwrap();
        let ext = AHExtension::new(
            MonicPoly::from_constants(&s, &[c(-2.0, 0.0), c(0.0, 0.0)]).unwrap(),
        );
        let u = AHElement::embed(&ext, &Element::constant(&s, c(3.0, 0.0))).unwrap();
        let out = approx_invertible_direct(&u, 1e-3).unwrap();
        assert!(out.try_sub(&u).unwrap().norm() == 0.0);
    }

    #[test]
    fn pure_x_on_nilpotent_extension() {
        // alpha = x^2, u = x: resultant is b0^2 = 0; the perturbed element
        // gets |b0| about eps/2 and an invertible square.
        let s = CharacterSpace::interval(4).unwrap();
        let ext = AHExtension::new(
            MonicPoly::from_constants(&s, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap(),
        );
        let u = AHElement::new(&ext, vec![Element::zero(&s), Element::one(&s)]).unwrap();
        let eps = 1e-2;
        let out = approx_invertible_direct(&u, eps).unwrap();
        assert!(out.try_sub(&u).unwrap().norm() < eps);
        let res = element_resultant(&out).unwrap();
        assert!(min_modulus(&res) > MARGIN);
        // only b0 moved
        assert!((&out.coeffs()[1] - &u.coeffs()[1]).sup_norm() == 0.0);
    }

    #[test]
    fn direct_postconditions_random() {
        let s = CharacterSpace::interval(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let ext = AHExtension::new(
                MonicPoly::new((0..n).map(|_| random_elem(&s, &mut rng)).collect()).unwrap(),
            );
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            for eps in [1e-1, 1e-3] {
                let out = approx_invertible_direct(&u, eps).unwrap();
                assert!(out.try_sub(&u).unwrap().norm() < eps);
                for k in 1..n {
                    assert!(
                        (&out.coeffs()[k] - &u.coeffs()[k]).sup_norm() == 0.0,
                        "only b0 may move"
                    );
                }
                let res = element_resultant(&out).unwrap();
                assert!(
                    min_modulus(&res) > MARGIN,
                    "resultant min modulus {}",
                    min_modulus(&res)
                );
            }
        }
    }

    #[test]
    fn chain_single_step_for_degree_one() {
        // n = 1: P(c) = c, so the chain reduces to making b0 invertible
        let s = CharacterSpace::interval(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let ext = AHExtension::new(MonicPoly::new(vec![random_elem(&s, &mut rng)]).unwrap());
        let u = AHElement::new(&ext, vec![Element::zero(&s)]).unwrap();
        let (out, trace) = approx_invertible_chain(&u, 1e-2, 32, 7).unwrap();
        assert_eq!(trace.chain.len(), 2);
        assert!(out.try_sub(&u).unwrap().norm() < 1e-2);
        assert!(trace.final_min_modulus > MARGIN);
    }

    #[test]
    fn chain_quadratic_has_intermediate_step() {
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let ext = AHExtension::new(
            MonicPoly::new(vec![random_elem(&s, &mut rng), random_elem(&s, &mut rng)])
                .unwrap(),
        );
        let u = AHElement::new(
            &ext,
            vec![random_elem(&s, &mut rng), random_elem(&s, &mut rng)],
        )
        .unwrap();
        let (out, trace) = approx_invertible_chain(&u, 1e-1, 32, 11).unwrap();
        // chain: c1 = b0, c0, b~0
        assert_eq!(trace.chain.len(), 3);
        assert!(out.try_sub(&u).unwrap().norm() < 1e-1);
        assert!(trace.final_min_modulus > MARGIN);
    }

    #[test]
    fn strategies_agree_on_postconditions() {
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        for trial in 0..50 {
            let n = rng.random_range(1..=3);
            let ext = AHExtension::new(
                MonicPoly::new((0..n).map(|_| random_elem(&s, &mut rng)).collect()).unwrap(),
            );
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            let eps = 1e-1;
            let d = approx_invertible_direct(&u, eps).unwrap();
            let (ch, _) = approx_invertible_chain(&u, eps, 32, trial).unwrap();
            for out in [d, ch] {
                assert!(out.try_sub(&u).unwrap().norm() < eps);
                let res = element_resultant(&out).unwrap();
                assert!(min_modulus(&res) > MARGIN);
            }
        }
    }

    #[test]
    fn nth_power_witnesses_converge() {
        let s = CharacterSpace::interval(5).unwrap();
        // a with a zero value, n = 2: witnesses converge to a^2
        let a = Element::from_fn(&s, |k| c(k as f64 / 4.0 - 0.5, 0.0)).unwrap();
        let alpha = MonicPoly::from_constants(&s, &[c(0.3, 0.1), c(-0.2, 0.0)]).unwrap();
        let eps_seq = [1e-1, 1e-2, 1e-3];
        let wits = nth_power_witness(&a, &alpha, &eps_seq).unwrap();
        let a_sq = &a * &a;
        let mut last = f64::INFINITY;
        for (i, w) in wits.iter().enumerate() {
            let err = (w - &a_sq).sup_norm();
            assert!(
                err <= 3.0 * eps_seq[i].max(1e-12).sqrt().max(eps_seq[i] * 10.0),
                "witness {i} error {err}"
            );
            assert!(err <= last + 1e-12, "errors should not grow");
            last = err;
        }
        // the final witness is close at the 1e-3 scale
        assert!((&wits[2] - &a_sq).sup_norm() <= 1e-1);
    }

    #[test]
    fn constant_beta_resultant_is_power_and_homogeneity() {
        // with b_1..b_{n-1} = 0 every non-leading coefficient of P vanishes
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        for n in 2..=4 {
            let alpha =
                MonicPoly::new((0..n).map(|_| random_elem(&s, &mut rng)).collect()).unwrap();
            let ps = resultant_as_poly_in_c(&alpha, &vec![Element::zero(&s); n - 1]).unwrap();
            for p in &ps {
                assert!(p.sup_norm() <= 1e-8, "P(c) should be c^n");
            }
            // invertible a: zero perturbation accepted, witness = a^n
            let a = Element::from_fn(&s, |_| {
                c(rng.random_range(0.5..1.5), rng.random_range(0.3..0.8))
            })
            .unwrap();
            let wits = nth_power_witness(&a, &alpha, &[1e-2]).unwrap();
            let mut pw = Element::one(&s);
            for _ in 0..n {
                pw = &pw * &a;
            }
            assert!((&wits[0] - &pw).sup_norm() <= 1e-6 * alpha.coeff_scale().powi(n as i32));
        }
    }

    #[test]
    fn chain_success_rate() {
        let s = CharacterSpace::interval(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        let mut failures = 0;
        let total = 200;
        for trial in 0..total {
            let n = rng.random_range(1..=4);
            let ext = AHExtension::new(
                MonicPoly::new((0..n).map(|_| random_elem(&s, &mut rng)).collect()).unwrap(),
            );
            let u = AHElement::new(
                &ext,
                (0..n).map(|_| random_elem(&s, &mut rng)).collect(),
            )
            .unwrap();
            let eps = if trial % 2 == 0 { 1e-1 } else { 1e-3 };
            match approx_invertible_chain(&u, eps, 32, trial as u64) {
                Ok(_) => {}
                Err(Error::RetriesExhausted { .. }) => failures += 1,
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert!(
            (total - failures) as f64 / total as f64 >= 0.95,
            "success rate too low: {failures}/{total} failures"
        );
    }
}
