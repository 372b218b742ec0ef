//! Arens-Hoffman extensions `A_alpha = A[x]/(alpha(x))`.
//!
//! Elements are kept in the canonical representative of degree `< n`; the
//! norm is the weighted sum `sum ||b_k|| t^k` where the norm parameter `t`
//! satisfies `t^n >= sum ||a_k|| t^k`, which makes the norm submultiplicative.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::poly::{monic_divmod, MonicPoly, PolyOverA};
use crate::space::Space;

static NEXT_EXT_ID: AtomicU64 = AtomicU64::new(1);

/// An Arens-Hoffman extension: the defining monic polynomial together with a
/// valid norm parameter. Immutable; elements refer to it by handle.
#[derive(Debug)]
pub struct AHExtension {
    id: u64,
    alpha: MonicPoly,
    t: f64,
}

/// Shared handle to an extension.
pub type Extension = Arc<AHExtension>;

/// The smallest `t >= floor` with `t^n - sum ||a_k|| t^k >= -1e-12`, found by
/// bisection on `[floor, floor + sum ||a_k||]`; the bracket's upper end
/// always satisfies the condition.
pub fn min_norm_param(alpha: &MonicPoly, floor: f64) -> f64 {
    let norms: Vec<f64> = alpha.coeffs().iter().map(|a| a.sup_norm()).collect();
    let n = alpha.degree() as i32;
    let g = |t: f64| -> f64 {
        let mut s = t.powi(n);
        for (k, nk) in norms.iter().enumerate() {
            s -= nk * t.powi(k as i32);
        }
        s
    };
    let floor = floor.max(1.0);
    if g(floor) >= -1e-12 {
        return floor;
    }
    let mut lo = floor;
    let mut hi = floor + norms.iter().sum::<f64>();
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= -1e-12 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

impl AHExtension {
    /// Builds the extension with the default norm parameter
    /// `min_norm_param(alpha, 1)`.
    pub fn new(alpha: MonicPoly) -> Extension {
        let t = min_norm_param(&alpha, 1.0);
        Arc::new(AHExtension { id: NEXT_EXT_ID.fetch_add(1, Ordering::Relaxed), alpha, t })
    }

    /// Builds the extension with a caller-chosen norm parameter, which must
    /// be at least 1 and satisfy the Arens-Hoffman condition.
    pub fn with_norm_param(alpha: MonicPoly, t: f64) -> Result<Extension> {
        if t < 1.0 {
            return Err(Error::InvalidPoly(format!("norm parameter {t} < 1")));
        }
        let tmin = min_norm_param(&alpha, 1.0);
        if t + 1e-12 < tmin {
            return Err(Error::InvalidPoly(format!(
                "norm parameter {t} violates the extension condition (needs >= {tmin})"
            )));
        }
        Ok(Arc::new(AHExtension { id: NEXT_EXT_ID.fetch_add(1, Ordering::Relaxed), alpha, t }))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn alpha(&self) -> &MonicPoly {
        &self.alpha
    }

    pub fn degree(&self) -> usize {
        self.alpha.degree()
    }

    pub fn base(&self) -> &Space {
        self.alpha.space()
    }

    pub fn norm_param(&self) -> f64 {
        self.t
    }
}

/// The canonical degree-`< n` representative of an extension element:
/// exactly `n` coefficients over the base.
#[derive(Debug, Clone)]
pub struct AHElement {
    ext: Extension,
    coeffs: Vec<Element>,
}

impl AHElement {
    /// Wraps a coefficient vector of length exactly `n`.
    pub fn new(ext: &Extension, coeffs: Vec<Element>) -> Result<AHElement> {
        if coeffs.len() != ext.degree() {
            return Err(Error::InvalidPoly(format!(
                "expected {} coefficients, got {}",
                ext.degree(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.space().id() != ext.base().id()) {
            return Err(Error::MixedSpaces);
        }
        Ok(AHElement { ext: ext.clone(), coeffs })
    }

    /// The canonical embedding of a base element.
    pub fn embed(ext: &Extension, a: &Element) -> Result<AHElement> {
        if a.space().id() != ext.base().id() {
            return Err(Error::MixedSpaces);
        }
        let mut coeffs = vec![Element::zero(ext.base()); ext.degree()];
        coeffs[0] = a.clone();
        Ok(AHElement { ext: ext.clone(), coeffs })
    }

    /// The adjoined root `x` modulo `alpha`.
    pub fn x_bar(ext: &Extension) -> AHElement {
        let mut coeffs = vec![Element::zero(ext.base()); ext.degree()];
        if ext.degree() > 1 {
            coeffs[1] = Element::one(ext.base());
        } else {
            // degree 1: x = -a_0 in the quotient
            coeffs[0] = -&ext.alpha().coeffs()[0];
        }
        AHElement { ext: ext.clone(), coeffs }
    }

    /// Reduces an arbitrary-degree lift to its canonical representative.
    pub fn from_poly(ext: &Extension, lift: &PolyOverA) -> Result<AHElement> {
        let (_, r) = monic_divmod(lift, ext.alpha())?;
        let coeffs = (0..ext.degree()).map(|k| r.coeff(k)).collect();
        AHElement::new(ext, coeffs)
    }

    pub fn extension(&self) -> &Extension {
        &self.ext
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    pub fn as_poly(&self) -> PolyOverA {
        PolyOverA::new(self.ext.base(), self.coeffs.clone())
            .expect("coefficients share the base space")
    }

    fn check_ext(&self, rhs: &AHElement) -> Result<()> {
        if self.ext.id() == rhs.ext.id() {
            Ok(())
        } else {
            Err(Error::MixedExtensions)
        }
    }

    pub fn try_add(&self, rhs: &AHElement) -> Result<AHElement> {
        self.check_ext(rhs)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        AHElement::new(&self.ext, coeffs)
    }

    pub fn try_sub(&self, rhs: &AHElement) -> Result<AHElement> {
        self.check_ext(rhs)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        AHElement::new(&self.ext, coeffs)
    }

    /// Quotient multiplication: polynomial product reduced modulo `alpha`.
    pub fn try_mul(&self, rhs: &AHElement) -> Result<AHElement> {
        self.check_ext(rhs)?;
        let prod = self.as_poly().mul(&rhs.as_poly());
        AHElement::from_poly(&self.ext, &prod)
    }

    /// Multiplication by a base element, coefficientwise.
    pub fn scale_by(&self, a: &Element) -> AHElement {
        let coeffs = self.coeffs.iter().map(|c| c * a).collect();
        AHElement { ext: self.ext.clone(), coeffs }
    }

    pub fn scale(&self, z: Complex64) -> AHElement {
        let coeffs = self.coeffs.iter().map(|c| c.scale(z)).collect();
        AHElement { ext: self.ext.clone(), coeffs }
    }

    /// The Arens-Hoffman norm `sum_k ||b_k|| t^k`.
    pub fn norm(&self) -> f64 {
        let t = self.ext.norm_param();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.sup_norm() * t.powi(k as i32))
            .sum()
    }

    /// Inverse in the quotient, computed per character by the extended
    /// Euclidean algorithm on `(u_w(x), alpha_w(x))` and reassembled
    /// coefficientwise. Fails with a fibre witness when the Gelfand
    /// transform vanishes somewhere on the fibration.
    pub fn invert(&self) -> Result<AHElement> {
        let n = self.ext.degree();
        let base = self.ext.base();
        let mut coeff_values: Vec<Vec<Complex64>> = vec![Vec::with_capacity(base.len()); n];
        for w in 0..base.len() {
            let u: Vec<Complex64> = self.coeffs.iter().map(|c| c.value(w)).collect();
            let mut alpha = self.ext.alpha().char_coeffs(w);
            alpha.push(Complex64::new(1.0, 0.0));
            match poly_inverse_mod(&u, &alpha) {
                Some(inv) => {
                    for (k, column) in coeff_values.iter_mut().enumerate() {
                        column.push(*inv.get(k).unwrap_or(&Complex64::new(0.0, 0.0)));
                    }
                }
                None => {
                    // witness: the fibre root where the transform is smallest
                    let roots = self.ext.alpha().raw_roots(w);
                    let poly = self.as_poly();
                    let worst = roots
                        .iter()
                        .copied()
                        .min_by(|a, b| {
                            poly.eval_at_char(w, *a)
                                .norm()
                                .partial_cmp(&poly.eval_at_char(w, *b).norm())
                                .unwrap()
                        })
                        .unwrap_or_default();
                    return Err(Error::NotInvertible {
                        point: format!("{} at fibre root {}", base.point_id(w), worst),
                        value: poly.eval_at_char(w, worst),
                    });
                }
            }
        }
        let coeffs = coeff_values
            .into_iter()
            .map(|vals| Element::new(base.clone(), vals))
            .collect::<Result<Vec<_>>>()?;
        AHElement::new(&self.ext, coeffs)
    }

    /// The Gelfand transform at a fibration point `(w, lambda)`:
    /// `sum_k b_k(w) lambda^k`.
    pub fn gelfand_at(&self, char_index: usize, lambda: Complex64) -> Complex64 {
        self.as_poly().eval_at_char(char_index, lambda)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "extension": self.ext.id(),
            "coeffs": self.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Pivot threshold declaring per-character non-coprimality during the
/// extended Euclidean algorithm.
const EUCLID_TOL: f64 = 1e-12;

/// Inverse of `u(x)` modulo the monic `alpha(x)` over the complex numbers,
/// or `None` when the two are not coprime at working precision.
///
/// Extended Euclid with monic normalisation at each step and degree-based
/// termination.
fn poly_inverse_mod(u: &[Complex64], alpha: &[Complex64]) -> Option<Vec<Complex64>> {
    let scale = 1.0
        + u.iter().map(|z| z.norm()).fold(0.0, f64::max)
        + alpha.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let trim = |v: &mut Vec<Complex64>| {
        while v.len() > 1 && v.last().is_some_and(|z| z.norm() <= EUCLID_TOL * scale) {
            v.pop();
        }
    };
    let mut r0: Vec<Complex64> = alpha.to_vec();
    let mut r1: Vec<Complex64> = u.to_vec();
    trim(&mut r1);
    // Bezout coefficients for u only: s such that s*u = gcd (mod alpha)
    let mut s0: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
    let mut s1: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    loop {
        if r1.len() == 1 {
            let lead = r1[0];
            if lead.norm() <= EUCLID_TOL * scale {
                return None; // gcd has positive degree or u ~ 0
            }
            // normalise so the constant gcd is 1, then reduce mod alpha
            let mut inv: Vec<Complex64> = s1.iter().map(|z| z / lead).collect();
            reduce_mod(&mut inv, alpha, scale);
            return Some(inv);
        }
        if r1.iter().all(|z| z.norm() <= EUCLID_TOL * scale) {
            return None;
        }
        let (q, rem) = complex_divmod(&r0, &r1, scale);
        let mut s_new = poly_sub(&s0, &poly_mul(&q, &s1));
        let mut rem = rem;
        trim(&mut rem);
        trim(&mut s_new);
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s_new);
        let _ = r0;
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|k| {
            a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default()
        })
        .collect()
}

/// Long division of complex polynomials with a leading-coefficient pivot.
fn complex_divmod(
    num: &[Complex64],
    den: &[Complex64],
    scale: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    if rem.len() <= dn {
        return (vec![Complex64::new(0.0, 0.0)], rem);
    }
    let lead = den[dn];
    if lead.norm() <= EUCLID_TOL * scale {
        return (vec![Complex64::new(0.0, 0.0)], rem);
    }
    let mut quot = vec![Complex64::new(0.0, 0.0); rem.len() - dn];
    for k in (dn..rem.len()).rev() {
        let q = rem[k] / lead;
        quot[k - dn] = q;
        for j in 0..=dn {
            rem[k - dn + j] -= q * den[j];
        }
    }
    rem.truncate(dn.max(1));
    (quot, rem)
}

fn reduce_mod(v: &mut Vec<Complex64>, alpha: &[Complex64], scale: f64) {
    if v.len() >= alpha.len() {
        let (_, r) = complex_divmod(v, alpha, scale);
        *v = r;
    }
}

/// Anything that acts as a commutative normed ring target for the universal
/// morphism: base elements and extension elements both qualify.
pub trait NormedRing: Clone {
    fn ring_one(&self) -> Self;
    fn ring_add(&self, rhs: &Self) -> Self;
    fn ring_mul(&self, rhs: &Self) -> Self;
    fn ring_norm(&self) -> f64;
}

impl NormedRing for Element {
    fn ring_one(&self) -> Element {
        Element::one(self.space())
    }
    fn ring_add(&self, rhs: &Element) -> Element {
        self + rhs
    }
    fn ring_mul(&self, rhs: &Element) -> Element {
        self * rhs
    }
    fn ring_norm(&self) -> f64 {
        self.sup_norm()
    }
}

impl NormedRing for AHElement {
    fn ring_one(&self) -> AHElement {
        AHElement::embed(self.extension(), &Element::one(self.extension().base()))
            .expect("unit embeds")
    }
    fn ring_add(&self, rhs: &AHElement) -> AHElement {
        self.try_add(rhs).expect("mixed extensions")
    }
    fn ring_mul(&self, rhs: &AHElement) -> AHElement {
        self.try_mul(rhs).expect("mixed extensions")
    }
    fn ring_norm(&self) -> f64 {
        self.norm()
    }
}

/// The universal morphism out of an Arens-Hoffman extension: given a base
/// morphism `theta` into a target algebra and a target root `y` of
/// `theta(alpha)`, maps `sum b_k x^k` to `sum theta(b_k) y^k`. The map is
/// unital and multiplicative.
pub struct UniversalMorphism<B, F> {
    theta: F,
    y: B,
}

/// Residual tolerance for the root precondition `theta(alpha)(y) = 0`.
pub const ROOT_TOL: f64 = 1e-9;

/// Checks the root precondition and returns the induced morphism.
pub fn universal_morphism<B, F>(
    ext: &Extension,
    theta: F,
    y: B,
) -> Result<UniversalMorphism<B, F>>
where
    B: NormedRing,
    F: Fn(&Element) -> B,
{
    // theta(alpha)(y) = sum theta(a_k) y^k + y^n
    let mut acc: Option<B> = None;
    let mut pw = y.ring_one();
    for a in ext.alpha().coeffs() {
        let term = theta(a).ring_mul(&pw);
        acc = Some(match acc {
            None => term,
            Some(s) => s.ring_add(&term),
        });
        pw = pw.ring_mul(&y);
    }
    let total = acc.expect("degree >= 1").ring_add(&pw);
    let residual = total.ring_norm();
    if residual > ROOT_TOL {
        return Err(Error::NotARoot { residual });
    }
    Ok(UniversalMorphism { theta, y })
}

impl<B, F> UniversalMorphism<B, F>
where
    B: NormedRing,
    F: Fn(&Element) -> B,
{
    /// Applies the morphism to an extension element.
    pub fn apply(&self, u: &AHElement) -> B {
        let mut acc: Option<B> = None;
        let mut pw = self.y.ring_one();
        for b in u.coeffs() {
            let term = (self.theta)(b).ring_mul(&pw);
            acc = Some(match acc {
                None => term,
                Some(s) => s.ring_add(&term),
            });
            pw = pw.ring_mul(&self.y);
        }
        acc.expect("degree >= 1")
    }
}
