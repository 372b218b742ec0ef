//! The base algebra: complex functions on a finite character space.
//!
//! An [`Element`] holds one complex value per point of its space; operations
//! are pointwise and the norm is the supremum norm. All values are immutable
//! after construction and every operation is a pure function, so elements can
//! be evaluated concurrently without synchronisation.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::Space;

/// Scale-aware zero tolerance used for invertibility decisions:
/// `|value| <= INVERT_TOL * max(1, sup_norm)` counts as zero.
pub const INVERT_TOL: f64 = 1e-12;

/// Absolute deduplication tolerance for [`Element::spectrum`].
pub const SPECTRUM_TOL: f64 = 1e-9;

/// A member of the base algebra: one complex value per character.
#[derive(Debug, Clone)]
pub struct Element {
    space: Space,
    values: Vec<Complex64>,
}

impl Element {
    /// Wraps a value table, checking the length and that every value is
    /// finite.
    pub fn new(space: Space, values: Vec<Complex64>) -> Result<Element> {
        if values.len() != space.len() {
            return Err(Error::InvalidSpace(format!(
                "element has {} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidSpace("non-finite element value".into()));
        }
        Ok(Element { space, values })
    }

    /// The constant function `z`.
    pub fn constant(space: &Space, z: Complex64) -> Element {
        Element { space: space.clone(), values: vec![z; space.len()] }
    }

    pub fn zero(space: &Space) -> Element {
        Self::constant(space, Complex64::new(0.0, 0.0))
    }

    pub fn one(space: &Space) -> Element {
        Self::constant(space, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function of a space with coordinates.
    pub fn coordinate(space: &Space) -> Result<Element> {
        let coords = space
            .coords()
            .ok_or_else(|| Error::InvalidSpace("space has no coordinates".into()))?;
        Element::new(space.clone(), coords.to_vec())
    }

    /// Builds the element pointwise from the coordinate.
    pub fn from_fn(space: &Space, mut f: impl FnMut(usize) -> Complex64) -> Result<Element> {
        let values = (0..space.len()).map(&mut f).collect();
        Element::new(space.clone(), values)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    fn check_space(&self, rhs: &Element) -> Result<()> {
        if self.space.id() == rhs.space.id() {
            Ok(())
        } else {
            Err(Error::MixedSpaces)
        }
    }

    fn zip(&self, rhs: &Element, f: impl Fn(Complex64, Complex64) -> Complex64) -> Element {
        self.check_space(rhs).expect("elements on mixed character spaces");
        let values = self
            .values
            .iter()
            .zip(&rhs.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Element { space: self.space.clone(), values }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Element {
        Element {
            space: self.space.clone(),
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, z: Complex64) -> Element {
        self.map(|v| v * z)
    }

    /// The supremum norm: the maximum modulus over all characters.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Pointwise reciprocal. Fails with the witness point when any value is
    /// within the scale-aware zero tolerance.
    pub fn invert(&self) -> Result<Element> {
        let tol = INVERT_TOL * self.sup_norm().max(1.0);
        for (i, z) in self.values.iter().enumerate() {
            if z.norm() <= tol {
                return Err(Error::NotInvertible {
                    point: self.space.point_id(i).to_string(),
                    value: *z,
                });
            }
        }
        Ok(self.map(|z| z.inv()))
    }

    /// The image of the Gelfand transform: the set of values, deduplicated
    /// with an absolute tolerance and sorted by `(re, im)`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut vals: Vec<Complex64> = self.values.clone();
        vals.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        let mut out: Vec<Complex64> = Vec::new();
        for z in vals {
            if out.iter().all(|w| (z - w).norm() > SPECTRUM_TOL) {
                out.push(z);
            }
        }
        out
    }

    /// The quasi-product `a + b - ab`; its identity is 0.
    pub fn quasi_product(&self, rhs: &Element) -> Element {
        self.zip(rhs, |a, b| a + b - a * b)
    }

    /// The quasi-inverse of `self` when `1 - self` is invertible:
    /// `b = -a (1 - a)^(-1)`, so that `a + b - ab = 0`.
    pub fn quasi_inverse(&self) -> Result<Element> {
        let one = Element::one(&self.space);
        let denom = (&one - self).invert()?;
        Ok((-self).zip(&denom, |a, d| a * d))
    }

    /// Pointwise exponential.
    pub fn exp(&self) -> Element {
        self.map(|z| z.exp())
    }

    /// Pointwise principal logarithm; the branch cut is the ray `(-inf, 0]`.
    pub fn log_principal(&self) -> Result<Element> {
        self.log_with_cut(PI)
    }

    /// Pointwise logarithm with the branch cut along the ray of angle
    /// `cut_angle`; returned arguments lie in the open interval
    /// `(cut_angle - 2pi, cut_angle)`.
    pub fn log_with_cut(&self, cut_angle: f64) -> Result<Element> {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, &z) in self.values.iter().enumerate() {
            values.push(log_branch(z, cut_angle).ok_or_else(|| Error::LogOnCut {
                point: self.space.point_id(i).to_string(),
            })?);
        }
        Ok(Element { space: self.space.clone(), values })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "values": self.values.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(space: &Space, v: &serde_json::Value) -> Result<Element> {
        let values = v
            .get("values")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Scenario("element JSON lacks `values`".into()))?;
        let mut out = Vec::with_capacity(values.len());
        for pair in values {
            let arr = pair
                .as_array()
                .ok_or_else(|| Error::Scenario("element value must be [re, im]".into()))?;
            let re = arr.first().and_then(|x| x.as_f64()).unwrap_or(0.0);
            let im = arr.get(1).and_then(|x| x.as_f64()).unwrap_or(0.0);
            out.push(Complex64::new(re, im));
        }
        Element::new(space.clone(), out)
    }
}

/// Single-value branch logarithm with the cut along angle `cut_angle`.
/// Returns `None` when `z` lies on the cut (within the scale-aware
/// tolerance) or at the origin.
pub fn log_branch(z: Complex64, cut_angle: f64) -> Option<Complex64> {
    let r = z.norm();
    if r <= INVERT_TOL {
        return None;
    }
    // Signed angular distance from the cut direction, folded to (-pi, pi].
    let mut rel = z.arg() - cut_angle;
    while rel <= -PI {
        rel += 2.0 * PI;
    }
    while rel > PI {
        rel -= 2.0 * PI;
    }
    // On the cut when the direction matches the ray within tolerance.
    if rel.abs() <= INVERT_TOL {
        return None;
    }
    // Choose the representative argument in (cut_angle - 2pi, cut_angle).
    let arg = if rel > 0.0 { cut_angle + rel - 2.0 * PI } else { cut_angle + rel };
    Some(Complex64::new(r.ln(), arg))
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        self.zip(rhs, |a, b| a * b)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map(|z| -z)
    }
}

/// An element `(a, lambda)` of the standard unitization `A_1`, with norm
/// `||a|| + |lambda|`. Used by the quasi-group correspondence: for `mu != 0`
/// and `b` quasi-invertible, `(-mu b, mu)` is invertible in `A_1` with
/// inverse `(-b'/mu, 1/mu)` where `b'` is the quasi-inverse of `b`.
#[derive(Debug, Clone)]
pub struct Unitized {
    pub a: Element,
    pub lambda: Complex64,
}

impl Unitized {
    pub fn new(a: Element, lambda: Complex64) -> Unitized {
        Unitized { a, lambda }
    }

    pub fn identity(space: &Space) -> Unitized {
        Unitized { a: Element::zero(space), lambda: Complex64::new(1.0, 0.0) }
    }

    pub fn mul(&self, rhs: &Unitized) -> Unitized {
        let a = &(&(&self.a * &rhs.a) + &rhs.a.scale(self.lambda)) + &self.a.scale(rhs.lambda);
        Unitized { a, lambda: self.lambda * rhs.lambda }
    }

    pub fn norm(&self) -> f64 {
        self.a.sup_norm() + self.lambda.norm()
    }

    pub fn sub(&self, rhs: &Unitized) -> Unitized {
        Unitized { a: &self.a - &rhs.a, lambda: self.lambda - rhs.lambda }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::CharacterSpace;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_element(space: &Space, rng: &mut impl Rng) -> Element {
        Element::from_fn(space, |_| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap()
    }

    #[test]
    fn sup_norm_of_unit_is_one() {
        let s = CharacterSpace::interval(7).unwrap();
        assert_eq!(Element::one(&s).sup_norm(), 1.0);
    }

    #[test]
    fn sup_norm_takes_max_modulus() {
        let s = CharacterSpace::new(vec!["a".into(), "b".into()], None, vec![]).unwrap();
        let e = Element::new(s, vec![c(1.0, 0.0), c(0.0, -2.0)]).unwrap();
        assert_eq!(e.sup_norm(), 2.0);
    }

    #[test]
    fn sup_norm_is_spectral_radius() {
        // ||e^k||^(1/k) -> sup_norm, exact for the sup norm at every k.
        let s = CharacterSpace::interval(9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = random_element(&s, &mut rng);
        let mut p = e.clone();
        for _ in 1..64 {
            p = &p * &e;
        }
        let spectral = p.sup_norm().powf(1.0 / 64.0);
        assert!((spectral - e.sup_norm()).abs() <= 1e-6);
    }

    #[test]
    fn invert_constant_two() {
        let s = CharacterSpace::interval(4).unwrap();
        let e = Element::constant(&s, c(2.0, 0.0));
        let inv = e.invert().unwrap();
        for v in inv.values() {
            assert_eq!(*v, c(0.5, 0.0));
        }
    }

    #[test]
    fn invert_detects_zero() {
        let s = CharacterSpace::interval(3).unwrap();
        let e = Element::new(s, vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        match e.invert() {
            Err(Error::NotInvertible { point, .. }) => assert_eq!(point, "t1"),
            other => panic!("expected NotInvertible, got {other:?}"),
        }
    }

    #[test]
    fn invert_residual_small() {
        let s = CharacterSpace::circle(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e = Element::from_fn(&s, |_| {
                c(rng.random_range(0.5..2.0), rng.random_range(-0.3..0.3))
            })
            .unwrap();
            let inv = e.invert().unwrap();
            let resid = &(&e * &inv) - &Element::one(e.space());
            assert!(resid.sup_norm() <= 1e-12);
            let back = inv.invert().unwrap();
            assert!((&back - &e).sup_norm() <= 1e-12);
        }
    }

    #[test]
    fn spectrum_constant_and_dedup() {
        let s = CharacterSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            None,
            vec![],
        )
        .unwrap();
        let e = Element::new(s.clone(), vec![c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let spec = e.spectrum();
        assert_eq!(spec, vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let k = Element::constant(&s, c(2.0, 3.0));
        assert_eq!(k.spectrum(), vec![c(2.0, 3.0)]);
    }

    #[test]
    fn spectrum_inside_norm_disk() {
        let s = CharacterSpace::interval(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let e = random_element(&s, &mut rng);
            let r = e.sup_norm();
            for z in e.spectrum() {
                assert!(z.norm() <= r + 1e-12);
            }
        }
    }

    #[test]
    fn quasi_product_identity_and_inverse() {
        let s = CharacterSpace::interval(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_element(&s, &mut rng);
        let z = Element::zero(&s);
        assert!((&z.quasi_product(&b) - &b).sup_norm() == 0.0);

        // a = 1 - u, b = 1 - u^{-1} for invertible u gives a o b = 0.
        let u = Element::from_fn(&s, |_| c(rng.random_range(0.5..1.5), rng.random_range(0.1..0.5)))
            .unwrap();
        let one = Element::one(&s);
        let a = &one - &u;
        let b = &one - &u.invert().unwrap();
        assert!(a.quasi_product(&b).sup_norm() <= 1e-12);
    }

    #[test]
    fn quasi_product_commutes() {
        let s = CharacterSpace::interval(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let a = random_element(&s, &mut rng);
            let b = random_element(&s, &mut rng);
            let d = &a.quasi_product(&b) - &b.quasi_product(&a);
            assert!(d.sup_norm() == 0.0);
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let s = CharacterSpace::interval(8).unwrap();
        assert!((&Element::zero(&s).exp() - &Element::one(&s)).sup_norm() == 0.0);

        let e_const = Element::constant(&s, c(std::f64::consts::E, 0.0));
        let l = e_const.log_principal().unwrap();
        assert!((&l - &Element::one(&s)).sup_norm() <= 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            // values in the right half-plane stay clear of the default cut
            let e = Element::from_fn(&s, |_| {
                c(rng.random_range(0.2..2.0), rng.random_range(-1.0..1.0))
            })
            .unwrap();
            let l = e.log_principal().unwrap();
            assert!((&l.exp() - &e).sup_norm() <= 1e-12);
        }
    }

    #[test]
    fn log_rejects_cut_values() {
        let s = CharacterSpace::interval(2).unwrap();
        let e = Element::new(s, vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(e.log_principal(), Err(Error::LogOnCut { .. })));
        // a rotated cut dodges the negative reals
        assert!(e.log_with_cut(0.5).is_ok());
    }

    #[test]
    fn norm_submultiplicative() {
        let s = CharacterSpace::interval(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let a = random_element(&s, &mut rng);
            let b = random_element(&s, &mut rng);
            assert!((&a * &b).sup_norm() <= a.sup_norm() * b.sup_norm() + 1e-15);
        }
    }

    #[test]
    fn unitization_quasi_group_correspondence() {
        let s = CharacterSpace::interval(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            // b with values bounded away from 1 has a quasi-inverse
            let b = Element::from_fn(&s, |_| {
                c(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8))
            })
            .unwrap();
            let mu = c(rng.random_range(0.2..2.0), rng.random_range(-1.0..1.0));
            let bq = b.quasi_inverse().unwrap();
            let u = Unitized::new(b.scale(-mu), mu);
            assert!((u.norm() - (b.scale(-mu).sup_norm() + mu.norm())).abs() <= 1e-15);
            let inv = Unitized::new(bq.scale(-mu.inv()), mu.inv());
            let prod = u.mul(&inv);
            let resid = prod.sub(&Unitized::identity(&s)).norm();
            assert!(resid <= 1e-10, "residual {resid}");
        }
    }
}
