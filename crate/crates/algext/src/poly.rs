//! Polynomials over the base algebra: monic division, the resultant
//! determinant, its expansion as a polynomial in the constant coefficient,
//! Newton sums, and root rescaling.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::roots;
use crate::space::Space;

/// Default cap on polynomial degree; determinant size and root conditioning
/// degrade beyond this.
pub const DEGREE_CAP: usize = 8;

/// A monic polynomial `a_0 + a_1 x + ... + a_{n-1} x^{n-1} + x^n` with
/// coefficients in the base algebra; the leading 1 is implicit.
#[derive(Debug, Clone)]
pub struct MonicPoly {
    space: Space,
    coeffs: Vec<Element>,
}

impl MonicPoly {
    /// Builds a monic polynomial from `a_0..a_{n-1}` under the default
    /// degree cap.
    pub fn new(coeffs: Vec<Element>) -> Result<MonicPoly> {
        Self::with_degree_cap(coeffs, DEGREE_CAP)
    }

    pub fn with_degree_cap(coeffs: Vec<Element>, cap: usize) -> Result<MonicPoly> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPoly("degree must be at least 1".into()));
        }
        if coeffs.len() > cap {
            return Err(Error::DegreeTooHigh { got: coeffs.len(), max: cap });
        }
        let space = coeffs[0].space().clone();
        if coeffs.iter().any(|c| c.space().id() != space.id()) {
            return Err(Error::MixedSpaces);
        }
        Ok(MonicPoly { space, coeffs })
    }

    /// `x^n - e` and friends: monic with constant coefficients taken from
    /// complex scalars.
    pub fn from_constants(space: &Space, coeffs: &[Complex64]) -> Result<MonicPoly> {
        let elems = coeffs
            .iter()
            .map(|&z| Element::constant(space, z))
            .collect();
        Self::new(elems)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Coefficients `a_0..a_{n-1}`.
    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    /// The complex coefficient vector at one character.
    pub fn char_coeffs(&self, char_index: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.value(char_index)).collect()
    }

    /// `1 + max |coefficient value|`, the scale used by root tolerances.
    pub fn coeff_scale(&self) -> f64 {
        1.0 + self.coeffs.iter().map(|c| c.sup_norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient sup norms (the bracket width used by the norm
    /// parameter search and the root bound).
    pub fn coeff_norm_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.sup_norm()).sum()
    }

    /// The rescaled polynomial whose roots are `mu` times the originals:
    /// coefficient `k` becomes `mu^(n-k) a_k`.
    pub fn rescale(&self, mu: f64) -> MonicPoly {
        let n = self.coeffs.len();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a.scale(Complex64::new(mu.powi((n - k) as i32), 0.0)))
            .collect();
        MonicPoly { space: self.space.clone(), coeffs }
    }

    /// Distinct roots with multiplicity at one character.
    pub fn clustered_roots(&self, char_index: usize) -> Result<Vec<roots::ClusteredRoot>> {
        roots::clustered_roots_checked(
            &self.char_coeffs(char_index),
            self.space.point_id(char_index),
        )
    }

    /// All `n` roots at one character, repeated by multiplicity, sorted.
    pub fn raw_roots(&self, char_index: usize) -> Vec<Complex64> {
        roots::monic_roots(&self.char_coeffs(char_index))
    }
}

/// A not-necessarily-monic polynomial `b_0 + b_1 x + ... + b_m x^m` over the
/// base algebra. High-order zero coefficients are trimmed on construction.
#[derive(Debug, Clone)]
pub struct PolyOverA {
    space: Space,
    coeffs: Vec<Element>,
}

impl PolyOverA {
    pub fn new(space: &Space, coeffs: Vec<Element>) -> Result<PolyOverA> {
        if coeffs.iter().any(|c| c.space().id() != space.id()) {
            return Err(Error::MixedSpaces);
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.sup_norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Element::zero(space));
        }
        Ok(PolyOverA { space: space.clone(), coeffs })
    }

    pub fn zero(space: &Space) -> PolyOverA {
        PolyOverA { space: space.clone(), coeffs: vec![Element::zero(space)] }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    /// Degree after trimming; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.sup_norm() == 0.0)
    }

    /// Coefficient `k`, or zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Element {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Element::zero(&self.space))
    }

    /// Evaluates the polynomial at an algebra element (Horner).
    pub fn eval_elem(&self, x: &Element) -> Element {
        let mut acc = Element::zero(&self.space);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn eval_at_char(&self, char_index: usize, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.value(char_index);
        }
        acc
    }

    /// Formal derivative.
    pub fn derivative(&self) -> PolyOverA {
        if self.coeffs.len() <= 1 {
            return PolyOverA::zero(&self.space);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale(Complex64::new(k as f64, 0.0)))
            .collect();
        PolyOverA::new(&self.space, coeffs).expect("derivative coefficients share the space")
    }

    /// Product of two polynomials (coefficient convolution).
    pub fn mul(&self, rhs: &PolyOverA) -> PolyOverA {
        let mut out =
            vec![Element::zero(&self.space); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        PolyOverA::new(&self.space, out).expect("product coefficients share the space")
    }

    pub fn add(&self, rhs: &PolyOverA) -> PolyOverA {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect();
        PolyOverA::new(&self.space, coeffs).expect("sum coefficients share the space")
    }

    /// The monic polynomial as a plain polynomial (leading coefficient 1).
    pub fn from_monic(alpha: &MonicPoly) -> PolyOverA {
        let mut coeffs = alpha.coeffs().to_vec();
        coeffs.push(Element::one(alpha.space()));
        PolyOverA { space: alpha.space().clone(), coeffs }
    }
}

/// Division with remainder by a monic polynomial: `beta = q * alpha + r` with
/// `deg r < n`. Always defined since `alpha` is monic.
pub fn monic_divmod(beta: &PolyOverA, alpha: &MonicPoly) -> Result<(PolyOverA, PolyOverA)> {
    if beta.space().id() != alpha.space().id() {
        return Err(Error::MixedSpaces);
    }
    let n = alpha.degree();
    let m = beta.degree();
    if m < n || beta.is_zero() {
        return Ok((PolyOverA::zero(beta.space()), beta.clone()));
    }
    let mut rem: Vec<Element> = beta.coeffs().to_vec();
    let mut quot = vec![Element::zero(beta.space()); m - n + 1];
    for k in (n..=m).rev() {
        let q = rem[k].clone();
        for (j, a) in alpha.coeffs().iter().enumerate() {
            rem[k - n + j] = &rem[k - n + j] - &(&q * a);
        }
        rem[k] = Element::zero(beta.space());
        quot[k - n] = q;
    }
    rem.truncate(n);
    Ok((
        PolyOverA::new(beta.space(), quot)?,
        PolyOverA::new(beta.space(), rem)?,
    ))
}

/// Builds the `(2n-1) x (2n-1)` resultant matrix at one character:
/// `n-1` rows of the coefficients of `alpha` in descending order followed by
/// `n` rows of the (padded) coefficients of `beta`, each block shifted one
/// column per row.
fn resultant_matrix(a: &[Complex64], b: &[Complex64]) -> DMatrix<Complex64> {
    let n = a.len();
    let dim = 2 * n - 1;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..n - 1 {
        m[(i, i)] = Complex64::new(1.0, 0.0);
        for j in 0..n {
            m[(i, i + 1 + j)] = a[n - 1 - j];
        }
    }
    for i in 0..n {
        for j in 0..n {
            m[(n - 1 + i, i + j)] = b[n - 1 - j];
        }
    }
    m
}

/// The resultant of a monic `alpha` of degree `n` with `beta` of degree at
/// most `n-1`, computed per character as a determinant. It equals the product
/// of `beta` over the roots of `alpha` (with multiplicity) and is invertible
/// in the base exactly when `beta` is invertible modulo `alpha`.
pub fn resultant(alpha: &MonicPoly, beta: &PolyOverA) -> Result<Element> {
    if beta.space().id() != alpha.space().id() {
        return Err(Error::MixedSpaces);
    }
    let n = alpha.degree();
    if !beta.is_zero() && beta.degree() >= n {
        return Err(Error::DegreeTooHigh { got: beta.degree(), max: n - 1 });
    }
    let space = alpha.space();
    let mut values = Vec::with_capacity(space.len());
    for w in 0..space.len() {
        let a = alpha.char_coeffs(w);
        let b: Vec<Complex64> = (0..n).map(|k| beta.coeff(k).value(w)).collect();
        if n == 1 {
            values.push(b[0]);
            continue;
        }
        let det = resultant_matrix(&a, &b).lu().determinant();
        values.push(det);
    }
    Element::new(space.clone(), values)
}

/// The coefficients `p_0..p_{n-1}` of `P(c) = p_0 + ... + p_{n-1} c^{n-1} + c^n`
/// such that `P(c) = resultant(alpha, c + b_1 x + ... + b_{n-1} x^{n-1})` for
/// every element `c`.
///
/// Computed by interpolating the resultant at the constants `c = 0, 1, ..., n`
/// and solving the Vandermonde system; exact for a degree-`n` polynomial.
pub fn resultant_as_poly_in_c(alpha: &MonicPoly, bs: &[Element]) -> Result<Vec<Element>> {
    let n = alpha.degree();
    if bs.len() != n.saturating_sub(1) {
        return Err(Error::InvalidPoly(format!(
            "expected {} upper coefficients, got {}",
            n - 1,
            bs.len()
        )));
    }
    let space = alpha.space();
    if bs.iter().any(|b| b.space().id() != space.id()) {
        return Err(Error::MixedSpaces);
    }
    // values of P at c = 0..n for every character
    let mut samples = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut coeffs = Vec::with_capacity(n);
        coeffs.push(Element::constant(space, Complex64::new(j as f64, 0.0)));
        coeffs.extend(bs.iter().cloned());
        let beta = PolyOverA::new(space, coeffs)?;
        samples.push(resultant(alpha, &beta)?);
    }
    // One Vandermonde factorisation serves every character.
    let dim = n + 1;
    let mut v = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..dim {
        for k in 0..dim {
            v[(j, k)] = Complex64::new((j as f64).powi(k as i32), 0.0);
        }
    }
    let lu = v.lu();
    let mut coeff_values: Vec<Vec<Complex64>> = vec![Vec::with_capacity(space.len()); dim];
    for w in 0..space.len() {
        let rhs = nalgebra::DVector::from_iterator(dim, samples.iter().map(|s| s.value(w)));
        let sol = lu
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidPoly("Vandermonde solve failed".into()))?;
        for k in 0..dim {
            coeff_values[k].push(sol[k]);
        }
    }
    // the leading coefficient interpolates to 1
    let lead_err = coeff_values[n]
        .iter()
        .map(|z| (z - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    if lead_err > 1e-6 * alpha.coeff_scale().powi(n as i32) {
        return Err(Error::InvalidPoly(format!(
            "resultant interpolation leading coefficient off by {lead_err:e}"
        )));
    }
    coeff_values
        .into_iter()
        .take(n)
        .map(|vals| Element::new(space.clone(), vals))
        .collect()
}

/// Newton sums `s_0..s_J` of a monic polynomial: `s_j` evaluates at each
/// character to the `j`th power sum of the roots there.
#[derive(Debug, Clone)]
pub struct NewtonSums {
    sums: Vec<Element>,
}

impl NewtonSums {
    pub fn sums(&self) -> &[Element] {
        &self.sums
    }

    pub fn get(&self, j: usize) -> &Element {
        &self.sums[j]
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }
}

/// Computes `s_0..s_J` by the inductive recursion
/// `s_0 = n`,
/// `s_k = -(a_{n-1} s_{k-1} + ... + a_{n-k+1} s_1 + k a_{n-k})` for `1 <= k <= n`,
/// `s_{n+k} = -(a_{n-1} s_{n+k-1} + ... + a_0 s_k)` for `k >= 1`.
pub fn newton_sums(alpha: &MonicPoly, j_max: usize) -> NewtonSums {
    let n = alpha.degree();
    let space = alpha.space();
    let a = alpha.coeffs();
    let mut sums: Vec<Element> =
        vec![Element::constant(space, Complex64::new(n as f64, 0.0))];
    for k in 1..=j_max {
        let mut acc = Element::zero(space);
        if k <= n {
            for i in 1..k {
                acc = &acc + &(&a[n - i] * &sums[k - i]);
            }
            acc = &acc + &a[n - k].scale(Complex64::new(k as f64, 0.0));
        } else {
            for i in 1..=n {
                acc = &acc + &(&a[n - i] * &sums[k - i]);
            }
        }
        sums.push(-&acc);
    }
    NewtonSums { sums }
}
