//! Cole extensions by finite sets of monic polynomials: the product
//! fibration, coordinate functions, minimal representatives, the
//! multi-polynomial averaging operator `T_U`, and sup-norm distance to
//! finite-dimensional subspaces.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::poly::{monic_divmod, newton_sums, MonicPoly, NewtonSums, PolyOverA};
use crate::space::{CharacterSpace, Space};

/// Default cap on the total number of product-fibre points.
pub const POINT_CAP: usize = 1_000_000;

/// The product fibration `X^U`: over each base character, all tuples of
/// roots of the adjoined polynomials, multiplicity-expanded so that every
/// character carries exactly `prod n(alpha_j)` points.
#[derive(Debug)]
pub struct ColeSpace {
    base: Space,
    polys: Vec<MonicPoly>,
    space: Space,
    parent: Vec<usize>,
    coords: Vec<Vec<Complex64>>,
    fibre_of: Vec<Vec<usize>>,
    sums: Vec<NewtonSums>,
}

/// Shared handle to a Cole space.
pub type Cole = Arc<ColeSpace>;

impl ColeSpace {
    /// Builds the fibred product of the individual root fibrations under the
    /// default point cap.
    pub fn build(base: &Space, polys: Vec<MonicPoly>) -> Result<Cole> {
        Self::build_capped(base, polys, POINT_CAP)
    }

    pub fn build_capped(base: &Space, polys: Vec<MonicPoly>, cap: usize) -> Result<Cole> {
        for p in &polys {
            if p.space().id() != base.id() {
                return Err(Error::MixedSpaces);
            }
        }
        let per_char: usize = polys.iter().map(|p| p.degree()).product();
        let total = per_char.saturating_mul(base.len());
        if total > cap {
            return Err(Error::TooLarge { size: total, cap });
        }

        // per polynomial and character: roots repeated by multiplicity
        let mut roots: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(polys.len());
        for p in &polys {
            let mut per_poly = Vec::with_capacity(base.len());
            let bound = p.coeff_norm_sum().max(1.0);
            for w in 0..base.len() {
                let mut expanded = Vec::with_capacity(p.degree());
                for cl in p.clustered_roots(w)? {
                    if cl.value.norm() > bound * (1.0 + 1e-9) {
                        return Err(Error::IllConditioned {
                            point: base.point_id(w).to_string(),
                        });
                    }
                    for _ in 0..cl.multiplicity {
                        expanded.push(cl.value);
                    }
                }
                per_poly.push(expanded);
            }
            roots.push(per_poly);
        }

        let mut parent = Vec::with_capacity(total);
        let mut coords = Vec::with_capacity(total);
        let mut fibre_of = Vec::with_capacity(base.len());
        let mut names = Vec::with_capacity(total);
        #[allow(clippy::needless_range_loop)]
        for w in 0..base.len() {
            let mut fibre = Vec::with_capacity(per_char);
            let mut index = vec![0usize; polys.len()];
            loop {
                let tuple: Vec<Complex64> = index
                    .iter()
                    .enumerate()
                    .map(|(j, &i)| roots[j][w][i])
                    .collect();
                let label: Vec<String> = index.iter().map(|i| i.to_string()).collect();
                names.push(format!("{}|{}", base.point_id(w), label.join(",")));
                fibre.push(parent.len());
                parent.push(w);
                coords.push(tuple);
                // advance the multi-index, last coordinate fastest
                let mut j = polys.len();
                loop {
                    if j == 0 {
                        break;
                    }
                    j -= 1;
                    index[j] += 1;
                    if index[j] < polys[j].degree() {
                        break;
                    }
                    index[j] = 0;
                    if j == 0 {
                        j = usize::MAX;
                        break;
                    }
                }
                if j == usize::MAX || polys.is_empty() {
                    break;
                }
            }
            fibre_of.push(fibre);
        }
        let space = CharacterSpace::new(names, None, Vec::new())?;
        let sums = polys
            .iter()
            .map(|p| newton_sums(p, p.degree().saturating_sub(1)))
            .collect();
        Ok(Arc::new(ColeSpace {
            base: base.clone(),
            polys,
            space,
            parent,
            coords,
            fibre_of,
            sums,
        }))
    }

    pub fn base(&self) -> &Space {
        &self.base
    }

    pub fn polys(&self) -> &[MonicPoly] {
        &self.polys
    }

    /// The product space as a character space (no adjacency).
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Base character of a point.
    pub fn parent_of(&self, point: usize) -> usize {
        self.parent[point]
    }

    /// The root tuple `(lambda_1, ..., lambda_N)` of a point.
    pub fn tuple(&self, point: usize) -> &[Complex64] {
        &self.coords[point]
    }

    /// Restriction of a point's tuple to a subset of polynomial indices.
    pub fn project_subtuple(&self, point: usize, indices: &[usize]) -> Vec<Complex64> {
        indices.iter().map(|&j| self.coords[point][j]).collect()
    }

    /// Points over one base character.
    pub fn fibre_points(&self, char_index: usize) -> &[usize] {
        &self.fibre_of[char_index]
    }

    /// Per-character point count `prod n(alpha_j)`.
    pub fn fibre_size(&self) -> usize {
        self.polys.iter().map(|p| p.degree()).product()
    }

    /// CSV dump `(character, lambda_1_re, lambda_1_im, ..., multiplicity)`
    /// of the distinct-collapsed view.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# cole-csv v1\n");
        out.push_str("character");
        for j in 0..self.polys.len() {
            out.push_str(&format!(",lambda{}_re,lambda{}_im", j + 1, j + 1));
        }
        out.push_str(",multiplicity\n");
        for w in 0..self.base.len() {
            // group identical tuples (they repeat by multiplicity)
            let mut groups: Vec<(Vec<Complex64>, usize)> = Vec::new();
            for &p in &self.fibre_of[w] {
                let tup = &self.coords[p];
                match groups.iter_mut().find(|(t, _)| {
                    t.iter().zip(tup.iter()).all(|(a, b)| (a - b).norm() == 0.0)
                }) {
                    Some((_, count)) => *count += 1,
                    None => groups.push((tup.clone(), 1)),
                }
            }
            for (tup, count) in groups {
                out.push_str(self.base.point_id(w));
                for z in &tup {
                    out.push_str(&format!(",{:e},{:e}", z.re, z.im));
                }
                out.push_str(&format!(",{count}\n"));
            }
        }
        out
    }
}

/// A minimal representative over a Cole space: coefficients `b_m` indexed by
/// multi-indices `m` with `0 <= m_j < n(alpha_j)`, flattened with the last
/// index fastest.
#[derive(Debug, Clone)]
pub struct ColePolyElement {
    cole: Cole,
    coeffs: Vec<Element>,
}

impl ColePolyElement {
    pub fn new(cole: &Cole, coeffs: Vec<Element>) -> Result<ColePolyElement> {
        let expect = cole.fibre_size();
        if coeffs.len() != expect {
            return Err(Error::InvalidPoly(format!(
                "expected {expect} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.space().id() != cole.base.id()) {
            return Err(Error::MixedSpaces);
        }
        Ok(ColePolyElement { cole: cole.clone(), coeffs })
    }

    /// The embedded base element `pi^*(a)`.
    pub fn embed(cole: &Cole, a: &Element) -> Result<ColePolyElement> {
        if a.space().id() != cole.base.id() {
            return Err(Error::MixedSpaces);
        }
        let mut coeffs = vec![Element::zero(&cole.base); cole.fibre_size()];
        coeffs[0] = a.clone();
        Ok(ColePolyElement { cole: cole.clone(), coeffs })
    }

    /// The coordinate function `p_{alpha_j}`.
    pub fn coordinate(cole: &Cole, j: usize) -> Result<ColePolyElement> {
        if j >= cole.polys.len() {
            return Err(Error::InvalidPoly(format!("no adjoined polynomial {j}")));
        }
        let mut coeffs = vec![Element::zero(&cole.base); cole.fibre_size()];
        let mut index = vec![0usize; cole.polys.len()];
        index[j] = 1;
        let flat = cole.flatten(&index);
        coeffs[flat] = Element::one(&cole.base);
        Ok(ColePolyElement { cole: cole.clone(), coeffs })
    }

    pub fn cole(&self) -> &Cole {
        &self.cole
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    /// Evaluation at a product-fibre point:
    /// `sum_m b_m(w) prod_j lambda_j^{m_j}`.
    pub fn eval(&self, point: usize) -> Complex64 {
        let w = self.cole.parent[point];
        let tuple = &self.cole.coords[point];
        let mut sum = Complex64::new(0.0, 0.0);
        let mut index = vec![0usize; self.cole.polys.len()];
        for b in &self.coeffs {
            let mut mono = Complex64::new(1.0, 0.0);
            for (j, &m) in index.iter().enumerate() {
                mono *= tuple[j].powu(m as u32);
            }
            sum += b.value(w) * mono;
            self.cole.advance(&mut index);
        }
        sum
    }

    /// The transform on the whole product space.
    pub fn gelfand_element(&self) -> Element {
        let values = (0..self.cole.len()).map(|p| self.eval(p)).collect();
        Element::new(self.cole.space.clone(), values).expect("finite values")
    }

    pub fn try_add(&self, rhs: &ColePolyElement) -> Result<ColePolyElement> {
        if !Arc::ptr_eq(&self.cole, &rhs.cole) {
            return Err(Error::MixedExtensions);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        ColePolyElement::new(&self.cole, coeffs)
    }

    /// Product of minimal representatives: convolve the multi-indexed
    /// coefficients, then reduce coordinate by coordinate with
    /// `monic_divmod`.
    pub fn try_mul(&self, rhs: &ColePolyElement) -> Result<ColePolyElement> {
        if !Arc::ptr_eq(&self.cole, &rhs.cole) {
            return Err(Error::MixedExtensions);
        }
        let n_polys = self.cole.polys.len();
        let degs: Vec<usize> = self.cole.polys.iter().map(|p| p.degree()).collect();
        if n_polys == 0 {
            let prod = &self.coeffs[0] * &rhs.coeffs[0];
            return ColePolyElement::new(&self.cole, vec![prod]);
        }
        // working tensor with dims 2 n_j - 1
        let work_dims: Vec<usize> = degs.iter().map(|&d| 2 * d - 1).collect();
        let work_len: usize = work_dims.iter().product();
        let mut work = vec![Element::zero(&self.cole.base); work_len];
        let mut ia = vec![0usize; n_polys];
        for a in &self.coeffs {
            let mut ib = vec![0usize; n_polys];
            for b in &rhs.coeffs {
                let sum_idx: Vec<usize> = ia.iter().zip(&ib).map(|(x, y)| x + y).collect();
                let flat = flatten_dims(&sum_idx, &work_dims);
                work[flat] = &work[flat] + &(a * b);
                advance_dims(&mut ib, &degs);
            }
            advance_dims(&mut ia, &degs);
        }
        // reduce along each coordinate
        let mut dims = work_dims;
        for j in 0..n_polys {
            let alpha = &self.cole.polys[j];
            let mut new_dims = dims.clone();
            new_dims[j] = degs[j];
            let new_len: usize = new_dims.iter().product();
            let mut reduced = vec![Element::zero(&self.cole.base); new_len];
            // iterate over all slices fixing the other coordinates
            let mut outer = vec![0usize; n_polys];
            let outer_dims: Vec<usize> = dims
                .iter()
                .enumerate()
                .map(|(k, &d)| if k == j { 1 } else { d })
                .collect();
            let outer_count: usize = outer_dims.iter().product();
            for _ in 0..outer_count {
                let slice: Vec<Element> = (0..dims[j])
                    .map(|m| {
                        let mut idx = outer.clone();
                        idx[j] = m;
                        work[flatten_dims(&idx, &dims)].clone()
                    })
                    .collect();
                let poly = PolyOverA::new(&self.cole.base, slice)?;
                let (_, rem) = monic_divmod(&poly, alpha)?;
                for m in 0..degs[j] {
                    let mut idx = outer.clone();
                    idx[j] = m;
                    reduced[flatten_dims(&idx, &new_dims)] = rem.coeff(m);
                }
                advance_dims(&mut outer, &outer_dims);
            }
            work = reduced;
            dims = new_dims;
        }
        ColePolyElement::new(&self.cole, work)
    }

    /// The multi-polynomial averaging operator:
    /// `T_U(e) = (1 / prod n_j) sum_m b_m s_{alpha_1}^{m_1} ... s_{alpha_N}^{m_N}`.
    pub fn average_down(&self) -> Element {
        let mut acc = Element::zero(&self.cole.base);
        let mut index = vec![0usize; self.cole.polys.len()];
        for b in &self.coeffs {
            let mut weight = Element::one(&self.cole.base);
            for (j, &m) in index.iter().enumerate() {
                weight = &weight * self.cole.sums[j].get(m);
            }
            acc = &acc + &(b * &weight);
            self.cole.advance(&mut index);
        }
        let scale = 1.0 / self.cole.fibre_size() as f64;
        acc.scale(Complex64::new(scale, 0.0))
    }

    /// The fibre-average form of `T_U` (the cross-oracle): at each base
    /// character, the mean of the transform over the product fibre.
    pub fn average_down_by_fibres(&self) -> Element {
        let m = self.cole.fibre_size() as f64;
        let values = (0..self.cole.base.len())
            .map(|w| {
                let mut sum = Complex64::new(0.0, 0.0);
                for &p in &self.cole.fibre_of[w] {
                    sum += self.eval(p);
                }
                sum / m
            })
            .collect();
        Element::new(self.cole.base.clone(), values).expect("finite values")
    }
}

impl ColeSpace {
    fn flatten(&self, index: &[usize]) -> usize {
        let dims: Vec<usize> = self.polys.iter().map(|p| p.degree()).collect();
        flatten_dims(index, &dims)
    }

    fn advance(&self, index: &mut [usize]) {
        let dims: Vec<usize> = self.polys.iter().map(|p| p.degree()).collect();
        advance_dims(index, &dims);
    }
}

fn flatten_dims(index: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0;
    for (i, d) in index.iter().zip(dims) {
        flat = flat * d + i;
    }
    flat
}

fn advance_dims(index: &mut [usize], dims: &[usize]) {
    for j in (0..index.len()).rev() {
        index[j] += 1;
        if index[j] < dims[j] {
            return;
        }
        index[j] = 0;
    }
}

/// Sup-norm distance from `f` to the span of `basis`, to about 1e-6:
/// `inf_c max_p |f(p) - sum c_i g_i(p)|`.
///
/// Least-squares initialisation followed by Lawson-style reweighting toward
/// the max (smooth-max with exponent doubling), then seeded random restarts.
pub fn sup_distance(f: &Element, basis: &[Element]) -> Result<f64> {
    if basis.len() > 64 {
        return Err(Error::TooLarge { size: basis.len(), cap: 64 });
    }
    for g in basis {
        if g.space().id() != f.space().id() {
            return Err(Error::MixedSpaces);
        }
    }
    if basis.is_empty() {
        return Ok(f.sup_norm());
    }
    let n_points = f.space().len();
    let n_basis = basis.len();
    let gmat = DMatrix::<Complex64>::from_fn(n_points, n_basis, |p, i| basis[i].value(p));
    let fvec = DVector::<Complex64>::from_fn(n_points, |p, _| f.value(p));

    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(0xd157);

    let mut best = f64::INFINITY;
    for restart in 0..6 {
        let mut weights: Vec<f64> = if restart == 0 {
            vec![1.0; n_points]
        } else {
            (0..n_points).map(|_| rng.random_range(0.1..1.0)).collect()
        };
        let mut gamma = 1.0f64;
        let iters = if restart == 0 { 200 } else { 100 };
        for it in 0..iters {
            // weighted normal equations G^H W G c = G^H W f
            let mut a = DMatrix::<Complex64>::zeros(n_basis, n_basis);
            let mut b = DVector::<Complex64>::zeros(n_basis);
            for p in 0..n_points {
                let w = weights[p];
                for i in 0..n_basis {
                    let gi = gmat[(p, i)].conj();
                    for j in 0..n_basis {
                        a[(i, j)] += gi * gmat[(p, j)] * w;
                    }
                    b[i] += gi * fvec[p] * w;
                }
            }
            for i in 0..n_basis {
                a[(i, i)] += Complex64::new(1e-13, 0.0);
            }
            let c = match a.lu().solve(&b) {
                Some(c) => c,
                None => break,
            };
            let mut maxr = 0.0f64;
            let mut resid = vec![0.0f64; n_points];
            for p in 0..n_points {
                let mut approx = Complex64::new(0.0, 0.0);
                for i in 0..n_basis {
                    approx += gmat[(p, i)] * c[i];
                }
                resid[p] = (fvec[p] - approx).norm();
                maxr = maxr.max(resid[p]);
            }
            best = best.min(maxr);
            if maxr <= 1e-12 {
                break;
            }
            // Lawson update toward the minimax weighting
            let mut total = 0.0;
            for p in 0..n_points {
                weights[p] *= (resid[p] / maxr).powf(gamma) + 1e-14;
                total += weights[p];
            }
            for w in weights.iter_mut() {
                *w /= total;
            }
            if it % 25 == 24 {
                gamma = (gamma * 2.0).min(8.0);
            }
        }
    }
    Ok(best)
}
