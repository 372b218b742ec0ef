//! Logarithmic extensions: branch-enumerated log fibrations, the
//! norm-parameter policy built from local logarithm patches, the
//! partition-of-unity averaging operator, logarithm descent, winding
//! numbers, the analytic region computation for the non-openness example,
//! and finite log towers.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::algebra::{log_branch, Element, INVERT_TOL};
use crate::averaging::AveragingOperator;
use crate::error::{Error, Result};
use crate::extension::AHElement;
use crate::fibration::{extract_components, Component, FibredSpace};
use crate::space::{CharacterSpace, Space};
use crate::tower::Tower;

/// Policy for choosing the norm parameter of a logarithmic extension.
#[derive(Debug, Clone, Copy)]
pub struct LogParamPolicy {
    /// Lower bound on `t`.
    pub floor: f64,
    /// `t` is the patch-log bound rounded up to a multiple of this.
    pub round_to: f64,
    /// A patch stops growing once the argument spread of the element's
    /// values over it would exceed this (margin to the rotated cut).
    pub max_spread: f64,
}

impl Default for LogParamPolicy {
    fn default() -> Self {
        LogParamPolicy { floor: 1.0, round_to: PI, max_spread: 1.5 * PI }
    }
}

/// One local-logarithm patch: the characters it covers and the log element
/// (zero off the patch).
#[derive(Debug, Clone)]
pub struct LogPatch {
    pub chars: Vec<usize>,
    pub log: Element,
}

/// A covering family of local logarithms with the norm parameter they
/// induce.
#[derive(Debug, Clone)]
pub struct LogPatches {
    pub patches: Vec<LogPatch>,
    pub t: f64,
}

/// Covers the base with patches on which `a` avoids a rotated cut ray and
/// takes per-patch branch logarithms; `t` is the largest patch-log modulus
/// rounded up per the policy.
///
/// Patches grow greedily along the adjacency from the lowest-index
/// uncovered character, with the cut rotated opposite the seed value.
pub fn choose_norm_param_log(a: &Element, policy: &LogParamPolicy) -> Result<LogPatches> {
    a.invert()?; // fail with the witness point if not invertible
    let space = a.space();
    let n = space.len();
    let mut covered = vec![false; n];
    let mut patches = Vec::new();
    let mut t_raw = 0.0f64;
    while let Some(seed) = (0..n).find(|&w| !covered[w]) {
        let seed_arg = a.value(seed).arg();
        let cut = seed_arg + PI;
        let half_spread = policy.max_spread / 2.0;
        let in_spread = |w: usize| -> bool {
            match log_branch(a.value(w), cut) {
                Some(l) => (l.im - seed_arg).abs() <= half_spread,
                None => false,
            }
        };
        let mut in_patch = vec![false; n];
        in_patch[seed] = true;
        covered[seed] = true;
        let mut queue = std::collections::VecDeque::from([seed]);
        while let Some(w) = queue.pop_front() {
            for nb in space.neighbours(w) {
                if !in_patch[nb] && in_spread(nb) {
                    in_patch[nb] = true;
                    covered[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        let chars: Vec<usize> = (0..n).filter(|&w| in_patch[w]).collect();
        let values: Vec<Complex64> = (0..n)
            .map(|w| {
                if in_patch[w] {
                    let l = log_branch(a.value(w), cut).expect("patch avoids the cut");
                    t_raw = t_raw.max(l.norm());
                    l
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        patches.push(LogPatch { chars, log: Element::new(space.clone(), values)? });
    }
    let t = if t_raw <= policy.floor {
        policy.floor
    } else {
        ((t_raw / policy.round_to).ceil() * policy.round_to).max(policy.floor)
    };
    Ok(LogPatches { patches, t })
}

/// A partition of unity subordinate to the patch cover: pairs `(u_j, l_j)`
/// with `sum u_j = 1` and `e^{l_j} = a` on the support of `u_j`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub pairs: Vec<(Element, Element)>,
}

impl PartitionOfUnity {
    /// Equal-share weights on patch overlaps.
    pub fn from_patches(patches: &LogPatches, space: &Space) -> Result<PartitionOfUnity> {
        let n = space.len();
        let mut counts = vec![0usize; n];
        for p in &patches.patches {
            for &w in &p.chars {
                counts[w] += 1;
            }
        }
        if counts.contains(&0) {
            return Err(Error::Scenario("patches do not cover the space".into()));
        }
        let mut pairs = Vec::with_capacity(patches.patches.len());
        for p in &patches.patches {
            let mut values = vec![Complex64::new(0.0, 0.0); n];
            for &w in &p.chars {
                values[w] = Complex64::new(1.0 / counts[w] as f64, 0.0);
            }
            pairs.push((Element::new(space.clone(), values)?, p.log.clone()));
        }
        Ok(PartitionOfUnity { pairs })
    }

    /// Deviation of `sum_j u_j` from the unit.
    pub fn unit_residual(&self) -> f64 {
        let space = self.pairs[0].0.space();
        let mut acc = Element::zero(space);
        for (u, _) in &self.pairs {
            acc = &acc + u;
        }
        (&acc - &Element::one(space)).sup_norm()
    }
}

/// The log-extension averaging operator of a partition of unity:
/// `T(sum q_k x^k) = sum_k q_k s_k` with `s_k = sum_j u_j l_j^k`. Unital,
/// and it annihilates representatives of the zero coset.
pub fn log_t_operator(pu: &PartitionOfUnity, q: &[Element]) -> Result<Element> {
    let space = pu.pairs[0].0.space();
    if q.is_empty() {
        return Ok(Element::zero(space));
    }
    let mut acc = Element::zero(space);
    // powers l_j^k accumulated incrementally
    let mut powers: Vec<Element> = pu.pairs.iter().map(|_| Element::one(space)).collect();
    for coeff in q {
        if coeff.space().id() != space.id() {
            return Err(Error::MixedSpaces);
        }
        let mut sk = Element::zero(space);
        for ((u, _), pw) in pu.pairs.iter().zip(&powers) {
            sk = &sk + &(u * pw);
        }
        acc = &acc + &(coeff * &sk);
        for ((_, l), pw) in pu.pairs.iter().zip(powers.iter_mut()) {
            *pw = &*pw * l;
        }
    }
    Ok(acc)
}

/// The character space of a logarithmic extension: all `(w, lambda)` with
/// `e^lambda = a(w)` and `|lambda| <= t`, enumerated as the principal log
/// plus `2 pi i k` over integer branches.
#[derive(Debug)]
pub struct LogFibration {
    base: Space,
    a: Element,
    t: f64,
    space: Space,
    parent: Vec<usize>,
    offsets: Vec<usize>,
    lambdas: Vec<Complex64>,
    branch_ks: Vec<i64>,
    components: Vec<Component>,
}

impl LogFibration {
    pub fn build(a: &Element, t: f64) -> Result<LogFibration> {
        a.invert()?;
        let base = a.space().clone();
        let mut parent = Vec::new();
        let mut offsets = Vec::with_capacity(base.len());
        let mut lambdas = Vec::new();
        let mut branch_ks = Vec::new();
        let mut names = Vec::new();
        let kmax = (t / PI).ceil() as i64 + 1;
        for w in 0..base.len() {
            offsets.push(parent.len());
            let principal = a.value(w).ln(); // ln |a| + i Arg, Arg in (-pi, pi]
            for k in -kmax..=kmax {
                let lam = principal + Complex64::new(0.0, TAU * k as f64);
                if lam.norm() <= t * (1.0 + 1e-12) + 1e-12 {
                    names.push(format!("{}|{}", base.point_id(w), k));
                    parent.push(w);
                    lambdas.push(lam);
                    branch_ks.push(k);
                }
            }
            if parent.len() == offsets[w] {
                return Err(Error::NormParamTooSmall {
                    point: base.point_id(w).to_string(),
                    t,
                    needed: principal.norm(),
                });
            }
        }
        // sheets matched along adjacency: mutual nearest branch within a
        // half branch gap
        let range_of = |w: usize| -> std::ops::Range<usize> {
            let lo = offsets[w];
            let hi = if w + 1 < base.len() { offsets[w + 1] } else { parent.len() };
            lo..hi
        };
        let nearest_in = |range: std::ops::Range<usize>, target: Complex64| -> Option<usize> {
            range.min_by(|&x, &y| {
                (lambdas[x] - target)
                    .norm()
                    .partial_cmp(&(lambdas[y] - target).norm())
                    .unwrap()
            })
        };
        let mut sheet_edges = Vec::new();
        for e in base.edges() {
            for p in range_of(e.a) {
                if let Some(q) = nearest_in(range_of(e.b), lambdas[p]) {
                    let back = nearest_in(range_of(e.a), lambdas[q]);
                    if back == Some(p) && (lambdas[q] - lambdas[p]).norm() < PI {
                        sheet_edges.push((p, q));
                    }
                }
            }
        }
        let (components, space_edges) = extract_components(names.len(), &sheet_edges);
        let space = CharacterSpace::new(names, Some(lambdas.clone()), space_edges)?;
        Ok(LogFibration {
            base,
            a: a.clone(),
            t,
            space,
            parent,
            offsets,
            lambdas,
            branch_ks,
            components,
        })
    }

    pub fn base(&self) -> &Space {
        &self.base
    }

    pub fn element(&self) -> &Element {
        &self.a
    }

    pub fn norm_param(&self) -> f64 {
        self.t
    }

    /// The fibration as a character space with matched sheet adjacency.
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent_of(&self, point: usize) -> usize {
        self.parent[point]
    }

    /// Branches over one character as `(k, lambda)` pairs.
    pub fn branches(&self, char_index: usize) -> Vec<(i64, Complex64)> {
        let lo = self.offsets[char_index];
        let hi = if char_index + 1 < self.base.len() {
            self.offsets[char_index + 1]
        } else {
            self.parent.len()
        };
        (lo..hi).map(|p| (self.branch_ks[p], self.lambdas[p])).collect()
    }

    /// The coordinate `lambda` as an element of the fibration space; it is
    /// an exact logarithm of the pullback of `a`.
    pub fn coordinate_element(&self) -> Element {
        Element::new(self.space.clone(), self.lambdas.clone()).expect("finite")
    }

    pub fn pullback(&self, e: &Element) -> Result<Element> {
        if e.space().id() != self.base.id() {
            return Err(Error::MixedSpaces);
        }
        let values = self.parent.iter().map(|&w| e.value(w)).collect();
        Element::new(self.space.clone(), values)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Exponential-identity residual over all points, relative to `|a|`.
    pub fn residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for p in 0..self.len() {
            let aval = self.a.value(self.parent[p]);
            worst = worst.max((self.lambdas[p].exp() - aval).norm() / aval.norm());
        }
        worst
    }

    /// CSV rows `(character, branch k, lambda re, lambda im, sheet,
    /// component)`.
    pub fn to_csv(&self) -> String {
        let mut point_component = vec![usize::MAX; self.len()];
        for (ci, comp) in self.components.iter().enumerate() {
            for &p in &comp.points {
                point_component[p] = ci;
            }
        }
        let mut out = String::from("# log-fibration-csv v1\n");
        out.push_str("character,branch_k,lambda_re,lambda_im,sheet,component\n");
        for (p, &comp) in point_component.iter().enumerate() {
            let w = self.parent[p];
            out.push_str(&format!(
                "{},{},{:e},{:e},{},{}\n",
                self.base.point_id(w),
                self.branch_ks[p],
                self.lambdas[p].re,
                self.lambdas[p].im,
                p - self.offsets[w],
                if comp == usize::MAX { String::from("-") } else { comp.to_string() }
            ));
        }
        out
    }
}

/// Winding number of a nonvanishing element around an ordered loop: the
/// total principal-argument increment divided by `2 pi`, an exact integer.
pub fn winding_number(e: &Element, loop_points: &[usize]) -> Result<i64> {
    let space = e.space();
    let tol = INVERT_TOL * e.sup_norm().max(1.0);
    for &p in loop_points {
        if e.value(p).norm() <= tol {
            return Err(Error::NotInvertibleOnLoop {
                point: space.point_id(p).to_string(),
            });
        }
    }
    let mut total = 0.0f64;
    for i in 0..loop_points.len() {
        let p = loop_points[i];
        let q = loop_points[(i + 1) % loop_points.len()];
        let step = (e.value(q) / e.value(p)).arg();
        if step.abs() >= PI * (1.0 - 1e-9) {
            return Err(Error::SamplingTooCoarse {
                a: space.point_id(p).to_string(),
                b: space.point_id(q).to_string(),
                step,
            });
        }
        total += step;
    }
    let w = total / TAU;
    let rounded = w.round();
    if (w - rounded).abs() > 1e-6 {
        return Err(Error::SamplingTooCoarse {
            a: space.point_id(loop_points[0]).to_string(),
            b: space.point_id(loop_points[0]).to_string(),
            step: (w - rounded) * TAU,
        });
    }
    Ok(rounded as i64)
}

/// True when every declared loop of the element's space has winding zero.
pub fn has_continuous_log(e: &Element) -> Result<bool> {
    for lp in e.space().loops() {
        if winding_number(e, lp)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Constructs an exact logarithm of `e` by spanning-tree integration of
/// argument increments, or returns `None` when windings obstruct one.
pub fn try_log(e: &Element) -> Result<Option<Element>> {
    let space = e.space();
    let n = space.len();
    let tol = INVERT_TOL * e.sup_norm().max(1.0);
    for p in 0..n {
        if e.value(p).norm() <= tol {
            return Err(Error::NotInvertible {
                point: space.point_id(p).to_string(),
                value: e.value(p),
            });
        }
    }
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        g[root] = e.value(root).ln();
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            for q in space.neighbours(p) {
                if seen[q] {
                    continue;
                }
                let step = (e.value(q) / e.value(p)).ln(); // principal branch
                if step.im.abs() >= PI * (1.0 - 1e-9) {
                    return Err(Error::SamplingTooCoarse {
                        a: space.point_id(p).to_string(),
                        b: space.point_id(q).to_string(),
                        step: step.im,
                    });
                }
                g[q] = g[p] + step;
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    // a non-tree edge with a mismatched branch means a nonzero winding
    // somewhere, hence no continuous logarithm
    for edge in space.edges() {
        let expect = g[edge.a] + (e.value(edge.b) / e.value(edge.a)).ln();
        if (expect - g[edge.b]).norm() > 1e-9 {
            return Ok(None);
        }
    }
    let log = Element::new(space.clone(), g)?;
    let resid = (&log.exp() - e).sup_norm();
    if resid > 1e-9 * e.sup_norm().max(1.0) {
        return Ok(None);
    }
    Ok(Some(log))
}

/// Logarithm descent: from an extension element `h` with `e^{h^} = f` on
/// the whole fibration, produce a base logarithm of `f`.
///
/// `g = T(h)` satisfies `(e^g)^n = f^n`, so `eta = e^{-g} f` takes values
/// among the `n`th roots of unity; classifying them gives the correction
/// `v` with `e^{g + v} = f`.
pub fn log_descent(
    f: &Element,
    h: &AHElement,
    op: &AveragingOperator,
    fib: &FibredSpace,
) -> Result<Element> {
    if op.extension().id() != h.extension().id()
        || fib.extension().id() != h.extension().id()
    {
        return Err(Error::MixedExtensions);
    }
    if f.space().id() != h.extension().base().id() {
        return Err(Error::MixedSpaces);
    }
    let scale = f.sup_norm().max(1.0);
    // precondition: exp of the transform of h equals f over every fibre point
    let mut residual = 0.0f64;
    for w in 0..fib.base().len() {
        for i in 0..fib.fibre(w).len() {
            let hval = fib.gelfand(h, w, i)?;
            residual = residual.max((hval.exp() - f.value(w)).norm());
        }
    }
    if residual > 1e-9 * scale {
        return Err(Error::NotAnExpWitness { residual });
    }

    let n = h.extension().degree();
    let g = op.apply(h)?;
    let eta = &(-&g).exp() * f;
    let zeta_tol = PI / (4.0 * n as f64);
    let mut v_values = Vec::with_capacity(eta.values().len());
    for (w, &z) in eta.values().iter().enumerate() {
        // nearest n-th root of unity by angle
        let k = ((z.arg() * n as f64) / TAU).round().rem_euclid(n as f64);
        let target_arg = TAU * k / n as f64;
        let ang_dist = (z.arg() - target_arg).rem_euclid(TAU);
        let ang_dist = ang_dist.min(TAU - ang_dist);
        if ang_dist > zeta_tol || (z.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::UnclassifiablePoint {
                point: fib.base().point_id(w).to_string(),
                value: z,
                n,
            });
        }
        v_values.push(Complex64::new(0.0, target_arg));
    }
    let v = Element::new(f.space().clone(), v_values)?;
    let g_tilde = &g + &v;
    let out_res = (&g_tilde.exp() - f).sup_norm();
    if out_res > 1e-8 * scale {
        return Err(Error::NotAnExpWitness { residual: out_res });
    }
    Ok(g_tilde)
}

/// A parameter arc of the non-openness computation, with endpoint
/// inclusivity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionArc {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

/// For the analytic circle model (the identity function on the unit circle,
/// parameterized by `theta` with branches `lambda = i (theta + 2 pi k)`),
/// computes the projection of
/// `W = pi^{-1}(arc) intersect p^{-1}(B(centre, radius))` exactly: per
/// branch the constraints are intervals in `theta`, intersected with the
/// closed branch bound `|theta + 2 pi k| <= t` and the open arc, then
/// merged.
pub fn example_5323_region(
    t: f64,
    arc: (f64, f64),
    centre: Complex64,
    radius: f64,
) -> Vec<RegionArc> {
    let mut arcs: Vec<RegionArc> = Vec::new();
    if radius <= centre.re.abs() {
        return arcs;
    }
    let half_width = (radius * radius - centre.re * centre.re).sqrt();
    let kmax = (t / PI).ceil() as i64 + 1;
    for k in -kmax..=kmax {
        let shift = TAU * k as f64;
        // open disk constraint |theta + 2 pi k - Im c| < half_width
        let d_lo = centre.im - half_width - shift;
        let d_hi = centre.im + half_width - shift;
        // closed branch validity |theta + 2 pi k| <= t
        let v_lo = -t - shift;
        let v_hi = t - shift;
        // lower endpoint: largest bound wins; ties favour the open side
        let mut lo = arc.0;
        let mut lo_closed = false;
        for (b, closed) in [(d_lo, false), (v_lo, true)] {
            if b > lo {
                lo = b;
                lo_closed = closed;
            } else if b == lo {
                lo_closed = lo_closed && closed;
            }
        }
        let mut hi = arc.1;
        let mut hi_closed = false;
        for (b, closed) in [(d_hi, false), (v_hi, true)] {
            if b < hi {
                hi = b;
                hi_closed = closed;
            } else if b == hi {
                hi_closed = hi_closed && closed;
            }
        }
        if lo < hi || (lo == hi && lo_closed && hi_closed) {
            arcs.push(RegionArc { lo, hi, lo_closed, hi_closed });
        }
    }
    arcs.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    // merge overlapping or touching arcs
    let mut merged: Vec<RegionArc> = Vec::new();
    for arc in arcs {
        match merged.last_mut() {
            Some(prev)
                if arc.lo < prev.hi
                    || (arc.lo == prev.hi && (prev.hi_closed || arc.lo_closed)) =>
            {
                if arc.hi > prev.hi || (arc.hi == prev.hi && arc.hi_closed) {
                    prev.hi = arc.hi;
                    prev.hi_closed = arc.hi_closed;
                }
            }
            _ => merged.push(arc),
        }
    }
    merged
}

/// Builds the pieces of a logarithm tower stage for `a`: the fibration, the
/// patch family, and the parent-char weights realising the
/// partition-of-unity operator `T(F)(w) = sum_j u_j(w) F(w, l_j(w))`.
pub fn log_stage(
    a: &Element,
    policy: &LogParamPolicy,
) -> Result<(LogFibration, LogPatches, crate::tower::FibreWeights)> {
    let patches = choose_norm_param_log(a, policy)?;
    let fib = LogFibration::build(a, patches.t)?;
    let pu = PartitionOfUnity::from_patches(&patches, a.space())?;
    let base_len = a.space().len();
    let mut weights: crate::tower::FibreWeights = vec![Vec::new(); base_len];
    for (w, slot) in weights.iter_mut().enumerate() {
        for (u, l) in &pu.pairs {
            let uw = u.value(w).re;
            if uw == 0.0 {
                continue;
            }
            // locate the branch point whose lambda equals this local log
            let target = l.value(w);
            let (mut best, mut best_d) = (usize::MAX, f64::INFINITY);
            for (idx, (_, lam)) in fib.branches(w).iter().enumerate() {
                let d = (lam - target).norm();
                if d < best_d {
                    best = fib.offsets[w] + idx;
                    best_d = d;
                }
            }
            if best == usize::MAX || best_d > 1e-8 * (1.0 + target.norm()) {
                return Err(Error::Scenario(format!(
                    "patch log at `{}` is not among the enumerated branches",
                    a.space().point_id(w)
                )));
            }
            match slot.iter_mut().find(|(p, _)| *p == best) {
                Some((_, acc)) => *acc += uw,
                None => slot.push((best, uw)),
            }
        }
    }
    Ok((fib, patches, weights))
}

/// One round of a log tower report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LogRound {
    pub round: usize,
    pub adjoined: Vec<String>,
    pub t_values: Vec<f64>,
    pub patch_counts: Vec<usize>,
    /// Fraction of the test set with an exact logarithm on the top space.
    pub coverage: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LogTowerReport {
    pub rounds: Vec<LogRound>,
}

/// Caps for the log-tower driver.
pub const LOG_TOWER_MAX_ROUNDS: usize = 4;
pub const LOG_TOWER_MAX_SAMPLES: usize = 32;

/// Iteratively adjoins log fibrations for sampled invertible elements.
///
/// Each round first adjoins the test-set elements that still lack a
/// logarithm upstairs, then fills the sample budget with seeded random
/// invertible elements generated from the test set; the report records the
/// per-round coverage of the test set, nondecreasing because embeddings
/// preserve logarithms.
pub fn log_tower(
    base: &Space,
    test_set: &[Element],
    rounds: usize,
    samples: usize,
    seed: u64,
    policy: &LogParamPolicy,
) -> Result<(Tower, LogTowerReport)> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    if rounds > LOG_TOWER_MAX_ROUNDS {
        return Err(Error::TooLarge { size: rounds, cap: LOG_TOWER_MAX_ROUNDS });
    }
    if samples > LOG_TOWER_MAX_SAMPLES {
        return Err(Error::TooLarge { size: samples, cap: LOG_TOWER_MAX_SAMPLES });
    }
    for f in test_set {
        if f.space().id() != base.id() {
            return Err(Error::MixedSpaces);
        }
        f.invert()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tower = Tower::new(base.clone());
    let mut report = LogTowerReport { rounds: Vec::new() };

    let coverage = |tower: &Tower| -> Result<f64> {
        if test_set.is_empty() {
            return Ok(1.0);
        }
        let mut have = 0usize;
        for f in test_set {
            let up = tower.embed(0, tower.top_index(), f)?;
            if try_log(&up)?.is_some() {
                have += 1;
            }
        }
        Ok(have as f64 / test_set.len() as f64)
    };

    report.rounds.push(LogRound {
        round: 0,
        adjoined: Vec::new(),
        t_values: Vec::new(),
        patch_counts: Vec::new(),
        coverage: coverage(&tower)?,
    });

    for round in 1..=rounds {
        let mut adjoined = Vec::new();
        let mut t_values = Vec::new();
        let mut patch_counts = Vec::new();
        for _ in 0..samples {
            // candidates lacking a log on the current top, test set first
            let mut candidate: Option<(Element, String)> = None;
            for (i, f) in test_set.iter().enumerate() {
                let up = tower.embed(0, tower.top_index(), f)?;
                if try_log(&up)?.is_none() {
                    candidate = Some((up, format!("test[{i}]")));
                    break;
                }
            }
            if candidate.is_none() && !test_set.is_empty() {
                // random invertible powers of pulled-up test elements
                for _ in 0..8 {
                    let i = rng.random_range(0..test_set.len());
                    let m = rng.random_range(1..=2u32);
                    let up = tower.embed(0, tower.top_index(), &test_set[i])?;
                    let mut e = up.clone();
                    for _ in 1..m {
                        e = &e * &up;
                    }
                    let e = e.scale(Complex64::from_polar(
                        rng.random_range(0.5..1.5),
                        rng.random_range(-1.0..1.0),
                    ));
                    if try_log(&e)?.is_none() {
                        candidate = Some((e, format!("rand test[{i}]^{m}")));
                        break;
                    }
                }
            }
            let Some((a, label)) = candidate else { break };
            let (fib, patches, weights) = log_stage(&a, policy)?;
            t_values.push(patches.t);
            patch_counts.push(patches.patches.len());
            let parent = (0..fib.len()).map(|p| fib.parent_of(p)).collect();
            tower.push_stage(
                fib.space().clone(),
                parent,
                weights,
                format!("log {label}"),
                Some(patches.t),
            )?;
            adjoined.push(label);
        }
        report.rounds.push(LogRound {
            round,
            adjoined,
            t_values,
            patch_counts,
            coverage: coverage(&tower)?,
        });
    }
    Ok((tower, report))
}
