//! The extension character space as a fibration over the base.
//!
//! For a monic `alpha` the characters of `A_alpha` are the pairs
//! `(w, lambda)` with `w(alpha)(lambda) = 0`. Per character the fibre is the
//! root multiset of `alpha_w`; this module enumerates it, tracks
//! multiplicities, measures root separation, builds local trivializations
//! and fibre separators, and extracts the sheet/loop structure that winding
//! numbers are computed against.
//!
//! Two fibre views coexist: the multiplicity-expanded one (always `n` points
//! per character, used by averaging) and the distinct-collapsed one (used for
//! topology). Both come from one clustering pass.

use num_complex::Complex64;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::extension::{AHElement, Extension};
use crate::space::{CharacterSpace, Edge, Space};

/// Residual tolerance for listed roots: `|w(alpha)(lambda)| <= 1e-7 * scale`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-7;

/// A distinct fibre root with its multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct FibrePoint {
    pub root: Complex64,
    pub multiplicity: usize,
}

/// A connected component of the collapsed fibre space.
#[derive(Debug, Clone)]
pub struct Component {
    /// Point indices; in traversal order when `is_simple`, sorted otherwise.
    pub points: Vec<usize>,
    /// Whether the component contains a cycle.
    pub cyclic: bool,
    /// Whether the component is a simple path or simple cycle, i.e. whether
    /// `points` is an ordered traversal.
    pub is_simple: bool,
}

/// Per-character minimal distance between distinct fibre roots; infinite
/// when a fibre has a single distinct root.
#[derive(Debug, Clone)]
pub struct RootSeparation {
    pub per_char: Vec<f64>,
    pub global: f64,
}

/// A local trivialization around a character: a neighbourhood `V` over which
/// the fibration splits into disjoint sheets, one per distinct root.
#[derive(Debug, Clone)]
pub struct Trivialization {
    /// Characters of the neighbourhood `V` (grown over adjacency).
    pub chars: Vec<usize>,
    /// One sheet per distinct root of the centre fibre: pairs of
    /// (character index, distinct root index at that character).
    pub sheets: Vec<Vec<(usize, usize)>>,
    /// Disk radius around each centre root.
    pub rho: f64,
    /// Certified coefficient-perturbation radius.
    pub delta: f64,
}

/// The fibration of an Arens-Hoffman extension.
#[derive(Debug)]
pub struct FibredSpace {
    ext: Extension,
    fibres: Vec<Vec<FibrePoint>>,
    collapsed: Space,
    collapsed_parent: Vec<usize>,
    collapsed_offset: Vec<usize>,
    collapsed_roots: Vec<Complex64>,
    components: Vec<Component>,
    matching_error: Option<Error>,
}

impl FibredSpace {
    /// Enumerates all fibres by companion-matrix roots, clusters them into
    /// `(root, multiplicity)` pairs sorted by `(re, im)`, and matches sheets
    /// along the base adjacency.
    pub fn build(ext: &Extension) -> Result<FibredSpace> {
        let alpha = ext.alpha();
        let base = ext.base();
        let n = alpha.degree();
        let scale = alpha.coeff_scale().powi(n as i32);
        let mut fibres = Vec::with_capacity(base.len());
        for w in 0..base.len() {
            let clusters = alpha.clustered_roots(w)?;
            let mut fibre = Vec::with_capacity(clusters.len());
            let mut total = 0;
            for cl in clusters {
                let residual = poly_residual(&alpha.char_coeffs(w), cl.value);
                if residual > ROOT_RESIDUAL_TOL * scale {
                    return Err(Error::IllConditioned {
                        point: base.point_id(w).to_string(),
                    });
                }
                total += cl.multiplicity;
                fibre.push(FibrePoint { root: cl.value, multiplicity: cl.multiplicity });
            }
            debug_assert_eq!(total, n);
            fibres.push(fibre);
        }

        let mut collapsed_parent = Vec::new();
        let mut collapsed_offset = Vec::with_capacity(base.len());
        let mut collapsed_roots = Vec::new();
        let mut names = Vec::new();
        for (w, fibre) in fibres.iter().enumerate() {
            collapsed_offset.push(collapsed_parent.len());
            for (i, fp) in fibre.iter().enumerate() {
                collapsed_parent.push(w);
                collapsed_roots.push(fp.root);
                names.push(format!("{}|{}", base.point_id(w), i));
            }
        }

        let separation = per_char_separation(&fibres);
        let mut sheet_edges = Vec::new();
        let mut matching_error = None;
        for e in base.edges() {
            match match_fibres(
                &fibres[e.a],
                &fibres[e.b],
                separation[e.a].max(separation[e.b]),
            ) {
                Ok(pairs) => {
                    for (i, j) in pairs {
                        sheet_edges
                            .push((collapsed_offset[e.a] + i, collapsed_offset[e.b] + j));
                    }
                }
                Err(_) => {
                    matching_error = Some(Error::AmbiguousMatching {
                        a: base.point_id(e.a).to_string(),
                        b: base.point_id(e.b).to_string(),
                    });
                }
            }
        }

        let (components, space_edges) = extract_components(names.len(), &sheet_edges);
        let coords = Some(collapsed_roots.clone());
        let collapsed = CharacterSpace::new(names, coords, space_edges)?;

        Ok(FibredSpace {
            ext: ext.clone(),
            fibres,
            collapsed,
            collapsed_parent,
            collapsed_offset,
            collapsed_roots,
            components,
            matching_error,
        })
    }

    pub fn extension(&self) -> &Extension {
        &self.ext
    }

    pub fn base(&self) -> &Space {
        self.ext.base()
    }

    /// Distinct roots with multiplicity over one character.
    pub fn fibre(&self, char_index: usize) -> &[FibrePoint] {
        &self.fibres[char_index]
    }

    /// The fibre roots repeated by multiplicity (always `n` values).
    pub fn expanded_roots(&self, char_index: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.ext.degree());
        for fp in &self.fibres[char_index] {
            for _ in 0..fp.multiplicity {
                out.push(fp.root);
            }
        }
        out
    }

    /// Point count of the multiplicity-expanded view.
    pub fn expanded_len(&self) -> usize {
        self.ext.degree() * self.base().len()
    }

    /// The distinct-collapsed view as a character space; points are
    /// `(character, root-index)` pairs with adjacency inherited from the
    /// base via sheet matching, and cyclic components declared as loops.
    pub fn as_space(&self) -> &Space {
        &self.collapsed
    }

    pub fn collapsed_len(&self) -> usize {
        self.collapsed_parent.len()
    }

    /// Base character of a collapsed point.
    pub fn parent_of(&self, point: usize) -> usize {
        self.collapsed_parent[point]
    }

    /// Collapsed point index for `(character, root-index)`.
    pub fn point_index(&self, char_index: usize, root_index: usize) -> Result<usize> {
        if char_index >= self.fibres.len() || root_index >= self.fibres[char_index].len() {
            return Err(Error::PointNotInFibration { char_index, root_index });
        }
        Ok(self.collapsed_offset[char_index] + root_index)
    }

    /// The Gelfand transform of an extension element at a fibration point.
    pub fn gelfand(
        &self,
        u: &AHElement,
        char_index: usize,
        root_index: usize,
    ) -> Result<Complex64> {
        if u.extension().id() != self.ext.id() {
            return Err(Error::MixedExtensions);
        }
        if char_index >= self.fibres.len() || root_index >= self.fibres[char_index].len() {
            return Err(Error::PointNotInFibration { char_index, root_index });
        }
        Ok(u.gelfand_at(char_index, self.fibres[char_index][root_index].root))
    }

    /// The whole transform as an element of the collapsed space.
    pub fn gelfand_element(&self, u: &AHElement) -> Result<Element> {
        if u.extension().id() != self.ext.id() {
            return Err(Error::MixedExtensions);
        }
        let values = (0..self.collapsed_len())
            .map(|p| u.gelfand_at(self.collapsed_parent[p], self.collapsed_roots[p]))
            .collect();
        Element::new(self.collapsed.clone(), values)
    }

    /// The coordinate function `(w, lambda) -> lambda` on the collapsed
    /// space.
    pub fn coordinate_element(&self) -> Element {
        Element::new(self.collapsed.clone(), self.collapsed_roots.clone())
            .expect("roots are finite")
    }

    /// Pulls a base element back to the collapsed space.
    pub fn pullback(&self, a: &Element) -> Result<Element> {
        if a.space().id() != self.base().id() {
            return Err(Error::MixedSpaces);
        }
        let values = self.collapsed_parent.iter().map(|&w| a.value(w)).collect();
        Element::new(self.collapsed.clone(), values)
    }

    /// Per-character minimal distance between distinct roots.
    pub fn root_separation(&self) -> RootSeparation {
        let per_char = per_char_separation(&self.fibres);
        let global = per_char.iter().copied().fold(f64::INFINITY, f64::min);
        RootSeparation { per_char, global }
    }

    /// Sheet/loop components of the collapsed space. Matching failures
    /// surface here rather than at build time.
    pub fn loop_components(&self) -> Result<&[Component]> {
        if let Some(err) = &self.matching_error {
            return Err(err.clone());
        }
        Ok(&self.components)
    }

    /// A neighbourhood of `centre` over which the fibration trivializes:
    /// grows `V` over the base adjacency while every fibre splits into the
    /// disks `B(lambda_i, rho0)` around the centre's distinct roots, with a
    /// numerically certified coefficient-perturbation radius `delta`.
    pub fn local_trivialization(&self, centre: usize, rho0: f64) -> Result<Trivialization> {
        let fibre0 = &self.fibres[centre];
        let sep = per_char_separation(&self.fibres)[centre];
        if (fibre0.len() > 1 && rho0 >= sep / 3.0) || rho0 <= 0.0 {
            return Err(Error::CannotSeparate {
                point: self.base().point_id(centre).to_string(),
                rho: rho0,
                separation: sep,
            });
        }
        let alpha = self.ext.alpha();
        let centre_coeffs = alpha.char_coeffs(centre);
        let centres: Vec<Complex64> = fibre0.iter().map(|fp| fp.root).collect();
        let mults: Vec<usize> = fibre0.iter().map(|fp| fp.multiplicity).collect();

        let delta = certify_delta(&centre_coeffs, &centres, &mults, rho0).ok_or_else(|| {
            Error::DegenerateNeighborhood {
                point: self.base().point_id(centre).to_string(),
            }
        })?;

        // Grow V over adjacency: coefficients within the certified box and
        // roots splitting into the disks with the right counts.
        let base = self.base();
        let admissible = |w: usize| -> bool {
            let coeffs = alpha.char_coeffs(w);
            let in_box = coeffs
                .iter()
                .zip(&centre_coeffs)
                .all(|(c, c0)| (c - c0).norm() <= delta);
            in_box && roots_split(&alpha.raw_roots(w), &centres, &mults, rho0)
        };
        let mut in_v = vec![false; base.len()];
        in_v[centre] = true;
        let mut queue = std::collections::VecDeque::from([centre]);
        while let Some(w) = queue.pop_front() {
            for nb in base.neighbours(w) {
                if !in_v[nb] && admissible(nb) {
                    in_v[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        let chars: Vec<usize> = (0..base.len()).filter(|&w| in_v[w]).collect();

        let mut sheets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); centres.len()];
        for &w in &chars {
            for (ri, fp) in self.fibres[w].iter().enumerate() {
                let (best, dist) = nearest(&centres, fp.root);
                if dist < rho0 {
                    sheets[best].push((w, ri));
                }
            }
        }
        // postcondition replay: each sheet projects onto V
        for (i, sheet) in sheets.iter().enumerate() {
            let mut seen = vec![false; base.len()];
            for &(w, _) in sheet {
                seen[w] = true;
            }
            if chars.iter().any(|&w| !seen[w]) {
                return Err(Error::DegenerateNeighborhood {
                    point: format!(
                        "{} (sheet {i} does not project onto V)",
                        base.point_id(centre)
                    ),
                });
            }
        }
        Ok(Trivialization { chars, sheets, rho: rho0, delta })
    }

    /// The Lagrange-style separator with constant coefficients: value 1 at
    /// the chosen fibre point over `centre` and 0 at the others. A single
    /// distinct root yields the empty product, i.e. the embedded unit.
    pub fn fibre_separator(&self, centre: usize, chosen: usize) -> Result<AHElement> {
        let fibre = &self.fibres[centre];
        if chosen >= fibre.len() {
            return Err(Error::PointNotInFibration {
                char_index: centre,
                root_index: chosen,
            });
        }
        let base = self.base();
        if fibre.len() == 1 {
            return AHElement::embed(&self.ext, &Element::one(base));
        }
        let lam1 = fibre[chosen].root;
        // expand prod_{i != chosen} (x - lambda_i) / (lambda_chosen - lambda_i)
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        let mut denom = Complex64::new(1.0, 0.0);
        for (i, fp) in fibre.iter().enumerate() {
            if i == chosen {
                continue;
            }
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * fp.root;
            }
            coeffs = next;
            denom *= lam1 - fp.root;
        }
        let mut elems = Vec::with_capacity(self.ext.degree());
        for k in 0..self.ext.degree() {
            let z = coeffs.get(k).copied().unwrap_or_default() / denom;
            elems.push(Element::constant(base, z));
        }
        AHElement::new(&self.ext, elems)
    }

    /// CSV rows `(character, root re, root im, multiplicity, sheet,
    /// component)`.
    pub fn to_csv(&self) -> String {
        let mut point_component = vec![usize::MAX; self.collapsed_len()];
        for (ci, comp) in self.components.iter().enumerate() {
            for &p in &comp.points {
                point_component[p] = ci;
            }
        }
        let mut out = String::from("# fibration-csv v1\n");
        out.push_str("character,root_re,root_im,multiplicity,sheet,component\n");
        for (p, &comp) in point_component.iter().enumerate() {
            let w = self.collapsed_parent[p];
            let sheet = p - self.collapsed_offset[w];
            let fp = self.fibres[w][sheet];
            out.push_str(&format!(
                "{},{:e},{:e},{},{},{}\n",
                self.base().point_id(w),
                fp.root.re,
                fp.root.im,
                fp.multiplicity,
                sheet,
                if comp == usize::MAX { String::from("-") } else { comp.to_string() }
            ));
        }
        out
    }
}

fn poly_residual(coeffs: &[Complex64], x: Complex64) -> f64 {
    let mut p = Complex64::new(1.0, 0.0);
    for &a in coeffs.iter().rev() {
        p = p * x + a;
    }
    p.norm()
}

fn nearest(centres: &[Complex64], z: Complex64) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in centres.iter().enumerate() {
        let d = (z - c).norm();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, best_d)
}

fn per_char_separation(fibres: &[Vec<FibrePoint>]) -> Vec<f64> {
    fibres
        .iter()
        .map(|fibre| {
            let mut sep = f64::INFINITY;
            for i in 0..fibre.len() {
                for j in i + 1..fibre.len() {
                    sep = sep.min((fibre[i].root - fibre[j].root).norm());
                }
            }
            sep
        })
        .collect()
}

/// Whether the `n` raw roots split into the disks `B(centres[i], rho)` with
/// exactly `mults[i]` roots each (counted with multiplicity).
fn roots_split(raw: &[Complex64], centres: &[Complex64], mults: &[usize], rho: f64) -> bool {
    let mut counts = vec![0usize; centres.len()];
    for &r in raw {
        let (i, d) = nearest(centres, r);
        if d >= rho {
            return false;
        }
        counts[i] += 1;
    }
    counts == mults
}

/// Largest delta (obtained by halving from `rho0`) such that perturbing the
/// centre coefficients within the delta-box keeps all roots inside the rho
/// disks with the right counts. Sampled on the 3^n grid of box corners plus
/// 100 seeded interior draws; root continuity guarantees such a radius
/// exists but not its size, so it is certified numerically.
fn certify_delta(
    coeffs: &[Complex64],
    centres: &[Complex64],
    mults: &[usize],
    rho: f64,
) -> Option<f64> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let n = coeffs.len();
    let mut delta = rho;
    'outer: for _ in 0..60 {
        let corner = delta * std::f64::consts::FRAC_1_SQRT_2;
        let steps = [
            Complex64::new(0.0, 0.0),
            Complex64::new(corner, corner),
            Complex64::new(-corner, -corner),
        ];
        let grid_size = 3usize.pow(n as u32);
        for g in 0..grid_size {
            let mut pert = coeffs.to_vec();
            let mut idx = g;
            for p in pert.iter_mut() {
                *p += steps[idx % 3];
                idx /= 3;
            }
            if !roots_split(&crate::roots::monic_roots(&pert), centres, mults, rho) {
                delta *= 0.5;
                continue 'outer;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            let pert: Vec<Complex64> = coeffs
                .iter()
                .map(|&c| {
                    let r = delta * rng.random_range(0.0..1.0f64);
                    let th = rng.random_range(0.0..std::f64::consts::TAU);
                    c + Complex64::from_polar(r, th)
                })
                .collect();
            if !roots_split(&crate::roots::monic_roots(&pert), centres, mults, rho) {
                delta *= 0.5;
                continue 'outer;
            }
        }
        return Some(delta);
    }
    None
}

/// Matches the distinct roots of two adjacent fibres.
///
/// Equal-size fibres are matched greedily by minimal distance and must form
/// a bijection within half the local separation (the larger of the two
/// fibres' separations; next to a branch point the smaller one shrinks
/// faster than the sheets move, which would reject correct matches). When
/// the sizes differ the multiplicity structure forces the assignment: every
/// root of the larger fibre continues into its nearest root on the smaller
/// one.
fn match_fibres(
    fa: &[FibrePoint],
    fb: &[FibrePoint],
    local_sep: f64,
) -> std::result::Result<Vec<(usize, usize)>, ()> {
    if fa.len() == fb.len() {
        let k = fa.len();
        let threshold = 0.5 * local_sep;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(k * k);
        for (i, a) in fa.iter().enumerate() {
            for (j, b) in fb.iter().enumerate() {
                pairs.push(((a.root - b.root).norm(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut used_a = vec![false; k];
        let mut used_b = vec![false; k];
        let mut out = Vec::with_capacity(k);
        for (d, i, j) in pairs {
            if used_a[i] || used_b[j] {
                continue;
            }
            if d > threshold {
                return Err(());
            }
            used_a[i] = true;
            used_b[j] = true;
            out.push((i, j));
            if out.len() == k {
                break;
            }
        }
        Ok(out)
    } else if fa.len() > fb.len() {
        let centres: Vec<Complex64> = fb.iter().map(|fp| fp.root).collect();
        Ok(fa
            .iter()
            .enumerate()
            .map(|(i, fp)| (i, nearest(&centres, fp.root).0))
            .collect())
    } else {
        let centres: Vec<Complex64> = fa.iter().map(|fp| fp.root).collect();
        Ok(fb
            .iter()
            .enumerate()
            .map(|(j, fp)| (nearest(&centres, fp.root).0, j))
            .collect())
    }
}

/// Connected components of the sheet graph together with the deduplicated
/// edge list; simple-cycle components are flagged as loops in the returned
/// edges.
pub(crate) fn extract_components(
    n_points: usize,
    edges: &[(usize, usize)],
) -> (Vec<Component>, Vec<Edge>) {
    let mut uniq: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| if a <= b { (a, b) } else { (b, a) })
        .filter(|&(a, b)| a != b)
        .collect();
    uniq.sort_unstable();
    uniq.dedup();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_points];
    for &(a, b) in &uniq {
        adj[a].push(b);
        adj[b].push(a);
    }

    let mut comp_id = vec![usize::MAX; n_points];
    let mut components = Vec::new();
    for start in 0..n_points {
        if comp_id[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut stack = vec![start];
        comp_id[start] = id;
        let mut points = Vec::new();
        while let Some(p) = stack.pop() {
            points.push(p);
            for &q in &adj[p] {
                if comp_id[q] == usize::MAX {
                    comp_id[q] = id;
                    stack.push(q);
                }
            }
        }
        points.sort_unstable();
        let edge_count = uniq.iter().filter(|&&(a, _)| comp_id[a] == id).count();
        let cyclic = edge_count >= points.len() && edge_count > 0;
        let degrees: Vec<usize> = points.iter().map(|&p| adj[p].len()).collect();
        let all_two = degrees.iter().all(|&d| d == 2);
        let simple_cycle = cyclic && all_two;
        let ends = degrees.iter().filter(|&&d| d == 1).count();
        let simple_path = !cyclic
            && (points.len() == 1 || (ends == 2 && degrees.iter().all(|&d| d == 1 || d == 2)));
        let is_simple = simple_cycle || simple_path;
        let ordered = if is_simple && points.len() > 1 {
            order_traversal(&points, &adj, simple_cycle)
        } else {
            points.clone()
        };
        components.push(Component { points: ordered, cyclic, is_simple });
    }

    let mut space_edges: Vec<Edge> = Vec::with_capacity(uniq.len());
    for &(a, b) in &uniq {
        let comp = &components[comp_id[a]];
        let on_loop = comp.cyclic && comp.is_simple;
        space_edges.push(Edge { a, b, on_loop });
    }
    (components, space_edges)
}

fn order_traversal(points: &[usize], adj: &[Vec<usize>], cycle: bool) -> Vec<usize> {
    let start = if cycle {
        points[0]
    } else {
        *points.iter().find(|&&p| adj[p].len() == 1).unwrap_or(&points[0])
    };
    let mut out = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = adj[cur].iter().copied().find(|&q| q != prev);
        match next {
            Some(q) => {
                if cycle && q == start {
                    break;
                }
                out.push(q);
                prev = cur;
                cur = q;
                if out.len() > points.len() {
                    break;
                }
            }
            None => break,
        }
    }
    out
}
