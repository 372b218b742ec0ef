//! Finite towers of extensions over a base space, working at the
//! function-model level: each stage carries the new character space, the
//! projection to its parent, and the multiplicity (or partition-of-unity)
//! weights that realise the stage's averaging operator. Composed
//! projections, embeddings and averages satisfy
//! `pi_{r,t} = pi_{r,s} o pi_{s,t}` and `T_{r,t} = T_{r,s} o T_{s,t}` by
//! construction.

use num_complex::Complex64;

use crate::algebra::Element;
use crate::cole::{Cole, ColeSpace};
use crate::error::{Error, Result};
use crate::extension::AHExtension;
use crate::fibration::FibredSpace;
use crate::poly::MonicPoly;
use crate::space::Space;

/// Cap on any single stage's point count.
pub const STAGE_CAP: usize = 250_000;

/// Per parent character: the weighted child points realising an averaging
/// operator.
pub type FibreWeights = Vec<Vec<(usize, f64)>>;

/// One level of the tower. Stage 0 is the bare base space.
pub struct Stage {
    space: Space,
    /// Point -> parent-stage point; empty at stage 0.
    parent: Vec<usize>,
    /// Parent point -> weighted child points realising the averaging
    /// operator. Multiplicity weights for polynomial stages, partition of
    /// unity weights for logarithmic ones.
    weights: FibreWeights,
    label: String,
    norm_param: Option<f64>,
    poly_hashes: Vec<u64>,
}

impl Stage {
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A finite tower of extension stages.
pub struct Tower {
    stages: Vec<Stage>,
    stage_cap: usize,
}

impl Tower {
    pub fn new(base: Space) -> Tower {
        Self::with_stage_cap(base, STAGE_CAP)
    }

    pub fn with_stage_cap(base: Space, stage_cap: usize) -> Tower {
        Tower {
            stages: vec![Stage {
                space: base,
                parent: Vec::new(),
                weights: Vec::new(),
                label: "base".into(),
                norm_param: None,
                poly_hashes: Vec::new(),
            }],
            stage_cap,
        }
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn stage(&self, index: usize) -> &Stage {
        &self.stages[index]
    }

    pub fn top(&self) -> &Space {
        &self.stages.last().expect("tower has a base").space
    }

    pub fn top_index(&self) -> usize {
        self.stages.len() - 1
    }

    fn push_checked(&mut self, stage: Stage) -> Result<()> {
        if stage.space.len() > self.stage_cap {
            return Err(Error::StageTooLarge);
        }
        self.stages.push(stage);
        Ok(())
    }

    /// Adjoins one monic polynomial over the top space; the new stage is the
    /// multiplicity-expanded root fibration realised on the collapsed space
    /// with weights `multiplicity / n`.
    pub fn extend_ah(&mut self, alpha: MonicPoly) -> Result<()> {
        if alpha.space().id() != self.top().id() {
            return Err(Error::MixedSpaces);
        }
        let hash = poly_hash(&alpha);
        let n = alpha.degree();
        let ext = AHExtension::new(alpha);
        let fib = FibredSpace::build(&ext)?;
        let parent_len = self.top().len();
        let mut parent = Vec::with_capacity(fib.collapsed_len());
        let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); parent_len];
        for p in 0..fib.collapsed_len() {
            let w = fib.parent_of(p);
            parent.push(w);
            let sheet = p - fib.point_index(w, 0)?;
            let mult = fib.fibre(w)[sheet].multiplicity;
            weights[w].push((p, mult as f64 / n as f64));
        }
        self.push_checked(Stage {
            space: fib.as_space().clone(),
            parent,
            weights,
            label: format!("ah deg {n}"),
            norm_param: Some(ext.norm_param()),
            poly_hashes: vec![hash],
        })
    }

    /// Adjoins a finite set of monic polynomials as one Cole stage with the
    /// product-fibre weights `1 / prod n_j`.
    pub fn extend_cole(&mut self, polys: Vec<MonicPoly>) -> Result<()> {
        for p in &polys {
            if p.space().id() != self.top().id() {
                return Err(Error::MixedSpaces);
            }
        }
        let hashes: Vec<u64> = polys.iter().map(poly_hash).collect();
        let cole: Cole = ColeSpace::build(self.top(), polys)?;
        let parent_len = self.top().len();
        let fibre = cole.fibre_size() as f64;
        let mut parent = Vec::with_capacity(cole.len());
        let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); parent_len];
        for p in 0..cole.len() {
            let w = cole.parent_of(p);
            parent.push(w);
            weights[w].push((p, 1.0 / fibre));
        }
        self.push_checked(Stage {
            space: cole.space().clone(),
            parent,
            weights,
            label: format!("cole {} polys", cole.polys().len()),
            norm_param: None,
            poly_hashes: hashes,
        })
    }

    /// Adjoins a logarithm stage built elsewhere (see
    /// [`crate::logext::log_stage`]); exposed so the log-tower driver can
    /// reuse the composition machinery.
    pub(crate) fn push_stage(
        &mut self,
        space: Space,
        parent: Vec<usize>,
        weights: FibreWeights,
        label: String,
        norm_param: Option<f64>,
    ) -> Result<()> {
        self.push_checked(Stage { space, parent, weights, label, norm_param, poly_hashes: vec![] })
    }

    fn check_order(&self, sigma: usize, tau: usize) -> Result<()> {
        if sigma > tau || tau >= self.stages.len() {
            return Err(Error::IndexOrder { sigma, tau });
        }
        Ok(())
    }

    /// Composed projection of a stage-`tau` point down to stage `sigma`.
    pub fn project(&self, sigma: usize, tau: usize, point: usize) -> Result<usize> {
        self.check_order(sigma, tau)?;
        let mut p = point;
        for s in (sigma + 1..=tau).rev() {
            p = self.stages[s].parent[p];
        }
        Ok(p)
    }

    /// Composed embedding: pulls a stage-`sigma` element up to stage `tau`.
    pub fn embed(&self, sigma: usize, tau: usize, e: &Element) -> Result<Element> {
        self.check_order(sigma, tau)?;
        if e.space().id() != self.stages[sigma].space.id() {
            return Err(Error::MixedSpaces);
        }
        let mut cur = e.clone();
        for s in sigma + 1..=tau {
            let stage = &self.stages[s];
            let values = stage.parent.iter().map(|&w| cur.value(w)).collect();
            cur = Element::new(stage.space.clone(), values)?;
        }
        Ok(cur)
    }

    /// Composed averaging: carries a stage-`tau` element down to stage
    /// `sigma` one weighted fibre average at a time.
    pub fn average_down(&self, sigma: usize, tau: usize, e: &Element) -> Result<Element> {
        self.check_order(sigma, tau)?;
        if e.space().id() != self.stages[tau].space.id() {
            return Err(Error::MixedSpaces);
        }
        let mut cur = e.clone();
        for s in (sigma + 1..=tau).rev() {
            let stage = &self.stages[s];
            let lower = &self.stages[s - 1].space;
            let values = (0..lower.len())
                .map(|w| {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for &(p, wt) in &stage.weights[w] {
                        sum += cur.value(p) * wt;
                    }
                    sum
                })
                .collect();
            cur = Element::new(lower.clone(), values)?;
        }
        Ok(cur)
    }

    /// JSON manifest: stage labels, sizes, polynomial hashes and norm
    /// parameters.
    pub fn manifest_json(&self) -> serde_json::Value {
        serde_json::json!({
            "stages": self.stages.iter().map(|s| serde_json::json!({
                "label": s.label,
                "points": s.space.len(),
                "norm_param": s.norm_param,
                "poly_hashes": s.poly_hashes.iter().map(|h| format!("{h:016x}")).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// FNV-1a over the coefficient value bytes; stable across runs.
fn poly_hash(p: &MonicPoly) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bits: u64| {
        for byte in bits.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(p.degree() as u64);
    for c in p.coeffs() {
        for v in c.values() {
            eat(v.re.to_bits());
            eat(v.im.to_bits());
        }
    }
    h
}
