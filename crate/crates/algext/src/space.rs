//! Finite character spaces.
//!
//! A [`CharacterSpace`] is the desk-scale model of the space of characters of
//! a commutative unital algebra: a finite, ordered set of points, each an
//! evaluation functional. Points may carry a complex coordinate (plane sets,
//! parameterized curves) and an adjacency structure whose edges can be flagged
//! as belonging to cyclic loops; loops are what winding numbers are computed
//! against.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static NEXT_SPACE_ID: AtomicU64 = AtomicU64::new(1);

/// An undirected edge between two point indices.
///
/// `on_loop` marks edges that belong to a declared cyclic loop; the union of
/// loop-flagged edges must decompose into disjoint simple cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    #[serde(rename = "loop")]
    pub on_loop: bool,
}

/// A finite character space. Immutable after construction; elements refer to
/// their space by the identity token so values from different spaces can
/// never be mixed.
#[derive(Debug)]
pub struct CharacterSpace {
    id: u64,
    points: Vec<String>,
    coords: Option<Vec<Complex64>>,
    edges: Vec<Edge>,
    loops: Vec<Vec<usize>>,
}

/// Shared handle to an immutable character space.
pub type Space = Arc<CharacterSpace>;

impl CharacterSpace {
    /// Builds a space from point ids, optional coordinates and an edge list.
    ///
    /// Validates that point ids are distinct, that coordinates (when present)
    /// cover every point, and that the loop-flagged edges decompose into
    /// disjoint simple cycles.
    pub fn new(
        points: Vec<String>,
        coords: Option<Vec<Complex64>>,
        edges: Vec<Edge>,
    ) -> Result<Space> {
        if points.is_empty() {
            return Err(Error::InvalidSpace("no points".into()));
        }
        {
            let mut sorted: Vec<&String> = points.iter().collect();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidSpace("duplicate point ids".into()));
            }
        }
        if let Some(cs) = &coords {
            if cs.len() != points.len() {
                return Err(Error::InvalidSpace(
                    "coordinates do not cover every point".into(),
                ));
            }
            if cs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidSpace("non-finite coordinate".into()));
            }
        }
        for e in &edges {
            if e.a >= points.len() || e.b >= points.len() {
                return Err(Error::InvalidSpace(format!(
                    "edge ({}, {}) out of range",
                    e.a, e.b
                )));
            }
            if e.a == e.b {
                return Err(Error::InvalidSpace(format!("self-loop at {}", e.a)));
            }
        }
        let loops = derive_loops(points.len(), &edges, coords.as_deref())?;
        Ok(Arc::new(CharacterSpace {
            id: NEXT_SPACE_ID.fetch_add(1, Ordering::Relaxed),
            points,
            coords,
            edges,
            loops,
        }))
    }

    /// Identity token; two handles denote the same space iff the tokens agree.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_ids(&self) -> &[String] {
        &self.points
    }

    pub fn point_id(&self, index: usize) -> &str {
        &self.points[index]
    }

    pub fn coords(&self) -> Option<&[Complex64]> {
        self.coords.as_deref()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Declared loops, each an ordered simple cycle of point indices.
    pub fn loops(&self) -> &[Vec<usize>] {
        &self.loops
    }

    /// Neighbour indices of a point under the adjacency (loop and non-loop
    /// edges alike).
    pub fn neighbours(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.a == index {
                out.push(e.b);
            } else if e.b == index {
                out.push(e.a);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The interval `[0, 1]` sampled at `n` points with path adjacency.
    pub fn interval(n: usize) -> Result<Space> {
        if n < 2 {
            return Err(Error::InvalidSpace("interval needs at least 2 points".into()));
        }
        let points = (0..n).map(|k| format!("t{k}")).collect();
        let coords = (0..n)
            .map(|k| Complex64::new(k as f64 / (n - 1) as f64, 0.0))
            .collect();
        let edges = (0..n - 1)
            .map(|k| Edge { a: k, b: k + 1, on_loop: false })
            .collect();
        Self::new(points, Some(coords), edges)
    }

    /// The unit circle sampled at `n` points; the cyclic adjacency is
    /// declared as a single loop.
    pub fn circle(n: usize) -> Result<Space> {
        Self::circle_around(Complex64::new(0.0, 0.0), 1.0, n)
    }

    /// A circle of radius `r` around `c`, sampled at `n` points, one loop.
    pub fn circle_around(c: Complex64, r: f64, n: usize) -> Result<Space> {
        if n < 3 {
            return Err(Error::InvalidSpace("circle needs at least 3 points".into()));
        }
        let points = (0..n).map(|k| format!("s{k}")).collect();
        let coords = (0..n)
            .map(|k| {
                let theta = 2.0 * PI * k as f64 / n as f64;
                c + Complex64::from_polar(r, theta)
            })
            .collect();
        let edges = (0..n)
            .map(|k| Edge { a: k, b: (k + 1) % n, on_loop: true })
            .collect();
        Self::new(points, Some(coords), edges)
    }

    /// A rectangular grid over `[-1, 1]^2` with 4-neighbour adjacency and no
    /// loops; coordinates are `x + iy`.
    pub fn plane_grid(nx: usize, ny: usize) -> Result<Space> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidSpace("grid needs at least 2x2 points".into()));
        }
        let mut points = Vec::with_capacity(nx * ny);
        let mut coords = Vec::with_capacity(nx * ny);
        let mut edges = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                points.push(format!("g{i}_{j}"));
                let x = -1.0 + 2.0 * i as f64 / (nx - 1) as f64;
                let y = -1.0 + 2.0 * j as f64 / (ny - 1) as f64;
                coords.push(Complex64::new(x, y));
                let idx = j * nx + i;
                if i + 1 < nx {
                    edges.push(Edge { a: idx, b: idx + 1, on_loop: false });
                }
                if j + 1 < ny {
                    edges.push(Edge { a: idx, b: idx + nx, on_loop: false });
                }
            }
        }
        Self::new(points, Some(coords), edges)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "points": self.points,
            "coords": self.coords.as_ref().map(|cs| {
                cs.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>()
            }),
            "adjacency": self.edges,
        })
    }

    /// Parses the JSON produced by [`CharacterSpace::to_json`]. Coordinates
    /// accept `[re, im]` pairs or length-1 real arrays.
    pub fn from_json(v: &serde_json::Value) -> Result<Space> {
        let spec: SpaceJson = serde_json::from_value(v.clone())
            .map_err(|e| Error::InvalidSpace(e.to_string()))?;
        let coords = match spec.coords {
            None => None,
            Some(raw) => {
                let mut cs = Vec::with_capacity(raw.len());
                for arr in raw {
                    let z = match arr.len() {
                        1 => Complex64::new(arr[0], 0.0),
                        2 => Complex64::new(arr[0], arr[1]),
                        _ => {
                            return Err(Error::InvalidSpace(
                                "coordinate must have 1 or 2 components".into(),
                            ))
                        }
                    };
                    cs.push(z);
                }
                Some(cs)
            }
        };
        Self::new(spec.points, coords, spec.adjacency)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceJson {
    points: Vec<String>,
    #[serde(default)]
    coords: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    adjacency: Vec<Edge>,
}

/// Decomposes the loop-flagged edges into disjoint simple cycles, returning
/// each cycle in traversal order. Cycles with coordinates are oriented
/// counterclockwise (positive shoelace area) so winding numbers carry a
/// well-defined sign.
fn derive_loops(
    n: usize,
    edges: &[Edge],
    coords: Option<&[Complex64]>,
) -> Result<Vec<Vec<usize>>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges.iter().filter(|e| e.on_loop) {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    for (v, nb) in adj.iter().enumerate() {
        if !nb.is_empty() && nb.len() != 2 {
            return Err(Error::InvalidSpace(format!(
                "loop edges at point {v} do not form a simple cycle"
            )));
        }
    }
    let mut seen = vec![false; n];
    let mut loops = Vec::new();
    for start in 0..n {
        if seen[start] || adj[start].is_empty() {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut prev = start;
        let mut cur = adj[start][0];
        while cur != start {
            if seen[cur] {
                return Err(Error::InvalidSpace(
                    "loop edges do not form disjoint simple cycles".into(),
                ));
            }
            seen[cur] = true;
            cycle.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        if cycle.len() < 3 {
            return Err(Error::InvalidSpace("loop shorter than 3 points".into()));
        }
        if let Some(cs) = coords {
            let mut area = 0.0f64;
            for i in 0..cycle.len() {
                let a = cs[cycle[i]];
                let b = cs[cycle[(i + 1) % cycle.len()]];
                area += a.re * b.im - b.re * a.im;
            }
            if area < 0.0 {
                cycle.reverse();
            }
        }
        loops.push(cycle);
    }
    Ok(loops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_declares_one_loop() {
        let s = CharacterSpace::circle(8).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.loops().len(), 1);
        assert_eq!(s.loops()[0].len(), 8);
    }

    #[test]
    fn interval_has_no_loops() {
        let s = CharacterSpace::interval(5).unwrap();
        assert!(s.loops().is_empty());
        assert_eq!(s.neighbours(0), vec![1]);
        assert_eq!(s.neighbours(2), vec![1, 3]);
    }

    #[test]
    fn duplicate_points_rejected() {
        let r = CharacterSpace::new(vec!["a".into(), "a".into()], None, vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn distinct_spaces_have_distinct_ids() {
        let s1 = CharacterSpace::interval(3).unwrap();
        let s2 = CharacterSpace::interval(3).unwrap();
        assert_ne!(s1.id(), s2.id());
    }

    #[test]
    fn json_round_trip() {
        let s = CharacterSpace::circle(5).unwrap();
        let j = s.to_json();
        let s2 = CharacterSpace::from_json(&j).unwrap();
        assert_eq!(s.point_ids(), s2.point_ids());
        assert_eq!(s.edges(), s2.edges());
        assert_eq!(s.loops(), s2.loops());
    }

    #[test]
    fn bad_loop_edges_rejected() {
        // three loop edges sharing a vertex
        let edges = vec![
            Edge { a: 0, b: 1, on_loop: true },
            Edge { a: 0, b: 2, on_loop: true },
            Edge { a: 0, b: 3, on_loop: true },
        ];
        let pts = (0..4).map(|i| format!("p{i}")).collect();
        assert!(CharacterSpace::new(pts, None, edges).is_err());
    }
}
