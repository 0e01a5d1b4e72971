//! Conforming triangulations of planar domains with tagged boundary edges.
//!
//! A [`Mesh`] is immutable once built. Every constructor goes through
//! [`Mesh::new`], which checks orientation, that tagged edges are exactly the
//! topological boundary, and that each tag forms closed cycles.

mod generate;
mod io;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use generate::{generate_annulus, generate_disk, generate_unit_square};
pub use io::{format_mesh, read_mesh, write_mesh, MeshReader};

/// Role of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    RobinAll,
    DirichletInner,
    NeumannOuter,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 3] = [
        BoundaryTag::RobinAll,
        BoundaryTag::DirichletInner,
        BoundaryTag::NeumannOuter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::RobinAll => "RobinAll",
            BoundaryTag::DirichletInner => "DirichletInner",
            BoundaryTag::NeumannOuter => "NeumannOuter",
        }
    }
}

impl fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoundaryTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown boundary tag `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    /// Euclidean length; the discrete boundary measure.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds and validates a mesh. Triangles must be counterclockwise and
    /// the tagged edges must cover the topological boundary exactly once.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<([usize; 2], BoundaryTag)>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Topology("non-finite vertex coordinate".into()));
        }

        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::Topology(format!(
                    "triangle {t} references vertex {v} of {nv}"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Topology(format!("triangle {t} repeats a vertex")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area <= 0.0 {
                return Err(Error::Topology(format!(
                    "triangle {t} has nonpositive signed area {area:e}"
                )));
            }
            for k in 0..3 {
                *edge_count
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_default() += 1;
            }
        }
        if let Some(((a, b), c)) = edge_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Topology(format!(
                "edge ({a}, {b}) is shared by {c} triangles"
            )));
        }

        let mut seen = HashMap::new();
        let mut edges = Vec::with_capacity(boundary.len());
        for (e, ([a, b], tag)) in boundary.into_iter().enumerate() {
            if a >= nv || b >= nv || a == b {
                return Err(Error::Topology(format!(
                    "boundary edge {e} ({a}, {b}) is invalid for {nv} vertices"
                )));
            }
            let key = edge_key(a, b);
            match edge_count.get(&key) {
                Some(1) => {}
                Some(_) => {
                    return Err(Error::Topology(format!(
                        "boundary edge ({a}, {b}) is interior"
                    )))
                }
                None => {
                    return Err(Error::Topology(format!(
                        "boundary edge ({a}, {b}) is not on any triangle"
                    )))
                }
            }
            if seen.insert(key, e).is_some() {
                return Err(Error::Topology(format!(
                    "boundary edge ({a}, {b}) is listed twice"
                )));
            }
            edges.push(BoundaryEdge {
                vertices: [a, b],
                tag,
                length: distance(vertices[a], vertices[b]),
            });
        }
        let untagged = edge_count
            .iter()
            .filter(|(k, &c)| c == 1 && !seen.contains_key(k))
            .map(|(k, _)| *k)
            .min();
        if let Some((a, b)) = untagged {
            return Err(Error::Topology(format!(
                "boundary edge ({a}, {b}) carries no tag"
            )));
        }

        let mut degree: BTreeMap<(BoundaryTag, usize), usize> = BTreeMap::new();
        for e in &edges {
            for v in e.vertices {
                *degree.entry((e.tag, v)).or_default() += 1;
            }
        }
        if let Some(((tag, v), d)) = degree.iter().find(|(_, &d)| d != 2) {
            return Err(Error::Topology(format!(
                "vertex {v} has {d} incident {tag} edges, boundary cycle is not closed"
            )));
        }

        Ok(Mesh {
            vertices,
            triangles,
            boundary: edges,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary.iter().map(|e| e.length).sum()
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.boundary.iter().any(|e| e.tag == tag)
    }

    /// Distinct tags present, in canonical order.
    pub fn tags(&self) -> Vec<BoundaryTag> {
        BoundaryTag::ALL
            .into_iter()
            .filter(|&t| self.has_tag(t))
            .collect()
    }

    /// Sorted, deduplicated vertices incident to edges carrying `tag`.
    pub fn tagged_vertices(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .boundary
            .iter()
            .filter(|e| e.tag == tag)
            .flat_map(|e| e.vertices)
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Sorted vertices on any boundary edge.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.boundary.iter().flat_map(|e| e.vertices).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Number of connected components of the edges carrying `tag`.
    pub fn boundary_cycles(&self, tag: BoundaryTag) -> usize {
        let verts = self.tagged_vertices(tag);
        let index: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..verts.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in self.boundary.iter().filter(|e| e.tag == tag) {
            let a = find(&mut parent, index[&e.vertices[0]]);
            let b = find(&mut parent, index[&e.vertices[1]]);
            parent[a] = b;
        }
        (0..verts.len())
            .filter(|&i| find(&mut parent, i) == i)
            .count()
    }

    /// Largest interior angle over all triangles, in radians.
    pub fn max_interior_angle(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for tri in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[tri[k]];
                let a = self.vertices[tri[(k + 1) % 3]];
                let b = self.vertices[tri[(k + 2) % 3]];
                let u = [a[0] - p[0], a[1] - p[1]];
                let v = [b[0] - p[0], b[1] - p[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                worst = worst.max(cos.clamp(-1.0, 1.0).acos());
            }
        }
        worst
    }

    /// Nodal values of `f` at every vertex.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.vertices.iter().map(|&p| f(p)).collect()
    }

    /// Vertex permutation induced by a point map: `perm[i]` is the vertex at
    /// `map(vertices[i])`. Fails if some image is not a vertex within `tol`.
    pub fn vertex_permutation(
        &self,
        map: impl Fn([f64; 2]) -> [f64; 2],
        tol: f64,
    ) -> Result<Vec<usize>> {
        let cell = |x: f64| (x / tol).floor() as i64;
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in self.vertices.iter().enumerate() {
            grid.entry((cell(p[0]), cell(p[1]))).or_default().push(i);
        }
        let mut perm = Vec::with_capacity(self.vertices.len());
        for &p in &self.vertices {
            let q = map(p);
            let (cx, cy) = (cell(q[0]), cell(q[1]));
            let found = (-1..=1)
                .flat_map(|dx| (-1..=1).map(move |dy| (cx + dx, cy + dy)))
                .filter_map(|c| grid.get(&c))
                .flatten()
                .copied()
                .find(|&j| distance(self.vertices[j], q) <= tol);
            match found {
                Some(j) => perm.push(j),
                None => {
                    return Err(Error::Topology(format!(
                        "no vertex at ({}, {}) within {tol:e}",
                        q[0], q[1]
                    )))
                }
            }
        }
        Ok(perm)
    }
}
