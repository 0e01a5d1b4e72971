//! Galerkin matrices for continuous piecewise-linear elements.
//!
//! Boundary integrals use the vertex-lumped trapezoidal rule: an edge of
//! length `L` gives weight `L/2` to each endpoint. The boundary mass matrix,
//! the boundary L¹ functional and the profile mass all go through the same
//! per-vertex weights, so the optimal-profile identity
//! `uᵀ B_h u = (∫|u|)² / m` holds exactly up to rounding.

mod sparse;

pub use sparse::{dot, norm2, SymSparseMatrix};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};

const MIN_TRIANGLE_AREA: f64 = 1e-14;

fn element_geometry(mesh: &Mesh, t: usize) -> Result<([usize; 3], [[f64; 2]; 3], f64)> {
    let tri = mesh.triangles()[t];
    let p = tri.map(|v| mesh.vertices()[v]);
    let area = mesh.triangle_area(t);
    if area < MIN_TRIANGLE_AREA {
        return Err(Error::DegenerateTriangle { index: t, area });
    }
    Ok((tri, p, area))
}

/// Local P1 stiffness block: `K_ab = (e_a · e_b) / (4 area)` where `e_a` is
/// the edge opposite vertex `a`.
pub fn local_stiffness(p: [[f64; 2]; 3], area: f64) -> [[f64; 3]; 3] {
    let e = [0, 1, 2].map(|a| {
        let (b, c) = (p[(a + 1) % 3], p[(a + 2) % 3]);
        [c[0] - b[0], c[1] - b[1]]
    });
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = (e[a][0] * e[b][0] + e[a][1] * e[b][1]) / (4.0 * area);
        }
    }
    k
}

pub fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let off = area / 12.0;
    let diag = 2.0 * off;
    [[diag, off, off], [off, diag, off], [off, off, diag]]
}

fn assemble_local(
    mesh: &Mesh,
    local: impl Fn([[f64; 2]; 3], f64) -> [[f64; 3]; 3],
) -> Result<SymSparseMatrix> {
    let mut triplets = Vec::with_capacity(9 * mesh.triangles().len());
    for t in 0..mesh.triangles().len() {
        let (tri, p, area) = element_geometry(mesh, t)?;
        let block = local(p, area);
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], block[a][b]));
            }
        }
    }
    Ok(SymSparseMatrix::from_triplets(
        mesh.num_vertices(),
        triplets,
    ))
}

/// Stiffness matrix `∫ ∇φ_i · ∇φ_j`.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SymSparseMatrix> {
    assemble_local(mesh, local_stiffness)
}

/// Consistent mass matrix `∫ φ_i φ_j`.
pub fn assemble_mass(mesh: &Mesh) -> Result<SymSparseMatrix> {
    assemble_local(mesh, |_, area| local_mass(area))
}

/// Trapezoidal boundary weights `(vertex, Σ L/2)` over edges accepted by
/// `filter`, sorted by vertex.
pub fn boundary_weights(mesh: &Mesh, filter: impl Fn(BoundaryTag) -> bool) -> Vec<(usize, f64)> {
    let mut w = vec![0.0; mesh.num_vertices()];
    let mut touched = vec![false; mesh.num_vertices()];
    for e in mesh.boundary_edges().iter().filter(|e| filter(e.tag)) {
        for v in e.vertices {
            w[v] += 0.5 * e.length;
            touched[v] = true;
        }
    }
    (0..mesh.num_vertices())
        .filter(|&v| touched[v])
        .map(|v| (v, w[v]))
        .collect()
}

/// `∫_∂Ω |u| dσ` by the trapezoidal rule over every boundary edge.
pub fn boundary_l1(mesh: &Mesh, u: &[f64]) -> f64 {
    boundary_weights(mesh, |_| true)
        .into_iter()
        .map(|(v, w)| w * u[v].abs())
        .sum()
}

/// Nodal insulation thickness `h` on the vertices of one boundary tag.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryProfile {
    tag: BoundaryTag,
    vertices: Vec<usize>,
    values: Vec<f64>,
}

impl BoundaryProfile {
    /// Values for every vertex carrying `tag`, given as `(vertex, h)` pairs
    /// in any order.
    pub fn new(mesh: &Mesh, tag: BoundaryTag, mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        let vertices = mesh.tagged_vertices(tag);
        if vertices.is_empty() {
            return Err(Error::invalid(
                "profile",
                format!("mesh has no {tag} edges"),
            ));
        }
        pairs.sort_by_key(|&(v, _)| v);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid(
                "profile",
                format!("vertex {} given twice", w[0].0),
            ));
        }
        for (v, _) in &pairs {
            if vertices.binary_search(v).is_err() {
                return Err(Error::invalid(
                    "profile",
                    format!("vertex {v} is not on a {tag} edge"),
                ));
            }
        }
        if let Some(&v) = vertices
            .iter()
            .find(|v| pairs.binary_search_by_key(v, |p| &p.0).is_err())
        {
            return Err(Error::MissingProfileValue(v));
        }
        let values = pairs.into_iter().map(|(_, h)| h).collect();
        let profile = BoundaryProfile {
            tag,
            vertices,
            values,
        };
        profile.check_positive()?;
        Ok(profile)
    }

    pub fn constant(mesh: &Mesh, tag: BoundaryTag, h: f64) -> Result<Self> {
        Self::from_fn(mesh, tag, |_| h)
    }

    pub fn from_fn(mesh: &Mesh, tag: BoundaryTag, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let pairs = mesh
            .tagged_vertices(tag)
            .into_iter()
            .map(|v| (v, f(mesh.vertices()[v])))
            .collect();
        Self::new(mesh, tag, pairs)
    }

    /// The mass-`m` profile that is optimal for `u`: `h = m |u| / ∫|u| dσ`.
    /// Covers the whole boundary, which must carry a single tag.
    pub fn optimal_for(mesh: &Mesh, u: &[f64], mass: f64) -> Result<Self> {
        let tags = mesh.tags();
        if tags.len() != 1 {
            return Err(Error::invalid(
                "mesh",
                "optimal profile needs a boundary with a single tag",
            ));
        }
        let l1 = boundary_l1(mesh, u);
        if !(l1 > 0.0) {
            return Err(Error::DegenerateProfile);
        }
        let tag = tags[0];
        let vertices = mesh.tagged_vertices(tag);
        let values = vertices.iter().map(|&v| mass * u[v].abs() / l1).collect();
        Ok(BoundaryProfile {
            tag,
            vertices,
            values,
        })
    }

    pub fn tag(&self) -> BoundaryTag {
        self.tag
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, vertex: usize) -> Option<f64> {
        self.vertices
            .binary_search(&vertex)
            .ok()
            .map(|k| self.values[k])
    }

    pub fn scaled(&self, c: f64) -> Self {
        BoundaryProfile {
            values: self.values.iter().map(|h| c * h).collect(),
            ..self.clone()
        }
    }

    /// Trapezoidal `∫ h dσ` over the covered edges.
    pub fn mass(&self, mesh: &Mesh) -> f64 {
        boundary_weights(mesh, |t| t == self.tag)
            .into_iter()
            .map(|(v, w)| w * self.value(v).unwrap_or(0.0))
            .sum()
    }

    pub fn check_positive(&self) -> Result<()> {
        match self
            .vertices
            .iter()
            .zip(&self.values)
            .find(|(_, &h)| !(h > 0.0 && h.is_finite()))
        {
            Some((&vertex, &value)) => Err(Error::NonpositiveProfile { vertex, value }),
            None => Ok(()),
        }
    }
}

/// Diagonal boundary mass `∫ u v / h dσ`, lumped to the vertices.
pub fn assemble_boundary_mass(mesh: &Mesh, profile: &BoundaryProfile) -> Result<SymSparseMatrix> {
    profile.check_positive()?;
    let mut triplets = Vec::new();
    for (v, w) in boundary_weights(mesh, |t| t == profile.tag) {
        let h = profile.value(v).ok_or(Error::MissingProfileValue(v))?;
        triplets.push((v, v, w / h));
    }
    Ok(SymSparseMatrix::from_triplets(
        mesh.num_vertices(),
        triplets,
    ))
}

/// Vertices pinned to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirichletConstraint {
    dim: usize,
    indices: Vec<usize>,
}

impl DirichletConstraint {
    pub fn new(dim: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&i) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::invalid(
                "constraint",
                format!("index {i} out of range for dimension {dim}"),
            ));
        }
        Ok(DirichletConstraint { dim, indices })
    }

    /// Vertices on [`BoundaryTag::DirichletInner`] edges.
    pub fn from_mesh(mesh: &Mesh) -> Self {
        DirichletConstraint {
            dim: mesh.num_vertices(),
            indices: mesh.tagged_vertices(BoundaryTag::DirichletInner),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Unconstrained indices in increasing order.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| !self.contains(i)).collect()
    }

    /// Zeroes the constrained entries of a vector.
    pub fn apply_to_vector(&self, v: &mut [f64]) {
        for &i in &self.indices {
            v[i] = 0.0;
        }
    }
}

/// Symmetric elimination: constrained rows and columns are zeroed and their
/// diagonal set to one.
pub fn apply_constraint(a: &SymSparseMatrix, c: &DirichletConstraint) -> Result<SymSparseMatrix> {
    if a.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: c.dim(),
        });
    }
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..a.dim() {
        if c.contains(i) {
            triplets.push((i, i, 1.0));
            continue;
        }
        triplets.extend(
            a.row(i)
                .filter(|&(j, _)| !c.contains(j))
                .map(|(j, v)| (i, j, v)),
        );
    }
    Ok(SymSparseMatrix::from_triplets(a.dim(), triplets))
}
