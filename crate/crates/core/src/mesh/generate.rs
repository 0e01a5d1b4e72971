use std::f64::consts::FRAC_PI_4;

use super::{BoundaryTag, Mesh};
use crate::error::{Error, Result};

/// Structured mesh of the unit square, each cell split along its
/// south-west to north-east diagonal.
pub fn generate_unit_square(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("n", "subdivision count must be at least 1"));
    }
    let stride = n + 1;
    let id = |i: usize, j: usize| j * stride + i;
    let h = n as f64;

    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / h, j as f64 / h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    let tag = BoundaryTag::RobinAll;
    for i in 0..n {
        boundary.push(([id(i, 0), id(i + 1, 0)], tag));
    }
    for j in 0..n {
        boundary.push(([id(n, j), id(n, j + 1)], tag));
    }
    for i in (0..n).rev() {
        boundary.push(([id(i + 1, n), id(i, n)], tag));
    }
    for j in (0..n).rev() {
        boundary.push(([id(0, j + 1), id(0, j)], tag));
    }
    Mesh::new(vertices, triangles, boundary)
}

/// Point on the unit circle at angle `a * pi / (4n)`.
///
/// Only angles in the first octant are evaluated with `sin`/`cos`; the rest
/// come from exact reflections and quarter turns, so the point set is exactly
/// invariant under the symmetries of the square.
fn circle_point(a: usize, n: usize) -> [f64; 2] {
    let a = a % (8 * n);
    let quadrant = a / (2 * n);
    let r = a % (2 * n);
    let octant = |k: usize| {
        let t = k as f64 * FRAC_PI_4 / n as f64;
        (t.cos(), t.sin())
    };
    let (x, y) = if r <= n {
        octant(r)
    } else {
        let (c, s) = octant(2 * n - r);
        (s, c)
    };
    match quadrant {
        0 => [x, y],
        1 => [-y, x],
        2 => [-x, -y],
        _ => [y, -x],
    }
}

/// Ring layout shared by the disk and the annulus. Every ring carries `4n`
/// vertices; when staggered, consecutive rings are offset by half a sector
/// and the outermost ring is unstaggered.
struct Rings {
    n: usize,
    radii: Vec<f64>,
    staggered: bool,
}

impl Rings {
    fn sectors(&self) -> usize {
        4 * self.n
    }

    fn stagger(&self, ring: usize) -> usize {
        if self.staggered {
            (self.radii.len() - 1 - ring) % 2
        } else {
            0
        }
    }

    fn push_vertices(&self, vertices: &mut Vec<[f64; 2]>) {
        for (ring, &r) in self.radii.iter().enumerate() {
            let s = self.stagger(ring);
            for i in 0..self.sectors() {
                let [x, y] = circle_point(2 * i + s, self.n);
                vertices.push([r * x, r * y]);
            }
        }
    }

    /// Triangles of the strip between `ring` and `ring + 1`, with vertex
    /// numbering starting at `offset` for ring 0.
    fn push_strip(&self, ring: usize, offset: usize, triangles: &mut Vec<[usize; 3]>) {
        let m = self.sectors();
        let inner = |i: usize| offset + ring * m + i % m;
        let outer = |i: usize| offset + (ring + 1) * m + i % m;
        if !self.staggered {
            // aligned rings: quads split along alternating diagonals
            for i in 0..m {
                if i % 2 == 0 {
                    triangles.push([inner(i), outer(i + 1), inner(i + 1)]);
                    triangles.push([inner(i), outer(i), outer(i + 1)]);
                } else {
                    triangles.push([inner(i), outer(i), inner(i + 1)]);
                    triangles.push([inner(i + 1), outer(i), outer(i + 1)]);
                }
            }
        } else if self.stagger(ring + 1) == 0 {
            // outer vertex i sits at half-angle 2i, inner vertex i at 2i + 1
            for i in 0..m {
                triangles.push([outer(i), outer(i + 1), inner(i)]);
                triangles.push([inner(i + m - 1), outer(i), inner(i)]);
            }
        } else {
            // outer vertex i at 2i + 1, inner vertex i at 2i
            for i in 0..m {
                triangles.push([outer(i), outer(i + 1), inner(i + 1)]);
                triangles.push([inner(i), outer(i), inner(i + 1)]);
            }
        }
    }
}

/// Largest inner-to-outer radius ratio for which the strip triangles stay
/// non-obtuse with `4n` sectors.
fn max_ring_ratio(n: usize) -> f64 {
    let half = FRAC_PI_4 / n as f64;
    half.cos() - half.sin()
}

/// Unit disk approximated by a regular `4n`-gon, meshed by `n` concentric
/// rings around a central vertex.
pub fn generate_disk(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("n", "refinement level must be at least 1"));
    }
    let layers = n;
    let rings = Rings {
        n,
        radii: (1..=layers).map(|j| j as f64 / layers as f64).collect(),
        staggered: true,
    };
    let m = rings.sectors();

    let mut vertices = vec![[0.0, 0.0]];
    rings.push_vertices(&mut vertices);

    let mut triangles = Vec::with_capacity(m * (2 * layers - 1));
    for i in 0..m {
        triangles.push([0, 1 + i, 1 + (i + 1) % m]);
    }
    for ring in 0..layers - 1 {
        rings.push_strip(ring, 1, &mut triangles);
    }

    let outer = 1 + (layers - 1) * m;
    let boundary = (0..m)
        .map(|i| ([outer + i, outer + (i + 1) % m], BoundaryTag::RobinAll))
        .collect();
    Mesh::new(vertices, triangles, boundary)
}

/// Annulus between radii `r0` and 1. The inner polygon is tagged
/// [`BoundaryTag::DirichletInner`], the outer one [`BoundaryTag::NeumannOuter`].
///
/// A single layer too thin for half-sector staggering (`r0 ≥ cos(π/(4n))`)
/// falls back to aligned rings, which keep only the rotations by two sectors
/// and the reflections through the axes.
pub fn generate_annulus(r0: f64, n: usize) -> Result<Mesh> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::invalid(
            "r0",
            format!("inner radius {r0} not in (0, 1)"),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "refinement level must be at least 1"));
    }
    let width = 1.0 - r0;
    let by_resolution = (width * n as f64).round() as usize;
    let by_angle = (width / (1.0 - max_ring_ratio(n))).floor() as usize;
    let layers = by_resolution.min(by_angle).max(1);
    let rings = Rings {
        n,
        radii: (0..=layers)
            .map(|j| {
                if j == layers {
                    1.0
                } else {
                    r0 + width * j as f64 / layers as f64
                }
            })
            .collect(),
        staggered: layers > 1 || r0 < (FRAC_PI_4 / n as f64).cos(),
    };
    let m = rings.sectors();

    let mut vertices = Vec::with_capacity(m * (layers + 1));
    rings.push_vertices(&mut vertices);
    let mut triangles = Vec::with_capacity(2 * m * layers);
    for ring in 0..layers {
        rings.push_strip(ring, 0, &mut triangles);
    }

    let outer = layers * m;
    let mut boundary = Vec::with_capacity(2 * m);
    for i in 0..m {
        boundary.push(([(i + 1) % m, i], BoundaryTag::DirichletInner));
    }
    for i in 0..m {
        boundary.push(([outer + i, outer + (i + 1) % m], BoundaryTag::NeumannOuter));
    }
    Mesh::new(vertices, triangles, boundary)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    fn polygon_area(sides: usize) -> f64 {
        0.5 * sides as f64 * (2.0 * PI / sides as f64).sin()
    }

    #[test]
    fn square_counts() {
        for (n, nv, nt, nb) in [(1, 4, 2, 4), (2, 9, 8, 8), (5, 36, 50, 20)] {
            let m = generate_unit_square(n).unwrap();
            assert_eq!(m.num_vertices(), nv);
            assert_eq!(m.triangles().len(), nt);
            assert_eq!(m.boundary_edges().len(), nb);
        }
        assert!(generate_unit_square(0).is_err());
    }

    #[test]
    fn square_area_and_angles() {
        let m = generate_unit_square(8).unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        assert!(m.max_interior_angle() <= FRAC_PI_2 + 1e-12);
    }

    #[test]
    fn disk_area_matches_inscribed_polygon() {
        let m = generate_disk(16).unwrap();
        let closed = 32.0 * (PI / 32.0).sin();
        assert!((m.total_area() - closed).abs() < 1e-13);
        assert!((m.total_area() - 3.136_548_490_545_939).abs() < 1e-12);
        for n in 1..=12 {
            let m = generate_disk(n).unwrap();
            assert!(
                (m.total_area() - polygon_area(4 * n)).abs() < 1e-13,
                "n={n}"
            );
        }
    }

    #[test]
    fn coarsest_disk() {
        let m = generate_disk(1).unwrap();
        assert_eq!(m.num_vertices(), 5);
        assert_eq!(m.triangles().len(), 4);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.boundary_cycles(BoundaryTag::RobinAll), 1);
    }

    #[test]
    fn ring_meshes_are_non_obtuse() {
        for n in [1, 2, 3, 4, 7, 8, 16, 33, 64] {
            let m = generate_disk(n).unwrap();
            assert!(m.max_interior_angle() <= FRAC_PI_2 + 1e-12, "disk n={n}");
        }
        for n in [8, 16, 32] {
            let m = generate_annulus(0.5, n).unwrap();
            assert!(m.max_interior_angle() <= FRAC_PI_2 + 1e-12, "annulus n={n}");
        }
    }

    #[test]
    fn disk_quarter_turn_is_exact() {
        for n in [1, 3, 8, 16] {
            let m = generate_disk(n).unwrap();
            let perm = m.vertex_permutation(|[x, y]| [-y, x], 1e-14).unwrap();
            for (i, &j) in perm.iter().enumerate() {
                let p = m.vertices()[i];
                assert_eq!(m.vertices()[j], [-p[1], p[0]]);
            }
        }
    }

    #[test]
    fn disk_is_invariant_under_sector_rotation_and_reflection() {
        let n = 16;
        let m = generate_disk(n).unwrap();
        let t = 2.0 * PI / (4 * n) as f64;
        let (c, s) = (t.cos(), t.sin());
        let perm = m
            .vertex_permutation(|[x, y]| [c * x - s * y, s * x + c * y], 1e-12)
            .unwrap();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), m.num_vertices());
        m.vertex_permutation(|[x, y]| [x, -y], 1e-14).unwrap();
        m.vertex_permutation(|[x, y]| [y, x], 1e-14).unwrap();
    }

    #[test]
    fn annulus_tags_and_area() {
        let m = generate_annulus(0.5, 8).unwrap();
        assert_eq!(m.boundary_cycles(BoundaryTag::DirichletInner), 1);
        assert_eq!(m.boundary_cycles(BoundaryTag::NeumannOuter), 1);
        for v in m.tagged_vertices(BoundaryTag::DirichletInner) {
            let [x, y] = m.vertices()[v];
            assert!((x.hypot(y) - 0.5).abs() < 1e-15);
        }
        for v in m.tagged_vertices(BoundaryTag::NeumannOuter) {
            let [x, y] = m.vertices()[v];
            assert!((x.hypot(y) - 1.0).abs() < 1e-15);
        }

        let m = generate_annulus(0.5, 16).unwrap();
        let closed = 32.0 * (PI / 32.0).sin() * (1.0 - 0.25);
        assert!((m.total_area() - closed).abs() < 1e-13);
    }

    #[test]
    fn thin_annulus_is_valid() {
        for (r0, n) in [(0.9, 4), (0.77, 1), (0.99, 2)] {
            let m = generate_annulus(r0, n).unwrap();
            assert!((0..m.triangles().len()).all(|t| m.triangle_area(t) > 0.0));
            let closed = 2.0 * n as f64 * (PI / (2 * n) as f64).sin() * (1.0 - r0 * r0);
            assert!((m.total_area() - closed).abs() < 1e-13);
            m.vertex_permutation(|[x, y]| [x, -y], 1e-14).unwrap();
        }
    }

    #[test]
    fn annulus_rejects_bad_radius() {
        for r0 in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
            let err = generate_annulus(r0, 4).unwrap_err();
            assert!(err.to_string().contains("r0"));
        }
    }
}
