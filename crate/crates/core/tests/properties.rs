use eigeniter::assembly::{
    assemble_boundary_mass, assemble_mass, assemble_stiffness, boundary_l1, BoundaryProfile,
};
use eigeniter::iteration::{fixed_point_residual, rayleigh, robin_rayleigh, ProblemSpec};
use eigeniter::linalg::{dense_smallest_eigpair, eigen_residual, solve_spd, SolverConfig};
use eigeniter::mesh::{
    format_mesh, generate_annulus, generate_disk, generate_unit_square, BoundaryTag, MeshReader,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn positive_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rayleigh_is_scale_invariant(u in positive_vector(25), c in 1e-3f64..1e3) {
        let mesh = generate_unit_square(4).unwrap();
        let h = BoundaryProfile::constant(&mesh, BoundaryTag::RobinAll, 0.7).unwrap();
        let spec = ProblemSpec::robin(&mesh, h).unwrap();
        let scaled: Vec<f64> = u.iter().map(|x| c * x).collect();
        let (a, b) = (rayleigh(&spec, &u).unwrap(), rayleigh(&spec, &scaled).unwrap());
        prop_assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn optimal_profile_minimizes_robin_quotient(
        u in positive_vector(25),
        raw in positive_vector(16),
        m in 0.1f64..10.0,
    ) {
        let mesh = generate_unit_square(4).unwrap();
        let k = assemble_stiffness(&mesh).unwrap();
        let mm = assemble_mass(&mesh).unwrap();
        let vertices = mesh.tagged_vertices(BoundaryTag::RobinAll);
        let pairs: Vec<(usize, f64)> = vertices.iter().copied().zip(raw.iter().copied()).collect();
        let h = BoundaryProfile::new(&mesh, BoundaryTag::RobinAll, pairs).unwrap();
        let h = h.scaled(m / h.mass(&mesh));
        prop_assert!((h.mass(&mesh) - m).abs() <= 1e-12 * m);

        let spec = ProblemSpec::insulation(&mesh, m).unwrap();
        let rm = rayleigh(&spec, &u).unwrap();
        let rh = robin_rayleigh(&mesh, &k, &mm, &h, &u).unwrap();
        prop_assert!(rm <= rh * (1.0 + 1e-12));

        let opt = BoundaryProfile::optimal_for(&mesh, &u, m).unwrap();
        let ropt = robin_rayleigh(&mesh, &k, &mm, &opt, &u).unwrap();
        prop_assert!((rm - ropt).abs() <= 1e-12 * rm);
    }

    #[test]
    fn boundary_l1_is_absolutely_homogeneous(u in prop::collection::vec(-5.0f64..5.0, 25), c in -4.0f64..4.0) {
        let mesh = generate_unit_square(4).unwrap();
        let scaled: Vec<f64> = u.iter().map(|x| c * x).collect();
        let (a, b) = (boundary_l1(&mesh, &u), boundary_l1(&mesh, &scaled));
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn fixed_point_residual_is_scale_invariant(u in positive_vector(25), c in 1e-2f64..1e2) {
        let mesh = generate_unit_square(4).unwrap();
        let spec = ProblemSpec::insulation(&mesh, 1.5).unwrap();
        let scaled: Vec<f64> = u.iter().map(|x| c * x).collect();
        let (a, b) = (
            fixed_point_residual(&spec, &u).unwrap(),
            fixed_point_residual(&spec, &scaled).unwrap(),
        );
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn cg_meets_its_tolerance(b in prop::collection::vec(-1.0f64..1.0, 25), h in 0.05f64..20.0) {
        let mesh = generate_unit_square(4).unwrap();
        let profile = BoundaryProfile::constant(&mesh, BoundaryTag::RobinAll, h).unwrap();
        let a = assemble_stiffness(&mesh).unwrap()
            .add(&assemble_boundary_mass(&mesh, &profile).unwrap()).unwrap();
        let x = solve_spd(&a, &b, &SolverConfig::default()).unwrap();
        let r: f64 = a.matvec(&x).iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-12 * bn);
    }

    #[test]
    fn generated_meshes_round_trip(n in 1usize..6, r0 in 0.1f64..0.9) {
        for mesh in [
            generate_unit_square(n).unwrap(),
            generate_disk(n).unwrap(),
            generate_annulus(r0, n).unwrap(),
        ] {
            let back = MeshReader::new("mem").parse(&format_mesh(&mesh)).unwrap();
            prop_assert_eq!(back, mesh);
        }
    }
}

#[test]
fn oracle_properties() {
    let mesh = generate_unit_square(8).unwrap();
    let h = BoundaryProfile::constant(&mesh, BoundaryTag::RobinAll, 1.0).unwrap();
    let spec = ProblemSpec::robin(&mesh, h).unwrap();
    let a = spec.operator().unwrap();
    let m = spec.mass_matrix();
    let pair = dense_smallest_eigpair(a, m, None).unwrap();

    let au_norm = a
        .matvec(&pair.vector)
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    assert!(eigen_residual(a, m, &pair) <= 1e-10 * au_norm);

    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..200 {
        let v: Vec<f64> = (0..spec.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(pair.value <= rayleigh(&spec, &v).unwrap());
    }

    let load: Vec<f64> = m
        .matvec(&pair.vector)
        .iter()
        .map(|x| pair.value * x)
        .collect();
    let back = solve_spd(a, &load, &SolverConfig::default()).unwrap();
    let err = back
        .iter()
        .zip(&pair.vector)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-10);

    // within O(h²) of the separable value
    let exact = eigeniter::baselines::robin_square_lambda(1.0).unwrap();
    assert!((pair.value - exact).abs() / exact < 5e-3);
}

#[test]
fn mixed_oracle_on_annulus() {
    let mesh = generate_annulus(0.5, 8).unwrap();
    let spec = ProblemSpec::mixed(&mesh).unwrap();
    let c = spec.constraint().unwrap();
    let pair = dense_smallest_eigpair(spec.stiffness(), spec.mass_matrix(), Some(c)).unwrap();
    assert!(c.indices().iter().all(|&i| pair.vector[i] == 0.0));
    assert!(fixed_point_residual(&spec, &pair.vector).unwrap() <= 1e-9);
    // positive principal eigenfunction off the Dirichlet ring
    assert!((0..spec.dim())
        .filter(|&i| !c.contains(i))
        .all(|i| pair.vector[i] > 0.0));
}
