//! The three inverse-iteration schemes.
//!
//! Each step solves one linear Poisson-type system whose right-hand side is
//! the previous iterate scaled by its Rayleigh quotient:
//!
//! * Robin: `(K + B_h) u' = R(u) M u`
//! * Mixed: `K̃ u' = R(u) P M u`, with `P` zeroing the Dirichlet rows
//! * Insulation: `(K + B_{h(u)}) u' = R_m(u) M u`, with `h(u) = m |u| / ∫|u| dσ`
//!
//! Iterates are never renormalized.

mod trace;

pub use trace::{
    check_monotonicity, uniform_bound_check, IterationTrace, Relation, TraceStep, Violation,
    MONOTONICITY_SLACK,
};

use std::fmt;
use std::str::FromStr;

use crate::assembly::{
    apply_constraint, assemble_boundary_mass, assemble_mass, assemble_stiffness, boundary_l1, dot,
    norm2, BoundaryProfile, DirichletConstraint, SymSparseMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, SolverConfig};
use crate::mesh::{BoundaryTag, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Robin,
    Mixed,
    Insulation,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Robin => "robin",
            ProblemKind::Mixed => "mixed",
            ProblemKind::Insulation => "insulation",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "robin" => Ok(ProblemKind::Robin),
            "mixed" => Ok(ProblemKind::Mixed),
            "insulation" => Ok(ProblemKind::Insulation),
            _ => Err(format!("unknown problem `{s}`")),
        }
    }
}

#[derive(Debug, Clone)]
enum BoundaryData {
    Robin {
        profile: BoundaryProfile,
        boundary_mass: SymSparseMatrix,
    },
    Mixed(DirichletConstraint),
    Insulation {
        mass: f64,
    },
}

/// A mesh with its assembled matrices and the boundary data of one of the
/// three eigenproblems.
#[derive(Debug, Clone)]
pub struct ProblemSpec<'m> {
    mesh: &'m Mesh,
    stiffness: SymSparseMatrix,
    mass: SymSparseMatrix,
    /// `K + B_h` for Robin, `K̃` for Mixed, unused for Insulation.
    operator: SymSparseMatrix,
    data: BoundaryData,
}

fn require_tags(mesh: &Mesh, kind: ProblemKind, wanted: &[BoundaryTag]) -> Result<()> {
    let tags = mesh.tags();
    if tags != wanted {
        let list = |t: &[BoundaryTag]| t.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ");
        return Err(Error::invalid(
            "mesh",
            format!(
                "{kind} problem needs boundary tags [{}], mesh has [{}]",
                list(wanted),
                list(&tags)
            ),
        ));
    }
    Ok(())
}

impl<'m> ProblemSpec<'m> {
    /// Robin problem; `profile` must cover the whole boundary.
    pub fn robin(mesh: &'m Mesh, profile: BoundaryProfile) -> Result<Self> {
        require_tags(mesh, ProblemKind::Robin, &[BoundaryTag::RobinAll])?;
        let stiffness = assemble_stiffness(mesh)?;
        let boundary_mass = assemble_boundary_mass(mesh, &profile)?;
        Ok(ProblemSpec {
            operator: stiffness.add(&boundary_mass)?,
            mass: assemble_mass(mesh)?,
            stiffness,
            mesh,
            data: BoundaryData::Robin {
                profile,
                boundary_mass,
            },
        })
    }

    /// Mixed problem: zero on the `DirichletInner` component, insulated on
    /// `NeumannOuter`.
    pub fn mixed(mesh: &'m Mesh) -> Result<Self> {
        require_tags(
            mesh,
            ProblemKind::Mixed,
            &[BoundaryTag::DirichletInner, BoundaryTag::NeumannOuter],
        )?;
        let stiffness = assemble_stiffness(mesh)?;
        let constraint = DirichletConstraint::from_mesh(mesh);
        Ok(ProblemSpec {
            operator: apply_constraint(&stiffness, &constraint)?,
            mass: assemble_mass(mesh)?,
            stiffness,
            mesh,
            data: BoundaryData::Mixed(constraint),
        })
    }

    /// Optimal-insulation problem with total profile mass `mass`.
    pub fn insulation(mesh: &'m Mesh, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid("mass", format!("{mass} must be positive")));
        }
        require_tags(mesh, ProblemKind::Insulation, &[BoundaryTag::RobinAll])?;
        let stiffness = assemble_stiffness(mesh)?;
        Ok(ProblemSpec {
            operator: SymSparseMatrix::zeros(mesh.num_vertices()),
            mass: assemble_mass(mesh)?,
            stiffness,
            mesh,
            data: BoundaryData::Insulation { mass },
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self.data {
            BoundaryData::Robin { .. } => ProblemKind::Robin,
            BoundaryData::Mixed(_) => ProblemKind::Mixed,
            BoundaryData::Insulation { .. } => ProblemKind::Insulation,
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn stiffness(&self) -> &SymSparseMatrix {
        &self.stiffness
    }

    pub fn mass_matrix(&self) -> &SymSparseMatrix {
        &self.mass
    }

    /// The fixed linear operator: `K + B_h` (Robin) or `K̃` (Mixed).
    pub fn operator(&self) -> Option<&SymSparseMatrix> {
        match self.data {
            BoundaryData::Insulation { .. } => None,
            _ => Some(&self.operator),
        }
    }

    pub fn profile(&self) -> Option<&BoundaryProfile> {
        match &self.data {
            BoundaryData::Robin { profile, .. } => Some(profile),
            _ => None,
        }
    }

    pub fn boundary_mass(&self) -> Option<&SymSparseMatrix> {
        match &self.data {
            BoundaryData::Robin { boundary_mass, .. } => Some(boundary_mass),
            _ => None,
        }
    }

    pub fn constraint(&self) -> Option<&DirichletConstraint> {
        match &self.data {
            BoundaryData::Mixed(c) => Some(c),
            _ => None,
        }
    }

    pub fn insulation_mass(&self) -> Option<f64> {
        match self.data {
            BoundaryData::Insulation { mass } => Some(mass),
            _ => None,
        }
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// Squared boundary energy: `uᵀ B_h u` (Robin), 0 (Mixed) or
    /// `(∫|u| dσ)² / m` (Insulation).
    fn boundary_energy(&self, u: &[f64]) -> f64 {
        match &self.data {
            BoundaryData::Robin { boundary_mass, .. } => boundary_mass.quad_form(u),
            BoundaryData::Mixed(_) => 0.0,
            BoundaryData::Insulation { mass } => boundary_l1(self.mesh, u).powi(2) / mass,
        }
    }
}

/// Rayleigh quotient of the problem's functional: `R` for Robin, `𝓡` for
/// Mixed, `R_m` for Insulation.
pub fn rayleigh(spec: &ProblemSpec, u: &[f64]) -> Result<f64> {
    spec.check_len(u)?;
    if let Some(c) = spec.constraint() {
        if let Some(&i) = c.indices().iter().find(|&&i| u[i] != 0.0) {
            return Err(Error::invalid(
                "u",
                format!("entry {i} lies on the Dirichlet boundary but is nonzero"),
            ));
        }
    }
    let l2 = spec.mass.quad_form(u);
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok((spec.stiffness.quad_form(u) + spec.boundary_energy(u)) / l2)
}

/// `R(u, h) = (uᵀKu + uᵀB_h u) / uᵀMu` for an arbitrary profile.
pub fn robin_rayleigh(
    mesh: &Mesh,
    stiffness: &SymSparseMatrix,
    mass: &SymSparseMatrix,
    profile: &BoundaryProfile,
    u: &[f64],
) -> Result<f64> {
    let l2 = mass.quad_form(u);
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let b = assemble_boundary_mass(mesh, profile)?;
    Ok((stiffness.quad_form(u) + b.quad_form(u)) / l2)
}

fn scaled_load(mass: &SymSparseMatrix, u: &[f64], r: f64) -> Vec<f64> {
    let mut f = mass.matvec(u);
    f.iter_mut().for_each(|x| *x *= r);
    f
}

/// One Robin step: solves `(K + B_h) u' = R(u) M u`.
pub fn robin_step(
    u: &[f64],
    stiffness: &SymSparseMatrix,
    mass: &SymSparseMatrix,
    boundary_mass: &SymSparseMatrix,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let l2 = mass.quad_form(u);
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let r = (stiffness.quad_form(u) + boundary_mass.quad_form(u)) / l2;
    let op = stiffness.add(boundary_mass)?;
    solve_spd(&op, &scaled_load(mass, u, r), cfg)
}

/// One mixed step: solves `K̃ u' = 𝓡(u) P M u`. `constrained` is the
/// stiffness after symmetric elimination; `u` must vanish on the constraint.
pub fn mixed_step(
    u: &[f64],
    constrained: &SymSparseMatrix,
    mass: &SymSparseMatrix,
    constraint: &DirichletConstraint,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let l2 = mass.quad_form(u);
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut projected = u.to_vec();
    constraint.apply_to_vector(&mut projected);
    let r = constrained.quad_form(&projected) / l2;
    if !(r > 0.0) {
        return Err(Error::VanishingRayleigh);
    }
    let mut load = scaled_load(mass, u, r);
    constraint.apply_to_vector(&mut load);
    solve_spd(constrained, &load, cfg)
}

/// Current iterate of the insulation scheme with its profile
/// `h = m |u| / ∫|u| dσ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InsulationState {
    pub u: Vec<f64>,
    pub h: BoundaryProfile,
}

impl InsulationState {
    pub fn new(mesh: &Mesh, u: Vec<f64>, mass: f64) -> Result<Self> {
        let h = BoundaryProfile::optimal_for(mesh, &u, mass)?;
        Ok(InsulationState { u, h })
    }
}

/// One insulation step: solves `(K + B_{h_k}) u' = R_m(u_k) M u_k` and
/// refreshes the profile from `u'`.
pub fn insulation_step(
    state: &InsulationState,
    stiffness: &SymSparseMatrix,
    mass_matrix: &SymSparseMatrix,
    mesh: &Mesh,
    mass: f64,
    cfg: &SolverConfig,
) -> Result<InsulationState> {
    let u = &state.u;
    let l2 = mass_matrix.quad_form(u);
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let r = (stiffness.quad_form(u) + boundary_l1(mesh, u).powi(2) / mass) / l2;
    let b = assemble_boundary_mass(mesh, &state.h)?;
    let next = solve_spd(&stiffness.add(&b)?, &scaled_load(mass_matrix, u, r), cfg)?;
    InsulationState::new(mesh, next, mass)
}

/// `‖P(A(u) u − R(u) M u)‖ / ‖P M u‖`, where `A(u)` is the operator the
/// step would use at `u` and `P` zeroes Dirichlet rows. Invariant under
/// positive scaling of `u`; zero exactly at eigenvectors.
pub fn fixed_point_residual(spec: &ProblemSpec, u: &[f64]) -> Result<f64> {
    let r = rayleigh(spec, u)?;
    let au = match &spec.data {
        BoundaryData::Insulation { mass } => {
            let h = BoundaryProfile::optimal_for(spec.mesh, u, *mass)?;
            let b = assemble_boundary_mass(spec.mesh, &h)?;
            let mut au = spec.stiffness.matvec(u);
            au.iter_mut().zip(b.matvec(u)).for_each(|(a, x)| *a += x);
            au
        }
        _ => spec.operator.matvec(u),
    };
    let mut mu = spec.mass.matvec(u);
    let mut res: Vec<f64> = au.iter().zip(&mu).map(|(a, m)| a - r * m).collect();
    if let Some(c) = spec.constraint() {
        c.apply_to_vector(&mut res);
        c.apply_to_vector(&mut mu);
    }
    Ok(norm2(&res) / norm2(&mu))
}

/// Starting vector of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialVector {
    ConstantOne,
    /// `1 + d(x)` with `d` the distance from the barycenter of the Dirichlet
    /// boundary (or of the whole boundary), rescaled to `[0, 1]`.
    AffinePositive,
    User(Vec<f64>),
}

impl InitialVector {
    /// Default for the problem kind: constant for Robin and Insulation,
    /// affine for Mixed.
    pub fn default_for(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Mixed => InitialVector::AffinePositive,
            _ => InitialVector::ConstantOne,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialVector::ConstantOne => "constant-one",
            InitialVector::AffinePositive => "affine-positive",
            InitialVector::User(_) => "user",
        }
    }

    /// Nodal values for `spec`, with Dirichlet entries zeroed.
    pub fn resolve(&self, spec: &ProblemSpec) -> Result<Vec<f64>> {
        let mesh = spec.mesh();
        let mut u = match self {
            InitialVector::ConstantOne => vec![1.0; spec.dim()],
            InitialVector::AffinePositive => {
                let anchor = match spec.constraint() {
                    Some(c) => c.indices().to_vec(),
                    None => mesh.boundary_vertices(),
                };
                let k = anchor.len() as f64;
                let center = anchor.iter().fold([0.0, 0.0], |acc, &v| {
                    let p = mesh.vertices()[v];
                    [acc[0] + p[0] / k, acc[1] + p[1] / k]
                });
                let dist: Vec<f64> = mesh
                    .vertices()
                    .iter()
                    .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]))
                    .collect();
                let lo = dist.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = dist.iter().copied().fold(0.0, f64::max);
                let span = if hi > lo { hi - lo } else { 1.0 };
                dist.iter().map(|d| 1.0 + (d - lo) / span).collect()
            }
            InitialVector::User(v) => {
                spec.check_len(v)?;
                v.clone()
            }
        };
        let constraint = spec.constraint();
        if let Some(i) = (0..u.len())
            .filter(|&i| !constraint.is_some_and(|c| c.contains(i)))
            .find(|&i| !(u[i] > 0.0 && u[i].is_finite()))
        {
            return Err(Error::invalid(
                "initial",
                format!("value {} at vertex {i} is not strictly positive", u[i]),
            ));
        }
        if let Some(c) = constraint {
            c.apply_to_vector(&mut u);
            if !(spec.stiffness.quad_form(&u) > 0.0) {
                return Err(Error::VanishingRayleigh);
            }
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    /// Stop once `|R_k − R_{k+1}| ≤ rtol · R_{k+1}`.
    pub rtol: f64,
    pub max_steps: usize,
    pub initial: InitialVector,
    pub solver: SolverConfig,
    /// Keep every iterate in [`Solution::iterates`].
    pub record_iterates: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            rtol: 1e-10,
            max_steps: 500,
            initial: InitialVector::ConstantOne,
            solver: SolverConfig::default(),
            record_iterates: false,
        }
    }
}

impl IterationConfig {
    /// Defaults with the kind-appropriate initial vector.
    pub fn for_kind(kind: ProblemKind) -> Self {
        IterationConfig {
            initial: InitialVector::default_for(kind),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::invalid(
                "rtol",
                format!("{} not in (0, 1)", self.rtol),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be at least 1"));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Final Rayleigh quotient.
    pub lambda: f64,
    /// Final iterate, unnormalized.
    pub u: Vec<f64>,
    /// Final insulation profile.
    pub profile: Option<BoundaryProfile>,
    pub trace: IterationTrace,
    /// `u_0, u_1, …` when requested.
    pub iterates: Vec<Vec<f64>>,
}

/// Diagnostics of a single iterate.
fn measure(
    spec: &ProblemSpec,
    k: usize,
    u: &[f64],
    h: Option<&BoundaryProfile>,
) -> Result<TraceStep> {
    let l2 = spec.mass.quad_form(u);
    if !(l2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let grad = spec.stiffness.quad_form(u);
    let boundary = spec.boundary_energy(u);
    let (profile_mass, profile_rayleigh) = match h {
        Some(h) => {
            let b = assemble_boundary_mass(spec.mesh, h)?;
            (Some(h.mass(spec.mesh)), Some((grad + b.quad_form(u)) / l2))
        }
        None => (None, None),
    };
    Ok(TraceStep {
        k,
        rayleigh: (grad + boundary) / l2,
        l2_norm: l2.sqrt(),
        energy_norm: (grad + boundary).sqrt(),
        gradient_norm: grad.sqrt(),
        step_residual: fixed_point_residual(spec, u)?,
        profile_mass,
        profile_rayleigh,
    })
}

/// Runs the scheme until the Rayleigh decrement falls below `rtol` or
/// `max_steps` steps have been taken. Hitting the step cap is reported in
/// the trace, not as an error.
pub fn run(spec: &ProblemSpec, cfg: &IterationConfig) -> Result<Solution> {
    cfg.validate()?;
    let mut u = cfg.initial.resolve(spec)?;
    let mut h = match spec.insulation_mass() {
        Some(m) => Some(BoundaryProfile::optimal_for(spec.mesh, &u, m)?),
        None => None,
    };
    let mut steps = vec![measure(spec, 0, &u, h.as_ref())?];
    if !(steps[0].rayleigh > 0.0) {
        return Err(Error::VanishingRayleigh);
    }
    let mut iterates = Vec::new();
    if cfg.record_iterates {
        iterates.push(u.clone());
    }
    let mut converged = false;
    for k in 1..=cfg.max_steps {
        let (next, next_h) = match &spec.data {
            BoundaryData::Robin { .. } => {
                let r = steps[k - 1].rayleigh;
                (
                    solve_spd(&spec.operator, &scaled_load(&spec.mass, &u, r), &cfg.solver)?,
                    None,
                )
            }
            BoundaryData::Mixed(c) => {
                let r = steps[k - 1].rayleigh;
                let mut load = scaled_load(&spec.mass, &u, r);
                c.apply_to_vector(&mut load);
                (solve_spd(&spec.operator, &load, &cfg.solver)?, None)
            }
            BoundaryData::Insulation { mass } => {
                let state = InsulationState {
                    u: std::mem::take(&mut u),
                    h: h.take().expect("insulation state carries a profile"),
                };
                let s = insulation_step(
                    &state,
                    &spec.stiffness,
                    &spec.mass,
                    spec.mesh,
                    *mass,
                    &cfg.solver,
                )?;
                (s.u, Some(s.h))
            }
        };
        u = next;
        h = next_h;
        let step = measure(spec, k, &u, h.as_ref())?;
        let previous = steps[k - 1].rayleigh;
        let done = (previous - step.rayleigh).abs() <= cfg.rtol * step.rayleigh;
        steps.push(step);
        if cfg.record_iterates {
            iterates.push(u.clone());
        }
        if done {
            converged = true;
            break;
        }
    }
    let trace = IterationTrace::new(spec.kind(), steps, converged);
    Ok(Solution {
        lambda: trace.lambda(),
        u,
        profile: h,
        trace,
        iterates,
    })
}

/// `u / ‖u‖_M`.
pub fn mass_normalized(mass: &SymSparseMatrix, u: &[f64]) -> Vec<f64> {
    let s = mass.quad_form(u).sqrt();
    u.iter().map(|x| x / s).collect()
}

/// `√((u − v)ᵀ A (u − v))`.
pub fn energy_distance(a: &SymSparseMatrix, u: &[f64], v: &[f64]) -> f64 {
    let d: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - y).collect();
    a.quad_form(&d).max(0.0).sqrt()
}

/// `⟨u, M v⟩`.
pub fn mass_inner(mass: &SymSparseMatrix, u: &[f64], v: &[f64]) -> f64 {
    dot(u, &mass.matvec(v))
}
