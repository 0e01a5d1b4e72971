use std::fmt;
use std::io::{self, Write};

use super::ProblemKind;

/// Relative slack used by [`check_monotonicity`] and [`uniform_bound_check`].
pub const MONOTONICITY_SLACK: f64 = 1e-9;

/// Diagnostics of iterate `u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub k: usize,
    /// Rayleigh quotient of the problem's functional.
    pub rayleigh: f64,
    /// `√(uᵀMu)`.
    pub l2_norm: f64,
    /// `√(uᵀ(K + B)u)`; equals the gradient seminorm for Mixed.
    pub energy_norm: f64,
    /// `√(uᵀKu)`.
    pub gradient_norm: f64,
    pub step_residual: f64,
    /// Insulation only: trapezoidal mass of `h_k`.
    pub profile_mass: Option<f64>,
    /// Insulation only: `R(u_k, h_k)`.
    pub profile_rayleigh: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub kind: ProblemKind,
    pub steps: Vec<TraceStep>,
    pub converged: bool,
}

impl IterationTrace {
    pub fn new(kind: ProblemKind, steps: Vec<TraceStep>, converged: bool) -> Self {
        IterationTrace {
            kind,
            steps,
            converged,
        }
    }

    /// Final Rayleigh quotient, the eigenvalue estimate.
    pub fn lambda(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.rayleigh)
    }

    /// Number of steps taken (`u_0` is not a step).
    pub fn step_count(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn rayleigh_sequence(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.rayleigh).collect()
    }

    /// CSV with header `k,rayleigh,l2_norm,energy_norm,step_residual`, plus
    /// `profile_mass` for insulation runs.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let insulation = self.kind == ProblemKind::Insulation;
        write!(w, "k,rayleigh,l2_norm,energy_norm,step_residual")?;
        if insulation {
            write!(w, ",profile_mass")?;
        }
        writeln!(w)?;
        for s in &self.steps {
            write!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.k, s.rayleigh, s.l2_norm, s.energy_norm, s.step_residual
            )?;
            if insulation {
                write!(w, ",{:.16e}", s.profile_mass.unwrap_or(f64::NAN))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// A monotone quantity along the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `R_{k+1} ‖u_{k+1}‖ ≤ R_k ‖u_k‖`
    ProductNonincreasing,
    /// `‖u_{k+1}‖_B ≥ ‖u_k‖_B`
    EnergyNondecreasing,
    /// `‖u_{k+1}‖ ≥ ‖u_k‖`
    L2Nondecreasing,
    /// `R_{k+1} ≤ R_k`
    RayleighNonincreasing,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::ProductNonincreasing => "product nonincreasing",
            Relation::EnergyNondecreasing => "energy norm nondecreasing",
            Relation::L2Nondecreasing => "L2 norm nondecreasing",
            Relation::RayleighNonincreasing => "R nonincreasing",
        }
    }

    /// Relations proved for each scheme. The energy relation is not claimed
    /// for insulation.
    pub fn applicable(kind: ProblemKind) -> &'static [Relation] {
        use Relation::*;
        match kind {
            ProblemKind::Insulation => {
                &[ProductNonincreasing, L2Nondecreasing, RayleighNonincreasing]
            }
            _ => &[
                ProductNonincreasing,
                EnergyNondecreasing,
                L2Nondecreasing,
                RayleighNonincreasing,
            ],
        }
    }

    /// Relative amount by which the relation fails between two steps;
    /// nonpositive when it holds exactly.
    fn excess(self, a: &TraceStep, b: &TraceStep) -> f64 {
        let (before, after, decreasing) = match self {
            Relation::ProductNonincreasing => {
                (a.rayleigh * a.l2_norm, b.rayleigh * b.l2_norm, true)
            }
            Relation::EnergyNondecreasing => (a.energy_norm, b.energy_norm, false),
            Relation::L2Nondecreasing => (a.l2_norm, b.l2_norm, false),
            Relation::RayleighNonincreasing => (a.rayleigh, b.rayleigh, true),
        };
        let growth = if decreasing {
            after - before
        } else {
            before - after
        };
        growth / before.abs()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub relation: Relation,
    /// The later step of the offending pair.
    pub step: usize,
    /// Relative size of the failure.
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at step {} by {:e}",
            self.relation, self.step, self.magnitude
        )
    }
}

/// Every failure of an applicable monotonicity relation beyond
/// [`MONOTONICITY_SLACK`].
pub fn check_monotonicity(trace: &IterationTrace) -> Vec<Violation> {
    let relations = Relation::applicable(trace.kind);
    let mut out = Vec::new();
    for pair in trace.steps.windows(2) {
        for &relation in relations {
            let excess = relation.excess(&pair[0], &pair[1]);
            if !(excess <= MONOTONICITY_SLACK) {
                out.push(Violation {
                    relation,
                    step: pair[1].k,
                    magnitude: excess,
                });
            }
        }
    }
    out
}

/// Checks the a priori bounds `‖u_k‖ ≤ (R_0/λ) ‖u_0‖` and
/// `‖∇u_k‖² ≤ (R_0³/λ²) ‖u_0‖²` for every `k ≥ 1`, where `lambda_lower` is
/// a lower bound for the principal eigenvalue.
pub fn uniform_bound_check(trace: &IterationTrace, lambda_lower: f64) -> bool {
    let Some(first) = trace.steps.first() else {
        return true;
    };
    let ratio = first.rayleigh / lambda_lower;
    let l2_bound = ratio * first.l2_norm * (1.0 + MONOTONICITY_SLACK);
    let grad_bound =
        ratio * ratio * first.rayleigh * first.l2_norm.powi(2) * (1.0 + MONOTONICITY_SLACK);
    trace.steps[1..]
        .iter()
        .all(|s| s.l2_norm <= l2_bound && s.gradient_norm.powi(2) <= grad_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(k: usize, rayleigh: f64, l2: f64, energy: f64) -> TraceStep {
        TraceStep {
            k,
            rayleigh,
            l2_norm: l2,
            energy_norm: energy,
            gradient_norm: energy,
            step_residual: 0.0,
            profile_mass: None,
            profile_rayleigh: None,
        }
    }

    #[test]
    fn violations_name_relation_and_step() {
        let trace = IterationTrace::new(
            ProblemKind::Robin,
            vec![step(0, 4.0, 1.0, 2.0), step(1, 4.4, 0.9, 2.1)],
            false,
        );
        let v = check_monotonicity(&trace);
        assert_eq!(v.len(), 2);
        let r = v
            .iter()
            .find(|v| v.relation == Relation::RayleighNonincreasing)
            .unwrap();
        assert_eq!(r.relation.name(), "R nonincreasing");
        assert_eq!(r.step, 1);
        assert!((r.magnitude - 0.1).abs() < 1e-12);
        assert!(v.iter().any(|v| v.relation == Relation::L2Nondecreasing));
    }

    #[test]
    fn rayleigh_increase_alone_is_one_violation() {
        // the norm drop and the product rise both stay inside the slack
        let trace = IterationTrace::new(
            ProblemKind::Mixed,
            vec![
                step(0, 4.0, 1.0, 2.0),
                step(1, 4.0 * (1.0 + 1.5e-9), 1.0 - 0.9e-9, 2.0),
            ],
            false,
        );
        let v = check_monotonicity(&trace);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].relation.name(), "R nonincreasing");
    }

    #[test]
    fn insulation_ignores_energy_relation() {
        let trace = IterationTrace::new(
            ProblemKind::Insulation,
            vec![step(0, 4.0, 1.0, 2.0), step(1, 3.0, 1.1, 1.0)],
            false,
        );
        assert!(check_monotonicity(&trace).is_empty());
        assert_eq!(Relation::applicable(ProblemKind::Insulation).len(), 3);
        let robin = IterationTrace {
            kind: ProblemKind::Robin,
            ..trace
        };
        let v = check_monotonicity(&robin);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].relation, Relation::EnergyNondecreasing);
    }

    #[test]
    fn slack_is_relative() {
        let trace = IterationTrace::new(
            ProblemKind::Robin,
            vec![
                step(0, 4.0, 1.0, 2.0),
                step(1, 4.0 * (1.0 + 5e-10), 1.0, 2.0),
            ],
            false,
        );
        assert!(check_monotonicity(&trace).is_empty());
    }

    #[test]
    fn uniform_bounds() {
        let single = IterationTrace::new(ProblemKind::Robin, vec![step(0, 4.0, 1.0, 2.0)], false);
        assert!(uniform_bound_check(&single, 3.0));
        assert!(uniform_bound_check(&single, 100.0));
        let two = IterationTrace::new(
            ProblemKind::Robin,
            vec![step(0, 4.0, 1.0, 2.0), step(1, 3.5, 1.1, 2.05)],
            false,
        );
        assert!(uniform_bound_check(&two, 3.4));
        // λ above R_0 forces ‖u_1‖ ≤ (R_0/λ)‖u_0‖ < ‖u_0‖, which fails
        assert!(!uniform_bound_check(&two, 5.0));
    }

    #[test]
    fn csv_layout() {
        let mut s = step(0, 4.0, 1.0, 2.0);
        s.profile_mass = Some(2.0);
        let trace = IterationTrace::new(ProblemKind::Insulation, vec![s], false);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,rayleigh,l2_norm,energy_norm,step_residual,profile_mass"
        );
        assert!(lines.next().unwrap().starts_with("0,4.0000000000000000e0,"));
        assert_eq!(trace.step_count(), 0);
    }
}
