//! Reference principal eigenvalues from separable and radial reductions.
//!
//! These share no code with the mesh, assembly or iteration modules and are
//! used as independent targets for mesh-convergence studies.

mod bessel;

pub use bessel::{bessel_j, j0, j1, MAX_ARGUMENT};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Root-finding tolerance on the bracket width.
pub const ROOT_TOLERANCE: f64 = 1e-13;

/// Bracket around a sign change of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub sign_lo: f64,
    pub sign_hi: f64,
}

impl RootBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisection until the bracket is no wider than `tol` or can no longer be
/// split in floating point.
pub fn bisect(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<RootBracket> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(RootBracket {
            lo,
            hi: lo,
            sign_lo: 0.0,
            sign_hi: 0.0,
        });
    }
    if fhi == 0.0 {
        return Ok(RootBracket {
            lo: hi,
            hi,
            sign_lo: 0.0,
            sign_hi: 0.0,
        });
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::BracketFailure { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(RootBracket {
                lo: mid,
                hi: mid,
                sign_lo: 0.0,
                sign_hi: 0.0,
            });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(RootBracket {
        lo,
        hi,
        sign_lo: flo.signum(),
        sign_hi: fhi.signum(),
    })
}

fn check_positive(name: &'static str, h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("{h} must be positive and finite"),
        ))
    }
}

/// First positive zero of `J0`.
pub fn first_zero_j0() -> Result<f64> {
    Ok(bisect(j0, 2.0, 3.0, ROOT_TOLERANCE)?.midpoint())
}

/// `J0(s) − h s J1(s)`, whose first positive root gives the radial Robin
/// eigenfunction `J0(s r)` on the unit disk.
pub fn robin_disk_equation(h: f64, s: f64) -> Result<f64> {
    Ok(j0(s)? - h * s * j1(s)?)
}

/// Principal Robin eigenvalue of the unit disk with constant `h`.
pub fn robin_disk_lambda(h: f64) -> Result<f64> {
    check_positive("h", h)?;
    let zero = first_zero_j0()?;
    let bracket = bisect(|s| robin_disk_equation(h, s), 0.0, zero, ROOT_TOLERANCE)?;
    let s = bracket.midpoint();
    Ok(s * s)
}

/// `cos(ω/2) − h ω sin(ω/2)`, zero exactly when `tan(ω/2) = 1/(h ω)`.
pub fn robin_square_equation(h: f64, omega: f64) -> f64 {
    (0.5 * omega).cos() - h * omega * (0.5 * omega).sin()
}

/// Principal Robin eigenvalue of the unit square with constant `h`:
/// `2 ω²` with `cos(ω(x − ½))` the one-dimensional factor.
pub fn robin_square_lambda(h: f64) -> Result<f64> {
    check_positive("h", h)?;
    let bracket = bisect(|w| Ok(robin_square_equation(h, w)), 0.0, PI, ROOT_TOLERANCE)?;
    let w = bracket.midpoint();
    Ok(2.0 * w * w)
}

/// Grid sizes combined by Richardson extrapolation in [`mixed_annulus_lambda`].
pub const ANNULUS_GRIDS: (usize, usize) = (2000, 4000);

/// Principal eigenvalue of the annulus `r0 < |x| < 1`, zero on the inner
/// circle and insulated on the outer one, from the radial equation
/// `−(r u′)′ = λ r u`.
///
/// Two three-point discretizations (2000 and 4000 cells) are combined by
/// Richardson extrapolation; the result is accurate to about 1e−10.
pub fn mixed_annulus_lambda(r0: f64) -> Result<f64> {
    let coarse = mixed_annulus_lambda_grid(r0, ANNULUS_GRIDS.0)?;
    let fine = mixed_annulus_lambda_grid(r0, ANNULUS_GRIDS.1)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Three-point discretization of the radial problem with `cells` uniform
/// cells: piecewise-linear stiffness `∫ r u′ v′` and mass `∫ r u v`,
/// integrated exactly. Second-order accurate.
pub fn mixed_annulus_lambda_grid(r0: f64, cells: usize) -> Result<f64> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::invalid(
            "r0",
            format!("inner radius {r0} not in (0, 1)"),
        ));
    }
    if cells < 2 {
        return Err(Error::invalid("cells", "need at least two cells"));
    }
    let d = (1.0 - r0) / cells as f64;
    let node = |i: usize| r0 + d * i as f64;
    // unknowns are nodes 1..=cells; node 0 is pinned
    let n = cells;
    let mut mass_diag = vec![0.0; n];
    let mut mass_off = vec![0.0; n - 1];
    let mut flux_coeff = vec![0.0; n];
    for e in 0..cells {
        let (a, b) = (node(e), node(e + 1));
        // element e joins unknowns e-1 and e
        flux_coeff[e] = 0.5 * (a + b) / d;
        let left = d * (3.0 * a + b) / 12.0;
        let right = d * (a + 3.0 * b) / 12.0;
        let cross = d * (a + b) / 12.0;
        if e > 0 {
            mass_diag[e - 1] += left;
            mass_off[e - 1] += cross;
        }
        mass_diag[e] += right;
    }
    let mass = |x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut y = mass_diag[i] * x[i];
                if i > 0 {
                    y += mass_off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += mass_off[i] * x[i + 1];
                }
                y
            })
            .collect()
    };
    // Stiffness inverse by flux accumulation: with zero flux past the outer
    // node, the flux through element e is the load summed over nodes e..n,
    // and u is recovered by summing flux / coefficient from the inner node.
    // Positive loads give positive sums, so no cancellation occurs.
    let solve = |load: &[f64]| -> Vec<f64> {
        let mut flux = vec![0.0; n];
        let mut acc = 0.0;
        for e in (0..n).rev() {
            acc += load[e];
            flux[e] = acc;
        }
        let mut u = vec![0.0; n];
        let mut value = 0.0;
        for e in 0..n {
            value += flux[e] / flux_coeff[e];
            u[e] = value;
        }
        u
    };

    let mut u: Vec<f64> = (1..=n).map(|i| node(i) - r0).collect();
    let mut lambda = f64::INFINITY;
    for _ in 0..500 {
        let mu = mass(&u);
        let next = solve(&mu);
        let num: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let den: f64 = next.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let estimate = num / den;
        let scale = next.iter().copied().fold(0.0, f64::max);
        u = next.into_iter().map(|x| x / scale).collect();
        let done = (lambda - estimate).abs() <= 1e-15 * estimate;
        lambda = estimate;
        if done {
            break;
        }
    }
    Ok(lambda)
}
