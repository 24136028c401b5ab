//! End-to-end solve: structure, unboundedness test, radius, then the
//! ellipsoid minimizer.

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bounds::{radius_r, unboundedness_ray, BoundsError};
use crate::ellipsoid::{minimize_over_ball, EllipsoidError, MinimizeDiagnostics};
use crate::linalg::{ldlt_definiteness, Definiteness, RatVector};
use crate::lp::{lp_feasible_point, LpStatus, Polyhedron};
use crate::polynomial::{PolyError, SparsePolynomial};
use crate::rat::{self, Rational};
use crate::structure::{structure_with_bound, SearchMode, StructureError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("the polyhedron is empty")]
    EmptyPolyhedron,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("polynomial has {poly} variables but the constraints have {constraints}")]
    Dimension { poly: usize, constraints: usize },
    #[error("structure: {0}")]
    Structure(#[from] StructureError),
    #[error("bounds: {0}")]
    Bounds(#[from] BoundsError),
    #[error("ellipsoid: {0}")]
    Ellipsoid(#[from] EllipsoidError),
    #[error("polynomial: {0}")]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub mode: SearchMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SearchMode::Auto { seed: 0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Unbounded,
    Solved,
    NotConvexEvidence,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Unbounded => "Unbounded",
            SolveStatus::Solved => "Solved",
            SolveStatus::NotConvexEvidence => "NotConvexEvidence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolveDiagnostics {
    pub n: usize,
    /// Rank of the nonlinear part (rows of `U`).
    pub k: usize,
    pub has_linear_part: bool,
    pub mu: Option<Rational>,
    pub definite_point: Option<RatVector>,
    /// Feasible point the unboundedness ray starts from.
    pub ray_origin: Option<RatVector>,
    pub b_u: Option<Rational>,
    pub b_w: Option<Rational>,
    pub minimize: Option<MinimizeDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub ray: Option<RatVector>,
    pub point: Option<RatVector>,
    pub value: Option<Rational>,
    pub radius: Option<Rational>,
    pub diagnostics: SolveDiagnostics,
}

impl SolveOutcome {
    fn empty(status: SolveStatus, diagnostics: SolveDiagnostics) -> Self {
        SolveOutcome {
            status,
            ray: None,
            point: None,
            value: None,
            radius: None,
            diagnostics,
        }
    }
}

/// Decides unboundedness of `f` on `P`, otherwise returns `x̃ ∈ P` with
/// `f(x̃) ≤ min_P f + eps`.
pub fn solve(
    f: &SparsePolynomial,
    p: &Polyhedron,
    eps: &Rational,
    options: &SolveOptions,
) -> Result<SolveOutcome, SolveError> {
    if !eps.is_positive() {
        return Err(SolveError::NonPositiveEpsilon);
    }
    if f.n_vars() != p.n() {
        return Err(SolveError::Dimension {
            poly: f.n_vars(),
            constraints: p.n(),
        });
    }
    let feas = lp_feasible_point(p);
    if feas.status == LpStatus::Infeasible {
        return Err(SolveError::EmptyPolyhedron);
    }
    let mut diag = SolveDiagnostics {
        n: f.n_vars(),
        ..Default::default()
    };
    let s = match structure_with_bound(f, options.mode) {
        Ok(s) => s,
        Err(StructureError::NotConvexEvidence { k, .. }) => {
            diag.k = k;
            return Ok(SolveOutcome::empty(SolveStatus::NotConvexEvidence, diag));
        }
        Err(e) => return Err(e.into()),
    };
    let d = &s.decomposition;
    diag.k = d.k();
    diag.has_linear_part = d.has_linear_part();
    if let Some(b) = &s.bound {
        diag.mu = Some(b.mu.clone());
        diag.definite_point = Some(b.a.clone());
    }
    if let Some(cert) = unboundedness_ray(p, d) {
        diag.ray_origin = feas.point;
        let mut out = SolveOutcome::empty(SolveStatus::Unbounded, diag);
        out.ray = Some(cert.ray);
        return Ok(out);
    }
    let rb = radius_r(f, p, &s)?;
    let m = minimize_over_ball(f, p, &rb.r, eps)?;
    diag.b_u = Some(rb.b_u);
    diag.b_w = Some(rb.b_w);
    diag.minimize = Some(m.diagnostics);
    Ok(SolveOutcome {
        status: SolveStatus::Solved,
        ray: None,
        point: Some(m.point),
        value: Some(m.value),
        radius: Some(rb.r),
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvexityCheck {
    NoViolation,
    ViolationAt(RatVector),
}

/// Tests the Hessian for positive semidefiniteness at `trials` random points
/// with coordinates in `[−10, 10] ∩ (1/8)ℤ`.
pub fn sampled_convexity_check(f: &SparsePolynomial, trials: usize, seed: u64) -> ConvexityCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.n_vars();
    let hess = f.second_partials();
    for _ in 0..trials {
        let x: RatVector = (0..n).map(|_| rat::frac(rng.gen_range(-80..=80), 8)).collect();
        let h = crate::linalg::RatMatrix::from_rows(
            n,
            &hess
                .iter()
                .map(|row| row.iter().map(|g| g.eval_unchecked(&x)).collect())
                .collect::<Vec<RatVector>>(),
        );
        if matches!(ldlt_definiteness(&h), Ok(Definiteness::Indefinite)) {
            return ConvexityCheck::ViolationAt(x);
        }
    }
    ConvexityCheck::NoViolation
}
