//! Bit-model central-cut ellipsoid method, separation oracles, affine-hull
//! reduction and the bisection minimizer over `P ∩ B_R`.

mod method;
mod optimize;

pub use method::{
    ellipsoid_feasibility, ellipsoid_feasibility_observed, iteration_budget, EllipsoidState,
    Feasibility, FeasibilityRun,
};
pub use optimize::{
    affine_hull, full_dim_reduce, lipschitz_bound, minimize_over_ball, AffineHull,
    MinimizeDiagnostics, Minimized, ReducedProblem,
};

use thiserror::Error;

use crate::linalg::{self, norm_upper, RatVector};
use crate::lp::{LpError, Polyhedron};
use crate::polynomial::{PolyError, SparsePolynomial};
use crate::rat::Rational;

#[derive(Debug, Error)]
pub enum EllipsoidError {
    #[error("separation oracle returned a cut that does not exclude the query point")]
    OracleContract,
    #[error("the polyhedron is empty")]
    EmptyPolyhedron,
    #[error("the feasible region has empty interior inside the search ball")]
    FlatIntersection,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Half-space `⟨normal, x⟩ ≤ offset` containing the target set but not the
/// query point. `offset` is optional; when absent only the strict separation
/// `⟨normal, x⟩ < ⟨normal, query⟩` is promised.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub normal: RatVector,
    pub offset: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleAnswer {
    Inside,
    Separated(Cut),
    /// The target set is empty (a sublevel set below the global minimum).
    InfeasibleEverywhere,
}

pub trait SeparationOracle {
    fn query(&self, y: &[Rational]) -> OracleAnswer;
}

/// Separation for `{x : A x ≤ b}` using the lowest-index violated row.
pub struct PolyhedronOracle<'a> {
    p: &'a Polyhedron,
}

pub fn oracle_polyhedron(p: &Polyhedron) -> PolyhedronOracle<'_> {
    PolyhedronOracle { p }
}

impl SeparationOracle for PolyhedronOracle<'_> {
    fn query(&self, y: &[Rational]) -> OracleAnswer {
        for i in 0..self.p.m() {
            let row = self.p.a.row(i);
            if linalg::dot(row, y) > self.p.b[i] {
                return OracleAnswer::Separated(Cut {
                    normal: row.to_vec(),
                    offset: Some(self.p.b[i].clone()),
                });
            }
        }
        OracleAnswer::Inside
    }
}

/// Separation for the closed Euclidean ball `B_R(0)`.
pub struct BallOracle {
    radius: Rational,
    radius_sq: Rational,
}

pub fn oracle_ball(radius: &Rational) -> BallOracle {
    BallOracle {
        radius: radius.clone(),
        radius_sq: radius * radius,
    }
}

impl SeparationOracle for BallOracle {
    fn query(&self, y: &[Rational]) -> OracleAnswer {
        let ny = linalg::norm_sq(y);
        if ny <= self.radius_sq {
            return OracleAnswer::Inside;
        }
        let offset = &self.radius * norm_upper(y);
        OracleAnswer::Separated(Cut {
            normal: y.to_vec(),
            offset: (offset < ny).then_some(offset),
        })
    }
}

/// Separation for `{x : f(x) ≤ τ}` of a convex `f` by gradient cuts.
pub struct SublevelOracle<'a> {
    f: &'a SparsePolynomial,
    grad: Vec<SparsePolynomial>,
    tau: Rational,
}

pub fn oracle_sublevel<'a>(f: &'a SparsePolynomial, tau: &Rational) -> SublevelOracle<'a> {
    SublevelOracle {
        f,
        grad: f.gradient(),
        tau: tau.clone(),
    }
}

impl SeparationOracle for SublevelOracle<'_> {
    fn query(&self, y: &[Rational]) -> OracleAnswer {
        let fy = self.f.eval(y).expect("query dimension matches f");
        if fy <= self.tau {
            return OracleAnswer::Inside;
        }
        let g: RatVector = self
            .grad
            .iter()
            .map(|p| p.eval(y).expect("query dimension matches f"))
            .collect();
        if linalg::is_zero_vec(&g) {
            return OracleAnswer::InfeasibleEverywhere;
        }
        // convexity: f(x) ≥ f(y) + ⟨g, x − y⟩, so f(x) ≤ τ forces ⟨g, x⟩ ≤ ⟨g, y⟩ − (f(y) − τ)
        let offset = linalg::dot(&g, y) - (fy - &self.tau);
        OracleAnswer::Separated(Cut {
            normal: g,
            offset: Some(offset),
        })
    }
}

/// Intersection of several sets; the first separating oracle answers.
pub struct IntersectionOracle<'a> {
    parts: Vec<&'a dyn SeparationOracle>,
}

impl<'a> IntersectionOracle<'a> {
    pub fn new(parts: Vec<&'a dyn SeparationOracle>) -> Self {
        IntersectionOracle { parts }
    }
}

impl SeparationOracle for IntersectionOracle<'_> {
    fn query(&self, y: &[Rational]) -> OracleAnswer {
        for o in &self.parts {
            match o.query(y) {
                OracleAnswer::Inside => continue,
                other => return other,
            }
        }
        OracleAnswer::Inside
    }
}

fn check_cut(cut: &Cut, y: &[Rational]) -> bool {
    if linalg::is_zero_vec(&cut.normal) {
        return false;
    }
    match &cut.offset {
        Some(o) => *o < linalg::dot(&cut.normal, y),
        None => true,
    }
}
