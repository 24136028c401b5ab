//! Exact rational linear programming over `{x : A x ≤ b}` with free variables.
//!
//! A dense two-phase tableau simplex with Bland's rule. Every row carries an
//! artificial column so the tableau doubles as `B⁻¹` and yields Farkas and dual
//! multipliers directly.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, norm_upper, RatMatrix, RatVector};
use crate::rat::{self, Rational, RationalParseError};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("constraint rows: expected {expected} columns, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("A has {rows} rows but b has {len} entries")]
    RhsLength { rows: usize, len: usize },
    #[error("bad rational at A[{row}] / b[{row}]: {source}")]
    Entry {
        row: usize,
        #[source]
        source: RationalParseError,
    },
    #[error("invalid polyhedron JSON: {0}")]
    Json(String),
    #[error("inner-ball LP infeasible: the polyhedron misses the radius-R box")]
    InnerBallInfeasible,
}

/// `P = {x ∈ ℝⁿ : A x ≤ b}`; `m = 0` encodes `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polyhedron {
    pub a: RatMatrix,
    pub b: RatVector,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyhedronJson {
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
}

impl Polyhedron {
    pub fn new(a: RatMatrix, b: RatVector) -> Result<Self, LpError> {
        if a.rows() != b.len() {
            return Err(LpError::RhsLength {
                rows: a.rows(),
                len: b.len(),
            });
        }
        Ok(Polyhedron { a, b })
    }

    pub fn whole_space(n: usize) -> Self {
        Polyhedron {
            a: RatMatrix::zeros(0, n),
            b: Vec::new(),
        }
    }

    pub fn from_i64(rows: &[&[i64]], b: &[i64]) -> Self {
        Polyhedron::new(RatMatrix::from_i64(rows), linalg::from_i64(b)).expect("consistent sizes")
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// `bl(A) + bl(b)`, at least `n`.
    pub fn encoding_length(&self) -> u64 {
        let bl = self.a.bit_length() + self.b.iter().map(rat::bit_length).sum::<u64>();
        bl.max(self.n() as u64)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.a.mul_vec(x).iter().zip(&self.b).all(|(l, r)| l <= r)
    }

    /// Appends the rows of `other`.
    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        let mut b = self.b.clone();
        b.extend(other.b.iter().cloned());
        Polyhedron {
            a: self.a.vstack(&other.a),
            b,
        }
    }

    pub fn from_json(json: &PolyhedronJson, n: usize) -> Result<Self, LpError> {
        let mut rows = Vec::with_capacity(json.a.len());
        for (i, r) in json.a.iter().enumerate() {
            if r.len() != n {
                return Err(LpError::Dimension {
                    expected: n,
                    got: r.len(),
                });
            }
            let row = r
                .iter()
                .map(|s| rat::parse_rational(s))
                .collect::<Result<RatVector, _>>()
                .map_err(|source| LpError::Entry { row: i, source })?;
            rows.push(row);
        }
        let b = json
            .b
            .iter()
            .enumerate()
            .map(|(i, s)| rat::parse_rational(s).map_err(|source| LpError::Entry { row: i, source }))
            .collect::<Result<RatVector, _>>()?;
        Polyhedron::new(RatMatrix::from_rows(n, &rows), b)
    }

    pub fn to_json(&self) -> PolyhedronJson {
        PolyhedronJson {
            a: (0..self.m())
                .map(|i| self.a.row(i).iter().map(rat::to_fraction_string).collect())
                .collect(),
            b: self.b.iter().map(rat::to_fraction_string).collect(),
        }
    }

    pub fn parse(text: &str, n: usize) -> Result<Self, LpError> {
        let json: PolyhedronJson =
            serde_json::from_str(text).map_err(|e| LpError::Json(e.to_string()))?;
        Self::from_json(&json, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal (or, for `lp_feasible_point`, feasible) basic solution.
    pub point: Option<RatVector>,
    /// Optimal objective value.
    pub value: Option<Rational>,
    /// Farkas multipliers `y ≥ 0` with `yᵀA = 0`, `yᵀb = −1` when infeasible.
    pub certificate: Option<RatVector>,
    /// Dual solution `y ≥ 0` with `Aᵀy = −c` and `cᵀx* = −bᵀy` when optimal.
    pub dual: Option<RatVector>,
    /// Simplex pivots performed across both phases.
    pub pivots: usize,
}

impl LpOutcome {
    fn infeasible(cert: RatVector, pivots: usize) -> Self {
        LpOutcome {
            status: LpStatus::Infeasible,
            point: None,
            value: None,
            certificate: Some(cert),
            dual: None,
            pivots,
        }
    }
}

/// Column layout: `x⁺ (n) | x⁻ (n) | s (m) | art (m) | rhs`.
struct Tableau {
    n: usize,
    m: usize,
    rows: Vec<RatVector>,
    basis: Vec<usize>,
    /// Reduced costs per column plus `−objective` in the last slot.
    obj: RatVector,
    sigma: Vec<bool>, // true when row i was negated
    pivots: usize,
    trace: Option<Vec<Vec<usize>>>,
}

impl Tableau {
    fn new(p: &Polyhedron, trace: bool) -> Self {
        let (n, m) = (p.n(), p.m());
        let width = 2 * n + 2 * m + 1;
        let mut rows = Vec::with_capacity(m);
        let mut sigma = Vec::with_capacity(m);
        for i in 0..m {
            let neg = p.b[i].is_negative();
            let sgn = if neg { -Rational::one() } else { Rational::one() };
            let mut r = vec![Rational::zero(); width];
            for j in 0..n {
                let v = &p.a[(i, j)] * &sgn;
                r[n + j] = -v.clone();
                r[j] = v;
            }
            r[2 * n + i] = sgn.clone();
            r[2 * n + m + i] = Rational::one();
            r[width - 1] = &p.b[i] * &sgn;
            rows.push(r);
            sigma.push(neg);
        }
        let basis = (0..m).map(|i| 2 * n + m + i).collect();
        Tableau {
            n,
            m,
            rows,
            basis,
            obj: vec![Rational::zero(); width],
            sigma,
            pivots: 0,
            trace: trace.then(Vec::new),
        }
    }

    fn width(&self) -> usize {
        2 * self.n + 2 * self.m + 1
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= 2 * self.n + self.m && j < self.width() - 1
    }

    /// Sets the reduced-cost row for column costs `c` (length `width − 1`).
    fn price(&mut self, c: &[Rational]) {
        let w = self.width();
        let mut obj: RatVector = c.to_vec();
        obj.push(Rational::zero());
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = &c[bj];
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                let d = cb * &self.rows[i][j];
                obj[j] -= d;
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width();
        let pv = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &pv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for j in 0..w {
                if !prow[j].is_zero() {
                    row[j] -= &f * &prow[j];
                }
            }
        }
        if !self.obj[col].is_zero() {
            let f = self.obj[col].clone();
            for j in 0..w {
                if !prow[j].is_zero() {
                    self.obj[j] -= &f * &prow[j];
                }
            }
        }
        self.basis[r] = col;
        self.pivots += 1;
        if let Some(t) = self.trace.as_mut() {
            let mut b = self.basis.clone();
            b.sort_unstable();
            t.push(b);
        }
    }

    /// Runs Bland's rule to optimality. Returns `false` on unboundedness.
    fn run(&mut self, allow_artificial: bool) -> bool {
        let rhs = self.width() - 1;
        loop {
            let entering = (0..rhs).find(|&j| {
                self.obj[j].is_negative() && (allow_artificial || !self.is_artificial(j))
            });
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.m {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[i][rhs] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn primal(&self) -> RatVector {
        let rhs = self.width() - 1;
        let mut full = vec![Rational::zero(); rhs];
        for (i, &bj) in self.basis.iter().enumerate() {
            full[bj] = self.rows[i][rhs].clone();
        }
        (0..self.n).map(|j| &full[j] - &full[self.n + j]).collect()
    }

    /// `y = −σ·π` with `π_i = cost(art_i) − reduced_cost(art_i)`.
    fn row_multipliers(&self, art_cost: &Rational) -> RatVector {
        let base = 2 * self.n + self.m;
        (0..self.m)
            .map(|i| {
                let pi = art_cost - &self.obj[base + i];
                if self.sigma[i] {
                    pi
                } else {
                    -pi
                }
            })
            .collect()
    }

    /// Phase 1. `Ok` when feasible, otherwise the normalized Farkas vector.
    fn phase_one(&mut self) -> Result<(), RatVector> {
        let w = self.width() - 1;
        let mut c = vec![Rational::zero(); w];
        for j in 2 * self.n + self.m..w {
            c[j] = Rational::one();
        }
        self.price(&c);
        let finished = self.run(true);
        debug_assert!(finished, "phase 1 is bounded below by zero");
        let infeas = -self.obj[w].clone();
        if infeas.is_positive() {
            let y = self.row_multipliers(&Rational::one());
            return Err(linalg::scale(&y, &(Rational::one() / infeas)));
        }
        self.drive_out_artificials();
        Ok(())
    }

    /// Pivots zero-level artificials out of the basis where a real column allows it.
    fn drive_out_artificials(&mut self) {
        let real = 2 * self.n + self.m;
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            if let Some(col) = (0..real).find(|&j| !self.rows[r][j].is_zero()) {
                self.pivot(r, col);
            }
        }
    }
}

fn solve(c: Option<&[Rational]>, p: &Polyhedron, trace: bool) -> (LpOutcome, Option<Vec<Vec<usize>>>) {
    let mut t = Tableau::new(p, trace);
    if let Err(cert) = t.phase_one() {
        let piv = t.pivots;
        return (LpOutcome::infeasible(cert, piv), t.trace);
    }
    let Some(c) = c else {
        let x = t.primal();
        let out = LpOutcome {
            status: LpStatus::Optimal,
            point: Some(x),
            value: None,
            certificate: None,
            dual: None,
            pivots: t.pivots,
        };
        return (out, t.trace);
    };
    let w = t.width() - 1;
    let mut cost = vec![Rational::zero(); w];
    for j in 0..t.n {
        cost[j] = c[j].clone();
        cost[t.n + j] = -c[j].clone();
    }
    t.price(&cost);
    let bounded = t.run(false);
    let out = if bounded {
        let x = t.primal();
        let value = linalg::dot(c, &x);
        LpOutcome {
            status: LpStatus::Optimal,
            point: Some(x),
            value: Some(value),
            certificate: None,
            dual: Some(t.row_multipliers(&Rational::zero())),
            pivots: t.pivots,
        }
    } else {
        LpOutcome {
            status: LpStatus::Unbounded,
            point: None,
            value: None,
            certificate: None,
            dual: None,
            pivots: t.pivots,
        }
    };
    (out, t.trace)
}

/// A basic feasible point of `P`, or a Farkas certificate of emptiness.
pub fn lp_feasible_point(p: &Polyhedron) -> LpOutcome {
    solve(None, p, false).0
}

/// Exact `min cᵀx` over `P`.
pub fn lp_optimize(c: &[Rational], p: &Polyhedron) -> LpOutcome {
    assert_eq!(c.len(), p.n(), "objective length must equal the dimension");
    solve(Some(c), p, false).0
}

/// As [`lp_optimize`], also returning the sorted basis after every pivot.
pub fn lp_optimize_traced(c: &[Rational], p: &Polyhedron) -> (LpOutcome, Vec<Vec<usize>>) {
    assert_eq!(c.len(), p.n(), "objective length must equal the dimension");
    let (out, trace) = solve(Some(c), p, true);
    (out, trace.unwrap_or_default())
}

/// `y ≥ 0` with `Cᵀy = 0`, `dᵀy = −1` when `{C x ≤ d}` is empty.
pub fn farkas_certificate(c: &RatMatrix, d: &[Rational]) -> Option<RatVector> {
    let p = Polyhedron::new(c.clone(), d.to_vec()).expect("consistent sizes");
    lp_feasible_point(&p).certificate
}

/// Largest ball (up to the rounded row norms) inside `P`, restricted to the
/// box `‖x‖∞ ≤ R/ub(√n)` so that it also lies in the Euclidean ball `B_R`.
pub fn chebyshev_inner_ball(
    p: &Polyhedron,
    radius: &Rational,
) -> Result<(RatVector, Rational), LpError> {
    let n = p.n();
    if n == 0 {
        return Ok((Vec::new(), radius.clone()));
    }
    let sqrt_n = norm_upper(&vec![Rational::one(); n]);
    let mut rows = Vec::with_capacity(p.m() + 2 * n + 1);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for i in 0..p.m() {
        let mut r = p.a.row(i).to_vec();
        r.push(norm_upper(p.a.row(i)));
        rows.push(r);
        rhs.push(p.b[i].clone());
    }
    for i in 0..n {
        for s in [1i64, -1] {
            let mut r = vec![Rational::zero(); n + 1];
            r[i] = &sqrt_n * rat::int(s);
            r[n] = Rational::one();
            rows.push(r);
            rhs.push(radius.clone());
        }
    }
    let mut nonneg = vec![Rational::zero(); n + 1];
    nonneg[n] = -Rational::one();
    rows.push(nonneg);
    rhs.push(Rational::zero());
    let lp = Polyhedron::new(RatMatrix::from_rows(n + 1, &rows), rhs)?;
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = -Rational::one();
    let out = lp_optimize(&c, &lp);
    match out.status {
        LpStatus::Optimal => {
            let mut x = out.point.expect("optimal point");
            let rho = x.pop().expect("radius coordinate");
            Ok((x, rho))
        }
        _ => Err(LpError::InnerBallInfeasible),
    }
}
