use num_traits::{One, Signed, Zero};

use super::{check_cut, Cut, EllipsoidError, OracleAnswer, SeparationOracle};
use crate::linalg::{self, sqrt_bounds, Definiteness, RatMatrix, RatVector};
use crate::rat::{self, Rational};

/// `E = {x : (x − center)ᵀ shape⁻¹ (x − center) ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllipsoidState {
    pub center: RatVector,
    pub shape: RatMatrix,
    /// Significant bits kept when rounding.
    pub precision: u32,
    pub iteration: u64,
}

impl EllipsoidState {
    pub fn contains(&self, x: &[Rational]) -> bool {
        let d = linalg::sub(x, &self.center);
        match solve_spd(&self.shape, &d) {
            Some(v) => linalg::dot(&d, &v) <= Rational::one(),
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Point(RatVector),
    SmallVolume,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityRun {
    pub outcome: Feasibility,
    pub iterations: u64,
}

/// `⌈10·n(n+1)·(n·ln(2R) + ln(1/r) + 1)⌉` using upper bounds on the logarithms.
pub fn iteration_budget(n: usize, radius: &Rational, r: &Rational) -> u64 {
    let nf = n as f64;
    let ln_2r = rat::ln_upper(&(radius * rat::int(2))).max(0.0);
    let ln_inv_r = rat::ln_upper(&(Rational::one() / r)).max(0.0);
    (10.0 * nf * (nf + 1.0) * (nf * ln_2r + ln_inv_r + 1.0)).ceil() as u64
}

pub fn ellipsoid_feasibility(
    oracle: &dyn SeparationOracle,
    radius: &Rational,
    r: &Rational,
    n: usize,
) -> Result<FeasibilityRun, EllipsoidError> {
    ellipsoid_feasibility_observed(oracle, radius, r, n, &mut |_| {})
}

/// As [`ellipsoid_feasibility`], calling `observe` on every ellipsoid in turn.
pub fn ellipsoid_feasibility_observed(
    oracle: &dyn SeparationOracle,
    radius: &Rational,
    r: &Rational,
    n: usize,
    observe: &mut dyn FnMut(&EllipsoidState),
) -> Result<FeasibilityRun, EllipsoidError> {
    if !radius.is_positive() || !r.is_positive() {
        return Err(EllipsoidError::NonPositiveRadius);
    }
    if n == 0 {
        let outcome = match oracle.query(&[]) {
            OracleAnswer::Inside => Feasibility::Point(Vec::new()),
            _ => Feasibility::SmallVolume,
        };
        return Ok(FeasibilityRun {
            outcome,
            iterations: 0,
        });
    }
    let budget = iteration_budget(n, radius, r);
    let nn = rat::int((n * n) as i64);
    let inflate = Rational::one() + Rational::one() / (rat::int(8) * &nn);
    let mut state = EllipsoidState {
        center: linalg::zero_vec(n),
        shape: scaled_identity(n, &(radius * radius)),
        precision: 64.max(16 * (n as u32) * (n as u32)),
        iteration: 0,
    };
    while state.iteration <= budget {
        observe(&state);
        let cut = match oracle.query(&state.center) {
            OracleAnswer::Inside => {
                return Ok(FeasibilityRun {
                    outcome: Feasibility::Point(state.center),
                    iterations: state.iteration,
                })
            }
            OracleAnswer::InfeasibleEverywhere => break,
            OracleAnswer::Separated(c) => c,
        };
        if !check_cut(&cut, &state.center) {
            return Err(EllipsoidError::OracleContract);
        }
        let cut = integer_cut(cut);
        let a = &cut.normal;
        let qa = state.shape.mul_vec(a);
        let s2 = linalg::dot(a, &qa);
        let (_, s_hi) = sqrt_bounds(&s2, state.precision + 2).expect("positive definite shape");
        if let Some(off) = &cut.offset {
            // min over E of ⟨a, x⟩ is ⟨a, c⟩ − s
            if linalg::dot(a, &state.center) - &s_hi > *off {
                break;
            }
        }
        state = next_ellipsoid(&state, &qa, &s2, &s_hi, &inflate);
    }
    Ok(FeasibilityRun {
        outcome: Feasibility::SmallVolume,
        iterations: state.iteration,
    })
}

/// Rescales a cut by a positive factor so that its normal is integral.
fn integer_cut(cut: Cut) -> Cut {
    let l = Rational::from_integer(rat::denominator_lcm(&cut.normal));
    if l.is_one() {
        return cut;
    }
    Cut {
        normal: linalg::scale(&cut.normal, &l),
        offset: cut.offset.map(|o| o * &l),
    }
}

fn scaled_identity(n: usize, v: &Rational) -> RatMatrix {
    let mut m = RatMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = v.clone();
    }
    m
}

/// Central-cut update followed by rounding; precision is raised until the
/// rounded ellipsoid provably contains the exact update.
fn next_ellipsoid(
    st: &EllipsoidState,
    qa: &[Rational],
    s2: &Rational,
    s_hat: &Rational,
    inflate: &Rational,
) -> EllipsoidState {
    let n = st.center.len();
    let (step, alpha, beta) = if n == 1 {
        (rat::int(2), Rational::one() / rat::int(4), Rational::zero())
    } else {
        let nr = rat::int(n as i64);
        let alpha = &nr * &nr / (&nr * &nr - Rational::one());
        (&nr + Rational::one(), alpha, rat::int(2) / (&nr + Rational::one()))
    };
    let center_exact: RatVector = st
        .center
        .iter()
        .zip(qa)
        .map(|(c, v)| c - v / (&step * s_hat))
        .collect();
    let mut shape_exact = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = &alpha * (&st.shape[(i, j)] - &beta * &qa[i] * &qa[j] / s2);
            shape_exact[(j, i)] = v.clone();
            shape_exact[(i, j)] = v;
        }
    }
    let t = (inflate - Rational::one()) / rat::int(2);
    // ‖e‖ in the rounded metric may use t/8 of the 1 − 1/√(1+t) ≥ t/4 slack;
    // another t/8 covers using ŝ ≥ s in the center step
    let tol = &t * &t / rat::int(64);
    let mut p = st.precision;
    loop {
        let mut shape = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = inflate * rat::round_to_bits(&shape_exact[(i, j)], p);
                shape[(j, i)] = v.clone();
                shape[(i, j)] = v;
            }
        }
        let center: RatVector = (0..n)
            .map(|i| {
                // quantum ≈ 2^-p · √(shape_ii)
                let e = (log2_floor(&shape_exact[(i, i)]) / 2) - p as i64;
                rat::round_to_quantum_exp(&center_exact[i], -e)
            })
            .collect();
        if contains_update(&shape, &center, &shape_exact, &center_exact, &t, &tol) {
            return EllipsoidState {
                center,
                shape,
                precision: p,
                iteration: st.iteration + 1,
            };
        }
        p += 32;
    }
}

/// `shape ⪰ (1+t)·shape_exact` and `(center − center_exact)ᵀ shape⁻¹ (…) ≤ tol`.
fn contains_update(
    shape: &RatMatrix,
    center: &[Rational],
    shape_exact: &RatMatrix,
    center_exact: &[Rational],
    t: &Rational,
    tol: &Rational,
) -> bool {
    let n = center.len();
    let one_t = Rational::one() + t;
    let mut diff = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            diff[(i, j)] = &shape[(i, j)] - &one_t * &shape_exact[(i, j)];
        }
    }
    match linalg::ldlt_definiteness(&diff) {
        Ok(Definiteness::PositiveDefinite | Definiteness::PositiveSemidefiniteSingular) => {}
        _ => return false,
    }
    let e = linalg::sub(center, center_exact);
    if linalg::is_zero_vec(&e) {
        return true;
    }
    match solve_spd(shape, &e) {
        Some(v) => linalg::dot(&e, &v) <= *tol,
        None => false,
    }
}

fn log2_floor(q: &Rational) -> i64 {
    if q.is_zero() {
        return 0;
    }
    q.numer().bits() as i64 - q.denom().bits() as i64
}

/// Exact solve of `M v = d` by Gaussian elimination with partial pivoting on
/// nonzero entries; `None` when `M` is singular.
fn solve_spd(m: &RatMatrix, d: &[Rational]) -> Option<RatVector> {
    let n = d.len();
    let mut a: Vec<RatVector> = (0..n)
        .map(|i| {
            let mut r = m.row(i).to_vec();
            r.push(d[i].clone());
            r
        })
        .collect();
    for k in 0..n {
        let piv = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(k, piv);
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..=n {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
        }
    }
    let mut x = linalg::zero_vec(n);
    for k in (0..n).rev() {
        let mut s = a[k][n].clone();
        for j in k + 1..n {
            s -= &a[k][j] * &x[j];
        }
        x[k] = s / &a[k][k];
    }
    Some(x)
}
