//! JSON rendering of solver results. Every rational appears as an exact
//! `"p/q"` string next to a 20-significant-digit decimal.

use convexpoly::bounds::{FarkasWitness, RadiusBound};
use convexpoly::ellipsoid::MinimizeDiagnostics;
use convexpoly::linalg::{RatMatrix, RatVector};
use convexpoly::polynomial::PolynomialJson;
use convexpoly::rat::{self, Rational};
use convexpoly::solver::{ConvexityCheck, SolveOutcome};
use convexpoly::structure::StructureWithBound;
use serde_json::{json, Value};

const DECIMAL_DIGITS: usize = 20;

pub fn rational(q: &Rational) -> Value {
    json!({
        "rat": rat::to_fraction_string(q),
        "dec": rat::to_decimal_string(q, DECIMAL_DIGITS),
    })
}

pub fn vector(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

fn opt<T>(v: Option<&T>, f: impl Fn(&T) -> Value) -> Value {
    v.map_or(Value::Null, f)
}

fn matrix(m: &RatMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vector(m.row(i))).collect())
}

fn vectors(vs: &[RatVector]) -> Value {
    Value::Array(vs.iter().map(|v| vector(v)).collect())
}

fn minimize_diagnostics(d: &MinimizeDiagnostics) -> Value {
    json!({
        "reduced_dim": d.reduced_dim,
        "working_radius": rational(&d.working_radius),
        "lipschitz": rational(&d.lipschitz),
        "volume_threshold": rational(&d.volume_threshold),
        "bisection_steps": d.bisection_steps,
        "ellipsoid_iterations": d.ellipsoid_iterations,
        "tau_low": rational(&d.tau_low),
        "tau_high": rational(&d.tau_high),
    })
}

pub fn solve_outcome(o: &SolveOutcome) -> Value {
    let d = &o.diagnostics;
    json!({
        "status": o.status.as_str(),
        "point": opt(o.point.as_ref(), |v| vector(v)),
        "value": opt(o.value.as_ref(), rational),
        "radius": opt(o.radius.as_ref(), rational),
        "ray": opt(o.ray.as_ref(), |v| vector(v)),
        "diagnostics": {
            "n": d.n,
            "k": d.k,
            "has_linear_part": d.has_linear_part,
            "mu": opt(d.mu.as_ref(), rational),
            "definite_point": opt(d.definite_point.as_ref(), |v| vector(v)),
            "ray_origin": opt(d.ray_origin.as_ref(), |v| vector(v)),
            "b_u": opt(d.b_u.as_ref(), rational),
            "b_w": opt(d.b_w.as_ref(), rational),
            "ellipsoid": opt(d.minimize.as_ref(), minimize_diagnostics),
        },
    })
}

pub fn structure(s: &StructureWithBound) -> Value {
    let d = &s.decomposition;
    let bound = s.bound.as_ref().map(|b| {
        json!({
            "a": vector(&b.a),
            "value": rational(&b.value),
            "grad": vector(&b.grad),
            "lambda_hat": rational(&b.lambda_hat),
            "quad_coeff": rational(&b.quad_coeff),
            "mu": rational(&b.mu),
        })
    });
    json!({
        "status": "Decomposed",
        "n": d.n(),
        "k": d.k(),
        "U": matrix(&d.u),
        "w": vector(&d.w),
        "kernel_basis": vectors(&d.kernel_basis),
        "fhat": serde_json::to_value(PolynomialJson::from_polynomial(&d.fhat))
            .expect("polynomial serializes"),
        "lower_bound": bound.unwrap_or(Value::Null),
    })
}

pub fn radius(rb: &RadiusBound) -> Value {
    json!({
        "status": "BoundedBelow",
        "radius": rational(&rb.r),
        "b_u": rational(&rb.b_u),
        "b_w": rational(&rb.b_w),
        "b_uw": rational(&rb.b_uw),
    })
}

pub fn unbounded(ray: &[Rational], origin: &[Rational]) -> Value {
    json!({
        "status": "Unbounded",
        "ray": vector(ray),
        "ray_origin": vector(origin),
    })
}

pub fn witness(w: &FarkasWitness) -> Value {
    json!({
        "status": "BoundedBelow",
        "lambda": vector(&w.lambda),
        "z": vector(&w.z),
    })
}

pub fn convexity(c: &ConvexityCheck, trials: usize) -> Value {
    match c {
        ConvexityCheck::NoViolation => json!({"status": "NoViolation", "trials": trials}),
        ConvexityCheck::ViolationAt(x) => {
            json!({"status": "ViolationAt", "trials": trials, "point": vector(x)})
        }
    }
}

pub fn status(s: &str) -> Value {
    json!({ "status": s })
}
