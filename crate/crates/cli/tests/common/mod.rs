//! Reference computations written independently of the solver: exact
//! rational elimination, Sturm sequences, vertex enumeration, and a
//! floating-point Newton minimizer.

#![allow(dead_code)]

use convexpoly::linalg::RatMatrix;
use convexpoly::lp::Polyhedron;
use convexpoly::polynomial::SparsePolynomial;
use convexpoly::rat::{frac, int, Rational};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Vector = Vec<Rational>;

// ---------------------------------------------------------------- elimination

/// Rank by exact Gaussian elimination.
pub fn rank(rows: &[Vector]) -> usize {
    let mut a: Vec<Vector> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..a.len() {
            let f = &a[i][c] / &a[r][c];
            for j in c..cols {
                let v = &f * &a[r][j];
                a[i][j] -= v;
            }
        }
        r += 1;
    }
    r
}

pub fn det(m: &[Vector]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            let f = &a[i][c] / &a[c][c];
            for j in c..n {
                let v = &f * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    d
}

/// Unique solution of a square system, if any.
pub fn solve_square(m: &[Vector], rhs: &[Rational]) -> Option<Vector> {
    let n = m.len();
    let mut a: Vec<Vector> = m
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, c);
        let piv = a[c][c].clone();
        for j in c..=n {
            a[c][j] = &a[c][j] / &piv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..=n {
                    let v = &f * &a[c][j];
                    a[i][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Rational::zero(), |s, v| s + v)
}

pub fn mat_rows(m: &RatMatrix) -> Vec<Vector> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

// ------------------------------------------------------- polynomial helpers

/// Exact Hessian by term-wise differentiation.
pub fn hessian(f: &SparsePolynomial, x: &[Rational]) -> Vec<Vector> {
    let n = f.n_vars();
    let mut h = vec![vec![Rational::zero(); n]; n];
    for (alpha, c) in f.terms() {
        let e = alpha.exponents();
        for i in 0..n {
            for j in 0..n {
                let mut ex: Vec<i64> = e.iter().map(|&v| v as i64).collect();
                let mut coef = c.clone() * int(ex[i]);
                ex[i] -= 1;
                coef *= int(ex[j]);
                ex[j] -= 1;
                if coef.is_zero() || ex.iter().any(|&v| v < 0) {
                    continue;
                }
                let mut t = coef;
                for (xv, &p) in x.iter().zip(&ex) {
                    for _ in 0..p {
                        t *= xv;
                    }
                }
                h[i][j] += t;
            }
        }
    }
    h
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap()
}

/// Value, gradient and Hessian of `f` in floating point.
pub fn eval_f64(f: &SparsePolynomial, x: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len();
    let mut v = 0.0;
    let mut g = vec![0.0; n];
    let mut h = vec![vec![0.0; n]; n];
    let mono = |e: &[i64]| -> f64 {
        e.iter()
            .zip(x)
            .map(|(&p, &xv)| if p < 0 { 0.0 } else { xv.powi(p as i32) })
            .product()
    };
    for (alpha, c) in f.terms() {
        let c = to_f64(c);
        let e: Vec<i64> = alpha.exponents().iter().map(|&v| v as i64).collect();
        v += c * mono(&e);
        for i in 0..n {
            if e[i] == 0 {
                continue;
            }
            let mut ei = e.clone();
            ei[i] -= 1;
            g[i] += c * e[i] as f64 * mono(&ei);
            for j in 0..n {
                if ei[j] == 0 {
                    continue;
                }
                let mut eij = ei.clone();
                eij[j] -= 1;
                h[i][j] += c * e[i] as f64 * ei[j] as f64 * mono(&eij);
            }
        }
    }
    (v, g, h)
}

/// Global minimizer of a strictly convex `f` on `ℝⁿ`, `n ≤ 2`: best point of a
/// grid on `[−box_half, box_half]ⁿ`, then damped Newton.
pub fn newton_minimizer(f: &SparsePolynomial, box_half: f64) -> Vec<f64> {
    let n = f.n_vars();
    let steps = 160usize;
    let h = 2.0 * box_half / steps as f64;
    let mut best = vec![0.0; n];
    let mut best_v = f64::INFINITY;
    let total = (steps + 1).pow(n as u32);
    for idx in 0..total {
        let mut k = idx;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let c = k % (steps + 1);
                k /= steps + 1;
                -box_half + h * c as f64
            })
            .collect();
        let v = eval_f64(f, &x).0;
        if v < best_v {
            best_v = v;
            best = x;
        }
    }
    let mut x = best;
    for _ in 0..500 {
        let (v, g, hm) = eval_f64(f, &x);
        let gn = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if gn < 1e-13 {
            break;
        }
        let dir = match n {
            1 if hm[0][0] > 1e-300 => vec![-g[0] / hm[0][0]],
            2 => {
                let d = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
                if d.abs() > 1e-300 {
                    vec![
                        -(hm[1][1] * g[0] - hm[0][1] * g[1]) / d,
                        -(-hm[1][0] * g[0] + hm[0][0] * g[1]) / d,
                    ]
                } else {
                    g.iter().map(|a| -a).collect()
                }
            }
            _ => g.iter().map(|a| -a).collect(),
        };
        let mut t = 1.0;
        loop {
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            if eval_f64(f, &y).0 <= v || t < 1e-12 {
                x = y;
                break;
            }
            t /= 2.0;
        }
    }
    x
}

// ---------------------------------------------------------------- Sturm

/// Dense univariate polynomial, lowest degree first.
pub type Univariate = Vec<Rational>;

fn trim(p: &mut Univariate) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_rem(a: &Univariate, b: &Univariate) -> Univariate {
    let mut r = a.clone();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            let v = &f * c;
            r[i + shift] -= v;
        }
        trim(&mut r);
    }
    r
}

fn poly_eval(p: &Univariate, x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &Univariate) -> Univariate {
    p.iter().enumerate().skip(1).map(|(i, c)| c * int(i as i64)).collect()
}

/// Characteristic polynomial `det(tI − M)` by Faddeev-LeVerrier.
pub fn char_poly(m: &[Vector]) -> Univariate {
    let n = m.len();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let ident = |i: usize, j: usize| if i == j { Rational::one() } else { Rational::zero() };
    let mut mk: Vec<Vector> = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        // M_k = M·M_{k−1} + c_{n−k+1}·I
        let prev = mk.clone();
        for i in 0..n {
            for j in 0..n {
                let mut s = Rational::zero();
                for l in 0..n {
                    s += &m[i][l] * &prev[l][j];
                }
                mk[i][j] = s + &coeffs[n - k + 1] * ident(i, j);
            }
        }
        let mut tr = Rational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &m[i][l] * &mk[l][i];
            }
        }
        coeffs[n - k] = -tr / int(k as i64);
    }
    coeffs
}

fn sign_changes(seq: &[Rational]) -> usize {
    let signs: Vec<bool> = seq.iter().filter(|v| !v.is_zero()).map(|v| v.is_positive()).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots of `p` in `(−∞, t]`.
pub fn roots_at_most(p: &Univariate, t: &Rational) -> usize {
    let mut p = p.clone();
    trim(&mut p);
    if p.len() <= 1 {
        return 0;
    }
    let mut chain = vec![p.clone(), derivative(&p)];
    loop {
        let r = poly_rem(&chain[chain.len() - 2], &chain[chain.len() - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    let at_neg_inf: Vec<Rational> = chain
        .iter()
        .map(|q| {
            let lead = q.last().unwrap().clone();
            if (q.len() - 1) % 2 == 1 {
                -lead
            } else {
                lead
            }
        })
        .collect();
    let at_t: Vec<Rational> = chain.iter().map(|q| poly_eval(q, t)).collect();
    sign_changes(&at_neg_inf) - sign_changes(&at_t)
}

/// `lambda ≤ λ_min(M)` for symmetric `M`: no eigenvalue lies strictly below
/// `lambda`.
pub fn is_eigen_lower_bound(m: &[Vector], lambda: &Rational) -> bool {
    let p = char_poly(m);
    let below = roots_at_most(&p, lambda);
    if poly_eval(&p, lambda).is_zero() {
        below <= 1 && roots_at_most(&p, &(lambda - frac(1, 1_000_000_000))) == 0
    } else {
        below == 0
    }
}

// ------------------------------------------------- univariate minimum bracket

/// Bracket `[lo, hi]` of width below `2^-bits` around the root of `g`, given
/// `g(lo) < 0 < g(hi)`.
pub fn bisect_root(g: &SparsePolynomial, mut lo: Rational, mut hi: Rational, bits: u32) -> (Rational, Rational) {
    let width = convexpoly::rat::pow2(-(bits as i64));
    while &hi - &lo > width {
        let mid = (&lo + &hi) / int(2);
        if g.eval(&[mid.clone()]).unwrap().is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Certified lower bound on the minimum of a convex univariate `f` whose
/// minimizer lies in `[lo, hi]`: `f(x*) ≥ f(c) + f′(c)(x* − c)`.
pub fn univariate_min_lower_bound(f: &SparsePolynomial, lo: &Rational, hi: &Rational) -> Rational {
    let c = (lo + hi) / int(2);
    let fc = f.eval(&[c.clone()]).unwrap();
    let d = f.partial_derivative(0).unwrap().eval(&[c]).unwrap();
    fc - d.abs() * (hi - lo)
}

// --------------------------------------------------------- vertex enumeration

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if m < k {
        return vec![];
    }
    let mut out = subsets(m - 1, k);
    for mut s in subsets(m - 1, k - 1) {
        s.push(m - 1);
        out.push(s);
    }
    out
}

/// All vertices of a pointed polyhedron by brute force over row subsets.
pub fn vertices(p: &Polyhedron) -> Vec<Vector> {
    let n = p.n();
    let mut out: Vec<Vector> = Vec::new();
    for s in subsets(p.m(), n) {
        let rows: Vec<Vector> = s.iter().map(|&i| p.a.row(i).to_vec()).collect();
        let rhs: Vec<Rational> = s.iter().map(|&i| p.b[i].clone()).collect();
        if let Some(x) = solve_square(&rows, &rhs) {
            if p.contains(&x) && !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

/// Minimum of `cᵀx` over a bounded polyhedron and the optimal vertices.
pub fn brute_force_lp(c: &[Rational], p: &Polyhedron) -> (Rational, Vec<Vector>) {
    let vs = vertices(p);
    let best = vs.iter().map(|v| dot(c, v)).min().expect("bounded nonempty polytope");
    let opt = vs.into_iter().filter(|v| dot(c, v) == best).collect();
    (best, opt)
}

// ---------------------------------------------------------- instance makers

pub fn rand_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    frac(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

/// `Σ cᵢ·(aᵢ·x + bᵢ)^{2pᵢ} + gᵀx` with integer `aᵢ`, `forms` terms.
pub fn convex_instance(rng: &mut ChaCha8Rng, n: usize, forms: usize, max_deg: u32, linear: bool) -> SparsePolynomial {
    let mut f = SparsePolynomial::zero(n);
    for _ in 0..forms {
        let mut a: Vector = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
        if a.iter().all(|v| v.is_zero()) {
            a[rng.gen_range(0..n)] = int(1);
        }
        let b = rand_rational(rng, 4, 3);
        let e = 2 * rng.gen_range(1..=max_deg / 2);
        let c = frac(rng.gen_range(1..=5), rng.gen_range(1..=3));
        let form = SparsePolynomial::affine(b, &a);
        f = &f + &form.pow(e).scale(&c);
    }
    if linear {
        let g: Vector = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
        f = &f + &SparsePolynomial::affine(Rational::zero(), &g);
    }
    f
}

/// Box `[−half, half]ⁿ` cut by `extra` random half-spaces through points at
/// distance at least one from the origin, so the origin is interior.
pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize, half: i64, extra: usize) -> Polyhedron {
    let mut rows: Vec<Vector> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut r = vec![Rational::zero(); n];
            r[i] = int(s);
            rows.push(r);
            rhs.push(int(half));
        }
    }
    for _ in 0..extra {
        let mut a: Vector = (0..n).map(|_| int(rng.gen_range(-4..=4))).collect();
        if a.iter().all(|v| v.is_zero()) {
            a[0] = int(1);
        }
        let l1: i64 = a.iter().map(|v| v.abs().to_integer().to_i64().unwrap()).sum();
        rhs.push(int(rng.gen_range(1..=l1.max(1) * half)));
        rows.push(a);
    }
    Polyhedron::new(RatMatrix::from_rows(n, &rows), rhs).unwrap()
}

pub fn random_int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> RatMatrix {
    let data: Vec<Vector> = (0..rows)
        .map(|_| (0..cols).map(|_| int(rng.gen_range(-bound..=bound))).collect())
        .collect();
    RatMatrix::from_rows(cols, &data)
}
