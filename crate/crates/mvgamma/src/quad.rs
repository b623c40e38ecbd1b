//! Adaptive quadrature on finite and semi-infinite intervals.
//!
//! Gauss-Legendre nodes are computed at startup by Newton iteration on the
//! Legendre polynomials, so no coefficient tables are carried around. The
//! adaptive driver bisects until the two-level estimate stabilizes.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const GL_ORDER: usize = 20;
const MAX_DEPTH: usize = 48;

struct GlRule {
    nodes: [f64; GL_ORDER],
    weights: [f64; GL_ORDER],
}

fn gl_rule() -> &'static GlRule {
    static RULE: OnceLock<GlRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GlRule { nodes, weights }
    })
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes and weights of arbitrary order, mapped to (0, 1).
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes.push(0.5 * (x + 1.0));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn gl_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let rule = gl_rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..GL_ORDER {
        acc += rule.weights[i] * f(c + h * rule.nodes[i]);
    }
    acc * h
}

// Returns (integral, accumulated error estimate). Leaves below the local
// tolerance or at the depth cap are accepted and their residual error is
// carried up; the top level decides against the global budget.
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let left = gl_panel(f, a, c);
    let right = gl_panel(f, c, b);
    let err = (left + right - whole).abs();
    if err <= tol || depth >= MAX_DEPTH {
        return (left + right, err);
    }
    let (lv, le) = adapt(f, a, c, left, 0.5 * tol, depth + 1);
    let (rv, re) = adapt(f, c, b, right, 0.5 * tol, depth + 1);
    (lv + rv, le + re)
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let whole = gl_panel(&f, a, b);
    let (value, err) = adapt(&f, a, b, whole, tol, 0);
    if err > tol * 1.0_f64.max(value.abs()) {
        return Err(Error::QuadratureFailure {
            tol,
            estimate: value,
            error: err,
        });
    }
    Ok(value)
}

/// Adaptive integral of `f` over `(a, infinity)` via x = a + u/(1-u).
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64> {
    let g = move |u: f64| {
        let one_minus = 1.0 - u;
        if one_minus <= 0.0 {
            return 0.0;
        }
        let x = a + u / one_minus;
        let jac = 1.0 / (one_minus * one_minus);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}
