//! Shared test oracles, deliberately independent of the library's own
//! numerics: the normal CDF here comes from composite Gauss-Legendre
//! quadrature of the density, not from any erfc expansion, so
//! agreement is evidence rather than tautology.
#![allow(dead_code)]

use std::sync::OnceLock;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Legendre polynomial P_n and its derivative at x, by the three-term
/// recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let next = ((2 * k - 1) as f64 * x * p - (k - 1) as f64 * p_prev) / k as f64;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration from the Chebyshev angles.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

fn density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / SQRT_2PI
}

/// Integral of the standard normal density over [a, b] by composite
/// 24-point Gauss-Legendre on panels of width at most 1/4; the
/// integrand is entire, so each panel is exact to machine precision.
fn integrate_density(a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule();
    let panels = (((b - a) / 0.25).ceil() as usize).max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let center = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for (&x, &w) in nodes.iter().zip(weights) {
            panel += w * density(center + half * x);
        }
        total += half * panel;
    }
    total
}

/// Quadrature-backed standard normal CDF, accurate to a few ulps in
/// absolute terms on [-12, 12].
pub fn oracle_phi(x: f64) -> f64 {
    if x >= 0.0 {
        0.5 + integrate_density(0.0, x)
    } else {
        0.5 - integrate_density(x, 0.0)
    }
}

/// Quadrature-backed quantile by bisection on [`oracle_phi`]; valid
/// for p away from the extreme tails (|result| < 12).
pub fn oracle_quantile(p: f64) -> f64 {
    let mut lo = -12.0;
    let mut hi = 12.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if oracle_phi(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
pub fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let m = b.len() as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}
