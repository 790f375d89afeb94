//! Gauss-Legendre quadrature with adaptive bisection.

use std::sync::OnceLock;

/// Fixed rule order used by [`Adaptive`].
pub const ORDER: usize = 10;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// found by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// One application of the fixed rule on `[a, b]`.
#[inline]
pub fn fixed<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for i in 0..ORDER {
        s += w[i] * f(mid + half * x[i]);
    }
    s * half
}

/// Adaptive Gauss-Legendre integrator.
///
/// An interval is accepted when the rule on the whole interval agrees with
/// the sum over its two halves to `rel_tol` (relative) or `abs_tol`.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Adaptive {
    pub fn new(rel_tol: f64, max_depth: u32) -> Self {
        Self {
            rel_tol,
            abs_tol: 0.0,
            max_depth,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let whole = fixed(&mut f, a, b);
        self.refine(&mut f, a, b, whole, 0)
    }

    fn refine<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = fixed(f, a, m);
        let right = fixed(f, m, b);
        let split = left + right;
        let err = (split - whole).abs();
        if err <= self.rel_tol * split.abs() || err <= self.abs_tol || depth >= self.max_depth {
            if depth >= self.max_depth && err > self.rel_tol * split.abs() && err > self.abs_tol {
                log::debug!("quadrature depth limit on [{a}, {b}], err {err:.3e}");
            }
            return split;
        }
        self.refine(f, a, m, left, depth + 1) + self.refine(f, m, b, right, depth + 1)
    }
}
