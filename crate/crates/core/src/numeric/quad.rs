//! Quadrature rules: adaptive Simpson for kernel integrals and composite
//! Gauss-Legendre for smooth integrands and discretized measures.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex scalars.
pub trait Quadrable: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Quadrable for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Quadrable for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

const MAX_DEPTH: u32 = 48;
const INITIAL_PANELS: usize = 8;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into a few panels so that narrow features are
/// not skipped by the initial five-point sample.
pub fn adaptive_simpson<T, F>(f: F, a: f64, b: f64, tol: f64) -> Result<T>
where
    T: Quadrable,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature { a, b });
    }
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let h = (hi - lo) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = T::zero();
    for k in 0..INITIAL_PANELS {
        let x0 = lo + h * k as f64;
        let x1 = if k + 1 == INITIAL_PANELS { hi } else { x0 + h };
        let fa = f(x0);
        let fm = f(0.5 * (x0 + x1));
        let fb = f(x1);
        let whole = simpson(x0, x1, fa, fm, fb);
        total = total + refine(&f, x0, x1, fa, fm, fb, whole, panel_tol, MAX_DEPTH);
    }
    if !total.is_finite_value() {
        return Err(Error::Quadrature { a, b });
    }
    Ok(total * sign)
}

/// Adaptive Simpson over `[a, b]` with the interval split at every interior
/// breakpoint. Kinks of the integrand should be passed as breakpoints.
pub fn adaptive_simpson_split<T, F>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> Result<T>
where
    T: Quadrable,
    F: Fn(f64) -> T,
{
    let cuts = interior_cuts(a, b, breakpoints);
    let pieces = cuts.len() - 1;
    let mut total = T::zero();
    for w in cuts.windows(2) {
        total = total + adaptive_simpson(&f, w[0], w[1], tol / pieces as f64)?;
    }
    Ok(total)
}

/// Sorted cut points `a, (breakpoints strictly inside), b`.
pub fn interior_cuts(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    cuts.extend(inner);
    cuts.push(b);
    cuts
}

fn simpson<T: Quadrable>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn refine<T, F>(f: &F, a: f64, b: f64, fa: T, fm: T, fb: T, whole: T, tol: f64, depth: u32) -> T
where
    T: Quadrable,
    F: Fn(f64) -> T,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    let err = delta.magnitude();
    if !err.is_finite() {
        return left + right;
    }
    if depth == 0 || err <= 15.0 * tol || (m - a) <= f64::EPSILON * m.abs().max(1.0) * 4.0 {
        return left + right + delta * (1.0 / 15.0);
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, f: F) -> T
    where
        T: Quadrable,
        F: Fn(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + f(mid + half * x) * (w * half))
    }

    /// Composite rule with `panels` equal panels.
    pub fn integrate_composite<T, F>(&self, a: f64, b: f64, panels: usize, f: F) -> T
    where
        T: Quadrable,
        F: Fn(f64) -> T,
    {
        let h = (b - a) / panels as f64;
        (0..panels).fold(T::zero(), |acc, k| {
            let x0 = a + h * k as f64;
            acc + self.integrate(x0, x0 + h, &f)
        })
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite Gauss-Legendre rule on `[a, b]`.
///
/// `grading` extra levels of geometrically shrinking panels (ratio 0.15) are
/// placed against both endpoints; this resolves square-root endpoint
/// behaviour of measures such as the semicircle.
pub fn composite_nodes(a: f64, b: f64, panels: usize, per_panel: usize, grading: usize) -> (Vec<f64>, Vec<f64>) {
    const RATIO: f64 = 0.15;
    let rule = GaussLegendre::new(per_panel);
    let h = (b - a) / panels as f64;
    let mut edges = Vec::with_capacity(panels + 2 * grading + 1);
    edges.push(a);
    if grading > 0 && panels >= 2 {
        let mut left = Vec::with_capacity(grading);
        let mut w = h;
        for _ in 0..grading {
            w *= RATIO;
            left.push(a + w);
        }
        left.reverse();
        edges.extend(left);
        for k in 1..panels {
            edges.push(a + h * k as f64);
        }
        let mut w = h;
        let mut right = Vec::with_capacity(grading);
        for _ in 0..grading {
            w *= RATIO;
            right.push(b - w);
        }
        // The last uniform panel is [b - h, b]; insert graded edges inside it.
        edges.extend(right);
    } else {
        for k in 1..panels {
            edges.push(a + h * k as f64);
        }
    }
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut nodes = Vec::with_capacity((edges.len() - 1) * per_panel);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for e in edges.windows(2) {
        let half = 0.5 * (e[1] - e[0]);
        let mid = 0.5 * (e[0] + e[1]);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push(mid + half * x);
            weights.push(w * half);
        }
    }
    (nodes, weights)
}

/// Bisection for a root of a monotone function with `f(lo) <= 0 <= f(hi)`
/// (or the reverse). Stops when `|f| < ftol` or the bracket collapses.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, ftol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bisection bracket [{lo}, {hi}] does not contain a root"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < ftol || (hi - lo) <= f64::EPSILON * mid.abs() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
