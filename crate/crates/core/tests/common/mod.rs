//! Reference computations written independently of the library code.
#![allow(dead_code)]

/// Composite Simpson rule on `[a, b]` with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Φ(x)` by quadrature of the density from 0.
pub fn normal_cdf_quad(x: f64) -> f64 {
    0.5 + simpson(normal_pdf, 0.0, x, 4000)
}

/// Inverse normal CDF by bisection on the quadrature CDF.
pub fn normal_quantile_bisect(p: f64) -> f64 {
    let (mut lo, mut hi) = (-9.0, 9.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_quad(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ln_gamma_half_int(k: u32) -> f64 {
    // Γ(k/2) for positive integer k via the recurrences Γ(1) = 1, Γ(1/2) = √π.
    let mut g: f64 = if k.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut a = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while a < k as f64 / 2.0 - 1e-12 {
        g *= a;
        a += 1.0;
    }
    g.ln()
}

pub fn chi2_pdf(x: f64, df: u32) -> f64 {
    if x <= 0.0 {
        return if df == 2 { 0.5 } else { 0.0 };
    }
    let k = df as f64 / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * 2f64.ln() - ln_gamma_half_int(df)).exp()
}

/// `P(χ²_df > x)` by quadrature of the density from `x` to far in the tail.
pub fn chi2_tail_quad(x: f64, df: u32) -> f64 {
    let upper = x + 40.0 + 20.0 * df as f64;
    simpson(|t| chi2_pdf(t, df), x, upper, 20_000)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Long-run variance of the sample mean, `(γ₀ + 2Σ_{k≤lag} w_k γ_k)/n`, with Bartlett weights.
pub fn bartlett_mean_variance(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mu = mean(x);
    let gamma = |k: usize| (k..n).map(|t| (x[t] - mu) * (x[t - k] - mu)).sum::<f64>() / n as f64;
    let mut lrv = gamma(0);
    for k in 1..=lag {
        lrv += 2.0 * (1.0 - k as f64 / (lag as f64 + 1.0)) * gamma(k);
    }
    lrv / n as f64
}

/// Two-state covariance of `(d_t, d_t·1{s_t = 1})` from first principles:
/// `E[zz'] - E[z]E[z]'` with `d | s=1 ~ (Δ₁, σ²)` and `d | s=2 ~ (Δ₂, σ²)`.
pub fn two_state_sigma(delta1: f64, delta2: f64, p: f64, sigma2: f64) -> [[f64; 2]; 2] {
    let e_d = p * delta1 + (1.0 - p) * delta2;
    let e_d2 = p * (sigma2 + delta1 * delta1) + (1.0 - p) * (sigma2 + delta2 * delta2);
    let e_z2 = p * delta1;
    let e_z2sq = p * (sigma2 + delta1 * delta1);
    [
        [e_d2 - e_d * e_d, e_z2sq - e_d * e_z2],
        [e_z2sq - e_d * e_z2, e_z2sq - e_z2 * e_z2],
    ]
}

/// `n z̄'Σ⁻¹z̄` with `z̄ = (p d̄₁ + (1-p) d̄₂, p d̄₁)` and an explicit 2×2 inverse.
pub fn matrix_wald(d1: f64, d2: f64, n: f64, p: f64, s: [[f64; 2]; 2]) -> f64 {
    let z = [p * d1 + (1.0 - p) * d2, p * d1];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
    n * (z[0] * (inv[0][0] * z[0] + inv[0][1] * z[1]) + z[1] * (inv[1][0] * z[0] + inv[1][1] * z[1]))
}

/// Simple AR(1) generator used by several checks, driven by the library's normal draws.
pub fn ar1(phi: f64, shocks: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(shocks.len());
    let mut prev = shocks[0] / (1.0 - phi * phi).sqrt();
    x.push(prev);
    for &e in &shocks[1..] {
        prev = phi * prev + e;
        x.push(prev);
    }
    x
}
