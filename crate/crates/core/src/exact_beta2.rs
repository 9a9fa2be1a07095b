//! Exact finite-`N` formulas at `β = 2`, where the moduli of the particles
//! are independent scaled χ variables.

use rayon::prelude::*;

use crate::error::{domain, numerical, OcpError, Result};
use crate::quad::ln_integrate_unimodal;
use crate::radial_moments::stability_domain;
use crate::specfun::{ln_lower_gamma, ln_reg_lower_gamma, log_gamma, log_sum_weighted};

/// Below this many terms the sums run on the calling thread.
const PAR_THRESHOLD: u64 = 64;

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || x.is_nan() {
        return Err(domain(format!("x must be positive, got {x}")));
    }
    Ok(())
}

/// Evaluate `f(1..=n)` in order, in parallel for large `n`.
fn ordered_map<T: Send, F: Fn(u64) -> Result<T> + Sync + Send>(n: u64, f: F) -> Result<Vec<T>> {
    if n < PAR_THRESHOLD {
        (1..=n).map(f).collect()
    } else {
        (1..=n).into_par_iter().map(f).collect()
    }
}

/// `ln Pr[max_k |z_k| ≤ x] = Σ_{k=1}^N ln P(k, N x²)`.
pub fn edge_cdf_log(n: u64, x: f64) -> Result<f64> {
    check_n(n)?;
    check_x(x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    let y = n as f64 * x * x;
    let terms = ordered_map(n, |k| ln_reg_lower_gamma(k as f64, y))?;
    Ok(terms.iter().sum())
}

/// Log-density of the maximum modulus:
/// `ln(2Nx) - Nx² + ln CDF + ln Σ_k (Nx²)^{k-1} / γ(k, Nx²)`.
pub fn edge_pdf_log(n: u64, x: f64) -> Result<f64> {
    check_n(n)?;
    check_x(x)?;
    if x.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let nf = n as f64;
    let y = nf * x * x;
    let ln_y = y.ln();
    let pairs = ordered_map(n, |k| {
        let k = k as f64;
        Ok((ln_reg_lower_gamma(k, y)?, (k - 1.0) * ln_y - ln_lower_gamma(k, y)?))
    })?;
    let cdf: f64 = pairs.iter().map(|p| p.0).sum();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok((2.0 * nf * x).ln() - y + cdf + log_sum_weighted(&weights)?)
}

/// Log of the moment generating function `⟨exp(-2N² s Δ^(p))⟩` at `β = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfResult {
    pub s: f64,
    pub log_value: f64,
    pub estimated_relative_error: f64,
}

/// Mode of `φ(v) = ℓv - e^v - c e^{pv/2}` (the integrand after `t = e^v`).
///
/// `φ'` is positive left of the mode and negative right of it for every
/// admissible tilt, so a sign bracket plus safeguarded Newton suffices.
fn log_mode(ell: f64, p: f64, c: f64) -> Result<f64> {
    let half_p = 0.5 * p;
    let d1 = |v: f64| ell - v.exp() - c * half_p * (half_p * v).exp();
    let d2 = |v: f64| -v.exp() - c * half_p * half_p * (half_p * v).exp();
    let start = ell.ln();
    let (mut lo, mut hi) = (start, start);
    let mut step = 1.0;
    if d1(start) > 0.0 {
        while d1(hi) > 0.0 {
            lo = hi;
            hi += step;
            step *= 2.0;
            if step > 1e6 {
                return Err(numerical(format!("no mode for ell = {ell}, p = {p}, c = {c}")));
            }
        }
    } else {
        while d1(lo) <= 0.0 {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if step > 1e6 {
                return Err(numerical(format!("no mode for ell = {ell}, p = {p}, c = {c}")));
            }
        }
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = d1(v);
        if g > 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let h = d2(v);
        let mut next = if h < 0.0 { v - g / h } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-15 * (1.0 + v.abs()) || hi - lo <= 1e-15 * (1.0 + v.abs()) {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

/// `ln ∫₀^∞ t^{ℓ-1} exp(-t - 2sN(t/N)^{p/2}) dt`.
fn ln_mgf_factor(ell: u64, n: u64, p: f64, s: f64) -> Result<(f64, f64)> {
    let l = ell as f64;
    let c = 2.0 * s * (n as f64).powf(1.0 - 0.5 * p);
    let half_p = 0.5 * p;
    let phi = |v: f64| l * v - v.exp() - c * (half_p * v).exp();
    let wrap = |e: OcpError| numerical(format!("MGF factor ell = {ell} (n = {n}, p = {p}, s = {s}): {e}"));
    let mode = log_mode(l, p, c).map_err(wrap)?;
    let curvature = mode.exp() + c * half_p * half_p * (half_p * mode).exp();
    let scale = if curvature > 0.0 { curvature.sqrt().recip().min(1.0) } else { 1.0 };
    let r = ln_integrate_unimodal(phi, mode, scale, mode - 1e4, mode + 1e4).map_err(wrap)?;
    Ok((r.ln_value, r.rel_error))
}

/// `ln ⟨exp(-2N² s Δ^(p))⟩ = Σ_ℓ [ln I_ℓ - ln Γ(ℓ)]`, each `I_ℓ` integrated
/// around its mode in log space.
pub fn mgf_log(n: u64, p: f64, s: f64) -> Result<MgfResult> {
    check_n(n)?;
    stability_domain(p)?.check(s)?;
    if s == 0.0 {
        return Ok(MgfResult { s, log_value: 0.0, estimated_relative_error: 0.0 });
    }
    let parts = ordered_map(n, |ell| {
        let (ln_i, rel) = ln_mgf_factor(ell, n, p, s)?;
        Ok((ln_i - log_gamma(ell as f64)?, rel, ln_i.abs()))
    })?;
    let log_value: f64 = parts.iter().map(|x| x.0).sum();
    // Each factor's relative error is an absolute error on its log.
    let abs_err: f64 = parts.iter().map(|x| x.1 + f64::EPSILON * x.2).sum();
    let estimated_relative_error = if log_value == 0.0 { abs_err } else { abs_err / log_value.abs() };
    Ok(MgfResult { s, log_value, estimated_relative_error })
}

/// `⟨Δ^(p)⟩ = N^{-1-p/2} Σ_{k=1}^N Γ(k + p/2) / Γ(k)`.
pub fn exact_moment(n: u64, p: f64) -> Result<f64> {
    check_n(n)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("p must be positive and finite, got {p}")));
    }
    let ln_scale = (1.0 + 0.5 * p) * (n as f64).ln();
    let terms = ordered_map(n, |k| {
        let k = k as f64;
        Ok((log_gamma(k + 0.5 * p)? - log_gamma(k)? - ln_scale).exp())
    })?;
    Ok(terms.iter().sum())
}

/// Exact variance of `Δ^(p)`: the moduli are independent, so it is
/// `N^{-2-p} Σ_k [Γ(k+p)/Γ(k) - (Γ(k+p/2)/Γ(k))²]`.
pub fn exact_variance(n: u64, p: f64) -> Result<f64> {
    check_n(n)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("p must be positive and finite, got {p}")));
    }
    let ln_scale = (2.0 + p) * (n as f64).ln();
    let terms = ordered_map(n, |k| {
        let k = k as f64;
        let lg = log_gamma(k)?;
        let second = (log_gamma(k + p)? - lg - ln_scale).exp();
        let first = (log_gamma(k + 0.5 * p)? - lg - 0.5 * ln_scale).exp();
        Ok(second - first * first)
    })?;
    Ok(terms.iter().sum())
}

/// Largest allowed disagreement between the two routes to `ln J_N`.
pub const J_AGREEMENT: f64 = 1e-8;

/// `ln J_N(x, ξ)` with `J_N(x, ξ) = ∫₀^{x²} t^{-1} e^{-N(t - ξ ln t)} dt`.
///
/// Evaluated by quadrature and through `J_N = N^{-Nξ} γ(Nξ, Nx²)`; the
/// second value is returned once the two agree.
pub fn j_integral(n: u64, x: f64, xi: f64) -> Result<f64> {
    check_n(n)?;
    if !(x > 0.0 && x <= 1.0) {
        return Err(domain(format!("x must lie in (0, 1], got {x}")));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(domain(format!("xi must lie in (0, 1], got {xi}")));
    }
    let nf = n as f64;
    let upper = (x * x).ln();
    let phi = |v: f64| nf * (xi * v - v.exp());
    let mode = xi.ln().min(upper);
    let scale = (nf * xi).sqrt().recip().min(1.0);
    let quad = ln_integrate_unimodal(phi, mode, scale, mode - 1e4, upper)?.ln_value;
    let identity = -nf * xi * nf.ln() + ln_lower_gamma(nf * xi, nf * x * x)?;
    if (quad - identity).abs() > J_AGREEMENT * identity.abs().max(1.0) {
        return Err(numerical(format!(
            "J integral self-check failed at n = {n}, x = {x}, xi = {xi}: quadrature {quad} vs gamma identity {identity}"
        )));
    }
    Ok(identity)
}

/// Laplace estimate of `ln J_N` when the saddle `t = ξ` lies inside `(0, x²)`.
pub fn j_saddle_interior(n: u64, xi: f64) -> f64 {
    let nf = n as f64;
    -nf * (xi - xi * xi.ln()) + 0.5 * (2.0 * std::f64::consts::PI / (nf * xi)).ln()
}

/// Endpoint estimate of `ln J_N` when `ξ > x²` and the exponent is
/// minimal at `t = x²`.
pub fn j_saddle_boundary(n: u64, x: f64, xi: f64) -> f64 {
    let nf = n as f64;
    let x2 = x * x;
    -nf * (x2 - xi * x2.ln()) - (nf * (xi - x2)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn edge_cdf_examples() {
        let e1 = (-1f64).exp();
        assert!((edge_cdf_log(1, 1.0).unwrap() - (1.0 - e1).ln()).abs() < 1e-15);
        let e2 = (-2f64).exp();
        let want = ((1.0 - e2) * (1.0 - 3.0 * e2)).ln();
        assert!((edge_cdf_log(2, 1.0).unwrap() - want).abs() < 1e-14);
        assert!(edge_cdf_log(7, 50.0).unwrap().abs() < 1e-300);
        assert_eq!(edge_cdf_log(7, f64::INFINITY).unwrap(), 0.0);
        assert!(edge_cdf_log(0, 1.0).is_err());
        assert!(edge_cdf_log(3, 0.0).is_err());
        assert!(edge_cdf_log(3, -1.0).is_err());
    }

    #[test]
    fn edge_cdf_is_monotone_and_nonpositive() {
        for &n in &[1u64, 5, 40, 250] {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..=60 {
                let x = 0.05 * i as f64;
                let v = edge_cdf_log(n, x).unwrap();
                assert!(v <= 0.0 && v >= prev, "n={n} x={x}");
                prev = v;
            }
        }
    }

    #[test]
    fn deep_left_tail_stays_finite() {
        let v = edge_cdf_log(250, 0.3).unwrap();
        assert!(v.is_finite() && v < -3e4, "{v}");
    }

    #[test]
    fn edge_pdf_single_particle() {
        for &x in &[0.01f64, 0.3, 1.0, 2.5, 6.0] {
            let want = (2.0 * x).ln() - x * x;
            assert!((edge_pdf_log(1, x).unwrap() - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }

    #[test]
    fn edge_pdf_matches_derivative_of_cdf() {
        // Differentiated in log form: pdf / CDF = d ln CDF / dx. The CDF
        // itself is too steep in the left tail for a plain central difference.
        for &n in &[2u64, 10, 50, 100] {
            for &x in &[0.3, 0.6, 0.8, 0.95, 1.0, 1.05, 1.2, 1.5, 2.0] {
                let h = 1e-4 / (n as f64 * x).max(1.0);
                let fd = (edge_cdf_log(n, x + h).unwrap() - edge_cdf_log(n, x - h).unwrap()) / (2.0 * h);
                let ratio = (edge_pdf_log(n, x).unwrap() - edge_cdf_log(n, x).unwrap()).exp();
                assert!(rel(ratio, fd) < 1e-6, "n={n} x={x}: {ratio} vs {fd}");
            }
        }
        let (n, x, h) = (10u64, 1.0, 1e-5);
        let fd = (edge_cdf_log(n, x + h).unwrap().exp() - edge_cdf_log(n, x - h).unwrap().exp()) / (2.0 * h);
        assert!(rel(edge_pdf_log(n, x).unwrap().exp(), fd) < 1e-6);
    }

    #[test]
    fn edge_pdf_is_normalized() {
        for &n in &[1u64, 3, 20, 100] {
            let f = |x: f64| if x <= 0.0 { 0.0 } else { edge_pdf_log(n, x).unwrap().exp() };
            let r = integrate(f, 0.0, 1.0, QuadOptions::tol(1e-12, 1e-12)).unwrap().value
                + integrate(f, 1.0, 8.0, QuadOptions::tol(1e-12, 1e-12)).unwrap().value;
            assert!((r - 1.0).abs() < 1e-8, "n={n}: {r}");
        }
    }

    #[test]
    fn mgf_zero_tilt() {
        for &p in &[0.5, 1.0, 2.0, 3.0] {
            assert_eq!(mgf_log(17, p, 0.0).unwrap().log_value, 0.0);
        }
    }

    #[test]
    fn mgf_quadratic_closed_form() {
        for &n in &[1u64, 7, 50, 200] {
            for &s in &[-0.4f64, 0.1, 1.0, 5.0] {
                let nf = n as f64;
                let want = -nf * (nf + 1.0) / 2.0 * (2.0 * s).ln_1p();
                let got = mgf_log(n, 2.0, s).unwrap();
                assert!(rel(got.log_value, want) < 1e-9, "n={n} s={s}: {} vs {want}", got.log_value);
                assert!(got.estimated_relative_error < 1e-9);
            }
        }
    }

    #[test]
    fn mgf_single_particle_p1() {
        // ln(1 - e^{1/4}(√π/2) erfc(1/2)), evaluated with mpmath
        let got = mgf_log(1, 1.0, 0.5).unwrap().log_value;
        assert!((got - 0.454_358_639_2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn mgf_negative_tilts_below_two() {
        for &p in &[0.5, 1.0, 1.5] {
            for &s in &[-3.0, -0.5] {
                let r = mgf_log(30, p, s).unwrap();
                assert!(r.log_value > 0.0 && r.log_value.is_finite());
            }
        }
    }

    #[test]
    fn mgf_rejects_unstable_tilts() {
        assert!(matches!(mgf_log(10, 2.0, -0.5), Err(OcpError::Stability { .. })));
        assert!(matches!(mgf_log(10, 3.0, -0.1), Err(OcpError::Stability { .. })));
    }

    #[test]
    fn mgf_slope_at_zero_is_minus_twice_the_mean() {
        let h = 1e-6;
        for &(n, p) in &[(10u64, 1.0), (25, 0.5), (40, 3.0), (12, 2.0)] {
            let slope = if p > 2.0 {
                // s = 0 closes Ω_p: one-sided second-order difference
                let f1 = mgf_log(n, p, h).unwrap().log_value;
                let f2 = mgf_log(n, p, 2.0 * h).unwrap().log_value;
                (4.0 * f1 - f2) / (2.0 * h)
            } else {
                (mgf_log(n, p, h).unwrap().log_value - mgf_log(n, p, -h).unwrap().log_value) / (2.0 * h)
            };
            let want = -2.0 * (n * n) as f64 * exact_moment(n, p).unwrap();
            assert!(rel(slope, want) < 1e-5, "n={n} p={p}: {slope} vs {want}");
        }
    }

    #[test]
    fn exact_moment_examples() {
        assert!((exact_moment(1, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((exact_moment(10, 2.0).unwrap() - 0.55).abs() < 1e-14);
        for &p in &[0.5, 1.0, 3.0] {
            let m = exact_moment(100_000, p).unwrap();
            assert!((m - 2.0 / (2.0 + p)).abs() < 1e-4, "p={p}: {m}");
        }
        // Γ(k+1)/Γ(k) = k and Γ(k+2)/Γ(k) = k(k+1)
        let n = 10u64;
        let var = exact_variance(n, 2.0).unwrap();
        let want: f64 = (1..=n).map(|k| (k * (k + 1) - k * k) as f64).sum::<f64>() / 1e4;
        assert!((var - want).abs() < 1e-15);
    }

    #[test]
    fn j_integral_examples() {
        let want = (1.0 - (-1f64).exp()).ln();
        assert!((j_integral(1, 1.0, 1.0).unwrap() - want).abs() < 1e-13);
        assert!(j_integral(10, 1.1, 0.5).is_err());
        assert!(j_integral(10, 0.5, 0.0).is_err());
    }

    #[test]
    fn j_integral_paths_agree() {
        for &n in &[10u64, 50, 200] {
            for i in 1..=10 {
                for j in 1..=10 {
                    let (x, xi) = (0.1 * i as f64, 0.1 * j as f64);
                    j_integral(n, x, xi).unwrap_or_else(|e| panic!("n={n} x={x} xi={xi}: {e}"));
                }
            }
        }
    }

    #[test]
    fn j_integral_saddle_regimes() {
        // interior: ξ < x²
        let (x, xi) = (0.9, 0.4);
        let mut prev = f64::INFINITY;
        for &n in &[100u64, 1000, 10_000] {
            let gap = (j_integral(n, x, xi).unwrap() - j_saddle_interior(n, xi)).abs() / n as f64;
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-6);
        // boundary: ξ > x²
        let (x, xi) = (0.5, 0.6);
        let mut prev = f64::INFINITY;
        for &n in &[100u64, 1000, 10_000] {
            let gap = (j_integral(n, x, xi).unwrap() - j_saddle_boundary(n, x, xi)).abs() / n as f64;
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-6);
    }
}
