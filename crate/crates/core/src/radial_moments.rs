//! Equilibrium measure of the gas in the tilted potential
//! `V_s(r) = r²/2 + s r^p`, its excess energy `E_p(s)` and entropy `S_p(s)`,
//! and the mean-field energy/entropy functionals used as independent oracles.
//!
//! `E_p(s)` is the leading-order cumulant generating function of the radial
//! moment `Δ^(p)`; `S_p(s)` drives the `1/N` correction.

use std::cell::RefCell;
use std::f64::consts::{LN_2, PI};
use std::fmt;

use crate::error::{domain, numerical, OcpError, Result};
use crate::quad::{integrate, integrate_pieces, QuadOptions};

/// Lower edge of the admissible tilts for `p = 2` (the open end `-1/2`
/// plus a margin where the support radius is still finite).
pub const P2_MIN_TILT: f64 = -0.5 + 1e-6;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("exponent p must be positive and finite, got {p}")));
    }
    Ok(())
}

/// Set `Ω_p` of tilts for which the tilted gas is confined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityDomain {
    pub p: f64,
    /// `-∞`, `-1/2` or `0`.
    pub lower: f64,
    pub lower_closed: bool,
}

impl StabilityDomain {
    pub fn contains(&self, s: f64) -> bool {
        if !s.is_finite() {
            return false;
        }
        if self.lower_closed {
            s >= self.lower
        } else {
            s > self.lower
        }
    }

    /// Membership with the numerical margin used by every operation: for
    /// `p = 2` tilts below `-1/2 + 1e-6` are rejected.
    pub fn admits(&self, s: f64) -> bool {
        self.contains(s) && !(self.p == 2.0 && s < P2_MIN_TILT)
    }

    pub fn check(&self, s: f64) -> Result<()> {
        if self.admits(s) {
            Ok(())
        } else {
            Err(OcpError::Stability { p: self.p, s, domain: self.to_string() })
        }
    }
}

impl fmt::Display for StabilityDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { "[" } else { "(" };
        if self.lower == f64::NEG_INFINITY {
            write!(f, "(-inf, inf)")
        } else {
            write!(f, "{open}{}, inf)", self.lower)
        }
    }
}

pub fn stability_domain(p: f64) -> Result<StabilityDomain> {
    check_p(p)?;
    Ok(if p < 2.0 {
        StabilityDomain { p, lower: f64::NEG_INFINITY, lower_closed: false }
    } else if p == 2.0 {
        StabilityDomain { p, lower: -0.5, lower_closed: false }
    } else {
        StabilityDomain { p, lower: 0.0, lower_closed: true }
    })
}

fn inner_radius(p: f64, s: f64) -> f64 {
    if p < 2.0 && s < 0.0 {
        (-s * p).powf(1.0 / (2.0 - p))
    } else {
        0.0
    }
}

/// Root of `R² + s p R^p = 1` above `lower`, where the left side is below 1.
fn outer_radius_from(p: f64, s: f64, lower: f64) -> Result<f64> {
    let g = |r: f64| r * r + s * p * r.powf(p) - 1.0;
    let dg = |r: f64| 2.0 * r + s * p * p * r.powf(p - 1.0);
    let mut lo = lower;
    let mut hi = lower.max(1.0);
    let mut expansions = 0;
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 || !hi.is_finite() {
            return Err(numerical(format!("could not bracket the outer radius for p = {p}, s = {s}")));
        }
    }
    while hi - lo > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..60 {
        let d = dg(r);
        if d <= 0.0 {
            break;
        }
        let step = g(r) / d;
        let next = (r - step).clamp(lo, hi);
        let done = (next - r).abs() <= 1e-15 * r;
        r = next;
        if done {
            break;
        }
    }
    let resid = g(r);
    if resid.abs() > 1e-12 {
        return Err(numerical(format!("outer radius residual {resid:e} at p = {p}, s = {s}")));
    }
    Ok(r)
}

/// Inner and outer radius `(r_p, R_p)` of the support of the equilibrium measure.
pub fn support_radii(p: f64, s: f64) -> Result<(f64, f64)> {
    stability_domain(p)?.check(s)?;
    let r = inner_radius(p, s);
    let big_r = outer_radius_from(p, s, r)?;
    Ok((r, big_r))
}

/// Rotation-invariant probability measure on the plane, described by its
/// radial mass density `ρ(r)` (so `∫ρ dr` is the continuous mass) and any
/// number of uniformly charged rings.
pub trait RadialMeasure {
    fn radial_density(&self, r: f64) -> f64;
    /// Interval carrying the continuous part.
    fn support(&self) -> (f64, f64);
    /// `(radius, mass)` of singular rings.
    fn rings(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }
}

/// Equilibrium measure `ρ_s(r) = 2r + s p² r^{p-1}` on `[r_p, R_p]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumMeasure {
    pub p: f64,
    pub s: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl EquilibriumMeasure {
    pub fn new(p: f64, s: f64) -> Result<Self> {
        let (r, big_r) = support_radii(p, s)?;
        Ok(EquilibriumMeasure { p, s, inner_radius: r, outer_radius: big_r })
    }

    /// The support is an annulus exactly when `r_p > 0`.
    pub fn is_annulus(&self) -> bool {
        self.inner_radius > 0.0
    }

    pub fn density(&self, r: f64) -> f64 {
        density(self, r)
    }

    pub fn potential(&self) -> Potential {
        Potential::Tilted { p: self.p, s: self.s }
    }
}

impl RadialMeasure for EquilibriumMeasure {
    fn radial_density(&self, r: f64) -> f64 {
        density(self, r)
    }

    fn support(&self) -> (f64, f64) {
        (self.inner_radius, self.outer_radius)
    }
}

/// Radial density of the equilibrium measure; zero off the support.
pub fn density(measure: &EquilibriumMeasure, r: f64) -> f64 {
    if r < measure.inner_radius || r > measure.outer_radius || r <= 0.0 {
        return 0.0;
    }
    let p = measure.p;
    (2.0 * r + measure.s * p * p * r.powf(p - 1.0)).max(0.0)
}

/// Typical value `x(s) = ∫ |z|^p dμ_s` of `Δ^(p)` under the tilt.
pub fn typical_value(p: f64, s: f64) -> Result<f64> {
    let (r, big_r) = support_radii(p, s)?;
    Ok(typical_value_from_radii(p, s, r, big_r))
}

fn typical_value_from_radii(p: f64, s: f64, r: f64, big_r: f64) -> f64 {
    2.0 / (2.0 + p) * (big_r.powf(p + 2.0) - r.powf(p + 2.0))
        + 0.5 * s * p * (big_r.powf(2.0 * p) - r.powf(2.0 * p))
}

fn energy_from_radii(p: f64, s: f64, r: f64, big_r: f64) -> f64 {
    let quartic = (big_r.powi(4) - r.powi(4)) / 8.0;
    let mixed = (4.0 * s + s * p * p) / (4.0 * (p + 2.0)) * (big_r.powf(p + 2.0) - r.powf(p + 2.0));
    let square = s * s * p / 4.0 * (big_r.powf(2.0 * p) - r.powf(2.0 * p));
    let edge = 0.5 * (big_r * big_r / 2.0 + s * big_r.powf(p) - big_r.ln() - 0.75);
    quartic + mixed + square + edge
}

/// Excess electrostatic energy `E_p(s)` of the tilted equilibrium measure
/// over the circular law, from the closed form in `(r_p, R_p)`.
pub fn energy_excess(p: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        stability_domain(p)?.check(s)?;
        return Ok(0.0);
    }
    let (r, big_r) = support_radii(p, s)?;
    Ok(energy_from_radii(p, s, r, big_r))
}

/// `E_p(s) = ∫₀ˢ x(s') ds'`, evaluated by quadrature of the typical value.
pub fn energy_excess_by_integration(p: f64, s: f64) -> Result<f64> {
    stability_domain(p)?.check(s)?;
    let mut failure = None;
    let r = integrate(
        |t| match typical_value(p, t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        s,
        QuadOptions::tol(1e-15, 1e-14),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Analytic continuation of the `s ≥ 0` (disk) branch of `E_p` to `s < 0`.
///
/// For `0 < p < 2` and `s < 0`, `E_p(s)` minus this is the singular part
/// `c_p (-s)^{4/(2-p)}` created by the disk-to-annulus transition.
pub fn energy_analytic_part(p: f64, s: f64) -> Result<f64> {
    stability_domain(p)?.check(s)?;
    if s >= 0.0 || p >= 2.0 {
        return energy_excess(p, s);
    }
    let big_r = outer_radius_from(p, s, 0.0)?;
    Ok(energy_from_radii(p, s, 0.0, big_r))
}

/// `E_1(s) = ½ arcsinh(s/2) - s²/4 + (s/48)[(s²+10)√(s²+4) - |s|³]`.
pub fn energy_excess_p1_closed(s: f64) -> f64 {
    0.5 * (s / 2.0).asinh() - s * s / 4.0 + s / 48.0 * ((s * s + 10.0) * (s * s + 4.0).sqrt() - s.abs().powi(3))
}

/// `E_2(s) = ¼ ln(1 + 2s)`.
pub fn energy_excess_p2_closed(s: f64) -> Result<f64> {
    stability_domain(2.0)?.check(s)?;
    Ok(0.25 * (2.0 * s).ln_1p())
}

/// Excess configurational entropy `S_p(s) = ∫ ρ ln(ρ/r) dr - ln 2`.
pub fn entropy_excess(p: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        stability_domain(p)?.check(s)?;
        return Ok(0.0);
    }
    let m = EquilibriumMeasure::new(p, s)?;
    let integrand = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let ratio = 2.0 + s * p * p * r.powf(p - 2.0);
        let rho = r * ratio;
        if rho <= 0.0 {
            0.0
        } else {
            rho * ratio.ln()
        }
    };
    let (a, b) = m.support();
    let mid = 0.5 * (a + b);
    let r = integrate_pieces(integrand, &[a, mid, b], QuadOptions::tol(1e-14, 1e-14))?;
    Ok(r.value - LN_2)
}

/// Closed form of `S_1(s)`:
/// `arcsinh(s/2) + ((s²+4)/8) ln(s²+4) + (s/4)[√(s²+4) - s ln|s| - |s|] - ln 2`.
pub fn entropy_excess_p1_closed(s: f64) -> f64 {
    let s_log_s = if s == 0.0 { 0.0 } else { s * s.abs().ln() };
    (s / 2.0).asinh() + (s * s + 4.0) / 8.0 * (s * s + 4.0).ln() + s / 4.0 * ((s * s + 4.0).sqrt() - s_log_s - s.abs())
        - LN_2
}

/// `S_2(s) = ln(1 + 2s)`.
pub fn entropy_excess_p2_closed(s: f64) -> Result<f64> {
    stability_domain(2.0)?.check(s)?;
    Ok((2.0 * s).ln_1p())
}

/// Order of the first discontinuous derivative of `E_p` at `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionOrder {
    Order(u32),
    /// No transition. `one_sided` is set for `p > 2`, where `s = 0` is the
    /// closed end of `Ω_p` and only the right derivatives exist.
    Analytic { one_sided: bool },
}

impl fmt::Display for TransitionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionOrder::Order(l) => write!(f, "{l}"),
            TransitionOrder::Analytic { one_sided: false } => write!(f, "analytic"),
            TransitionOrder::Analytic { one_sided: true } => write!(f, "analytic (one-sided)"),
        }
    }
}

/// Exponent `4/(2-p)` of the singular part of `E_p` for `0 < p < 2`.
pub fn singular_exponent(p: f64) -> Result<f64> {
    check_p(p)?;
    if p >= 2.0 {
        return Err(domain(format!("no singular part for p >= 2 (p = {p})")));
    }
    Ok(4.0 / (2.0 - p))
}

/// `ℓ = ⌈4/(2-p)⌉`; an integer exponent is its own order.
pub fn transition_order(p: f64) -> Result<TransitionOrder> {
    check_p(p)?;
    if p >= 2.0 {
        return Ok(TransitionOrder::Analytic { one_sided: p > 2.0 });
    }
    let alpha = singular_exponent(p)?;
    let nearest = alpha.round();
    let order = if (alpha - nearest).abs() <= 1e-9 * nearest { nearest } else { alpha.ceil() };
    Ok(TransitionOrder::Order(order as u32))
}

/// Leading-order cumulant `κ_k` of `Δ^(p)`, `k ∈ {1, 2, 3}`:
/// `2/(2+p)`, `p/(2βN²)`, `p³/(2β²N⁴)`.
pub fn leading_cumulant(p: f64, beta: f64, n: u64, order: u32) -> Result<f64> {
    check_p(p)?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    if n == 0 {
        return Err(domain("n must be positive"));
    }
    if !(1..=3).contains(&order) {
        return Err(domain(format!("closed forms exist for cumulant orders 1..=3, got {order}")));
    }
    if let TransitionOrder::Order(l) = transition_order(p)? {
        if order >= l {
            return Err(OcpError::Singularity { p, order, transition: l });
        }
    }
    let nf = n as f64;
    Ok(match order {
        1 => 2.0 / (2.0 + p),
        2 => p / (2.0 * beta * nf * nf),
        _ => p.powi(3) / (2.0 * beta * beta * nf.powi(4)),
    })
}

/// Convert `E_p^{(k)}(0)` into the `k`-th cumulant of `Δ^(p)`:
/// `κ_k = (-1)^{k+1} (βN²)^{1-k} E^{(k)}(0)`.
pub fn cumulant_from_derivative(order: u32, derivative: f64, beta: f64, n: u64) -> f64 {
    let scale = beta * (n as f64).powi(2);
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
    sign * derivative * scale.powi(1 - order as i32)
}

/// External potential felt by the gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `r²/2`
    Harmonic,
    /// `r²/2 + s r^p`
    Tilted { p: f64, s: f64 },
}

impl Potential {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Potential::Harmonic => 0.5 * r * r,
            Potential::Tilted { p, s } => 0.5 * r * r + s * r.powf(p),
        }
    }
}

const MASS_TOL: f64 = 1e-10;

fn continuous_pieces<M: RadialMeasure + ?Sized>(measure: &M) -> Vec<f64> {
    let (lo, hi) = measure.support();
    let mut pts = vec![lo, hi];
    for (a, _) in measure.rings() {
        if a > lo && a < hi {
            pts.push(a);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn total_mass<M: RadialMeasure + ?Sized>(measure: &M, pieces: &[f64]) -> Result<f64> {
    let cont = integrate_pieces(|r| measure.radial_density(r), pieces, QuadOptions::tol(1e-15, 1e-15))?.value;
    Ok(cont + measure.rings().iter().map(|(_, m)| m).sum::<f64>())
}

fn check_mass<M: RadialMeasure + ?Sized>(measure: &M, pieces: &[f64]) -> Result<()> {
    let mass = total_mass(measure, pieces)?;
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(domain(format!("measure has total mass {mass}, expected 1")));
    }
    Ok(())
}

/// Mean-field energy `-½∬ ln|z - z'| dμ dμ' + ∫ V dμ` of a radial measure.
///
/// For rotation-invariant measures the angular average of `ln|z - z'|` is
/// `ln max(r, r')`, so the pair term is `∫ ln t d(M(t)²)` with `M` the
/// cumulative radial mass. `M` itself is computed by an inner quadrature.
pub fn mean_field_energy<M: RadialMeasure + ?Sized>(measure: &M, potential: Potential) -> Result<f64> {
    let pieces = continuous_pieces(measure);
    check_mass(measure, &pieces)?;
    let mut rings = measure.rings();
    rings.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, _) = measure.support();
    let inner_opts = QuadOptions::tol(1e-15, 1e-15);
    let outer_opts = QuadOptions::tol(1e-13, 1e-13);

    let ring_mass_below = |t: f64| rings.iter().filter(|(a, _)| *a < t).map(|(_, m)| m).sum::<f64>();
    let failure: RefCell<Option<OcpError>> = RefCell::new(None);
    let cumulative = |t: f64| -> f64 {
        let cont = if t > lo {
            // Integrate piecewise so ring radii stay breakpoints.
            let mut pts: Vec<f64> = pieces.iter().copied().filter(|&b| b < t).collect();
            pts.push(t);
            match integrate_pieces(|r| measure.radial_density(r), &pts, inner_opts) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        } else {
            0.0
        };
        cont + ring_mass_below(t)
    };

    let pair_cont = integrate_pieces(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            let rho = measure.radial_density(t);
            if rho == 0.0 {
                return 0.0;
            }
            t.ln() * 2.0 * cumulative(t) * rho
        },
        &pieces,
        outer_opts,
    );
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let mut pair = pair_cont?.value;
    for &(a, m) in &rings {
        let below = cumulative(a);
        pair += a.ln() * ((below + m).powi(2) - below.powi(2));
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let external = integrate_pieces(|t| potential.value(t) * measure.radial_density(t), &pieces, outer_opts)?.value
        + rings.iter().map(|&(a, m)| m * potential.value(a)).sum::<f64>();
    Ok(-0.5 * pair + external)
}

/// Configurational entropy `-∫ dμ ln(dμ/dz)`; divergent when rings carry mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyValue {
    Finite(f64),
    Divergent,
}

impl EntropyValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            EntropyValue::Finite(v) => Some(v),
            EntropyValue::Divergent => None,
        }
    }
}

/// `S[μ] = -∫ ρ ln(ρ / (2πr)) dr` for a radial measure with planar density `ρ/(2πr)`.
pub fn entropy_functional<M: RadialMeasure + ?Sized>(measure: &M) -> Result<EntropyValue> {
    let pieces = continuous_pieces(measure);
    check_mass(measure, &pieces)?;
    if measure.rings().iter().any(|&(_, m)| m > 0.0) {
        return Ok(EntropyValue::Divergent);
    }
    let r = integrate_pieces(
        |t| {
            let rho = measure.radial_density(t);
            if rho <= 0.0 || t <= 0.0 {
                0.0
            } else {
                -rho * (rho / (2.0 * PI * t)).ln()
            }
        },
        &pieces,
        QuadOptions::tol(1e-14, 1e-14),
    )?;
    Ok(EntropyValue::Finite(r.value))
}
