//! Rate functions for the maximum modulus `Δ^(∞) = max_k |z_k|`.
//!
//! Left of the edge (`x < 1`) the whole droplet is compressed and the
//! probability decays at speed `N²`; right of it (`x > 1`) a single charge
//! detaches and the decay speed is `N`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::radial_moments::RadialMeasure;

/// Hard-wall equilibrium measure: uniform bulk on `|z| ≤ min(x, 1)` plus the
/// excess charge `1 - x²` spread on the wall when `x < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedEdgeMeasure {
    pub wall_radius: f64,
    /// Planar density inside the bulk (`1/π`).
    pub bulk_density: f64,
    pub boundary_mass: f64,
}

impl ConstrainedEdgeMeasure {
    pub fn bulk_radius(&self) -> f64 {
        self.wall_radius.min(1.0)
    }

    pub fn total_mass(&self) -> f64 {
        let r = self.bulk_radius();
        r * r + self.boundary_mass
    }

    pub fn is_circular_law(&self) -> bool {
        self.boundary_mass == 0.0
    }
}

impl RadialMeasure for ConstrainedEdgeMeasure {
    fn radial_density(&self, r: f64) -> f64 {
        if (0.0..=self.bulk_radius()).contains(&r) {
            2.0 * r
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.bulk_radius())
    }

    fn rings(&self) -> Vec<(f64, f64)> {
        if self.boundary_mass > 0.0 {
            vec![(self.wall_radius, self.boundary_mass)]
        } else {
            Vec::new()
        }
    }
}

/// Equilibrium measure of the gas confined to `|z| ≤ x`.
pub fn constrained_measure(x: f64) -> Result<ConstrainedEdgeMeasure> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("wall radius must be positive and finite, got {x}")));
    }
    Ok(ConstrainedEdgeMeasure {
        wall_radius: x,
        bulk_density: 1.0 / PI,
        boundary_mass: (1.0 - x * x).max(0.0),
    })
}

/// The circular law (uniform measure on the unit disk).
pub fn circular_law() -> ConstrainedEdgeMeasure {
    constrained_measure(1.0).expect("x = 1 is valid")
}

/// Left rate function `Ψ_L(x) = -(ln x⁴ + x⁴ - 4x² + 3) / 8`, zero for `x > 1`.
pub fn psi_left(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_nan() {
        return Err(domain(format!("psi_left diverges as x -> 0+; need x > 0, got {x}")));
    }
    if x >= 1.0 {
        return Ok(0.0);
    }
    let x2 = x * x;
    // 4 ln x + (1 - x²)(3 - x²), arranged so the cancellation near x = 1
    // only involves the two small terms.
    let poly = (1.0 - x2) * (3.0 - x2);
    Ok(-(4.0 * x.ln() + poly) / 8.0)
}

/// Right rate function `Ψ_R(x) = -(ln x² - x² + 1) / 2` for `x ≥ 1`.
pub fn psi_right(x: f64) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(domain(format!("psi_right requires finite x >= 1, got {x}")));
    }
    let u = x * x - 1.0;
    // u - ln(1 + u) without cancellation for x close to 1
    Ok(0.5 * (u - u.ln_1p()))
}

/// `f₁(x) = (1 - x²) / 4`, coefficient of `ln N / N` in the hard-wall expansion.
pub fn f1_correction(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(domain(format!("f1 requires 0 < x <= 1, got {x}")));
    }
    Ok((1.0 - x * x) / 4.0)
}

/// `f₂(x) = ((1 - x²)/2)(ln(1 - x²) - ln x + ln √(2π) - 1)`, coefficient of `1/N`.
pub fn f2_correction(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("f2 requires 0 < x < 1, got {x}")));
    }
    let w = 1.0 - x * x;
    Ok(0.5 * w * (w.ln() - x.ln() + 0.5 * (2.0 * PI).ln() - 1.0))
}

/// Three-term prediction for `-(1/(2N²)) ln Pr[Δ^(∞) ≤ x]` at `β = 2`.
///
/// Only the leading term `Ψ_L` is known away from `β = 2`.
pub fn left_tail_prediction(x: f64, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("left_tail_prediction needs n >= 2, got {n}")));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(domain(format!("left_tail_prediction requires 0 < x < 1, got {x}")));
    }
    let nf = n as f64;
    Ok(psi_left(x)? + nf.ln() / nf * f1_correction(x)? + f2_correction(x)? / nf)
}

/// Centring and scaling of the Gumbel limit for the maximum modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiderConstants {
    pub n: u64,
    pub gamma_n: f64,
    pub a_n: f64,
    pub b_n: f64,
}

impl RiderConstants {
    /// `a_N (x - b_N)`.
    pub fn standardize(&self, x: f64) -> f64 {
        self.a_n * (x - self.b_n)
    }
}

/// `γ_N = ln N - 2 ln ln N - ln 2π`, `a_N = √(4Nγ_N)`, `b_N = 1 + √(γ_N/(4N))`.
pub fn rider_constants(n: u64) -> Result<RiderConstants> {
    if n < 8 {
        return Err(domain(format!("rider_constants needs n >= 8, got {n}")));
    }
    let nf = n as f64;
    let gamma_n = nf.ln() - 2.0 * nf.ln().ln() - (2.0 * PI).ln();
    if gamma_n <= 0.0 {
        return Err(domain(format!(
            "gamma_N = {gamma_n:.6} <= 0 at n = {n}; the Gumbel centring needs n >= 164"
        )));
    }
    Ok(RiderConstants {
        n,
        gamma_n,
        a_n: (4.0 * nf * gamma_n).sqrt(),
        b_n: 1.0 + (gamma_n / (4.0 * nf)).sqrt(),
    })
}
