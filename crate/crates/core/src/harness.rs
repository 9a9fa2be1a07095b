//! Verification pipelines: finite-`N` exact values and samples confronted
//! with the asymptotic predictions, collected into [`LdpTable`]s.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::edge_ldp::{f1_correction, f2_correction, left_tail_prediction, psi_left, psi_right, rider_constants, RiderConstants};
use crate::error::{domain, Result};
use crate::exact_beta2::{edge_cdf_log, edge_pdf_log, mgf_log};
use crate::radial_moments::{
    cumulant_from_derivative, energy_excess, energy_excess_by_integration, entropy_excess, leading_cumulant,
    stability_domain, transition_order, TransitionOrder,
};
use crate::sampler::{sample_kostlan, StatExponent};
use crate::stats::ks_distance;

/// One row of an [`LdpTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpRow {
    pub abscissa: f64,
    pub finite_n_value: f64,
    pub prediction: f64,
    pub residual: f64,
}

/// Finite-`N` values against predictions on a grid, plus optional extra
/// per-row columns and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LdpTable {
    pub abscissa_label: String,
    pub rows: Vec<LdpRow>,
    /// `(name, values)`; each has one value per row.
    pub extra_columns: Vec<(String, Vec<f64>)>,
    pub metadata: Vec<(String, String)>,
}

/// Names of the three fixed value columns after the abscissa.
pub const VALUE_COLUMNS: [&str; 3] = ["finite_n", "prediction", "residual"];

impl LdpTable {
    pub fn new(abscissa_label: impl Into<String>) -> Self {
        LdpTable { abscissa_label: abscissa_label.into(), rows: Vec::new(), extra_columns: Vec::new(), metadata: Vec::new() }
    }

    /// Build a table from `(abscissa, finite, prediction, extras)` rows; rows
    /// are sorted by abscissa and the residual is computed here.
    pub fn from_rows(abscissa_label: &str, extra_names: &[&str], mut rows: Vec<(f64, f64, f64, Vec<f64>)>) -> Result<Self> {
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut table = LdpTable::new(abscissa_label);
        table.extra_columns = extra_names.iter().map(|n| (n.to_string(), Vec::with_capacity(rows.len()))).collect();
        for (x, f, pred, extras) in rows {
            if extras.len() != extra_names.len() {
                return Err(domain("row has the wrong number of extra columns"));
            }
            table.rows.push(LdpRow { abscissa: x, finite_n_value: f, prediction: pred, residual: f - pred });
            for (col, v) in table.extra_columns.iter_mut().zip(extras) {
                col.1.push(v);
            }
        }
        Ok(table)
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        match name {
            n if n == self.abscissa_label => Some(self.rows.iter().map(|r| r.abscissa).collect()),
            "finite_n" => Some(self.rows.iter().map(|r| r.finite_n_value).collect()),
            "prediction" => Some(self.rows.iter().map(|r| r.prediction).collect()),
            "residual" => Some(self.rows.iter().map(|r| r.residual).collect()),
            _ => self.extra_columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone()),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![self.abscissa_label.clone()];
        names.extend(VALUE_COLUMNS.iter().map(|s| s.to_string()));
        names.extend(self.extra_columns.iter().map(|(n, _)| n.clone()));
        names
    }

    /// CSV text: header row, then one line per row with reals at 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.column_names().join(",");
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            let mut fields = vec![r.abscissa, r.finite_n_value, r.prediction, r.residual];
            fields.extend(self.extra_columns.iter().map(|(_, v)| v[i]));
            let line: Vec<String> = fields.iter().map(|v| format_real(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Parse CSV produced by [`LdpTable::to_csv`]. The stored residual must
    /// equal `finite_n - prediction` recomputed from the parsed columns.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| domain("empty CSV"))?.split(',').collect();
        if header.len() < 4 || header[1..4] != VALUE_COLUMNS {
            return Err(domain(format!("unexpected CSV header {header:?}")));
        }
        let mut table = LdpTable::new(header[0]);
        table.extra_columns = header[4..].iter().map(|n| (n.to_string(), Vec::new())).collect();
        for (lineno, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>().map_err(|_| domain(format!("bad number '{f}' on data line {}", lineno + 1))))
                .collect::<Result<_>>()?;
            if vals.len() != header.len() {
                return Err(domain(format!("data line {} has {} fields, expected {}", lineno + 1, vals.len(), header.len())));
            }
            let residual = vals[1] - vals[2];
            if residual.to_bits() != vals[3].to_bits() && !(residual.is_nan() && vals[3].is_nan()) {
                return Err(domain(format!(
                    "residual on data line {} is {} but finite_n - prediction is {residual}",
                    lineno + 1,
                    vals[3]
                )));
            }
            table.rows.push(LdpRow { abscissa: vals[0], finite_n_value: vals[1], prediction: vals[2], residual });
            for (col, v) in table.extra_columns.iter_mut().zip(&vals[4..]) {
                col.1.push(*v);
            }
        }
        Ok(table)
    }
}

/// Shortest text with 17 significant digits, so values round-trip exactly.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn par_rows<F>(grid: &[f64], f: F) -> Result<Vec<(f64, f64, f64, Vec<f64>)>>
where
    F: Fn(f64) -> Result<(f64, f64, f64, Vec<f64>)> + Sync + Send,
{
    grid.par_iter().map(|&x| f(x)).collect()
}

/// Hard-wall (left) tail at `β = 2`.
///
/// `finite_n = -(1/(2N²)) ln Pr[Δ^(∞) ≤ x]` against `Ψ_L + (ln N/N) f₁ + f₂/N`.
/// Extra columns hold `Ψ_L`, the rescaled gap `(N/ln N)(finite_n - Ψ_L)` and
/// its prediction `f₁ + f₂/ln N`.
pub fn left_tail_table(n: u64, x_grid: &[f64]) -> Result<LdpTable> {
    if n < 10 {
        return Err(domain(format!("left_tail_table needs n >= 10, got {n}")));
    }
    if let Some(x) = x_grid.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(domain(format!("left-tail abscissae must lie in (0, 1), got {x}")));
    }
    let nf = n as f64;
    let rows = par_rows(x_grid, |x| {
        let finite = -edge_cdf_log(n, x)? / (2.0 * nf * nf);
        let psi = psi_left(x)?;
        let scaled = nf / nf.ln() * (finite - psi);
        let scaled_pred = f1_correction(x)? + f2_correction(x)? / nf.ln();
        Ok((x, finite, left_tail_prediction(x, n)?, vec![psi, scaled, scaled_pred]))
    })?;
    Ok(LdpTable::from_rows("x", &["psi_left", "scaled_gap", "scaled_prediction"], rows)?
        .with_meta("table", "left_tail")
        .with_meta("n", n)
        .with_meta("beta", 2))
}

/// Split-off (right) tail at `β = 2`: `-(1/(2N)) ln pdf(x)` against `Ψ_R(x)`.
pub fn right_tail_table(n: u64, x_grid: &[f64]) -> Result<LdpTable> {
    if n < 10 {
        return Err(domain(format!("right_tail_table needs n >= 10, got {n}")));
    }
    if let Some(x) = x_grid.iter().find(|&&x| !(x > 1.0) || !x.is_finite()) {
        return Err(domain(format!("right-tail abscissae must exceed 1, got {x}")));
    }
    let nf = n as f64;
    let rows = par_rows(x_grid, |x| Ok((x, -edge_pdf_log(n, x)? / (2.0 * nf), psi_right(x)?, vec![])))?;
    Ok(LdpTable::from_rows("x", &[], rows)?.with_meta("table", "right_tail").with_meta("n", n).with_meta("beta", 2))
}

/// `-(1/(2N²)) ln ⟨exp(-2N² s Δ^(p))⟩` at `β = 2`.
pub fn scaled_log_mgf(n: u64, p: f64, s: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(-mgf_log(n, p, s)?.log_value / (2.0 * nf * nf))
}

/// Coefficient of `S_p(s)` in the `1/N` correction to the scaled log-MGF,
/// `(4 - β)/(4β)`; checked against exact data only at `β = 2`.
pub fn subleading_weight(beta: f64) -> f64 {
    (4.0 - beta) / (4.0 * beta)
}

/// Scaled log-MGF at `β = 2` against the leading prediction `E_p(s)`.
/// Extra columns: `E_p + S_p/(4N)`, and the rescaled gap `N(finite_n - E_p)`.
pub fn mgf_table(n: u64, p: f64, s_grid: &[f64]) -> Result<LdpTable> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let dom = stability_domain(p)?;
    for &s in s_grid {
        dom.check(s)?;
    }
    let nf = n as f64;
    let rows = par_rows(s_grid, |s| {
        let finite = scaled_log_mgf(n, p, s)?;
        let e = energy_excess(p, s)?;
        let corrected = e + subleading_weight(2.0) * entropy_excess(p, s)? / nf;
        Ok((s, finite, e, vec![corrected, nf * (finite - e)]))
    })?;
    Ok(LdpTable::from_rows("s", &["with_correction", "scaled_gap"], rows)?
        .with_meta("table", "mgf")
        .with_meta("n", n)
        .with_meta("p", p)
        .with_meta("beta", 2))
}

/// Value at `1/n = 0` of the quadratic in `1/n` through three points.
fn extrapolate_three(points: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for (i, &(hi, gi)) in points.iter().enumerate() {
        let mut w = 1.0;
        for (j, &(hj, _)) in points.iter().enumerate() {
            if i != j {
                w *= hj / (hj - hi);
            }
        }
        total += w * gi;
    }
    total
}

fn check_sizes(n_list: &[u64]) -> Result<()> {
    if n_list.len() < 3 {
        return Err(domain(format!("need at least three sizes, got {}", n_list.len())));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(domain(format!("sizes must be positive and strictly increasing, got {n_list:?}")));
    }
    Ok(())
}

/// Richardson estimate of `lim N (finite_n - E_p(s))` at `β = 2`.
///
/// `G_N = N(finite_n - E_p(s))` is fitted as `c + a/N + b/N²` through the
/// three largest sizes and `c` is returned. The leading term is held at
/// its exact value instead of being refitted, which removes one unknown.
pub fn extract_subleading(p: f64, s: f64, n_list: &[u64]) -> Result<f64> {
    check_sizes(n_list)?;
    stability_domain(p)?.check(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let e = energy_excess(p, s)?;
    let sizes = &n_list[n_list.len() - 3..];
    let points: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            Ok((1.0 / nf, nf * (scaled_log_mgf(n, p, s)? - e)))
        })
        .collect::<Result<_>>()?;
    Ok(extrapolate_three(&points))
}

/// Extracted `1/N` coefficient on an `s` grid against `S_p(s)/4`.
/// Extra columns hold `N(finite_n - E_p)` for each size.
pub fn subleading_table(p: f64, s_grid: &[f64], n_list: &[u64]) -> Result<LdpTable> {
    check_sizes(n_list)?;
    let dom = stability_domain(p)?;
    for &s in s_grid {
        dom.check(s)?;
    }
    let names: Vec<String> = n_list.iter().map(|n| format!("gap_n{n}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows = par_rows(s_grid, |s| {
        let e = energy_excess(p, s)?;
        let gaps = n_list
            .iter()
            .map(|&n| Ok(if s == 0.0 { 0.0 } else { n as f64 * (scaled_log_mgf(n, p, s)? - e) }))
            .collect::<Result<Vec<f64>>>()?;
        Ok((s, extract_subleading(p, s, n_list)?, subleading_weight(2.0) * entropy_excess(p, s)?, gaps))
    })?;
    let sizes: Vec<String> = n_list.iter().map(u64::to_string).collect();
    Ok(LdpTable::from_rows("s", &name_refs, rows)?
        .with_meta("table", "subleading")
        .with_meta("p", p)
        .with_meta("beta", 2)
        .with_meta("sizes", sizes.join(" ")))
}

/// One order of a cumulant comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantRow {
    pub order: u32,
    /// Numeric `E_p^{(k)}(0⁺)`.
    pub derivative: f64,
    /// Cumulant obtained from `derivative`.
    pub numeric: f64,
    /// Closed-form leading cumulant.
    pub formula: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulantReport {
    pub p: f64,
    pub beta: f64,
    pub n: u64,
    pub rows: Vec<CumulantRow>,
}

/// Steps of the one-sided differences used for cumulants.
pub const CUMULANT_STEPS: (f64, f64) = (1e-3, 5e-4);

fn forward_derivative<F: Fn(f64) -> Result<f64>>(f: &F, order: u32, h: f64, dir: f64) -> Result<f64> {
    // k-th one-sided difference at 0 with binomial weights
    let k = order as i32;
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(dir * j as f64 * h)?;
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    Ok(acc / (dir.powi(k) * h.powi(k)))
}

/// Richardson-corrected one-sided `k`-th derivative at 0 from steps `h`, `h/2`.
fn one_sided_derivative<F: Fn(f64) -> Result<f64>>(f: &F, order: u32, h: f64, dir: f64) -> Result<f64> {
    Ok(2.0 * forward_derivative(f, order, 0.5 * h, dir)? - forward_derivative(f, order, h, dir)?)
}

/// Numeric derivatives of `E_p` at `0⁺` turned into cumulants of `Δ^(p)`
/// and compared with the closed forms for orders `1..=max_order`.
///
/// `E_p` near 0 is taken as `∫₀ˢ x(s') ds'`, which keeps its relative
/// accuracy for tiny `s` where the closed form cancels.
pub fn cumulant_check(p: f64, beta: f64, n: u64, max_order: u32) -> Result<CumulantReport> {
    if !(1..=3).contains(&max_order) {
        return Err(domain(format!("max_order must be 1, 2 or 3, got {max_order}")));
    }
    for order in 1..=max_order {
        leading_cumulant(p, beta, n, order)?;
    }
    let e = |s: f64| if s == 0.0 { Ok(0.0) } else { energy_excess_by_integration(p, s) };
    let (h, _) = CUMULANT_STEPS;
    let rows = (1..=max_order)
        .map(|order| {
            let derivative = one_sided_derivative(&e, order, h, 1.0)?;
            let numeric = cumulant_from_derivative(order, derivative, beta, n);
            let formula = leading_cumulant(p, beta, n, order)?;
            Ok(CumulantRow { order, derivative, numeric, formula, rel_error: ((numeric - formula) / formula).abs() })
        })
        .collect::<Result<_>>()?;
    Ok(CumulantReport { p, beta, n, rows })
}

/// Typical fluctuations of the maximum modulus against the Gumbel law.
#[derive(Debug, Clone, PartialEq)]
pub struct GumbelReport {
    pub n: u64,
    pub draws: usize,
    pub seed: u64,
    pub constants: RiderConstants,
    /// `sup |F_emp - exp(-e^{-x})|` over the standardized draws.
    pub sup_distance: f64,
    /// Set below `n = 1000`, where the logarithmic convergence leaves the
    /// distance far from zero.
    pub low_n: bool,
}

pub const GUMBEL_LOW_N: u64 = 1000;

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Kostlan draws of the maximum modulus, standardized with the Rider
/// constants, against the Gumbel CDF.
pub fn gumbel_check(n: u64, draws: usize, seed: u64) -> Result<GumbelReport> {
    let constants = rider_constants(n)?;
    let batch = sample_kostlan(n, draws, StatExponent::Infinity, seed)?;
    let standardized: Vec<f64> = batch.values.iter().map(|&v| constants.standardize(v)).collect();
    Ok(GumbelReport {
        n,
        draws,
        seed,
        constants,
        sup_distance: ks_distance(&standardized, gumbel_cdf),
        low_n: n < GUMBEL_LOW_N,
    })
}

/// `sup_t |Pr[a_N(Δ^(∞) - b_N) ≤ t] - exp(-e^{-t})|` from the exact CDF,
/// scanned on `t ∈ [-4, 8]` with step `0.01`: the distance the empirical
/// check converges to as the number of draws grows.
pub fn gumbel_exact_distance(n: u64) -> Result<f64> {
    let c = rider_constants(n)?;
    let ts: Vec<f64> = (0..=1200).map(|i| -4.0 + 0.01 * i as f64).collect();
    let gaps: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let x = c.b_n + t / c.a_n;
            Ok((edge_cdf_log(n, x)?.exp() - gumbel_cdf(t)).abs())
        })
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

/// Classification of the jump of one derivative across `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderScan {
    pub order: u32,
    pub steps: [f64; 4],
    /// `right - left` derivative estimate at each step.
    pub jumps: [f64; 4],
    /// Rounding bound on the jump at each step.
    pub roundoff: [f64; 4],
    /// Least-squares slope of `ln|jump|` against `ln h`.
    pub exponent: f64,
    pub continuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub p: f64,
    pub expected: TransitionOrder,
    pub orders: Vec<OrderScan>,
    /// Lowest order whose derivative jumps, if any.
    pub detected: Option<u32>,
}

impl TransitionReport {
    /// Detection agrees with the classification of `p`.
    pub fn confirms_expected(&self) -> bool {
        match self.expected {
            TransitionOrder::Order(l) => self.detected == Some(l),
            TransitionOrder::Analytic { .. } => self.detected.is_none(),
        }
    }
}

/// Orders scanned when `E_p` is analytic at 0.
pub const ANALYTIC_SCAN_ORDERS: u32 = 4;

/// Slope above which a shrinking jump counts as a vanishing one.
pub const CONTINUITY_EXPONENT: f64 = 0.3;

/// Scan the one-sided derivatives of `E_p` at `s = 0` for jumps.
///
/// For order `k` the left and right Richardson-corrected differences are
/// compared at steps `h₀ 2^{-i}`, `i = 0..4`, with `h₀ = 10^{-6/k}`. A jump
/// that shrinks like a positive power of `h`, or stays below the rounding
/// bound, is treated as continuity.
pub fn transition_scan(p: f64) -> Result<TransitionReport> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(domain(format!("transition_scan requires 0 < p <= 2, got {p}")));
    }
    let expected = transition_order(p)?;
    let max_order = match expected {
        TransitionOrder::Order(l) => l,
        TransitionOrder::Analytic { .. } => ANALYTIC_SCAN_ORDERS,
    };
    let e = |s: f64| energy_excess(p, s);
    let orders = (1..=max_order)
        .into_par_iter()
        .map(|k| {
            let h0 = 10f64.powf(-6.0 / k as f64);
            let mut steps = [0.0; 4];
            let mut jumps = [0.0; 4];
            let mut roundoff = [0.0; 4];
            for i in 0..4 {
                let h = h0 * 0.5f64.powi(i as i32);
                steps[i] = h;
                jumps[i] = one_sided_derivative(&e, k, h, 1.0)? - one_sided_derivative(&e, k, h, -1.0)?;
                // two one-sided estimates, each 3 differences at the finer step
                roundoff[i] = 64.0 * 1e-15 * 2f64.powi(k as i32) / (0.5 * h).powi(k as i32);
            }
            let exponent = log_slope(&steps, &jumps);
            let below_rounding = jumps.iter().zip(&roundoff).all(|(j, r)| j.abs() <= *r);
            let continuous = below_rounding || exponent > CONTINUITY_EXPONENT;
            Ok(OrderScan { order: k, steps, jumps, roundoff, exponent, continuous })
        })
        .collect::<Result<Vec<_>>>()?;
    let detected = orders.iter().find(|o| !o.continuous).map(|o| o.order);
    Ok(TransitionReport { p, expected, orders, detected })
}

fn log_slope(h: &[f64], j: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        h.iter().zip(j).filter(|(_, j)| **j != 0.0).map(|(h, j)| (h.ln(), j.abs().ln())).collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Short text summary of a transition scan.
pub fn describe_scan(report: &TransitionReport) -> String {
    let mut s = String::new();
    for o in &report.orders {
        let _ = writeln!(
            s,
            "order {}: jump {:+.3e} at h = {:.3e}, exponent {:.3}, {}",
            o.order,
            o.jumps[3],
            o.steps[3],
            o.exponent,
            if o.continuous { "continuous" } else { "jump" }
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::OcpError;

    #[test]
    fn table_residuals_and_sorting() {
        let t = LdpTable::from_rows("x", &["extra"], vec![(0.5, 2.0, 1.5, vec![7.0]), (0.1, 1.0, 0.25, vec![8.0])]).unwrap();
        assert_eq!(t.rows[0].abscissa, 0.1);
        assert_eq!(t.rows[0].residual, 0.75);
        assert_eq!(t.column("extra").unwrap(), vec![8.0, 7.0]);
        assert!(LdpTable::from_rows("x", &["a"], vec![(0.1, 1.0, 1.0, vec![])]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = LdpTable::from_rows("s", &["g"], vec![(0.1, 1.0 / 3.0, 0.1 + 0.2, vec![std::f64::consts::PI])]).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("s,finite_n,prediction,residual,g\n"));
        assert!(csv.ends_with('\n') && !csv.contains(",\n"));
        let back = LdpTable::from_csv(&csv).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.extra_columns, t.extra_columns);
        assert_eq!(LdpTable::new("x").to_csv(), "x,finite_n,prediction,residual\n");
        let tampered = csv.replace(&format_real(t.rows[0].residual), &format_real(0.5));
        assert!(LdpTable::from_csv(&tampered).is_err());
    }

    #[test]
    fn extrapolation_is_exact_on_quadratics() {
        let g = |h: f64| 0.3 - 2.0 * h + 5.0 * h * h;
        let pts: Vec<(f64, f64)> = [25.0, 50.0, 100.0].iter().map(|n: &f64| (1.0 / n, g(1.0 / n))).collect();
        assert!((extrapolate_three(&pts) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn left_tail_small_case() {
        let t = left_tail_table(50, &[0.5, 0.99]).unwrap();
        assert!(t.rows[0].residual.abs() < 1e-2);
        assert!(t.rows[1].finite_n_value < 1e-3);
        assert!(left_tail_table(5, &[0.5]).is_err());
        assert!(left_tail_table(50, &[1.0]).is_err());
    }

    #[test]
    fn right_tail_small_case() {
        let t = right_tail_table(50, &[1.001, 1.5]).unwrap();
        assert!(t.rows[1].residual.abs() < 0.05);
        assert!(t.rows[0].prediction < 1e-6);
        assert!(right_tail_table(50, &[0.9]).is_err());
    }

    #[test]
    fn mgf_table_quadratic_statistic() {
        let t = mgf_table(20, 2.0, &[0.0, 0.5, 2.0]).unwrap();
        for r in &t.rows {
            let want = 0.25 * (1.0 + 1.0 / 20.0) * (2.0 * r.abscissa).ln_1p();
            assert!((r.finite_n_value - want).abs() < 1e-13, "{r:?}");
        }
        assert_eq!(t.rows[0].finite_n_value, 0.0);
        assert_eq!(t.rows[0].prediction, 0.0);
    }

    #[test]
    fn subleading_at_quadratic_statistic() {
        for &s in &[-0.4f64, 0.1, 1.0, 5.0] {
            let c = extract_subleading(2.0, s, &[25, 50, 100]).unwrap();
            assert!((c - 0.25 * (2.0 * s).ln_1p()).abs() < 1e-10, "s={s}: {c}");
        }
        assert_eq!(extract_subleading(1.0, 0.0, &[10, 20, 40]).unwrap(), 0.0);
        assert!(extract_subleading(2.0, 0.5, &[10, 20]).is_err());
        assert!(extract_subleading(2.0, 0.5, &[10, 30, 20]).is_err());
    }

    #[test]
    fn cumulant_examples() {
        let r = cumulant_check(2.0, 2.0, 10, 2).unwrap();
        assert!((r.rows[0].derivative - 0.5).abs() < 1e-6);
        assert!((r.rows[1].derivative + 1.0).abs() < 1e-5);
        let r = cumulant_check(1.0, 2.0, 10, 1).unwrap();
        assert!((r.rows[0].numeric - 2.0 / 3.0).abs() < 1e-6);
        assert!(matches!(cumulant_check(0.5, 2.0, 10, 3), Err(OcpError::Singularity { .. })));
    }

    #[test]
    fn gumbel_standardization_is_affine() {
        let c = rider_constants(500).unwrap();
        let doubled = RiderConstants { a_n: 2.0 * c.a_n, ..c };
        let xs = [1.0, 1.05, 1.1, 1.2];
        let spread = |k: &RiderConstants| k.standardize(xs[3]) - k.standardize(xs[0]);
        assert_eq!(spread(&doubled), 2.0 * spread(&c));
        // below the n where γ_N turns positive the constants do not exist
        assert!(gumbel_check(8, 100, 1).is_err());
        let r = gumbel_check(200, 500, 1).unwrap();
        assert!(r.low_n && r.sup_distance < 1.0);
    }

    #[test]
    fn transition_scan_rejects_p_above_two() {
        assert!(transition_scan(2.5).is_err());
        assert!(transition_scan(0.0).is_err());
    }
}
