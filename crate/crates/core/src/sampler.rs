//! Sampling of plasma configurations: the exact Kostlan sampler at `β = 2`
//! and single-particle Metropolis at general `β`.
//!
//! Random numbers come from ChaCha8 with one stream per Kostlan block or
//! Metropolis chain, so results depend only on the seed and never on the
//! number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, OcpError, Result};

/// Draws per Kostlan block; each block owns one RNG stream.
pub const KOSTLAN_BLOCK: usize = 256;

/// Stream offset separating Metropolis chains from Kostlan blocks.
const MCMC_STREAM_BASE: u64 = 1 << 40;

/// Exponent of a radial statistic: `Δ^(p)` for finite `p`, the maximum
/// modulus for `p = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatExponent {
    Finite(f64),
    Infinity,
}

impl StatExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(StatExponent::Infinity)
        } else if p > 0.0 && p.is_finite() {
            Ok(StatExponent::Finite(p))
        } else {
            Err(domain(format!("statistic exponent must be positive, got {p}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            StatExponent::Finite(p) => p,
            StatExponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for StatExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatExponent::Finite(p) => write!(f, "{p}"),
            StatExponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for StatExponent {
    type Err = OcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(StatExponent::Infinity),
            t => StatExponent::new(t.parse().map_err(|_| domain(format!("invalid exponent '{s}'")))?),
        }
    }
}

/// `N` particles in the plane at inverse temperature `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasmaConfig {
    pub positions: Vec<[f64; 2]>,
    pub beta: f64,
}

impl PlasmaConfig {
    pub fn new(positions: Vec<[f64; 2]>, beta: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(domain("a configuration needs at least one particle"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(domain(format!("beta must be positive, got {beta}")));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(domain("particle coordinates must be finite"));
        }
        Ok(PlasmaConfig { positions, beta })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.positions.iter().map(|z| z[0].hypot(z[1])).collect()
    }

    /// Rotate every particle by `angle` about the origin.
    pub fn rotated(&self, angle: f64) -> PlasmaConfig {
        let (sin, cos) = angle.sin_cos();
        let positions = self.positions.iter().map(|z| [cos * z[0] - sin * z[1], sin * z[0] + cos * z[1]]).collect();
        PlasmaConfig { positions, beta: self.beta }
    }
}

/// `Δ^(p)` of a set of moduli.
pub fn statistic_of_radii(radii: &[f64], p: StatExponent) -> f64 {
    match p {
        StatExponent::Infinity => radii.iter().copied().fold(0.0, f64::max),
        StatExponent::Finite(p) => {
            let sum: f64 = if p == 2.0 {
                radii.iter().map(|r| r * r).sum()
            } else if p == 1.0 {
                radii.iter().sum()
            } else {
                radii.iter().map(|r| r.powf(p)).sum()
            };
            sum / radii.len() as f64
        }
    }
}

/// `Δ^(p) = (1/N) Σ r_k^p`, or `max_k r_k` for `p = ∞`.
pub fn radial_statistic(config: &PlasmaConfig, p: StatExponent) -> f64 {
    statistic_of_radii(&config.radii(), p)
}

/// `H = -Σ_{i<j} ln|z_i - z_j| + N Σ_k |z_k|²/2`.
pub fn hamiltonian(config: &PlasmaConfig) -> Result<f64> {
    let z = &config.positions;
    let n = z.len();
    let mut pair = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d2 = (z[i][0] - z[j][0]).powi(2) + (z[i][1] - z[j][1]).powi(2);
            if d2 == 0.0 {
                return Err(OcpError::Coincident { i, j });
            }
            pair += 0.5 * d2.ln();
        }
    }
    let confinement: f64 = z.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum();
    Ok(-pair + 0.5 * n as f64 * confinement)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Kostlan,
    Mcmc,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Kostlan => "kostlan",
            SamplerKind::Mcmc => "mcmc",
        })
    }
}

/// Draws of a radial statistic with the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub p: StatExponent,
    pub values: Vec<f64>,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub n: u64,
    pub beta: f64,
    /// Metropolis only; zero for Kostlan batches.
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub chains: u64,
    /// Proposal width after burn-in, one per chain.
    pub step_sizes: Vec<f64>,
    /// Acceptance rate of the recorded part, one per chain.
    pub acceptance: Vec<f64>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exact `β = 2` sampler: the moduli are `r_k = ξ_k/√N` with `ξ_k²` a
/// Gamma(k, 1) variate, independently for `k = 1..N`.
pub fn sample_kostlan(n: u64, count: usize, p: StatExponent, seed: u64) -> Result<SampleBatch> {
    if n == 0 || count == 0 {
        return Err(domain("n and count must be at least 1"));
    }
    let gammas: Vec<Gamma<f64>> =
        (1..=n).map(|k| Gamma::new(k as f64, 1.0).expect("positive shape")).collect();
    let inv_n = 1.0 / n as f64;
    let blocks = count.div_ceil(KOSTLAN_BLOCK);
    let values: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let len = KOSTLAN_BLOCK.min(count - b * KOSTLAN_BLOCK);
            let mut radii = vec![0.0; n as usize];
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                for (r, g) in radii.iter_mut().zip(&gammas) {
                    *r = (g.sample(&mut rng) * inv_n).sqrt();
                }
                out.push(statistic_of_radii(&radii, p));
            }
            out
        })
        .collect::<Vec<_>>()
        .concat();
    Ok(SampleBatch {
        p,
        values,
        seed,
        sampler: SamplerKind::Kostlan,
        n,
        beta: 2.0,
        sweeps: 0,
        burn_in: 0,
        thinning: 0,
        chains: 0,
        step_sizes: Vec::new(),
        acceptance: Vec::new(),
    })
}

/// Parameters of a Metropolis run. `sweeps` counts all sweeps including
/// the `burn_in` ones; one sweep is `N` attempted single-particle moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcParams {
    pub n: u64,
    pub beta: f64,
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub p: StatExponent,
    pub seed: u64,
    pub initial_step: f64,
    pub chains: u64,
}

impl McmcParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(domain(format!("beta must be positive, got {}", self.beta)));
        }
        if self.sweeps <= self.burn_in {
            return Err(domain(format!("sweeps ({}) must exceed burn-in ({})", self.sweeps, self.burn_in)));
        }
        if self.thinning == 0 || self.chains == 0 {
            return Err(domain("thinning and chains must be at least 1"));
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(domain(format!("initial step must be positive, got {}", self.initial_step)));
        }
        Ok(())
    }
}

/// Acceptance window targeted while the proposal width is adapted.
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.3, 0.5);

/// Single-particle Metropolis chain targeting `exp(-βH)`.
#[derive(Debug, Clone)]
pub struct MetropolisChain {
    positions: Vec<[f64; 2]>,
    beta: f64,
    step: f64,
    energy: f64,
    rng: ChaCha8Rng,
    accepted: u64,
    attempted: u64,
}

impl MetropolisChain {
    /// Start from particles i.i.d. uniform on the unit disk.
    pub fn new(n: usize, beta: f64, step: f64, mut rng: ChaCha8Rng) -> Result<Self> {
        let positions = (0..n)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.random::<f64>();
                [r * theta.cos(), r * theta.sin()]
            })
            .collect();
        Self::from_positions(positions, beta, step, rng)
    }

    pub fn from_positions(positions: Vec<[f64; 2]>, beta: f64, step: f64, rng: ChaCha8Rng) -> Result<Self> {
        let config = PlasmaConfig::new(positions, beta)?;
        let energy = hamiltonian(&config)?;
        Ok(MetropolisChain { positions: config.positions, beta, step, energy, rng, accepted: 0, attempted: 0 })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn config(&self) -> PlasmaConfig {
        PlasmaConfig { positions: self.positions.clone(), beta: self.beta }
    }

    /// Energy tracked by accumulating accepted move deltas.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    pub fn set_step_size(&mut self, step: f64) {
        self.step = step;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }

    pub fn reset_counters(&mut self) {
        self.accepted = 0;
        self.attempted = 0;
    }

    /// Energy change when particle `i` moves to `to`; `+∞` if it would land
    /// on another particle.
    pub fn move_delta(&self, i: usize, to: [f64; 2]) -> f64 {
        let from = self.positions[i];
        let mut log_ratio = 0.0;
        for (j, z) in self.positions.iter().enumerate() {
            if j == i {
                continue;
            }
            let d_new = (to[0] - z[0]).powi(2) + (to[1] - z[1]).powi(2);
            if d_new == 0.0 {
                return f64::INFINITY;
            }
            let d_old = (from[0] - z[0]).powi(2) + (from[1] - z[1]).powi(2);
            log_ratio += (d_new / d_old).ln();
        }
        let n = self.positions.len() as f64;
        let confinement = 0.5 * n * (to[0] * to[0] + to[1] * to[1] - from[0] * from[0] - from[1] * from[1]);
        -0.5 * log_ratio + confinement
    }

    /// One attempted move of a uniformly chosen particle. Returns the moved
    /// particle and whether the move was accepted.
    pub fn attempt(&mut self) -> (usize, bool) {
        let n = self.positions.len();
        let i = self.rng.random_range(0..n);
        let dx: f64 = self.rng.sample(StandardNormal);
        let dy: f64 = self.rng.sample(StandardNormal);
        let from = self.positions[i];
        let to = [from[0] + self.step * dx, from[1] + self.step * dy];
        let delta = self.move_delta(i, to);
        self.attempted += 1;
        let u: f64 = self.rng.random();
        let accept = delta.is_finite() && (delta <= 0.0 || u < (-self.beta * delta).exp());
        if accept {
            self.positions[i] = to;
            self.energy += delta;
            self.accepted += 1;
        }
        (i, accept)
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.positions.len() {
            self.attempt();
        }
    }

    pub fn statistic(&self, p: StatExponent) -> f64 {
        let radii: Vec<f64> = self.positions.iter().map(|z| z[0].hypot(z[1])).collect();
        statistic_of_radii(&radii, p)
    }
}

/// Sweeps between step-size updates during burn-in.
const ADAPT_WINDOW: u64 = 10;

struct ChainOutput {
    values: Vec<f64>,
    step: f64,
    acceptance: f64,
}

fn run_chain(params: &McmcParams, chain: u64) -> Result<ChainOutput> {
    let rng = stream_rng(params.seed, MCMC_STREAM_BASE + chain);
    let mut mc = MetropolisChain::new(params.n as usize, params.beta, params.initial_step, rng)?;
    let (lo, hi) = TARGET_ACCEPTANCE;
    for sweep in 1..=params.burn_in {
        mc.sweep();
        if sweep % ADAPT_WINDOW == 0 {
            let rate = mc.acceptance_rate();
            if rate < lo {
                mc.set_step_size(mc.step_size() * 0.8);
            } else if rate > hi {
                mc.set_step_size(mc.step_size() * 1.25);
            }
            mc.reset_counters();
        }
    }
    mc.reset_counters();
    let recorded = (params.sweeps - params.burn_in) / params.thinning;
    let mut values = Vec::with_capacity(recorded as usize);
    for sweep in 1..=params.sweeps - params.burn_in {
        mc.sweep();
        if sweep % params.thinning == 0 {
            values.push(mc.statistic(params.p));
        }
    }
    Ok(ChainOutput { values, step: mc.step_size(), acceptance: mc.acceptance_rate() })
}

/// Metropolis sampling of `Δ^(p)` under `exp(-βH)`.
///
/// The proposal width is tuned toward an acceptance rate in `[0.3, 0.5]`
/// during burn-in and frozen afterwards. Chains run in parallel, each on
/// its own stream, and are concatenated in chain order.
pub fn sample_mcmc(params: &McmcParams) -> Result<SampleBatch> {
    params.validate()?;
    let outputs: Vec<ChainOutput> =
        (0..params.chains).into_par_iter().map(|c| run_chain(params, c)).collect::<Result<_>>()?;
    let values: Vec<f64> = outputs.iter().flat_map(|o| o.values.iter().copied()).collect();
    if values.is_empty() {
        return Err(domain("no samples recorded: thinning exceeds the post-burn-in sweeps"));
    }
    Ok(SampleBatch {
        p: params.p,
        values,
        seed: params.seed,
        sampler: SamplerKind::Mcmc,
        n: params.n,
        beta: params.beta,
        sweeps: params.sweeps,
        burn_in: params.burn_in,
        thinning: params.thinning,
        chains: params.chains,
        step_sizes: outputs.iter().map(|o| o.step).collect(),
        acceptance: outputs.iter().map(|o| o.acceptance).collect(),
    })
}
