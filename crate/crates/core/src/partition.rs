//! Partition functions over pattern balls and the cross-entropy loss model.
//!
//! The Gaussian integral over an n-ball of radius r reduces through polar
//! coordinates to `π^{n/2}·P(n/2, r²)`, with `P` the regularized lower
//! incomplete gamma function. Everything is also available in log form since
//! the values under- or overflow quickly in high dimension.

use std::f64::consts::{E, PI};
use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use rand::Rng;
use rayon::prelude::*;

use crate::energy::GlobalEnergyResult;
use crate::error::{argument, domain, Error, Result};
use crate::numerics::{ln_ball_volume, ln_regularized_lower_gamma, smooth_min_unchecked, GammaArgs};
use crate::patterns::{check_storage_geometry, nearest_unchecked, sample_in_ball, LayerAssignment, PatternSet, ValidationSet};
use crate::rng::{child_seed, stream_rng};

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(argument("dimension must be ≥ 1"))
    } else {
        Ok(())
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(argument(format!("radius must be positive, got {r}")))
    }
}

/// `ln ∫_{‖y‖≤r} exp(−‖y‖²) dy`. `r = ∞` gives `(n/2) ln π`.
pub fn ln_gaussian_ball_integral(n: usize, r: f64) -> Result<f64> {
    check_n(n)?;
    check_r(r)?;
    let half = 0.5 * n as f64;
    if r == f64::INFINITY {
        return Ok(half * PI.ln());
    }
    Ok(half * PI.ln() + ln_regularized_lower_gamma(GammaArgs::new(half, r * r)?)?)
}

/// `∫_{‖y‖≤r} exp(−‖y‖²) dy = π^{n/2}·γ(n/2, r²)/Γ(n/2)`.
pub fn gaussian_ball_integral(n: usize, r: f64) -> Result<f64> {
    Ok(ln_gaussian_ball_integral(n, r)?.exp())
}

/// `(e^{−r²}·V_n(r), V_n(r))`: the integrand's range on the ball times its volume.
pub fn ball_integral_bounds(n: usize, r: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    check_r(r)?;
    let ln_v = ln_ball_volume(n, r)?;
    Ok(((ln_v - r * r).exp(), ln_v.exp()))
}

/// Lower bound with the `e^{−r}` factor in place of `e^{−r²}`.
///
/// Valid for `r ≤ 1`, where it is weaker than `e^{−r²}·V_n(r)`; it can exceed
/// the integral for larger radii (for instance `n = 8, r = 2`).
pub fn paper_lower_bound_variant(n: usize, r: f64) -> Result<f64> {
    check_n(n)?;
    check_r(r)?;
    Ok((ln_ball_volume(n, r)? - r).exp())
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
    pub sampler: McSampler,
}

/// Proposal used by the ball-integral Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McSampler {
    /// Uniform points in the ball, integrand `V_n(r)·e^{−‖y‖²}`. Low variance for small r.
    UniformBall,
    /// Points from `N(0, I/2)`, integrand `π^{n/2}·1[‖y‖ ≤ r]`. Low variance for large r.
    GaussianHit,
}

impl McSampler {
    pub fn name(&self) -> &'static str {
        match self {
            McSampler::UniformBall => "uniform-ball",
            McSampler::GaussianHit => "gaussian-hit",
        }
    }
}

/// Draws per sampler in the pilot run that picks the proposal.
const PILOT_SAMPLES: usize = 4096;

/// Largest dimension the ball sampler accepts.
pub const MAX_MC_DIMENSION: usize = 10_000;
/// Fewest samples a Monte Carlo estimate accepts.
pub const MIN_MC_SAMPLES: usize = 1_000;
const BATCH: usize = 1 << 15;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    fn standard_error(&self) -> f64 {
        if self.count < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.count - 1.0) / self.count).sqrt()
    }
}

/// Applies `f` to `samples` draws split into fixed batches, one RNG stream
/// and one scratch buffer of length `scratch` each, merging in batch order so
/// the result is independent of thread count.
fn batched_moments<F>(samples: usize, seed: u64, scratch: usize, f: F) -> Moments
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [f64]) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let len = BATCH.min(samples - b * BATCH);
            let mut buf = vec![0.0; scratch];
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(f(&mut rng, &mut buf));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Uniform draw `y` in the r-ball (Gaussian direction, radius `r·U^{1/n}`); returns `‖y‖²`.
fn ball_norm2<R: Rng>(rng: &mut R, dir: &mut [f64], r: f64) -> f64 {
    for z in dir.iter_mut() {
        *z = StandardNormal.sample(rng);
    }
    let norm = dir.iter().map(|z| z * z).sum::<f64>().sqrt();
    let scale = r * rng.random::<f64>().powf(1.0 / dir.len() as f64) / norm;
    dir.iter().map(|z| (z * scale).powi(2)).sum()
}

fn check_mc(n: usize, r: f64, samples: usize) -> Result<()> {
    check_n(n)?;
    check_r(r)?;
    if !r.is_finite() {
        return Err(argument("Monte Carlo needs a finite radius"));
    }
    if n > MAX_MC_DIMENSION {
        return Err(argument(format!("dimension {n} exceeds the sampler limit {MAX_MC_DIMENSION}")));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(argument(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")));
    }
    Ok(())
}

fn run_sampler(n: usize, r: f64, samples: usize, seed: u64, sampler: McSampler) -> Result<Moments> {
    Ok(match sampler {
        McSampler::UniformBall => {
            batched_moments(samples, seed, n, |rng, dir| (-ball_norm2(rng, dir, r)).exp())
        }
        McSampler::GaussianHit => {
            let r2 = r * r;
            batched_moments(samples, seed, 0, |rng, _| {
                let norm2: f64 = (0..n).map(|_| StandardNormal.sample(rng)).map(|z: f64| 0.5 * z * z).sum();
                if norm2 <= r2 {
                    1.0
                } else {
                    0.0
                }
            })
        }
    })
}

fn scale_of(n: usize, r: f64, sampler: McSampler) -> Result<f64> {
    Ok(match sampler {
        McSampler::UniformBall => ln_ball_volume(n, r)?.exp(),
        McSampler::GaussianHit => PI.powf(n as f64 / 2.0),
    })
}

/// Monte Carlo estimate of the Gaussian ball integral with a fixed proposal.
pub fn mc_ball_integral_with(n: usize, r: f64, samples: usize, seed: u64, sampler: McSampler) -> Result<McEstimate> {
    check_mc(n, r, samples)?;
    let scale = scale_of(n, r, sampler)?;
    let m = run_sampler(n, r, samples, seed, sampler)?;
    let se = match sampler {
        McSampler::UniformBall => m.standard_error(),
        // Agresti–Coull: stays positive when every draw hits or every draw misses.
        McSampler::GaussianHit => {
            let p = (m.mean * m.count + 2.0) / (m.count + 4.0);
            (p * (1.0 - p) / (m.count + 4.0)).sqrt()
        }
    };
    Ok(McEstimate {
        mean: scale * m.mean,
        standard_error: scale * se,
        samples,
        sampler,
    })
}

/// Monte Carlo estimate of the Gaussian ball integral.
///
/// A short pilot of each proposal, on streams disjoint from the main run,
/// picks the one with the smaller relative variance; the pilot draws are
/// discarded so the estimate stays unbiased.
pub fn mc_ball_integral(n: usize, r: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_mc(n, r, samples)?;
    let rel_var = |sampler: McSampler, stream: u64| -> Result<f64> {
        let m = run_sampler(n, r, PILOT_SAMPLES, child_seed(seed, stream), sampler)?;
        let se = m.standard_error();
        Ok(if m.mean > 0.0 { (se / m.mean).powi(2) } else { f64::INFINITY })
    };
    let sampler = if rel_var(McSampler::GaussianHit, 2)? < rel_var(McSampler::UniformBall, 1)? {
        McSampler::GaussianHit
    } else {
        McSampler::UniformBall
    };
    mc_ball_integral_with(n, r, samples, child_seed(seed, 0), sampler)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMethod {
    Analytic,
    MonteCarlo,
    BoundsOnly,
}

/// Partition function over a union of disjoint pattern balls.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEstimate {
    pub value: f64,
    pub ln_value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Sum of the `e^{−r}·V_n(r)` variants.
    pub paper_lower_variant: f64,
    pub mc_estimate: Option<McEstimate>,
    pub method: PartitionMethod,
}

impl PartitionEstimate {
    /// Partition value known only through its bounds, with the value at the upper bound.
    pub fn from_value(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(domain(format!("partition value must be positive, got {value}")));
        }
        Ok(Self {
            value,
            ln_value: value.ln(),
            lower_bound: value,
            upper_bound: value,
            paper_lower_variant: value,
            mc_estimate: None,
            method: PartitionMethod::Analytic,
        })
    }
}

fn ln_sum_exp(terms: &[f64]) -> f64 {
    crate::numerics::lse_unchecked(terms)
}

/// `Z = Σ_i ∫_{B_i} exp(−‖x − ρ^i‖²) dx` over disjoint balls.
pub fn layer_partition(set: &PatternSet, radii: &[f64]) -> Result<PartitionEstimate> {
    let geometry = check_storage_geometry(set, radii)?;
    if !geometry.separation_ok {
        let (i, j) = geometry.violations[0];
        return Err(Error::Precondition(format!(
            "balls {i} and {j} overlap; the integral over their union does not split"
        )));
    }
    let n = set.dim();
    let ln_terms = radii.iter().map(|&r| ln_gaussian_ball_integral(n, r)).collect::<Result<Vec<_>>>()?;
    let ln_value = ln_sum_exp(&ln_terms);
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut variant = 0.0;
    for &r in radii {
        let (lo, hi) = ball_integral_bounds(n, r)?;
        lower += lo;
        upper += hi;
        variant += paper_lower_bound_variant(n, r)?;
    }
    Ok(PartitionEstimate {
        value: ln_value.exp(),
        ln_value,
        lower_bound: lower,
        upper_bound: upper,
        paper_lower_variant: variant,
        mc_estimate: None,
        method: PartitionMethod::Analytic,
    })
}

/// [`layer_partition`] plus a Monte Carlo estimate of `∫_Ω exp(−g(x)) dx`
/// with `samples_per_ball` uniform draws in each ball and the exact
/// nearest-pattern distance as integrand.
pub fn layer_partition_mc(set: &PatternSet, radii: &[f64], samples_per_ball: usize, seed: u64) -> Result<PartitionEstimate> {
    let mut est = layer_partition(set, radii)?;
    if samples_per_ball < MIN_MC_SAMPLES {
        return Err(argument(format!("need at least {MIN_MC_SAMPLES} samples, got {samples_per_ball}")));
    }
    let n = set.dim();
    if n > MAX_MC_DIMENSION {
        return Err(argument(format!("dimension {n} exceeds the sampler limit {MAX_MC_DIMENSION}")));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        let center = set.pattern(i);
        let volume = ln_ball_volume(n, r)?.exp();
        let m = batched_moments(samples_per_ball, child_seed(seed, i as u64), 0, |rng, _| {
            let x = sample_in_ball(rng, center, r);
            (-nearest_unchecked(&x, set).1).exp()
        });
        mean += volume * m.mean;
        var += (volume * m.standard_error()).powi(2);
    }
    est.mc_estimate = Some(McEstimate {
        mean,
        standard_error: var.sqrt(),
        samples: samples_per_ball * radii.len(),
        sampler: McSampler::UniformBall,
    });
    Ok(est)
}

/// `√(n/(2πe))`, the radius where the n-ball has volume of order one.
pub fn critical_radius(n: usize) -> Result<f64> {
    check_n(n)?;
    Ok((n as f64 / (2.0 * PI * E)).sqrt())
}

/// `log z + 1/z`, minimized at `z = 1` with value 1.
pub fn loss_from_partition(z: f64) -> Result<f64> {
    if !(z.is_finite() && z > 0.0) {
        return Err(domain(format!("partition value must be positive and finite, got {z}")));
    }
    Ok(z.ln() + 1.0 / z)
}

/// Common radius `r` with `d·∫_{B(r)} exp(−‖y‖²) dy = 1`, found by bisection.
pub fn radius_for_unit_partition(n: usize, d: usize) -> Result<f64> {
    check_n(n)?;
    if d == 0 {
        return Err(argument("pattern count must be ≥ 1"));
    }
    let ln_d = (d as f64).ln();
    let f = |r: f64| ln_d + ln_gaussian_ball_integral(n, r).expect("valid radius");
    if f(f64::INFINITY) <= 0.0 {
        return Err(domain(format!(
            "{d} balls in dimension {n} cannot reach Z = 1: the full Gaussian mass is {}",
            (f(f64::INFINITY)).exp()
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * hi.max(1.0) || mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Cross-entropy loss of the layered model on held-out stored patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct LossModelResult {
    /// `log Z_θ + (1/d′) Σ E_global(ρ)` with layer energies `exp(−g_t)/Z_t`.
    pub loss: f64,
    pub log_partition: f64,
    /// Mean of `1/Z_t` over the layer active at each validation pattern.
    pub inverse_partition: f64,
    /// Mean global energy over validation patterns.
    pub energy_term: f64,
    /// Mean over validation points of `c(x) = E_global − min_t E_t + log l`.
    pub gap_c_used: f64,
    pub gap_c_min: f64,
    pub gap_c_max: f64,
    pub layer_count: usize,
    /// Mean of `log Z_t + 1/Z_t` over the active layers.
    pub partition_form: f64,
    /// `log Z_θ` plus mean distance-form global energy (smooth minimum of distance layer energies).
    pub distance_form_loss: f64,
    pub distance_energy_min: f64,
    pub distance_energy_max: f64,
    pub layer_partitions: Vec<f64>,
}

/// Evaluates the loss at validation patterns.
///
/// Each layer's partition `Z_t` is [`layer_partition`] over that layer's
/// balls. `z_theta` must integrate over the same union of balls.
pub fn cross_entropy_loss(
    set: &PatternSet,
    radii: &[f64],
    validation: &ValidationSet,
    layers: &LayerAssignment,
    z_theta: &PartitionEstimate,
) -> Result<LossModelResult> {
    if radii.len() != set.len() {
        return Err(argument(format!("{} radii given for {} patterns", radii.len(), set.len())));
    }
    if let Some(&i) = validation.indices().iter().find(|&&i| i >= set.len()) {
        return Err(argument(format!("validation index {i} out of range 0..{}", set.len())));
    }
    if !(z_theta.value > 0.0) {
        return Err(domain("Z_θ must be positive"));
    }
    let sets = layers.layer_sets(set)?;
    let layer_partitions = layers
        .all_members()
        .iter()
        .zip(&sets)
        .map(|(members, s)| {
            let r: Vec<f64> = members.iter().map(|&i| radii[i]).collect();
            layer_partition(s, &r).map(|z| z.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let log_partition = z_theta.ln_value;
    let count = validation.indices().len() as f64;
    let mut energy_term = 0.0;
    let mut inverse_partition = 0.0;
    let mut partition_form = 0.0;
    let mut gap_sum = 0.0;
    let (mut gap_min, mut gap_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut distance_sum = 0.0;
    let (mut dist_min, mut dist_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in validation.indices() {
        let x = set.pattern(v);
        let densities: Vec<f64> = sets
            .iter()
            .zip(&layer_partitions)
            .map(|(s, z)| (-nearest_unchecked(x, s).1).exp() / z)
            .collect();
        let global = GlobalEnergyResult::from_layer_energies(densities)?;
        energy_term += global.value;
        let z_active = layer_partitions[global.active_layer];
        inverse_partition += 1.0 / z_active;
        partition_form += loss_from_partition(z_active)?;
        gap_sum += global.gap_c;
        gap_min = gap_min.min(global.gap_c);
        gap_max = gap_max.max(global.gap_c);

        let distances: Vec<f64> = sets
            .iter()
            .map(|s| crate::energy::layer_energy_unchecked(x, s, 1.0))
            .collect();
        let e = smooth_min_unchecked(&distances);
        distance_sum += e;
        dist_min = dist_min.min(e);
        dist_max = dist_max.max(e);
    }
    energy_term /= count;
    Ok(LossModelResult {
        loss: log_partition + energy_term,
        log_partition,
        inverse_partition: inverse_partition / count,
        energy_term,
        gap_c_used: gap_sum / count,
        gap_c_min: gap_min,
        gap_c_max: gap_max,
        layer_count: layers.layers(),
        partition_form: partition_form / count,
        distance_form_loss: log_partition + distance_sum / count,
        distance_energy_min: dist_min,
        distance_energy_max: dist_max,
        layer_partitions,
    })
}

/// One row of the analytic-vs-Monte-Carlo diagnostic table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionDiagnostic {
    pub n: usize,
    pub r: f64,
    pub analytic: f64,
    pub mc: McEstimate,
    pub lower: f64,
    pub upper: f64,
    pub paper_lower_variant: f64,
}

/// Diagnostics over every `(n, r)` pair; pair `k` uses seed `child_seed(seed, k)`.
pub fn partition_diagnostics(dims: &[usize], radii: &[f64], samples: usize, seed: u64) -> Result<Vec<PartitionDiagnostic>> {
    let mut rows = Vec::with_capacity(dims.len() * radii.len());
    for &n in dims {
        for &r in radii {
            let k = rows.len() as u64;
            let (lower, upper) = ball_integral_bounds(n, r)?;
            rows.push(PartitionDiagnostic {
                n,
                r,
                analytic: gaussian_ball_integral(n, r)?,
                mc: mc_ball_integral(n, r, samples, child_seed(seed, k))?,
                lower,
                upper,
                paper_lower_variant: paper_lower_bound_variant(n, r)?,
            });
        }
    }
    Ok(rows)
}

/// CSV with header `n,r,analytic,mc_mean,mc_se,lower,upper,paper_lower_variant,mc_sampler`.
pub fn write_diagnostics_csv<W: Write>(rows: &[PartitionDiagnostic], mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "n,r,analytic,mc_mean,mc_se,lower,upper,paper_lower_variant,mc_sampler")?;
    for d in rows {
        writeln!(
            sink,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            d.n,
            d.r,
            d.analytic,
            d.mc.mean,
            d.mc.standard_error,
            d.lower,
            d.upper,
            d.paper_lower_variant,
            d.mc.sampler.name()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{partition_layers, LayerStrategy};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_forms() {
        assert!(rel(gaussian_ball_integral(1, 1.0).unwrap(), 1.493_648_265_624_854) < 1e-12);
        assert!(rel(gaussian_ball_integral(2, 1.0).unwrap(), PI * (1.0 - (-1f64).exp())) < 1e-12);
        assert!(rel(gaussian_ball_integral(2, f64::INFINITY).unwrap(), PI) < 1e-15);
        assert!(rel(gaussian_ball_integral(3, 2.0).unwrap(), 5.312_119_727_860_38) < 1e-12);
        assert!(gaussian_ball_integral(0, 1.0).is_err());
        assert!(gaussian_ball_integral(2, 0.0).is_err());
    }

    #[test]
    fn bounds_bracket_and_pinch() {
        let (lo, hi) = ball_integral_bounds(2, 1.0).unwrap();
        assert!(rel(lo, PI / E) < 1e-12 && rel(hi, PI) < 1e-12);
        for (n, r) in [(2, 1.0), (8, 2.0), (1, 0.1), (30, 3.0)] {
            let (lo, hi) = ball_integral_bounds(n, r).unwrap();
            let v = gaussian_ball_integral(n, r).unwrap();
            assert!(lo <= v && v <= hi, "{n} {r}");
        }
        let (lo, hi) = ball_integral_bounds(5, 1e-4).unwrap();
        assert!(lo / hi > 1.0 - 1e-7);
    }

    #[test]
    fn lower_variant_is_not_a_bound_at_large_radius() {
        let (tight, _) = ball_integral_bounds(2, 0.5).unwrap();
        assert!(paper_lower_bound_variant(2, 0.5).unwrap() < tight);
        assert!(paper_lower_bound_variant(8, 2.0).unwrap() > gaussian_ball_integral(8, 2.0).unwrap());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let a = mc_ball_integral(1, 1.0, 200_000, 3).unwrap();
        let b = mc_ball_integral(1, 1.0, 200_000, 3).unwrap();
        assert_eq!(a, b);
        let exact = gaussian_ball_integral(1, 1.0).unwrap();
        assert!((a.mean - exact).abs() < 4.0 * a.standard_error);
        let tiny = mc_ball_integral(3, 1e-3, 5_000, 1).unwrap();
        assert!(rel(tiny.mean, crate::numerics::ball_volume(3, 1e-3).unwrap()) < 1e-5);
        assert!(mc_ball_integral(3, 1.0, 999, 1).is_err());
        assert!(mc_ball_integral(MAX_MC_DIMENSION + 1, 1.0, 1000, 1).is_err());
    }

    #[test]
    fn pilot_picks_the_lower_variance_proposal() {
        let wide = mc_ball_integral(8, 5.0, 20_000, 4).unwrap();
        assert_eq!(wide.sampler, McSampler::GaussianHit);
        let narrow = mc_ball_integral(8, 0.5, 20_000, 4).unwrap();
        assert_eq!(narrow.sampler, McSampler::UniformBall);
        for (n, r) in [(8, 5.0), (8, 0.5), (3, 1.0)] {
            let exact = gaussian_ball_integral(n, r).unwrap();
            for sampler in [McSampler::UniformBall, McSampler::GaussianHit] {
                let est = mc_ball_integral_with(n, r, 50_000, 9, sampler).unwrap();
                assert!((est.mean - exact).abs() <= 4.0 * est.standard_error + 1e-12, "{n} {r} {sampler:?}");
            }
        }
    }

    #[test]
    fn layer_partition_additivity() {
        let one = PatternSet::from_rows(&[[0.0, 0.0]]).unwrap();
        let z = layer_partition(&one, &[1.0]).unwrap();
        assert_eq!(z.value, gaussian_ball_integral(2, 1.0).unwrap());
        let three = PatternSet::from_rows(&[[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]]).unwrap();
        let z3 = layer_partition(&three, &[1.0; 3]).unwrap();
        assert!(rel(z3.value, 3.0 * z.value) < 1e-14);
        assert!(z3.lower_bound <= z3.value && z3.value <= z3.upper_bound);
        let close = PatternSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(layer_partition(&close, &[0.6, 0.6]), Err(Error::Precondition(_))));
    }

    #[test]
    fn critical_radius_values() {
        assert!((critical_radius(1024).unwrap() - 7.743_063_184_612_587).abs() < 1e-12);
        assert!((critical_radius(256).unwrap() - 3.871_531_592_306_293_6).abs() < 1e-12);
        let n = 2.0 * PI * E;
        assert!(((n / (2.0 * PI * E)).sqrt() - 1.0).abs() < 1e-15);
        assert!(critical_radius(0).is_err());
    }

    #[test]
    fn loss_is_minimized_at_unit_partition() {
        assert_eq!(loss_from_partition(1.0).unwrap(), 1.0);
        assert!((loss_from_partition(E).unwrap() - (1.0 + 1.0 / E)).abs() < 1e-15);
        assert!(loss_from_partition(0.0).is_err());
        assert!(loss_from_partition(-1.0).is_err());
    }

    #[test]
    fn unit_partition_radius() {
        for (n, d) in [(1, 1), (2, 3), (8, 5), (64, 10)] {
            let r = radius_for_unit_partition(n, d).unwrap();
            let z = d as f64 * gaussian_ball_integral(n, r).unwrap();
            assert!((z - 1.0).abs() < 1e-9, "{n} {d} {z}");
        }
        assert!(radius_for_unit_partition(0, 1).is_err());
    }

    #[test]
    fn tuned_single_layer_loss_is_one() {
        let d = 4;
        let set = PatternSet::from_rows(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]]).unwrap();
        let r = radius_for_unit_partition(2, d).unwrap();
        let radii = vec![r; d];
        let z = layer_partition(&set, &radii).unwrap();
        let layers = partition_layers(&set, 1, LayerStrategy::Contiguous, &[1.0]).unwrap();
        let val = ValidationSet::new(vec![0, 2], d).unwrap();
        let res = cross_entropy_loss(&set, &radii, &val, &layers, &z).unwrap();
        assert!((res.loss - 1.0).abs() < 1e-8, "{res:?}");
        assert!((res.loss - (res.log_partition + res.inverse_partition)).abs() < 1e-12);
        assert_eq!(res.gap_c_used, 0.0);
        let ln_d = (d as f64).ln();
        assert!(res.distance_energy_min >= -ln_d && res.distance_energy_max <= 0.0);
    }

    #[test]
    fn layered_loss_reports_gap_spread() {
        let set = PatternSet::from_rows(&[[0.0], [10.0], [20.0], [30.0]]).unwrap();
        let radii = vec![1.0; 4];
        let layers = partition_layers(&set, 2, LayerStrategy::RoundRobin, &[1.0, 1.0]).unwrap();
        let z = layer_partition(&set, &radii).unwrap();
        let res = cross_entropy_loss(&set, &radii, &ValidationSet::all(4).unwrap(), &layers, &z).unwrap();
        assert_eq!(res.layer_count, 2);
        assert!(res.gap_c_min >= 0.0 && res.gap_c_max < 2f64.ln());
        assert_eq!(res.layer_partitions.len(), 2);
    }

    #[test]
    fn diagnostics_csv_header() {
        let rows = partition_diagnostics(&[1], &[1.0], 1000, 0).unwrap();
        let mut out = Vec::new();
        write_diagnostics_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("n,r,analytic,mc_mean,mc_se,lower,upper,paper_lower_variant,mc_sampler\n1,"));
    }
}
