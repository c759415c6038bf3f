//! Energy functions over stored patterns.
//!
//! Continuous energies: the nearest-distance function `g`, the distance-based
//! LogSumExp layer energy `E`, the modern continuous Hopfield (MCHN) energy,
//! and the smooth-minimum global energy over stacked layers. Binary energies:
//! classical Hebbian, dense polynomial and exponential (LogSumExp) networks.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{argument, domain, Error, Result};
use crate::numerics::{dot, lse_unchecked, smooth_min_unchecked, sq_dist};
use crate::patterns::{LayerAssignment, PatternSet};

/// Which energy a network uses, with its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergySpec {
    ClassicalBinary,
    DensePolynomial { order: u32 },
    ExponentialBinary,
    Mchn { beta: f64 },
    Distance { beta: f64 },
}

impl EnergySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EnergySpec::DensePolynomial { order } if order < 2 => {
                Err(argument(format!("polynomial order must be ≥ 2, got {order}")))
            }
            EnergySpec::Mchn { beta } | EnergySpec::Distance { beta } => check_beta(beta),
            _ => Ok(()),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            EnergySpec::ClassicalBinary | EnergySpec::DensePolynomial { .. } | EnergySpec::ExponentialBinary
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergySpec::ClassicalBinary => "classical",
            EnergySpec::DensePolynomial { .. } => "dense",
            EnergySpec::ExponentialBinary => "exponential",
            EnergySpec::Mchn { .. } => "mchn",
            EnergySpec::Distance { .. } => "distance",
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(argument(format!("inverse temperature must be positive and finite, got {beta}")))
    }
}

/// `g(x) = min_i ‖x − ρ^i‖²`.
pub fn g_energy(x: &[f64], set: &PatternSet) -> Result<f64> {
    set.check_dim(x)?;
    Ok(set.iter().map(|p| sq_dist(x, p)).fold(f64::INFINITY, f64::min))
}

/// Distance-based layer energy `−β⁻¹ log Σ_i exp(−β‖x − ρ^i‖²)`.
pub fn layer_energy(x: &[f64], set: &PatternSet, beta: f64) -> Result<f64> {
    set.check_dim(x)?;
    check_beta(beta)?;
    Ok(layer_energy_unchecked(x, set, beta))
}

pub(crate) fn layer_energy_unchecked(x: &[f64], set: &PatternSet, beta: f64) -> f64 {
    let scaled: Vec<f64> = set.iter().map(|p| beta * sq_dist(x, p)).collect();
    smooth_min_unchecked(&scaled) / beta
}

/// `−LSE(β, Mᵀx) = −β⁻¹ log Σ_i exp(β ρ^iᵀx)`.
pub fn neg_log_sum_exp_energy(x: &[f64], set: &PatternSet, beta: f64) -> Result<f64> {
    set.check_dim(x)?;
    check_beta(beta)?;
    Ok(neg_lse_unchecked(x, set, beta))
}

fn neg_lse_unchecked(x: &[f64], set: &PatternSet, beta: f64) -> f64 {
    let overlaps: Vec<f64> = set.iter().map(|p| beta * dot(p, x)).collect();
    -lse_unchecked(&overlaps) / beta
}

/// Regularizer of the MCHN energy: `½xᵀx + β⁻¹ log d + max_i ‖ρ^i‖²/2`.
pub fn mchn_regularizer(x: &[f64], set: &PatternSet, beta: f64) -> Result<f64> {
    set.check_dim(x)?;
    check_beta(beta)?;
    Ok(mchn_regularizer_unchecked(x, set, beta))
}

fn mchn_regularizer_unchecked(x: &[f64], set: &PatternSet, beta: f64) -> f64 {
    let max_norm2 = set.squared_norms().into_iter().fold(f64::NEG_INFINITY, f64::max);
    0.5 * dot(x, x) + (set.len() as f64).ln() / beta + 0.5 * max_norm2
}

/// MCHN energy `−LSE(β, Mᵀx) + ½xᵀx + β⁻¹ log d + max_i ‖ρ^i‖²/2`.
pub fn mchn_energy(x: &[f64], set: &PatternSet, beta: f64) -> Result<f64> {
    set.check_dim(x)?;
    check_beta(beta)?;
    Ok(mchn_unchecked(x, set, beta))
}

pub(crate) fn mchn_unchecked(x: &[f64], set: &PatternSet, beta: f64) -> f64 {
    neg_lse_unchecked(x, set, beta) + mchn_regularizer_unchecked(x, set, beta)
}

// ---------------------------------------------------------------------------
// Binary networks

/// Spin vector in {−1, +1}ⁿ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryState(Vec<i8>);

impl BinaryState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(argument("binary state must be non-empty"));
        }
        if let Some(i) = spins.iter().position(|s| *s != 1 && *s != -1) {
            return Err(domain(format!("spin {i} is {}, expected ±1", spins[i])));
        }
        Ok(Self(spins))
    }

    pub fn from_reals(values: &[f64]) -> Result<Self> {
        let spins = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                v if v == 1.0 => Ok(1),
                v if v == -1.0 => Ok(-1),
                _ => Err(domain(format!("entry {i} is {v}, expected ±1"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(spins)
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_reals(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.0
    }

    /// Number of differing spins.
    pub fn hamming(&self, other: &BinaryState) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

pub(crate) fn check_binary_patterns(set: &PatternSet) -> Result<()> {
    for (i, p) in set.iter().enumerate() {
        if let Some(j) = p.iter().position(|v| *v != 1.0 && *v != -1.0) {
            return Err(domain(format!("pattern {i} entry {j} is {}, expected ±1", p[j])));
        }
    }
    Ok(())
}

fn check_state_dim(s: &BinaryState, n: usize) -> Result<()> {
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.len(),
        });
    }
    Ok(())
}

/// Scale applied to the Hebbian outer-product sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HebbianNormalization {
    /// `1/d`, averaging over patterns.
    #[default]
    PerPattern,
    /// `1/n`, the textbook Hopfield scaling.
    PerDimension,
}

/// Symmetric zero-diagonal coupling matrix with bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HebbianWeights {
    n: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl HebbianWeights {
    pub fn new(w: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n == 0 || w.len() != n * n {
            return Err(argument(format!("weights must be {n}×{n} for a bias of length {n}")));
        }
        for i in 0..n {
            if w[i * n + i] != 0.0 {
                return Err(argument(format!("diagonal entry {i} must be zero")));
            }
            for j in i + 1..n {
                if w[i * n + j] != w[j * n + i] {
                    return Err(argument(format!("weights not symmetric at ({i}, {j})")));
                }
            }
        }
        if w.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(argument("weights must be finite"));
        }
        Ok(Self { n, w, b })
    }

    /// `W = c·Σ_i ρ^i(ρ^i)ᵀ` with the diagonal zeroed and `b = 0`.
    pub fn hebbian(set: &PatternSet, normalization: HebbianNormalization) -> Result<Self> {
        check_binary_patterns(set)?;
        let n = set.dim();
        let scale = match normalization {
            HebbianNormalization::PerPattern => 1.0 / set.len() as f64,
            HebbianNormalization::PerDimension => 1.0 / n as f64,
        };
        let mut w = vec![0.0; n * n];
        for p in set.iter() {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        w[i * n + j] += p[i] * p[j];
                    }
                }
            }
        }
        w.iter_mut().for_each(|v| *v *= scale);
        Ok(Self { n, w, b: vec![0.0; n] })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn bias(&self) -> &[f64] {
        &self.b
    }

    /// Local field `(Ws + b)_i`.
    pub fn field(&self, s: &[i8], i: usize) -> f64 {
        let row = &self.w[i * self.n..(i + 1) * self.n];
        row.iter().zip(s).map(|(w, &x)| w * f64::from(x)).sum::<f64>() + self.b[i]
    }
}

/// `−½ sᵀWs − bᵀs`.
pub fn classical_energy(s: &BinaryState, w: &HebbianWeights) -> Result<f64> {
    check_state_dim(s, w.dim())?;
    let spins = s.spins();
    let mut quad = 0.0;
    for i in 0..w.dim() {
        let row: f64 = (0..w.dim()).map(|j| w.weight(i, j) * f64::from(spins[j])).sum();
        quad += f64::from(spins[i]) * row;
    }
    let lin: f64 = w.bias().iter().zip(spins).map(|(b, &x)| b * f64::from(x)).sum();
    Ok(-0.5 * quad - lin)
}

fn overlaps(s: &BinaryState, set: &PatternSet) -> Vec<f64> {
    set.iter()
        .map(|p| p.iter().zip(s.spins()).map(|(a, &x)| a * f64::from(x)).sum())
        .collect()
}

/// Dense associative memory energy `−Σ_i ((ρ^i)ᵀs)^r`.
pub fn dense_energy(s: &BinaryState, set: &PatternSet, order: u32) -> Result<f64> {
    check_state_dim(s, set.dim())?;
    check_binary_patterns(set)?;
    if order < 2 {
        return Err(argument(format!("polynomial order must be ≥ 2, got {order}")));
    }
    Ok(-overlaps(s, set).iter().map(|m| m.powi(order as i32)).sum::<f64>())
}

/// Exponential network energy `−LSE(Mᵀs)`.
pub fn exponential_energy(s: &BinaryState, set: &PatternSet) -> Result<f64> {
    check_state_dim(s, set.dim())?;
    check_binary_patterns(set)?;
    Ok(-lse_unchecked(&overlaps(s, set)))
}

// ---------------------------------------------------------------------------
// Layered structure

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalEnergyResult {
    /// `−LSE(−E_1, …, −E_l)`.
    pub value: f64,
    pub layer_energies: Vec<f64>,
    /// Layer with the smallest energy (lowest index on ties).
    pub active_layer: usize,
    /// `c(x)` in `E_global = min_t E_t − log l + c(x)`, nominally in `[0, log l)`.
    pub gap_c: f64,
}

impl GlobalEnergyResult {
    pub fn from_layer_energies(layer_energies: Vec<f64>) -> Result<Self> {
        crate::numerics::smooth_min(&layer_energies)?;
        let (active_layer, min) = layer_energies
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (t, e)| if e < best.1 { (t, e) } else { best });
        let value = smooth_min_unchecked(&layer_energies);
        let gap_c = value - min + (layer_energies.len() as f64).ln();
        Ok(Self {
            value,
            layer_energies,
            active_layer,
            gap_c,
        })
    }

    pub fn min_layer_energy(&self) -> f64 {
        self.layer_energies[self.active_layer]
    }
}

/// Global energy of stacked layers: smooth minimum of per-layer distance energies.
pub fn global_energy(
    x: &[f64],
    set: &PatternSet,
    layers: &LayerAssignment,
    beta: f64,
) -> Result<GlobalEnergyResult> {
    set.check_dim(x)?;
    check_beta(beta)?;
    let sets = layers.layer_sets(set)?;
    let energies = sets.iter().map(|s| layer_energy_unchecked(x, s, beta)).collect();
    GlobalEnergyResult::from_layer_energies(energies)
}

/// Slack of each bound relating `g`, `E` and the β = 2 MCHN energy at one point.
///
/// Every `*_slack` is non-negative exactly when its bound holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropositionReport {
    pub g: f64,
    pub energy: f64,
    pub mchn_beta2: f64,
    /// `E − (g − log d)`.
    pub p1_lower_slack: f64,
    /// `g − E`.
    pub p1_upper_slack: f64,
    /// `|E − (2E_MCHN − log d)|`.
    pub p2_gap: f64,
    /// `max‖ρ‖² − min‖ρ‖²`.
    pub p2_bound: f64,
    /// `(g − 2E_MCHN) − (min‖ρ‖² − max‖ρ‖²)`.
    pub p3_lower_slack: f64,
    /// `(max‖ρ‖² − min‖ρ‖² + log d) − (g − 2E_MCHN)`.
    pub p3_upper_slack: f64,
    /// `(g − 2E_MCHN) − (min‖ρ‖² − max‖ρ‖² − log d)`; the lower end implied by combining the first two bounds.
    pub p3_combined_lower_slack: f64,
    /// `(max‖ρ‖² − min‖ρ‖²) − (g − 2E_MCHN)`; the matching upper end.
    pub p3_combined_upper_slack: f64,
}

impl PropositionReport {
    pub fn p2_slack(&self) -> f64 {
        self.p2_bound - self.p2_gap
    }

    /// Smallest slack across the two-sided `g`/`E` bound, the MCHN gap bound
    /// and the combined `g − 2E_MCHN` interval.
    pub fn min_slack(&self) -> f64 {
        [
            self.p1_lower_slack,
            self.p1_upper_slack,
            self.p2_slack(),
            self.p3_combined_lower_slack,
            self.p3_combined_upper_slack,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    /// Smaller slack of the interval `[min‖ρ‖² − max‖ρ‖², max‖ρ‖² − min‖ρ‖² + log d]`.
    ///
    /// This interval can fail by up to `log d` on its lower end, e.g. for
    /// patterns `{0, 10}` at `x = −1`.
    pub fn p3_printed_slack(&self) -> f64 {
        self.p3_lower_slack.min(self.p3_upper_slack)
    }
}

/// Evaluates `g`, `E` (β = 1) and `E_MCHN` (β = 2) at `x`, then the bound slacks.
pub fn proposition_report(x: &[f64], set: &PatternSet) -> Result<PropositionReport> {
    set.check_dim(x)?;
    let g = g_energy(x, set)?;
    let energy = layer_energy_unchecked(x, set, 1.0);
    let mchn_beta2 = mchn_unchecked(x, set, 2.0);
    Ok(report_from_parts(g, energy, mchn_beta2, set))
}

/// Bound slacks from already-evaluated energies; lets callers substitute their own MCHN value.
pub fn report_from_parts(g: f64, energy: f64, mchn_beta2: f64, set: &PatternSet) -> PropositionReport {
    let norms = set.squared_norms();
    let max = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let ln_d = (set.len() as f64).ln();
    let spread = max - min;
    let g_minus_m = g - 2.0 * mchn_beta2;
    PropositionReport {
        g,
        energy,
        mchn_beta2,
        p1_lower_slack: energy - (g - ln_d),
        p1_upper_slack: g - energy,
        p2_gap: (energy - (2.0 * mchn_beta2 - ln_d)).abs(),
        p2_bound: spread,
        p3_lower_slack: g_minus_m + spread,
        p3_upper_slack: spread + ln_d - g_minus_m,
        p3_combined_lower_slack: g_minus_m + spread + ln_d,
        p3_combined_upper_slack: spread - g_minus_m,
    }
}

// ---------------------------------------------------------------------------
// Landscapes

/// Continuous surfaces that can be tabulated on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Landscape {
    NegLogSumExp { beta: f64 },
    MchnRegularizer { beta: f64 },
    Mchn { beta: f64 },
    Distance { beta: f64 },
}

impl Landscape {
    pub fn beta(&self) -> f64 {
        match *self {
            Landscape::NegLogSumExp { beta }
            | Landscape::MchnRegularizer { beta }
            | Landscape::Mchn { beta }
            | Landscape::Distance { beta } => beta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Landscape::NegLogSumExp { .. } => "lse",
            Landscape::MchnRegularizer { .. } => "regularizer",
            Landscape::Mchn { .. } => "mchn",
            Landscape::Distance { .. } => "distance",
        }
    }

    pub fn evaluate(&self, x: &[f64], set: &PatternSet) -> Result<f64> {
        match *self {
            Landscape::NegLogSumExp { beta } => neg_log_sum_exp_energy(x, set, beta),
            Landscape::MchnRegularizer { beta } => mchn_regularizer(x, set, beta),
            Landscape::Mchn { beta } => mchn_energy(x, set, beta),
            Landscape::Distance { beta } => layer_energy(x, set, beta),
        }
    }
}

impl TryFrom<EnergySpec> for Landscape {
    type Error = Error;

    fn try_from(spec: EnergySpec) -> Result<Self> {
        match spec {
            EnergySpec::Mchn { beta } => Ok(Landscape::Mchn { beta }),
            EnergySpec::Distance { beta } => Ok(Landscape::Distance { beta }),
            other => Err(argument(format!("{} energy has no continuous landscape", other.name()))),
        }
    }
}

/// Energy tabulated on a regular grid. With two axes the first coordinate
/// varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub dim: usize,
    pub resolution: usize,
    pub points: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

impl LandscapeGrid {
    /// CSV with header `x[,y],energy`, values as 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        let header = if self.dim == 1 { "x,energy" } else { "x,y,energy" };
        writeln!(sink, "{header}")?;
        for (p, e) in self.points.iter().zip(&self.energies) {
            for v in p {
                write!(sink, "{v:.16e},")?;
            }
            writeln!(sink, "{e:.16e}")?;
        }
        Ok(())
    }

    /// Grid indices of strict local minima (over the axis-aligned neighbours).
    pub fn local_minima(&self) -> Vec<usize> {
        let r = self.resolution;
        let at = |i: usize, j: usize| self.energies[i * if self.dim == 1 { 1 } else { r } + j];
        let mut out = Vec::new();
        if self.dim == 1 {
            for i in 1..r - 1 {
                if at(0, i) < at(0, i - 1) && at(0, i) < at(0, i + 1) {
                    out.push(i);
                }
            }
        } else {
            for i in 1..r - 1 {
                for j in 1..r - 1 {
                    let e = at(i, j);
                    if e < at(i - 1, j) && e < at(i + 1, j) && e < at(i, j - 1) && e < at(i, j + 1) {
                        out.push(i * r + j);
                    }
                }
            }
        }
        out
    }
}

/// Tabulates `kind` over the box `[lower, upper]` with `resolution` points per axis.
pub fn landscape_grid(
    set: &PatternSet,
    kind: Landscape,
    lower: &[f64],
    upper: &[f64],
    resolution: usize,
) -> Result<LandscapeGrid> {
    let n = set.dim();
    if n > 2 {
        return Err(argument(format!(
            "landscapes need 1-D or 2-D patterns, got n = {n}; project onto a 1-D or 2-D slice first"
        )));
    }
    if lower.len() != n || upper.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lower.len().max(upper.len()),
        });
    }
    if resolution < 2 {
        return Err(argument("resolution must be ≥ 2"));
    }
    if lower.iter().zip(upper).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
        return Err(argument("box corners must be finite with lower < upper"));
    }
    check_beta(kind.beta())?;
    let axis = |k: usize, i: usize| lower[k] + (upper[k] - lower[k]) * i as f64 / (resolution - 1) as f64;
    let points: Vec<Vec<f64>> = if n == 1 {
        (0..resolution).map(|i| vec![axis(0, i)]).collect()
    } else {
        (0..resolution)
            .flat_map(|i| (0..resolution).map(move |j| (i, j)))
            .map(|(i, j)| vec![axis(0, i), axis(1, j)])
            .collect()
    };
    let energies = points
        .par_iter()
        .map(|p| kind.evaluate(p, set))
        .collect::<Result<Vec<f64>>>()?;
    Ok(LandscapeGrid {
        dim: n,
        resolution,
        points,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_1d() -> PatternSet {
        PatternSet::from_rows(&[[-2.0], [0.0], [1.0]]).unwrap()
    }

    fn sample_2d() -> PatternSet {
        PatternSet::from_rows(&[[-2.0, -0.5], [0.2, -0.3], [1.5, 1.5]]).unwrap()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_energy(&[0.0], &sample_1d()).unwrap(), 0.0);
        assert!((g_energy(&[0.4], &sample_1d()).unwrap() - 0.16).abs() < 1e-15);
        assert!((g_energy(&[0.0, 0.0], &sample_2d()).unwrap() - 0.13).abs() < 1e-15);
        assert!(g_energy(&[0.0, 0.0], &sample_1d()).is_err());
    }

    #[test]
    fn layer_energy_examples() {
        let e = layer_energy(&[0.0], &sample_1d(), 1.0).unwrap();
        assert!((e + 0.326_562_641_267_470_5).abs() < 1e-15);
        let single = PatternSet::from_rows(&[[1.0, 2.0, -1.0]]).unwrap();
        let x = [0.3, -0.7, 2.0];
        assert_eq!(
            layer_energy(&x, &single, 1.0).unwrap(),
            crate::numerics::squared_euclidean(&x, single.pattern(0)).unwrap()
        );
        for x in [-3.0, -1.0, 0.4, 0.5, 2.5] {
            let g = g_energy(&[x], &sample_1d()).unwrap();
            let e = layer_energy(&[x], &sample_1d(), 1.0).unwrap();
            assert!(g - 3f64.ln() <= e && e <= g);
        }
        assert!(layer_energy(&[0.0], &sample_1d(), 0.0).is_err());
    }

    #[test]
    fn mchn_single_pattern_is_half_squared_distance() {
        let single = PatternSet::from_rows(&[[1.0, -2.0]]).unwrap();
        for beta in [0.5, 1.0, 3.0] {
            let x = [0.25, 0.75];
            let e = mchn_energy(&x, &single, beta).unwrap();
            let want = 0.5 * sq_dist(&x, single.pattern(0));
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mchn_is_not_translation_invariant() {
        let set = sample_1d();
        let shifted = PatternSet::from_rows(&[[3.0], [5.0], [6.0]]).unwrap();
        let a = mchn_energy(&[0.3], &set, 1.0).unwrap();
        let b = mchn_energy(&[5.3], &shifted, 1.0).unwrap();
        assert!((a - b).abs() > 1e-3);
        let a = layer_energy(&[0.3], &set, 1.0).unwrap();
        let b = layer_energy(&[5.3], &shifted, 1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn classical_energy_of_single_stored_pattern() {
        let n = 12;
        let p: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let set = PatternSet::from_rows(&[p.clone()]).unwrap();
        let s = BinaryState::from_reals(&p).unwrap();
        let per_dim = HebbianWeights::hebbian(&set, HebbianNormalization::PerDimension).unwrap();
        let e = classical_energy(&s, &per_dim).unwrap();
        // sᵀWs = (n² − n)/n
        assert!((e + (n as f64 - 1.0) / 2.0).abs() < 1e-12);
        let per_pattern = HebbianWeights::hebbian(&set, HebbianNormalization::PerPattern).unwrap();
        let e = classical_energy(&s, &per_pattern).unwrap();
        assert!((e + (n * n - n) as f64 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn dense_energy_of_stored_pattern() {
        let n = 9;
        let p: Vec<f64> = (0..n).map(|i| if i < 4 { 1.0 } else { -1.0 }).collect();
        let set = PatternSet::from_rows(&[p.clone()]).unwrap();
        let s = BinaryState::from_reals(&p).unwrap();
        assert_eq!(dense_energy(&s, &set, 2).unwrap(), -((n * n) as f64));
        assert!(dense_energy(&s, &set, 1).is_err());
    }

    #[test]
    fn exponential_energy_prefers_stored_patterns() {
        // every non-stored state of {±1}^10 has higher energy than the best stored one
        let n = 10usize;
        let pats: Vec<Vec<f64>> = (0..4usize)
            .map(|k| (0..n).map(|i| if (i * 7 + k * 3) % 5 < 2 + k % 2 { 1.0 } else { -1.0 }).collect())
            .collect();
        let set = PatternSet::from_rows(&pats).unwrap();
        let stored: Vec<f64> = pats
            .iter()
            .map(|p| exponential_energy(&BinaryState::from_reals(p).unwrap(), &set).unwrap())
            .collect();
        let best_stored = stored.iter().copied().fold(f64::INFINITY, f64::min);
        for mask in 0u32..(1 << n) {
            let v: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            if pats.contains(&v) {
                continue;
            }
            let s = BinaryState::from_reals(&v).unwrap();
            let e = exponential_energy(&s, &set).unwrap();
            assert!(e > best_stored);
        }
        // each stored pattern is a strict local minimum under single flips
        for p in &pats {
            let s = BinaryState::from_reals(p).unwrap();
            let e0 = exponential_energy(&s, &set).unwrap();
            for i in 0..n {
                let mut t = s.clone();
                t.spins_mut()[i] *= -1;
                assert!(exponential_energy(&t, &set).unwrap() > e0);
            }
        }
    }

    #[test]
    fn binary_domain_errors() {
        assert!(BinaryState::new(vec![1, 0, -1]).is_err());
        assert!(BinaryState::from_reals(&[1.0, 0.5]).is_err());
        let set = PatternSet::from_rows(&[[1.0, 0.5]]).unwrap();
        let s = BinaryState::new(vec![1, 1]).unwrap();
        assert!(matches!(dense_energy(&s, &set, 2), Err(Error::Domain(_))));
        assert!(HebbianWeights::hebbian(&set, HebbianNormalization::PerPattern).is_err());
        assert!(HebbianWeights::new(vec![0.0, 1.0, 2.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(HebbianWeights::new(vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn global_energy_examples() {
        let set = PatternSet::from_rows(&[[0.0], [1.0], [2.5], [4.0], [-1.0], [3.0]]).unwrap();
        let x = [0.7];
        let one = crate::patterns::partition_layers(&set, 1, crate::patterns::LayerStrategy::Contiguous, &[1.0])
            .unwrap();
        let r = global_energy(&x, &set, &one, 1.0).unwrap();
        assert_eq!(r.value, layer_energy(&x, &set, 1.0).unwrap());
        assert_eq!(r.gap_c, 0.0);

        let r = GlobalEnergyResult::from_layer_energies(vec![-0.4, -0.4]).unwrap();
        assert!((r.value - (-0.4 - 2f64.ln())).abs() < 1e-15);
        assert!(r.gap_c.abs() < 1e-15);

        let two = crate::patterns::partition_layers(&set, 2, crate::patterns::LayerStrategy::RoundRobin, &[1.0, 1.0])
            .unwrap();
        let r = global_energy(&x, &set, &two, 1.0).unwrap();
        let m = r.min_layer_energy();
        assert!(m - 2f64.ln() <= r.value && r.value < m);
        assert!(r.gap_c >= 0.0 && r.gap_c < 2f64.ln());

        let three = LayerAssignment::new(vec![vec![0, 1, 2]], vec![1.0], 3).unwrap();
        assert!(global_energy(&x, &set, &three, 1.0).is_err());
    }

    #[test]
    fn equal_norm_sets_saturate_the_mchn_gap() {
        // all patterns on the circle of radius 2
        let set = PatternSet::from_rows(&[[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]]).unwrap();
        for x in [[0.1, 0.3], [1.9, -0.2], [-3.0, 4.0]] {
            let rep = proposition_report(&x, &set).unwrap();
            assert_eq!(rep.p2_bound, 0.0);
            assert!(rep.p2_gap < 1e-12);
        }
    }

    #[test]
    fn printed_mchn_interval_fails_on_its_lower_end() {
        let set = PatternSet::from_rows(&[[0.0], [10.0]]).unwrap();
        let rep = proposition_report(&[-1.0], &set).unwrap();
        assert!((rep.p3_lower_slack + 2f64.ln()).abs() < 1e-8, "{rep:?}");
        assert!(rep.p3_combined_lower_slack >= 0.0);
        assert!(rep.min_slack() >= 0.0);
    }

    #[test]
    fn sample_report_has_non_negative_slacks() {
        let rep = proposition_report(&[0.0, 0.0], &sample_2d()).unwrap();
        assert!(rep.min_slack() >= 0.0, "{rep:?}");
    }

    #[test]
    fn landscape_corners_and_errors() {
        let set = sample_1d();
        let g = landscape_grid(&set, Landscape::Distance { beta: 1.0 }, &[0.0], &[1.0], 2).unwrap();
        assert_eq!(g.points, vec![vec![0.0], vec![1.0]]);
        let set2 = sample_2d();
        let g = landscape_grid(&set2, Landscape::Mchn { beta: 1.0 }, &[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        assert_eq!(g.points, vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("x,y,energy\n0.0000000000000000e0,0.0000000000000000e0,"));

        let set3 = PatternSet::from_rows(&[[0.0, 0.0, 0.0]]).unwrap();
        let err = landscape_grid(&set3, Landscape::Distance { beta: 1.0 }, &[0.0; 3], &[1.0; 3], 4);
        assert!(matches!(err, Err(Error::Argument(_))));
        assert!(landscape_grid(&set, Landscape::Distance { beta: 1.0 }, &[0.0], &[1.0], 1).is_err());
        assert!(Landscape::try_from(EnergySpec::ClassicalBinary).is_err());
    }
}
