//! Retrieval dynamics.
//!
//! Continuous retrieval iterates the softmax-weighted pattern average, whose
//! fixed points are the stationary points of the distance energy. Layered
//! retrieval runs one such retrieval per layer and projects onto that layer's
//! trust region. Binary networks use single-spin descent.

use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::energy::{
    check_beta, check_binary_patterns, classical_energy, dense_energy, exponential_energy,
    global_energy, layer_energy_unchecked, BinaryState, EnergySpec, HebbianNormalization,
    HebbianWeights,
};
use crate::error::{argument, Error, Result};
use crate::numerics::{dot, lse_unchecked, softmax_unchecked, sq_dist};
use crate::patterns::{
    check_storage_geometry, generate_separated_patterns, nearest_unchecked, sample_in_ball,
    LayerAssignment, PatternSet, VectorSet,
};
use crate::rng::{child_seed, stream_rng};

/// Which energy the continuous iteration descends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RetrievalRule {
    /// Weights `softmax(−β‖x − ρ^i‖²)`.
    #[default]
    Distance,
    /// Weights `softmax(β ρ^iᵀx)`, the MCHN update.
    Mchn,
}

/// Iteration controls shared by every continuous retrieval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalParams {
    pub beta: f64,
    /// Convergence threshold on the Euclidean step length.
    pub tol: f64,
    pub max_iter: usize,
    /// Radius of the retrieval test around a stored pattern.
    pub epsilon: f64,
    pub rule: RetrievalRule,
}

impl Default for RetrievalParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            tol: 1e-8,
            max_iter: 500,
            epsilon: 1e-4,
            rule: RetrievalRule::Distance,
        }
    }
}

impl RetrievalParams {
    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(argument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(argument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iter == 0 {
            return Err(argument("max_iter must be ≥ 1"));
        }
        Ok(())
    }
}

/// Softmax weights of one retrieval step; non-negative and summing to one.
pub fn retrieval_weights(x: &[f64], set: &PatternSet, beta: f64, rule: RetrievalRule) -> Result<Vec<f64>> {
    set.check_dim(x)?;
    check_beta(beta)?;
    Ok(weights_unchecked(x, set, beta, rule))
}

fn weights_unchecked(x: &[f64], set: &PatternSet, beta: f64, rule: RetrievalRule) -> Vec<f64> {
    let scores: Vec<f64> = match rule {
        RetrievalRule::Distance => set.iter().map(|p| -beta * sq_dist(x, p)).collect(),
        RetrievalRule::Mchn => set.iter().map(|p| beta * dot(p, x)).collect(),
    };
    softmax_unchecked(&scores)
}

fn combine(weights: &[f64], set: &PatternSet) -> Vec<f64> {
    let mut out = vec![0.0; set.dim()];
    for (w, p) in weights.iter().zip(set.iter()) {
        for (o, v) in out.iter_mut().zip(p) {
            *o += w * v;
        }
    }
    out
}

/// `x' = Σ_i softmax(−β‖x − ρ^i‖²)_i ρ^i`.
pub fn soft_retrieval_step(x: &[f64], set: &PatternSet, beta: f64) -> Result<Vec<f64>> {
    let w = retrieval_weights(x, set, beta, RetrievalRule::Distance)?;
    Ok(combine(&w, set))
}

/// `x' = Σ_i softmax(β ρ^iᵀx)_i ρ^i`.
pub fn mchn_retrieval_step(x: &[f64], set: &PatternSet, beta: f64) -> Result<Vec<f64>> {
    let w = retrieval_weights(x, set, beta, RetrievalRule::Mchn)?;
    Ok(combine(&w, set))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    /// Last iterate whose step length was measured.
    pub final_point: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Pattern within `epsilon` of the final point, if any.
    pub attractor_index: Option<usize>,
    pub final_step_norm: f64,
}

fn attractor_of(x: &[f64], set: &PatternSet, epsilon: f64) -> Option<usize> {
    let (i, d) = nearest_unchecked(x, set);
    (d.sqrt() <= epsilon).then_some(i)
}

/// Iterates the retrieval step from `x0` until the step length is at most `tol`.
///
/// The reported point is the iterate from which the final step was taken, so
/// a converged result satisfies `‖step(x*) − x*‖ ≤ tol` by construction.
pub fn retrieve(x0: &[f64], set: &PatternSet, params: &RetrievalParams) -> Result<RetrievalResult> {
    set.check_dim(x0)?;
    params.validate()?;
    Ok(retrieve_unchecked(x0, set, params))
}

pub(crate) fn retrieve_unchecked(x0: &[f64], set: &PatternSet, params: &RetrievalParams) -> RetrievalResult {
    let mut x = x0.to_vec();
    let mut step_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        let next = combine(&weights_unchecked(&x, set, params.beta, params.rule), set);
        iterations += 1;
        step_norm = sq_dist(&next, &x).sqrt();
        if step_norm <= params.tol {
            converged = true;
            break;
        }
        x = next;
    }
    let attractor_index = attractor_of(&x, set, params.epsilon);
    RetrievalResult {
        final_point: x,
        iterations,
        converged,
        attractor_index,
        final_step_norm: step_norm,
    }
}

/// Closest point to `y` in `{x : ‖x − center‖² ≤ delta}`.
pub fn project_to_trust_region(y: &[f64], center: &[f64], delta: f64) -> Vec<f64> {
    let d = sq_dist(y, center);
    if d <= delta || delta == f64::INFINITY {
        return y.to_vec();
    }
    if delta == 0.0 {
        return center.to_vec();
    }
    let scale = (delta / d).sqrt();
    center.iter().zip(y).map(|(c, v)| c + (v - c) * scale).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredTrajectory {
    /// `x^(0), …, x^(l)`.
    pub points: Vec<Vec<f64>>,
    /// Per-layer retrieval before projection; attractor indices refer to the full set.
    pub per_layer_results: Vec<RetrievalResult>,
    pub trust_radii_respected: bool,
    /// Global energy at each `x^(t)`, monitored rather than required to decrease.
    pub global_energies: Vec<f64>,
    /// `E_t(x^(t))`, the layer's own energy at its constrained output.
    pub constrained_energies: Vec<f64>,
    /// Pattern within `epsilon` of `x^(l)`, over the full set.
    pub final_attractor: Option<usize>,
}

/// Slack allowed on the squared trust-region constraint.
pub const TRUST_TOLERANCE: f64 = 1e-9;

/// Retrieve-then-project through every layer in order.
pub fn layered_retrieve(
    x0: &[f64],
    set: &PatternSet,
    layers: &LayerAssignment,
    params: &RetrievalParams,
) -> Result<LayeredTrajectory> {
    set.check_dim(x0)?;
    params.validate()?;
    let sets = layers.layer_sets(set)?;
    let mut points = vec![x0.to_vec()];
    let mut per_layer_results = Vec::with_capacity(sets.len());
    let mut constrained_energies = Vec::with_capacity(sets.len());
    let mut respected = true;
    for (t, layer) in sets.iter().enumerate() {
        let prev = points.last().expect("trajectory starts at x0").clone();
        let delta = layers.trust_radii()[t];
        let mut result = retrieve_unchecked(&prev, layer, params);
        result.attractor_index = result.attractor_index.map(|k| layers.members(t)[k]);
        let next = project_to_trust_region(&result.final_point, &prev, delta);
        respected &= sq_dist(&next, &prev) <= delta + TRUST_TOLERANCE;
        constrained_energies.push(layer_energy_unchecked(&next, layer, params.beta));
        per_layer_results.push(result);
        points.push(next);
    }
    let global_energies = points
        .iter()
        .map(|p| global_energy(p, set, layers, params.beta).map(|g| g.value))
        .collect::<Result<Vec<f64>>>()?;
    let final_attractor = attractor_of(points.last().expect("non-empty"), set, params.epsilon);
    Ok(LayeredTrajectory {
        points,
        per_layer_results,
        trust_radii_respected: respected,
        global_energies,
        constrained_energies,
        final_attractor,
    })
}

/// Trust radius used when none is given: `(2·max r_i)²`, i.e. Euclidean reach of two ball radii.
pub fn default_trust_radius(radii: &[f64]) -> f64 {
    let r = radii.iter().copied().fold(0.0, f64::max);
    (2.0 * r).powi(2)
}

// ---------------------------------------------------------------------------
// Binary networks

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// Every spin decided from the same snapshot.
    Synchronous,
    /// Spins visited in index order, each seeing earlier flips.
    #[default]
    AsynchronousSweep,
}

/// A binary network ready for updates.
#[derive(Debug, Clone, PartialEq)]
pub enum BinaryNetwork {
    Classical(HebbianWeights),
    Dense { patterns: PatternSet, order: u32 },
    Exponential(PatternSet),
}

impl BinaryNetwork {
    /// Builds the network for a binary `spec` over ±1 patterns.
    pub fn new(spec: EnergySpec, set: &PatternSet, normalization: HebbianNormalization) -> Result<Self> {
        spec.validate()?;
        check_binary_patterns(set)?;
        match spec {
            EnergySpec::ClassicalBinary => Ok(Self::Classical(HebbianWeights::hebbian(set, normalization)?)),
            EnergySpec::DensePolynomial { order } => Ok(Self::Dense {
                patterns: set.clone(),
                order,
            }),
            EnergySpec::ExponentialBinary => Ok(Self::Exponential(set.clone())),
            other => Err(argument(format!("{} energy is not a binary network", other.name()))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Classical(w) => w.dim(),
            Self::Dense { patterns, .. } | Self::Exponential(patterns) => patterns.dim(),
        }
    }

    pub fn energy(&self, s: &BinaryState) -> Result<f64> {
        match self {
            Self::Classical(w) => classical_energy(s, w),
            Self::Dense { patterns, order } => dense_energy(s, patterns, *order),
            Self::Exponential(patterns) => exponential_energy(s, patterns),
        }
    }
}

/// Overlaps `m_k = ρ^kᵀs`, integers held exactly in f64.
struct Overlaps<'a> {
    set: &'a PatternSet,
    m: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Overlaps<'a> {
    fn new(set: &'a PatternSet, s: &[i8]) -> Self {
        let m = set
            .iter()
            .map(|p| p.iter().zip(s).map(|(a, &x)| a * f64::from(x)).sum())
            .collect();
        Self {
            set,
            m,
            scratch: Vec::with_capacity(set.len()),
        }
    }

    fn flipped(&mut self, i: usize, si: i8) -> &[f64] {
        let delta = -2.0 * f64::from(si);
        self.scratch.clear();
        self.scratch
            .extend(self.m.iter().zip(self.set.iter()).map(|(m, p)| m + delta * p[i]));
        &self.scratch
    }

    fn commit_flip(&mut self, i: usize, si: i8) {
        let delta = -2.0 * f64::from(si);
        for (m, p) in self.m.iter_mut().zip(self.set.iter()) {
            *m += delta * p[i];
        }
    }
}

fn overlap_energy(m: &[f64], kind: OverlapKind) -> f64 {
    match kind {
        OverlapKind::Dense(order) => -m.iter().map(|v| v.powi(order as i32)).sum::<f64>(),
        OverlapKind::Exponential => -lse_unchecked(m),
    }
}

#[derive(Clone, Copy)]
enum OverlapKind {
    Dense(u32),
    Exponential,
}

/// Whether spin `i` should flip, without mutating anything.
fn wants_flip(net: &BinaryNetwork, spins: &[i8], i: usize, ov: Option<&mut Overlaps<'_>>, kind: Option<OverlapKind>) -> bool {
    match net {
        BinaryNetwork::Classical(w) => {
            let h = w.field(spins, i);
            // ties retain the spin
            (h > 0.0 && spins[i] < 0) || (h < 0.0 && spins[i] > 0)
        }
        _ => {
            let (ov, kind) = (ov.expect("overlap state"), kind.expect("overlap kind"));
            let current = overlap_energy(&ov.m, kind);
            let candidate = overlap_energy(ov.flipped(i, spins[i]), kind);
            candidate < current
        }
    }
}

fn overlap_kind(net: &BinaryNetwork) -> Option<(OverlapKind, &PatternSet)> {
    match net {
        BinaryNetwork::Classical(_) => None,
        BinaryNetwork::Dense { patterns, order } => Some((OverlapKind::Dense(*order), patterns)),
        BinaryNetwork::Exponential(patterns) => Some((OverlapKind::Exponential, patterns)),
    }
}

/// One update pass. Returns the new state and the number of flips.
fn update_pass(s: &BinaryState, net: &BinaryNetwork, mode: UpdateMode) -> (BinaryState, usize) {
    let n = s.len();
    let mut out = s.clone();
    let kind = overlap_kind(net);
    let mut ov = kind.map(|(_, set)| Overlaps::new(set, s.spins()));
    let k = kind.map(|(k, _)| k);
    let mut flips = 0;
    match mode {
        UpdateMode::Synchronous => {
            let snapshot = s.spins();
            for i in 0..n {
                if wants_flip(net, snapshot, i, ov.as_mut(), k) {
                    out.spins_mut()[i] *= -1;
                    flips += 1;
                }
            }
        }
        UpdateMode::AsynchronousSweep => {
            for i in 0..n {
                let flip = wants_flip(net, out.spins(), i, ov.as_mut(), k);
                if flip {
                    if let Some(ov) = ov.as_mut() {
                        ov.commit_flip(i, out.spins()[i]);
                    }
                    out.spins_mut()[i] *= -1;
                    flips += 1;
                }
            }
        }
    }
    (out, flips)
}

fn check_binary_dim(s: &BinaryState, net: &BinaryNetwork) -> Result<()> {
    if s.len() != net.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: s.len(),
        });
    }
    Ok(())
}

/// One synchronous step or one asynchronous sweep.
///
/// Classical networks align each spin with its local field; dense and
/// exponential networks flip a spin only when that strictly lowers the energy.
pub fn binary_update(s: &BinaryState, net: &BinaryNetwork, mode: UpdateMode) -> Result<BinaryState> {
    check_binary_dim(s, net)?;
    Ok(update_pass(s, net, mode).0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryRetrieval {
    pub state: BinaryState,
    pub sweeps: usize,
    /// A full pass made no flips.
    pub stable: bool,
}

/// Repeats [`binary_update`] until a pass makes no flips or `max_sweeps` is reached.
pub fn binary_retrieve(
    s: &BinaryState,
    net: &BinaryNetwork,
    mode: UpdateMode,
    max_sweeps: usize,
) -> Result<BinaryRetrieval> {
    check_binary_dim(s, net)?;
    let mut state = s.clone();
    for sweep in 1..=max_sweeps {
        let (next, flips) = update_pass(&state, net, mode);
        state = next;
        if flips == 0 {
            return Ok(BinaryRetrieval {
                state,
                sweeps: sweep,
                stable: true,
            });
        }
    }
    Ok(BinaryRetrieval {
        state,
        sweeps: max_sweeps,
        stable: false,
    })
}

// ---------------------------------------------------------------------------
// Storage and capacity

#[derive(Debug, Clone, PartialEq)]
pub struct BallReport {
    pub pattern_index: usize,
    pub pass: bool,
    /// `‖ρ^{i*} − ρ^i‖` for the fixed point reached from `ρ^i`.
    pub displacement: f64,
    /// Samples that converged within `max_iter`.
    pub converged: usize,
    /// Samples whose final point was within `epsilon` of `ρ^i`.
    pub retrieved: usize,
    pub samples: usize,
    pub max_iterations: usize,
    /// Largest pairwise distance between final points.
    pub max_pairwise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageReport {
    pub balls: Vec<BallReport>,
}

impl StorageReport {
    pub fn all_pass(&self) -> bool {
        self.balls.iter().all(|b| b.pass)
    }

    /// CSV with header `pattern_index,pass,displacement`.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "pattern_index,pass,displacement")?;
        for b in &self.balls {
            writeln!(sink, "{},{},{:.16e}", b.pattern_index, b.pass, b.displacement)?;
        }
        Ok(())
    }
}

/// Samples uniform points in each ball and checks they all reach the same
/// fixed point, `epsilon`-close to the ball's pattern.
pub fn storage_check(
    set: &PatternSet,
    radii: &[f64],
    samples_per_ball: usize,
    params: &RetrievalParams,
    seed: u64,
) -> Result<StorageReport> {
    params.validate()?;
    if samples_per_ball == 0 {
        return Err(argument("samples_per_ball must be ≥ 1"));
    }
    let geometry = check_storage_geometry(set, radii)?;
    if !geometry.separation_ok {
        let (i, j) = geometry.violations[0];
        return Err(Error::Precondition(format!(
            "balls {i} and {j} overlap; storage needs pairwise disjoint balls"
        )));
    }
    let balls = (0..set.len())
        .into_par_iter()
        .map(|i| check_ball(set, i, radii[i], samples_per_ball, params, child_seed(seed, i as u64)))
        .collect();
    Ok(StorageReport { balls })
}

fn check_ball(
    set: &PatternSet,
    i: usize,
    radius: f64,
    samples: usize,
    params: &RetrievalParams,
    seed: u64,
) -> BallReport {
    let center = set.pattern(i);
    let fixed = retrieve_unchecked(center, set, params);
    let displacement = sq_dist(&fixed.final_point, center).sqrt();
    let mut rng = stream_rng(seed, 0);
    let mut finals = Vec::with_capacity(samples * set.dim());
    let (mut converged, mut retrieved, mut max_iterations) = (0, 0, 0);
    for _ in 0..samples {
        let x0 = sample_in_ball(&mut rng, center, radius);
        let r = retrieve_unchecked(&x0, set, params);
        converged += usize::from(r.converged);
        retrieved += usize::from(r.attractor_index == Some(i));
        max_iterations = max_iterations.max(r.iterations);
        finals.extend_from_slice(&r.final_point);
    }
    let n = set.dim();
    let mut max_pairwise: f64 = 0.0;
    for a in 0..samples {
        for b in a + 1..samples {
            let d = sq_dist(&finals[a * n..(a + 1) * n], &finals[b * n..(b + 1) * n]);
            max_pairwise = max_pairwise.max(d);
        }
    }
    let max_pairwise = max_pairwise.sqrt();
    let pass = converged == samples
        && retrieved == samples
        && max_pairwise <= 2.0 * params.epsilon
        && displacement <= params.epsilon;
    BallReport {
        pattern_index: i,
        pass,
        displacement,
        converged,
        retrieved,
        samples,
        max_iterations,
        max_pairwise,
    }
}

/// Controls for [`capacity_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityConfig {
    pub trials: usize,
    /// Fraction of flipped bits (binary), or perturbation radius as a fraction of `continuous_gap`.
    pub corruption: f64,
    pub seed: u64,
    pub max_sweeps: usize,
    pub mode: UpdateMode,
    pub normalization: HebbianNormalization,
    /// Minimum pairwise gap for continuous pattern sets.
    pub continuous_gap: f64,
    /// Iteration controls for continuous variants; `beta` is taken from the spec.
    pub retrieval: RetrievalParams,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            corruption: 0.05,
            seed: 0,
            max_sweeps: 100,
            mode: UpdateMode::AsynchronousSweep,
            normalization: HebbianNormalization::PerPattern,
            continuous_gap: 10.0,
            retrieval: RetrievalParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    pub dimension: usize,
    pub counts: Vec<usize>,
    pub success_rates: Vec<f64>,
    /// Largest count with success rate ≥ 0.9.
    pub threshold: Option<usize>,
}

/// Success rate a count must reach to be within capacity.
pub const CAPACITY_SUCCESS: f64 = 0.9;

impl CapacityCurve {
    /// Centred moving average of width 3 (two-point at the ends).
    pub fn smoothed(&self) -> Vec<f64> {
        let r = &self.success_rates;
        (0..r.len())
            .map(|i| {
                let lo = i.saturating_sub(1);
                let hi = (i + 2).min(r.len());
                r[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
            })
            .collect()
    }

    /// CSV with header `d,success_rate`.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "d,success_rate")?;
        for (d, s) in self.counts.iter().zip(&self.success_rates) {
            writeln!(sink, "{d},{s:.16e}")?;
        }
        Ok(())
    }
}

fn random_binary_patterns<R: Rng>(rng: &mut R, d: usize, n: usize) -> Result<PatternSet> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut attempts = 0;
    while rows.len() < d {
        let p: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        if !rows.contains(&p) {
            rows.push(p);
        } else {
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::Capacity(format!("cannot draw {d} distinct patterns in {{±1}}^{n}")));
            }
        }
    }
    PatternSet::new(VectorSet::from_rows(&rows)?)
}

fn corrupt<R: Rng>(rng: &mut R, p: &[f64], flips: usize) -> BinaryState {
    let mut s: Vec<i8> = p.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
    for i in sample(rng, p.len(), flips) {
        s[i] = -s[i];
    }
    BinaryState::new(s).expect("non-empty ±1 state")
}

/// Fraction of stored patterns recovered exactly from a corrupted cue, per pattern count.
///
/// Binary variants flip `round(corruption·n)` random bits and run updates
/// until stable. Continuous variants draw separated patterns with
/// `continuous_gap` and start from a uniform point in the ball of radius
/// `corruption·continuous_gap`.
pub fn capacity_sweep(spec: EnergySpec, n: usize, counts: &[usize], config: &CapacityConfig) -> Result<CapacityCurve> {
    spec.validate()?;
    if n == 0 {
        return Err(argument("dimension must be ≥ 1"));
    }
    if config.trials == 0 {
        return Err(argument("trials must be ≥ 1"));
    }
    if !(0.0..0.5).contains(&config.corruption) {
        return Err(argument(format!("corruption must lie in [0, 0.5), got {}", config.corruption)));
    }
    if counts.contains(&0) {
        return Err(argument("pattern counts must be ≥ 1"));
    }
    let mut success_rates = Vec::with_capacity(counts.len());
    for (ci, &d) in counts.iter().enumerate() {
        let count_seed = child_seed(config.seed, ci as u64);
        let outcomes = (0..config.trials)
            .into_par_iter()
            .map(|trial| capacity_trial(spec, n, d, config, count_seed, trial as u64))
            .collect::<Result<Vec<usize>>>()?;
        let hits: usize = outcomes.iter().sum();
        success_rates.push(hits as f64 / (d * config.trials) as f64);
    }
    let threshold = counts
        .iter()
        .zip(&success_rates)
        .filter(|(_, s)| **s >= CAPACITY_SUCCESS)
        .map(|(d, _)| *d)
        .max();
    Ok(CapacityCurve {
        dimension: n,
        counts: counts.to_vec(),
        success_rates,
        threshold,
    })
}

fn capacity_trial(spec: EnergySpec, n: usize, d: usize, config: &CapacityConfig, seed: u64, trial: u64) -> Result<usize> {
    let mut rng = stream_rng(seed, trial);
    match spec {
        EnergySpec::Mchn { beta } | EnergySpec::Distance { beta } => {
            let set = generate_separated_patterns(d, n, config.continuous_gap, rng.random())?;
            let params = RetrievalParams {
                beta,
                rule: if matches!(spec, EnergySpec::Mchn { .. }) {
                    RetrievalRule::Mchn
                } else {
                    RetrievalRule::Distance
                },
                ..config.retrieval
            };
            params.validate()?;
            let radius = config.corruption * config.continuous_gap;
            Ok((0..d)
                .filter(|&i| {
                    let x0 = sample_in_ball(&mut rng, set.pattern(i), radius);
                    retrieve_unchecked(&x0, &set, &params).attractor_index == Some(i)
                })
                .count())
        }
        _ => {
            let set = random_binary_patterns(&mut rng, d, n)?;
            let flips = (config.corruption * n as f64).round() as usize;
            let mut hits = 0;
            match spec {
                EnergySpec::ClassicalBinary => {
                    let net = HebbianOverlapNet::new(&set);
                    for i in 0..d {
                        let cue = corrupt(&mut rng, set.pattern(i), flips);
                        let out = net.retrieve(cue, config.mode, config.max_sweeps);
                        hits += usize::from(matches_pattern(&out, set.pattern(i)));
                    }
                }
                _ => {
                    let net = BinaryNetwork::new(spec, &set, config.normalization)?;
                    for i in 0..d {
                        let cue = corrupt(&mut rng, set.pattern(i), flips);
                        let out = binary_retrieve(&cue, &net, config.mode, config.max_sweeps)?;
                        hits += usize::from(matches_pattern(&out.state, set.pattern(i)));
                    }
                }
            }
            Ok(hits)
        }
    }
}

fn matches_pattern(s: &BinaryState, p: &[f64]) -> bool {
    s.spins().iter().zip(p).all(|(&a, &b)| f64::from(a) == b)
}

/// Classical Hebbian dynamics through pattern overlaps, `O(d)` per field
/// instead of `O(n)`. The field is `Σ_k ρ^k_i m_k − d·s_i`, the unscaled
/// zero-diagonal Hebbian field; only its sign matters.
struct HebbianOverlapNet<'a> {
    set: &'a PatternSet,
}

impl<'a> HebbianOverlapNet<'a> {
    fn new(set: &'a PatternSet) -> Self {
        Self { set }
    }

    fn field(&self, m: &[f64], s: &[i8], i: usize) -> f64 {
        let raw: f64 = m.iter().zip(self.set.iter()).map(|(m, p)| m * p[i]).sum();
        raw - self.set.len() as f64 * f64::from(s[i])
    }

    fn retrieve(&self, mut s: BinaryState, mode: UpdateMode, max_sweeps: usize) -> BinaryState {
        let n = s.len();
        for _ in 0..max_sweeps {
            let mut ov = Overlaps::new(self.set, s.spins());
            let mut flips = 0;
            match mode {
                UpdateMode::Synchronous => {
                    let snapshot = s.clone();
                    for i in 0..n {
                        let h = self.field(&ov.m, snapshot.spins(), i);
                        let si = snapshot.spins()[i];
                        if (h > 0.0 && si < 0) || (h < 0.0 && si > 0) {
                            s.spins_mut()[i] *= -1;
                            flips += 1;
                        }
                    }
                }
                UpdateMode::AsynchronousSweep => {
                    for i in 0..n {
                        let h = self.field(&ov.m, s.spins(), i);
                        let si = s.spins()[i];
                        if (h > 0.0 && si < 0) || (h < 0.0 && si > 0) {
                            ov.commit_flip(i, si);
                            s.spins_mut()[i] *= -1;
                            flips += 1;
                        }
                    }
                }
            }
            if flips == 0 {
                break;
            }
        }
        s
    }
}
