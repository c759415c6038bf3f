//! Pattern storage and lookup.
//!
//! A [`VectorSet`] is any finite row-major matrix (activation dumps may hold
//! repeated rows). A [`PatternSet`] additionally guarantees distinct rows,
//! since two identical attractors can never sit in disjoint balls.

mod grid;
mod io;
mod stats;

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{argument, Error, Result};
use crate::numerics::{ln_ball_volume, sq_dist};
use crate::rng::stream_rng;

pub use grid::{build_grid_index, query_index, GridIndex};
pub use io::{
    load_patterns, load_vectors, parse_amv1, parse_patterns_csv, write_amv1, write_csv, Format,
    AMV1_MAGIC,
};
pub use stats::{nn_distance_stats, nn_distances, Histogram, NnDistanceStats};

/// Row-major matrix of finite reals with at least one row.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    dim: usize,
    data: Vec<f64>,
}

impl VectorSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(argument("vector dimension must be ≥ 1"));
        }
        if data.is_empty() {
            return Err(argument("vector set must contain at least one row"));
        }
        if data.len() % dim != 0 {
            return Err(argument(format!(
                "{} values do not form rows of length {dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(argument(format!(
                "row {} column {} is not finite",
                i / dim,
                i % dim
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(argument(format!("row {i} has length {}, expected {dim}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(argument(format!("row index {i} out of range 0..{}", self.len())));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(self.dim, data)
    }

    /// First pair of bitwise-equal rows (with `-0.0 == 0.0`), if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(self.len());
        for (i, row) in self.rows().enumerate() {
            let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
            if let Some(&first) = seen.get(&key) {
                return Some((first, i));
            }
            seen.insert(key, i);
        }
        None
    }
}

/// Stored patterns ρ¹…ρᵈ in ℝⁿ; rows are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    vectors: VectorSet,
}

impl PatternSet {
    pub fn new(vectors: VectorSet) -> Result<Self> {
        if let Some((first, second)) = vectors.find_duplicate() {
            return Err(Error::DuplicatePattern { first, second });
        }
        Ok(Self { vectors })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(VectorSet::from_rows(rows)?)
    }

    /// Embedding dimension n.
    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    /// Pattern count d.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pattern(&self, i: usize) -> &[f64] {
        self.vectors.row(i)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.vectors.rows()
    }

    pub fn vectors(&self) -> &VectorSet {
        &self.vectors
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(self.vectors.select(indices)?)
    }

    pub fn squared_norms(&self) -> Vec<f64> {
        self.iter().map(|p| p.iter().map(|v| v * v).sum()).collect()
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Exact nearest pattern under squared Euclidean distance; ties go to the lowest index.
pub fn nearest_pattern(x: &[f64], set: &PatternSet) -> Result<(usize, f64)> {
    set.check_dim(x)?;
    Ok(nearest_unchecked(x, set))
}

pub(crate) fn nearest_unchecked(x: &[f64], set: &PatternSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, p) in set.iter().enumerate() {
        let d = sq_dist(x, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Ball around a stored pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// One ball per pattern, with the outcome of the pairwise disjointness test.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSystem {
    pub balls: Vec<Ball>,
    pub separation_ok: bool,
    /// Every pair `(i, j)`, `i < j`, with `‖c_i − c_j‖ ≤ r_i + r_j`.
    pub violations: Vec<(usize, usize)>,
}

fn check_radii(set: &PatternSet, radii: &[f64]) -> Result<()> {
    if radii.len() != set.len() {
        return Err(argument(format!(
            "{} radii given for {} patterns",
            radii.len(),
            set.len()
        )));
    }
    if let Some(i) = radii.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(argument(format!("radius {i} must be positive, got {}", radii[i])));
    }
    Ok(())
}

/// Builds the balls `B_i = B(ρ^i, r_i)` and checks they are pairwise disjoint.
///
/// A failed separation is reported through [`BallSystem::separation_ok`], not as an error.
pub fn check_storage_geometry(set: &PatternSet, radii: &[f64]) -> Result<BallSystem> {
    check_radii(set, radii)?;
    let mut violations = Vec::new();
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let gap = sq_dist(set.pattern(i), set.pattern(j)).sqrt();
            if gap <= radii[i] + radii[j] {
                violations.push((i, j));
            }
        }
    }
    let balls = set
        .iter()
        .zip(radii)
        .map(|(c, &r)| Ball {
            center: c.to_vec(),
            radius: r,
        })
        .collect();
    Ok(BallSystem {
        balls,
        separation_ok: violations.is_empty(),
        violations,
    })
}

/// Held-out validation patterns, as distinct indices into a [`PatternSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationSet {
    indices: Vec<usize>,
}

impl ValidationSet {
    pub fn new(indices: Vec<usize>, pattern_count: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(argument("validation set must be non-empty"));
        }
        let mut seen = vec![false; pattern_count];
        for &i in &indices {
            if i >= pattern_count {
                return Err(argument(format!("validation index {i} out of range 0..{pattern_count}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(argument(format!("validation index {i} repeated")));
            }
        }
        Ok(Self { indices })
    }

    /// The whole pattern set in index order.
    pub fn all(pattern_count: usize) -> Result<Self> {
        Self::new((0..pattern_count).collect(), pattern_count)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerStrategy {
    /// Pattern `i` goes to layer `i mod l`.
    RoundRobin,
    /// Consecutive slices; the first `d mod l` layers get one extra pattern.
    Contiguous,
}

/// Disjoint cover of the pattern indices by `l` layers, with per-layer trust radii δ_t.
///
/// δ_t bounds the squared distance a layer may move its input; `0` freezes the
/// layer and `+∞` leaves it unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerAssignment {
    members: Vec<Vec<usize>>,
    trust_radii: Vec<f64>,
}

impl LayerAssignment {
    pub fn new(members: Vec<Vec<usize>>, trust_radii: Vec<f64>, pattern_count: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(argument("at least one layer is required"));
        }
        if trust_radii.len() != members.len() {
            return Err(argument(format!(
                "{} trust radii for {} layers",
                trust_radii.len(),
                members.len()
            )));
        }
        if let Some(t) = trust_radii.iter().position(|d| d.is_nan() || *d < 0.0) {
            return Err(argument(format!("trust radius of layer {t} must be ≥ 0")));
        }
        let mut owner = vec![None; pattern_count];
        for (t, layer) in members.iter().enumerate() {
            if layer.is_empty() {
                return Err(argument(format!("layer {t} has no patterns")));
            }
            for &i in layer {
                if i >= pattern_count {
                    return Err(argument(format!("pattern index {i} out of range 0..{pattern_count}")));
                }
                if let Some(prev) = owner[i].replace(t) {
                    return Err(argument(format!("pattern {i} assigned to layers {prev} and {t}")));
                }
            }
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(argument(format!("pattern {i} belongs to no layer")));
        }
        Ok(Self { members, trust_radii })
    }

    /// Layer count l.
    pub fn layers(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, t: usize) -> &[usize] {
        &self.members[t]
    }

    pub fn all_members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn trust_radii(&self) -> &[f64] {
        &self.trust_radii
    }

    pub fn pattern_count(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub(crate) fn check_against(&self, set: &PatternSet) -> Result<()> {
        if self.pattern_count() != set.len() {
            return Err(argument(format!(
                "layer assignment covers {} patterns, set has {}",
                self.pattern_count(),
                set.len()
            )));
        }
        Ok(())
    }

    /// Per-layer pattern sets.
    pub fn layer_sets(&self, set: &PatternSet) -> Result<Vec<PatternSet>> {
        self.check_against(set)?;
        self.members.iter().map(|m| set.subset(m)).collect()
    }
}

/// Splits the `d` patterns into `l` layers.
pub fn partition_layers(
    set: &PatternSet,
    layers: usize,
    strategy: LayerStrategy,
    trust_radii: &[f64],
) -> Result<LayerAssignment> {
    let d = set.len();
    if layers == 0 || layers > d {
        return Err(argument(format!("layer count must be in 1..={d}, got {layers}")));
    }
    if let Some(t) = trust_radii.iter().position(|r| !(*r > 0.0)) {
        return Err(argument(format!("trust radius of layer {t} must be positive")));
    }
    let members = match strategy {
        LayerStrategy::RoundRobin => (0..layers)
            .map(|t| (t..d).step_by(layers).collect())
            .collect(),
        LayerStrategy::Contiguous => {
            let (base, extra) = (d / layers, d % layers);
            let mut start = 0;
            (0..layers)
                .map(|t| {
                    let len = base + usize::from(t < extra);
                    let layer = (start..start + len).collect();
                    start += len;
                    layer
                })
                .collect()
        }
    };
    LayerAssignment::new(members, trust_radii.to_vec(), d)
}

/// Rejection sampler for pairwise-separated patterns in a centred cube.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedPatterns {
    pub count: usize,
    pub dim: usize,
    pub min_gap: f64,
    /// Cube side; defaults to `(d·V_n(min_gap))^{1/n}`.
    pub side: Option<f64>,
    /// Rejections tolerated per point before giving up.
    pub max_attempts: usize,
}

impl SeparatedPatterns {
    pub fn new(count: usize, dim: usize, min_gap: f64) -> Self {
        Self {
            count,
            dim,
            min_gap,
            side: None,
            max_attempts: 10_000,
        }
    }

    pub fn with_side(mut self, side: f64) -> Self {
        self.side = Some(side);
        self
    }

    pub fn cube_side(&self) -> Result<f64> {
        match self.side {
            Some(s) => Ok(s),
            None => {
                let ln_v = ln_ball_volume(self.dim, self.min_gap)?;
                Ok((((self.count as f64).ln() + ln_v) / self.dim as f64).exp())
            }
        }
    }

    pub fn generate(&self, seed: u64) -> Result<PatternSet> {
        if self.count == 0 || self.dim == 0 {
            return Err(argument("pattern count and dimension must be ≥ 1"));
        }
        if !(self.min_gap.is_finite() && self.min_gap > 0.0) {
            return Err(argument("min_gap must be a positive finite real"));
        }
        let side = self.cube_side()?;
        if !(side.is_finite() && side > 0.0) {
            return Err(argument(format!("cube side must be positive and finite, got {side}")));
        }
        let gap2 = self.min_gap * self.min_gap;
        let mut rng = stream_rng(seed, 0);
        let mut data: Vec<f64> = Vec::with_capacity(self.count * self.dim);
        let mut candidate = vec![0.0; self.dim];
        for k in 0..self.count {
            let mut placed = false;
            for _ in 0..self.max_attempts.max(1) {
                for c in candidate.iter_mut() {
                    *c = (rng.random::<f64>() - 0.5) * side;
                }
                if data.chunks_exact(self.dim).all(|p| sq_dist(p, &candidate) >= gap2) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Capacity(format!(
                    "placed only {k} of {} patterns with gap {} in a cube of side {side}; \
                     use a larger cube or fewer patterns",
                    self.count, self.min_gap
                )));
            }
            data.extend_from_slice(&candidate);
        }
        PatternSet::new(VectorSet::new(self.dim, data)?)
    }
}

/// `d` patterns in ℝⁿ with pairwise distance ≥ `min_gap`, deterministic in `seed`.
pub fn generate_separated_patterns(d: usize, n: usize, min_gap: f64, seed: u64) -> Result<PatternSet> {
    SeparatedPatterns::new(d, n, min_gap).generate(seed)
}

/// Uniform sample from the ball `B(center, radius)`.
pub fn sample_in_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = radius * rng.random::<f64>().powf(1.0 / n as f64) / norm;
    for (v, c) in dir.iter_mut().zip(center) {
        *v = c + *v * scale;
    }
    dir
}
