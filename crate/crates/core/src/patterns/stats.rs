use rayon::prelude::*;

use super::VectorSet;
use crate::error::{argument, Result};
use crate::numerics::sq_dist;

/// Fixed-width histogram whose first bin starts at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bin_width: f64) -> Result<Self> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(argument(format!("bin width must be positive, got {bin_width}")));
        }
        let mut counts = Vec::new();
        for &v in values {
            let bin = (v / bin_width).floor().max(0.0) as usize;
            if bin >= counts.len() {
                counts.resize(bin + 1, 0);
            }
            counts[bin] += 1;
        }
        Ok(Self { bin_width, counts })
    }

    /// `(lower edge, upper edge, count)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.counts.iter().enumerate().map(|(k, &c)| {
            let lo = k as f64 * self.bin_width;
            (lo, lo + self.bin_width, c)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnDistanceStats {
    /// Euclidean distance from each vector to its nearest other vector.
    pub distances: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub histogram: Histogram,
}

/// Euclidean (not squared) distance from each row to its nearest other row.
pub fn nn_distances(vectors: &VectorSet) -> Result<Vec<f64>> {
    let d = vectors.len();
    if d < 2 {
        return Err(argument(format!("need at least 2 vectors, got {d}")));
    }
    Ok((0..d)
        .into_par_iter()
        .map(|i| {
            let xi = vectors.row(i);
            vectors
                .rows()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, xj)| sq_dist(xi, xj))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect())
}

pub fn nn_distance_stats(vectors: &VectorSet, bin_width: f64) -> Result<NnDistanceStats> {
    let distances = nn_distances(vectors)?;
    let histogram = Histogram::from_values(&distances, bin_width)?;
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    let mut sorted = distances.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    Ok(NnDistanceStats {
        distances,
        mean,
        median,
        histogram,
    })
}
