//! Uniform-grid index with exact expanding-ring queries.
//!
//! Ring `k` holds the cells at Chebyshev distance `k` from the query cell.
//! Any pattern outside rings `0..=k` lies at Euclidean distance ≥ `k·cell`,
//! which gives the stopping rule. When a ring would contain more cells than
//! are occupied, the remaining occupied cells are bucketed by ring instead of
//! enumerating offsets.

use std::collections::HashMap;

use super::PatternSet;
use crate::error::{argument, Error, Result};
use crate::numerics::sq_dist;

#[derive(Debug, Clone)]
pub struct GridIndex {
    set: PatternSet,
    cell_size: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    /// Occupied cells in a fixed order, for the bucketed path.
    occupied: Vec<Vec<i64>>,
}

fn cell_of(x: &[f64], cell_size: f64) -> Vec<i64> {
    x.iter().map(|v| (v / cell_size).floor() as i64).collect()
}

fn chebyshev(a: &[i64], b: &[i64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&p, &q)| (p as i128 - q as i128).unsigned_abs() as u64)
        .max()
        .unwrap_or(0)
}

pub fn build_grid_index(set: &PatternSet, cell_size: f64) -> Result<GridIndex> {
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(argument(format!("cell size must be positive and finite, got {cell_size}")));
    }
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in set.iter().enumerate() {
        cells.entry(cell_of(p, cell_size)).or_default().push(i);
    }
    let mut occupied: Vec<Vec<i64>> = cells.keys().cloned().collect();
    occupied.sort();
    Ok(GridIndex {
        set: set.clone(),
        cell_size,
        cells,
        occupied,
    })
}

/// Same answer as [`super::nearest_pattern`], including the lowest-index tie-break.
pub fn query_index(index: &GridIndex, x: &[f64]) -> Result<(usize, f64)> {
    index.query(x)
}

struct Best {
    index: usize,
    dist: f64,
}

impl Best {
    fn offer(&mut self, index: usize, dist: f64) {
        if dist < self.dist || (dist == self.dist && index < self.index) {
            self.index = index;
            self.dist = dist;
        }
    }
}

impl GridIndex {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.set
    }

    pub fn occupied_cells(&self) -> usize {
        self.occupied.len()
    }

    fn scan_cell(&self, key: &[i64], x: &[f64], best: &mut Best) -> bool {
        match self.cells.get(key) {
            Some(members) => {
                for &i in members {
                    best.offer(i, sq_dist(x, self.set.pattern(i)));
                }
                true
            }
            None => false,
        }
    }

    /// Everything beyond ring `k` is at least this far (squared), with a little
    /// slack for rounding in the cell assignment.
    fn outside_bound(&self, k: u64) -> f64 {
        let r = (k as f64 - 1e-9).max(0.0) * self.cell_size;
        r * r
    }

    pub fn query(&self, x: &[f64]) -> Result<(usize, f64)> {
        if x.len() != self.set.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.set.dim(),
                found: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(argument(format!("query entry {i} is not finite")));
        }
        let n = x.len();
        let q = cell_of(x, self.cell_size);
        let total = self.occupied.len();
        let mut best = Best {
            index: usize::MAX,
            dist: f64::INFINITY,
        };
        let mut visited = 0usize;
        let mut k: u64 = 0;
        let mut offset = vec![0i64; n];
        let mut key = vec![0i64; n];
        loop {
            let ring_cells = ring_size(n, k);
            if ring_cells.map_or(true, |c| c > (total - visited) as u128) {
                break;
            }
            // enumerate the cube of side 2k+1, keeping only its shell
            let side = 2 * k as i64 + 1;
            offset.iter_mut().for_each(|o| *o = -(k as i64));
            loop {
                if offset.iter().any(|o| o.unsigned_abs() == k) {
                    let mut in_range = true;
                    for ((kk, qq), o) in key.iter_mut().zip(&q).zip(&offset) {
                        match qq.checked_add(*o) {
                            Some(v) => *kk = v,
                            None => in_range = false,
                        }
                    }
                    if in_range && self.scan_cell(&key, x, &mut best) {
                        visited += 1;
                    }
                }
                // odometer increment
                let mut axis = 0;
                while axis < n {
                    offset[axis] += 1;
                    if offset[axis] < side - k as i64 {
                        break;
                    }
                    offset[axis] = -(k as i64);
                    axis += 1;
                }
                if axis == n {
                    break;
                }
            }
            if visited == total || (best.index != usize::MAX && best.dist < self.outside_bound(k)) {
                return Ok((best.index, best.dist));
            }
            k += 1;
        }

        // bucketed path for the rings from k outward
        let mut rest: Vec<(u64, &Vec<i64>)> = self
            .occupied
            .iter()
            .map(|c| (chebyshev(c, &q), c))
            .filter(|(ring, _)| *ring >= k)
            .collect();
        rest.sort_by_key(|(ring, _)| *ring);
        let mut pos = 0;
        while pos < rest.len() {
            let ring = rest[pos].0;
            if best.index != usize::MAX && best.dist < self.outside_bound(ring.saturating_sub(1)) {
                break;
            }
            while pos < rest.len() && rest[pos].0 == ring {
                self.scan_cell(rest[pos].1, x, &mut best);
                pos += 1;
            }
        }
        Ok((best.index, best.dist))
    }
}

/// Number of cells in ring `k` of an n-dimensional grid, if it fits in u128.
fn ring_size(n: usize, k: u64) -> Option<u128> {
    let n = u32::try_from(n).ok()?;
    let outer = (2 * k as u128 + 1).checked_pow(n)?;
    let inner = if k == 0 { 0 } else { (2 * k as u128 - 1).checked_pow(n)? };
    Some(outer - inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{nearest_pattern, VectorSet};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn random_set(d: usize, n: usize, scale: f64, seed: u64) -> PatternSet {
        let mut rng = stream_rng(seed, 0);
        let data = (0..d * n).map(|_| rng.random_range(-scale..scale)).collect();
        PatternSet::new(VectorSet::new(n, data).unwrap()).unwrap()
    }

    #[test]
    fn matches_brute_force_across_dimensions() {
        for (n, d, cell) in [(1, 50, 0.3), (2, 400, 0.5), (3, 300, 2.0), (8, 500, 1.5)] {
            let set = random_set(d, n, 5.0, n as u64);
            let idx = build_grid_index(&set, cell).unwrap();
            let mut rng = stream_rng(99, n as u64);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-8.0..8.0)).collect();
                assert_eq!(idx.query(&x).unwrap(), nearest_pattern(&x, &set).unwrap());
            }
        }
    }

    #[test]
    fn far_queries_terminate() {
        let set = random_set(20, 2, 1.0, 4);
        let idx = build_grid_index(&set, 0.01).unwrap();
        let x = [1e6, -1e6];
        assert_eq!(idx.query(&x).unwrap(), nearest_pattern(&x, &set).unwrap());
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let set = PatternSet::from_rows(&[[1.0], [0.0]]).unwrap();
        let idx = build_grid_index(&set, 0.25).unwrap();
        assert_eq!(idx.query(&[0.5]).unwrap(), (0, 0.25));
    }

    #[test]
    fn rejects_bad_input() {
        let set = random_set(5, 2, 1.0, 1);
        assert!(build_grid_index(&set, 0.0).is_err());
        let idx = build_grid_index(&set, 1.0).unwrap();
        assert!(matches!(idx.query(&[0.0]), Err(Error::DimensionMismatch { .. })));
    }
}
