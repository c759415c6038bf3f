use std::io::Write;

use assocmem::partition::critical_radius;
use assocmem::patterns::{nn_distance_stats, VectorSet};
use assocmem::rng::stream_rng;
use rand::seq::SliceRandom;
use rand::Rng;

use super::read_vectors;
use crate::{CliError, Context};

/// `count` points uniform in a cube of volume `count`, i.e. unit density.
fn synthetic(count: usize, dim: usize, seed: u64) -> Result<VectorSet, CliError> {
    let side = (count as f64).powf(1.0 / dim as f64);
    let mut rng = stream_rng(seed, 1);
    let data = (0..count * dim).map(|_| rng.random::<f64>() * side).collect();
    Ok(VectorSet::new(dim, data)?)
}

pub fn run(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let p = &ctx.params;
    let seed = ctx.seed()?;
    let input = p.path("input");
    let count: usize = p.get("synthetic_count", 2000)?;
    let dim: usize = p.get("synthetic_dim", 1024)?;
    let fractions: Vec<f64> = p.list("fractions")?.unwrap_or_else(|| vec![0.25, 0.5, 0.75, 1.0]);
    let bin_width: f64 = p.get("bin_width", 0.25)?;
    p.finish()?;

    if let Some(&f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(CliError::Input(format!("fractions must lie in (0, 1], got {f}")));
    }
    let vectors = match &input {
        Some(path) => read_vectors(path)?,
        None => synthetic(count, dim, seed)?,
    };
    if vectors.len() < 2 {
        return Err(CliError::Input(format!(
            "nearest-neighbor distances need at least 2 vectors, got {}",
            vectors.len()
        )));
    }
    let reference = 2.0 * critical_radius(vectors.dim())?;
    let source = match &input {
        Some(path) => path.display().to_string(),
        None => format!("synthetic {count} x {dim}"),
    };
    writeln!(
        ctx.stdout,
        "{source}: {} vectors, n = {}, reference 2*critical_radius = {reference:.4}",
        vectors.len(),
        vectors.dim()
    )?;

    // Nested subsamples: every fraction takes a prefix of one shuffled order.
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.shuffle(&mut stream_rng(seed, 0));

    let mut summary = Vec::new();
    writeln!(summary, "fraction,count,mean,median,reference")?;
    for &f in &fractions {
        let take = ((f * vectors.len() as f64).ceil() as usize).clamp(1, vectors.len());
        if take < 2 {
            return Err(CliError::Input(format!(
                "fraction {f} keeps {take} of {} vectors; at least 2 are needed",
                vectors.len()
            )));
        }
        let mut idx = order[..take].to_vec();
        idx.sort_unstable();
        let sub = vectors.select(&idx)?;
        let stats = nn_distance_stats(&sub, bin_width)?;
        let pct = (f * 100.0).round() as u64;
        ctx.write_file(&format!("radius_hist_{pct}.csv"), |w| {
            writeln!(w, "bin_lower,bin_upper,count")?;
            for (lo, hi, c) in stats.histogram.bins() {
                writeln!(w, "{lo:.16e},{hi:.16e},{c}")?;
            }
            Ok(())
        })?;
        writeln!(
            ctx.stdout,
            "  {pct:>3}%: {take} vectors, mean {:.4}, median {:.4}",
            stats.mean, stats.median
        )?;
        writeln!(
            summary,
            "{f},{take},{:.16e},{:.16e},{reference:.16e}",
            stats.mean, stats.median
        )?;
    }
    ctx.write_file("radius_summary.csv", |w| w.write_all(&summary))?;
    Ok(())
}
