use assocmem::dynamics::{capacity_sweep, CapacityConfig, RetrievalParams, UpdateMode};
use assocmem::energy::{EnergySpec, HebbianNormalization};

use crate::{CliError, Context};

pub fn run(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let p = &ctx.params;
    let seed = ctx.seed()?;
    let kind = p.string("spec").unwrap_or_else(|| "classical".into());
    let order: u32 = p.get("order", 3)?;
    let beta: f64 = p.get("beta", 1.0)?;
    let n: usize = p.get("n", 100)?;
    let counts = p.counts("counts")?.unwrap_or_else(|| (2..=30).step_by(2).collect());
    let defaults = CapacityConfig::default();
    let mode = match p.string("mode").as_deref() {
        None | Some("async") => UpdateMode::AsynchronousSweep,
        Some("sync") => UpdateMode::Synchronous,
        Some(other) => return Err(CliError::Input(format!("unknown mode {other:?}; expected async or sync"))),
    };
    let normalization = match p.string("normalization").as_deref() {
        None | Some("per-pattern") => HebbianNormalization::PerPattern,
        Some("per-dimension") => HebbianNormalization::PerDimension,
        Some(other) => {
            return Err(CliError::Input(format!(
                "unknown normalization {other:?}; expected per-pattern or per-dimension"
            )))
        }
    };
    let config = CapacityConfig {
        trials: p.get("trials", defaults.trials)?,
        corruption: p.get("corruption", defaults.corruption)?,
        seed,
        max_sweeps: p.get("max_sweeps", defaults.max_sweeps)?,
        mode,
        normalization,
        continuous_gap: p.get("gap", defaults.continuous_gap)?,
        retrieval: RetrievalParams {
            beta,
            ..RetrievalParams::default()
        },
    };
    let spec = match kind.as_str() {
        "classical" => EnergySpec::ClassicalBinary,
        "dense" => EnergySpec::DensePolynomial { order },
        "exponential" => EnergySpec::ExponentialBinary,
        "mchn" => EnergySpec::Mchn { beta },
        "distance" => EnergySpec::Distance { beta },
        other => {
            return Err(CliError::Input(format!(
                "unknown spec {other:?}; expected classical, dense, exponential, mchn or distance"
            )))
        }
    };
    p.finish()?;

    let curve = capacity_sweep(spec, n, &counts, &config)?;
    ctx.write_file(&format!("capacity_{}.csv", spec.name()), |w| curve.write_csv(w))?;
    for (d, rate) in curve.counts.iter().zip(&curve.success_rates) {
        writeln!(ctx.stdout, "  d = {d:>5}: success {rate:.3}")?;
    }
    match curve.threshold {
        Some(d) => writeln!(
            ctx.stdout,
            "{} n = {n}: capacity d* = {d} (d*/n = {:.4})",
            spec.name(),
            d as f64 / n as f64
        )?,
        None => writeln!(ctx.stdout, "{} n = {n}: no count reached the success threshold", spec.name())?,
    }
    Ok(())
}
