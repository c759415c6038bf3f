use std::io::Write;

use assocmem::partition::{
    critical_radius, layer_partition, layer_partition_mc, loss_from_partition, partition_diagnostics,
    radius_for_unit_partition, write_diagnostics_csv,
};
use assocmem::patterns::PatternSet;

use crate::{CliError, Context};

/// `d` patterns on the first axis, spaced so balls of radius `r` stay disjoint.
fn line_patterns(n: usize, d: usize, r: f64) -> Result<PatternSet, CliError> {
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[0] = i as f64 * (2.0 * r + 1.0);
            row
        })
        .collect();
    Ok(PatternSet::from_rows(&rows)?)
}

pub fn run(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let p = &ctx.params;
    let seed = ctx.seed()?;
    let n: usize = p.get("n", 1024)?;
    let d: usize = p.get("d", 1)?;
    let radius_spec = p.string("radius").unwrap_or_else(|| "critical".into());
    let mc_samples: usize = p.get("mc_samples", 0)?;
    let grid_dims = p.list::<usize>("grid_dims")?;
    let grid_radii = p.list::<f64>("grid_radii")?;
    let grid_samples: usize = p.get("grid_samples", 100_000)?;
    p.finish()?;
    if d == 0 {
        return Err(CliError::Input("d must be at least 1".into()));
    }

    let r = match radius_spec.as_str() {
        "critical" => critical_radius(n)?,
        "unit" => radius_for_unit_partition(n, d)?,
        other => other.parse::<f64>().map_err(|_| {
            CliError::Input(format!("radius must be a number, `critical` or `unit`, got {other:?}"))
        })?,
    };
    let set = line_patterns(n, d, r)?;
    let radii = vec![r; d];
    let est = if mc_samples > 0 {
        layer_partition_mc(&set, &radii, mc_samples, seed)?
    } else {
        layer_partition(&set, &radii)?
    };
    let within = est.lower_bound <= est.value && est.value <= est.upper_bound;
    let loss = loss_from_partition(est.value);
    writeln!(ctx.stdout, "n = {n}, d = {d}, radius = {r:.6} ({radius_spec})")?;
    writeln!(ctx.stdout, "  Z = {:.6e} (ln Z = {:.6}), method {:?}", est.value, est.ln_value, est.method)?;
    writeln!(
        ctx.stdout,
        "  bounds [{:.6e}, {:.6e}]: {}",
        est.lower_bound,
        est.upper_bound,
        if within { "within" } else { "OUTSIDE" }
    )?;
    if let Some(mc) = &est.mc_estimate {
        writeln!(ctx.stdout, "  monte carlo {:.6e} +- {:.2e} ({} samples)", mc.mean, mc.standard_error, mc.samples)?;
    }
    match &loss {
        Ok(l) => writeln!(ctx.stdout, "  loss log Z + 1/Z = {l:.6e}")?,
        Err(e) => writeln!(ctx.stdout, "  loss not representable: {e}")?,
    }
    let loss_field = loss.as_ref().map_or_else(|_| "nan".to_string(), |l| format!("{l:.16e}"));
    ctx.write_file("partition.csv", |w| {
        writeln!(w, "n,d,radius,z,ln_z,lower,upper,paper_lower_variant,loss")?;
        writeln!(
            w,
            "{n},{d},{r:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{loss_field}",
            est.value, est.ln_value, est.lower_bound, est.upper_bound, est.paper_lower_variant
        )
    })?;
    if grid_dims.is_some() || grid_radii.is_some() {
        let dims = grid_dims.unwrap_or_else(|| (1..=8).collect());
        let radii = grid_radii.unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0]);
        let rows = partition_diagnostics(&dims, &radii, grid_samples, seed)?;
        ctx.write_file("partition_diagnostics.csv", |w| write_diagnostics_csv(&rows, w))?;
    }
    if !within {
        return Err(CliError::Violation("partition value lies outside its bounds".into()));
    }
    Ok(())
}
