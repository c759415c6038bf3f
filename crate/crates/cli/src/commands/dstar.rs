use assocmem::scaling::{parse_loss_curve_csv, select_dstar, Comparison};

use crate::{CliError, Context};

pub fn run(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let p = &ctx.params;
    let paths = p
        .paths("curves")
        .ok_or_else(|| CliError::Input("dstar needs `curves` (comma-separated loss-curve CSV paths)".into()))?;
    let model_size: f64 = p.get("model_size", 1.0)?;
    let data_sizes: Vec<f64> = p
        .list("data_sizes")?
        .ok_or_else(|| CliError::Input("dstar needs `data_sizes`, one per curve".into()))?;
    let threshold: f64 = p.get("threshold", 0.04)?;
    let window: u64 = p.get("window", 1000)?;
    let comparison = match p.string("comparison").as_deref() {
        None | Some("at-most") => Comparison::AtMost,
        Some("strict") => Comparison::Strict,
        Some(other) => {
            return Err(CliError::Input(format!("unknown comparison {other:?}; expected at-most or strict")))
        }
    };
    p.finish()?;
    if paths.len() != data_sizes.len() {
        return Err(CliError::Input(format!(
            "{} curves but {} data sizes",
            paths.len(),
            data_sizes.len()
        )));
    }

    let curves = paths
        .iter()
        .zip(&data_sizes)
        .map(|(path, &d)| {
            let bytes =
                std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            parse_loss_curve_csv(&bytes, model_size, d).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let selection = select_dstar(&curves, threshold, window, comparison)?;
    for (d, mse) in selection.data_sizes.iter().zip(&selection.per_curve_mse) {
        writeln!(ctx.stdout, "  D = {d:.4e}: MSE {mse:.6}")?;
    }
    match selection.d_star {
        Some(d) => writeln!(ctx.stdout, "D* = {d:.6e} at threshold {threshold}")?,
        None => writeln!(ctx.stdout, "no curve qualifies at threshold {threshold}")?,
    }
    ctx.write_file("dstar.csv", |w| selection.write_csv(w))?;
    Ok(())
}
