use std::io::Write;

use assocmem::energy::{landscape_grid, Landscape};
use assocmem::patterns::PatternSet;

use super::{read_vectors, tag};
use crate::{CliError, Context};

const PANELS: [&str; 4] = ["lse", "regularizer", "mchn", "distance"];

fn panel(name: &str, beta: f64) -> Result<Landscape, CliError> {
    Ok(match name {
        "lse" => Landscape::NegLogSumExp { beta },
        "regularizer" => Landscape::MchnRegularizer { beta },
        "mchn" => Landscape::Mchn { beta },
        "distance" => Landscape::Distance { beta },
        other => {
            return Err(CliError::Input(format!(
                "unknown panel {other:?}; expected one of {}",
                PANELS.join(", ")
            )))
        }
    })
}

/// Bounding box of the patterns padded by `pad` on every side.
fn default_box(set: &PatternSet, pad: f64) -> (Vec<f64>, Vec<f64>) {
    let n = set.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in set.iter() {
        for k in 0..n {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo.iter().map(|v| v - pad).collect(), hi.iter().map(|v| v + pad).collect())
}

fn axis_list(values: Option<Vec<f64>>, default: Vec<f64>, key: &str) -> Result<Vec<f64>, CliError> {
    match values {
        None => Ok(default),
        Some(v) if v.len() == default.len() => Ok(v),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; default.len()]),
        Some(v) => Err(CliError::Input(format!(
            "{key} has {} entries for {}-D patterns",
            v.len(),
            default.len()
        ))),
    }
}

pub fn run(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let p = &ctx.params;
    let path = p
        .path("patterns")
        .ok_or_else(|| CliError::Input("landscape needs `patterns` (CSV or AMV1 file)".into()))?;
    let panels: Vec<String> = p.list("panels")?.unwrap_or_else(|| PANELS.map(String::from).to_vec());
    let betas: Vec<f64> = p.list("betas")?.unwrap_or_else(|| vec![1.0]);
    let resolution: usize = p.get("resolution", 200)?;
    let pad: f64 = p.get("padding", 1.5)?;
    let lower = p.list::<f64>("lower")?;
    let upper = p.list::<f64>("upper")?;
    p.finish()?;

    let set = PatternSet::new(read_vectors(&path)?)?;
    if set.dim() > 2 {
        return Err(CliError::Input(format!(
            "{}: landscapes need 1-D or 2-D patterns, got {}-D",
            path.display(),
            set.dim()
        )));
    }
    let (dlo, dhi) = default_box(&set, pad);
    let lower = axis_list(lower, dlo, "lower")?;
    let upper = axis_list(upper, dhi, "upper")?;
    let kinds = panels
        .iter()
        .flat_map(|name| betas.iter().map(move |&b| (name.clone(), b)))
        .map(|(name, b)| panel(&name, b).map(|k| (name, b, k)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut summary = Vec::new();
    let coord_header = if set.dim() == 1 { "x" } else { "x,y" };
    writeln!(summary, "panel,beta,kind,{coord_header},energy")?;
    for (name, beta, kind) in kinds {
        let grid = landscape_grid(&set, kind, &lower, &upper, resolution)?;
        ctx.write_file(&format!("landscape_{name}_beta{}.csv", tag(beta)), |w| grid.write_csv(w))?;
        let argmin = (0..grid.energies.len())
            .min_by(|&a, &b| grid.energies[a].total_cmp(&grid.energies[b]))
            .expect("grid has at least two points");
        let minima = grid.local_minima();
        let fmt_point = |i: usize| {
            grid.points[i].iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")
        };
        writeln!(
            ctx.stdout,
            "{name:>11} beta={beta:<6} global min {:.6} at ({}); {} local minima",
            grid.energies[argmin],
            fmt_point(argmin),
            minima.len()
        )?;
        let row = |w: &mut Vec<u8>, label: &str, i: usize| {
            let coords = grid.points[i].iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",");
            writeln!(w, "{name},{},{label},{coords},{:.16e}", tag(beta), grid.energies[i])
        };
        row(&mut summary, "global", argmin)?;
        for &i in &minima {
            row(&mut summary, "local", i)?;
        }
    }
    ctx.write_file("landscape_minima.csv", |w| w.write_all(&summary))?;
    Ok(())
}
