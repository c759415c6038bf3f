use std::io::Write;

use assocmem::scaling::{
    balance_ratio, chinchilla_loss, count_parameters, kaplan_loss, optimal_data_balance, ChinchillaFit, KaplanFit,
    ModelShape,
};

use crate::{CliError, Context};

const TABLE_N: [f64; 3] = [39.95e6, 60.26e6, 80.20e6];
const TABLE_D: [f64; 3] = [214.18e6, 261.78e6, 309.37e6];

pub fn run(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let p = &ctx.params;
    let ns: Vec<f64> = p.list("model_sizes")?.unwrap_or_else(|| TABLE_N.to_vec());
    let ds: Vec<f64> = p.list("data_sizes")?.unwrap_or_else(|| TABLE_D.to_vec());
    let kappa: f64 = p.get("kappa", 8.7e-10)?;
    let base = match p.string("shape").as_deref() {
        None | Some("gpt2-medium") => ModelShape::GPT2_MEDIUM,
        Some(other) => return Err(CliError::Input(format!("unknown shape preset {other:?}; expected gpt2-medium"))),
    };
    let shape = ModelShape {
        layers: p.get("layers", base.layers)?,
        d_emb: p.get("d_emb", base.d_emb)?,
        n_heads: p.get("n_heads", base.n_heads)?,
        d_ff: p.get("d_ff", base.d_ff)?,
        t_max: p.get("t_max", base.t_max)?,
        vocab: p.get("vocab", base.vocab)?,
    };
    let dk = KaplanFit::default();
    let kaplan = KaplanFit {
        n_c: p.get("kaplan_n_c", dk.n_c)?,
        d_c: p.get("kaplan_d_c", dk.d_c)?,
        alpha_n: p.get("kaplan_alpha_n", dk.alpha_n)?,
        alpha_d: p.get("kaplan_alpha_d", dk.alpha_d)?,
    };
    let dc = ChinchillaFit::default();
    let chinchilla = ChinchillaFit {
        e: p.get("chinchilla_e", dc.e)?,
        a: p.get("chinchilla_a", dc.a)?,
        b: p.get("chinchilla_b", dc.b)?,
        alpha: p.get("chinchilla_alpha", dc.alpha)?,
        beta: p.get("chinchilla_beta", dc.beta)?,
    };
    p.finish()?;
    if ns.len() != ds.len() {
        return Err(CliError::Input(format!(
            "model_sizes has {} entries but data_sizes has {}",
            ns.len(),
            ds.len()
        )));
    }

    let breakdown = count_parameters(&shape)?;
    writeln!(
        ctx.stdout,
        "shape l={} d_emb={} heads={} d_ff={}: attention {}, dense+norm {}, feed-forward {}, embedding {}, total {}, A = {:.4}",
        shape.layers,
        shape.d_emb,
        shape.n_heads,
        shape.d_ff,
        breakdown.attention,
        breakdown.dense_and_norm,
        breakdown.feed_forward,
        breakdown.embedding,
        breakdown.transformer_total,
        breakdown.effective_a
    )?;
    ctx.write_file("scaling_params.csv", |w| {
        writeln!(w, "attention,dense_and_norm,feed_forward,embedding,transformer_total,effective_a")?;
        writeln!(
            w,
            "{},{},{},{},{},{:.16e}",
            breakdown.attention,
            breakdown.dense_and_norm,
            breakdown.feed_forward,
            breakdown.embedding,
            breakdown.transformer_total,
            breakdown.effective_a
        )
    })?;

    let mut rows = Vec::new();
    for (&n, &d) in ns.iter().zip(&ds) {
        rows.push((
            n,
            d,
            balance_ratio(n, d)?,
            optimal_data_balance(n, kappa)?,
            kaplan_loss(n, d, &kaplan)?,
            chinchilla_loss(n, d, &chinchilla)?,
        ));
    }
    for (n, d, ratio, d_opt, kl, cl) in &rows {
        writeln!(
            ctx.stdout,
            "  N = {n:.4e}, D = {d:.4e}: N/D^2 = {ratio:.3e}, D*(kappa) = {d_opt:.4e}, kaplan {kl:.4}, chinchilla {cl:.4}"
        )?;
    }
    ctx.write_file("scaling.csv", |w| {
        writeln!(w, "N,D,ratio,d_opt,kaplan_loss,chinchilla_loss")?;
        for (n, d, ratio, d_opt, kl, cl) in &rows {
            writeln!(w, "{n:.16e},{d:.16e},{ratio:.16e},{d_opt:.16e},{kl:.16e},{cl:.16e}")?;
        }
        Ok(())
    })?;
    Ok(())
}
