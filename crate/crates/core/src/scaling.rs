//! Scaling-law arithmetic: Transformer parameter counts, the Kaplan and
//! Chinchilla loss forms, the `N = O(D²)` balance ratio and plateau-based
//! selection of the data size `D*` from training curves.

use std::io::Write;

use crate::error::{argument, domain, Error, Result};

/// Transformer dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub layers: u64,
    pub d_emb: u64,
    pub n_heads: u64,
    pub d_ff: u64,
    pub t_max: u64,
    pub vocab: u64,
}

impl ModelShape {
    /// GPT-2 medium: 24 layers, width 1024, 16 heads, `d_ff = 3·1024`.
    pub const GPT2_MEDIUM: ModelShape = ModelShape {
        layers: 24,
        d_emb: 1024,
        n_heads: 16,
        d_ff: 3072,
        t_max: 1024,
        vocab: 50_257,
    };

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("layers", self.layers),
            ("d_emb", self.d_emb),
            ("n_heads", self.n_heads),
            ("d_ff", self.d_ff),
            ("t_max", self.t_max),
            ("vocab", self.vocab),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(argument(format!("{name} must be positive")));
        }
        if self.d_emb % self.n_heads != 0 {
            return Err(argument(format!(
                "d_emb = {} is not divisible by n_heads = {}",
                self.d_emb, self.n_heads
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBreakdown {
    /// `3·l·d_emb²`.
    pub attention: u64,
    /// `l·d_emb² + 2·l·d_emb`.
    pub dense_and_norm: u64,
    /// `l·(2·d_emb·d_ff + d_emb + d_ff)`.
    pub feed_forward: u64,
    /// `vocab·d_emb`.
    pub embedding: u64,
    /// Attention, dense/norm and feed-forward; embeddings excluded.
    pub transformer_total: u64,
    /// `transformer_total / (l·d_emb²)`.
    pub effective_a: f64,
}

fn overflow() -> Error {
    argument("parameter count overflows 64 bits")
}

/// Exact per-component parameter counts.
pub fn count_parameters(shape: &ModelShape) -> Result<ParamBreakdown> {
    shape.validate()?;
    let l = shape.layers;
    let d = shape.d_emb;
    let ld2 = d.checked_mul(d).and_then(|d2| d2.checked_mul(l)).ok_or_else(overflow)?;
    let ld = l.checked_mul(d).ok_or_else(overflow)?;
    let attention = ld2.checked_mul(3).ok_or_else(overflow)?;
    let dense_and_norm = ld.checked_mul(2).and_then(|v| v.checked_add(ld2)).ok_or_else(overflow)?;
    let feed_forward = d
        .checked_mul(shape.d_ff)
        .and_then(|v| v.checked_mul(2))
        .and_then(|v| v.checked_add(d))
        .and_then(|v| v.checked_add(shape.d_ff))
        .and_then(|v| v.checked_mul(l))
        .ok_or_else(overflow)?;
    let embedding = shape.vocab.checked_mul(d).ok_or_else(overflow)?;
    let transformer_total = attention
        .checked_add(dense_and_norm)
        .and_then(|v| v.checked_add(feed_forward))
        .ok_or_else(overflow)?;
    Ok(ParamBreakdown {
        attention,
        dense_and_norm,
        feed_forward,
        embedding,
        transformer_total,
        effective_a: transformer_total as f64 / ld2 as f64,
    })
}

/// Token count `D ≈ T_max·d` for `d` sequences of length `T_max`.
pub fn data_size_from_sequences(t_max: u64, sequences: u64) -> Result<u64> {
    t_max.checked_mul(sequences).ok_or_else(overflow)
}

/// `L(N, D) = ((N_c/N)^{α_N/α_D} + D_c/D)^{α_D}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaplanFit {
    pub n_c: f64,
    pub d_c: f64,
    pub alpha_n: f64,
    pub alpha_d: f64,
}

impl Default for KaplanFit {
    /// Joint fit reported by Kaplan et al. (2020) for `L(N, D)`.
    fn default() -> Self {
        Self {
            n_c: 6.4e13,
            d_c: 1.8e13,
            alpha_n: 0.076,
            alpha_d: 0.103,
        }
    }
}

/// `L̂(N, D) = E + A/N^α + B/D^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChinchillaFit {
    pub e: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ChinchillaFit {
    fn default() -> Self {
        Self {
            e: 1.61,
            a: 406.4,
            b: 410.7,
            alpha: 0.34,
            beta: 0.28,
        }
    }
}

/// Both scaling-law fits.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScalingFit {
    pub kaplan: KaplanFit,
    pub chinchilla: ChinchillaFit,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl KaplanFit {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("N_c", self.n_c),
            ("D_c", self.d_c),
            ("alpha_N", self.alpha_n),
            ("alpha_D", self.alpha_d),
        ] {
            positive(name, v).map_err(|_| argument(format!("{name} must be positive, got {v}")))?;
        }
        Ok(())
    }
}

impl ChinchillaFit {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("A", self.a), ("B", self.b), ("alpha", self.alpha), ("beta", self.beta)] {
            positive(name, v).map_err(|_| argument(format!("{name} must be positive, got {v}")))?;
        }
        if !(self.e.is_finite() && self.e >= 0.0) {
            return Err(argument(format!("E must be non-negative, got {}", self.e)));
        }
        Ok(())
    }
}

pub fn kaplan_loss(n: f64, d: f64, fit: &KaplanFit) -> Result<f64> {
    positive("N", n)?;
    positive("D", d)?;
    fit.validate()?;
    Ok(((fit.n_c / n).powf(fit.alpha_n / fit.alpha_d) + fit.d_c / d).powf(fit.alpha_d))
}

pub fn chinchilla_loss(n: f64, d: f64, fit: &ChinchillaFit) -> Result<f64> {
    positive("N", n)?;
    positive("D", d)?;
    fit.validate()?;
    Ok(fit.e + fit.a / n.powf(fit.alpha) + fit.b / d.powf(fit.beta))
}

/// `D* = √(N/κ)`, the data size at which `N/D² = κ`.
pub fn optimal_data_balance(n: f64, kappa: f64) -> Result<f64> {
    positive("N", n)?;
    positive("kappa", kappa)?;
    Ok((n / kappa).sqrt())
}

/// `N/D²`.
pub fn balance_ratio(n: f64, d: f64) -> Result<f64> {
    positive("N", n)?;
    positive("D", d)?;
    Ok(n / (d * d))
}

/// Training and validation losses of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LossCurve {
    pub steps: Vec<u64>,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// Training tokens `D`.
    pub data_size: f64,
    /// Parameters `N`.
    pub model_size: f64,
}

impl LossCurve {
    pub fn new(steps: Vec<u64>, train_loss: Vec<f64>, val_loss: Vec<f64>, model_size: f64, data_size: f64) -> Result<Self> {
        if steps.is_empty() {
            return Err(argument("loss curve has no records"));
        }
        if steps.len() != train_loss.len() || steps.len() != val_loss.len() {
            return Err(argument("steps, train_loss and val_loss must have equal lengths"));
        }
        if let Some(w) = steps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(argument(format!(
                "steps must be strictly increasing: {} follows {}",
                steps[w + 1],
                steps[w]
            )));
        }
        if train_loss.iter().chain(&val_loss).any(|v| !v.is_finite()) {
            return Err(argument("losses must be finite"));
        }
        positive("N", model_size).map_err(|e| argument(e.to_string()))?;
        positive("D", data_size).map_err(|e| argument(e.to_string()))?;
        Ok(Self {
            steps,
            train_loss,
            val_loss,
            data_size,
            model_size,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Parses `step,train_loss,val_loss` records. A header line is optional;
/// the header `step,train_loss,val_loss` is the only one accepted.
pub fn parse_loss_curve_csv(bytes: &[u8], model_size: f64, data_size: f64) -> Result<LossCurve> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let (mut steps, mut train, mut val) = (Vec::new(), Vec::new(), Vec::new());
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Ingestion {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::Ingestion {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        if k == 0 && steps.is_empty() && record.iter().eq(["step", "train_loss", "val_loss"]) {
            continue;
        }
        let step = record[0].parse::<u64>().map_err(|e| Error::Ingestion {
            line,
            message: format!("step {:?}: {e}", &record[0]),
        })?;
        let parse = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Ingestion {
                    line,
                    message: format!("{what} {s:?} is not a finite number"),
                })
        };
        if let Some(&prev) = steps.last() {
            if step <= prev {
                return Err(Error::Ingestion {
                    line,
                    message: format!("step {step} does not exceed previous step {prev}"),
                });
            }
        }
        steps.push(step);
        train.push(parse(&record[1], "train_loss")?);
        val.push(parse(&record[2], "val_loss")?);
    }
    LossCurve::new(steps, train, val, model_size, data_size)
}

/// Boundary rule for `MSE` against `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Comparison {
    /// `MSE ≤ σ²`.
    #[default]
    AtMost,
    /// `MSE < σ²`.
    Strict,
}

impl Comparison {
    fn accepts(self, mse: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => mse <= threshold,
            Comparison::Strict => mse < threshold,
        }
    }
}

/// Mean squared gap between training loss and the minimum validation loss
/// over records with step in `[s_min, s_min + window)`, where `s_min` is the
/// first step attaining the minimum validation loss.
pub fn curve_mse(curve: &LossCurve, window: u64) -> Result<f64> {
    if window == 0 {
        return Err(argument("window must be ≥ 1"));
    }
    let (k_min, &l_min) = curve
        .val_loss
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (k, v)| match best {
            Some((_, b)) if *b <= *v => best,
            _ => Some((k, v)),
        })
        .ok_or_else(|| argument("loss curve has no records"))?;
    let start = curve.steps[k_min];
    let end = start.saturating_add(window);
    let (sum, count) = curve
        .steps
        .iter()
        .zip(&curve.train_loss)
        .skip(k_min)
        .take_while(|(s, _)| **s < end)
        .fold((0.0, 0usize), |(sum, c), (_, t)| (sum + (t - l_min).powi(2), c + 1));
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DStarSelection {
    /// Smallest qualifying `D`, if any.
    pub d_star: Option<f64>,
    pub selected_index: Option<usize>,
    pub per_curve_mse: Vec<f64>,
    pub model_size: f64,
    pub data_sizes: Vec<f64>,
}

impl DStarSelection {
    /// CSV with header `N,D,mse,selected`.
    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "N,D,mse,selected")?;
        for (k, (d, mse)) in self.data_sizes.iter().zip(&self.per_curve_mse).enumerate() {
            writeln!(
                sink,
                "{},{},{:.16e},{}",
                self.model_size,
                d,
                mse,
                self.selected_index == Some(k)
            )?;
        }
        Ok(())
    }
}

/// Picks the smallest `D` whose trailing-window MSE passes `threshold`.
pub fn select_from_mse(data_sizes: &[f64], mses: &[f64], threshold: f64, comparison: Comparison) -> Result<Option<usize>> {
    if data_sizes.is_empty() || data_sizes.len() != mses.len() {
        return Err(argument("need one MSE per data size, and at least one"));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(argument(format!("threshold must be positive, got {threshold}")));
    }
    if data_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(argument("data sizes must be strictly increasing"));
    }
    Ok(mses.iter().position(|&m| comparison.accepts(m, threshold)))
}

/// Computes each curve's MSE and selects `D*`.
pub fn select_dstar(curves: &[LossCurve], threshold: f64, window: u64, comparison: Comparison) -> Result<DStarSelection> {
    let first = curves.first().ok_or_else(|| argument("no loss curves given"))?;
    if let Some(c) = curves.iter().find(|c| c.model_size != first.model_size) {
        return Err(argument(format!(
            "curves must share N: found {} and {}",
            first.model_size, c.model_size
        )));
    }
    let per_curve_mse = curves.iter().map(|c| curve_mse(c, window)).collect::<Result<Vec<_>>>()?;
    let data_sizes: Vec<f64> = curves.iter().map(|c| c.data_size).collect();
    let selected_index = select_from_mse(&data_sizes, &per_curve_mse, threshold, comparison)?;
    Ok(DStarSelection {
        d_star: selected_index.map(|k| data_sizes[k]),
        selected_index,
        per_curve_mse,
        model_size: first.model_size,
        data_sizes,
    })
}
