//! Numerically stable primitives: LogSumExp family, squared distances,
//! Γ and incomplete Γ, n-ball geometry.
//!
//! Everything is `f64`. Geometry and Γ come in log-domain variants because
//! the dimensions of interest (n ≈ 10³) put `V_n(1)` near 1e-912.

use std::f64::consts::{E, PI};

use crate::error::{argument, domain, Error, Result};

fn check_vector(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(argument("vector must be non-empty"));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(argument(format!("entry {i} is not finite ({})", v[i])));
    }
    Ok(())
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `log Σ exp(v_i)`, shifted by the maximum so it never overflows.
pub fn log_sum_exp(v: &[f64]) -> Result<f64> {
    check_vector(v)?;
    Ok(lse_unchecked(v))
}

pub(crate) fn lse_unchecked(v: &[f64]) -> f64 {
    let m = max_of(v);
    let s: f64 = v.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// Smooth minimum `−LSE(−v)`, bracketed by `min(v) − log len ≤ · ≤ min(v)`.
pub fn smooth_min(v: &[f64]) -> Result<f64> {
    check_vector(v)?;
    Ok(smooth_min_unchecked(v))
}

pub(crate) fn smooth_min_unchecked(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = v.iter().map(|x| (m - x).exp()).sum();
    m - s.ln()
}

/// Softmax, the gradient of [`log_sum_exp`].
pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    check_vector(v)?;
    Ok(softmax_unchecked(v))
}

pub(crate) fn softmax_unchecked(v: &[f64]) -> Vec<f64> {
    let m = max_of(v);
    let mut out: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|w| *w /= s);
    out
}

/// `‖x − y‖²`.
pub fn squared_euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(sq_dist(x, y))
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

// ---------------------------------------------------------------------------
// Gamma family

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos series `A(z)` for `Γ(z+1)`, valid for `z ≥ −0.5`.
fn lanczos_sum(zm1: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (zm1 + k as f64);
    }
    a
}

fn check_positive(z: f64, what: &str) -> Result<()> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{what} must be a positive finite real, got {z}")))
    }
}

/// `ln Γ(z)` for `z > 0`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    check_positive(z, "Γ argument")?;
    Ok(ln_gamma_unchecked(z))
}

pub(crate) fn ln_gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        return (PI / (PI * z).sin()).ln() - ln_gamma_unchecked(1.0 - z);
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + lanczos_sum(zm1).ln()
}

/// Γ(z) for `z > 0`. Overflows to `+∞` past z ≈ 171.6.
pub fn gamma_function(z: f64) -> Result<f64> {
    check_positive(z, "Γ argument")?;
    if z < 0.5 {
        let g1 = gamma_function(1.0 - z)?;
        return Ok(PI / ((PI * z).sin() * g1));
    }
    let zm1 = z - 1.0;
    let t = zm1 + LANCZOS_G + 0.5;
    // split the power so t^(z−½) does not overflow before e^(−t) is applied
    let half = t.powf(0.5 * (zm1 + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(zm1))
}

/// Stirling's approximation `√(2π/z)·(z/e)^z`.
pub fn stirling_gamma(z: f64) -> Result<f64> {
    Ok(ln_stirling_gamma(z)?.exp())
}

pub fn ln_stirling_gamma(z: f64) -> Result<f64> {
    check_positive(z, "Stirling argument")?;
    Ok(0.5 * (2.0 * PI / z).ln() + z * (z / E).ln())
}

/// Arguments of the incomplete gamma functions: shape `n > 0`, cutoff `r ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaArgs {
    shape: f64,
    cutoff: f64,
}

impl GammaArgs {
    pub fn new(shape: f64, cutoff: f64) -> Result<Self> {
        check_positive(shape, "incomplete Γ shape")?;
        if !(cutoff >= 0.0) || cutoff.is_nan() {
            return Err(domain(format!("incomplete Γ cutoff must be ≥ 0, got {cutoff}")));
        }
        Ok(Self { shape, cutoff })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

const INC_GAMMA_MAX_ITER: usize = 100_000;

/// `(ln P, ln Q)` of the regularized incomplete gamma pair.
///
/// Series for `x < a + 1`, Lentz continued fraction otherwise; the other
/// member of the pair comes from `ln(1 − ·)` via `ln_1p`.
fn ln_regularized_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x == f64::INFINITY {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    let ln_prefactor = -x + a * x.ln() - ln_gamma_unchecked(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..INC_GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * f64::EPSILON {
                let ln_p = ln_prefactor + sum.ln();
                return Ok((ln_p, ln_one_minus_exp(ln_p)));
            }
        }
    } else {
        let tiny = 1e-300;
        let b0 = x + 1.0 - a;
        let mut f = if b0.abs() < tiny { tiny } else { b0 };
        let mut c = f;
        let mut d = 0.0;
        for k in 1..=INC_GAMMA_MAX_ITER {
            let kf = k as f64;
            let an = kf * (a - kf);
            let bn = x + 2.0 * kf + 1.0 - a;
            d = bn + an * d;
            if d.abs() < tiny {
                d = tiny;
            }
            d = 1.0 / d;
            c = bn + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                let ln_q = ln_prefactor - f.ln();
                return Ok((ln_one_minus_exp(ln_q), ln_q));
            }
        }
    }
    Err(domain(format!("incomplete Γ({a}, {x}) did not converge")))
}

/// `ln(1 − e^t)` for `t ≤ 0`.
fn ln_one_minus_exp(t: f64) -> f64 {
    if t > -std::f64::consts::LN_2 {
        (-t.exp_m1()).ln()
    } else {
        (-t.exp()).ln_1p()
    }
}

/// Regularized lower incomplete gamma `P(n, r) = γ(n, r)/Γ(n)`.
pub fn regularized_lower_gamma(a: GammaArgs) -> Result<f64> {
    Ok(ln_regularized_pair(a.shape, a.cutoff)?.0.exp())
}

/// Regularized upper incomplete gamma `Q(n, r) = Γ(n, r)/Γ(n)`.
pub fn regularized_upper_gamma(a: GammaArgs) -> Result<f64> {
    Ok(ln_regularized_pair(a.shape, a.cutoff)?.1.exp())
}

/// `ln P(n, r)`; stays finite where `P` itself underflows.
pub fn ln_regularized_lower_gamma(a: GammaArgs) -> Result<f64> {
    Ok(ln_regularized_pair(a.shape, a.cutoff)?.0)
}

/// Lower incomplete gamma `γ(n, r) = ∫₀^r t^{n−1} e^{−t} dt`.
pub fn lower_incomplete_gamma(a: GammaArgs) -> Result<f64> {
    let (ln_p, _) = ln_regularized_pair(a.shape, a.cutoff)?;
    Ok((ln_p + ln_gamma_unchecked(a.shape)).exp())
}

/// Upper incomplete gamma `Γ(n, r) = ∫_r^∞ t^{n−1} e^{−t} dt`.
pub fn upper_incomplete_gamma(a: GammaArgs) -> Result<f64> {
    let (_, ln_q) = ln_regularized_pair(a.shape, a.cutoff)?;
    Ok((ln_q + ln_gamma_unchecked(a.shape)).exp())
}

// ---------------------------------------------------------------------------
// n-ball geometry

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        Err(argument("dimension must be ≥ 1"))
    } else {
        Ok(())
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(argument(format!("radius must be a finite non-negative real, got {r}")))
    }
}

/// `ln V_n(r)` with `V_n(r) = π^{n/2} rⁿ / Γ(1 + n/2)`.
pub fn ln_ball_volume(n: usize, r: f64) -> Result<f64> {
    check_dimension(n)?;
    check_radius(r)?;
    let nf = n as f64;
    Ok(0.5 * nf * PI.ln() + nf * r.ln() - ln_gamma_unchecked(1.0 + 0.5 * nf))
}

/// Volume of the n-ball of radius `r`.
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    Ok(ln_ball_volume(n, r)?.exp())
}

/// `A_{n−1} = 2π^{n/2}/Γ(n/2)`, the area of the unit sphere bounding the n-ball.
pub fn sphere_area(n: usize) -> Result<f64> {
    Ok(ln_sphere_area(n)?.exp())
}

pub fn ln_sphere_area(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    Ok(2f64.ln() + 0.5 * nf * PI.ln() - ln_gamma_unchecked(0.5 * nf))
}

/// Stirling form of `ln V_n(1)`: `ln[(nπ)^{−1/2} (2πe/n)^{n/2}]`.
pub fn stirling_ln_unit_ball_volume(n: usize) -> Result<f64> {
    check_dimension(n)?;
    let nf = n as f64;
    Ok(-0.5 * (nf * PI).ln() + 0.5 * nf * (2.0 * PI * E / nf).ln())
}
