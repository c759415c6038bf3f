//! Library values checked against independent computations: direct sums,
//! adaptive quadrature, closed-form factorials, brute-force search and
//! frozen high-precision constants.

use std::f64::consts::PI;

use assocmem::energy::{layer_energy, landscape_grid, mchn_energy, Landscape};
use assocmem::numerics::{
    gamma_function, ln_ball_volume, log_sum_exp, lower_incomplete_gamma, softmax, sphere_area,
    stirling_ln_unit_ball_volume, upper_incomplete_gamma, GammaArgs,
};
use assocmem::partition::{gaussian_ball_integral, layer_partition};
use assocmem::patterns::{build_grid_index, nearest_pattern, nn_distances, query_index, PatternSet, VectorSet};
use assocmem::rng::stream_rng;
use assocmem::scaling::{balance_ratio, chinchilla_loss, ChinchillaFit};
use rand::Rng;
use rand_distr::StandardNormal;

/// Adaptive Simpson quadrature.
fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Γ at integers and half-integers from factorials.
fn gamma_closed(twice_z: u32) -> f64 {
    if twice_z % 2 == 0 {
        (1..twice_z / 2).map(f64::from).product()
    } else {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let k = twice_z / 2;
        let mut v = PI.sqrt();
        for j in 1..=k {
            v *= (2 * j - 1) as f64 / 2.0;
        }
        v
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn log_sum_exp_matches_direct_summation() {
    let mut rng = stream_rng(1, 0);
    for _ in 0..500 {
        let len = rng.random_range(1..20);
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-20.0..20.0)).collect();
        let direct = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v).unwrap() - direct).abs() < 1e-13);
    }
    assert!((log_sum_exp(&[-4.0, 0.0, -1.0]).unwrap() - 0.326_562_641_267_470_46).abs() < 1e-15);
}

#[test]
fn softmax_frozen_values() {
    let s = softmax(&[1.0, 2.0, 3.0]).unwrap();
    let want = [0.090_030_573_170_380_46, 0.244_728_471_054_797_65, 0.665_240_955_774_821_9];
    for (a, b) in s.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn gamma_matches_factorials() {
    for twice in 1..=340u32 {
        let z = f64::from(twice) / 2.0;
        let exact = gamma_closed(twice);
        assert!(rel(gamma_function(z).unwrap(), exact) < 1e-10, "Γ({z})");
    }
}

#[test]
fn incomplete_gamma_matches_quadrature() {
    for a in [1.0, 2.0, 3.0, 4.5, 7.0] {
        for x in [0.5, 2.0, 5.0, 10.0] {
            let f = |t: f64| t.powf(a - 1.0) * (-t).exp();
            let q = integrate(&f, 0.0, x, 1e-13);
            let lib = lower_incomplete_gamma(GammaArgs::new(a, x).unwrap()).unwrap();
            assert!(rel(lib, q) < 1e-9, "γ({a}, {x}): {lib} vs {q}");
            let upper = upper_incomplete_gamma(GammaArgs::new(a, x).unwrap()).unwrap();
            let tail = integrate(&f, x, x + 80.0, 1e-14);
            assert!(rel(upper, tail) < 1e-8, "Γ({a}, {x}): {upper} vs {tail}");
        }
    }
    let g = lower_incomplete_gamma(GammaArgs::new(3.0, 2.0).unwrap()).unwrap();
    assert!((g - 0.646_647_167_633_873_1).abs() < 1e-14);
}

#[test]
fn ball_integral_matches_radial_quadrature() {
    for n in 1..=10usize {
        let area = 2.0 * PI.powf(n as f64 / 2.0) / gamma_closed(n as u32);
        assert!(rel(sphere_area(n).unwrap(), area) < 1e-12);
        for r in [0.3, 1.0, 2.0, 4.0] {
            let f = |t: f64| t.powi(n as i32 - 1) * (-t * t).exp();
            let q = area * integrate(&f, 0.0, r, 1e-14);
            assert!(rel(gaussian_ball_integral(n, r).unwrap(), q) < 1e-9, "n={n} r={r}");
        }
    }
}

#[test]
fn ball_integral_frozen_values() {
    assert!(rel(gaussian_ball_integral(1, 1.0).unwrap(), 1.493_648_265_624_854) < 1e-13);
    assert!(rel(gaussian_ball_integral(2, 1.0).unwrap(), 1.985_865_303_798_871_5) < 1e-13);
    let v = gaussian_ball_integral(3, 2.0).unwrap();
    assert!(rel(v, 5.312_119_727_860_38) < 1e-13);
    // 4.9087 is not the value of 4π∫₀² t² e^{−t²} dt
    assert!((v - 4.9087).abs() > 0.4);
}

#[test]
fn high_dimensional_unit_ball() {
    let exact = ln_ball_volume(1024, 1.0).unwrap();
    assert!((exact - -2_099.958_770_071_455_5).abs() < 1e-8);
    let stirling = stirling_ln_unit_ball_volume(1024).unwrap();
    assert!(((stirling - exact).exp() - 1.0).abs() < 5e-3);
}

#[test]
fn layer_partition_matches_sampling_over_the_ball_union() {
    // d = 5, n = 4, mixed radii; Monte Carlo over Ω with the exact nearest distance
    let set = PatternSet::from_rows(&[
        [0.0, 0.0, 0.0, 0.0],
        [6.0, 0.0, 0.0, 0.0],
        [0.0, 6.0, 0.0, 0.0],
        [0.0, 0.0, 6.0, 0.0],
        [0.0, 0.0, 0.0, 6.0],
    ])
    .unwrap();
    let radii = [0.5, 1.0, 1.5, 2.0, 2.5];
    let z = layer_partition(&set, &radii).unwrap();
    let mut rng = stream_rng(2024, 0);
    let n = 4;
    let per_ball = 400_000;
    let (mut mean, mut var) = (0.0, 0.0);
    for (c, &r) in set.iter().zip(&radii) {
        let vol = PI.powi(2) / 2.0 * r.powi(4);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..per_ball {
            let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let rad = r * rng.random::<f64>().powf(0.25);
            let x: Vec<f64> = c.iter().zip(&dir).map(|(ci, d)| ci + d / norm * rad).collect();
            let g = set
                .iter()
                .map(|p| p.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            let w = (-g).exp();
            s += w;
            s2 += w * w;
        }
        let m = s / per_ball as f64;
        let v = (s2 / per_ball as f64 - m * m) / per_ball as f64;
        mean += vol * m;
        var += vol * vol * v;
    }
    let se = var.sqrt();
    assert!((z.value - mean).abs() < 3.0 * se, "{} vs {mean} ± {se}", z.value);
}

#[test]
fn grid_index_matches_brute_force() {
    let mut rng = stream_rng(5, 0);
    for n in [1usize, 2, 3, 5] {
        let rows: Vec<Vec<f64>> = (0..300).map(|_| (0..n).map(|_| rng.random_range(-20.0..20.0)).collect()).collect();
        let set = PatternSet::from_rows(&rows).unwrap();
        let idx = build_grid_index(&set, 2.5).unwrap();
        for _ in 0..200 {
            let q: Vec<f64> = (0..n).map(|_| rng.random_range(-40.0..40.0)).collect();
            let brute = set
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>()))
                .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            assert_eq!(query_index(&idx, &q).unwrap(), brute);
            assert_eq!(nearest_pattern(&q, &set).unwrap(), brute);
        }
    }
}

#[test]
fn nn_distances_match_pairwise_scan() {
    let mut rng = stream_rng(6, 0);
    let data: Vec<f64> = (0..50 * 7).map(|_| rng.random_range(-1.0..1.0)).collect();
    let vs = VectorSet::new(7, data).unwrap();
    let got = nn_distances(&vs).unwrap();
    for i in 0..vs.len() {
        let best = (0..vs.len())
            .filter(|&j| j != i)
            .map(|j| vs.row(i).iter().zip(vs.row(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!((got[i] - best).abs() < 1e-12);
    }
}

#[test]
fn mchn_energy_matches_naive_formula() {
    let set = PatternSet::from_rows(&[[0.5, -1.0], [1.5, 0.25], [-0.75, 0.5]]).unwrap();
    for beta in [0.5, 1.0, 2.0] {
        for x in [[0.0, 0.0], [0.3, -0.2], [1.0, 1.0]] {
            let lse = set.iter().map(|p| (beta * (p[0] * x[0] + p[1] * x[1])).exp()).sum::<f64>().ln() / beta;
            let max_norm = set.iter().map(|p| p[0] * p[0] + p[1] * p[1]).fold(0.0, f64::max);
            let want = -lse + 0.5 * (x[0] * x[0] + x[1] * x[1]) + 3f64.ln() / beta + 0.5 * max_norm;
            assert!((mchn_energy(&x, &set, beta).unwrap() - want).abs() < 1e-13);
            let dist = -set
                .iter()
                .map(|p| (-beta * ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2))).exp())
                .sum::<f64>()
                .ln()
                / beta;
            assert!((layer_energy(&x, &set, beta).unwrap() - dist).abs() < 1e-13);
        }
    }
}

/// Local minima of the 1-D landscapes over {−2, 0, 1}, frozen from a
/// 40-digit root-finding of the derivative.
#[test]
fn one_dimensional_landscape_minima() {
    let set = PatternSet::from_rows(&[[-2.0], [0.0], [1.0]]).unwrap();
    let cases: [(Landscape, &[f64]); 5] = [
        (Landscape::Distance { beta: 1.0 }, &[-1.956_949_211_974_161_6, 0.493_618_759_455_845_9]),
        (
            Landscape::Distance { beta: 4.0 },
            &[-1.999_999_774_928_864_7, 0.021_247_797_869_558_844, 0.978_752_012_038_633],
        ),
        (Landscape::Mchn { beta: 1.0 }, &[-1.952_212_100_718_720_8]),
        (Landscape::Mchn { beta: 2.0 }, &[-1.999_308_945_098_754, 0.820_464_372_672_176_2]),
        (Landscape::Mchn { beta: 8.0 }, &[-2.0, 0.999_663_746_744_144]),
    ];
    let resolution = 8001;
    let step = 8.0 / (resolution - 1) as f64;
    for (kind, want) in cases {
        let grid = landscape_grid(&set, kind, &[-4.0], &[4.0], resolution).unwrap();
        let minima: Vec<f64> = grid.local_minima().iter().map(|&i| grid.points[i][0]).collect();
        assert_eq!(minima.len(), want.len(), "{kind:?}: {minima:?}");
        for (m, w) in minima.iter().zip(want) {
            assert!((m - w).abs() <= step, "{kind:?}: {m} vs {w}");
        }
    }
}

#[test]
fn scaling_arithmetic() {
    let fit = ChinchillaFit::default();
    let direct = 1.61 + 406.4 / 70e9f64.powf(0.34) + 410.7 / 1.4e12f64.powf(0.28);
    assert!((chinchilla_loss(70e9, 1.4e12, &fit).unwrap() - direct).abs() < 1e-14);
    assert!((chinchilla_loss(70e9, 1.4e12, &fit).unwrap() - 1.856_645_470_558_717_4).abs() < 1e-12);
    let ratio = balance_ratio(39.95e6, 214.18e6).unwrap();
    assert!((ratio - 39.95e6 / (214.18e6 * 214.18e6)).abs() < 1e-24);
}
