//! Reference implementations used as oracles. They share no code with the
//! library beyond the `Predictor` trait and favour directness over speed.
#![allow(dead_code)]

use astute_core::predict::{Dense, Matrix, Mlp};
use astute_core::rng;
use astute_core::Predictor;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn masked(x: &[f64], keep: impl Fn(usize) -> bool) -> Vec<f64> {
    x.iter().enumerate().map(|(i, &v)| if keep(i) { v } else { 0.0 }).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `φ_i = Σ_{S ⊆ N∖i} |S|!(d−|S|−1)!/d! · (f(x_{S∪i}) − f(x_S))`.
pub fn shapley_naive<F: Predictor>(f: &F, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut phi = vec![0.0; d];
    for (i, slot) in phi.iter_mut().enumerate() {
        for s in 0u64..(1 << d) {
            if s >> i & 1 == 1 {
                continue;
            }
            let k = s.count_ones() as usize;
            let w = factorial(k) * factorial(d - k - 1) / factorial(d);
            let without = f.eval(&masked(x, |j| s >> j & 1 == 1));
            let with = f.eval(&masked(x, |j| s >> j & 1 == 1 || j == i));
            *slot += w * (with - without);
        }
    }
    phi
}

/// `φ_i = Σ_z P(z | z_i = 1) f(x ⊙ z)` with independent Bernoulli(q) bits.
pub fn rise_naive<F: Predictor>(f: &F, x: &[f64], q: f64) -> Vec<f64> {
    let d = x.len();
    let mut phi = vec![0.0; d];
    for (i, slot) in phi.iter_mut().enumerate() {
        for z in 0u64..(1 << d) {
            if z >> i & 1 == 0 {
                continue;
            }
            let mut prob = 1.0;
            for j in (0..d).filter(|&j| j != i) {
                prob *= if z >> j & 1 == 1 { q } else { 1.0 - q };
            }
            *slot += prob * f.eval(&masked(x, |j| z >> j & 1 == 1));
        }
    }
    phi
}

/// `φ_i = f(x) − f(x with feature i zeroed)`.
pub fn remove_individual_naive<F: Predictor>(f: &F, x: &[f64]) -> Vec<f64> {
    let full = f.eval(x);
    (0..x.len()).map(|i| full - f.eval(&masked(x, |j| j != i))).collect()
}

pub fn lp(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Fraction of within-radius pairs satisfying `gap ≤ t · dist`, by a direct
/// double loop over every unordered pair.
pub fn satisfied_fraction_naive(points: &[Vec<f64>], values: &[Vec<f64>], radius: f64, p: f64, t: f64) -> f64 {
    let (mut total, mut ok) = (0usize, 0usize);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dist = lp(&points[i], &points[j], p);
            if dist <= radius {
                total += 1;
                if lp(&values[i], &values[j], p) <= t * dist {
                    ok += 1;
                }
            }
        }
    }
    ok as f64 / total as f64
}

/// Random ReLU network with Gaussian weights and biases.
pub fn random_mlp(seed: u64, input: usize, hidden: &[usize], scale: f64) -> Mlp {
    let mut rng = rng::stream(seed, 99);
    let mut layers = Vec::new();
    let mut fan_in = input;
    for &width in hidden.iter().chain(std::iter::once(&1)) {
        let s = scale / (fan_in as f64).sqrt();
        let w: Vec<f64> = (0..width * fan_in).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..width).map(|_| 0.3 * rng.sample::<f64, _>(StandardNormal)).collect();
        layers.push(Dense::new(Matrix::new(width, fan_in, w).unwrap(), b).unwrap());
        fan_in = width;
    }
    Mlp::new(layers).unwrap()
}

pub fn gaussian_vec(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}
