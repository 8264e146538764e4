//! Displacement budgets and transversality margins for the perturbation
//! sweeps, with the startup self-tests of the two displacement constants.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::seed;
use crate::simplex::{self, EPS_GEOM};
use crate::transversal::{self, closest_points};

/// Concrete instances of the two displacement functions:
/// `d(φ) = d_factor·φ` keeps half the fatness under a vertex translation of
/// `d(φ)·d1`, and `δ(φ, δ) = delta_factor·δ·φ` keeps half the transversality
/// margin under a translation of `δ(φ, δ)·d1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantChoices {
    pub d_factor: f64,
    pub delta_factor: f64,
}

impl Default for ConstantChoices {
    fn default() -> Self {
        ConstantChoices {
            d_factor: 0.25,
            delta_factor: 0.125,
        }
    }
}

impl ConstantChoices {
    pub fn d(&self, phi: f64) -> f64 {
        self.d_factor * phi
    }

    pub fn delta(&self, phi: f64, delta: f64) -> f64 {
        self.delta_factor * delta * phi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub dimension: usize,
    pub instances: usize,
    pub seed: u64,
    pub constants: ConstantChoices,
    pub d_halvings: u32,
    pub delta_halvings: u32,
    /// Smallest `fatness_after / fatness_before` seen with the final constant.
    pub worst_fatness_ratio: f64,
    /// Smallest `margin_after / margin_before` seen with the final constant.
    pub worst_margin_ratio: f64,
}

impl SelfTestReport {
    pub fn passed_without_fallback(&self) -> bool {
        self.d_halvings == 0 && self.delta_halvings == 0
    }
}

const MAX_HALVINGS: u32 = 12;

fn uniform_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = uniform_point(rng, n);
        let l = linalg::norm(&v);
        if l > 1e-3 && l <= 1.0 {
            return linalg::scale(&v, 1.0 / l);
        }
    }
}

/// Fatness of the regular `k`-simplex, `sqrt(k+1) / (k! 2^{k/2})`.
fn regular_fatness(k: usize) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    ((k + 1) as f64).sqrt() / (fact * 2f64.powf(k as f64 / 2.0))
}

/// Random `k`-simplex in `R^n` whose fatness is at least `fraction` of the
/// regular one.
fn random_simplex(rng: &mut ChaCha8Rng, k: usize, n: usize, fraction: f64) -> Vec<Vec<f64>> {
    let min_fatness = fraction * regular_fatness(k);
    loop {
        let pts: Vec<Vec<f64>> = (0..=k).map(|_| uniform_point(rng, n)).collect();
        if simplex::fatness(&pts) >= min_fatness {
            return pts;
        }
    }
}

/// Unit direction from vertex `i` towards the affine hull of the other vertices.
fn inward_altitude(pts: &[Vec<f64>], i: usize) -> Vec<f64> {
    let others: Vec<&Vec<f64>> = pts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p).collect();
    let frame = linalg::AffineFrame::through(&others, 1e-12);
    let foot = frame.to_ambient(&frame.to_local(&pts[i]));
    let d = linalg::sub(&foot, &pts[i]);
    let l = linalg::norm(&d);
    if l == 0.0 {
        d
    } else {
        linalg::scale(&d, 1.0 / l)
    }
}

/// Adversarial and random translations of all vertices by exactly `step`.
fn translations(rng: &mut ChaCha8Rng, pts: &[Vec<f64>], step: f64) -> Vec<Vec<Vec<f64>>> {
    let n = pts[0].len();
    let mut out = Vec::new();
    let inward: Vec<Vec<f64>> = (0..pts.len()).map(|i| inward_altitude(pts, i)).collect();
    for (i, dir) in inward.iter().enumerate() {
        let mut moved = pts.to_vec();
        moved[i] = linalg::axpy(&pts[i], step, dir);
        out.push(moved);
    }
    out.push(pts.iter().zip(&inward).map(|(p, d)| linalg::axpy(p, step, d)).collect());
    for _ in 0..4 {
        out.push(pts.iter().map(|p| linalg::axpy(p, step, &unit_vector(rng, n))).collect());
    }
    out
}

/// Worst `fatness_after / fatness_before` over the family for factor `c`.
fn fatness_trial(n: usize, instances: usize, seed: u64, c: f64) -> f64 {
    let mut rng = seed::rng(seed::derive(seed, "self-test-d"));
    let mut worst = f64::INFINITY;
    for _ in 0..instances {
        let pts = random_simplex(&mut rng, n, n, 5e-3);
        let phi = simplex::fatness(&pts);
        let step = c * phi * simplex::diameter(&pts);
        for moved in translations(&mut rng, &pts, step) {
            worst = worst.min(simplex::fatness(&moved) / phi);
        }
    }
    worst
}

/// Worst `margin_after / margin_before` over the family for factor `c`.
fn margin_trial(n: usize, instances: usize, seed: u64, c: f64) -> Result<f64> {
    let mut rng = seed::rng(seed::derive(seed, "self-test-delta"));
    let mut worst = f64::INFINITY;
    let mut done = 0;
    while done < instances {
        let k1 = rng.gen_range(1..=n);
        let k2 = rng.gen_range(1..=n);
        let a = random_simplex(&mut rng, k1, n, 0.1);
        let offset = linalg::scale(&uniform_point(&mut rng, n), 0.5);
        let b: Vec<Vec<f64>> = random_simplex(&mut rng, k2, n, 0.1)
            .iter()
            .map(|p| linalg::add(p, &offset))
            .collect();
        let cert = transversal::transversality(&a, &b, 0.0, EPS_GEOM)?;
        if cert.witnessed_delta <= 1e-2 {
            continue;
        }
        done += 1;
        let delta = (0.9 * cert.witnessed_delta).min(std::f64::consts::FRAC_PI_2);
        let (s1, s2) = if cert.swapped { (&b, &a) } else { (&a, &b) };
        let phi = simplex::fatness(s1).min(simplex::fatness(s2));
        let step = c * delta * phi * simplex::diameter(s1);
        let mut moves = translations(&mut rng, s1, step);
        // rigid push of the smaller simplex towards the larger one
        let (x, y, d) = closest_points(s1, s2);
        if d > 0.0 {
            let dir = linalg::scale(&linalg::sub(&y, &x), 1.0 / d);
            moves.push(s1.iter().map(|p| linalg::axpy(p, step, &dir)).collect());
        }
        for moved in moves {
            let after = transversal::transversality(&moved, s2, 0.0, EPS_GEOM)?;
            worst = worst.min(after.witnessed_delta / delta);
        }
    }
    Ok(worst)
}

/// Runs both self-tests on `instances` random simplices (pairs) in `R^n`,
/// halving a constant until its test passes.
pub fn self_test_constants(n: usize, instances: usize, seed: u64) -> Result<SelfTestReport> {
    if !(1..=4).contains(&n) {
        return Err(Error::Input(format!("dimension {n} outside 1..=4")));
    }
    let mut constants = ConstantChoices::default();
    let mut d_halvings = 0;
    let mut worst_fatness_ratio = fatness_trial(n, instances, seed, constants.d_factor);
    while worst_fatness_ratio < 0.5 && d_halvings < MAX_HALVINGS {
        constants.d_factor /= 2.0;
        d_halvings += 1;
        worst_fatness_ratio = fatness_trial(n, instances, seed, constants.d_factor);
    }
    let mut delta_halvings = 0;
    let mut worst_margin_ratio = margin_trial(n, instances, seed, constants.delta_factor)?;
    while worst_margin_ratio < 0.5 && delta_halvings < MAX_HALVINGS {
        constants.delta_factor /= 2.0;
        delta_halvings += 1;
        worst_margin_ratio = margin_trial(n, instances, seed, constants.delta_factor)?;
    }
    Ok(SelfTestReport {
        dimension: n,
        instances,
        seed,
        constants,
        d_halvings,
        delta_halvings,
        worst_fatness_ratio,
        worst_margin_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSchedule {
    /// `t_0 >= t_1 >= ... >= t_{n-1}`, lengths.
    pub budgets: Vec<f64>,
    /// `δ*_0 >= ... >= δ*_{n-1}`, dimensionless.
    pub margins: Vec<f64>,
    /// Half the smallest margin.
    pub final_margin: f64,
    pub phi0: f64,
    pub d1: f64,
    pub n: usize,
    pub constants: ConstantChoices,
}

/// Budgets `t_0 = (d1/n)·min{1/2, d(φ0)}`,
/// `t_i = (d1/n)·min{1/2, d(φ0), δ(φ0/2, δ*_0/2), ..., δ(φ0/2, δ*_{i-1}/2)}`
/// and margins `δ*_0 = min{1, t_0/(8 d1)}`, `δ*_i = min{δ*_{i-1}, t_i/(8 d1)}`.
pub fn compute_schedule(phi0: f64, d1: f64, n: usize, constants: ConstantChoices) -> Result<PerturbationSchedule> {
    if !(phi0 > 0.0) || !(d1 > 0.0) || n == 0 {
        return Err(Error::Input(format!(
            "schedule needs phi0 > 0, d1 > 0, n >= 1 (got {phi0}, {d1}, {n})"
        )));
    }
    let scale = d1 / n as f64;
    let mut budgets = Vec::with_capacity(n);
    let mut margins: Vec<f64> = Vec::with_capacity(n);
    let mut inner = 0.5f64.min(constants.d(phi0));
    for i in 0..n {
        if i > 0 {
            inner = inner.min(constants.delta(phi0 / 2.0, margins[i - 1] / 2.0));
        }
        let t = scale * inner;
        let prev = if i == 0 { 1.0 } else { margins[i - 1] };
        budgets.push(t);
        margins.push(prev.min(t / (8.0 * d1)));
    }
    let final_margin = 0.5 * margins.iter().copied().fold(f64::INFINITY, f64::min);
    debug_assert!(budgets.windows(2).all(|w| w[0] >= w[1]));
    Ok(PerturbationSchedule {
        budgets,
        margins,
        final_margin,
        phi0,
        d1,
        n,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_budget_examples() {
        let s = compute_schedule(0.4, 1.0, 2, ConstantChoices::default()).unwrap();
        assert!((s.budgets[0] - 0.05).abs() < 1e-15);
        let s = compute_schedule(2.0, 3.0, 3, ConstantChoices::default()).unwrap();
        assert!((s.budgets[0] - 3.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn regular_fatness_matches_volume() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        assert!((regular_fatness(2) - simplex::fatness(&tri)).abs() < 1e-15);
        assert!((regular_fatness(3) - 2f64.sqrt() / 12.0).abs() < 1e-15);
        assert_eq!(regular_fatness(1), 1.0);
    }

    #[test]
    fn schedule_is_monotone() {
        let s = compute_schedule(0.3, 1.0, 3, ConstantChoices::default()).unwrap();
        assert!(s.budgets.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.margins.windows(2).all(|w| w[0] >= w[1]));
        let min = s.margins.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(s.final_margin, 0.5 * min);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(compute_schedule(0.0, 1.0, 2, ConstantChoices::default()).is_err());
        assert!(compute_schedule(0.3, -1.0, 2, ConstantChoices::default()).is_err());
    }

    #[test]
    fn small_self_test_runs() {
        let r = self_test_constants(2, 20, 1).unwrap();
        assert!(r.worst_fatness_ratio >= 0.5);
        assert!(r.worst_margin_ratio >= 0.5);
    }
}
