//! Central finite-difference checks of analytic gradients.

use rand::seq::index::sample;
use rand::Rng;

use super::layer::{LayerCache, Sequential};
use super::tensor::Tensor;
use crate::error::ShapeError;
use crate::seeds;

pub const EPSILON: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

/// Uniform values in [-1, 1) from a seed.
pub fn random_tensor(shape: Vec<usize>, seed: u64) -> Tensor {
    let mut rng = seeds::rng(seeds::derive_seed(seed, "test-tensor"));
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("sized from shape")
}

/// `|a - b| / max(|a|, |b|, 1e-7)`; the floor keeps exact zeros comparable.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-7)
}

/// Worst disagreement found by a check.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mismatch {
    pub relative_error: f64,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    /// Probes left out because the perturbation moved a max-pool selection.
    pub kinks_skipped: usize,
}

impl Mismatch {
    fn record(&mut self, index: usize, analytic: f64, numeric: f64) {
        let rel = relative_error(analytic, numeric);
        if rel >= self.relative_error {
            *self = Self {
                relative_error: rel,
                index,
                analytic,
                numeric,
                kinks_skipped: self.kinks_skipped,
            };
        }
    }

    pub fn merge(self, other: Self) -> Self {
        let kinks_skipped = self.kinks_skipped + other.kinks_skipped;
        let worst = if other.relative_error > self.relative_error { other } else { self };
        Self { kinks_skipped, ..worst }
    }
}

/// Compares `analytic` with `(f(x + eps e_i) - f(x - eps e_i)) / 2 eps` at every element.
pub fn check_tensor(x: &Tensor, analytic: &Tensor, f: impl Fn(&Tensor) -> f64) -> Mismatch {
    assert_eq!(x.shape(), analytic.shape(), "gradient shape differs from input shape");
    let mut worst = Mismatch::default();
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = x.data()[i];
        probe.data_mut()[i] = orig + EPSILON;
        let up = f(&probe);
        probe.data_mut()[i] = orig - EPSILON;
        let down = f(&probe);
        probe.data_mut()[i] = orig;
        worst.record(i, analytic.data()[i], (up - down) / (2.0 * EPSILON));
    }
    worst
}

fn coordinate(net: &mut Sequential, layer: usize, bias: bool, i: usize) -> &mut f64 {
    let p = net.layers[layer].params_mut().expect("slot has params");
    let t = if bias { &mut p.biases } else { &mut p.weights };
    &mut t.data_mut()[i]
}

/// Objective value and the max-pool selections that produced it.
fn probe_pass(net: &Sequential, x: &Tensor, proj: &Tensor) -> Result<(f64, Vec<u32>), ShapeError> {
    let (y, caches) = net.forward_cached(x.clone())?;
    let value = y.data().iter().zip(proj.data()).map(|(a, b)| a * b).sum();
    let selections = caches
        .into_iter()
        .filter_map(|c| match c {
            LayerCache::Pool { argmax, .. } => Some(argmax),
            _ => None,
        })
        .flatten()
        .collect();
    Ok((value, selections))
}

/// Checks parameter gradients of `net` for the scalar `<net(x), proj>`.
/// At most `per_tensor` coordinates of each weight and bias tensor are probed,
/// chosen with `seed`; `usize::MAX` probes every coordinate. A probe whose
/// perturbation changes any max-pool selection straddles a point where the
/// objective is not differentiable and is counted in `kinks_skipped` instead.
pub fn check_network(
    net: &Sequential,
    x: &Tensor,
    proj: &Tensor,
    per_tensor: usize,
    seed: u64,
) -> Result<Mismatch, ShapeError> {
    let (_, base) = probe_pass(net, x, proj)?;
    let (_, caches) = net.forward_cached(x.clone())?;
    let mut grads = net.grad_buffer();
    net.backward(caches, proj.clone(), &mut grads)?;

    let mut rng = seeds::rng(seed);
    let mut probe = net.clone();
    let mut worst = Mismatch::default();
    let mut offset = 0;
    for (li, slot) in grads.layers.iter().enumerate() {
        let Some(g) = slot else { continue };
        for (is_bias, analytic) in [(false, &g.weights), (true, &g.biases)] {
            let picks: Vec<usize> = if analytic.len() <= per_tensor {
                (0..analytic.len()).collect()
            } else {
                sample(&mut rng, analytic.len(), per_tensor).into_vec()
            };
            for i in picks {
                let orig = *coordinate(&mut probe, li, is_bias, i);
                *coordinate(&mut probe, li, is_bias, i) = orig + EPSILON;
                let (up, sel_up) = probe_pass(&probe, x, proj)?;
                *coordinate(&mut probe, li, is_bias, i) = orig - EPSILON;
                let (down, sel_down) = probe_pass(&probe, x, proj)?;
                *coordinate(&mut probe, li, is_bias, i) = orig;
                if sel_up != base || sel_down != base {
                    worst.kinks_skipped += 1;
                    continue;
                }
                worst.record(offset + i, analytic[i], (up - down) / (2.0 * EPSILON));
            }
            offset += analytic.len();
        }
    }
    Ok(worst)
}
