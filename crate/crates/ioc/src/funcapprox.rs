//! Linear function approximation: feature maps and parametric heads.
//!
//! Two feature families cover both environments. Tabular grids use one-hot
//! features indexed by the open-cell rank; continuous mazes use a grid of
//! unnormalized Gaussian bumps plus a constant bias component, so heads that
//! should start out state-independent (termination, interest) can be
//! initialized exactly through the bias weight.

use crate::env::{EnvState, Rect};

/// A feature vector, kept sparse for the one-hot case so tabular runs do not
/// pay a dense dot product per step.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    OneHot { index: usize, dim: usize },
    Dense(Vec<f64>),
}

impl Features {
    pub fn dim(&self) -> usize {
        match self {
            Features::OneHot { dim, .. } => *dim,
            Features::Dense(v) => v.len(),
        }
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        match self {
            Features::OneHot { index, dim } => {
                debug_assert_eq!(w.len(), *dim);
                w[*index]
            }
            Features::Dense(v) => {
                debug_assert_eq!(w.len(), v.len());
                v.iter().zip(w).map(|(a, b)| a * b).sum()
            }
        }
    }

    /// `out += scale * phi`.
    pub fn add_scaled(&self, scale: f64, out: &mut [f64]) {
        match self {
            Features::OneHot { index, .. } => out[*index] += scale,
            Features::Dense(v) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
        }
    }

    pub fn component(&self, i: usize) -> f64 {
        match self {
            Features::OneHot { index, .. } => {
                if i == *index {
                    1.0
                } else {
                    0.0
                }
            }
            Features::Dense(v) => v[i],
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Features::OneHot { index, dim } => {
                let mut v = vec![0.0; *dim];
                v[*index] = 1.0;
                v
            }
            Features::Dense(v) => v.clone(),
        }
    }

    /// Squared euclidean norm; one-hot features always have norm 1.
    pub fn norm_sq(&self) -> f64 {
        match self {
            Features::OneHot { .. } => 1.0,
            Features::Dense(v) => v.iter().map(|x| x * x).sum(),
        }
    }
}

/// State-to-features transform.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// Identity features over a discrete state index.
    OneHot { dim: usize },
    /// `nx * ny` Gaussian bumps tiling `bounds`, plus one trailing constant
    /// bias component fixed at 1. Bandwidth is the larger center spacing.
    RbfGrid {
        nx: usize,
        ny: usize,
        bounds: Rect,
        centers: Vec<[f64; 2]>,
        bandwidth: f64,
    },
}

impl FeatureMap {
    pub fn one_hot(dim: usize) -> Self {
        assert!(dim > 0);
        FeatureMap::OneHot { dim }
    }

    pub fn rbf_grid(bounds: Rect, nx: usize, ny: usize) -> Self {
        assert!(nx > 1 && ny > 1, "need at least a 2x2 center grid");
        let dx = (bounds.max[0] - bounds.min[0]) / (nx - 1) as f64;
        let dy = (bounds.max[1] - bounds.min[1]) / (ny - 1) as f64;
        let mut centers = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                centers.push([
                    bounds.min[0] + ix as f64 * dx,
                    bounds.min[1] + iy as f64 * dy,
                ]);
            }
        }
        FeatureMap::RbfGrid { nx, ny, bounds, centers, bandwidth: dx.max(dy) }
    }

    /// Feature dimension, including the bias component for RBF maps.
    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::OneHot { dim } => *dim,
            FeatureMap::RbfGrid { centers, .. } => centers.len() + 1,
        }
    }

    /// Whether the trailing feature component is a constant bias.
    pub fn has_bias(&self) -> bool {
        matches!(self, FeatureMap::RbfGrid { .. })
    }

    pub fn features(&self, s: &EnvState) -> Features {
        match (self, s) {
            (FeatureMap::OneHot { dim }, EnvState::Grid(g)) => {
                assert!(g.index < *dim, "state index {} outside map of dim {dim}", g.index);
                Features::OneHot { index: g.index, dim: *dim }
            }
            (FeatureMap::RbfGrid { centers, bandwidth, .. }, EnvState::Maze(m)) => {
                let p = m.position;
                let two_sig_sq = 2.0 * bandwidth * bandwidth;
                let mut v = Vec::with_capacity(centers.len() + 1);
                for c in centers {
                    let dx = p[0] - c[0];
                    let dy = p[1] - c[1];
                    v.push((-(dx * dx + dy * dy) / two_sig_sq).exp());
                }
                v.push(1.0);
                Features::Dense(v)
            }
            _ => panic!("feature map and state kind do not match"),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A scalar head `sigma(w . phi)`, used for terminations and interests.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidHead {
    pub weights: Vec<f64>,
}

impl SigmoidHead {
    pub fn zeros(dim: usize) -> Self {
        SigmoidHead { weights: vec![0.0; dim] }
    }

    /// All weights equal; under one-hot features the head is the constant
    /// `sigma(fill)` over states.
    pub fn constant_fill(dim: usize, fill: f64) -> Self {
        SigmoidHead { weights: vec![fill; dim] }
    }

    /// Zero weights except the final (bias) component; under RBF features
    /// with a trailing bias this gives the constant `sigma(bias)`.
    pub fn bias_only(dim: usize, bias: f64) -> Self {
        let mut weights = vec![0.0; dim];
        weights[dim - 1] = bias;
        SigmoidHead { weights }
    }

    pub fn value(&self, phi: &Features) -> f64 {
        sigmoid(phi.dot(&self.weights))
    }

    /// Gradient of `value` with respect to the weights: `s(1-s) phi`.
    pub fn grad(&self, phi: &Features) -> Vec<f64> {
        let s = self.value(phi);
        let mut g = vec![0.0; self.weights.len()];
        phi.add_scaled(s * (1.0 - s), &mut g);
        g
    }

    /// `w += scale * phi`, for callers that supply the full chain factor.
    pub fn add_scaled(&mut self, phi: &Features, scale: f64) {
        phi.add_scaled(scale, &mut self.weights);
    }

    /// `w += scale * d value / d w`, the ascent step through the sigmoid.
    pub fn add_scaled_grad(&mut self, phi: &Features, scale: f64) {
        let s = self.value(phi);
        phi.add_scaled(scale * s * (1.0 - s), &mut self.weights);
    }
}

/// A categorical head: softmax over `w_i . phi / temperature`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxHead {
    /// One weight row per choice.
    pub weights: Vec<Vec<f64>>,
    pub temperature: f64,
}

impl SoftmaxHead {
    pub fn zeros(choices: usize, dim: usize, temperature: f64) -> Self {
        assert!(choices >= 1);
        assert!(temperature > 0.0, "temperature must be positive");
        SoftmaxHead { weights: vec![vec![0.0; dim]; choices], temperature }
    }

    pub fn n_choices(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    /// Choice probabilities with the usual max-subtraction for stability.
    pub fn probs(&self, phi: &Features) -> Vec<f64> {
        let logits: Vec<f64> = self.weights.iter().map(|w| phi.dot(w) / self.temperature).collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut out: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
        let z: f64 = out.iter().sum();
        for p in &mut out {
            *p /= z;
        }
        out
    }

    /// Gradient of `ln probs[choice]` with respect to every weight row:
    /// row i gets `((1[i = choice] - p_i) / temperature) phi`.
    pub fn log_prob_grad(&self, phi: &Features, choice: usize) -> Vec<Vec<f64>> {
        let p = self.probs(phi);
        let dim = self.dim();
        let mut rows = vec![vec![0.0; dim]; self.n_choices()];
        for (i, row) in rows.iter_mut().enumerate() {
            let ind = if i == choice { 1.0 } else { 0.0 };
            phi.add_scaled((ind - p[i]) / self.temperature, row);
        }
        rows
    }

    /// In-place ascent step along `log_prob_grad` scaled by `scale`.
    pub fn step_log_prob(&mut self, phi: &Features, choice: usize, scale: f64) {
        let p = self.probs(phi);
        let t = self.temperature;
        for (i, row) in self.weights.iter_mut().enumerate() {
            let ind = if i == choice { 1.0 } else { 0.0 };
            phi.add_scaled(scale * (ind - p[i]) / t, row);
        }
    }
}
