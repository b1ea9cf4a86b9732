//! Single-hidden-layer MLP with tanh activation and a scalar output.
//!
//! The parameter vector layout used by gradients and updates is
//! `[w1 (hidden x input, row-major), b1, w2, b2]`.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicy {
    input_dim: usize,
    hidden_dim: usize,
    /// `hidden_dim` rows of `input_dim` weights, row-major.
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl MlpPolicy {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        MlpPolicy {
            input_dim,
            hidden_dim,
            w1: vec![0.0; hidden_dim * input_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; hidden_dim],
            b2: 0.0,
        }
    }

    /// All parameters drawn uniformly from `[-scale, scale]`.
    pub fn random(input_dim: usize, hidden_dim: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut policy = Self::zeros(input_dim, hidden_dim);
        for w in policy.w1.iter_mut() {
            *w = rng.gen_range(-scale..=scale);
        }
        for b in policy.b1.iter_mut() {
            *b = rng.gen_range(-scale..=scale);
        }
        for w in policy.w2.iter_mut() {
            *w = rng.gen_range(-scale..=scale);
        }
        policy.b2 = rng.gen_range(-scale..=scale);
        policy
    }

    pub fn from_parts(
        input_dim: usize,
        hidden_dim: usize,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    ) -> Result<Self> {
        if w1.len() != hidden_dim * input_dim || b1.len() != hidden_dim || w2.len() != hidden_dim {
            return Err(Error::validation("mlp parameter shape mismatch"));
        }
        let policy = MlpPolicy { input_dim, hidden_dim, w1, b1, w2, b2 };
        policy.validate()?;
        Ok(policy)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn param_count(&self) -> usize {
        self.hidden_dim * self.input_dim + 2 * self.hidden_dim + 1
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.w1.iter().chain(&self.b1).chain(&self.w2).all(|v| v.is_finite())
            && self.b2.is_finite();
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite("mlp parameters".into()))
        }
    }

    /// `y = w2 . tanh(w1 x + b1) + b2`. Deterministic for identical inputs.
    pub fn forward(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.input_dim);
        let mut y = self.b2;
        for j in 0..self.hidden_dim {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            let mut z = self.b1[j];
            for (w, xi) in row.iter().zip(x) {
                z += w * xi;
            }
            y += self.w2[j] * z.tanh();
        }
        y
    }

    /// Gradient of the scalar output with respect to every parameter, written
    /// into `grad` using the layout documented on the type.
    pub fn output_gradient(&self, x: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(x.len(), self.input_dim);
        debug_assert_eq!(grad.len(), self.param_count());
        let (gw1, rest) = grad.split_at_mut(self.hidden_dim * self.input_dim);
        let (gb1, rest) = rest.split_at_mut(self.hidden_dim);
        let (gw2, gb2) = rest.split_at_mut(self.hidden_dim);
        for j in 0..self.hidden_dim {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            let mut z = self.b1[j];
            for (w, xi) in row.iter().zip(x) {
                z += w * xi;
            }
            let t = z.tanh();
            let dtanh = 1.0 - t * t;
            gw2[j] = t;
            let back = self.w2[j] * dtanh;
            gb1[j] = back;
            let grow = &mut gw1[j * self.input_dim..(j + 1) * self.input_dim];
            for (g, xi) in grow.iter_mut().zip(x) {
                *g = back * xi;
            }
        }
        gb2[0] = 1.0;
    }

    /// `theta += scale * g`.
    pub fn add_scaled(&mut self, g: &[f64], scale: f64) {
        debug_assert_eq!(g.len(), self.param_count());
        let n1 = self.hidden_dim * self.input_dim;
        for (w, gi) in self.w1.iter_mut().zip(&g[..n1]) {
            *w += scale * gi;
        }
        let mut off = n1;
        for (b, gi) in self.b1.iter_mut().zip(&g[off..off + self.hidden_dim]) {
            *b += scale * gi;
        }
        off += self.hidden_dim;
        for (w, gi) in self.w2.iter_mut().zip(&g[off..off + self.hidden_dim]) {
            *w += scale * gi;
        }
        self.b2 += scale * g[g.len() - 1];
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let mlp = MlpPolicy::zeros(10, 16);
        assert_eq!(mlp.forward(&[1.0; 10]), 0.0);
    }

    #[test]
    fn output_bias_passes_through() {
        let mut mlp = MlpPolicy::zeros(10, 16);
        mlp.b2 = 0.37;
        assert_eq!(mlp.forward(&[5.0; 10]), 0.37);
        assert_eq!(mlp.forward(&[-3.0; 10]), 0.37);
    }

    /// Straight-line recomputation oracle, written independently of the
    /// implementation's loop structure.
    fn forward_oracle(mlp: &MlpPolicy, x: &[f64]) -> f64 {
        let h = mlp.hidden_dim();
        let d = mlp.input_dim();
        let mut acc = mlp.b2();
        for j in 0..h {
            let mut pre = 0.0f64;
            for i in 0..d {
                pre += mlp.w1()[j * d + i] * x[i];
            }
            pre += mlp.b1()[j];
            acc += mlp.w2()[j] * pre.tanh();
        }
        acc
    }

    #[test]
    fn forward_matches_matrix_arithmetic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mlp = MlpPolicy::random(10, 16, 0.5, &mut rng);
        let x: Vec<f64> = (0..10).map(|i| (i as f64 * 0.31).sin()).collect();
        let y = mlp.forward(&x);
        let oracle = forward_oracle(&mlp, &x);
        assert!((y - oracle).abs() < 1e-12, "y={y} oracle={oracle}");
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mlp = MlpPolicy::random(6, 8, 0.3, &mut rng);
        let x = [0.1, -0.2, 0.3, -0.4, 0.5, -0.6];
        assert_eq!(mlp.forward(&x).to_bits(), mlp.forward(&x).to_bits());
    }

    #[test]
    fn gradient_layout_matches_add_scaled() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut mlp = MlpPolicy::random(4, 3, 0.4, &mut rng);
        let x = [0.5, -0.25, 0.125, 1.0];
        let mut grad = vec![0.0; mlp.param_count()];
        mlp.output_gradient(&x, &mut grad);
        // Finite check of the full parameter vector through one tiny ascent step.
        let before = mlp.forward(&x);
        mlp.add_scaled(&grad, 1e-7);
        let after = mlp.forward(&x);
        assert!(after > before, "ascent along own gradient must increase output");
    }

    #[test]
    fn rejects_non_finite_parameters() {
        let out = MlpPolicy::from_parts(2, 1, vec![f64::NAN, 0.0], vec![0.0], vec![0.0], 0.0);
        assert!(out.is_err());
    }
}
