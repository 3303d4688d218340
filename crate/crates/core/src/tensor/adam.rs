use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam with bias correction. One moment pair per tracked parameter tensor.
#[derive(Clone, Debug)]
pub struct Adam {
    config: AdamConfig,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    shapes: Vec<Vec<usize>>,
    step_count: u64,
}

impl Adam {
    pub fn new<'a>(config: AdamConfig, params: impl IntoIterator<Item = &'a Tensor>) -> Self {
        let shapes: Vec<Vec<usize>> = params.into_iter().map(|p| p.shape().to_vec()).collect();
        let zeros = || shapes.iter().map(|s| vec![0.0; s.iter().product()]).collect();
        Self {
            config,
            first_moment: zeros(),
            second_moment: zeros(),
            shapes,
            step_count: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Updates `params` in place from `grads`, then zeroes `grads`.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &mut [&mut Tensor]) -> Result<()> {
        if params.len() != self.shapes.len() || grads.len() != self.shapes.len() {
            return Err(Error::shape(
                "adam_step",
                &[self.shapes.len()],
                &[params.len(), grads.len()],
            ));
        }
        for ((p, g), s) in params.iter().zip(grads.iter()).zip(&self.shapes) {
            if p.shape() != s.as_slice() || g.shape() != s.as_slice() {
                return Err(Error::shape("adam_step", s, p.shape()));
            }
        }

        self.step_count += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);

        for (i, (p, g)) in params.iter_mut().zip(grads.iter_mut()).enumerate() {
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            for (((w, gi), mi), vi) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.iter_mut())
                .zip(v.iter_mut())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *w -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
            g.fill(0.0);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut w = Tensor::vector(vec![0.5, -1.5]);
        let mut g = Tensor::zeros(&[2]);
        let mut adam = Adam::new(AdamConfig::default(), [&w]);
        for _ in 0..5 {
            adam.step(&mut [&mut w], &mut [&mut g]).unwrap();
        }
        assert_eq!(w.data(), &[0.5, -1.5]);
        assert_eq!(adam.step_count(), 5);
    }

    #[test]
    fn first_step_moves_by_learning_rate_times_sign() {
        // After bias correction m̂ = g and v̂ = g², so the step is lr·g/(|g|+ε).
        let cfg = AdamConfig::default();
        let mut w = Tensor::vector(vec![1.0, 1.0, 1.0]);
        let mut g = Tensor::vector(vec![3.0, -0.2, 50.0]);
        let mut adam = Adam::new(cfg, [&w]);
        adam.step(&mut [&mut w], &mut [&mut g]).unwrap();
        for (wi, gi) in w.data().iter().zip([3.0f64, -0.2, 50.0]) {
            let expected = 1.0 - cfg.learning_rate * gi / (gi.abs() + cfg.epsilon);
            assert!((wi - expected).abs() < 1e-15);
            assert!(((1.0 - wi) - cfg.learning_rate * gi.signum()).abs() < 1e-9);
        }
        assert!(g.data().iter().all(|&x| x == 0.0), "grads cleared");
    }

    #[test]
    fn converges_on_a_quadratic() {
        let cfg = AdamConfig {
            learning_rate: 0.1,
            ..AdamConfig::default()
        };
        let mut w = Tensor::vector(vec![1.0]);
        let mut g = Tensor::zeros(&[1]);
        let mut adam = Adam::new(cfg, [&w]);
        for _ in 0..100 {
            g.data_mut()[0] = 2.0 * w.data()[0];
            adam.step(&mut [&mut w], &mut [&mut g]).unwrap();
        }
        assert!(w.data()[0].abs() < 0.1, "w = {}", w.data()[0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let w = Tensor::vector(vec![1.0, 2.0]);
        let mut adam = Adam::new(AdamConfig::default(), [&w]);
        let mut other = Tensor::vector(vec![1.0]);
        let mut g = Tensor::zeros(&[1]);
        assert!(matches!(
            adam.step(&mut [&mut other], &mut [&mut g]),
            Err(Error::Shape { .. })
        ));
    }
}
