//! Adam with bias correction, plus global-norm gradient clipping.

use super::{Tensor, TensorError};

/// Optimizer state mirroring one moment pair per parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &[Tensor], learning_rate: f64) -> AdamState {
        AdamState {
            step: 0,
            m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update. Every parameter must carry a gradient;
    /// gradients are zeroed after the update.
    pub fn step(&mut self, params: &[Tensor]) -> Result<(), TensorError> {
        assert_eq!(params.len(), self.m.len(), "parameter set changed size");
        let grads: Vec<Vec<f64>> = params
            .iter()
            .enumerate()
            .map(|(index, p)| p.grad().ok_or(TensorError::MissingGrad { index }))
            .collect::<Result<_, _>>()?;

        self.step += 1;
        let bias1 = 1.0 - self.beta1.powi(self.step as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step as i32);

        for (i, param) in params.iter().enumerate() {
            let grad = &grads[i];
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let mut data = param.to_vec();
            for j in 0..data.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * grad[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * grad[j] * grad[j];
                let m_hat = m[j] / bias1;
                let v_hat = v[j] / bias2;
                data[j] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
            param.set_data(data);
            param.zero_grad();
        }
        Ok(())
    }
}

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(params: &[Tensor], max_norm: f64) -> f64 {
    let mut total = 0.0;
    for p in params {
        if let Some(g) = p.grad() {
            total += g.iter().map(|v| v * v).sum::<f64>();
        }
    }
    let norm = total.sqrt();
    if norm > max_norm && norm > 0.0 {
        let factor = max_norm / norm;
        for p in params {
            let scaled = p.grad().map(|g| g.iter().map(|v| v * factor).collect());
            if let Some(scaled) = scaled {
                p.set_grad(scaled);
            }
        }
    }
    norm
}
