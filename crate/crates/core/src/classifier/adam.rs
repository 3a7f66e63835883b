/// Adam with bias correction. One moment buffer per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u32,
}

impl AdamState {
    pub fn new(block_sizes: &[usize]) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: block_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: block_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u32 {
        self.t
    }

    /// Applies one update to `params` in place.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[Vec<f64>], lr: f64) {
        assert_eq!(params.len(), grads.len(), "one gradient block per parameter block");
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (b, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[b], &mut self.v[b]);
            for i in 0..g.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_lr_times_sign() {
        let lr = 0.01;
        let mut p = vec![0.0, 0.0, 0.0];
        let mut adam = AdamState::new(&[3]);
        adam.step(&mut [&mut p[..]], &[vec![1.0, 100.0, -3.0]], lr);
        // Closed form at t = 1: Δ = -lr·g / (|g| + ε).
        assert!((p[0] + lr).abs() <= 1e-6 * lr);
        assert!((p[0] - p[1]).abs() <= 1e-6 * lr);
        assert!((p[2] - lr).abs() <= 1e-6 * lr);
        assert_eq!(p[0], -lr * 1.0 / (1.0 + 1e-8));
    }

    #[test]
    fn zero_gradient_never_moves() {
        let mut p = vec![0.5, -2.0];
        let mut adam = AdamState::new(&[2]);
        for _ in 0..100 {
            adam.step(&mut [&mut p[..]], &[vec![0.0, 0.0]], 0.1);
        }
        assert_eq!(p, vec![0.5, -2.0]);
        assert_eq!(adam.steps(), 100);
    }
}
