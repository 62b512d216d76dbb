use super::{EpochRecord, TrainConfig};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Adam moment estimates over a flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(len: usize) -> Self {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], config: &TrainConfig) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::Config(format!(
                "optimizer holds {} moments but got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        if let Some((i, g)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
            let worst = grad
                .iter()
                .filter(|g| g.is_finite())
                .fold(0.0f64, |acc, g| acc.max(g.abs()));
            return Err(Error::NonFinite(format!(
                "gradient coordinate {} is {} at step {}; largest finite magnitude {}",
                i,
                g,
                self.t + 1,
                worst
            )));
        }
        let (b1, b2) = config.adam_betas;
        self.t += 1;
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * grad[i];
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
        }
        Ok(())
    }
}

/// Parameters, optimizer state and loss history of a training run.
#[derive(Clone, Debug)]
pub struct TrainState {
    pub params: ModelParams,
    pub adam: Adam,
    pub best_dev_bits: f64,
    pub history: Vec<EpochRecord>,
}

impl TrainState {
    pub fn new(params: ModelParams) -> Self {
        let n = params.flat().len();
        TrainState {
            params,
            adam: Adam::new(n),
            best_dev_bits: f64::INFINITY,
            history: Vec::new(),
        }
    }

    /// Applies one Adam update. `grad` must have the parameters' shape and
    /// already include weight decay.
    pub fn adam_step(&mut self, grad: &ModelParams, config: &TrainConfig) -> Result<()> {
        if grad.kind() != self.params.kind() {
            return Err(Error::Config(format!(
                "{} gradient for {} parameters",
                grad.kind(),
                self.params.kind()
            )));
        }
        let mut flat = self.params.flat();
        self.adam.step(&mut flat, &grad.flat(), config)?;
        self.params.set_flat(&flat)
    }

    pub fn record(&mut self, record: EpochRecord) {
        self.best_dev_bits = self.best_dev_bits.min(record.dev_bits);
        self.history.push(record);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TrainConfig {
        TrainConfig::default()
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut a = Adam::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        a.step(&mut p, &[0.0; 3], &cfg()).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn constant_gradient_steps_approach_learning_rate() {
        let mut a = Adam::new(2);
        let mut p = vec![0.0, 0.0];
        let mut last = p.clone();
        for _ in 0..2000 {
            last.copy_from_slice(&p);
            a.step(&mut p, &[3.0, -0.2], &cfg()).unwrap();
        }
        assert!(((last[0] - p[0]) - 0.005).abs() < 1e-8);
        assert!(((p[1] - last[1]) - 0.005).abs() < 1e-8);
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut a = Adam::new(2);
        let mut p = vec![0.0, 0.0];
        let e = a.step(&mut p, &[1.0, f64::NAN], &cfg()).unwrap_err();
        assert!(e.to_string().contains("coordinate 1"));
        assert_eq!(a.t, 0);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut a = Adam::new(2);
        assert!(a.step(&mut [0.0; 3], &[0.0; 3], &cfg()).is_err());
    }
}
