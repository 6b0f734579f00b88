use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use super::EngineError;

/// Discretized driving function `lambda(t) = sqrt(kappa) B_t` on a uniform
/// capacity-time grid, fully determined by `(kappa, horizon, dt, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    pub dt: f64,
    pub values: Vec<f64>,
    pub seed: u64,
    pub kappa: f64,
}

/// Samples a Brownian driving path: `values[0] = 0` and independent Gaussian
/// increments of variance `kappa * dt`. Identical inputs reproduce identical
/// output bit for bit.
pub fn sample_driving(
    kappa: f64,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<DrivingPath, EngineError> {
    if !(kappa > 0.0 && kappa < 8.0) {
        return Err(EngineError::KappaOutOfRange(kappa));
    }
    if !(horizon > 0.0) {
        return Err(EngineError::BadHorizon(horizon));
    }
    if !(dt > 0.0 && dt <= horizon) {
        return Err(EngineError::BadStep { dt, horizon });
    }
    let steps = (horizon / dt).ceil() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (kappa * dt).sqrt()).expect("valid std dev");
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..steps {
        acc += normal.sample(&mut rng);
        values.push(acc);
    }
    Ok(DrivingPath {
        dt,
        values,
        seed,
        kappa,
    })
}

impl DrivingPath {
    /// Deterministic `lambda == 0` test mode (the kappa -> 0 regression
    /// target: the hull grows along the real segment toward 0).
    pub fn constant_zero(horizon: f64, dt: f64) -> Result<Self, EngineError> {
        if !(horizon > 0.0) {
            return Err(EngineError::BadHorizon(horizon));
        }
        if !(dt > 0.0 && dt <= horizon) {
            return Err(EngineError::BadStep { dt, horizon });
        }
        let steps = (horizon / dt).ceil() as usize;
        Ok(DrivingPath {
            dt,
            values: vec![0.0; steps + 1],
            seed: 0,
            kappa: 0.0,
        })
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Linear interpolation of the driving value at an arbitrary time.
    pub fn at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        let pos = t / self.dt;
        let j = pos.floor() as usize;
        if j + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let frac = pos - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }
}
