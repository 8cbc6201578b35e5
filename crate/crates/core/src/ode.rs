//! Fixed-step classical Runge-Kutta for scalar ODEs on `t ∈ [0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self { steps: 1024 }
    }
}

impl OdeConfig {
    pub const MIN_STEPS: usize = 16;

    pub fn new(steps: usize) -> Result<Self> {
        let cfg = Self { steps };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < Self::MIN_STEPS {
            return Err(Error::Argument(format!(
                "ODE needs at least {} steps, got {}",
                Self::MIN_STEPS,
                self.steps
            )));
        }
        Ok(())
    }
}

/// Integrates `ds/dt = f(t, s)` from `s(0) = s0` and returns `s(1)`.
pub fn rk4<F>(mut f: F, s0: f64, cfg: &OdeConfig) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    cfg.validate()?;
    let h = 1.0 / cfg.steps as f64;
    let mut s = s0;
    for i in 0..cfg.steps {
        let t = i as f64 * h;
        let k1 = f(t, s)?;
        let k2 = f(t + 0.5 * h, s + 0.5 * h * k1)?;
        let k3 = f(t + 0.5 * h, s + 0.5 * h * k2)?;
        let k4 = f(t + h, s + h * k3)?;
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let s = rk4(|_, s| Ok(s), 1.0, &OdeConfig::default()).unwrap();
        assert!((s - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn too_few_steps() {
        assert!(OdeConfig::new(8).is_err());
        assert!(rk4(|_, _| Ok(0.0), 0.0, &OdeConfig { steps: 4 }).is_err());
    }

    #[test]
    fn errors_propagate() {
        let r = rk4(
            |t, _| {
                if t > 0.5 {
                    Err(Error::DomainExit { t })
                } else {
                    Ok(1.0)
                }
            },
            0.0,
            &OdeConfig::default(),
        );
        assert!(matches!(r, Err(Error::DomainExit { .. })));
    }
}
