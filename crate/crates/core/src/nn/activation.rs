use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Element-wise nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    /// `sin(ω₀·x)`
    Sine { omega: f64 },
}

impl Activation {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Sine { omega } => (omega * x).sin(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - x.tanh().powi(2),
            Activation::Sine { omega } => omega * (omega * x).cos(),
        }
    }

    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        x.mapv(|v| self.apply(v))
    }

    pub fn backward(&self, x: &Array2<f64>, grad_out: &Array2<f64>) -> Array2<f64> {
        let mut g = x.mapv(|v| self.derivative(v));
        g *= grad_out;
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let acts = [
            Activation::Relu,
            Activation::Tanh,
            Activation::Sine { omega: 1.0 },
            Activation::Sine { omega: 30.0 },
        ];
        let h = 1e-6;
        for act in acts {
            // avoid the ReLU kink at 0
            for x in [-2.3, -0.71, -0.013, 0.021, 0.4, 1.7] {
                let fd = (act.apply(x + h) - act.apply(x - h)) / (2.0 * h);
                assert!((fd - act.derivative(x)).abs() < 1e-8, "{act:?} at {x}");
            }
        }
    }
}
