//! Coefficient fields of the model problem.
//!
//! The diffusion coefficient `a(x, y)`, the convective field `b(x, y)` and the
//! load `f(x, y)` are evaluated pointwise during assembly. The named variants
//! are the templates used throughout the experiment tables:
//!
//! * `A1` — `exp(x + y)`, smooth;
//! * `A2` — `exp(x + |y - y0|^(3/2))`, C^1 only;
//! * `A3` — `exp(x + |y - y0|)`, C^0 only;
//! * `Linear` — the velocity field `[x, y]^T`.

use std::fmt;
use std::sync::Arc;

/// Scalar function of (x, y); used for the diffusion coefficient and the load.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    /// `exp(x + y)`
    A1,
    /// `exp(x + |y - y0|^(3/2))`
    A2 {
        y0: f64,
    },
    /// `exp(x + |y - y0|)`
    A3 {
        y0: f64,
    },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl ScalarField {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::A1 => (x + y).exp(),
            ScalarField::A2 { y0 } => (x + (y - y0).abs().powf(1.5)).exp(),
            ScalarField::A3 { y0 } => (x + (y - y0).abs()).exp(),
            ScalarField::Custom(f) => f(x, y),
        }
    }

    /// Short identifier used in CSV reports.
    pub fn id(&self) -> String {
        match self {
            ScalarField::Constant(c) => format!("const:{c}"),
            ScalarField::A1 => "a1".to_string(),
            ScalarField::A2 { .. } => "a2".to_string(),
            ScalarField::A3 { .. } => "a3".to_string(),
            ScalarField::Custom(_) => "custom".to_string(),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::A1 => write!(f, "A1"),
            ScalarField::A2 { y0 } => write!(f, "A2 {{ y0: {y0} }}"),
            ScalarField::A3 { y0 } => write!(f, "A3 {{ y0: {y0} }}"),
            ScalarField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Vector function of (x, y); used for the convective velocity field.
#[derive(Clone)]
pub enum VectorField {
    Constant([f64; 2]),
    /// `[x, y]^T`
    Linear,
    Custom(Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>),
}

impl VectorField {
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        match self {
            VectorField::Constant(v) => *v,
            VectorField::Linear => [x, y],
            VectorField::Custom(f) => f(x, y),
        }
    }

    pub fn id(&self) -> String {
        match self {
            VectorField::Constant(v) => format!("const:{}:{}", v[0], v[1]),
            VectorField::Linear => "linear".to_string(),
            VectorField::Custom(_) => "custom".to_string(),
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Constant(v) => write!(f, "Constant([{}, {}])", v[0], v[1]),
            VectorField::Linear => write!(f, "Linear"),
            VectorField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn template_values() {
        assert_relative_eq!(ScalarField::A1.eval(0.25, 0.5), (0.75f64).exp());
        let a2 = ScalarField::A2 { y0: 0.5 };
        assert_relative_eq!(a2.eval(0.0, 1.5), (0.0f64 + 1.0).exp());
        let a3 = ScalarField::A3 { y0: 0.5 };
        assert_relative_eq!(a3.eval(0.25, 0.25), (0.5f64).exp());
        assert_eq!(VectorField::Linear.eval(0.2, -0.3), [0.2, -0.3]);
    }

    #[test]
    fn ids_round_trip_constants() {
        assert_eq!(ScalarField::Constant(2.5).id(), "const:2.5");
        assert_eq!(ScalarField::A2 { y0: 0.5 }.id(), "a2");
        assert_eq!(VectorField::Linear.id(), "linear");
    }
}
