//! Radial basis functions and their closed-form derivatives.
//!
//! Three families are supported, each parameterised by a shape value `c > 0`:
//!
//! ```text
//! MQ   φ(r) = (c² + r²)^(1/2)
//! IMQ  φ(r) = (c² + r²)^(-1/2)
//! GA   φ(r) = exp(-c·r²)
//! ```
//!
//! The Gaussian multiplies `r²` by `c` directly (not `(c·r)²`), so large shape
//! values give narrow kernels.
//!
//! Derivatives are taken with respect to the evaluation point `x` and treat the
//! kernel as a smooth even function of `s = x - center`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::KernelError;

/// Highest spatial derivative order the kernels provide.
pub const MAX_DERIVATIVE_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    #[serde(rename = "mq")]
    Multiquadric,
    #[serde(rename = "imq")]
    InverseMultiquadric,
    #[serde(rename = "ga")]
    Gaussian,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Multiquadric,
        KernelFamily::InverseMultiquadric,
        KernelFamily::Gaussian,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            KernelFamily::Multiquadric => "mq",
            KernelFamily::InverseMultiquadric => "imq",
            KernelFamily::Gaussian => "ga",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for KernelFamily {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mq" | "multiquadric" => Ok(KernelFamily::Multiquadric),
            "imq" | "inverse-multiquadric" => Ok(KernelFamily::InverseMultiquadric),
            "ga" | "gaussian" => Ok(KernelFamily::Gaussian),
            other => Err(KernelError::UnknownFamily(other.to_string())),
        }
    }
}

/// A kernel family together with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    family: KernelFamily,
    shape: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, shape: f64) -> Result<Self, KernelError> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(KernelError::InvalidShape(shape));
        }
        Ok(Self { family, shape })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Kernel value at radial distance `r >= 0`.
    pub fn value(&self, r: f64) -> f64 {
        let c = self.shape;
        match self.family {
            KernelFamily::Multiquadric => (c * c + r * r).sqrt(),
            KernelFamily::InverseMultiquadric => 1.0 / (c * c + r * r).sqrt(),
            KernelFamily::Gaussian => (-c * r * r).exp(),
        }
    }

    /// `order`-th derivative in `x` of `φ(|x - center|)`.
    ///
    /// Order 0 is identical to [`KernelSpec::value`] at `|x - center|`. Orders
    /// above [`MAX_DERIVATIVE_ORDER`] are rejected.
    pub fn derivative(&self, x: f64, center: f64, order: usize) -> Result<f64, KernelError> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(KernelError::UnsupportedOrder(order));
        }
        let s = x - center;
        if order == 0 {
            return Ok(self.value(s.abs()));
        }
        let c = self.shape;
        Ok(match self.family {
            KernelFamily::Multiquadric => multiquadric_derivative(c, s, order),
            KernelFamily::InverseMultiquadric => inverse_multiquadric_derivative(c, s, order),
            KernelFamily::Gaussian => gaussian_derivative(c, s, order),
        })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(c={})", self.family, self.shape)
    }
}

// With w = c² + s², every MQ derivative of order n ≥ 2 is c² times a
// polynomial in s over a half-integer power of w.
fn multiquadric_derivative(c: f64, s: f64, order: usize) -> f64 {
    let c2 = c * c;
    let s2 = s * s;
    let w = c2 + s2;
    let root = w.sqrt();
    match order {
        1 => s / root,
        2 => c2 / (w * root),
        3 => -3.0 * c2 * s / (w * w * root),
        4 => 3.0 * c2 * (4.0 * s2 - c2) / (w * w * w * root),
        5 => 15.0 * c2 * s * (3.0 * c2 - 4.0 * s2) / (w * w * w * w * root),
        _ => unreachable!("order checked by caller"),
    }
}

fn inverse_multiquadric_derivative(c: f64, s: f64, order: usize) -> f64 {
    let c2 = c * c;
    let s2 = s * s;
    let w = c2 + s2;
    let root = w.sqrt();
    match order {
        1 => -s / (w * root),
        2 => (2.0 * s2 - c2) / (w * w * root),
        3 => 3.0 * s * (3.0 * c2 - 2.0 * s2) / (w * w * w * root),
        4 => 3.0 * (3.0 * c2 * c2 - 24.0 * c2 * s2 + 8.0 * s2 * s2) / (w * w * w * w * root),
        5 => {
            -15.0 * s * (15.0 * c2 * c2 - 40.0 * c2 * s2 + 8.0 * s2 * s2)
                / (w * w * w * w * w * root)
        }
        _ => unreachable!("order checked by caller"),
    }
}

// φ⁽ⁿ⁾ = Pₙ(s)·exp(-c s²) with P_{n+1} = Pₙ' - 2cs·Pₙ, written in q = c·s².
fn gaussian_derivative(c: f64, s: f64, order: usize) -> f64 {
    let q = c * s * s;
    let e = (-q).exp();
    let poly = match order {
        1 => -2.0 * c * s,
        2 => c * (4.0 * q - 2.0),
        3 => c * c * s * (12.0 - 8.0 * q),
        4 => c * c * (16.0 * q * q - 48.0 * q + 12.0),
        5 => c * c * c * s * (-32.0 * q * q + 160.0 * q - 120.0),
        _ => unreachable!("order checked by caller"),
    };
    poly * e
}
