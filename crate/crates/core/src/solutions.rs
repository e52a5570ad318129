//! Closed-form soliton solutions of the Lax and Sawada-Kotera equations.
//!
//! Lax:  u = 2k²(2 − 3 tanh²(k(x − 56k⁴t − x₀)))
//! SK:   u = 2k² sech²(k(x − 16k⁴t − x₀))

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::gfkdv::GfKdvCoefficients;

/// The two gfKdV specialisations with known soliton solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Lax,
    Sk,
}

impl Preset {
    pub fn coefficients(self) -> GfKdvCoefficients {
        match self {
            Preset::Lax => GfKdvCoefficients::LAX,
            Preset::Sk => GfKdvCoefficients::SAWADA_KOTERA,
        }
    }

    /// Soliton speed for wave number `k`.
    pub fn speed(self, k: f64) -> f64 {
        let k4 = k.powi(4);
        match self {
            Preset::Lax => 56.0 * k4,
            Preset::Sk => 16.0 * k4,
        }
    }

    pub fn exact(self, x: f64, t: f64, p: &SolitonParams) -> f64 {
        match self {
            Preset::Lax => lax_exact(x, t, p),
            Preset::Sk => sk_exact(x, t, p),
        }
    }

    pub fn exact_dt(self, x: f64, t: f64, p: &SolitonParams) -> f64 {
        match self {
            Preset::Lax => lax_exact_dt(x, t, p),
            Preset::Sk => sk_exact_dt(x, t, p),
        }
    }

    pub fn exact_dx(self, x: f64, t: f64, p: &SolitonParams) -> f64 {
        match self {
            Preset::Lax => lax_exact_dx(x, t, p),
            Preset::Sk => sk_exact_dx(x, t, p),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Lax => "lax",
            Preset::Sk => "sk",
        })
    }
}

impl FromStr for Preset {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lax" => Ok(Preset::Lax),
            "sk" | "sawada-kotera" => Ok(Preset::Sk),
            other => Err(ProblemError::UnknownPreset(other.to_string())),
        }
    }
}

/// Wave number and initial crest position of a soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    k: f64,
    x0: f64,
}

impl SolitonParams {
    pub fn new(k: f64, x0: f64) -> Result<Self, ProblemError> {
        if !k.is_finite() || k == 0.0 {
            return Err(ProblemError::InvalidWaveNumber(k));
        }
        if !x0.is_finite() {
            return Err(ProblemError::InvalidArgument(format!(
                "x0 must be finite, got {x0}"
            )));
        }
        Ok(Self { k, x0 })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
}

/// `1/cosh(z)`, returning 0 once `cosh` overflows.
pub fn sech(z: f64) -> f64 {
    let c = z.cosh();
    if c.is_finite() {
        1.0 / c
    } else {
        0.0
    }
}

fn phase(x: f64, t: f64, speed: f64, p: &SolitonParams) -> f64 {
    p.k * (x - speed * t - p.x0)
}

pub fn lax_exact(x: f64, t: f64, p: &SolitonParams) -> f64 {
    let k = p.k;
    let th = phase(x, t, Preset::Lax.speed(k), p).tanh();
    2.0 * k * k * (2.0 - 3.0 * th * th)
}

pub fn sk_exact(x: f64, t: f64, p: &SolitonParams) -> f64 {
    let k = p.k;
    let se = sech(phase(x, t, Preset::Sk.speed(k), p));
    2.0 * k * k * se * se
}

pub fn lax_exact_dx(x: f64, t: f64, p: &SolitonParams) -> f64 {
    let k = p.k;
    let z = phase(x, t, Preset::Lax.speed(k), p);
    let se = sech(z);
    -12.0 * k * k * k * z.tanh() * se * se
}

pub fn sk_exact_dx(x: f64, t: f64, p: &SolitonParams) -> f64 {
    let k = p.k;
    let z = phase(x, t, Preset::Sk.speed(k), p);
    let se = sech(z);
    -4.0 * k * k * k * se * se * z.tanh()
}

// Traveling waves: u_t = −speed · u_x.
pub fn lax_exact_dt(x: f64, t: f64, p: &SolitonParams) -> f64 {
    -Preset::Lax.speed(p.k) * lax_exact_dx(x, t, p)
}

pub fn sk_exact_dt(x: f64, t: f64, p: &SolitonParams) -> f64 {
    -Preset::Sk.speed(p.k) * sk_exact_dx(x, t, p)
}

/// Finite-difference weights for the `order`-th derivative at 0 on the given
/// offsets (Fornberg's recursion).
pub fn fd_weights(order: usize, offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    assert!(n > order, "need more than {order} points");
    // c[j][m]: weight of point j for derivative m
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for m in (1..=mn).rev() {
                    c[i][m] = c1 * (m as f64 * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for m in (1..=mn).rev() {
                c[j][m] = (c4 * c[j][m] - m as f64 * c[j][m - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Half-width of the central stencils used by [`gfkdv_residual`].
const RESIDUAL_STENCIL_HALF_WIDTH: i32 = 7;

fn central_derivative(f: impl Fn(f64) -> f64, at: f64, step: f64, order: usize) -> f64 {
    let offsets: Vec<f64> = (-RESIDUAL_STENCIL_HALF_WIDTH..=RESIDUAL_STENCIL_HALF_WIDTH)
        .map(f64::from)
        .collect();
    let w = fd_weights(order, &offsets);
    let sum: f64 = offsets
        .iter()
        .zip(&w)
        .map(|(&o, &wi)| wi * f(at + o * step))
        .sum();
    sum / step.powi(order as i32)
}

/// Max absolute residual of
/// `u_t + α u² u_x + β u_x u_xx + γ u u_xxx + δ u_xxxxx`
/// for a candidate solution `u(x, t)`, with every derivative taken by a
/// 15-point central difference of width `x_step` (space) and `t_step` (time).
pub fn gfkdv_residual(
    coeffs: &GfKdvCoefficients,
    u: impl Fn(f64, f64) -> f64,
    x_step: f64,
    t_step: f64,
    points: &[(f64, f64)],
) -> f64 {
    points
        .iter()
        .map(|&(x, t)| {
            let ux = |order| central_derivative(|y| u(y, t), x, x_step, order);
            let ut = central_derivative(|s| u(x, s), t, t_step, 1);
            let v = u(x, t);
            let (d1, d2, d3, d5) = (ux(1), ux(2), ux(3), ux(5));
            (ut + coeffs.alpha * v * v * d1
                + coeffs.beta * d1 * d2
                + coeffs.gamma * v * d3
                + coeffs.delta5 * d5)
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Self-check that a preset's exact solution and coefficients agree: the max
/// PDE residual of the closed form over `points`.
///
/// Steps scale with the soliton width `1/|k|` and the matching time scale, so
/// the stencils resolve the profile for any wave number.
pub fn pde_residual(preset: Preset, p: &SolitonParams, points: &[(f64, f64)]) -> f64 {
    let width = 1.0 / p.k.abs();
    let x_step = 0.1 * width;
    let t_step = x_step / preset.speed(p.k);
    gfkdv_residual(
        &preset.coefficients(),
        |x, t| preset.exact(x, t, p),
        x_step,
        t_step,
        points,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: f64) -> SolitonParams {
        SolitonParams::new(k, 0.0).unwrap()
    }

    #[test]
    fn crest_values() {
        assert!((lax_exact(0.0, 0.0, &params(0.001)) - 4e-6).abs() < 1e-21);
        assert!((sk_exact(0.0, 0.0, &params(0.001)) - 2e-6).abs() < 1e-21);
    }

    #[test]
    fn tails() {
        let p = params(0.5);
        assert!((lax_exact(1e4, 0.0, &p) + 0.5).abs() < 1e-15);
        assert!((lax_exact(-1e4, 3.0, &p) + 0.5).abs() < 1e-15);
        assert_eq!(sk_exact(1e6, 0.0, &p), 0.0);
        assert_eq!(sech(1e4), 0.0);
    }

    #[test]
    fn traveling_wave_form() {
        let p = SolitonParams::new(0.7, 0.3).unwrap();
        for &(x, t) in &[(0.0, 0.5), (1.3, 2.0), (-2.2, 0.1)] {
            let lax_shift = x - Preset::Lax.speed(0.7) * t;
            let sk_shift = x - Preset::Sk.speed(0.7) * t;
            assert!((lax_exact(x, t, &p) - lax_exact(lax_shift, 0.0, &p)).abs() < 1e-14);
            assert!((sk_exact(x, t, &p) - sk_exact(sk_shift, 0.0, &p)).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_rates_match_finite_differences() {
        let p = SolitonParams::new(0.8, -0.4).unwrap();
        let h = 1e-5;
        for preset in [Preset::Lax, Preset::Sk] {
            for &(x, t) in &[(0.2, 0.0), (1.1, 0.3), (-0.9, 0.05)] {
                let fd_x = (preset.exact(x + h, t, &p) - preset.exact(x - h, t, &p)) / (2.0 * h);
                let ht = h / preset.speed(p.k());
                let fd_t = (preset.exact(x, t + ht, &p) - preset.exact(x, t - ht, &p)) / (2.0 * ht);
                assert!((fd_x - preset.exact_dx(x, t, &p)).abs() < 1e-8);
                let dt = preset.exact_dt(x, t, &p);
                assert!((fd_t - dt).abs() < 1e-8 * dt.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_zero_wave_number() {
        assert!(matches!(
            SolitonParams::new(0.0, 0.0),
            Err(ProblemError::InvalidWaveNumber(_))
        ));
    }

    #[test]
    fn fornberg_weights() {
        let w = fd_weights(1, &[-1.0, 0.0, 1.0]);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w = fd_weights(2, &[-1.0, 0.0, 1.0]);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] + 2.0).abs() < 1e-15);
        // exact on x^5 for the fifth derivative
        let offs: Vec<f64> = (-3..=3).map(f64::from).collect();
        let w = fd_weights(5, &offs);
        let d5: f64 = offs.iter().zip(&w).map(|(o, wi)| wi * o.powi(5)).sum();
        assert!((d5 - 120.0).abs() < 1e-9);
    }

    #[test]
    fn sawada_kotera_soliton_solves_its_equation() {
        let p = params(0.9);
        let points: Vec<(f64, f64)> = (0..10)
            .map(|i| (-2.0 + 0.4 * i as f64, 0.1 * i as f64))
            .collect();
        let r = pde_residual(Preset::Sk, &p, &points);
        // individual terms are O(1)..O(10) at this wave number
        assert!(r < 1e-4, "residual {r}");
    }

    #[test]
    fn lax_soliton_requires_beta_twenty() {
        let p = params(0.9);
        let points: Vec<(f64, f64)> = (0..10)
            .map(|i| (-2.0 + 0.45 * i as f64, 0.1 * i as f64))
            .collect();
        let consistent = GfKdvCoefficients {
            beta: 20.0,
            ..GfKdvCoefficients::LAX
        };
        let x_step = 0.1 / 0.9;
        let t_step = x_step / Preset::Lax.speed(0.9);
        let r20 = gfkdv_residual(
            &consistent,
            |x, t| lax_exact(x, t, &p),
            x_step,
            t_step,
            &points,
        );
        assert!(r20 < 1e-4, "residual {r20}");
        // The preset keeps β = 30; the soliton leaves (β − 20)·u_x·u_xx behind.
        let r30 = pde_residual(Preset::Lax, &p, &points);
        assert!(r30 > 1e-2, "residual {r30}");
    }
}
