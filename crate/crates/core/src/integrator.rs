//! Classical fixed-step RK4 and the trajectory driver.

use serde::Serialize;

use crate::discretization::Operators;
use crate::error::IntegrationError;
use crate::gfkdv::{GfKdvProblem, RhsScratch};
use crate::kernels::KernelSpec;
use crate::solutions::Preset;

/// Classical four-stage Runge-Kutta stepper with reusable stage buffers.
///
/// ```text
/// K₁ = f(tₙ, Uₙ)
/// K₂ = f(tₙ + Δt/2, Uₙ + Δt/2·K₁)
/// K₃ = f(tₙ + Δt/2, Uₙ + Δt/2·K₂)
/// K₄ = f(tₙ + Δt,   Uₙ + Δt·K₃)
/// Uₙ₊₁ = Uₙ + Δt·(K₁ + 2K₂ + 2K₃ + K₄)/6
/// ```
#[derive(Debug, Clone)]
pub struct Rk4 {
    dt: f64,
    steps: usize,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4 {
    pub fn new(dt: f64, dim: usize) -> Result<Self, IntegrationError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(IntegrationError::InvalidArgument(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        Ok(Self {
            dt,
            steps: 0,
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            stage: vec![0.0; dim],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Steps taken so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advances `u` from `t` to `t + dt` in place. `f(t, u, out)` writes the
    /// derivative into `out` and is called exactly four times.
    pub fn step<F>(&mut self, mut f: F, u: &mut [f64], t: f64) -> Result<(), IntegrationError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dt = self.dt;
        let half = 0.5 * dt;
        assert_eq!(u.len(), self.stage.len(), "state dimension changed");

        f(t, u, &mut self.k1);
        for ((s, &ui), &k) in self.stage.iter_mut().zip(u.iter()).zip(&self.k1) {
            *s = ui + half * k;
        }
        f(t + half, &self.stage, &mut self.k2);
        for ((s, &ui), &k) in self.stage.iter_mut().zip(u.iter()).zip(&self.k2) {
            *s = ui + half * k;
        }
        f(t + half, &self.stage, &mut self.k3);
        for ((s, &ui), &k) in self.stage.iter_mut().zip(u.iter()).zip(&self.k3) {
            *s = ui + dt * k;
        }
        f(t + dt, &self.stage, &mut self.k4);

        for (i, ui) in u.iter_mut().enumerate() {
            *ui += dt * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]) / 6.0;
        }
        self.steps += 1;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::BlowUp {
                step: self.steps,
                time: t + dt,
            });
        }
        Ok(())
    }
}

/// One RK4 step from `(t, u)`, returning the new state.
///
/// A non-finite result is reported as a blow-up at step 1.
pub fn rk4_step<F>(f: F, u: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = Rk4::new(dt, u.len())?;
    let mut next = u.to_vec();
    stepper.step(f, &mut next, t)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub kernel: KernelSpec,
    pub n: usize,
    pub preset: Option<Preset>,
    pub steps: usize,
}

/// Recorded states of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Number of whole steps of size `dt` covering `[t0, t_end]`.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize, IntegrationError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(IntegrationError::InvalidArgument(format!(
            "time step must be positive and finite, got {dt}"
        )));
    }
    if !(t0.is_finite() && t_end.is_finite()) || t_end < t0 {
        return Err(IntegrationError::InvalidArgument(format!(
            "invalid time interval [{t0}, {t_end}]"
        )));
    }
    let ratio = (t_end - t0) / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 {
        return Err(IntegrationError::InvalidArgument(format!(
            "interval length {} is not an integer multiple of dt = {dt}",
            t_end - t0
        )));
    }
    Ok(steps as usize)
}

/// Marches `u0` from `t0` to `t_end` with RK4, clamping the Dirichlet data
/// after every step. Every `snapshot_every`-th state is kept, plus the final
/// one.
pub fn integrate(
    problem: &GfKdvProblem,
    ops: &Operators,
    u0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<Trajectory, IntegrationError> {
    if snapshot_every == 0 {
        return Err(IntegrationError::InvalidArgument(
            "snapshot interval must be at least 1".into(),
        ));
    }
    if u0.len() != ops.len() {
        return Err(crate::error::ProblemError::SizeMismatch {
            expected: ops.len(),
            actual: u0.len(),
        }
        .into());
    }
    let steps = step_count(t0, t_end, dt)?;

    let mut times = vec![t0];
    let mut states = vec![u0.to_vec()];
    let mut u = u0.to_vec();
    let mut stepper = Rk4::new(dt, u.len())?;
    let mut scratch = RhsScratch::new(u.len());

    for n in 1..=steps {
        let t = t0 + (n - 1) as f64 * dt;
        stepper.step(
            |time, state, out| {
                problem
                    .rhs_into(state, ops, time, out, &mut scratch)
                    .expect("state length validated before integration")
            },
            &mut u,
            t,
        )?;
        let t_next = if n == steps {
            t_end
        } else {
            t0 + n as f64 * dt
        };
        problem.apply_dirichlet(&mut u, t_next);
        if n % snapshot_every == 0 || n == steps {
            times.push(t_next);
            states.push(u.clone());
        }
    }

    Ok(Trajectory {
        times,
        states,
        dt,
        meta: TrajectoryMeta {
            kernel: ops.kernel(),
            n: ops.len(),
            preset: problem.preset_kind(),
            steps,
        },
    })
}
