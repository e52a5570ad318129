//! Error norms, conserved densities and shape-parameter selection.

use rayon::prelude::*;
use serde::Serialize;

use crate::discretization::{condition_number, interpolation_matrix, NodeSet, Operators};
use crate::error::AnalysisError;
use crate::gfkdv::GfKdvProblem;
use crate::integrator::integrate;
use crate::kernels::{KernelFamily, KernelSpec};
use crate::solutions::Preset;

/// Max, discrete L₂ and RMS norms of `numeric − exact`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub max_error: f64,
    pub l2_error: f64,
    pub rms_error: f64,
    pub n: usize,
    pub h: f64,
}

impl ErrorReport {
    /// Report with every norm infinite, used for failed runs.
    pub fn infinite(n: usize, h: f64) -> Self {
        Self {
            max_error: f64::INFINITY,
            l2_error: f64::INFINITY,
            rms_error: f64::INFINITY,
            n,
            h,
        }
    }
}

/// `max|dᵢ|`, `sqrt(h·Σdᵢ²)` and `sqrt(Σdᵢ²/N)` for `d = numeric − exact`.
pub fn error_norms(numeric: &[f64], exact: &[f64], h: f64) -> Result<ErrorReport, AnalysisError> {
    if numeric.len() != exact.len() {
        return Err(AnalysisError::LengthMismatch {
            left: numeric.len(),
            right: exact.len(),
        });
    }
    if numeric.is_empty() {
        return Err(AnalysisError::InvalidArgument("empty state vectors".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    let n = numeric.len();
    let (max, sum_sq) = numeric
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).abs())
        .fold((0.0f64, 0.0f64), |(m, s), d| (m.max(d), s + d * d));
    // NaN differences must not vanish through f64::max
    let max = if sum_sq.is_nan() { f64::NAN } else { max };
    Ok(ErrorReport {
        max_error: max,
        l2_error: (h * sum_sq).sqrt(),
        rms_error: (sum_sq / n as f64).sqrt(),
        n,
        h,
    })
}

/// Trapezoidal rule for samples `values` at the (possibly nonuniform) `nodes`.
pub fn trapezoid(values: &[f64], nodes: &[f64]) -> f64 {
    assert_eq!(
        values.len(),
        nodes.len(),
        "values and nodes differ in length"
    );
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// `I₁ = ∫u dx`.
pub fn conserved_i1(u: &[f64], nodes: &NodeSet) -> Result<f64, AnalysisError> {
    if u.len() != nodes.len() {
        return Err(AnalysisError::LengthMismatch {
            left: u.len(),
            right: nodes.len(),
        });
    }
    Ok(trapezoid(u, nodes.as_slice()))
}

/// `I₂ = ∫ u³/3 − w·u_x² dx` with `w = 1/6` (Lax) or `w = 1` (SK), where `u_x`
/// comes from the collocation operator `M₁`.
pub fn conserved_i2(
    u: &[f64],
    nodes: &NodeSet,
    ops: &Operators,
    variant: Preset,
) -> Result<f64, AnalysisError> {
    if u.len() != nodes.len() || ops.len() != nodes.len() {
        return Err(AnalysisError::LengthMismatch {
            left: u.len(),
            right: nodes.len(),
        });
    }
    let weight = match variant {
        Preset::Lax => 1.0 / 6.0,
        Preset::Sk => 1.0,
    };
    let ux = ops.apply(1, u);
    let integrand: Vec<f64> = u
        .iter()
        .zip(&ux)
        .map(|(&v, &d)| v * v * v / 3.0 - weight * d * d)
        .collect();
    Ok(trapezoid(&integrand, nodes.as_slice()))
}

/// Hardy's rule `c = 0.815·d̄`, `d̄` the mean nearest-neighbour distance.
pub fn hardy_shape(nodes: &[f64]) -> Result<f64, AnalysisError> {
    let n = nodes.len();
    if n < 2 {
        return Err(AnalysisError::InvalidArgument(
            "Hardy's shape needs at least two nodes".into(),
        ));
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = (0..n)
        .map(|i| {
            let left = if i > 0 {
                sorted[i] - sorted[i - 1]
            } else {
                f64::INFINITY
            };
            let right = if i + 1 < n {
                sorted[i + 1] - sorted[i]
            } else {
                f64::INFINITY
            };
            left.min(right)
        })
        .sum();
    Ok(0.815 * total / n as f64)
}

/// Franke's rule `c = 1.25·D/√N`, `D` the diameter of the node cloud.
pub fn franke_shape(nodes: &[f64]) -> Result<f64, AnalysisError> {
    if nodes.is_empty() {
        return Err(AnalysisError::InvalidArgument("no nodes".into()));
    }
    let (lo, hi) = nodes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    Ok(1.25 * (hi - lo) / (nodes.len() as f64).sqrt())
}

/// One shape candidate of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub shape: f64,
    pub max_error: f64,
    pub l2_error: f64,
    pub rms_error: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    /// Rows in the order the shapes were given.
    pub rows: Vec<SweepRow>,
    /// Shape with the smallest max-error among rows within the condition cap.
    pub selected: Option<f64>,
}

impl SweepOutcome {
    pub fn selected_row(&self) -> Option<&SweepRow> {
        let shape = self.selected?;
        self.rows.iter().find(|r| r.shape == shape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub dt: f64,
    pub t_end: f64,
    pub condition_cap: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
}

impl SweepOptions {
    pub const DEFAULT_CONDITION_CAP: f64 = 1e18;

    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            condition_cap: Self::DEFAULT_CONDITION_CAP,
            jobs: None,
        }
    }
}

/// Solves the problem once per shape value and tabulates the error at
/// `t_end` against the exact solution together with `cond(A)`.
///
/// Candidates that fail (singular matrix or blow-up) stay in the table with
/// infinite errors.
pub fn sweep_shape(
    problem: &GfKdvProblem,
    nodes: &NodeSet,
    family: KernelFamily,
    shapes: &[f64],
    options: &SweepOptions,
) -> Result<SweepOutcome, AnalysisError> {
    if shapes.is_empty() {
        return Err(AnalysisError::InvalidArgument("empty shape list".into()));
    }
    if let Some(bad) = shapes.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(AnalysisError::InvalidArgument(format!(
            "shape values must be positive, got {bad}"
        )));
    }
    if !problem.has_exact() {
        return Err(AnalysisError::InvalidArgument(
            "a shape sweep needs a problem with an exact solution".into(),
        ));
    }
    crate::integrator::step_count(problem.t0(), options.t_end, options.dt)
        .map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;

    let evaluate = |&shape: &f64| evaluate_candidate(problem, nodes, family, shape, options);
    let rows: Vec<SweepRow> = match options.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| AnalysisError::InvalidArgument(e.to_string()))?;
            pool.install(|| shapes.par_iter().map(evaluate).collect())
        }
        None => shapes.par_iter().map(evaluate).collect(),
    };

    Ok(SweepOutcome {
        selected: select_shape(&rows, options.condition_cap),
        rows,
    })
}

/// Minimum max-error among finite rows with `condition <= cap`; ties go to
/// the smaller shape.
pub fn select_shape(rows: &[SweepRow], condition_cap: f64) -> Option<f64> {
    rows.iter()
        .filter(|r| r.max_error.is_finite() && r.condition <= condition_cap)
        .min_by(|a, b| {
            a.max_error
                .total_cmp(&b.max_error)
                .then(a.shape.total_cmp(&b.shape))
        })
        .map(|r| r.shape)
}

fn evaluate_candidate(
    problem: &GfKdvProblem,
    nodes: &NodeSet,
    family: KernelFamily,
    shape: f64,
    options: &SweepOptions,
) -> SweepRow {
    let kernel = KernelSpec::new(family, shape).expect("shapes validated by caller");
    let failed = |condition| SweepRow {
        shape,
        max_error: f64::INFINITY,
        l2_error: f64::INFINITY,
        rms_error: f64::INFINITY,
        condition,
    };
    let ops = match Operators::assemble(nodes, kernel) {
        Ok(ops) => ops,
        Err(_) => {
            let cond =
                condition_number(&interpolation_matrix(nodes, &kernel)).unwrap_or(f64::INFINITY);
            return failed(cond);
        }
    };
    let u0 = problem.sample_initial(nodes.as_slice());
    let run = integrate(
        problem,
        &ops,
        &u0,
        problem.t0(),
        options.t_end,
        options.dt,
        usize::MAX,
    );
    let Ok(trajectory) = run else {
        return failed(ops.condition());
    };
    let exact = problem
        .sample_exact(nodes.as_slice(), trajectory.final_time())
        .expect("exact solution checked by caller");
    match error_norms(trajectory.final_state(), &exact, nodes.mean_spacing()) {
        Ok(report) if report.max_error.is_finite() => SweepRow {
            shape,
            max_error: report.max_error,
            l2_error: report.l2_error,
            rms_error: report.rms_error,
            condition: ops.condition(),
        },
        _ => failed(ops.condition()),
    }
}

/// `count` log-spaced values from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Vec<f64>, AnalysisError> {
    if count == 0 {
        return Err(AnalysisError::InvalidArgument(
            "count must be at least 1".into(),
        ));
    }
    if !(min > 0.0 && min.is_finite() && max.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "log range bounds must be positive and finite, got [{min}, {max}]"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    if min >= max {
        return Err(AnalysisError::InvalidArgument(format!(
            "log range needs min < max, got [{min}, {max}]"
        )));
    }
    let (a, b) = (min.log10(), max.log10());
    let last = count - 1;
    Ok((0..count)
        .map(|i| match i {
            0 => min,
            i if i == last => max,
            i => 10f64.powf(a + (b - a) * i as f64 / last as f64),
        })
        .collect())
}
