//! Collocation nodes, the RBF interpolation matrix and differentiation matrices.
//!
//! For nodes `x_1 < … < x_N` and a kernel `φ`, the interpolation matrix is
//! `A_ij = φ(|x_i - x_j|)` and the order-`d` kernel derivative matrix is
//! `(B_d)_ij = ∂ᵈ/∂xᵈ φ(|x - x_j|)` at `x = x_i`. The differentiation matrix
//! `M_d = B_d·A⁻¹` maps nodal values to nodal derivative values; it is obtained
//! by solving against one LU factorization of `A`, never by forming `A⁻¹`.

use nalgebra::{DMatrix, Dyn, LU};

use crate::error::DiscretizationError;
use crate::kernels::{KernelSpec, MAX_DERIVATIVE_ORDER};

/// Fewest nodes that can carry five independent spatial derivatives.
pub const MIN_NODES: usize = 6;

/// Condition numbers above this still assemble, but are flagged.
pub const CONDITION_WARNING_THRESHOLD: f64 = 1e18;

/// Strictly increasing 1D collocation nodes; the first and last node are the
/// domain endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    nodes: Vec<f64>,
    spacing: Option<f64>,
}

impl NodeSet {
    pub fn new(nodes: Vec<f64>) -> Result<Self, DiscretizationError> {
        if nodes.len() < MIN_NODES {
            return Err(DiscretizationError::InvalidArgument(format!(
                "need at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(DiscretizationError::InvalidArgument(
                "node coordinates must be finite".into(),
            ));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DiscretizationError::InvalidArgument(format!(
                "nodes must be strictly increasing (violated between index {i} and {})",
                i + 1
            )));
        }
        Ok(Self {
            nodes,
            spacing: None,
        })
    }

    /// `n` equally spaced nodes including both endpoints.
    pub fn uniform(x_min: f64, x_max: f64, n: usize) -> Result<Self, DiscretizationError> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(DiscretizationError::InvalidArgument(format!(
                "empty or invalid interval [{x_min}, {x_max}]"
            )));
        }
        if n < MIN_NODES {
            return Err(DiscretizationError::InvalidArgument(format!(
                "need at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| x_min + i as f64 * h).collect();
        nodes[n - 1] = x_max;
        let mut set = Self::new(nodes)?;
        set.spacing = Some(h);
        Ok(set)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Grid spacing of a uniform construction, `None` for arbitrary nodes.
    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    /// Spacing for uniform sets, otherwise the mean gap.
    pub fn mean_spacing(&self) -> f64 {
        self.spacing
            .unwrap_or_else(|| (self.x_max() - self.x_min()) / (self.len() - 1) as f64)
    }

    pub fn fill_distance(&self) -> f64 {
        fill_distance(&self.nodes)
    }
}

/// Largest distance from a point of `[first, last]` to its nearest node.
///
/// Expects sorted input. With nodes at both ends of the interval this is half
/// the widest gap.
pub fn fill_distance(nodes: &[f64]) -> f64 {
    nodes
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]))
        .fold(0.0, f64::max)
}

/// 2-norm condition number `σ_max / σ_min` from the full singular spectrum.
///
/// Returns `f64::INFINITY` when the smallest singular value is zero.
pub fn condition_number(matrix: &DMatrix<f64>) -> Result<f64, DiscretizationError> {
    if !matrix.is_square() {
        return Err(DiscretizationError::InvalidArgument(format!(
            "condition number needs a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.is_empty() {
        return Err(DiscretizationError::InvalidArgument(
            "condition number of an empty matrix".into(),
        ));
    }
    let sigma = matrix.singular_values();
    let max = sigma.max();
    let min = sigma.min();
    if min == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}

/// LU factorization with partial pivoting, rejecting exactly singular input.
pub fn factorize(matrix: DMatrix<f64>) -> Result<LU<f64, Dyn, Dyn>, DiscretizationError> {
    if !matrix.is_square() {
        return Err(DiscretizationError::InvalidArgument(format!(
            "cannot factor a {}x{} matrix",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let lu = matrix.lu();
    let upper = lu.u();
    if let Some(pivot) = (0..upper.nrows()).find(|&i| upper[(i, i)] == 0.0) {
        return Err(DiscretizationError::Singular { pivot });
    }
    Ok(lu)
}

/// `A_ij = φ(|x_i - x_j|)`.
pub fn interpolation_matrix(nodes: &NodeSet, kernel: &KernelSpec) -> DMatrix<f64> {
    let x = nodes.as_slice();
    DMatrix::from_fn(x.len(), x.len(), |i, j| kernel.value((x[i] - x[j]).abs()))
}

/// `(B_d)_ij = kernel derivative of order d at x_i for the kernel centred on x_j`.
pub fn kernel_derivative_matrix(
    nodes: &NodeSet,
    kernel: &KernelSpec,
    order: usize,
) -> Result<DMatrix<f64>, DiscretizationError> {
    let x = nodes.as_slice();
    let n = x.len();
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            b[(i, j)] = kernel.derivative(x[i], x[j], order)?;
        }
    }
    Ok(b)
}

/// Assembled collocation operators for one node set and kernel.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct Operators {
    nodes: NodeSet,
    kernel: KernelSpec,
    interpolation: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    // derivatives[d - 1] holds M_d
    derivatives: Vec<DMatrix<f64>>,
    condition: f64,
    fill_distance: f64,
}

impl Operators {
    pub fn assemble(nodes: &NodeSet, kernel: KernelSpec) -> Result<Self, DiscretizationError> {
        let interpolation = interpolation_matrix(nodes, &kernel);
        let condition = condition_number(&interpolation)?;
        let lu = factorize(interpolation.clone())?;

        // M_d·A = B_d  <=>  Aᵀ·M_dᵀ = B_dᵀ, and A is exactly symmetric.
        let mut derivatives = Vec::with_capacity(MAX_DERIVATIVE_ORDER);
        for order in 1..=MAX_DERIVATIVE_ORDER {
            let b = kernel_derivative_matrix(nodes, &kernel, order)?;
            let mt = lu
                .solve(&b.transpose())
                .ok_or(DiscretizationError::Singular { pivot: 0 })?;
            derivatives.push(mt.transpose());
        }

        Ok(Self {
            nodes: nodes.clone(),
            kernel,
            interpolation,
            lu,
            derivatives,
            condition,
            fill_distance: nodes.fill_distance(),
        })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interpolation_matrix(&self) -> &DMatrix<f64> {
        &self.interpolation
    }

    /// Differentiation matrix `M_order`, for `order` in `1..=5`.
    pub fn differentiation_matrix(&self, order: usize) -> &DMatrix<f64> {
        assert!(
            (1..=MAX_DERIVATIVE_ORDER).contains(&order),
            "differentiation order {order} out of range"
        );
        &self.derivatives[order - 1]
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition.is_nan() || self.condition > CONDITION_WARNING_THRESHOLD
    }

    pub fn fill_distance(&self) -> f64 {
        self.fill_distance
    }

    /// Writes `M_order · u` into `out`.
    pub fn apply_into(&self, order: usize, u: &[f64], out: &mut [f64]) {
        let m = self.differentiation_matrix(order);
        let n = m.nrows();
        assert_eq!(u.len(), n);
        assert_eq!(out.len(), n);
        out.iter_mut().for_each(|v| *v = 0.0);
        // column-major storage: accumulate column by column
        for (j, &uj) in u.iter().enumerate() {
            let col = m.column(j);
            for (o, &mij) in out.iter_mut().zip(col.iter()) {
                *o += mij * uj;
            }
        }
    }

    pub fn apply(&self, order: usize, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(order, u, &mut out);
        out
    }

    /// Interpolation weights `λ` with `A·λ = u`.
    pub fn interpolation_weights(&self, u: &[f64]) -> Vec<f64> {
        let rhs = nalgebra::DVector::from_column_slice(u);
        self.lu
            .solve(&rhs)
            .expect("factorization verified non-singular at assembly")
            .as_slice()
            .to_vec()
    }

    /// Evaluates the RBF interpolant of nodal data `u` at `x`, i.e. `V(x)·u`.
    pub fn interpolate(&self, u: &[f64], x: f64) -> f64 {
        let weights = self.interpolation_weights(u);
        self.nodes
            .as_slice()
            .iter()
            .zip(&weights)
            .map(|(&xj, &w)| w * self.kernel.value((x - xj).abs()))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;

    #[test]
    fn uniform_nodes() {
        let set = NodeSet::uniform(-6.0, 6.0, 13).unwrap();
        let expected: Vec<f64> = (-6..=6).map(f64::from).collect();
        assert_eq!(set.as_slice(), expected.as_slice());
        assert_eq!(set.spacing(), Some(1.0));

        let set = NodeSet::uniform(0.0, 1.0, 6).unwrap();
        assert!((set.spacing().unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(set.x_max(), 1.0);

        assert!(NodeSet::uniform(0.0, 0.0, 10).is_err());
        assert!(NodeSet::uniform(1.0, 0.0, 10).is_err());
        assert!(NodeSet::uniform(0.0, 1.0, 5).is_err());
    }

    #[test]
    fn uniform_spacing_tolerance() {
        let set = NodeSet::uniform(-6.0, 6.0, 121).unwrap();
        let h = set.spacing().unwrap();
        for w in set.as_slice().windows(2) {
            assert!((w[1] - w[0] - h).abs() <= 1e-12 * 12.0);
        }
    }

    #[test]
    fn rejects_unsorted_nodes() {
        let err = NodeSet::new(vec![0.0, 0.1, 0.3, 0.2, 0.4, 0.5]).unwrap_err();
        assert!(matches!(err, DiscretizationError::InvalidArgument(_)));
        assert!(NodeSet::new(vec![0.0, 0.1, 0.1, 0.2, 0.4, 0.5]).is_err());
    }

    #[test]
    fn fill_distance_examples() {
        assert_eq!(fill_distance(&[0.0, 1.0]), 0.5);
        assert!((fill_distance(&[0.0, 0.2, 1.0]) - 0.4).abs() < 1e-15);
        let set = NodeSet::uniform(-6.0, 6.0, 121).unwrap();
        assert!((set.fill_distance() - 0.05).abs() < 1e-14);
    }

    #[test]
    fn fill_distance_matches_brute_force_scan() {
        let nodes = [0.0, 0.2, 1.0];
        let brute = (0..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .map(|x| {
                nodes
                    .iter()
                    .map(|n| (x - n).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert!((fill_distance(&nodes) - brute).abs() < 1e-5);
    }

    #[test]
    fn condition_number_examples() {
        assert!((condition_number(&DMatrix::identity(7, 7)).unwrap() - 1.0).abs() < 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 10.0]));
        assert!((condition_number(&d).unwrap() - 10.0).abs() < 1e-13);
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(condition_number(&ones).unwrap(), f64::INFINITY);
        assert!(condition_number(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn singular_factorization_reports_pivot() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]);
        match factorize(m) {
            Err(DiscretizationError::Singular { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_matrix_structure() {
        let nodes = NodeSet::uniform(-1.0, 1.0, 9).unwrap();
        for (family, diag) in [
            (KernelFamily::Gaussian, 1.0),
            (KernelFamily::Multiquadric, 0.4),
            (KernelFamily::InverseMultiquadric, 2.5),
        ] {
            let kernel = KernelSpec::new(family, 0.4).unwrap();
            let a = interpolation_matrix(&nodes, &kernel);
            assert_eq!(a, a.transpose());
            for i in 0..a.nrows() {
                assert_eq!(a[(i, i)], diag);
            }
        }
    }

    #[test]
    fn narrow_gaussian_is_identity() {
        let nodes = NodeSet::uniform(-6.0, 6.0, 121).unwrap();
        let ops = Operators::assemble(
            &nodes,
            KernelSpec::new(KernelFamily::Gaussian, 5451.0).unwrap(),
        )
        .unwrap();
        let a = ops.interpolation_matrix();
        assert!((a - DMatrix::identity(121, 121)).amax() < 1e-23);
        assert!((ops.condition() - 1.0).abs() <= 1e-12);
        assert!(!ops.is_ill_conditioned());
    }

    #[test]
    fn differentiation_matrix_solves_defining_identity() {
        let nodes = NodeSet::uniform(-2.0, 2.0, 21).unwrap();
        let kernel = KernelSpec::new(KernelFamily::Multiquadric, 0.3).unwrap();
        let ops = Operators::assemble(&nodes, kernel).unwrap();
        for d in 1..=5 {
            let b = kernel_derivative_matrix(&nodes, &kernel, d).unwrap();
            let residual = ops.differentiation_matrix(d) * ops.interpolation_matrix() - &b;
            assert!(residual.amax() <= 1e-10 * b.amax(), "order {d}");
        }
    }

    #[test]
    fn interpolant_reproduces_nodal_data() {
        let nodes = NodeSet::uniform(0.0, 3.0, 16).unwrap();
        let kernel = KernelSpec::new(KernelFamily::InverseMultiquadric, 0.5).unwrap();
        let ops = Operators::assemble(&nodes, kernel).unwrap();
        let u: Vec<f64> = nodes
            .as_slice()
            .iter()
            .map(|x| (2.0 * x).sin() + x)
            .collect();
        let norm = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = ops.condition() * f64::EPSILON * norm * nodes.len() as f64;
        for (&x, &ui) in nodes.as_slice().iter().zip(&u) {
            assert!((ops.interpolate(&u, x) - ui).abs() <= tol);
        }
    }

    #[test]
    fn apply_matches_matrix_product() {
        let nodes = NodeSet::uniform(0.0, 1.0, 8).unwrap();
        let ops = Operators::assemble(
            &nodes,
            KernelSpec::new(KernelFamily::Gaussian, 20.0).unwrap(),
        )
        .unwrap();
        let u: Vec<f64> = (0..8).map(|i| (i as f64).cos()).collect();
        let expected = ops.differentiation_matrix(3) * nalgebra::DVector::from_column_slice(&u);
        let got = ops.apply(3, &u);
        for (a, b) in got.iter().zip(expected.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
