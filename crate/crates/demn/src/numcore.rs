//! Dense vector/matrix primitives, elementwise nonlinearities, the SGD update
//! step, and the finite-difference gradient oracle that validates every
//! hand-derived gradient in this crate.
//!
//! Everything is 64-bit floating point with no framework dependency. All
//! functions are pure except the in-place parameter update; identical inputs
//! produce bit-identical outputs on the same machine.

use crate::error::{Error, Result};

/// Norm threshold below which a vector counts as degenerate.
pub const NORM_EPS: f64 = 1e-12;

/// Row-major dense matrix of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::shape(
                "matrix",
                format!("{}x{} with {} entries", rows, cols, data.len()),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::shape("matrix", "empty row list"));
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::shape("matrix", "ragged rows"));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|x| *x *= a);
    }

    /// Elementwise `self += other`.
    pub fn add_assign(&mut self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(
                "matrix add",
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }
}

/// Inner product of two equal-length vectors.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::shape(
            "dot",
            format!("lengths {} vs {}", u.len(), v.len()),
        ));
    }
    Ok(u.iter().zip(v).map(|(a, b)| a * b).sum())
}

/// Row vector times matrix: returns `v M` with length `cols(M)`.
pub fn vec_mat(v: &[f64], m: &Matrix) -> Result<Vec<f64>> {
    if v.len() != m.rows {
        return Err(Error::shape(
            "vec_mat",
            format!("vector {} vs matrix {}x{}", v.len(), m.rows, m.cols),
        ));
    }
    let mut out = vec![0.0; m.cols];
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for (o, &mij) in out.iter_mut().zip(m.row(i)) {
            *o += vi * mij;
        }
    }
    Ok(out)
}

/// Matrix times column vector: returns `M x` with length `rows(M)`.
pub fn mat_vec(m: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.cols {
        return Err(Error::shape(
            "mat_vec",
            format!("matrix {}x{} vs vector {}", m.rows, m.cols, x.len()),
        ));
    }
    let mut out = vec![0.0; m.rows];
    for (o, row) in out.iter_mut().zip(0..m.rows) {
        *o = m.row(row).iter().zip(x).map(|(a, b)| a * b).sum();
    }
    Ok(out)
}

/// Transposed matrix times column vector: returns `M^T x` with length `cols(M)`.
pub fn mat_tvec(m: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.rows {
        return Err(Error::shape(
            "mat_tvec",
            format!("matrix {}x{} vs vector {}", m.rows, m.cols, x.len()),
        ));
    }
    let mut out = vec![0.0; m.cols];
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (o, &mij) in out.iter_mut().zip(m.row(i)) {
            *o += xi * mij;
        }
    }
    Ok(out)
}

/// Rank-one update `m += a b^T`, used by every hand-written backward pass.
pub fn add_outer(m: &mut Matrix, a: &[f64], b: &[f64]) {
    debug_assert_eq!(m.rows, a.len());
    debug_assert_eq!(m.cols, b.len());
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (mij, &bj) in m.row_mut(i).iter_mut().zip(b) {
            *mij += ai * bj;
        }
    }
}

/// `y += alpha * x`, elementwise.
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scales a vector to unit Euclidean length.
///
/// Inputs with norm below [`NORM_EPS`] are rejected as degenerate rather than
/// silently amplified.
pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>> {
    let norm = l2_norm(v);
    if !(norm > NORM_EPS) {
        return Err(Error::Degenerate {
            op: "l2_normalize",
            norm,
        });
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Numerically safe softmax: subtracts the max score before exponentiation.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::shape("softmax", "empty input"));
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::shape("softmax", "non-finite input"));
    }
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Elementwise hyperbolic tangent.
pub fn tanh_map(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.tanh()).collect()
}

/// Hinge-rank kernel: `sum_j max(0, margin - pos + neg_j)` plus the mask of
/// margin-violating terms. The mask drives gradient routing in the callers.
pub fn hinge_rank(pos: f64, negs: &[f64], margin: f64) -> (f64, Vec<bool>) {
    let mut loss = 0.0;
    let mut active = Vec::with_capacity(negs.len());
    for &n in negs {
        let term = margin - pos + n;
        if term > 0.0 {
            loss += term;
            active.push(true);
        } else {
            active.push(false);
        }
    }
    (loss, active)
}

/// One named block of trainable parameters with a same-shaped gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGroup {
    pub name: String,
    pub value: Matrix,
    pub grad: Matrix,
}

impl ParamGroup {
    pub fn new(name: impl Into<String>, value: Matrix) -> Self {
        let grad = Matrix::zeros(value.rows(), value.cols());
        ParamGroup {
            name: name.into(),
            value,
            grad,
        }
    }

    /// Wraps a plain vector as a 1-row group.
    pub fn vector(name: impl Into<String>, v: Vec<f64>) -> Self {
        let len = v.len();
        ParamGroup::new(name, Matrix::from_vec(1, len, v).expect("nonempty vector"))
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// In-place SGD update: `value -= lr * grad` for every group, then zeroes the
/// gradients. Rejects non-finite gradients instead of corrupting parameters.
pub fn sgd_step<'a, I>(groups: I, lr: f64) -> Result<()>
where
    I: IntoIterator<Item = &'a mut ParamGroup>,
{
    if !(lr > 0.0) || !lr.is_finite() {
        return Err(Error::Contract(format!("sgd_step: bad learning rate {lr}")));
    }
    for g in groups {
        if !g.grad.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite gradient in group `{}`",
                g.name
            )));
        }
        for (v, gr) in g.value.data_mut().iter_mut().zip(g.grad.data()) {
            *v -= lr * gr;
        }
        g.zero_grad();
    }
    Ok(())
}

/// Central finite differences over every coordinate of every group.
///
/// `loss` must be a deterministic function of the parameter values. The
/// returned matrices mirror the group shapes. This is the ground-truth oracle
/// for all analytic gradients in the crate; it must never share code with the
/// backward passes it checks.
pub fn finite_diff_grad<F>(params: &mut [ParamGroup], eps: f64, loss: F) -> Result<Vec<Matrix>>
where
    F: Fn(&[ParamGroup]) -> Result<f64>,
{
    if !(1e-7..=1e-4).contains(&eps) {
        return Err(Error::Oracle(format!("eps {eps:e} outside [1e-7, 1e-4]")));
    }
    let mut grads: Vec<Matrix> = params
        .iter()
        .map(|g| Matrix::zeros(g.value.rows(), g.value.cols()))
        .collect();
    for gi in 0..params.len() {
        for k in 0..params[gi].value.data().len() {
            let orig = params[gi].value.data()[k];
            params[gi].value.data_mut()[k] = orig + eps;
            let up = loss(params)?;
            params[gi].value.data_mut()[k] = orig - eps;
            let down = loss(params)?;
            params[gi].value.data_mut()[k] = orig;
            if !up.is_finite() || !down.is_finite() {
                return Err(Error::Oracle(format!(
                    "non-finite loss while probing `{}`[{}]",
                    params[gi].name, k
                )));
            }
            grads[gi].data_mut()[k] = (up - down) / (2.0 * eps);
        }
    }
    Ok(grads)
}

/// Worst relative disagreement between an analytic and a numeric gradient.
///
/// The denominator is floored so near-zero gradients are compared absolutely;
/// otherwise last-bit rounding in the difference quotient would dominate.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    debug_assert_eq!(analytic.len(), numeric.len());
    let mut worst = 0.0_f64;
    for (&a, &n) in analytic.iter().zip(numeric) {
        let err = (a - n).abs() / (a.abs() + n.abs()).max(1e-3);
        worst = worst.max(err);
    }
    worst
}
