//! Dense linear algebra and optimisation primitives shared by the predictors.
//!
//! Everything is `f64` and row-major. Functions are pure: they take inputs by
//! reference and return fresh values, so results are bit-reproducible for
//! identical inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ridge damping added to the normal equations in [`solve_ols`].
pub const OLS_RIDGE: f64 = 1e-8;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * x`, checked.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows];
        self.mul_vec_acc(x, &mut out);
        Ok(out)
    }

    /// `out += self * x`. Shapes are the caller's responsibility.
    #[inline]
    pub fn mul_vec_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o += dot(self.row(r), x);
        }
    }

    /// `out += selfᵀ * y`.
    #[inline]
    pub fn mul_t_vec_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
    }

    /// `self += u vᵀ`.
    #[inline]
    pub fn add_outer(&mut self, u: &[f64], v: &[f64]) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for (r, &ur) in u.iter().enumerate() {
            if ur == 0.0 {
                continue;
            }
            let dst = &mut self.data[r * self.cols..(r + 1) * self.cols];
            for (d, b) in dst.iter_mut().zip(v) {
                *d += ur * b;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::Dimension("softmax of an empty vector".into()));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("softmax of non-finite logits".into()));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Relative size below which a pivoted QR column counts as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares coefficients `B` minimising `‖X B − Y‖²`, with ridge damping
/// [`OLS_RIDGE`] on the normal equations so collinear designs stay solvable.
///
/// The result solves `(XᵀX + λI) B = XᵀY` without forming `XᵀX`. A pivoted
/// Householder QR of `X` first reduces the problem to `R B ≈ QᵀY`; trailing
/// columns whose residual norm falls below [`RANK_TOLERANCE`] of the largest
/// are treated as exactly dependent, so round-off in those directions is not
/// amplified by `1/λ`. The reduced problem `[R; √λ I] B ≈ [QᵀY; 0]` is then
/// solved by a second QR.
pub fn solve_ols(design: &Mat, targets: &Mat) -> Result<Mat> {
    let (n, d) = design.shape();
    let m = targets.cols();
    if n == 0 || d == 0 {
        return Err(Error::Dimension(format!("empty design {n}x{d}")));
    }
    if targets.rows() != n {
        return Err(Error::Dimension(format!(
            "design has {n} rows but targets have {}",
            targets.rows()
        )));
    }
    if !design.is_finite() || !targets.is_finite() {
        return Err(Error::Numeric("least-squares inputs are not finite".into()));
    }

    let mut x = ColMajor::from_mat(design, n);
    let mut y = ColMajor::from_mat(targets, n);
    let (perm, rank) = householder(&mut x, &mut y, true);

    // reduced damped problem in pivoted column order
    let rows = rank + d;
    let mut a = ColMajor::zeros(rows, d);
    let mut b = ColMajor::zeros(rows, m);
    for c in 0..d {
        for r in 0..rank.min(c + 1) {
            a.set(r, c, x.get(r, c));
        }
        a.set(rank + c, c, OLS_RIDGE.sqrt());
    }
    for c in 0..m {
        for r in 0..rank {
            b.set(r, c, y.get(r, c));
        }
    }
    householder(&mut a, &mut b, false);

    let mut coef = Mat::zeros(d, m);
    for c in 0..m {
        let mut sol = vec![0.0; d];
        for i in (0..d).rev() {
            let mut s = b.get(i, c);
            for (k, sk) in sol.iter().enumerate().skip(i + 1) {
                s -= a.get(i, k) * sk;
            }
            sol[i] = s / a.get(i, i);
        }
        for (j, v) in sol.into_iter().enumerate() {
            coef.set(perm[j], c, v);
        }
    }
    if !coef.is_finite() {
        return Err(Error::Numeric("least-squares solution is not finite".into()));
    }
    Ok(coef)
}

/// Column-major scratch matrix for the QR sweeps.
struct ColMajor {
    rows: usize,
    data: Vec<f64>,
}

impl ColMajor {
    fn zeros(rows: usize, cols: usize) -> Self {
        ColMajor {
            rows,
            data: vec![0.0; rows * cols],
        }
    }

    fn from_mat(m: &Mat, rows: usize) -> Self {
        let mut out = ColMajor::zeros(rows, m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.set(r, c, m.get(r, c));
            }
        }
        out
    }

    fn cols(&self) -> usize {
        self.data.len() / self.rows
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.rows + r] = v;
    }

    fn col_from(&mut self, c: usize, r: usize) -> &mut [f64] {
        &mut self.data[c * self.rows + r..(c + 1) * self.rows]
    }
}

/// In-place Householder triangularisation of `a`, applying the same
/// reflections to `b`. With `pivot`, columns are swapped to put the largest
/// remaining norm first and the sweep stops at numerical rank. Returns the
/// column permutation and the rank.
fn householder(a: &mut ColMajor, b: &mut ColMajor, pivot: bool) -> (Vec<usize>, usize) {
    let (rows, cols) = (a.rows, a.cols());
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut first_norm = 0.0;
    for j in 0..steps {
        if pivot {
            let norms: Vec<f64> = (j..cols).map(|c| l2_norm(a.col_from(c, j))).collect();
            let (best, &norm) = norms
                .iter()
                .enumerate()
                .fold((0, &norms[0]), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
            if j == 0 {
                first_norm = norm;
            }
            if norm <= RANK_TOLERANCE * first_norm || norm == 0.0 {
                return (perm, j);
            }
            let best = best + j;
            if best != j {
                for r in 0..rows {
                    let (u, v) = (a.get(r, j), a.get(r, best));
                    a.set(r, j, v);
                    a.set(r, best, u);
                }
                perm.swap(j, best);
            }
        }
        let col = a.col_from(j, j);
        let norm = l2_norm(col);
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[0] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let reflect = |x: &mut [f64]| {
            let s = 2.0 * dot(&v, x) / vnorm2;
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= s * vi;
            }
        };
        for c in j..cols {
            reflect(a.col_from(c, j));
        }
        for c in 0..b.cols() {
            reflect(b.col_from(c, j));
        }
    }
    (perm, steps)
}

/// Moment accumulators and hyperparameters for one Adam-optimised parameter block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Mat,
    pub second_moment: Mat,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    pub const DEFAULT_LR: f64 = 0.01;

    /// Fresh state with β1=0.9, β2=0.999, ε=1e-8.
    pub fn new(rows: usize, cols: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: Mat::zeros(rows, cols),
            second_moment: Mat::zeros(rows, cols),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }
}

/// One bias-corrected Adam update.
///
/// An all-zero gradient still advances the moments and the step counter but
/// leaves the parameters bit-identical.
pub fn adam_step(param: &Mat, grad: &Mat, state: &AdamState) -> Result<(Mat, AdamState)> {
    if param.shape() != grad.shape()
        || param.shape() != state.first_moment.shape()
        || param.shape() != state.second_moment.shape()
    {
        return Err(Error::Dimension(format!(
            "adam shapes differ: param {:?}, grad {:?}, moments {:?}/{:?}",
            param.shape(),
            grad.shape(),
            state.first_moment.shape(),
            state.second_moment.shape()
        )));
    }
    let mut next = state.clone();
    next.step_count += 1;
    let t = next.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let zero_grad = grad.data.iter().all(|&g| g == 0.0);

    let mut out = param.clone();
    for k in 0..param.data.len() {
        let g = grad.data[k];
        let m = b1 * state.first_moment.data[k] + (1.0 - b1) * g;
        let v = b2 * state.second_moment.data[k] + (1.0 - b2) * g * g;
        next.first_moment.data[k] = m;
        next.second_moment.data[k] = v;
        if !zero_grad {
            let m_hat = m / c1;
            let v_hat = v / c2;
            out.data[k] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok((out, next))
}

/// Central-difference gradient `(f(p + h eᵢ) − f(p − h eᵢ)) / 2h`.
pub fn finite_diff_grad<F>(loss_fn: F, params: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::Numeric(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = loss_fn(&probe);
        probe[i] = orig - h;
        let down = loss_fn(&probe);
        probe[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss probing coordinate {i}")));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}
