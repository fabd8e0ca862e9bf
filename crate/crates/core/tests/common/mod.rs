//! Reference computations shared by the oracle and acceptance targets.

use decision_forecast::dataset::SupervisedSequence;
use nalgebra::DMatrix;
use num::{BigRational, ToPrimitive, Zero};

/// Stacked `[1, x_t, …, x_{t-p+1}]` rows with zero padding, built without the library.
pub fn oracle_design(seqs: &[SupervisedSequence], lag: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = seqs[0].inputs[0].len();
    let a = seqs[0].targets[0].len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in seqs {
        for t in 0..s.inputs.len() {
            xs.push(1.0);
            for k in 0..lag {
                if t >= k {
                    xs.extend_from_slice(&s.inputs[t - k]);
                } else {
                    xs.extend(std::iter::repeat_n(0.0, d));
                }
            }
            ys.extend_from_slice(&s.targets[t]);
        }
    }
    let n = ys.len() / a;
    (DMatrix::from_row_slice(n, 1 + lag * d, &xs), DMatrix::from_row_slice(n, a, &ys))
}

/// `(XᵀX + λI)⁻¹ XᵀY` in exact rational arithmetic (Gauss-Jordan on the
/// augmented normal equations), rounded to `f64` at the end.
pub fn exact_normal_equations(x: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let q = |v: f64| BigRational::from_float(v).unwrap();
    let (n, d, a) = (x.nrows(), x.ncols(), y.ncols());
    let mut g = vec![vec![BigRational::zero(); d + a]; d];
    for i in 0..n {
        let xi: Vec<BigRational> = (0..d).map(|p| q(x[(i, p)])).collect();
        for p in 0..d {
            if xi[p].is_zero() {
                continue;
            }
            for r in 0..d {
                g[p][r] += &xi[p] * &xi[r];
            }
            for o in 0..a {
                g[p][d + o] += &xi[p] * q(y[(i, o)]);
            }
        }
    }
    for (p, row) in g.iter_mut().enumerate() {
        row[p] += q(lambda);
    }
    for c in 0..d {
        let pivot = g[c][c].clone();
        for v in g[c].iter_mut() {
            *v = &*v / &pivot;
        }
        let pivot_row = g[c].clone();
        for (r, row) in g.iter_mut().enumerate() {
            if r == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
    }
    DMatrix::from_fn(d, a, |p, o| g[p][d + o].to_f64().unwrap())
}
