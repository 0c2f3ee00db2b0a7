use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, gemm, Matrix};

/// Affine map `y = x W + b`, fitted by ridge regression.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    /// `d_in x d_out`.
    pub w: Matrix,
    pub b: Vec<f64>,
    pub alpha: f64,
}

impl RidgeModel {
    pub fn input_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn identity(n: usize) -> Self {
        Self { w: Matrix::identity(n), b: alloc::vec![0.0; n], alpha: 0.0 }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "ridge input {} for dimension {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut y = self.b.clone();
        for (xi, row) in x.iter().zip(self.w.data().chunks_exact(self.output_dim())) {
            for (yj, wij) in y.iter_mut().zip(row) {
                *yj += xi * wij;
            }
        }
        Ok(y)
    }

    /// Row-wise prediction for a batch (`n x d_in`).
    pub fn predict_batch(&self, x: &Matrix) -> Result<Matrix> {
        let mut y = Matrix::zeros(x.rows(), self.output_dim());
        for r in 0..x.rows() {
            y.row_mut(r).copy_from_slice(&self.b);
        }
        gemm(1.0, x, false, &self.w, false, 1.0, &mut y)?;
        Ok(y)
    }

    /// `||X W + b - Y||_F^2 + alpha ||W||_F^2`.
    pub fn objective(&self, x: &Matrix, y: &Matrix) -> Result<f64> {
        let p = self.predict_batch(x)?;
        let resid: f64 = p.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(resid + self.alpha * self.w.frobenius_sq())
    }
}

fn centered(m: &Matrix) -> (Matrix, Vec<f64>) {
    let means = m.col_means();
    let mut c = m.clone();
    for r in 0..c.rows() {
        for (v, mu) in c.row_mut(r).iter_mut().zip(&means) {
            *v -= mu;
        }
    }
    (c, means)
}

/// Ridge regression on column-centered data:
/// `W = (Xc^T Xc + alpha I)^-1 Xc^T Yc`, `b = mean(Y) - mean(X) W`.
pub fn ridge_fit(x: &Matrix, y: &Matrix, alpha: f64) -> Result<RidgeModel> {
    if x.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.rows() != x.rows() {
        return Err(Error::ShapeMismatch(alloc::format!("{} inputs but {} targets", x.rows(), y.rows())));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidRange { name: "alpha", value: alpha, range: "[0, inf)" });
    }
    let (xc, xm) = centered(x);
    let (yc, ym) = centered(y);
    let d = x.cols();
    let mut gram = Matrix::zeros(d, d);
    gemm(1.0, &xc, true, &xc, false, 0.0, &mut gram)?;
    for i in 0..d {
        gram[(i, i)] += alpha;
    }
    let mut rhs = Matrix::zeros(d, y.cols());
    gemm(1.0, &xc, true, &yc, false, 0.0, &mut rhs)?;
    let w = cholesky_solve(&gram, &rhs)?;
    let mut b = ym;
    for (i, mu) in xm.iter().enumerate() {
        for (bj, wij) in b.iter_mut().zip(w.row(i)) {
            *bj -= mu * wij;
        }
    }
    if !w.is_finite() {
        return Err(Error::SingularSystem);
    }
    Ok(RidgeModel { w, b, alpha })
}
