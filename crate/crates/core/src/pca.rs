//! First principal component of a set of time series.
//!
//! Variables are the rows of the input, observations the columns. The
//! covariance is taken over mean-centered rows with the `1/(N-1)`
//! normalization, so the sample variance of [`PrincipalComponent::scores`]
//! equals the leading eigenvalue.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponent {
    /// Projection of the centered data onto the leading eigenvector.
    pub scores: Vec<f64>,
    /// Unit leading eigenvector, one weight per variable; the entry of
    /// largest magnitude is positive.
    pub loadings: Vec<f64>,
    /// Projection of the per-variable means onto `loadings`.
    pub mean_projection: f64,
    /// Leading covariance eigenvalue.
    pub variance: f64,
    /// Leading eigenvalue over the trace.
    pub explained: f64,
}

impl PrincipalComponent {
    /// Projection of the uncentered rows: `scores + mean_projection`.
    pub fn raw_scores(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s + self.mean_projection).collect()
    }
}

/// Leading principal component of `rows` (variables x observations).
pub fn pca_first_component(rows: &Matrix) -> Result<PrincipalComponent> {
    let (p, n) = (rows.rows(), rows.cols());
    if p == 0 {
        return Err(Error::ShapeMismatch("no variables".into()));
    }
    if n <= p {
        return Err(Error::InputTooShort { len: n, min: p + 1 });
    }
    let means: Vec<f64> = (0..p).map(|i| rows.row(i).iter().sum::<f64>() / n as f64).collect();
    let mut centered = rows.clone();
    for (i, m) in means.iter().enumerate() {
        centered.row_mut(i).iter_mut().for_each(|v| *v -= m);
    }
    let mut cov = centered.matmul_t(&centered)?;
    cov.data_mut().iter_mut().for_each(|v| *v /= (n - 1) as f64);
    let trace: f64 = (0..p).map(|i| cov[(i, i)]).sum();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    let (values, vectors) = symmetric_eigen(&cov)?;
    let mut loadings: Vec<f64> = (0..p).map(|i| vectors[(i, 0)]).collect();
    let lead = loadings.iter().copied().fold(0.0f64, |m, v| if libm::fabs(v) > libm::fabs(m) { v } else { m });
    if lead < 0.0 {
        loadings.iter_mut().for_each(|v| *v = -*v);
    }
    let mut scores = alloc::vec![0.0; n];
    for (i, w) in loadings.iter().enumerate() {
        for (s, x) in scores.iter_mut().zip(centered.row(i)) {
            *s += w * x;
        }
    }
    let mean_projection = loadings.iter().zip(&means).map(|(w, m)| w * m).sum();
    let variance = values[0].max(0.0);
    Ok(PrincipalComponent { scores, loadings, mean_projection, variance, explained: variance / trace })
}
