//! Kalman covariance propagation along a fixed nominal trajectory.
//!
//! Once the linearization trajectory is fixed the filter covariance no
//! longer depends on the measurements, so the whole sequence
//! `P⁺_0 .. P⁺_K` is a deterministic function of the controls.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, Matrix, StateVec};
use crate::models::{SensorKind, R_MIN};
use crate::trajectory::LinearizationSequence;

/// Posterior covariances `P⁺_0..P⁺_K` with their traces.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTrace {
    pub posteriors: Vec<CovMatrix>,
    pub traces: Vec<f64>,
    /// `Σ_{t=1..K} tr(P⁺_t)`; the prior at `t = 0` is excluded.
    pub cumulative: f64,
}

/// `P⁻ = A P⁺ Aᵀ + G Σ_ω Gᵀ`.
pub fn predict(p_plus: &CovMatrix, a: &Matrix, g: &Matrix, sigma_w: &CovMatrix) -> Result<CovMatrix> {
    let p = p_plus.matrix();
    if a.shape() != p.shape() || g.nrows() != p.nrows() || g.ncols() != sigma_w.dim() {
        return Err(Error::dim("predict", p.nrows(), a.nrows()));
    }
    let propagated = &(a * p) * &a.transpose();
    let noise = &(g * sigma_w.matrix()) * &g.transpose();
    Ok(CovMatrix::from_symmetrized(&(&propagated + &noise)))
}

/// Measurement update. Returns the innovation covariance
/// `S = H P⁻ Hᵀ + M Σ_ν Mᵀ` and `P⁺ = (I − P⁻ Hᵀ S⁻¹ H) P⁻`.
pub fn update(p_minus: &CovMatrix, h: &Matrix, m: &Matrix, sigma_nu: &CovMatrix) -> Result<(CovMatrix, CovMatrix)> {
    let p = p_minus.matrix();
    let n = p.nrows();
    if h.ncols() != n || m.shape() != (h.nrows(), sigma_nu.dim()) {
        return Err(Error::dim("update", n, h.ncols()));
    }
    let ht = h.transpose();
    let s = &(&(h * p) * &ht) + &(&(m * sigma_nu.matrix()) * &m.transpose());
    let s = s.symmetrize();
    // S⁻¹ H via Cholesky; S is SPD whenever Σ_ν is.
    let s_inv_h = s.solve_spd(h).map_err(|_| Error::Singular {
        condition: f64::INFINITY,
    })?;
    let gain_h = &(p * &ht) * &s_inv_h;
    let p_plus = &(&Matrix::identity(n) - &gain_h) * p;
    Ok((CovMatrix::from_symmetrized(&s), CovMatrix::from_symmetrized(&p_plus)))
}

/// Runs predict/update for `t = 1..K` starting from `P⁺_0 = p0`.
pub fn propagate(
    lin: &LinearizationSequence,
    sigma_w: &CovMatrix,
    sigma_nu: &CovMatrix,
    p0: &CovMatrix,
) -> Result<CovarianceTrace> {
    lin.validate()?;
    let k = lin.horizon();
    let mut posteriors = Vec::with_capacity(k + 1);
    let mut traces = Vec::with_capacity(k + 1);
    traces.push(p0.trace());
    posteriors.push(p0.clone());
    let mut cumulative = 0.0;
    for t in 1..=k {
        let prior = predict(&posteriors[t - 1], &lin.a[t - 1], &lin.g[t - 1], sigma_w)?;
        let (_, post) = update(&prior, &lin.h[t], &lin.m[t], sigma_nu)?;
        let tr = post.trace();
        cumulative += tr;
        traces.push(tr);
        posteriors.push(post);
    }
    Ok(CovarianceTrace {
        posteriors,
        traces,
        cumulative,
    })
}

/// Scalar parameters of the single-step closed form: diagonal prior
/// `diag(sx0, sy0)`, diagonal process noise `diag(swx, swy)` and scalar
/// sensor variance `snu`, one landmark at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneStepParams {
    pub sx0: f64,
    pub sy0: f64,
    pub swx: f64,
    pub swy: f64,
    pub snu: f64,
}

/// Closed-form `tr(P⁺_1)` after one predict/update step of the single
/// integrator observed from an origin landmark, with the Jacobian taken at
/// the nominal state `x1`.
pub fn analytic_one_step_trace(kind: SensorKind, x1: &StateVec, params: OneStepParams) -> Result<f64> {
    if x1.len() != 2 {
        return Err(Error::dim("analytic_one_step_trace", 2, x1.len()));
    }
    let (x, y) = (x1[0], x1[1]);
    let r2 = x * x + y * y;
    let r = libm::sqrt(r2);
    if r < R_MIN {
        return Err(Error::NearLandmark {
            landmark: 0,
            r_min: R_MIN,
        });
    }
    let OneStepParams {
        sx0,
        sy0,
        swx,
        swy,
        snu,
    } = params;
    let px = sx0 + swx;
    let py = sy0 + swy;
    let value = match kind {
        SensorKind::Range => (px * py + (px + py) * snu) / (px * x * x / r2 + py * y * y / r2 + snu),
        SensorKind::RangeSquared => (px * py * r2 + (px + py) * snu) / (px * x * x + py * y * y + snu),
    };
    Ok(value)
}
