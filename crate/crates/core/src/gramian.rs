//! Observability Gramian, standard Fisher information, and the scalar
//! measures used as planning objectives.

use core::fmt;
use core::str::FromStr;

use alloc::string::String;

use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, Matrix};
use crate::trajectory::LinearizationSequence;

/// Objective value substituted when a measure would divide by a vanishing
/// eigenvalue.
pub const BIG: f64 = 1e12;

/// Eigenvalues below `EIGEN_FLOOR · max(1, λ_max)` count as zero.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GramianOptions {
    /// Include the observation Jacobian at `t = 0` in the sum.
    pub include_initial: bool,
}

impl Default for GramianOptions {
    fn default() -> Self {
        GramianOptions { include_initial: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramianKind {
    Og,
    Sfim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramianResult {
    pub matrix: Matrix,
    /// Control horizon `K` of the underlying trajectory.
    pub horizon: usize,
    /// Number of observation steps summed.
    pub steps: usize,
    pub kind: GramianKind,
}

/// `Σ_t Φ_tᵀ H_tᵀ W H_t Φ_t` over the included steps, where
/// `Φ_t = A_{t-1} ⋯ A_0` and `Φ_0 = I`.
fn accumulate(lin: &LinearizationSequence, weight: Option<&Matrix>, opts: GramianOptions) -> Result<(Matrix, usize)> {
    lin.validate()?;
    let nx = lin.state_dim();
    let k = lin.horizon();
    let first = if opts.include_initial { 0 } else { 1 };
    let mut transition = Matrix::identity(nx);
    let mut sum = Matrix::zeros(nx, nx);
    for t in 0..=k {
        if t > 0 {
            transition = &lin.a[t - 1] * &transition;
        }
        if t < first {
            continue;
        }
        let ht = &lin.h[t] * &transition;
        let term = match weight {
            Some(w) => {
                if w.shape() != (ht.nrows(), ht.nrows()) {
                    return Err(Error::dim("sfim noise weight", ht.nrows(), w.nrows()));
                }
                &(&ht.transpose() * w) * &ht
            }
            None => &ht.transpose() * &ht,
        };
        sum = &sum + &term;
    }
    Ok((sum.symmetrize(), k + 1 - first))
}

/// Observability Gramian of the linearized system along the trajectory.
pub fn observability_gramian(lin: &LinearizationSequence, opts: GramianOptions) -> Result<GramianResult> {
    let (matrix, steps) = accumulate(lin, None, opts)?;
    Ok(GramianResult {
        matrix,
        horizon: lin.horizon(),
        steps,
        kind: GramianKind::Og,
    })
}

/// Standard Fisher information: the Gramian weighted by `Σ_ν⁻¹`.
pub fn sfim(lin: &LinearizationSequence, sigma_nu: &CovMatrix, opts: GramianOptions) -> Result<GramianResult> {
    let weight = sigma_nu.matrix().inverse()?;
    let (matrix, steps) = accumulate(lin, Some(&weight), opts)?;
    Ok(GramianResult {
        matrix,
        horizon: lin.horizon(),
        steps,
        kind: GramianKind::Sfim,
    })
}

/// Scalar functions of a Gramian used as objectives to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    DetInverse,
    LogDetInverse,
    TraceInverse,
    NegTrace,
    InvMinEig,
    InvMaxEig,
    ConditionNumber,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 7] = [
        MeasureKind::DetInverse,
        MeasureKind::LogDetInverse,
        MeasureKind::TraceInverse,
        MeasureKind::NegTrace,
        MeasureKind::InvMinEig,
        MeasureKind::InvMaxEig,
        MeasureKind::ConditionNumber,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::DetInverse => "det_inverse",
            MeasureKind::LogDetInverse => "log_det_inverse",
            MeasureKind::TraceInverse => "trace_inverse",
            MeasureKind::NegTrace => "neg_trace",
            MeasureKind::InvMinEig => "inv_min_eig",
            MeasureKind::InvMaxEig => "inv_max_eig",
            MeasureKind::ConditionNumber => "condition_number",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(String::from("unknown measure: ") + s))
    }
}

/// A measure value, flagged when the eigen-floor sentinel was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureValue {
    pub value: f64,
    pub degenerate: bool,
}

impl MeasureValue {
    fn ok(value: f64) -> Self {
        MeasureValue {
            value,
            degenerate: false,
        }
    }

    fn sentinel() -> Self {
        MeasureValue {
            value: BIG,
            degenerate: true,
        }
    }
}

/// Evaluates `kind` on the eigenvalues of `g`.
pub fn gramian_measure(g: &Matrix, kind: MeasureKind) -> MeasureValue {
    let eig = g.symmetric_eigen();
    let lmax = eig.max();
    let lmin = eig.min();
    let floor = EIGEN_FLOOR * lmax.max(1.0);
    let singular = lmin < floor;
    match kind {
        MeasureKind::NegTrace => MeasureValue::ok(-eig.values.iter().sum::<f64>()),
        MeasureKind::InvMaxEig if lmax < floor => MeasureValue::sentinel(),
        MeasureKind::InvMaxEig => MeasureValue::ok(1.0 / lmax),
        _ if singular => MeasureValue::sentinel(),
        MeasureKind::DetInverse => MeasureValue::ok(1.0 / eig.values.iter().product::<f64>()),
        MeasureKind::LogDetInverse => MeasureValue::ok(-eig.values.iter().map(|l| libm::log(*l)).sum::<f64>()),
        MeasureKind::TraceInverse => MeasureValue::ok(eig.values.iter().map(|l| 1.0 / l).sum()),
        MeasureKind::InvMinEig => MeasureValue::ok(1.0 / lmin),
        MeasureKind::ConditionNumber => MeasureValue::ok(lmax / lmin),
    }
}

impl GramianResult {
    pub fn measure(&self, kind: MeasureKind) -> MeasureValue {
        gramian_measure(&self.matrix, kind)
    }
}
