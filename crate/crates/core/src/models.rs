//! Process and observation models with analytic Jacobians.
//!
//! The process is the planar single integrator `x_{t+1} = x_t + u_t + w_t`.
//! Observations are ranges (or half squared ranges) to a set of fixed
//! landmarks, either stacked into one measurement vector or reduced to the
//! nearest landmark.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{ControlVec, Matrix, ObsVec, StateVec};
use crate::trajectory::{LinearizationSequence, NominalTrajectory};

/// Below this distance the range Jacobian is treated as undefined.
pub const R_MIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProcessModel {
    #[default]
    SingleIntegrator,
}

impl ProcessModel {
    pub fn state_dim(&self) -> usize {
        match self {
            ProcessModel::SingleIntegrator => 2,
        }
    }

    pub fn control_dim(&self) -> usize {
        match self {
            ProcessModel::SingleIntegrator => 2,
        }
    }

    fn check(&self, x: &StateVec, u: &ControlVec) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::dim("process state", self.state_dim(), x.len()));
        }
        if u.len() != self.control_dim() {
            return Err(Error::dim("process control", self.control_dim(), u.len()));
        }
        Ok(())
    }

    /// `f(x, u, w)`.
    pub fn step(&self, x: &StateVec, u: &ControlVec, w: &StateVec) -> Result<StateVec> {
        self.check(x, u)?;
        if w.len() != self.state_dim() {
            return Err(Error::dim("process noise", self.state_dim(), w.len()));
        }
        match self {
            ProcessModel::SingleIntegrator => Ok(&(x + u) + w),
        }
    }

    /// `(A, B, G)`, the Jacobians of `f` with respect to state, control and
    /// process noise at `(x, u, 0)`.
    pub fn jacobians(&self, x: &StateVec, u: &ControlVec) -> Result<(Matrix, Matrix, Matrix)> {
        self.check(x, u)?;
        match self {
            ProcessModel::SingleIntegrator => Ok((Matrix::identity(2), Matrix::identity(2), Matrix::identity(2))),
        }
    }
}

/// Planar landmark positions, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet(Vec<[f64; 2]>);

impl LandmarkSet {
    /// Requires at least one landmark, finite coordinates, and pairwise
    /// separation above 1e-9.
    pub fn new(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("landmark set is empty".into()));
        }
        for (i, p) in positions.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidArgument(format!("landmark {i} is not finite")));
            }
            for (j, q) in positions[..i].iter().enumerate() {
                if libm::hypot(p[0] - q[0], p[1] - q[1]) <= 1e-9 {
                    return Err(Error::InvalidArgument(format!("landmarks {j} and {i} coincide")));
                }
            }
        }
        Ok(LandmarkSet(positions))
    }

    /// A single landmark at the origin.
    pub fn origin() -> Self {
        LandmarkSet(alloc::vec![[0.0, 0.0]])
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    /// `h = r`.
    Range,
    /// `h = r² / 2`.
    RangeSquared,
}

/// How several landmarks combine into one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combine {
    /// One component per landmark.
    #[default]
    Stacked,
    /// A single measurement of the closest landmark.
    Nearest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    pub kind: SensorKind,
    pub landmarks: LandmarkSet,
    pub combine: Combine,
}

impl ObservationModel {
    pub fn new(kind: SensorKind, landmarks: LandmarkSet) -> Self {
        ObservationModel {
            kind,
            landmarks,
            combine: Combine::Stacked,
        }
    }

    pub fn with_combine(mut self, combine: Combine) -> Self {
        self.combine = combine;
        self
    }

    /// Measurement dimension `n_z`.
    pub fn obs_dim(&self) -> usize {
        match self.combine {
            Combine::Stacked => self.landmarks.len(),
            Combine::Nearest => 1,
        }
    }

    fn offset(x: &StateVec, l: &[f64; 2]) -> (f64, f64) {
        (x[0] - l[0], x[1] - l[1])
    }

    /// Indices of the landmarks that contribute a measurement at `x`.
    fn contributing(&self, x: &StateVec) -> Vec<usize> {
        match self.combine {
            Combine::Stacked => (0..self.landmarks.len()).collect(),
            Combine::Nearest => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, l) in self.landmarks.positions().iter().enumerate() {
                    let (dx, dy) = Self::offset(x, l);
                    let d = dx * dx + dy * dy;
                    // strict: ties go to the lower index
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                alloc::vec![best]
            }
        }
    }

    fn check(&self, x: &StateVec) -> Result<()> {
        if x.len() != 2 {
            return Err(Error::dim("observation state", 2, x.len()));
        }
        Ok(())
    }

    /// `h(x, 0)`.
    pub fn observe(&self, x: &StateVec) -> Result<ObsVec> {
        self.check(x)?;
        let landmarks = self.landmarks.positions();
        let z = self
            .contributing(x)
            .into_iter()
            .map(|i| {
                let (dx, dy) = Self::offset(x, &landmarks[i]);
                match self.kind {
                    SensorKind::Range => libm::hypot(dx, dy),
                    SensorKind::RangeSquared => 0.5 * (dx * dx + dy * dy),
                }
            })
            .collect();
        Ok(ObsVec::new(z))
    }

    /// `H = ∂h/∂x`, one row per measurement component.
    pub fn jacobian(&self, x: &StateVec) -> Result<Matrix> {
        self.check(x)?;
        let landmarks = self.landmarks.positions();
        let rows = self.contributing(x);
        let mut h = Matrix::zeros(rows.len(), 2);
        for (row, &i) in rows.iter().enumerate() {
            let (dx, dy) = Self::offset(x, &landmarks[i]);
            match self.kind {
                SensorKind::Range => {
                    let r = libm::hypot(dx, dy);
                    if r < R_MIN {
                        return Err(Error::NearLandmark {
                            landmark: i,
                            r_min: R_MIN,
                        });
                    }
                    h[(row, 0)] = dx / r;
                    h[(row, 1)] = dy / r;
                }
                SensorKind::RangeSquared => {
                    h[(row, 0)] = dx;
                    h[(row, 1)] = dy;
                }
            }
        }
        Ok(h)
    }

    /// `M = ∂h/∂ν`; additive noise, so the identity.
    pub fn noise_jacobian(&self) -> Matrix {
        Matrix::identity(self.obs_dim())
    }
}

/// Evaluates every Jacobian along `traj`.
pub fn linearize_trajectory(
    process: &ProcessModel,
    obs: &ObservationModel,
    traj: &NominalTrajectory,
) -> Result<LinearizationSequence> {
    let k = traj.horizon();
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    let mut g = Vec::with_capacity(k);
    for (x, u) in traj.states().iter().zip(traj.controls()) {
        let (at, bt, gt) = process.jacobians(x, u)?;
        a.push(at);
        b.push(bt);
        g.push(gt);
    }
    let h = traj
        .states()
        .iter()
        .map(|x| obs.jacobian(x))
        .collect::<Result<Vec<_>>>()?;
    let m = (0..=k).map(|_| obs.noise_jacobian()).collect();
    Ok(LinearizationSequence { a, b, g, h, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::rollout_nominal;
    use alloc::vec;

    fn v(x: f64, y: f64) -> StateVec {
        StateVec::from([x, y])
    }

    fn origin_model(kind: SensorKind) -> ObservationModel {
        ObservationModel::new(kind, LandmarkSet::origin())
    }

    #[test]
    fn process_step_is_additive() {
        let p = ProcessModel::SingleIntegrator;
        assert_eq!(p.step(&v(1.0, 2.0), &v(0.5, -1.0), &v(0.0, 0.0)).unwrap(), v(1.5, 1.0));
        assert_eq!(p.step(&v(1.0, 2.0), &v(0.0, 0.0), &v(0.0, 0.0)).unwrap(), v(1.0, 2.0));
        let x = p.step(&v(0.0, 0.0), &v(0.8, 0.0), &v(0.1, -0.1)).unwrap();
        assert!((x[0] - 0.9).abs() < 1e-15 && (x[1] + 0.1).abs() < 1e-15);
        assert!(p.step(&StateVec::from([1.0]), &v(0.0, 0.0), &v(0.0, 0.0)).is_err());
    }

    #[test]
    fn process_jacobians_are_identity() {
        let p = ProcessModel::SingleIntegrator;
        let (a, b, g) = p.jacobians(&v(3.0, -1.0), &v(0.2, 0.1)).unwrap();
        assert_eq!(a, Matrix::identity(2));
        assert_eq!(b, Matrix::identity(2));
        assert_eq!(g, Matrix::identity(2));
        let (a2, _, _) = p.jacobians(&v(-7.0, 4.0), &v(0.0, 0.0)).unwrap();
        assert_eq!(a, a2);
    }

    #[test]
    fn observe_examples() {
        assert_eq!(origin_model(SensorKind::Range).observe(&v(3.0, 4.0)).unwrap()[0], 5.0);
        assert_eq!(
            origin_model(SensorKind::RangeSquared).observe(&v(3.0, 4.0)).unwrap()[0],
            12.5
        );
        let two = ObservationModel::new(
            SensorKind::Range,
            LandmarkSet::new(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap(),
        );
        let z = two.observe(&v(1.0, 1.0)).unwrap();
        assert_eq!(z.len(), 2);
        assert!((z[0] - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(z[1], 1.0);
        let nearest = two.with_combine(Combine::Nearest);
        assert_eq!(nearest.observe(&v(1.0, 1.0)).unwrap().as_slice(), &[1.0]);
        assert_eq!(nearest.jacobian(&v(1.0, 1.0)).unwrap().shape(), (1, 2));
    }

    #[test]
    fn jacobian_examples() {
        let h = origin_model(SensorKind::Range).jacobian(&v(3.0, 4.0)).unwrap();
        assert!((h[(0, 0)] - 0.6).abs() < 1e-15 && (h[(0, 1)] - 0.8).abs() < 1e-15);
        let h = origin_model(SensorKind::RangeSquared).jacobian(&v(3.0, 4.0)).unwrap();
        assert_eq!(h.as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn range_jacobian_on_landmark_is_an_error() {
        let model = ObservationModel::new(
            SensorKind::Range,
            LandmarkSet::new(vec![[0.0, 0.0], [0.5, 0.5]]).unwrap(),
        );
        assert_eq!(
            model.jacobian(&v(0.5, 0.5)),
            Err(Error::NearLandmark {
                landmark: 1,
                r_min: R_MIN
            })
        );
        // zero distance is still a valid measurement
        assert_eq!(model.observe(&v(0.5, 0.5)).unwrap()[1], 0.0);
        // range-squared has no singularity
        let rs = ObservationModel::new(SensorKind::RangeSquared, model.landmarks.clone());
        assert!(rs.jacobian(&v(0.5, 0.5)).is_ok());
    }

    #[test]
    fn landmark_set_validation() {
        assert!(LandmarkSet::new(vec![]).is_err());
        assert!(LandmarkSet::new(vec![[0.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(LandmarkSet::new(vec![[f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn jacobian_matches_central_differences_for_scenario_a_landmarks() {
        let landmarks = LandmarkSet::new(vec![[0.2, 0.0], [0.5, 0.3], [2.0, 1.0]]).unwrap();
        let x = v(-1.2, 0.7);
        let step = 1e-6;
        for kind in [SensorKind::Range, SensorKind::RangeSquared] {
            let model = ObservationModel::new(kind, landmarks.clone());
            let h = model.jacobian(&x).unwrap();
            for j in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += step;
                xm[j] -= step;
                let zp = model.observe(&xp).unwrap();
                let zm = model.observe(&xm).unwrap();
                for i in 0..3 {
                    let fd = (zp[i] - zm[i]) / (2.0 * step);
                    assert!((fd - h[(i, j)]).abs() < 1e-6, "{kind:?} H[{i},{j}]");
                }
            }
        }
    }

    #[test]
    fn linearization_along_trajectory() {
        let p = ProcessModel::SingleIntegrator;
        let obs = origin_model(SensorKind::Range);
        let traj = rollout_nominal(&p, &v(-1.5, -0.5), &vec![v(0.0, 0.0); 7]).unwrap();
        let lin = linearize_trajectory(&p, &obs, &traj).unwrap();
        lin.validate().unwrap();
        assert_eq!(lin.a.len(), 7);
        assert_eq!(lin.h.len(), 8);
        assert!(lin.a.iter().all(|a| *a == Matrix::identity(2)));
        assert!(lin.h.windows(2).all(|w| w[0] == w[1]));
        assert!(lin.m.iter().all(|m| *m == Matrix::identity(1)));
    }
}
