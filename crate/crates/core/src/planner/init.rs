use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::ControlVec;

/// Constant-velocity controls along a polyline of waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialTrajectory {
    pub controls: Vec<ControlVec>,
    /// Steps assigned to each segment.
    pub allocation: Vec<usize>,
    /// Some step needs a control norm above the bound.
    pub exceeds_bound: bool,
}

/// Allocates `horizon` steps to the polyline segments in proportion to
/// their length (at least one each, leftover steps to the earliest
/// segments) and moves along each segment at constant speed.
pub fn initial_trajectory(waypoints: &[[f64; 2]], horizon: usize, r_u: f64) -> Result<InitialTrajectory> {
    if waypoints.len() < 2 {
        return Err(Error::InvalidArgument(
            "initial trajectory needs at least two waypoints".into(),
        ));
    }
    let segments = waypoints.len() - 1;
    if horizon < segments {
        return Err(Error::InvalidArgument(
            "horizon shorter than the number of segments".into(),
        ));
    }
    let deltas: Vec<[f64; 2]> = waypoints
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .collect();
    let lengths: Vec<f64> = deltas.iter().map(|d| libm::hypot(d[0], d[1])).collect();
    let total: f64 = lengths.iter().sum();

    let mut allocation: Vec<usize> = if total > 0.0 {
        lengths
            .iter()
            .map(|l| (libm::floor(horizon as f64 * l / total) as usize).max(1))
            .collect()
    } else {
        alloc::vec![1; segments]
    };
    while allocation.iter().sum::<usize>() > horizon {
        // only reachable through the at-least-one clamp
        let (i, _) = allocation
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, n)| **n)
            .expect("non-empty allocation");
        allocation[i] -= 1;
    }
    let mut next = 0;
    while allocation.iter().sum::<usize>() < horizon {
        allocation[next % segments] += 1;
        next += 1;
    }

    let mut controls = Vec::with_capacity(horizon);
    for (d, &n) in deltas.iter().zip(&allocation) {
        let step = ControlVec::from([d[0] / n as f64, d[1] / n as f64]);
        controls.extend(core::iter::repeat_n(step, n));
    }
    let exceeds_bound = controls.iter().any(|u| u.norm() > r_u);
    Ok(InitialTrajectory {
        controls,
        allocation,
        exceeds_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::StateVec;
    use crate::models::ProcessModel;
    use crate::trajectory::rollout_nominal;

    const PATH: [[f64; 2]; 4] = [[-1.5, -0.5], [-1.4, 0.21], [-1.1, 1.369], [-1.0, 2.25]];

    #[test]
    fn waypoint_path_is_interpolated() {
        let init = initial_trajectory(&PATH, 7, 0.8).unwrap();
        assert_eq!(init.allocation, [2, 3, 2]);
        assert!(!init.exceeds_bound);
        let traj = rollout_nominal(
            &ProcessModel::SingleIntegrator,
            &StateVec::from(PATH[0]),
            &init.controls,
        )
        .unwrap();
        let mut index = 0;
        for (w, n) in PATH[1..].iter().zip(&init.allocation) {
            index += n;
            let x = &traj.states()[index];
            assert!((x[0] - w[0]).abs() < 1e-9 && (x[1] - w[1]).abs() < 1e-9);
        }
        let mid = &traj.states()[1];
        assert!((mid[0] + 1.45).abs() < 1e-12 && (mid[1] + 0.145).abs() < 1e-12);
    }

    #[test]
    fn straight_line_splits_evenly() {
        let init = initial_trajectory(&[[0.0, 0.0], [1.0, 2.0]], 4, 0.8).unwrap();
        assert_eq!(init.allocation, [4]);
        assert!(init.controls.iter().all(|u| u.as_slice() == [0.25, 0.5]));
    }

    #[test]
    fn identical_waypoints_give_zero_controls() {
        let init = initial_trajectory(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]], 5, 0.8).unwrap();
        assert_eq!(init.controls.len(), 5);
        assert!(init.controls.iter().all(|u| u.norm() == 0.0));
    }

    #[test]
    fn short_segments_still_get_a_step() {
        let init = initial_trajectory(&[[0.0, 0.0], [0.001, 0.0], [10.0, 0.0]], 3, 0.8).unwrap();
        assert_eq!(init.allocation, [1, 2]);
        assert!(init.exceeds_bound);
    }

    #[test]
    fn bad_inputs() {
        assert!(initial_trajectory(&PATH[..1], 7, 0.8).is_err());
        assert!(initial_trajectory(&PATH, 2, 0.8).is_err());
    }
}
