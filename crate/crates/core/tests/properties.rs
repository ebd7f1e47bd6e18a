use obsplan_core::gramian::{gramian_measure, observability_gramian, sfim, GramianOptions, MeasureKind};
use obsplan_core::models::{linearize_trajectory, LandmarkSet, ObservationModel, ProcessModel, SensorKind};
use obsplan_core::riccati::{analytic_one_step_trace, predict, propagate, update, OneStepParams};
use obsplan_core::{rollout_nominal, ControlVec, CovMatrix, LinearizationSequence, Matrix, StateVec};
use proptest::prelude::*;

const SI: ProcessModel = ProcessModel::SingleIntegrator;

fn scenario_a_landmarks() -> LandmarkSet {
    LandmarkSet::new(vec![[0.2, 0.0], [0.5, 0.3], [2.0, 1.0]]).unwrap()
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    [-3.0..3.0f64, -3.0..3.0f64]
}

fn bounded_control() -> impl Strategy<Value = [f64; 2]> {
    (0.0..0.8f64, 0.0..core::f64::consts::TAU).prop_map(|(r, a)| [r * a.cos(), r * a.sin()])
}

fn controls(k: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(bounded_control(), k)
}

fn lin(obs: &ObservationModel, x0: [f64; 2], controls: &[[f64; 2]]) -> Option<LinearizationSequence> {
    let controls: Vec<ControlVec> = controls.iter().map(|c| ControlVec::from(*c)).collect();
    let traj = rollout_nominal(&SI, &StateVec::from(x0), &controls).unwrap();
    linearize_trajectory(&SI, obs, &traj).ok()
}

fn far_from_origin(x0: [f64; 2], controls: &[[f64; 2]], r: f64) -> bool {
    let mut x = x0;
    if x[0].hypot(x[1]) < r {
        return false;
    }
    for c in controls {
        x = [x[0] + c[0], x[1] + c[1]];
        if x[0].hypot(x[1]) < r {
            return false;
        }
    }
    true
}

#[test]
fn rollout_examples() {
    let traj = rollout_nominal(
        &SI,
        &StateVec::from([0.0, 0.0]),
        &[ControlVec::from([1.0, 0.0]), ControlVec::from([0.0, 1.0])],
    )
    .unwrap();
    let states: Vec<&[f64]> = traj.states().iter().map(|s| s.as_slice()).collect();
    assert_eq!(states, [&[0.0, 0.0][..], &[1.0, 0.0], &[1.0, 1.0]]);

    let x0 = StateVec::from([-1.5, -0.5]);
    let traj = rollout_nominal(&SI, &x0, &vec![ControlVec::zeros(2); 7]).unwrap();
    assert_eq!(traj.states().len(), 8);
    assert!(traj.states().iter().all(|s| *s == x0));

    assert!(rollout_nominal(&SI, &x0, &[]).is_err());
    let err = rollout_nominal(
        &SI,
        &x0,
        &[ControlVec::from([1.0, 0.0]), ControlVec::from([f64::INFINITY, 0.0])],
    );
    assert_eq!(err, Err(obsplan_core::Error::RolloutDivergence { step: 2 }));
}

proptest! {
    #[test]
    fn single_integrator_terminal_is_ascending_sum(x0 in point(), cs in controls(9)) {
        let controls: Vec<ControlVec> = cs.iter().map(|c| ControlVec::from(*c)).collect();
        let a = rollout_nominal(&SI, &StateVec::from(x0), &controls).unwrap();
        let b = rollout_nominal(&SI, &StateVec::from(x0), &controls).unwrap();
        prop_assert_eq!(&a, &b);
        let mut sum = x0;
        for c in &cs {
            sum = [sum[0] + c[0], sum[1] + c[1]];
        }
        prop_assert_eq!(a.terminal().as_slice(), &sum[..]);
    }

    #[test]
    fn symmetric_eigen_reconstructs(entries in prop::collection::vec(-5.0..5.0f64, 10)) {
        let mut m = Matrix::zeros(4, 4);
        let mut it = entries.iter();
        for i in 0..4 {
            for j in i..4 {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let eig = m.symmetric_eigen();
        let err = (&eig.reconstruct() - &m).frobenius_norm() / m.frobenius_norm().max(1e-300);
        prop_assert!(err <= 1e-9);
    }

    #[test]
    fn jacobians_match_central_differences(x in point()) {
        let landmarks = scenario_a_landmarks();
        prop_assume!(landmarks.positions().iter().all(|l| (x[0] - l[0]).hypot(x[1] - l[1]) >= 0.05));
        let x = StateVec::from(x);
        for kind in [SensorKind::Range, SensorKind::RangeSquared] {
            let model = ObservationModel::new(kind, landmarks.clone());
            let h = model.jacobian(&x).unwrap();
            for j in 0..2 {
                let step = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += step;
                xm[j] -= step;
                let zp = model.observe(&xp).unwrap();
                let zm = model.observe(&xm).unwrap();
                for i in 0..3 {
                    prop_assert!(((zp[i] - zm[i]) / (2.0 * step) - h[(i, j)]).abs() <= 1e-5);
                }
            }
            if kind == SensorKind::Range {
                for i in 0..3 {
                    prop_assert!((h[(i, 0)].hypot(h[(i, 1)]) - 1.0).abs() <= 1e-12);
                }
            } else {
                for (i, l) in landmarks.positions().iter().enumerate() {
                    prop_assert_eq!(h.row(i), &[x[0] - l[0], x[1] - l[1]][..]);
                }
            }
            prop_assert_eq!(h.nrows(), model.observe(&x).unwrap().len());
        }
    }

    #[test]
    fn range_gramian_trace_counts_steps(x0 in point(), cs in controls(7)) {
        prop_assume!(far_from_origin(x0, &cs, 1e-6));
        let obs = ObservationModel::new(SensorKind::Range, LandmarkSet::origin());
        let og = observability_gramian(&lin(&obs, x0, &cs).unwrap(), GramianOptions::default()).unwrap();
        prop_assert!((og.matrix.trace() - 8.0).abs() <= 1e-9);
    }

    #[test]
    fn gramian_determinant_is_nonnegative(x0 in point(), cs in controls(7)) {
        prop_assume!(far_from_origin(x0, &cs, 1e-6));
        for kind in [SensorKind::Range, SensorKind::RangeSquared] {
            let obs = ObservationModel::new(kind, LandmarkSet::origin());
            let og = observability_gramian(&lin(&obs, x0, &cs).unwrap(), GramianOptions::default()).unwrap();
            prop_assert!(og.matrix.determinant() >= -1e-9);
            // coordinate sequences linearly independent => det > 0
            let mut xs = vec![x0];
            for c in &cs {
                let l = xs[xs.len() - 1];
                xs.push([l[0] + c[0], l[1] + c[1]]);
            }
            let scale = |p: [f64; 2]| if kind == SensorKind::Range { 1.0 / p[0].hypot(p[1]) } else { 1.0 };
            let gram = |a: usize, b: usize| xs.iter().map(|p| p[a] * p[b] * scale(*p) * scale(*p)).sum::<f64>();
            let rank_det = gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(0, 1);
            if rank_det > 1e-6 {
                prop_assert!(og.matrix.determinant() > 0.0);
            }
        }
    }

    #[test]
    fn sfim_is_proportional_to_gramian(x0 in point(), cs in controls(7), sigma in 1e-3..10.0f64) {
        let obs = ObservationModel::new(SensorKind::RangeSquared, scenario_a_landmarks());
        let l = lin(&obs, x0, &cs).unwrap();
        let q = observability_gramian(&l, GramianOptions::default()).unwrap().matrix;
        let f = sfim(&l, &CovMatrix::isotropic(3, sigma).unwrap(), GramianOptions::default()).unwrap().matrix;
        prop_assert!((&f.scale(sigma) - &q).max_abs() <= 1e-9 * q.max_abs());
    }

    #[test]
    fn measures_ignore_landmark_order(x0 in point(), cs in controls(7)) {
        let mut shuffled = scenario_a_landmarks().positions().to_vec();
        shuffled.rotate_left(1);
        shuffled.swap(0, 1);
        for kind in [SensorKind::Range, SensorKind::RangeSquared] {
            let a = ObservationModel::new(kind, scenario_a_landmarks());
            let b = ObservationModel::new(kind, LandmarkSet::new(shuffled.clone()).unwrap());
            let (Some(la), Some(lb)) = (lin(&a, x0, &cs), lin(&b, x0, &cs)) else { continue };
            let qa = observability_gramian(&la, GramianOptions::default()).unwrap().matrix;
            let qb = observability_gramian(&lb, GramianOptions::default()).unwrap().matrix;
            for m in MeasureKind::ALL {
                let (va, vb) = (gramian_measure(&qa, m).value, gramian_measure(&qb, m).value);
                prop_assert!((va - vb).abs() <= 1e-9 * va.abs().max(1.0), "{} {} {}", m, va, vb);
            }
        }
    }

    #[test]
    fn one_step_closed_form_matches_filter(
        x0 in point(),
        u in bounded_control(),
        sx0 in 0.0..1.0f64, sy0 in 0.0..1.0f64,
        swx in 0.0..1.0f64, swy in 0.0..1.0f64,
        snu in 1e-4..1.0f64,
    ) {
        let x1 = [x0[0] + u[0], x0[1] + u[1]];
        prop_assume!(x1[0].hypot(x1[1]) > 1e-3 && x0[0].hypot(x0[1]) > 1e-3);
        let params = OneStepParams { sx0, sy0, swx, swy, snu };
        for kind in [SensorKind::Range, SensorKind::RangeSquared] {
            let closed = analytic_one_step_trace(kind, &StateVec::from(x1), params).unwrap();
            let prior = predict(
                &CovMatrix::diagonal(&[sx0, sy0]).unwrap(),
                &Matrix::identity(2),
                &Matrix::identity(2),
                &CovMatrix::diagonal(&[swx, swy]).unwrap(),
            ).unwrap();
            let h = ObservationModel::new(kind, LandmarkSet::origin()).jacobian(&StateVec::from(x1)).unwrap();
            let (_, post) = update(&prior, &h, &Matrix::identity(1), &CovMatrix::diagonal(&[snu]).unwrap()).unwrap();
            prop_assert!((closed - post.trace()).abs() <= 1e-9 * (1.0 + closed));
        }
    }

    #[test]
    fn filter_is_monotone_and_psd(x0 in point(), cs in controls(7)) {
        let obs = ObservationModel::new(SensorKind::Range, scenario_a_landmarks());
        let Some(l) = lin(&obs, x0, &cs) else { return Ok(()) };
        let sigma_w = CovMatrix::diagonal(&[0.3, 0.1]).unwrap();
        let sigma_nu = CovMatrix::isotropic(3, 0.1).unwrap();
        let p0 = CovMatrix::new(Matrix::from_rows(&[[0.025, 0.002], [0.002, 0.025]])).unwrap();
        let trace = propagate(&l, &sigma_w, &sigma_nu, &p0).unwrap();
        for t in 1..=7 {
            let prior = predict(&trace.posteriors[t - 1], &l.a[t - 1], &l.g[t - 1], &sigma_w).unwrap();
            prop_assert!(trace.traces[t] <= prior.trace() + 1e-12);
            prop_assert!(trace.posteriors[t].matrix().symmetric_eigen().min() >= -1e-9);
            prop_assert!((trace.traces[t] - trace.posteriors[t].trace()).abs() <= 1e-12);
        }
    }
}

#[test]
fn direction_of_motion_matters_to_the_filter_but_not_the_gramian() {
    let obs = ObservationModel::new(SensorKind::Range, LandmarkSet::origin());
    let x0 = [1.0, 1.0];
    let params = OneStepParams {
        sx0: 0.025,
        sy0: 0.025,
        swx: 0.3,
        swy: 0.1,
        snu: 0.1,
    };
    let mut og_traces = Vec::new();
    let mut filter_traces = Vec::new();
    for u in [[0.5, 0.0], [0.0, 0.5]] {
        let l = lin(&obs, x0, &[u]).unwrap();
        og_traces.push(
            observability_gramian(&l, GramianOptions::default())
                .unwrap()
                .matrix
                .trace(),
        );
        let x1 = StateVec::from([x0[0] + u[0], x0[1] + u[1]]);
        let closed = analytic_one_step_trace(SensorKind::Range, &x1, params).unwrap();
        let cov = propagate(
            &l,
            &CovMatrix::diagonal(&[0.3, 0.1]).unwrap(),
            &CovMatrix::diagonal(&[0.1]).unwrap(),
            &CovMatrix::diagonal(&[0.025, 0.025]).unwrap(),
        )
        .unwrap();
        assert!((cov.traces[1] - closed).abs() < 1e-12);
        filter_traces.push(closed);
    }
    assert_eq!(og_traces[0], og_traces[1]);
    assert!((filter_traces[0] - filter_traces[1]).abs() > 1e-3);
}
