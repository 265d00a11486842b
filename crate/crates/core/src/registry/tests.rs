use super::*;
use crate::dae::{DslDae, TrajectoryInterpolant};
use crate::observer::{build_observer_dae, MeasuredSignal};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::path::PathBuf;

fn model_text(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(format!("{name}.dae"));
    std::fs::read_to_string(path).unwrap()
}

fn oex1_signal() -> MeasuredSignal {
    // Measured output of the plant started from (-2, 2), in closed form.
    MeasuredSignal::Callable(Arc::new(|t: f64| {
        let (s, c) = t.sin_cos();
        vec![-2.0 * (0.5 * t).exp() * c + 2.0 * (-t).exp() * s]
    }))
}

/// The observer DAE with the shipped model file's signal.
fn oex1_dae() -> crate::observer::ObserverDae {
    let ex = get_example(ExampleId::Oex1Observer);
    let spec = ex.observer_spec().unwrap().clone();
    build_observer_dae(spec, oex1_signal())
}

#[test]
fn ids_round_trip() {
    for id in ExampleId::all() {
        let parsed: ExampleId = id.as_str().parse().unwrap();
        assert_eq!(parsed, id);
    }
    assert!("nonsense".parse::<ExampleId>().is_err());
}

#[test]
fn closed_forms_satisfy_their_systems() {
    let mut rng = StdRng::seed_from_u64(2024);
    for id in [ExampleId::Exam1, ExampleId::Exam3] {
        let ex = get_example(id);
        let sys = ex.dae().unwrap();
        let cf = ex.closed_form.unwrap();
        for _ in 0..100 {
            let t = rng.gen_range(0.0..3.0);
            let w0 = vec![rng.gen_range(-2.0..2.0)];
            let (w, z) = cf(t, &w0);
            let mut g = vec![0.0];
            sys.g(t, &w, &z, &mut g).unwrap();
            assert!(g[0].abs() < 1e-8, "{id:?}: residual {}", g[0]);
            // ẇ from the closed form by central difference vs f.
            let h = 1e-5;
            let (wp, _) = cf(t + h, &w0);
            let (wm, _) = cf(t - h, &w0);
            let wdot_fd = (wp[0] - wm[0]) / (2.0 * h);
            let mut f = vec![0.0];
            sys.f(t, &w, &z, &mut f).unwrap();
            assert!((f[0] - wdot_fd).abs() < 1e-8 * (1.0 + f[0].abs()));
        }
    }
}

#[test]
fn oex1_closed_form_solves_the_observer_dae() {
    let ex = get_example(ExampleId::Oex1Observer);
    let cf = ex.closed_form.unwrap();
    let dae = oex1_dae();
    let w0 = [-2.0, 2.0];
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let t = rng.gen_range(0.0..3.0);
        let (w, z) = cf(t, &w0);
        let mut g = vec![0.0];
        dae.g(t, &w, &z, &mut g).unwrap();
        assert!(g[0].abs() < 1e-12);
        let h = 1e-5;
        let (wp, _) = cf(t + h, &w0);
        let (wm, _) = cf(t - h, &w0);
        let mut f = vec![0.0; 2];
        dae.f(t, &w, &z, &mut f).unwrap();
        for i in 0..2 {
            let wdot_fd = (wp[i] - wm[i]) / (2.0 * h);
            assert!((f[i] - wdot_fd).abs() < 1e-7 * (1.0 + f[i].abs()));
        }
    }
}

#[test]
fn hardcoded_jacobians_match_dsl_duals() {
    let mut rng = StdRng::seed_from_u64(99);
    let cases: Vec<(Arc<dyn DaeSystem>, DslDae)> = vec![
        (
            Arc::new(Exam1),
            DslDae::parse(&model_text("exam1"), "exam1-dsl").unwrap(),
        ),
        (
            Arc::new(Exam3),
            DslDae::parse(&model_text("exam3"), "exam3-dsl").unwrap(),
        ),
        (
            Arc::new(Smex1),
            DslDae::parse(&model_text("smex1"), "smex1-dsl").unwrap(),
        ),
        (
            Arc::new(Smex2::with_gains(0.5, 0.5)),
            DslDae::parse(&model_text("smex2"), "smex2-dsl").unwrap(),
        ),
        (
            Arc::new(oex1_dae()),
            DslDae::parse(&model_text("oex1_observer"), "oex1-dsl").unwrap(),
        ),
    ];
    for (hard, dsl) in &cases {
        assert_eq!(hard.state_dim(), dsl.state_dim());
        assert_eq!(hard.alg_dim(), dsl.alg_dim());
        for _ in 0..25 {
            let t = rng.gen_range(0.0..2.0);
            let w: Vec<f64> = (0..hard.state_dim())
                .map(|_| rng.gen_range(-1.5..1.5))
                .collect();
            let z: Vec<f64> = (0..hard.alg_dim())
                .map(|_| rng.gen_range(-1.5..1.5))
                .collect();
            let a = hard.jacobians(t, &w, &z).unwrap();
            let b = dsl.jacobians(t, &w, &z).unwrap();
            for (x, y) in [
                (&a.fw, &b.fw),
                (&a.fz, &b.fz),
                (&a.gw, &b.gw),
                (&a.gz, &b.gz),
            ] {
                let scale = x.max_abs().max(1.0);
                assert!(
                    x.sub(y).max_abs() <= 1e-12 * scale,
                    "{} vs dsl at t={t}",
                    hard.name()
                );
            }
            for (x, y) in a.gt.iter().zip(&b.gt) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}

#[test]
fn smex2_equilibrium_is_consistent() {
    let sys = Smex2::with_gains(0.5, 0.5);
    let w = [1.0, -1.0];
    let z = [0.0, 1.0];
    let mut g = vec![0.0; 2];
    sys.g(0.0, &w, &z, &mut g).unwrap();
    assert_eq!(g, vec![0.0, 0.0]);
    let mut f = vec![0.0; 2];
    sys.f(0.0, &w, &z, &mut f).unwrap();
    assert_eq!(f, vec![0.0, 0.0]);
}

#[test]
fn exam_closed_forms_match_expected_values() {
    let exam1 = get_example(ExampleId::Exam1);
    let (w, z) = (exam1.closed_form.unwrap())(1.0, &[1.0]);
    assert!((w[0] - (-2.0_f64).exp()).abs() < 1e-15);
    assert!((z[0] + 1.0_f64.exp()).abs() < 1e-15);
    let exam3 = get_example(ExampleId::Exam3);
    let (w, z) = (exam3.closed_form.unwrap())(1.0, &[1.0]);
    assert!((w[0] - (-2.0_f64).exp()).abs() < 1e-15);
    assert!((z[0] - (-3.0_f64).exp()).abs() < 1e-15);
}

#[test]
fn smex1_closed_form_gjac_matches_fd_path() {
    let ex = get_example(ExampleId::Smex1);
    let sys = ex.dae().unwrap();
    let z0 = crate::dae::consistent_init(sys.as_ref(), 0.0, &[3.0, -3.0], &[1.0]).unwrap();
    let traj = crate::dae::integrate(sys.as_ref(), 0.0, &[3.0, -3.0], &z0, 2.0, 1e-3).unwrap();
    let interp = TrajectoryInterpolant::new(sys.as_ref(), &traj).unwrap();
    for &t in &[0.0, 0.5, 1.3, 2.0] {
        let (dgw_fd, dgz_fd) = interp.gjac_time_derivatives(t).unwrap();
        let (dgw_cf, dgz_cf) = interp.gjac_time_derivatives_closed(t).unwrap().unwrap();
        assert!(dgw_fd.sub(&dgw_cf).max_abs() < 1e-5, "t={t}");
        assert!(dgz_fd.sub(&dgz_cf).max_abs() < 1e-5, "t={t}");
    }
}

#[test]
fn smex2_closed_form_gjac_matches_fd_path() {
    let ex = get_example(ExampleId::Smex2);
    let sys = ex.dae().unwrap();
    let (w0, guess) = &ex.default_ics[0];
    let z0 = crate::dae::consistent_init(sys.as_ref(), 0.0, w0, guess).unwrap();
    let traj = crate::dae::integrate(sys.as_ref(), 0.0, w0, &z0, 2.0, 1e-3).unwrap();
    let interp = TrajectoryInterpolant::new(sys.as_ref(), &traj).unwrap();
    for &t in &[0.0, 0.7, 1.9] {
        let (dgw_fd, dgz_fd) = interp.gjac_time_derivatives(t).unwrap();
        let (dgw_cf, dgz_cf) = interp.gjac_time_derivatives_closed(t).unwrap().unwrap();
        assert!(dgw_fd.sub(&dgw_cf).max_abs() < 1e-5, "t={t}");
        assert!(dgz_fd.sub(&dgz_cf).max_abs() < 1e-5, "t={t}");
    }
}

#[test]
fn oex1_plant_flow_matches_dynamics() {
    // The closed-form transition matrix columns satisfy ẋ = A(t)x.
    let plant = Oex1Plant;
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..50 {
        let t = rng.gen_range(0.0..4.0);
        let w0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let flow = |t: f64| {
            let (s, c) = t.sin_cos();
            let ep = (0.5 * t).exp();
            let em = (-t).exp();
            [
                ep * c * w0[0] + em * s * w0[1],
                -ep * s * w0[0] + em * c * w0[1],
            ]
        };
        let h = 1e-5;
        let (wp, wm) = (flow(t + h), flow(t - h));
        let w = flow(t);
        let mut f = [0.0; 2];
        plant.dynamics(t, &w, &mut f).unwrap();
        for i in 0..2 {
            let fd = (wp[i] - wm[i]) / (2.0 * h);
            assert!((f[i] - fd).abs() < 1e-7 * (1.0 + f[i].abs()));
        }
    }
}
