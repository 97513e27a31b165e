use lugre_pinn::datagen::{generate_clean_dataset, DatasetRecipe, SimSettings};
use lugre_pinn::eval::{
    eval_in_simulation, lugre_in_sim_mse, pareto_front, sdob_data, steady_state_map, InSimOptions, SdobTrajectory,
    SimFriction, SpeedAccuracyRow, SteadyModel, Trajectory,
};
use lugre_pinn::friction::{lugre_steady_state_force, LuGreParams};
use lugre_pinn::ident::{identify, IdentConfig, IdentObjective, Method};
use lugre_pinn::systems::{PoBParams, SDoBParams};

#[test]
fn nelder_mead_recovers_parameters_from_clean_data() {
    let settings = SimSettings::default();
    let ds = generate_clean_dataset(&DatasetRecipe::default(), &settings).unwrap();
    let obj = IdentObjective::new(&ds, &PoBParams::default()).unwrap();
    let r = identify(Method::NelderMead, &obj, &IdentConfig::default()).unwrap();
    let p = r.params;
    assert!((p.mu_c - 0.3).abs() < 0.01, "{p:?}");
    assert!((p.mu_s - 0.6).abs() < 0.02, "{p:?}");
    assert!((p.sigma0 / 1e5 - 1.0).abs() < 0.05, "{p:?}");
    assert!((p.sigma1 / 316.23 - 1.0).abs() < 0.05, "{p:?}");
    assert!(r.objective < 1e-3);
    assert!(r.objective <= obj.value(&LuGreParams::initial_guess()));
}

#[test]
fn reference_law_scores_perfectly_in_simulation() {
    let settings = SimSettings::default();
    for traj in [Trajectory::Swing, Trajectory::Translation] {
        let mse = lugre_in_sim_mse(&LuGreParams::ground_truth(), traj, &settings).unwrap();
        assert!(mse < 1e-8, "{}: {mse}", traj.name());
    }
}

#[test]
fn wrong_parameters_score_worse_in_simulation() {
    let settings = SimSettings::default();
    let mut p = LuGreParams::ground_truth();
    p.mu_c = 0.2;
    p.mu_s = 0.4;
    let r = eval_in_simulation(
        "off",
        &SimFriction::LuGre(p),
        &Trajectory::Swing.spec(),
        "traj1",
        &settings,
        &InSimOptions::default(),
    )
    .unwrap();
    assert!(!r.failed);
    assert!(r.mse > 1e-3);
    assert_eq!(r.times.len(), r.truth.len());
}

#[test]
fn sdob_run_has_stick_and_slip() {
    let data = sdob_data(&SdobTrajectory::default(), &SDoBParams::default(), &SimSettings::default(), 0.05).unwrap();
    let stick = data.clean.samples.iter().filter(|s| s.xdot_b.abs() < 1e-3).count();
    assert!(stick > 50 && stick < data.clean.len() - 50, "{stick}");
    for (c, n) in data.clean.samples.iter().zip(&data.noisy.samples) {
        assert_eq!(c.f_fric_true, n.f_fric_true);
    }
}

#[test]
fn reference_steady_map_matches_closed_form() {
    let p = LuGreParams::ground_truth();
    let v = [-0.5, -1e-3, 2e-3, 0.7];
    let f_n = [3.0, 14.7];
    let map = steady_state_map::<f64>(SteadyModel::Reference(p), &v, &f_n).unwrap();
    for (i, &n) in f_n.iter().enumerate() {
        for (j, &vv) in v.iter().enumerate() {
            // g(v) = F_N (μc + (μs − μc) e^{−(v/vs)²}), force = sign(v) g + σ2 v.
            let g = n * (p.mu_c + (p.mu_s - p.mu_c) * (-(vv / p.v_s).powi(2)).exp());
            let expect = vv.signum() * g + p.sigma2 * vv;
            assert!((map[[i, j]] - expect).abs() < 1e-12);
            assert_eq!(map[[i, j]], lugre_steady_state_force(vv, n, &p).force);
        }
    }
}

#[test]
fn pareto_front_keeps_non_dominated() {
    let row = |m: &str, t, e| SpeedAccuracyRow { method: m.into(), t_comp: t, mse: e };
    let rows = [row("a", 1.0, 5.0), row("b", 2.0, 1.0), row("c", 3.0, 2.0), row("d", 0.5, 9.0)];
    assert_eq!(pareto_front(&rows), vec![true, true, false, true]);
}
