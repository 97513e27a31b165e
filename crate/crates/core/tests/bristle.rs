use lugre_pinn::friction::{lugre_zdot, LuGreParams};
use lugre_pinn::ident::bristle_step;
use lugre_pinn::numerics::{integrate_rk45, OdeOptions};
use proptest::prelude::*;

/// Smooth fuzzed input: a sum of sinusoids with the given amplitudes.
fn signal(t: f64, offset: f64, terms: &[(f64, f64, f64)]) -> f64 {
    offset + terms.iter().map(|&(a, w, ph)| a * (w * t + ph).sin()).sum::<f64>()
}

fn terms(amp: f64) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-amp..amp, 0.5f64..40.0, 0.0f64..6.3), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `|z| ≤ μ_s F_N,max / σ₀` is forward invariant: starting inside, the
    /// bristle state never leaves.
    #[test]
    fn continuous_bristle_stays_bounded(
        v_terms in terms(0.5),
        fn_terms in terms(2.0),
        fn_offset in 8.0f64..15.0,
        z0_frac in -1.0f64..1.0,
    ) {
        let p = LuGreParams::ground_truth();
        let fn_max = fn_offset + fn_terms.iter().map(|t| t.0.abs()).sum::<f64>();
        let bound = p.mu_s * fn_max / p.sigma0;
        let sol = integrate_rk45(
            |t, y: &[f64], dy: &mut [f64]| {
                let v = signal(t, 0.0, &v_terms);
                let f_n = signal(t, fn_offset, &fn_terms);
                dy[0] = lugre_zdot(v, y[0], f_n, &p).value;
            },
            &[z0_frac * bound],
            (0.0, 2.0),
            &OdeOptions::with_tolerances(1e-9, 1e-14),
        ).unwrap();
        for y in &sol.states {
            prop_assert!(y[0].abs() <= bound * (1.0 + 1e-6), "{} > {}", y[0].abs(), bound);
        }
    }

    #[test]
    fn discrete_bristle_step_stays_bounded(
        v_terms in terms(1.0),
        fn_terms in terms(3.0),
        fn_offset in 8.0f64..15.0,
        z0_frac in -1.0f64..1.0,
    ) {
        let p = LuGreParams::ground_truth();
        let fn_max = fn_offset + fn_terms.iter().map(|t| t.0.abs()).sum::<f64>();
        let bound = p.mu_s * fn_max / p.sigma0;
        let dt = 0.0025;
        let mut z = z0_frac * bound;
        for k in 0..800 {
            let at = |t: f64| (signal(t, 0.0, &v_terms), signal(t, fn_offset, &fn_terms));
            let t = k as f64 * dt;
            z = bristle_step([at(t), at(t + 0.5 * dt), at(t + dt)], z, dt, &p);
            prop_assert!(z.abs() <= bound * (1.0 + 1e-9), "step {k}: {} > {}", z.abs(), bound);
        }
    }
}
