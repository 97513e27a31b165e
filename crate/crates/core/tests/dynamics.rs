use lugre_pinn::friction::LuGreParams;
use lugre_pinn::systems::{pob_dynamics, pob_energy, PoBParams, PoBState};
use proptest::prelude::*;

/// Lagrangian built from the body positions: box at `(x, 0)`, link centre
/// at `(x + d sinθ, −d cosθ)` with extra rotational inertia `J_L`.
fn lagrangian(q: [f64; 2], qd: [f64; 2], p: &PoBParams<f64>) -> f64 {
    let (x_dot, th, th_dot) = (qd[0], q[1], qd[1]);
    let lx_dot = x_dot + p.d * th.cos() * th_dot;
    let ly_dot = p.d * th.sin() * th_dot;
    let kin = 0.5 * p.m_b * x_dot * x_dot + 0.5 * p.m_l * (lx_dot * lx_dot + ly_dot * ly_dot) + 0.5 * p.j_l * th_dot * th_dot;
    let pot = -p.m_l * p.g * p.d * th.cos();
    let _ = q[0];
    kin - pot
}

/// Central difference in coordinate `k`. `L` is quadratic in the velocities,
/// so a wide step there is exact and keeps roundoff down.
fn partial(f: impl Fn([f64; 4]) -> f64, at: [f64; 4], k: usize) -> f64 {
    let h = if k < 2 { 1e-4 } else { 0.1 };
    let (mut a, mut b) = (at, at);
    a[k] += h;
    b[k] -= h;
    (f(a) - f(b)) / (2.0 * h)
}

/// Euler–Lagrange residual `d/dt ∂L/∂q̇ − ∂L/∂q − Q` with every derivative
/// taken by finite differences.
fn euler_lagrange_residual(y: [f64; 4], qdd: [f64; 2], gen_force: [f64; 2], p: &PoBParams<f64>) -> [f64; 2] {
    let l = |s: [f64; 4]| lagrangian([s[0], s[1]], [s[2], s[3]], p);
    let mut out = [0.0; 2];
    for i in 0..2 {
        let dl_dqd = |s: [f64; 4]| partial(l, s, 2 + i);
        // d/dt of ∂L/∂q̇_i along (q̇, q̈).
        let rate = [y[2], y[3], qdd[0], qdd[1]];
        let mut ddt = 0.0;
        for k in 0..4 {
            ddt += partial(dl_dqd, y, k) * rate[k];
        }
        out[i] = ddt - partial(l, y, i) - gen_force[i];
    }
    out
}

proptest! {
    #[test]
    fn accelerations_satisfy_euler_lagrange(
        x in -1.0f64..1.0,
        xd in -1.0f64..1.0,
        th in -1.4f64..1.4,
        thd in -6.0f64..6.0,
        z in -3e-5f64..3e-5,
        tau in -3.0f64..3.0,
    ) {
        let p = PoBParams::default();
        let fric = LuGreParams::ground_truth();
        let s = PoBState { x_b: x, xdot_b: xd, theta: th, thetadot: thd, z };
        let d = pob_dynamics(&s, tau, &p, &fric);
        let r = euler_lagrange_residual([x, th, xd, thd], [d.xddot_b, d.thetaddot], [-d.friction, tau], &p);
        let scale = 1.0 + d.friction.abs() + tau.abs();
        prop_assert!(r[0].abs() < 1e-6 * scale, "x residual {} (scale {scale})", r[0]);
        prop_assert!(r[1].abs() < 1e-6 * scale, "θ residual {} (scale {scale})", r[1]);
    }

    #[test]
    fn energy_rate_equals_external_power(
        xd in -1.0f64..1.0,
        th in -1.4f64..1.4,
        thd in -6.0f64..6.0,
        z in -3e-5f64..3e-5,
        tau in -3.0f64..3.0,
    ) {
        let p = PoBParams::default();
        let fric = LuGreParams::ground_truth();
        let s = PoBState { x_b: 0.0, xdot_b: xd, theta: th, thetadot: thd, z };
        let d = pob_dynamics(&s, tau, &p, &fric);
        let h = 1e-6;
        let shifted = |sign: f64| PoBState {
            x_b: sign * h * xd,
            xdot_b: xd + sign * h * d.xddot_b,
            theta: th + sign * h * thd,
            thetadot: thd + sign * h * d.thetaddot,
            z,
        };
        let de_dt = (pob_energy(&shifted(1.0), &p) - pob_energy(&shifted(-1.0), &p)) / (2.0 * h);
        let power = tau * thd - d.friction * xd;
        prop_assert!((de_dt - power).abs() < 1e-5 * (1.0 + power.abs()), "{de_dt} vs {power}");
    }
}

#[test]
fn free_swing_without_friction_conserves_energy() {
    use lugre_pinn::numerics::{integrate_rk45, OdeOptions};
    use lugre_pinn::systems::pob_accelerations;
    let p = PoBParams::default();
    let y0 = [0.0, 0.0, 0.8, 0.0];
    let sol = integrate_rk45(
        |_, y: &[f64], dy: &mut [f64]| {
            let (xdd, thdd) = pob_accelerations(y[2], y[3], 0.0, 0.0, &p);
            dy.copy_from_slice(&[y[1], xdd, y[3], thdd]);
        },
        &y0,
        (0.0, 3.0),
        &OdeOptions::with_tolerances(1e-10, 1e-12),
    )
    .unwrap();
    let energy = |y: &[f64]| {
        pob_energy(&PoBState { x_b: y[0], xdot_b: y[1], theta: y[2], thetadot: y[3], z: 0.0 }, &p)
    };
    let e0 = energy(&y0);
    for y in &sol.states {
        assert!((energy(y) - e0).abs() < 1e-7, "drift {}", energy(y) - e0);
    }
    // Horizontal momentum is conserved too.
    let momentum = |y: &[f64]| p.total_mass() * y[1] + p.m_l * p.d * y[2].cos() * y[3];
    for y in &sol.states {
        assert!(momentum(y).abs() < 1e-7);
    }
}
