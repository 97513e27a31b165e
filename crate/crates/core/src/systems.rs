//! Equations of motion for the pendulum-on-a-box (PoB) and the
//! spring-damper-on-a-box (SDoB), and the derived quantities the friction
//! estimators consume.
//!
//! PoB convention: `θ = 0` is the link hanging straight down, the box slides
//! along `x` and never leaves the surface. The Lagrangian derivation is in
//! `docs/pob_dynamics.md`.

use crate::friction::{lugre_force, lugre_zdot, LuGreParams};
use crate::scalar::Scalar;

pub const GRAVITY: f64 = 9.81;

/// Pendulum-on-a-box parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoBParams<T> {
    /// Box mass, kg.
    pub m_b: T,
    /// Link mass, kg.
    pub m_l: T,
    /// Link length, m.
    pub length: T,
    /// Pivot to link centre of mass, m.
    pub d: T,
    /// Link inertia about its centre of mass, kg·m².
    pub j_l: T,
    pub g: T,
}

impl<T: Scalar> Default for PoBParams<T> {
    fn default() -> Self {
        Self {
            m_b: T::lit(0.5),
            m_l: T::lit(1.0),
            length: T::lit(0.5),
            d: T::lit(0.25),
            j_l: T::lit(0.042),
            g: T::lit(GRAVITY),
        }
    }
}

impl<T: Scalar> PoBParams<T> {
    pub fn total_mass(&self) -> T {
        self.m_b + self.m_l
    }

    /// Link inertia about the pivot.
    pub fn pivot_inertia(&self) -> T {
        self.j_l + self.m_l * self.d * self.d
    }

    /// Determinant of the 2×2 mass matrix in `(ẍ_b, θ̈)`.
    pub fn mass_matrix_det(&self, theta: T) -> T {
        let c = self.m_l * self.d * theta.cos();
        self.total_mass() * self.pivot_inertia() - c * c
    }

    pub fn is_valid(&self) -> bool {
        [self.m_b, self.m_l, self.length, self.d, self.j_l, self.g]
            .iter()
            .all(|v| v.is_finite() && *v > T::zero())
    }
}

/// Mechanical PoB state plus the bristle deflection `z`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoBState<T> {
    pub x_b: T,
    pub xdot_b: T,
    pub theta: T,
    pub thetadot: T,
    pub z: T,
}

impl<T: Scalar> PoBState<T> {
    pub fn from_slice(y: &[T]) -> Self {
        Self {
            x_b: y[0],
            xdot_b: y[1],
            theta: y[2],
            thetadot: y[3],
            z: y[4],
        }
    }

    pub fn to_array(&self) -> [T; 5] {
        [self.x_b, self.xdot_b, self.theta, self.thetadot, self.z]
    }
}

/// Time derivative of a [`PoBState`] plus the intermediate forces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoBDerivative<T> {
    pub xddot_b: T,
    pub thetaddot: T,
    pub zdot: T,
    pub friction: T,
    /// Signed normal-force estimate; the friction law uses its magnitude.
    pub f_n: T,
    pub contact_free: bool,
}

impl<T: Scalar> PoBDerivative<T> {
    /// Derivative vector in the [`PoBState::to_array`] layout.
    pub fn to_array(&self, state: &PoBState<T>) -> [T; 5] {
        [state.xdot_b, self.xddot_b, state.thetadot, self.thetaddot, self.zdot]
    }
}

/// Signed normal-force estimate `m_L d θ̇² cosθ − (m_b + m_L) g`.
#[inline]
pub fn normal_force_estimate<T: Scalar>(theta: T, thetadot: T, p: &PoBParams<T>) -> T {
    p.m_l * p.d * thetadot * thetadot * theta.cos() - p.total_mass() * p.g
}

/// Box acceleration with zero friction:
/// `m_L d (−θ̈ cosθ + θ̇² sinθ) / (m_b + m_L)`.
#[inline]
pub fn would_be_acceleration<T: Scalar>(theta: T, thetadot: T, thetaddot: T, p: &PoBParams<T>) -> T {
    p.m_l * p.d * (-thetaddot * theta.cos() + thetadot * thetadot * theta.sin()) / p.total_mass()
}

/// Horizontal-momentum residual term `(m_b+m_L) ẍ_b + m_L d (θ̈ cosθ − θ̇² sinθ)`.
/// The equation of motion reads `eom_x_term + F_f = 0`.
#[inline]
pub fn eom_x_term<T: Scalar>(xddot_b: T, theta: T, thetadot: T, thetaddot: T, p: &PoBParams<T>) -> T {
    p.total_mass() * xddot_b + p.m_l * p.d * (thetaddot * theta.cos() - thetadot * thetadot * theta.sin())
}

/// Friction force implied by measured motion through the horizontal
/// equation of motion.
#[inline]
pub fn friction_from_eom<T: Scalar>(xddot_b: T, theta: T, thetadot: T, thetaddot: T, p: &PoBParams<T>) -> T {
    -eom_x_term(xddot_b, theta, thetadot, thetaddot, p)
}

/// Solves the mass-matrix system for `(ẍ_b, θ̈)` given a friction force that
/// may depend affinely on the accelerations:
/// `F_f = f0 + fx ẍ_b + fth θ̈`.
pub fn pob_accelerations_affine<T: Scalar>(
    theta: T,
    thetadot: T,
    tau: T,
    friction: (T, T, T),
    p: &PoBParams<T>,
) -> (T, T) {
    let (f0, fx, fth) = friction;
    let (s, c) = theta.sin_cos();
    let mld = p.m_l * p.d;
    let m11 = p.total_mass() + fx;
    let m12 = mld * c + fth;
    let m21 = mld * c;
    let m22 = p.pivot_inertia();
    let r1 = mld * thetadot * thetadot * s - f0;
    let r2 = -mld * p.g * s + tau;
    let det = m11 * m22 - m12 * m21;
    debug_assert!(det != T::zero(), "singular PoB mass matrix");
    let xdd = (r1 * m22 - m12 * r2) / det;
    let thdd = (m11 * r2 - m21 * r1) / det;
    (xdd, thdd)
}

/// Accelerations for a given (acceleration-independent) friction force.
#[inline]
pub fn pob_accelerations<T: Scalar>(theta: T, thetadot: T, tau: T, friction: T, p: &PoBParams<T>) -> (T, T) {
    pob_accelerations_affine(theta, thetadot, tau, (friction, T::zero(), T::zero()), p)
}

/// PoB equations of motion under LuGre friction with the normal force taken
/// from [`normal_force_estimate`].
pub fn pob_dynamics<T: Scalar>(state: &PoBState<T>, tau: T, p: &PoBParams<T>, fric: &LuGreParams<T>) -> PoBDerivative<T> {
    assert!(p.mass_matrix_det(state.theta) > T::zero(), "PoB mass matrix must be positive definite");
    let f_n = normal_force_estimate(state.theta, state.thetadot, p);
    let rate = lugre_zdot(state.xdot_b, state.z, f_n, fric);
    let friction = lugre_force(state.z, rate.value, state.xdot_b, fric);
    let (xddot_b, thetaddot) = pob_accelerations(state.theta, state.thetadot, tau, friction, p);
    PoBDerivative {
        xddot_b,
        thetaddot,
        zdot: rate.value,
        friction,
        f_n,
        contact_free: rate.contact_free,
    }
}

/// Kinetic plus potential energy of the PoB (zero potential at the pivot).
pub fn pob_energy<T: Scalar>(state: &PoBState<T>, p: &PoBParams<T>) -> T {
    let half = T::lit(0.5);
    let c = state.theta.cos();
    half * p.total_mass() * state.xdot_b * state.xdot_b
        + p.m_l * p.d * c * state.xdot_b * state.thetadot
        + half * p.pivot_inertia() * state.thetadot * state.thetadot
        - p.m_l * p.g * p.d * c
}

/// Spring-damper-on-a-box parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDoBParams<T> {
    /// Bottom (sliding) mass, kg.
    pub m1: T,
    /// Top mass, kg.
    pub m2: T,
    /// Spring stiffness, N/m.
    pub k: T,
    /// Damper, N·s/m.
    pub c: T,
    /// Spring rest length, m.
    pub rest_len: T,
    pub g: T,
}

impl<T: Scalar> Default for SDoBParams<T> {
    fn default() -> Self {
        Self {
            m1: T::lit(0.5),
            m2: T::lit(1.0),
            k: T::lit(2000.0),
            c: T::lit(20.0),
            rest_len: T::lit(0.1),
            g: T::lit(GRAVITY),
        }
    }
}

impl<T: Scalar> SDoBParams<T> {
    pub fn total_mass(&self) -> T {
        self.m1 + self.m2
    }

    pub fn static_normal_force(&self) -> T {
        self.total_mass() * self.g
    }
}

/// SDoB state: box position/velocity, top-mass height relative to its
/// static equilibrium, and the bristle deflection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SDoBState<T> {
    pub x1: T,
    pub xdot1: T,
    pub y2: T,
    pub ydot2: T,
    pub z: T,
}

impl<T: Scalar> SDoBState<T> {
    pub fn from_slice(y: &[T]) -> Self {
        Self {
            x1: y[0],
            xdot1: y[1],
            y2: y[2],
            ydot2: y[3],
            z: y[4],
        }
    }

    pub fn to_array(&self) -> [T; 5] {
        [self.x1, self.xdot1, self.y2, self.ydot2, self.z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDoBDerivative<T> {
    pub xddot1: T,
    pub yddot2: T,
    pub zdot: T,
    pub friction: T,
    /// Normal force on the bottom mass, clipped at zero.
    pub f_n: T,
    pub contact_lost: bool,
}

impl<T: Scalar> SDoBDerivative<T> {
    pub fn to_array(&self, state: &SDoBState<T>) -> [T; 5] {
        [state.xdot1, self.xddot1, state.ydot2, self.yddot2, self.zdot]
    }
}

/// SDoB equations of motion. The top mass moves vertically on the spring
/// and damper and follows the box horizontally, so both masses share the
/// horizontal velocity `ẋ₁`:
///
/// ```text
/// m₂ ÿ₂ = −k y₂ − c ẏ₂
/// F_N   = max(0, (m₁ + m₂) g + m₂ ÿ₂)
/// (m₁ + m₂) ẍ₁ = F_ext − F_f
/// ```
pub fn sdob_dynamics<T: Scalar>(state: &SDoBState<T>, f_ext: T, p: &SDoBParams<T>, fric: &LuGreParams<T>) -> SDoBDerivative<T> {
    let yddot2 = (-p.k * state.y2 - p.c * state.ydot2) / p.m2;
    let raw_fn = p.static_normal_force() + p.m2 * yddot2;
    let contact_lost = raw_fn <= T::zero();
    let f_n = raw_fn.max(T::zero());
    let rate = lugre_zdot(state.xdot1, state.z, f_n, fric);
    let friction = lugre_force(state.z, rate.value, state.xdot1, fric);
    let xddot1 = (f_ext - friction) / p.total_mass();
    SDoBDerivative {
        xddot1,
        yddot2,
        zdot: rate.value,
        friction,
        f_n,
        contact_lost: contact_lost || rate.contact_free,
    }
}

/// Frictionless box acceleration of the SDoB, the analogue of
/// [`would_be_acceleration`].
#[inline]
pub fn sdob_would_be_acceleration<T: Scalar>(f_ext: T, p: &SDoBParams<T>) -> T {
    f_ext / p.total_mass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn pob() -> PoBParams<f64> {
        PoBParams::default()
    }

    fn gt() -> LuGreParams<f64> {
        LuGreParams::ground_truth()
    }

    #[test]
    fn equilibrium_at_rest() {
        let d = pob_dynamics(&PoBState::default(), 0.0, &pob(), &gt());
        assert_eq!(d.xddot_b, 0.0);
        assert_eq!(d.thetaddot, 0.0);
        assert_eq!(d.zdot, 0.0);
        assert_eq!(d.friction, 0.0);
    }

    #[test]
    fn horizontal_link_decouples() {
        let s = PoBState {
            theta: FRAC_PI_2,
            ..Default::default()
        };
        let d = pob_dynamics(&s, 0.0, &pob(), &gt());
        // Gravity torque pulls the link back toward hanging.
        assert_abs_diff_eq!(d.thetaddot, -0.25 * 9.81 / 0.1045, epsilon = 1e-9);
        assert_abs_diff_eq!(d.thetaddot.abs(), 23.47, epsilon = 5e-3);
        assert_abs_diff_eq!(d.xddot_b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_matrix_determinant() {
        assert_abs_diff_eq!(pob().mass_matrix_det(0.0), 1.5 * 0.1045 - 0.0625, epsilon = 1e-12);
        assert_abs_diff_eq!(pob().mass_matrix_det(0.0), 0.0943, epsilon = 1e-4);
    }

    #[test]
    fn normal_force_examples() {
        let p = pob();
        assert_abs_diff_eq!(normal_force_estimate(0.0, 0.0, &p), -14.715, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_force_estimate(0.0, 58.86f64.sqrt(), &p), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_force_estimate(FRAC_PI_2, 3.0, &p), -14.715, epsilon = 1e-12);
    }

    #[test]
    fn would_be_acceleration_examples() {
        let p = pob();
        assert_abs_diff_eq!(would_be_acceleration(FRAC_PI_2, 1.0, 0.0, &p), 0.25 / 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(would_be_acceleration(0.0, 0.0, 1.0, &p), -0.25 / 1.5, epsilon = 1e-12);
        assert_eq!(would_be_acceleration(0.7, 0.0, 0.0, &p), 0.0);
    }

    #[test]
    fn friction_from_eom_examples() {
        let p = pob();
        assert_eq!(friction_from_eom(0.0, 0.0, 0.0, 0.0, &p), 0.0);
        assert_abs_diff_eq!(friction_from_eom(1.0, 0.0, 0.0, 0.0, &p), -1.5, epsilon = 1e-12);
    }

    #[test]
    fn eom_round_trip_recovers_friction() {
        let p = pob();
        let states = [
            PoBState { x_b: 0.1, xdot_b: 0.03, theta: 0.6, thetadot: -2.0, z: 3e-5 },
            PoBState { x_b: 0.0, xdot_b: -0.2, theta: -1.1, thetadot: 4.0, z: -6e-5 },
            PoBState { x_b: 0.0, xdot_b: 1e-4, theta: 0.2, thetadot: 0.5, z: 1e-6 },
        ];
        for s in states {
            for tau in [-3.0, 0.0, 2.5] {
                let d = pob_dynamics(&s, tau, &p, &gt());
                let f = friction_from_eom(d.xddot_b, s.theta, s.thetadot, d.thetaddot, &p);
                assert_abs_diff_eq!(f, d.friction, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn sdob_equilibrium_and_examples() {
        let sp = SDoBParams::default();
        let d = sdob_dynamics(&SDoBState::default(), 0.0, &sp, &gt());
        assert_eq!((d.xddot1, d.yddot2, d.zdot), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(d.f_n, 14.715, epsilon = 1e-12);

        let s = SDoBState { y2: 0.01, ..Default::default() };
        let d = sdob_dynamics(&s, 0.0, &sp, &gt());
        assert_abs_diff_eq!(d.yddot2, -20.0, epsilon = 1e-12);
        // (m1 + m2) g − 20 is negative, so contact is lost and F_N clips.
        assert!(d.contact_lost);
        assert_eq!(d.f_n, 0.0);

        let s = SDoBState { y2: 0.004, ..Default::default() };
        let d = sdob_dynamics(&s, 0.0, &sp, &gt());
        assert_abs_diff_eq!(d.f_n, 14.715 - 8.0, epsilon = 1e-12);
        assert!(!d.contact_lost);
    }

    #[test]
    fn sdob_stiff_spring_keeps_static_normal_force() {
        let sp = SDoBParams { k: 1e7, c: 1e4, ..SDoBParams::default() };
        let s = SDoBState { xdot1: 0.05, ydot2: 1e-6, y2: 1e-9, z: 1e-5, ..Default::default() };
        let d = sdob_dynamics(&s, 3.0, &sp, &gt());
        assert_abs_diff_eq!(d.f_n, sp.static_normal_force(), epsilon = 0.05);
    }
}
