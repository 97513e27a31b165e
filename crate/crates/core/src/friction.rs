//! LuGre dynamic friction and a Coulomb + viscous reference law.
//!
//! The bristle state `z` evolves as
//!
//! ```text
//! ż = v − σ₀|v| z / g(v),    g(v) = μ_c|F_N| + (μ_s − μ_c)|F_N| exp(−(|v|/v_s)^α)
//! ```
//!
//! and the friction force is `F = σ₀ z + σ₁ ż + σ₂ v`. The normal force only
//! enters through its magnitude, so signed normal-force estimates can be
//! passed directly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The six identifiable LuGre parameters plus the shape factor `alpha`,
/// which is fixed at 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuGreParams<T> {
    /// Bristle stiffness, N/m.
    pub sigma0: T,
    /// Bristle damping, N·s/m.
    pub sigma1: T,
    /// Viscous coefficient, N·s/m.
    pub sigma2: T,
    /// Coulomb coefficient.
    pub mu_c: T,
    /// Static coefficient.
    pub mu_s: T,
    /// Stribeck velocity, m/s.
    pub v_s: T,
    alpha: T,
}

pub const PARAM_NAMES: [&str; 6] = ["sigma0", "sigma1", "sigma2", "mu_c", "mu_s", "v_s"];

impl<T: Scalar> LuGreParams<T> {
    /// Builds and validates a parameter set (`alpha` = 2).
    pub fn new(sigma0: T, sigma1: T, sigma2: T, mu_c: T, mu_s: T, v_s: T) -> Result<Self> {
        let p = Self::new_unchecked(sigma0, sigma1, sigma2, mu_c, mu_s, v_s);
        p.validate()?;
        Ok(p)
    }

    /// Builds a parameter set without checking `mu_c <= mu_s` or positivity.
    /// Optimizers explore such candidates; every formula stays defined as
    /// long as the values are positive.
    pub fn new_unchecked(sigma0: T, sigma1: T, sigma2: T, mu_c: T, mu_s: T, v_s: T) -> Self {
        Self {
            sigma0,
            sigma1,
            sigma2,
            mu_c,
            mu_s,
            v_s,
            alpha: T::lit(2.0),
        }
    }

    /// Ground-truth parameters of the simulated contact.
    pub fn ground_truth() -> Self {
        Self::new_unchecked(
            T::lit(1.0e5),
            T::lit(316.23),
            T::lit(0.40),
            T::lit(0.30),
            T::lit(0.60),
            T::lit(1.0e-3),
        )
    }

    /// Default starting point for learned and identified parameters.
    pub fn initial_guess() -> Self {
        Self::new_unchecked(
            T::lit(1.0e4),
            T::lit(1.0e2),
            T::lit(1.0),
            T::lit(0.2),
            T::lit(0.5),
            T::lit(1.0e-2),
        )
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Only `alpha = 2` is supported.
    pub fn set_alpha(&mut self, alpha: T) -> Result<()> {
        if alpha != T::lit(2.0) {
            return Err(Error::InvalidParams(format!("alpha must be 2, got {alpha}")));
        }
        self.alpha = alpha;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let named = self.to_array();
        for (name, v) in PARAM_NAMES.iter().zip(named) {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.mu_c > self.mu_s {
            return Err(Error::InvalidParams(format!(
                "mu_c ({}) must not exceed mu_s ({})",
                self.mu_c, self.mu_s
            )));
        }
        if self.alpha != T::lit(2.0) {
            return Err(Error::InvalidParams("alpha must be 2".into()));
        }
        Ok(())
    }

    /// `[sigma0, sigma1, sigma2, mu_c, mu_s, v_s]`.
    pub fn to_array(&self) -> [T; 6] {
        [self.sigma0, self.sigma1, self.sigma2, self.mu_c, self.mu_s, self.v_s]
    }

    pub fn from_array(a: [T; 6]) -> Self {
        Self::new_unchecked(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    /// Natural-log coordinates used by the optimizers.
    pub fn to_log(&self) -> [T; 6] {
        self.to_array().map(|v| v.ln())
    }

    pub fn from_log(x: &[T]) -> Self {
        Self::from_array(std::array::from_fn(|i| x[i].exp()))
    }

    pub fn cast<U: Scalar>(&self) -> LuGreParams<U> {
        LuGreParams::from_array(self.to_array().map(|v| U::lit(v.as_f64())))
    }
}

impl<T: Scalar> Default for LuGreParams<T> {
    fn default() -> Self {
        Self::ground_truth()
    }
}

/// Stribeck curve `g(v)`: bounded between `μ_c|F_N|` and `μ_s|F_N|`.
#[inline]
pub fn stribeck_g<T: Scalar>(v: T, f_n: T, p: &LuGreParams<T>) -> T {
    let fn_abs = f_n.abs();
    let ratio = v.abs() / p.v_s;
    let shape = if p.alpha == T::lit(2.0) { ratio * ratio } else { ratio.powf(p.alpha) };
    p.mu_c * fn_abs + (p.mu_s - p.mu_c) * fn_abs * (-shape).exp()
}

/// Bristle rate together with a flag for the contact-free limit `g = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BristleRate<T> {
    pub value: T,
    pub contact_free: bool,
}

/// `ż = v − σ₀|v| z / g(v)`. Without contact (`g = 0`) the bristles cannot
/// load and `ż = v` is returned with `contact_free` set.
#[inline]
pub fn lugre_zdot<T: Scalar>(v: T, z: T, f_n: T, p: &LuGreParams<T>) -> BristleRate<T> {
    let g = stribeck_g(v, f_n, p);
    if g <= T::zero() {
        return BristleRate { value: v, contact_free: true };
    }
    BristleRate {
        value: v - p.sigma0 * v.abs() * z / g,
        contact_free: false,
    }
}

/// `F = σ₀ z + σ₁ ż + σ₂ v`.
#[inline]
pub fn lugre_force<T: Scalar>(z: T, zdot: T, v: T, p: &LuGreParams<T>) -> T {
    p.sigma0 * z + p.sigma1 * zdot + p.sigma2 * v
}

/// Steady bristle deflection `sgn(v) g(v) / σ₀`.
pub fn lugre_steady_state_z<T: Scalar>(v: T, f_n: T, p: &LuGreParams<T>) -> T {
    sign(v) * stribeck_g(v, f_n, p) / p.sigma0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyForce<T> {
    pub force: T,
    /// Set at `v = 0`, where the steady state is undefined.
    pub stiction: bool,
}

/// Sliding steady-state force `sgn(v) g(v) + σ₂ v`.
pub fn lugre_steady_state_force<T: Scalar>(v: T, f_n: T, p: &LuGreParams<T>) -> SteadyForce<T> {
    if v == T::zero() {
        return SteadyForce { force: T::zero(), stiction: true };
    }
    SteadyForce {
        force: sign(v) * stribeck_g(v, f_n, p) + p.sigma2 * v,
        stiction: false,
    }
}

/// `μ_c|F_N| sgn(v) + σ₂ v` with `sgn(0) = 0`.
pub fn coulomb_viscous_force<T: Scalar>(v: T, f_n: T, mu_c: T, sigma2: T) -> T {
    mu_c * f_n.abs() * sign(v) + sigma2 * v
}

#[inline]
pub(crate) fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const FN: f64 = 14.715;

    fn gt() -> LuGreParams<f64> {
        LuGreParams::ground_truth()
    }

    #[test]
    fn ground_truth_values() {
        let p = gt();
        assert_eq!(p.to_array(), [1.0e5, 316.23, 0.40, 0.30, 0.60, 1.0e-3]);
        assert_eq!(p.alpha(), 2.0);
        p.validate().unwrap();
    }

    #[test]
    fn validation() {
        assert!(LuGreParams::new(1e5, 316.0, 0.4, 0.7, 0.6, 1e-3).is_err());
        assert!(LuGreParams::new(-1.0, 316.0, 0.4, 0.3, 0.6, 1e-3).is_err());
        let mut p = gt();
        assert!(p.set_alpha(1.5).is_err());
        p.set_alpha(2.0).unwrap();
    }

    #[test]
    fn stribeck_examples() {
        assert_abs_diff_eq!(stribeck_g(0.0, FN, &gt()), 8.829, epsilon = 1e-12);
        assert_abs_diff_eq!(stribeck_g(1.0, FN, &gt()), 4.4145, epsilon = 1e-9);
        assert_abs_diff_eq!(stribeck_g(1e-3, FN, &gt()), 4.4145 + 4.4145 * (-1.0f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(stribeck_g(1e-3, FN, &gt()), 6.0384, epsilon = 1e-3);
    }

    #[test]
    fn zdot_examples() {
        assert_eq!(lugre_zdot(0.0, 3e-5, FN, &gt()).value, 0.0);
        assert_abs_diff_eq!(lugre_zdot(1.0, 4.4145e-5, FN, &gt()).value, 0.0, epsilon = 1e-9);
        assert_eq!(lugre_zdot(1.0, 0.0, FN, &gt()).value, 1.0);
        let free = lugre_zdot(0.2, 1e-5, 0.0, &gt());
        assert!(free.contact_free);
        assert_eq!(free.value, 0.2);
    }

    #[test]
    fn force_examples() {
        assert_eq!(lugre_force(0.0, 0.0, 0.0, &gt()), 0.0);
        let z = lugre_steady_state_z(1.0, FN, &gt());
        assert_abs_diff_eq!(lugre_force(z, 0.0, 1.0, &gt()), 4.8145, epsilon = 1e-9);
        assert_abs_diff_eq!(lugre_force(1e-4, 0.0, 0.0, &gt()), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn steady_state_examples() {
        assert_abs_diff_eq!(lugre_steady_state_force(1.0, FN, &gt()).force, 4.8145, epsilon = 1e-9);
        assert_abs_diff_eq!(lugre_steady_state_force(-1.0, FN, &gt()).force, -4.8145, epsilon = 1e-9);
        assert_abs_diff_eq!(lugre_steady_state_force(1e-6, FN, &gt()).force, 8.829, epsilon = 1e-4);
        let rest = lugre_steady_state_force(0.0, FN, &gt());
        assert!(rest.stiction);
        assert_eq!(rest.force, 0.0);
    }

    #[test]
    fn coulomb_viscous_examples() {
        assert_eq!(coulomb_viscous_force(0.0, FN, 0.3, 0.4), 0.0);
        assert_abs_diff_eq!(coulomb_viscous_force(1.0, FN, 0.3, 0.4), 4.8145, epsilon = 1e-12);
        assert_abs_diff_eq!(coulomb_viscous_force(-1.0, FN, 0.3, 0.4), -4.8145, epsilon = 1e-12);
    }

    #[test]
    fn steady_state_residual_on_grid() {
        let p = gt();
        for i in -1000..=1000 {
            if i == 0 {
                continue;
            }
            let v = i as f64 / 1000.0;
            let z = lugre_steady_state_z(v, FN, &p);
            assert!(lugre_zdot(v, z, FN, &p).value.abs() < 1e-12, "v = {v}");
        }
    }

    #[test]
    fn negative_normal_force_uses_magnitude() {
        assert_eq!(stribeck_g(0.3e-3, -FN, &gt()), stribeck_g(0.3e-3, FN, &gt()));
    }

    proptest! {
        #[test]
        fn stribeck_bounds_and_symmetry(v in -2.0f64..2.0, f_n in -40.0f64..40.0) {
            let p = gt();
            let g = stribeck_g(v, f_n, &p);
            prop_assert!(g >= p.mu_c * f_n.abs() - 1e-12);
            prop_assert!(g <= p.mu_s * f_n.abs() + 1e-12);
            prop_assert_eq!(g, stribeck_g(-v, f_n, &p));
        }

        #[test]
        fn stribeck_non_increasing(a in 0.0f64..0.01, b in 0.0f64..0.01, f_n in 0.1f64..40.0) {
            let p = gt();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(stribeck_g(hi, f_n, &p) <= stribeck_g(lo, f_n, &p) + 1e-12);
        }

        #[test]
        fn steady_force_is_odd(v in 1e-6f64..2.0, f_n in 0.0f64..40.0) {
            let p = gt();
            let a = lugre_steady_state_force(v, f_n, &p).force;
            let b = lugre_steady_state_force(-v, f_n, &p).force;
            prop_assert!((a + b).abs() < 1e-12);
        }
    }
}
