use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Piecewise-constant-in-time load: the value of the last breakpoint at or
/// before `t` (zero before the first breakpoint).
#[derive(Clone, Debug, PartialEq)]
pub struct LoadSchedule<T> {
    breakpoints: Vec<(T, T)>,
}

impl<T: Scalar> LoadSchedule<T> {
    pub fn new(breakpoints: Vec<(T, T)>) -> Result<Self> {
        if breakpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("load breakpoint times must be strictly increasing".into()));
        }
        Ok(LoadSchedule { breakpoints })
    }

    pub fn constant(value: T) -> Self {
        LoadSchedule { breakpoints: vec![(T::zero(), value)] }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn breakpoints(&self) -> &[(T, T)] {
        &self.breakpoints
    }

    pub fn value_at(&self, t: T) -> T {
        self.breakpoints
            .iter()
            .take_while(|(tb, _)| *tb <= t)
            .last()
            .map(|(_, v)| *v)
            .unwrap_or(T::zero())
    }

    /// Value after the last breakpoint; used by stationary solves.
    pub fn final_value(&self) -> T {
        self.breakpoints.last().map(|(_, v)| *v).unwrap_or(T::zero())
    }

    /// Same schedule with every value multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        LoadSchedule { breakpoints: self.breakpoints.iter().map(|&(t, v)| (t, v * factor)).collect() }
    }
}

/// Sign of the velocity term in the porous normal stress.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PorousStressSign {
    /// `sigma_p = -P_l - (eps / (4 K_n)) u_n`: the interface term dissipates energy.
    #[default]
    Dissipative,
    /// `sigma_p = -P_l + (eps / (4 K_n)) u_n`.
    Flipped,
}

/// Physical and numerical coefficients of both models.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysParams<T> {
    /// Dynamic viscosity.
    pub mu: T,
    /// Fluid density.
    pub rho_f: T,
    /// Layer thickness.
    pub epsilon: T,
    /// Tangential permeability of the layer.
    pub k_tau: T,
    /// Normal permeability of the layer.
    pub k_n: T,
    /// Pressure `P` on the loaded boundaries (`sigma n = -P n`).
    pub pbar: LoadSchedule<T>,
    /// Pressure stabilization constant.
    pub delta_stab: T,
    /// Wall inertia per unit length (`rho_s h_s`).
    pub rho_s_h: T,
    /// Wall tension.
    pub c1: T,
    /// Wall spring stiffness.
    pub c0: T,
    /// Nitsche penalty for the fluid-wall coupling; `None` selects `100 mu`.
    pub gamma_fsi: Option<T>,
    /// Contact parameter; `None` selects `c1 / h`.
    pub gamma_c: Option<T>,
    /// Contact floor; `None` selects `1e-3` times the channel height.
    pub g_min: Option<T>,
    pub sigma_p_sign: PorousStressSign,
}

impl<T: Scalar> Default for PhysParams<T> {
    /// Fluid and layer values of the two-reservoir experiment
    /// (`mu = 0.03`, `rho_f = 1`, `eps = 0.01`, `K_tau = K_n = 1`).
    fn default() -> Self {
        PhysParams {
            mu: T::of(0.03),
            rho_f: T::one(),
            epsilon: T::of(0.01),
            k_tau: T::one(),
            k_n: T::one(),
            pbar: LoadSchedule::zero(),
            delta_stab: T::of(0.1),
            rho_s_h: T::one(),
            c1: T::one(),
            c0: T::zero(),
            gamma_fsi: None,
            gamma_c: None,
            g_min: None,
            sigma_p_sign: PorousStressSign::Dissipative,
        }
    }
}

impl<T: Scalar> PhysParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [("mu", self.mu), ("rho_f", self.rho_f), ("epsilon", self.epsilon), ("k_n", self.k_n)];
        for (name, v) in positive {
            if !(v > T::zero()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [("k_tau", self.k_tau), ("delta_stab", self.delta_stab), ("rho_s_h", self.rho_s_h), ("c1", self.c1), ("c0", self.c0)];
        for (name, v) in nonneg {
            if !(v >= T::zero()) {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("gamma_fsi", self.gamma_fsi), ("gamma_c", self.gamma_c), ("g_min", self.g_min)] {
            if let Some(v) = v {
                if !(v > T::zero()) {
                    return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn eps_k_tau(&self) -> T {
        self.epsilon * self.k_tau
    }

    /// Coefficient `eps / (4 K_n)` of the normal-velocity term in `sigma_p`.
    pub fn normal_resistance(&self) -> T {
        self.epsilon / (T::of(4.0) * self.k_n)
    }
}
