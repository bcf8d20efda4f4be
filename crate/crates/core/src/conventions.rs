//! Frozen sign conventions and numerical defaults.
//!
//! `hbar = 1` and `Omega_F(H_w, -) = -d_F w` throughout. The symplectic sign
//! is fixed so that the spin-1/2 quantization of `H_{e3}` has eigenvalue
//! `+1/2` on the constant section; every other sign below is a consequence,
//! measured once and asserted by the test suites.

/// Sign of `Omega_F = s * 4j / (1 + |z|^2)^2 dx ^ dy` in the North chart.
pub const SYMPLECTIC_SIGN: f64 = 1.0;

/// `{H_a, H_b} = s_P H_{a x b}`.
pub const POISSON_SIGN: f64 = 1.0;

/// `[O(H_a), O(H_b)] = s_D i O(H_{a x b})`.
pub const DIRAC_SIGN: f64 = -1.0;

/// Latitude holonomy of the unit monopole: `exp(s i m Omega)`.
pub const MONOPOLE_HOLONOMY_SIGN: f64 = 1.0;

/// Componentwise signs identifying the embedded sphere with the coadjoint
/// orbit in su(2)^*: the orbit point of `x` pairs with `sum_a c_a tau_a` as
/// `sum_a ORBIT_AXIS[a] x_a c_a`. With these signs the Möbius action with
/// automorphy factor is the coadjoint action.
pub const ORBIT_AXIS: [f64; 3] = [-1.0, 1.0, 1.0];

/// Step for finite-difference gradients of user Hamiltonians.
pub const GRADIENT_FD_STEP: f64 = 1e-6;

/// Step for differentiating `X(exp(t tau_a))` at `t = 0`.
pub const REP_FD_STEP: f64 = 1e-6;

/// Step for `dX` in the gauge law.
pub const GAUGE_FD_STEP: f64 = 1e-5;

/// Path-parameter step along lifted paths in the total-space residual.
pub const LIFT_FD_STEP: f64 = 1e-4;

/// RK4 steps per unit path parameter.
pub const DEFAULT_STEPS_PER_UNIT: usize = 1000;

/// Parameter tolerance when bisecting chart crossings.
pub const CROSSING_TOL: f64 = 1e-10;

/// Largest polarization residual a model's orbit functions may have.
pub const ASSUME_TOL: f64 = 1e-6;

/// Default sphere rule sizes for a fiber of spin `two_j / 2`.
pub fn default_rule_sizes(two_j: u32) -> (usize, usize) {
    (two_j as usize + 8, 2 * two_j as usize + 9)
}

/// Snapshot of every frozen sign, for result documents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionLedger {
    pub symplectic_sign: f64,
    pub poisson_sign: f64,
    pub dirac_sign: f64,
    pub monopole_holonomy_sign: f64,
    pub orbit_axis: [f64; 3],
}

pub const LEDGER: ConventionLedger = ConventionLedger {
    symplectic_sign: SYMPLECTIC_SIGN,
    poisson_sign: POISSON_SIGN,
    dirac_sign: DIRAC_SIGN,
    monopole_holonomy_sign: MONOPOLE_HOLONOMY_SIGN,
    orbit_axis: ORBIT_AXIS,
};
