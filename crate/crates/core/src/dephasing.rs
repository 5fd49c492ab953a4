//! Closed-form dynamics of two qubits dephasing in a finite bosonic bath.
//!
//! The bath is `N` modes of equal frequency `omega0` in a thermal state at
//! inverse temperature `beta`, coupled through `hbar g_X sigma_3^X (x) sum_k g_k n_k`
//! with the Gaussian profile `g_k = g0 exp(-k^2 / delta^2)`. Everything the
//! qubits see is carried by the coherence factors `theta_+/-(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{
    accessible_information, bell_diagonal, bell_mutual_information, concurrence_eof,
    quantum_discord, BellDiagonalParams,
};
use crate::linalg::{ComplexMatrix, DensityOperator};

/// Parameters of the finite thermal bath and the qubit couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Number of modes `N`.
    pub modes: usize,
    pub omega0: f64,
    pub beta: f64,
    pub g0: f64,
    /// Gaussian width `delta` of the coupling profile, in units of the mode index.
    pub delta_width: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub hbar: f64,
}

impl Default for BathSpec {
    /// `N = 10, beta = 1, delta = 10N, g0 = 0.1, gA = 1, gB = 2, hbar = omega0 = 1`.
    fn default() -> Self {
        Self {
            modes: 10,
            omega0: 1.0,
            beta: 1.0,
            g0: 0.1,
            delta_width: 100.0,
            g_a: 1.0,
            g_b: 2.0,
            hbar: 1.0,
        }
    }
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.modes < 1 {
            return bad("bath needs at least one mode");
        }
        if !(self.beta > 0.0) || !(self.omega0 > 0.0) || !(self.hbar > 0.0) {
            return bad("beta, omega0 and hbar must be positive");
        }
        if !(self.g0 >= 0.0) || !(self.delta_width > 0.0) {
            return bad("g0 must be non-negative and delta_width positive");
        }
        if !self.g_a.is_finite()
            || !self.g_b.is_finite()
            || !self.beta.is_finite()
            || !self.g0.is_finite()
        {
            return bad("non-finite bath parameter");
        }
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// `beta hbar omega0`
    pub fn thermal_exponent(&self) -> f64 {
        self.beta * self.hbar * self.omega0
    }

    /// `y0 = sinh(beta hbar omega0 / 2)`
    pub fn y0(&self) -> f64 {
        (0.5 * self.thermal_exponent()).sinh()
    }

    pub fn branch_coupling(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.g_a + self.g_b,
            Sign::Minus => self.g_a - self.g_b,
        }
    }

    /// `g = min{|gA + gB|, |gA - gB|}`
    pub fn effective_coupling(&self) -> f64 {
        (self.g_a + self.g_b).abs().min((self.g_a - self.g_b).abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// `g_k = g0 exp(-k^2 / delta^2)` for `k = 1..=N`.
pub fn coupling_profile(bath: &BathSpec) -> Vec<f64> {
    let d2 = bath.delta_width * bath.delta_width;
    (1..=bath.modes)
        .map(|k| bath.g0 * (-((k * k) as f64) / d2).exp())
        .collect()
}

/// Modulus and phase of a coherence factor, summed mode by mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaPolar {
    pub modulus: f64,
    /// Unwrapped phase: the sum of per-mode principal arguments.
    pub phase: f64,
}

impl ThetaPolar {
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.phase)
    }
}

/// Each factor `(1 - q) / (1 - q e^{-i chi_k})`, `q = e^{-beta hbar omega0}`,
/// `chi_k = 2 (gA +/- gB) g_k t`, accumulated as log-modulus plus phase.
pub fn theta_polar(bath: &BathSpec, t: f64, sign: Sign) -> ThetaPolar {
    let x = bath.thermal_exponent();
    let q = (-x).exp();
    let one_minus_q = -(-x).exp_m1();
    let branch = bath.branch_coupling(sign);
    let mut log_mod = 0.0;
    let mut phase = 0.0;
    for gk in coupling_profile(bath) {
        let chi = 2.0 * branch * gk * t;
        let half_sin = (0.5 * chi).sin();
        // |1 - q e^{-i chi}|^2 = (1 - q)^2 + 4 q sin^2(chi / 2)
        let denom_sq = one_minus_q * one_minus_q + 4.0 * q * half_sin * half_sin;
        log_mod += one_minus_q.ln() - 0.5 * denom_sq.ln();
        phase -= (q * chi.sin()).atan2(1.0 - q * chi.cos());
    }
    ThetaPolar {
        modulus: log_mod.exp(),
        phase,
    }
}

pub fn theta_complex(bath: &BathSpec, t: f64, sign: Sign) -> Complex64 {
    theta_polar(bath, t, sign).to_complex()
}

/// `prod_k (1 + sin^2[(gA +/- gB) g_k t] / sinh^2(beta hbar omega0 / 2))^{-1/2}`
pub fn theta_modulus(bath: &BathSpec, t: f64, sign: Sign) -> f64 {
    let y0 = bath.y0();
    let branch = bath.branch_coupling(sign);
    let log: f64 = coupling_profile(bath)
        .into_iter()
        .map(|gk| {
            let s = (branch * gk * t).sin();
            (s * s / (y0 * y0)).ln_1p()
        })
        .sum();
    (-0.5 * log).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseAngles {
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

/// Local rotation angles that make the evolved antidiagonal elements real.
pub fn phase_angles(bath: &BathSpec, t: f64) -> PhaseAngles {
    let phi_plus = theta_polar(bath, t, Sign::Plus).phase;
    let phi_minus = theta_polar(bath, t, Sign::Minus).phase;
    PhaseAngles {
        phi_a: -(phi_plus + phi_minus) / 4.0,
        phi_b: -(phi_plus - phi_minus) / 4.0,
        phi_plus,
        phi_minus,
    }
}

/// Two-qubit state reached from `initial` given the two coherence factors:
/// populations are untouched, `<01|rho|10> = (c1+c2)/4 theta_-` and
/// `<00|rho|11> = (c1-c2)/4 theta_+`.
pub fn evolved_two_qubit_state(
    initial: &BellDiagonalParams,
    theta_plus: Complex64,
    theta_minus: Complex64,
) -> Result<DensityOperator> {
    let BellDiagonalParams { c1, c2, c3 } = *initial;
    let a = Complex64::new((1.0 + c3) / 4.0, 0.0);
    let b = Complex64::new((1.0 - c3) / 4.0, 0.0);
    let gamma = theta_minus * ((c1 + c2) / 4.0);
    let delta = theta_plus * ((c1 - c2) / 4.0);
    let mut m = ComplexMatrix::zeros(4);
    m.set(0, 0, a);
    m.set(3, 3, a);
    m.set(1, 1, b);
    m.set(2, 2, b);
    m.set(1, 2, gamma);
    m.set(2, 1, gamma.conj());
    m.set(0, 3, delta);
    m.set(3, 0, delta.conj());
    DensityOperator::new(m, vec![2, 2])
}

/// Closed-form reduced state of the qubits at time `t`.
pub fn evolved_state(
    initial: &BellDiagonalParams,
    bath: &BathSpec,
    t: f64,
) -> Result<DensityOperator> {
    evolved_two_qubit_state(
        initial,
        theta_complex(bath, t, Sign::Plus),
        theta_complex(bath, t, Sign::Minus),
    )
}

/// `W^dagger rho W` with `W = exp(-i phi_A sigma_3) (x) exp(-i phi_B sigma_3)`.
pub fn remove_local_phases(rho: &DensityOperator, angles: &PhaseAngles) -> Result<DensityOperator> {
    let rot = |phi: f64| {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 0, Complex64::from_polar(1.0, -phi));
        m.set(1, 1, Complex64::from_polar(1.0, phi));
        m
    };
    let w = rot(angles.phi_a).kron(&rot(angles.phi_b));
    DensityOperator::new(rho.matrix().conjugate_by(&w.adjoint()), rho.dims().to_vec())
}

/// Bell-diagonal parameters after the phase-removing local rotation.
pub fn evolve_bell_diagonal(
    initial: &BellDiagonalParams,
    bath: &BathSpec,
    t: f64,
) -> Result<BellDiagonalParams> {
    let minus = theta_modulus(bath, t, Sign::Minus);
    let plus = theta_modulus(bath, t, Sign::Plus);
    evolve_with_moduli(initial, plus, minus)
}

pub(crate) fn evolve_with_moduli(
    initial: &BellDiagonalParams,
    plus: f64,
    minus: f64,
) -> Result<BellDiagonalParams> {
    let BellDiagonalParams { c1, c2, c3 } = *initial;
    let sum = 0.5 * (minus + plus);
    let diff = 0.5 * (minus - plus);
    BellDiagonalParams::new(c1 * sum + c2 * diff, c1 * diff + c2 * sum, c3)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecoherenceTime {
    /// `sinh(beta hbar omega0 / 2) / (g G)` with `G^2 = (1/2) sum g_k^2`.
    pub t_d: f64,
    /// `G` from the exact sum.
    pub g_rate: f64,
    /// `(g0/2) (sqrt(pi/2) delta - 1)^{1/2}`; zero when the bracket is negative.
    pub g_approx: f64,
    /// `t_D` evaluated with `g_approx`.
    pub t_d_approx: f64,
    /// The qubit coupling `g` used.
    pub coupling: f64,
}

fn decoherence_time_for(bath: &BathSpec, coupling: f64) -> Result<DecoherenceTime> {
    bath.validate()?;
    let g = coupling.abs();
    let g_rate = (0.5 * coupling_profile(bath).iter().map(|gk| gk * gk).sum::<f64>()).sqrt();
    if g == 0.0 || g_rate == 0.0 {
        return Err(Error::NoDecoherence);
    }
    let g_approx = 0.5 * bath.g0 * ((PI / 2.0).sqrt() * bath.delta_width - 1.0).max(0.0).sqrt();
    let y0 = bath.y0();
    Ok(DecoherenceTime {
        t_d: y0 / (g * g_rate),
        g_rate,
        g_approx,
        t_d_approx: y0 / (g * g_approx),
        coupling: g,
    })
}

/// Decoherence time with `g = min{|gA + gB|, |gA - gB|}`.
pub fn decoherence_time(bath: &BathSpec) -> Result<DecoherenceTime> {
    decoherence_time_for(bath, bath.effective_coupling())
}

/// Decoherence time of one branch, `g = |gA +/- gB|`.
pub fn branch_decoherence_time(bath: &BathSpec, sign: Sign) -> Result<DecoherenceTime> {
    decoherence_time_for(bath, bath.branch_coupling(sign))
}

/// `tanh^N(beta hbar omega0 / 2)`, the lower bound of `|theta_+/-|`.
pub fn theta_floor(bath: &BathSpec) -> f64 {
    (0.5 * bath.thermal_exponent())
        .tanh()
        .powi(bath.modes as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointerBasisTime {
    /// `t_D sqrt(ln(|c1| / |c3|))` with the exact-sum `t_D`.
    pub t_pb: f64,
    /// Same with the approximate `G`.
    pub t_pb_approx: f64,
    /// `+1` when `c2 = -c1`, `-1` when `c2 = c1`.
    pub epsilon: i8,
    pub decoherence: DecoherenceTime,
}

const FAMILY_TOL: f64 = 1e-12;

/// Instant at which the accessible information freezes, for `c2 = -eps c1`.
///
/// `Ok(None)` when no sudden change happens: `|c1| < |c3|`, `c3 = 0` (the
/// crossing is never reached), or the relevant branch does not decohere.
pub fn pointer_basis_time(
    initial: &BellDiagonalParams,
    bath: &BathSpec,
) -> Result<Option<PointerBasisTime>> {
    let BellDiagonalParams { c1, c2, c3 } = *initial;
    let epsilon: i8 = if (c2 + c1).abs() <= FAMILY_TOL {
        1
    } else if (c2 - c1).abs() <= FAMILY_TOL {
        -1
    } else {
        return Err(Error::UnsupportedFamily);
    };
    let (a1, a3) = (c1.abs(), c3.abs());
    if a1 < a3 - FAMILY_TOL || a3 == 0.0 {
        return Ok(None);
    }
    let coupling = bath.g_a + f64::from(epsilon) * bath.g_b;
    let dec = match decoherence_time_for(bath, coupling) {
        Ok(d) => d,
        Err(Error::NoDecoherence) => return Ok(None),
        Err(e) => return Err(e),
    };
    let factor = (a1 / a3).ln().max(0.0).sqrt();
    Ok(Some(PointerBasisTime {
        t_pb: dec.t_d * factor,
        t_pb_approx: dec.t_d_approx * factor,
        epsilon,
        decoherence: dec,
    }))
}

/// `omega_c^2 eta = sqrt(pi/32) g0^2 delta / Gamma(1 + s)`: the Ohmic-like
/// spectral density `eta omega^s omega_c^{1-s} e^{-omega/omega_c}` whose
/// integral matches the large-width `G^2`.
pub fn ohmic_map(bath: &BathSpec, s: f64) -> Result<f64> {
    if !(s > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Ohmic exponent s = {s} must exceed -1"
        )));
    }
    Ok((PI / 32.0).sqrt() * bath.g0 * bath.g0 * bath.delta_width
        / statrs::function::gamma::gamma(1.0 + s))
}

/// `n` intervals spanning `[t_min, t_max]` geometrically, `n = ceil(decades * points_per_decade)`.
pub fn log_time_grid(t_min: f64, t_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() || points_per_decade == 0 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < t_min < t_max and points_per_decade > 0 (got {t_min}, {t_max}, {points_per_decade})"
        )));
    }
    let decades = (t_max / t_min).log10();
    let n = ((decades * points_per_decade as f64).ceil() as usize).max(1);
    let ln_ratio = (t_max / t_min).ln();
    let mut grid: Vec<f64> = (0..=n)
        .map(|i| t_min * (ln_ratio * i as f64 / n as f64).exp())
        .collect();
    grid[n] = t_max;
    Ok(grid)
}

/// Bath, initial Bell-diagonal state and evaluation times.
#[derive(Clone, Debug, PartialEq)]
pub struct DephasingRun {
    pub bath: BathSpec,
    pub initial: BellDiagonalParams,
    pub t_grid: Vec<f64>,
}

impl DephasingRun {
    pub fn new(bath: BathSpec, initial: BellDiagonalParams, t_grid: Vec<f64>) -> Result<Self> {
        bath.validate()?;
        if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "time grid must be non-empty, non-negative and strictly increasing".into(),
            ));
        }
        Ok(Self {
            bath,
            initial,
            t_grid,
        })
    }
}

/// Per-instant information quantities of a dephasing trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub theta_minus_abs: f64,
    pub theta_plus_abs: f64,
    pub c_prime: BellDiagonalParams,
    pub i_ab: f64,
    /// `I_AB(0) - I_AB(t)`
    pub i3: f64,
    pub discord: f64,
    pub accessible: f64,
    pub concurrence: f64,
    pub eof: f64,
    /// `I3(t) + D(t) - D(0)`
    pub conservation_residual: f64,
    /// Whether `max |c_i'| = |c3|`, i.e. the conservation relation is expected to hold.
    pub conservation_active: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub bath: BathSpec,
    pub initial: BellDiagonalParams,
    pub points: Vec<SeriesPoint>,
}

pub fn series_point(bath: &BathSpec, initial: &BellDiagonalParams, t: f64) -> Result<SeriesPoint> {
    let minus = theta_modulus(bath, t, Sign::Minus);
    let plus = theta_modulus(bath, t, Sign::Plus);
    let c = evolve_with_moduli(initial, plus, minus)?;
    let i_ab = bell_mutual_information(&c);
    let discord = quantum_discord(&c);
    let ent = concurrence_eof(&bell_diagonal(&c)?)?;
    let i3 = bell_mutual_information(initial) - i_ab;
    Ok(SeriesPoint {
        t,
        theta_minus_abs: minus,
        theta_plus_abs: plus,
        c_prime: c,
        i_ab,
        i3,
        discord,
        accessible: accessible_information(&c),
        concurrence: ent.concurrence,
        eof: ent.eof,
        conservation_residual: i3 + discord - quantum_discord(initial),
        conservation_active: c.c1.abs().max(c.c2.abs()) <= c.c3.abs(),
    })
}

/// Evaluates every grid time in parallel; output is in grid order.
pub fn information_timeseries(run: &DephasingRun) -> Result<TimeSeries> {
    let points = run
        .t_grid
        .par_iter()
        .map(|&t| series_point(&run.bath, &run.initial, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries {
        bath: run.bath,
        initial: run.initial,
        points,
    })
}
