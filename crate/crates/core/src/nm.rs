//! Non-Markovianity witness: the time average of the effective coherence factor.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::dephasing::{coupling_profile, BathSpec};
use crate::error::{Error, Result};

pub const DEFAULT_PHASE_STEP: f64 = PI / 20.0;
const SINC_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NMParams {
    pub bath: BathSpec,
    pub t_final: f64,
    /// Largest phase advance `2 g max(g_k) dt` allowed per trapezoid step.
    pub max_phase_step: f64,
}

impl NMParams {
    pub fn new(bath: BathSpec, t_final: f64) -> Result<Self> {
        Self {
            bath,
            t_final,
            max_phase_step: DEFAULT_PHASE_STEP,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.bath.validate()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        if !(self.max_phase_step > 0.0) {
            return Err(Error::InvalidParameter(
                "max_phase_step must be positive".into(),
            ));
        }
        Ok(self)
    }

    fn g(&self) -> f64 {
        self.bath.effective_coupling()
    }
}

/// `prod_k (1 + sin^2(g g_k t) / y0^2)^{-1/2}` with `g = min{|gA + gB|, |gA - gB|}`.
pub fn theta_effective(p: &NMParams, t: f64) -> f64 {
    let y0 = p.bath.y0();
    let g = p.g();
    let log: f64 = coupling_profile(&p.bath)
        .into_iter()
        .map(|gk| {
            let s = (g * gk * t).sin();
            (s * s / (y0 * y0)).ln_1p()
        })
        .sum();
    (-0.5 * log).exp()
}

/// `(1/N) sum_k cos(2 g g_k t)`
pub fn cosine_average(p: &NMParams, t: f64) -> f64 {
    let g = p.g();
    let gk = coupling_profile(&p.bath);
    gk.iter().map(|&gk| (2.0 * g * gk * t).cos()).sum::<f64>() / gk.len() as f64
}

fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Time average of `cosine_average` over `[0, t]`: `(1/N) sum_k sinc(2 g g_k t)`.
pub fn sinc_average(p: &NMParams, t: f64) -> f64 {
    let g = p.g();
    let gk = coupling_profile(&p.bath);
    gk.iter().map(|&gk| sinc(2.0 * g * gk * t)).sum::<f64>() / gk.len() as f64
}

/// `(1/t_final) int_0^{t_final} theta_effective dt` by the trapezoid rule.
pub fn nm_numeric(p: &NMParams) -> f64 {
    let g = p.g();
    let gmax = coupling_profile(&p.bath).into_iter().fold(0.0, f64::max);
    let rate = 2.0 * g * gmax;
    if rate == 0.0 {
        return 1.0;
    }
    let max_dt = p.max_phase_step / rate;
    let steps = (p.t_final / max_dt).ceil().max(1.0) as usize;
    let dt = p.t_final / steps as f64;
    let inner: f64 = (1..steps)
        .into_par_iter()
        .map(|i| theta_effective(p, i as f64 * dt))
        .sum();
    let ends = 0.5 * (theta_effective(p, 0.0) + theta_effective(p, p.t_final));
    (inner + ends) * dt / p.t_final
}

/// `-N [1 - sinc_average(t_final)] / (4 sinh^2(beta hbar omega0 / 2))`
pub fn ln_nm_analytic(p: &NMParams) -> f64 {
    let y0 = p.bath.y0();
    -(p.bath.modes as f64) * (1.0 - sinc_average(p, p.t_final)) / (4.0 * y0 * y0)
}

/// Low-temperature closed form; underflows to 0 at high temperature, see [`ln_nm_analytic`].
pub fn nm_analytic(p: &NMParams) -> f64 {
    ln_nm_analytic(p).exp()
}

/// `-N / (4 sinh^2(beta hbar omega0 / 2))`
pub fn ln_nm_equilibrium(bath: &BathSpec) -> f64 {
    let y0 = bath.y0();
    -(bath.modes as f64) / (4.0 * y0 * y0)
}

pub fn nm_equilibrium(bath: &BathSpec) -> f64 {
    ln_nm_equilibrium(bath).exp()
}

/// Analytic witness on a `modes x beta` grid; rows follow `modes`, columns `betas`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NmSurface {
    pub betas: Vec<f64>,
    pub modes: Vec<usize>,
    pub t: f64,
    pub nm: Vec<Vec<f64>>,
    pub ln_nm: Vec<Vec<f64>>,
}

/// Evaluates [`ln_nm_analytic`] on every cell with `delta = 10 N`; other parameters come from `template`.
pub fn nm_surface(
    betas: &[f64],
    modes: &[usize],
    template: &BathSpec,
    t: f64,
) -> Result<NmSurface> {
    if betas.is_empty() || modes.is_empty() {
        return Err(Error::InvalidParameter(
            "surface grids must be non-empty".into(),
        ));
    }
    let ln_nm = modes
        .par_iter()
        .map(|&n| {
            betas
                .iter()
                .map(|&beta| {
                    let bath = BathSpec {
                        modes: n,
                        beta,
                        delta_width: 10.0 * n as f64,
                        ..*template
                    };
                    NMParams::new(bath, t).map(|p| ln_nm_analytic(&p))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let nm = ln_nm
        .iter()
        .map(|row| row.iter().map(|v| v.exp()).collect())
        .collect();
    Ok(NmSurface {
        betas: betas.to_vec(),
        modes: modes.to_vec(),
        t,
        nm,
        ln_nm,
    })
}

/// Largest rise `x_j - min_{i <= j} x_i` along a sampled curve; zero for non-increasing data.
pub fn recurrence_rise(values: &[f64]) -> f64 {
    let mut low = f64::INFINITY;
    let mut best = 0.0f64;
    for &v in values {
        low = low.min(v);
        best = best.max(v - low);
    }
    best
}
