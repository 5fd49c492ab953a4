//! Exact simulation of the qubits plus a Fock-truncated bath.
//!
//! The propagator is diagonal in the bath number basis, and the thermal bath
//! state is diagonal there too, so the global state is block diagonal:
//! `rho(t) = sum_n p(n) U(n) rho_AB(0) U(n)^dagger (x) |n><n|`. Every reduced
//! state and entropy follows from the 4x4 blocks and the weights `p(n)`; the
//! full matrix is never built.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dephasing::{coupling_profile, BathSpec, Sign};
use crate::error::{Error, Result};
use crate::info::{CorrelationReport, EntropyTable};
use crate::linalg::{
    reduce, relative_entropy, shannon_entropy, tensor_product, ComplexMatrix, DensityOperator,
};

pub const DEFAULT_EPS_TRUNC: f64 = 1e-12;
pub const DEFAULT_CONFIGURATION_CAP: usize = 1 << 21;
const MIN_N_MAX: usize = 3;

/// Thermal bath truncated at `n_max` quanta per mode, weights renormalized.
#[derive(Clone, Debug)]
pub struct TruncatedBath {
    bath: BathSpec,
    n_max: usize,
    couplings: Vec<f64>,
    /// Per-mode level weights `p(n)`, `n = 0..=n_max`; identical for every mode.
    level_weights: Vec<f64>,
}

impl TruncatedBath {
    /// `n_max = ceil(-ln(eps) / (beta hbar omega0)) - 1`, at least 3.
    pub fn new(bath: BathSpec, eps_trunc: f64) -> Result<Self> {
        if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_trunc = {eps_trunc} must lie in (0, 1)"
            )));
        }
        bath.validate()?;
        let levels = (-eps_trunc.ln() / bath.thermal_exponent()).ceil();
        if !(levels < 1e7) {
            return Err(Error::InvalidParameter(format!(
                "truncation needs {levels} levels per mode"
            )));
        }
        let n_max = (levels as usize).saturating_sub(1).max(MIN_N_MAX);
        Self::with_n_max(bath, n_max)
    }

    pub fn with_n_max(bath: BathSpec, n_max: usize) -> Result<Self> {
        bath.validate()?;
        let x = bath.thermal_exponent();
        let raw: Vec<f64> = (0..=n_max).map(|n| (-x * n as f64).exp()).collect();
        let z: f64 = raw.iter().sum();
        Ok(Self {
            couplings: coupling_profile(&bath),
            level_weights: raw.iter().map(|w| w / z).collect(),
            bath,
            n_max,
        })
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Thermal weight discarded per mode, `e^{-beta hbar omega0 (n_max + 1)}`.
    pub fn tail_weight(&self) -> f64 {
        (-self.bath.thermal_exponent() * (self.n_max + 1) as f64).exp()
    }

    pub fn level_weights(&self) -> &[f64] {
        &self.level_weights
    }

    /// `(n_max + 1)^N`
    pub fn configuration_count(&self) -> u128 {
        (self.n_max as u128 + 1).saturating_pow(self.bath.modes as u32)
    }

    /// Bath dimension as used for state information.
    pub fn bath_dimension(&self) -> f64 {
        (self.n_max as f64 + 1.0).powi(self.bath.modes as i32)
    }

    /// Every configuration with its probability and `sum_k g_k n_k`, in lexicographic order.
    pub fn configurations(&self, cap: usize) -> Result<Vec<(f64, f64)>> {
        let count = self.configuration_count();
        if count > cap as u128 {
            return Err(Error::ConfigurationCap {
                configs: count,
                cap,
            });
        }
        let mut out = vec![(1.0, 0.0)];
        for &gk in &self.couplings {
            out = out
                .iter()
                .flat_map(|&(p, e)| {
                    self.level_weights
                        .iter()
                        .enumerate()
                        .map(move |(n, &w)| (p * w, e + gk * n as f64))
                })
                .collect();
        }
        Ok(out)
    }
}

/// `prod_k sum_{n <= n_max} p(n) e^{-2i (gA +/- gB) g_k n t}`.
pub fn truncated_theta(tb: &TruncatedBath, t: f64, sign: Sign) -> Complex64 {
    let branch = tb.bath.branch_coupling(sign);
    tb.couplings
        .iter()
        .map(|&gk| {
            let chi = 2.0 * branch * gk * t;
            tb.level_weights
                .iter()
                .enumerate()
                .map(|(n, &w)| Complex64::from_polar(w, -chi * n as f64))
                .sum::<Complex64>()
        })
        .product()
}

/// Conditional two-qubit state for one bath configuration.
#[derive(Clone, Debug)]
pub struct Block {
    pub probability: f64,
    pub state: DensityOperator,
}

/// Block-diagonal global state `sum_n p(n) block_n (x) |n><n|`.
#[derive(Clone, Debug)]
pub struct BlockState {
    pub blocks: Vec<Block>,
    bath_dimension: f64,
}

/// `sigma_3` eigenvalues of `|00>, |01>, |10>, |11>` weighted by the couplings.
fn qubit_energies(bath: &BathSpec) -> [f64; 4] {
    [
        bath.g_a + bath.g_b,
        bath.g_a - bath.g_b,
        -bath.g_a + bath.g_b,
        -bath.g_a - bath.g_b,
    ]
}

/// Evolves `rho_ab0` with `U(n) = exp(-i (gA sigma_3 (x) 1 + 1 (x) gB sigma_3) E(n) t)`.
pub fn evolve_exact(
    tb: &TruncatedBath,
    rho_ab0: &DensityOperator,
    t: f64,
    cap: usize,
) -> Result<BlockState> {
    if rho_ab0.dims() != [2, 2] {
        return Err(Error::InvalidParameter(format!(
            "initial state must be two qubits, got {:?}",
            rho_ab0.dims()
        )));
    }
    let lam = qubit_energies(&tb.bath);
    let m0 = rho_ab0.matrix();
    let blocks = tb
        .configurations(cap)?
        .into_par_iter()
        .map(|(probability, energy)| {
            let m = ComplexMatrix::from_fn(4, |i, j| {
                m0.get(i, j) * Complex64::from_polar(1.0, -(lam[i] - lam[j]) * energy * t)
            });
            Block {
                probability,
                state: DensityOperator::from_parts_unchecked(m, vec![2, 2]),
            }
        })
        .collect();
    Ok(BlockState {
        blocks,
        bath_dimension: tb.bath_dimension(),
    })
}

impl BlockState {
    fn weighted_sum(
        &self,
        f: impl Fn(&DensityOperator) -> DensityOperator + Sync,
    ) -> DensityOperator {
        let first = f(&self.blocks[0].state);
        let d = first.dim();
        let dims = first.dims().to_vec();
        let mut acc = ComplexMatrix::zeros(d);
        for b in &self.blocks {
            acc = &acc + &f(&b.state).matrix().scale(b.probability);
        }
        DensityOperator::from_parts_unchecked(acc, dims)
    }

    /// `Tr_C rho`
    pub fn reduced_qubits(&self) -> DensityOperator {
        self.weighted_sum(|s| s.clone())
    }

    fn probabilities(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.probability).collect()
    }

    fn mean_block_entropy(&self, f: impl Fn(&DensityOperator) -> f64 + Sync) -> f64 {
        self.blocks
            .par_iter()
            .map(|b| b.probability * f(&b.state))
            .collect::<Vec<_>>()
            .iter()
            .sum()
    }

    pub fn entropy_table(&self) -> Result<EntropyTable> {
        let h = shannon_entropy(&self.probabilities());
        let ab = self.reduced_qubits();
        let s_a = reduce(&ab, &[0])?.entropy();
        let s_b = reduce(&ab, &[1])?.entropy();
        let given = |keep: usize| {
            self.mean_block_entropy(move |s| reduce(s, &[keep]).expect("two-qubit block").entropy())
        };
        Ok(EntropyTable {
            s: h + self.mean_block_entropy(|s| s.entropy()),
            s_a,
            s_b,
            s_c: h,
            s_ab: ab.entropy(),
            s_ac: h + given(0),
            s_bc: h + given(1),
        })
    }

    /// `S(rho || rho_A (x) rho_B (x) rho_C) = sum_n p(n) S(block_n || rho_A (x) rho_B)`.
    pub fn total_correlation(&self) -> Result<f64> {
        let ab = self.reduced_qubits();
        let product = tensor_product(&reduce(&ab, &[0])?, &reduce(&ab, &[1])?)?;
        let terms = self
            .blocks
            .par_iter()
            .map(|b| relative_entropy(&b.state, &product).map(|s| b.probability * s))
            .collect::<Result<Vec<_>>>()?;
        Ok(terms.iter().sum())
    }

    pub fn report(&self) -> Result<CorrelationReport> {
        let e = self.entropy_table()?;
        let mut r = CorrelationReport::from_entropies(&e, [2, 2, 1], self.total_correlation()?)?;
        // (n_max + 1)^N can overflow usize, so add ln d_C separately
        let ln_dc = self.bath_dimension.ln();
        r.info_total += ln_dc;
        r.info_local += ln_dc;
        Ok(r)
    }
}

/// Full correlation report of qubits plus truncated bath at time `t`.
pub fn exact_report(
    tb: &TruncatedBath,
    rho_ab0: &DensityOperator,
    t: f64,
    cap: usize,
) -> Result<CorrelationReport> {
    evolve_exact(tb, rho_ab0, t, cap)?.report()
}
