//! Three-qubit benchmark states: the fixtures with interaction information
//! `ln 2`, `0` and `-ln 2`, the noisy one-parameter family, its closed forms
//! and the monogamy-crossing root.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{correlation_report, TripartiteState};
use crate::linalg::{tensor_product, ComplexMatrix, DensityOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    /// Uniform mixture of `|000>, |011>, |101>, |110>`.
    Rho1,
    /// `rho_AC (x) rho_B`, defaulting to `|Phi+><Phi+| (x) 1/2`.
    Rho2,
    /// `(|000><000| + |111><111|)/2`.
    Rho3,
}

impl FromStr for Fixture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho1" => Ok(Self::Rho1),
            "rho2" => Ok(Self::Rho2),
            "rho3" => Ok(Self::Rho3),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }
}

const QUBITS3: [usize; 3] = [2, 2, 2];

pub fn fixture(which: Fixture) -> Result<TripartiteState> {
    match which {
        Fixture::Rho1 => {
            let mut p = [0.0; 8];
            for idx in [0b000, 0b011, 0b101, 0b110] {
                p[idx] = 0.25;
            }
            TripartiteState::new(DensityOperator::diagonal(&p, QUBITS3.to_vec())?)
        }
        Fixture::Rho2 => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let z = Complex64::new(0.0, 0.0);
            let phi = DensityOperator::pure(
                &[Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)],
                vec![2, 2],
            )?;
            rho2_from(&phi, &DensityOperator::maximally_mixed(vec![2]))
        }
        Fixture::Rho3 => {
            let mut p = [0.0; 8];
            p[0b000] = 0.5;
            p[0b111] = 0.5;
            TripartiteState::new(DensityOperator::diagonal(&p, QUBITS3.to_vec())?)
        }
    }
}

/// `rho_AC (x) rho_B` in A, B, C subsystem order.
pub fn rho2_from(rho_ac: &DensityOperator, rho_b: &DensityOperator) -> Result<TripartiteState> {
    if rho_ac.num_subsystems() != 2 || rho_b.num_subsystems() != 1 {
        return Err(Error::InvalidParameter(
            "rho2 needs a bipartite rho_AC and a single-party rho_B".into(),
        ));
    }
    // (A, C, B) -> (A, B, C)
    TripartiteState::new(tensor_product(rho_ac, rho_b)?.permute_subsystems(&[0, 2, 1])?)
}

/// Mixing weight `x` and amplitudes of `a|000> + b|010> + g|101> + d|111>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AppendixFamilyParams {
    pub x: f64,
    pub amplitudes: [Complex64; 4],
}

impl AppendixFamilyParams {
    pub fn new(x: f64, amplitudes: [Complex64; 4]) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight x = {x} outside [0, 1]"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "amplitudes have squared norm {norm}"
            )));
        }
        Ok(Self { x, amplitudes })
    }

    /// The closed-form case: only the `|111>` amplitude is non-zero.
    pub fn corner(x: f64) -> Result<Self> {
        let z = Complex64::new(0.0, 0.0);
        Self::new(x, [z, z, z, Complex64::new(1.0, 0.0)])
    }
}

/// `((1-x)/8) 1 + x |psi><psi|`
pub fn family_state(p: &AppendixFamilyParams) -> Result<TripartiteState> {
    let mut psi = [Complex64::new(0.0, 0.0); 8];
    for (idx, amp) in [0b000, 0b010, 0b101, 0b111].into_iter().zip(p.amplitudes) {
        psi[idx] = amp;
    }
    let noise = ComplexMatrix::identity(8).scale((1.0 - p.x) / 8.0);
    let m = &noise + &ComplexMatrix::outer(&psi).scale(p.x);
    TripartiteState::new(DensityOperator::new(m, QUBITS3.to_vec())?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilyClosedForm {
    pub i3: f64,
    pub interaction: f64,
}

fn xlnx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// `I3` and the interaction information of the `|111>` family at weight `x`.
pub fn closed_form_i3_interaction(x: f64) -> Result<FamilyClosedForm> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("x = {x} outside [0, 1]")));
    }
    let i3 = xlnx(1.0 + 7.0 * x) / 8.0
        - 3.0 * xlnx(1.0 - x) / 8.0
        - 4.0 * xlnx(1.0 + x) / 8.0
        - 2.0 * xlnx(1.0 + 3.0 * x) / 8.0;
    let interaction =
        i3 + xlnx(1.0 - x) / 2.0 + 4.0 * xlnx(1.0 + x) / 2.0 - xlnx(1.0 + 3.0 * x) / 2.0;
    Ok(FamilyClosedForm { i3, interaction })
}

/// Root of the closed-form interaction information in `(0.3, 0.6)`, by bisection.
pub fn monogamy_crossing() -> f64 {
    let f = |x: f64| {
        closed_form_i3_interaction(x)
            .expect("bracket inside [0, 1]")
            .interaction
    };
    let (mut lo, mut hi) = (0.3, 0.6);
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One grid point of the closed-form vs numerical comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AppendixRow {
    pub x: f64,
    pub i3_closed: f64,
    pub interaction_closed: f64,
    pub i3_numeric: f64,
    pub interaction_numeric: f64,
    pub bound_min_pairwise: f64,
}

/// `points` evenly spaced weights on `[0, 1]` (both ends included).
pub fn appendix_grid(points: usize) -> Result<Vec<AppendixRow>> {
    if points < 2 {
        return Err(Error::InvalidParameter(
            "appendix grid needs at least 2 points".into(),
        ));
    }
    (0..points)
        .into_par_iter()
        .map(|k| {
            let x = k as f64 / (points - 1) as f64;
            let closed = closed_form_i3_interaction(x)?;
            let r = correlation_report(&family_state(&AppendixFamilyParams::corner(x)?)?)?;
            Ok(AppendixRow {
                x,
                i3_closed: closed.i3,
                interaction_closed: closed.interaction,
                i3_numeric: r.i3,
                interaction_numeric: r.interaction,
                bound_min_pairwise: r.min_pairwise_bound(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{monogamy_check, CorrelationReport};
    use crate::linalg::{random_state, Purity};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn report(s: &TripartiteState) -> CorrelationReport {
        correlation_report(s).unwrap()
    }

    #[test]
    fn fixture_interaction_values() {
        assert_abs_diff_eq!(
            report(&fixture(Fixture::Rho1).unwrap()).interaction,
            LN_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            report(&fixture(Fixture::Rho2).unwrap()).interaction,
            0.0,
            epsilon = 1e-12
        );
        let r3 = report(&fixture(Fixture::Rho3).unwrap());
        assert_abs_diff_eq!(r3.interaction, -LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(r3.i3, LN_2, epsilon = 1e-12);
        assert!("rho4".parse::<Fixture>().is_err());
    }

    #[test]
    fn rho2_is_a_monogamy_boundary_for_any_factors() {
        for seed in 0..100 {
            let ac = random_state(&[2, 2], Purity::Mixed, 2 * seed).unwrap();
            let b = random_state(&[2], Purity::Mixed, 2 * seed + 1).unwrap();
            let m = monogamy_check(&rho2_from(&ac, &b).unwrap()).unwrap();
            assert!(m.slack.abs() < 1e-10, "seed {seed}: {}", m.slack);
            assert!(m.monogamous);
        }
    }

    #[test]
    fn rho2_places_factors_in_abc_order() {
        let s = fixture(Fixture::Rho2).unwrap();
        let r = report(&s);
        assert_abs_diff_eq!(r.i_ac, 2.0 * LN_2, epsilon = 1e-12);
        assert!(r.i_ab.abs() < 1e-12 && r.i_bc.abs() < 1e-12);
    }

    #[test]
    fn family_examples() {
        let mixed = family_state(&AppendixFamilyParams::corner(0.0).unwrap()).unwrap();
        assert!(
            mixed
                .rho()
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(8).scale(0.125))
                < 1e-15
        );
        let pure = family_state(&AppendixFamilyParams::corner(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(pure.rho().matrix().get(7, 7).re, 1.0);
        assert!(report(&pure).interaction.abs() < 1e-12);
        let half = family_state(&AppendixFamilyParams::corner(0.5).unwrap()).unwrap();
        assert!(report(&half).interaction < 0.0);
        let violated = family_state(&AppendixFamilyParams::corner(0.6).unwrap()).unwrap();
        assert!(!monogamy_check(&violated).unwrap().monogamous);
        assert!(AppendixFamilyParams::corner(1.5).is_err());
        let z = Complex64::new(0.0, 0.0);
        assert!(AppendixFamilyParams::new(0.5, [z, z, z, Complex64::new(0.9, 0.0)]).is_err());
    }

    #[test]
    fn two_qubit_marginal_of_pure_family_member_has_rank_two() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let p =
            AppendixFamilyParams::new(1.0, [Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)])
                .unwrap();
        let ab = crate::linalg::reduce(family_state(&p).unwrap().rho(), &[0, 1]).unwrap();
        // GHZ-like: Tr_C gives (|00><00| + |11><11|)/2
        let spec = ab.spectrum();
        assert_eq!(spec.iter().filter(|&&l| l > 1e-12).count(), 2);
        assert_abs_diff_eq!(spec[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_endpoints() {
        let c0 = closed_form_i3_interaction(0.0).unwrap();
        assert_eq!((c0.i3, c0.interaction), (0.0, 0.0));
        assert!(closed_form_i3_interaction(1.0).unwrap().interaction.abs() < 1e-14);
        assert!(closed_form_i3_interaction(0.4).unwrap().interaction > 0.0);
        assert!(closed_form_i3_interaction(0.5).unwrap().interaction < 0.0);
        assert!(closed_form_i3_interaction(-0.1).is_err());
    }

    #[test]
    fn crossing_location() {
        assert_abs_diff_eq!(monogamy_crossing(), 0.43596, epsilon = 1e-4);
    }

    #[test]
    fn closed_forms_match_matrix_evaluation() {
        for row in appendix_grid(101).unwrap() {
            assert!((row.i3_closed - row.i3_numeric).abs() < 1e-9, "{row:?}");
            assert!(
                (row.interaction_closed - row.interaction_numeric).abs() < 1e-9,
                "{row:?}"
            );
            assert!(
                (row.i3_numeric - row.interaction_numeric - row.bound_min_pairwise).abs() < 1e-9
            );
        }
    }
}
