//! Static correlation measures for tripartite states: state information,
//! mutual informations, genuine tripartite correlations `I3`, interaction
//! information and the monogamy verdict, plus the Bell-diagonal discord and
//! two-qubit concurrence machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, pauli, reduce, relative_entropy, shannon_entropy, tensor_product,
    BipartiteCut, ComplexMatrix, DensityOperator,
};

/// Tolerance on internal identity checks (two routes to the same quantity).
pub const IDENTITY_TOL: f64 = 1e-9;
/// `interaction >= -MONOGAMY_TOL` counts as monogamous.
pub const MONOGAMY_TOL: f64 = 1e-9;
pub const BELL_EIGEN_TOL: f64 = 1e-12;

/// Density operator over exactly three subsystems, ordered A, B, C.
#[derive(Clone, Debug)]
pub struct TripartiteState(DensityOperator);

impl TripartiteState {
    pub fn new(rho: DensityOperator) -> Result<Self> {
        if rho.num_subsystems() != 3 {
            return Err(Error::InvalidParameter(format!(
                "tripartite state needs 3 subsystems, got dims {:?}",
                rho.dims()
            )));
        }
        Ok(Self(rho))
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.0
    }

    pub fn into_inner(self) -> DensityOperator {
        self.0
    }

    pub fn permuted(&self, order: [usize; 3]) -> Result<Self> {
        Ok(Self(self.0.permute_subsystems(&order)?))
    }
}

/// `ln d - S`
pub fn state_information(rho: &DensityOperator) -> f64 {
    (rho.dim() as f64).ln() - rho.entropy()
}

/// `I_{x:y} = S_x + S_y - S` across `cut`.
pub fn mutual_information(rho: &DensityOperator, cut: &BipartiteCut) -> Result<f64> {
    let other = cut.complement().ok_or_else(|| {
        Error::InvalidCut("mutual information needs a non-empty discard side".into())
    })?;
    let sx = reduce(rho, cut.keep())?.entropy();
    let sy = reduce(rho, other.keep())?.entropy();
    Ok(sx + sy - rho.entropy())
}

/// Entropies of a tripartite state and all its marginals (nats).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyTable {
    pub s: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_c: f64,
    pub s_ab: f64,
    pub s_ac: f64,
    pub s_bc: f64,
}

impl EntropyTable {
    pub fn of(state: &TripartiteState) -> Result<Self> {
        let rho = state.rho();
        let s = |keep: &[usize]| reduce(rho, keep).map(|r| r.entropy());
        Ok(Self {
            s: rho.entropy(),
            s_a: s(&[0])?,
            s_b: s(&[1])?,
            s_c: s(&[2])?,
            s_ab: s(&[0, 1])?,
            s_ac: s(&[0, 2])?,
            s_bc: s(&[1, 2])?,
        })
    }

    /// `S_AB + S_AC + S_BC - S_A - S_B - S_C - S`
    pub fn interaction_information(&self) -> f64 {
        self.s_ab + self.s_ac + self.s_bc - self.s_a - self.s_b - self.s_c - self.s
    }

    /// Six-term average of all bipartite mutual informations.
    pub fn total_correlation_average(&self) -> f64 {
        let pair = (self.s_a + self.s_b - self.s_ab)
            + (self.s_a + self.s_c - self.s_ac)
            + (self.s_b + self.s_c - self.s_bc);
        let split = (self.s_ab + self.s_c - self.s)
            + (self.s_ac + self.s_b - self.s)
            + (self.s_bc + self.s_a - self.s);
        (pair + split) / 3.0
    }
}

/// Every static correlation quantity of one tripartite state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_A")]
    pub s_a: f64,
    #[serde(rename = "S_B")]
    pub s_b: f64,
    #[serde(rename = "S_C")]
    pub s_c: f64,
    #[serde(rename = "S_AB")]
    pub s_ab: f64,
    #[serde(rename = "S_AC")]
    pub s_ac: f64,
    #[serde(rename = "S_BC")]
    pub s_bc: f64,
    #[serde(rename = "I_AB")]
    pub i_ab: f64,
    #[serde(rename = "I_AC")]
    pub i_ac: f64,
    #[serde(rename = "I_BC")]
    pub i_bc: f64,
    /// `I_{AB:C}`
    #[serde(rename = "I_ABc")]
    pub i_ab_c: f64,
    /// `I_{AC:B}`
    #[serde(rename = "I_ACb")]
    pub i_ac_b: f64,
    /// `I_{BC:A}`
    #[serde(rename = "I_BCa")]
    pub i_bc_a: f64,
    pub info_total: f64,
    pub info_local: f64,
    #[serde(rename = "I_T")]
    pub i_t: f64,
    pub interaction: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
    pub monogamous: bool,
}

impl CorrelationReport {
    /// Assembles the report from entropies; `total_correlation` is the
    /// relative-entropy route to `I_T`, checked against the six-term average.
    pub fn from_entropies(
        e: &EntropyTable,
        dims: [usize; 3],
        total_correlation: f64,
    ) -> Result<Self> {
        let average = e.total_correlation_average();
        let residual = (average - total_correlation).abs();
        if !(residual < IDENTITY_TOL) {
            return Err(Error::Inconsistent {
                check: "I_T relative entropy vs six-term average",
                residual,
            });
        }
        let ln = |d: usize| (d as f64).ln();
        let info_local = (ln(dims[0]) - e.s_a) + (ln(dims[1]) - e.s_b) + (ln(dims[2]) - e.s_c);
        let i_ab_c = e.s_ab + e.s_c - e.s;
        let i_ac_b = e.s_ac + e.s_b - e.s;
        let i_bc_a = e.s_bc + e.s_a - e.s;
        let interaction = e.interaction_information();
        Ok(Self {
            s: e.s,
            s_a: e.s_a,
            s_b: e.s_b,
            s_c: e.s_c,
            s_ab: e.s_ab,
            s_ac: e.s_ac,
            s_bc: e.s_bc,
            i_ab: e.s_a + e.s_b - e.s_ab,
            i_ac: e.s_a + e.s_c - e.s_ac,
            i_bc: e.s_b + e.s_c - e.s_bc,
            i_ab_c,
            i_ac_b,
            i_bc_a,
            info_total: ln(dims[0] * dims[1] * dims[2]) - e.s,
            info_local,
            i_t: total_correlation,
            interaction,
            i3: i_ab_c.min(i_ac_b).min(i_bc_a),
            monogamous: interaction >= -MONOGAMY_TOL,
        })
    }

    /// `min over permutations of (I_{X:Z} + I_{Y:Z})`
    pub fn min_pairwise_bound(&self) -> f64 {
        (self.i_ac + self.i_bc)
            .min(self.i_ab + self.i_bc)
            .min(self.i_ab + self.i_ac)
    }

    /// `max over permutations of I_{X:Y}`
    pub fn max_pairwise(&self) -> f64 {
        self.i_ab.max(self.i_ac).max(self.i_bc)
    }
}

pub fn correlation_report(state: &TripartiteState) -> Result<CorrelationReport> {
    let rho = state.rho();
    let e = EntropyTable::of(state)?;
    let a = reduce(rho, &[0])?;
    let b = reduce(rho, &[1])?;
    let c = reduce(rho, &[2])?;
    let product = tensor_product(&tensor_product(&a, &b)?, &c)?;
    let i_t = relative_entropy(rho, &product)?;
    let d = rho.dims();
    CorrelationReport::from_entropies(&e, [d[0], d[1], d[2]], i_t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonogamyCheck {
    pub monogamous: bool,
    /// The interaction information.
    pub slack: f64,
    pub result2_bound: f64,
}

pub fn monogamy_check(state: &TripartiteState) -> Result<MonogamyCheck> {
    monogamy_from_report(&correlation_report(state)?)
}

/// Verdict from a report, with `I3 = bound + slack` enforced to [`IDENTITY_TOL`].
pub fn monogamy_from_report(r: &CorrelationReport) -> Result<MonogamyCheck> {
    let bound = r.min_pairwise_bound();
    let residual = (r.i3 - bound - r.interaction).abs();
    if !(residual < IDENTITY_TOL) {
        return Err(Error::Inconsistent {
            check: "I3 = min(I_XZ + I_YZ) + interaction",
            residual,
        });
    }
    Ok(MonogamyCheck {
        monogamous: r.interaction >= -MONOGAMY_TOL,
        slack: r.interaction,
        result2_bound: bound,
    })
}

/// Correlation coefficients `(c1, c2, c3)` of a Bell-diagonal two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BellDiagonalParams {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let p = Self { c1, c2, c3 };
        let finite = [c1, c2, c3]
            .iter()
            .all(|c| c.is_finite() && c.abs() <= 1.0 + BELL_EIGEN_TOL);
        if !finite || p.eigenvalues().iter().any(|&l| l < -BELL_EIGEN_TOL) {
            return Err(Error::UnphysicalBellDiagonal { c1, c2, c3 });
        }
        Ok(p)
    }

    /// `c1 = c2 = c3 = c`
    pub fn werner(c: f64) -> Result<Self> {
        Self::new(c, c, c)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// Bell-basis populations.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let (c1, c2, c3) = (self.c1, self.c2, self.c3);
        [
            (1.0 - c1 - c2 - c3) / 4.0,
            (1.0 - c1 + c2 + c3) / 4.0,
            (1.0 + c1 - c2 + c3) / 4.0,
            (1.0 + c1 + c2 - c3) / 4.0,
        ]
    }

    /// `max |c_i|`
    pub fn max_abs(&self) -> f64 {
        self.c1.abs().max(self.c2.abs()).max(self.c3.abs())
    }
}

/// `(1/4)(1 (x) 1 + sum_i c_i sigma_i (x) sigma_i)`
pub fn bell_diagonal(params: &BellDiagonalParams) -> Result<DensityOperator> {
    let mut m = ComplexMatrix::identity(4);
    for (ci, s) in params.as_array().into_iter().zip(pauli::sigmas()) {
        m = &m + &s.kron(&s).scale(ci);
    }
    DensityOperator::new(m.scale(0.25), vec![2, 2])
}

/// `I_{A:B} = 2 ln 2 - H(eigenvalues)`; both marginals are maximally mixed.
pub fn bell_mutual_information(params: &BellDiagonalParams) -> f64 {
    let lam = params.eigenvalues().map(|l| l.max(0.0));
    2.0 * std::f64::consts::LN_2 - shannon_entropy(&lam)
}

/// `(1+c)/2 ln(1+c) + (1-c)/2 ln(1-c)` with `0 ln 0 = 0`.
pub fn accessible_information_of(c_t: f64) -> f64 {
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let c = c_t.abs().min(1.0);
    0.5 * (xlnx(1.0 + c) + xlnx(1.0 - c))
}

/// Classical correlation with `c_t = max |c_i|`.
pub fn accessible_information(params: &BellDiagonalParams) -> f64 {
    accessible_information_of(params.max_abs())
}

pub fn quantum_discord(params: &BellDiagonalParams) -> f64 {
    bell_mutual_information(params) - accessible_information(params)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Entanglement {
    pub concurrence: f64,
    /// Entanglement of formation in nats.
    pub eof: f64,
}

/// Wootters concurrence and entanglement of formation of a two-qubit state.
pub fn concurrence_eof(rho: &DensityOperator) -> Result<Entanglement> {
    if rho.dims() != [2, 2] {
        return Err(Error::InvalidParameter(format!(
            "concurrence needs dims [2, 2], got {:?}",
            rho.dims()
        )));
    }
    let yy = pauli::sigma_y().kron(&pauli::sigma_y());
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    let sqrt_rho = hermitian_eigen(rho.matrix())?.map(|l| l.max(0.0).sqrt());
    let r = &(&sqrt_rho * &flipped) * &sqrt_rho;
    // R is Hermitian PSD up to rounding; its eigenvalues are the squared Wootters lambdas.
    let r = ComplexMatrix::from_fn(4, |i, j| 0.5 * (r.get(i, j) + r.get(j, i).conj()));
    let lam: Vec<f64> = hermitian_eigen(&r)?
        .values
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    let concurrence = (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0);
    let x = 0.5 * (1.0 + (1.0 - concurrence * concurrence).max(0.0).sqrt());
    Ok(Entanglement {
        concurrence,
        eof: shannon_entropy(&[x, 1.0 - x]),
    })
}
