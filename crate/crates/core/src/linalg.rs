//! Dense complex-matrix substrate: composition, partial traces, Hermitian
//! spectra and entropies.
//!
//! Subsystems are ordered at construction and Kronecker products use the
//! row-major convention with the first factor outermost, so the basis index
//! of `|i_0 i_1 ... i_{n-1}>` is `sum_k i_k * prod_{j>k} d_j`.
//! All logarithms are natural (entropies in nats).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-NEGATIVE_EIGEN_TOL, 0)` are float noise and clamp to zero.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Eigenvalues of the reference state at or below this are treated as outside its support.
const SUPPORT_EIGEN_TOL: f64 = 1e-13;
/// Weight a state may put on the kernel of the reference before the divergence is flagged.
const SUPPORT_WEIGHT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix with `f64` real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ComplexMatrix({}x{}) {:?}",
            self.dim(),
            self.dim(),
            self.0
        )
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::from_element(dim, dim, ZERO))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row-major entries, rejecting non-square or non-finite input.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Outer product `|psi><psi|` (no normalization).
    pub fn outer(psi: &[Complex64]) -> Self {
        let n = psi.len();
        Self::from_fn(n, |i, j| psi[i] * psi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.0[(i, j)] = value;
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn row_major_entries(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// Kronecker product with `self` as the outer (slow) factor.
    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            self.dim(),
            other.dim(),
            "dimension mismatch in max_abs_diff"
        );
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `U self U^dagger`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self(&u.0 * &self.0 * u.0.adjoint())
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// The single-qubit identity and Pauli matrices.
pub mod pauli {
    use super::{ComplexMatrix, ONE, ZERO};
    use num_complex::Complex64;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn sigma_y() -> ComplexMatrix {
        let i = Complex64::new(0.0, 1.0);
        ComplexMatrix::from_row_major(2, &[ZERO, -i, i, ZERO]).unwrap()
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_row_major(2, &[ONE, ZERO, ZERO, -ONE]).unwrap()
    }

    /// `sigma_1, sigma_2, sigma_3` in order.
    pub fn sigmas() -> [ComplexMatrix; 3] {
        [sigma_x(), sigma_y(), sigma_z()]
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V f(Lambda) V^dagger`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.vectors.0;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let fk = f(lam);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    /// `<v_k| m |v_k>` for every eigenvector.
    pub fn diagonal_weights(&self, m: &ComplexMatrix) -> Vec<f64> {
        let v = &self.vectors.0;
        let mv = &m.0 * v;
        (0..v.ncols())
            .map(|k| {
                v.column(k)
                    .iter()
                    .zip(mv.column(k).iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum()
            })
            .collect()
    }
}

fn eigh_unchecked(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.dim();
    if n == 1 {
        return HermitianEigen {
            values: vec![m.0[(0, 0)].re],
            vectors: ComplexMatrix::identity(1),
        };
    }
    let eig = SymmetricEigen::new(m.hermitian_part());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen {
        values,
        vectors: ComplexMatrix(vectors),
    }
}

/// Full eigen-decomposition; rejects input whose Hermiticity defect exceeds [`HERMITIAN_TOL`].
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if !defect.is_finite() || defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(eigh_unchecked(m))
}

/// Real eigenvalues in descending order.
pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|e| e.values)
}

/// `-sum p ln p` with `0 ln 0 = 0`; non-positive entries contribute nothing.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Subset of subsystem indices to keep; the rest are traced out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteCut {
    keep: Vec<usize>,
    discard: Vec<usize>,
}

impl BipartiteCut {
    /// `keep` may be given in any order; the reduced state always lists kept
    /// subsystems in their original order.
    pub fn new(keep: &[usize], num_subsystems: usize) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidCut("keep set is empty".into()));
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() {
            return Err(Error::InvalidCut(format!("duplicate indices in {keep:?}")));
        }
        if let Some(&bad) = sorted.iter().find(|&&k| k >= num_subsystems) {
            return Err(Error::InvalidCut(format!(
                "index {bad} out of range for {num_subsystems} subsystems"
            )));
        }
        let discard = (0..num_subsystems)
            .filter(|k| !sorted.contains(k))
            .collect();
        Ok(Self {
            keep: sorted,
            discard,
        })
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn discard(&self) -> &[usize] {
        &self.discard
    }

    /// The cut with both sides swapped. `None` if the discard side is empty.
    pub fn complement(&self) -> Option<Self> {
        if self.discard.is_empty() {
            return None;
        }
        Some(Self {
            keep: self.discard.clone(),
            discard: self.keep.clone(),
        })
    }

    pub fn num_subsystems(&self) -> usize {
        self.keep.len() + self.discard.len()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix tagged with subsystem dimensions.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity to `1e-10`.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, matrix.dim())?;
        if matrix
            .0
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace { trace });
        }
        let min = eigh_unchecked(&matrix)
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        Ok(Self { matrix, dims })
    }

    /// Caller guarantees validity (used after validity-preserving maps).
    pub(crate) fn from_parts_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.dim());
        Self { matrix, dims }
    }

    /// Projector onto the normalized `psi`.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, psi.len())?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidParameter(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: ComplexMatrix::outer(&unit),
            dims,
        })
    }

    /// Diagonal state with the given (non-negative, normalized) populations.
    pub fn diagonal(populations: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(populations), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            matrix: ComplexMatrix::identity(d).scale(1.0 / d as f64),
            dims,
        }
    }

    /// Basis projector `|index><index|`.
    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} >= dimension {d}"
            )));
        }
        let mut m = ComplexMatrix::zeros(d);
        m.set(index, index, ONE);
        Ok(Self { matrix: m, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Eigenvalues, descending, with float-noise negatives clamped to zero.
    pub fn spectrum(&self) -> Vec<f64> {
        eigh_unchecked(&self.matrix)
            .values
            .into_iter()
            .map(|l| l.max(0.0))
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        von_neumann_entropy(self)
    }

    /// Reorders the subsystems: subsystem `k` of the result is subsystem `order[k]` of `self`.
    pub fn permute_subsystems(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&k| k >= n || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::InvalidParameter(format!(
                "{order:?} is not a permutation of 0..{n}"
            )));
        }
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let old_strides = strides(&self.dims);
        let d = self.dim();
        // map[new_index] = old_index
        let mut map = vec![0usize; d];
        let new_strides = strides(&new_dims);
        for (new_index, slot) in map.iter_mut().enumerate() {
            let mut old = 0;
            for (pos, &src) in order.iter().enumerate() {
                let digit = (new_index / new_strides[pos]) % new_dims[pos];
                old += digit * old_strides[src];
            }
            *slot = old;
        }
        let m = ComplexMatrix::from_fn(d, |i, j| self.matrix.get(map[i], map[j]));
        Ok(Self {
            matrix: m,
            dims: new_dims,
        })
    }
}

fn check_dims(dims: &[usize], dim: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != dim {
        return Err(Error::DimsMismatch {
            dims: dims.to_vec(),
            dim,
        });
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets into the full basis for every multi-index over `subsystems` (row-major, original order).
fn subsystem_offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offsets = vec![0usize];
    for &k in subsystems {
        let (d, stride) = (dims[k], st[k]);
        offsets = offsets
            .iter()
            .flat_map(|&base| (0..d).map(move |digit| base + digit * stride))
            .collect();
    }
    offsets
}

/// `a (x) b` with the default dimension cap.
pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    tensor_product_capped(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_product_capped(
    a: &DensityOperator,
    b: &DensityOperator,
    max_dim: usize,
) -> Result<DensityOperator> {
    let dim = a.dim().checked_mul(b.dim()).ok_or(Error::DimensionCap {
        dim: usize::MAX,
        cap: max_dim,
    })?;
    if dim > max_dim {
        return Err(Error::DimensionCap { dim, cap: max_dim });
    }
    let dims = a.dims.iter().chain(b.dims.iter()).copied().collect();
    Ok(DensityOperator::from_parts_unchecked(
        a.matrix.kron(&b.matrix),
        dims,
    ))
}

/// Traces out `cut.discard()`; the result lists the kept subsystems in original order.
pub fn partial_trace(rho: &DensityOperator, cut: &BipartiteCut) -> Result<DensityOperator> {
    if cut.num_subsystems() != rho.num_subsystems() {
        return Err(Error::InvalidCut(format!(
            "cut covers {} subsystems but the state has {}",
            cut.num_subsystems(),
            rho.num_subsystems()
        )));
    }
    if cut.discard.is_empty() {
        return Ok(rho.clone());
    }
    let keep_off = subsystem_offsets(&rho.dims, &cut.keep);
    let disc_off = subsystem_offsets(&rho.dims, &cut.discard);
    let m = &rho.matrix.0;
    let dk = keep_off.len();
    let reduced = ComplexMatrix::from_fn(dk, |a, b| {
        disc_off
            .iter()
            .map(|&e| m[(keep_off[a] + e, keep_off[b] + e)])
            .sum()
    });
    let dims = cut.keep.iter().map(|&k| rho.dims[k]).collect();
    Ok(DensityOperator::from_parts_unchecked(reduced, dims))
}

/// Reduced state on the listed subsystems.
pub fn reduce(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    partial_trace(rho, &BipartiteCut::new(keep, rho.num_subsystems())?)
}

/// `S = -sum lambda ln lambda` in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    shannon_entropy(&rho.spectrum())
}

/// `S(rho || sigma) = Tr rho (ln rho - ln sigma)`.
///
/// Returns [`Error::InfiniteDivergence`] when `rho` has weight above `1e-10`
/// outside the support of `sigma`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!(
            "dimensions {} and {} differ",
            rho.dim(),
            sigma.dim()
        )));
    }
    let neg_entropy = -von_neumann_entropy(rho);
    let eig = eigh_unchecked(&sigma.matrix);
    let weights = eig.diagonal_weights(&rho.matrix);
    let mut cross = 0.0;
    for (&mu, &w) in eig.values.iter().zip(weights.iter()) {
        if mu <= SUPPORT_EIGEN_TOL {
            if w > SUPPORT_WEIGHT_TOL {
                return Err(Error::InfiniteDivergence);
            }
            continue;
        }
        cross -= w * mu.ln();
    }
    Ok(neg_entropy + cross)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purity {
    Pure,
    Mixed,
}

impl std::str::FromStr for Purity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Self::Pure),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::InvalidParameter(format!("purity `{other}`"))),
        }
    }
}

fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Haar-random pure state or a random mixed state obtained by tracing out an
/// ancilla of equal dimension from a Haar-random pure state.
pub fn random_state_with_rng<R: Rng + ?Sized>(
    dims: &[usize],
    purity: Purity,
    rng: &mut R,
) -> Result<DensityOperator> {
    let d: usize = dims.iter().product();
    check_dims(dims, d)?;
    match purity {
        Purity::Pure => DensityOperator::pure(&gaussian_vector(d, rng), dims.to_vec()),
        Purity::Mixed => {
            // psi on system (x) ancilla, reshaped to d x d: rho = G G^dagger / Tr.
            let psi = gaussian_vector(d * d, rng);
            let g = DMatrix::from_row_slice(d, d, &psi);
            let gg = &g * g.adjoint();
            let tr = gg.trace().re;
            Ok(DensityOperator::from_parts_unchecked(
                ComplexMatrix(gg / Complex64::new(tr, 0.0)),
                dims.to_vec(),
            ))
        }
    }
}

/// Deterministic per seed.
pub fn random_state(dims: &[usize], purity: Purity, seed: u64) -> Result<DensityOperator> {
    random_state_with_rng(dims, purity, &mut ChaCha8Rng::seed_from_u64(seed))
}
