//! One-particle reduced density matrices, natural orbitals and occupation
//! numbers, particle-hole duality, and the pairing structure of
//! two-electron states.

pub mod jacobi;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{FermionState, FockError, OrbitalUnitary, SlaterDet};
use jacobi::{EigenError, DEGENERACY_TOL};

/// Hermiticity tolerance accepted by [`natural_occupations`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `Σλ = N` and `λ ∈ [0, 1]` for a physical spectrum.
pub const SPECTRUM_TOL: f64 = 1e-8;
/// Inversions up to this size are accepted as ties when checking order
/// (degenerate eigenvalues are ordered by their eigenvectors, not values).
pub const SORT_TOL: f64 = DEGENERACY_TOL;
/// Tolerance for the equal-occupation check in [`lowdin_pairs`].
pub const PAIRING_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdmError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("spectrum has {got} values, expected r = {r}")]
    SpectrumLength { got: usize, r: usize },
    #[error("spectrum value {index} is not finite")]
    NonFinite { index: usize },
    #[error("spectrum is not sorted in decreasing order at position {index}")]
    Unsorted { index: usize },
    #[error("spectrum is not physical: {0}")]
    Unphysical(String),
    #[error("expected a two-particle state, got n = {0}")]
    NotTwoParticle(usize),
}

/// `ρ_{ij} = ⟨Ψ|a_i† a_j|Ψ⟩` for a normalized `n`-particle state.
#[derive(Clone, Debug, PartialEq)]
pub struct OneRDM {
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl OneRDM {
    /// Wraps a matrix; it must be square and Hermitian within [`HERMITIAN_TOL`].
    pub fn from_matrix(n: usize, matrix: DMatrix<Complex64>) -> Result<Self, RdmError> {
        if !matrix.is_square() {
            return Err(EigenError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            }
            .into());
        }
        let residual = jacobi::hermiticity_residual(&matrix);
        if residual > HERMITIAN_TOL {
            return Err(EigenError::NotHermitian { residual }.into());
        }
        Ok(Self { n, matrix })
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Diagonal entries, i.e. the occupations of the current orbitals.
    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> f64 {
        let r = self.rank();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in 0..r {
                if i != j {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Row-major `[re, im]` pairs, for debugging dumps.
    pub fn to_row_major_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        let r = self.rank();
        (0..r)
            .map(|i| (0..r).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
            .collect()
    }
}

/// Natural occupation numbers `λ_1 ≥ … ≥ λ_r`.
///
/// Construction checks shape, finiteness and ordering. Whether the values
/// are physical (`Σλ = N`, `0 ≤ λ ≤ 1`) is a separate question answered by
/// [`Spectrum::check_physical`], so that inadmissible input can still be
/// evaluated against constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson", into = "SpectrumJson")]
pub struct Spectrum {
    n: usize,
    r: usize,
    values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub n: usize,
    pub r: usize,
    pub lambda: Vec<f64>,
}

impl TryFrom<SpectrumJson> for Spectrum {
    type Error = RdmError;
    fn try_from(j: SpectrumJson) -> Result<Self, RdmError> {
        Spectrum::new(j.n, j.r, j.lambda)
    }
}

impl From<Spectrum> for SpectrumJson {
    fn from(s: Spectrum) -> Self {
        SpectrumJson {
            n: s.n,
            r: s.r,
            lambda: s.values,
        }
    }
}

impl Spectrum {
    pub fn new(n: usize, r: usize, values: Vec<f64>) -> Result<Self, RdmError> {
        if values.len() != r {
            return Err(RdmError::SpectrumLength { got: values.len(), r });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(RdmError::NonFinite { index });
        }
        if let Some(index) = values.windows(2).position(|w| w[0] < w[1] - SORT_TOL) {
            return Err(RdmError::Unsorted { index: index + 1 });
        }
        Ok(Self { n, r, values })
    }

    /// Sorts the values decreasing before validating.
    pub fn from_unsorted(n: usize, mut values: Vec<f64>) -> Result<Self, RdmError> {
        values.sort_by(|a, b| b.total_cmp(a));
        let r = values.len();
        Self::new(n, r, values)
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `λ_i` with 1-based `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn check_physical(&self, tol: f64) -> Result<(), RdmError> {
        let sum = self.sum();
        if (sum - self.n as f64).abs() > tol {
            return Err(RdmError::Unphysical(format!("Σλ = {sum}, expected {}", self.n)));
        }
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -tol || v > 1.0 + tol)
        {
            return Err(RdmError::Unphysical(format!("λ_{} = {v} outside [0, 1]", i + 1)));
        }
        Ok(())
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical(SPECTRUM_TOL).is_ok()
    }
}

/// Natural orbitals paired with their occupation numbers.
///
/// `unitary` diagonalizes the density matrix: `U† ρ U = diag(λ)`. With
/// `ρ_{ij} = ⟨a_i† a_j⟩`, the natural orbital `k` is `Σ_i conj(U_{ik}) ψ_i`.
#[derive(Clone, Debug)]
pub struct NaturalFrame {
    pub unitary: OrbitalUnitary,
    pub spectrum: Spectrum,
}

/// Density matrix of a normalized state, built from `a_i† a_j` applied to
/// each determinant.
pub fn compute_rdm(state: &FermionState) -> Result<OneRDM, RdmError> {
    state.require_normalized()?;
    let r = state.rank();
    let mut rho = DMatrix::<Complex64>::zeros(r, r);
    for (det, amp) in state.terms() {
        for j in det.orbitals() {
            let (s1, reduced) = det.annihilate(j).expect("occupied orbital");
            for i in 1..=r {
                if let Some((s2, target)) = reduced.create(i) {
                    let bra = state.amplitude(target);
                    if bra.norm() > 0.0 {
                        rho[(i - 1, j - 1)] += bra.conj() * amp * (s1 * s2);
                    }
                }
            }
        }
    }
    Ok(OneRDM {
        n: state.n_particles(),
        matrix: rho,
    })
}

pub fn natural_occupations(rho: &OneRDM) -> Result<NaturalFrame, RdmError> {
    let eig = jacobi::eigh(rho.matrix(), HERMITIAN_TOL)?;
    let unitary = OrbitalUnitary::new(eig.vectors)?;
    let spectrum = Spectrum::new(rho.n, rho.rank(), eig.values)?;
    Ok(NaturalFrame { unitary, spectrum })
}

pub fn spectrum_of(state: &FermionState) -> Result<Spectrum, RdmError> {
    Ok(natural_occupations(&compute_rdm(state)?)?.spectrum)
}

/// Expresses the state in its natural orbitals, ordered by decreasing
/// occupation. Returns the transformed state with its natural frame.
pub fn to_natural_frame(state: &FermionState) -> Result<(FermionState, NaturalFrame), RdmError> {
    let frame = natural_occupations(&compute_rdm(state)?)?;
    let transposed = OrbitalUnitary::new(frame.unitary.matrix().transpose())?;
    let natural = state.change_basis(&transposed)?;
    Ok((natural, frame))
}

pub fn to_natural_basis(state: &FermionState) -> Result<FermionState, RdmError> {
    Ok(to_natural_frame(state)?.0)
}

/// `(1 - λ_r, …, 1 - λ_1)` for `r - N` holes.
pub fn hole_dual_spectrum(spec: &Spectrum) -> Spectrum {
    Spectrum {
        n: spec.r - spec.n,
        r: spec.r,
        values: spec.values.iter().rev().map(|l| 1.0 - l).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowdinPair {
    /// 1-based natural-orbital indices.
    pub orbitals: (usize, usize),
    /// `|a_k|²`, the common occupation of both orbitals.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowdinPairing {
    pub pairs: Vec<LowdinPair>,
    /// Zero-occupation orbital left over for odd rank.
    pub unpaired: Option<usize>,
    pub spectrum: Vec<f64>,
    /// Set when degenerate occupations across pairs prevented a clean pairing.
    pub warning: Option<String>,
}

/// Splits the natural orbitals of a two-particle state into pairs
/// `ψ^(1)_k, ψ^(2)_k` with `Ψ = Σ_k a_k ψ^(1)_k ∧ ψ^(2)_k`.
pub fn lowdin_pairs(state: &FermionState) -> Result<LowdinPairing, RdmError> {
    if state.n_particles() != 2 {
        return Err(RdmError::NotTwoParticle(state.n_particles()));
    }
    let (natural, frame) = to_natural_frame(state)?;
    let r = state.rank();
    let lambda = frame.spectrum.values().to_vec();
    let coeff = |i: usize, j: usize| -> Complex64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        natural.amplitude(SlaterDet::new(&[a, b]).expect("valid pair"))
    };

    let mut paired = vec![false; r + 1];
    let mut pairs = Vec::new();
    let mut problems = Vec::new();
    for k in 1..=r {
        if paired[k] {
            continue;
        }
        let partner = (k + 1..=r)
            .filter(|&j| !paired[j])
            .map(|j| (j, coeff(k, j).norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((j, weight)) = partner else { break };
        // Zero-occupation orbitals carry no amplitude; pair them in order.
        let (j, weight) = if weight <= PAIRING_TOL {
            ((k + 1..=r).find(|&j| !paired[j]).unwrap(), weight)
        } else {
            (j, weight)
        };
        for idx in [k, j] {
            if (lambda[idx - 1] - weight).abs() > PAIRING_TOL {
                problems.push(format!(
                    "orbital {idx}: occupation {} vs pair weight {weight}",
                    lambda[idx - 1]
                ));
            }
        }
        paired[k] = true;
        paired[j] = true;
        pairs.push(LowdinPair {
            orbitals: (k, j),
            weight,
        });
    }
    let unpaired = (1..=r).find(|&k| !paired[k]);
    if let Some(k) = unpaired {
        if lambda[k - 1].abs() > PAIRING_TOL {
            problems.push(format!("unpaired orbital {k} has occupation {}", lambda[k - 1]));
        }
    }
    // λ_{2k} ≈ λ_{2k+1} with nonzero occupation: neighbouring pairs share a level.
    let degenerate_pairs = (1..r / 2 + r % 2)
        .filter(|&k| 2 * k < r)
        .any(|k| lambda[2 * k] > PAIRING_TOL && lambda[2 * k - 1] - lambda[2 * k] <= PAIRING_TOL);
    let warning = if problems.is_empty() {
        None
    } else {
        Some(format!(
            "{}pairing not resolvable: {}",
            if degenerate_pairs { "degenerate occupations across pairs; " } else { "" },
            problems.join("; ")
        ))
    };
    Ok(LowdinPairing {
        pairs,
        unpaired,
        spectrum: lambda,
        warning,
    })
}
