//! Second-quantized states on the wedge space of `n` fermions in `r` orbitals.
//!
//! A [`SlaterDet`] is a strictly increasing tuple of 1-based orbital indices,
//! stored as a bitmask. Operator signs follow the occupation-position
//! convention: `a_i` acting on a determinant in which `i` sits at 1-based
//! position `p` of the sorted tuple yields `(-1)^(p-1)` times the determinant
//! with `i` removed, and `a_i†` inserts `i` with the sign of the position it
//! lands on.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported one-particle rank.
pub const MAX_RANK: usize = 14;

/// Amplitudes with modulus below this are dropped after arithmetic.
pub const PRUNE_EPS: f64 = 1e-15;

/// Tolerance on `|‖Ψ‖² - 1|` for operations that require a normalized state.
pub const NORM_TOL: f64 = 1e-10;

/// Tolerance on `‖U†U - 1‖_max` for [`OrbitalUnitary`].
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("invalid system shape: n = {n}, r = {r} (need 1 <= n <= r <= {MAX_RANK})")]
    InvalidShape { n: usize, r: usize },
    #[error("orbital index {index} out of range 1..={rank}")]
    OrbitalOutOfRange { index: usize, rank: usize },
    #[error("invalid determinant {orbitals:?}: {reason}")]
    InvalidDeterminant { orbitals: Vec<usize>, reason: String },
    #[error("shape mismatch: ({n1}, {r1}) vs ({n2}, {r2})")]
    ShapeMismatch {
        n1: usize,
        r1: usize,
        n2: usize,
        r2: usize,
    },
    #[error("rank mismatch: state rank {state} vs unitary rank {unitary}")]
    RankMismatch { state: usize, unitary: usize },
    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("cannot normalize the zero state")]
    ZeroNorm,
    #[error("creating a particle in a fully occupied system (n = r = {r})")]
    ParticleOverflow { r: usize },
    #[error("matrix is not unitary (max |U†U - 1| = {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("state format error: {0}")]
    Format(String),
}

/// A basis vector `ψ_{i1} ∧ … ∧ ψ_{iN}` with `i1 < … < iN`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlaterDet {
    mask: u16,
}

impl SlaterDet {
    /// Builds a determinant from strictly increasing 1-based orbital indices.
    pub fn new(orbitals: &[usize]) -> Result<Self, FockError> {
        let mut mask = 0u16;
        let mut prev = 0usize;
        for &i in orbitals {
            if i == 0 || i > MAX_RANK {
                return Err(FockError::InvalidDeterminant {
                    orbitals: orbitals.to_vec(),
                    reason: format!("index {i} outside 1..={MAX_RANK}"),
                });
            }
            if i <= prev {
                return Err(FockError::InvalidDeterminant {
                    orbitals: orbitals.to_vec(),
                    reason: "orbitals must be strictly increasing".into(),
                });
            }
            prev = i;
            mask |= 1 << (i - 1);
        }
        Ok(Self { mask })
    }

    pub fn from_mask(mask: u16) -> Self {
        Self { mask }
    }

    pub fn vacuum() -> Self {
        Self { mask: 0 }
    }

    pub fn mask(self) -> u16 {
        self.mask
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=MAX_RANK).contains(&i) && self.mask & (1 << (i - 1)) != 0
    }

    /// Largest occupied orbital, 0 for the vacuum.
    pub fn max_orbital(self) -> usize {
        16 - self.mask.leading_zeros() as usize
    }

    pub fn orbitals(self) -> Vec<usize> {
        (1..=MAX_RANK).filter(|&i| self.contains(i)).collect()
    }

    /// Number of occupied orbitals in the set encoded by `set_mask`.
    pub fn overlap(self, set_mask: u16) -> usize {
        (self.mask & set_mask).count_ones() as usize
    }

    fn sign_below(self, i: usize) -> f64 {
        let below = self.mask & ((1u16 << (i - 1)) - 1);
        if below.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `a_i` on this determinant: the sign and the resulting determinant,
    /// or `None` when `i` is unoccupied.
    pub fn annihilate(self, i: usize) -> Option<(f64, SlaterDet)> {
        if !self.contains(i) {
            return None;
        }
        Some((
            self.sign_below(i),
            SlaterDet {
                mask: self.mask & !(1 << (i - 1)),
            },
        ))
    }

    /// `a_i†` on this determinant, or `None` when `i` is already occupied.
    pub fn create(self, i: usize) -> Option<(f64, SlaterDet)> {
        if i == 0 || i > MAX_RANK || self.contains(i) {
            return None;
        }
        Some((
            self.sign_below(i),
            SlaterDet {
                mask: self.mask | (1 << (i - 1)),
            },
        ))
    }
}

/// Orders by particle count, then lexicographically by the sorted tuple.
impl Ord for SlaterDet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            let diff = self.mask ^ other.mask;
            if diff == 0 {
                Ordering::Equal
            } else if self.mask & diff & diff.wrapping_neg() != 0 {
                // The lowest differing orbital belongs to `self`: its tuple
                // has the smaller entry at the first differing position.
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for SlaterDet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SlaterDet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for SlaterDet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orbitals().iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn check_shape(n: usize, r: usize) -> Result<(), FockError> {
    if n == 0 || n > r || r > MAX_RANK {
        return Err(FockError::InvalidShape { n, r });
    }
    Ok(())
}

/// All `C(r, n)` determinants in lexicographic order.
pub fn slater_basis(n: usize, r: usize) -> Result<Vec<SlaterDet>, FockError> {
    check_shape(n, r)?;
    let mut out = Vec::new();
    let mut current: Vec<usize> = (1..=n).collect();
    loop {
        out.push(SlaterDet::new(&current)?);
        // Advance to the next combination in lexicographic order.
        let mut k = n;
        while k > 0 && current[k - 1] == r - (n - k) {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        current[k - 1] += 1;
        for j in k..n {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Bitmask of a 1-based orbital index set.
pub fn orbital_mask(set: &[usize], r: usize) -> Result<u16, FockError> {
    let mut mask = 0u16;
    for &i in set {
        if i == 0 || i > r {
            return Err(FockError::OrbitalOutOfRange { index: i, rank: r });
        }
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

/// A sparse superposition of Slater determinants with fixed `(n, r)`.
///
/// `n = 0` (the vacuum sector) only arises as the result of annihilation.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionState {
    n: usize,
    r: usize,
    amplitudes: BTreeMap<SlaterDet, Complex64>,
}

impl FermionState {
    /// The zero vector of `∧^n H_r`.
    pub fn zero(n: usize, r: usize) -> Result<Self, FockError> {
        check_shape(n, r)?;
        Ok(Self {
            n,
            r,
            amplitudes: BTreeMap::new(),
        })
    }

    pub fn basis(r: usize, orbitals: &[usize]) -> Result<Self, FockError> {
        Self::from_terms(orbitals.len(), r, [(orbitals.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// Sums the given terms; repeated determinants accumulate.
    pub fn from_terms<I, O>(n: usize, r: usize, terms: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (O, Complex64)>,
        O: AsRef<[usize]>,
    {
        let mut state = Self::zero(n, r)?;
        for (orbitals, amp) in terms {
            let det = SlaterDet::new(orbitals.as_ref())?;
            state.check_det(det)?;
            *state.amplitudes.entry(det).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    pub fn from_dets<I>(n: usize, r: usize, terms: I) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (SlaterDet, Complex64)>,
    {
        let mut state = Self::zero(n, r)?;
        for (det, amp) in terms {
            state.check_det(det)?;
            *state.amplitudes.entry(det).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    fn check_det(&self, det: SlaterDet) -> Result<(), FockError> {
        if det.len() != self.n || det.max_orbital() > self.r {
            return Err(FockError::InvalidDeterminant {
                orbitals: det.orbitals(),
                reason: format!("not a determinant of ({}, {})", self.n, self.r),
            });
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.amplitudes.retain(|_, a| a.norm() >= PRUNE_EPS);
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn amplitude(&self, det: SlaterDet) -> Complex64 {
        self.amplitudes.get(&det).copied().unwrap_or_default()
    }

    /// Nonzero terms in determinant order.
    pub fn terms(&self) -> impl Iterator<Item = (SlaterDet, Complex64)> + '_ {
        self.amplitudes.iter().map(|(d, a)| (*d, *a))
    }

    pub fn support(&self) -> Vec<SlaterDet> {
        self.amplitudes.keys().copied().collect()
    }

    pub fn support_len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn require_normalized(&self) -> Result<(), FockError> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(FockError::NotNormalized {
                norm_sqr: self.norm_sqr(),
            })
        }
    }

    pub fn normalize(&self) -> Result<Self, FockError> {
        let norm = self.norm();
        if norm < PRUNE_EPS {
            return Err(FockError::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self {
            n: self.n,
            r: self.r,
            amplitudes: self.amplitudes.iter().map(|(d, a)| (*d, a * c)).collect(),
        };
        out.prune();
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, FockError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (d, a) in &other.amplitudes {
            *out.amplitudes.entry(*d).or_default() += a;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FockError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    fn same_shape(&self, other: &Self) -> Result<(), FockError> {
        if self.n != other.n || self.r != other.r {
            return Err(FockError::ShapeMismatch {
                n1: self.n,
                r1: self.r,
                n2: other.n,
                r2: other.r,
            });
        }
        Ok(())
    }

    fn check_orbital(&self, i: usize) -> Result<(), FockError> {
        if i == 0 || i > self.r {
            return Err(FockError::OrbitalOutOfRange {
                index: i,
                rank: self.r,
            });
        }
        Ok(())
    }

    /// `a_i Ψ`, a state with one particle fewer.
    pub fn apply_annihilator(&self, i: usize) -> Result<Self, FockError> {
        self.check_orbital(i)?;
        let mut amplitudes = BTreeMap::new();
        for (d, a) in &self.amplitudes {
            if let Some((sign, d2)) = d.annihilate(i) {
                *amplitudes.entry(d2).or_insert(Complex64::default()) += a * sign;
            }
        }
        let mut out = Self {
            n: self.n.saturating_sub(1),
            r: self.r,
            amplitudes,
        };
        out.prune();
        Ok(out)
    }

    /// `a_i† Ψ`, a state with one particle more.
    pub fn apply_creator(&self, i: usize) -> Result<Self, FockError> {
        self.check_orbital(i)?;
        if self.n == self.r {
            return Err(FockError::ParticleOverflow { r: self.r });
        }
        let mut amplitudes = BTreeMap::new();
        for (d, a) in &self.amplitudes {
            if let Some((sign, d2)) = d.create(i) {
                *amplitudes.entry(d2).or_insert(Complex64::default()) += a * sign;
            }
        }
        let mut out = Self {
            n: self.n + 1,
            r: self.r,
            amplitudes,
        };
        out.prune();
        Ok(out)
    }

    /// `Σ_{i∈set} ⟨Ψ|a_i†a_i|Ψ⟩` for a normalized state.
    pub fn number_expectation(&self, set: &[usize]) -> Result<f64, FockError> {
        self.require_normalized()?;
        let mask = orbital_mask(set, self.r)?;
        Ok(self
            .amplitudes
            .iter()
            .map(|(d, a)| a.norm_sqr() * d.overlap(mask) as f64)
            .sum())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64, FockError> {
        self.same_shape(other)?;
        let (small, large, conj_small) = if self.amplitudes.len() <= other.amplitudes.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex64::default();
        for (d, a) in &small.amplitudes {
            if let Some(b) = large.amplitudes.get(d) {
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        Ok(acc)
    }

    /// Re-expresses the state after replacing every orbital `ψ_i` by
    /// `Σ_j U_{ji} ψ_j`.
    ///
    /// The coefficient of `[J]` is `Σ_I c_I det U[J, I]`, the minor of `U` on
    /// rows `J` and columns `I`.
    pub fn change_basis(&self, u: &OrbitalUnitary) -> Result<Self, FockError> {
        if u.rank() != self.r {
            return Err(FockError::RankMismatch {
                state: self.r,
                unitary: u.rank(),
            });
        }
        if self.n == 0 || self.is_zero() {
            return Ok(self.clone());
        }
        let terms: Vec<(Vec<usize>, Complex64)> = self
            .amplitudes
            .iter()
            .map(|(d, a)| (d.orbitals(), *a))
            .collect();
        let mut amplitudes = BTreeMap::new();
        let mut minor = vec![Complex64::default(); self.n * self.n];
        for target in slater_basis(self.n, self.r)? {
            let rows = target.orbitals();
            let mut acc = Complex64::default();
            for (cols, a) in &terms {
                for (ri, &row) in rows.iter().enumerate() {
                    for (ci, &col) in cols.iter().enumerate() {
                        minor[ri * self.n + ci] = u.matrix[(row - 1, col - 1)];
                    }
                }
                acc += a * determinant(&mut minor, self.n);
            }
            if acc.norm() >= PRUNE_EPS {
                amplitudes.insert(target, acc);
            }
        }
        Ok(Self {
            n: self.n,
            r: self.r,
            amplitudes,
        })
    }

    /// Particle-hole dual in `∧^{r-N} H_r`: `c_I [I] ↦ ε(I, I^c) c̄_I [I^c]`,
    /// where `ε` is the sign of the permutation `(I, I^c)`. The occupation
    /// spectrum maps to `1 - λ` reversed.
    pub fn hole_dual(&self) -> Self {
        let full: u16 = (1u16 << self.r) - 1;
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(d, a)| {
                let holes = SlaterDet::from_mask(full & !d.mask());
                let mut inversions = 0u32;
                for i in d.orbitals() {
                    inversions += (holes.mask() & ((1u16 << (i - 1)) - 1)).count_ones();
                }
                let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
                (holes, a.conj() * sign)
            })
            .collect();
        Self {
            n: self.r - self.n,
            r: self.r,
            amplitudes,
        }
    }

    /// Independent standard complex Gaussian amplitudes over the full basis,
    /// normalized. Deterministic in `seed`.
    pub fn random(n: usize, r: usize, seed: u64) -> Result<Self, FockError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, r, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Self, FockError> {
        let basis = slater_basis(n, r)?;
        Self::random_on_with(n, r, &basis, rng)
    }

    /// Random normalized state supported on the given determinants.
    pub fn random_on_with<R: Rng + ?Sized>(
        n: usize,
        r: usize,
        support: &[SlaterDet],
        rng: &mut R,
    ) -> Result<Self, FockError> {
        let terms = support.iter().map(|&d| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (d, Complex64::new(re, im))
        });
        Self::from_dets(n, r, terms.collect::<Vec<_>>())?.normalize()
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            n: self.n,
            r: self.r,
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(d, a)| AmplitudeJson {
                    orbitals: d.orbitals(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        }
    }

    /// Validates a parsed state file: orbitals sorted, unique, in range and
    /// of length `n`; no determinant listed twice.
    pub fn from_json(json: &StateJson) -> Result<Self, FockError> {
        check_shape(json.n, json.r).map_err(|e| FockError::Format(e.to_string()))?;
        let mut state = Self::zero(json.n, json.r)?;
        for (k, entry) in json.amplitudes.iter().enumerate() {
            let orbs = &entry.orbitals;
            if orbs.len() != json.n {
                return Err(FockError::Format(format!(
                    "amplitudes[{k}]: expected {} orbitals, got {}",
                    json.n,
                    orbs.len()
                )));
            }
            if let Some(&bad) = orbs.iter().find(|&&i| i == 0 || i > json.r) {
                return Err(FockError::Format(format!(
                    "amplitudes[{k}]: orbital {bad} out of range 1..={}",
                    json.r
                )));
            }
            if orbs.windows(2).any(|w| w[0] == w[1]) {
                return Err(FockError::Format(format!("amplitudes[{k}]: duplicated orbital in {orbs:?}")));
            }
            if orbs.windows(2).any(|w| w[0] > w[1]) {
                return Err(FockError::Format(format!("amplitudes[{k}]: orbitals {orbs:?} not ascending")));
            }
            if !entry.re.is_finite() || !entry.im.is_finite() {
                return Err(FockError::Format(format!("amplitudes[{k}]: non-finite amplitude")));
            }
            let det = SlaterDet::new(orbs)?;
            if state.amplitudes.contains_key(&det) {
                return Err(FockError::Format(format!("amplitudes[{k}]: determinant {det} listed twice")));
            }
            state.amplitudes.insert(det, Complex64::new(entry.re, entry.im));
        }
        state.prune();
        Ok(state)
    }

    pub fn parse_json(text: &str) -> Result<Self, FockError> {
        let json: StateJson = serde_json::from_str(text).map_err(|e| FockError::Format(e.to_string()))?;
        Self::from_json(&json)
    }
}

/// On-disk state format.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateJson {
    pub n: usize,
    pub r: usize,
    pub amplitudes: Vec<AmplitudeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AmplitudeJson {
    pub orbitals: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

/// Determinant of a row-major `k×k` matrix by Gaussian elimination with
/// partial pivoting. Clobbers `m`.
fn determinant(m: &mut [Complex64], k: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a * k + col].norm().total_cmp(&m[b * k + col].norm()))
            .unwrap();
        let p = m[pivot * k + col];
        if p.norm() == 0.0 {
            return Complex64::default();
        }
        if pivot != col {
            for j in 0..k {
                m.swap(col * k + j, pivot * k + j);
            }
            det = -det;
        }
        det *= p;
        for row in col + 1..k {
            let factor = m[row * k + col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for j in col..k {
                let v = m[col * k + j];
                m[row * k + j] -= factor * v;
            }
        }
    }
    det
}

/// A unitary change of one-particle basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalUnitary {
    matrix: DMatrix<Complex64>,
}

impl OrbitalUnitary {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, FockError> {
        if !matrix.is_square() {
            return Err(FockError::NotUnitary { residual: f64::INFINITY });
        }
        let residual = unitarity_residual(&matrix);
        if residual > UNITARY_TOL {
            return Err(FockError::NotUnitary { residual });
        }
        Ok(Self { matrix })
    }

    pub fn identity(r: usize) -> Self {
        Self {
            matrix: DMatrix::identity(r, r),
        }
    }

    /// `ψ_i ↦ ψ_{perm[i-1]}`; `perm` is a 1-based permutation of `1..=r`.
    pub fn permutation(perm: &[usize]) -> Result<Self, FockError> {
        let r = perm.len();
        let mut m = DMatrix::zeros(r, r);
        for (i, &p) in perm.iter().enumerate() {
            if p == 0 || p > r {
                return Err(FockError::OrbitalOutOfRange { index: p, rank: r });
            }
            m[(p - 1, i)] = Complex64::new(1.0, 0.0);
        }
        Self::new(m)
    }

    /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
    /// phases of `R`'s diagonal moved into `Q`.
    pub fn random(r: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(r, &mut rng)
    }

    pub fn random_with<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(r, r, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let qr = g.qr();
        let mut q = qr.q();
        let rr = qr.r();
        for j in 0..r {
            let d = rr[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..r {
                q[(i, j)] *= phase;
            }
        }
        Self { matrix: q }
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }
}

pub fn unitarity_residual(m: &DMatrix<Complex64>) -> f64 {
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn det(o: &[usize]) -> SlaterDet {
        SlaterDet::new(o).unwrap()
    }

    #[test]
    fn basis_sizes_and_order() {
        let b = slater_basis(1, 3).unwrap();
        assert_eq!(b, vec![det(&[1]), det(&[2]), det(&[3])]);
        let b = slater_basis(3, 6).unwrap();
        assert_eq!(b.len(), 20);
        assert_eq!(b[0], det(&[1, 2, 3]));
        assert_eq!(b[19], det(&[4, 5, 6]));
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(slater_basis(3, 7).unwrap().len(), 35);
        assert_eq!(slater_basis(7, 14).unwrap().len(), 3432);
    }

    #[test]
    fn basis_rejects_bad_shapes() {
        assert!(slater_basis(0, 3).is_err());
        assert!(slater_basis(4, 3).is_err());
        assert!(slater_basis(2, 15).is_err());
    }

    #[test]
    fn lexicographic_order_matches_tuples() {
        let b = slater_basis(3, 7).unwrap();
        let mut tuples: Vec<Vec<usize>> = b.iter().map(|d| d.orbitals()).collect();
        let copy = tuples.clone();
        tuples.sort();
        assert_eq!(tuples, copy);
    }

    #[test]
    fn determinant_validation() {
        assert!(SlaterDet::new(&[2, 1]).is_err());
        assert!(SlaterDet::new(&[1, 1]).is_err());
        assert!(SlaterDet::new(&[0]).is_err());
        assert!(SlaterDet::new(&[15]).is_err());
        assert_eq!(det(&[1, 3, 14]).orbitals(), vec![1, 3, 14]);
    }

    #[test]
    fn annihilator_signs() {
        let s = FermionState::basis(6, &[1, 2, 3]).unwrap();
        let out = s.apply_annihilator(2).unwrap();
        assert_eq!(out.n_particles(), 2);
        assert_eq!(out.amplitude(det(&[1, 3])), c(-1.0));

        let s = FermionState::basis(6, &[1, 4, 5]).unwrap();
        assert_eq!(s.apply_annihilator(4).unwrap().amplitude(det(&[1, 5])), c(-1.0));

        let s = FermionState::basis(6, &[1, 2, 3]).unwrap();
        assert!(s.apply_annihilator(6).unwrap().is_zero());
    }

    #[test]
    fn creator_signs() {
        let s = FermionState::basis(6, &[1, 3]).unwrap();
        assert_eq!(s.apply_creator(2).unwrap().amplitude(det(&[1, 2, 3])), c(-1.0));
        let s = FermionState::basis(6, &[2, 3]).unwrap();
        assert_eq!(s.apply_creator(1).unwrap().amplitude(det(&[1, 2, 3])), c(1.0));
        let s = FermionState::basis(6, &[1, 2]).unwrap();
        assert!(s.apply_creator(1).unwrap().is_zero());
    }

    #[test]
    fn operator_index_checks() {
        let s = FermionState::basis(4, &[1, 2]).unwrap();
        assert!(matches!(s.apply_annihilator(5), Err(FockError::OrbitalOutOfRange { .. })));
        assert!(matches!(s.apply_creator(0), Err(FockError::OrbitalOutOfRange { .. })));
        let full = FermionState::basis(2, &[1, 2]).unwrap();
        assert!(matches!(full.apply_creator(1), Err(FockError::ParticleOverflow { .. })));
    }

    #[test]
    fn number_expectations() {
        let set = [1, 2, 4, 7];
        let s = FermionState::basis(7, &[1, 2, 3]).unwrap();
        assert_eq!(s.number_expectation(&set).unwrap(), 2.0);
        let s = FermionState::basis(7, &[3, 5, 6]).unwrap();
        assert_eq!(s.number_expectation(&set).unwrap(), 0.0);
        let h = c(0.5);
        let s = FermionState::from_terms(
            3,
            7,
            [(vec![1, 2, 3], h), (vec![1, 4, 5], h), (vec![1, 6, 7], h), (vec![2, 4, 6], h)],
        )
        .unwrap();
        assert!((s.number_expectation(&set).unwrap() - 2.0).abs() < 1e-15);
        assert!((s.inner_product(&s).unwrap().re - 1.0).abs() < 1e-15);

        let unnormalized = s.scale(c(2.0));
        assert!(matches!(
            unnormalized.number_expectation(&set),
            Err(FockError::NotNormalized { .. })
        ));
    }

    #[test]
    fn inner_products() {
        let a = FermionState::basis(6, &[1, 2, 3]).unwrap();
        let b = FermionState::basis(6, &[1, 2, 4]).unwrap();
        assert_eq!(a.inner_product(&a).unwrap(), c(1.0));
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0));
        let ai = a.scale(Complex64::new(0.0, 1.0));
        // conjugate-linear in the first slot
        assert_eq!(ai.inner_product(&a).unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(a.inner_product(&ai).unwrap(), Complex64::new(0.0, 1.0));
        let other = FermionState::basis(7, &[1, 2, 3]).unwrap();
        assert!(a.inner_product(&other).is_err());
    }

    #[test]
    fn change_basis_identity_and_swap() {
        let s = FermionState::random(3, 6, 3).unwrap();
        let same = s.change_basis(&OrbitalUnitary::identity(6)).unwrap();
        for (d, a) in s.terms() {
            assert!((same.amplitude(d) - a).norm() < 1e-15);
        }
        let swap = OrbitalUnitary::permutation(&[2, 1, 3, 4, 5, 6]).unwrap();
        let b = FermionState::basis(6, &[1, 2, 3]).unwrap();
        let out = b.change_basis(&swap).unwrap();
        assert_eq!(out.support_len(), 1);
        assert!((out.amplitude(det(&[1, 2, 3])) - c(-1.0)).norm() < 1e-15);
        assert!(s.change_basis(&OrbitalUnitary::identity(7)).is_err());
    }

    #[test]
    fn change_basis_preserves_norm() {
        for seed in 0..5 {
            let s = FermionState::random(3, 6, seed).unwrap();
            let u = OrbitalUnitary::random(6, 100 + seed);
            let t = s.change_basis(&u).unwrap();
            assert!((t.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn random_state_is_deterministic_and_normalized() {
        let a = FermionState::random(3, 6, 1).unwrap();
        let b = FermionState::random(3, 6, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, FermionState::random(3, 6, 2).unwrap());
        let s = FermionState::random(2, 4, 99).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(s.support_len(), 6);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let u = OrbitalUnitary::random(7, 5);
        assert!(unitarity_residual(u.matrix()) < 1e-12);
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let s = FermionState::random(2, 4, 8).unwrap();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert_eq!(FermionState::parse_json(&text).unwrap(), s);

        let bad = [
            r#"{"n":2,"r":4,"amplitudes":[{"orbitals":[2,1],"re":1,"im":0}]}"#,
            r#"{"n":2,"r":4,"amplitudes":[{"orbitals":[1,1],"re":1,"im":0}]}"#,
            r#"{"n":2,"r":4,"amplitudes":[{"orbitals":[1,5],"re":1,"im":0}]}"#,
            r#"{"n":2,"r":4,"amplitudes":[{"orbitals":[1],"re":1,"im":0}]}"#,
            r#"{"n":2,"r":4,"amplitudes":[{"orbitals":[1,2],"re":1,"im":0},{"orbitals":[1,2],"re":1,"im":0}]}"#,
            r#"{"n":5,"r":4,"amplitudes":[]}"#,
            r#"{"n":2,"r":4}"#,
        ];
        for text in bad {
            assert!(matches!(FermionState::parse_json(text), Err(FockError::Format(_))), "{text}");
        }
    }

    #[test]
    fn pruning_drops_tiny_amplitudes() {
        let s = FermionState::from_terms(1, 2, [(vec![1], c(1.0)), (vec![2], c(1e-16))]).unwrap();
        assert_eq!(s.support_len(), 1);
        let zero = s.sub(&s).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn hole_dual_signs() {
        let d = FermionState::basis(4, &[1, 3]).unwrap().hole_dual();
        assert_eq!(d.n_particles(), 2);
        assert_eq!(d.amplitude(SlaterDet::new(&[2, 4]).unwrap()), c(-1.0));
        let d = FermionState::basis(5, &[1, 2]).unwrap().hole_dual();
        assert_eq!(d.amplitude(SlaterDet::new(&[3, 4, 5]).unwrap()), c(1.0));
        let s = FermionState::random(2, 5, 4).unwrap();
        let back = s.hole_dual().hole_dual();
        // Twice gives (-1)^(N(r-N)) = +1 here.
        assert!(back.sub(&s).unwrap().norm() < 1e-15);
        let s = FermionState::random(1, 4, 4).unwrap();
        // (-1)^(1·3) = -1.
        assert!(s.hole_dual().hole_dual().add(&s).unwrap().norm() < 1e-15);
    }
}
