//! Spin bookkeeping for spin-resolved sectors: two-column Young diagrams,
//! spin occupation spectra, magnetic moments, and the cubic-field splitting
//! of a d-shell.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::data;
use crate::rational::{self, frac, int, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("spin S = {twice_spin}/2 is not compatible with N = {n} (need N/2 + S integral and S <= N/2)")]
    IncompatibleSpin { n: u32, twice_spin: u32 },
    #[error("column lengths ({0}, {1}) must satisfy c1 >= c2")]
    BadColumns(u32, u32),
    #[error("spin spectrum invalid: {0}")]
    BadSpectrum(String),
    #[error("weights have length {weights}, spectrum has length {spectrum}")]
    LengthMismatch { weights: usize, spectrum: usize },
    #[error("n_t = {0} outside the physical range [1, 2]")]
    OutOfRange(String),
}

/// Symmetry type of a spin-resolved N-electron sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct YoungDiagramTwoCol {
    c1: u32,
    c2: u32,
}

impl YoungDiagramTwoCol {
    pub fn new(c1: u32, c2: u32) -> Result<Self, SpinError> {
        if c1 < c2 {
            return Err(SpinError::BadColumns(c1, c2));
        }
        Ok(Self { c1, c2 })
    }

    pub fn columns(self) -> (u32, u32) {
        (self.c1, self.c2)
    }

    pub fn particles(self) -> u32 {
        self.c1 + self.c2
    }

    /// `2S = c1 - c2`.
    pub fn twice_spin(self) -> u32 {
        self.c1 - self.c2
    }

    pub fn spin(self) -> f64 {
        self.twice_spin() as f64 / 2.0
    }

    /// Row lengths, longest first: `c2` rows of two boxes, then single boxes.
    pub fn row_shape(self) -> Vec<u32> {
        let mut rows = vec![2; self.c2 as usize];
        rows.extend(std::iter::repeat_n(1, (self.c1 - self.c2) as usize));
        rows
    }
}

/// Diagram with columns `(N/2 + S, N/2 - S)`; spin passed as `2S`.
pub fn diagram_for(n: u32, twice_spin: u32) -> Result<YoungDiagramTwoCol, SpinError> {
    if twice_spin > n || !(n + twice_spin).is_multiple_of(2) {
        return Err(SpinError::IncompatibleSpin { n, twice_spin });
    }
    YoungDiagramTwoCol::new((n + twice_spin) / 2, (n - twice_spin) / 2)
}

/// Spin natural occupation numbers, decreasing and summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpinSpectrum(Vec<f64>);

impl SpinSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self, SpinError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(SpinError::BadSpectrum("values must be finite and nonempty".into()));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(SpinError::BadSpectrum("values must be decreasing".into()));
        }
        if values.iter().any(|&v| v < -1e-12) {
            return Err(SpinError::BadSpectrum("negative occupation".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(SpinError::BadSpectrum(format!("sum {sum} != 1")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

pub fn weights(w: &[i64]) -> Vec<Rational> {
    w.iter().map(|&x| int(x)).collect()
}

/// `Σ_j w_j μ_j` in Bohr magnetons (g = 2).
pub fn moment(spec: &SpinSpectrum, weights: &[Rational]) -> Result<f64, SpinError> {
    if weights.len() != spec.0.len() {
        return Err(SpinError::LengthMismatch {
            weights: weights.len(),
            spectrum: spec.0.len(),
        });
    }
    Ok(spec.0.iter().zip(weights).map(|(m, w)| m * rational::to_f64(w)).sum())
}

/// Exact moment of a rational spin vector.
pub fn moment_exact(values: &[Rational], weights: &[Rational]) -> Result<Rational, SpinError> {
    if weights.len() != values.len() {
        return Err(SpinError::LengthMismatch {
            weights: weights.len(),
            spectrum: values.len(),
        });
    }
    Ok(values.iter().zip(weights).fold(Rational::zero(), |acc, (m, w)| acc + m * w))
}

/// Per-orbital occupations of a d⁷ shell in a cubic crystal field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CubicSplitting {
    pub n_t: f64,
    pub n_e: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicOccupations {
    pub splitting: CubicSplitting,
    /// `(n_t, n_t, n_t, n_e, n_e)` sorted decreasing.
    pub occupations: [f64; 5],
    /// False when `n_t < n_e`, i.e. the e_g orbitals come first.
    pub t2g_dominant: bool,
}

/// `n_e = (7 - 3 n_t) / 2` with `n_t ∈ [1, 2]`.
pub fn cubic_occupations(n_t: f64) -> Result<CubicOccupations, SpinError> {
    if !(1.0..=2.0).contains(&n_t) {
        return Err(SpinError::OutOfRange(n_t.to_string()));
    }
    let n_e = (data::D7_ELECTRONS as f64 - 3.0 * n_t) / 2.0;
    let t2g_dominant = n_t >= n_e;
    let occupations = if t2g_dominant {
        [n_t, n_t, n_t, n_e, n_e]
    } else {
        [n_e, n_e, n_t, n_t, n_t]
    };
    Ok(CubicOccupations {
        splitting: CubicSplitting { n_t, n_e },
        occupations,
        t2g_dominant,
    })
}

/// Exact `(n_t, n_e)`.
pub fn cubic_splitting_exact(n_t: &Rational) -> Result<(Rational, Rational), SpinError> {
    if *n_t < int(1) || *n_t > int(2) {
        return Err(SpinError::OutOfRange(rational::format(n_t)));
    }
    let n_e = (int(data::D7_ELECTRONS) - int(3) * n_t) * frac(1, 2);
    Ok((n_t.clone(), n_e))
}

pub fn iron_spin_occupations() -> SpinSpectrum {
    SpinSpectrum::new(data::IRON_SPIN_OCCUPATIONS.to_vec()).expect("embedded data is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn young_diagrams() {
        let d = diagram_for(4, 0).unwrap();
        assert_eq!(d.columns(), (2, 2));
        assert_eq!(d.row_shape(), vec![2, 2]);
        let d = diagram_for(4, 2).unwrap();
        assert_eq!(d.columns(), (3, 1));
        assert_eq!(d.row_shape(), vec![2, 1, 1]);
        let d = diagram_for(3, 1).unwrap();
        assert_eq!(d.columns(), (2, 1));
        assert_eq!(d.row_shape(), vec![2, 1]);
        assert_eq!(d.spin(), 0.5);
        assert!(diagram_for(3, 0).is_err());
        assert!(diagram_for(2, 4).is_err());
        assert!(YoungDiagramTwoCol::new(1, 2).is_err());
    }

    #[test]
    fn diagram_round_trip_exhaustive() {
        for n in 0..=10u32 {
            for twice_spin in 0..=n {
                match diagram_for(n, twice_spin) {
                    Ok(d) => {
                        assert_eq!(d.twice_spin(), twice_spin);
                        assert_eq!(d.particles(), n);
                        assert_eq!(d.row_shape().iter().sum::<u32>(), n);
                    }
                    Err(_) => assert_eq!((n + twice_spin) % 2, 1),
                }
            }
        }
    }

    #[test]
    fn moments() {
        let w7 = weights(&data::D7_MOMENT_WEIGHTS);
        let b = SpinSpectrum::new(vec![0.75, 0.25, 0.0, 0.0]).unwrap();
        assert!((moment(&b, &w7).unwrap() - 2.5).abs() < 1e-15);
        let iron = iron_spin_occupations();
        assert!((moment(&iron, &w7).unwrap() - 2.22).abs() < 0.005);
        let sum: f64 = iron.values().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        let flat = SpinSpectrum::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(moment(&flat, &weights(&data::D3_MOMENT_WEIGHTS)).unwrap(), 0.0);
        assert!(moment(&flat, &w7).is_err());
    }

    #[test]
    fn spin_spectrum_validation() {
        assert!(SpinSpectrum::new(vec![0.4, 0.6]).is_err());
        assert!(SpinSpectrum::new(vec![0.6, 0.6]).is_err());
        assert!(SpinSpectrum::new(vec![]).is_err());
    }

    #[test]
    fn cubic_examples() {
        let c = cubic_occupations(1.5).unwrap();
        assert_eq!(c.splitting.n_e, 1.25);
        assert_eq!(c.occupations, [1.5, 1.5, 1.5, 1.25, 1.25]);
        let c = cubic_occupations(1.4).unwrap();
        assert!((c.splitting.n_e - 1.4).abs() < 1e-12);
        let c = cubic_occupations(1.458).unwrap();
        assert!((c.splitting.n_e - 1.313).abs() < 1e-12);
        assert!(c.t2g_dominant);
        let c = cubic_occupations(1.2).unwrap();
        assert!(!c.t2g_dominant);
        assert_eq!(c.occupations[0], c.splitting.n_e);
        assert!(cubic_occupations(0.9).is_err());
        assert!(cubic_occupations(2.1).is_err());
    }

    #[test]
    fn pullback_moments_lie_on_edge() {
        let w7 = weights(&data::D7_MOMENT_WEIGHTS);
        for p in [data::pullback_a(), data::pullback_b()] {
            let mu = moment_exact(&p.spin, &w7).unwrap();
            let n_t = &p.orbital[0];
            assert_eq!(mu, int(7) * n_t - int(8));
            let (_, n_e) = cubic_splitting_exact(n_t).unwrap();
            assert_eq!(n_e, p.orbital[4]);
        }
    }

    proptest! {
        #[test]
        fn cubic_total_is_exact(p in 0i64..=1000) {
            let n_t = int(1) + frac(p, 1000);
            let (n_t, n_e) = cubic_splitting_exact(&n_t).unwrap();
            prop_assert_eq!(int(3) * n_t + int(2) * n_e, int(7));
        }

        #[test]
        fn moment_is_linear(a in 0.0f64..1.0, x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let w = weights(&data::D7_MOMENT_WEIGHTS);
            let (x, y) = (x.max(y), x.min(y));
            let s1 = SpinSpectrum::new(vec![x / (x + y + 1.0) + 1.0 / (x + y + 1.0), y / (x + y + 1.0), 0.0, 0.0]);
            let s2 = SpinSpectrum::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap();
            if let Ok(s1) = s1 {
                let mix: Vec<f64> = s1.values().iter().zip(s2.values()).map(|(p, q)| a * p + (1.0 - a) * q).collect();
                let mixed = SpinSpectrum::new(mix).unwrap();
                let lhs = moment(&mixed, &w).unwrap();
                let rhs = a * moment(&s1, &w).unwrap() + (1.0 - a) * moment(&s2, &w).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }
}
