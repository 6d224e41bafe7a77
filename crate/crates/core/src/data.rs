//! Embedded reference datasets used by the demos and acceptance tests.

use crate::rational::{frac, Rational};

/// Natural occupation numbers of the first excited beryllium state
/// (`S = 1`, `S_z = 1`) over ten spin-orbitals of the 1s, 2s and 2p shells,
/// printed to six decimals.
pub const BERYLLIUM_OCCUPATIONS: [f64; 10] = [
    1.000000, 0.999995, 0.999287, 0.999284, 0.000711, 0.000707, 0.000009, 0.000007, 0.000000,
    0.000000,
];

/// Electrons in the beryllium dataset.
pub const BERYLLIUM_ELECTRONS: usize = 4;

/// Iron d-shell: t2g occupation per orbital and the saturation moment in
/// Bohr magnetons.
pub const IRON_N_T: f64 = 1.458;
pub const IRON_MOMENT: f64 = 2.22;
/// Window for calling the iron point pinned to the `μ = 7 n_t - 8` edge.
pub const IRON_PIN_TOL: f64 = 0.05;

/// Spin occupation numbers recovered for the iron d-shell.
pub const IRON_SPIN_OCCUPATIONS: [f64; 4] = [0.69, 0.23, 0.08, 0.0];

/// Spin-moment weights of the `S = 3/2` d⁷ sector: `μ = 3μ₁ + μ₂ - μ₃ - 3μ₄`.
pub const D7_MOMENT_WEIGHTS: [i64; 4] = [3, 1, -1, -3];
/// `μ = μ₁ - μ₂` for the d³ low-spin sector.
pub const D3_MOMENT_WEIGHTS: [i64; 2] = [1, -1];

/// Electrons in the iron d-shell.
pub const D7_ELECTRONS: i64 = 7;

/// A point of the d⁷ orbital/spin polytope: five orbital occupations
/// followed by four spin occupations.
#[derive(Clone, Debug, PartialEq)]
pub struct Pullback {
    pub orbital: [Rational; 5],
    pub spin: [Rational; 4],
}

/// Pull back of vertex A: `[7/5 ×5 | 3/5, 1/5, 1/5, 0]`.
pub fn pullback_a() -> Pullback {
    Pullback {
        orbital: std::array::from_fn(|_| frac(7, 5)),
        spin: [frac(3, 5), frac(1, 5), frac(1, 5), frac(0, 1)],
    }
}

/// Pull back of vertex B: `[3/2, 3/2, 3/2, 5/4, 5/4 | 3/4, 1/4, 0, 0]`.
pub fn pullback_b() -> Pullback {
    Pullback {
        orbital: [frac(3, 2), frac(3, 2), frac(3, 2), frac(5, 4), frac(5, 4)],
        spin: [frac(3, 4), frac(1, 4), frac(0, 1), frac(0, 1)],
    }
}
