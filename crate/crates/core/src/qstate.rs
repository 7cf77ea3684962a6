//! Two-qubit density matrices.
//!
//! Every matrix in this crate is written in the fixed computational basis
//!
//! | index | ket      |
//! |-------|----------|
//! | 0     | `|↑↑⟩`   |
//! | 1     | `|↑↓⟩`   |
//! | 2     | `|↓↑⟩`   |
//! | 3     | `|↓↓⟩`   |
//!
//! with qubit A as the high bit. Reports that use the conventional 1-based
//! labels (`rho11` … `rho44`) map label `k` to index `k - 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, jacobi_eigh, Mat4};

/// Hermiticity tolerance, max-entry.
pub const TOL_HERM: f64 = 1e-12;
/// Allowed `|tr ρ − 1|`.
pub const TOL_TRACE: f64 = 1e-12;
/// Smallest eigenvalue allowed is `-TOL_PSD`.
pub const TOL_PSD: f64 = 1e-10;
/// A diagonal element at or below this value counts as vanishing.
pub const TOL_ZERO: f64 = 1e-10;

/// A validated 4×4 density matrix: Hermitian, unit trace, positive
/// semidefinite within the module tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0 .0[i][j]
    }

    /// Populations `ρ_ii` in basis order.
    pub fn diagonal(&self) -> [f64; 4] {
        self.0.real_diagonal()
    }

    /// The state with every coherence removed.
    pub fn dephased(&self) -> DensityMatrix {
        DensityMatrix(Mat4::from_real_diagonal(self.diagonal()))
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.0 .0.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile {
            matrix: self.0 .0.map(|row| row.map(|z| [z.re, z.im])),
        }
    }
}

/// JSON layout for a density matrix: `{"matrix": [[[re, im], ...], ...]}`,
/// four rows of four `[re, im]` pairs, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub matrix: [[[f64; 2]; 4]; 4],
}

impl MatrixFile {
    pub fn to_mat4(&self) -> Mat4 {
        Mat4(self.matrix.map(|row| row.map(|[re, im]| c(re, im))))
    }

    pub fn into_density_matrix(self) -> Result<DensityMatrix> {
        validate(self.to_mat4())
    }
}

/// Eigenvalues in descending order, with the matching eigenvectors as the
/// columns of a unitary when they were requested.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: [f64; 4],
    pub eigenvectors: Option<Mat4>,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[3]
    }
}

/// Eigen-decomposition of a Hermitian 4×4 matrix.
pub fn eig_hermitian(m: &Mat4, with_vectors: bool) -> Result<Spectrum> {
    let deviation = m.hermiticity_defect();
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    let (values, vectors) = jacobi_eigh(m).ok_or(Error::EigFailure)?;
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let eigenvalues = order.map(|k| values[k]);
    let eigenvectors = with_vectors.then(|| {
        let mut sorted = Mat4::zeros();
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..4 {
                sorted.0[i][dst] = vectors.0[i][src];
            }
        }
        sorted
    });
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Check the density-matrix invariants and wrap `m` unchanged.
pub fn validate(m: Mat4) -> Result<DensityMatrix> {
    if m.0.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotHermitian {
            deviation: f64::INFINITY,
        });
    }
    let deviation = m.hermiticity_defect();
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    let deviation = (m.trace() - 1.0).norm();
    if deviation > TOL_TRACE {
        return Err(Error::TraceNotOne { deviation });
    }
    let min_eigenvalue = eig_hermitian(&m, false)?.min();
    if min_eigenvalue < -TOL_PSD {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(DensityMatrix(m))
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 8] = [
    "bell-phi+",
    "bell-phi-",
    "bell-psi+",
    "bell-psi-",
    "up-up",
    "down-down",
    "mixed",
    "werner:p=<v>",
];

fn bell(a: usize, b: usize, sign: f64) -> Mat4 {
    let mut m = Mat4::zeros();
    m.0[a][a] = c(0.5, 0.0);
    m.0[b][b] = c(0.5, 0.0);
    m.0[a][b] = c(0.5 * sign, 0.0);
    m.0[b][a] = c(0.5 * sign, 0.0);
    m
}

fn werner(p: f64) -> Mat4 {
    let singlet = bell(1, 2, -1.0).scale(c(p, 0.0));
    let noise = Mat4::identity().scale(c((1.0 - p) / 4.0, 0.0));
    singlet + noise
}

/// Exact density matrix of a named state.
///
/// `werner:p=<v>` is `p |ψ⁻⟩⟨ψ⁻| + (1 − p) I/4`.
pub fn preset(name: &str) -> Result<DensityMatrix> {
    let m = match name {
        "bell-phi+" => bell(0, 3, 1.0),
        "bell-phi-" => bell(0, 3, -1.0),
        "bell-psi+" => bell(1, 2, 1.0),
        "bell-psi-" => bell(1, 2, -1.0),
        "up-up" => Mat4::from_real_diagonal([1.0, 0.0, 0.0, 0.0]),
        "down-down" => Mat4::from_real_diagonal([0.0, 0.0, 0.0, 1.0]),
        "mixed" => Mat4::from_real_diagonal([0.25; 4]),
        other => {
            let p = other
                .strip_prefix("werner:p=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::UnknownPreset(other.to_string()))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::WernerParamOutOfRange(p));
            }
            werner(p)
        }
    };
    validate(m)
}
