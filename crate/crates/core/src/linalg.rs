//! Dense 2×2 / 4×4 complex matrices and the two Jacobi kernels the rest of
//! the crate is built on: a Hermitian eigensolver and a one-sided SVD.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

const MAX_SWEEPS: usize = 60;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-qubit operator, basis order (|↑⟩, |↓⟩).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn real(m: [[f64; 2]; 2]) -> Self {
        Mat2([[c(m[0][0], 0.0), c(m[0][1], 0.0)], [c(m[1][0], 0.0), c(m[1][1], 0.0)]])
    }

    pub fn identity() -> Self {
        Mat2::real([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Kronecker product `self ⊗ rhs`; `self` acts on qubit A (the high bit).
    pub fn kron(&self, rhs: &Mat2) -> Mat4 {
        let mut out = Mat4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        out.0[2 * a + i][2 * b + j] = self.0[a][b] * rhs.0[i][j];
                    }
                }
            }
        }
        out
    }
}

/// Two-qubit operator in the basis |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[Complex64; 4]; 4]);

impl Mat4 {
    pub fn zeros() -> Self {
        Mat4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(d: [f64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            m.0[i][i] = c(d[i], 0.0);
        }
        m
    }

    pub fn outer(v: &[Complex64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z = z.conj());
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn real_diagonal(&self) -> [f64; 4] {
        [self.0[0][0].re, self.0[1][1].re, self.0[2][2].re, self.0[3][3].re]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        (*self - *other).max_abs()
    }

    /// Largest deviation from Hermiticity, `max |m_ij − conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `self · x · self†`
    pub fn sandwich(&self, x: &Mat4) -> Mat4 {
        *self * *x * self.adjoint()
    }

    pub fn column(&self, j: usize) -> [Complex64; 4] {
        [self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]]
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..4 {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(mut self, rhs: Mat4) -> Mat4 {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(mut self, rhs: Mat4) -> Mat4 {
        for i in 0..4 {
            for j in 0..4 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

/// Plane rotation that diagonalizes the Hermitian 2×2 block
/// `[[app, apq], [conj(apq), aqq]]`. Returns the 2×2 unitary `V`
/// (as `[[vpp, vpq], [vqp, vqq]]`) with `V† B V` diagonal.
fn hermitian_rotation(app: f64, aqq: f64, apq: Complex64) -> [[Complex64; 2]; 2] {
    let mag = apq.norm();
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let ph = phase.conj();
    [[c(cs, 0.0), c(sn, 0.0)], [ph * (-sn), ph * cs]]
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix. Returns unsorted
/// eigenvalues and the unitary whose columns are the matching eigenvectors,
/// or `None` if the sweeps fail to converge.
///
/// Pairs whose coupling is exactly zero are never rotated, so a row/column
/// of exact zeros survives as an exact zero eigenpair.
pub fn jacobi_eigh(m: &Mat4) -> Option<([f64; 4], Mat4)> {
    let mut a = *m;
    let mut v = Mat4::identity();
    // Couplings this small shift no eigenvalue by more than ε²·‖m‖.
    let negligible = f64::EPSILON * f64::EPSILON * m.max_abs();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..3 {
            for q in (p + 1)..4 {
                let apq = a.0[p][q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                if mag <= f64::EPSILON * 0.5 * (app.abs() * aqq.abs()).sqrt() || mag <= negligible {
                    a.0[p][q] = ZERO;
                    a.0[q][p] = ZERO;
                    continue;
                }
                rotated = true;
                let r = hermitian_rotation(app, aqq, apq);
                // a <- a · R on columns p, q
                for i in 0..4 {
                    let (x, y) = (a.0[i][p], a.0[i][q]);
                    a.0[i][p] = x * r[0][0] + y * r[1][0];
                    a.0[i][q] = x * r[0][1] + y * r[1][1];
                    let (x, y) = (v.0[i][p], v.0[i][q]);
                    v.0[i][p] = x * r[0][0] + y * r[1][0];
                    v.0[i][q] = x * r[0][1] + y * r[1][1];
                }
                // a <- R† · a on rows p, q
                for j in 0..4 {
                    let (x, y) = (a.0[p][j], a.0[q][j]);
                    a.0[p][j] = r[0][0].conj() * x + r[1][0].conj() * y;
                    a.0[q][j] = r[0][1].conj() * x + r[1][1].conj() * y;
                }
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
                a.0[p][p].im = 0.0;
                a.0[q][q].im = 0.0;
            }
        }
        if !rotated {
            return Some((a.real_diagonal(), v));
        }
    }
    None
}

/// Singular values of a general complex 4×4 matrix by one-sided (Hestenes)
/// Jacobi, in descending order. Absolute accuracy is a few ulps of the
/// largest singular value, including for the smallest ones.
pub fn singular_values(m: &Mat4) -> Option<[f64; 4]> {
    // Work at unit scale so column norms of tiny entries do not underflow;
    // a power of two keeps the rescaling exact.
    let largest = m.max_abs();
    if largest == 0.0 {
        return Some([0.0; 4]);
    }
    let scale = 2f64.powi((largest.log2().ceil() as i32).clamp(-1000, 1000));
    let unit = m.scale(c(1.0 / scale, 0.0));
    let mut cols = [unit.column(0), unit.column(1), unit.column(2), unit.column(3)];
    let norm2 = |v: &[Complex64; 4]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    // A column this short moves no singular value by more than ε²·‖M‖.
    let negligible = f64::EPSILON.powi(4);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..3 {
            for q in (p + 1)..4 {
                let alpha = norm2(&cols[p]);
                let beta = norm2(&cols[q]);
                let gamma: Complex64 = (0..4).map(|i| cols[p][i].conj() * cols[q][i]).sum();
                let mag = gamma.norm();
                if mag == 0.0 || mag <= 4.0 * f64::EPSILON * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let r = hermitian_rotation(alpha, beta, gamma);
                for i in 0..4 {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = x * r[0][0] + y * r[1][0];
                    cols[q][i] = x * r[0][1] + y * r[1][1];
                }
            }
        }
        if !rotated {
            let mut s = cols.map(|col| norm2(&col).sqrt() * scale);
            s.sort_by(|a, b| b.total_cmp(a));
            return Some(s);
        }
    }
    None
}
