//! Wootters concurrence and the closed-form `Λ` expressions.
//!
//! `Λ = √λ₁ − √λ₂ − √λ₃ − √λ₄`, where `λᵢ` are the eigenvalues (descending)
//! of `R = ρ ρ̃` and `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`. The concurrence is
//! `max(0, Λ)`.
//!
//! `R` is not Hermitian. With any factor `ρ = B B†`, the matrix
//! `M = B† (σ_y⊗σ_y) B*` satisfies `M M† = B† ρ̃ B`, whose nonzero spectrum is
//! that of `ρ̃ ρ`, so the `√λᵢ` are exactly the singular values of `M`.
//! Computing those directly keeps small `√λᵢ` accurate to a few ulps instead
//! of the `√ε` one gets from square-rooting eigenvalues.

use crate::channels::{params_at, ChannelKind, NoiseRates};
use crate::error::{Error, Result};
use crate::linalg::{c, singular_values, Mat2, Mat4, ZERO};
use crate::qstate::{eig_hermitian, DensityMatrix, TOL_ZERO};

/// Round-off allowance for quantities that are non-negative analytically.
pub const TOL_ROUNDOFF: f64 = 1e-12;

/// `σ_y ⊗ σ_y`, real with antidiagonal `(−1, 1, 1, −1)`.
pub fn spin_flip() -> Mat4 {
    let sigma_y = Mat2([[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]]);
    sigma_y.kron(&sigma_y)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceResult {
    /// `√λᵢ`, descending.
    pub sqrt_eigs: [f64; 4],
    /// `Λ = √λ₁ − √λ₂ − √λ₃ − √λ₄`
    pub lambda_cap: f64,
    /// `max(0, Λ)`
    pub concurrence: f64,
}

impl ConcurrenceResult {
    fn from_sqrt_eigs(sqrt_eigs: [f64; 4]) -> Self {
        let lambda_cap = sqrt_eigs[0] - sqrt_eigs[1] - sqrt_eigs[2] - sqrt_eigs[3];
        ConcurrenceResult {
            sqrt_eigs,
            lambda_cap,
            concurrence: lambda_cap.max(0.0),
        }
    }
}

/// `R(ρ) = ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`
pub fn r_matrix(rho: &DensityMatrix) -> Mat4 {
    let y = spin_flip();
    *rho.matrix() * y * rho.matrix().conj() * y
}

pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    let spectrum = eig_hermitian(rho.matrix(), true)?;
    let vectors = spectrum.eigenvectors.expect("requested");
    let mut factor = Mat4::zeros();
    for (k, &w) in spectrum.eigenvalues.iter().enumerate() {
        let s = w.max(0.0).sqrt();
        for i in 0..4 {
            factor.0[i][k] = vectors.0[i][k] * s;
        }
    }
    let m = factor.adjoint() * spin_flip() * factor.conj();
    let sqrt_eigs = singular_values(&m).ok_or(Error::EigFailure)?;
    Ok(ConcurrenceResult::from_sqrt_eigs(sqrt_eigs))
}

/// `Λ` of the fully dephased state, which depends on the populations only:
/// `−2√(ρ₁₁ρ₄₄)` when `ρ₂₂ρ₃₃ ≥ ρ₁₁ρ₄₄`, otherwise `−2√(ρ₂₂ρ₃₃)`.
pub fn lambda_dephased_limit(rho: &DensityMatrix) -> f64 {
    let d = rho.diagonal().map(|x| x.max(0.0));
    let outer = d[0] * d[3];
    let inner = d[1] * d[2];
    if inner >= outer {
        -2.0 * outer.sqrt()
    } else {
        -2.0 * inner.sqrt()
    }
}

/// Closed-form `Λ(t)` for an initial state with vanishing `|↑↑⟩` population.
///
/// For such states the spectrum of `R` is `{α + β, α − β, 0, 0}` and
/// `Λ = 2β / (√(α+β) + √(α−β))`, where with `G = γ₁^Aγ₁^B`, `g = γ₂^Aγ₂^B`,
/// `c = |ρ₂₃|²`, `p = ρ₂₂ρ₃₃`:
///
/// | channel   | α               | β               |
/// |-----------|-----------------|-----------------|
/// | phase     | `g²c + p`       | `2g√(cp)`       |
/// | amplitude | `G²(c + p)`     | `2G²√(cp)`      |
/// | composite | `G²(g²c + p)`   | `2G²g√(cp)`     |
pub fn lambda_rho_i_closed_form(rho0: &DensityMatrix, rates: &NoiseRates, t: f64, kind: ChannelKind) -> Result<f64> {
    let rho11 = rho0.diagonal()[0];
    if rho11 > TOL_ZERO {
        return Err(Error::NotInSubspaceI { rho11 });
    }
    let params = params_at(rates, t)?;
    let big = params.g1_a * params.g1_b;
    let small = params.g2_a * params.g2_b;
    let coh = rho0.entry(1, 2).norm_sqr();
    let pop = (rho0.diagonal()[1] * rho0.diagonal()[2]).max(0.0);
    let root = (coh * pop).sqrt();
    let (alpha, beta) = match kind {
        ChannelKind::PhaseDamping => (small * small * coh + pop, 2.0 * small * root),
        ChannelKind::AmplitudeDamping => (big * big * (coh + pop), 2.0 * big * big * root),
        ChannelKind::Composite => (big * big * (small * small * coh + pop), 2.0 * big * big * small * root),
    };
    let upper = (alpha + beta).sqrt();
    if upper == 0.0 {
        return Ok(0.0);
    }
    let lower = (alpha - beta).max(0.0).sqrt();
    Ok(2.0 * beta / (upper + lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{preset, validate};

    #[test]
    fn spin_flip_is_real_antidiagonal_involution() {
        let y = spin_flip();
        let want = [-1.0, 1.0, 1.0, -1.0];
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { want[i] } else { 0.0 };
                assert_eq!(y[(i, j)], c(expect, 0.0));
            }
        }
        assert_eq!(y * y, Mat4::identity());
    }

    #[test]
    fn r_matrix_examples() {
        assert_eq!(r_matrix(&preset("up-up").unwrap()), Mat4::zeros());
        assert_eq!(
            r_matrix(&preset("mixed").unwrap()),
            Mat4::identity().scale(c(1.0 / 16.0, 0.0))
        );
        let (a, b, cc, d) = (0.1, 0.2, 0.3, 0.4);
        let rho = validate(Mat4::from_real_diagonal([a, b, cc, d])).unwrap();
        let r = r_matrix(&rho);
        let want = Mat4::from_real_diagonal([a * d, b * cc, cc * b, d * a]);
        assert!(r.max_abs_diff(&want) < 1e-17);
    }

    #[test]
    fn concurrence_examples() {
        let mixed = concurrence(&preset("mixed").unwrap()).unwrap();
        assert!((mixed.lambda_cap + 0.5).abs() < 1e-15);
        assert_eq!(mixed.concurrence, 0.0);

        let up = concurrence(&preset("up-up").unwrap()).unwrap();
        assert_eq!(up.lambda_cap, 0.0);
        assert_eq!(up.concurrence, 0.0);

        for bell in ["bell-phi+", "bell-phi-", "bell-psi+", "bell-psi-"] {
            let r = concurrence(&preset(bell).unwrap()).unwrap();
            assert!((r.lambda_cap - 1.0).abs() < 1e-14, "{bell}: {:?}", r);
            assert!((r.concurrence - 1.0).abs() < 1e-14);
        }

        let w = concurrence(&preset("werner:p=0.8").unwrap()).unwrap();
        assert!((w.concurrence - 0.7).abs() < 1e-14);
        assert!(w.sqrt_eigs.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn dephased_limit_examples() {
        let d = |x: [f64; 4]| validate(Mat4::from_real_diagonal(x)).unwrap();
        assert!((lambda_dephased_limit(&d([0.25; 4])) + 0.5).abs() < 1e-16);
        assert_eq!(lambda_dephased_limit(&d([0.5, 0.0, 0.0, 0.5])), 0.0);
        // ρ₁₁ = 0 puts ρ₂₂ρ₃₃ ≥ ρ₁₁ρ₄₄, so the first branch gives 0
        let diag = d([0.0, 0.3, 0.2, 0.5]);
        assert_eq!(lambda_dephased_limit(&diag), 0.0);
        assert_eq!(concurrence(&diag).unwrap().lambda_cap, 0.0);
        let v = lambda_dephased_limit(&d([0.4, 0.3, 0.2, 0.1]));
        assert!((v + 2.0 * 0.04f64.sqrt()).abs() < 1e-16);
        assert_eq!(lambda_dephased_limit(&d([0.0, 0.7, 0.0, 0.3])), 0.0);
    }

    #[test]
    fn closed_form_bell_psi_plus() {
        let psi = preset("bell-psi+").unwrap();
        let ph = NoiseRates::new(0.0, 0.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.1, 0.5, 1.0, 2.0] {
            let v = lambda_rho_i_closed_form(&psi, &ph, t, ChannelKind::PhaseDamping).unwrap();
            assert!((v - (-2.0 * t).exp()).abs() < 1e-15);
        }
        let r = NoiseRates::new(0.3, 1.1, 0.7, 0.2).unwrap();
        for t in [0.0, 0.4, 3.0] {
            let p = params_at(&r, t).unwrap();
            let v = lambda_rho_i_closed_form(&psi, &r, t, ChannelKind::Composite).unwrap();
            let want = p.g1_a * p.g1_b * p.g2_a * p.g2_b;
            assert!((v - want).abs() < 1e-15);
            assert!(v > 0.0);
        }
        let r0 = lambda_rho_i_closed_form(&psi, &r, 0.0, ChannelKind::AmplitudeDamping).unwrap();
        assert!((r0 - concurrence(&psi).unwrap().lambda_cap).abs() < 1e-12);
    }

    #[test]
    fn closed_form_rejects_populated_up_up() {
        let r = NoiseRates::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let err = lambda_rho_i_closed_form(&preset("bell-phi+").unwrap(), &r, 1.0, ChannelKind::Composite);
        assert!(matches!(err, Err(Error::NotInSubspaceI { .. })));
        // separable member of the subspace: no coherence, Λ ≡ 0
        let sep = validate(Mat4::from_real_diagonal([0.0, 0.5, 0.5, 0.0])).unwrap();
        assert_eq!(lambda_rho_i_closed_form(&sep, &r, 0.7, ChannelKind::PhaseDamping).unwrap(), 0.0);
        let ground = preset("down-down").unwrap();
        assert_eq!(lambda_rho_i_closed_form(&ground, &r, 0.7, ChannelKind::Composite).unwrap(), 0.0);
    }
}
