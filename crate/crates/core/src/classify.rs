//! Division of the two-qubit state space by sudden-death behaviour.
//!
//! A state lies in one of the subspaces I–IV when the population of `|↑↑⟩`,
//! `|↑↓⟩`, `|↓↑⟩` or `|↓↓⟩` (respectively) vanishes. States with several
//! vanishing populations are labelled by the first one, so every state with
//! `ρ₁₁ = 0` is in I.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channels::{params_at, ChannelKind, NoiseRates};
use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, TOL_ZERO};

/// Initial concurrence above which a state counts as entangled.
pub const ENTANGLED_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subspace {
    I,
    II,
    III,
    IV,
}

impl Subspace {
    pub const ALL: [Subspace; 4] = [Subspace::I, Subspace::II, Subspace::III, Subspace::IV];

    /// Basis index (0-based) whose population vanishes.
    pub fn basis_index(self) -> usize {
        self as usize
    }

    pub fn from_basis_index(i: usize) -> Option<Self> {
        Subspace::ALL.get(i).copied()
    }

    pub fn parse(s: &str) -> Option<Self> {
        Subspace::ALL.into_iter().find(|x| x.to_string() == s)
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subspace::I => "I",
            Subspace::II => "II",
            Subspace::III => "III",
            Subspace::IV => "IV",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubspaceLabel {
    /// `vanishing[i]` iff `ρ_ii ≤ TOL_ZERO` (0-based).
    pub vanishing: [bool; 4],
    pub canonical: Option<Subspace>,
}

impl SubspaceLabel {
    /// Vanishing diagonal positions as 1-based labels (`1` = `|↑↑⟩`).
    pub fn vanishing_labels(&self) -> Vec<usize> {
        (0..4).filter(|&i| self.vanishing[i]).map(|i| i + 1).collect()
    }
}

pub fn subspace(rho: &DensityMatrix) -> SubspaceLabel {
    let vanishing = rho.diagonal().map(|x| x <= TOL_ZERO);
    let canonical = vanishing.iter().position(|&v| v).and_then(Subspace::from_basis_index);
    SubspaceLabel { vanishing, canonical }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    EsdFree,
    AbruptEsd,
    NotEntangled,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::EsdFree => "esd-free",
            Verdict::AbruptEsd => "abrupt-esd",
            Verdict::NotEntangled => "not-entangled",
        }
    }
}

/// Which rule produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// Concurrence at `t = 0` is not above [`ENTANGLED_THRESHOLD`].
    InitiallySeparable,
    /// `ρ₁₁ = 0`: asymptotic decay under every channel.
    SubspaceI,
    /// Phase damping on both parties: ESD-free iff some population vanishes.
    VanishingPopulation,
    /// Phase damping on both parties with all four populations nonzero.
    AllPopulationsNonzero,
    /// Relaxation on both parties plus some dephasing, with `ρ₁₁ ≠ 0`.
    RelaxationRepopulates,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::InitiallySeparable => "initially-separable",
            Rule::SubspaceI => "subspace-i",
            Rule::VanishingPopulation => "vanishing-population",
            Rule::AllPopulationsNonzero => "all-populations-nonzero",
            Rule::RelaxationRepopulates => "relaxation-repopulates",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EsdVerdict {
    pub kind: ChannelKind,
    pub verdict: Verdict,
    pub reason: Rule,
}

/// Analytic sudden-death verdict for `rho` under a channel of `kind` driven
/// by `rates`.
///
/// Rules, after the separability gate:
/// * `ρ₁₁ = 0` is ESD-free under every channel.
/// * Phase damping with both `Γ₂ > 0`: ESD-free iff any population vanishes.
/// * Composite noise with both `Γ₁ > 0` and some `Γ₂ > 0`: everything
///   outside subspace I dies abruptly. Without relaxation on both parties
///   the composite channel falls back to the rule of the noise that remains.
///
/// Every other case returns [`Error::Undecided`]; the numerical crossing
/// search in [`crate::dynamics`] covers it.
pub fn predict_esd(rho: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates) -> Result<EsdVerdict> {
    rates.check()?;
    let verdict = |verdict, reason| Ok(EsdVerdict { kind, verdict, reason });
    if concurrence(rho)?.concurrence <= ENTANGLED_THRESHOLD {
        return verdict(Verdict::NotEntangled, Rule::InitiallySeparable);
    }
    let label = subspace(rho);
    if label.canonical == Some(Subspace::I) {
        return verdict(Verdict::EsdFree, Rule::SubspaceI);
    }
    let full_dephasing = rates.gamma2_a > 0.0 && rates.gamma2_b > 0.0;
    let phase_rule = || {
        if !full_dephasing {
            Err(Error::Undecided { kind })
        } else if label.canonical.is_some() {
            verdict(Verdict::EsdFree, Rule::VanishingPopulation)
        } else {
            verdict(Verdict::AbruptEsd, Rule::AllPopulationsNonzero)
        }
    };
    match kind {
        ChannelKind::PhaseDamping => phase_rule(),
        ChannelKind::AmplitudeDamping => Err(Error::Undecided { kind }),
        ChannelKind::Composite => {
            let relaxation_both = rates.gamma1_a > 0.0 && rates.gamma1_b > 0.0;
            let any_dephasing = rates.gamma2_a > 0.0 || rates.gamma2_b > 0.0;
            let any_relaxation = rates.gamma1_a > 0.0 || rates.gamma1_b > 0.0;
            if relaxation_both && any_dephasing {
                verdict(Verdict::AbruptEsd, Rule::RelaxationRepopulates)
            } else if !any_relaxation {
                phase_rule()
            } else {
                Err(Error::Undecided { kind })
            }
        }
    }
}

/// Populations after time `tau` of relaxation; dephasing never touches them,
/// so this is the diagonal under both the amplitude and composite channels.
pub fn diag_evolution_amp(rho0: &DensityMatrix, rates: &NoiseRates, tau: f64) -> Result<[f64; 4]> {
    let p = params_at(rates, tau)?;
    let [r11, r22, r33, r44] = rho0.diagonal();
    let (ga2, gb2) = (p.g1_a * p.g1_a, p.g1_b * p.g1_b);
    let (wa2, wb2) = (p.w1_a * p.w1_a, p.w1_b * p.w1_b);
    Ok([
        ga2 * gb2 * r11,
        ga2 * (r22 + wb2 * r11),
        gb2 * (r33 + wa2 * r11),
        r44 + wb2 * r33 + wa2 * r22 + wa2 * wb2 * r11,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply, KrausSet};
    use crate::linalg::Mat4;
    use crate::qstate::{preset, validate};

    fn ones() -> NoiseRates {
        NoiseRates::symmetric(1.0, 1.0).unwrap()
    }

    #[test]
    fn subspace_examples() {
        let l = subspace(&preset("bell-psi+").unwrap());
        assert_eq!(l.vanishing_labels(), vec![1, 4]);
        assert_eq!(l.canonical, Some(Subspace::I));

        let l = subspace(&preset("bell-phi+").unwrap());
        assert_eq!(l.vanishing_labels(), vec![2, 3]);
        assert_eq!(l.canonical, Some(Subspace::II));

        let l = subspace(&preset("mixed").unwrap());
        assert!(l.vanishing_labels().is_empty());
        assert_eq!(l.canonical, None);

        let l = subspace(&validate(Mat4::from_real_diagonal([0.5, 0.5, 0.0, 0.0])).unwrap());
        assert_eq!(l.canonical, Some(Subspace::III));
    }

    #[test]
    fn predict_examples() {
        let r = ones();
        let mixed = preset("mixed").unwrap();
        for kind in ChannelKind::ALL {
            let v = predict_esd(&mixed, kind, &r).unwrap();
            assert_eq!(v.verdict, Verdict::NotEntangled);
        }
        let phi = preset("bell-phi+").unwrap();
        assert_eq!(predict_esd(&phi, ChannelKind::PhaseDamping, &r).unwrap().verdict, Verdict::EsdFree);
        assert_eq!(predict_esd(&phi, ChannelKind::Composite, &r).unwrap().verdict, Verdict::AbruptEsd);
        assert!(matches!(
            predict_esd(&phi, ChannelKind::AmplitudeDamping, &r),
            Err(Error::Undecided { .. })
        ));

        let psi = preset("bell-psi+").unwrap();
        for kind in ChannelKind::ALL {
            let v = predict_esd(&psi, kind, &r).unwrap();
            assert_eq!(v.verdict, Verdict::EsdFree);
            assert_eq!(v.reason, Rule::SubspaceI);
        }

        let w = preset("werner:p=0.9").unwrap();
        assert_eq!(predict_esd(&w, ChannelKind::PhaseDamping, &r).unwrap().verdict, Verdict::AbruptEsd);
    }

    #[test]
    fn composite_falls_back_when_relaxation_missing() {
        let phi = preset("bell-phi+").unwrap();
        let phase_only = NoiseRates::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let v = predict_esd(&phi, ChannelKind::Composite, &phase_only).unwrap();
        assert_eq!(v.verdict, Verdict::EsdFree);
        let w = preset("werner:p=0.9").unwrap();
        let v = predict_esd(&w, ChannelKind::Composite, &phase_only).unwrap();
        assert_eq!(v.verdict, Verdict::AbruptEsd);

        let amp_only = NoiseRates::new(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(predict_esd(&phi, ChannelKind::Composite, &amp_only).is_err());
        let one_sided = NoiseRates::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(predict_esd(&phi, ChannelKind::Composite, &one_sided).is_err());
        let half_dephased = NoiseRates::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert!(predict_esd(&phi, ChannelKind::PhaseDamping, &half_dephased).is_err());
    }

    #[test]
    fn diag_evolution_examples() {
        let up = preset("up-up").unwrap();
        // γ₁ = 2^{-1/2} means Γ₁ t = ln 2
        let r = NoiseRates::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let d = diag_evolution_amp(&up, &r, 2f64.ln()).unwrap();
        for x in d {
            assert!((x - 0.25).abs() < 1e-15);
        }
        let w = preset("werner:p=0.3").unwrap();
        assert_eq!(diag_evolution_amp(&w, &r, 0.0).unwrap(), w.diagonal());
    }

    #[test]
    fn diag_evolution_matches_composite_channel() {
        let rho = preset("werner:p=0.55").unwrap();
        for (g2a, g2b) in [(0.0, 0.0), (0.3, 2.5)] {
            let r = NoiseRates::new(0.4, 1.7, g2a, g2b).unwrap();
            for tau in [0.1, 1.0, 4.0] {
                let out = apply(&KrausSet::at_time(ChannelKind::Composite, &r, tau).unwrap(), &rho).unwrap();
                let d = diag_evolution_amp(&rho, &r, tau).unwrap();
                for k in 0..4 {
                    assert!((out.diagonal()[k] - d[k]).abs() < 1e-12);
                }
                assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(d.iter().all(|&x| x > 0.0));
            }
        }
    }
}
