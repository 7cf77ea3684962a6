//! Amplitude-damping, phase-damping and composite Kraus channels acting
//! independently on each qubit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Mat4};
use crate::qstate::{validate, DensityMatrix};

/// Completeness tolerance for `Σ K†K = 1`, max-entry.
pub const TOL_COMPLETENESS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    AmplitudeDamping,
    PhaseDamping,
    Composite,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::AmplitudeDamping,
        ChannelKind::PhaseDamping,
        ChannelKind::Composite,
    ];

    /// Short name used on the command line (`am`, `ph`, `composite`).
    pub fn short_name(self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "am",
            ChannelKind::PhaseDamping => "ph",
            ChannelKind::Composite => "composite",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Self> {
        ChannelKind::ALL.into_iter().find(|k| k.short_name() == s)
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::AmplitudeDamping => "amplitude-damping",
            ChannelKind::PhaseDamping => "phase-damping",
            ChannelKind::Composite => "composite",
        })
    }
}

/// Relaxation rates `Γ₁` and dephasing rates `Γ₂` for parties A and B,
/// in inverse time units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates {
    pub gamma1_a: f64,
    pub gamma1_b: f64,
    pub gamma2_a: f64,
    pub gamma2_b: f64,
}

impl NoiseRates {
    pub fn new(gamma1_a: f64, gamma1_b: f64, gamma2_a: f64, gamma2_b: f64) -> Result<Self> {
        let rates = NoiseRates {
            gamma1_a,
            gamma1_b,
            gamma2_a,
            gamma2_b,
        };
        rates.check()?;
        Ok(rates)
    }

    /// Same `Γ₁` and `Γ₂` on both parties.
    pub fn symmetric(gamma1: f64, gamma2: f64) -> Result<Self> {
        NoiseRates::new(gamma1, gamma1, gamma2, gamma2)
    }

    pub fn check(&self) -> Result<()> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidRate { name, value });
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 4] {
        [
            ("gamma1_a", self.gamma1_a),
            ("gamma1_b", self.gamma1_b),
            ("gamma2_a", self.gamma2_a),
            ("gamma2_b", self.gamma2_b),
        ]
    }

    /// The rates that drive a channel of the given kind.
    pub fn relevant(&self, kind: ChannelKind) -> Vec<f64> {
        match kind {
            ChannelKind::AmplitudeDamping => vec![self.gamma1_a, self.gamma1_b],
            ChannelKind::PhaseDamping => vec![self.gamma2_a, self.gamma2_b],
            ChannelKind::Composite => vec![self.gamma1_a, self.gamma1_b, self.gamma2_a, self.gamma2_b],
        }
    }

    /// Copy with the rates that do not act under `kind` set to zero.
    pub fn restricted_to(&self, kind: ChannelKind) -> NoiseRates {
        match kind {
            ChannelKind::AmplitudeDamping => NoiseRates {
                gamma2_a: 0.0,
                gamma2_b: 0.0,
                ..*self
            },
            ChannelKind::PhaseDamping => NoiseRates {
                gamma1_a: 0.0,
                gamma1_b: 0.0,
                ..*self
            },
            ChannelKind::Composite => *self,
        }
    }
}

/// Per-party decay factors at a fixed time:
/// `γ₁ = exp(−Γ₁t/2)`, `ω₁ = √(1 − γ₁²)`, `γ₂ = exp(−Γ₂t)`, `ω₂ = √(1 − γ₂²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub g1_a: f64,
    pub g1_b: f64,
    pub w1_a: f64,
    pub w1_b: f64,
    pub g2_a: f64,
    pub g2_b: f64,
    pub w2_a: f64,
    pub w2_b: f64,
}

/// `(exp(−x/2), √(1 − exp(−x)))`, computed without cancellation for small `x`.
fn decay_pair(x: f64) -> (f64, f64) {
    ((-0.5 * x).exp(), (-(-x).exp_m1()).sqrt())
}

impl ChannelParams {
    /// Parameters of the identity channel.
    pub fn identity() -> Self {
        ChannelParams {
            g1_a: 1.0,
            g1_b: 1.0,
            w1_a: 0.0,
            w1_b: 0.0,
            g2_a: 1.0,
            g2_b: 1.0,
            w2_a: 0.0,
            w2_b: 0.0,
        }
    }
}

pub fn params_at(rates: &NoiseRates, t: f64) -> Result<ChannelParams> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    rates.check()?;
    let (g1_a, w1_a) = decay_pair(rates.gamma1_a * t);
    let (g1_b, w1_b) = decay_pair(rates.gamma1_b * t);
    // γ₂ decays twice as fast in the exponent: exp(−Γ₂t) = exp(−(2Γ₂t)/2)
    let (g2_a, w2_a) = decay_pair(2.0 * rates.gamma2_a * t);
    let (g2_b, w2_b) = decay_pair(2.0 * rates.gamma2_b * t);
    Ok(ChannelParams {
        g1_a,
        g1_b,
        w1_a,
        w1_b,
        g2_a,
        g2_b,
        w2_a,
        w2_b,
    })
}

/// One-qubit amplitude-damping pair `M₁ = diag(γ₁, 1)`, `M₂ = ω₁ |↓⟩⟨↑|`.
pub fn amplitude_ops(g1: f64, w1: f64) -> [Mat2; 2] {
    [
        Mat2::real([[g1, 0.0], [0.0, 1.0]]),
        Mat2::real([[0.0, 0.0], [w1, 0.0]]),
    ]
}

/// One-qubit phase-damping pair `P₁ = diag(γ₂, 1)`, `P₂ = diag(ω₂, 0)`.
pub fn phase_ops(g2: f64, w2: f64) -> [Mat2; 2] {
    [
        Mat2::real([[g2, 0.0], [0.0, 1.0]]),
        Mat2::real([[w2, 0.0], [0.0, 0.0]]),
    ]
}

/// One-qubit composite triple `C₁ = diag(γ₁γ₂, 1)`, `C₂ = diag(γ₁ω₂, 0)`,
/// `C₃ = ω₁ |↓⟩⟨↑|`.
pub fn composite_ops(g1: f64, w1: f64, g2: f64, w2: f64) -> [Mat2; 3] {
    [
        Mat2::real([[g1 * g2, 0.0], [0.0, 1.0]]),
        Mat2::real([[g1 * w2, 0.0], [0.0, 0.0]]),
        Mat2::real([[0.0, 0.0], [w1, 0.0]]),
    ]
}

/// Every `a ⊗ b`, with party A's index varying slowest.
fn tensor_all(a: &[Mat2], b: &[Mat2]) -> Vec<Mat4> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.kron(y))).collect()
}

/// A complete set of two-qubit Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    kind: ChannelKind,
    operators: Vec<Mat4>,
    params: ChannelParams,
}

impl KrausSet {
    /// Build a set from explicit operators, rejecting it unless
    /// `Σ K†K = 1` holds within [`TOL_COMPLETENESS`].
    pub fn from_operators(kind: ChannelKind, operators: Vec<Mat4>, params: ChannelParams) -> Result<Self> {
        let set = KrausSet {
            kind,
            operators,
            params,
        };
        let deviation = set.completeness_deviation();
        if deviation.is_nan() || deviation > TOL_COMPLETENESS {
            return Err(Error::Incomplete { deviation });
        }
        Ok(set)
    }

    pub fn for_kind(kind: ChannelKind, params: &ChannelParams) -> KrausSet {
        match kind {
            ChannelKind::AmplitudeDamping => kraus_amplitude(params),
            ChannelKind::PhaseDamping => kraus_phase(params),
            ChannelKind::Composite => kraus_composite(params),
        }
    }

    /// Channel of the given kind after time `t`.
    pub fn at_time(kind: ChannelKind, rates: &NoiseRates, t: f64) -> Result<KrausSet> {
        Ok(KrausSet::for_kind(kind, &params_at(rates, t)?))
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn operators(&self) -> &[Mat4] {
        &self.operators
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    /// `‖Σ K†K − 1‖_max`
    pub fn completeness_deviation(&self) -> f64 {
        let sum = self
            .operators
            .iter()
            .fold(Mat4::zeros(), |acc, k| acc + k.adjoint() * *k);
        sum.max_abs_diff(&Mat4::identity())
    }

    /// `Σ K m K†` on an arbitrary matrix, without validation.
    pub fn apply_raw(&self, m: &Mat4) -> Mat4 {
        self.operators
            .iter()
            .fold(Mat4::zeros(), |acc, k| acc + k.sandwich(m))
    }
}

pub fn kraus_amplitude(params: &ChannelParams) -> KrausSet {
    let a = amplitude_ops(params.g1_a, params.w1_a);
    let b = amplitude_ops(params.g1_b, params.w1_b);
    KrausSet {
        kind: ChannelKind::AmplitudeDamping,
        operators: tensor_all(&a, &b),
        params: *params,
    }
}

pub fn kraus_phase(params: &ChannelParams) -> KrausSet {
    let a = phase_ops(params.g2_a, params.w2_a);
    let b = phase_ops(params.g2_b, params.w2_b);
    KrausSet {
        kind: ChannelKind::PhaseDamping,
        operators: tensor_all(&a, &b),
        params: *params,
    }
}

/// The nine-operator composite channel `C_k^A ⊗ C_l^B`, built directly
/// rather than by chaining the two single-noise channels.
pub fn kraus_composite(params: &ChannelParams) -> KrausSet {
    let a = composite_ops(params.g1_a, params.w1_a, params.g2_a, params.w2_a);
    let b = composite_ops(params.g1_b, params.w1_b, params.g2_b, params.w2_b);
    KrausSet {
        kind: ChannelKind::Composite,
        operators: tensor_all(&a, &b),
        params: *params,
    }
}

/// `ρ ↦ Σ K ρ K†`. A failure to validate the output means the Kraus set
/// itself is broken.
pub fn apply(set: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    validate(set.apply_raw(rho.matrix())).map_err(|e| Error::InternalChannelError(Box::new(e)))
}

/// Max-entry deviation between the composite channel and both orderings of
/// amplitude-then-phase damping at the same time `t`.
pub fn check_factorization(rates: &NoiseRates, t: f64, rho: &DensityMatrix) -> Result<f64> {
    check_factorization_with(rates, t, rho, kraus_composite)
}

/// [`check_factorization`] against a caller-supplied composite builder.
pub fn check_factorization_with<F>(rates: &NoiseRates, t: f64, rho: &DensityMatrix, composite: F) -> Result<f64>
where
    F: Fn(&ChannelParams) -> KrausSet,
{
    let params = params_at(rates, t)?;
    let m = rho.matrix();
    let am = kraus_amplitude(&params);
    let ph = kraus_phase(&params);
    let direct = composite(&params).apply_raw(m);
    let am_ph = am.apply_raw(&ph.apply_raw(m));
    let ph_am = ph.apply_raw(&am.apply_raw(m));
    Ok(direct.max_abs_diff(&am_ph).max(direct.max_abs_diff(&ph_am)))
}

/// `‖$_{τ+τ'} ρ − $_{τ'}($_τ ρ)‖_max`.
pub fn check_semigroup(kind: ChannelKind, rates: &NoiseRates, tau: f64, tau_p: f64, rho: &DensityMatrix) -> Result<f64> {
    check_semigroup_with(rates, tau, tau_p, rho, |p| KrausSet::for_kind(kind, p))
}

pub fn check_semigroup_with<F>(rates: &NoiseRates, tau: f64, tau_p: f64, rho: &DensityMatrix, build: F) -> Result<f64>
where
    F: Fn(&ChannelParams) -> KrausSet,
{
    let whole = build(&params_at(rates, tau + tau_p)?).apply_raw(rho.matrix());
    let first = build(&params_at(rates, tau)?).apply_raw(rho.matrix());
    let chained = build(&params_at(rates, tau_p)?).apply_raw(&first);
    Ok(whole.max_abs_diff(&chained))
}
