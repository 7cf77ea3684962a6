//! Time evolution: Kraus trajectories, the disentanglement-time search, and
//! a Runge–Kutta integrator of the master equation used as an independent
//! check on the Kraus maps.

use crate::channels::{apply, ChannelKind, KrausSet, NoiseRates};
use crate::entanglement::{concurrence, ConcurrenceResult};
use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, Mat4};
use crate::qstate::{validate, DensityMatrix};

/// `|Λ|` below this is indistinguishable from zero; also the separability
/// gate at `t = 0`.
pub const TOL_ROOT: f64 = 1e-12;
/// The horizon is this many slowest decay times.
pub const HORIZON_DECAY_TIMES: f64 = 50.0;
/// `Λ(horizon)` above this means the search may have stopped too early.
pub const HORIZON_WARN_LAMBDA: f64 = 1e-8;

const GEOMETRIC_POINTS: usize = 64;
const GEOMETRIC_SPAN: f64 = 1e-6;
const UNIFORM_POINTS: usize = 256;
const REFINE_BELOW: f64 = 1e-8;
const BISECT_REL_WIDTH: f64 = 1e-9;
const MAX_RK4_STEPS: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub kind: ChannelKind,
    pub rates: NoiseRates,
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub lambdas: Vec<ConcurrenceResult>,
}

fn check_grid(times: &[f64]) -> Result<()> {
    let starts_at_zero = times.first() == Some(&0.0);
    let increasing = times.windows(2).all(|w| w[1] > w[0]);
    let finite = times.iter().all(|t| t.is_finite());
    if starts_at_zero && increasing && finite {
        Ok(())
    } else {
        Err(Error::BadTimeGrid)
    }
}

/// State at absolute time `t`, obtained in one Kraus step from `rho0`.
pub fn state_at(rho0: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates, t: f64) -> Result<DensityMatrix> {
    apply(&KrausSet::at_time(kind, rates, t)?, rho0)
}

pub fn lambda_at(rho0: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates, t: f64) -> Result<f64> {
    Ok(concurrence(&state_at(rho0, kind, rates, t)?)?.lambda_cap)
}

/// Evolve `rho0` over a grid starting at 0. Each state comes straight from
/// `rho0` through the channel at that absolute time.
pub fn evolve(rho0: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates, times: &[f64]) -> Result<Trajectory> {
    check_grid(times)?;
    let states = times
        .iter()
        .map(|&t| state_at(rho0, kind, rates, t))
        .collect::<Result<Vec<_>>>()?;
    let lambdas = states.iter().map(concurrence).collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        kind,
        rates: *rates,
        times: times.to_vec(),
        states,
        lambdas,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EsdOutcome {
    FiniteCrossing { t_star: f64 },
    NoCrossingWithinHorizon { horizon: f64 },
    InitiallySeparable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EsdTimeResult {
    pub outcome: EsdOutcome,
    pub lambda_at_horizon: f64,
    pub horizon: f64,
}

impl EsdTimeResult {
    pub fn t_star(&self) -> Option<f64> {
        match self.outcome {
            EsdOutcome::FiniteCrossing { t_star } => Some(t_star),
            _ => None,
        }
    }

    pub fn is_finite_crossing(&self) -> bool {
        self.t_star().is_some()
    }
}

/// `50 / (smallest positive rate acting under kind)`.
pub fn horizon(kind: ChannelKind, rates: &NoiseRates) -> Result<f64> {
    rates.check()?;
    rates
        .relevant(kind)
        .into_iter()
        .filter(|&r| r > 0.0)
        .min_by(f64::total_cmp)
        .map(|r| HORIZON_DECAY_TIMES / r)
        .ok_or(Error::AllRatesZero(kind))
}

/// Search for the time at which `Λ` first crosses zero.
///
/// `Λ` is sampled at `t = 0` and on a geometric grid over
/// `[1e-6·T, T]`; if no sign change shows up but `Λ` has dropped below
/// `1e-8`, a uniform grid of 256 points is added. A grid point only counts
/// as past the crossing when `Λ < −TOL_ROOT`, so round-off around an
/// asymptotically vanishing `Λ` is not mistaken for sudden death. The
/// bracketing interval is bisected on the sign of `Λ` until it is narrower
/// than `1e-9·T` and one endpoint has `|Λ| ≤ TOL_ROOT`.
pub fn esd_time(rho0: &DensityMatrix, kind: ChannelKind, rates: &NoiseRates) -> Result<EsdTimeResult> {
    let horizon = horizon(kind, rates)?;
    let lambda = |t: f64| lambda_at(rho0, kind, rates, t);

    let lambda0 = lambda(0.0)?;
    let mut samples = vec![(0.0, lambda0)];
    for k in 0..GEOMETRIC_POINTS {
        let t = if k + 1 == GEOMETRIC_POINTS {
            horizon
        } else {
            horizon * GEOMETRIC_SPAN.powf(1.0 - k as f64 / (GEOMETRIC_POINTS - 1) as f64)
        };
        samples.push((t, lambda(t)?));
    }
    let lambda_at_horizon = samples.last().expect("non-empty").1;
    let result = |outcome| {
        Ok(EsdTimeResult {
            outcome,
            lambda_at_horizon,
            horizon,
        })
    };
    if lambda0 <= TOL_ROOT {
        return result(EsdOutcome::InitiallySeparable);
    }

    let mut bracket = find_bracket(&samples);
    if bracket.is_none() && samples.iter().any(|&(_, l)| l < REFINE_BELOW) {
        for k in 1..=UNIFORM_POINTS {
            let t = horizon * k as f64 / UNIFORM_POINTS as f64;
            samples.push((t, lambda(t)?));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        bracket = find_bracket(&samples);
    }
    let Some(((mut lo, mut lam_lo), (mut hi, mut lam_hi))) = bracket else {
        return result(EsdOutcome::NoCrossingWithinHorizon { horizon });
    };

    for _ in 0..400 {
        let narrow = hi - lo <= BISECT_REL_WIDTH * horizon;
        if narrow && (lam_lo.abs() <= TOL_ROOT || lam_hi.abs() <= TOL_ROOT) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let l = lambda(mid)?;
        if l > 0.0 {
            (lo, lam_lo) = (mid, l);
        } else {
            (hi, lam_hi) = (mid, l);
        }
    }
    let t_star = if lam_lo.abs() <= lam_hi.abs() { lo } else { hi };
    result(EsdOutcome::FiniteCrossing { t_star })
}

/// First clearly negative sample and the last positive sample before it.
fn find_bracket(samples: &[(f64, f64)]) -> Option<((f64, f64), (f64, f64))> {
    let neg = samples.iter().position(|&(_, l)| l < -TOL_ROOT)?;
    let pos = samples[..neg].iter().rposition(|&(_, l)| l > 0.0)?;
    Some((samples[pos], samples[neg]))
}

struct Generator {
    lower: [Mat4; 2],
    z: [Mat4; 2],
    number: [Mat4; 2],
}

impl Generator {
    fn new() -> Self {
        let id = Mat2::identity();
        let sigma_minus = Mat2::real([[0.0, 0.0], [1.0, 0.0]]);
        let sigma_z = Mat2::real([[1.0, 0.0], [0.0, -1.0]]);
        let lower = [sigma_minus.kron(&id), id.kron(&sigma_minus)];
        let z = [sigma_z.kron(&id), id.kron(&sigma_z)];
        // σ₊σ₋ projects onto |↑⟩ of that party
        let number = lower.map(|l| l.adjoint() * l);
        Generator { lower, z, number }
    }

    fn rhs(&self, rho: &Mat4, rates: &NoiseRates) -> Mat4 {
        let relax = [rates.gamma1_a, rates.gamma1_b];
        let dephase = [rates.gamma2_a, rates.gamma2_b];
        let mut out = Mat4::zeros();
        for p in 0..2 {
            if relax[p] != 0.0 {
                let l = &self.lower[p];
                let n = &self.number[p];
                let jump = l.sandwich(rho).scale(c(2.0, 0.0));
                let term = jump - *n * *rho - *rho * *n;
                out = out + term.scale(c(0.5 * relax[p], 0.0));
            }
            if dephase[p] != 0.0 {
                let term = self.z[p].sandwich(rho) - *rho;
                out = out + term.scale(c(0.5 * dephase[p], 0.0));
            }
        }
        out
    }
}

/// `dρ/dt` of the master equation with relaxation `Γ₁` and dephasing `Γ₂`
/// on each party:
/// `Σ Γ₁/2 (2σ₋ρσ₊ − σ₊σ₋ρ − ρσ₊σ₋) + Σ Γ₂/2 (σ_zρσ_z − ρ)`.
pub fn lindblad_rhs(rho: &DensityMatrix, rates: &NoiseRates) -> Mat4 {
    Generator::new().rhs(rho.matrix(), rates)
}

/// Fixed-step RK4 solution of the master equation at time `t`, with step
/// `h ≤ min(1e-3 / max(Γ, 1), t / 100)` chosen so that an integer number of
/// steps lands exactly on `t`.
pub fn integrate_lindblad(rho0: &DensityMatrix, rates: &NoiseRates, t: f64) -> Result<DensityMatrix> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    rates.check()?;
    if t == 0.0 {
        return Ok(*rho0);
    }
    let max_rate = [rates.gamma1_a, rates.gamma1_b, rates.gamma2_a, rates.gamma2_b]
        .into_iter()
        .fold(1.0, f64::max);
    let h_max = (1e-3 / max_rate).min(t / 100.0);
    let steps = (t / h_max).ceil();
    if steps > MAX_RK4_STEPS {
        return Err(Error::StepUnderflow { steps });
    }
    let h = t / steps;
    let gen = Generator::new();
    let half = c(0.5 * h, 0.0);
    let sixth = c(h / 6.0, 0.0);
    let two = c(2.0, 0.0);
    let mut rho = *rho0.matrix();
    for _ in 0..steps as u64 {
        let k1 = gen.rhs(&rho, rates);
        let k2 = gen.rhs(&(rho + k1.scale(half)), rates);
        let k3 = gen.rhs(&(rho + k2.scale(half)), rates);
        let k4 = gen.rhs(&(rho + k3.scale(c(h, 0.0))), rates);
        rho = rho + (k1 + k2.scale(two) + k3.scale(two) + k4).scale(sixth);
    }
    validate(rho).map_err(|e| Error::InternalChannelError(Box::new(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{check_semigroup, ChannelKind::*};
    use crate::qstate::preset;

    #[test]
    fn single_point_trajectory_is_input() {
        let rho = preset("werner:p=0.9").unwrap();
        let r = NoiseRates::symmetric(1.0, 1.0).unwrap();
        let tr = evolve(&rho, Composite, &r, &[0.0]).unwrap();
        assert_eq!(tr.states, vec![rho]);
        assert_eq!(tr.lambdas[0], concurrence(&rho).unwrap());
    }

    #[test]
    fn bad_grids_rejected() {
        let rho = preset("mixed").unwrap();
        let r = NoiseRates::symmetric(1.0, 1.0).unwrap();
        for grid in [&[][..], &[0.1, 0.2][..], &[0.0, 0.5, 0.5][..], &[0.0, f64::NAN][..]] {
            assert!(matches!(evolve(&rho, Composite, &r, grid), Err(Error::BadTimeGrid)));
        }
    }

    #[test]
    fn psi_plus_under_dephasing() {
        let psi = preset("bell-psi+").unwrap();
        let r = NoiseRates::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let tr = evolve(&psi, PhaseDamping, &r, &[0.0, 2f64.ln()]).unwrap();
        assert!((tr.lambdas[1].lambda_cap - 0.25).abs() < 1e-14);
    }

    #[test]
    fn phi_plus_composite_dies_once() {
        let phi = preset("bell-phi+").unwrap();
        let r = NoiseRates::symmetric(1.0, 1.0).unwrap();
        let times: Vec<f64> = (0..200).map(|k| k as f64 * 0.01).collect();
        let tr = evolve(&phi, Composite, &r, &times).unwrap();
        let lam: Vec<f64> = tr.lambdas.iter().map(|x| x.lambda_cap).collect();
        let crossing = lam.iter().position(|&l| l <= 0.0).expect("crosses");
        assert!(lam[..crossing].windows(2).all(|w| w[1] < w[0]));
        assert!(lam[crossing..].iter().all(|&l| l <= 0.0));
    }

    #[test]
    fn trajectory_matches_chained_evolution() {
        let rho = preset("bell-phi-").unwrap();
        let r = NoiseRates::new(0.3, 0.9, 1.2, 0.1).unwrap();
        for kind in ChannelKind::ALL {
            let direct = evolve(&rho, kind, &r, &[0.0, 1.7]).unwrap();
            let mid = state_at(&rho, kind, &r, 0.6).unwrap();
            let chained = state_at(&mid, kind, &r, 1.1).unwrap();
            assert!(direct.states[1].matrix().max_abs_diff(chained.matrix()) <= 1e-12);
            assert!(check_semigroup(kind, &r, 0.6, 1.1, &rho).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn esd_time_examples() {
        let r = NoiseRates::symmetric(1.0, 1.0).unwrap();
        let res = esd_time(&preset("mixed").unwrap(), Composite, &r).unwrap();
        assert_eq!(res.outcome, EsdOutcome::InitiallySeparable);

        let res = esd_time(&preset("bell-psi+").unwrap(), Composite, &r).unwrap();
        assert_eq!(res.outcome, EsdOutcome::NoCrossingWithinHorizon { horizon: 50.0 });
        // Λ = γ₁^Aγ₁^Bγ₂^Aγ₂^B = exp(−3t) at unit rates; at t = 50 that is far
        // below what the populations (~e^{-50}) let the numerics resolve
        let want = (-3.0f64 * 50.0).exp();
        assert!(want > 0.0);
        assert!((res.lambda_at_horizon - want).abs() <= TOL_ROOT);

        let phi = preset("bell-phi+").unwrap();
        let res = esd_time(&phi, Composite, &r).unwrap();
        let t = res.t_star().expect("finite crossing");
        assert!(t > 0.0);
        assert!(lambda_at(&phi, Composite, &r, t).unwrap().abs() <= TOL_ROOT);
        let delta = 1e-6 * res.horizon;
        assert!(lambda_at(&phi, Composite, &r, t - delta).unwrap() > 0.0);
        assert!(lambda_at(&phi, Composite, &r, t + delta).unwrap() < 0.0);

        let zero = NoiseRates::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(esd_time(&phi, AmplitudeDamping, &zero), Err(Error::AllRatesZero(_))));
    }

    #[test]
    fn phi_plus_crossing_matches_x_state_formula() {
        // For (|↑↑⟩+|↓↓⟩)/√2 the state stays X-shaped and
        // Λ = 2(|ρ₁₄| − √(ρ₂₂ρ₃₃)) = γ₁²γ₂² − ω₁²γ₁² at equal rates, so
        // with unit rates e^{-t}e^{-2t} = e^{-t}(1 − e^{-t}), i.e.
        // e^{-2t} + e^{-t} − 1 = 0 → e^{-t} = (√5 − 1)/2.
        let r = NoiseRates::symmetric(1.0, 1.0).unwrap();
        let res = esd_time(&preset("bell-phi+").unwrap(), Composite, &r).unwrap();
        let want = -((5f64.sqrt() - 1.0) / 2.0).ln();
        assert!((res.t_star().unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn rhs_examples() {
        let r = NoiseRates::new(0.7, 1.3, 0.4, 2.2).unwrap();
        assert_eq!(lindblad_rhs(&preset("down-down").unwrap(), &r), Mat4::zeros());

        let ra = NoiseRates::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let d = lindblad_rhs(&preset("up-up").unwrap(), &ra);
        assert_eq!(d.real_diagonal(), [-1.0, 0.0, 1.0, 0.0]);

        for name in ["bell-phi+", "werner:p=0.3", "bell-psi-"] {
            let d = lindblad_rhs(&preset(name).unwrap(), &r);
            assert!(d.trace().norm() < 1e-15);
            assert!(d.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn rk4_matches_kraus() {
        let phi = preset("bell-phi+").unwrap();
        assert_eq!(integrate_lindblad(&phi, &NoiseRates::symmetric(1.0, 1.0).unwrap(), 0.0).unwrap(), phi);

        let r = NoiseRates::symmetric(1.0, 1.0).unwrap();
        let ode = integrate_lindblad(&phi, &r, 1.0).unwrap();
        let kraus = state_at(&phi, Composite, &r, 1.0).unwrap();
        assert!(ode.matrix().max_abs_diff(kraus.matrix()) <= 1e-6);

        let r = NoiseRates::new(0.0, 0.0, 0.8, 1.5).unwrap();
        let w = preset("werner:p=0.6").unwrap();
        let ode = integrate_lindblad(&w, &r, 2.0).unwrap();
        let kraus = state_at(&w, PhaseDamping, &r, 2.0).unwrap();
        assert!(ode.matrix().max_abs_diff(kraus.matrix()) <= 1e-6);
    }

    #[test]
    fn rk4_step_budget() {
        let r = NoiseRates::new(1e7, 0.0, 0.0, 0.0).unwrap();
        let rho = preset("up-up").unwrap();
        assert!(matches!(integrate_lindblad(&rho, &r, 1e5), Err(Error::StepUnderflow { .. })));
        assert!(matches!(integrate_lindblad(&rho, &r, -1.0), Err(Error::NegativeTime(_))));
    }
}
