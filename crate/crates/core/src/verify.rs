//! Seeded Monte-Carlo battery over the channel identities, the independent
//! master-equation route, the closed forms, and the sudden-death theorems.
//!
//! Every suite takes an explicit sample count and seed, so the command-line
//! `verify` and the acceptance tests run the same code. Suites that involve
//! the composite channel take the Kraus builder as a parameter; feeding a
//! corrupted builder must make the battery fail.

use std::fmt::Write as _;

use crate::channels::{
    check_factorization_with, check_semigroup_with, kraus_amplitude, kraus_composite, kraus_phase, params_at, apply,
    ChannelKind, ChannelParams, KrausSet, NoiseRates,
};
use crate::classify::{diag_evolution_amp, predict_esd, Subspace, Verdict};
use crate::dynamics::{esd_time, evolve, horizon, integrate_lindblad, EsdTimeResult};
use crate::entanglement::{concurrence, lambda_dephased_limit, lambda_rho_i_closed_form};
use crate::error::Result;
use crate::qstate::{eig_hermitian, DensityMatrix, TOL_PSD, TOL_ZERO};
use crate::sampling::{Ensemble, Sampler, SamplerConfig, ENTANGLED_MIN_CONCURRENCE, PRNG_ID};

pub const TOL_CHANNEL_ALGEBRA: f64 = 1e-12;
pub const TOL_REDUCTION: f64 = 1e-14;
pub const TOL_LINDBLAD: f64 = 1e-6;
pub const TOL_CLOSED_FORM: f64 = 1e-9;
pub const TOL_DEPHASED_LIMIT: f64 = 1e-12;
pub const TOL_MONOTONE: f64 = 1e-9;
/// Every evolved population must stay above this in the proof-step suite.
pub const PROOF_STEP_FLOOR: f64 = 1e-10;
/// Samples drawn for the additivity-violation search.
pub const ADDITIVITY_BUDGET: usize = 500;
const MAX_COUNTEREXAMPLES: usize = 5;

/// Composite-channel Kraus builder under test.
pub type CompositeBuilder<'a> = &'a (dyn Fn(&ChannelParams) -> KrausSet + Sync);

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    /// Largest measured deviation (or disagreement count for the
    /// theorem suites).
    pub max_deviation: f64,
    pub tolerance: f64,
    pub failures: usize,
    pub counterexamples: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str, tolerance: f64) -> Self {
        SuiteReport {
            name,
            checks: 0,
            max_deviation: 0.0,
            tolerance,
            failures: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    /// Record a measured deviation; anything above tolerance (or NaN) fails.
    fn record(&mut self, deviation: f64, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if deviation > self.max_deviation || deviation.is_nan() {
            self.max_deviation = deviation;
        }
        if deviation.is_nan() || deviation > self.tolerance {
            self.fail(describe());
        }
    }

    /// Record a pass/fail check with no numeric deviation.
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.max_deviation += 1.0;
            self.fail(describe());
        }
    }

    fn record_result(&mut self, r: Result<f64>, describe: impl FnOnce() -> String) {
        match r {
            Ok(d) => self.record(d, describe),
            Err(e) => {
                self.checks += 1;
                self.max_deviation = f64::INFINITY;
                let mut msg = describe();
                let _ = write!(msg, " (error: {e})");
                self.fail(msg);
            }
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
            self.counterexamples.push(msg);
        }
    }
}

/// A state that keeps its entanglement asymptotically under each noise
/// alone but loses it in finite time when both act.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditivityWitness {
    pub sample_index: usize,
    pub state: DensityMatrix,
    pub rates: NoiseRates,
    pub phase: EsdTimeResult,
    pub amplitude: EsdTimeResult,
    pub composite: EsdTimeResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_samples: usize,
    pub prng: &'static str,
    pub suites: Vec<SuiteReport>,
    pub additivity: Option<AdditivityWitness>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

/// Independent sub-stream for suite `k`.
fn sub_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct Draw {
    states: Sampler,
    params: Sampler,
}

impl Draw {
    fn new(seed: u64, suite: u64, ensemble: Ensemble, subspace: Option<Subspace>) -> Self {
        let s = sub_seed(seed, suite);
        let mut config = SamplerConfig::new(s, ensemble);
        config.subspace = subspace;
        Draw {
            states: Sampler::new(config),
            params: Sampler::new(SamplerConfig::new(s.rotate_left(17) ^ 0x5555, Ensemble::GinibreMixed)),
        }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.params.uniform()
    }

    fn rates(&mut self, lo: f64, hi: f64) -> NoiseRates {
        NoiseRates {
            gamma1_a: self.uniform(lo, hi),
            gamma1_b: self.uniform(lo, hi),
            gamma2_a: self.uniform(lo, hi),
            gamma2_b: self.uniform(lo, hi),
        }
    }
}

fn describe(rho: &DensityMatrix) -> String {
    let d = rho.diagonal();
    format!("diag=[{:.4e}, {:.4e}, {:.4e}, {:.4e}]", d[0], d[1], d[2], d[3])
}

fn builder_for<'a>(kind: ChannelKind, composite: CompositeBuilder<'a>) -> impl Fn(&ChannelParams) -> KrausSet + 'a {
    move |p: &ChannelParams| match kind {
        ChannelKind::AmplitudeDamping => kraus_amplitude(p),
        ChannelKind::PhaseDamping => kraus_phase(p),
        ChannelKind::Composite => composite(p),
    }
}

/// Completeness of every Kraus set, plus trace and positivity preservation
/// on random states.
pub fn suite_completeness(seed: u64, n: usize, composite: CompositeBuilder) -> SuiteReport {
    let mut report = SuiteReport::new("completeness", TOL_CHANNEL_ALGEBRA);
    let mut draw = Draw::new(seed, 1, Ensemble::GinibreMixed, None);
    for i in 0..n {
        let rates = draw.rates(0.0, 2.0);
        let t = draw.uniform(0.0, 5.0);
        let rho = draw.states.next_state();
        let params = params_at(&rates, t).expect("valid draw");
        for kind in ChannelKind::ALL {
            let set = builder_for(kind, composite)(&params);
            let dev = set.completeness_deviation();
            report.record(dev, || format!("#{i} {kind} t={t}: completeness {dev:e}"));
            let out = set.apply_raw(rho.matrix());
            let trace_dev = (out.trace() - 1.0).norm();
            report.record(trace_dev, || format!("#{i} {kind}: trace off by {trace_dev:e}"));
            let min_eig = eig_hermitian(&out, false).map(|s| s.min()).unwrap_or(f64::NEG_INFINITY);
            report.check(min_eig >= -TOL_PSD, || format!("#{i} {kind}: min eigenvalue {min_eig:e}"));
        }
    }
    report
}

/// Composite channel against amplitude∘phase and phase∘amplitude.
pub fn suite_factorization(seed: u64, n: usize, composite: CompositeBuilder) -> SuiteReport {
    let mut report = SuiteReport::new("factorization", TOL_CHANNEL_ALGEBRA);
    let mut draw = Draw::new(seed, 2, Ensemble::GinibreMixed, None);
    for i in 0..n {
        let rates = draw.rates(0.0, 2.0);
        let t = draw.uniform(0.0, 5.0);
        let rho = draw.states.next_state();
        let r = check_factorization_with(&rates, t, &rho, composite);
        report.record_result(r, || format!("#{i} t={t} {rates:?}"));
    }
    report
}

/// `$_{τ+τ'} = $_{τ'} $_τ` for each channel kind.
pub fn suite_semigroup(seed: u64, n: usize, composite: CompositeBuilder) -> SuiteReport {
    let mut report = SuiteReport::new("semigroup", TOL_CHANNEL_ALGEBRA);
    let mut draw = Draw::new(seed, 3, Ensemble::GinibreMixed, None);
    for i in 0..n {
        let rho = draw.states.next_state();
        for kind in ChannelKind::ALL {
            let rates = draw.rates(0.0, 2.0);
            let tau = draw.uniform(0.0, 3.0);
            let tau_p = draw.uniform(0.0, 3.0);
            let r = check_semigroup_with(&rates, tau, tau_p, &rho, builder_for(kind, composite));
            report.record_result(r, || format!("#{i} {kind} tau={tau} tau'={tau_p}"));
        }
    }
    report
}

/// Composite channel with one noise switched off equals the other channel.
pub fn suite_reduction(seed: u64, n: usize, composite: CompositeBuilder) -> SuiteReport {
    let mut report = SuiteReport::new("reduction", TOL_REDUCTION);
    let mut draw = Draw::new(seed, 4, Ensemble::GinibreMixed, None);
    for i in 0..n {
        let rho = draw.states.next_state();
        let rates = draw.rates(0.0, 2.0);
        let t = draw.uniform(0.0, 5.0);
        for kind in [ChannelKind::AmplitudeDamping, ChannelKind::PhaseDamping] {
            let params = params_at(&rates.restricted_to(kind), t).expect("valid draw");
            let single = KrausSet::for_kind(kind, &params).apply_raw(rho.matrix());
            let comp = composite(&params).apply_raw(rho.matrix());
            let dev = single.max_abs_diff(&comp);
            report.record(dev, || format!("#{i} composite vs {kind}: {dev:e}"));
        }
    }
    report
}

/// Kraus evolution against RK4 integration of the master equation, with
/// the rates of the other noise zeroed for the single-noise kinds.
pub fn suite_kraus_vs_lindblad(seed: u64, n: usize, composite: CompositeBuilder) -> SuiteReport {
    let mut report = SuiteReport::new("kraus-vs-lindblad", TOL_LINDBLAD);
    let mut draw = Draw::new(seed, 5, Ensemble::GinibreMixed, None);
    for i in 0..n {
        for kind in ChannelKind::ALL {
            let rho = draw.states.next_state();
            let rates = draw.rates(0.0, 2.0).restricted_to(kind);
            let t = draw.uniform(0.0, 5.0);
            let r = params_at(&rates, t).and_then(|p| {
                let kraus = builder_for(kind, composite)(&p).apply_raw(rho.matrix());
                let ode = integrate_lindblad(&rho, &rates, t)?;
                Ok(kraus.max_abs_diff(ode.matrix()))
            });
            report.record_result(r, || format!("#{i} {kind} t={t} {}", describe(&rho)));
        }
    }
    report
}

/// Closed-form `Λ(t)` for states with `ρ₁₁ = 0` against numerical Wootters.
pub fn suite_closed_form(seed: u64, n: usize, composite: CompositeBuilder) -> SuiteReport {
    let mut report = SuiteReport::new("closed-form-lambda", TOL_CLOSED_FORM);
    let mut draw = Draw::new(seed, 6, Ensemble::GinibreMixed, Some(Subspace::I));
    for i in 0..n {
        let rho = draw.states.next_state();
        for kind in ChannelKind::ALL {
            let rates = draw.rates(0.0, 2.0);
            let t = draw.uniform(0.0, 5.0);
            let r = params_at(&rates, t).and_then(|p| {
                let set = builder_for(kind, composite)(&p);
                let evolved = apply(&set, &rho)?;
                let numeric = concurrence(&evolved)?.lambda_cap;
                let closed = lambda_rho_i_closed_form(&rho, &rates, t, kind)?;
                if closed < 0.0 {
                    return Ok(f64::INFINITY);
                }
                Ok((numeric - closed).abs())
            });
            report.record_result(r, || format!("#{i} {kind} t={t} {}", describe(&rho)));
        }
    }
    report
}

/// Dephased-limit `Λ` against Wootters on the dephased state, and its
/// strict negativity when every population is bounded away from zero.
pub fn suite_dephased_limit(seed: u64, n: usize) -> SuiteReport {
    let mut report = SuiteReport::new("dephased-limit", TOL_DEPHASED_LIMIT);
    let mut draw = Draw::new(seed, 7, Ensemble::GinibreMixed, None);
    let mut pure = Sampler::new(SamplerConfig::new(sub_seed(seed, 70), Ensemble::HaarPure));
    for i in 0..n {
        let rho = if i % 2 == 0 { draw.states.next_state() } else { pure.next_state() };
        let limit = lambda_dephased_limit(&rho);
        let r = concurrence(&rho.dephased()).map(|c| (c.lambda_cap - limit).abs());
        report.record_result(r, || format!("#{i} {}", describe(&rho)));
        if rho.diagonal().iter().all(|&d| d > TOL_ZERO) {
            report.check(limit < 0.0, || format!("#{i} Λ(∞) = {limit:e} not negative, {}", describe(&rho)));
        }
    }
    report
}

fn theorem_agreement(
    report: &mut SuiteReport,
    i: usize,
    rho: &DensityMatrix,
    kind: ChannelKind,
    rates: &NoiseRates,
    expect: Option<Verdict>,
) {
    let predicted = match predict_esd(rho, kind, rates) {
        Ok(v) => v.verdict,
        Err(e) => {
            report.check(false, || format!("#{i} {kind}: no prediction ({e}) {}", describe(rho)));
            return;
        }
    };
    if let Some(want) = expect {
        if predicted != want {
            report.check(false, || {
                format!("#{i} {kind}: predicted {} but sample class implies {}", predicted.as_str(), want.as_str())
            });
            return;
        }
    }
    match esd_time(rho, kind, rates) {
        Ok(found) => {
            let numeric_abrupt = found.is_finite_crossing();
            let agree = match predicted {
                Verdict::AbruptEsd => numeric_abrupt,
                Verdict::EsdFree => !numeric_abrupt,
                Verdict::NotEntangled => !numeric_abrupt,
            };
            report.check(agree, || {
                format!(
                    "#{i} {kind}: predicted {} but search gave {:?} (Λ(T)={:e}) {} {rates:?}",
                    predicted.as_str(),
                    found.outcome,
                    found.lambda_at_horizon,
                    describe(rho)
                )
            });
        }
        Err(e) => report.check(false, || format!("#{i} {kind}: search failed ({e})")),
    }
}

/// Phase damping: analytic "some population vanishes" against the
/// numerical crossing search. Half the states are unconfined, the other
/// half spread over the four subspaces.
pub fn suite_phase_theorem(seed: u64, n: usize) -> SuiteReport {
    let mut report = SuiteReport::new("phase-theorem", 0.0);
    let mut rates_draw = Draw::new(seed, 8, Ensemble::GinibreMixed, None);
    let mut free = Sampler::new(SamplerConfig::new(sub_seed(seed, 80), Ensemble::GinibreMixed));
    let mut confined: Vec<Sampler> = Subspace::ALL
        .iter()
        .map(|&s| Sampler::new(SamplerConfig::new(sub_seed(seed, 81 + s as u64), Ensemble::GinibreMixed).confined(s)))
        .collect();
    for i in 0..n {
        let (rho, expect) = if i % 2 == 0 {
            (free.next_entangled(ENTANGLED_MIN_CONCURRENCE), Verdict::AbruptEsd)
        } else {
            let s = &mut confined[(i / 2) % 4];
            (s.next_entangled(ENTANGLED_MIN_CONCURRENCE), Verdict::EsdFree)
        };
        let mut rates = rates_draw.rates(0.1, 2.0);
        rates.gamma1_a = 0.0;
        rates.gamma1_b = 0.0;
        theorem_agreement(&mut report, i, &rho, ChannelKind::PhaseDamping, &rates, Some(expect));
    }
    report
}

/// Composite noise: everything outside subspace I dies abruptly, subspace
/// I never does. Alternates unconfined states and states with `ρ₁₁ = 0`.
pub fn suite_composite_theorem(seed: u64, n: usize) -> SuiteReport {
    let mut report = SuiteReport::new("composite-theorem", 0.0);
    let mut rates_draw = Draw::new(seed, 9, Ensemble::GinibreMixed, None);
    let mut free = Sampler::new(SamplerConfig::new(sub_seed(seed, 90), Ensemble::GinibreMixed));
    let mut rho_i = Sampler::new(SamplerConfig::new(sub_seed(seed, 91), Ensemble::GinibreMixed).confined(Subspace::I));
    for i in 0..n {
        let (rho, expect) = if i % 2 == 0 {
            (free.next_entangled(ENTANGLED_MIN_CONCURRENCE), Verdict::AbruptEsd)
        } else {
            (rho_i.next_entangled(ENTANGLED_MIN_CONCURRENCE), Verdict::EsdFree)
        };
        let rates = rates_draw.rates(0.1, 2.0);
        theorem_agreement(&mut report, i, &rho, ChannelKind::Composite, &rates, Some(expect));
    }
    report
}

/// Under relaxation on both parties no population of a state with
/// `ρ₁₁ > 0` ever vanishes, and the closed-form populations match the
/// composite channel.
///
/// `τ` runs geometrically over `(0, horizon]`. The populations decay like
/// `ρ₁₁ e^{−(Γ₁^A+Γ₁^B)τ}`, which is positive at every finite `τ` but drops
/// below the absolute zero cutoff long before the horizon, so the cutoff is
/// enforced where the exact `ρ₁₁(τ)` still exceeds ten times that cutoff.
pub fn suite_proof_step(seed: u64, n: usize) -> SuiteReport {
    let mut report = SuiteReport::new("proof-step", TOL_CHANNEL_ALGEBRA);
    let mut draw = Draw::new(seed, 10, Ensemble::GinibreMixed, None);
    const POINTS: usize = 24;
    for i in 0..n {
        let rho = draw.states.next_state();
        let rates = draw.rates(0.1, 2.0);
        let end = horizon(ChannelKind::Composite, &rates).expect("positive rates");
        let rho11 = rho.diagonal()[0];
        for k in 0..POINTS {
            let tau = end * (1e-6f64).powf(1.0 - k as f64 / (POINTS - 1) as f64);
            let r = KrausSet::at_time(ChannelKind::Composite, &rates, tau).and_then(|set| {
                let full = apply(&set, &rho)?.diagonal();
                let closed = diag_evolution_amp(&rho, &rates, tau)?;
                Ok((full, closed))
            });
            match r {
                Ok((full, closed)) => {
                    let dev = (0..4).map(|k| (full[k] - closed[k]).abs()).fold(0.0, f64::max);
                    report.record(dev, || format!("#{i} tau={tau}: closed form off by {dev:e}"));
                    let exact_rho11 = rho11 * (-(rates.gamma1_a + rates.gamma1_b) * tau).exp();
                    if exact_rho11 > 10.0 * PROOF_STEP_FLOOR {
                        let positive = full.iter().chain(closed.iter()).all(|&d| d > PROOF_STEP_FLOOR);
                        report.check(positive, || format!("#{i} tau={tau}: population vanished {full:?}"));
                    }
                }
                Err(e) => report.check(false, || format!("#{i} tau={tau}: {e}")),
            }
        }
    }
    report
}

/// Concurrence never increases along a trajectory.
pub fn suite_monotonicity(seed: u64, n: usize) -> SuiteReport {
    let mut report = SuiteReport::new("monotonicity", TOL_MONOTONE);
    let mut draw = Draw::new(seed, 11, Ensemble::GinibreMixed, None);
    let times: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
    for i in 0..n {
        let rho = draw.states.next_entangled(ENTANGLED_MIN_CONCURRENCE);
        for kind in ChannelKind::ALL {
            let rates = draw.rates(0.0, 2.0);
            match evolve(&rho, kind, &rates, &times) {
                Ok(tr) => {
                    let rise = tr
                        .lambdas
                        .windows(2)
                        .map(|w| w[1].concurrence - w[0].concurrence)
                        .fold(0.0, f64::max);
                    report.record(rise, || format!("#{i} {kind}: concurrence rose by {rise:e}"));
                }
                Err(e) => report.check(false, || format!("#{i} {kind}: {e}")),
            }
        }
    }
    report
}

/// Look among entangled states with `ρ₄₄ = 0` for one that survives each
/// noise alone (at unit rates) but dies in finite time under both.
pub fn find_additivity_violation(seed: u64, budget: usize) -> Option<AdditivityWitness> {
    let rates = NoiseRates::symmetric(1.0, 1.0).expect("unit rates");
    let mut sampler = Sampler::new(SamplerConfig::new(sub_seed(seed, 12), Ensemble::GinibreMixed).confined(Subspace::IV));
    for sample_index in 0..budget {
        let state = sampler.next_entangled(ENTANGLED_MIN_CONCURRENCE);
        let run = |kind| esd_time(&state, kind, &rates).ok();
        let Some(phase) = run(ChannelKind::PhaseDamping) else { continue };
        if phase.is_finite_crossing() {
            continue;
        }
        let Some(amplitude) = run(ChannelKind::AmplitudeDamping) else { continue };
        if amplitude.is_finite_crossing() {
            continue;
        }
        let Some(composite) = run(ChannelKind::Composite) else { continue };
        if composite.is_finite_crossing() {
            return Some(AdditivityWitness {
                sample_index,
                state,
                rates,
                phase,
                amplitude,
                composite,
            });
        }
    }
    None
}

pub fn suite_additivity(seed: u64, budget: usize) -> (SuiteReport, Option<AdditivityWitness>) {
    let mut report = SuiteReport::new("additivity-violation", 0.0);
    let witness = find_additivity_violation(seed, budget);
    report.check(witness.is_some(), || format!("no witness among {budget} samples"));
    (report, witness)
}

/// Run the full battery with the library's composite channel.
pub fn run(seed: u64, n_samples: usize) -> VerifyReport {
    run_with(seed, n_samples, &kraus_composite)
}

/// Run the full battery against a given composite builder.
pub fn run_with(seed: u64, n_samples: usize, composite: CompositeBuilder) -> VerifyReport {
    let n = n_samples.max(1);
    let (additivity_report, additivity) = suite_additivity(seed, ADDITIVITY_BUDGET.max(n));
    let suites = vec![
        suite_completeness(seed, n, composite),
        suite_factorization(seed, n, composite),
        suite_semigroup(seed, n, composite),
        suite_reduction(seed, n, composite),
        suite_kraus_vs_lindblad(seed, n, composite),
        suite_closed_form(seed, n, composite),
        suite_dephased_limit(seed, n),
        suite_phase_theorem(seed, n),
        suite_composite_theorem(seed, n),
        suite_proof_step(seed, n),
        suite_monotonicity(seed, n),
        additivity_report,
    ];
    VerifyReport {
        seed,
        n_samples: n,
        prng: PRNG_ID,
        suites,
        additivity,
    }
}
