//! Finite-horizon estimators for the ergodic, weak-mixing and strong-mixing
//! correlation criteria.
//!
//! For observables `a`, `b` on `m` sites the summand is
//! `corr(i) = tr(ρ_{m+i} (a ⊗ I^{⊗(i−m)} ⊗ b))` for `i = m..=n_max`, compared
//! against the product `tr(ρ_m a) tr(ρ_m b)`. Limits cannot be computed, so a
//! verdict asks for closeness at `n_max` and no growth over a trailing window.
//! These tests certify the correlation criteria only; extremality of the
//! state among stationary states is never checked directly.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::operator::{derive_seed, embed_observable, random_observable, Operator};
use crate::source::{Backend, QuantumSource};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Criterion {
    ErgodicMean,
    WeakMixing,
    StrongMixing,
}

/// Ordered from best to worst so that `max` aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Thresholds that turn a finite sequence into a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictPolicy {
    pub epsilon: f64,
    /// Trailing window as a fraction of `n_max`.
    pub window_fraction: f64,
    /// Allowed growth of the trailing envelope, absorbs rounding.
    pub slack: f64,
    /// Deviations at or below this are excluded from the decay fit.
    pub fit_floor: f64,
}

impl VerdictPolicy {
    pub const fn transfer() -> Self {
        Self {
            epsilon: 1e-2,
            window_fraction: 0.1,
            slack: 1e-12,
            fit_floor: 1e-13,
        }
    }

    pub const fn dense() -> Self {
        Self {
            epsilon: 5e-2,
            ..Self::transfer()
        }
    }

    pub const fn for_backend(backend: Backend) -> Self {
        match backend {
            Backend::Dense => Self::dense(),
            Backend::Transfer => Self::transfer(),
        }
    }

    fn window(&self, n_max: usize, len: usize) -> usize {
        ((n_max as f64 * self.window_fraction) as usize).clamp(1, len.max(1))
    }
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        Self::transfer()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub criterion: Criterion,
    pub m: usize,
    pub n_max: usize,
    /// Running statistic per `n` (Cesàro criteria) or per `i` (strong mixing).
    pub sequence: Vec<f64>,
    pub target: f64,
    /// Distance that the verdict is judged on: `|mean − target|` for the
    /// ergodic mean, the statistic itself otherwise.
    pub final_statistic: f64,
    pub verdict: Verdict,
    pub fitted_decay_rate: Option<f64>,
}

/// `[corr(i)]` for `i = m..=n_max`.
pub fn correlation_sequence(
    src: &QuantumSource,
    a: &Operator,
    b: &Operator,
    m: usize,
    n_max: usize,
    backend: Backend,
) -> Result<Vec<Complex64>> {
    check_block(a, b, m, n_max)?;
    src.correlation_sequence(a, b, n_max - m, backend)
}

fn check_block(a: &Operator, b: &Operator, m: usize, n_max: usize) -> Result<()> {
    if m == 0 || a.sites() != m || b.sites() != m {
        return Err(Error::Shape(format!(
            "observables on {} and {} sites for block length {m}",
            a.sites(),
            b.sites()
        )));
    }
    if n_max < m {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} is below m = {m}"
        )));
    }
    Ok(())
}

/// `tr(ρ_m a) · tr(ρ_m b)`, real part.
pub fn product_target(
    src: &QuantumSource,
    a: &Operator,
    b: &Operator,
    backend: Backend,
) -> Result<f64> {
    Ok((src.expectation(a, backend)? * src.expectation(b, backend)?).re)
}

/// True when the trailing envelope does not grow: the largest value in the
/// second half of the window is at most the largest in the first half.
fn envelope_non_increasing(values: &[f64], window: usize, slack: f64) -> bool {
    let tail = &values[values.len() - window.min(values.len())..];
    if tail.len() < 2 {
        return true;
    }
    let (first, second) = tail.split_at(tail.len() / 2);
    let max = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max(second) <= max(first) + slack
}

fn cesaro_means(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .enumerate()
        .map(|(k, v)| {
            sum += v;
            sum / (k + 1) as f64
        })
        .collect()
}

/// Ergodic-mean verdict from a precomputed correlation sequence.
pub fn ergodic_mean_from_sequence(
    corr: &[Complex64],
    target: f64,
    m: usize,
    policy: &VerdictPolicy,
) -> ErgodicityReport {
    let means = cesaro_means(corr.iter().map(|z| z.re));
    let deviations: Vec<f64> = means.iter().map(|x| (x - target).abs()).collect();
    let final_statistic = deviations.last().copied().unwrap_or(0.0);
    let n_max = m + corr.len().saturating_sub(1);
    let window = policy.window(n_max, deviations.len());
    let verdict = cesaro_verdict(
        final_statistic,
        envelope_non_increasing(&deviations, window, policy.slack),
        policy,
    );
    ErgodicityReport {
        criterion: Criterion::ErgodicMean,
        m,
        n_max,
        sequence: means,
        target,
        final_statistic,
        verdict,
        fitted_decay_rate: None,
    }
}

/// Weak-mixing verdict from a precomputed correlation sequence.
pub fn weak_mixing_from_sequence(
    corr: &[Complex64],
    target: f64,
    m: usize,
    policy: &VerdictPolicy,
) -> ErgodicityReport {
    let stats = cesaro_means(corr.iter().map(|z| (z.re - target).abs()));
    let final_statistic = stats.last().copied().unwrap_or(0.0);
    let n_max = m + corr.len().saturating_sub(1);
    let window = policy.window(n_max, stats.len());
    let verdict = cesaro_verdict(
        final_statistic,
        envelope_non_increasing(&stats, window, policy.slack),
        policy,
    );
    ErgodicityReport {
        criterion: Criterion::WeakMixing,
        m,
        n_max,
        sequence: stats,
        target,
        final_statistic,
        verdict,
        fitted_decay_rate: None,
    }
}

fn cesaro_verdict(final_statistic: f64, settling: bool, policy: &VerdictPolicy) -> Verdict {
    if final_statistic > policy.epsilon || !final_statistic.is_finite() {
        Verdict::Fail
    } else if settling {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

/// Strong-mixing verdict from a precomputed correlation sequence.
pub fn strong_mixing_from_sequence(
    corr: &[Complex64],
    target: f64,
    m: usize,
    policy: &VerdictPolicy,
) -> ErgodicityReport {
    let deviations: Vec<f64> = corr.iter().map(|z| (z.re - target).abs()).collect();
    let final_statistic = deviations.last().copied().unwrap_or(0.0);
    let n_max = m + corr.len().saturating_sub(1);
    let window = policy.window(n_max, deviations.len());
    let tail_max = deviations[deviations.len() - window.min(deviations.len())..]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let verdict = if final_statistic > policy.epsilon || !final_statistic.is_finite() {
        Verdict::Fail
    } else if tail_max <= policy.epsilon {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let fitted_decay_rate = fit_decay_rate(m, &deviations, policy.fit_floor);
    ErgodicityReport {
        criterion: Criterion::StrongMixing,
        m,
        n_max,
        sequence: deviations,
        target,
        final_statistic,
        verdict,
        fitted_decay_rate,
    }
}

/// `exp(slope)` of a least-squares line through `(i, ln dev_i)` over the
/// points with `dev_i > floor`.
pub fn fit_decay_rate(m: usize, deviations: &[f64], floor: f64) -> Option<f64> {
    let points: Vec<(f64, f64)> = deviations
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > floor && v.is_finite())
        .map(|(k, &v)| ((m + k) as f64, v.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some((sxy / sxx).exp())
}

pub fn ergodic_mean_test(
    src: &QuantumSource,
    a: &Operator,
    b: &Operator,
    m: usize,
    n_max: usize,
    backend: Backend,
    policy: &VerdictPolicy,
) -> Result<ErgodicityReport> {
    let corr = correlation_sequence(src, a, b, m, n_max, backend)?;
    Ok(ergodic_mean_from_sequence(
        &corr,
        product_target(src, a, b, backend)?,
        m,
        policy,
    ))
}

pub fn weak_mixing_test(
    src: &QuantumSource,
    a: &Operator,
    b: &Operator,
    m: usize,
    n_max: usize,
    backend: Backend,
    policy: &VerdictPolicy,
) -> Result<ErgodicityReport> {
    let corr = correlation_sequence(src, a, b, m, n_max, backend)?;
    Ok(weak_mixing_from_sequence(
        &corr,
        product_target(src, a, b, backend)?,
        m,
        policy,
    ))
}

pub fn strong_mixing_test(
    src: &QuantumSource,
    a: &Operator,
    b: &Operator,
    m: usize,
    n_max: usize,
    backend: Backend,
    policy: &VerdictPolicy,
) -> Result<ErgodicityReport> {
    let corr = correlation_sequence(src, a, b, m, n_max, backend)?;
    Ok(strong_mixing_from_sequence(
        &corr,
        product_target(src, a, b, backend)?,
        m,
        policy,
    ))
}

/// Verdicts of the three criteria for one observable pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerdictTriple {
    pub ergodic: Verdict,
    pub weak: Verdict,
    pub strong: Verdict,
}

impl VerdictTriple {
    pub const PASS: Self = Self {
        ergodic: Verdict::Pass,
        weak: Verdict::Pass,
        strong: Verdict::Pass,
    };

    /// Strong pass implies weak pass implies ergodic pass.
    pub fn is_monotone(&self) -> bool {
        (!self.strong.is_pass() || self.weak.is_pass())
            && (!self.weak.is_pass() || self.ergodic.is_pass())
    }

    /// Componentwise worst.
    pub fn worst(self, other: Self) -> Self {
        Self {
            ergodic: self.ergodic.max(other.ergodic),
            weak: self.weak.max(other.weak),
            strong: self.strong.max(other.strong),
        }
    }
}

/// An observable pair in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservablePair {
    pub label: String,
    pub a: Operator,
    pub b: Operator,
}

/// The canonical structured pairs followed by `observable_count` seeded
/// random Hermitian pairs.
///
/// The canonical set holds every ordered pair of single-site basis projectors
/// `|j⟩⟨j|` placed at any site of the m-block; random observables can have
/// tiny correlation amplitude and miss a failure these catch.
pub fn sweep_pairs(
    d: usize,
    m: usize,
    observable_count: usize,
    seed: u64,
) -> Result<Vec<ObservablePair>> {
    let mut singles = Vec::with_capacity(d * m);
    for site in 0..m {
        for j in 0..d {
            let p = embed_observable(&Operator::basis_projector(d, j)?, site, m - 1 - site)?;
            singles.push((format!("P{j}@{site}"), p));
        }
    }
    let mut pairs = Vec::with_capacity(singles.len() * singles.len() + observable_count);
    for (la, a) in &singles {
        for (lb, b) in &singles {
            pairs.push(ObservablePair {
                label: format!("{la}|{lb}"),
                a: a.clone(),
                b: b.clone(),
            });
        }
    }
    for k in 0..observable_count as u64 {
        pairs.push(ObservablePair {
            label: format!("random#{k}"),
            a: random_observable(d, m, derive_seed(seed, 2 * k))?,
            b: random_observable(d, m, derive_seed(seed, 2 * k + 1))?,
        });
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub label: String,
    pub ergodic: ErgodicityReport,
    pub weak: ErgodicityReport,
    pub strong: ErgodicityReport,
    /// `corr(i)` for `i = m..=n_max`.
    pub correlations: Vec<Complex64>,
}

impl PairReport {
    pub fn verdicts(&self) -> VerdictTriple {
        VerdictTriple {
            ergodic: self.ergodic.verdict,
            weak: self.weak.verdict,
            strong: self.strong.verdict,
        }
    }
}

/// Runs all three criteria on one pair, sharing one correlation sequence.
pub fn evaluate_pair(
    src: &QuantumSource,
    pair: &ObservablePair,
    m: usize,
    n_max: usize,
    backend: Backend,
    policy: &VerdictPolicy,
) -> Result<PairReport> {
    let corr = correlation_sequence(src, &pair.a, &pair.b, m, n_max, backend)?;
    let target = product_target(src, &pair.a, &pair.b, backend)?;
    Ok(PairReport {
        label: pair.label.clone(),
        ergodic: ergodic_mean_from_sequence(&corr, target, m, policy),
        weak: weak_mixing_from_sequence(&corr, target, m, policy),
        strong: strong_mixing_from_sequence(&corr, target, m, policy),
        correlations: corr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub pairs: Vec<PairReport>,
    pub aggregate: VerdictTriple,
    /// Every pair's triple respects strong ⟹ weak ⟹ ergodic.
    pub implication_consistent: bool,
}

impl SweepReport {
    /// Assembles pair reports in the given order.
    pub fn from_pairs(pairs: Vec<PairReport>) -> Self {
        let aggregate = pairs
            .iter()
            .map(PairReport::verdicts)
            .fold(VerdictTriple::PASS, VerdictTriple::worst);
        let implication_consistent = pairs.iter().all(|p| p.verdicts().is_monotone());
        Self {
            pairs,
            aggregate,
            implication_consistent,
        }
    }
}

/// Sequential sweep over [`sweep_pairs`]; deterministic for a fixed seed.
pub fn sweep_report(
    src: &QuantumSource,
    m: usize,
    observable_count: usize,
    seed: u64,
    n_max: usize,
    backend: Backend,
    policy: &VerdictPolicy,
) -> Result<SweepReport> {
    let pairs = sweep_pairs(src.d(), m, observable_count, seed)?;
    let reports = pairs
        .iter()
        .map(|p| evaluate_pair(src, p, m, n_max, backend, policy))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::from_pairs(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::ClassicalProcess;
    use crate::operator::DensityOperator;
    use crate::source::AlphabetSpec;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn period2_source() -> QuantumSource {
        let p =
            ClassicalProcess::stationary_markov(&[alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]])
                .unwrap();
        QuantumSource::classically_correlated(p, AlphabetSpec::computational(2).unwrap()).unwrap()
    }

    #[test]
    fn period2_sequence_alternates() {
        let src = period2_source();
        let p0 = Operator::basis_projector(2, 0).unwrap();
        let seq = correlation_sequence(&src, &p0, &p0, 1, 8, Backend::Transfer).unwrap();
        assert_eq!(seq.len(), 8);
        for (k, z) in seq.iter().enumerate() {
            let i = k + 1;
            assert!((z.re - if i % 2 == 0 { 0.5 } else { 0.0 }).abs() < 1e-15);
        }
    }

    #[test]
    fn period2_verdicts() {
        let src = period2_source();
        let p1 = Operator::basis_projector(2, 1).unwrap();
        let policy = VerdictPolicy::transfer();
        let e = ergodic_mean_test(&src, &p1, &p1, 1, 2000, Backend::Transfer, &policy).unwrap();
        assert_eq!(e.verdict, Verdict::Pass);
        assert!((e.target - 0.25).abs() < 1e-15);
        assert_eq!(e.sequence.len(), 2000);
        let w = weak_mixing_test(&src, &p1, &p1, 1, 2000, Backend::Transfer, &policy).unwrap();
        assert_eq!(w.verdict, Verdict::Fail);
        assert!((w.final_statistic - 0.25).abs() < 1e-12);
        let s = strong_mixing_test(&src, &p1, &p1, 1, 2000, Backend::Transfer, &policy).unwrap();
        assert_eq!(s.verdict, Verdict::Fail);
        assert!((s.fitted_decay_rate.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iid_passes_everything_exactly() {
        let src = QuantumSource::iid(DensityOperator::maximally_mixed(2, 1).unwrap()).unwrap();
        let a = random_observable(2, 1, 1).unwrap();
        let b = random_observable(2, 1, 2).unwrap();
        let policy = VerdictPolicy::transfer();
        for report in [
            ergodic_mean_test(&src, &a, &b, 1, 50, Backend::Transfer, &policy).unwrap(),
            weak_mixing_test(&src, &a, &b, 1, 50, Backend::Transfer, &policy).unwrap(),
            strong_mixing_test(&src, &a, &b, 1, 50, Backend::Transfer, &policy).unwrap(),
        ] {
            assert_eq!(report.verdict, Verdict::Pass);
            assert!(report.final_statistic <= 1e-12);
        }
    }

    #[test]
    fn envelope_tolerates_oscillation_that_shrinks() {
        let v = [0.0, 0.1, 0.0, 0.05, 0.0, 0.02, 0.0, 0.01];
        assert!(envelope_non_increasing(&v, 8, 0.0));
        let growing = [0.0, 0.01, 0.0, 0.02];
        assert!(!envelope_non_increasing(&growing, 4, 0.0));
    }

    #[test]
    fn strong_mixing_inconclusive_when_tail_spikes() {
        let mut corr: Vec<Complex64> = (0..100).map(|_| c(0.25)).collect();
        corr[95] = c(0.5);
        let r = strong_mixing_from_sequence(&corr, 0.25, 1, &VerdictPolicy::transfer());
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn decay_fit_recovers_geometric_rate() {
        let dev: Vec<f64> = (0..60).map(|k| 0.3 * 0.6f64.powi(k as i32 + 1)).collect();
        let rate = fit_decay_rate(1, &dev, 1e-13).unwrap();
        assert!((rate - 0.6).abs() < 1e-12);
        assert!(fit_decay_rate(1, &[0.0; 10], 1e-13).is_none());
    }

    #[test]
    fn block_and_horizon_checks() {
        let src = period2_source();
        let p = Operator::basis_projector(2, 0).unwrap();
        assert!(matches!(
            correlation_sequence(&src, &p, &p, 2, 10, Backend::Transfer),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            correlation_sequence(&src, &p, &p, 1, 0, Backend::Transfer),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn triple_monotonicity() {
        let bad = VerdictTriple {
            ergodic: Verdict::Fail,
            weak: Verdict::Pass,
            strong: Verdict::Pass,
        };
        assert!(!bad.is_monotone());
        assert!(VerdictTriple::PASS.is_monotone());
    }

    #[test]
    fn sweep_pairs_include_canonical_set() {
        let pairs = sweep_pairs(2, 2, 3, 7).unwrap();
        assert_eq!(pairs.len(), 16 + 3);
        assert_eq!(pairs[0].label, "P0@0|P0@0");
        assert_eq!(pairs, sweep_pairs(2, 2, 3, 7).unwrap());
    }
}
