use std::time::{Duration, Instant};

use log::{debug, info};
use qsource_core::ergodicity::{
    ergodic_mean_from_sequence, product_target, strong_mixing_from_sequence, sweep_pairs,
    weak_mixing_from_sequence, Criterion, ErgodicityReport, ObservablePair, Verdict,
};
use qsource_core::operator::validate_density;
use qsource_core::source::{
    check_consistency, check_n_stationarity, check_stationarity, CheckReport, QuantumSource,
};
use qsource_core::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, TestKind};
use crate::RunError;

/// Everything a run produced. Wall time is carried alongside but never
/// serialized into the structured report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairRecord>,
    pub aggregate: Aggregate,
    pub failures: Vec<Failure>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Density,
    Consistency,
    Stationarity,
    ShiftStationarity,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Density => "density",
            Self::Consistency => "consistency",
            Self::Stationarity => "stationarity",
            Self::ShiftStationarity => "shift_stationarity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: CheckKind,
    pub m: usize,
    pub padding: usize,
    pub trials: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictRecord {
    Pass,
    Inconclusive,
    Fail,
}

impl From<Verdict> for VerdictRecord {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Self::Pass,
            Verdict::Inconclusive => Self::Inconclusive,
            Verdict::Fail => Self::Fail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRecord {
    pub criterion: &'static str,
    pub m: usize,
    pub n_max: usize,
    pub target: f64,
    pub final_statistic: f64,
    pub verdict: VerdictRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_decay_rate: Option<f64>,
    pub sequence: Vec<f64>,
}

fn criterion_name(c: Criterion) -> &'static str {
    match c {
        Criterion::ErgodicMean => "ergodic_mean",
        Criterion::WeakMixing => "weak_mixing",
        Criterion::StrongMixing => "strong_mixing",
    }
}

impl From<ErgodicityReport> for CriterionRecord {
    fn from(r: ErgodicityReport) -> Self {
        Self {
            criterion: criterion_name(r.criterion),
            m: r.m,
            n_max: r.n_max,
            target: r.target,
            final_statistic: r.final_statistic,
            verdict: r.verdict.into(),
            fitted_decay_rate: r.fitted_decay_rate,
            sequence: r.sequence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub label: String,
    pub target: f64,
    pub reports: Vec<CriterionRecord>,
    /// `corr(i)` for `i = m..=n_max`; written to the decay CSV only.
    #[serde(skip)]
    pub correlations: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks_pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ergodic_mean: Option<VerdictRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_mixing: Option<VerdictRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_mixing: Option<VerdictRecord>,
    /// Strong pass implies weak pass implies ergodic pass, pair by pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub implication_consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub test: String,
    pub subject: String,
    pub verdict: VerdictRecord,
    pub statistic: f64,
}

fn record(kind: CheckKind, r: CheckReport, tolerance: f64) -> CheckRecord {
    CheckRecord {
        check: kind,
        m: r.m,
        padding: r.padding,
        trials: r.trials,
        max_deviation: r.max_deviation,
        tolerance,
        pass: r.max_deviation <= tolerance,
    }
}

/// Runs the selected tests. Work items run in parallel on the current
/// rayon pool and are reassembled in a fixed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    config.validate()?;
    let config = config.resolved();
    let src = config.build_source()?;
    let tests = config.selected_tests();
    info!("running {:?} on d = {}", tests, config.d);

    let checks = run_checks(&config, &src, &tests)?;
    let ergodic: Vec<TestKind> = tests
        .iter()
        .copied()
        .filter(|t| matches!(t, TestKind::Ergodic | TestKind::Weak | TestKind::Strong))
        .collect();
    let pairs = if ergodic.is_empty() {
        Vec::new()
    } else {
        run_pairs(&config, &src, &ergodic)?
    };

    let mut failures = Vec::new();
    for c in &checks {
        if !c.pass {
            failures.push(Failure {
                test: c.check.name().to_owned(),
                subject: format!("m={} padding={}", c.m, c.padding),
                verdict: VerdictRecord::Fail,
                statistic: c.max_deviation,
            });
        }
    }
    let mut worst = [None::<VerdictRecord>; 3];
    let mut implication_consistent = true;
    for p in &pairs {
        let mut verdicts = [None; 3];
        for r in &p.reports {
            let slot = match r.criterion {
                "ergodic_mean" => 0,
                "weak_mixing" => 1,
                _ => 2,
            };
            verdicts[slot] = Some(r.verdict);
            worst[slot] = Some(worse(worst[slot], r.verdict));
            if r.verdict != VerdictRecord::Pass {
                failures.push(Failure {
                    test: r.criterion.to_owned(),
                    subject: p.label.clone(),
                    verdict: r.verdict,
                    statistic: r.final_statistic,
                });
            }
        }
        let passes = |v: Option<VerdictRecord>| v.is_none_or(|v| v == VerdictRecord::Pass);
        let implied = |hi: Option<VerdictRecord>, lo: Option<VerdictRecord>| {
            !(hi == Some(VerdictRecord::Pass) && !passes(lo))
        };
        implication_consistent &=
            implied(verdicts[2], verdicts[1]) && implied(verdicts[1], verdicts[0]);
    }
    let has_checks = tests
        .iter()
        .any(|t| matches!(t, TestKind::Consistency | TestKind::Stationarity));
    let aggregate = Aggregate {
        checks_pass: has_checks.then(|| checks.iter().all(|c| c.pass)),
        ergodic_mean: worst[0],
        weak_mixing: worst[1],
        strong_mixing: worst[2],
        implication_consistent: (!pairs.is_empty()).then_some(implication_consistent),
    };
    let pass = failures.is_empty();
    Ok(RunReport {
        toolkit_version: env!("CARGO_PKG_VERSION").to_owned(),
        config,
        checks,
        pairs,
        aggregate,
        failures,
        pass,
        wall_time: start.elapsed(),
    })
}

fn worse(a: Option<VerdictRecord>, b: VerdictRecord) -> VerdictRecord {
    let rank = |v: VerdictRecord| match v {
        VerdictRecord::Pass => 0,
        VerdictRecord::Inconclusive => 1,
        VerdictRecord::Fail => 2,
    };
    match a {
        Some(a) if rank(a) >= rank(b) => a,
        _ => b,
    }
}

#[derive(Clone, Copy)]
enum Job {
    Density(usize),
    Consistency(usize, usize),
    Stationarity(usize, usize),
    Shift(usize, usize),
}

fn run_checks(
    config: &ExperimentConfig,
    src: &QuantumSource,
    tests: &[TestKind],
) -> Result<Vec<CheckRecord>, RunError> {
    let consistency = tests.contains(&TestKind::Consistency);
    let stationarity = tests.contains(&TestKind::Stationarity);
    if !consistency && !stationarity {
        return Ok(Vec::new());
    }
    let block = src.alignment();
    let max = config.checks.max_sites;
    let mut jobs = Vec::new();
    for m in (block..=max).step_by(block) {
        jobs.push(Job::Density(m));
    }
    for m in (block..max).step_by(block) {
        for i in (block..=max - m).step_by(block) {
            if consistency {
                jobs.push(Job::Consistency(m, i));
            }
            if stationarity {
                jobs.push(Job::Stationarity(m, i));
            }
        }
    }
    if stationarity {
        for &period in &config.checks.shift_periods {
            let step = period * block;
            for m in (block..max).step_by(block) {
                if m + step <= max {
                    jobs.push(Job::Shift(m, period));
                }
            }
        }
    }
    let tol = config.check_tolerance();
    let trials = config.checks.trials;
    let seed = config.seed;
    jobs.par_iter()
        .map(|job| -> Result<CheckRecord, RunError> {
            let rec = match *job {
                Job::Density(m) => {
                    let report = validate_density(src.density(m)?.as_operator());
                    let deviation = report
                        .hermitian_deviation
                        .max(report.trace_deviation)
                        .max((-report.min_eigenvalue).max(0.0));
                    CheckRecord {
                        check: CheckKind::Density,
                        m,
                        padding: 0,
                        trials: 1,
                        max_deviation: deviation,
                        tolerance: qsource_core::operator::TOL_PSD,
                        pass: report.pass,
                    }
                }
                Job::Consistency(m, i) => record(
                    CheckKind::Consistency,
                    check_consistency(src, m, i, trials, seed)?,
                    tol,
                ),
                Job::Stationarity(m, i) => record(
                    CheckKind::Stationarity,
                    check_stationarity(src, m, i, trials, seed)?,
                    tol,
                ),
                Job::Shift(m, period) => record(
                    CheckKind::ShiftStationarity,
                    check_n_stationarity(src, m, period * block, 1, trials, seed)?,
                    tol,
                ),
            };
            debug!(
                "{:?} m={} padding={} deviation={:.3e}",
                rec.check, rec.m, rec.padding, rec.max_deviation
            );
            Ok(rec)
        })
        .collect()
}

fn run_pairs(
    config: &ExperimentConfig,
    src: &QuantumSource,
    selected: &[TestKind],
) -> Result<Vec<PairRecord>, RunError> {
    let pairs = sweep_pairs(config.d, config.m, config.observable_count, config.seed)?;
    let policy = config.policy();
    let backend = config.backend.into();
    let (m, n_max) = (config.m, config.n_max);
    info!(
        "evaluating {} observable pairs up to n_max = {n_max}",
        pairs.len()
    );
    pairs
        .par_iter()
        .map(|pair: &ObservablePair| -> Result<PairRecord, RunError> {
            let corr = qsource_core::ergodicity::correlation_sequence(
                src, &pair.a, &pair.b, m, n_max, backend,
            )?;
            let target = product_target(src, &pair.a, &pair.b, backend)?;
            let mut reports = Vec::with_capacity(3);
            for t in selected {
                let r = match t {
                    TestKind::Ergodic => ergodic_mean_from_sequence(&corr, target, m, &policy),
                    TestKind::Weak => weak_mixing_from_sequence(&corr, target, m, &policy),
                    TestKind::Strong => strong_mixing_from_sequence(&corr, target, m, &policy),
                    _ => continue,
                };
                reports.push(CriterionRecord::from(r));
            }
            Ok(PairRecord {
                label: pair.label.clone(),
                target,
                reports,
                correlations: corr,
            })
        })
        .collect()
}
