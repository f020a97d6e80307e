//! Experiment configuration: one TOML (or JSON) file per run.

use std::path::{Path, PathBuf};

use qsource_core::channel::StandardChannel;
use qsource_core::classical::ClassicalProcess;
use qsource_core::ergodicity::VerdictPolicy;
use qsource_core::operator::{random_density, random_unitary};
use qsource_core::source::{AlphabetSpec, Backend, QuantumSource, TOL_CHECK};
use qsource_core::{Complex64, DensityOperator, KrausChannel, Operator, PinchingBasis};
use serde::{Deserialize, Serialize};

use crate::RunError;

/// A complex number written as `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Single-site dimension.
    pub d: usize,
    pub seed: u64,
    pub source: SourceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default = "default_tests")]
    pub tests: Vec<TestKind>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_observable_count")]
    pub observable_count: usize,
    #[serde(default)]
    pub backend: BackendKind,
    #[serde(default)]
    pub checks: CheckSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Where files go; not echoed, so the report does not depend on it.
    #[serde(default, skip_serializing)]
    pub output: OutputSettings,
}

fn default_tests() -> Vec<TestKind> {
    vec![TestKind::All]
}

fn default_m() -> usize {
    1
}

fn default_n_max() -> usize {
    2000
}

fn default_observable_count() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Consistency,
    Stationarity,
    Ergodic,
    Weak,
    Strong,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Dense,
    #[default]
    Transfer,
}

impl From<BackendKind> for Backend {
    fn from(b: BackendKind) -> Self {
        match b {
            BackendKind::Dense => Backend::Dense,
            BackendKind::Transfer => Backend::Transfer,
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Self::Dense),
            "transfer" => Ok(Self::Transfer),
            other => Err(format!(
                "unknown backend `{other}` (expected dense or transfer)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSettings {
    /// Consistency and stationarity run for every `m + i ≤ max_sites`.
    #[serde(default = "default_max_sites")]
    pub max_sites: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Extra N-shift stationarity checks, one per listed period.
    #[serde(default)]
    pub shift_periods: Vec<usize>,
}

fn default_max_sites() -> usize {
    8
}

fn default_trials() -> usize {
    20
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            max_sites: default_max_sites(),
            trials: default_trials(),
            shift_periods: Vec::new(),
        }
    }
}

/// Overrides; unset values take the backend defaults and are filled in by
/// [`ExperimentConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub decay_csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// `ρ_m = σ^{⊗m}`.
    Iid { state: StateSpec },
    /// Product states over an alphabet driven by a classical process.
    /// The alphabet defaults to the computational basis.
    ClassicallyCorrelated {
        process: ProcessSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<Vec<ComplexPair>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Diagonal(Vec<f64>),
    Rows(Vec<Vec<ComplexPair>>),
    /// A seeded random density matrix.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Iid {
        weights: Vec<f64>,
    },
    /// Started from `initial`, or from the stationary law when omitted.
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
    Mixture {
        components: Vec<ProcessSpec>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel")]
pub struct ChannelSpec {
    #[serde(flatten)]
    pub kind: ChannelKind,
    /// Sites per channel block. Single-site kinds are tensored up to the
    /// block; `random_unitary` draws one unitary on the whole block.
    pub block: usize,
}

fn default_block() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum ChannelName {
    Identity,
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    RandomUnitary,
    Unitary,
    Embedding,
}

/// Flat wire form of [`ChannelSpec`], so unknown keys are still rejected.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    kind: ChannelName,
    p: Option<f64>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    seed: Option<u64>,
    rows: Option<Vec<Vec<ComplexPair>>>,
    alphabet: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default = "default_block")]
    block: usize,
}

impl TryFrom<RawChannel> for ChannelSpec {
    type Error = String;

    fn try_from(raw: RawChannel) -> Result<Self, String> {
        let RawChannel {
            kind,
            mut p,
            mut gamma,
            mut lambda,
            mut seed,
            mut rows,
            mut alphabet,
            block,
        } = raw;
        fn take<T>(slot: &mut Option<T>, name: &str, kind: &str) -> Result<T, String> {
            slot.take()
                .ok_or_else(|| format!("channel kind `{kind}` needs `{name}`"))
        }
        let kind = match kind {
            ChannelName::Identity => ChannelKind::Identity,
            ChannelName::Depolarizing => ChannelKind::Depolarizing {
                p: take(&mut p, "p", "depolarizing")?,
            },
            ChannelName::AmplitudeDamping => ChannelKind::AmplitudeDamping {
                gamma: take(&mut gamma, "gamma", "amplitude_damping")?,
            },
            ChannelName::PhaseDamping => ChannelKind::PhaseDamping {
                lambda: take(&mut lambda, "lambda", "phase_damping")?,
            },
            ChannelName::RandomUnitary => ChannelKind::RandomUnitary {
                seed: take(&mut seed, "seed", "random_unitary")?,
            },
            ChannelName::Unitary => ChannelKind::Unitary {
                rows: take(&mut rows, "rows", "unitary")?,
            },
            ChannelName::Embedding => ChannelKind::Embedding {
                alphabet: take(&mut alphabet, "alphabet", "embedding")?,
            },
        };
        let leftover = [
            ("p", p.is_some()),
            ("gamma", gamma.is_some()),
            ("lambda", lambda.is_some()),
            ("seed", seed.is_some()),
            ("rows", rows.is_some()),
            ("alphabet", alphabet.is_some()),
        ];
        if let Some((name, _)) = leftover.iter().find(|(_, set)| *set) {
            return Err(format!(
                "field `{name}` does not apply to this channel kind"
            ));
        }
        Ok(Self { kind, block })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Identity,
    Depolarizing {
        p: f64,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    PhaseDamping {
        lambda: f64,
    },
    RandomUnitary {
        seed: u64,
    },
    Unitary {
        rows: Vec<Vec<ComplexPair>>,
    },
    /// Maps computational basis states to the listed alphabet states.
    Embedding {
        alphabet: Vec<Vec<ComplexPair>>,
    },
}

/// Loads a config, choosing the format by extension (`.json` or TOML).
pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| RunError::Config(format!("{}: {message}", path.display())))
}

fn complex(z: &ComplexPair) -> Complex64 {
    Complex64::new(z[0], z[1])
}

fn vectors(rows: &[Vec<ComplexPair>]) -> Vec<Vec<Complex64>> {
    rows.iter()
        .map(|r| r.iter().map(complex).collect())
        .collect()
}

fn field(name: &str, e: qsource_core::Error) -> RunError {
    RunError::Config(format!("{name}: {e}"))
}

impl ExperimentConfig {
    /// Fills tolerance defaults and expands `all`; the result is what the
    /// report echoes.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        let policy = VerdictPolicy::for_backend(self.backend.into());
        out.tolerances.epsilon.get_or_insert(policy.epsilon);
        out.tolerances
            .window_fraction
            .get_or_insert(policy.window_fraction);
        out.tolerances.check.get_or_insert(TOL_CHECK);
        out.tests = self.selected_tests();
        out
    }

    pub fn selected_tests(&self) -> Vec<TestKind> {
        let mut tests: Vec<TestKind> = if self.tests.contains(&TestKind::All) {
            vec![
                TestKind::Consistency,
                TestKind::Stationarity,
                TestKind::Ergodic,
                TestKind::Weak,
                TestKind::Strong,
            ]
        } else {
            self.tests.clone()
        };
        tests.sort();
        tests.dedup();
        tests
    }

    pub fn policy(&self) -> VerdictPolicy {
        let mut policy = VerdictPolicy::for_backend(self.backend.into());
        if let Some(eps) = self.tolerances.epsilon {
            policy.epsilon = eps;
        }
        if let Some(w) = self.tolerances.window_fraction {
            policy.window_fraction = w;
        }
        policy
    }

    pub fn check_tolerance(&self) -> f64 {
        self.tolerances.check.unwrap_or(TOL_CHECK)
    }

    /// Range checks that the core constructors do not cover.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if self.d < 2 {
            return bad(format!("d: must be at least 2, got {}", self.d));
        }
        if self.tests.is_empty() {
            return bad("tests: select at least one test".into());
        }
        if self.m == 0 {
            return bad("m: must be at least 1".into());
        }
        if self.n_max < self.m {
            return bad(format!(
                "n_max: must be at least m = {}, got {}",
                self.m, self.n_max
            ));
        }
        if self.observable_count == 0 {
            return bad("observable_count: must be at least 1".into());
        }
        if self.checks.trials == 0 {
            return bad("checks.trials: must be at least 1".into());
        }
        if self.checks.max_sites < 2 {
            return bad("checks.max_sites: must be at least 2".into());
        }
        if self.checks.shift_periods.contains(&0) {
            return bad("checks.shift_periods: periods must be positive".into());
        }
        if let Some(ch) = &self.channel {
            if ch.block == 0 {
                return bad("channel.block: must be at least 1".into());
            }
            let ergodic = self
                .selected_tests()
                .iter()
                .any(|t| matches!(t, TestKind::Ergodic | TestKind::Weak | TestKind::Strong));
            if ch.block > 1 && ergodic {
                return bad(format!(
                    "channel.block: ergodicity tests step one site at a time and need block = 1, got {}",
                    ch.block
                ));
            }
        }
        for (name, value) in [
            ("tolerances.epsilon", self.tolerances.epsilon),
            ("tolerances.check", self.tolerances.check),
        ] {
            if value.is_some_and(|v| !(v.is_finite() && v > 0.0)) {
                return bad(format!("{name}: must be a positive number"));
            }
        }
        if self
            .tolerances
            .window_fraction
            .is_some_and(|w| !(w > 0.0 && w <= 1.0))
        {
            return bad("tolerances.window_fraction: must lie in (0, 1]".into());
        }
        Ok(())
    }

    pub fn build_source(&self) -> Result<QuantumSource, RunError> {
        let base = self.source.build(self.d)?;
        match &self.channel {
            None => Ok(base),
            Some(spec) => {
                let channel = spec.build(self.d)?;
                QuantumSource::channel_transformed(base, channel).map_err(|e| field("channel", e))
            }
        }
    }
}

impl SourceSpec {
    pub fn build(&self, d: usize) -> Result<QuantumSource, RunError> {
        match self {
            SourceSpec::Iid { state } => {
                let sigma = state.build(d)?;
                QuantumSource::iid(sigma).map_err(|e| field("source.state", e))
            }
            SourceSpec::ClassicallyCorrelated { process, alphabet } => {
                let process = process.build().map_err(|e| field("source.process", e))?;
                let alphabet = match alphabet {
                    Some(rows) => AlphabetSpec::new(d, vectors(rows)),
                    None => AlphabetSpec::computational(d),
                }
                .map_err(|e| field("source.alphabet", e))?;
                QuantumSource::classically_correlated(process, alphabet)
                    .map_err(|e| field("source", e))
            }
        }
    }
}

impl StateSpec {
    pub fn build(&self, d: usize) -> Result<DensityOperator, RunError> {
        let op = match self {
            StateSpec::Diagonal(values) => {
                if values.len() != d {
                    return Err(RunError::Config(format!(
                        "source.state.diagonal: expected {d} entries, got {}",
                        values.len()
                    )));
                }
                Operator::diag(d, values)
            }
            StateSpec::Rows(rows) => Operator::from_rows(d, &vectors(rows)),
            StateSpec::Random(seed) => {
                return random_density(d, 1, *seed).map_err(|e| field("source.state", e))
            }
        }
        .map_err(|e| field("source.state", e))?;
        DensityOperator::new(op).map_err(|e| field("source.state", e))
    }
}

impl ProcessSpec {
    pub fn build(&self) -> qsource_core::Result<ClassicalProcess> {
        match self {
            ProcessSpec::Iid { weights } => ClassicalProcess::iid(weights.clone()),
            ProcessSpec::Markov {
                transition,
                initial: None,
            } => ClassicalProcess::stationary_markov(transition),
            ProcessSpec::Markov {
                transition,
                initial: Some(initial),
            } => ClassicalProcess::markov(transition, initial.clone()),
            ProcessSpec::Mixture {
                components,
                weights,
            } => ClassicalProcess::mixture(
                components
                    .iter()
                    .map(ProcessSpec::build)
                    .collect::<qsource_core::Result<_>>()?,
                weights.clone(),
            ),
        }
    }
}

impl ChannelSpec {
    pub fn build(&self, d: usize) -> Result<KrausChannel, RunError> {
        let wrap = |e| field("channel", e);
        let standard = match &self.kind {
            ChannelKind::Identity => StandardChannel::Identity { d },
            ChannelKind::Depolarizing { p } => StandardChannel::Depolarizing { d, p: *p },
            ChannelKind::AmplitudeDamping { gamma } => {
                StandardChannel::AmplitudeDamping { gamma: *gamma }
            }
            ChannelKind::PhaseDamping { lambda } => {
                StandardChannel::PhaseDamping { lambda: *lambda }
            }
            ChannelKind::RandomUnitary { seed } => {
                let u = random_unitary(d, self.block, *seed).map_err(wrap)?;
                return KrausChannel::new(vec![u]).map_err(wrap);
            }
            ChannelKind::Unitary { rows } => {
                StandardChannel::Unitary(Operator::from_rows(d, &vectors(rows)).map_err(wrap)?)
            }
            ChannelKind::Embedding { alphabet } => StandardChannel::Embedding {
                alphabet: AlphabetSpec::new(d, vectors(alphabet)).map_err(wrap)?,
                basis: PinchingBasis::computational(d).map_err(wrap)?,
            },
        };
        let channel = standard.build().map_err(wrap)?;
        if channel.d() != d {
            return Err(RunError::Config(format!(
                "channel: acts on dimension {}, config has d = {d}",
                channel.d()
            )));
        }
        channel.block(self.block).map_err(wrap)
    }
}
