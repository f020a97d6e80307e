//! Consistent families of density operators `{ρ_m}` and their correlations.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::channel::KrausChannel;
use crate::classical::{decode_word, ClassicalProcess, ProcessKind};
use crate::linalg;
use crate::operator::{
    dense_dim, derive_seed, embed_observable, random_observable, tensor_product, trace_pairing,
    trace_product, DensityOperator, Operator,
};
use crate::{Error, Result};

/// Pass threshold for consistency and stationarity checks.
pub const TOL_CHECK: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Linearly independent unit vectors `|ψ_1⟩ … |ψ_k⟩` in `C^d`, `k ≤ d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphabetSpec {
    d: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl AlphabetSpec {
    pub fn new(d: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        crate::operator::SiteConfig::new(d)?;
        if vectors.is_empty() || vectors.len() > d {
            return Err(Error::InvalidAlphabet(format!(
                "need between 1 and {d} letters, got {}",
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != d {
                return Err(Error::InvalidAlphabet(format!(
                    "letter {i} has length {}, expected {d}",
                    v.len()
                )));
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidAlphabet(format!(
                    "letter {i} has norm {norm}, expected 1"
                )));
            }
        }
        let k = vectors.len();
        let mut gram = vec![ZERO; k * k];
        for i in 0..k {
            for j in 0..k {
                gram[i * k + j] = vectors[i]
                    .iter()
                    .zip(&vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
            }
        }
        let smallest = linalg::hermitian_eigenvalues(k, &gram)[0];
        if smallest <= 1e-10 {
            return Err(Error::InvalidAlphabet(format!(
                "letters are linearly dependent (smallest Gram eigenvalue {smallest:.3e})"
            )));
        }
        Ok(Self { d, vectors })
    }

    /// `{|0⟩, …, |d−1⟩}`.
    pub fn computational(d: usize) -> Result<Self> {
        let vectors = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self::new(d, vectors)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn projectors(&self) -> Vec<Operator> {
        self.vectors
            .iter()
            .map(|v| Operator::projector(self.d, v).expect("validated letter"))
            .collect()
    }

    /// `|ψ_{w_1}⟩ ⊗ … ⊗ |ψ_{w_m}⟩`.
    pub fn word_vector(&self, word: &[usize]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for &x in word {
            out = linalg::kron_vec(&out, &self.vectors[x]);
        }
        out
    }
}

/// How to evaluate `tr(ρ_{2m+gap} (a ⊗ I^{⊗gap} ⊗ b))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Materialize `ρ_{2m+gap}` and pair against the padded observable.
    Dense,
    /// Contract block functions along the classical driving chain, pushing
    /// observables through channel duals.
    Transfer,
}

/// Anything that yields the finite marginals `ρ_m`.
pub trait DensityFamily {
    fn site_dim(&self) -> usize;
    fn density(&self, m: usize) -> Result<DensityOperator>;
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Iid(DensityOperator),
    ClassicallyCorrelated {
        process: ClassicalProcess,
        alphabet: AlphabetSpec,
    },
    ChannelTransformed {
        base: Box<QuantumSource>,
        channel: KrausChannel,
    },
}

/// Generator of a consistent family `{ρ_m}`; marginals are built on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSource {
    kind: SourceKind,
    d: usize,
}

impl QuantumSource {
    /// Product source `ρ_m = σ^{⊗m}` for a single-site state `σ`.
    pub fn iid(sigma: DensityOperator) -> Result<Self> {
        if sigma.sites() != 1 {
            return Err(Error::Shape(
                "i.i.d. source needs a single-site state".into(),
            ));
        }
        Ok(Self {
            d: sigma.d(),
            kind: SourceKind::Iid(sigma),
        })
    }

    /// `ρ_m = Σ_x p(x_1…x_m) |x_1⟩⟨x_1| ⊗ … ⊗ |x_m⟩⟨x_m|`.
    pub fn classically_correlated(
        process: ClassicalProcess,
        alphabet: AlphabetSpec,
    ) -> Result<Self> {
        if process.alphabet_size() != alphabet.len() {
            return Err(Error::Shape(format!(
                "process has {} symbols, alphabet has {} letters",
                process.alphabet_size(),
                alphabet.len()
            )));
        }
        Ok(Self {
            d: alphabet.d(),
            kind: SourceKind::ClassicallyCorrelated { process, alphabet },
        })
    }

    /// `ρ_m ↦ ℰ^{⊗(m/k)}(ρ_m)` for a channel on blocks of `k` sites.
    pub fn channel_transformed(base: QuantumSource, channel: KrausChannel) -> Result<Self> {
        if channel.d() != base.d {
            return Err(Error::Shape(format!(
                "channel acts on dimension {}, source has dimension {}",
                channel.d(),
                base.d
            )));
        }
        Ok(Self {
            d: base.d,
            kind: SourceKind::ChannelTransformed {
                base: Box::new(base),
                channel,
            },
        })
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Sites per block of the outermost channel stack (1 when unblocked).
    pub fn alignment(&self) -> usize {
        match &self.kind {
            SourceKind::ChannelTransformed { base, channel } => {
                let a = base.alignment();
                let b = channel.block_size();
                a / linalg::gcd(a, b) * b
            }
            _ => 1,
        }
    }

    fn check_aligned(&self, sites: usize) -> Result<()> {
        let block = self.alignment();
        if sites % block != 0 {
            return Err(Error::Alignment { sites, block });
        }
        Ok(())
    }

    /// `ρ_m`.
    pub fn density(&self, m: usize) -> Result<DensityOperator> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "marginal length must be positive".into(),
            ));
        }
        dense_dim(self.d, m)?;
        Ok(DensityOperator::trusted(self.density_operator(m)?))
    }

    fn density_operator(&self, m: usize) -> Result<Operator> {
        match &self.kind {
            SourceKind::Iid(sigma) => Ok(sigma.power(m)?.into_operator()),
            SourceKind::ClassicallyCorrelated { process, alphabet } => {
                classical_density(process, &alphabet.projectors(), m)
            }
            SourceKind::ChannelTransformed { base, channel } => {
                self.check_aligned(m)?;
                let rho = base.density_operator(m)?;
                channel.apply_operator(&rho, m / channel.block_size())
            }
        }
    }

    /// `tr(ρ_m a)` with `m = a.sites()`.
    pub fn expectation(&self, a: &Operator, backend: Backend) -> Result<Complex64> {
        self.check_observable(a)?;
        match backend {
            Backend::Dense => trace_pairing(&self.density(a.sites())?, a),
            Backend::Transfer => self.expectation_transfer(a),
        }
    }

    fn expectation_transfer(&self, a: &Operator) -> Result<Complex64> {
        let m = a.sites();
        match &self.kind {
            SourceKind::Iid(sigma) => trace_product(&sigma.power(m)?.into_operator(), a),
            SourceKind::ClassicallyCorrelated { process, alphabet } => {
                let f = block_function(alphabet, a)?;
                let table = process.measure_table(m)?;
                Ok(table.probs().iter().zip(&f).map(|(p, v)| v * *p).sum())
            }
            SourceKind::ChannelTransformed { base, channel } => {
                self.check_aligned(m)?;
                base.expectation_transfer(&channel.dual(a, m / channel.block_size())?)
            }
        }
    }

    fn check_observable(&self, a: &Operator) -> Result<()> {
        if a.d() != self.d {
            return Err(Error::Shape(format!(
                "observable acts on dimension {}, source has dimension {}",
                a.d(),
                self.d
            )));
        }
        if a.sites() == 0 {
            return Err(Error::Shape(
                "observable must act on at least one site".into(),
            ));
        }
        Ok(())
    }

    /// `tr(ρ_{2m+gap} (a ⊗ I^{⊗gap} ⊗ b))`.
    pub fn correlation(
        &self,
        a: &Operator,
        b: &Operator,
        gap: usize,
        backend: Backend,
    ) -> Result<Complex64> {
        match backend {
            Backend::Dense => self.correlation_dense(a, b, gap),
            Backend::Transfer => {
                self.check_pair(a, b)?;
                self.check_aligned(gap)?;
                Ok(self.correlation_transfer(a, b, gap)?[gap])
            }
        }
    }

    /// Correlations for every `gap` in `0..=max_gap`.
    pub fn correlation_sequence(
        &self,
        a: &Operator,
        b: &Operator,
        max_gap: usize,
        backend: Backend,
    ) -> Result<Vec<Complex64>> {
        self.check_pair(a, b)?;
        if max_gap > 0 {
            // every gap must be a whole number of channel blocks
            self.check_aligned(1)?;
        }
        match backend {
            Backend::Dense => (0..=max_gap)
                .map(|gap| self.correlation_dense(a, b, gap))
                .collect(),
            Backend::Transfer => self.correlation_transfer(a, b, max_gap),
        }
    }

    fn check_pair(&self, a: &Operator, b: &Operator) -> Result<()> {
        self.check_observable(a)?;
        self.check_observable(b)?;
        if a.sites() != b.sites() {
            return Err(Error::Shape(format!(
                "observables act on {} and {} sites; they must share a block length",
                a.sites(),
                b.sites()
            )));
        }
        self.check_aligned(a.sites())
    }

    fn correlation_dense(&self, a: &Operator, b: &Operator, gap: usize) -> Result<Complex64> {
        self.check_pair(a, b)?;
        let m = a.sites();
        let total = 2 * m + gap;
        dense_dim(self.d, total)?;
        self.check_aligned(total)?;
        let observable = tensor_product(&embed_observable(a, 0, gap)?, b)?;
        trace_pairing(&self.density(total)?, &observable)
    }

    fn correlation_transfer(
        &self,
        a: &Operator,
        b: &Operator,
        max_gap: usize,
    ) -> Result<Vec<Complex64>> {
        let m = a.sites();
        match &self.kind {
            SourceKind::Iid(sigma) => {
                let block = sigma.power(m)?.into_operator();
                let value = trace_product(&block, a)? * trace_product(&block, b)?;
                Ok(vec![value; max_gap + 1])
            }
            SourceKind::ClassicallyCorrelated { process, alphabet } => {
                let f = block_function(alphabet, a)?;
                let g = block_function(alphabet, b)?;
                process.correlation_sequence_complex(&f, &g, m, max_gap)
            }
            SourceKind::ChannelTransformed { base, channel } => {
                let copies = m / channel.block_size();
                let a_dual = channel.dual(a, copies)?;
                let b_dual = channel.dual(b, copies)?;
                base.correlation_transfer(&a_dual, &b_dual, max_gap)
            }
        }
    }
}

impl DensityFamily for QuantumSource {
    fn site_dim(&self) -> usize {
        self.d
    }

    fn density(&self, m: usize) -> Result<DensityOperator> {
        QuantumSource::density(self, m)
    }
}

/// `⟨ψ_w|a|ψ_w⟩` for every m-word `w` over the alphabet.
fn block_function(alphabet: &AlphabetSpec, a: &Operator) -> Result<Vec<Complex64>> {
    let n = alphabet.len();
    let m = a.sites();
    let count = (n as u128).saturating_pow(m as u32);
    if count > crate::classical::MAX_WORDS as u128 {
        return Err(Error::Resource {
            what: "block function table",
            requested: count,
            cap: crate::classical::MAX_WORDS as u128,
        });
    }
    let mut word = vec![0usize; m];
    Ok((0..count as usize)
        .map(|idx| {
            decode_word(idx, n, &mut word);
            a.expectation_in(&alphabet.word_vector(&word))
        })
        .collect())
}

/// Builds `Σ_x p(x) P_{x_1} ⊗ … ⊗ P_{x_m}` without enumerating words when the
/// process is Markov: carry one partial operator per last symbol.
fn classical_density(
    process: &ClassicalProcess,
    projectors: &[Operator],
    m: usize,
) -> Result<Operator> {
    let d = projectors[0].d();
    match process.kind() {
        ProcessKind::Iid { weights } => {
            let mut avg = Operator::zeros(d, 1)?;
            for (p, w) in projectors.iter().zip(weights) {
                avg.add_scaled_assign(Complex64::new(*w, 0.0), p)?;
            }
            crate::operator::tensor_power(&avg, m)
        }
        ProcessKind::Markov {
            transition,
            initial,
        } => {
            let n = projectors.len();
            let mut partial: Vec<Operator> = projectors
                .iter()
                .zip(initial)
                .map(|(p, &w)| p.scale_real(w))
                .collect();
            for _ in 1..m {
                let mut next = Vec::with_capacity(n);
                for y in 0..n {
                    let mut acc = Operator::zeros(d, partial[0].sites())?;
                    for (x, part) in partial.iter().enumerate() {
                        let p = transition.get(x, y);
                        if p != 0.0 {
                            acc.add_scaled_assign(Complex64::new(p, 0.0), part)?;
                        }
                    }
                    next.push(tensor_product(&acc, &projectors[y])?);
                }
                partial = next;
            }
            let mut out = Operator::zeros(d, m)?;
            for part in &partial {
                out.add_scaled_assign(Complex64::new(1.0, 0.0), part)?;
            }
            Ok(out)
        }
        ProcessKind::Mixture {
            components,
            weights,
        } => {
            let mut out = Operator::zeros(d, m)?;
            for (c, &w) in components.iter().zip(weights) {
                out.add_scaled_assign(
                    Complex64::new(w, 0.0),
                    &classical_density(c, projectors, m)?,
                )?;
            }
            Ok(out)
        }
    }
}

/// A finite family given by explicit matrices, `densities[m − 1] = ρ_m`.
/// Nothing forces it to be consistent, which makes it the natural input for
/// negative checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitFamily {
    d: usize,
    densities: Vec<DensityOperator>,
}

impl ExplicitFamily {
    pub fn new(densities: Vec<DensityOperator>) -> Result<Self> {
        let d = densities
            .first()
            .ok_or_else(|| Error::Shape("explicit family is empty".into()))?
            .d();
        for (i, rho) in densities.iter().enumerate() {
            if rho.d() != d || rho.sites() != i + 1 {
                return Err(Error::Shape(format!(
                    "entry {i} must be a state on {} site(s)",
                    i + 1
                )));
            }
        }
        Ok(Self { d, densities })
    }
}

impl DensityFamily for ExplicitFamily {
    fn site_dim(&self) -> usize {
        self.d
    }

    fn density(&self, m: usize) -> Result<DensityOperator> {
        self.densities
            .get(m.wrapping_sub(1))
            .cloned()
            .ok_or(Error::Resource {
                what: "explicit family length",
                requested: m as u128,
                cap: self.densities.len() as u128,
            })
    }
}

/// Result of a consistency or stationarity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub m: usize,
    /// Number of padding sites.
    pub padding: usize,
    pub trials: usize,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Copy)]
enum Padding {
    Right,
    Left,
}

fn padded_check<F: DensityFamily + ?Sized>(
    family: &F,
    m: usize,
    padding: usize,
    side: Padding,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    let d = family.site_dim();
    dense_dim(d, m + padding)?;
    let short = family.density(m)?;
    let long = family.density(m + padding)?;
    let mut max_deviation = 0.0f64;
    for trial in 0..trials {
        let a = random_observable(d, m, derive_seed(seed, trial as u64))?;
        let padded = match side {
            Padding::Right => embed_observable(&a, 0, padding)?,
            Padding::Left => embed_observable(&a, padding, 0)?,
        };
        let lhs = trace_pairing(&short, &a)?;
        let rhs = trace_pairing(&long, &padded)?;
        max_deviation = max_deviation.max((lhs - rhs).norm());
    }
    Ok(CheckReport {
        m,
        padding,
        trials,
        max_deviation,
        pass: max_deviation <= TOL_CHECK,
    })
}

/// `tr(ρ_m a) = tr(ρ_{m+i} (a ⊗ I^{⊗i}))` over `trials` random observables.
pub fn check_consistency<F: DensityFamily + ?Sized>(
    family: &F,
    m: usize,
    i: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    padded_check(family, m, i, Padding::Right, trials, seed)
}

/// `tr(ρ_m a) = tr(ρ_{m+i} (I^{⊗i} ⊗ a))` over `trials` random observables.
pub fn check_stationarity<F: DensityFamily + ?Sized>(
    family: &F,
    m: usize,
    i: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    padded_check(family, m, i, Padding::Left, trials, seed)
}

/// Invariance under shifts by `period · shifts` sites.
pub fn check_n_stationarity<F: DensityFamily + ?Sized>(
    family: &F,
    m: usize,
    period: usize,
    shifts: usize,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    padded_check(family, m, period * shifts, Padding::Left, trials, seed)
}
