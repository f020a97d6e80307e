//! Finite-alphabet stationary processes and their cylinder measures.
//!
//! Words are indexed lexicographically with the first symbol most
//! significant, which matches the Kronecker ordering of lattice sites.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::linalg;
use crate::{Error, Result};

/// Normalization tolerance on weights and transition rows.
pub const TOL_WEIGHTS: f64 = 1e-12;
/// Tolerance on `πP = π`.
pub const TOL_STATIONARY: f64 = 1e-10;
/// Largest number of words enumerated by measure tables and checks.
pub const MAX_WORDS: usize = 1_000_000;

fn check_distribution(name: &str, weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Validation(format!("{name} is empty")));
    }
    if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
        return Err(Error::Validation(format!(
            "{name} has negative or non-finite entries"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > TOL_WEIGHTS {
        return Err(Error::Validation(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

/// Row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    n: usize,
    entries: Vec<f64>,
}

impl Transition {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(
                "transition matrix must be square and nonempty".into(),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            check_distribution(&format!("transition row {i}"), row)?;
        }
        Ok(Self {
            n,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n + to]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Row vector times matrix.
    fn propagate<T>(&self, v: &[T]) -> Vec<T>
    where
        T: Copy + Default + core::ops::AddAssign + core::ops::Mul<f64, Output = T>,
    {
        let mut out = vec![T::default(); self.n];
        for (x, &vx) in v.iter().enumerate() {
            for (y, o) in out.iter_mut().enumerate() {
                let p = self.get(x, y);
                if p != 0.0 {
                    *o += vx * p;
                }
            }
        }
        out
    }

    fn reachability(&self) -> Vec<bool> {
        let n = self.n;
        let mut reach: Vec<bool> = (0..n * n)
            .map(|k| k / n == k % n || self.entries[k] > 0.0)
            .collect();
        for k in 0..n {
            for i in 0..n {
                if !reach[i * n + k] {
                    continue;
                }
                for j in 0..n {
                    if reach[k * n + j] {
                        reach[i * n + j] = true;
                    }
                }
            }
        }
        reach
    }

    /// Communicating classes that no edge leaves.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let reach = self.reachability();
        let mut assigned = vec![false; n];
        let mut closed = Vec::new();
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let class: Vec<usize> = (0..n)
                .filter(|&j| reach[i * n + j] && reach[j * n + i])
                .collect();
            for &j in &class {
                assigned[j] = true;
            }
            let is_closed = class
                .iter()
                .all(|&u| (0..n).all(|v| self.get(u, v) == 0.0 || class.contains(&v)));
            if is_closed {
                closed.push(class);
            }
        }
        closed
    }

    pub fn is_irreducible(&self) -> bool {
        self.reachability().iter().all(|&r| r)
    }

    /// Period of a communicating class: gcd of `level(u) + 1 − level(v)` over
    /// edges inside the class, with levels from a breadth-first search.
    pub fn period(&self, class: &[usize]) -> usize {
        let n = self.n;
        let mut level = vec![usize::MAX; n];
        let start = class[0];
        level[start] = 0;
        let mut queue = alloc::collections::VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in class {
                if self.get(u, v) > 0.0 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0;
        for &u in class {
            for &v in class {
                if self.get(u, v) > 0.0 {
                    let diff = (level[u] + 1).abs_diff(level[v]);
                    g = linalg::gcd(g, diff);
                }
            }
        }
        g.max(1)
    }

    fn class_stationary(&self, class: &[usize]) -> Option<Vec<f64>> {
        // Solve π_C (P_C − I) = 0 with Σ π_C = 1: transpose, replace the last
        // equation by the normalization.
        let k = class.len();
        let mut a = vec![0.0; k * k];
        for (r, &to) in class.iter().enumerate() {
            for (c, &from) in class.iter().enumerate() {
                a[r * k + c] = self.get(from, to) - if from == to { 1.0 } else { 0.0 };
            }
        }
        let mut b = vec![0.0; k];
        for c in 0..k {
            a[(k - 1) * k + c] = 1.0;
        }
        b[k - 1] = 1.0;
        let pi = linalg::solve(k, a, b)?;
        let mut full = vec![0.0; self.n];
        for (&state, &p) in class.iter().zip(&pi) {
            full[state] = p.max(0.0);
        }
        let total: f64 = full.iter().sum();
        full.iter_mut().for_each(|p| *p /= total);
        Some(full)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    /// False when the chain has several closed classes; `pi` is then the
    /// equal-weight mixture of the per-class stationary distributions.
    pub unique: bool,
    pub closed_classes: Vec<Vec<usize>>,
}

/// Stationary distribution of a row-stochastic matrix.
pub fn stationary_distribution(rows: &[Vec<f64>]) -> Result<StationaryDistribution> {
    let p = Transition::new(rows)?;
    stationary_of(&p)
}

fn stationary_of(p: &Transition) -> Result<StationaryDistribution> {
    let classes = p.closed_classes();
    let mut pi = vec![0.0; p.n];
    for class in &classes {
        let part = p
            .class_stationary(class)
            .ok_or_else(|| Error::Validation("singular stationary system".into()))?;
        for (acc, v) in pi.iter_mut().zip(part) {
            *acc += v / classes.len() as f64;
        }
    }
    Ok(StationaryDistribution {
        pi,
        unique: classes.len() == 1,
        closed_classes: classes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProcessKind {
    Iid {
        weights: Vec<f64>,
    },
    Markov {
        transition: Transition,
        initial: Vec<f64>,
    },
    Mixture {
        components: Vec<ClassicalProcess>,
        weights: Vec<f64>,
    },
}

/// A probability law `p(x_1, …, x_m)` for every word length `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalProcess {
    kind: ProcessKind,
    alphabet_size: usize,
}

impl ClassicalProcess {
    pub fn iid(weights: Vec<f64>) -> Result<Self> {
        check_distribution("weights", &weights)?;
        Ok(Self {
            alphabet_size: weights.len(),
            kind: ProcessKind::Iid { weights },
        })
    }

    /// Markov chain started from `initial`, which need not be stationary.
    pub fn markov(rows: &[Vec<f64>], initial: Vec<f64>) -> Result<Self> {
        let transition = Transition::new(rows)?;
        check_distribution("initial distribution", &initial)?;
        if initial.len() != transition.n {
            return Err(Error::Shape(format!(
                "initial distribution has {} entries for {} states",
                initial.len(),
                transition.n
            )));
        }
        Ok(Self {
            alphabet_size: transition.n,
            kind: ProcessKind::Markov {
                transition,
                initial,
            },
        })
    }

    /// Markov chain started from its unique stationary distribution.
    pub fn stationary_markov(rows: &[Vec<f64>]) -> Result<Self> {
        let stat = stationary_distribution(rows)?;
        if !stat.unique {
            return Err(Error::Validation(
                "stationary distribution is not unique; supply an initial distribution".into(),
            ));
        }
        Self::markov(rows, stat.pi)
    }

    pub fn mixture(components: Vec<ClassicalProcess>, weights: Vec<f64>) -> Result<Self> {
        check_distribution("mixture weights", &weights)?;
        if components.len() != weights.len() {
            return Err(Error::Shape(
                "one weight per mixture component required".into(),
            ));
        }
        let alphabet_size = components[0].alphabet_size;
        if components.iter().any(|c| c.alphabet_size != alphabet_size) {
            return Err(Error::Shape(
                "mixture components have different alphabets".into(),
            ));
        }
        Ok(Self {
            alphabet_size,
            kind: ProcessKind::Mixture {
                components,
                weights,
            },
        })
    }

    pub fn kind(&self) -> &ProcessKind {
        &self.kind
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        if let Some(&symbol) = word.iter().find(|&&s| s >= self.alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.alphabet_size,
            });
        }
        Ok(())
    }

    /// `p(ω_1 … ω_m)`.
    pub fn marginal_probability(&self, word: &[usize]) -> Result<f64> {
        self.check_word(word)?;
        Ok(self.word_probability(word))
    }

    fn word_probability(&self, word: &[usize]) -> f64 {
        match &self.kind {
            ProcessKind::Iid { weights } => word.iter().map(|&x| weights[x]).product(),
            ProcessKind::Markov {
                transition,
                initial,
            } => match word.split_first() {
                None => 1.0,
                Some((&first, rest)) => {
                    let mut p = initial[first];
                    let mut prev = first;
                    for &x in rest {
                        p *= transition.get(prev, x);
                        prev = x;
                    }
                    p
                }
            },
            ProcessKind::Mixture {
                components,
                weights,
            } => components
                .iter()
                .zip(weights)
                .map(|(c, w)| w * c.word_probability(word))
                .sum(),
        }
    }

    /// All word probabilities of length `m`, lexicographically indexed.
    pub fn measure_table(&self, m: usize) -> Result<MeasureTable> {
        let count = word_count(self.alphabet_size, m)?;
        let probs = match &self.kind {
            ProcessKind::Iid { weights } => {
                let mut probs = vec![1.0];
                for _ in 0..m {
                    probs = probs
                        .iter()
                        .flat_map(|&p| weights.iter().map(move |&w| p * w))
                        .collect();
                }
                probs
            }
            ProcessKind::Markov {
                transition,
                initial,
            } => {
                if m == 0 {
                    vec![1.0]
                } else {
                    let n = self.alphabet_size;
                    let mut probs = initial.clone();
                    for _ in 1..m {
                        let mut next = Vec::with_capacity(probs.len() * n);
                        for (idx, &p) in probs.iter().enumerate() {
                            let last = idx % n;
                            next.extend((0..n).map(|y| p * transition.get(last, y)));
                        }
                        probs = next;
                    }
                    probs
                }
            }
            ProcessKind::Mixture {
                components,
                weights,
            } => {
                let mut probs = vec![0.0; count];
                for (c, w) in components.iter().zip(weights) {
                    for (acc, p) in probs.iter_mut().zip(c.measure_table(m)?.probs) {
                        *acc += w * p;
                    }
                }
                probs
            }
        };
        Ok(MeasureTable {
            alphabet_size: self.alphabet_size,
            length: m,
            probs,
        })
    }

    /// Per-component view used by the transfer recursion: weight, initial law,
    /// and transition (iid components become memoryless chains).
    fn chains(&self) -> Vec<(f64, Vec<f64>, Transition)> {
        match &self.kind {
            ProcessKind::Iid { weights } => {
                let n = weights.len();
                let transition = Transition {
                    n,
                    entries: (0..n).flat_map(|_| weights.iter().copied()).collect(),
                };
                vec![(1.0, weights.clone(), transition)]
            }
            ProcessKind::Markov {
                transition,
                initial,
            } => vec![(1.0, initial.clone(), transition.clone())],
            ProcessKind::Mixture {
                components,
                weights,
            } => components
                .iter()
                .zip(weights)
                .flat_map(|(c, &w)| c.chains().into_iter().map(move |(cw, i, t)| (w * cw, i, t)))
                .collect(),
        }
    }

    /// `E[f(ω_1…ω_m) g(ω_{m+gap+1}…ω_{2m+gap})]` for `gap = 0..=max_gap`.
    ///
    /// `f` and `g` are tables over m-words. Block sums are done once; each
    /// further gap costs one vector–matrix product per chain component.
    pub fn correlation_sequence_complex(
        &self,
        f: &[Complex64],
        g: &[Complex64],
        m: usize,
        max_gap: usize,
    ) -> Result<Vec<Complex64>> {
        let count = word_count(self.alphabet_size, m)?;
        if m == 0 || f.len() != count || g.len() != count {
            return Err(Error::Shape(format!(
                "block functions need {count} entries for m = {m}"
            )));
        }
        let n = self.alphabet_size;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; max_gap + 1];
        for (weight, initial, transition) in self.chains() {
            // v[x] = Σ over words ending in x of p(word) f(word)
            // h[y] = Σ over words starting in y of p(word | y) g(word)
            let mut v = vec![zero; n];
            let mut h = vec![zero; n];
            let mut word = vec![0usize; m];
            for idx in 0..count {
                decode_word(idx, n, &mut word);
                let mut cond = 1.0;
                for pair in word.windows(2) {
                    cond *= transition.get(pair[0], pair[1]);
                }
                if cond == 0.0 {
                    continue;
                }
                v[word[m - 1]] += f[idx] * (initial[word[0]] * cond);
                h[word[0]] += g[idx] * cond;
            }
            let mut u = transition.propagate(&v);
            for slot in out.iter_mut() {
                let corr: Complex64 = u.iter().zip(&h).map(|(a, b)| a * b).sum();
                *slot += corr * weight;
                u = transition.propagate(&u);
            }
        }
        Ok(out)
    }

    /// Real-valued [`Self::correlation_sequence_complex`].
    pub fn correlation_sequence(
        &self,
        f: &[f64],
        g: &[f64],
        m: usize,
        max_gap: usize,
    ) -> Result<Vec<f64>> {
        let to_c = |x: &[f64]| {
            x.iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect::<Vec<_>>()
        };
        Ok(self
            .correlation_sequence_complex(&to_c(f), &to_c(g), m, max_gap)?
            .into_iter()
            .map(|z| z.re)
            .collect())
    }

    pub fn is_stationary(&self) -> bool {
        match &self.kind {
            ProcessKind::Iid { .. } => true,
            ProcessKind::Markov {
                transition,
                initial,
            } => {
                let next = transition.propagate(initial);
                next.iter()
                    .zip(initial)
                    .all(|(a, b)| (a - b).abs() <= TOL_STATIONARY)
            }
            ProcessKind::Mixture { components, .. } => components.iter().all(|c| c.is_stationary()),
        }
    }
}

fn word_count(alphabet_size: usize, m: usize) -> Result<usize> {
    let count = (alphabet_size as u128).saturating_pow(m as u32);
    if count > MAX_WORDS as u128 {
        return Err(Error::Resource {
            what: "word enumeration",
            requested: count,
            cap: MAX_WORDS as u128,
        });
    }
    Ok(count as usize)
}

pub(crate) fn decode_word(mut idx: usize, n: usize, word: &mut [usize]) {
    for slot in word.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
}

pub(crate) fn encode_word(word: &[usize], n: usize) -> usize {
    word.iter().fold(0, |acc, &x| acc * n + x)
}

pub fn marginal_probability(proc: &ClassicalProcess, word: &[usize]) -> Result<f64> {
    proc.marginal_probability(word)
}

/// `E[f(block) g(block shifted by m + gap)]` for a single gap.
pub fn classical_correlation(
    proc: &ClassicalProcess,
    f: &[f64],
    g: &[f64],
    m: usize,
    gap: usize,
) -> Result<f64> {
    Ok(proc.correlation_sequence(f, g, m, gap)?[gap])
}

/// Probabilities of all words of a fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    alphabet_size: usize,
    length: usize,
    probs: Vec<f64>,
}

impl MeasureTable {
    pub fn from_probs(alphabet_size: usize, length: usize, probs: Vec<f64>) -> Result<Self> {
        let count = word_count(alphabet_size, length)?;
        if probs.len() != count {
            return Err(Error::Shape(format!(
                "expected {count} word probabilities, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < -TOL_WEIGHTS) {
            return Err(Error::Validation(
                "measure has negative or non-finite entries".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("measure sums to {total}, not 1")));
        }
        Ok(Self {
            alphabet_size,
            length,
            probs,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, word: &[usize]) -> Result<f64> {
        if word.len() != self.length {
            return Err(Error::Shape(format!(
                "word of length {} in a length-{} table",
                word.len(),
                self.length
            )));
        }
        if let Some(&symbol) = word.iter().find(|&&s| s >= self.alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.alphabet_size,
            });
        }
        Ok(self.probs[encode_word(word, self.alphabet_size)])
    }

    /// `μ(A)` for a set of words given by index.
    pub fn measure_of(&self, words: &[usize]) -> f64 {
        words.iter().map(|&w| self.probs[w]).sum()
    }

    pub fn word(&self, index: usize) -> Vec<usize> {
        let mut word = vec![0; self.length];
        decode_word(index, self.alphabet_size, &mut word);
        word
    }

    /// Marginal on the first `length − suffix` symbols.
    pub fn drop_suffix(&self, suffix: usize) -> MeasureTable {
        let keep = self.length.saturating_sub(suffix);
        let block = self.alphabet_size.pow((self.length - keep) as u32);
        MeasureTable {
            alphabet_size: self.alphabet_size,
            length: keep,
            probs: self.probs.chunks(block).map(|c| c.iter().sum()).collect(),
        }
    }

    /// Marginal on the last `length − prefix` symbols.
    pub fn drop_prefix(&self, prefix: usize) -> MeasureTable {
        let keep = self.length.saturating_sub(prefix);
        let block = self.alphabet_size.pow(keep as u32);
        let mut probs = vec![0.0; block];
        for (i, p) in self.probs.iter().enumerate() {
            probs[i % block] += p;
        }
        MeasureTable {
            alphabet_size: self.alphabet_size,
            length: keep,
            probs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCheck {
    pub max_deviation: f64,
    /// Word with the largest deviation.
    pub worst_word: Vec<usize>,
    pub pass: bool,
}

/// Compares `expected` with a marginal `derived` of a longer table.
fn compare_tables(expected: &MeasureTable, derived: &MeasureTable, tol: f64) -> TableCheck {
    let (worst, max_deviation) = expected
        .probs
        .iter()
        .zip(&derived.probs)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold(
            (0, 0.0f64),
            |best, (i, d)| if d > best.1 { (i, d) } else { best },
        );
    TableCheck {
        max_deviation,
        worst_word: expected.word(worst),
        pass: max_deviation <= tol,
    }
}

/// Checks `μ_m(ω) = Σ_{suffix} μ_{m+i}(ω · suffix)` for every m-word.
pub fn check_table_consistency(short: &MeasureTable, long: &MeasureTable) -> Result<TableCheck> {
    if short.alphabet_size != long.alphabet_size || short.length > long.length {
        return Err(Error::Shape("tables are not comparable".into()));
    }
    Ok(compare_tables(
        short,
        &long.drop_suffix(long.length - short.length),
        1e-12,
    ))
}

/// Classical consistency for lengths `m` and `m + i`.
pub fn check_classical_consistency(
    proc: &ClassicalProcess,
    m: usize,
    i: usize,
) -> Result<TableCheck> {
    if m == 0 || i == 0 {
        return Err(Error::InvalidParameter("m and i must be positive".into()));
    }
    let long = proc.measure_table(m + i)?;
    check_table_consistency(&proc.measure_table(m)?, &long)
}

/// Shift invariance: the law of positions `i+1 … i+m` equals that of `1 … m`.
pub fn check_classical_stationarity(
    proc: &ClassicalProcess,
    m: usize,
    i: usize,
) -> Result<TableCheck> {
    if m == 0 || i == 0 {
        return Err(Error::InvalidParameter("m and i must be positive".into()));
    }
    let long = proc.measure_table(m + i)?;
    Ok(compare_tables(
        &proc.measure_table(m)?,
        &long.drop_prefix(i),
        1e-10,
    ))
}

/// Ergodic-theoretic type of the stationary measure of a process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub stationary: bool,
    pub ergodic: bool,
    pub weakly_mixing: bool,
    pub strongly_mixing: bool,
    pub reason: String,
}

impl Classification {
    fn new(stationary: bool, ergodic: bool, mixing: bool, reason: &str) -> Self {
        Self {
            stationary,
            ergodic,
            weakly_mixing: mixing,
            strongly_mixing: mixing,
            reason: reason.into(),
        }
    }
}

/// An ergodic component in canonical Markov form: stationary law and the
/// transition rows on its support.
#[derive(Debug, Clone)]
struct ErgodicComponent {
    pi: Vec<f64>,
    transition: Transition,
    aperiodic: bool,
}

impl ErgodicComponent {
    fn same_measure(&self, other: &Self) -> bool {
        let n = self.pi.len();
        if self
            .pi
            .iter()
            .zip(&other.pi)
            .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return false;
        }
        (0..n).filter(|&x| self.pi[x] > 0.0).all(|x| {
            (0..n).all(|y| (self.transition.get(x, y) - other.transition.get(x, y)).abs() <= 1e-12)
        })
    }
}

enum Decomposition {
    NotStationary,
    Components(Vec<ErgodicComponent>),
}

fn decompose(proc: &ClassicalProcess) -> Decomposition {
    if !proc.is_stationary() {
        return Decomposition::NotStationary;
    }
    match &proc.kind {
        ProcessKind::Iid { weights } => {
            let (_, _, transition) = proc.chains().remove(0);
            Decomposition::Components(vec![ErgodicComponent {
                pi: weights.clone(),
                transition,
                aperiodic: true,
            }])
        }
        ProcessKind::Markov {
            transition,
            initial,
        } => {
            // A stationary Markov measure splits over the closed classes its
            // initial law charges; transient states carry no mass.
            let mut parts = Vec::new();
            for class in transition.closed_classes() {
                let mass: f64 = class.iter().map(|&s| initial[s]).sum();
                if mass <= TOL_STATIONARY {
                    continue;
                }
                let pi = transition
                    .class_stationary(&class)
                    .unwrap_or_else(|| initial.clone());
                parts.push(ErgodicComponent {
                    pi,
                    transition: transition.clone(),
                    aperiodic: transition.period(&class) == 1,
                });
            }
            Decomposition::Components(parts)
        }
        ProcessKind::Mixture {
            components,
            weights,
        } => {
            let mut parts: Vec<ErgodicComponent> = Vec::new();
            for (c, &w) in components.iter().zip(weights) {
                if w == 0.0 {
                    continue;
                }
                match decompose(c) {
                    Decomposition::NotStationary => return Decomposition::NotStationary,
                    Decomposition::Components(sub) => {
                        for part in sub {
                            if !parts.iter().any(|p| p.same_measure(&part)) {
                                parts.push(part);
                            }
                        }
                    }
                }
            }
            Decomposition::Components(parts)
        }
    }
}

/// Classifies a process by standard finite-state ergodic theory.
///
/// A stationary finite Markov measure is ergodic iff it charges a single
/// closed class, and then weak mixing, strong mixing and aperiodicity of that
/// class coincide. Mixtures are ergodic only when all charged components
/// induce the same measure.
pub fn classify_process(proc: &ClassicalProcess) -> Classification {
    match decompose(proc) {
        Decomposition::NotStationary => {
            Classification::new(false, false, false, "initial law is not stationary")
        }
        Decomposition::Components(parts) => match parts.as_slice() {
            [single] if single.aperiodic => {
                Classification::new(true, true, true, "single aperiodic ergodic component")
            }
            [_] => Classification::new(true, true, false, "single periodic ergodic component"),
            _ => Classification::new(true, false, false, "several distinct ergodic components"),
        },
    }
}
