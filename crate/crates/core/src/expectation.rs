//! Conditional expectation onto the maximal abelian subalgebra diagonal in a
//! product basis, and the state/measure correspondence on that algebra.
//!
//! The expectation is the pinching `E(a) = Σ_ω ⟨ω|a|ω⟩ |ω⟩⟨ω|`. Because the
//! subalgebra is maximal abelian, the trace-compatibility factor is 1 and
//! the ordinary matrix trace is used throughout.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{decode_word, MeasureTable};
use crate::operator::{derive_seed, random_density, random_observable, DensityOperator, Operator};
use crate::{Error, Result};

/// Tolerance for the four expectation properties.
pub const TOL_EXPECTATION: f64 = 1e-10;

/// Orthonormal single-site basis `|e_1⟩ … |e_d⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingBasis {
    d: usize,
    vectors: Vec<Vec<Complex64>>,
    /// Columns are the basis vectors; `None` for the computational basis.
    change: Option<Operator>,
}

impl PinchingBasis {
    pub fn new(d: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        crate::operator::SiteConfig::new(d)?;
        if vectors.len() != d || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Shape(format!(
                "a basis of C^{d} needs {d} vectors of length {d}"
            )));
        }
        for i in 0..d {
            for j in 0..d {
                let inner: Complex64 = vectors[i]
                    .iter()
                    .zip(&vectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                if (inner - Complex64::new(expected, 0.0)).norm() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "basis vectors {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        let is_computational = vectors.iter().enumerate().all(|(i, v)| {
            v.iter()
                .enumerate()
                .all(|(j, z)| *z == Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
        });
        let change = if is_computational {
            None
        } else {
            let mut u = Operator::zeros(d, 1)?;
            for (c, v) in vectors.iter().enumerate() {
                for (r, &z) in v.iter().enumerate() {
                    u.set(r, c, z);
                }
            }
            Some(u)
        };
        Ok(Self { d, vectors, change })
    }

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

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    /// `U† a U` per site, taking `a` to coordinates of the product basis.
    fn to_basis(&self, a: &Operator) -> Result<Operator> {
        let Some(u) = &self.change else {
            return Ok(a.clone());
        };
        let mut out = a.clone();
        for site in 0..a.sites() {
            out = out
                .left_mul_local(u, site, true)?
                .right_mul_local(u, site, false)?;
        }
        Ok(out)
    }

    fn from_basis(&self, a: &Operator) -> Result<Operator> {
        let Some(u) = &self.change else {
            return Ok(a.clone());
        };
        let mut out = a.clone();
        for site in 0..a.sites() {
            out = out
                .left_mul_local(u, site, false)?
                .right_mul_local(u, site, true)?;
        }
        Ok(out)
    }

    fn check(&self, a: &Operator) -> Result<()> {
        if a.d() != self.d {
            return Err(Error::Shape(format!(
                "operator on dimension {} against a basis of dimension {}",
                a.d(),
                self.d
            )));
        }
        Ok(())
    }

    /// `⟨ω|a|ω⟩` for every product word ω.
    pub fn diagonal(&self, a: &Operator) -> Result<Vec<Complex64>> {
        self.check(a)?;
        let t = self.to_basis(a)?;
        Ok((0..t.dim()).map(|i| t.get(i, i)).collect())
    }

    /// `Σ_ω values[ω] |ω⟩⟨ω|` on `sites` sites.
    pub fn diagonal_operator(&self, sites: usize, values: &[Complex64]) -> Result<Operator> {
        let mut t = Operator::zeros(self.d, sites)?;
        if values.len() != t.dim() {
            return Err(Error::Shape(format!(
                "{} diagonal values for dimension {}",
                values.len(),
                t.dim()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            t.set(i, i, v);
        }
        self.from_basis(&t)
    }

    /// `|ω⟩` for a word over basis indices.
    pub fn word_vector(&self, word: &[usize]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for &x in word {
            out = crate::linalg::kron_vec(&out, &self.vectors[x]);
        }
        out
    }
}

/// Pinching of `a` onto the algebra diagonal in the product basis.
pub fn conditional_expectation(a: &Operator, basis: &PinchingBasis) -> Result<Operator> {
    let diag = basis.diagonal(a)?;
    basis.diagonal_operator(a.sites(), &diag)
}

/// Worst observed deviation per property, with pass flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationReport {
    pub trials: usize,
    /// Smallest eigenvalue of `E(a)` over PSD inputs (property a).
    pub positivity_min_eigenvalue: f64,
    /// `max |E(b) − b|` for `b` in the subalgebra (property b).
    pub fixed_point_deviation: f64,
    /// `max |E(ab) − E(a) b|` for `b` in the subalgebra (property c).
    pub module_deviation: f64,
    /// `max |tr a − tr E(a)|` (property d, prefactor 1).
    pub trace_deviation: f64,
    /// `max |E(E(a)) − E(a)|`.
    pub idempotence_deviation: f64,
    pub pass: bool,
}

/// Random subalgebra element `Σ_ω c_ω |ω⟩⟨ω|` with Gaussian-free uniform
/// coefficients in `[-1, 1]`.
fn random_diagonal(basis: &PinchingBasis, sites: usize, seed: u64) -> Result<Operator> {
    let dim = crate::operator::dense_dim(basis.d, sites)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect();
    basis.diagonal_operator(sites, &values)
}

/// Checks positivity, fixed points, the module property, trace
/// compatibility and idempotence on `trials` random inputs of `sites` sites.
pub fn verify_expectation_properties(
    basis: &PinchingBasis,
    sites: usize,
    trials: usize,
    seed: u64,
) -> Result<ExpectationReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter(
            "at least one trial is required".into(),
        ));
    }
    let d = basis.d;
    let mut report = ExpectationReport {
        trials,
        positivity_min_eigenvalue: f64::INFINITY,
        fixed_point_deviation: 0.0,
        module_deviation: 0.0,
        trace_deviation: 0.0,
        idempotence_deviation: 0.0,
        pass: false,
    };
    for t in 0..trials as u64 {
        let rho = random_density(d, sites, derive_seed(seed, 5 * t))?.into_operator();
        let e_rho = conditional_expectation(&rho, basis)?;
        let min_eig = e_rho
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0);
        report.positivity_min_eigenvalue = report.positivity_min_eigenvalue.min(min_eig);

        let b = random_diagonal(basis, sites, derive_seed(seed, 5 * t + 1))?;
        report.fixed_point_deviation = report
            .fixed_point_deviation
            .max(conditional_expectation(&b, basis)?.max_abs_diff(&b)?);

        let a = random_observable(d, sites, derive_seed(seed, 5 * t + 2))?.add(
            &random_observable(d, sites, derive_seed(seed, 5 * t + 3))?
                .scale(Complex64::new(0.0, 1.0)),
        )?;
        let e_a = conditional_expectation(&a, basis)?;
        let lhs = conditional_expectation(&a.matmul(&b)?, basis)?;
        report.module_deviation = report
            .module_deviation
            .max(lhs.max_abs_diff(&e_a.matmul(&b)?)?);
        report.trace_deviation = report.trace_deviation.max((a.trace() - e_a.trace()).norm());
        report.idempotence_deviation = report
            .idempotence_deviation
            .max(conditional_expectation(&e_a, basis)?.max_abs_diff(&e_a)?);
    }
    report.pass = report.positivity_min_eigenvalue >= -TOL_EXPECTATION
        && report.fixed_point_deviation <= TOL_EXPECTATION
        && report.module_deviation <= TOL_EXPECTATION
        && report.trace_deviation <= TOL_EXPECTATION
        && report.idempotence_deviation <= TOL_EXPECTATION;
    Ok(report)
}

/// `μ(ω) = ⟨ω|ρ|ω⟩` over all product words.
pub fn state_to_measure(rho: &DensityOperator, basis: &PinchingBasis) -> Result<MeasureTable> {
    let diag = basis.diagonal(rho.as_operator())?;
    MeasureTable::from_probs(basis.d, rho.sites(), diag.iter().map(|z| z.re).collect())
}

/// `Σ_ω μ(ω) |ω⟩⟨ω|`.
pub fn measure_to_state(mu: &MeasureTable, basis: &PinchingBasis) -> Result<DensityOperator> {
    if mu.alphabet_size() != basis.d {
        return Err(Error::Shape(format!(
            "measure over {} symbols for a basis of dimension {}",
            mu.alphabet_size(),
            basis.d
        )));
    }
    let values: Vec<Complex64> = mu.probs().iter().map(|&p| Complex64::new(p, 0.0)).collect();
    DensityOperator::new(basis.diagonal_operator(mu.length(), &values)?)
}

/// `Σ_{ω ∈ words} |ω⟩⟨ω|`, a projector in the abelian algebra.
pub fn word_projector(basis: &PinchingBasis, sites: usize, words: &[usize]) -> Result<Operator> {
    let dim = crate::operator::dense_dim(basis.d, sites)?;
    let mut values = vec![Complex64::new(0.0, 0.0); dim];
    for &w in words {
        if w >= dim {
            return Err(Error::InvalidParameter(format!(
                "word index {w} out of range"
            )));
        }
        values[w] = Complex64::new(1.0, 0.0);
    }
    basis.diagonal_operator(sites, &values)
}

/// Basis word for a lexicographic index.
pub fn word_of(basis: &PinchingBasis, sites: usize, index: usize) -> Vec<usize> {
    let mut word = vec![0; sites];
    decode_word(index, basis.d, &mut word);
    word
}
