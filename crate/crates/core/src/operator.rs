//! Dense operators on blocks of lattice sites.
//!
//! Site 1 is the leftmost Kronecker factor, so an operator on sites
//! `1..=m` has row index `(x_1, …, x_m)` read as a base-`d` number with `x_1`
//! most significant.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg;
use crate::{Error, Result};

/// Hermiticity tolerance for density operators.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Trace tolerance for density operators.
pub const TOL_TRACE: f64 = 1e-10;
/// Largest admissible negative eigenvalue for density operators.
pub const TOL_PSD: f64 = 1e-10;

/// Default cap on the side length of any dense matrix: twelve qubits.
pub const DEFAULT_MAX_DENSE_DIM: usize = 1 << 12;

static MAX_DENSE_DIM: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DENSE_DIM);

/// Current cap on dense matrix side length.
pub fn max_dense_dim() -> usize {
    MAX_DENSE_DIM.load(Ordering::Relaxed)
}

/// Overrides the dense cap for the whole process.
pub fn set_max_dense_dim(dim: usize) {
    MAX_DENSE_DIM.store(dim.max(1), Ordering::Relaxed);
}

/// `d^sites`, checked against overflow and the dense cap.
pub fn dense_dim(d: usize, sites: usize) -> Result<usize> {
    let cap = max_dense_dim();
    let mut dim: u128 = 1;
    for _ in 0..sites {
        dim = dim.saturating_mul(d as u128);
        if dim > cap as u128 {
            return Err(Error::Resource {
                what: "dense operator dimension",
                requested: (d as u128).saturating_pow(sites as u32),
                cap: cap as u128,
            });
        }
    }
    Ok(dim as usize)
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-site Hilbert space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteConfig {
    d: usize,
}

impl SiteConfig {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "site dimension must be at least 2, got {d}"
            )));
        }
        Ok(Self { d })
    }

    pub fn qubit() -> Self {
        Self { d: 2 }
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// Square complex matrix acting on `sites` consecutive sites of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    d: usize,
    sites: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

impl Operator {
    /// Builds an operator from row-major entries; the length must be
    /// `(d^sites)^2` and every entry finite.
    pub fn from_entries(d: usize, sites: usize, entries: Vec<Complex64>) -> Result<Self> {
        SiteConfig::new(d)?;
        let dim = dense_dim(d, sites)?;
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for {sites} site(s) of dimension {d}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Validation("operator has non-finite entries".into()));
        }
        Ok(Self {
            d,
            sites,
            dim,
            entries,
        })
    }

    /// Builds an operator from rows, inferring the site count from the size.
    pub fn from_rows(d: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let sites = sites_for_dim(d, dim)?;
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape(
                "matrix rows must all have the same length as the row count".into(),
            ));
        }
        Self::from_entries(d, sites, rows.iter().flatten().copied().collect())
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(d: usize, rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(d, &rows)
    }

    pub fn zeros(d: usize, sites: usize) -> Result<Self> {
        let dim = dense_dim(d, sites)?;
        Self::from_entries(d, sites, vec![ZERO; dim * dim])
    }

    pub fn identity(d: usize, sites: usize) -> Result<Self> {
        let mut out = Self::zeros(d, sites)?;
        for i in 0..out.dim {
            out.entries[i * out.dim + i] = ONE;
        }
        Ok(out)
    }

    /// Diagonal operator with the given real diagonal.
    pub fn diag(d: usize, values: &[f64]) -> Result<Self> {
        let sites = sites_for_dim(d, values.len())?;
        let mut out = Self::zeros(d, sites)?;
        for (i, &v) in values.iter().enumerate() {
            out.entries[i * out.dim + i] = Complex64::new(v, 0.0);
        }
        Ok(out)
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(d: usize, ket: &[Complex64], bra: &[Complex64]) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::Shape("ket and bra lengths differ".into()));
        }
        let sites = sites_for_dim(d, ket.len())?;
        let entries = ket
            .iter()
            .flat_map(|&k| bra.iter().map(move |&b| k * b.conj()))
            .collect();
        Self::from_entries(d, sites, entries)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(d: usize, ket: &[Complex64]) -> Result<Self> {
        Self::outer(d, ket, ket)
    }

    /// `|j⟩⟨j|` on a single site.
    pub fn basis_projector(d: usize, j: usize) -> Result<Self> {
        if j >= d {
            return Err(Error::InvalidParameter(format!(
                "basis index {j} out of range for d = {d}"
            )));
        }
        let mut out = Self::zeros(d, 1)?;
        out.entries[j * d + j] = ONE;
        Ok(out)
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(2, &[&[0.0, 1.0], &[1.0, 0.0]]).expect("static shape")
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::from_entries(2, 1, vec![ZERO, -i, i, ZERO]).expect("static shape")
    }

    pub fn pauli_z() -> Self {
        Self::diag(2, &[1.0, -1.0]).expect("static shape")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                entries[c * n + r] = self.entries[r * n + c].conj();
            }
        }
        Self { entries, ..*self }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|&z| z * factor).collect(),
            ..*self
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.sites != other.sites {
            return Err(Error::Shape(format!(
                "operator on {} site(s) of dimension {} vs {} site(s) of dimension {}",
                self.sites, self.d, other.sites, other.d
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            ..*self
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
            ..*self
        })
    }

    /// `self += factor · other`.
    pub fn add_scaled_assign(&mut self, factor: Complex64, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for r in 0..n {
            let out_row = &mut entries[r * n..(r + 1) * n];
            for k in 0..n {
                let x = self.entries[r * n + k];
                if x == ZERO {
                    continue;
                }
                let other_row = &other.entries[k * n..(k + 1) * n];
                for (o, &y) in out_row.iter_mut().zip(other_row) {
                    *o += x * y;
                }
            }
        }
        Ok(Self { entries, ..*self })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |A_rc - conj(A_cr)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst =
                    worst.max((self.entries[r * n + c] - self.entries[c * n + r].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(self.dim, &self.entries)
    }

    /// Spectral norm, `sqrt(λ_max(A†A))`.
    pub fn operator_norm(&self) -> f64 {
        if self.is_hermitian(0.0) {
            let eig = self.hermitian_eigenvalues();
            return eig
                .first()
                .map_or(0.0, |lo| lo.abs())
                .max(eig.last().map_or(0.0, |hi| hi.abs()));
        }
        let gram = self.adjoint().matmul(self).expect("same shape");
        gram.hermitian_eigenvalues()
            .last()
            .map_or(0.0, |&x| x.max(0.0).sqrt())
    }

    /// `⟨ψ|A|ψ⟩` for a vector of length `dim`.
    pub fn expectation_in(&self, ket: &[Complex64]) -> Complex64 {
        let n = self.dim;
        debug_assert_eq!(ket.len(), n);
        let mut acc = ZERO;
        for r in 0..n {
            if ket[r] == ZERO {
                continue;
            }
            let row = &self.entries[r * n..(r + 1) * n];
            let inner: Complex64 = row.iter().zip(ket).map(|(a, k)| a * k).sum();
            acc += ket[r].conj() * inner;
        }
        acc
    }

    /// `(I^{⊗offset} ⊗ op ⊗ I) · self`, or with `op†` when `adjoint` is set.
    ///
    /// Runs in `O(dim² · op.dim)` without materializing the padded operator.
    pub fn left_mul_local(&self, op: &Operator, offset: usize, adjoint: bool) -> Result<Self> {
        let (left, block, right) = self.local_layout(op, offset)?;
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for l in 0..left {
            for x in 0..block {
                for y in 0..block {
                    let coef = if adjoint {
                        op.entries[y * block + x].conj()
                    } else {
                        op.entries[x * block + y]
                    };
                    if coef == ZERO {
                        continue;
                    }
                    for r in 0..right {
                        let out_row = ((l * block + x) * right + r) * n;
                        let in_row = ((l * block + y) * right + r) * n;
                        let (src, dst) = (
                            &self.entries[in_row..in_row + n],
                            &mut entries[out_row..out_row + n],
                        );
                        for (o, &v) in dst.iter_mut().zip(src) {
                            *o += coef * v;
                        }
                    }
                }
            }
        }
        Ok(Self { entries, ..*self })
    }

    /// `self · (I^{⊗offset} ⊗ op ⊗ I)`, or with `op†` when `adjoint` is set.
    pub fn right_mul_local(&self, op: &Operator, offset: usize, adjoint: bool) -> Result<Self> {
        let (left, block, right) = self.local_layout(op, offset)?;
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for row in 0..n {
            let src_row = &self.entries[row * n..(row + 1) * n];
            let dst_row = &mut entries[row * n..(row + 1) * n];
            for l in 0..left {
                for y in 0..block {
                    for x in 0..block {
                        // (M B)[row, (l,x,r)] = Σ_y M[row, (l,y,r)] B[y, x]
                        let coef = if adjoint {
                            op.entries[x * block + y].conj()
                        } else {
                            op.entries[y * block + x]
                        };
                        if coef == ZERO {
                            continue;
                        }
                        let src = (l * block + y) * right;
                        let dst = (l * block + x) * right;
                        for r in 0..right {
                            dst_row[dst + r] += coef * src_row[src + r];
                        }
                    }
                }
            }
        }
        Ok(Self { entries, ..*self })
    }

    fn local_layout(&self, op: &Operator, offset: usize) -> Result<(usize, usize, usize)> {
        if op.d != self.d || offset + op.sites > self.sites {
            return Err(Error::Shape(format!(
                "local operator on {} site(s) at offset {offset} does not fit {} site(s)",
                op.sites, self.sites
            )));
        }
        let left = self.d.pow(offset as u32);
        let right = self.dim / (left * op.dim);
        Ok((left, op.dim, right))
    }
}

fn sites_for_dim(d: usize, dim: usize) -> Result<usize> {
    SiteConfig::new(d)?;
    let mut sites = 0;
    let mut acc = 1usize;
    while acc < dim {
        acc *= d;
        sites += 1;
    }
    if acc != dim || dim == 0 {
        return Err(Error::Shape(format!(
            "dimension {dim} is not a power of d = {d}"
        )));
    }
    Ok(sites)
}

/// Kronecker product `a ⊗ b`, with `a` on the lower site indices.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.d != b.d {
        return Err(Error::Shape(format!(
            "site dimensions {} and {} differ",
            a.d, b.d
        )));
    }
    let sites = a.sites + b.sites;
    dense_dim(a.d, sites)?;
    let entries = linalg::kron(a.dim, &a.entries, b.dim, &b.entries);
    Operator::from_entries(a.d, sites, entries)
}

/// `op^{⊗copies}`.
pub fn tensor_power(op: &Operator, copies: usize) -> Result<Operator> {
    let mut out = Operator::identity(op.d, 0)?;
    for _ in 0..copies {
        out = tensor_product(&out, op)?;
    }
    Ok(out)
}

/// `I^{⊗left} ⊗ a ⊗ I^{⊗right}`.
pub fn embed_observable(a: &Operator, left: usize, right: usize) -> Result<Operator> {
    dense_dim(a.d, left + a.sites + right)?;
    let mut out = a.clone();
    if left > 0 {
        out = tensor_product(&Operator::identity(a.d, left)?, &out)?;
    }
    if right > 0 {
        out = tensor_product(&out, &Operator::identity(a.d, right)?)?;
    }
    Ok(out)
}

/// `tr(a b)` in `O(dim²)`.
pub fn trace_product(a: &Operator, b: &Operator) -> Result<Complex64> {
    a.check_same_shape(b)?;
    let n = a.dim;
    let mut acc = ZERO;
    for r in 0..n {
        for c in 0..n {
            acc += a.entries[r * n + c] * b.entries[c * n + r];
        }
    }
    Ok(acc)
}

/// `tr(ρ a)`, the expectation of `a` in the state `ρ`.
pub fn trace_pairing(rho: &DensityOperator, a: &Operator) -> Result<Complex64> {
    trace_product(&rho.op, a)
}

/// Outcome of [`validate_density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
    pub pass: bool,
}

pub fn validate_density(op: &Operator) -> DensityReport {
    let hermitian_deviation = op.hermitian_deviation();
    let min_eigenvalue = op.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
    let trace_deviation = (op.trace() - ONE).norm();
    let finite = hermitian_deviation.is_finite()
        && min_eigenvalue.is_finite()
        && trace_deviation.is_finite();
    DensityReport {
        hermitian_deviation,
        min_eigenvalue,
        trace_deviation,
        pass: finite
            && hermitian_deviation <= TOL_HERMITIAN
            && min_eigenvalue >= -TOL_PSD
            && trace_deviation <= TOL_TRACE,
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    /// Validates `op` against the density tolerances.
    pub fn new(op: Operator) -> Result<Self> {
        let report = validate_density(&op);
        if !report.pass {
            return Err(Error::Validation(format!(
                "not a density operator: hermitian deviation {:.3e}, min eigenvalue {:.3e}, trace deviation {:.3e}",
                report.hermitian_deviation, report.min_eigenvalue, report.trace_deviation
            )));
        }
        Ok(Self { op })
    }

    /// Wraps an operator that is a density operator by construction.
    pub(crate) fn trusted(op: Operator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(d: usize, sites: usize) -> Result<Self> {
        let id = Operator::identity(d, sites)?;
        let dim = id.dim as f64;
        Ok(Self {
            op: id.scale_real(1.0 / dim),
        })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(d: usize, ket: &[Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("state vector has norm {norm}")));
        }
        Ok(Self {
            op: Operator::projector(d, ket)?,
        })
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn sites(&self) -> usize {
        self.op.sites
    }

    pub fn d(&self) -> usize {
        self.op.d
    }

    pub fn dim(&self) -> usize {
        self.op.dim
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            op: tensor_product(&self.op, &other.op)?,
        })
    }

    pub fn power(&self, copies: usize) -> Result<Self> {
        Ok(Self {
            op: tensor_power(&self.op, copies)?,
        })
    }
}

/// Derives an independent 64-bit seed for stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n * n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// Seeded random Hermitian observable with unit operator norm.
pub fn random_observable(d: usize, sites: usize, seed: u64) -> Result<Operator> {
    random_observable_scaled(d, sites, seed, 1.0)
}

/// Seeded random Hermitian observable `(G + G†)/2` normalized to operator
/// norm `scale`, with `G` a complex Gaussian matrix.
pub fn random_observable_scaled(d: usize, sites: usize, seed: u64, scale: f64) -> Result<Operator> {
    let dim = dense_dim(d, sites)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Operator::from_entries(d, sites, gaussian_matrix(&mut rng, dim))?;
    let mut h = g.add(&g.adjoint())?.scale_real(0.5);
    // Force exact Hermiticity: diagonal real, lower triangle mirrors upper.
    for r in 0..dim {
        h.entries[r * dim + r].im = 0.0;
        for c in 0..r {
            h.entries[r * dim + c] = h.entries[c * dim + r].conj();
        }
    }
    let norm = h.operator_norm();
    Ok(if norm > 0.0 {
        h.scale_real(scale / norm)
    } else {
        h
    })
}

/// Seeded random density operator `G G† / tr(G G†)`.
pub fn random_density(d: usize, sites: usize, seed: u64) -> Result<DensityOperator> {
    let dim = dense_dim(d, sites)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Operator::from_entries(d, sites, gaussian_matrix(&mut rng, dim))?;
    let mut gg = g.matmul(&g.adjoint())?;
    for r in 0..dim {
        gg.entries[r * dim + r].im = 0.0;
        for c in 0..r {
            gg.entries[r * dim + c] = gg.entries[c * dim + r].conj();
        }
    }
    let tr = gg.trace().re;
    Ok(DensityOperator::trusted(gg.scale_real(1.0 / tr)))
}

/// Seeded Haar-random unitary on `sites` sites (QR of a Gaussian matrix with
/// the phase convention that makes the distribution Haar).
pub fn random_unitary(d: usize, sites: usize, seed: u64) -> Result<Operator> {
    let n = dense_dim(d, sites)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian_matrix(&mut rng, n);
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|c| (0..n).map(|r| g[r * n + c]).collect())
        .collect();
    for c in 0..n {
        for prev in 0..c {
            let overlap: Complex64 = cols[prev]
                .iter()
                .zip(&cols[c])
                .map(|(p, v)| p.conj() * v)
                .sum();
            let p = cols[prev].clone();
            for (v, q) in cols[c].iter_mut().zip(&p) {
                *v -= overlap * q;
            }
        }
        let norm = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for v in cols[c].iter_mut() {
            *v /= norm;
        }
    }
    let mut entries = vec![ZERO; n * n];
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            entries[r * n + c] = v;
        }
    }
    Operator::from_entries(d, sites, entries)
}
