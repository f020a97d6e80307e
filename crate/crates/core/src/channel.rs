//! Kraus channels and their memoryless tensor powers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

use crate::expectation::PinchingBasis;
use crate::operator::{dense_dim, tensor_product, DensityOperator, Operator};
use crate::source::AlphabetSpec;
use crate::{Error, Result};

/// Completeness tolerance on `‖Σ A†A − I‖_maxabs`.
pub const TOL_COMPLETENESS: f64 = 1e-10;

/// Cap on the number of Kraus operators produced by [`block_channel`].
pub const MAX_BLOCK_KRAUS: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausReport {
    /// Max-abs entry of `Σ A†A − I`.
    pub deviation: f64,
    pub pass: bool,
}

/// Checks the completeness relation `Σ A†A = I` for a raw Kraus set.
pub fn validate_kraus(ops: &[Operator]) -> Result<KrausReport> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Shape("Kraus set is empty".into()))?;
    if ops
        .iter()
        .any(|a| a.d() != first.d() || a.sites() != first.sites())
    {
        return Err(Error::Shape("Kraus operators have mixed dimensions".into()));
    }
    let mut sum = Operator::zeros(first.d(), first.sites())?;
    for a in ops {
        sum = sum.add(&a.adjoint().matmul(a)?)?;
    }
    let deviation = sum.max_abs_diff(&Operator::identity(first.d(), first.sites())?)?;
    Ok(KrausReport {
        deviation,
        pass: deviation <= TOL_COMPLETENESS,
    })
}

/// Trace-preserving completely positive map `ρ ↦ Σ A_i ρ A_i†` acting on a
/// block of `block_size` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Operator>,
    block_size: usize,
}

impl KrausChannel {
    /// Builds a channel, rejecting Kraus sets that are not trace preserving.
    pub fn new(ops: Vec<Operator>) -> Result<Self> {
        let report = validate_kraus(&ops)?;
        if !report.pass {
            return Err(Error::Validation(format!(
                "Kraus set is not trace preserving: |ΣA†A - I| = {:.3e}",
                report.deviation
            )));
        }
        let block_size = ops[0].sites();
        if block_size == 0 {
            return Err(Error::Shape(
                "Kraus operators must act on at least one site".into(),
            ));
        }
        Ok(Self { ops, block_size })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(vec![Operator::identity(d, 1)?])
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn d(&self) -> usize {
        self.ops[0].d()
    }

    pub fn report(&self) -> KrausReport {
        validate_kraus(&self.ops).expect("shape checked at construction")
    }

    fn check_copies(&self, op: &Operator, copies: usize) -> Result<()> {
        if op.d() != self.d() {
            return Err(Error::Shape(format!(
                "channel acts on dimension {}, operator on dimension {}",
                self.d(),
                op.d()
            )));
        }
        if op.sites() != copies * self.block_size {
            return Err(Error::Shape(format!(
                "{} copies of a {}-site channel need {} sites, operator has {}",
                copies,
                self.block_size,
                copies * self.block_size,
                op.sites()
            )));
        }
        Ok(())
    }

    /// Schrödinger picture `ℰ^{⊗copies}` on an arbitrary operator, one block
    /// at a time.
    pub fn apply_operator(&self, op: &Operator, copies: usize) -> Result<Operator> {
        self.check_copies(op, copies)?;
        let mut current = op.clone();
        for block in 0..copies {
            let offset = block * self.block_size;
            let mut next = Operator::zeros(op.d(), op.sites())?;
            for a in &self.ops {
                let term = current
                    .left_mul_local(a, offset, false)?
                    .right_mul_local(a, offset, true)?;
                next.add_scaled_assign(Complex64::new(1.0, 0.0), &term)?;
            }
            current = next;
        }
        Ok(current)
    }

    pub fn apply(&self, rho: &DensityOperator, copies: usize) -> Result<DensityOperator> {
        Ok(DensityOperator::trusted(
            self.apply_operator(rho.as_operator(), copies)?,
        ))
    }

    /// Literal operator-sum: materializes every Kraus tuple
    /// `A_{j1} ⊗ … ⊗ A_{jm}` and sums `K ρ K†`. Exponential in `copies`.
    pub fn apply_exhaustive(
        &self,
        rho: &DensityOperator,
        copies: usize,
    ) -> Result<DensityOperator> {
        let op = rho.as_operator();
        self.check_copies(op, copies)?;
        let count = self.ops.len();
        let tuples = (count as u128).saturating_pow(copies as u32);
        if tuples > MAX_BLOCK_KRAUS as u128 {
            return Err(Error::Resource {
                what: "Kraus tuples",
                requested: tuples,
                cap: MAX_BLOCK_KRAUS as u128,
            });
        }
        let mut out = Operator::zeros(op.d(), op.sites())?;
        let mut index = vec![0usize; copies];
        loop {
            let mut k = Operator::identity(op.d(), 0)?;
            for &j in &index {
                k = tensor_product(&k, &self.ops[j])?;
            }
            let term = k.matmul(op)?.matmul(&k.adjoint())?;
            out.add_scaled_assign(Complex64::new(1.0, 0.0), &term)?;
            if !advance(&mut index, count) {
                break;
            }
        }
        Ok(DensityOperator::trusted(out))
    }

    /// Heisenberg picture `ã = Σ K† a K` over all Kraus tuples, one block at a
    /// time. Satisfies `tr(ℰ^{⊗m}(ρ) a) = tr(ρ ã)`.
    pub fn dual(&self, a: &Operator, copies: usize) -> Result<Operator> {
        self.check_copies(a, copies)?;
        let mut current = a.clone();
        for block in 0..copies {
            let offset = block * self.block_size;
            let mut next = Operator::zeros(a.d(), a.sites())?;
            for k in &self.ops {
                let term = current
                    .left_mul_local(k, offset, true)?
                    .right_mul_local(k, offset, false)?;
                next.add_scaled_assign(Complex64::new(1.0, 0.0), &term)?;
            }
            current = next;
        }
        Ok(current)
    }

    /// The channel `ℰ^{⊗k}` viewed as a single channel on blocks of
    /// `k · block_size` sites.
    pub fn block(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "block size must be at least 1".into(),
            ));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let count = (self.ops.len() as u128).saturating_pow(k as u32);
        if count > MAX_BLOCK_KRAUS as u128 {
            return Err(Error::Resource {
                what: "block channel Kraus operators",
                requested: count,
                cap: MAX_BLOCK_KRAUS as u128,
            });
        }
        dense_dim(self.d(), self.block_size * k)?;
        let mut ops = self.ops.clone();
        for _ in 1..k {
            let mut next = Vec::with_capacity(ops.len() * self.ops.len());
            for prefix in &ops {
                for a in &self.ops {
                    next.push(tensor_product(prefix, a)?);
                }
            }
            ops = next;
        }
        Ok(Self {
            ops,
            block_size: self.block_size * k,
        })
    }
}

fn advance(index: &mut [usize], base: usize) -> bool {
    for slot in index.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

pub fn apply_channel(
    channel: &KrausChannel,
    rho: &DensityOperator,
    copies: usize,
) -> Result<DensityOperator> {
    channel.apply(rho, copies)
}

pub fn dual_channel(channel: &KrausChannel, a: &Operator, copies: usize) -> Result<Operator> {
    channel.dual(a, copies)
}

pub fn block_channel(channel: &KrausChannel, k: usize) -> Result<KrausChannel> {
    channel.block(k)
}

/// Built-in channel families.
#[derive(Debug, Clone, PartialEq)]
pub enum StandardChannel {
    Identity {
        d: usize,
    },
    /// `ρ ↦ (1 − p) ρ + p I/d`.
    Depolarizing {
        d: usize,
        p: f64,
    },
    /// Qubit decay `|1⟩ → |0⟩` with probability `gamma`.
    AmplitudeDamping {
        gamma: f64,
    },
    /// Qubit dephasing; off-diagonals scale by `sqrt(1 − lambda)`.
    PhaseDamping {
        lambda: f64,
    },
    Unitary(Operator),
    /// `A_i = |ψ_i⟩⟨e_i|`, mapping each basis state to an alphabet state.
    /// Basis states past the alphabet length are left in place.
    Embedding {
        alphabet: AlphabetSpec,
        basis: PinchingBasis,
    },
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

impl StandardChannel {
    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            Self::Identity { d } => KrausChannel::identity(*d),
            Self::Depolarizing { d, p } => depolarizing(*d, *p),
            Self::AmplitudeDamping { gamma } => {
                check_probability("gamma", *gamma)?;
                let k0 = Operator::from_real_rows(2, &[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]])?;
                let k1 = Operator::from_real_rows(2, &[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?;
                KrausChannel::new(vec![k0, k1])
            }
            Self::PhaseDamping { lambda } => {
                check_probability("lambda", *lambda)?;
                let k0 =
                    Operator::from_real_rows(2, &[&[1.0, 0.0], &[0.0, (1.0 - lambda).sqrt()]])?;
                let k1 = Operator::from_real_rows(2, &[&[0.0, 0.0], &[0.0, lambda.sqrt()]])?;
                KrausChannel::new(vec![k0, k1])
            }
            Self::Unitary(u) => {
                if u.sites() != 1 {
                    return Err(Error::InvalidParameter(
                        "unitary channel must act on one site".into(),
                    ));
                }
                let dev = u
                    .adjoint()
                    .matmul(u)?
                    .max_abs_diff(&Operator::identity(u.d(), 1)?)?;
                if dev > TOL_COMPLETENESS {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not unitary: |U†U - I| = {dev:.3e}"
                    )));
                }
                KrausChannel::new(vec![u.clone()])
            }
            Self::Embedding { alphabet, basis } => {
                let d = basis.d();
                if alphabet.d() != d {
                    return Err(Error::InvalidAlphabet(format!(
                        "alphabet lives in dimension {}, basis in dimension {d}",
                        alphabet.d()
                    )));
                }
                let mut ops = Vec::with_capacity(d);
                for (i, e) in basis.vectors().iter().enumerate() {
                    let target = alphabet.vectors().get(i).unwrap_or(e);
                    ops.push(Operator::outer(d, target, e)?);
                }
                KrausChannel::new(ops)
            }
        }
    }
}

pub fn make_standard_channel(kind: &StandardChannel) -> Result<KrausChannel> {
    kind.build()
}

fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    if p == 0.0 {
        return KrausChannel::identity(d);
    }
    if d == 2 {
        let id = Operator::identity(2, 1)?;
        let w0 = (1.0 - 0.75 * p).sqrt();
        let w = (p / 4.0).sqrt();
        return KrausChannel::new(vec![
            id.scale_real(w0),
            Operator::pauli_x().scale_real(w),
            Operator::pauli_y().scale_real(w),
            Operator::pauli_z().scale_real(w),
        ]);
    }
    // Weyl operators X^a Z^b form a unitary error basis; uniform twirling
    // over them is the completely depolarizing map.
    let omega = |k: usize| {
        let phase = 2.0 * core::f64::consts::PI * (k % d) as f64 / d as f64;
        Complex64::new(phase.cos(), phase.sin())
    };
    let d2 = (d * d) as f64;
    let mut ops = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let weight = if a == 0 && b == 0 {
                1.0 - p + p / d2
            } else {
                p / d2
            };
            if weight == 0.0 {
                continue;
            }
            let mut w = Operator::zeros(d, 1)?;
            // (X^a Z^b)|j⟩ = ω^{bj} |j + a⟩
            for j in 0..d {
                w.set((j + a) % d, j, omega(b * j) * weight.sqrt());
            }
            ops.push(w);
        }
    }
    KrausChannel::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_density, random_observable, trace_pairing, validate_density};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn validate_kraus_examples() {
        let id = Operator::identity(2, 1).unwrap();
        assert!(validate_kraus(&[id.clone()]).unwrap().pass);
        let dep = StandardChannel::Depolarizing { d: 2, p: 0.5 }
            .build()
            .unwrap();
        assert!(dep.report().pass);
        let half = validate_kraus(&[id.scale_real(0.5)]).unwrap();
        assert!(!half.pass);
        assert!((half.deviation - 0.75).abs() < 1e-15);
        assert!(matches!(
            KrausChannel::new(vec![id.scale_real(0.5)]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn validate_kraus_shape_errors() {
        assert!(matches!(validate_kraus(&[]), Err(Error::Shape(_))));
        let mixed = [
            Operator::identity(2, 1).unwrap(),
            Operator::identity(2, 2).unwrap(),
        ];
        assert!(matches!(validate_kraus(&mixed), Err(Error::Shape(_))));
    }

    #[test]
    fn identity_channel_is_exact() {
        let rho = random_density(2, 3, 1).unwrap();
        let out = KrausChannel::identity(2).unwrap().apply(&rho, 3).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn full_depolarizing_gives_maximally_mixed() {
        let ch = StandardChannel::Depolarizing { d: 2, p: 1.0 }
            .build()
            .unwrap();
        let rho = random_density(2, 1, 7).unwrap();
        let out = ch.apply(&rho, 1).unwrap();
        let mixed = DensityOperator::maximally_mixed(2, 1).unwrap();
        assert!(out.as_operator().max_abs_diff(mixed.as_operator()).unwrap() < 1e-15);
    }

    #[test]
    fn qutrit_depolarizing_matches_convention() {
        let p = 0.4;
        let ch = StandardChannel::Depolarizing { d: 3, p }.build().unwrap();
        assert!(ch.report().pass);
        let rho = random_density(3, 1, 2).unwrap();
        let out = ch.apply(&rho, 1).unwrap();
        let expected = rho
            .as_operator()
            .scale_real(1.0 - p)
            .add(&Operator::identity(3, 1).unwrap().scale_real(p / 3.0))
            .unwrap();
        assert!(out.as_operator().max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn amplitude_damping_full_decay() {
        let ch = StandardChannel::AmplitudeDamping { gamma: 1.0 }
            .build()
            .unwrap();
        let out = ch
            .apply(&DensityOperator::maximally_mixed(2, 1).unwrap(), 1)
            .unwrap();
        assert!(
            out.as_operator()
                .max_abs_diff(&Operator::diag(2, &[1.0, 0.0]).unwrap())
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn dual_of_identity_observable_is_identity() {
        let id3 = Operator::identity(2, 3).unwrap();
        for kind in [
            StandardChannel::Depolarizing { d: 2, p: 0.3 },
            StandardChannel::AmplitudeDamping { gamma: 0.5 },
            StandardChannel::PhaseDamping { lambda: 0.2 },
        ] {
            let ch = kind.build().unwrap();
            assert!(ch.dual(&id3, 3).unwrap().max_abs_diff(&id3).unwrap() < 1e-10);
        }
    }

    #[test]
    fn dual_of_unitary_channel_conjugates() {
        let u = crate::operator::random_unitary(2, 1, 11).unwrap();
        let ch = StandardChannel::Unitary(u.clone()).build().unwrap();
        let a = random_observable(2, 1, 12).unwrap();
        let expected = u.adjoint().matmul(&a).unwrap().matmul(&u).unwrap();
        assert!(ch.dual(&a, 1).unwrap().max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn duality_pairing_depolarizing() {
        let ch = StandardChannel::Depolarizing { d: 2, p: 0.3 }
            .build()
            .unwrap();
        for seed in 0..5 {
            let rho = random_density(2, 3, seed).unwrap();
            let a = random_observable(2, 3, 100 + seed).unwrap();
            let lhs = trace_pairing(&ch.apply(&rho, 3).unwrap(), &a).unwrap();
            let rhs = trace_pairing(&rho, &ch.dual(&a, 3).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn sequential_matches_exhaustive() {
        let ch = StandardChannel::AmplitudeDamping { gamma: 0.3 }
            .build()
            .unwrap();
        for m in 1..=3 {
            let rho = random_density(2, m, m as u64).unwrap();
            let fast = ch.apply(&rho, m).unwrap();
            let slow = ch.apply_exhaustive(&rho, m).unwrap();
            assert!(fast.as_operator().max_abs_diff(slow.as_operator()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn copies_must_match_sites() {
        let ch = KrausChannel::identity(2).unwrap();
        let rho = random_density(2, 2, 0).unwrap();
        assert!(matches!(ch.apply(&rho, 3), Err(Error::Shape(_))));
    }

    #[test]
    fn embedding_with_computational_alphabet_pinches() {
        let ch = StandardChannel::Embedding {
            alphabet: AlphabetSpec::computational(2).unwrap(),
            basis: PinchingBasis::computational(2).unwrap(),
        }
        .build()
        .unwrap();
        let rho = random_density(2, 2, 4).unwrap();
        let out = ch.apply(&rho, 2).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let expected = if r == col {
                    rho.as_operator().get(r, r)
                } else {
                    c(0.0)
                };
                assert!((out.as_operator().get(r, col) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn embedding_sends_basis_state_to_alphabet_state() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let alphabet = AlphabetSpec::new(2, vec![vec![c(1.0), c(0.0)], vec![c(h), c(h)]]).unwrap();
        let ch = StandardChannel::Embedding {
            alphabet,
            basis: PinchingBasis::computational(2).unwrap(),
        }
        .build()
        .unwrap();
        let e1 = DensityOperator::pure(2, &[c(0.0), c(1.0)]).unwrap();
        let out = ch.apply(&e1, 1).unwrap();
        let plus = Operator::from_real_rows(2, &[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(out.as_operator().max_abs_diff(&plus).unwrap() < 1e-15);
    }

    #[test]
    fn short_alphabet_embedding_is_complete() {
        let alphabet = AlphabetSpec::new(3, vec![vec![c(0.0), c(1.0), c(0.0)]]).unwrap();
        let ch = StandardChannel::Embedding {
            alphabet,
            basis: PinchingBasis::computational(3).unwrap(),
        }
        .build()
        .unwrap();
        assert!(ch.report().pass);
        assert_eq!(ch.kraus_ops().len(), 3);
    }

    #[test]
    fn depolarizing_zero_is_identity() {
        let ch = StandardChannel::Depolarizing { d: 2, p: 0.0 }
            .build()
            .unwrap();
        assert_eq!(ch, KrausChannel::identity(2).unwrap());
    }

    #[test]
    fn parameter_ranges() {
        assert!(StandardChannel::Depolarizing { d: 2, p: 1.5 }
            .build()
            .is_err());
        assert!(StandardChannel::AmplitudeDamping { gamma: -0.1 }
            .build()
            .is_err());
        assert!(StandardChannel::PhaseDamping { lambda: 2.0 }
            .build()
            .is_err());
        let not_unitary = Operator::diag(2, &[1.0, 0.5]).unwrap();
        assert!(StandardChannel::Unitary(not_unitary).build().is_err());
    }

    #[test]
    fn block_channel_examples() {
        let dep = StandardChannel::Depolarizing { d: 2, p: 0.5 }
            .build()
            .unwrap();
        assert_eq!(dep.block(1).unwrap(), dep);
        let b2 = dep.block(2).unwrap();
        assert_eq!(b2.kraus_ops().len(), 16);
        assert_eq!(b2.block_size(), 2);
        assert!(b2.report().pass);
        let id3 = KrausChannel::identity(2).unwrap().block(3).unwrap();
        assert_eq!(id3.kraus_ops(), &[Operator::identity(2, 3).unwrap()]);
        assert!(matches!(dep.block(7), Err(Error::Resource { .. })));
    }

    #[test]
    fn block_channel_matches_sitewise_application() {
        let dep = StandardChannel::AmplitudeDamping { gamma: 0.4 }
            .build()
            .unwrap();
        let b2 = dep.block(2).unwrap();
        let rho = random_density(2, 4, 3).unwrap();
        let a = dep.apply(&rho, 4).unwrap();
        let b = b2.apply(&rho, 2).unwrap();
        assert!(a.as_operator().max_abs_diff(b.as_operator()).unwrap() < 1e-13);
        assert!(validate_density(b.as_operator()).pass);
    }
}
