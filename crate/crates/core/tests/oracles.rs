//! Cross-checks against independent brute-force computations that share no
//! code with the library paths they verify.

use num_complex::Complex64;
use qsource_core::channel::StandardChannel;
use qsource_core::classical::{classify_process, stationary_distribution, ClassicalProcess};
use qsource_core::ergodicity::{
    ergodic_mean_test, strong_mixing_test, weak_mixing_test, Verdict, VerdictPolicy,
};
use qsource_core::operator::{embed_observable, random_density, random_observable, tensor_product};
use qsource_core::source::{AlphabetSpec, Backend, QuantumSource};
use qsource_core::{DensityOperator, Operator, PinchingBasis};

const P_MARKOV: [[f64; 2]; 2] = [[0.9, 0.1], [0.2, 0.8]];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn markov_rows() -> Vec<Vec<f64>> {
    P_MARKOV.iter().map(|r| r.to_vec()).collect()
}

fn zero_plus() -> AlphabetSpec {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    AlphabetSpec::new(2, vec![vec![c(1.0), c(0.0)], vec![c(h), c(h)]]).unwrap()
}

/// Every word of length `n` over `k` symbols, first symbol most significant.
fn words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |x| {
                    let mut v = w.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// p(x_1..x_n) = π(x_1) Π P(x_j, x_{j+1}).
fn markov_word_prob(pi: &[f64], p: &[[f64; 2]; 2], w: &[usize]) -> f64 {
    w.windows(2).fold(pi[w[0]], |acc, s| acc * p[s[0]][s[1]])
}

/// Matrix powers until rows agree.
fn power_stationary(p: &[[f64; 2]; 2]) -> [f64; 2] {
    let mut m = *p;
    for _ in 0..200 {
        let mut next = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                next[i][j] = (0..2).map(|k| m[i][k] * p[k][j]).sum();
            }
        }
        m = next;
    }
    m[0]
}

/// Σ_w p(w) |ψ_w⟩⟨ψ_w| written out entry by entry.
fn direct_density(
    vectors: &[Vec<Complex64>],
    prob: impl Fn(&[usize]) -> f64,
    n: usize,
) -> Vec<Complex64> {
    let d = vectors[0].len();
    let dim = d.pow(n as u32);
    let mut rho = vec![c(0.0); dim * dim];
    for w in words(vectors.len(), n) {
        let mut ket = vec![c(1.0)];
        for &x in &w {
            ket = ket
                .iter()
                .flat_map(|a| vectors[x].iter().map(move |b| a * b))
                .collect();
        }
        let p = prob(&w);
        for r in 0..dim {
            for s in 0..dim {
                rho[r * dim + s] += ket[r] * ket[s].conj() * p;
            }
        }
    }
    rho
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn stationary_law_matches_matrix_powers() {
    let st = stationary_distribution(&markov_rows()).unwrap();
    let oracle = power_stationary(&P_MARKOV);
    assert!((st.pi[0] - oracle[0]).abs() < 1e-12 && (st.pi[1] - oracle[1]).abs() < 1e-12);
    assert!((oracle[0] - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn markov_density_matches_word_enumeration() {
    let pi = power_stationary(&P_MARKOV);
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    for alphabet in [AlphabetSpec::computational(2).unwrap(), zero_plus()] {
        let src = QuantumSource::classically_correlated(process.clone(), alphabet.clone()).unwrap();
        for n in 1..=5 {
            let oracle = direct_density(
                alphabet.vectors(),
                |w| markov_word_prob(&pi, &P_MARKOV, w),
                n,
            );
            let rho = src.density(n).unwrap();
            assert!(
                max_diff(rho.as_operator().entries(), &oracle) <= 1e-12,
                "n = {n}"
            );
        }
    }
}

#[test]
fn correlation_matches_word_enumeration() {
    let pi = power_stationary(&P_MARKOV);
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    let src = QuantumSource::classically_correlated(process, zero_plus()).unwrap();
    let a = random_observable(2, 1, 11).unwrap();
    let b = random_observable(2, 1, 12).unwrap();
    let fa = |x: usize| a.expectation_in(&zero_plus().vectors()[x]);
    let fb = |x: usize| b.expectation_in(&zero_plus().vectors()[x]);
    let seq = src
        .correlation_sequence(&a, &b, 6, Backend::Transfer)
        .unwrap();
    for gap in 0..=6 {
        let n = gap + 2;
        let oracle: Complex64 = words(2, n)
            .iter()
            .map(|w| fa(w[0]) * fb(w[n - 1]) * markov_word_prob(&pi, &P_MARKOV, w))
            .sum();
        assert!((seq[gap] - oracle).norm() <= 1e-12, "gap {gap}");
    }
}

#[test]
fn embedding_transform_reproduces_nonorthogonal_source() {
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    let orthonormal = QuantumSource::classically_correlated(
        process.clone(),
        AlphabetSpec::computational(2).unwrap(),
    )
    .unwrap();
    let embed = StandardChannel::Embedding {
        alphabet: zero_plus(),
        basis: PinchingBasis::computational(2).unwrap(),
    }
    .build()
    .unwrap();
    let transformed = QuantumSource::channel_transformed(orthonormal, embed).unwrap();
    let pi = power_stationary(&P_MARKOV);
    for m in 1..=4 {
        let oracle = direct_density(
            zero_plus().vectors(),
            |w| markov_word_prob(&pi, &P_MARKOV, w),
            m,
        );
        let rho = transformed.density(m).unwrap();
        assert!(
            max_diff(rho.as_operator().entries(), &oracle) <= 1e-12,
            "m = {m}"
        );
    }
}

#[test]
fn depolarized_dense_and_transfer_agree() {
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    let base = QuantumSource::classically_correlated(process, zero_plus()).unwrap();
    let dep = StandardChannel::Depolarizing { d: 2, p: 0.3 }
        .build()
        .unwrap();
    let src = QuantumSource::channel_transformed(base, dep).unwrap();
    for m in 1..=2 {
        let a = random_observable(2, m, 20 + m as u64).unwrap();
        let b = random_observable(2, m, 30 + m as u64).unwrap();
        for gap in 0..=(8 - 2 * m) {
            let dense = src.correlation(&a, &b, gap, Backend::Dense).unwrap();
            let transfer = src.correlation(&a, &b, gap, Backend::Transfer).unwrap();
            assert!((dense - transfer).norm() <= 1e-9, "m {m} gap {gap}");
        }
    }
}

#[test]
fn indicator_transfer_matches_classical_chain() {
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    let src = QuantumSource::classically_correlated(
        process.clone(),
        AlphabetSpec::computational(2).unwrap(),
    )
    .unwrap();
    let p0 = Operator::basis_projector(2, 0).unwrap();
    let f = [1.0, 0.0];
    let classical = process.correlation_sequence(&f, &f, 1, 20).unwrap();
    let quantum = src
        .correlation_sequence(&p0, &p0, 20, Backend::Transfer)
        .unwrap();
    for (q, cl) in quantum.iter().zip(&classical) {
        assert!((q.re - cl).abs() <= 1e-12 && q.im.abs() <= 1e-12);
    }
}

/// corr(gap) − π_0² = π_0 π_1 λ₂^{gap+1} for the two-state chain.
#[test]
fn decay_follows_second_eigenvalue() {
    let lambda2 = P_MARKOV[0][0] + P_MARKOV[1][1] - 1.0;
    assert!((lambda2 - 0.7).abs() < 1e-15);
    let pi = power_stationary(&P_MARKOV);
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    let src =
        QuantumSource::classically_correlated(process, AlphabetSpec::computational(2).unwrap())
            .unwrap();
    let p0 = Operator::basis_projector(2, 0).unwrap();
    let seq = src
        .correlation_sequence(&p0, &p0, 40, Backend::Transfer)
        .unwrap();
    for (gap, z) in seq.iter().enumerate() {
        let oracle = pi[0] * pi[0] + pi[0] * pi[1] * lambda2.powi(gap as i32 + 1);
        assert!((z.re - oracle).abs() <= 1e-12);
    }
    let report = strong_mixing_test(
        &src,
        &p0,
        &p0,
        1,
        2000,
        Backend::Transfer,
        &VerdictPolicy::transfer(),
    )
    .unwrap();
    let rate = report.fitted_decay_rate.unwrap();
    assert!((rate - 0.7).abs() / 0.7 <= 0.05, "rate {rate}");
    assert_eq!(report.verdict, Verdict::Pass);
}

#[test]
fn depolarizing_keeps_decay_rate() {
    let process = ClassicalProcess::stationary_markov(&markov_rows()).unwrap();
    let base =
        QuantumSource::classically_correlated(process, AlphabetSpec::computational(2).unwrap())
            .unwrap();
    let src = QuantumSource::channel_transformed(
        base,
        StandardChannel::Depolarizing { d: 2, p: 0.3 }
            .build()
            .unwrap(),
    )
    .unwrap();
    let p0 = Operator::basis_projector(2, 0).unwrap();
    let report = strong_mixing_test(
        &src,
        &p0,
        &p0,
        1,
        2000,
        Backend::Transfer,
        &VerdictPolicy::transfer(),
    )
    .unwrap();
    let rate = report.fitted_decay_rate.unwrap();
    assert!((rate - 0.7).abs() / 0.7 <= 0.05, "rate {rate}");
}

#[test]
fn mixture_cesaro_limit_is_second_moment() {
    let mixture = ClassicalProcess::mixture(
        vec![
            ClassicalProcess::iid(vec![0.9, 0.1]).unwrap(),
            ClassicalProcess::iid(vec![0.1, 0.9]).unwrap(),
        ],
        vec![0.5, 0.5],
    )
    .unwrap();
    let src =
        QuantumSource::classically_correlated(mixture, AlphabetSpec::computational(2).unwrap())
            .unwrap();
    let p1 = Operator::basis_projector(2, 1).unwrap();
    let report = ergodic_mean_test(
        &src,
        &p1,
        &p1,
        1,
        2000,
        Backend::Transfer,
        &VerdictPolicy::transfer(),
    )
    .unwrap();
    let oracle_limit = 0.5 * (0.1f64.powi(2) + 0.9f64.powi(2));
    assert!((oracle_limit - 0.41).abs() < 1e-15);
    assert!((report.sequence.last().unwrap() - oracle_limit).abs() < 1e-12);
    assert!((report.target - 0.25).abs() < 1e-12);
    assert_eq!(report.verdict, Verdict::Fail);
}

#[test]
fn period_two_statistics() {
    let flip = ClassicalProcess::stationary_markov(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let src = QuantumSource::classically_correlated(flip, AlphabetSpec::computational(2).unwrap())
        .unwrap();
    let p0 = Operator::basis_projector(2, 0).unwrap();
    let policy = VerdictPolicy::transfer();
    let e = ergodic_mean_test(&src, &p0, &p0, 1, 2000, Backend::Transfer, &policy).unwrap();
    let w = weak_mixing_test(&src, &p0, &p0, 1, 2000, Backend::Transfer, &policy).unwrap();
    let s = strong_mixing_test(&src, &p0, &p0, 1, 2000, Backend::Transfer, &policy).unwrap();
    assert_eq!(e.sequence.len(), 2000);
    assert!(e.final_statistic < 1e-3);
    assert!((w.final_statistic - 0.25).abs() < 1e-12);
    assert!((s.final_statistic - 0.25).abs() < 1e-12);
    assert_eq!(
        (e.verdict, w.verdict, s.verdict),
        (Verdict::Pass, Verdict::Fail, Verdict::Fail)
    );
}

#[test]
fn classifier_on_reference_processes() {
    let iid = classify_process(&ClassicalProcess::iid(vec![0.3, 0.7]).unwrap());
    assert!(iid.stationary && iid.ergodic && iid.weakly_mixing && iid.strongly_mixing);
    let flip = classify_process(
        &ClassicalProcess::stationary_markov(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
    );
    assert!(flip.ergodic && !flip.weakly_mixing && !flip.strongly_mixing);
    let start = ClassicalProcess::markov(&markov_rows(), vec![1.0, 0.0]).unwrap();
    assert!(!classify_process(&start).stationary);
}

#[test]
fn product_source_factorizes() {
    let sigma = random_density(2, 1, 5).unwrap();
    let src = QuantumSource::iid(sigma.clone()).unwrap();
    let a = random_observable(2, 2, 6).unwrap();
    let b = random_observable(2, 2, 7).unwrap();
    let pair = sigma.power(2).unwrap();
    let ea = qsource_core::operator::trace_pairing(&pair, &a).unwrap();
    let eb = qsource_core::operator::trace_pairing(&pair, &b).unwrap();
    for gap in 0..4 {
        let dense = src.correlation(&a, &b, gap, Backend::Dense).unwrap();
        assert!((dense - ea * eb).norm() < 1e-12);
    }
    let full = tensor_product(&embed_observable(&a, 0, 1).unwrap(), &b).unwrap();
    let rho5: DensityOperator = src.density(5).unwrap();
    let direct = qsource_core::operator::trace_pairing(&rho5, &full).unwrap();
    assert!((direct - ea * eb).norm() < 1e-12);
}
