//! Analytic reference matrices and the factorization identities behind the
//! recursive constructions.
//!
//! All matrix math here is 0-based: row/column `k` is mode `k + 1`. Public
//! functions take mode counts and 1-based mode labels like the rest of the
//! crate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::circuit::{circuit_matrix, max_deviation, unitarity_residual, TransferMatrix};
use crate::error::{Error, Result};
use crate::generators::{exact_log2, grover_iterations, v_circuit};

/// Default tolerance for matrix identities.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    Dft,
    GroverInversion,
    /// Odd/even sort `P` on `2d` entries.
    PermutationP,
    /// Exchange of entries 1 and `d + 1` on `2d` entries.
    PermutationQ,
    /// Sparse 2×2-block factors of the recursions.
    BlockFactor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceMatrix {
    pub kind: ReferenceKind,
    pub matrix: TransferMatrix,
}

impl ReferenceMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `F_d[j][k] = ω^{jk}/√d`, `ω = e^{2πi/d}`.
pub fn dft_matrix(d: usize) -> ReferenceMatrix {
    let scale = 1.0 / (d as f64).sqrt();
    let matrix = TransferMatrix::from_fn(d, d, |j, k| {
        // Reduce the exponent first so large d keeps full phase accuracy.
        let e = (j * k) % d;
        Complex64::from_polar(scale, 2.0 * PI * e as f64 / d as f64)
    });
    ReferenceMatrix { kind: ReferenceKind::Dft, matrix }
}

/// `W = 2|ψ⟩⟨ψ| − I` for the uniform `|ψ⟩`.
pub fn grover_inversion_matrix(d: usize) -> ReferenceMatrix {
    let off = 2.0 / d as f64;
    let matrix = TransferMatrix::from_fn(d, d, |j, k| if j == k { c(off - 1.0) } else { c(off) });
    ReferenceMatrix { kind: ReferenceKind::GroverInversion, matrix }
}

fn permutation(n: usize, kind: ReferenceKind, source: impl Fn(usize) -> usize) -> ReferenceMatrix {
    // (M v)_row = v_{source(row)}
    let mut matrix = TransferMatrix::zeros(n, n);
    for row in 0..n {
        matrix[(row, source(row))] = c(1.0);
    }
    ReferenceMatrix { kind, matrix }
}

/// `P v = (v_1, v_3, …, v_{2d−1}, v_2, v_4, …, v_{2d})` on `2d` entries.
pub fn shuffle_permutation(d: usize) -> ReferenceMatrix {
    permutation(2 * d, ReferenceKind::PermutationP, |row| if row < d { 2 * row } else { 2 * (row - d) + 1 })
}

/// `Q` on `2d` entries: exchanges entries 1 and `d + 1`.
pub fn exchange_permutation(d: usize) -> ReferenceMatrix {
    permutation(2 * d, ReferenceKind::PermutationQ, |row| match row {
        0 => d,
        r if r == d => 0,
        r => r,
    })
}

/// `diag(a, b)`.
pub fn block_diag(a: &TransferMatrix, b: &TransferMatrix) -> TransferMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = TransferMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// `(1/√2) [[I_d, D_d], [I_d, −D_d]]` with `D_d = diag(e^{ikπ/d})`, `k = 0..d−1`.
pub fn fft_butterfly(d: usize) -> ReferenceMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut matrix = TransferMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        let twiddle = Complex64::from_polar(s, PI * k as f64 / d as f64);
        matrix[(k, k)] = c(s);
        matrix[(k + d, k)] = c(s);
        matrix[(k, k + d)] = twiddle;
        matrix[(k + d, k + d)] = -twiddle;
    }
    ReferenceMatrix { kind: ReferenceKind::BlockFactor, matrix }
}

/// `H ⊗ I_d`.
pub fn hadamard_kron_identity(d: usize) -> ReferenceMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut matrix = TransferMatrix::zeros(2 * d, 2 * d);
    for k in 0..d {
        matrix[(k, k)] = c(s);
        matrix[(k, k + d)] = c(s);
        matrix[(k + d, k)] = c(s);
        matrix[(k + d, k + d)] = c(-s);
    }
    ReferenceMatrix { kind: ReferenceKind::BlockFactor, matrix }
}

/// `‖butterfly · diag(F_d, F_d) · P − F_{2d}‖_max`.
pub fn check_fft_factorization(d: usize) -> f64 {
    let f = dft_matrix(d).matrix;
    let lhs = fft_butterfly(d).matrix * block_diag(&f, &f) * shuffle_permutation(d).matrix;
    max_deviation(&lhs, &dft_matrix(2 * d).matrix)
}

/// Deviations of
/// `diag(V_d, V_d) · Q · diag(V_d, V_d) · diag(W_d, W_d)` from `W_{2d}` and of
/// `(H ⊗ I_d) · diag(V_d, V_d)` from `V_{2d}`.
///
/// `V_d` has no closed form; it is compiled from its circuit and checked
/// unitary first.
pub fn check_grover_factorization(d: usize) -> Result<(f64, f64)> {
    if exact_log2(d).is_none_or(|k| k < 1) {
        return Err(Error::InvalidModeCount(format!("Grover factorization needs d = 2^k, k >= 1, got {d}")));
    }
    let v = circuit_matrix(&v_circuit(d)?);
    let v2 = circuit_matrix(&v_circuit(2 * d)?);
    for m in [&v, &v2] {
        let residual = unitarity_residual(m);
        if residual > ORACLE_TOLERANCE {
            return Err(Error::InvalidModeCount(format!("V circuit not unitary (residual {residual:e})")));
        }
    }
    let w = grover_inversion_matrix(d).matrix;
    let vv = block_diag(&v, &v);
    let w_lhs = &vv * exchange_permutation(d).matrix * &vv * block_diag(&w, &w);
    let v_lhs = hadamard_kron_identity(d).matrix * &vv;
    Ok((max_deviation(&w_lhs, &grover_inversion_matrix(2 * d).matrix), max_deviation(&v_lhs, &v2)))
}

/// Probability of measuring the marked item after `⌊(π/4)√d⌋` applications
/// of the analytic Grover operator `G = W·O` to the uniform state.
///
/// The value does not depend on which item is marked; item 1 is used.
pub fn ideal_grover_success(d: usize) -> Result<f64> {
    if exact_log2(d).is_none_or(|k| k < 1) {
        return Err(Error::InvalidModeCount(format!("Grover search needs d = 2^k, k >= 1, got {d}")));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut state = vec![amp; d];
    for _ in 0..grover_iterations(d) {
        state[0] = -state[0];
        let mean = state.iter().sum::<f64>() / d as f64;
        state.iter_mut().for_each(|a| *a = 2.0 * mean - *a);
    }
    Ok(state[0] * state[0])
}

/// How two matrices were found equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseMatch {
    Exact,
    /// Equal after multiplying the candidate by `e^{-iφ}`.
    GlobalPhase(f64),
}

/// Compares `candidate` to `reference`, first exactly and then up to a
/// global phase fixed by the largest-magnitude reference entry. Returns the
/// smaller deviation and which comparison produced it.
pub fn compare_up_to_phase(candidate: &TransferMatrix, reference: &TransferMatrix, tol: f64) -> (f64, PhaseMatch) {
    let exact = max_deviation(candidate, reference);
    if exact <= tol {
        return (exact, PhaseMatch::Exact);
    }
    let (idx, _) =
        reference.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).expect("non-empty matrix");
    let ratio = candidate.as_slice()[idx] / reference.as_slice()[idx];
    if ratio.norm() == 0.0 {
        return (exact, PhaseMatch::Exact);
    }
    let phase = ratio.arg();
    let rotated = candidate * Complex64::from_polar(1.0, -phase);
    let dev = max_deviation(&rotated, reference);
    if dev < exact {
        (dev, PhaseMatch::GlobalPhase(phase))
    } else {
        (exact, PhaseMatch::Exact)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::inverse;
    use crate::generators::{grover_inversion, phi, qft, shuffle_sigma};

    #[test]
    fn dft_small_cases() {
        assert_eq!(dft_matrix(1).matrix, TransferMatrix::from_element(1, 1, c(1.0)));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = TransferMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        assert!(max_deviation(&dft_matrix(2).matrix, &had) < 1e-15);
        assert!((dft_matrix(4).matrix[(1, 1)] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn dft_is_unitary_and_maps_uniform_to_first_basis_vector() {
        for d in 1..=64 {
            let f = dft_matrix(d).matrix;
            assert!(unitarity_residual(&f) < 1e-12, "d={d}");
            let uniform = nalgebra::DVector::from_element(d, c(1.0 / (d as f64).sqrt()));
            let out = &f * uniform;
            assert!((out[0] - c(1.0)).norm() < 1e-12);
            assert!(out.iter().skip(1).all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn grover_matrix_entries_and_reflection() {
        let w2 = grover_inversion_matrix(2).matrix;
        assert_eq!(w2, TransferMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]));
        let w4 = grover_inversion_matrix(4).matrix;
        assert_eq!(w4[(0, 0)], c(-0.5));
        assert_eq!(w4[(2, 1)], c(0.5));
        for d in 1..=32 {
            let w = grover_inversion_matrix(d).matrix;
            assert!(max_deviation(&(&w * &w), &TransferMatrix::identity(d, d)) < 1e-12);
            let psi = nalgebra::DVector::from_element(d, c(1.0 / (d as f64).sqrt()));
            let out = &w * &psi;
            assert!(out.iter().zip(psi.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn p_and_q_act_as_described() {
        let v: Vec<Complex64> = (1..=4).map(|k| c(k as f64)).collect();
        let v = nalgebra::DVector::from_vec(v);
        let pv = shuffle_permutation(2).matrix * &v;
        assert_eq!(pv.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 3.0, 2.0, 4.0]);
        let qv = exchange_permutation(2).matrix * &v;
        assert_eq!(qv.iter().map(|z| z.re).collect::<Vec<_>>(), vec![3.0, 2.0, 1.0, 4.0]);
    }

    #[test]
    fn fft_factorization_holds() {
        for d in [1usize, 2, 3, 4, 5, 6, 8, 16] {
            assert!(check_fft_factorization(d) <= 1e-12, "d={d}: {}", check_fft_factorization(d));
        }
    }

    #[test]
    fn grover_factorization_holds() {
        for d in [2usize, 4, 8] {
            let (w, v) = check_grover_factorization(d).unwrap();
            assert!(w <= ORACLE_TOLERANCE && v <= ORACLE_TOLERANCE, "d={d}: {w} {v}");
        }
        assert!(check_grover_factorization(3).is_err());
    }

    #[test]
    fn ideal_success_probabilities() {
        assert!((ideal_grover_success(4).unwrap() - 1.0).abs() < 1e-12);
        assert!((ideal_grover_success(8).unwrap() - 121.0 / 128.0).abs() < 1e-12);
        // One iteration on two items leaves the marked item at probability 1/2.
        assert!((ideal_grover_success(2).unwrap() - 0.5).abs() < 1e-12);
        assert!(ideal_grover_success(6).is_err());
    }

    #[test]
    fn shuffle_circuit_realizes_sigma_and_its_inverse_realizes_p() {
        for d in 1..=8 {
            let sigma = circuit_matrix(&shuffle_sigma(d).unwrap());
            let sigma_inv = circuit_matrix(&inverse(&shuffle_sigma(d).unwrap()).unwrap());
            let p = shuffle_permutation(d).matrix;
            assert!(max_deviation(&sigma_inv, &p) < 1e-15, "d={d}");
            assert!(max_deviation(&sigma, &p.transpose()) < 1e-15, "d={d}");
            assert!(max_deviation(&(&sigma_inv * &sigma), &TransferMatrix::identity(2 * d, 2 * d)) < 1e-15);
        }
    }

    #[test]
    fn phi_realizes_q() {
        for d in [2usize, 4, 8, 16] {
            let m = circuit_matrix(&phi(d).unwrap());
            assert!(max_deviation(&m, &exchange_permutation(d).matrix) < 1e-15, "d={d}");
        }
    }

    #[test]
    fn qft_circuits_match_dft() {
        for d in [2usize, 4, 8, 16, 32] {
            let dev = max_deviation(&circuit_matrix(&qft(d).unwrap()), &dft_matrix(d).matrix);
            assert!(dev <= ORACLE_TOLERANCE, "d={d}: {dev}");
        }
    }

    #[test]
    fn grover_inversion_circuits_match_exactly() {
        for d in [2usize, 4, 8, 16] {
            let m = circuit_matrix(&grover_inversion(d).unwrap());
            let (dev, how) = compare_up_to_phase(&m, &grover_inversion_matrix(d).matrix, ORACLE_TOLERANCE);
            assert!(dev <= ORACLE_TOLERANCE, "d={d}: {dev}");
            assert_eq!(how, PhaseMatch::Exact, "d={d}");
        }
    }

    #[test]
    fn phase_comparison_recovers_global_phase() {
        let w = grover_inversion_matrix(4).matrix;
        let rotated = &w * Complex64::from_polar(1.0, 0.7);
        let (dev, how) = compare_up_to_phase(&rotated, &w, 1e-12);
        assert!(dev < 1e-12);
        match how {
            PhaseMatch::GlobalPhase(phi) => assert!((phi - 0.7).abs() < 1e-12),
            PhaseMatch::Exact => panic!("expected a global phase"),
        }
    }
}
