//! The self-check suite behind `multiport verify`: every generator compiled
//! and compared against its analytic reference, plus element counts and
//! depths against their closed forms.

use std::fmt;

use num_complex::Complex64;

use crate::circuit::{apply, circuit_matrix, inverse, max_deviation, Circuit};
use crate::error::{Error, Result};
use crate::generators::{
    count_formula, depth_formula, grover_inversion, grover_search, phi, prep, qft, shuffle_sigma, v_circuit, Family,
};
use crate::oracles::{
    check_fft_factorization, check_grover_factorization, compare_up_to_phase, dft_matrix, exchange_permutation,
    grover_inversion_matrix, ideal_grover_success, shuffle_permutation, ORACLE_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Deviation { value: f64, tolerance: f64 },
    Count { expected: usize, actual: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
}

impl Check {
    fn deviation(name: String, value: f64, tolerance: f64) -> Self {
        Check { name, outcome: Outcome::Deviation { value, tolerance } }
    }

    fn count(name: String, expected: usize, actual: usize) -> Self {
        Check { name, outcome: Outcome::Count { expected, actual } }
    }

    pub fn passed(&self) -> bool {
        match self.outcome {
            Outcome::Deviation { value, tolerance } => value <= tolerance,
            Outcome::Count { expected, actual } => expected == actual,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match self.outcome {
            Outcome::Deviation { value, tolerance } => {
                write!(f, "{status} {:<28} max deviation {value:.3e} (tolerance {tolerance:.0e})", self.name)
            }
            Outcome::Count { expected, actual } => {
                write!(f, "{status} {:<28} expected {expected}, actual {actual}", self.name)
            }
        }
    }
}

fn powers_of_two(from: usize, to: usize) -> impl Iterator<Item = usize> {
    std::iter::successors(Some(from), |d| d.checked_mul(2)).take_while(move |&d| d <= to)
}

fn basis(d: usize, mode: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[mode - 1] = Complex64::new(1.0, 0.0);
    v
}

fn success_probability(c: &Circuit, solution: usize) -> Result<f64> {
    Ok(apply(c, &basis(c.modes(), 1))?[solution - 1].norm_sqr())
}

/// Runs every check for mode counts `2, 4, …` up to `max_dim`.
pub fn run_suite(max_dim: usize) -> Result<Vec<Check>> {
    if max_dim < 2 {
        return Err(Error::InvalidModeCount(format!("--max-dim must be at least 2, got {max_dim}")));
    }
    let tol = ORACLE_TOLERANCE;
    let mut checks = Vec::new();

    for d in powers_of_two(2, max_dim) {
        let f = circuit_matrix(&qft(d)?);
        checks.push(Check::deviation(format!("dft d={d}"), max_deviation(&f, &dft_matrix(d).matrix), tol));
    }
    for d in powers_of_two(2, max_dim) {
        let w = circuit_matrix(&grover_inversion(d)?);
        let (dev, _) = compare_up_to_phase(&w, &grover_inversion_matrix(d).matrix, tol);
        checks.push(Check::deviation(format!("inversion d={d}"), dev, tol));
    }
    for d in powers_of_two(1, max_dim / 2) {
        checks.push(Check::deviation(format!("fft factorization d={d}"), check_fft_factorization(d), tol));
    }
    for d in powers_of_two(2, max_dim / 2) {
        let (w_dev, v_dev) = check_grover_factorization(d)?;
        checks.push(Check::deviation(format!("inversion factorization d={d}"), w_dev, tol));
        checks.push(Check::deviation(format!("v factorization d={d}"), v_dev, tol));
    }
    for d in powers_of_two(2, max_dim / 2) {
        let p = circuit_matrix(&phi(d)?);
        checks.push(Check::deviation(
            format!("phi exchange d={d}"),
            max_deviation(&p, &exchange_permutation(d).matrix),
            tol,
        ));
        let s = circuit_matrix(&inverse(&shuffle_sigma(d)?)?);
        checks.push(Check::deviation(
            format!("shuffle sort d={d}"),
            max_deviation(&s, &shuffle_permutation(d).matrix),
            tol,
        ));
    }
    for d in powers_of_two(2, max_dim) {
        let out = apply(&prep(d)?, &basis(d, 1))?;
        let amp = 1.0 / (d as f64).sqrt();
        let dev = out.iter().map(|z| (z - amp).norm()).fold(0.0, f64::max);
        checks.push(Check::deviation(format!("prep uniform d={d}"), dev, tol));
    }

    for d in powers_of_two(2, max_dim) {
        checks.push(Check::count(format!("count qft d={d}"), count_formula(Family::Qft, d)?, qft(d)?.element_count()));
        checks.push(Check::count(
            format!("count v d={d}"),
            count_formula(Family::V, d)?,
            v_circuit(d)?.element_count(),
        ));
        checks.push(Check::count(
            format!("count w d={d}"),
            count_formula(Family::W, d)?,
            grover_inversion(d)?.element_count(),
        ));
        checks.push(Check::count(format!("depth qft d={d}"), depth_formula(Family::Qft, d)?, qft(d)?.depth()));
        checks.push(Check::count(format!("depth w d={d}"), depth_formula(Family::W, d)?, grover_inversion(d)?.depth()));
    }
    for (name, d, expected) in [("qft", 4, 8), ("grover-search", 4, 14), ("qft", 8, 41), ("grover-search", 8, 112)] {
        let c = if name == "qft" { qft(d)? } else { grover_search(d, 1)? };
        checks.push(Check::count(format!("table total {name} d={d}"), expected, c.element_count()));
    }

    for (d, expected) in [(4usize, 1.0), (8, 121.0 / 128.0)] {
        checks.push(Check::deviation(format!("grover ideal d={d}"), (ideal_grover_success(d)? - expected).abs(), 1e-9));
        let worst = (1..=d)
            .map(|s| Ok((success_probability(&grover_search(d, s)?, s)? - expected).abs()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::deviation(format!("grover circuit d={d}"), worst, 1e-9));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let checks = run_suite(32).unwrap();
        let failures: Vec<String> = checks.iter().filter(|c| !c.passed()).map(ToString::to_string).collect();
        assert!(failures.is_empty(), "{failures:#?}");
        let line = checks.iter().find(|c| c.name == "count qft d=8").unwrap().to_string();
        assert!(line.starts_with("PASS") && line.ends_with("expected 41, actual 41"), "{line}");
        let depth = checks.iter().find(|c| c.name == "depth qft d=4").unwrap();
        assert_eq!(depth.outcome, Outcome::Count { expected: 5, actual: 5 });
    }

    #[test]
    fn failing_checks_are_reported() {
        let c = Check::deviation("x".into(), 1e-3, 1e-10);
        assert!(!c.passed());
        assert!(c.to_string().starts_with("FAIL"));
        assert!(run_suite(1).is_err());
    }
}
