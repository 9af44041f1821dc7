//! Recursive constructions of the QFT and Grover-search circuit families.
//!
//! Every generator returns an explicit layered [`Circuit`] whose two-mode
//! elements act on neighbouring modes only. Recursive steps place the two
//! half-size copies side by side in shared layers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::circuit::{inverse, Circuit, Element};
use crate::error::{Error, Result};

/// The circuit families that can be generated by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `F_d`, the d-mode Fourier transform.
    Qft,
    /// `Σ` on `2d` modes.
    Shuffle,
    /// `V_d`, the Hadamard-like network feeding the inversion.
    V,
    /// `W_d`, Grover inversion about the mean.
    W,
    /// `Φ` on `2d` modes, exchanging modes 1 and `d + 1`.
    Phi,
    /// `P_d`, equal-superposition preparation from mode 1.
    Prep,
    /// Single π phase on the solution mode.
    Oracle,
    /// Preparation followed by the Grover iterations.
    GroverSearch,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Qft,
        Family::Shuffle,
        Family::V,
        Family::W,
        Family::Phi,
        Family::Prep,
        Family::Oracle,
        Family::GroverSearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Qft => "qft",
            Family::Shuffle => "shuffle",
            Family::V => "v",
            Family::W => "w",
            Family::Phi => "phi",
            Family::Prep => "prep",
            Family::Oracle => "oracle",
            Family::GroverSearch => "grover-search",
        }
    }

    pub fn needs_solution(self) -> bool {
        matches!(self, Family::Oracle | Family::GroverSearch)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidModeCount(format!("unknown circuit family '{s}'")))
    }
}

/// A family together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircuitFamily {
    pub family: Family,
    /// `d`; shuffle and phi act on `2d` modes.
    pub modes: usize,
    /// Solution mode for oracle and search circuits.
    pub solution: Option<usize>,
}

impl CircuitFamily {
    pub fn build(&self) -> Result<Circuit> {
        let d = self.modes;
        let solution = || {
            self.solution.ok_or_else(|| Error::InvalidExperiment(format!("{} requires a solution mode", self.family)))
        };
        match self.family {
            Family::Qft => qft(d),
            Family::Shuffle => shuffle_sigma(d),
            Family::V => v_circuit(d),
            Family::W => grover_inversion(d),
            Family::Phi => phi(d),
            Family::Prep => prep(d),
            Family::Oracle => oracle(d, solution()?),
            Family::GroverSearch => grover_search(d, solution()?),
        }
    }
}

/// `k` with `d = 2^k`, if any.
pub fn exact_log2(d: usize) -> Option<u32> {
    d.is_power_of_two().then(|| d.trailing_zeros())
}

fn require_power_of_two(d: usize, min_exp: u32, what: &str) -> Result<u32> {
    match exact_log2(d) {
        Some(k) if k >= min_exp => Ok(k),
        _ => Err(Error::InvalidModeCount(format!("{what} needs modes = 2^k with k >= {min_exp}, got {d}"))),
    }
}

/// `Σ` on `2d` modes: `(1, …, 2d) ↦ (1, d+1, 2, d+2, …, d, 2d)`.
///
/// Layer `k` (for `k = 1..d`) holds the `k` swaps
/// `S(d−k+1, d−k+2), S(d−k+3, d−k+4), …`; `d(d−1)/2` swaps in all.
pub fn shuffle_sigma(d: usize) -> Result<Circuit> {
    if d < 1 {
        return Err(Error::InvalidModeCount("shuffle needs d >= 1".into()));
    }
    let mut c = Circuit::empty(2 * d);
    for k in 1..d {
        let first = d - k + 1;
        c.push((0..k).map(|t| Element::s(first + 2 * t)).collect());
    }
    Ok(c)
}

fn shuffle_pair(half: usize) -> (Circuit, Circuit) {
    let sigma = shuffle_sigma(half).expect("half >= 1");
    let sigma_inv = inverse(&sigma).expect("swap network is lossless");
    (sigma, sigma_inv)
}

fn equal_splitters(modes: usize) -> Vec<Element> {
    (1..modes).step_by(2).map(Element::b).collect()
}

/// `F_2 = [B(1,2)]`.
pub fn hadamard() -> Circuit {
    let mut c = Circuit::empty(2);
    c.push(vec![Element::b(1)]);
    c
}

/// Fourier transform on `d = 2^k` modes, recursing down to `F_2`.
pub fn qft(d: usize) -> Result<Circuit> {
    require_power_of_two(d, 1, "qft")
        .map_err(|_| Error::InvalidModeCount(format!("modes must be base·2^k with base 2, got {d}")))?;
    qft_from_base(d, &hadamard())
}

/// Fourier transform on `d = n·2^k` modes built from a supplied `n`-mode
/// Fourier circuit (`n` even). The base is trusted to realize `F_n`.
///
/// `F_2h = [Σ⁻¹] [F_h F_h] [P_{π/h}(h+2) ⋯ P_{(h−1)π/h}(2h)] [Σ] [B(1,2) ⋯ B(2h−1,2h)] [Σ⁻¹]`
pub fn qft_from_base(d: usize, base: &Circuit) -> Result<Circuit> {
    let n = base.modes();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidModeCount(format!("qft base must have an even mode count, got {n}")));
    }
    if !base.is_lossless() {
        return Err(Error::InvalidModeCount("qft base must be lossless".into()));
    }
    if !d.is_multiple_of(n) || !(d / n).is_power_of_two() {
        return Err(Error::InvalidModeCount(format!("modes must be base·2^k with base {n}, got {d}")));
    }
    let mut current = base.clone();
    while current.modes() < d {
        current = qft_double(&current);
    }
    Ok(current)
}

fn qft_double(half_circuit: &Circuit) -> Circuit {
    let h = half_circuit.modes();
    let (sigma, sigma_inv) = shuffle_pair(h);
    let mut c = Circuit::empty(2 * h);
    c.append(&sigma_inv);
    c.append(&Circuit::stacked(half_circuit, half_circuit));
    c.push((1..h).map(|k| Element::p(h + k + 1, k as f64 * PI / h as f64)).collect());
    c.append(&sigma);
    c.push(equal_splitters(2 * h));
    c.append(&sigma_inv);
    c
}

/// `V_d`: `V_2 = [B(1,2)]`, `V_2m = [V_m V_m] [Σ] [B ⋯] [Σ⁻¹]`.
pub fn v_circuit(d: usize) -> Result<Circuit> {
    let k = require_power_of_two(d, 1, "V")?;
    let mut current = hadamard();
    for _ in 1..k {
        let h = current.modes();
        let (sigma, sigma_inv) = shuffle_pair(h);
        let mut c = Circuit::stacked(&current, &current);
        c.append(&sigma);
        c.push(equal_splitters(2 * h));
        c.append(&sigma_inv);
        current = c;
    }
    Ok(current)
}

/// `Φ` on `2d` modes: the transposition of modes 1 and `d + 1` from
/// `d²/4 + d/2 + 1` neighbouring swaps.
///
/// `[S(d,d+1)]`, then a diamond of alternating swap layers on modes `1..=d`
/// narrowing from `[S(1,2) S(3,4) ⋯ S(d−1,d)]` to `[S(d/2, d/2+1)]` and
/// widening back, then `[S(d,d+1)]` again.
pub fn phi(d: usize) -> Result<Circuit> {
    require_power_of_two(d, 1, "phi")?;
    let half = d / 2;
    let narrowing: Vec<Vec<Element>> =
        (0..half).map(|k| (0..half - k).map(|t| Element::s(k + 1 + 2 * t)).collect()).collect();
    let mut c = Circuit::empty(2 * d);
    c.push(vec![Element::s(d)]);
    for layer in narrowing.iter() {
        c.push(layer.clone());
    }
    for layer in narrowing.iter().rev().skip(1) {
        c.push(layer.clone());
    }
    c.push(vec![Element::s(d)]);
    Ok(c)
}

/// Grover inversion `W_d = 2|ψ⟩⟨ψ| − I`:
/// `W_2 = [S(1,2)]`, `W_2m = [W_m W_m] [V_m V_m] [Φ] [V_m V_m]`.
pub fn grover_inversion(d: usize) -> Result<Circuit> {
    let k = require_power_of_two(d, 1, "W")?;
    let mut w = Circuit::empty(2);
    w.push(vec![Element::s(1)]);
    let mut v = hadamard();
    for _ in 1..k {
        let h = w.modes();
        let vv = Circuit::stacked(&v, &v);
        let mut next = Circuit::stacked(&w, &w);
        next.append(&vv);
        next.append(&phi(h)?);
        next.append(&vv);
        w = next;
        v = v_circuit(2 * h)?;
    }
    Ok(w)
}

/// Equal-superposition preparation from mode 1:
/// `P_2 = [B(1,2)]`, `P_2m = [B(1,2)] [S(2,3)] ⋯ [S(m,m+1)] [P_m P_m]`.
///
/// The first splitter sends half the amplitude to mode 2; the swap chain
/// carries it down to mode `m + 1` where the lower copy of `P_m` spreads it.
pub fn prep(d: usize) -> Result<Circuit> {
    let k = require_power_of_two(d, 1, "prep")?;
    let mut current = hadamard();
    for _ in 1..k {
        let m = current.modes();
        let mut c = Circuit::empty(2 * m);
        c.push(vec![Element::b(1)]);
        for i in 2..=m {
            c.push(vec![Element::s(i)]);
        }
        c.append(&Circuit::stacked(&current, &current));
        current = c;
    }
    Ok(current)
}

/// A single π phase on the solution mode.
pub fn oracle(d: usize, solution: usize) -> Result<Circuit> {
    if d == 0 {
        return Err(Error::NoModes);
    }
    if solution == 0 || solution > d {
        return Err(Error::InvalidSolution { solution, modes: d });
    }
    let mut c = Circuit::empty(d);
    c.push(vec![Element::p(solution, PI)]);
    Ok(c)
}

/// `⌊(π/4)·√d⌋`.
pub fn grover_iterations(d: usize) -> usize {
    (PI / 4.0 * (d as f64).sqrt()).floor() as usize
}

/// `prep(d)` followed by `⌊(π/4)√d⌋` rounds of `[oracle(d, s)] W_d`.
pub fn grover_search(d: usize, solution: usize) -> Result<Circuit> {
    require_power_of_two(d, 1, "grover search")?;
    let mark = oracle(d, solution)?;
    let inversion = grover_inversion(d)?;
    let mut c = prep(d)?;
    for _ in 0..grover_iterations(d) {
        c.append(&mark);
        c.append(&inversion);
    }
    Ok(c)
}

/// Closed-form element count `N(·)` for the QFT, V and W families.
pub fn count_formula(family: Family, d: usize) -> Result<usize> {
    let k = require_power_of_two(d, 1, family.name())? as i64;
    let d = d as i64;
    let n = match family {
        Family::Qft => (3 * d * d + d * (k - 7)) / 4 + 1,
        Family::V => d * (d - 1) / 2,
        Family::W => (9 * d * d - d * (6 * k + 4)) / 8 - 1,
        other => {
            return Err(Error::InvalidModeCount(format!("no count formula for {other}")));
        }
    };
    Ok(n as usize)
}

/// Closed-form depth `D(·)` for the QFT and W families.
pub fn depth_formula(family: Family, d: usize) -> Result<usize> {
    let k = require_power_of_two(d, 1, family.name())? as i64;
    let d = d as i64;
    let depth = match family {
        Family::Qft => 3 * (d - 1) - 2 * k,
        Family::W => 5 * d - 2 * k - k * k - 6,
        other => {
            return Err(Error::InvalidModeCount(format!("no depth formula for {other}")));
        }
    };
    Ok(depth as usize)
}
