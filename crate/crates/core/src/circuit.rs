//! Layered multiport circuits on path-encoded modes and their compilation to
//! transfer matrices.
//!
//! Modes are labelled `1..=d` from top to bottom. A circuit is an ordered list
//! of layers, first-applied first; the elements inside a layer act on disjoint
//! modes and therefore commute. The compiled matrix is `M_L ⋯ M_2 M_1`, so the
//! output amplitudes are `M · input`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-photon amplitudes over the `d` modes, index `k` holding mode `k + 1`.
pub type AmplitudeVector = Vec<Complex64>;

/// `d × d` complex transfer matrix; row/column `k` corresponds to mode `k + 1`.
pub type TransferMatrix = DMatrix<Complex64>;

/// One optical primitive.
///
/// Two-mode elements store both mode labels so malformed input can be
/// rejected; every valid element has `lower == upper + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Element {
    /// `B_ε(i, j)` with reflectivity `ε`.
    BeamSplitter { upper: usize, lower: usize, reflectivity: f64 },
    /// `S(i, j)`. Ideally a beam splitter with `ε = 0`; kept separate because
    /// fabricated swaps follow their own reflectivity distribution.
    Swap { upper: usize, lower: usize, reflectivity: f64 },
    /// `P_θ(i)`, with absorptivity `loss` (0 when ideal).
    PhaseShifter { mode: usize, phase: f64, loss: f64 },
}

/// The non-trivial part of an element's matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Block {
    Two([[Complex64; 2]; 2]),
    One(Complex64),
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitRange { name, value })
    }
}

fn check_pair(upper: usize, lower: usize) -> Result<()> {
    if upper == 0 {
        return Err(Error::ModeOutOfRange { mode: upper, modes: 0 });
    }
    if lower != upper + 1 {
        return Err(Error::NonAdjacent { upper, lower });
    }
    Ok(())
}

impl Element {
    pub fn beam_splitter(upper: usize, lower: usize, reflectivity: f64) -> Result<Self> {
        check_pair(upper, lower)?;
        check_unit("reflectivity", reflectivity)?;
        Ok(Element::BeamSplitter { upper, lower, reflectivity })
    }

    pub fn swap(upper: usize, lower: usize) -> Result<Self> {
        check_pair(upper, lower)?;
        Ok(Element::Swap { upper, lower, reflectivity: 0.0 })
    }

    pub fn phase_shifter(mode: usize, phase: f64, loss: f64) -> Result<Self> {
        if mode == 0 {
            return Err(Error::ModeOutOfRange { mode, modes: 0 });
        }
        check_unit("loss", loss)?;
        Ok(Element::PhaseShifter { mode, phase, loss })
    }

    /// Equal beam splitter `B(i, i+1)`.
    pub(crate) fn b(upper: usize) -> Self {
        Element::BeamSplitter { upper, lower: upper + 1, reflectivity: 0.5 }
    }

    /// Ideal swap `S(i, i+1)`.
    pub(crate) fn s(upper: usize) -> Self {
        Element::Swap { upper, lower: upper + 1, reflectivity: 0.0 }
    }

    /// Lossless phase shifter `P_θ(i)`.
    pub(crate) fn p(mode: usize, phase: f64) -> Self {
        Element::PhaseShifter { mode, phase, loss: 0.0 }
    }

    /// Modes touched by the element, top first.
    pub fn modes(&self) -> (usize, Option<usize>) {
        match *self {
            Element::BeamSplitter { upper, lower, .. } | Element::Swap { upper, lower, .. } => (upper, Some(lower)),
            Element::PhaseShifter { mode, .. } => (mode, None),
        }
    }

    pub fn is_lossy(&self) -> bool {
        matches!(*self, Element::PhaseShifter { loss, .. } if loss > 0.0)
    }

    /// The same element moved down by `offset` modes.
    pub fn shifted(&self, offset: usize) -> Self {
        match *self {
            Element::BeamSplitter { upper, lower, reflectivity } => {
                Element::BeamSplitter { upper: upper + offset, lower: lower + offset, reflectivity }
            }
            Element::Swap { upper, lower, reflectivity } => {
                Element::Swap { upper: upper + offset, lower: lower + offset, reflectivity }
            }
            Element::PhaseShifter { mode, phase, loss } => Element::PhaseShifter { mode: mode + offset, phase, loss },
        }
    }

    fn validate(&self, modes: usize) -> Result<()> {
        let (top, bottom) = self.modes();
        if let Some(bottom) = bottom {
            check_pair(top, bottom)?;
        }
        for m in std::iter::once(top).chain(bottom) {
            if m == 0 || m > modes {
                return Err(Error::ModeOutOfRange { mode: m, modes });
            }
        }
        match *self {
            Element::BeamSplitter { reflectivity, .. } | Element::Swap { reflectivity, .. } => {
                check_unit("reflectivity", reflectivity)
            }
            Element::PhaseShifter { loss, .. } => check_unit("loss", loss),
        }
    }
}

/// Matrix block of a single element.
///
/// A beam splitter (or swap) of reflectivity `ε` maps `(a_i, a_j)` through
/// `[[√ε, √(1−ε)], [√(1−ε), −√ε]]`; a phase shifter multiplies its mode by
/// `e^{iθ}·√(1−γ)`.
pub fn element_block(e: &Element) -> Result<Block> {
    match *e {
        Element::BeamSplitter { reflectivity, .. } | Element::Swap { reflectivity, .. } => {
            check_unit("reflectivity", reflectivity)?;
            let r = Complex64::new(reflectivity.sqrt(), 0.0);
            let t = Complex64::new((1.0 - reflectivity).sqrt(), 0.0);
            Ok(Block::Two([[r, t], [t, -r]]))
        }
        Element::PhaseShifter { phase, loss, .. } => {
            check_unit("loss", loss)?;
            Ok(Block::One(Complex64::from_polar((1.0 - loss).sqrt(), phase)))
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Element::BeamSplitter { upper, lower, reflectivity: 0.5 } => {
                write!(f, "B({upper},{lower})")
            }
            Element::BeamSplitter { upper, lower, reflectivity } => {
                write!(f, "B_{reflectivity}({upper},{lower})")
            }
            Element::Swap { upper, lower, .. } => write!(f, "S({upper},{lower})"),
            Element::PhaseShifter { mode, phase, .. } => write!(f, "P_{phase}({mode})"),
        }
    }
}

/// Elements applied in parallel on pairwise-disjoint modes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layer {
    elements: Vec<Element>,
}

impl Layer {
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::with_capacity(elements.len() * 2);
        for e in &elements {
            let (top, bottom) = e.modes();
            for m in std::iter::once(top).chain(bottom) {
                if seen.contains(&m) {
                    return Err(Error::OverlappingModes(m));
                }
                seen.push(m);
            }
        }
        Ok(Layer { elements })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, e) in self.elements.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

/// An ordered list of layers on `modes` optical modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    modes: usize,
    layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(modes: usize, layers: Vec<Layer>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        for layer in &layers {
            for e in layer.elements() {
                e.validate(modes)?;
            }
        }
        Ok(Circuit { modes, layers })
    }

    /// Builds a circuit from raw element groups, checking every invariant.
    pub fn from_groups(modes: usize, groups: Vec<Vec<Element>>) -> Result<Self> {
        let layers = groups.into_iter().map(Layer::new).collect::<Result<Vec<_>>>()?;
        Circuit::new(modes, layers)
    }

    pub fn empty(modes: usize) -> Self {
        assert!(modes > 0, "circuit must have at least one mode");
        Circuit { modes, layers: Vec::new() }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> + '_ {
        self.layers.iter().flat_map(|l| l.elements.iter())
    }

    /// Total number of beam splitters, swaps and phase shifters.
    pub fn element_count(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    /// Number of optical stages.
    ///
    /// Each layer is one stage, except that a layer holding only phase
    /// shifters shares the stage of the preceding or following layer when
    /// their modes are disjoint (phase shifters sit on the waveguides between
    /// couplers and need no stage of their own).
    pub fn depth(&self) -> usize {
        struct Stage {
            occupied: Vec<bool>,
            phase_only: bool,
        }
        let mut stages: Vec<Stage> = Vec::new();
        for layer in &self.layers {
            if layer.is_empty() {
                continue;
            }
            let touched: Vec<usize> = layer
                .elements
                .iter()
                .flat_map(|e| {
                    let (top, bottom) = e.modes();
                    std::iter::once(top - 1).chain(bottom.map(|b| b - 1))
                })
                .collect();
            let phase_only = layer.elements.iter().all(|e| matches!(e, Element::PhaseShifter { .. }));
            let mergeable = stages
                .last()
                .is_some_and(|last| (phase_only || last.phase_only) && touched.iter().all(|&m| !last.occupied[m]));
            if mergeable {
                let last = stages.last_mut().expect("checked above");
                touched.iter().for_each(|&m| last.occupied[m] = true);
                last.phase_only &= phase_only;
            } else {
                let mut occupied = vec![false; self.modes];
                touched.iter().for_each(|&m| occupied[m] = true);
                stages.push(Stage { occupied, phase_only });
            }
        }
        stages.len()
    }

    /// Largest number of elements acting on any single mode.
    pub fn max_elements_per_mode(&self) -> usize {
        let mut per_mode = vec![0usize; self.modes];
        for e in self.elements() {
            let (top, bottom) = e.modes();
            per_mode[top - 1] += 1;
            if let Some(b) = bottom {
                per_mode[b - 1] += 1;
            }
        }
        per_mode.into_iter().max().unwrap_or(0)
    }

    pub fn is_lossless(&self) -> bool {
        !self.elements().any(Element::is_lossy)
    }

    /// Appends `other` after `self`.
    pub fn then(mut self, other: Circuit) -> Result<Self> {
        if other.modes != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, actual: other.modes });
        }
        self.layers.extend(other.layers);
        Ok(self)
    }

    pub(crate) fn push(&mut self, elements: Vec<Element>) {
        debug_assert!(Layer::new(elements.clone()).is_ok());
        debug_assert!(elements.iter().all(|e| e.validate(self.modes).is_ok()));
        if !elements.is_empty() {
            self.layers.push(Layer { elements });
        }
    }

    pub(crate) fn append(&mut self, other: &Circuit) {
        debug_assert_eq!(self.modes, other.modes);
        self.layers.extend(other.layers.iter().cloned());
    }

    /// Stacks `upper` on modes `1..=a` and `lower` on `a+1..=a+b`, sharing
    /// layers index by index.
    pub fn stacked(upper: &Circuit, lower: &Circuit) -> Circuit {
        let offset = upper.modes;
        let depth = upper.layers.len().max(lower.layers.len());
        let layers = (0..depth)
            .map(|k| {
                let mut elements = Vec::new();
                if let Some(l) = upper.layers.get(k) {
                    elements.extend(l.elements.iter().copied());
                }
                if let Some(l) = lower.layers.get(k) {
                    elements.extend(l.elements.iter().map(|e| e.shifted(offset)));
                }
                Layer { elements }
            })
            .collect();
        Circuit { modes: upper.modes + lower.modes, layers }
    }

    /// Element-wise transform keeping the structure (used by the noise model).
    pub fn map_elements(&self, mut f: impl FnMut(&Element) -> Element) -> Circuit {
        let layers = self.layers.iter().map(|l| Layer { elements: l.elements.iter().map(&mut f).collect() }).collect();
        Circuit { modes: self.modes, layers }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, layer) in self.layers.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{layer}")?;
        }
        Ok(())
    }
}

#[inline]
fn apply_block(amps: &mut [Complex64], e: &Element) {
    match *e {
        Element::BeamSplitter { upper, lower, reflectivity } | Element::Swap { upper, lower, reflectivity } => {
            let (i, j) = (upper - 1, lower - 1);
            let r = reflectivity.sqrt();
            let t = (1.0 - reflectivity).sqrt();
            let (a, b) = (amps[i], amps[j]);
            amps[i] = a * r + b * t;
            amps[j] = a * t - b * r;
        }
        Element::PhaseShifter { mode, phase, loss } => {
            amps[mode - 1] *= Complex64::from_polar((1.0 - loss).sqrt(), phase);
        }
    }
}

/// Propagates `v` through the circuit one element at a time.
pub fn apply(c: &Circuit, v: &[Complex64]) -> Result<AmplitudeVector> {
    if v.len() != c.modes {
        return Err(Error::DimensionMismatch { expected: c.modes, actual: v.len() });
    }
    let mut out = v.to_vec();
    apply_in_place(c, &mut out);
    Ok(out)
}

pub(crate) fn apply_in_place(c: &Circuit, amps: &mut [Complex64]) {
    debug_assert_eq!(amps.len(), c.modes);
    for e in c.elements() {
        apply_block(amps, e);
    }
}

/// Identity with every element block of the layer embedded on its modes.
pub fn layer_matrix(layer: &Layer, modes: usize) -> Result<TransferMatrix> {
    let mut m = TransferMatrix::identity(modes, modes);
    for e in layer.elements() {
        e.validate(modes)?;
        match (element_block(e)?, e.modes()) {
            (Block::Two(b), (top, Some(bottom))) => {
                let (i, j) = (top - 1, bottom - 1);
                m[(i, i)] = b[0][0];
                m[(i, j)] = b[0][1];
                m[(j, i)] = b[1][0];
                m[(j, j)] = b[1][1];
            }
            (Block::One(z), (top, None)) => m[(top - 1, top - 1)] = z,
            _ => unreachable!("block arity follows element kind"),
        }
    }
    Ok(m)
}

/// Compiles the circuit to `M_L ⋯ M_1` by multiplying full layer matrices.
pub fn circuit_matrix(c: &Circuit) -> TransferMatrix {
    let d = c.modes;
    c.layers.iter().fold(TransferMatrix::identity(d, d), |acc, layer| {
        // Circuits are validated on construction.
        layer_matrix(layer, d).expect("validated layer") * acc
    })
}

/// The inverse circuit: layers reversed and phases negated. Beam splitters and
/// swaps are their own inverses under the real symmetric convention.
pub fn inverse(c: &Circuit) -> Result<Circuit> {
    if let Some(Element::PhaseShifter { mode, loss, .. }) = c.elements().find(|e| e.is_lossy()) {
        return Err(Error::LossyInverse { mode: *mode, loss: *loss });
    }
    let layers = c
        .layers
        .iter()
        .rev()
        .map(|l| Layer {
            elements: l
                .elements
                .iter()
                .map(|e| match *e {
                    Element::PhaseShifter { mode, phase, loss } => Element::PhaseShifter { mode, phase: -phase, loss },
                    other => other,
                })
                .collect(),
        })
        .collect();
    Ok(Circuit { modes: c.modes, layers })
}

/// Largest absolute entry of `a − b`.
pub fn max_deviation(a: &TransferMatrix, b: &TransferMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `‖M†M − I‖_max`.
pub fn unitarity_residual(m: &TransferMatrix) -> f64 {
    let n = m.ncols();
    max_deviation(&(m.adjoint() * m), &TransferMatrix::identity(n, n))
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}
