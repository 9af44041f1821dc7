//! JSON netlist documents.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "modes": 4,
//!   "metadata": { "family": "qft", "parameters": { "modes": 4 }, "generator_version": "0.1.0" },
//!   "layers": [
//!     [ { "kind": "swap", "modes": [2, 3] } ],
//!     [ { "kind": "beam-splitter", "modes": [1, 2], "reflectivity": 0.5 }, … ],
//!     [ { "kind": "phase-shifter", "modes": [4], "phase": "1/2 pi" } ],
//!     …
//!   ]
//! }
//! ```
//!
//! Phases that are exact rational multiples of π (as the generators compute
//! them, `k·π/n`) are written as `"k/n pi"`; anything else is written as a
//! plain number of radians. Both forms parse back to the identical `f64`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Element};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

const MAX_DENOMINATOR: i64 = 4096;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, u64>,
    #[serde(default)]
    pub generator_version: String,
}

impl Metadata {
    pub fn for_family(family: &str, parameters: impl IntoIterator<Item = (&'static str, u64)>) -> Self {
        Metadata {
            family: Some(family.to_string()),
            parameters: parameters.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            generator_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    BeamSplitter,
    Swap,
    PhaseShifter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Symbolic(String),
    Radians(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRecord {
    pub kind: ElementKind,
    pub modes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflectivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Angle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetlistDocument {
    pub schema_version: u32,
    pub modes: usize,
    #[serde(default)]
    pub metadata: Metadata,
    pub layers: Vec<Vec<ElementRecord>>,
}

/// `"k/n pi"` when `phase` is bit-for-bit `k·π/n` for a small `n`.
pub fn format_angle(phase: f64) -> Angle {
    if phase.is_finite() && phase.abs() <= 1e6 {
        for n in 1..=MAX_DENOMINATOR {
            let k = (phase * n as f64 / PI).round();
            if (k as i64 as f64) == k && k as i64 as f64 * PI / n as f64 == phase {
                let k = k as i64;
                return Angle::Symbolic(if n == 1 { format!("{k} pi") } else { format!("{k}/{n} pi") });
            }
        }
    }
    Angle::Radians(phase)
}

pub fn parse_angle(angle: &Angle) -> Result<f64> {
    match angle {
        Angle::Radians(r) => Ok(*r),
        Angle::Symbolic(s) => {
            let bad = || Error::Netlist(format!("cannot parse angle '{s}' (expected \"k/n pi\")"));
            let body = s.trim().strip_suffix("pi").ok_or_else(bad)?.trim();
            let (k, n) = match body.split_once('/') {
                Some((k, n)) => {
                    (k.trim().parse::<i64>().map_err(|_| bad())?, n.trim().parse::<i64>().map_err(|_| bad())?)
                }
                None => (body.parse::<i64>().map_err(|_| bad())?, 1),
            };
            if n <= 0 {
                return Err(bad());
            }
            Ok(k as f64 * PI / n as f64)
        }
    }
}

fn record(e: &Element) -> ElementRecord {
    match *e {
        Element::BeamSplitter { upper, lower, reflectivity } => ElementRecord {
            kind: ElementKind::BeamSplitter,
            modes: vec![upper, lower],
            reflectivity: Some(reflectivity),
            phase: None,
            loss: None,
        },
        Element::Swap { upper, lower, reflectivity } => ElementRecord {
            kind: ElementKind::Swap,
            modes: vec![upper, lower],
            reflectivity: (reflectivity != 0.0).then_some(reflectivity),
            phase: None,
            loss: None,
        },
        Element::PhaseShifter { mode, phase, loss } => ElementRecord {
            kind: ElementKind::PhaseShifter,
            modes: vec![mode],
            reflectivity: None,
            phase: Some(format_angle(phase)),
            loss: (loss != 0.0).then_some(loss),
        },
    }
}

fn element(r: &ElementRecord) -> Result<Element> {
    let misplaced = |field: &str| Err(Error::Netlist(format!("{field} is not allowed on a {:?}", r.kind)));
    match r.kind {
        ElementKind::BeamSplitter | ElementKind::Swap => {
            let [upper, lower] = r.modes[..] else {
                return Err(Error::Netlist(format!("{:?} needs two modes, got {:?}", r.kind, r.modes)));
            };
            if r.phase.is_some() {
                return misplaced("phase");
            }
            if r.loss.is_some() {
                return misplaced("loss");
            }
            if r.kind == ElementKind::Swap {
                let mut e = Element::swap(upper, lower)?;
                if let (Element::Swap { reflectivity, .. }, Some(value)) = (&mut e, r.reflectivity) {
                    *reflectivity = value;
                }
                Ok(e)
            } else {
                Element::beam_splitter(upper, lower, r.reflectivity.unwrap_or(0.5))
            }
        }
        ElementKind::PhaseShifter => {
            let [mode] = r.modes[..] else {
                return Err(Error::Netlist(format!("phase shifter needs one mode, got {:?}", r.modes)));
            };
            if r.reflectivity.is_some() {
                return misplaced("reflectivity");
            }
            let phase = r.phase.as_ref().map(parse_angle).transpose()?.unwrap_or(0.0);
            Element::phase_shifter(mode, phase, r.loss.unwrap_or(0.0))
        }
    }
}

impl NetlistDocument {
    pub fn from_circuit(c: &Circuit, metadata: Metadata) -> Self {
        NetlistDocument {
            schema_version: SCHEMA_VERSION,
            modes: c.modes(),
            metadata,
            layers: c.layers().iter().map(|l| l.elements().iter().map(record).collect()).collect(),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Netlist(format!("unsupported schema version {}", self.schema_version)));
        }
        let groups = self
            .layers
            .iter()
            .map(|layer| layer.iter().map(element).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Circuit::from_groups(self.modes, groups)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Netlist(e.to_string()))
    }
}

pub fn serialize(c: &Circuit, metadata: Metadata) -> String {
    NetlistDocument::from_circuit(c, metadata).to_json()
}

pub fn parse(text: &str) -> Result<Circuit> {
    NetlistDocument::from_json(text)?.to_circuit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::inverse;
    use crate::generators::{grover_search, qft};
    use crate::noise::{realize, trial_rng, NoiseParams};

    #[test]
    fn angles_are_symbolic_when_exact() {
        assert_eq!(format_angle(PI / 2.0), Angle::Symbolic("1/2 pi".into()));
        assert_eq!(format_angle(PI), Angle::Symbolic("1 pi".into()));
        assert_eq!(format_angle(-3.0 * PI / 4.0), Angle::Symbolic("-3/4 pi".into()));
        assert_eq!(format_angle(0.0), Angle::Symbolic("0 pi".into()));
        assert_eq!(format_angle(0.1234), Angle::Radians(0.1234));
        for (k, n) in [(1i64, 2i64), (3, 8), (7, 16), (15, 32), (-5, 12)] {
            let phase = k as f64 * PI / n as f64;
            assert_eq!(parse_angle(&format_angle(phase)).unwrap().to_bits(), phase.to_bits());
        }
        assert!(parse_angle(&Angle::Symbolic("half pi".into())).is_err());
        assert!(parse_angle(&Angle::Symbolic("1/0 pi".into())).is_err());
        assert!(parse_angle(&Angle::Symbolic("1/2".into())).is_err());
    }

    #[test]
    fn qft4_document_shape() {
        let text = serialize(&qft(4).unwrap(), Metadata::for_family("qft", [("modes", 4)]));
        let doc = NetlistDocument::from_json(&text).unwrap();
        assert_eq!(doc.modes, 4);
        assert_eq!(doc.layers.iter().map(Vec::len).sum::<usize>(), 8);
        assert!(text.contains("\"1/2 pi\""), "{text}");
        assert_eq!(doc.metadata.family.as_deref(), Some("qft"));
    }

    #[test]
    fn round_trips_generated_noisy_and_inverted_circuits() {
        let c = grover_search(8, 3).unwrap();
        assert_eq!(parse(&serialize(&c, Metadata::default())).unwrap(), c);
        let noisy = realize(&c, &NoiseParams::default(), &mut trial_rng(1, 2)).unwrap();
        assert_eq!(parse(&serialize(&noisy, Metadata::default())).unwrap(), noisy);
        let inv = inverse(&qft(8).unwrap()).unwrap();
        assert_eq!(parse(&serialize(&inv, Metadata::default())).unwrap(), inv);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let bad_modes = r#"{"schema_version":1,"modes":4,"layers":[[{"kind":"swap","modes":[1,3]}]]}"#;
        assert!(matches!(parse(bad_modes), Err(Error::NonAdjacent { .. })));
        let overlap = r#"{"schema_version":1,"modes":4,"layers":[[{"kind":"swap","modes":[1,2]},{"kind":"phase-shifter","modes":[2],"phase":"1 pi"}]]}"#;
        assert_eq!(parse(overlap), Err(Error::OverlappingModes(2)));
        let arity = r#"{"schema_version":1,"modes":4,"layers":[[{"kind":"phase-shifter","modes":[1,2]}]]}"#;
        assert!(matches!(parse(arity), Err(Error::Netlist(_))));
        let version = r#"{"schema_version":9,"modes":4,"layers":[]}"#;
        assert!(matches!(parse(version), Err(Error::Netlist(_))));
        let unknown = r#"{"schema_version":1,"modes":2,"layers":[[{"kind":"swap","modes":[1,2],"colour":"red"}]]}"#;
        assert!(parse(unknown).is_err());
        assert!(parse("not json").is_err());
    }
}
