//! Comma-separated results files.
//!
//! A results document is a `key,value` header echoing the experiment spec
//! and summary statistics, a blank line, then the histogram table:
//!
//! ```text
//! kind,qft
//! d,4
//! trials,100000
//! ...
//! median,0.949…
//!
//! bin_lower,bin_width,count
//! 0.62…,0.0031…,1
//! ```
//!
//! Floats are written in shortest round-trip form, so a document parses back
//! to bit-identical values.

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentKind, ExperimentResult, ExperimentSpec, FidelityConvention, HistogramBin};
use crate::noise::NoiseParams;

const HISTOGRAM_HEADER: [&str; 3] = ["bin_lower", "bin_width", "count"];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultsDocument {
    pub spec: ExperimentSpec,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub histogram: Vec<HistogramBin>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Results(msg.into())
}

fn csv_err(e: csv::Error) -> Error {
    bad(e.to_string())
}

fn write_rows(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is utf-8")
}

fn histogram_rows(bins: &[HistogramBin]) -> impl Iterator<Item = Vec<String>> + '_ {
    std::iter::once(HISTOGRAM_HEADER.iter().map(|s| s.to_string()).collect())
        .chain(bins.iter().map(|b| vec![b.lower.to_string(), b.width.to_string(), b.count.to_string()]))
}

fn records(text: &str) -> Result<Vec<StringRecord>> {
    ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)
}

fn number<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| bad(format!("cannot parse {what} '{field}'")))
}

impl ResultsDocument {
    pub fn from_result(r: &ExperimentResult) -> Self {
        ResultsDocument {
            spec: r.spec,
            mean: r.stats.mean,
            std: r.stats.std,
            median: r.stats.median,
            histogram: r.stats.histogram.clone(),
        }
    }

    fn header(&self) -> Vec<(&'static str, String)> {
        let s = &self.spec;
        let n = &s.noise;
        vec![
            ("kind", s.kind.to_string()),
            ("d", s.modes.to_string()),
            ("trials", s.trials.to_string()),
            ("seed", s.seed.to_string()),
            ("convention", s.convention.to_string()),
            ("bs_mean", n.bs_mean.to_string()),
            ("bs_std", n.bs_std.to_string()),
            ("swap_mean", n.swap_mean.to_string()),
            ("swap_std", n.swap_std.to_string()),
            ("loss_mean", n.loss_mean.to_string()),
            ("loss_std", n.loss_std.to_string()),
            ("mean", self.mean.to_string()),
            ("std", self.std.to_string()),
            ("median", self.median.to_string()),
        ]
    }

    pub fn to_csv(&self) -> String {
        let header = write_rows(self.header().into_iter().map(|(k, v)| vec![k.to_string(), v]));
        format!("{header}\n{}", write_rows(histogram_rows(&self.histogram)))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = records(text)?;
        let split =
            rows.iter().position(|r| r.iter().eq(HISTOGRAM_HEADER)).ok_or_else(|| bad("missing histogram table"))?;
        let mut fields = std::collections::BTreeMap::new();
        for r in &rows[..split] {
            if r.len() != 2 {
                return Err(bad(format!("header rows need two fields, got {:?}", r)));
            }
            if fields.insert(r[0].to_string(), r[1].to_string()).is_some() {
                return Err(bad(format!("duplicate key '{}'", &r[0])));
            }
        }
        let mut get = |key: &str| fields.remove(key).ok_or_else(|| bad(format!("missing key '{key}'")));
        let kind: ExperimentKind = get("kind")?.parse()?;
        let modes = number(&get("d")?, "d")?;
        let trials = number(&get("trials")?, "trials")?;
        let seed = number(&get("seed")?, "seed")?;
        let convention: FidelityConvention = get("convention")?.parse()?;
        let noise = NoiseParams {
            bs_mean: number(&get("bs_mean")?, "bs_mean")?,
            bs_std: number(&get("bs_std")?, "bs_std")?,
            swap_mean: number(&get("swap_mean")?, "swap_mean")?,
            swap_std: number(&get("swap_std")?, "swap_std")?,
            loss_mean: number(&get("loss_mean")?, "loss_mean")?,
            loss_std: number(&get("loss_std")?, "loss_std")?,
        };
        let mean = number(&get("mean")?, "mean")?;
        let std = number(&get("std")?, "std")?;
        let median = number(&get("median")?, "median")?;
        if let Some(key) = fields.keys().next() {
            return Err(bad(format!("unknown key '{key}'")));
        }
        let histogram = rows[split + 1..]
            .iter()
            .map(|r| {
                if r.len() != 3 {
                    return Err(bad(format!("histogram rows need three fields, got {:?}", r)));
                }
                Ok(HistogramBin {
                    lower: number(&r[0], "bin_lower")?,
                    width: number(&r[1], "bin_width")?,
                    count: number(&r[2], "count")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total: usize = histogram.iter().map(|b| b.count).sum();
        if total != trials {
            return Err(bad(format!("histogram holds {total} trials, header says {trials}")));
        }
        let spec = ExperimentSpec { kind, modes, trials, noise, seed, convention };
        Ok(ResultsDocument { spec, mean, std, median, histogram })
    }
}

/// `trial,fidelity` rows, one per trial in index order.
pub fn per_trial_csv(fidelities: &[f64]) -> String {
    write_rows(
        std::iter::once(vec!["trial".to_string(), "fidelity".to_string()])
            .chain(fidelities.iter().enumerate().map(|(t, f)| vec![t.to_string(), f.to_string()])),
    )
}

/// Fidelities from a per-trial file: the last column of every row after the
/// header. A bare single-column list of numbers is accepted as well.
pub fn read_per_trial(text: &str) -> Result<Vec<f64>> {
    let rows = records(text)?;
    let skip =
        usize::from(rows.first().is_some_and(|r| r.iter().next_back().is_some_and(|f| f.parse::<f64>().is_err())));
    let values = rows[skip..]
        .iter()
        .map(|r| number::<f64>(r.iter().next_back().unwrap_or(""), "fidelity"))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(bad(format!("non-finite fidelity {v}")));
    }
    Ok(values)
}

/// The histogram table alone, as written after the header block.
pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    write_rows(histogram_rows(bins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{fd_histogram, run_experiment};

    fn small_result() -> ExperimentResult {
        run_experiment(&ExperimentSpec::new(ExperimentKind::Qft, 4, 500, 3), Some(2)).unwrap()
    }

    #[test]
    fn document_round_trips_bit_for_bit() {
        let doc = ResultsDocument::from_result(&small_result());
        let text = doc.to_csv();
        assert!(text.starts_with("kind,qft\nd,4\ntrials,500\nseed,3\nconvention,unnormalized\n"), "{text}");
        assert!(text.contains("\n\nbin_lower,bin_width,count\n"));
        let back = ResultsDocument::from_csv(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn histogram_total_must_match_trials() {
        let text = ResultsDocument::from_result(&small_result()).to_csv().replace("trials,500", "trials,501");
        assert!(matches!(ResultsDocument::from_csv(&text), Err(Error::Results(_))));
        assert!(ResultsDocument::from_csv("kind,qft\n").is_err());
    }

    #[test]
    fn per_trial_file_reproduces_histogram() {
        let r = small_result();
        let values = read_per_trial(&per_trial_csv(&r.fidelities)).unwrap();
        assert_eq!(values, r.fidelities);
        assert_eq!(fd_histogram(&values).unwrap(), r.stats.histogram);
        assert_eq!(read_per_trial("0.5\n0.25\n").unwrap(), vec![0.5, 0.25]);
        assert_eq!(read_per_trial("fidelity\n"), Err(Error::EmptyInput));
        assert!(read_per_trial("trial,fidelity\n0,abc\n").is_err());
    }
}
