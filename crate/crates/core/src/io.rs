//! Readers and writers for every file the crate produces or consumes.
//!
//! | file | header |
//! |------|--------|
//! | capture histories | `id,t,x` (one row per occasion from first sighting) |
//! | truth / individual means | `id,pi,gHH,gAA` |
//! | posterior samples | `iter,block,name,value` |
//! | summary | `block,name,mean,sd` |
//!
//! Run configuration and multivariate-t proposals are TOML.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::engine::{HyperRecord, PosteriorSample, Summary, HYPER_FIELDS};
use crate::model::{validate_history, Block, CaptureHistory, IndividualParams, RunConfig};
use crate::samplers::{MvtProposal, MvtSpec};
use crate::simulate::TruthRecord;

pub const HISTORY_HEADER: [&str; 3] = ["id", "t", "x"];
pub const TRUTH_HEADER: [&str; 4] = ["id", "pi", "gHH", "gAA"];
pub const SAMPLES_HEADER: [&str; 4] = ["iter", "block", "name", "value"];
pub const SUMMARY_HEADER: [&str; 4] = ["block", "name", "mean", "sd"];
const THETA_PREFIX: &str = "theta:";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl FormatError {
    fn parse(line: u64, message: impl Into<String>) -> Self {
        FormatError::Parse { line, message: message.into() }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, FormatError::Io(_))
    }
}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => FormatError::Io(io),
            other => FormatError::parse(line, format!("{other:?}")),
        }
    }
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), FormatError> {
    let header = rdr.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(FormatError::parse(
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<T, FormatError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        FormatError::parse(line_of(rec), format!("row `{}`: bad {name} `{raw}`", rec.iter().collect::<Vec<_>>().join(",")))
    })
}

/// Capture histories together with the horizon implied by the data.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryData {
    pub histories: Vec<CaptureHistory>,
    pub horizon: usize,
}

/// Reads long-format capture histories. Individuals keep the order in
/// which they first appear; each individual's rows must cover consecutive
/// occasions.
pub fn read_histories<R: Read>(r: R) -> Result<HistoryData, FormatError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &HISTORY_HEADER)?;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut histories: Vec<CaptureHistory> = Vec::new();
    let mut first_line: Vec<u64> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 3 {
            return Err(FormatError::parse(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(FormatError::parse(line, "empty id"));
        }
        let t: usize = field(&rec, 1, "occasion t")?;
        let x: u8 = field(&rec, 2, "observation x")?;
        if x > 1 {
            return Err(FormatError::parse(line, format!("row `{}`: x must be 0 or 1", rec.iter().collect::<Vec<_>>().join(","))));
        }
        match index.get(&id) {
            Some(&k) => {
                let h = &mut histories[k];
                let expected = h.first_occasion + h.len();
                if t != expected {
                    return Err(FormatError::parse(line, format!("individual {id}: expected occasion {expected}, found {t}")));
                }
                h.observations.push(x);
            }
            None => {
                index.insert(id.clone(), histories.len());
                histories.push(CaptureHistory::new(id, t, vec![x]));
                first_line.push(line);
            }
        }
    }
    let horizon = histories.iter().map(|h| h.first_occasion + h.len()).max().unwrap_or(0);
    for (h, &line) in histories.iter().zip(&first_line) {
        validate_history(h, horizon).map_err(|e| FormatError::parse(line, e.to_string()))?;
    }
    Ok(HistoryData { histories, horizon })
}

pub fn write_histories<W: Write>(w: W, histories: &[CaptureHistory]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(HISTORY_HEADER)?;
    for h in histories {
        for (k, &x) in h.observations.iter().enumerate() {
            wtr.write_record([h.id.as_str(), &(h.first_occasion + k).to_string(), &x.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `id,pi,gHH,gAA` rows; used for truth files and posterior means.
pub fn write_truth<W: Write>(w: W, ids: &[String], params: &[IndividualParams]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(TRUTH_HEADER)?;
    for (id, p) in ids.iter().zip(params) {
        wtr.write_record([id.clone(), p.pi.to_string(), p.stay_here.to_string(), p.stay_away.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_truth<R: Read>(r: R) -> Result<TruthRecord, FormatError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &TRUTH_HEADER)?;
    let mut ids = Vec::new();
    let mut params = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let p = |k: usize, name: &str| -> Result<f64, FormatError> {
            let v: f64 = field(&rec, k, name)?;
            if v > 0.0 && v < 1.0 {
                Ok(v)
            } else {
                Err(FormatError::parse(line_of(&rec), format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        ids.push(rec[0].to_string());
        params.push(IndividualParams { pi: p(1, "pi")?, stay_here: p(2, "gHH")?, stay_away: p(3, "gAA")? });
    }
    Ok(TruthRecord { ids, params, generating: None })
}

/// Posterior samples as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    /// Individual ids, in the order their θ rows appear.
    pub ids: Vec<String>,
    pub samples: Vec<PosteriorSample>,
}

pub fn write_samples<W: Write>(w: W, ids: &[String], samples: &[PosteriorSample]) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SAMPLES_HEADER)?;
    for s in samples {
        let iter = s.iteration.to_string();
        for block in Block::ALL {
            for (name, value) in HYPER_FIELDS.iter().zip(s.hypers[block.index()].values()) {
                wtr.write_record([iter.as_str(), block.name(), name, &value.to_string()])?;
            }
        }
        if let Some(thetas) = &s.thetas {
            for block in Block::ALL {
                for (id, p) in ids.iter().zip(thetas) {
                    wtr.write_record([iter.as_str(), block.name(), &format!("{THETA_PREFIX}{id}"), &p.get(block).to_string()])?;
                }
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(r: R) -> Result<SampleTable, FormatError> {
    #[derive(Default)]
    struct Partial {
        iteration: u64,
        hypers: [[Option<f64>; 4]; 3],
        thetas: Vec<[Option<f64>; 3]>,
        line: u64,
    }
    let finish = |p: Partial, ids: &[String]| -> Result<PosteriorSample, FormatError> {
        let mut hypers = [HyperRecord { a: 0.0, b: 0.0, logit_mean: 0.0, logit_sd: 0.0 }; 3];
        for block in Block::ALL {
            let v = p.hypers[block.index()];
            let get = |k: usize| {
                v[k].ok_or_else(|| FormatError::parse(p.line, format!("iteration {}: missing {block}.{}", p.iteration, HYPER_FIELDS[k])))
            };
            hypers[block.index()] = HyperRecord { a: get(0)?, b: get(1)?, logit_mean: get(2)?, logit_sd: get(3)? };
        }
        let thetas = if p.thetas.is_empty() {
            None
        } else {
            if p.thetas.len() != ids.len() {
                return Err(FormatError::parse(p.line, format!("iteration {}: θ rows for {} of {} individuals", p.iteration, p.thetas.len(), ids.len())));
            }
            let mut out = Vec::with_capacity(p.thetas.len());
            for (i, t) in p.thetas.iter().enumerate() {
                match t {
                    [Some(pi), Some(hh), Some(aa)] => out.push(IndividualParams { pi: *pi, stay_here: *hh, stay_away: *aa }),
                    _ => return Err(FormatError::parse(p.line, format!("iteration {}: incomplete θ for {}", p.iteration, ids[i]))),
                }
            }
            Some(out)
        };
        Ok(PosteriorSample { iteration: p.iteration, hypers, thetas })
    };

    let mut rdr = reader(r);
    check_header(&mut rdr, &SAMPLES_HEADER)?;
    let mut ids: Vec<String> = Vec::new();
    let mut id_index: HashMap<String, usize> = HashMap::new();
    let mut samples = Vec::new();
    let mut current: Option<Partial> = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        if rec.len() != 4 {
            return Err(FormatError::parse(line, format!("expected 4 fields, found {}", rec.len())));
        }
        let iteration: u64 = field(&rec, 0, "iteration")?;
        let block = Block::from_name(&rec[1]).ok_or_else(|| FormatError::parse(line, format!("unknown block `{}`", &rec[1])))?;
        let value: f64 = field(&rec, 3, "value")?;
        if current.as_ref().is_some_and(|p| p.iteration != iteration) {
            samples.push(finish(current.take().expect("checked"), &ids)?);
        }
        let part = current.get_or_insert_with(|| Partial { iteration, line, ..Default::default() });
        let name = &rec[2];
        if let Some(id) = name.strip_prefix(THETA_PREFIX) {
            let idx = *id_index.entry(id.to_string()).or_insert_with(|| {
                ids.push(id.to_string());
                ids.len() - 1
            });
            if part.thetas.len() <= idx {
                part.thetas.resize(idx + 1, [None; 3]);
            }
            part.thetas[idx][block.index()] = Some(value);
        } else {
            let k = HYPER_FIELDS
                .iter()
                .position(|f| *f == name)
                .ok_or_else(|| FormatError::parse(line, format!("unknown name `{name}`")))?;
            part.hypers[block.index()][k] = Some(value);
        }
    }
    if let Some(p) = current {
        samples.push(finish(p, &ids)?);
    }
    Ok(SampleTable { ids, samples })
}

pub fn write_summary<W: Write>(w: W, summary: &Summary) -> Result<(), FormatError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SUMMARY_HEADER)?;
    for h in &summary.hypers {
        for (name, m) in HYPER_FIELDS.iter().zip(h.fields()) {
            wtr.write_record([h.block.name(), name, &m.mean.to_string(), &m.sd.to_string()])?;
        }
    }
    if let Some(acc) = summary.acceptance {
        for block in Block::ALL {
            wtr.write_record([block.name(), "acceptance", &acc[block.index()].to_string(), ""])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// One `block,name,mean,sd` row; `sd` is empty for acceptance rows.
pub type SummaryRow = (Block, String, f64, Option<f64>);

pub fn read_summary<R: Read>(r: R) -> Result<Vec<SummaryRow>, FormatError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &SUMMARY_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let block = Block::from_name(&rec[0]).ok_or_else(|| FormatError::parse(line_of(&rec), "unknown block"))?;
        let mean: f64 = field(&rec, 2, "mean")?;
        let sd = if rec[3].is_empty() { None } else { Some(field(&rec, 3, "sd")?) };
        out.push((block, rec[1].to_string(), mean, sd));
    }
    Ok(out)
}

pub fn parse_config(text: &str) -> Result<RunConfig, FormatError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].lines().count().max(1) as u64).unwrap_or(0);
        FormatError::parse(line, e.message().to_string())
    })?;
    config.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(config)
}

pub fn config_to_toml(config: &RunConfig) -> String {
    toml::to_string_pretty(config).expect("RunConfig serializes")
}

pub fn load_config(path: &Path) -> Result<RunConfig, FormatError> {
    parse_config(&fs::read_to_string(path)?)
}

/// Parses a TOML proposal file with keys `mean`, `scale` (row-major) and `nu`.
pub fn parse_mvt(text: &str) -> Result<MvtProposal, FormatError> {
    let spec: MvtSpec = toml::from_str(text).map_err(|e| FormatError::parse(0, e.message().to_string()))?;
    MvtProposal::from_spec(&spec).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn mvt_to_toml(p: &MvtProposal) -> String {
    toml::to_string(&p.to_spec()).expect("MvtSpec serializes")
}
