//! End-to-end simulation studies: hyper-parameter precision against the
//! number of animals, and recovery of individual values against history
//! length.

use std::fmt::Write as _;

use crate::engine::{run_chain, EngineError};
use crate::model::{Block, RunConfig};
use crate::rng::Substreams;
use crate::simulate::{run_design, Design};
use crate::stats::Moments;

pub const SCALING_SIZES: [usize; 3] = [50, 200, 800];
pub const HORIZONS: [usize; 3] = [250, 1000, 4000];

/// Chain length shared by both studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentPlan {
    pub iterations: usize,
    pub burnin: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self { iterations: 15_000, burnin: 5_000 }
    }
}

impl ExperimentPlan {
    fn config(&self) -> RunConfig {
        RunConfig { iterations: self.iterations, burnin: self.burnin, ..Default::default() }
    }
}

// Sub-run seeds are keyed by the design parameter, not its position, so a
// given N or T always sees the same data whatever else is in the study.
const HORIZON_KEY: u64 = 1 << 40;

fn sub_seeds(streams: &Substreams, key: u64) -> (u64, u64) {
    (streams.derive_seed(2 * key), streams.derive_seed(2 * key + 1))
}

/// `(data seed, chain seed)` used for `n` animals in a scaling study run
/// with master seed `seed`.
pub fn scaling_seeds(seed: u64, n: usize) -> (u64, u64) {
    sub_seeds(&Substreams::new(seed), n as u64)
}

/// `(data seed, chain seed)` used for horizon `t` in a horizon study.
pub fn horizon_seeds(seed: u64, t: usize) -> (u64, u64) {
    sub_seeds(&Substreams::new(seed), HORIZON_KEY + t as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub individuals: usize,
    /// `[block][a, b]`
    pub hypers: [[Moments; 2]; 3],
    pub acceptance: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
}

pub fn scaling_experiment(sizes: &[usize], plan: &ExperimentPlan, seed: u64) -> Result<ScalingTable, EngineError> {
    let config = plan.config();
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let (data_seed, chain_seed) = scaling_seeds(seed, n);
        let data = run_design(&Design::AsymptoticN { size: n }, data_seed).map_err(|e| {
            EngineError::Config(crate::model::ModelError::Config(e.to_string()))
        })?;
        let out = run_chain(&data.histories, &config, chain_seed)?;
        let summary = out.summarize(None)?;
        rows.push(ScalingRow {
            individuals: n,
            hypers: summary.hypers.clone().map(|h| [h.a, h.b]),
            acceptance: out.acceptance_rates(),
        });
    }
    Ok(ScalingTable { rows })
}

impl ScalingTable {
    pub const CSV_HEADER: &'static str = "n,block,param,mean,sd";

    pub fn row(&self, individuals: usize) -> Option<&ScalingRow> {
        self.rows.iter().find(|r| r.individuals == individuals)
    }

    /// Long format: one line per (N, block, a|b) plus acceptance rates.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            for block in Block::ALL {
                let [a, b] = r.hypers[block.index()];
                writeln!(s, "{},{},a,{},{}", r.individuals, block, a.mean, a.sd).unwrap();
                writeln!(s, "{},{},b,{},{}", r.individuals, block, b.mean, b.sd).unwrap();
                writeln!(s, "{},{},acceptance,{},", r.individuals, block, r.acceptance[block.index()]).unwrap();
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next() != Some(Self::CSV_HEADER) {
            return Err("bad scaling header".into());
        }
        let mut rows: Vec<ScalingRow> = Vec::new();
        for (k, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(format!("line {}: expected 5 fields", k + 2));
            }
            let n: usize = f[0].parse().map_err(|_| format!("line {}: bad n", k + 2))?;
            let block = Block::from_name(f[1]).ok_or(format!("line {}: bad block", k + 2))?;
            let mean: f64 = f[3].parse().map_err(|_| format!("line {}: bad mean", k + 2))?;
            if rows.last().map(|r| r.individuals) != Some(n) {
                rows.push(ScalingRow { individuals: n, hypers: Default::default(), acceptance: [0.0; 3] });
            }
            let row = rows.last_mut().expect("pushed");
            let sd = || f[4].parse::<f64>().map_err(|_| format!("line {}: bad sd", k + 2));
            match f[2] {
                "a" => row.hypers[block.index()][0] = Moments { mean, sd: sd()? },
                "b" => row.hypers[block.index()][1] = Moments { mean, sd: sd()? },
                "acceptance" => row.acceptance[block.index()] = mean,
                other => return Err(format!("line {}: unknown param {other}", k + 2)),
            }
        }
        Ok(ScalingTable { rows })
    }

    /// Rows are animals, columns are (a, b) per block, cells are
    /// `mean (sd)`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        write!(s, "{:<12}", "").unwrap();
        for block in Block::ALL {
            write!(s, "{:>16}{:>16}", format!("{block} a"), format!("{block} b")).unwrap();
        }
        s.push('\n');
        write!(s, "{:<12}", "TRUTH").unwrap();
        for _ in Block::ALL {
            write!(s, "{:>16}{:>16}", 8, 2).unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{:<12}", format!("{} animals", r.individuals)).unwrap();
            for pair in &r.hypers {
                for m in pair {
                    write!(s, "{:>16}", format!("{:.2} ({:.2})", m.mean, m.sd)).unwrap();
                }
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonRow {
    pub horizon: usize,
    /// Correlation between posterior-mean and true individual values.
    pub correlations: [f64; 3],
    /// Per-block hyper acceptance rate.
    pub acceptance: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonTable {
    pub rows: Vec<HorizonRow>,
}

pub fn horizon_experiment(horizons: &[usize], plan: &ExperimentPlan, seed: u64) -> Result<HorizonTable, EngineError> {
    let config = plan.config();
    let mut rows = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let (data_seed, chain_seed) = horizon_seeds(seed, t);
        let data = run_design(&Design::AsymptoticT { horizon: t }, data_seed).map_err(|e| {
            EngineError::Config(crate::model::ModelError::Config(e.to_string()))
        })?;
        let out = run_chain(&data.histories, &config, chain_seed)?;
        let summary = out.summarize(Some(&data.truth))?;
        let correlations = summary
            .correlations
            .map(|c| c.map(|v| v.unwrap_or(f64::NAN)))
            .unwrap_or([f64::NAN; 3]);
        rows.push(HorizonRow { horizon: t, correlations, acceptance: out.acceptance_rates() });
    }
    Ok(HorizonTable { rows })
}

impl HorizonTable {
    pub const CSV_HEADER: &'static str = "T,block,correlation,acceptance";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            for block in Block::ALL {
                let k = block.index();
                writeln!(s, "{},{},{},{}", r.horizon, block, r.correlations[k], r.acceptance[k]).unwrap();
            }
        }
        s
    }

    pub fn render(&self) -> String {
        let mut s = format!("{:<8}", "T");
        for block in Block::ALL {
            write!(s, "{:>12}", format!("r({block})")).unwrap();
        }
        s.push('\n');
        for r in &self.rows {
            write!(s, "{:<8}", r.horizon).unwrap();
            for c in r.correlations {
                write!(s, "{:>12.4}", c).unwrap();
            }
            s.push('\n');
        }
        s
    }
}
