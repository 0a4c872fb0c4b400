//! Output records: per-run JSON and the plot-ready CSV rows.
//!
//! CSV bytes are a pure function of the inputs (no timestamps), so reruns
//! are byte-identical; the JSON metadata carries a timestamp field that is
//! explicitly excluded from that guarantee.

use serde::Serialize;

use crate::graph::Vertex;
use crate::solver::Bracket;

#[derive(Debug, Clone, Serialize)]
pub struct WatchValue {
    pub vertex: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveRecord {
    pub set_name: String,
    pub radius: u32,
    pub iterations: u32,
    pub converged: bool,
    pub width: f64,
    pub watch: Vec<WatchValue>,
}

impl SolveRecord {
    pub fn from_bracket<V: Vertex>(b: &Bracket<V>, watch: &[V]) -> Self {
        SolveRecord {
            set_name: b.set_name.clone(),
            radius: b.radius,
            iterations: b.iterations(),
            converged: b.converged,
            width: b.width(),
            watch: watch
                .iter()
                .filter_map(|v| {
                    b.at(v).ok().map(|(lower, upper)| WatchValue {
                        vertex: v.to_string(),
                        lower,
                        upper,
                    })
                })
                .collect(),
        }
    }
}

/// One CSV row of a q-table.
#[derive(Debug, Clone, Serialize)]
pub struct QRow {
    pub set_name: String,
    pub n_or_index: i64,
    pub r: u32,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub converged: bool,
    /// Sweep count of the underlying runs (JSON provenance; not a CSV column).
    pub iterations: u32,
}

pub const Q_TABLE_HEADER: &str = "set_name,n_or_index,R,lower,upper,width,converged";

impl QRow {
    pub fn from_bracket<V: Vertex>(b: &Bracket<V>, index: i64) -> Self {
        let (lower, upper) = b.at_root();
        QRow {
            set_name: b.set_name.clone(),
            n_or_index: index,
            r: b.radius,
            lower,
            upper,
            width: upper - lower,
            converged: b.converged,
            iterations: b.iterations(),
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.17e},{:.17e},{:.17e},{}",
            self.set_name, self.n_or_index, self.r, self.lower, self.upper, self.width, self.converged
        )
    }
}

pub fn q_table_csv(rows: &[QRow]) -> String {
    let mut out = String::from(Q_TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Trial CSV for simulation scenarios.
pub const TRIAL_HEADER: &str = "trial_id,outcome,hit_A,generations_run";

pub fn trial_csv(records: &[crate::montecarlo::TrialRecord]) -> String {
    let mut out = String::from(TRIAL_HEADER);
    out.push('\n');
    for r in records {
        let outcome = match r.outcome {
            crate::montecarlo::Outcome::Extinct => "extinct",
            crate::montecarlo::Outcome::SurvivedHorizon => "survived_horizon",
            crate::montecarlo::Outcome::Censored => "censored",
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.trial,
            outcome,
            u8::from(r.hit_target),
            r.generations_run
        ));
    }
    out
}
