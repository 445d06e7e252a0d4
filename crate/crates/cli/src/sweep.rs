//! Runs a sweep point by point.

use std::time::Instant;

use idnc_core::simulator::{run_experiment, ExperimentSummary, ScenarioConfig, SimError};
use idnc_core::PolicyId;
use serde::Serialize;
use thiserror::Error;

use crate::config::{SweepSpec, Variable};

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub policy: PolicyId,
    pub config: ScenarioConfig,
    pub summary: ExperimentSummary,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn variable(&self) -> Variable {
        self.spec.variable
    }

    /// Rows of one policy in sweep order.
    pub fn series(&self, policy: PolicyId) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.policy == policy)
    }
}

/// A sweep that stopped early, with every row finished before the error.
#[derive(Debug, Error)]
#[error("sweep stopped at {variable} = {value} with {policy}: {source}")]
pub struct PartialSweep {
    pub table: SweepTable,
    pub variable: Variable,
    pub value: f64,
    pub policy: PolicyId,
    #[source]
    pub source: SimError,
}

/// One experiment per (value, policy), values outermost.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable, Box<PartialSweep>> {
    let mut table = SweepTable {
        spec: spec.clone(),
        rows: Vec::with_capacity(spec.values.len() * spec.policies.len()),
    };
    for &value in &spec.values {
        for &policy in &spec.policies {
            let config = spec.point(value, policy);
            let started = Instant::now();
            match run_experiment(&config) {
                Ok(summary) => table.rows.push(SweepRow {
                    value,
                    policy,
                    config,
                    summary,
                    seconds: started.elapsed().as_secs_f64(),
                }),
                Err(source) => {
                    return Err(Box::new(PartialSweep {
                        table,
                        variable: spec.variable,
                        value,
                        policy,
                        source,
                    }))
                }
            }
        }
    }
    Ok(table)
}
