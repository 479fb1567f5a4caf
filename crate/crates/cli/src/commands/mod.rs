pub mod curvature;
pub mod highdim;
pub mod instability;
pub mod reduce;
pub mod variation;

use serde::Serialize;

use hbern::error::{Error, Result};
use hbern::hcalc::QuadratureSpec;

use crate::config::RunConfig;

/// What a command produced: the JSON record and, for some commands, a CSV table.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: serde_json::Value,
    pub csv: Option<String>,
    /// Process exit code; nonzero for structured not-applicable outcomes.
    pub exit_code: i32,
}

impl Report {
    pub fn new(record: &impl Serialize, csv: Option<String>) -> Result<Self> {
        let json = serde_json::to_value(record).map_err(|e| Error::numeric(format!("cannot serialize report: {e}")))?;
        Ok(Self { json, csv, exit_code: 0 })
    }
}

/// Default quadrature, with `quad_tol` as the relative tolerance when given.
pub fn quad_spec(rc: &RunConfig) -> Result<QuadratureSpec> {
    let q = QuadratureSpec::default();
    match rc.get::<f64>("quad_tol")? {
        Some(t) if t > 0.0 && t < 1.0 => Ok(q.with_rel_tol(t)),
        Some(t) => Err(Error::invalid(format!("quad_tol must be in (0, 1), got {t}"))),
        None => Ok(q),
    }
}
