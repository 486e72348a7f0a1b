//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use collarlab::{BeltramiSet, Collar, CollarParams, Result};

/// The pure single-collar model of width `u` on `n_tau` nodes.
pub fn pure_model(u: f64, n_tau: usize) -> Result<BeltramiSet> {
    let collar: Arc<Collar> = Collar::new(CollarParams::from_u(u, 0.5)?, n_tau)?;
    Ok(BeltramiSet::model(vec![collar], 1, 0.0, 1.0))
}
