//! Critical-path cost model of accelerated BCD with and without unrolling.
//!
//! Big-O terms are evaluated with unit constants, so only ratios between
//! predictions are meaningful. `log P` is floored at 1 so single-worker
//! predictions stay comparable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostAlgorithm {
    AccBcd,
    SaAccBcd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    /// Iterations `H`.
    pub iters: usize,
    /// Unroll depth `s`; ignored by the classic method.
    pub unroll: usize,
    pub block_size: usize,
    pub workers: usize,
    pub num_rows: usize,
    pub num_cols: usize,
    /// Fraction of nonzeros, `0 < f ≤ 1`.
    pub density: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPrediction {
    pub flops: f64,
    pub memory: f64,
    pub latency: f64,
    pub bandwidth: f64,
}

pub fn predict_costs(algorithm: CostAlgorithm, inputs: &CostInputs) -> Result<CostPrediction> {
    let CostInputs { iters, unroll, block_size, workers, num_rows, num_cols, density } = *inputs;
    if iters == 0 || unroll == 0 || block_size == 0 || workers == 0 || num_rows == 0 || num_cols == 0 {
        return Err(Error::Config("cost model parameters must be positive".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density must lie in (0, 1], got {density}")));
    }
    let h = iters as f64;
    let mu = block_size as f64;
    let p = workers as f64;
    let (m, n, f) = (num_rows as f64, num_cols as f64, density);
    let log_p = p.log2().max(1.0);
    let s = match algorithm {
        CostAlgorithm::AccBcd => 1.0,
        CostAlgorithm::SaAccBcd => unroll as f64,
    };
    let rounds = match algorithm {
        CostAlgorithm::AccBcd => h,
        CostAlgorithm::SaAccBcd => iters.div_ceil(unroll) as f64,
    };
    Ok(CostPrediction {
        flops: h * mu * mu * s * f * m / p + h * mu.powi(3),
        memory: (f * m * n + m) / p + mu * mu * s * s + n,
        latency: rounds * log_p,
        bandwidth: h * s * mu * mu * log_p,
    })
}
