//! Generalization-bound evaluation with per-term breakdowns.
//!
//! The headline quantity is
//!
//! ```text
//! 4*C*R_m(H) + 2*sqrt((2*k*d_N*(1 + ln(T/k)) + d_N*ln(2m) + ln(4/delta)) / (2m))
//! ```
//!
//! evaluated with big-O constant 1 and natural logarithms throughout. Every
//! report carries the caveat that values hold up to the analysis's universal
//! constants; relative comparisons across `(k, T, m)` are the deliverable.

use serde::{Deserialize, Serialize};

use crate::complexity::{bartlett_bound, natarajan_nn_bound, ComplexityEstimate, NormBudget};
use crate::error::{Error, Result};
use crate::floatfmt::float17;

/// Caveat echoed in every report header.
pub const BOUND_CAVEAT: &str = "bound up to universal constants (big-O constant = 1)";

/// Pinned header of the sweep CSV.
pub const SWEEP_CSV_HEADER: &str =
    "k,T,m,dN,C,R,delta,rademacher_term,sparsity_term,sample_term,confidence_term,total";

/// Everything the bound consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Loss Lipschitz constant `C`.
    pub lipschitz: f64,
    /// Rademacher complexity of the expert class.
    pub rademacher: ComplexityEstimate,
    /// Natarajan dimension of the router class (possibly an upper bound).
    pub natarajan_dim: f64,
    /// Training sample count `m`.
    pub sample_count: u64,
    /// Total expert count `T`.
    pub expert_count: u64,
    /// Selected expert count `k`.
    pub selected_count: u64,
    /// Confidence parameter `delta`.
    pub delta: f64,
}

impl BoundInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lipschitz: f64,
        rademacher: ComplexityEstimate,
        natarajan_dim: f64,
        sample_count: u64,
        expert_count: u64,
        selected_count: u64,
        delta: f64,
    ) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::input(format!(
                "lipschitz constant C must be nonnegative and finite, got {lipschitz}"
            )));
        }
        if !(rademacher.value.is_finite() && rademacher.value >= 0.0) {
            return Err(Error::input(format!(
                "rademacher complexity R must be nonnegative and finite, got {}",
                rademacher.value
            )));
        }
        if !(natarajan_dim.is_finite() && natarajan_dim >= 0.0) {
            return Err(Error::input(format!(
                "natarajan_dim must be nonnegative and finite, got {natarajan_dim}"
            )));
        }
        if sample_count == 0 {
            return Err(Error::input("sample_count m must be at least 1"));
        }
        if selected_count == 0 || selected_count > expert_count {
            return Err(Error::input(format!(
                "need 1 <= k <= T, got k={selected_count}, T={expert_count}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::input(format!("delta must be in (0, 1), got {delta}")));
        }
        Ok(BoundInputs {
            lipschitz,
            rademacher,
            natarajan_dim,
            sample_count,
            expert_count,
            selected_count,
            delta,
        })
    }
}

/// The bound split into its terms.
///
/// `total = rademacher_term + 2*sqrt((sparsity_term + sample_term +
/// confidence_term) / (2m))`. When the Rademacher input carries Monte-Carlo
/// uncertainty, `total_halfwidth` is the propagated `4*C*stderr` band around
/// `total`; it is zero for exact and closed-form inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub rademacher_term: f64,
    pub sparsity_term: f64,
    pub sample_term: f64,
    pub confidence_term: f64,
    pub total: f64,
    pub total_halfwidth: f64,
}

/// Evaluate the bound exactly as displayed, big-O constant 1, natural logs.
pub fn generalization_bound(inputs: &BoundInputs) -> BoundBreakdown {
    let c = inputs.lipschitz;
    let r = inputs.rademacher.value;
    let d_n = inputs.natarajan_dim;
    let m = inputs.sample_count as f64;
    let t = inputs.expert_count as f64;
    let k = inputs.selected_count as f64;

    let rademacher_term = 4.0 * c * r;
    let sparsity_term = 2.0 * k * d_n * (1.0 + (t / k).ln());
    let sample_term = d_n * (2.0 * m).ln();
    let confidence_term = (4.0 / inputs.delta).ln();
    let radical = 2.0 * ((sparsity_term + sample_term + confidence_term) / (2.0 * m)).sqrt();
    BoundBreakdown {
        rademacher_term,
        sparsity_term,
        sample_term,
        confidence_term,
        total: rademacher_term + radical,
        total_halfwidth: 4.0 * c * inputs.rademacher.stderr,
    }
}

/// The network instantiation: expert complexity from the norm-budget bound,
/// router dimension from the `constant * d * p^2` closed form, then the
/// main bound evaluated on those. Definitionally a composition, and
/// implemented as one.
#[allow(clippy::too_many_arguments)]
pub fn network_generalization_bound(
    budget: &NormBudget,
    router_output_count: u64,
    router_param_count: u64,
    sample_count: u64,
    expert_count: u64,
    selected_count: u64,
    delta: f64,
    lipschitz: f64,
    natarajan_constant: f64,
) -> Result<BoundBreakdown> {
    let rademacher = bartlett_bound(budget, sample_count)?;
    let d_n = natarajan_nn_bound(router_output_count, router_param_count, natarajan_constant)?;
    let inputs = BoundInputs::new(
        lipschitz,
        rademacher,
        d_n,
        sample_count,
        expert_count,
        selected_count,
        delta,
    )?;
    Ok(generalization_bound(&inputs))
}

/// One row of the sparsity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityRow {
    pub k: u64,
    pub radical_term: f64,
}

/// The sparsity-dependent radical `2*sqrt((2k*d_N*(1+ln(T/k)) + d_N*ln(2m) +
/// ln(4/delta)) / (2m))` tabulated over `k = 1..=T`.
pub fn sparsity_profile(natarajan_dim: f64, sample_count: u64, expert_count: u64, delta: f64) -> Result<Vec<SparsityRow>> {
    if expert_count == 0 {
        return Err(Error::input("expert count must be at least 1"));
    }
    (1..=expert_count)
        .map(|k| {
            let inputs = BoundInputs::new(
                0.0,
                ComplexityEstimate::exact(0.0),
                natarajan_dim,
                sample_count,
                expert_count,
                k,
                delta,
            )?;
            // with C = 0 the rademacher term vanishes and total is the radical
            Ok(SparsityRow {
                k,
                radical_term: generalization_bound(&inputs).total,
            })
        })
        .collect()
}

/// Cartesian sweep grid; axes iterate lexicographically in the order
/// `(k, T, m, dN, C, R, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub k: Vec<u64>,
    pub expert_count: Vec<u64>,
    pub sample_count: Vec<u64>,
    pub natarajan_dim: Vec<f64>,
    pub lipschitz: Vec<f64>,
    pub rademacher: Vec<f64>,
    pub delta: Vec<f64>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
            || self.expert_count.is_empty()
            || self.sample_count.is_empty()
            || self.natarajan_dim.is_empty()
            || self.lipschitz.is_empty()
            || self.rademacher.is_empty()
            || self.delta.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.k.len()
            * self.expert_count.len()
            * self.sample_count.len()
            * self.natarajan_dim.len()
            * self.lipschitz.len()
            * self.rademacher.len()
            * self.delta.len()
    }
}

/// One sweep row: the grid point plus either its breakdown or the validation
/// failure that flagged it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: u64,
    pub expert_count: u64,
    pub sample_count: u64,
    pub natarajan_dim: f64,
    pub lipschitz: f64,
    pub rademacher: f64,
    pub delta: f64,
    pub breakdown: Option<BoundBreakdown>,
    pub error: Option<String>,
}

/// Evaluate the bound on every grid point in deterministic lexicographic
/// order. Invalid points are flagged in their row; the sweep continues.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::input("every sweep axis needs at least one value"));
    }
    let mut rows = Vec::with_capacity(grid.point_count());
    for &k in &grid.k {
        for &t in &grid.expert_count {
            for &m in &grid.sample_count {
                for &d_n in &grid.natarajan_dim {
                    for &c in &grid.lipschitz {
                        for &r in &grid.rademacher {
                            for &delta in &grid.delta {
                                let built = BoundInputs::new(
                                    c,
                                    ComplexityEstimate::exact(r),
                                    d_n,
                                    m,
                                    t,
                                    k,
                                    delta,
                                );
                                let (breakdown, error) = match built {
                                    Ok(inputs) => (Some(generalization_bound(&inputs)), None),
                                    Err(e) => (None, Some(e.to_string())),
                                };
                                rows.push(SweepRow {
                                    k,
                                    expert_count: t,
                                    sample_count: m,
                                    natarajan_dim: d_n,
                                    lipschitz: c,
                                    rademacher: r,
                                    delta,
                                    breakdown,
                                    error,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Sweep rows in the pinned CSV format. Flagged rows carry `nan` in every
/// term column; the JSON mirror holds the diagnostic.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&sweep_csv_row(row));
        out.push('\n');
    }
    out
}

fn sweep_csv_row(row: &SweepRow) -> String {
    let terms = match &row.breakdown {
        Some(b) => [
            b.rademacher_term,
            b.sparsity_term,
            b.sample_term,
            b.confidence_term,
            b.total,
        ],
        None => [f64::NAN; 5],
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        row.k,
        row.expert_count,
        row.sample_count,
        float17(row.natarajan_dim),
        float17(row.lipschitz),
        float17(row.rademacher),
        float17(row.delta),
        float17(terms[0]),
        float17(terms[1]),
        float17(terms[2]),
        float17(terms[3]),
        float17(terms[4]),
    )
}

/// The single-point bound report in the same CSV shape as a sweep row.
pub fn bound_report_csv(inputs: &BoundInputs, breakdown: &BoundBreakdown) -> String {
    let row = SweepRow {
        k: inputs.selected_count,
        expert_count: inputs.expert_count,
        sample_count: inputs.sample_count,
        natarajan_dim: inputs.natarajan_dim,
        lipschitz: inputs.lipschitz,
        rademacher: inputs.rademacher.value,
        delta: inputs.delta,
        breakdown: Some(*breakdown),
        error: None,
    };
    format!("{}\n{}\n", SWEEP_CSV_HEADER, sweep_csv_row(&row))
}
