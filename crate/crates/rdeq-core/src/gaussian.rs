//! Closed-form quadratic-Gaussian regions.
//!
//! The source is `X ~ N(0, σ_X²)`, observed as `Y_j = X + N_j`, with the
//! eavesdropper either blind or holding `E = X + N_E`. Operating points are
//! parametrized by per-agent quantization rates `(r1, r2)`; each feasible
//! pair yields the full set of rate lower bounds and equivocation upper
//! bounds, all in bits. Differential entropies use base-2 logarithms, so
//! the recurring constant is `½·log2(2πe)`.

use serde::Serialize;
use std::f64::consts::{E, PI};

use crate::error::Error;
use crate::Result;

/// Variances of the Gaussian model. `var_ne = f64::INFINITY` is the
/// first-class sentinel for an eavesdropper without side information; the
/// with-side-information formulas then reduce exactly, not approximately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianParams {
    pub var_x: f64,
    pub var_n1: f64,
    pub var_n2: f64,
    pub var_ne: f64,
}

impl GaussianParams {
    pub fn new(var_x: f64, var_n1: f64, var_n2: f64, var_ne: f64) -> Result<Self> {
        for (name, v) in [("var_x", var_x), ("var_n1", var_n1), ("var_n2", var_n2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Infeasible(format!(
                    "{name} must be a positive finite variance, got {v}"
                )));
            }
        }
        if !(var_ne > 0.0) {
            return Err(Error::Infeasible(format!(
                "var_ne must be positive (or infinite), got {var_ne}"
            )));
        }
        Ok(Self {
            var_x,
            var_n1,
            var_n2,
            var_ne,
        })
    }

    /// Eavesdropper without side information.
    pub fn no_side_info(var_x: f64, var_n1: f64, var_n2: f64) -> Result<Self> {
        Self::new(var_x, var_n1, var_n2, f64::INFINITY)
    }

    pub fn has_side_info(&self) -> bool {
        self.var_ne.is_finite()
    }
}

/// Per-agent quantization rates, bits/symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantRates {
    pub r1: f64,
    pub r2: f64,
}

impl QuantRates {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 >= 0.0 && r2 >= 0.0) {
            return Err(Error::Infeasible(format!(
                "quantization rates must be non-negative, got ({r1}, {r2})"
            )));
        }
        Ok(Self { r1, r2 })
    }
}

/// Every constraint right-hand side of a Gaussian region evaluation at a
/// fixed `(r1, r2, D)`. For the no-side-information region the secrecy
/// gain terms `t1`, `t2` are identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussRegionEval {
    pub r1_lb: f64,
    pub r2_lb: f64,
    pub sum_lb: f64,
    pub d1_ub: f64,
    pub d2_ub: f64,
    pub dsum_ub: f64,
    pub d1_minus_r2_ub: f64,
    pub d2_minus_r1_ub: f64,
    pub d_min: f64,
    pub t1: f64,
    pub t2: f64,
}

/// `½·log2(2πe)`, the bits-per-sample constant of Gaussian differential
/// entropy.
pub fn half_log2_2pie() -> f64 {
    0.5 * (2.0 * PI * E).log2()
}

/// Fraction of the observation's precision retained at quantization rate
/// `r`: `1 - 2^(-2r)`.
fn gain(r: f64) -> f64 {
    1.0 - (-2.0 * r).exp2()
}

/// Effective observation noise variance after quantization at rate `r`:
/// `σ_N² / (1 - 2^(-2r))`, infinite at `r = 0`.
fn effective_var(var_n: f64, r: f64) -> f64 {
    let g = gain(r);
    if g == 0.0 {
        f64::INFINITY
    } else {
        var_n / g
    }
}

/// Minimal achievable distortion at quantization rates `(r1, r2)`: the
/// reciprocal of the combined precision `1/σ_X² + Σ_j (1-2^(-2r_j))/σ_Nj²`.
pub fn d_min(params: &GaussianParams, rates: &QuantRates) -> f64 {
    1.0 / (1.0 / params.var_x + gain(rates.r1) / params.var_n1 + gain(rates.r2) / params.var_n2)
}

/// The two secrecy gain terms. `T_j` rewards making the coarse layer carry
/// the refinement (rather than staying silent) when the eavesdropper's
/// side information is noisier than the other agent's quantized
/// observation. Zero whenever either effective observation variance or the
/// side-information variance is infinite.
pub fn t_terms(params: &GaussianParams, rates: &QuantRates) -> (f64, f64) {
    let eff1 = effective_var(params.var_n1, rates.r1);
    let eff2 = effective_var(params.var_n2, rates.r2);
    let t = |num_eff: f64, den_eff: f64| -> f64 {
        if !params.var_ne.is_finite() || !num_eff.is_finite() || !den_eff.is_finite() {
            return 0.0;
        }
        let arg = 1.0 + (num_eff - params.var_ne) / (den_eff + params.var_ne);
        if arg <= 0.0 {
            0.0
        } else {
            (0.5 * arg.log2()).max(0.0)
        }
    };
    (t(eff2, eff1), t(eff1, eff2))
}

/// Correlation carried between the two quantized observations,
/// `½·log2((σ_X² + σ_N1²/(1-2^(-2r1))) / (σ_N1²/(1-2^(-2r1)) + σ_N2²/(1-2^(-2r2))))`.
///
/// The numerator references agent 1 in all three gated inequalities; the
/// asymmetry is intentional and matches the stated region.
fn quantized_cross_info(params: &GaussianParams, rates: &QuantRates) -> f64 {
    let eff1 = effective_var(params.var_n1, rates.r1);
    let eff2 = effective_var(params.var_n2, rates.r2);
    if eff1.is_infinite() || eff2.is_infinite() {
        return 0.0;
    }
    0.5 * ((params.var_x + eff1) / (eff1 + eff2)).log2()
}

fn check_feasible(params: &GaussianParams, rates: &QuantRates, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Infeasible(format!(
            "distortion target must be positive, got {d}"
        )));
    }
    let dm = d_min(params, rates);
    if d < dm {
        return Err(Error::Infeasible(format!(
            "distortion target {d} below the minimum {dm} achievable at \
             (r1, r2) = ({}, {}); gap {:.6e}",
            rates.r1,
            rates.r2,
            dm - d
        )));
    }
    Ok(dm)
}

/// Region evaluation with no side information at the eavesdropper.
pub fn region_no_si(
    params: &GaussianParams,
    rates: &QuantRates,
    d: f64,
) -> Result<GaussRegionEval> {
    let dm = check_feasible(params, rates, d)?;
    let c = half_log2_2pie();
    let half_log_inv_d = 0.5 * (1.0 / d).log2();
    let half_log_inv_vx = 0.5 * (1.0 / params.var_x).log2();
    // Precision visible to the decoder from the other agent alone.
    let b1 = 1.0 / params.var_x + gain(rates.r2) / params.var_n2;
    let b2 = 1.0 / params.var_x + gain(rates.r1) / params.var_n1;

    Ok(GaussRegionEval {
        r1_lb: rates.r1 + half_log_inv_d - 0.5 * b1.log2(),
        r2_lb: rates.r2 + half_log_inv_d - 0.5 * b2.log2(),
        sum_lb: rates.r1 + rates.r2 + half_log_inv_d - half_log_inv_vx,
        d1_ub: c + 0.5 * params.var_x.log2() - half_log_inv_d + 0.5 * b1.log2(),
        d2_ub: c + 0.5 * params.var_x.log2() - half_log_inv_d + 0.5 * b2.log2(),
        dsum_ub: 2.0 * c - half_log_inv_d - half_log_inv_vx,
        d1_minus_r2_ub: c - half_log_inv_d - rates.r2,
        d2_minus_r1_ub: c - half_log_inv_d - rates.r1,
        d_min: dm,
        t1: 0.0,
        t2: 0.0,
    })
}

/// Region evaluation with side information `E = X + N_E` at the
/// eavesdropper. At `var_ne = ∞` (the sentinel) this reduces to
/// [`region_no_si`].
pub fn region_si(params: &GaussianParams, rates: &QuantRates, d: f64) -> Result<GaussRegionEval> {
    let dm = check_feasible(params, rates, d)?;
    let c = half_log2_2pie();
    let half_log_inv_d = 0.5 * (1.0 / d).log2();
    let half_log_inv_vx = 0.5 * (1.0 / params.var_x).log2();
    // 1/var_ne is exactly 0.0 at the infinity sentinel.
    let he_bracket = 1.0 / params.var_x + 1.0 / params.var_ne;
    let half_log_he = 0.5 * he_bracket.log2();
    let b1 = 1.0 / params.var_x + gain(rates.r2) / params.var_n2;
    let b2 = 1.0 / params.var_x + gain(rates.r1) / params.var_n1;

    let (t1, t2) = t_terms(params, rates);
    let gate = |active: bool| -> f64 {
        if active {
            quantized_cross_info(params, rates)
        } else {
            0.0
        }
    };

    Ok(GaussRegionEval {
        r1_lb: rates.r1 + half_log_inv_d - 0.5 * b1.log2(),
        r2_lb: rates.r2 + half_log_inv_d - 0.5 * b2.log2(),
        sum_lb: rates.r1 + rates.r2 + half_log_inv_d - half_log_inv_vx,
        d1_ub: c - half_log_he - half_log_inv_d + 0.5 * b1.log2() + t1,
        d2_ub: c - half_log_he - half_log_inv_d + 0.5 * b2.log2() + t2,
        dsum_ub: 2.0 * c - 2.0 * half_log_he - half_log_inv_d
            + half_log_inv_vx
            + t1
            + t2
            + gate(t1 + t2 > 0.0),
        d1_minus_r2_ub: c - half_log_he - half_log_inv_d - rates.r2 + t1 + gate(t1 > 0.0),
        d2_minus_r1_ub: c - half_log_he - half_log_inv_d - rates.r1 + t2 + gate(t2 > 0.0),
        d_min: dm,
        t1,
        t2,
    })
}

/// Dispatches on whether the parameters carry side information.
pub fn region(params: &GaussianParams, rates: &QuantRates, d: f64) -> Result<GaussRegionEval> {
    if params.has_side_info() {
        region_si(params, rates, d)
    } else {
        region_no_si(params, rates, d)
    }
}

/// One row of a boundary sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub r1: f64,
    pub r2: f64,
    pub eval: GaussRegionEval,
}

/// The `(r1, r2)` grid used by [`boundary_sweep`]: rate 0 plus rates whose
/// retention factor `1 - 2^(-2r)` is logarithmically spaced, resolving the
/// near-zero-rate regime where the region bends.
pub fn sweep_grid(grid: usize) -> Vec<f64> {
    let g_lo: f64 = 1e-4;
    let g_hi: f64 = 1.0 - 2f64.powi(-32);
    let mut rs = Vec::with_capacity(grid);
    rs.push(0.0);
    for k in 1..grid {
        let t = if grid == 2 {
            1.0
        } else {
            (k - 1) as f64 / (grid - 2) as f64
        };
        let g = g_lo * (g_hi / g_lo).powf(t);
        rs.push(-0.5 * (1.0 - g).log2());
    }
    rs
}

/// Sweeps `(r1, r2)` over the grid, keeping the pairs whose minimum
/// distortion does not exceed the target `d`. Rejects targets below the
/// infinite-rate limit.
pub fn boundary_sweep(params: &GaussianParams, d: f64, grid: usize) -> Result<Vec<SweepRow>> {
    if grid < 2 {
        return Err(Error::Infeasible(format!("grid must be >= 2, got {grid}")));
    }
    let limit = 1.0 / (1.0 / params.var_x + 1.0 / params.var_n1 + 1.0 / params.var_n2);
    if d < limit {
        return Err(Error::Infeasible(format!(
            "distortion target {d} below the infinite-rate limit {limit}"
        )));
    }
    let rs = sweep_grid(grid);
    let mut rows = Vec::new();
    for &r1 in &rs {
        for &r2 in &rs {
            let rates = QuantRates { r1, r2 };
            if d_min(params, &rates) <= d {
                rows.push(SweepRow {
                    r1,
                    r2,
                    eval: region(params, &rates, d)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Converts an equivocation rate (bits) into the induced lower bound on
/// the eavesdropper's mean-square estimation error: `θ = 2^(2Δ) / (2πe)`.
pub fn equiv_to_mmse(delta: f64) -> f64 {
    (2.0 * delta).exp2() / (2.0 * PI * E)
}

/// Inverse of [`equiv_to_mmse`]: `Δ = ½·log2(2πe·θ)`.
pub fn mmse_to_equiv(theta: f64) -> f64 {
    0.5 * (2.0 * PI * E * theta).log2()
}

/// Fixed, versioned column order for sweep emission.
pub const SWEEP_CSV_HEADER: &str =
    "r1,r2,R1lb,R2lb,SUMlb,D1ub,D2ub,DSUMub,D1mR2ub,D2mR1ub,Dmin,T1,T2";

/// Formats a float with 17 significant digits, enough to reproduce the
/// exact binary value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders sweep rows as CSV (header plus one line per feasible cell).
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let e = &row.eval;
        let cols = [
            row.r1,
            row.r2,
            e.r1_lb,
            e.r2_lb,
            e.sum_lb,
            e.d1_ub,
            e.d2_ub,
            e.dsum_ub,
            e.d1_minus_r2_ub,
            e.d2_minus_r1_ub,
            e.d_min,
            e.t1,
            e.t2,
        ];
        let line: Vec<String> = cols.iter().map(|&c| fmt_f64(c)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
