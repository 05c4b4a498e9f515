//! Exact evaluators of the achievable (inner) and converse (outer) bound
//! constraint sets for a fixed source and auxiliary-channel configuration,
//! plus the six decoding-order corner points and the rate-split feasibility
//! test behind the binning scheme.

use serde::Serialize;

use crate::error::Error;
use crate::prob::{chain_join, CondPmf, JointDist, SourceSpec, Var};
use crate::Result;

/// Deterministic reconstruction map `x̂(u1, u2)`, stored as a dense table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XhatMap {
    table: Vec<usize>,
    n_u1: usize,
    n_u2: usize,
}

impl XhatMap {
    /// `table` is row-major in `u1` with `n_u1 * n_u2` entries.
    pub fn new(table: Vec<usize>, n_u1: usize, n_u2: usize) -> Self {
        assert_eq!(table.len(), n_u1 * n_u2, "xhat table must be total");
        Self { table, n_u1, n_u2 }
    }

    pub fn get(&self, u1: usize, u2: usize) -> usize {
        self.table[u1 * self.n_u2 + u2]
    }

    pub fn n_u1(&self) -> usize {
        self.n_u1
    }

    pub fn n_u2(&self) -> usize {
        self.n_u2
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }
}

/// Auxiliary quantization layers for both agents: the refinement channels
/// `p(u_j | y_j)`, the coarse layers `p(v_j | u_j)`, and the reconstruction
/// map at the decoder.
#[derive(Debug, Clone)]
pub struct AuxConfig {
    pub pu1_y1: CondPmf,
    pub pu2_y2: CondPmf,
    pub pv1_u1: CondPmf,
    pub pv2_u2: CondPmf,
    pub xhat: XhatMap,
}

impl AuxConfig {
    pub fn new(
        pu1_y1: CondPmf,
        pu2_y2: CondPmf,
        pv1_u1: CondPmf,
        pv2_u2: CondPmf,
        xhat: XhatMap,
    ) -> Result<Self> {
        if pv1_u1.n_in() != pu1_y1.n_out() {
            return Err(Error::DimensionMismatch {
                axis: "p(v1|u1) rows",
                expected: pu1_y1.n_out(),
                got: pv1_u1.n_in(),
            });
        }
        if pv2_u2.n_in() != pu2_y2.n_out() {
            return Err(Error::DimensionMismatch {
                axis: "p(v2|u2) rows",
                expected: pu2_y2.n_out(),
                got: pv2_u2.n_in(),
            });
        }
        if xhat.n_u1() != pu1_y1.n_out() || xhat.n_u2() != pu2_y2.n_out() {
            return Err(Error::DimensionMismatch {
                axis: "xhat table",
                expected: pu1_y1.n_out() * pu2_y2.n_out(),
                got: xhat.n_u1() * xhat.n_u2(),
            });
        }
        Ok(Self {
            pu1_y1,
            pu2_y2,
            pv1_u1,
            pv2_u2,
            xhat,
        })
    }

    /// The trivial configuration: single-letter `U_j` and `V_j`, constant
    /// reconstruction letter 0.
    pub fn degenerate(source: &SourceSpec) -> Self {
        Self {
            pu1_y1: CondPmf::constant(source.ny1()),
            pu2_y2: CondPmf::constant(source.ny2()),
            pv1_u1: CondPmf::constant(1),
            pv2_u2: CondPmf::constant(1),
            xhat: XhatMap::new(vec![0], 1, 1),
        }
    }

    pub fn nv1(&self) -> usize {
        self.pv1_u1.n_out()
    }

    pub fn nv2(&self) -> usize {
        self.pv2_u2.n_out()
    }

    pub fn nu1(&self) -> usize {
        self.pu1_y1.n_out()
    }

    pub fn nu2(&self) -> usize {
        self.pu2_y2.n_out()
    }
}

/// An operating point `(R1, R2, Δ1, Δ2, D)`: link rates and equivocation
/// rates in bits/symbol, distortion in the measure's units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    pub r1: f64,
    pub r2: f64,
    pub d1: f64,
    pub d2: f64,
    pub dist: f64,
}

/// Every constraint right-hand side of a bound evaluation: rate lower
/// bounds, equivocation upper bounds, and the reconstruction distortion.
///
/// `dsum_ub` carries the joint equivocation constraint, which exists only
/// in the inner bound; the outer bound has none and reports `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEval {
    pub r1_lb: f64,
    pub r2_lb: f64,
    pub sum_lb: f64,
    pub d1_ub: f64,
    pub d2_ub: f64,
    pub dsum_ub: Option<f64>,
    pub d1_minus_r2_ub: f64,
    pub d2_minus_r1_ub: f64,
    pub dist_lb: f64,
}

impl BoundEval {
    /// Whether `point` satisfies every constraint of this evaluation with
    /// slack at least `-tol` (rates/distortion at least the lower bounds,
    /// equivocations at most the upper bounds).
    pub fn admits(&self, point: &RegionPoint, tol: f64) -> bool {
        point.r1 >= self.r1_lb - tol
            && point.r2 >= self.r2_lb - tol
            && point.r1 + point.r2 >= self.sum_lb - tol
            && point.d1 <= self.d1_ub + tol
            && point.d2 <= self.d2_ub + tol
            && self.dsum_ub.is_none_or(|b| point.d1 + point.d2 <= b + tol)
            && point.d1 - point.r2 <= self.d1_minus_r2_ub + tol
            && point.d2 - point.r1 <= self.d2_minus_r1_ub + tol
            && point.dist >= self.dist_lb - tol
    }
}

/// The six step-wise decoding orders behind the corner points. `V_j` is
/// always decoded before `U_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecodingOrder {
    V2U2V1U1,
    V2V1U2U1,
    V1V2U2U1,
    V1U1V2U2,
    V1V2U1U2,
    V2V1U1U2,
}

impl DecodingOrder {
    pub const ALL: [DecodingOrder; 6] = [
        DecodingOrder::V2U2V1U1,
        DecodingOrder::V2V1U2U1,
        DecodingOrder::V1V2U2U1,
        DecodingOrder::V1U1V2U2,
        DecodingOrder::V1V2U1U2,
        DecodingOrder::V2V1U1U2,
    ];

    pub fn label(self) -> &'static str {
        match self {
            DecodingOrder::V2U2V1U1 => "V2,U2,V1,U1",
            DecodingOrder::V2V1U2U1 => "V2,V1,U2,U1",
            DecodingOrder::V1V2U2U1 => "V1,V2,U2,U1",
            DecodingOrder::V1U1V2U2 => "V1,U1,V2,U2",
            DecodingOrder::V1V2U1U2 => "V1,V2,U1,U2",
            DecodingOrder::V2V1U1U2 => "V2,V1,U1,U2",
        }
    }
}

/// One corner of the achievable region together with the decoding order
/// that attains it.
#[derive(Debug, Clone, Serialize)]
pub struct CornerPoint {
    pub order: DecodingOrder,
    pub point: RegionPoint,
}

/// Which bound's support caps apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Inner,
    Outer,
}

/// Admissible auxiliary-alphabet caps: for the inner bound
/// `|V_j| ≤ |Y_j| + 9` and `|U_j| ≤ (|Y_j| + 9)(|Y_j| + 5)`; for the outer
/// bound `|V_j| ≤ |Y_j| + 7` and `|U_j| ≤ (|Y_j| + 7)(|Y_j| + 3)`.
pub fn cardinality_caps(kind: BoundKind, ny: usize) -> (usize, usize) {
    match kind {
        BoundKind::Inner => (ny + 9, (ny + 9) * (ny + 5)),
        BoundKind::Outer => (ny + 7, (ny + 7) * (ny + 3)),
    }
}

/// True iff every auxiliary alphabet is within the caps for `kind`.
pub fn check_cardinality(aux: &AuxConfig, kind: BoundKind, source: &SourceSpec) -> bool {
    enforce_cardinality(aux, kind, source).is_ok()
}

fn enforce_cardinality(aux: &AuxConfig, kind: BoundKind, source: &SourceSpec) -> Result<()> {
    let mode = match kind {
        BoundKind::Inner => "inner",
        BoundKind::Outer => "outer",
    };
    let checks = [
        ("V1", aux.nv1(), source.ny1(), true),
        ("U1", aux.nu1(), source.ny1(), false),
        ("V2", aux.nv2(), source.ny2(), true),
        ("U2", aux.nu2(), source.ny2(), false),
    ];
    for (var, got, ny, is_v) in checks {
        let (v_cap, u_cap) = cardinality_caps(kind, ny);
        let cap = if is_v { v_cap } else { u_cap };
        if got > cap {
            return Err(Error::CardinalityExceeded {
                var,
                got,
                cap,
                mode,
            });
        }
    }
    Ok(())
}

fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

/// Expected distortion of the reconstruction map under the joint law of
/// `(X, U1, U2)`.
pub fn expected_distortion(joint: &JointDist, source: &SourceSpec, xhat: &XhatMap) -> Result<f64> {
    for &letter in xhat.table() {
        if letter >= source.nxhat() {
            return Err(Error::DimensionMismatch {
                axis: "xhat output letter",
                expected: source.nxhat(),
                got: letter,
            });
        }
    }
    let m = joint.marginal(&[Var::X, Var::U1, Var::U2])?;
    let (nu1, nu2) = (
        m.dim(Var::U1).expect("axis present"),
        m.dim(Var::U2).expect("axis present"),
    );
    let mut acc = 0.0;
    for (flat, &p) in m.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let u2 = flat % nu2;
        let u1 = (flat / nu2) % nu1;
        let x = flat / (nu1 * nu2);
        acc += p * source.distortion[x][xhat.get(u1, u2)];
    }
    Ok(acc)
}

/// Evaluates the achievable-region constraint set for `(source, aux)`:
/// rate lower bounds, the five equivocation upper bounds (with the
/// positive-part operator applied), and the reconstruction distortion.
pub fn eval_inner(source: &SourceSpec, aux: &AuxConfig) -> Result<BoundEval> {
    enforce_cardinality(aux, BoundKind::Inner, source)?;
    let joint = chain_join(source, aux)?;
    eval_inner_with_joint(source, aux, &joint)
}

pub(crate) fn eval_inner_with_joint(
    source: &SourceSpec,
    aux: &AuxConfig,
    joint: &JointDist,
) -> Result<BoundEval> {
    use Var::*;
    let mi = |a: &[Var], b: &[Var], g: &[Var]| joint.mutual_info(a, b, g);
    let h = |a: &[Var], g: &[Var]| joint.entropy(a, g);

    let r1_lb = mi(&[U1], &[Y1], &[U2])?;
    let r2_lb = mi(&[U2], &[Y2], &[U1])?;
    let sum_lb = mi(&[U1, U2], &[Y1, Y2], &[])?;

    let h_x_v1e = h(&[X], &[V1, E])?;
    let h_x_v2e = h(&[X], &[V2, E])?;
    let i_u1y1_v1u2 = mi(&[U1], &[Y1], &[V1, U2])?;
    let i_u2y2_v2u1 = mi(&[U2], &[Y2], &[V2, U1])?;
    let i_u1y1_v1x = mi(&[U1], &[Y1], &[V1, X])?;
    let i_u2y2_v2x = mi(&[U2], &[Y2], &[V2, X])?;
    let i_uu_yy_vv = mi(&[U1, U2], &[Y1, Y2], &[V1, V2])?;
    let i_u1y1_v1 = mi(&[U1], &[Y1], &[V1])?;
    let i_u2y2_v2 = mi(&[U2], &[Y2], &[V2])?;

    let d1_ub = positive_part(h_x_v1e - i_u1y1_v1u2 + i_u1y1_v1x);
    let d2_ub = positive_part(h_x_v2e - i_u2y2_v2u1 + i_u2y2_v2x);
    let dsum_ub = positive_part(h_x_v1e + h_x_v2e - i_uu_yy_vv + i_u1y1_v1x + i_u2y2_v2x);
    let d1_minus_r2_ub = positive_part(h_x_v1e - r2_lb - i_u1y1_v1 + i_u1y1_v1x);
    let d2_minus_r1_ub = positive_part(h_x_v2e - r1_lb - i_u2y2_v2 + i_u2y2_v2x);

    Ok(BoundEval {
        r1_lb,
        r2_lb,
        sum_lb,
        d1_ub,
        d2_ub,
        dsum_ub: Some(dsum_ub),
        d1_minus_r2_ub,
        d2_minus_r1_ub,
        dist_lb: expected_distortion(joint, source, &aux.xhat)?,
    })
}

/// Evaluates the converse-region constraint set. The rate bounds share the
/// inner bound's functional forms; the equivocation bounds are looser, no
/// positive part is applied, and there is no joint equivocation constraint.
///
/// Requires the chains `V_j - U_j - Y_j - (X, E, Y_j')` to hold, which the
/// factorized joint guarantees; a hand-built violation is rejected.
pub fn eval_outer(source: &SourceSpec, aux: &AuxConfig) -> Result<BoundEval> {
    let joint = chain_join(source, aux)?;
    eval_outer_with_joint(source, aux, &joint)
}

pub(crate) fn eval_outer_with_joint(
    source: &SourceSpec,
    aux: &AuxConfig,
    joint: &JointDist,
) -> Result<BoundEval> {
    use Var::*;
    for (chain, name) in [
        (
            [&[V1][..], &[U1][..], &[Y1][..], &[X, E, Y2][..]],
            "V1-U1-Y1-(X,E,Y2)",
        ),
        (
            [&[V2][..], &[U2][..], &[Y2][..], &[X, E, Y1][..]],
            "V2-U2-Y2-(X,E,Y1)",
        ),
    ] {
        if !joint.check_markov(&chain) {
            return Err(Error::MarkovViolation {
                chain: name.into(),
                leak: joint.markov_leak(&chain),
            });
        }
    }

    let mi = |a: &[Var], b: &[Var], g: &[Var]| joint.mutual_info(a, b, g);
    let h_x_e = joint.entropy(&[X], &[E])?;

    let r1_lb = mi(&[U1], &[Y1], &[U2])?;
    let r2_lb = mi(&[U2], &[Y2], &[U1])?;
    let sum_lb = mi(&[U1, U2], &[Y1, Y2], &[])?;

    let i_x_v1_e = mi(&[X], &[V1], &[E])?;
    let i_x_v2_e = mi(&[X], &[V2], &[E])?;
    let i_x_v2_v1e = mi(&[X], &[V2], &[V1, E])?;
    let i_x_v1_v2e = mi(&[X], &[V1], &[V2, E])?;

    Ok(BoundEval {
        r1_lb,
        r2_lb,
        sum_lb,
        d1_ub: h_x_e - i_x_v1_e,
        d2_ub: h_x_e - i_x_v2_e,
        dsum_ub: None,
        d1_minus_r2_ub: h_x_e - i_x_v1_e - i_x_v2_v1e,
        d2_minus_r1_ub: h_x_e - i_x_v2_e - i_x_v1_v2e,
        dist_lb: expected_distortion(joint, source, &aux.xhat)?,
    })
}

/// The six corner points of the achievable region, one per decoding order.
/// Rates follow the step-wise binning rates of the order; equivocations are
/// the matching positive-parted expressions; distortion is the map's
/// expected distortion.
pub fn corner_points(source: &SourceSpec, aux: &AuxConfig) -> Result<Vec<CornerPoint>> {
    enforce_cardinality(aux, BoundKind::Inner, source)?;
    let joint = chain_join(source, aux)?;
    corner_points_with_joint(source, aux, &joint)
}

pub(crate) fn corner_points_with_joint(
    source: &SourceSpec,
    aux: &AuxConfig,
    joint: &JointDist,
) -> Result<Vec<CornerPoint>> {
    use Var::*;
    let mi = |a: &[Var], b: &[Var], g: &[Var]| joint.mutual_info(a, b, g);
    let h = |a: &[Var], g: &[Var]| joint.entropy(a, g);

    let dist = expected_distortion(joint, source, &aux.xhat)?;

    let h_x_v1e = h(&[X], &[V1, E])?;
    let h_x_v2e = h(&[X], &[V2, E])?;
    let i_u1y1_v1x = mi(&[U1], &[Y1], &[V1, X])?;
    let i_u2y2_v2x = mi(&[U2], &[Y2], &[V2, X])?;

    // Agent-1 equivocation brackets, by what the eavesdropper's remaining
    // link information costs under each order.
    let d1_sub_v1u2 = mi(&[U1], &[Y1], &[V1, U2])?;
    let d1_sub_v1 = mi(&[U1], &[Y1], &[V1])?;
    let d1_sub_v1v2 = mi(&[U1], &[Y1], &[V1, V2])?;
    let d2_sub_v2 = mi(&[U2], &[Y2], &[V2])?;
    let d2_sub_v1v2 = mi(&[U2], &[Y2], &[V1, V2])?;
    let d2_sub_v2u1 = mi(&[U2], &[Y2], &[V2, U1])?;

    let delta1 = |sub: f64| positive_part(h_x_v1e - sub + i_u1y1_v1x);
    let delta2 = |sub: f64| positive_part(h_x_v2e - sub + i_u2y2_v2x);

    let mut out = Vec::with_capacity(6);
    for order in DecodingOrder::ALL {
        let (r1, r2, d1, d2) = match order {
            DecodingOrder::V2U2V1U1 => (
                mi(&[U1], &[Y1], &[U2])?,
                mi(&[U2], &[Y2], &[])?,
                delta1(d1_sub_v1u2),
                delta2(d2_sub_v2),
            ),
            DecodingOrder::V2V1U2U1 => (
                mi(&[V1], &[Y1], &[V2])? + mi(&[U1], &[Y1], &[V1, U2])?,
                mi(&[V2], &[Y2], &[])? + mi(&[U2], &[Y2], &[V1, V2])?,
                delta1(d1_sub_v1u2),
                delta2(d2_sub_v1v2),
            ),
            DecodingOrder::V1V2U2U1 => (
                mi(&[V1], &[Y1], &[])? + mi(&[U1], &[Y1], &[V1, U2])?,
                mi(&[U2], &[Y2], &[V1])?,
                delta1(d1_sub_v1u2),
                delta2(d2_sub_v1v2),
            ),
            DecodingOrder::V1U1V2U2 => (
                mi(&[U1], &[Y1], &[])?,
                mi(&[U2], &[Y2], &[U1])?,
                delta1(d1_sub_v1),
                delta2(d2_sub_v2u1),
            ),
            DecodingOrder::V1V2U1U2 => (
                mi(&[V1], &[Y1], &[])? + mi(&[U1], &[Y1], &[V1, V2])?,
                mi(&[V2], &[Y2], &[V1])? + mi(&[U2], &[Y2], &[V2, U1])?,
                delta1(d1_sub_v1v2),
                delta2(d2_sub_v2u1),
            ),
            DecodingOrder::V2V1U1U2 => (
                mi(&[U1], &[Y1], &[V2])?,
                mi(&[V2], &[Y2], &[])? + mi(&[U2], &[Y2], &[V2, U1])?,
                delta1(d1_sub_v1v2),
                delta2(d2_sub_v2u1),
            ),
        };
        out.push(CornerPoint {
            order,
            point: RegionPoint {
                r1,
                r2,
                d1,
                d2,
                dist,
            },
        });
    }
    Ok(out)
}

/// A split of each agent's link rate into the coarse-layer and
/// refinement-layer binning rates, bits/symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSplit {
    pub rv1: f64,
    pub ru1: f64,
    pub rv2: f64,
    pub ru2: f64,
}

impl RateSplit {
    pub fn r1(&self) -> f64 {
        self.rv1 + self.ru1
    }

    pub fn r2(&self) -> f64 {
        self.rv2 + self.ru2
    }
}

/// Outcome of the rate-split feasibility test: all constraint slacks must
/// be at least `-1e-10` (boundary points count as feasible).
#[derive(Debug, Clone)]
pub struct RateSplitCheck {
    pub feasible: bool,
    /// Human-readable descriptions of the violated constraints, with their
    /// required thresholds.
    pub violated: Vec<String>,
}

/// Checks the gathered binning-rate constraints of the achievability
/// scheme for a candidate split.
pub fn rate_split_feasible(
    source: &SourceSpec,
    aux: &AuxConfig,
    split: &RateSplit,
) -> Result<RateSplitCheck> {
    use Var::*;
    if split.rv1 < 0.0 || split.ru1 < 0.0 || split.rv2 < 0.0 || split.ru2 < 0.0 {
        return Err(Error::Infeasible("rates must be non-negative".into()));
    }
    let joint = chain_join(source, aux)?;
    let mi = |a: &[Var], b: &[Var], g: &[Var]| joint.mutual_info(a, b, g);

    const SLACK: f64 = -1e-10;
    let constraints = [
        ("R1 >= I(U1;Y1|U2)", split.r1(), mi(&[U1], &[Y1], &[U2])?),
        ("R2 >= I(U2;Y2|U1)", split.r2(), mi(&[U2], &[Y2], &[U1])?),
        (
            "R1+R2 >= I(U1,U2;Y1,Y2)",
            split.r1() + split.r2(),
            mi(&[U1, U2], &[Y1, Y2], &[])?,
        ),
        (
            "R_U1 >= I(U1;Y1|V1,U2)",
            split.ru1,
            mi(&[U1], &[Y1], &[V1, U2])?,
        ),
        (
            "R_U2 >= I(U2;Y2|V2,U1)",
            split.ru2,
            mi(&[U2], &[Y2], &[V2, U1])?,
        ),
        (
            "R_U1+R_U2 >= I(U1,U2;Y1,Y2|V1,V2)",
            split.ru1 + split.ru2,
            mi(&[U1, U2], &[Y1, Y2], &[V1, V2])?,
        ),
        (
            "R1+R_U2 >= I(U1,U2;Y1,Y2|V2)",
            split.r1() + split.ru2,
            mi(&[U1, U2], &[Y1, Y2], &[V2])?,
        ),
        (
            "R2+R_U1 >= I(U1,U2;Y1,Y2|V1)",
            split.r2() + split.ru1,
            mi(&[U1, U2], &[Y1, Y2], &[V1])?,
        ),
    ];

    let mut violated = Vec::new();
    for (name, have, need) in constraints {
        if have - need < SLACK {
            violated.push(format!("{name} (need {need:.6}, have {have:.6})"));
        }
    }
    Ok(RateSplitCheck {
        feasible: violated.is_empty(),
        violated,
    })
}

/// The corner-1 rate split: coarse layers binned against the already
/// decoded side information, refinements on top. Used to drive the
/// simulator at an achievable corner.
pub fn corner1_rate_split(source: &SourceSpec, aux: &AuxConfig) -> Result<RateSplit> {
    use Var::*;
    let joint = chain_join(source, aux)?;
    Ok(RateSplit {
        rv1: joint.mutual_info(&[V1], &[Y1], &[U2])?,
        ru1: joint.mutual_info(&[U1], &[Y1], &[V1, U2])?,
        rv2: joint.mutual_info(&[V2], &[Y2], &[])?,
        ru2: joint.mutual_info(&[U2], &[Y2], &[V2])?,
    })
}
