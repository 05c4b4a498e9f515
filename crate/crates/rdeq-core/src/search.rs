//! Randomized search over auxiliary-channel configurations: scalarized
//! hill climbing with restarts, Pareto frontier tracing with time-sharing
//! convexification, and outer-region membership testing.
//!
//! Everything is deterministic given the seed: restarts, grid steps and
//! trials draw from separate counter-based streams of one seeded generator,
//! and results merge in a fixed order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::prob::{chain_join, CondPmf, JointDist, SourceSpec, Var};
use crate::regions::{
    cardinality_caps, corner_points_with_joint, eval_outer_with_joint, AuxConfig, BoundKind,
    DecodingOrder, RegionPoint, XhatMap,
};
use crate::Result;

/// Search effort knobs. `refine_iters` counts objective evaluations per
/// restart, including the initial sample, so a budget of `1, 1` returns
/// the seed sample's evaluation untouched.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub refine_iters: usize,
    pub perturb_scale: f64,
    pub seed: u64,
}

impl SearchBudget {
    pub fn new(
        restarts: usize,
        refine_iters: usize,
        perturb_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        if restarts < 1 || refine_iters < 1 {
            return Err(Error::Infeasible(
                "search budget counts must be >= 1".into(),
            ));
        }
        if !(perturb_scale > 0.0 && perturb_scale <= 1.0) {
            return Err(Error::Infeasible(format!(
                "perturb_scale must lie in (0, 1], got {perturb_scale}"
            )));
        }
        Ok(Self {
            restarts,
            refine_iters,
            perturb_scale,
            seed,
        })
    }

    /// A modest default effort for interactive runs.
    pub fn default_with_seed(seed: u64) -> Self {
        Self {
            restarts: 16,
            refine_iters: 200,
            perturb_scale: 0.5,
            seed,
        }
    }
}

/// Requested auxiliary alphabet sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AuxCards {
    pub v1: usize,
    pub u1: usize,
    pub v2: usize,
    pub u2: usize,
}

impl AuxCards {
    /// `|V_j| = 2`, `|U_j| = |Y_j|`: the smallest sizes that exercise both
    /// layers.
    pub fn modest(source: &SourceSpec) -> Self {
        Self {
            v1: 2,
            u1: source.ny1(),
            v2: 2,
            u2: source.ny2(),
        }
    }
}

fn check_cards(source: &SourceSpec, cards: AuxCards, kind: BoundKind) -> Result<()> {
    let mode = match kind {
        BoundKind::Inner => "inner",
        BoundKind::Outer => "outer",
    };
    let (v1_cap, u1_cap) = cardinality_caps(kind, source.ny1());
    let (v2_cap, u2_cap) = cardinality_caps(kind, source.ny2());
    for (var, got, cap) in [
        ("V1", cards.v1, v1_cap),
        ("U1", cards.u1, u1_cap),
        ("V2", cards.v2, v2_cap),
        ("U2", cards.u2, u2_cap),
    ] {
        if got == 0 {
            return Err(Error::Infeasible(format!("|{var}| must be >= 1")));
        }
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

/// Picks, for every `(u1, u2)` cell, the reconstruction letter minimizing
/// the expected distortion under `p(x | u1, u2)`. Ties break to the lowest
/// letter, as do zero-mass cells.
pub fn derive_optimal_xhat(source: &SourceSpec, joint: &JointDist) -> Result<XhatMap> {
    let m = joint.marginal(&[Var::X, Var::U1, Var::U2])?;
    let nu1 = m.dim(Var::U1).expect("axis present");
    let nu2 = m.dim(Var::U2).expect("axis present");
    let nx = m.dim(Var::X).expect("axis present");
    let nxhat = source.nxhat();

    let mut table = vec![0usize; nu1 * nu2];
    for u1 in 0..nu1 {
        for u2 in 0..nu2 {
            let mut best = (0usize, f64::INFINITY);
            for letter in 0..nxhat {
                let mut cost = 0.0;
                for x in 0..nx {
                    let p = m.probs()[(x * nu1 + u1) * nu2 + u2];
                    cost += p * source.distortion[x][letter];
                }
                if cost < best.1 {
                    best = (letter, cost);
                }
            }
            table[u1 * nu2 + u2] = best.0;
        }
    }
    Ok(XhatMap::new(table, nu1, nu2))
}

fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    // Symmetric Dirichlet(1): normalized unit exponentials.
    let mut row: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let sum: f64 = row.iter().sum();
    if sum <= 0.0 {
        return vec![1.0 / k as f64; k];
    }
    for v in &mut row {
        *v /= sum;
    }
    row
}

fn sample_channel(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> Vec<Vec<f64>> {
    (0..n_in).map(|_| dirichlet_row(rng, n_out)).collect()
}

/// Raw channel matrices of a candidate configuration; the reconstruction
/// map is always re-derived as the per-cell optimum, so the search space
/// is the product of conditional simplices alone.
#[derive(Debug, Clone)]
struct ChannelState {
    pu1_y1: Vec<Vec<f64>>,
    pu2_y2: Vec<Vec<f64>>,
    pv1_u1: Vec<Vec<f64>>,
    pv2_u2: Vec<Vec<f64>>,
}

impl ChannelState {
    fn sample(rng: &mut ChaCha8Rng, source: &SourceSpec, cards: AuxCards) -> Self {
        Self {
            pu1_y1: sample_channel(rng, source.ny1(), cards.u1),
            pu2_y2: sample_channel(rng, source.ny2(), cards.u2),
            pv1_u1: sample_channel(rng, cards.u1, cards.v1),
            pv2_u2: sample_channel(rng, cards.u2, cards.v2),
        }
    }

    fn build(&self, source: &SourceSpec) -> Result<(AuxConfig, JointDist)> {
        let placeholder = XhatMap::new(
            vec![0; self.pu1_y1[0].len() * self.pu2_y2[0].len()],
            self.pu1_y1[0].len(),
            self.pu2_y2[0].len(),
        );
        let aux = AuxConfig::new(
            CondPmf::from_rows(&self.pu1_y1)?,
            CondPmf::from_rows(&self.pu2_y2)?,
            CondPmf::from_rows(&self.pv1_u1)?,
            CondPmf::from_rows(&self.pv2_u2)?,
            placeholder,
        )?;
        let joint = chain_join(source, &aux)?;
        let xhat = derive_optimal_xhat(source, &joint)?;
        let aux = AuxConfig::new(aux.pu1_y1, aux.pu2_y2, aux.pv1_u1, aux.pv2_u2, xhat)?;
        Ok((aux, joint))
    }

    /// One local move: perturb, sharpen, or flatten a single row of a
    /// single channel, then renormalize.
    fn perturb(&self, rng: &mut ChaCha8Rng, scale: f64) -> Self {
        let mut next = self.clone();
        let which = rng.gen_range(0..4usize);
        let mat = match which {
            0 => &mut next.pu1_y1,
            1 => &mut next.pu2_y2,
            2 => &mut next.pv1_u1,
            _ => &mut next.pv2_u2,
        };
        let i = rng.gen_range(0..mat.len());
        let row = &mut mat[i];
        let j = rng.gen_range(0..row.len());
        let kind: f64 = rng.gen();
        if kind < 0.15 {
            // Sharpen: make letter j dominant so deterministic channels
            // stay reachable.
            for v in row.iter_mut() {
                *v = 0.0;
            }
            row[j] = 1.0;
            return next;
        } else if kind < 0.25 {
            // Flatten toward uniform.
            let k = row.len() as f64;
            for v in row.iter_mut() {
                *v = 0.5 * *v + 0.5 / k;
            }
        } else {
            let delta = scale * (2.0 * rng.gen::<f64>() - 1.0);
            row[j] = (row[j] + delta).max(0.0);
        }
        let sum: f64 = row.iter().sum();
        if sum <= 0.0 {
            let k = row.len() as f64;
            for v in row.iter_mut() {
                *v = 1.0 / k;
            }
        } else {
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        next
    }
}

/// Draws a configuration with conditional rows from a symmetric
/// Dirichlet(1) law and the per-cell distortion-minimizing reconstruction
/// map. Deterministic per seed.
pub fn sample_aux(source: &SourceSpec, cards: AuxCards, seed: u64) -> Result<AuxConfig> {
    check_cards(source, cards, BoundKind::Inner)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (aux, _) = ChannelState::sample(&mut rng, source, cards).build(source)?;
    Ok(aux)
}

/// The five objective axes of an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Objective {
    R1,
    R2,
    Delta1,
    Delta2,
    Dist,
}

impl Objective {
    pub fn label(self) -> &'static str {
        match self {
            Objective::R1 => "R1",
            Objective::R2 => "R2",
            Objective::Delta1 => "Delta1",
            Objective::Delta2 => "Delta2",
            Objective::Dist => "D",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "R1" => Some(Objective::R1),
            "R2" => Some(Objective::R2),
            "Delta1" => Some(Objective::Delta1),
            "Delta2" => Some(Objective::Delta2),
            "D" => Some(Objective::Dist),
            _ => None,
        }
    }
}

/// Non-negative multipliers of the scalarized objective
/// `-w_r1·R1 - w_r2·R2 + w_d1·Δ1 + w_d2·Δ2 - w_D·D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub r1: f64,
    pub r2: f64,
    pub d1: f64,
    pub d2: f64,
    pub dist: f64,
}

impl Weights {
    pub const ZERO: Weights = Weights {
        r1: 0.0,
        r2: 0.0,
        d1: 0.0,
        d2: 0.0,
        dist: 0.0,
    };

    pub fn objective(&self, p: &RegionPoint) -> f64 {
        -self.r1 * p.r1 - self.r2 * p.r2 + self.d1 * p.d1 + self.d2 * p.d2 - self.dist * p.dist
    }

    pub fn axis_mut(&mut self, o: Objective) -> &mut f64 {
        match o {
            Objective::R1 => &mut self.r1,
            Objective::R2 => &mut self.r2,
            Objective::Delta1 => &mut self.d1,
            Objective::Delta2 => &mut self.d2,
            Objective::Dist => &mut self.dist,
        }
    }
}

/// Result of a scalarized search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub point: RegionPoint,
    pub aux: AuxConfig,
    pub corner: DecodingOrder,
    pub objective: f64,
    /// Objective evaluations spent across all restarts.
    pub evaluations: usize,
    /// True when every restart ran its full refinement budget (the search
    /// has no other stopping rule, so this is always true on success).
    pub exhausted: bool,
}

fn best_corner(
    source: &SourceSpec,
    aux: &AuxConfig,
    joint: &JointDist,
    weights: &Weights,
) -> Result<(RegionPoint, DecodingOrder, f64)> {
    let corners = corner_points_with_joint(source, aux, joint)?;
    let mut best: Option<(RegionPoint, DecodingOrder, f64)> = None;
    for c in corners {
        let obj = weights.objective(&c.point);
        if best.as_ref().is_none_or(|(_, _, b)| obj > *b) {
            best = Some((c.point, c.order, obj));
        }
    }
    Ok(best.expect("six corners"))
}

/// Maximizes the weighted objective over achievable corner points by
/// coordinate-wise perturbation hill climbing with restarts. The accepted
/// objective is monotone non-decreasing within a restart; restarts merge
/// by objective with ties to the earlier restart.
pub fn scalarized_optimize(
    source: &SourceSpec,
    weights: &Weights,
    cards: AuxCards,
    budget: &SearchBudget,
) -> Result<SearchOutcome> {
    scalarized_optimize_stream(source, weights, cards, budget, 0)
}

/// As [`scalarized_optimize`], on a caller-chosen generator stream so that
/// grid sweeps can give every step its own deterministic randomness.
pub fn scalarized_optimize_stream(
    source: &SourceSpec,
    weights: &Weights,
    cards: AuxCards,
    budget: &SearchBudget,
    stream: u64,
) -> Result<SearchOutcome> {
    check_cards(source, cards, BoundKind::Inner)?;
    let mut overall: Option<(f64, usize, RegionPoint, AuxConfig, DecodingOrder)> = None;
    let mut evaluations = 0usize;

    for restart in 0..budget.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(
            stream
                .wrapping_mul(0x1_0000_0000)
                .wrapping_add(restart as u64),
        );

        let mut state = ChannelState::sample(&mut rng, source, cards);
        let (mut aux, joint) = state.build(source)?;
        let (mut point, mut corner, mut obj) = best_corner(source, &aux, &joint, weights)?;
        evaluations += 1;

        for _ in 1..budget.refine_iters {
            let candidate = state.perturb(&mut rng, budget.perturb_scale);
            let (c_aux, c_joint) = candidate.build(source)?;
            let (c_point, c_corner, c_obj) = best_corner(source, &c_aux, &c_joint, weights)?;
            evaluations += 1;
            if c_obj > obj {
                state = candidate;
                aux = c_aux;
                point = c_point;
                corner = c_corner;
                obj = c_obj;
            }
        }

        let better = overall
            .as_ref()
            .is_none_or(|(best_obj, _, _, _, _)| obj > *best_obj);
        if better {
            overall = Some((obj, restart, point, aux, corner));
        }
    }

    let (objective, _, point, aux, corner) = overall.expect("restarts >= 1");
    Ok(SearchOutcome {
        point,
        aux,
        corner,
        objective,
        evaluations,
        exhausted: true,
    })
}

/// A traced operating point with its provenance id.
#[derive(Debug, Clone, Serialize)]
pub struct FrontierPoint {
    pub point: RegionPoint,
    pub config_id: usize,
}

/// Provenance of one traced configuration.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_id: usize,
    pub weights: Weights,
    /// Decoding order of the achieving corner; absent for outer-envelope
    /// traces, which have no corner structure.
    pub corner: Option<DecodingOrder>,
    pub aux: AuxConfig,
}

/// Raw traced points plus the time-sharing hull.
#[derive(Debug, Clone)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
    pub hull: Vec<RegionPoint>,
    pub provenance: Vec<Provenance>,
}

/// `a` at least as good as `b` on every axis, within `tol` (smaller rates
/// and distortion, larger equivocations).
pub fn weakly_dominates(a: &RegionPoint, b: &RegionPoint, tol: f64) -> bool {
    a.r1 <= b.r1 + tol
        && a.r2 <= b.r2 + tol
        && a.dist <= b.dist + tol
        && a.d1 >= b.d1 - tol
        && a.d2 >= b.d2 - tol
}

/// Weak dominance plus a strict margin on at least one axis.
pub fn strictly_dominates(a: &RegionPoint, b: &RegionPoint, tol: f64) -> bool {
    weakly_dominates(a, b, tol)
        && (a.r1 < b.r1 - tol
            || a.r2 < b.r2 - tol
            || a.dist < b.dist - tol
            || a.d1 > b.d1 + tol
            || a.d2 > b.d2 + tol)
}

fn mix(a: &RegionPoint, b: &RegionPoint, t: f64) -> RegionPoint {
    RegionPoint {
        r1: (1.0 - t) * a.r1 + t * b.r1,
        r2: (1.0 - t) * a.r2 + t * b.r2,
        d1: (1.0 - t) * a.d1 + t * b.d1,
        d2: (1.0 - t) * a.d2 + t * b.d2,
        dist: (1.0 - t) * a.dist + t * b.dist,
    }
}

const DOMINANCE_TOL: f64 = 1e-9;
const MIX_RESOLUTION: usize = 64;

/// Dominance filter with pairwise time-sharing probing: drops every point
/// strictly dominated by another retained point or by a convex combination
/// of two retained points at resolution 1/64.
pub fn dominance_hull(points: &[RegionPoint]) -> Vec<RegionPoint> {
    let mut kept: Vec<RegionPoint> = Vec::new();
    for p in points {
        if !kept.iter().any(|q| q == p) {
            kept.push(*p);
        }
    }
    // Deterministic scan order.
    kept.sort_by(|a, b| {
        (a.r1, a.r2, -a.d1, -a.d2, a.dist)
            .partial_cmp(&(b.r1, b.r2, -b.d1, -b.d2, b.dist))
            .expect("finite coordinates")
    });

    loop {
        let mut removed = false;
        'outer: for i in 0..kept.len() {
            for j in 0..kept.len() {
                if i != j && strictly_dominates(&kept[j], &kept[i], DOMINANCE_TOL) {
                    kept.remove(i);
                    removed = true;
                    break 'outer;
                }
            }
            for a in 0..kept.len() {
                for b in (a + 1)..kept.len() {
                    if a == i || b == i {
                        continue;
                    }
                    for k in 1..MIX_RESOLUTION {
                        let m = mix(&kept[a], &kept[b], k as f64 / MIX_RESOLUTION as f64);
                        if strictly_dominates(&m, &kept[i], DOMINANCE_TOL) {
                            kept.remove(i);
                            removed = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if !removed {
            return kept;
        }
    }
}

/// Traces a 2-D slice of the achievable frontier by sweeping the weight
/// ratio across the two chosen axes (the remaining weights stay at zero),
/// then dominance-filters and convexifies the achieved points.
pub fn trace_frontier(
    source: &SourceSpec,
    axes: (Objective, Objective),
    grid: usize,
    cards: AuxCards,
    budget: &SearchBudget,
) -> Result<Frontier> {
    if axes.0 == axes.1 {
        return Err(Error::Infeasible("frontier axes must be distinct".into()));
    }
    if grid < 1 {
        return Err(Error::Infeasible("grid must be >= 1".into()));
    }

    let mut points = Vec::new();
    let mut provenance = Vec::new();
    for k in 0..grid {
        let t = if grid == 1 {
            0.5
        } else {
            k as f64 / (grid - 1) as f64
        };
        let mut weights = Weights::ZERO;
        *weights.axis_mut(axes.0) = 1.0 - t;
        *weights.axis_mut(axes.1) = t;
        let outcome = scalarized_optimize_stream(source, &weights, cards, budget, k as u64 + 1)?;
        let config_id = provenance.len();
        points.push(FrontierPoint {
            point: outcome.point,
            config_id,
        });
        provenance.push(Provenance {
            config_id,
            weights,
            corner: Some(outcome.corner),
            aux: outcome.aux,
        });
    }

    let hull = dominance_hull(&points.iter().map(|p| p.point).collect::<Vec<_>>());
    Ok(Frontier {
        points,
        hull,
        provenance,
    })
}

/// Traces the converse-bound envelope of a 2-D slice: the same weight
/// sweep as [`trace_frontier`], scored on the outer evaluation's bound
/// tuple instead of achievable corners. The traced points mark the
/// per-configuration constraint envelope, not achievable operating points.
pub fn trace_frontier_outer(
    source: &SourceSpec,
    axes: (Objective, Objective),
    grid: usize,
    cards: AuxCards,
    budget: &SearchBudget,
) -> Result<Frontier> {
    if axes.0 == axes.1 {
        return Err(Error::Infeasible("frontier axes must be distinct".into()));
    }
    if grid < 1 {
        return Err(Error::Infeasible("grid must be >= 1".into()));
    }
    check_cards(source, cards, BoundKind::Outer)?;

    let mut points = Vec::new();
    let mut provenance = Vec::new();
    for k in 0..grid {
        let t = if grid == 1 {
            0.5
        } else {
            k as f64 / (grid - 1) as f64
        };
        let mut weights = Weights::ZERO;
        *weights.axis_mut(axes.0) = 1.0 - t;
        *weights.axis_mut(axes.1) = t;

        let mut best: Option<(f64, RegionPoint, AuxConfig)> = None;
        for restart in 0..budget.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(
                0xB000_0000u64
                    .wrapping_add((k as u64) << 16)
                    .wrapping_add(restart as u64),
            );
            let mut state = ChannelState::sample(&mut rng, source, cards);
            let score = |state: &ChannelState| -> Result<(f64, RegionPoint, AuxConfig)> {
                let (aux, joint) = state.build(source)?;
                let eval = eval_outer_with_joint(source, &aux, &joint)?;
                let point = RegionPoint {
                    r1: eval.r1_lb,
                    r2: eval.r2_lb.max(eval.sum_lb - eval.r1_lb),
                    d1: eval.d1_ub,
                    d2: eval.d2_ub,
                    dist: eval.dist_lb,
                };
                Ok((weights.objective(&point), point, aux))
            };
            let (mut obj, mut point, mut aux) = score(&state)?;
            for _ in 1..budget.refine_iters {
                let candidate = state.perturb(&mut rng, budget.perturb_scale);
                let (c_obj, c_point, c_aux) = score(&candidate)?;
                if c_obj > obj {
                    state = candidate;
                    obj = c_obj;
                    point = c_point;
                    aux = c_aux;
                }
            }
            if best.as_ref().is_none_or(|(b, _, _)| obj > *b) {
                best = Some((obj, point, aux));
            }
        }
        let (_, point, aux) = best.expect("restarts >= 1");
        let config_id = provenance.len();
        points.push(FrontierPoint { point, config_id });
        provenance.push(Provenance {
            config_id,
            weights,
            corner: None,
            aux,
        });
    }

    let hull = dominance_hull(&points.iter().map(|p| p.point).collect::<Vec<_>>());
    Ok(Frontier {
        points,
        hull,
        provenance,
    })
}

/// Verdict of an outer-region membership test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Membership {
    Inside,
    Outside { reason: String },
    Unknown,
}

const MEMBERSHIP_TOL: f64 = 1e-9;

fn admission_violation(eval: &crate::regions::BoundEval, p: &RegionPoint) -> f64 {
    let mut v = 0.0;
    v += (eval.r1_lb - p.r1).max(0.0);
    v += (eval.r2_lb - p.r2).max(0.0);
    v += (eval.sum_lb - (p.r1 + p.r2)).max(0.0);
    v += (p.d1 - eval.d1_ub).max(0.0);
    v += (p.d2 - eval.d2_ub).max(0.0);
    if let Some(b) = eval.dsum_ub {
        v += (p.d1 + p.d2 - b).max(0.0);
    }
    v += (p.d1 - p.r2 - eval.d1_minus_r2_ub).max(0.0);
    v += (p.d2 - p.r1 - eval.d2_minus_r1_ub).max(0.0);
    v += (eval.dist_lb - p.dist).max(0.0);
    v
}

/// Minimum expected distortion over reconstruction maps fed by the raw
/// observations: an auxiliary-free floor on any achievable distortion.
pub fn distortion_floor(source: &SourceSpec) -> Result<f64> {
    let aux = AuxConfig::new(
        CondPmf::identity(source.ny1()),
        CondPmf::identity(source.ny2()),
        CondPmf::identity(source.ny1()),
        CondPmf::identity(source.ny2()),
        XhatMap::new(
            vec![0; source.ny1() * source.ny2()],
            source.ny1(),
            source.ny2(),
        ),
    )?;
    let joint = chain_join(source, &aux)?;
    let xhat = derive_optimal_xhat(source, &joint)?;
    crate::regions::expected_distortion(&joint, source, &xhat)
}

/// Tests whether `point` lies in the converse region. `Inside` when a
/// configuration admitting the point is found; `Outside` only when an
/// auxiliary-free relaxation is violated (equivocation above the blind cap
/// `H(X|E)`, or distortion below the observation-fed floor); `Unknown`
/// otherwise — reported honestly rather than forced to a side.
pub fn outer_membership(
    source: &SourceSpec,
    point: &RegionPoint,
    budget: &SearchBudget,
) -> Result<Membership> {
    let degenerate = AuxConfig::degenerate(source);
    let blind = chain_join(source, &degenerate)?;
    let h_x_e = blind.entropy(&[Var::X], &[Var::E])?;
    if point.d1 > h_x_e + MEMBERSHIP_TOL {
        return Ok(Membership::Outside {
            reason: format!("Delta1 = {} exceeds H(X|E) = {h_x_e}", point.d1),
        });
    }
    if point.d2 > h_x_e + MEMBERSHIP_TOL {
        return Ok(Membership::Outside {
            reason: format!("Delta2 = {} exceeds H(X|E) = {h_x_e}", point.d2),
        });
    }
    let floor = distortion_floor(source)?;
    if point.dist < floor - MEMBERSHIP_TOL {
        return Ok(Membership::Outside {
            reason: format!("D = {} below the observation-fed floor {floor}", point.dist),
        });
    }

    // Canonical candidates first: transparent channels, then fully coarse.
    let identity = AuxConfig::new(
        CondPmf::identity(source.ny1()),
        CondPmf::identity(source.ny2()),
        CondPmf::identity(source.ny1()),
        CondPmf::identity(source.ny2()),
        XhatMap::new(
            vec![0; source.ny1() * source.ny2()],
            source.ny1(),
            source.ny2(),
        ),
    )?;
    for candidate in [&identity, &degenerate] {
        let joint = chain_join(source, candidate)?;
        let xhat = derive_optimal_xhat(source, &joint)?;
        let aux = AuxConfig::new(
            candidate.pu1_y1.clone(),
            candidate.pu2_y2.clone(),
            candidate.pv1_u1.clone(),
            candidate.pv2_u2.clone(),
            xhat,
        )?;
        let eval = eval_outer_with_joint(source, &aux, &joint)?;
        if admission_violation(&eval, point) <= MEMBERSHIP_TOL {
            return Ok(Membership::Inside);
        }
    }

    // Hill-climb on the admission violation over outer-family
    // configurations.
    let (v1_cap, _) = cardinality_caps(BoundKind::Outer, source.ny1());
    let (v2_cap, _) = cardinality_caps(BoundKind::Outer, source.ny2());
    let cards = AuxCards {
        v1: 2.min(v1_cap),
        u1: source.ny1(),
        v2: 2.min(v2_cap),
        u2: source.ny2(),
    };
    for restart in 0..budget.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(0xA000_0000u64 + restart as u64);
        let mut state = ChannelState::sample(&mut rng, source, cards);
        let (aux, joint) = state.build(source)?;
        let eval = eval_outer_with_joint(source, &aux, &joint)?;
        let mut violation = admission_violation(&eval, point);
        if violation <= MEMBERSHIP_TOL {
            return Ok(Membership::Inside);
        }
        for _ in 1..budget.refine_iters {
            let candidate = state.perturb(&mut rng, budget.perturb_scale);
            let (c_aux, c_joint) = candidate.build(source)?;
            let c_eval = eval_outer_with_joint(source, &c_aux, &c_joint)?;
            let c_violation = admission_violation(&c_eval, point);
            if c_violation < violation {
                state = candidate;
                violation = c_violation;
                if violation <= MEMBERSHIP_TOL {
                    return Ok(Membership::Inside);
                }
            }
        }
    }
    Ok(Membership::Unknown)
}

/// Fixed, versioned column order for frontier emission.
pub const FRONTIER_CSV_HEADER: &str = "R1,R2,Delta1,Delta2,D,config_id";

/// Renders frontier points as CSV.
pub fn frontier_csv(frontier: &Frontier) -> String {
    use crate::gaussian::fmt_f64;
    let mut out = String::from(FRONTIER_CSV_HEADER);
    out.push('\n');
    for fp in &frontier.points {
        let p = &fp.point;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(p.r1),
            fmt_f64(p.r2),
            fmt_f64(p.d1),
            fmt_f64(p.d2),
            fmt_f64(p.dist),
            fp.config_id
        ));
    }
    out
}

fn cond_pmf_json(c: &CondPmf) -> serde_json::Value {
    json!((0..c.n_in())
        .map(|i| c.row(i).probs().to_vec())
        .collect::<Vec<_>>())
}

/// Full provenance of a frontier: every traced configuration's channels,
/// reconstruction map, corner, and weights, plus the hull.
pub fn frontier_json(frontier: &Frontier) -> serde_json::Value {
    json!({
        "points": frontier.points,
        "hull": frontier.hull,
        "provenance": frontier.provenance.iter().map(|p| json!({
            "config_id": p.config_id,
            "weights": p.weights,
            "corner": p.corner.map(|c| c.label()),
            "aux": {
                "u1_given_y1": cond_pmf_json(&p.aux.pu1_y1),
                "u2_given_y2": cond_pmf_json(&p.aux.pu2_y2),
                "v1_given_u1": cond_pmf_json(&p.aux.pv1_u1),
                "v2_given_u2": cond_pmf_json(&p.aux.pv2_u2),
                "xhat": p.aux.xhat.table(),
            },
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Pmf;
    use crate::regions::eval_inner;

    #[test]
    fn sample_aux_is_deterministic_and_valid() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 2,
            u1: 3,
            v2: 2,
            u2: 2,
        };
        let a = sample_aux(&source, cards, 7).unwrap();
        let b = sample_aux(&source, cards, 7).unwrap();
        for i in 0..source.ny1() {
            assert_eq!(a.pu1_y1.row(i).probs(), b.pu1_y1.row(i).probs());
        }
        assert_eq!(a.xhat.table(), b.xhat.table());
        let c = sample_aux(&source, cards, 8).unwrap();
        assert_ne!(a.pu1_y1.row(0).probs(), c.pu1_y1.row(0).probs());

        // The factorization's separations hold for sampled configurations.
        let joint = chain_join(&source, &a).unwrap();
        use Var::*;
        assert!(joint.check_markov(&[&[V1], &[U1], &[Y1], &[X, E, Y2]]));
        assert!(joint.check_markov(&[&[V2], &[U2], &[Y2], &[X, E, Y1]]));
        assert!(joint.check_markov(&[&[V1], &[U1], &[Y1], &[Y2], &[U2], &[V2]]));
        assert!(joint.check_markov(&[&[V1, U1, Y1], &[X], &[Y2, U2, V2]]));
    }

    #[test]
    fn sample_aux_degenerate_cards() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 1,
            u1: 1,
            v2: 1,
            u2: 1,
        };
        let aux = sample_aux(&source, cards, 3).unwrap();
        assert_eq!(aux.nu1(), 1);
        assert_eq!(aux.pu1_y1.row(0).probs(), &[1.0]);
    }

    #[test]
    fn sample_aux_rejects_cap_violation() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 12,
            u1: 2,
            v2: 2,
            u2: 2,
        };
        assert!(sample_aux(&source, cards, 3).is_err());
    }

    #[test]
    fn scalarized_forced_constant_layers_reach_the_blind_cap() {
        // All weight on the agent-1 equivocation with single-letter layers:
        // the bound collapses to H(X|E) for every configuration.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 1,
            u1: 1,
            v2: 1,
            u2: 1,
        };
        let weights = Weights {
            d1: 1.0,
            ..Weights::ZERO
        };
        let budget = SearchBudget::new(2, 4, 0.5, 11).unwrap();
        let out = scalarized_optimize(&source, &weights, cards, &budget).unwrap();
        let aux = AuxConfig::degenerate(&source);
        let joint = chain_join(&source, &aux).unwrap();
        let h_x_e = joint.entropy(&[Var::X], &[Var::E]).unwrap();
        assert!((out.point.d1 - h_x_e).abs() < 1e-12);
    }

    #[test]
    fn scalarized_minimal_budget_returns_the_seed_sample() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 2,
            u1: 2,
            v2: 2,
            u2: 2,
        };
        let weights = Weights {
            dist: 1.0,
            ..Weights::ZERO
        };
        let budget = SearchBudget::new(1, 1, 0.5, 5).unwrap();
        let out = scalarized_optimize(&source, &weights, cards, &budget).unwrap();
        assert_eq!(out.evaluations, 1);

        // The returned configuration is the bare seed sample.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        rng.set_stream(0);
        let (aux, joint) = ChannelState::sample(&mut rng, &source, cards)
            .build(&source)
            .unwrap();
        let (point, _, _) = best_corner(&source, &aux, &joint, &weights).unwrap();
        assert_eq!(out.point, point);
    }

    #[test]
    fn scalarized_distortion_matches_exhaustive_map_search() {
        // With all weight on distortion, the searched optimum must reach
        // the transparent configuration U_j = Y_j scored by the best of
        // all 16 deterministic reconstruction maps (enumerated here).
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let identity = AuxConfig::new(
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::identity(2),
            XhatMap::new(vec![0; 4], 2, 2),
        )
        .unwrap();
        let joint = chain_join(&source, &identity).unwrap();
        let m = joint.marginal(&[Var::X, Var::U1, Var::U2]).unwrap();
        let mut oracle = f64::INFINITY;
        for map in 0..16usize {
            let mut cost = 0.0;
            for u1 in 0..2 {
                for u2 in 0..2 {
                    let letter = (map >> (u1 * 2 + u2)) & 1;
                    for x in 0..2 {
                        cost += m.probs()[(x * 2 + u1) * 2 + u2] * source.distortion[x][letter];
                    }
                }
            }
            oracle = oracle.min(cost);
        }

        let cards = AuxCards {
            v1: 1,
            u1: 2,
            v2: 1,
            u2: 2,
        };
        let weights = Weights {
            dist: 1.0,
            ..Weights::ZERO
        };
        let budget = SearchBudget::new(24, 250, 0.5, 123).unwrap();
        let out = scalarized_optimize(&source, &weights, cards, &budget).unwrap();
        assert!(
            out.point.dist <= oracle + 1e-6,
            "search {} vs oracle {oracle}",
            out.point.dist
        );
    }

    #[test]
    fn frontier_of_a_constant_source_collapses() {
        let source = SourceSpec::new(
            Pmf::new(vec![1.0]).unwrap(),
            CondPmf::from_rows(&[vec![0.5, 0.5]]).unwrap(),
            CondPmf::from_rows(&[vec![0.5, 0.5]]).unwrap(),
            CondPmf::from_rows(&[vec![1.0]]).unwrap(),
            vec![vec![0.0]],
            1.0,
        )
        .unwrap();
        let cards = AuxCards {
            v1: 2,
            u1: 2,
            v2: 2,
            u2: 2,
        };
        let budget = SearchBudget::new(2, 5, 0.5, 1).unwrap();
        let frontier = trace_frontier(
            &source,
            (Objective::Delta1, Objective::Dist),
            4,
            cards,
            &budget,
        )
        .unwrap();
        for fp in &frontier.points {
            assert!(fp.point.d1.abs() < 1e-9);
            assert!(fp.point.d2.abs() < 1e-9);
            assert!(fp.point.dist.abs() < 1e-12);
        }
    }

    #[test]
    fn secrecy_rate_slice_trades_off_monotonically() {
        // The cross constraint couples the agent-1 equivocation to the
        // agent-2 rate, so tightening the rate must pull the achievable
        // secrecy down: the traced slice's Pareto envelope over
        // (Delta1 up, R2 down) is a real, monotone trade-off curve.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 2,
            u1: 2,
            v2: 2,
            u2: 2,
        };
        let budget = SearchBudget::new(6, 120, 0.5, 99).unwrap();
        let frontier = trace_frontier(
            &source,
            (Objective::Delta1, Objective::R2),
            8,
            cards,
            &budget,
        )
        .unwrap();

        // 2-D Pareto filter on the slice axes alone.
        let raw: Vec<(f64, f64)> = frontier
            .points
            .iter()
            .map(|fp| (fp.point.r2, fp.point.d1))
            .collect();
        let mut pareto: Vec<(f64, f64)> = raw
            .iter()
            .copied()
            .filter(|&(r2, d1)| {
                !raw.iter()
                    .any(|&(qr2, qd1)| qr2 <= r2 - 1e-9 && qd1 >= d1 + 1e-9)
            })
            .collect();
        pareto.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pareto.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
        assert!(
            pareto.len() >= 2,
            "slice collapsed to a single operating point: {pareto:?}"
        );
        for w in pareto.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-9,
                "secrecy envelope not monotone in the rate cap: {pareto:?}"
            );
        }
    }

    #[test]
    fn frontier_points_reevaluate_to_themselves() {
        // Every traced point must reproduce from its provenance: the
        // stored corner of the stored configuration evaluates to the same
        // operating point.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 2,
            u1: 2,
            v2: 2,
            u2: 2,
        };
        let budget = SearchBudget::new(3, 25, 0.5, 31).unwrap();
        let frontier = trace_frontier(
            &source,
            (Objective::Delta1, Objective::Dist),
            5,
            cards,
            &budget,
        )
        .unwrap();
        for fp in &frontier.points {
            let prov = &frontier.provenance[fp.config_id];
            let corners = crate::regions::corner_points(&source, &prov.aux).unwrap();
            let corner = corners
                .iter()
                .find(|c| Some(c.order) == prov.corner)
                .expect("stored corner exists");
            for (a, b) in [
                (corner.point.r1, fp.point.r1),
                (corner.point.r2, fp.point.r2),
                (corner.point.d1, fp.point.d1),
                (corner.point.d2, fp.point.d2),
                (corner.point.dist, fp.point.dist),
            ] {
                assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn frontier_is_deterministic() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let cards = AuxCards {
            v1: 2,
            u1: 2,
            v2: 2,
            u2: 2,
        };
        let budget = SearchBudget::new(3, 20, 0.5, 42).unwrap();
        let a = trace_frontier(
            &source,
            (Objective::Delta1, Objective::R2),
            5,
            cards,
            &budget,
        )
        .unwrap();
        let b = trace_frontier(
            &source,
            (Objective::Delta1, Objective::R2),
            5,
            cards,
            &budget,
        )
        .unwrap();
        assert_eq!(frontier_csv(&a), frontier_csv(&b));
        assert_eq!(
            serde_json::to_string(&frontier_json(&a)).unwrap(),
            serde_json::to_string(&frontier_json(&b)).unwrap()
        );
    }

    #[test]
    fn hull_properties() {
        let points = vec![
            RegionPoint {
                r1: 1.0,
                r2: 1.0,
                d1: 0.5,
                d2: 0.5,
                dist: 0.2,
            },
            // Strictly worse on every axis.
            RegionPoint {
                r1: 1.2,
                r2: 1.1,
                d1: 0.4,
                d2: 0.4,
                dist: 0.3,
            },
            // Incomparable.
            RegionPoint {
                r1: 0.5,
                r2: 1.5,
                d1: 0.6,
                d2: 0.2,
                dist: 0.25,
            },
        ];
        let hull = dominance_hull(&points);
        assert_eq!(hull.len(), 2);
        for a in &hull {
            for b in &hull {
                if a != b {
                    assert!(!strictly_dominates(a, b, 1e-9));
                }
            }
        }
        // Every raw point is weakly dominated by a hull member.
        for p in &points {
            assert!(hull.iter().any(|h| weakly_dominates(h, p, 1e-9)));
        }
    }

    #[test]
    fn hull_drops_points_dominated_by_mixtures() {
        // The middle point is beaten by time-sharing the extremes.
        let points = vec![
            RegionPoint {
                r1: 0.0,
                r2: 0.0,
                d1: 1.0,
                d2: 0.0,
                dist: 0.0,
            },
            RegionPoint {
                r1: 0.0,
                r2: 0.0,
                d1: 0.0,
                d2: 1.0,
                dist: 0.0,
            },
            RegionPoint {
                r1: 0.0,
                r2: 0.0,
                d1: 0.4,
                d2: 0.4,
                dist: 0.0,
            },
        ];
        let hull = dominance_hull(&points);
        assert_eq!(hull.len(), 2);
    }

    #[test]
    fn membership_verdicts() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let budget = SearchBudget::new(4, 40, 0.5, 9).unwrap();

        // Equivocation above the blind cap is certifiably outside.
        let too_secret = RegionPoint {
            r1: 1.0,
            r2: 1.0,
            d1: 1.5,
            d2: 0.0,
            dist: 0.5,
        };
        assert!(matches!(
            outer_membership(&source, &too_secret, &budget).unwrap(),
            Membership::Outside { .. }
        ));

        // Distortion below the observation-fed floor is outside.
        let too_sharp = RegionPoint {
            r1: 10.0,
            r2: 10.0,
            d1: 0.0,
            d2: 0.0,
            dist: 0.0,
        };
        assert!(matches!(
            outer_membership(&source, &too_sharp, &budget).unwrap(),
            Membership::Outside { .. }
        ));

        // The trivially achievable corner is inside.
        let lazy = RegionPoint {
            r1: 10.0,
            r2: 10.0,
            d1: 0.0,
            d2: 0.0,
            dist: 1.0,
        };
        assert_eq!(
            outer_membership(&source, &lazy, &budget).unwrap(),
            Membership::Inside
        );

        // Achieved inner points are never classified outside.
        let aux = sample_aux(
            &source,
            AuxCards {
                v1: 2,
                u1: 2,
                v2: 2,
                u2: 2,
            },
            17,
        )
        .unwrap();
        let eval = eval_inner(&source, &aux).unwrap();
        let achieved = RegionPoint {
            r1: eval.r1_lb.max(eval.sum_lb - eval.r2_lb),
            r2: eval.r2_lb,
            d1: eval.d1_ub,
            d2: eval.d2_ub.min(eval.dsum_ub.unwrap() - eval.d1_ub),
            dist: eval.dist_lb,
        };
        assert!(!matches!(
            outer_membership(&source, &achieved, &budget).unwrap(),
            Membership::Outside { .. }
        ));
    }
}
