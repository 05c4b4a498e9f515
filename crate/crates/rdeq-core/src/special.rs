//! Reduced settings where agent 1 observes the source directly.
//!
//! Each evaluator computes its constraint set straight from the joint
//! table, on a different code path from the general inner-bound evaluator,
//! so the two can be cross-checked term by term. They double as features:
//! the reduced regions are exact in these settings.

use serde::Serialize;

use crate::error::Error;
use crate::prob::{chain_join, CondPmf, SourceSpec, Var};
use crate::regions::{eval_inner, AuxConfig, BoundEval, XhatMap};
use crate::Result;

/// A source whose first observation channel is the identity: agent 1 sees
/// `X` itself.
#[derive(Debug, Clone)]
pub struct HelperSpec {
    source: SourceSpec,
}

impl HelperSpec {
    pub fn new(source: SourceSpec) -> Result<Self> {
        let n = source.nx();
        if source.ny1() != n {
            return Err(Error::DimensionMismatch {
                axis: "p(y1|x) columns",
                expected: n,
                got: source.ny1(),
            });
        }
        for x in 0..n {
            for y in 0..n {
                let want = if x == y { 1.0 } else { 0.0 };
                if (source.py1_x.prob(x, y) - want).abs() > 1e-15 {
                    return Err(Error::Infeasible(
                        "agent 1 must observe the source directly (identity p(y1|x))".into(),
                    ));
                }
            }
        }
        Ok(Self { source })
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }
}

/// Constraints of the lossy setting with the second observation available
/// uncoded at the decoder (its link rate above `H(Y2)`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UncodedSiBounds {
    pub r1_lb: f64,
    pub d1_ub: f64,
    pub d2_ub: f64,
    pub dist_lb: f64,
}

/// `R1 ≥ I(X;U1|Y2)`, `Δ1 ≤ [H(X|V1,E) - I(U1;Y1|V1,Y2)]^+`,
/// `Δ2 ≤ H(X|Y2,E)`, `D ≥ E[d(X, x̂(U1, Y2))]`, with the layers drawn from
/// `X` through `u1_channel` then `v1_channel`.
pub fn uncoded_si_region(
    helper: &HelperSpec,
    u1_channel: &CondPmf,
    v1_channel: &CondPmf,
    xhat: &XhatMap,
) -> Result<UncodedSiBounds> {
    let source = helper.source();
    let aux = AuxConfig::new(
        u1_channel.clone(),
        CondPmf::identity(source.ny2()),
        v1_channel.clone(),
        CondPmf::identity(source.ny2()),
        xhat.clone(),
    )?;
    let joint = chain_join(source, &aux)?;
    use Var::*;
    let chain = [&[V1][..], &[U1][..], &[X][..], &[E, Y2][..]];
    if !joint.check_markov(&chain) {
        return Err(Error::MarkovViolation {
            chain: "V1-U1-X-(E,Y2)".into(),
            leak: joint.markov_leak(&chain),
        });
    }

    let r1_lb = joint.mutual_info(&[X], &[U1], &[Y2])?;
    let d1_ub =
        (joint.entropy(&[X], &[V1, E])? - joint.mutual_info(&[U1], &[Y1], &[V1, Y2])?).max(0.0);
    let d2_ub = joint.entropy(&[X], &[Y2, E])?;
    let dist_lb = crate::regions::expected_distortion(&joint, source, xhat)?;
    Ok(UncodedSiBounds {
        r1_lb,
        d1_ub,
        d2_ub,
        dist_lb,
    })
}

/// Constraints of the lossless variant (`D = 0`, helper link above
/// `H(Y2)`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UncodedSiLosslessBounds {
    pub r1_lb: f64,
    /// May be negative: printed without a positive part, unlike the lossy
    /// variant's bound.
    pub d1_ub: f64,
    pub d2_ub: f64,
}

/// `R1 ≥ H(X|Y2)`, `Δ1 ≤ I(X;Y2|V1) - I(X;E|V1)`, `Δ2 ≤ H(X|Y2,E)`, with
/// the refinement layer pinned to `U1 = X` and only the coarse layer free.
pub fn uncoded_si_lossless_region(
    helper: &HelperSpec,
    v1_channel: &CondPmf,
) -> Result<UncodedSiLosslessBounds> {
    let source = helper.source();
    let nx = source.nx();
    let aux = AuxConfig::new(
        CondPmf::identity(nx),
        CondPmf::identity(source.ny2()),
        v1_channel.clone(),
        CondPmf::identity(source.ny2()),
        XhatMap::new(
            (0..nx).flat_map(|x| vec![x; source.ny2()]).collect(),
            nx,
            source.ny2(),
        ),
    )?;
    let joint = chain_join(source, &aux)?;
    use Var::*;
    Ok(UncodedSiLosslessBounds {
        r1_lb: joint.entropy(&[X], &[Y2])?,
        d1_ub: joint.mutual_info(&[X], &[Y2], &[V1])? - joint.mutual_info(&[X], &[E], &[V1])?,
        d2_ub: joint.entropy(&[X], &[Y2, E])?,
    })
}

/// Constraints of the lossless setting with a coded helper link and a
/// blind eavesdropper.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CodedSiLosslessBounds {
    pub r1_lb: f64,
    pub r2_lb: f64,
    pub d1_ub: f64,
    pub d2_ub: f64,
}

/// `R1 ≥ H(X|U2)`, `R2 ≥ I(Y2;U2)`, `Δ1 ≤ I(X;U2)`, `Δ2 ≤ H(X|U2)`.
/// Requires an eavesdropper without side information (independent `E`).
pub fn coded_si_lossless_region(
    helper: &HelperSpec,
    u2_channel: &CondPmf,
) -> Result<CodedSiLosslessBounds> {
    let source = helper.source();
    let joint_xe = {
        let aux = AuxConfig::degenerate(source);
        chain_join(source, &aux)?
    };
    let leak = joint_xe.mutual_info(&[Var::X], &[Var::E], &[])?;
    if leak > crate::MARKOV_TOL {
        return Err(Error::Infeasible(format!(
            "eavesdropper side information must be independent of the source \
             (I(X;E) = {leak:.3e})"
        )));
    }

    let nx = source.nx();
    let nu2 = u2_channel.n_out();
    let aux = AuxConfig::new(
        CondPmf::identity(nx),
        u2_channel.clone(),
        CondPmf::constant(nx),
        CondPmf::identity(nu2),
        XhatMap::new((0..nx).flat_map(|x| vec![x; nu2]).collect(), nx, nu2),
    )?;
    let joint = chain_join(source, &aux)?;
    use Var::*;
    Ok(CodedSiLosslessBounds {
        r1_lb: joint.entropy(&[X], &[U2])?,
        r2_lb: joint.mutual_info(&[Y2], &[U2], &[])?,
        d1_ub: joint.mutual_info(&[X], &[U2], &[])?,
        d2_ub: joint.entropy(&[X], &[U2])?,
    })
}

/// Term-by-term comparison of the reduced helper-setting constraint set
/// against the general inner evaluator at the same configuration. The
/// agent-2 equivocation constraints are dropped in the reduction, so the
/// report carries no `d2` field.
#[derive(Debug, Clone, Serialize)]
pub struct SecureHelperReport {
    pub r1_lb: f64,
    pub r2_lb: f64,
    pub sum_lb: f64,
    pub d1_ub: f64,
    pub d1_minus_r2_ub: f64,
    pub dist_lb: f64,
    pub general: BoundEval,
    /// Largest absolute difference between the reduced terms and the
    /// matching general terms.
    pub max_deviation: f64,
}

/// Evaluates the reduced constraint set (agent 1 observing the source, the
/// agent-2 layers merged, agent-2 equivocation dropped) directly from the
/// joint, then compares it with the general inner evaluation.
///
/// The configuration's agent-2 coarse layer must be the identity so that
/// `V2 = U2`.
pub fn secure_helper_reduction(helper: &HelperSpec, aux: &AuxConfig) -> Result<SecureHelperReport> {
    let source = helper.source();
    let nu2 = aux.nu2();
    if aux.nv2() != nu2 {
        return Err(Error::DimensionMismatch {
            axis: "p(v2|u2) columns",
            expected: nu2,
            got: aux.nv2(),
        });
    }
    for u in 0..nu2 {
        for v in 0..nu2 {
            let want = if u == v { 1.0 } else { 0.0 };
            if (aux.pv2_u2.prob(u, v) - want).abs() > 1e-15 {
                return Err(Error::Infeasible(
                    "the reduction requires V2 = U2 (identity p(v2|u2))".into(),
                ));
            }
        }
    }

    let joint = chain_join(source, aux)?;
    use Var::*;
    // Reduced forms: every appearance of the first observation is written
    // through the source axis itself, and the refinement-given-source
    // correction vanishes because U1 is conditionally a function of X's
    // observation, i.e. I(U1;Y1|V1,X) = 0 here.
    let r1_lb = joint.mutual_info(&[U1], &[X], &[U2])?;
    let r2_lb = joint.mutual_info(&[U2], &[Y2], &[U1])?;
    let sum_lb = joint.mutual_info(&[U1, U2], &[X, Y2], &[])?;
    let h_x_v1e = joint.entropy(&[X], &[V1, E])?;
    let d1_ub = (h_x_v1e - joint.mutual_info(&[U1], &[X], &[V1, U2])?).max(0.0);
    let d1_minus_r2_ub = (h_x_v1e
        - joint.mutual_info(&[U2], &[Y2], &[U1])?
        - joint.mutual_info(&[U1], &[X], &[V1])?)
    .max(0.0);
    let dist_lb = crate::regions::expected_distortion(&joint, source, &aux.xhat)?;

    let general = eval_inner(source, aux)?;
    let max_deviation = [
        (r1_lb - general.r1_lb).abs(),
        (r2_lb - general.r2_lb).abs(),
        (sum_lb - general.sum_lb).abs(),
        (d1_ub - general.d1_ub).abs(),
        (d1_minus_r2_ub - general.d1_minus_r2_ub).abs(),
        (dist_lb - general.dist_lb).abs(),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    Ok(SecureHelperReport {
        r1_lb,
        r2_lb,
        sum_lb,
        d1_ub,
        d1_minus_r2_ub,
        dist_lb,
        general,
        max_deviation,
    })
}
