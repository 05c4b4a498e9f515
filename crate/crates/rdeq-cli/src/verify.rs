//! Cross-module identity suites: randomized corpora checking that
//! independently implemented evaluators agree term by term, that corner
//! points satisfy every bound constraint, and that the with-side-
//! information Gaussian region collapses onto the blind one.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rdeq_core::gaussian::{d_min, region_no_si, region_si, sweep_grid, GaussianParams, QuantRates};
use rdeq_core::prob::{chain_join, CondPmf, Pmf, SourceSpec, Var};
use rdeq_core::regions::{corner_points, eval_inner, AuxConfig, XhatMap};
use rdeq_core::search::{sample_aux, AuxCards};
use rdeq_core::special::{
    coded_si_lossless_region, secure_helper_reduction, uncoded_si_lossless_region,
    uncoded_si_region, HelperSpec,
};

/// One identity check's aggregate over its random corpus.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl SuiteReport {
    fn assemble(suite: &str, checks: Vec<CheckResult>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            suite: suite.to_string(),
            checks,
            pass,
        }
    }
}

/// Known suite names.
pub const SUITES: [&str; 4] = ["all", "corollaries", "gaussian-reduction", "corners"];

/// Runs a suite by name; `None` for an unknown name (a usage error).
pub fn run_suite(suite: &str, seed: u64) -> Option<SuiteReport> {
    match suite {
        "corollaries" => Some(corollaries_suite(seed)),
        "gaussian-reduction" => Some(gaussian_reduction_suite()),
        "corners" => Some(corners_suite(seed)),
        "all" => {
            let mut checks = Vec::new();
            checks.extend(gaussian_reduction_suite().checks);
            checks.extend(corners_suite(seed).checks);
            checks.extend(corollaries_suite(seed).checks);
            Some(SuiteReport::assemble("all", checks))
        }
        _ => None,
    }
}

fn dirichlet_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return vec![1.0 / k as f64; k];
    }
    raw.into_iter().map(|v| v / sum).collect()
}

fn random_channel(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> CondPmf {
    CondPmf::from_rows(
        &(0..n_in)
            .map(|_| dirichlet_row(rng, n_out))
            .collect::<Vec<_>>(),
    )
    .expect("normalized rows")
}

fn random_binary_source(rng: &mut ChaCha8Rng) -> SourceSpec {
    SourceSpec::new(
        Pmf::new(dirichlet_row(rng, 2)).expect("normalized"),
        random_channel(rng, 2, 2),
        random_channel(rng, 2, 2),
        random_channel(rng, 2, 2),
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        1.0,
    )
    .expect("valid source")
}

/// The with-side-information region at a huge but finite noise variance
/// must match the blind region within 1e-6 over a 50×50 rate grid, and
/// exactly (1e-12) at the infinity sentinel. Evaluated at each cell's own
/// minimal distortion so every cell is feasible.
pub fn gaussian_reduction_suite() -> SuiteReport {
    let blind = GaussianParams::no_side_info(1.0, 1.0, 1.0).expect("valid");
    let huge = GaussianParams::new(1.0, 1.0, 1.0, 1e9).expect("valid");
    let sentinel = GaussianParams::new(1.0, 1.0, 1.0, f64::INFINITY).expect("valid");

    let rs = sweep_grid(50);
    let mut dev_huge = 0.0f64;
    let mut dev_sentinel = 0.0f64;
    let mut cases = 0usize;
    for &r1 in &rs {
        for &r2 in &rs {
            let rates = QuantRates { r1, r2 };
            let d = d_min(&blind, &rates);
            let base = region_no_si(&blind, &rates, d).expect("feasible at its own d_min");
            let at_huge = region_si(&huge, &rates, d).expect("same feasible set");
            let at_inf = region_si(&sentinel, &rates, d).expect("same feasible set");
            for (a, b, c) in [
                (base.r1_lb, at_huge.r1_lb, at_inf.r1_lb),
                (base.r2_lb, at_huge.r2_lb, at_inf.r2_lb),
                (base.sum_lb, at_huge.sum_lb, at_inf.sum_lb),
                (base.d1_ub, at_huge.d1_ub, at_inf.d1_ub),
                (base.d2_ub, at_huge.d2_ub, at_inf.d2_ub),
                (base.dsum_ub, at_huge.dsum_ub, at_inf.dsum_ub),
                (
                    base.d1_minus_r2_ub,
                    at_huge.d1_minus_r2_ub,
                    at_inf.d1_minus_r2_ub,
                ),
                (
                    base.d2_minus_r1_ub,
                    at_huge.d2_minus_r1_ub,
                    at_inf.d2_minus_r1_ub,
                ),
            ] {
                dev_huge = dev_huge.max((a - b).abs());
                dev_sentinel = dev_sentinel.max((a - c).abs());
            }
            cases += 1;
        }
    }
    SuiteReport::assemble(
        "gaussian-reduction",
        vec![
            CheckResult::new("reduction at var_ne = 1e9", cases, dev_huge, 1e-6),
            CheckResult::new(
                "reduction at the infinity sentinel",
                cases,
                dev_sentinel,
                1e-12,
            ),
        ],
    )
}

/// Corner points of random binary configurations must satisfy every
/// achievable-bound constraint (slack tolerance 1e-9) and split the sum
/// rate exactly (1e-10).
pub fn corners_suite(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xC0);
    let cases = 1000usize;
    let mut worst_violation = 0.0f64;
    let mut worst_sum_dev = 0.0f64;
    for case in 0..cases {
        let source = random_binary_source(&mut rng);
        let cards = AuxCards {
            v1: 1 + (case % 3),
            u1: 2,
            v2: 1 + ((case / 3) % 3),
            u2: 2,
        };
        let aux = sample_aux(&source, cards, seed ^ (case as u64) << 8).expect("within caps");
        let eval = eval_inner(&source, &aux).expect("valid");
        let corners = corner_points(&source, &aux).expect("valid");
        for c in &corners {
            let p = &c.point;
            let violation = [
                eval.r1_lb - p.r1,
                eval.r2_lb - p.r2,
                eval.sum_lb - (p.r1 + p.r2),
                p.d1 - eval.d1_ub,
                p.d2 - eval.d2_ub,
                p.d1 + p.d2 - eval.dsum_ub.expect("inner has a joint cap"),
                p.d1 - p.r2 - eval.d1_minus_r2_ub,
                p.d2 - p.r1 - eval.d2_minus_r1_ub,
                eval.dist_lb - p.dist,
            ]
            .into_iter()
            .fold(0.0f64, f64::max);
            worst_violation = worst_violation.max(violation);
            worst_sum_dev = worst_sum_dev.max((p.r1 + p.r2 - eval.sum_lb).abs());
        }
    }
    SuiteReport::assemble(
        "corners",
        vec![
            CheckResult::new("corner membership slack", cases * 6, worst_violation, 1e-9),
            CheckResult::new("corner sum-rate identity", cases * 6, worst_sum_dev, 1e-10),
        ],
    )
}

/// Every reduced-setting evaluator must equal the specialization of the
/// general achievable-bound evaluator term by term, and the blind-helper
/// secrecy split must be exact.
pub fn corollaries_suite(seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xC1);
    let cases = 1000usize;

    let mut dev_reduction = 0.0f64;
    let mut dev_uncoded = 0.0f64;
    let mut dev_lossless = 0.0f64;
    let mut dev_coded = 0.0f64;
    let mut dev_split = 0.0f64;

    for _ in 0..cases {
        // A helper source: agent 1 observes the source directly.
        let mut source = random_binary_source(&mut rng);
        source.py1_x = CondPmf::identity(2);
        let helper = HelperSpec::new(source.clone()).expect("identity first channel");

        // Shared random layers.
        let u1_ch = random_channel(&mut rng, 2, 2);
        let v1_ch = random_channel(&mut rng, 2, 2);
        let u2_ch = random_channel(&mut rng, 2, 2);

        // General reduction with merged agent-2 layers.
        let aux = AuxConfig::new(
            u1_ch.clone(),
            u2_ch.clone(),
            v1_ch.clone(),
            CondPmf::identity(2),
            XhatMap::new(vec![0, 0, 1, 1], 2, 2),
        )
        .expect("consistent");
        let report = secure_helper_reduction(&helper, &aux).expect("helper form");
        dev_reduction = dev_reduction.max(report.max_deviation);

        // Uncoded side information at the decoder.
        let xhat = XhatMap::new(vec![0, 0, 1, 1], 2, 2);
        let bounds = uncoded_si_region(&helper, &u1_ch, &v1_ch, &xhat).expect("helper form");
        let general = eval_inner(
            helper.source(),
            &AuxConfig::new(
                u1_ch.clone(),
                CondPmf::identity(2),
                v1_ch.clone(),
                CondPmf::identity(2),
                xhat,
            )
            .expect("consistent"),
        )
        .expect("valid");
        for (a, b) in [
            (bounds.r1_lb, general.r1_lb),
            (bounds.d1_ub, general.d1_ub),
            (bounds.d2_ub, general.d2_ub),
            (bounds.dist_lb, general.dist_lb),
        ] {
            dev_uncoded = dev_uncoded.max((a - b).abs());
        }

        // Lossless with the refinement pinned to the source.
        let lossless = uncoded_si_lossless_region(&helper, &v1_ch).expect("helper form");
        let general = eval_inner(
            helper.source(),
            &AuxConfig::new(
                CondPmf::identity(2),
                CondPmf::identity(2),
                v1_ch.clone(),
                CondPmf::identity(2),
                XhatMap::new(vec![0, 0, 1, 1], 2, 2),
            )
            .expect("consistent"),
        )
        .expect("valid");
        for (a, b) in [
            (lossless.r1_lb, general.r1_lb),
            (lossless.d1_ub.max(0.0), general.d1_ub),
            (lossless.d2_ub, general.d2_ub),
        ] {
            dev_lossless = dev_lossless.max((a - b).abs());
        }

        // Coded helper link with a blind eavesdropper.
        let mut blind = source.clone();
        blind.pe_x = CondPmf::constant(2);
        let blind_helper = HelperSpec::new(blind.clone()).expect("identity first channel");
        let coded = coded_si_lossless_region(&blind_helper, &u2_ch).expect("blind");
        let general = eval_inner(
            &blind,
            &AuxConfig::new(
                CondPmf::identity(2),
                u2_ch.clone(),
                CondPmf::constant(2),
                CondPmf::identity(2),
                XhatMap::new(vec![0, 0, 1, 1], 2, 2),
            )
            .expect("consistent"),
        )
        .expect("valid");
        for (a, b) in [
            (coded.r1_lb, general.r1_lb),
            (coded.r2_lb, general.sum_lb - general.r1_lb),
            (coded.d1_ub, general.d1_ub),
            (coded.d2_ub, general.d2_ub),
        ] {
            dev_coded = dev_coded.max((a - b).abs());
        }
        let joint = chain_join(&blind, &AuxConfig::degenerate(&blind)).expect("valid");
        let h_x = joint.entropy(&[Var::X], &[]).expect("valid");
        dev_split = dev_split.max((coded.d1_ub + coded.d2_ub - h_x).abs());
    }

    SuiteReport::assemble(
        "corollaries",
        vec![
            CheckResult::new("secure-helper reduction", cases, dev_reduction, 1e-10),
            CheckResult::new("uncoded side information", cases, dev_uncoded, 1e-10),
            CheckResult::new(
                "uncoded side information, lossless",
                cases,
                dev_lossless,
                1e-10,
            ),
            CheckResult::new(
                "coded side information, blind eavesdropper",
                cases,
                dev_coded,
                1e-10,
            ),
            CheckResult::new("blind-helper secrecy split", cases, dev_split, 1e-12),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_unknown_names_are_rejected() {
        assert!(run_suite("gaussian-reduction", 7).unwrap().pass);
        assert!(run_suite("", 7).is_none());
        assert!(run_suite("bogus", 7).is_none());
    }
}
