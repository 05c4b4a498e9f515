//! Command implementations.

use serde_json::json;
use std::path::Path;
use std::str::FromStr;

use crate::cli::{BoundMode, Cli, Command, DiscreteArgs, GaussianArgs, SimulateArgs, VerifyArgs};
use crate::output::{write_atomic, OutputMeta};
use crate::{exit_code, CliError};

use rdeq_core::codesim::{
    coarse_leak_check, exact_equivocation, gen_code, run_trials_with_code, SimConfig,
};
use rdeq_core::gaussian::{boundary_sweep, fmt_f64, sweep_csv, GaussianParams};
use rdeq_core::prob::{chain_join, CondPmf, SourceSpec};
use rdeq_core::regions::{AuxConfig, RateSplit, XhatMap};
use rdeq_core::search::{
    derive_optimal_xhat, frontier_csv, frontier_json, trace_frontier, trace_frontier_outer,
    AuxCards, Objective, SearchBudget,
};
use rdeq_core::source_file::parse_source_str;

/// Environment variable overriding the exact-enumeration cost cap.
pub const ENUM_CAP_ENV: &str = "RDEQ_ENUM_CAP";

pub fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Gaussian(args) => cmd_gaussian(args),
        Command::Discrete(args) => cmd_discrete(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn parse_fixed_list<T: FromStr>(s: &str, n: usize, what: &str) -> Result<Vec<T>, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != n {
        return Err(CliError::Usage(format!(
            "{what} must be {n} comma-separated values, got `{s}`"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad value `{p}` in {what}")))
        })
        .collect()
}

fn load_source(path: &Path) -> Result<(rdeq_core::source_file::LoadedSource, Vec<u8>), CliError> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Core(rdeq_core::Error::BadSourceFile("not UTF-8".into())))?;
    let loaded = parse_source_str(&text)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok((loaded, bytes))
}

fn cmd_gaussian(args: GaussianArgs) -> Result<i32, CliError> {
    let params = match args.var_ne {
        Some(ne) => GaussianParams::new(args.var_x, args.var_n1, args.var_n2, ne)?,
        None => GaussianParams::no_side_info(args.var_x, args.var_n1, args.var_n2)?,
    };
    let rows = boundary_sweep(&params, args.distortion, args.grid)?;
    let meta = OutputMeta::new(args.seed, None);
    let content = format!("{}{}", meta.csv_header(), sweep_csv(&rows));
    write_atomic(&args.out, &content)?;
    Ok(exit_code::OK)
}

fn cmd_discrete(args: DiscreteArgs) -> Result<i32, CliError> {
    let (loaded, bytes) = load_source(&args.config)?;
    let source = loaded.source;

    let axis_names = parse_fixed_list::<String>(&args.axes, 2, "--axes")?;
    let axes = (
        Objective::parse(&axis_names[0]).ok_or_else(|| {
            CliError::Usage(format!("unknown objective `{}` in --axes", axis_names[0]))
        })?,
        Objective::parse(&axis_names[1]).ok_or_else(|| {
            CliError::Usage(format!("unknown objective `{}` in --axes", axis_names[1]))
        })?,
    );
    let budget_parts = parse_fixed_list::<usize>(&args.budget, 2, "--budget")?;
    let budget = SearchBudget::new(budget_parts[0], budget_parts[1], 0.5, args.seed)?;
    let cards = match &args.cards {
        None => AuxCards::modest(&source),
        Some(s) => {
            let c = parse_fixed_list::<usize>(s, 4, "--cards")?;
            AuxCards {
                v1: c[0],
                u1: c[1],
                v2: c[2],
                u2: c[3],
            }
        }
    };

    let frontier = match args.mode {
        BoundMode::Inner => trace_frontier(&source, axes, args.grid, cards, &budget)?,
        BoundMode::Outer => trace_frontier_outer(&source, axes, args.grid, cards, &budget)?,
    };

    let meta = OutputMeta::new(args.seed, Some(&bytes));
    let csv = format!("{}{}", meta.csv_header(), frontier_csv(&frontier));
    write_atomic(&args.out, &csv)?;

    let doc = json!({
        "meta": meta.json_value(),
        "mode": match args.mode { BoundMode::Inner => "inner", BoundMode::Outer => "outer" },
        "axes": [axes.0.label(), axes.1.label()],
        "grid": args.grid,
        "budget": budget,
        "cards": cards,
        "frontier": frontier_json(&frontier),
    });
    let json_path = args.out.with_extension("json");
    write_atomic(
        &json_path,
        &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"),
    )?;
    Ok(exit_code::OK)
}

/// Transparent default layers for simulation when the source file carries
/// no `aux` block: refinements pass the observations through, coarse
/// layers are silent, and the reconstruction map is the per-cell optimum.
fn transparent_aux(source: &SourceSpec) -> Result<AuxConfig, rdeq_core::Error> {
    let skeleton = AuxConfig::new(
        CondPmf::identity(source.ny1()),
        CondPmf::identity(source.ny2()),
        CondPmf::constant(source.ny1()),
        CondPmf::constant(source.ny2()),
        XhatMap::new(
            vec![0; source.ny1() * source.ny2()],
            source.ny1(),
            source.ny2(),
        ),
    )?;
    let joint = chain_join(source, &skeleton)?;
    let xhat = derive_optimal_xhat(source, &joint)?;
    AuxConfig::new(
        skeleton.pu1_y1,
        skeleton.pu2_y2,
        skeleton.pv1_u1,
        skeleton.pv2_u2,
        xhat,
    )
}

fn seq_str(seq: &[u8]) -> String {
    seq.iter().map(|l| l.to_string()).collect()
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let (loaded, bytes) = load_source(&args.config)?;
    let source = loaded.source;
    let aux = match loaded.aux {
        Some(a) => a,
        None => transparent_aux(&source)?,
    };

    let r = parse_fixed_list::<f64>(&args.rates, 4, "--rates")?;
    if r.iter().any(|&v| !(v >= 0.0)) {
        return Err(CliError::Usage("--rates must be non-negative".into()));
    }
    let rates = RateSplit {
        rv1: r[0],
        ru1: r[1],
        rv2: r[2],
        ru2: r[3],
    };

    let mut cfg = SimConfig::new(args.n, rates, args.trials, args.seed)?;
    if let Some(delta) = args.delta {
        if !(delta > 0.0) {
            return Err(CliError::Usage("--delta must be positive".into()));
        }
        cfg.delta = delta;
    }
    if let Some(eps) = &args.eps {
        let e = parse_fixed_list::<f64>(eps, 4, "--eps")?;
        cfg.eps = [e[0], e[1], e[2], e[3]];
    }
    if let Ok(cap) = std::env::var(ENUM_CAP_ENV) {
        cfg.enum_cap = cap.parse::<f64>().map_err(|_| {
            CliError::Usage(format!("{ENUM_CAP_ENV} must be a number, got `{cap}`"))
        })?;
    }

    let code = gen_code(&source, &aux, &cfg)?;
    let summary = run_trials_with_code(&source, &code, &cfg)?;

    let equivocation = if args.equivocation {
        let eq1 = exact_equivocation(&source, &code, 0, &cfg)?;
        let eq2 = exact_equivocation(&source, &code, 1, &cfg)?;
        let leak = coarse_leak_check(&source, &code, &cfg, cfg.delta)?;
        Some(json!({
            "agent1_bits_per_symbol": eq1,
            "agent2_bits_per_symbol": eq2,
            "coarse_leak": leak,
        }))
    } else {
        None
    };

    let meta = OutputMeta::new(args.seed, Some(&bytes));
    let doc = json!({
        "meta": meta.json_value(),
        "config": &cfg,
        "summary": &summary,
        "equivocation": equivocation,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &args.out {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }

    if let Some(dump) = &args.dump_trials {
        let mut csv = meta.csv_header();
        csv.push_str(
            "trial,distortion,decode_failed,encoder_fallback,b1,w1,b2,w2,x,y1,y2,e,xhat\n",
        );
        for (t, rec) in summary.records.iter().enumerate() {
            csv.push_str(&format!(
                "{t},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_f64(rec.distortion),
                rec.decode_failed as u8,
                rec.encoder_fallback as u8,
                rec.msgs.0,
                rec.msgs.1,
                rec.msgs.2,
                rec.msgs.3,
                seq_str(&rec.x),
                seq_str(&rec.y1),
                seq_str(&rec.y2),
                seq_str(&rec.e),
                seq_str(&rec.xhat_seq),
            ));
        }
        write_atomic(dump, &csv)?;
    }
    Ok(exit_code::OK)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, CliError> {
    let report = crate::verify::run_suite(&args.suite, args.seed).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown suite `{}`; expected one of {:?}",
            args.suite,
            crate::verify::SUITES
        ))
    })?;

    let meta = OutputMeta::new(args.seed, None);
    let doc = json!({
        "meta": meta.json_value(),
        "report": &report,
    });
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &args.out {
        Some(path) => write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(if report.pass {
        exit_code::OK
    } else {
        exit_code::SUITE_FAILURE
    })
}
