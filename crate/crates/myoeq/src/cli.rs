//! Command-line front end. Exit codes: 0 when every certificate passes,
//! 2 for configuration problems (bad flags, malformed documents), 3 for
//! numeric failures (a certificate above tolerance, solver budget exhausted).

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::document::GameDocument;
use crate::error::{Error, Result};
use crate::matrix::envelope::{Envelope, EnvelopeKind};
use crate::matrix::{a_star, b_star, game_value, Mat, StateMatrices};
use crate::myopic::{
    aggregate_optimum_1p, aggregate_payoffs, nash_gap_scan, solve_myopic,
    SolverConfig,
};
use crate::neyman::plans::{check_joint_plan, GameData, PlanSearchOptions};
use crate::neyman::solve::{solve_neyman, verify_neyman_equilibrium, NeymanConfig};
use crate::report::{Certificate, Report};
use crate::simplex::face_decompose;
use crate::structure::{FunctionSpace, SpaceElement};
use crate::tree::solve::{check_proper_vector, solve_composite, CompositeConfig};

#[derive(Parser)]
#[command(
    name = "myoeq",
    about = "Myopic equilibria: solvers for games with per-action payoff functions, composite game trees, and weighted-stage repeated games with one-sided information"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Project a comma-separated vector onto the probability simplex
    Project {
        vector: String,
        #[arg(long)]
        json_out: Option<String>,
    },
    /// Find myopic equilibria of a `myopic` game document
    Solve {
        file: String,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        mesh: usize,
        #[arg(long)]
        json_out: Option<String>,
    },
    /// Round-trip the equilibrium-graph maps over the document's family space
    Structure {
        file: String,
        #[arg(long)]
        check_roundtrip: bool,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json_out: Option<String>,
    },
    /// Value and optimal strategies of a zero-sum matrix game (text matrix),
    /// or the prior-weighted values of a `neyman` document with --p
    Value {
        file: String,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long)]
        json_out: Option<String>,
    },
    /// Solve the composite game of a `tree` document
    TreeSolve {
        file: String,
        #[arg(long, default_value_t = 0.125)]
        eps_max: f64,
        #[arg(long, default_value_t = 1.52587890625e-5)]
        eps_min: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json_out: Option<String>,
    },
    /// Run the weighted-stage pipeline on a `neyman` document and verify it
    NeymanSolve {
        file: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json_out: Option<String>,
    },
    /// Re-verify a joint `plan` document from scratch
    VerifyPlan {
        file: String,
        #[arg(long)]
        json_out: Option<String>,
    },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.cmd) {
        Ok(report) => {
            let ok = report.all_pass();
            if !ok {
                println!("one or more certificates FAILED");
            }
            if ok {
                0
            } else {
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                3
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<Report> {
    match cmd {
        Cmd::Project { vector, json_out } => cmd_project(&vector, json_out.as_deref()),
        Cmd::Solve {
            file,
            tol,
            restarts,
            seed,
            mesh,
            json_out,
        } => cmd_solve(&file, tol, restarts, seed, mesh, json_out.as_deref()),
        Cmd::Structure {
            file,
            check_roundtrip,
            samples,
            seed,
            json_out,
        } => cmd_structure(&file, check_roundtrip, samples, seed, json_out.as_deref()),
        Cmd::Value { file, p, json_out } => cmd_value(&file, p, json_out.as_deref()),
        Cmd::TreeSolve {
            file,
            eps_max,
            eps_min,
            seed,
            json_out,
        } => cmd_tree_solve(&file, eps_max, eps_min, seed, json_out.as_deref()),
        Cmd::NeymanSolve {
            file,
            seed,
            json_out,
        } => cmd_neyman_solve(&file, seed, json_out.as_deref()),
        Cmd::VerifyPlan { file, json_out } => cmd_verify_plan(&file, json_out.as_deref()),
    }
}

fn finish(report: Report, json_out: Option<&str>) -> Result<Report> {
    for line in report.summary_lines() {
        println!("{line}");
    }
    if let Some(path) = json_out {
        report.write_to(path)?;
        println!("report written to {path}");
    }
    Ok(report)
}

fn cmd_project(vector: &str, json_out: Option<&str>) -> Result<Report> {
    let coords: Vec<f64> = vector
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("not a number: `{s}`")))
        })
        .collect::<Result<_>>()?;
    let dec = face_decompose(&coords)?;
    let as_str = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    println!("projection: {}", as_str(dec.x.coords()));
    println!("support: {:?}", dec.support);
    println!("complement: {}", as_str(&dec.y));
    // how far the complement's supported coordinates sit from their maximum
    let top = dec.y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dev = dec
        .support
        .iter()
        .map(|&i| (dec.y[i] - top).abs())
        .fold(0.0, f64::max);
    let mut report = Report::new("project");
    report.tolerance("face_deviation", 1e-12);
    report.push(Certificate::upper("face_deviation", dev, 1e-12));
    report.results = json!({
        "input": coords,
        "projection": dec.x.coords(),
        "support": dec.support,
        "complement": dec.y,
    });
    finish(report, json_out)
}

fn cmd_solve(
    file: &str,
    tol: f64,
    restarts: usize,
    seed: u64,
    mesh: usize,
    json_out: Option<&str>,
) -> Result<Report> {
    let source = std::fs::read_to_string(file)?;
    let GameDocument::Myopic(doc) = crate::document::parse_document(&source)? else {
        return Err(Error::Config(format!("`{file}` is not a myopic game document")));
    };
    let game = doc.compile()?;
    let cfg = SolverConfig {
        tol,
        restarts,
        seed,
        mesh,
        ..SolverConfig::default()
    };
    let reports = solve_myopic(&game.family, &cfg)?;
    let mut report = Report::new("solve").with_input(file, &source);
    report.seed = Some(seed);
    report.tolerance("residual", tol);
    let mut results = Vec::new();
    println!("{} myopic equilibrium/equilibria found", reports.len());
    for (i, rep) in reports.iter().enumerate() {
        let agg = aggregate_payoffs(&game.family, &rep.profile)?;
        println!("equilibrium {i}:");
        for (n, name) in game.player_names.iter().enumerate() {
            let probs: Vec<String> = game.action_names[n]
                .iter()
                .enumerate()
                .map(|(a, an)| format!("{an}={:.6}", rep.profile.prob(n, a)))
                .collect();
            println!("  {name}: {}  (aggregate {:.6})", probs.join(" "), agg[n]);
        }
        println!("  residual {:.3e}", rep.residual);
        report.push(Certificate::upper(
            &format!("equilibrium[{i}].residual"),
            rep.residual,
            tol,
        ));
        results.push(json!({
            "profile": rep.profile,
            "witness": rep.witness,
            "residual": rep.residual,
            "aggregate": agg,
            "trace": rep.trace,
        }));
    }
    // contrast section: where the aggregate payoffs would send a planner
    let contrast = if game.layout.players() == 1 {
        let (x, v) = aggregate_optimum_1p(&game.family, 1000)?;
        println!(
            "contrast: aggregate optimum at {:?} with value {:.6}",
            x.block(0).coords(),
            v
        );
        json!({"kind": "aggregate_optimum", "profile": x, "value": v})
    } else if game.layout.players() == 2 {
        let scan = nash_gap_scan(&game.family, 100, 1e-3)?;
        println!(
            "contrast: best-reply-gain scan on the 1/100 mesh: min max-gain {:.6}, approximate Nash point exists: {}",
            scan.min_max_gain, scan.any_below
        );
        json!({
            "kind": "nash_gap_scan",
            "min_max_gain": scan.min_max_gain,
            "any_below_threshold": scan.any_below,
            "threshold": scan.threshold,
            "argmin": scan.argmin,
        })
    } else {
        serde_json::Value::Null
    };
    report.results = json!({"equilibria": results, "contrast": contrast});
    finish(report, json_out)
}

fn cmd_structure(
    file: &str,
    check_roundtrip: bool,
    samples: usize,
    seed: u64,
    json_out: Option<&str>,
) -> Result<Report> {
    use rand::{Rng, SeedableRng};
    let source = std::fs::read_to_string(file)?;
    let GameDocument::Myopic(doc) = crate::document::parse_document(&source)? else {
        return Err(Error::Config(format!("`{file}` is not a myopic game document")));
    };
    let game = doc.compile()?;
    let space = FunctionSpace::constants_plus(
        game.layout.clone(),
        vec![Box::new(game.family)],
        8,
        crate::structure::DEFAULT_NORM_MESH,
    )?;
    let x0 = crate::profile::MixedProfile::barycenter(space.layout());
    let mut report = Report::new("structure").with_input(file, &source);
    report.seed = Some(seed);
    report.tolerance("roundtrip", 1e-8);
    report.tolerance("membership", 1e-8);
    if !check_roundtrip {
        println!("nothing to do (pass --check-roundtrip)");
        report.results = json!({"dim": space.dim()});
        return finish(report, json_out);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst_rt: f64 = 0.0;
    let mut worst_member: f64 = 0.0;
    let mut worst_bound: f64 = f64::NEG_INFINITY;
    let delta = space.delta();
    for _ in 0..samples {
        let w = SpaceElement::new((0..space.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect())?;
        let pt = space.phi(&w, &x0)?;
        worst_member = worst_member.max(space.membership_residual(&pt)?);
        let back = space.psi(&pt, &x0)?;
        worst_rt = worst_rt.max(back.coeff_dist(&w));
        let pt2 = space.phi(&back, &x0)?;
        worst_rt = worst_rt
            .max(pt2.element.coeff_dist(&pt.element))
            .max(pt2.profile.dist_inf(&pt.profile));
        let wn = space.sup_norm(&w)?;
        let diff = pt.element.sub(&w);
        worst_bound = worst_bound.max(space.sup_norm(&diff)? - (2.0 * wn + delta));
    }
    println!("space dimension {}", space.dim());
    println!("worst round-trip deviation {worst_rt:.3e}");
    println!("worst membership residual {worst_member:.3e}");
    println!("worst shift-bound slack {worst_bound:.3e} (must stay below 0)");
    report.push(Certificate::upper("roundtrip_deviation", worst_rt, 1e-8));
    report.push(Certificate::upper("membership_residual", worst_member, 1e-8));
    report.push(Certificate::upper("shift_bound_excess", worst_bound.max(0.0), 1e-9));
    report.results = json!({
        "dim": space.dim(),
        "samples": samples,
        "worst_roundtrip": worst_rt,
        "worst_membership": worst_member,
    });
    finish(report, json_out)
}

fn read_text_matrix(src: &str) -> Result<Mat> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in src.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Config(format!("not a number: `{t}`")))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    Mat::from_rows(&rows)
}

fn cmd_value(file: &str, p: Option<Vec<f64>>, json_out: Option<&str>) -> Result<Report> {
    let source = std::fs::read_to_string(file)?;
    let mut report = Report::new("value").with_input(file, &source);
    report.tolerance("duality_gap", 1e-9);
    if let Ok(GameDocument::Neyman(doc)) = crate::document::parse_document(&source) {
        let spec = doc.spec()?;
        let prior = p.unwrap_or_else(|| spec.p0.clone());
        if prior.len() != spec.states() {
            return Err(Error::Config("prior length must match the state count".into()));
        }
        let av = a_star(&spec.mats, &prior)?;
        let bv = b_star(&spec.mats, &prior)?;
        let m = crate::matrix::default_grid_m(spec.states());
        let vex = Envelope::from_fn(spec.states(), m, |q| b_star(&spec.mats, q), EnvelopeKind::Vex)?;
        let cav = Envelope::from_fn(spec.states(), m, |q| a_star(&spec.mats, q), EnvelopeKind::Cav)?;
        let vexv = vex.eval(&prior)?;
        let cavv = cav.eval(&prior)?;
        println!("prior {prior:?}");
        println!("value to player one a*(p) = {av:.9}");
        println!("defendable by player two b*(p) = {bv:.9}");
        println!("vex(b*)(p) = {vexv:.9}, cav(a*)(p) = {cavv:.9}");
        let gv = game_value(&StateMatrices::weighted(&spec.mats.a, &prior)?)?;
        report.push(Certificate::upper("duality_gap", gv.duality_gap, 1e-9));
        report.results = json!({
            "prior": prior,
            "a_star": av,
            "b_star": bv,
            "vex_b_star": vexv,
            "cav_a_star": cavv,
        });
        return finish(report, json_out);
    }
    let m = read_text_matrix(&source)?;
    let gv = game_value(&m)?;
    println!("value { :.9}", gv.value);
    println!("row strategy {:?}", gv.row.coords());
    println!("column strategy {:?}", gv.col.coords());
    report.push(Certificate::upper("duality_gap", gv.duality_gap, 1e-9));
    report.results = json!({
        "value": gv.value,
        "row": gv.row.coords(),
        "col": gv.col.coords(),
        "duality_gap": gv.duality_gap,
    });
    finish(report, json_out)
}

fn cmd_tree_solve(
    file: &str,
    eps_max: f64,
    eps_min: f64,
    seed: u64,
    json_out: Option<&str>,
) -> Result<Report> {
    let source = std::fs::read_to_string(file)?;
    let GameDocument::Tree(doc) = crate::document::parse_document(&source)? else {
        return Err(Error::Config(format!("`{file}` is not a tree document")));
    };
    let (tree, cont, g) = doc.compile()?;
    if !(eps_min > 0.0 && eps_min <= eps_max) {
        return Err(Error::Config("need 0 < eps-min <= eps-max".into()));
    }
    let mut schedule = Vec::new();
    let mut eps = eps_max;
    while eps >= eps_min {
        schedule.push(eps);
        eps *= 0.5;
    }
    let mut cfg = CompositeConfig {
        schedule,
        ..CompositeConfig::default()
    };
    cfg.solver.seed = seed;
    let sol = solve_composite(&tree, &cont, &g, &cfg)?;
    let check = check_proper_vector(&tree, &cont, &g, &sol.proper)?;
    println!("profile over pure decision strategies:");
    for n in 0..tree.players() {
        let probs: Vec<String> = (0..tree.num_pure_strategies(n))
            .map(|s| format!("s{s}={:.6}", sol.proper.profile.prob(n, s)))
            .collect();
        println!("  player {}: {}", n + 1, probs.join(" "));
    }
    println!("deviation certificate {:.3e}", sol.certificate);
    println!("epsilons used: {:?}", sol.epsilons_used);
    let mut report = Report::new("tree-solve").with_input(file, &source);
    report.seed = Some(seed);
    report.tolerance("certificate", cfg.certificate_tol);
    report.tolerance("hull_membership", 1e-7);
    report.push(Certificate::upper("deviation_certificate", sol.certificate, cfg.certificate_tol));
    report.push(Certificate::upper("y_identity", check.y_identity_error, 1e-10));
    report.push(Certificate::upper("hull_membership", check.hull_distance, 1e-7));
    report.results = json!({
        "profile": sol.proper.profile,
        "y": sol.proper.y,
        "nu": sol.proper.nu,
        "class_probs": sol.class_probs,
        "conditionals": sol.conditionals,
        "epsilons": sol.epsilons_used,
        "trace": sol.trace,
    });
    finish(report, json_out)
}

fn cmd_neyman_solve(file: &str, seed: u64, json_out: Option<&str>) -> Result<Report> {
    let source = std::fs::read_to_string(file)?;
    let GameDocument::Neyman(doc) = crate::document::parse_document(&source)? else {
        return Err(Error::Config(format!("`{file}` is not a neyman document")));
    };
    let spec = doc.spec()?;
    let mut cfg = NeymanConfig::default();
    cfg.composite.solver.seed = seed;
    cfg.seed = seed ^ 0xA5A5;
    let run = solve_neyman(&spec, &cfg)?;
    let ver = verify_neyman_equilibrium(&run)?;
    println!("stage-strategy profile:");
    for n in 0..run.nt.tree.players() {
        let probs: Vec<String> = (0..run.nt.tree.num_pure_strategies(n))
            .map(|s| format!("s{s}={:.6}", run.solution.proper.profile.prob(n, s)))
            .collect();
        println!("  player {}: {}", n + 1, probs.join(" "));
    }
    for d in &ver.details {
        println!("{d}");
    }
    let mut report = Report::new("neyman-solve").with_input(file, &source);
    report.seed = Some(seed);
    report.tolerance("deviation_gain", cfg.verify_tol);
    report.tolerance("conditional_independence", cfg.star_tol);
    report.tolerance("hull_membership", cfg.member_tol);
    report.tolerance("ir_margin", -cfg.verify_tol);
    report.push(Certificate::upper("deviation_gain", ver.deviation_gain, cfg.verify_tol));
    report.push(Certificate::upper("conditional_independence", ver.star_diff, cfg.star_tol));
    report.push(Certificate::upper("hull_membership", ver.membership_worst, cfg.member_tol));
    report.push(Certificate::lower("ir_margin", ver.ir_margin, -cfg.verify_tol));
    report.results = json!({
        "profile": run.solution.proper.profile,
        "y": run.solution.proper.y,
        "nu": run.solution.proper.nu,
        "conditionals": run.solution.conditionals,
        "certificate": run.solution.certificate,
        "verification": ver,
    });
    finish(report, json_out)
}

fn cmd_verify_plan(file: &str, json_out: Option<&str>) -> Result<Report> {
    let source = std::fs::read_to_string(file)?;
    let GameDocument::Plan(doc) = crate::document::parse_document(&source)? else {
        return Err(Error::Config(format!("`{file}` is not a plan document")));
    };
    let spec = doc.spec()?;
    let plan = doc.plan()?;
    let data = GameData::new(spec.mats.clone(), crate::matrix::default_grid_m(spec.states()))?;
    let opts = PlanSearchOptions::default();
    let check = check_joint_plan(&plan, &data, opts.check_tol)?;
    if check.ok {
        println!("plan satisfies all joint-plan conditions");
    } else {
        for issue in &check.issues {
            println!("violation: {issue}");
        }
    }
    let ir = crate::matrix::individually_rational_p1(&plan.y, &spec.mats, data.grid_m, opts.check_tol)?;
    println!("IR margin of y: {:.6e} at q = {:?}", ir.margin, ir.worst_q);
    let mut report = Report::new("verify-plan").with_input(file, &source);
    report.tolerance("condition_tol", opts.check_tol);
    report.push(Certificate::upper(
        "plan_violations",
        check.issues.len() as f64,
        0.0,
    ));
    report.push(Certificate::lower("ir_margin", ir.margin, -opts.check_tol));
    report.results = json!({
        "ok": check.ok,
        "issues": check.issues,
        "ir_margin": ir.margin,
        "worst_q": ir.worst_q,
    });
    finish(report, json_out)
}
