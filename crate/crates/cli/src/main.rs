//! `liftforge`: build, decide and measure proper liftings from the command line.
//!
//! Exit status: 0 on success, 1 when a computed value disagrees with what was
//! claimed or checked, 2 on usage errors.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use liftforge::catalog::{self, VerifyOptions};
use liftforge::diffunif::{self, DU_N_CAP};
use liftforge::expr::print_expr;
use liftforge::families::{self, ChainFamilyParams, OrderClaim, SymmetricFamilyParams};
use liftforge::landscape::{count_conserved, enumerate_conserved};
use liftforge::lifting::{self, DEFAULT_N_CAP};
use liftforge::search6;
use liftforge::{LiftExpr, Rule};

#[derive(Parser)]
#[command(
    name = "liftforge",
    version,
    about = "Proper liftings and reversible cellular automata"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Worker threads.
    #[arg(long, global = true, env = "LIFTFORGE_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Largest circular length for bijectivity and DU scans.
    #[arg(long, global = true, default_value_t = DEFAULT_N_CAP, value_parser = clap::value_parser!(u32).range(1..=24))]
    n_cap: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Allow long-running computations.
    #[arg(long, global = true)]
    long: bool,
    /// Print expressions with `*` and `o` instead of `★` and `∘`.
    #[arg(long, global = true)]
    ascii: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an expression and describe the resulting rule.
    Parse { expr: String },
    /// Decide properness.
    Verify {
        expr: String,
        /// Exact pair-graph decision (the default).
        #[arg(long, conflicts_with = "finite")]
        exact: bool,
        /// Bijectivity scan over circular lengths k..=N instead.
        #[arg(long, value_name = "N")]
        finite: Option<u32>,
    },
    /// Compose expressions left to right as written (rightmost applied first).
    Compose {
        #[arg(required = true, num_args = 1..)]
        exprs: Vec<String>,
    },
    /// Expand a rule with the given stride.
    Expand {
        expr: String,
        #[arg(long)]
        stride: u32,
    },
    /// Count conserved landscapes of length k.
    Landscapes {
        #[arg(long)]
        k: u32,
        /// Also count elementary equivalence classes.
        #[arg(long)]
        classes: bool,
        /// List the landscapes.
        #[arg(long)]
        list: bool,
    },
    /// Exhaustive search for diameter-6 involutions.
    Search6 {
        /// Offsets to search; 4 and 5 are otherwise obtained by reversal.
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
        s: Vec<u32>,
        /// Also allow f(0) = 1.
        #[arg(long)]
        with_constant: bool,
    },
    /// Build a member of one of the parametric families.
    Families {
        #[arg(long, requires_all = ["j", "set"], conflicts_with = "r")]
        k: Option<u32>,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<u32>>,
        /// Chain family parameter.
        #[arg(long)]
        r: Option<u32>,
    },
    /// Differential uniformity over a range of lengths.
    Du {
        #[arg(required = true, num_args = 1..)]
        exprs: Vec<String>,
        /// Range `a..b` (inclusive).
        #[arg(long, value_parser = parse_range)]
        n: (u32, u32),
        /// Report 2^(9-n)·DU instead of the raw maximum.
        #[arg(long)]
        scaled: bool,
    },
    /// Verify the bundled catalog.
    Catalog {
        /// Also compare DU for n = 6..=12.
        #[arg(long)]
        du: bool,
        /// Also run the degree-2 composition probe.
        #[arg(long)]
        degree2: bool,
    },
    /// Closure of the conserved-landscape generators under composition.
    Closure {
        #[arg(long, default_value_t = 8)]
        max_diameter: u32,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
    },
}

fn parse_range(text: &str) -> Result<(u32, u32), String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| format!("expected a..b, got {text:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.parse().map_err(|_| format!("bad bound {a:?}"))?;
    let b: u32 = b.parse().map_err(|_| format!("bad bound {b:?}"))?;
    if a > b {
        return Err(format!("empty range {text}"));
    }
    Ok((a, b))
}

enum Failure {
    Mismatch(String),
    Usage(String),
}

impl From<liftforge::Error> for Failure {
    fn from(e: liftforge::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.run.jobs {
        pool = pool.num_threads(jobs as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let cfg = &cli.run;
    match &cli.command {
        Command::Parse { expr } => {
            let e = LiftExpr::parse(expr)?;
            describe(cfg, &print_expr(&e, cfg.ascii), &e.eval()?);
            Ok(())
        }
        Command::Verify { expr, finite, .. } => verify(cfg, expr, *finite),
        Command::Compose { exprs } => {
            let chain = exprs
                .iter()
                .map(|e| LiftExpr::parse(e))
                .collect::<liftforge::Result<Vec<_>>>()?
                .into_iter()
                .reduce(LiftExpr::compose)
                .expect("at least one expression");
            describe(cfg, &print_expr(&chain, cfg.ascii), &chain.eval()?);
            Ok(())
        }
        Command::Expand { expr, stride } => {
            let e = LiftExpr::parse(expr)?;
            let r = lifting::expand(&e.eval()?, *stride)?;
            describe(
                cfg,
                &format!("{} expanded by {stride}", print_expr(&e, cfg.ascii)),
                &r,
            );
            Ok(())
        }
        Command::Landscapes { k, classes, list } => landscapes(cfg, *k, *classes, *list),
        Command::Search6 { s, with_constant } => run_search6(cfg, s, *with_constant),
        Command::Families { k, j, set, r } => run_families(cfg, *k, *j, set.as_deref(), *r),
        Command::Du { exprs, n, scaled } => du(cfg, exprs, *n, *scaled),
        Command::Catalog { du, degree2 } => run_catalog(cfg, *du, *degree2),
        Command::Closure {
            max_diameter,
            budget,
        } => closure(cfg, *max_diameter, *budget),
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn describe(cfg: &RunConfig, name: &str, r: &Rule) {
    let v = json!({
        "expr": name,
        "rule": r.to_string(),
        "k": r.k(),
        "shift": r.shift(),
        "degree": r.degree(),
        "balanced": r.is_balanced(),
        "anf": r.to_anf().to_string(),
        "class": r.canonicalize().to_string(),
    });
    match cfg.format {
        Format::Json => print_json(&v),
        Format::Csv => {
            println!("expr,rule,k,shift,degree,anf,class");
            println!(
                "\"{name}\",{r},{},{},{},\"{}\",{}",
                r.k(),
                r.shift(),
                r.degree(),
                r.to_anf(),
                r.canonicalize()
            );
        }
        Format::Text => {
            println!("{name}");
            println!("  rule    {r}");
            println!("  k       {}", r.k());
            println!("  shift   {}", r.shift());
            println!("  degree  {}", r.degree());
            println!("  anf     {}", r.to_anf());
            println!("  class   {}", r.canonicalize());
        }
    }
}

fn verify(cfg: &RunConfig, expr: &str, finite: Option<u32>) -> Outcome {
    let rule = LiftExpr::parse(expr)?.eval()?;
    let verdict = match finite {
        Some(n) if n > cfg.n_cap => {
            return Err(Failure::Usage(format!(
                "--finite {n} exceeds --n-cap {}",
                cfg.n_cap
            )))
        }
        Some(n) => lifting::finite_scan(&rule, n)?,
        None => lifting::decide_proper(&rule)?,
    };
    match cfg.format {
        Format::Json => print_json(&serde_json::to_value(&verdict).expect("serializable")),
        _ => {
            println!(
                "{}",
                if verdict.is_proper() {
                    "proper"
                } else {
                    "not proper"
                }
            );
            if let Some(w) = &verdict.witness {
                println!("{}", serde_json::to_string(w).expect("serializable"));
            }
        }
    }
    if verdict.is_proper() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{expr} is not proper")))
    }
}

fn landscapes(cfg: &RunConfig, k: u32, classes: bool, list: bool) -> Outcome {
    if k >= 13 && !cfg.long {
        return Err(Failure::Usage(format!("k={k} takes minutes; pass --long")));
    }
    if k >= 13 {
        eprintln!("counting conserved landscapes of length {k}...");
    }
    if list {
        let census = enumerate_conserved(k)?;
        match cfg.format {
            Format::Json => print_json(&serde_json::to_value(&census).expect("serializable")),
            _ => {
                for l in census.landscapes.iter().flatten() {
                    println!(
                        "{}",
                        if cfg.ascii {
                            l.to_ascii()
                        } else {
                            l.to_string()
                        }
                    );
                }
                println!("count={} classes={}", census.count, census.classes);
            }
        }
        return Ok(());
    }
    let (count, n_classes) = count_conserved(k)?;
    match cfg.format {
        Format::Json => print_json(&json!({ "k": k, "count": count, "classes": n_classes })),
        Format::Csv => println!("k,count,classes\n{k},{count},{n_classes}"),
        Format::Text if classes => println!("count={count} classes={n_classes}"),
        Format::Text => println!("count={count}"),
    }
    Ok(())
}

fn run_search6(cfg: &RunConfig, offsets: &[u32], with_constant: bool) -> Outcome {
    let mut reports = Vec::new();
    for &s in offsets {
        reports.push(search6::complete_search(s, !with_constant)?);
    }
    let pooled = match (
        reports.iter().find(|r| r.stats.s == 2),
        reports.iter().find(|r| r.stats.s == 3),
    ) {
        (Some(a), Some(b)) => Some(search6::pool(a, b)),
        _ => None,
    };
    match cfg.format {
        Format::Json => {
            for r in &reports {
                for f in &r.functions {
                    println!("{}", serde_json::to_string(f).expect("serializable"));
                }
            }
        }
        Format::Csv => {
            println!("s,rule,class,anf");
            for r in &reports {
                for f in &r.functions {
                    println!("{},{},{},\"{}\"", f.s, f.rule, f.class_id, f.anf);
                }
            }
        }
        Format::Text => {
            for r in &reports {
                let st = &r.stats;
                println!(
                    "s={} mappings={:?} combinations={} survivors={} (by period {:?}) fixed_windows={} functions={} classes={}",
                    st.s,
                    st.mappings,
                    st.combinations,
                    st.survivors,
                    st.survivors_by_period,
                    st.fixed_windows,
                    r.functions.len(),
                    r.classes
                );
                for f in &r.functions {
                    println!("  {}  class {}  {}", f.rule, f.class_id, f.anf);
                }
            }
            if let Some(p) = &pooled {
                println!(
                    "pooled s=2..5: classes={} functions={}",
                    p.classes.len(),
                    p.functions.len()
                );
            }
        }
    }
    Ok(())
}

fn run_families(
    cfg: &RunConfig,
    k: Option<u32>,
    j: Option<u32>,
    set: Option<&[u32]>,
    r: Option<u32>,
) -> Outcome {
    let (rule, claim, params) = match (k, j, set, r) {
        (Some(k), Some(j), Some(set), None) => {
            let p = SymmetricFamilyParams::new(k, j, set.iter().copied())?;
            let rule = families::build_symmetric(&p)?;
            (
                rule,
                OrderClaim::PowerOfTwo(p.r_exp),
                serde_json::to_value(&p).expect("serializable"),
            )
        }
        (None, None, None, Some(r)) => {
            let p = ChainFamilyParams::new(r)?;
            (
                families::build_chain(p)?,
                OrderClaim::Exact(r),
                json!({ "r": r }),
            )
        }
        _ => return Err(Failure::Usage("give either --k --j --set or --r".into())),
    };
    let proper = if rule.k() <= lifting::PAIR_GRAPH_MAX_K {
        Some(lifting::decide_proper(&rule)?.is_proper())
    } else {
        None
    };
    let order = families::verify_order_claim(&rule, claim).ok();
    let claim_text = match claim {
        OrderClaim::PowerOfTwo(e) => format!("F^(2^{e}) = I"),
        OrderClaim::Exact(m) => format!("F^{m} = I"),
    };
    match cfg.format {
        Format::Json => print_json(&json!({
            "params": params,
            "rule": rule.to_string(),
            "shift": rule.shift(),
            "anf": rule.to_anf().to_string(),
            "proper": proper,
            "order_claim": claim_text,
            "order_claim_holds": order,
        })),
        _ => {
            println!("rule    {rule}");
            println!("anf     {}", rule.to_anf());
            println!(
                "proper  {}",
                proper.map_or("unchecked (k too large)".into(), |p| p.to_string())
            );
            println!(
                "order   {claim_text}: {}",
                order.map_or("unchecked (composition too wide)".into(), |o| o.to_string())
            );
        }
    }
    if proper == Some(false) || order == Some(false) {
        return Err(Failure::Mismatch(
            "family member failed its guarantee".into(),
        ));
    }
    Ok(())
}

fn du(cfg: &RunConfig, exprs: &[String], (from, to): (u32, u32), scaled: bool) -> Outcome {
    let cap = cfg.n_cap.min(DU_N_CAP);
    if to > cap {
        return Err(Failure::Usage(format!("n={to} exceeds the DU cap {cap}")));
    }
    let parsed = exprs
        .iter()
        .map(|e| LiftExpr::parse(e))
        .collect::<liftforge::Result<Vec<_>>>()?;
    if parsed.len() == 1 && cfg.format == Format::Text {
        let report = diffunif::du_profile(&parsed[0].eval()?, from, to)?;
        let values: Vec<String> = report
            .entries
            .iter()
            .map(|e| {
                if scaled {
                    e.du_scaled.to_string()
                } else {
                    e.du_raw.to_string()
                }
            })
            .collect();
        println!("{}", values.join(" "));
        return Ok(());
    }
    if !scaled {
        let reports = parsed
            .iter()
            .map(|e| diffunif::du_profile(&e.eval()?, from, to))
            .collect::<liftforge::Result<Vec<_>>>()?;
        match cfg.format {
            Format::Json => print_json(&serde_json::to_value(&reports).expect("serializable")),
            _ => {
                println!("rule,n,du_raw,du_scaled,a,b");
                for r in &reports {
                    for e in &r.entries {
                        println!(
                            "{},{},{},{},{},{}",
                            r.rule, e.n, e.du_raw, e.du_scaled, e.witness.0, e.witness.1
                        );
                    }
                }
            }
        }
        return Ok(());
    }
    let table = diffunif::du_scaled_table(&parsed, from, to)?;
    match cfg.format {
        Format::Json => print_json(&serde_json::to_value(&table).expect("serializable")),
        Format::Csv => print!("{}", table.to_csv()),
        Format::Text => print!("{}", table.to_text()),
    }
    Ok(())
}

fn run_catalog(cfg: &RunConfig, du: bool, degree2: bool) -> Outcome {
    let entries = catalog::load_catalog()?;
    let s2 = search6::complete_search(2, true)?;
    let s3 = search6::complete_search(3, true)?;
    let opts = VerifyOptions {
        du_n_max: du.then_some(12),
        required_classes: search6::pool(&s2, &s3).classes,
    };
    let report = catalog::verify_catalog(&entries, &opts)?;
    let identities = catalog::identities()?;
    let probe = if degree2 {
        Some(catalog::degree2_probe(&entries)?)
    } else {
        None
    };
    match cfg.format {
        Format::Json => print_json(&json!({
            "catalog": report,
            "identities": identities,
            "degree2_probe": probe,
        })),
        _ => {
            println!(
                "entries={} distinct_classes={} orbit_functions={} mismatches={} missing_search6_classes={}",
                report.entries.len(),
                report.distinct_classes,
                report.orbit_functions,
                report.mismatches.len(),
                report.missing_required.len()
            );
            for m in &report.mismatches {
                println!(
                    "  entry {} {}: {} stated {} computed {}",
                    m.index, m.expr, m.field, m.stated, m.computed
                );
            }
            for i in &identities {
                println!(
                    "identity {}: {} = {}: {}",
                    i.name,
                    i.lhs,
                    i.rhs,
                    if i.holds { "holds" } else { "FAILS" }
                );
            }
            if let Some(p) = &probe {
                println!(
                    "degree-2 probe over {} ({} rules, {} ordered pairs)",
                    p.universe, p.universe_size, p.pairs
                );
                println!(
                    "  resulting degrees {:?}; degree-2 compositions: {}",
                    p.degree_histogram,
                    p.degree2.len()
                );
            }
        }
    }
    let identities_hold = identities.iter().all(|i| i.holds);
    let probe_clean = probe.as_ref().is_none_or(|p| p.degree2.is_empty());
    if report.is_clean() && identities_hold && probe_clean {
        Ok(())
    } else {
        Err(Failure::Mismatch("catalog verification failed".into()))
    }
}

fn closure(cfg: &RunConfig, max_diameter: u32, budget: usize) -> Outcome {
    if max_diameter > 8 && !cfg.long {
        return Err(Failure::Usage(format!(
            "--max-diameter {max_diameter} takes long; pass --long"
        )));
    }
    let report = catalog::closure_search(max_diameter, budget)?;
    match cfg.format {
        Format::Json => print_json(&serde_json::to_value(&report).expect("serializable")),
        _ => {
            println!(
                "max_diameter={} generators={} states={} classes={} diameter6_classes={} involution6_classes={} budget_exhausted={} (lower bound)",
                report.max_diameter,
                report.generators,
                report.states,
                report.classes.len(),
                report.diameter6_classes,
                report.involution6_classes,
                report.budget_exhausted
            );
        }
    }
    Ok(())
}
