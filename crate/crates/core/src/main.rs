use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use imprex::format::{LoadedTree, SupermartingaleFile, TreeFile, VariableFile};
use imprex::game::{
    game_lower, game_upper, hedging_check, is_supermartingale, optimal_supermartingale, HedgeTarget, Variable,
};
use imprex::harness::corpus::{self, CorpusEntry};
use imprex::harness::equivalence::default_situations;
use imprex::harness::{
    check_capacity, check_global_axioms, check_tree_coherence, equivalence_report, finitary_instances, Evaluator,
    Fault, Faulty, GameEvaluator, NamedVariable, OracleEvaluator, PropertyReport, RunConfig,
};
use imprex::limit::converge;
use imprex::oracle::{measure_lower_finitary, measure_lower_limit, measure_upper_finitary, measure_upper_limit};
use imprex::{Error, Result, Situation};

#[derive(Parser)]
#[command(name = "imprex", version, about = "Upper and lower expectations on imprecise probability trees")]
struct Cli {
    #[arg(long, global = true, env = "IMPREX_TOL", default_value_t = imprex::TOLERANCE)]
    tol: f64,
    #[arg(long, global = true, env = "IMPREX_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, env = "IMPREX_MAX_HORIZON", default_value_t = 64)]
    max_horizon: usize,
    /// Vertex-selection trees enumerated exactly before sampling.
    #[arg(long, global = true, env = "IMPREX_BUDGET", default_value_t = 1_000_000)]
    budget: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    Game,
    Oracle,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Coherence,
    Axioms,
    Capacity,
    Equivalence,
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    var: PathBuf,
    /// Only the variable with this name.
    #[arg(long)]
    name: Option<String>,
    /// Conditioning situation, e.g. `ab` or `a.b`; empty for the root.
    #[arg(long, default_value = "")]
    situation: String,
}

#[derive(Subcommand)]
enum Command {
    /// Upper and lower values of variables.
    Eval {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = RouteArg::Both)]
        route: RouteArg,
    },
    /// Measure route only, with the maximizing vertex selection.
    Oracle {
        #[command(flatten)]
        target: Target,
        /// Random selections tried beyond the budget.
        #[arg(long, default_value_t = 1024)]
        samples: usize,
    },
    /// Property suites; the shipped corpus unless `--tree` is given.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        var: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = RouteArg::Game)]
        route: RouteArg,
        /// Evaluator defect to inject, e.g. `shift_at_depth_one`.
        #[arg(long, value_parser = parse_fault)]
        fault: Option<Fault>,
    },
    /// Value trace of a monotone variable.
    Converge {
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = RouteArg::Game)]
        route: RouteArg,
        /// Print `horizon value` lines instead of JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Export or verify witness supermartingales.
    Supermartingale {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        var: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "")]
        situation: String,
        #[arg(long, conflicts_with = "verify")]
        export: Option<PathBuf>,
        #[arg(long)]
        verify: Option<PathBuf>,
        /// Depth of the supermartingale check.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 4096)]
        paths: usize,
    },
}

fn parse_fault(s: &str) -> std::result::Result<Fault, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn load_target(t: &Target) -> Result<(LoadedTree, Situation, Vec<VariableFile>)> {
    let tree = TreeFile::load(&t.tree)?;
    let s = tree.space().parse_situation(&t.situation)?;
    let mut vars = VariableFile::load_all(&t.var)?;
    if let Some(name) = &t.name {
        vars.retain(|v| &v.name() == name);
        if vars.is_empty() {
            return Err(Error::Spec(format!("no variable named `{name}`")));
        }
    }
    Ok((tree, s, vars))
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn eval(cli: &Cli, config: &RunConfig, target: &Target, route: RouteArg) -> Result<bool> {
    let (tree, s, vars) = load_target(target)?;
    let controls = config.convergence();
    let envelope = config.envelope();
    let mut out = Vec::new();
    for vf in &vars {
        let v = vf.build(tree.space(), &s)?;
        let mut entry = json!({ "name": vf.name(), "situation": tree.space().display_situation(&s) });
        if route != RouteArg::Oracle {
            let up = game_upper(&tree.tree, &v, &s, &controls)?;
            let low = game_lower(&tree.tree, &v, &s, &controls)?;
            entry["game"] = json!({ "upper": up, "lower": low });
        }
        if route != RouteArg::Game {
            entry["oracle"] = match &v {
                Variable::Finitary(f) => json!({
                    "upper": measure_upper_finitary(&tree.tree, f, &s, &envelope)?,
                    "lower": measure_lower_finitary(&tree.tree, f, &s, &envelope)?,
                }),
                Variable::Monotone(m) => json!({
                    "upper": measure_upper_limit(&tree.tree, m, &s, &controls, &envelope)?,
                    "lower": measure_lower_limit(&tree.tree, m, &s, &controls, &envelope)?,
                }),
                Variable::CutExtended(_) => Value::Null,
            };
        }
        eprintln!("{}", summary_line(&entry));
        out.push(entry);
    }
    print_json(&json!({ "tol": cli.tol, "results": out }));
    Ok(true)
}

fn summary_line(entry: &Value) -> String {
    let pick = |route: &str, side: &str| -> String {
        let v = &entry[route][side];
        let x = if v.get("value").is_some() {
            &v["value"]
        } else if v.get("limit").is_some() {
            &v["limit"]["estimate"]
        } else {
            &Value::Null
        };
        match x {
            Value::Null => "-".into(),
            other => other.to_string(),
        }
    };
    format!(
        "{:<24} {:>6}  game [{}, {}]  oracle [{}, {}]",
        entry["name"].as_str().unwrap_or(""),
        entry["situation"].as_str().unwrap_or(""),
        pick("game", "lower"),
        pick("game", "upper"),
        pick("oracle", "lower"),
        pick("oracle", "upper"),
    )
}

fn suite_entries(tree: &Option<PathBuf>, var: &Option<PathBuf>) -> Result<Vec<CorpusEntry>> {
    match tree {
        None => corpus::suite_trees(),
        Some(path) => Ok(vec![CorpusEntry {
            name: "tree",
            tree: TreeFile::load(path)?,
            variables: match var {
                Some(v) => VariableFile::load_all(v)?,
                None => Vec::new(),
            },
        }]),
    }
}

fn run_suite(suite: Suite, entry: &CorpusEntry, config: &RunConfig, route: RouteArg, fault: Option<Fault>) -> PropertyReport {
    let tree = &entry.tree.tree;
    let mut report = match suite {
        Suite::Coherence => check_tree_coherence(tree, config),
        Suite::Equivalence => {
            let mut vars: Vec<NamedVariable> = entry.variables.iter().cloned().map(NamedVariable::File).collect();
            vars.extend(finitary_instances(tree.arity(), 20, config.seed));
            equivalence_report(tree, &vars, &default_situations(tree.arity()), config)
        }
        Suite::Axioms | Suite::Capacity => {
            let game = GameEvaluator { tree };
            let oracle = OracleEvaluator {
                tree,
                controls: config.envelope(),
            };
            let base: &dyn Evaluator = if route == RouteArg::Oracle { &oracle } else { &game };
            let faulty;
            let e: &dyn Evaluator = match fault {
                Some(fault) => {
                    faulty = Faulty { inner: base, fault };
                    &faulty
                }
                None => base,
            };
            match suite {
                Suite::Axioms => check_global_axioms(e, config),
                _ => check_capacity(e, config),
            }
        }
    };
    report.suite = format!("{}/{}", report.suite, entry.name);
    report
}

fn check(
    config: &RunConfig,
    suite: Suite,
    tree: &Option<PathBuf>,
    var: &Option<PathBuf>,
    route: RouteArg,
    fault: Option<Fault>,
) -> Result<bool> {
    let mut passed = true;
    let mut reports = Vec::new();
    for entry in suite_entries(tree, var)? {
        let r = run_suite(suite, &entry, config, route, fault);
        eprint!("{}", r.to_table());
        passed &= r.passed();
        reports.push(r);
    }
    print_json(&serde_json::to_value(&reports)?);
    Ok(passed)
}

fn converge_cmd(config: &RunConfig, target: &Target, route: RouteArg, trace: bool) -> Result<bool> {
    let (tree, s, vars) = load_target(target)?;
    let controls = config.convergence();
    let envelope = config.envelope();
    let mut out = Vec::new();
    for vf in &vars {
        let seq = match vf.build(tree.space(), &s)? {
            Variable::Monotone(m) => m,
            Variable::Finitary(f) => imprex::limit::MonotoneVariable::constant(f),
            Variable::CutExtended(c) => c.base,
        };
        let r = match route {
            RouteArg::Oracle => measure_upper_limit(&tree.tree, &seq, &s, &controls, &envelope)?.limit,
            _ => converge(&seq, &controls, |g| GameEvaluator { tree: &tree.tree }.upper(g, &s))?,
        };
        if trace {
            println!("# {}", vf.name());
            println!("horizon\tvalue");
            for p in &r.trace {
                println!("{}\t{:.12}", p.horizon, p.value);
            }
        }
        out.push(json!({ "name": vf.name(), "result": r }));
    }
    if !trace {
        print_json(&Value::Array(out));
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn supermartingale_cmd(
    config: &RunConfig,
    tree_path: &PathBuf,
    var: &Option<PathBuf>,
    name: &Option<String>,
    situation: &str,
    export: &Option<PathBuf>,
    verify: &Option<PathBuf>,
    depth: Option<usize>,
    paths: usize,
) -> Result<bool> {
    let tree = TreeFile::load(tree_path)?;
    let s = tree.space().parse_situation(situation)?;
    let gamble = match var {
        None => None,
        Some(path) => {
            let target = Target {
                tree: tree_path.clone(),
                var: path.clone(),
                name: name.clone(),
                situation: situation.to_string(),
            };
            let (_, _, vars) = load_target(&target)?;
            match vars.first().map(|v| v.build(tree.space(), &s)).transpose()? {
                Some(Variable::Finitary(f)) => Some(f),
                Some(_) => return Err(Error::Spec("witnesses are built for finitary variables".into())),
                None => None,
            }
        }
    };
    if let Some(path) = export {
        let f = gamble.ok_or_else(|| Error::Spec("--export needs --var".into()))?;
        let m = optimal_supermartingale(&tree.tree, &f, &s)?;
        SupermartingaleFile::from_supermartingale(tree.space(), &m).save(path)?;
        print_json(&json!({ "exported": path, "value": m.value_at(&s)?, "entries": m.entries().len() }));
        return Ok(true);
    }
    let path = verify.as_ref().ok_or_else(|| Error::Spec("give --export or --verify".into()))?;
    let (space, m) = SupermartingaleFile::load(path)?;
    if space != *tree.space() {
        return Err(Error::InvalidStateSpace("supermartingale and tree use different states".into()));
    }
    let depth = depth.unwrap_or_else(|| m.depth().max(gamble.as_ref().map_or(0, |f| f.horizon())));
    let report = is_supermartingale(&m, &tree.tree, depth, config.tol)?;
    let mut passed = report.is_valid();
    let mut out = json!({ "supermartingale": report });
    if let Some(f) = &gamble {
        let verdict = hedging_check(&m, HedgeTarget::Finitary(f), &s, f.horizon(), paths, config.seed, config.tol)?;
        passed &= verdict.passed();
        out["hedging"] = serde_json::to_value(&verdict)?;
        out["start"] = json!(m.value_at(&s)?);
    }
    print_json(&out);
    Ok(passed)
}

fn run(cli: &Cli) -> Result<bool> {
    let mut config = RunConfig {
        tol: cli.tol,
        seed: cli.seed,
        max_horizon: cli.max_horizon,
        budget: cli.budget,
        ..Default::default()
    };
    match &cli.command {
        Command::Eval { target, route } => {
            config.validate()?;
            eval(cli, &config, target, *route)
        }
        Command::Oracle { target, samples } => {
            config.oracle_samples = *samples;
            config.validate()?;
            eval(cli, &config, target, RouteArg::Oracle)
        }
        Command::Check {
            suite,
            tree,
            var,
            samples,
            route,
            fault,
        } => {
            config.samples = *samples;
            config.validate()?;
            check(&config, *suite, tree, var, *route, *fault)
        }
        Command::Converge { target, route, trace } => {
            config.validate()?;
            converge_cmd(&config, target, *route, *trace)
        }
        Command::Supermartingale {
            tree,
            var,
            name,
            situation,
            export,
            verify,
            depth,
            paths,
        } => {
            config.paths = *paths;
            config.validate()?;
            supermartingale_cmd(&config, tree, var, name, situation, export, verify, *depth, *paths)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
