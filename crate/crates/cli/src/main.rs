use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use teamcheck::dependencies::{
    classify_closure, in_dmax, load_fo_dependency, members, nonjumping_check, ClosureProperty,
    Dependency, Registry,
};
use teamcheck::eval::Evaluator;
use teamcheck::rewrite::{
    build_definability_formula, build_e_formula, encode_global_disjunction, load_definability_form,
    pull_global_disjunction, relativize_fo,
};
use teamcheck::structures::load_structure_with;
use teamcheck::syntax::{free_variables, parse_with, Formula, ParseOptions};
use teamcheck::teams::load_team;
use teamcheck::verify::suite::{paper_suite, SuiteSize};
use teamcheck::verify::{Bounds, Checker, Report};
use teamcheck::{Budget, Error, EvalConfig, Strategy, Team};

const EXIT_TRUE: u8 = 0;
const EXIT_FALSE: u8 = 1;
const EXIT_EXHAUSTED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

/// Model checker for first-order logic with team semantics.
///
/// Exit codes: 0 true/ok, 1 false/fail, 2 budget exhausted, 64 usage error,
/// 65 parse or data error, 66 missing input file.
#[derive(Parser)]
#[command(name = "teamcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a structure and team.
    Eval(EvalArgs),
    /// Closure properties, maximal members and non-jumping of a dependency.
    Classify(ClassifyArgs),
    /// Exhaustive team-equivalence check.
    Equiv(EquivArgs),
    /// Formula transformations.
    Rewrite(RewriteArgs),
    /// Property checks and the fixed verification battery.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Brute,
    Opt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Args)]
struct Common {
    /// First-order dependency file (`carrier R/k` then a sentence); usable
    /// as `fo:<file stem>`. Repeatable.
    #[arg(long = "fo-dep", value_name = "FILE")]
    fo_dep: Vec<PathBuf>,
    /// Node budget per evaluation.
    #[arg(long, default_value_t = Budget::DEFAULT)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Brute)]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Read lo2/lo3 orders as strict.
    #[arg(long)]
    strict_orders: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Team file; defaults to the unit team for sentences.
    #[arg(long, value_name = "FILE")]
    team: Option<PathBuf>,
    #[arg(long)]
    formula: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Built-in dependency name.
    #[arg(long, required_unless_present = "fo_dep")]
    dep: Option<String>,
    #[arg(long = "max-n", default_value_t = 3)]
    max_n: usize,
    /// Also search for a jumping witness.
    #[arg(long)]
    nonjumping: bool,
    /// List the maximal members for each universe size.
    #[arg(long)]
    dmax: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
    #[arg(long = "max-n", default_value_t = 3)]
    max_n: usize,
    #[arg(long = "max-rows", default_value_t = 4)]
    max_rows: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "transformation")]
struct Transformation {
    /// Pull every `<|>` to the top and print the disjuncts.
    #[arg(long = "pull-sqcup", value_name = "FORMULA")]
    pull_sqcup: Option<String>,
    /// Replace `<|>` by its constancy encoding.
    #[arg(long = "encode-sqcup", value_name = "FORMULA")]
    encode_sqcup: Option<String>,
    /// The formula inducing the upward-reachable part of a dependency.
    #[arg(long = "e-formula", value_name = "DEP")]
    e_formula: Option<String>,
    /// The defining formula of a definability-form file.
    #[arg(long, value_name = "FILE")]
    definability: Option<PathBuf>,
    /// Relativize the quantifiers of a first-order formula to `--predicate`.
    #[arg(long, value_name = "FORMULA", requires = "predicate")]
    relativize: Option<String>,
}

#[derive(Args)]
struct RewriteArgs {
    #[command(flatten)]
    transformation: Transformation,
    #[arg(long)]
    predicate: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Flatness,
    Downwards,
    Union,
    EmptyTeam,
    Transmission,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, conflicts_with = "property", required_unless_present = "property")]
    suite: Option<Suite>,
    #[arg(long, value_enum, requires = "formula")]
    property: Option<PropertyArg>,
    #[arg(long)]
    formula: Option<String>,
    #[arg(long = "max-n", default_value_t = 3)]
    max_n: usize,
    #[arg(long = "max-rows", default_value_t = 4)]
    max_rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Missing(PathBuf),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(String, u8), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|_| Failure::Missing(path.to_path_buf()))
}

impl Common {
    fn config(&self) -> EvalConfig {
        let base = match self.strategy {
            StrategyArg::Brute => EvalConfig::brute(),
            StrategyArg::Opt => EvalConfig::optimized(),
        };
        base.with_budget(self.budget)
    }

    fn registry(&self) -> Result<Registry, Failure> {
        let mut registry = Registry::standard().with_strict_orders(self.strict_orders);
        for path in &self.fo_dep {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Failure::Usage(format!("bad file name {}", path.display())))?;
            registry.register(load_fo_dependency(name, &read(path)?)?);
        }
        Ok(registry)
    }

    fn machine(&self) -> bool {
        self.format == Format::Machine
    }
}

fn parse_formula(text: &str, registry: &Registry) -> Result<Formula, Failure> {
    Ok(parse_with(
        text,
        ParseOptions {
            allow_reserved: false,
            registry: Some(registry),
        },
    )?)
}

fn verdict(holds: bool) -> u8 {
    if holds {
        EXIT_TRUE
    } else {
        EXIT_FALSE
    }
}

fn run_eval(args: &EvalArgs) -> Outcome {
    let registry = args.common.registry()?;
    let config = args.common.config();
    let structure = load_structure_with(&read(&args.model)?, config.allow_small)?;
    let formula = parse_formula(&args.formula, &registry)?;
    let team = match &args.team {
        Some(path) => load_team(&read(path)?, &structure)?,
        None if free_variables(&formula).is_empty() => Team::unit(structure.size()),
        None => {
            return Err(Failure::Usage(
                "formula has free variables; pass --team".into(),
            ))
        }
    };
    let holds = Evaluator::new(&structure, &formula, &registry, &config)?.eval(&team)?;
    let strategy = match config.strategy {
        Strategy::Brute => "brute",
        Strategy::Optimized => "opt",
    };
    let out = if args.common.machine() {
        format!("EVAL VERDICT {holds} STRATEGY {strategy}\n")
    } else {
        format!("{holds}\n")
    };
    Ok((out, verdict(holds)))
}

fn classified_dependency(args: &ClassifyArgs, registry: &Registry) -> Result<Dependency, Failure> {
    match (&args.dep, args.common.fo_dep.as_slice()) {
        (Some(name), _) => Ok(registry.resolve_default(name)?),
        (None, [path]) => {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            Ok(registry.resolve_default(&format!("fo:{name}"))?)
        }
        (None, _) => Err(Failure::Usage(
            "pass --dep, or exactly one --fo-dep to classify".into(),
        )),
    }
}

fn run_classify(args: &ClassifyArgs) -> Outcome {
    let registry = args.common.registry()?;
    let dep = classified_dependency(args, &registry)?;
    let mut budget = Budget::new(args.common.budget);
    let report = classify_closure(&dep, args.max_n, &mut budget)?;
    let machine = args.common.machine();
    let mut out = String::new();
    if !machine {
        writeln!(out, "{} (arity {}, |M| <= {})", dep.name(), dep.arity(), args.max_n).unwrap();
    }
    for v in &report.verdicts {
        let witness = v.witness.as_ref().map(|w| {
            let rels: Vec<String> = w.relations.iter().map(|r| r.to_string()).collect();
            (w.universe, rels.join(" "))
        });
        match (machine, witness) {
            (true, None) => writeln!(out, "PROPERTY {} VERDICT ok", v.property),
            (true, Some((n, rels))) => writeln!(out, "PROPERTY {} VERDICT fail WITNESS n={n} {rels}", v.property),
            (false, None) => writeln!(out, "  {:<11} yes", v.property),
            (false, Some((n, rels))) => writeln!(out, "  {:<11} no   |M| = {n}: {rels}", v.property),
        }
        .unwrap();
    }
    if args.dmax {
        for n in 1..=args.max_n {
            let mut maximal = Vec::new();
            for r in members(&dep, n, &mut budget)? {
                if in_dmax(&dep, &r, &mut budget)? {
                    maximal.push(r.to_string());
                }
            }
            if machine {
                writeln!(out, "DMAX n={n} {}", maximal.join(" ")).unwrap();
            } else {
                writeln!(out, "  maximal at |M| = {n}: {}", maximal.join(" ")).unwrap();
            }
        }
    }
    if args.nonjumping {
        let nj = nonjumping_check(&dep, args.max_n, &mut budget)?;
        match (machine, &nj.witness) {
            (true, None) => writeln!(out, "NONJUMPING VERDICT ok"),
            (true, Some((n, r))) => writeln!(out, "NONJUMPING VERDICT fail WITNESS n={n} {r}"),
            (false, None) => writeln!(out, "  non-jumping"),
            (false, Some((n, r))) => writeln!(out, "  jumping     |M| = {n}: {r}"),
        }
        .unwrap();
    }
    Ok((out, EXIT_TRUE))
}

fn render(reports: &[Report], machine: bool) -> Outcome {
    let mut out = String::new();
    for r in reports {
        if machine {
            writeln!(out, "{}", r.machine_line()).unwrap();
        } else {
            write!(out, "{r}").unwrap();
        }
    }
    Ok((out, verdict(reports.iter().all(|r| r.holds))))
}

fn run_equiv(args: &EquivArgs) -> Outcome {
    let registry = args.common.registry()?;
    let left = parse_formula(&args.left, &registry)?;
    let right = parse_formula(&args.right, &registry)?;
    let checker = Checker::new(registry, args.common.config());
    let report = checker.check_equivalence(&left, &right, Bounds::new(args.max_n, args.max_rows))?;
    render(&[report], args.common.machine())
}

fn run_rewrite(args: &RewriteArgs) -> Outcome {
    let registry = args.common.registry()?;
    let machine = args.common.machine();
    let t = &args.transformation;
    let mut out = String::new();
    if let Some(text) = &t.pull_sqcup {
        let list = pull_global_disjunction(&parse_formula(text, &registry)?)?;
        for (i, d) in list.disjuncts().iter().enumerate() {
            if machine {
                writeln!(out, "DISJUNCT {} {d}", i + 1).unwrap();
            } else {
                writeln!(out, "{d}").unwrap();
            }
        }
    } else if let Some(text) = &t.encode_sqcup {
        writeln!(out, "{}", encode_global_disjunction(&parse_formula(text, &registry)?)).unwrap();
    } else if let Some(name) = &t.e_formula {
        writeln!(out, "{}", build_e_formula(name, &registry)?).unwrap();
    } else if let Some(path) = &t.definability {
        let def = build_definability_formula(&load_definability_form(&read(path)?)?)?;
        writeln!(out, "{}", def.formula).unwrap();
    } else if let Some(text) = &t.relativize {
        let predicate = args.predicate.as_deref().expect("required by clap");
        writeln!(out, "{}", relativize_fo(&parse_formula(text, &registry)?, predicate)?).unwrap();
    }
    Ok((out, EXIT_TRUE))
}

fn run_verify(args: &VerifyArgs) -> Outcome {
    let machine = args.common.machine();
    if args.suite.is_some() {
        return render(&paper_suite(args.seed, SuiteSize::full())?, machine);
    }
    let registry = args.common.registry()?;
    let text = args.formula.as_deref().expect("required by clap");
    let formula = parse_formula(text, &registry)?;
    let checker = Checker::new(registry, args.common.config());
    let bounds = Bounds::new(args.max_n, args.max_rows);
    let report = match args.property.expect("required by clap") {
        PropertyArg::Flatness => checker.check_flatness(&formula, bounds)?,
        PropertyArg::Downwards => {
            checker.check_closure_propagation(&formula, ClosureProperty::Downwards, bounds)?
        }
        PropertyArg::Union => checker.check_closure_propagation(&formula, ClosureProperty::Union, bounds)?,
        PropertyArg::EmptyTeam => {
            checker.check_closure_propagation(&formula, ClosureProperty::EmptyTeam, bounds)?
        }
        PropertyArg::Transmission => checker.check_atom_transmission(&formula, bounds)?,
    };
    render(&[report], machine)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_TRUE };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Eval(a) => run_eval(a),
        Command::Classify(a) => run_classify(a),
        Command::Equiv(a) => run_equiv(a),
        Command::Rewrite(a) => run_rewrite(a),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(failure) => {
            let code = match &failure {
                Failure::Usage(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_USAGE
                }
                Failure::Missing(path) => {
                    eprintln!("error: cannot read {}", path.display());
                    EXIT_NO_INPUT
                }
                Failure::Lib(e) => {
                    eprintln!("error: {e}");
                    if e.is_exhausted() {
                        EXIT_EXHAUSTED
                    } else {
                        EXIT_DATA
                    }
                }
            };
            ExitCode::from(code)
        }
    }
}
