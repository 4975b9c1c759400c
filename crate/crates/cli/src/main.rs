use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use caclab::forcing::{build_diagonal_poset, check_requirements, Condition, DiagonalConfig, Selector};
use caclab::game::{cac_via_omega_strategy, play_reduction_game, BruteForceAdversary, Strategy, TableStrategy};
use caclab::gen::{gen_instance, rng, GenOptions};
use caclab::json::{self, ConditionDoc, DocError, InstanceDoc, MachineSpec, SelectorsDoc, SolutionDoc, TreeDoc};
use caclab::machines::{machine_family, MachineFile};
use caclab::problems::{max_feasible, solve_poset, validate_instance, verify_solution};
use caclab::reductions::{
    append_type_flag, build_leq_q, compose_cac_via_omega, greedy_antichain, greedy_chain, split_minus, split_plus,
    stable_thinning, GreedyAntichainOptions,
};
use caclab::trees::{build_extension_tree, check_tree_lemma, label_tree, labeled_subtree, tree_to_dot};
use caclab::{ProblemInstance, ProblemKind, SizePolicy, TypeTag};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

const UNIVERSE_CAP: u32 = 64;

#[derive(Parser)]
#[command(name = "caclab", version, about = "Chains, antichains and their reductions on finite posets")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "CACLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Size a chain or antichain needs to count as a solution.
    #[arg(long, global = true)]
    min_size: Option<usize>,
    /// Write the main artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Small,
    Large,
}

impl From<Side> for TypeTag {
    fn from(s: Side) -> TypeTag {
        match s {
            Side::Small => TypeTag::Small,
            Side::Large => TypeTag::Large,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    SplitPlus,
    SplitMinus,
    Compose,
    Thin,
    GreedyChain,
    GreedyAntichain,
    Dualize,
    AppendType,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyKind {
    BuiltinCac,
    File,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random valid instance.
    Gen {
        #[arg(long, value_parser = parse_kind)]
        kind: ProblemKind,
        #[arg(long, default_value_t = 8)]
        size: u32,
        /// Force the type of stable instances.
        #[arg(long = "type", value_enum)]
        type_tag: Option<Side>,
    },
    /// Validate an instance, and optionally a solution to it.
    Check {
        #[arg(long, value_parser = parse_kind)]
        kind: Option<ProblemKind>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Validate a forcing condition document instead.
        #[arg(long)]
        condition: Option<PathBuf>,
    },
    /// Run one reduction construction.
    Reduce {
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long = "in")]
        input: PathBuf,
        /// Include intermediate stages in the output.
        #[arg(long)]
        trace: bool,
        /// Set to thin (defaults to a brute-force solution of the Q order).
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Starting element for greedy-chain (defaults to the least element).
        #[arg(long)]
        start: Option<u32>,
    },
    /// Play a reduction game against the brute-force adversary.
    Game {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_kind, default_value = "CAC")]
        p_kind: ProblemKind,
        #[arg(long, value_parser = parse_kind, default_value = "OMEGA_CAC")]
        q_kind: ProblemKind,
        #[arg(long, value_enum, default_value_t = StrategyKind::BuiltinCac)]
        strategy: StrategyKind,
        #[arg(long)]
        strategy_file: Option<PathBuf>,
        #[arg(long, default_value_t = caclab::game::DEFAULT_MAX_ROUNDS)]
        max_rounds: usize,
    },
    /// Build a stable poset diagonalizing against a machine family.
    Force {
        /// Selector file, or a comma-separated list of built-in machines.
        #[arg(long)]
        machines: String,
        /// Oracle shared by built-in machines, comma-separated.
        #[arg(long, default_value = "")]
        oracle: String,
        #[arg(long, default_value_t = 12)]
        stages: usize,
        #[arg(long, value_enum, default_value_t = Side::Small)]
        side: Side,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        /// Write the condition and stage log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Build and label an extension tree.
    Tree {
        /// Machine file, or a built-in machine name.
        #[arg(long)]
        machines: String,
        #[arg(long = "E", default_value = "")]
        e: String,
        #[arg(long = "I", default_value = "")]
        i: String,
        #[arg(long, default_value_t = 0)]
        n: u64,
        #[arg(long, default_value_t = caclab::trees::DEFAULT_KAPPA)]
        kappa: usize,
        /// Bound on the witness input (defaults to the machine's use bound).
        #[arg(long)]
        w_max: Option<u64>,
    },
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    s.parse()
}

enum Failure {
    /// Input could not be read or is not a well-formed artifact.
    Malformed(String, String),
    /// Input is well formed but the check or construction failed.
    Rejected(String, String),
}

impl Failure {
    fn malformed(kind: &str, msg: impl ToString) -> Self {
        Failure::Malformed(kind.into(), msg.to_string())
    }

    fn rejected(kind: &str, msg: impl ToString) -> Self {
        Failure::Rejected(kind.into(), msg.to_string())
    }
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        let kind = match e {
            DocError::Json(_) => "json",
            DocError::Poset(_) => "poset",
            DocError::Annotation(_) => "annotation",
            DocError::Problem(_) => "problem",
            DocError::Condition(_) => "condition",
            DocError::Machine(_) => "machine",
            DocError::Invalid(_) => "document",
        };
        Failure::malformed(kind, e)
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    seed: u64,
    min_size: Option<usize>,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => fs::write(path, text).map_err(|e| Failure::malformed("io", format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, doc: &T) -> Outcome {
        self.emit(&json::render(doc))
    }

    fn emit_instance(&self, inst: &ProblemInstance, policy: Option<&SizePolicy>) -> Outcome {
        match self.format {
            Format::Dot => self.emit(&inst.poset.to_dot("P")),
            Format::Json => self.emit_json(&InstanceDoc::from_instance(inst, policy)),
        }
    }

    /// Policy from the flag, then the document, then the default.
    fn policy(&self, doc: &InstanceDoc) -> Result<SizePolicy, Failure> {
        if let Some(m) = self.min_size {
            return SizePolicy::new(m).map_err(|e| Failure::malformed("policy", e));
        }
        Ok(doc.policy()?.unwrap_or_default())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::malformed("io", format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<(InstanceDoc, ProblemInstance), Failure> {
    let doc: InstanceDoc = json::parse(&read(path)?)?;
    let inst = doc.to_instance()?;
    Ok((doc, inst))
}

fn parse_list(s: &str) -> Result<BTreeSet<u64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Failure::malformed("arguments", format!("not a natural number: {t:?}"))))
        .collect()
}

fn gen(ctx: &Ctx, kind: ProblemKind, size: u32, type_tag: Option<Side>) -> Outcome {
    if size > UNIVERSE_CAP {
        return Err(Failure::malformed("arguments", format!("size {size} exceeds the cap {UNIVERSE_CAP}")));
    }
    let mut r = rng(ctx.seed);
    let opts = GenOptions {
        type_tag: type_tag.map(TypeTag::from),
    };
    let inst = gen_instance(&mut r, kind, size, opts).map_err(|e| Failure::malformed("unsatisfiable-spec", e))?;
    let policy = ctx.min_size.map(SizePolicy::new).transpose().map_err(|e| Failure::malformed("policy", e))?;
    ctx.emit_instance(&inst, policy.as_ref())
}

fn check(ctx: &Ctx, kind: Option<ProblemKind>, input: Option<PathBuf>, solution: Option<PathBuf>, condition: Option<PathBuf>) -> Outcome {
    if let Some(path) = condition {
        let doc: ConditionDoc = json::parse(&read(&path)?)?;
        let c = doc.to_condition().map_err(|e| match e {
            DocError::Condition(e) => Failure::rejected("condition", e),
            other => other.into(),
        })?;
        return ctx.emit_json(&json!({ "ok": true, "condition": { "size": c.size() } }));
    }
    let input = input.ok_or_else(|| Failure::malformed("arguments", "--in or --condition is required"))?;
    let kind = kind.ok_or_else(|| Failure::malformed("arguments", "--kind is required with --in"))?;
    let (doc, inst) = load_instance(&input)?;
    validate_instance(kind, &inst).map_err(|e| Failure::rejected("instance", e))?;
    let mut report = json!({ "ok": true, "kind": kind, "size": inst.poset.len() });
    if let Some(path) = solution {
        let policy = ctx.policy(&doc)?;
        let sol: SolutionDoc = json::parse(&read(&path)?)?;
        verify_solution(kind, &inst, &sol.to_solution(), &policy).map_err(|e| Failure::rejected("solution", e))?;
        report["solution"] = json!({ "kind": sol.kind, "size": sol.elements.len(), "min_size": policy.min_size });
    }
    ctx.emit_json(&report)
}

fn reduce(ctx: &Ctx, op: Op, input: &Path, trace: bool, solution: Option<PathBuf>, start: Option<u32>) -> Outcome {
    let (doc, inst) = load_instance(input)?;
    let policy = ctx.policy(&doc)?;
    let p = &inst.poset;
    let rejected = |e: caclab::ReductionError| Failure::rejected("reduction", e);
    match op {
        Op::SplitPlus | Op::SplitMinus => {
            let q = if op == Op::SplitPlus { split_plus(p) } else { split_minus(p) };
            ctx.emit_instance(&ProblemInstance::plain(q), None)
        }
        Op::Dualize => {
            let out = ProblemInstance {
                poset: p.dual_order(),
                annotation: inst.annotation.as_ref().map(|a| a.flipped()),
                type_flag: inst.type_flag.map(|f| match f {
                    caclab::TypeFlag::S => caclab::TypeFlag::L,
                    caclab::TypeFlag::L => caclab::TypeFlag::S,
                }),
            };
            ctx.emit_instance(&out, None)
        }
        Op::AppendType => ctx.emit_instance(&append_type_flag(&inst).map_err(rejected)?, None),
        Op::Compose => {
            let solver = |q: &caclab::FinitePoset, pol: &SizePolicy| solve_poset(q, pol).ok().flatten();
            let c = compose_cac_via_omega(p, solver, &policy).map_err(rejected)?;
            if trace {
                ctx.emit_json(&json!({
                    "stage1": SolutionDoc::from_solution(&c.stage1),
                    "stage2": c.stage2.as_ref().map(SolutionDoc::from_solution),
                    "result": SolutionDoc::from_solution(&c.result),
                }))
            } else {
                ctx.emit_json(&SolutionDoc::from_solution(&c.result))
            }
        }
        Op::Thin => {
            let ann = inst
                .annotation
                .as_ref()
                .ok_or_else(|| Failure::malformed("instance", "thinning needs a stable annotation"))?;
            let ty = ann.type_tag();
            let x = match solution {
                Some(path) => json::parse::<SolutionDoc>(&read(&path)?)?.to_solution(),
                None => {
                    let q = build_leq_q(p, ty);
                    let qpol = SizePolicy::new(policy.min_size.min(max_feasible(&q)).max(1)).expect("positive");
                    solve_poset(&q, &qpol)
                        .map_err(|e| Failure::rejected("solver", e))?
                        .ok_or_else(|| Failure::rejected("solver", "no solution of the Q order"))?
                }
            };
            let (y, tr) = stable_thinning(p, ty, &x, &policy).map_err(rejected)?;
            if trace {
                ctx.emit_json(&json!({
                    "input": SolutionDoc::from_solution(&x),
                    "stages": tr.stages,
                    "stage_bound_holds": tr.stage_bound_holds(),
                    "result": SolutionDoc::from_solution(&y),
                }))
            } else {
                ctx.emit_json(&SolutionDoc::from_solution(&y))
            }
        }
        Op::GreedyChain => {
            let start = match start.or_else(|| p.universe().first().copied()) {
                Some(s) => s,
                None => return Err(Failure::rejected("reduction", "empty universe has no starting element")),
            };
            ctx.emit_json(&SolutionDoc::from_solution(&greedy_chain(p, start).map_err(rejected)?))
        }
        Op::GreedyAntichain => {
            let s = greedy_antichain(p, GreedyAntichainOptions::default()).map_err(rejected)?;
            ctx.emit_json(&SolutionDoc::from_solution(&s))
        }
    }
}

fn game(
    ctx: &Ctx,
    input: &Path,
    p_kind: ProblemKind,
    q_kind: ProblemKind,
    strategy: StrategyKind,
    strategy_file: Option<PathBuf>,
    max_rounds: usize,
) -> Outcome {
    let (doc, inst) = load_instance(input)?;
    let policy = ctx.policy(&doc)?;
    validate_instance(p_kind, &inst).map_err(|e| Failure::malformed("instance", e))?;
    let table;
    let builtin = cac_via_omega_strategy(policy);
    let strat: &dyn Strategy = match strategy {
        StrategyKind::BuiltinCac => &builtin,
        StrategyKind::File => {
            let path = strategy_file.ok_or_else(|| Failure::malformed("arguments", "--strategy file needs --strategy-file"))?;
            table = json::parse::<TableStrategy>(&read(&path)?)?;
            &table
        }
    };
    let mut adv = BruteForceAdversary::new(inst);
    let t = play_reduction_game(p_kind, q_kind, &mut adv, strat, max_rounds, &policy)
        .map_err(|e| Failure::malformed("game", e))?;
    ctx.emit_json(&t)?;
    if t.verdict.ii_wins() {
        Ok(())
    } else {
        Err(Failure::rejected("game", "Player II did not win"))
    }
}

fn load_selectors(machines: &str, oracle: &str) -> Result<Vec<Selector>, Failure> {
    let path = Path::new(machines);
    if path.is_file() {
        let doc: SelectorsDoc = json::parse(&read(path)?)?;
        return Ok(doc.to_selectors()?);
    }
    let oracle = parse_list(oracle)?;
    let family = machine_family(machines).map_err(|e| Failure::malformed("machine", e))?;
    Ok(family.into_iter().map(|m| Selector::new(m, oracle.iter().copied())).collect())
}

fn force(ctx: &Ctx, machines: &str, oracle: &str, stages: usize, side: Side, budget: usize, log: Option<PathBuf>) -> Outcome {
    let selectors = load_selectors(machines, oracle)?;
    let config = DiagonalConfig {
        stages,
        side: side.into(),
        budget,
    };
    let run = build_diagonal_poset(&Condition::empty(), &selectors, &config);
    let inst = ProblemInstance::stable(run.poset.clone(), run.annotation.clone());
    ctx.emit_instance(&inst, None)?;
    let checks = check_requirements(&run.poset, &selectors);
    if let Some(path) = log {
        let doc = json!({
            "condition": ConditionDoc::from_condition(&run.condition),
            "stages": run.log,
            "requirements": checks,
        });
        fs::write(&path, json::render(&doc)).map_err(|e| Failure::malformed("io", format!("{}: {e}", path.display())))?;
    }
    match checks.iter().find(|c| !c.holds()) {
        Some(c) => Err(Failure::rejected("requirement", format!("requirement {} is not met", c.requirement))),
        None => Ok(()),
    }
}

fn load_machine(spec: &str) -> Result<caclab::machines::OracleMachine, Failure> {
    let path = Path::new(spec);
    let ms = if path.is_file() {
        MachineSpec::Table(json::parse::<MachineFile>(&read(path)?)?)
    } else {
        MachineSpec::Builtin(spec.to_owned())
    };
    Ok(ms.to_machine()?)
}

fn tree(ctx: &Ctx, machines: &str, e: &str, i: &str, n: u64, kappa: usize, w_max: Option<u64>) -> Outcome {
    let delta = load_machine(machines)?;
    let w_max = w_max.unwrap_or(delta.use_bound());
    let t = build_extension_tree(parse_list(e)?, parse_list(i)?, delta, n, w_max).map_err(|e| Failure::malformed("tree", e))?;
    let lb = label_tree(&t, kappa).map_err(|e| Failure::malformed("tree", e))?;
    let tl = labeled_subtree(&t, &lb);
    let lemma = check_tree_lemma(&t, &lb);
    let ok = lemma.all_ok();
    match ctx.format {
        Format::Dot => ctx.emit(&tree_to_dot(&t, &lb, Some(&tl)))?,
        Format::Json => ctx.emit_json(&TreeDoc::new(&t, &lb, &tl, lemma))?,
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::rejected("lemma", "a lemma item failed"))
    }
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx {
        seed: cli.seed,
        min_size: cli.min_size,
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Gen { kind, size, type_tag } => gen(&ctx, kind, size, type_tag),
        Command::Check {
            kind,
            input,
            solution,
            condition,
        } => check(&ctx, kind, input, solution, condition),
        Command::Reduce {
            op,
            input,
            trace,
            solution,
            start,
        } => reduce(&ctx, op, &input, trace, solution, start),
        Command::Game {
            input,
            p_kind,
            q_kind,
            strategy,
            strategy_file,
            max_rounds,
        } => game(&ctx, &input, p_kind, q_kind, strategy, strategy_file, max_rounds),
        Command::Force {
            machines,
            oracle,
            stages,
            side,
            budget,
            log,
        } => force(&ctx, &machines, &oracle, stages, side, budget, log),
        Command::Tree {
            machines,
            e,
            i,
            n,
            kappa,
            w_max,
        } => tree(&ctx, &machines, &e, &i, n, kappa, w_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, class, kind, msg) = match f {
                Failure::Rejected(k, m) => (1, "verification-failure", k, m),
                Failure::Malformed(k, m) => (2, "malformed-input", k, m),
            };
            eprintln!("{}", json!({ "error": { "class": class, "kind": kind, "message": msg } }));
            ExitCode::from(code)
        }
    }
}
