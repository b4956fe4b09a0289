//! `csg`: command line front end for csg-core.
//!
//! Exit status is 0 on success, 1 on a domain error and 2 on a usage error.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use csg_core::analysis::{
    bounds, nash_gap, optimality_gap, round_profile, simulate_play, strategy_patience, BoundName, BoundParams,
};
use csg_core::families::{exact_duel_values, purgatory_duel, safe_optimal_profile, DuelShape, FamilySpec};
use csg_core::game_model::{GameStructure, ProfileDocument, StateId, Strategy, StrategyDocument, StrategyProfile};
use csg_core::matrix_game::{build_tri_matrix, solve_matrix_game, MatrixGame};
use csg_core::mdp_solver::{fix_strategies, optimal_value};
use csg_core::scalar::{self, Natural, Rational};
use csg_core::value_iteration::{max_bits_from_env, value_iterate, IterationConfig, ValueVector};
use csg_core::{Error, Result};

use report::Report;

#[derive(Parser)]
#[command(name = "csg", version, about = "Exact analysis of concurrent stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the full output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print long rationals in full on stdout.
    #[arg(long, global = true)]
    full: bool,
    /// Add the wall-clock time to the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game from one of the built-in families.
    Family(FamilyArgs),
    /// Solve a zero-sum game exactly or by value iteration.
    Solve(SolveArgs),
    /// Solve a matrix game.
    Matrix(MatrixArgs),
    /// Best reply of one player against the rest of a profile.
    BestResponse(BestResponseArgs),
    /// Exact optimality or Nash gaps.
    Check(CheckArgs),
    /// Patience and roundedness of strategies.
    Patience(PatienceArgs),
    /// Round a profile to denominator q.
    Round(RoundArgs),
    /// Evaluate a closed-form bound.
    Bounds(BoundsArgs),
    /// Monte Carlo estimate of winning frequencies.
    Simulate(SimulateArgs),
}

fn rational_arg(s: &str) -> std::result::Result<String, String> {
    scalar::parse(s).map(|_| s.to_string()).map_err(|e| e.to_string())
}

fn natural_arg(s: &str) -> std::result::Result<String, String> {
    s.parse::<Natural>().map(|n| n.to_string()).map_err(|_| format!("not a natural number: {s:?}"))
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Purgatory,
    PurgatoryDuel,
    ThreeStateDuel,
    RestrictedThreeStateDuel,
    SafetyDuel,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    name: FamilyName,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long, value_parser = rational_arg)]
    delta: Option<String>,
    /// Write a reference profile: the safe profile of a safety duel or the
    /// exact optimal profile of a Purgatory Duel.
    #[arg(long)]
    profile_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMode {
    ExactDuel,
    ValueIteration,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveMode::ValueIteration)]
    mode: SolveMode,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    #[arg(long, value_parser = rational_arg)]
    gap: Option<String>,
    /// Defaults to CSG_MAX_BITS or 1000000.
    #[arg(long)]
    max_bits: Option<u64>,
}

#[derive(Args)]
struct MatrixArgs {
    /// JSON array of rows of "num/den" strings.
    #[arg(long, conflicts_with_all = ["x", "y", "z", "m"])]
    grid: Option<PathBuf>,
    #[arg(long, value_parser = rational_arg)]
    x: Option<String>,
    #[arg(long, value_parser = rational_arg)]
    y: Option<String>,
    #[arg(long, value_parser = rational_arg)]
    z: Option<String>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct BestResponseArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    /// One-based player who replies.
    #[arg(long)]
    player: usize,
    /// Include the induced MDP in the report.
    #[arg(long)]
    dump_mdp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    EpsOptimal,
    EpsNash,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    kind: CheckKind,
    #[arg(long)]
    game: PathBuf,
    /// Strategy under test for eps-optimal.
    #[arg(long)]
    strategy: Option<PathBuf>,
    /// Profile under test for eps-nash.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Reference values for eps-optimal; exact duel values by default.
    #[arg(long)]
    values: Option<PathBuf>,
    /// Restrict eps-nash to plays from this state.
    #[arg(long)]
    from: Option<String>,
    #[arg(long, value_parser = rational_arg)]
    eps: Option<String>,
}

#[derive(Args)]
struct PatienceArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long, conflicts_with = "profile")]
    strategy: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args)]
struct RoundArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, value_parser = natural_arg, conflicts_with = "eps")]
    q: Option<String>,
    /// Take q from the rounding bound at this precision.
    #[arg(long, value_parser = rational_arg)]
    eps: Option<String>,
    /// Also write the rounded profile document here.
    #[arg(long)]
    write_profile: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Ell,
    Q,
    DuelValue,
    DuelPatience,
    SafetyPatience,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    j: Option<u64>,
    #[arg(long, value_parser = rational_arg)]
    eps: Option<String>,
    #[arg(long, value_parser = rational_arg)]
    delta: Option<String>,
    #[arg(long)]
    max_bits: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    /// Start state name; `vs` when present, else the first state.
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 10000)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<GameStructure> {
    GameStructure::from_json(&read(path)?)
}

fn load_profile(path: &Path, g: &GameStructure) -> Result<StrategyProfile> {
    StrategyProfile::from_json(&read(path)?, g)
}

fn load_strategy(path: &Path, g: &GameStructure) -> Result<Strategy> {
    let doc: StrategyDocument = serde_json::from_str(&read(path)?)?;
    Strategy::from_document(&doc, g)
}

fn opt_q(s: &Option<String>) -> Result<Option<Rational>> {
    s.as_deref().map(scalar::parse).transpose()
}

fn required<T: Clone>(x: &Option<T>, flag: &str) -> Result<T> {
    x.clone().ok_or_else(|| Error::Domain(format!("--{flag} is required here")))
}

fn state_named(g: &GameStructure, name: &str) -> Result<StateId> {
    g.state_by_name(name).ok_or_else(|| Error::Domain(format!("unknown state {name:?}")))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn within_eps(max_gap: &Rational, eps: &Option<Rational>) -> Value {
    eps.as_ref().map_or(Value::Null, |e| Value::Bool(max_gap <= e))
}

fn family(a: &FamilyArgs) -> Result<(GameStructure, Value)> {
    let n = || required(&a.n, "n");
    let m = || required(&a.m, "m");
    let spec = match a.name {
        FamilyName::Purgatory => FamilySpec::Purgatory { n: n()?, m: m()? },
        FamilyName::PurgatoryDuel => FamilySpec::PurgatoryDuel { n: n()?, m: m()? },
        FamilyName::ThreeStateDuel => FamilySpec::ThreeStateDuel { m: m()? },
        FamilyName::RestrictedThreeStateDuel => FamilySpec::RestrictedThreeStateDuel { m: m()? },
        FamilyName::SafetyDuel => FamilySpec::SafetyDuel {
            c: required(&a.c, "c")?,
            delta_min: scalar::parse(&required(&a.delta, "delta")?)?,
        },
    };
    let g = spec.generate()?;
    if let Some(path) = &a.profile_out {
        let [s1, s2] = match &spec {
            FamilySpec::SafetyDuel { c, delta_min } => safe_optimal_profile(&g, *c, delta_min)?,
            FamilySpec::PurgatoryDuel { n, m } => {
                let t = exact_duel_values(*n, *m, max_bits_from_env())?;
                [t.sigma1, t.sigma2]
            }
            _ => return Err(Error::Domain("--profile-out needs a safety duel or a Purgatory Duel".into())),
        };
        let prof = StrategyProfile::Stationary(vec![s1, s2]);
        fs::write(path, prof.to_json(&g) + "\n")?;
    }
    let doc = serde_json::to_value(g.to_document())?;
    Ok((g, doc))
}

fn solve(a: &SolveArgs) -> Result<Report> {
    let g = load_game(&a.game)?;
    let max_bits = a.max_bits.unwrap_or_else(max_bits_from_env);
    let params = json!({
        "game": path_str(&a.game),
        "mode": match a.mode { SolveMode::ExactDuel => "exact-duel", SolveMode::ValueIteration => "value-iteration" },
        "iters": a.iters,
        "gap": a.gap,
        "max_bits": max_bits,
    });
    match a.mode {
        SolveMode::ExactDuel => {
            let shape = DuelShape::of(&g)?;
            if purgatory_duel(shape.n, shape.m)?.to_json() != g.to_json() {
                return Err(Error::Domain("exact-duel needs an unmodified Purgatory Duel".into()));
            }
            let table = exact_duel_values(shape.n, shape.m, max_bits)?;
            Ok(Report::new("solve", params, table.to_json()).with_csv(table.values.to_csv(&g)))
        }
        SolveMode::ValueIteration => {
            let cfg = IterationConfig { budget: a.iters, gap_threshold: opt_q(&a.gap)?, max_bits };
            let tr = value_iterate(&g, &cfg)?;
            let results = json!({
                "iterations": tr.trace.len() - 1,
                "stop_reason": serde_json::to_value(tr.stop_reason)?,
                "values": tr.last().to_json(&g),
                "trace": tr.trace.iter().map(|v| v.to_json(&g)).collect::<Vec<_>>(),
            });
            Ok(Report::new("solve", params, results).with_csv(tr.to_csv(&g)))
        }
    }
}

fn matrix(a: &MatrixArgs) -> Result<Report> {
    let (m, params) = match &a.grid {
        Some(path) => {
            let rows: Vec<Vec<String>> = serde_json::from_str(&read(path)?)?;
            let grid = rows
                .iter()
                .map(|r| r.iter().map(|x| scalar::parse(x)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            (MatrixGame::from_rows(grid)?, json!({"grid": path_str(path)}))
        }
        None => {
            let x = scalar::parse(&required(&a.x, "x")?)?;
            let y = scalar::parse(&required(&a.y, "y")?)?;
            let z = scalar::parse(&required(&a.z, "z")?)?;
            let m = required(&a.m, "m")?;
            (build_tri_matrix(&x, &y, &z, m)?, json!({"x": a.x, "y": a.y, "z": a.z, "m": m}))
        }
    };
    Ok(Report::new("matrix", params, solve_matrix_game(&m).to_json()))
}

fn best_response(a: &BestResponseArgs) -> Result<Report> {
    let g = load_game(&a.game)?;
    if a.player == 0 || a.player > g.players() {
        return Err(Error::Domain(format!("player must lie in 1..={}", g.players())));
    }
    let me = a.player - 1;
    let doc: ProfileDocument = serde_json::from_str(&read(&a.profile)?)?;
    let mut slots: Vec<Option<Strategy>> = vec![None; g.players()];
    for d in &doc.strategies {
        let st = Strategy::from_document(d, &g)?;
        if st.player() != me {
            let p = st.player();
            slots[p] = Some(st);
        }
    }
    if let Some(p) = (0..g.players()).find(|&p| p != me && slots[p].is_none()) {
        return Err(Error::Domain(format!("profile lacks a strategy for player {}", p + 1)));
    }
    let mdp = fix_strategies(&g, &slots)?.into_mdp()?;
    let (vals, policy) = optimal_value(&mdp);
    let values: serde_json::Map<String, Value> = (0..g.num_states())
        .map(|s| {
            let i = mdp.start(s).expect("every state starts a play");
            (g.name(s).to_string(), scalar::format(&vals[i]).into())
        })
        .collect();
    let pol: Vec<Value> =
        mdp.labels.iter().zip(&policy.0).map(|(l, a)| json!({"state": l, "action": a})).collect();
    let mut results = json!({"values": values, "policy": pol});
    if a.dump_mdp {
        results["mdp"] = mdp.to_json();
    }
    let params = json!({"game": path_str(&a.game), "profile": path_str(&a.profile), "player": a.player});
    let csv = ValueVector(
        (0..g.num_states()).map(|s| vals[mdp.start(s).expect("every state starts a play")].clone()).collect(),
    )
    .to_csv(&g);
    Ok(Report::new("best-response", params, results).with_csv(csv))
}

fn check(a: &CheckArgs) -> Result<Report> {
    let g = load_game(&a.game)?;
    let eps = opt_q(&a.eps)?;
    let opt = |p: &Option<PathBuf>| p.as_ref().map(|x| path_str(x));
    let params = json!({
        "kind": match a.kind { CheckKind::EpsOptimal => "eps-optimal", CheckKind::EpsNash => "eps-nash" },
        "game": path_str(&a.game),
        "strategy": opt(&a.strategy),
        "profile": opt(&a.profile),
        "values": opt(&a.values),
        "from": a.from,
        "eps": a.eps,
    });
    let report = match a.kind {
        CheckKind::EpsOptimal => {
            let path = required(&a.strategy, "strategy")?;
            let sigma = match load_strategy(&path, &g)? {
                Strategy::Stationary(s) => s,
                Strategy::PlayerStationary(_) => {
                    return Err(Error::Domain("eps-optimal checks stationary strategies".into()))
                }
            };
            let reference = match &a.values {
                Some(p) => ValueVector::from_json(&g, &read(p)?)?,
                None => {
                    let shape = DuelShape::of(&g)
                        .map_err(|_| Error::Domain("--values is required outside the Purgatory Duel".into()))?;
                    exact_duel_values(shape.n, shape.m, max_bits_from_env())?.values
                }
            };
            optimality_gap(&g, sigma.player, &sigma, &reference)?
        }
        CheckKind::EpsNash => {
            let profile = load_profile(&required(&a.profile, "profile")?, &g)?;
            let from = a.from.as_deref().map(|n| state_named(&g, n)).transpose()?;
            nash_gap(&g, &profile, from)?
        }
    };
    let mut results = report.to_json(&g);
    results["within_eps"] = within_eps(&report.max_gap(), &eps);
    Ok(Report::new("check", params, results).with_csv(report.to_csv(&g)))
}

fn patience(a: &PatienceArgs) -> Result<Report> {
    let g = load_game(&a.game)?;
    let (list, params) = match (&a.strategy, &a.profile) {
        (Some(s), None) => (vec![load_strategy(s, &g)?], json!({"game": path_str(&a.game), "strategy": path_str(s)})),
        (None, Some(p)) => {
            (load_profile(p, &g)?.strategies(), json!({"game": path_str(&a.game), "profile": path_str(p)}))
        }
        _ => return Err(Error::Domain("give --strategy or --profile".into())),
    };
    let mut csv = String::from("player,patience,roundedness\n");
    let rows: Vec<Value> = list
        .iter()
        .map(|st| {
            let (p, r) = strategy_patience(st);
            csv.push_str(&format!("{},{},{}\n", st.player() + 1, scalar::format(&p), r));
            json!({"player": st.player() + 1, "patience": scalar::format(&p), "roundedness": r.to_string()})
        })
        .collect();
    Ok(Report::new("patience", params, json!({"strategies": rows})).with_csv(csv))
}

fn round(a: &RoundArgs) -> Result<Report> {
    let g = load_game(&a.game)?;
    let profile = load_profile(&a.profile, &g)?;
    let (q, source) = match (&a.q, &a.eps) {
        (Some(q), None) => (q.parse::<Natural>().expect("validated by clap"), Value::Null),
        (None, Some(e)) => {
            let max_actions = (0..g.num_states())
                .flat_map(|s| (0..g.players()).map(move |p| (s, p)))
                .map(|(s, p)| g.actions(s, p).len())
                .max()
                .unwrap_or(1);
            let bp = BoundParams {
                n: Some(g.num_states() as u64),
                k: Some(g.players() as u64),
                m: Some(max_actions as u64),
                eps: Some(scalar::parse(e)?),
                delta_min: Some(g.delta_min()),
                ..Default::default()
            };
            let b = bounds(BoundName::Q, &bp)?;
            let q = b.as_natural().expect("q is an integer");
            (q, b.to_json())
        }
        _ => return Err(Error::Domain("give exactly one of --q and --eps".into())),
    };
    let rounded = round_profile(&profile, &q)?;
    let doc = rounded.to_document(&g);
    if let Some(p) = &a.write_profile {
        fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
    }
    let params = json!({
        "game": path_str(&a.game),
        "profile": path_str(&a.profile),
        "q": a.q,
        "eps": a.eps,
    });
    let results = json!({"q": q.to_string(), "bound": source, "profile": serde_json::to_value(&doc)?});
    Ok(Report::new("round", params, results))
}

fn bounds_cmd(a: &BoundsArgs) -> Result<Report> {
    let name = match a.which {
        Which::Ell => BoundName::Ell,
        Which::Q => BoundName::Q,
        Which::DuelValue => BoundName::DuelValue,
        Which::DuelPatience => BoundName::DuelPatience,
        Which::SafetyPatience => BoundName::SafetyPatience,
    };
    let bp = BoundParams {
        n: a.n,
        k: a.k,
        m: a.m,
        j: a.j,
        eps: opt_q(&a.eps)?,
        delta_min: opt_q(&a.delta)?,
        max_bits: a.max_bits,
    };
    let r = bounds(name, &bp)?;
    let params = json!({"which": name.as_str(), "max_bits": a.max_bits});
    Ok(Report::new("bounds", params, r.to_json()))
}

fn simulate(a: &SimulateArgs) -> Result<Report> {
    let g = load_game(&a.game)?;
    let profile = load_profile(&a.profile, &g)?;
    let start = match &a.start {
        Some(n) => state_named(&g, n)?,
        None => g.state_by_name("vs").unwrap_or(0),
    };
    let r = simulate_play(&g, &profile, start, a.horizon, a.episodes, a.seed)?;
    let params = json!({
        "game": path_str(&a.game),
        "profile": path_str(&a.profile),
        "start": g.name(start),
        "horizon": a.horizon,
        "episodes": a.episodes,
        "seed": a.seed,
    });
    Ok(Report::new("simulate", params, r.to_json(&g)).with_csv(r.to_csv()))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let o = &cli.output;
    let mut report = match &cli.command {
        Command::Family(a) => {
            let (_, doc) = family(a)?;
            return emit(&(serde_json::to_string_pretty(&doc)? + "\n"), &o.out);
        }
        Command::Solve(a) => solve(a)?,
        Command::Matrix(a) => matrix(a)?,
        Command::BestResponse(a) => best_response(a)?,
        Command::Check(a) => check(a)?,
        Command::Patience(a) => patience(a)?,
        Command::Round(a) => round(a)?,
        Command::Bounds(a) => bounds_cmd(a)?,
        Command::Simulate(a) => simulate(a)?,
    };
    if o.timing {
        report.wall_clock_ms = Some(started.elapsed().as_millis());
    }
    let truncate = o.out.is_none() && !o.full;
    emit(&report.render(o.format == Format::Csv, truncate), &o.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let violations = match &e {
                Error::InvalidGame(v) => v.clone(),
                _ => Vec::new(),
            };
            let body = json!({"error": e.to_string(), "violations": violations});
            eprintln!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            ExitCode::from(1)
        }
    }
}
