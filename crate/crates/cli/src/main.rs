use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use ids_core::explain::{explain_step, ExplanationMode};
use ids_core::games;
use ids_core::ids::{IdsConfig, IdsEngine, IdsMode};
use ids_core::kitchen::{read_snapshot, Game};
use ids_core::metrics::{read_records, run_experiment, write_outputs, Grid, LogRecord, MetricsReport, RowOutcome, SessionLog};
use ids_core::model::{overtime_cost, plan_cost, Plan, State};
use ids_core::planner::{replan, PlannerBudget};

#[derive(Parser)]
#[command(name = "kitchen-ids", version, about = "Plan, recommend and explain in the kitchen game")]
struct Cli {
    /// Planner wall-time limit in seconds.
    #[arg(long, global = true, default_value_t = 30)]
    time_budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print an optimal plan, one action per line.
    Plan {
        /// Bundled game id or path to a game config.
        #[arg(long)]
        game: String,
        /// State snapshot to plan from instead of the initial state.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Print the recommendation for a state.
    Recommend {
        #[arg(long)]
        game: String,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value = "subgoal")]
        mode: IdsMode,
        #[arg(long, default_value_t = 0.0)]
        corruption: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Explain every step of a plan file (one action label per line).
    Explain {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        game: String,
        #[arg(long, default_value = "subgoal")]
        mode: ExplanationMode,
    },
    /// Run simulated players over a grid and write logs and summary.csv.
    Simulate {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a log file.
    Metrics {
        #[arg(long)]
        log: PathBuf,
        /// Game config for logs of games that are not bundled.
        #[arg(long)]
        game: Option<String>,
    },
    /// Serve the study API.
    Serve {
        #[arg(long, env = "KITCHEN_IDS_STORAGE", default_value = "sessions")]
        storage: PathBuf,
        #[arg(long, env = "KITCHEN_IDS_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, env = "KITCHEN_IDS_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn load_game(arg: &str) -> Result<Game> {
    if games::bundled_source(arg).is_some() {
        return Ok(games::load(arg)?);
    }
    let text = fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
    Ok(Game::from_toml(&text).with_context(|| format!("loading {arg}"))?)
}

fn load_state(game: &Game, path: Option<&PathBuf>) -> Result<State> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(read_snapshot(&game.problem, &text)?)
        }
        None => Ok(game.problem.init.clone()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let budget = PlannerBudget { max_wall_time: Some(Duration::from_secs(cli.time_budget)), ..PlannerBudget::default() };
    match cli.command {
        Command::Plan { game, state } => {
            let game = load_game(&game)?;
            let root = load_state(&game, state.as_ref())?;
            let plan = replan(&game.problem, &root, &budget)?;
            for label in plan.labels(&game.problem) {
                println!("{label}");
            }
            let overtime = overtime_cost(&plan, &game.problem.pending_goals(&root).cloned().collect::<Vec<_>>(), game.problem.time_limit);
            println!("; overtime {overtime} cost {}", plan_cost(&plan));
        }
        Command::Recommend { game, state, mode, corruption, seed } => {
            let game = load_game(&game)?;
            let root = load_state(&game, state.as_ref())?;
            let config = IdsConfig::new(mode, corruption, seed)?;
            let mut engine = IdsEngine::new(game.problem.clone(), game.lexicon.clone(), config, budget);
            match engine.next_recommendation(&root, None)? {
                Some(rec) => {
                    println!("{}", rec.label);
                    if let Some(e) = &rec.explanation {
                        println!("{}", e.text);
                    }
                    println!("provenance: {}", serde_json::to_value(rec.provenance)?.as_str().unwrap_or_default());
                }
                None => println!("no recommendation"),
            }
        }
        Command::Explain { plan, game, mode } => {
            let game = load_game(&game)?;
            let text = fs::read_to_string(&plan).with_context(|| format!("reading {}", plan.display()))?;
            let mut steps = Vec::new();
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with(';')) {
                let action = game.problem.domain.action_by_label(line).ok_or_else(|| anyhow!("unknown action `{line}`"))?;
                steps.push(action.id);
            }
            let root = &game.problem.init;
            let plan = Plan::new(&game.problem, root.elapsed, steps);
            for k in 0..plan.len() {
                println!("{}", explain_step(&game.problem, &game.lexicon, &plan, root, k, mode)?.text);
            }
        }
        Command::Simulate { grid, out } => {
            let text = fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let grid = Grid::from_toml(&text)?;
            let games = grid.load_games()?;
            let rows = run_experiment(&grid, &games, &budget);
            write_outputs(&rows, &out)?;
            let failed = rows.iter().filter(|r| matches!(r.outcome, RowOutcome::Failed(_))).count();
            println!("{} rows, {failed} failed, written to {}", rows.len(), out.display());
        }
        Command::Metrics { log, game } => {
            let text = fs::read_to_string(&log).with_context(|| format!("reading {}", log.display()))?;
            let records = read_records(&text)?;
            let votes: Vec<ExplanationMode> = records
                .iter()
                .filter_map(|r| match r {
                    LogRecord::Vote { mode, .. } => Some(*mode),
                    _ => None,
                })
                .collect();
            let logs = SessionLog::from_records(&records)?;
            if logs.is_empty() {
                bail!("no games in {}", log.display());
            }
            for entry in logs {
                let g = load_game(game.as_deref().unwrap_or(&entry.header.game_id))?;
                entry.replay(&g).with_context(|| format!("replaying {}", entry.header.game_id))?;
                let report = MetricsReport::new(&entry, &g.problem).with_votes(&votes);
                println!("{}", serde_json::to_string(&report)?);
            }
        }
        Command::Serve { storage, bind, seed } => {
            let config = ids_service::ServiceConfig { storage_dir: storage, bind, default_seed: seed, budget };
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("listening on {bind}");
            runtime.block_on(ids_service::serve(config)).map_err(|e| anyhow!(e))?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
