use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covrad_core::strategies::languages_agree_upto;
use covrad_core::{
    brute_covering_radius_n, brute_value_n, build_dagger_automaton, build_hamming_game, parse_graph, parse_payoff,
    periodic_optimal_pair, solve, vn_table, CoveringError, CoveringProblem, FormatError, GameError, GameInstance,
    Limits, Ratio, SolveReport, StrategyError,
};

/// Exact values of non-alternating mean-payoff games and covering radii of sofic shifts.
#[derive(Debug, Parser)]
#[command(name = "covrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// One labeled graph file (covering problem) or `G H P` (game).
    #[arg(required = true, num_args = 1..=3)]
    files: Vec<PathBuf>,
    /// Ambient alphabet for a covering problem; defaults to the file's.
    #[arg(long, num_args = 1..)]
    alphabet: Option<Vec<String>>,
    /// Longest walk length the solver may reach.
    #[arg(long, default_value_t = Limits::default().max_len)]
    max_len: usize,
    /// Largest pruned matrix set the solver may hold.
    #[arg(long, default_value_t = Limits::default().max_set_size)]
    max_set_size: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Covering radius of the shift presented by a labeled graph.
    CoveringRadius {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Value of the game given by `G H P`.
    GameValue {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// `V_1 .. V_n` from the pruned families.
    VnTable {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: usize,
    },
    /// Solver against brute force for every length up to `n`.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        n: usize,
    },
    /// Non-improvable walk automaton and a periodic optimal pair.
    Strategies {
        #[command(flatten)]
        input: Input,
        /// Write the automaton as JSON.
        #[arg(long)]
        automaton: Option<PathBuf>,
        #[arg(long)]
        periodic_pair: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        let code = if matches!(e, GameError::LimitExceeded { .. }) {
            3
        } else {
            2
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CoveringError> for Failure {
    fn from(e: CoveringError) -> Self {
        match e {
            CoveringError::Game(g) => g.into(),
            e => Failure::input(e),
        }
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Self {
        match e {
            StrategyError::Game(g) => g.into(),
            StrategyError::LengthGuard { .. } | StrategyError::TooManyWords(_) => Failure {
                code: 3,
                message: e.to_string(),
            },
            e => Failure {
                code: 1,
                message: e.to_string(),
            },
        }
    }
}

enum Problem {
    Covering(CoveringProblem),
    Game(GameInstance),
}

impl Problem {
    fn game(&self) -> Result<GameInstance, Failure> {
        match self {
            Problem::Covering(p) => Ok(build_hamming_game(p)?),
            Problem::Game(g) => Ok(g.clone()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path) -> impl Fn(FormatError) -> Failure + '_ {
    move |e| Failure::input(format!("{}: {e}", path.display()))
}

fn load(input: &Input) -> Result<Problem, Failure> {
    match input.files.as_slice() {
        [graph] => {
            let file = parse_graph(&read(graph)?).map_err(in_file(graph))?;
            let lg = file.labeled().map_err(in_file(graph))?;
            Ok(Problem::Covering(CoveringProblem::new(lg, input.alphabet.clone())?))
        }
        [g, h, p] => {
            if input.alphabet.is_some() {
                return Err(Failure::input("--alphabet only applies to a single graph file"));
            }
            let g_file = parse_graph(&read(g)?).map_err(in_file(g))?;
            let h_file = parse_graph(&read(h)?).map_err(in_file(h))?;
            let entries =
                parse_payoff(&read(p)?, g_file.graph.edge_count(), h_file.graph.edge_count()).map_err(in_file(p))?;
            Ok(Problem::Game(GameInstance::validate(
                g_file.graph,
                h_file.graph,
                entries,
            )?))
        }
        _ => Err(Failure::input("expected one graph file or three files `G H P`")),
    }
}

fn limits(input: &Input) -> Limits {
    Limits {
        max_len: input.max_len,
        max_set_size: input.max_set_size,
    }
}

fn ratio(r: &Ratio<i64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn print_value(report: &SolveReport, json: bool) -> Result<(), Failure> {
    if json {
        let text = serde_json::to_string_pretty(report).map_err(|e| Failure {
            code: 1,
            message: e.to_string(),
        })?;
        println!("{text}");
    } else {
        println!("{}", ratio(&report.value));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::CoveringRadius { input, json } => {
            let Problem::Covering(p) = load(&input)? else {
                return Err(Failure::input("covering-radius takes a single labeled graph file"));
            };
            print_value(&covrad_core::covering_radius(&p, limits(&input))?, json)
        }
        Command::GameValue { input, json } => {
            let game = load(&input)?.game()?;
            print_value(&solve(&game, limits(&input))?, json)
        }
        Command::VnTable { input, n } => {
            let game = load(&input)?.game()?;
            for (i, v) in vn_table(&game, n)?.iter().enumerate() {
                println!("{} {v}", i + 1);
            }
            Ok(())
        }
        Command::Oracle { input, n } => oracle(&load(&input)?, n),
        Command::Strategies {
            input,
            automaton,
            periodic_pair,
        } => {
            let game = load(&input)?.game()?;
            let report = solve(&game, limits(&input))?;
            let a = build_dagger_automaton(&game, &report)?;
            println!("value {}", ratio(&report.value));
            println!("n1 {} k {}", report.n1, report.k);
            println!(
                "automaton {} states {} transitions",
                a.states.len(),
                a.transitions.len()
            );
            let n_max = report.n1 + 2 * report.k;
            let agree = languages_agree_upto(&game, &a, n_max, report.k)?;
            match agree.iter().position(|ok| !ok) {
                None => println!("languages agree for n <= {n_max}"),
                Some(i) => println!("languages differ first at n = {}", i + 1),
            }
            if let Some(path) = automaton {
                let text = serde_json::to_string_pretty(&a).map_err(|e| Failure {
                    code: 1,
                    message: e.to_string(),
                })?;
                fs::write(&path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            }
            if periodic_pair {
                let pair = periodic_optimal_pair(&game, &report, &a)?;
                println!("p_cycle {:?}", pair.p_cycle.edges());
                println!("q_cycle {:?}", pair.q_cycle.edges());
                println!("mean {}", ratio(&pair.mean));
            }
            Ok(())
        }
    }
}

fn oracle(problem: &Problem, n: usize) -> Result<(), Failure> {
    let game = problem.game()?;
    let table = vn_table(&game, n)?;
    let mut ok = true;
    match problem {
        Problem::Covering(_) => println!("n solver brute radius"),
        Problem::Game(_) => println!("n solver brute"),
    }
    for (i, &v) in table.iter().enumerate() {
        let len = i + 1;
        let brute = brute_value_n(&game, len)?;
        let mut line = format!("{len} {v} {brute}");
        let mut agree = v == brute;
        if let Problem::Covering(p) = problem {
            let r = brute_covering_radius_n(p, len)?;
            line.push_str(&format!(" {r}"));
            agree &= i64::try_from(r).is_ok_and(|r| r == v);
        }
        if !agree {
            line.push_str(" MISMATCH");
            ok = false;
        }
        println!("{line}");
    }
    if ok {
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            message: "solver and brute force disagree".into(),
        })
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
