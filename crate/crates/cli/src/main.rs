//! Command-line front end: check | least-core | nucleolus | oracle | gen |
//! counterexample.
//!
//! Exit codes: 0 success, 2 input error, 3 convexity violation, 4 size
//! limit, 5 verification mismatch. Results go to stdout (JSON envelope with
//! `--json`), diagnostics and timing to stderr.

mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use nucleolus::coalition::Coalition;
use nucleolus::error::Error;
use nucleolus::game::{
    greedy_core_point, is_crossing_supermodular, is_supermodular, Allocation, Convexity, Game,
    CROSSING_CHECK_BOUND, SUPERMODULARITY_CHECK_BOUND,
};
use nucleolus::least_core::{least_core_with, BoundMode, LeastCoreResult};
use nucleolus::nucleolus::{
    kuipers_theorem12_check, nucleolus_divide_conquer, nucleolus_per_player, NucleolusResult,
    ReducedGameView,
};
use nucleolus::oracle;
use nucleolus::rational::{parse_rational, rat, render_rational, Rational};

use format::{digest_bytes, Envelope, GameFile};

/// Player cap for generated files (the file lists up to 2^n − 1 coalitions).
const GEN_MAX_PLAYERS: usize = 16;

#[derive(Parser)]
#[command(
    name = "nucleolus",
    version,
    about = "Exact least-core and nucleolus solvers for convex cooperative games"
)]
struct Cli {
    /// Emit a machine-readable JSON envelope on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for generators that draw random numbers.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Player cap for brute-force oracle runs (and --verify).
    #[arg(long, global = true, default_value_t = oracle::DEFAULT_MAX_N)]
    max_n: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check supermodularity (convexity) of a game file.
    Check { file: PathBuf },
    /// Least-core value, essential coalitions and dual weights.
    LeastCore {
        file: PathBuf,
        /// 1-based reference player for the non-emptiness tests.
        #[arg(long, default_value_t = 1)]
        s: usize,
        /// Include the per-iteration trace in the output.
        #[arg(long)]
        trace: bool,
    },
    /// Nucleolus allocation of a convex game.
    Nucleolus {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::DivideConquer)]
        method: Method,
        /// Cross-check against the brute-force oracle (player count ≤ max-n).
        #[arg(long)]
        verify: bool,
    },
    /// Brute-force reference solvers (exact LP / enumeration).
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Generate a game file.
    Gen {
        #[command(subcommand)]
        kind: GenCommand,
    },
    /// Run the built-in 4-player counterexample battery (refutes the
    /// two-term reduced-value shortcut).
    Counterexample,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    PerPlayer,
    DivideConquer,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Sequential-LP nucleolus.
    Nucleolus { file: PathBuf },
    /// Direct least-core LP.
    LeastCore { file: PathBuf },
    /// Tightness of one coalition in every least-core optimum.
    Essential {
        file: PathBuf,
        /// Coalition key, e.g. "1,3".
        #[arg(long)]
        coalition: String,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Airport savings game from landing costs.
    Airport {
        /// Comma-separated rational costs, e.g. "1,2,5/2".
        #[arg(long, value_delimiter = ',')]
        costs: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bankruptcy game from an estate and claims.
    Bankruptcy {
        #[arg(long)]
        estate: String,
        #[arg(long, value_delimiter = ',')]
        claims: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random convex game v(S) = w(S)^curvature (deterministic per seed).
    RandomConvex {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        min_weight: u64,
        #[arg(long, default_value_t = 9)]
        max_weight: u64,
        #[arg(long, default_value_t = 2)]
        curvature: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Input(_) | Error::Domain(_) => 2,
            Error::NotConvex { .. } => 3,
            Error::Size { .. } => 4,
        };
        fail(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<(String, Game), Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))?;
    let digest = digest_bytes(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| fail(2, "game file is not UTF-8"))?;
    let game = GameFile::parse(&text)?.to_game()?;
    Ok((digest, game))
}

/// Convexity gate for solver commands: exhaustive below the bound, trusted
/// with a warning above it.
fn ensure_convex(game: &Game) -> Result<(), Failure> {
    let n = game.player_count();
    if n > SUPERMODULARITY_CHECK_BOUND {
        eprintln!(
            "warning: {n} players exceeds the exhaustive convexity bound ({SUPERMODULARITY_CHECK_BOUND}); trusting the input"
        );
        return Ok(());
    }
    match is_supermodular(game)? {
        Convexity::Convex => Ok(()),
        Convexity::Violation { i, j, base } => Err(fail(
            3,
            format!(
                "game is not convex: players {} and {} violate supermodularity at S = {base}",
                i + 1,
                j + 1
            ),
        )),
    }
}

fn emit(cli: &Cli, envelope: &Envelope, text: &str) {
    if cli.json {
        print!("{}", envelope.to_json_string());
    } else {
        print!("{text}");
    }
}

fn allocation_strings(x: &Allocation) -> Vec<String> {
    x.components().iter().map(render_rational).collect()
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let started = Instant::now();
    let code = match &cli.command {
        Command::Check { file } => cmd_check(cli, file)?,
        Command::LeastCore { file, s, trace } => cmd_least_core(cli, file, *s, *trace)?,
        Command::Nucleolus {
            file,
            method,
            verify,
        } => cmd_nucleolus(cli, file, *method, *verify)?,
        Command::Oracle { which } => cmd_oracle(cli, which)?,
        Command::Gen { kind } => cmd_gen(cli, kind)?,
        Command::Counterexample => cmd_counterexample(cli)?,
    };
    eprintln!("timing: {:.3} ms", started.elapsed().as_secs_f64() * 1e3);
    Ok(code)
}

fn cmd_check(cli: &Cli, file: &Path) -> Result<u8, Failure> {
    let (digest, game) = load(file)?;
    let n = game.player_count();
    if n > SUPERMODULARITY_CHECK_BOUND {
        return Err(fail(
            4,
            format!(
                "convexity check supports at most {SUPERMODULARITY_CHECK_BOUND} players, got {n}"
            ),
        ));
    }
    let convexity = is_supermodular(&game)?;
    let convex = convexity.is_convex();
    // Supermodularity implies the crossing restriction outright; the scan is
    // only needed on non-convex inputs, and only fits below its own bound.
    let crossing: &str = if convex {
        "yes"
    } else if n <= CROSSING_CHECK_BOUND {
        if is_crossing_supermodular(&game)?.holds() {
            "yes"
        } else {
            "no"
        }
    } else {
        "unknown"
    };

    let (witness_json, witness_text) = match &convexity {
        Convexity::Convex => (serde_json::Value::Null, String::new()),
        Convexity::Violation { i, j, base } => (
            json!({"i": i + 1, "j": j + 1, "base": base.key()}),
            format!(" (witness: players {}, {} at S = {base})", i + 1, j + 1),
        ),
    };
    let text = format!(
        "supermodular: {}{}\ncrossing-supermodular: {crossing}\nconvex: {}\n",
        if convex { "yes" } else { "no" },
        witness_text,
        if convex { "yes" } else { "no" },
    );
    let envelope = Envelope {
        command: "check".to_string(),
        input_digest: digest,
        result: json!({
            "supermodular": convex,
            "witness": witness_json,
            "crossing_supermodular": crossing,
            "convex": convex,
        }),
        trace: None,
    };
    emit(cli, &envelope, &text);
    Ok(if convex { 0 } else { 3 })
}

fn least_core_payload(r: &LeastCoreResult) -> serde_json::Value {
    json!({
        "epsilon": render_rational(&r.epsilon_star),
        "essential": r.essential.iter().map(Coalition::key).collect::<Vec<_>>(),
        "dual_weights": r.dual_weights.iter()
            .map(|(s, mu)| json!({"coalition": s.key(), "mu": render_rational(mu)}))
            .collect::<Vec<_>>(),
        "iterations": r.trace.len(),
    })
}

fn trace_payload(r: &LeastCoreResult) -> serde_json::Value {
    json!(r
        .trace
        .iter()
        .map(|t| json!({
            "epsilon": render_rational(&t.epsilon),
            "witness": t.witness.key(),
            "partition_sizes": t.partition_sizes,
            "sfm_evaluations": t.sfm_evaluations,
        }))
        .collect::<Vec<_>>())
}

fn cmd_least_core(cli: &Cli, file: &Path, s: usize, trace: bool) -> Result<u8, Failure> {
    let (digest, game) = load(file)?;
    let n = game.player_count();
    if n < 2 {
        return Err(fail(2, "least core needs at least two players"));
    }
    if s == 0 || s > n {
        return Err(fail(2, format!("reference player {s} out of range 1..={n}")));
    }
    ensure_convex(&game)?;
    let r = least_core_with(&game, s - 1, BoundMode::Exact)?;

    let mut text = format!("epsilon: {}\n", render_rational(&r.epsilon_star));
    text += &format!(
        "essential: {}\n",
        r.essential
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    for (c, mu) in &r.dual_weights {
        text += &format!("mu[{c}] = {}\n", render_rational(mu));
    }
    if trace {
        for (i, t) in r.trace.iter().enumerate() {
            text += &format!(
                "iteration {}: epsilon = {}, witness = {}, |P|+|Q| = {}, sfm evaluations = {}\n",
                i + 1,
                render_rational(&t.epsilon),
                t.witness,
                t.partition_sizes,
                t.sfm_evaluations,
            );
        }
    }
    let envelope = Envelope {
        command: "least-core".to_string(),
        input_digest: digest,
        result: least_core_payload(&r),
        trace: trace.then(|| trace_payload(&r)),
    };
    emit(cli, &envelope, &text);
    Ok(0)
}

fn cmd_nucleolus(cli: &Cli, file: &Path, method: Method, verify: bool) -> Result<u8, Failure> {
    let (digest, game) = load(file)?;
    ensure_convex(&game)?;
    let (r, method_name): (NucleolusResult, &str) = match method {
        Method::PerPlayer => (nucleolus_per_player(&game)?, "per-player"),
        Method::DivideConquer => (nucleolus_divide_conquer(&game)?, "divide-conquer"),
    };
    let mut verified = false;
    if verify {
        let n = game.player_count();
        if n > cli.max_n {
            return Err(fail(
                4,
                format!("--verify supports at most {} players, got {n}", cli.max_n),
            ));
        }
        let slow = oracle::brute_nucleolus_bounded(&game, cli.max_n)?;
        if slow != r.allocation {
            return Err(fail(
                5,
                format!(
                    "verification mismatch: solver {} vs oracle {} — this is a solver bug",
                    r.allocation, slow
                ),
            ));
        }
        verified = true;
    }

    let mut text = format!(
        "nucleolus: {}\nmethod: {method_name}\nsfm evaluations: {}\n",
        r.allocation, r.sfm_evaluations,
    );
    if verified {
        text += "verified: ok\n";
    }
    let envelope = Envelope {
        command: "nucleolus".to_string(),
        input_digest: digest,
        result: json!({
            "nucleolus": allocation_strings(&r.allocation),
            "method": method_name,
            "sfm_evaluations": r.sfm_evaluations,
            "verified": verified,
        }),
        trace: Some(json!(r
            .steps
            .iter()
            .map(|st| json!({
                "block": st.block.key(),
                "essential": st.essential.key(),
                "epsilon": render_rational(&st.epsilon),
            }))
            .collect::<Vec<_>>())),
    };
    emit(cli, &envelope, &text);
    Ok(0)
}

fn cmd_oracle(cli: &Cli, which: &OracleCommand) -> Result<u8, Failure> {
    match which {
        OracleCommand::Nucleolus { file } => {
            let (digest, game) = load(file)?;
            let x = oracle::brute_nucleolus_bounded(&game, cli.max_n)?;
            let envelope = Envelope {
                command: "oracle nucleolus".to_string(),
                input_digest: digest,
                result: json!({"nucleolus": allocation_strings(&x)}),
                trace: None,
            };
            emit(cli, &envelope, &format!("nucleolus: {x}\n"));
        }
        OracleCommand::LeastCore { file } => {
            let (digest, game) = load(file)?;
            let (eps, x) = oracle::brute_least_core_bounded(&game, cli.max_n)?;
            let envelope = Envelope {
                command: "oracle least-core".to_string(),
                input_digest: digest,
                result: json!({
                    "epsilon": render_rational(&eps),
                    "point": allocation_strings(&x),
                }),
                trace: None,
            };
            emit(
                cli,
                &envelope,
                &format!("epsilon: {}\npoint: {x}\n", render_rational(&eps)),
            );
        }
        OracleCommand::Essential { file, coalition } => {
            let (digest, game) = load(file)?;
            let s = Coalition::parse_key(coalition, game.player_count())?;
            let (eps, _) = oracle::brute_least_core_bounded(&game, cli.max_n)?;
            let essential = oracle::brute_essential_given(&game, s, &eps)?;
            let envelope = Envelope {
                command: "oracle essential".to_string(),
                input_digest: digest,
                result: json!({
                    "coalition": s.key(),
                    "essential": essential,
                    "epsilon": render_rational(&eps),
                }),
                trace: None,
            };
            emit(cli, &envelope, &format!("essential[{s}]: {essential}\n"));
        }
    }
    Ok(0)
}

fn parse_rationals(raw: &[String]) -> Result<Vec<Rational>, Failure> {
    raw.iter()
        .map(|s| parse_rational(s).map_err(Failure::from))
        .collect()
}

fn cmd_gen(cli: &Cli, kind: &GenCommand) -> Result<u8, Failure> {
    let (game, out) = match kind {
        GenCommand::Airport { costs, out } => {
            let costs = parse_rationals(costs)?;
            (Game::airport(&costs)?, out.clone())
        }
        GenCommand::Bankruptcy { estate, claims, out } => {
            let estate = parse_rational(estate)?;
            let claims = parse_rationals(claims)?;
            let total: Rational = claims.iter().cloned().sum();
            if estate > total {
                eprintln!(
                    "warning: estate {} exceeds the claim total {}; every coalition is fully satisfied",
                    render_rational(&estate),
                    render_rational(&total)
                );
            }
            (Game::bankruptcy(estate, &claims)?, out.clone())
        }
        GenCommand::RandomConvex {
            n,
            min_weight,
            max_weight,
            curvature,
            out,
        } => (
            Game::random_convex(*n, cli.seed, (*min_weight, *max_weight), *curvature)?,
            out.clone(),
        ),
    };
    let n = game.player_count();
    if n > GEN_MAX_PLAYERS {
        return Err(fail(
            4,
            format!("generated files support at most {GEN_MAX_PLAYERS} players, got {n}"),
        ));
    }
    let text = GameFile::from_game(&game)?.to_json_string();
    match out {
        Some(path) => std::fs::write(&path, &text)
            .map_err(|e| fail(2, format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_counterexample(cli: &Cli) -> Result<u8, Failure> {
    let game = Game::kuipers_counterexample();
    let digest = digest_bytes(GameFile::from_game(&game)?.to_json_string().as_bytes());
    let n = game.player_count();

    let convex = is_supermodular(&game)?.is_convex();
    let lc = least_core_with(&game, 0, BoundMode::Exact)?;
    let nu = nucleolus_divide_conquer(&game)?;
    let nu_pp = nucleolus_per_player(&game)?;
    let c3 = Coalition::parse_key("3", n)?;
    let c4 = Coalition::parse_key("4", n)?;
    let ess3 = oracle::brute_essential_given(&game, c3, &lc.epsilon_star)?;
    let ess4 = oracle::brute_essential_given(&game, c4, &lc.epsilon_star)?;

    let block = Coalition::parse_key("1,2", n)?;
    let view = ReducedGameView::new(
        std::sync::Arc::new(game.clone()),
        block,
        vec![
            (c3, nu.allocation.get(2).clone()),
            (c4, nu.allocation.get(3).clone()),
        ],
    )?;
    let rv1 = view.value(Coalition::parse_key("1", n)?)?;
    let rv2 = view.value(Coalition::parse_key("2", n)?)?;
    let rv12 = view.value(block)?;

    let (lhs, rhs) = kuipers_theorem12_check(
        &game,
        block,
        &nu.allocation,
        Coalition::parse_key("2", n)?,
    )?;

    // The whole battery is pinned; any drift is a solver bug.
    let expected_nu = Allocation::new(vec![
        parse_rational("5/2")?,
        parse_rational("7/2")?,
        rat(2),
        rat(2),
    ]);
    let greedy = greedy_core_point(&game, &[0, 1, 2, 3])?;
    let ok = convex
        && lc.epsilon_star == rat(2)
        && nu.allocation == expected_nu
        && nu_pp.allocation == expected_nu
        && ess3
        && ess4
        && rv1 == rat(0)
        && rv2 == rat(1)
        && rv12 == rat(6)
        && lhs == rat(1)
        && rhs == rat(0)
        && greedy.in_core(&game);

    let text = format!(
        "convex: {}\nleast-core epsilon: {}\nessential {{3}}: {ess3}\nessential {{4}}: {ess4}\n\
         nucleolus (divide-conquer): {}\nnucleolus (per-player): {}\n\
         reduced values on {{1,2}}: v'({{1}}) = {}, v'({{2}}) = {}, v'({{1,2}}) = {}\n\
         shortcut comparison at U = {{1,2}}, S = {{2}}: lhs = {}, rhs = {} ({})\n\
         battery: {}\n",
        if convex { "yes" } else { "no" },
        render_rational(&lc.epsilon_star),
        nu.allocation,
        nu_pp.allocation,
        render_rational(&rv1),
        render_rational(&rv2),
        render_rational(&rv12),
        render_rational(&lhs),
        render_rational(&rhs),
        if lhs == rhs { "equal" } else { "shortcut refuted" },
        if ok { "ok" } else { "MISMATCH" },
    );
    let envelope = Envelope {
        command: "counterexample".to_string(),
        input_digest: digest,
        result: json!({
            "convex": convex,
            "epsilon": render_rational(&lc.epsilon_star),
            "essential": {"3": ess3, "4": ess4},
            "nucleolus": allocation_strings(&nu.allocation),
            "reduced_values": {
                "1": render_rational(&rv1),
                "2": render_rational(&rv2),
                "1,2": render_rational(&rv12),
            },
            "shortcut": {"lhs": render_rational(&lhs), "rhs": render_rational(&rhs)},
            "battery_ok": ok,
        }),
        trace: None,
    };
    emit(cli, &envelope, &text);
    if ok {
        Ok(0)
    } else {
        Err(fail(5, "counterexample battery mismatch — solver bug"))
    }
}
