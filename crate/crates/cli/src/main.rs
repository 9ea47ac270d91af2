use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use latspi::corpus::{explain, load_corpus, run_cases};
use latspi::equivalence::{
    check_with, prepare, witness_replay, CheckOptions, GameConfig, RelationKind, Verdict, Witness, ALL_RELATIONS,
};
use latspi::independence::indep_event;
use latspi::knowledge::static_compare;
use latspi::lts::{diamond_check, enabled_transitions, reachable_lts, Event, ExplorationBounds};
use latspi::parse::{parse_definitions, parse_extended, select_definition};
use latspi::syntax::{ExtendedProcess, Process};
use latspi::{AliasMap, Symbol, Theory};

macro_rules! wl {
    ($out:expr, $($arg:tt)*) => {{
        $out.push_str(&format!($($arg)*));
        $out.push('\n');
    }};
}

const STATE_BUDGET_ENV: &str = "LATSPI_STATE_BUDGET";

#[derive(Parser)]
#[command(
    name = "lats-pi",
    version,
    about = "Non-interleaving semantics and behavioural relations for the applied pi-calculus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Common {
    /// Rewrite rules, one `lhs -> rhs` per line.
    #[arg(long)]
    theory: Option<PathBuf>,
    /// Use the built-in symmetric encryption and pairing rules.
    #[arg(long, conflicts_with = "theory")]
    dolev_yao: bool,
    /// Bound overrides, e.g. `depth=2,unfold=2,game=12,test=3,consts=a+b`.
    #[arg(long, default_value = "")]
    bounds: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a process and print its canonical form.
    Parse {
        /// `FILE`, `FILE:NAME` or inline process text.
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the reachable transition graph.
    Lts {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Print the dependency graph of a trace.
    Indep {
        input: String,
        /// Comma-separated indices into the sorted enabled transitions at
        /// each step; by default the first transition is taken until none is
        /// left.
        #[arg(long)]
        trace: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the frames of two extended processes.
    StaticEquiv {
        left: String,
        right: String,
        /// Alias correspondence, e.g. `0l->1l,1l->0l`.
        #[arg(long, default_value = "")]
        rho: String,
        /// Recipe depth of the tests.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Decide a behavioural relation between two processes.
    Check {
        /// One of presim-i, sim-i, bisim-i, sim-st, bisim-st, sim-hp,
        /// bisim-hp, fsim-st, fsim-hp, sim-iloc, bisim-iloc, sim-ifull,
        /// bisim-ifull.
        relation: String,
        left: String,
        right: String,
        /// Let the ST attacker keep any subset of the running pairs.
        #[arg(long)]
        st_exhaustive: bool,
        /// Write the distinguishing strategy as JSON.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Report coinitial independent events that do not commute.
    Diamonds {
        input: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a directory or file of TOML fixtures.
    Corpus {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Include per-case timings (the report is otherwise reproducible
        /// byte for byte).
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        st_exhaustive: bool,
    },
    /// Narrate a strategy written by `check --witness` or `check --format json`.
    Explain { file: PathBuf },
}

fn main() -> ExitCode {
    let mut out = String::new();
    let result = run(Cli::parse(), &mut out);
    // a closed pipe downstream is not an error worth reporting
    let _ = std::io::stdout().write_all(out.as_bytes());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn theory_of(c: &Common) -> Result<Theory> {
    if c.dolev_yao {
        return Ok(Theory::dolev_yao());
    }
    match &c.theory {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Theory::parse(&text).with_context(|| format!("in {}", p.display()))
        }
        None => Ok(Theory::empty()),
    }
}

fn bounds_of(c: &Common) -> Result<ExplorationBounds> {
    let mut b = ExplorationBounds::default();
    if let Ok(v) = std::env::var(STATE_BUDGET_ENV) {
        b.state_budget = v
            .trim()
            .parse()
            .map_err(|_| anyhow!("{STATE_BUDGET_ENV} must be a number, got `{v}`"))?;
    }
    b.apply_overrides(&c.bounds).map_err(|e| anyhow!(e))?;
    Ok(b)
}

/// Reads `FILE`, `FILE:NAME`, or treats the argument as process text.
fn load_process(arg: &str, theory: &Theory) -> Result<Process> {
    let sig: Vec<Symbol> = theory.signature.iter().cloned().collect();
    let (path, name) = if Path::new(arg).is_file() {
        (Some(arg), None)
    } else {
        match arg.rsplit_once(':') {
            Some((p, n)) if Path::new(p).is_file() => (Some(p), Some(n)),
            _ => (None, None),
        }
    };
    let Some(path) = path else {
        return Ok(latspi::parse::parse_process_with(arg, &sig)?);
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let defs = parse_definitions(&text, &sig).with_context(|| format!("in {path}"))?;
    select_definition(&defs, name).ok_or_else(|| anyhow!("{path} has no definition `{}`", name.unwrap_or("main")))
}

fn load_extended(arg: &str) -> Result<ExtendedProcess> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    } else {
        arg.to_string()
    };
    Ok(parse_extended(text.trim())?)
}

/// Theory with the process symbols added and bounds with its free names.
fn setup(input: &str, common: &Common) -> Result<(Process, Theory, ExplorationBounds)> {
    let theory = theory_of(common)?;
    let p = load_process(input, &theory)?;
    let (t, b) = prepare(&p, &Process::Nil, &theory, &bounds_of(common)?);
    Ok((p, t, b))
}

fn run(cli: Cli, out: &mut String) -> Result<u8> {
    match cli.command {
        Command::Parse { input, common } => {
            let theory = theory_of(&common)?;
            let p = load_process(&input, &theory)?;
            match common.format {
                Format::Text => wl!(out, "{p}"),
                Format::Json => wl!(out, "{}", serde_json::json!({ "process": p.to_string() })),
            }
            Ok(0)
        }
        Command::Lts { input, common } => {
            let (p, theory, bounds) = setup(&input, &common)?;
            let lts = reachable_lts(&ExtendedProcess::from_process(p), &theory, &bounds)?;
            match common.format {
                Format::Json => wl!(out, "{}", serde_json::to_string_pretty(&lts)?),
                Format::Text => {
                    for (s, e, t) in &lts.edges {
                        wl!(out, "{s}  \"{}\"  \"{}\"  {t}", e.action, e.loc);
                    }
                    out.push('\n');
                    for (i, st) in lts.states.iter().enumerate() {
                        wl!(out, "{i} = {st}");
                    }
                    if lts.truncated {
                        wl!(out, "(truncated at unfold={})", bounds.repl_unfold);
                    }
                }
            }
            Ok(0)
        }
        Command::Indep { input, trace, common } => {
            let (p, theory, bounds) = setup(&input, &common)?;
            let picks: Option<Vec<usize>> = trace
                .map(|t| {
                    t.split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.trim().parse::<usize>().map_err(|_| anyhow!("bad trace index `{s}`")))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let mut state = ExtendedProcess::from_process(p);
            let mut events: Vec<Event> = Vec::new();
            let limit = picks.as_ref().map_or(bounds.game_depth, Vec::len);
            for step in 0..limit {
                let mut moves = enabled_transitions(&state, &theory, &bounds)?;
                moves.sort_by(|a, b| a.0.cmp(&b.0));
                let k = picks.as_ref().map_or(0, |v| v[step]);
                if moves.is_empty() && picks.is_none() {
                    break;
                }
                let (e, next) = moves
                    .into_iter()
                    .nth(k)
                    .ok_or_else(|| anyhow!("step {step}: no transition with index {k}"))?;
                events.push(e);
                state = next;
            }
            let edges: Vec<(usize, usize)> = (0..events.len())
                .flat_map(|j| (0..j).map(move |i| (i, j)))
                .filter(|&(i, j)| !indep_event(&events[i], &events[j]))
                .collect();
            match common.format {
                Format::Json => {
                    let evs: Vec<String> = events.iter().map(|e| e.to_string()).collect();
                    wl!(out, "{}", serde_json::json!({ "events": evs, "dependencies": edges }));
                }
                Format::Text => {
                    for (i, e) in events.iter().enumerate() {
                        wl!(out, "e{i} = {e}");
                    }
                    for (i, j) in edges {
                        wl!(out, "e{i} -> e{j}");
                    }
                }
            }
            Ok(0)
        }
        Command::StaticEquiv {
            left,
            right,
            rho,
            depth,
            common,
        } => {
            let mut theory = theory_of(&common)?;
            let (a, b) = (load_extended(&left)?, load_extended(&right)?);
            let mut syms = BTreeSet::new();
            a.body.symbols(&mut syms);
            b.body.symbols(&mut syms);
            for x in [&a, &b] {
                for (_, m) in x.frame.iter() {
                    m.symbols(&mut syms);
                }
            }
            theory.add_symbols(syms);
            let mut bounds = bounds_of(&common)?;
            bounds.public_consts.extend(a.free_vars());
            bounds.public_consts.extend(b.free_vars());
            let rho = AliasMap::parse(&rho)?;
            let (a, b) = (a.alpha_canonical(), b.alpha_canonical());
            let r = static_compare(&a.frame, &b.frame, &rho, &bounds.public_consts, depth, true, &theory)?;
            match r.witness {
                None => {
                    let note = if r.complete { "" } else { ", enumeration capped" };
                    wl!(out, "equivalent (up to depth {depth}{note})");
                    Ok(0)
                }
                Some(w) => {
                    wl!(out, "distinguished: {w}");
                    Ok(1)
                }
            }
        }
        Command::Check {
            relation,
            left,
            right,
            st_exhaustive,
            witness,
            common,
        } => {
            let kind = RelationKind::parse(&relation).ok_or_else(|| {
                anyhow!(
                    "unknown relation `{relation}`; expected one of {}",
                    ALL_RELATIONS.join(", ")
                )
            })?;
            let base = theory_of(&common)?;
            let p = load_process(&left, &base)?;
            let q = load_process(&right, &base)?;
            let bounds = bounds_of(&common)?;
            let opts = CheckOptions { st_exhaustive };
            let verdict = check_with(kind, &p, &q, &base, &bounds, opts)?;
            if let Verdict::Distinguished { witness: w, .. } = &verdict {
                let (t, b) = prepare(&p, &q, &base, &bounds);
                witness_replay(&verdict, &GameConfig::initial(kind, &p, &q), &t, &b, opts)
                    .context("the strategy failed to replay")?;
                if let Some(path) = &witness {
                    std::fs::write(path, serde_json::to_string_pretty(w)?)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
            match common.format {
                Format::Json => wl!(out, "{}", serde_json::to_string_pretty(&verdict)?),
                Format::Text => print_verdict(out, kind, &verdict),
            }
            Ok(if verdict.is_related() { 0 } else { 1 })
        }
        Command::Diamonds { input, common } => {
            let (p, theory, bounds) = setup(&input, &common)?;
            let v = diamond_check(&ExtendedProcess::from_process(p), &theory, &bounds)?;
            for d in &v {
                wl!(out, "{}: {} and {}: {}", d.state, d.first, d.second, d.reason);
            }
            wl!(out, "{} violations", v.len());
            Ok(if v.is_empty() { 0 } else { 1 })
        }
        Command::Corpus {
            path,
            format,
            timings,
            st_exhaustive,
        } => {
            let cases = load_corpus(&path)?;
            let mut report = run_cases(&cases, CheckOptions { st_exhaustive });
            if !timings {
                report = report.without_timings();
            }
            match format {
                Format::Json => wl!(out, "{}", serde_json::to_string_pretty(&report)?),
                Format::Text => out.push_str(&report.render_text()),
            }
            Ok(if report.failed() == 0 { 0 } else { 1 })
        }
        Command::Explain { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let w: Witness = match serde_json::from_str::<Verdict>(&text) {
                Ok(Verdict::Distinguished { witness, .. }) => witness,
                Ok(Verdict::Related { .. }) => bail!("{} records a related verdict", file.display()),
                Err(_) => {
                    serde_json::from_str(&text).with_context(|| format!("{} is not a strategy", file.display()))?
                }
            };
            out.push_str(&explain(&w));
            Ok(0)
        }
    }
}

fn print_verdict(out: &mut String, kind: RelationKind, v: &Verdict) {
    match v {
        Verdict::Related {
            exact,
            bounds,
            relation_size,
            caveat,
        } => {
            let q = if *exact { "exact" } else { "bounded" };
            wl!(out, "related ({kind}, {q}, {relation_size} related positions)");
            wl!(out, "bounds: {bounds}");
            wl!(out, "note: {caveat}");
        }
        Verdict::Distinguished { witness, bounds } => {
            wl!(out, "distinguished ({kind})");
            wl!(out, "bounds: {bounds}");
            out.push_str(&explain(witness));
        }
    }
}
