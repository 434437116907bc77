//! Command line front end: parse and inspect diagrams, apply and verify
//! moves, run the unknotting procedures, and explore switch-state graphs.
//!
//! Diagrams travel in the PD file format, move sequences in the move log
//! line format; `parse` and `move --out` emit the former, `move` and the
//! witness printers emit the latter, and `verify` reads both back. Summary
//! output is `key=value` lines by default or tab-separated fields under
//! `--format tsv`:
//!
//! * `info`: `n`, `components`, `alternating`, `arcs`.
//! * `unknot`: `verdict`, `moves`, then `certified` under `--certify`.
//! * `admissible`: `admissible`, then `moves` and a witness log when true.
//! * `trail`: `trail`, then `from`, `to`, `edges`, `turns`, `moves` and a
//!   compiled log when found.
//! * `stategraph`: `crossings`, `vertices`, `edges`, `components`.
//! * `verify`: `replay`, `moves`, then `match` under `--expect` and
//!   `ascending` under `--ascending`.
//! * `survey`: one row per shadow plus a totals row with the admissible
//!   pair count split by whether a trail compiled.
//!
//! Exit codes: 0 success or a positive verdict, 1 a negative verdict or a
//! failed check, 2 malformed input, 3 an enumeration limit was exceeded.
//! The `ARCFLIP_LIMIT` variable overrides the default enumeration budget.
//! Identical invocations produce byte-identical output; the only randomness
//! anywhere is `survey --sample`, which draws from the `--seed` stream.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use arcflip_core::census::knot_shadows;
use arcflip_core::labeling::is_ascending_existential;
use arcflip_core::moves::{DiagMove, MoveLog};
use arcflip_core::stategraph::{
    build_state_graph, is_admissible, state_diagram, StateGraph, DEFAULT_LIMIT,
};
use arcflip_core::trail::{compile_trail, find_admissible_trail};
use arcflip_core::unknot::{certify, unknot_link_i, unknot_link_ii};
use arcflip_core::{DiagramError, LinkDiagram};

#[derive(Parser)]
#[command(name = "arcflip", version, about = "Arc crossing changes on link diagrams")]
struct Cli {
    /// Output style: key=value lines, or tab-separated fields.
    #[arg(long, global = true, value_enum, default_value_t = Format::Lines)]
    format: Format,
    /// Seed for sampled randomness (only `survey --sample` draws any).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lines,
    Tsv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a diagram file and print its canonical serialization.
    Parse(InputArgs),
    /// Print summary facts about a diagram.
    Info(InputArgs),
    /// Apply moves to a diagram and emit the resulting move log.
    Move(MoveArgs),
    /// Unknot a diagram by arc crossing changes and report the verdict.
    Unknot(UnknotArgs),
    /// Decide whether a crossing set can be switched by arc moves.
    Admissible(AdmissibleArgs),
    /// Find a trail between two crossings and compile it to moves.
    Trail(TrailArgs),
    /// Build the switch-state graph over a diagram's shadow.
    Stategraph(StategraphArgs),
    /// Replay a move log against a diagram and check claims on the result.
    Verify(VerifyArgs),
    /// Tabulate admissible pairs against compiled trails over small shadows.
    Survey(SurveyArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Diagram file in the PD format.
    #[arg(value_name = "FILE")]
    file: Option<PathBuf>,
    /// Diagram file in the PD format (alternative to the positional form).
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct MoveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// A move in the log line format, e.g. `ACC1 c3.2` or `KIN e7`;
    /// repeatable, applied in order.
    #[arg(long = "apply", value_name = "MOVE")]
    apply: Vec<String>,
    /// Also write the emitted move log to this file.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
    /// Write the resulting diagram to this file.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UnknotArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Which procedure to run: 1 switches whole components ascending in
    /// order, 2 prefers the second move variant and may leave a Hopf link.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    variant: u8,
    /// Write the move log to this file.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
    /// Re-check the final diagram against the verdict's claim.
    #[arg(long)]
    certify: bool,
}

#[derive(Args)]
struct AdmissibleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Crossing ids whose switch is wanted, comma separated.
    #[arg(long, value_name = "IDS")]
    set: String,
}

#[derive(Args)]
struct TrailArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Crossing id the trail starts from.
    #[arg(long)]
    x: u32,
    /// Crossing id the trail ends at.
    #[arg(long)]
    y: u32,
}

#[derive(Args)]
struct StategraphArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the graph in DOT format to this file.
    #[arg(long, value_name = "FILE")]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Move log file to replay against the diagram.
    #[arg(long, value_name = "FILE")]
    log: PathBuf,
    /// Require the replayed result to be ascending for some basepoints.
    #[arg(long)]
    ascending: bool,
    /// Require the replayed result to equal this diagram file.
    #[arg(long, value_name = "FILE")]
    expect: Option<PathBuf>,
}

#[derive(Args)]
struct SurveyArgs {
    /// Largest shadow size to include.
    #[arg(long = "max-n", value_name = "N", default_value_t = 5, value_parser = clap::value_parser!(u8).range(1..=8))]
    max_n: u8,
    /// Sample this many states per shadow instead of all 2^n (0 = all).
    #[arg(long, value_name = "COUNT", default_value_t = 0)]
    sample: usize,
}

/// A command outcome the process reports through its exit code: the message
/// goes to stderr, the code to the caller.
struct Failure {
    code: u8,
    msg: String,
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Failure {
        let code = match e {
            DiagramError::Parse { .. }
            | DiagramError::Validation(_)
            | DiagramError::NonPlanar(_)
            | DiagramError::BadMove(_) => 2,
            DiagramError::NotApplicable(_)
            | DiagramError::Certification(_)
            | DiagramError::ReplayMismatch { .. } => 1,
            DiagramError::LimitExceeded(_) => 3,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn bad_input(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.cmd {
        Cmd::Parse(a) => cmd_parse(a),
        Cmd::Info(a) => cmd_info(cli.format, a),
        Cmd::Move(a) => cmd_move(a),
        Cmd::Unknot(a) => cmd_unknot(cli.format, a),
        Cmd::Admissible(a) => cmd_admissible(cli.format, a),
        Cmd::Trail(a) => cmd_trail(cli.format, a),
        Cmd::Stategraph(a) => cmd_stategraph(cli.format, a),
        Cmd::Verify(a) => cmd_verify(cli.format, a),
        Cmd::Survey(a) => cmd_survey(cli.format, cli.seed, a),
    }
}

impl InputArgs {
    fn path(&self) -> Result<&Path, Failure> {
        match (&self.file, &self.input) {
            (Some(p), None) | (None, Some(p)) => Ok(p),
            (Some(_), Some(_)) => {
                Err(bad_input("pass the diagram either positionally or with --in, not both"))
            }
            (None, None) => Err(bad_input("a diagram file is required (positionally or --in)")),
        }
    }

    fn load(&self) -> Result<LinkDiagram, Failure> {
        Ok(LinkDiagram::parse(&read_file(self.path()?)?)?)
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| bad_input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| bad_input(format!("cannot write {}: {e}", path.display())))
}

/// Enumeration cap: the ARCFLIP_LIMIT variable overrides the built-in
/// default of 20 crossings (2^20 states).
fn limit() -> Result<usize, Failure> {
    match std::env::var("ARCFLIP_LIMIT") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| bad_input(format!("ARCFLIP_LIMIT must be a crossing count, got `{s}`"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_LIMIT),
        Err(e) => Err(bad_input(format!("ARCFLIP_LIMIT is unreadable: {e}"))),
    }
}

fn emit(fmt: Format, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        match fmt {
            Format::Lines => println!("{k}={v}"),
            Format::Tsv => println!("{k}\t{v}"),
        }
    }
}

fn emit_row(fmt: Format, cols: &[(&str, String)]) {
    let text: Vec<String> = match fmt {
        Format::Lines => cols.iter().map(|(k, v)| format!("{k}={v}")).collect(),
        Format::Tsv => cols.iter().map(|(_, v)| v.clone()).collect(),
    };
    println!("{}", text.join(if fmt == Format::Tsv { "\t" } else { " " }));
}

fn yes_no(b: bool) -> String {
    String::from(if b { "yes" } else { "no" })
}

fn cmd_parse(a: &InputArgs) -> Result<u8, Failure> {
    print!("{}", a.load()?.serialize());
    Ok(0)
}

fn cmd_info(fmt: Format, a: &InputArgs) -> Result<u8, Failure> {
    let d = a.load()?;
    emit(
        fmt,
        &[
            ("n", d.crossing_count().to_string()),
            ("components", d.component_count().to_string()),
            ("alternating", yes_no(d.is_alternating())),
            ("arcs", arcflip_core::moves::enumerate_arcs(&d).len().to_string()),
        ],
    );
    Ok(0)
}

fn cmd_move(a: &MoveArgs) -> Result<u8, Failure> {
    let d = a.input.load()?;
    let mut log = MoveLog::new();
    let mut cur = d;
    for raw in &a.apply {
        let mv = DiagMove::parse(raw)?;
        cur = log.record(&cur, mv)?;
    }
    print!("{log}");
    if let Some(path) = &a.log {
        write_file(path, &log.to_string())?;
    }
    if let Some(path) = &a.out {
        write_file(path, &cur.serialize())?;
    }
    Ok(0)
}

fn cmd_unknot(fmt: Format, a: &UnknotArgs) -> Result<u8, Failure> {
    let d = a.input.load()?;
    let lim = limit()?;
    let out = match a.variant {
        1 => unknot_link_i(&d, lim)?,
        _ => unknot_link_ii(&d, lim)?,
    };
    let mut pairs = vec![
        ("verdict", out.verdict.to_string()),
        ("moves", out.log.len().to_string()),
    ];
    if a.certify {
        certify(&out.final_diagram, out.verdict)?;
        pairs.push(("certified", yes_no(true)));
    }
    emit(fmt, &pairs);
    if let Some(path) = &a.log {
        write_file(path, &out.log.to_string())?;
    }
    Ok(0)
}

fn crossing_set(d: &LinkDiagram, spec: &str) -> Result<BTreeSet<usize>, Failure> {
    let sh = d.shadow();
    let mut set = BTreeSet::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let ext: u32 =
            tok.parse().map_err(|_| bad_input(format!("`{tok}` is not a crossing id")))?;
        let c = sh
            .crossing_index(ext)
            .ok_or_else(|| bad_input(format!("no crossing {ext} in the diagram")))?;
        set.insert(c);
    }
    Ok(set)
}

fn cmd_admissible(fmt: Format, a: &AdmissibleArgs) -> Result<u8, Failure> {
    let d = a.input.load()?;
    let set = crossing_set(&d, &a.set)?;
    let (ok, log) = is_admissible(&d, &set, limit()?)?;
    let mut pairs = vec![("admissible", ok.to_string())];
    if let Some(log) = &log {
        pairs.push(("moves", log.len().to_string()));
    }
    emit(fmt, &pairs);
    if let Some(log) = &log {
        print!("{log}");
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_trail(fmt: Format, a: &TrailArgs) -> Result<u8, Failure> {
    let d = a.input.load()?;
    let sh = d.shadow_arc();
    let lookup = |ext: u32| {
        sh.crossing_index(ext).ok_or_else(|| bad_input(format!("no crossing {ext} in the diagram")))
    };
    let (x, y) = (lookup(a.x)?, lookup(a.y)?);
    let Some(t) = find_admissible_trail(&d, x, y) else {
        emit(fmt, &[("trail", String::from("none"))]);
        return Ok(1);
    };
    let log = compile_trail(&d, &t)?;
    let edges: Vec<String> = t.edges.iter().map(|e| format!("e{e}")).collect();
    let turns: Vec<String> = t.turns.iter().map(|t| t.to_string()).collect();
    emit(
        fmt,
        &[
            ("trail", String::from("found")),
            ("from", sh.external_id(t.from).to_string()),
            ("to", sh.external_id(t.to).to_string()),
            ("edges", edges.join(",")),
            ("turns", turns.join(",")),
            ("moves", log.len().to_string()),
        ],
    );
    print!("{log}");
    Ok(0)
}

fn cmd_stategraph(fmt: Format, a: &StategraphArgs) -> Result<u8, Failure> {
    let d = a.input.load()?;
    let g = build_state_graph(d.shadow_arc(), limit()?)?;
    let edges: usize = (0..g.vertex_count()).map(|m| g.outdegree(m as u32)).sum();
    emit(
        fmt,
        &[
            ("crossings", g.crossing_count().to_string()),
            ("vertices", g.vertex_count().to_string()),
            ("edges", edges.to_string()),
            ("components", g.weak_components().len().to_string()),
        ],
    );
    if let Some(path) = &a.dot {
        write_file(path, &g.to_dot())?;
    }
    Ok(0)
}

fn cmd_verify(fmt: Format, a: &VerifyArgs) -> Result<u8, Failure> {
    let d = a.input.load()?;
    let log = MoveLog::parse(&read_file(&a.log)?)?;
    let end = log.replay(&d)?;
    let mut pairs = vec![
        ("replay", String::from("ok")),
        ("moves", log.len().to_string()),
    ];
    let mut code = 0;
    if let Some(path) = &a.expect {
        let want = LinkDiagram::parse(&read_file(path)?)?;
        let same = end.serialize() == want.serialize();
        pairs.push(("match", yes_no(same)));
        if !same {
            code = 1;
        }
    }
    if a.ascending {
        let asc = is_ascending_existential(&end);
        pairs.push(("ascending", yes_no(asc)));
        if !asc {
            code = 1;
        }
    }
    emit(fmt, &pairs);
    Ok(code)
}

/// Masks whose states the survey examines for one shadow: all of them, or a
/// seeded sample without replacement.
fn survey_masks(n: usize, sample: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let count = 1usize << n;
    if sample == 0 || sample >= count {
        return (0..count as u32).collect();
    }
    let mut picks: Vec<u32> =
        rand::seq::index::sample(rng, count, sample).iter().map(|i| i as u32).collect();
    picks.sort_unstable();
    picks
}

fn reachable(g: &StateGraph, start: u32) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    seen[start as usize] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(m) = queue.pop_front() {
        for &(w, _) in g.out_edges(m) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Per shadow, over the chosen states and every crossing pair: how many
/// pairs are switchable at all, and how many of those have a trail that
/// compiles. Admissible pairs without a trail are the interesting residue;
/// a compiled trail proves admissibility, so the reverse residue is empty.
fn cmd_survey(fmt: Format, seed: u64, a: &SurveyArgs) -> Result<u8, Failure> {
    let lim = limit()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys = ["n", "shadow", "states", "pairs", "admissible", "with_trail", "without_trail"];
    if fmt == Format::Tsv {
        println!("{}", keys.join("\t"));
    }
    let mut totals = [0usize; 5];
    for n in 1..=a.max_n as usize {
        for (si, shadow) in knot_shadows(n).into_iter().enumerate() {
            let g = build_state_graph(shadow.clone(), lim)?;
            let masks = survey_masks(n, a.sample, &mut rng);
            let mut row = [masks.len(), 0, 0, 0, 0];
            for &mask in &masks {
                let reach = reachable(&g, mask);
                let d = state_diagram(&shadow, mask);
                for x in 0..n {
                    for y in x + 1..n {
                        row[1] += 1;
                        let admissible = reach[(mask ^ (1 << x) ^ (1 << y)) as usize];
                        if !admissible {
                            continue;
                        }
                        row[2] += 1;
                        let compiled = find_admissible_trail(&d, x, y)
                            .is_some_and(|t| compile_trail(&d, &t).is_ok());
                        row[if compiled { 3 } else { 4 }] += 1;
                    }
                }
            }
            for (t, r) in totals.iter_mut().zip(row) {
                *t += r;
            }
            let mut cols = vec![("n", n.to_string()), ("shadow", si.to_string())];
            cols.extend(keys[2..].iter().zip(row).map(|(&k, v)| (k, v.to_string())));
            emit_row(fmt, &cols);
        }
    }
    let mut cols = vec![("n", String::from("total")), ("shadow", String::from("-"))];
    cols.extend(keys[2..].iter().zip(totals).map(|(&k, v)| (k, v.to_string())));
    emit_row(fmt, &cols);
    Ok(0)
}
