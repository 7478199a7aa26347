//! Batch front end: load a game file, run one pipeline and write its reports.
//!
//! Every report is deterministic given the game file, the flags and the seed.
//! JSON reports carry `schema_version`.

mod report;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use blackwell_core::equilibrium::{feasible_outcomes, folk_equilibrium, payoff_set, synthesize_with};
use blackwell_core::exact::{self, Rational};
use blackwell_core::model::{Game, StrategyAutomaton};
use blackwell_core::values::{blackwell_minmax_all, DEFAULT_DENOMINATOR};
use blackwell_core::verify::{monte_carlo, verify_equilibrium};

pub use report::{
    ArtifactDoc, CertificateDoc, HullDoc, MinmaxDoc, PayoffSetDoc, PlayDoc, PlayEntry, PointDoc,
    VerifyDoc,
};
pub use svg::{ir_region, render_payoff_plot};

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VERIFY_FAIL: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_PARSE: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "blackwell", version, about = "Minmax values, equilibria and verification for Blackwell games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minmax value brackets and punishments of every player.
    Minmax(RunConfig),
    /// Synthesize an equilibrium automaton.
    Synth(RunConfig),
    /// Vertices of the individually rational payoff hull.
    PayoffSet(RunConfig),
    /// Check an equilibrium automaton against deviations.
    Verify(RunConfig),
}

#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    /// Game file (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Comma-separated; payoff-set draws one hull per value, the other
    /// commands use the first.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub epsilon: Vec<f64>,
    /// Stages per Monte Carlo rollout.
    #[arg(long, default_value_t = 500)]
    pub horizon: usize,
    /// Monte Carlo repetitions.
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest cycle length tried for periodic plays.
    #[arg(long, default_value_t = DEFAULT_DENOMINATOR)]
    pub denominator: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv,svg")]
    pub format: Vec<Format>,
    /// Artifact to verify; defaults to `automaton.json` in the output directory.
    #[arg(long)]
    pub automaton: Option<PathBuf>,
    /// Payoff vector to approximate by a lottery over hull vertices.
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<String>>,
}

impl RunConfig {
    pub fn new(spec: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            spec: spec.into(),
            epsilon: vec![0.1],
            horizon: 500,
            reps: 500,
            seed: 0,
            denominator: DEFAULT_DENOMINATOR,
            out: out.into(),
            format: vec![Format::Json, Format::Csv, Format::Svg],
            automaton: None,
            target: None,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon[0]
    }

    fn wants(&self, f: Format) -> bool {
        self.format.contains(&f)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.epsilon.is_empty() {
            return Err(CliError::Config("at least one epsilon is required".into()));
        }
        if let Some(e) = self.epsilon.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(CliError::Config(format!("epsilon {e} is outside (0, 1]")));
        }
        if self.horizon == 0 || self.reps == 0 || self.denominator == 0 {
            return Err(CliError::Config(
                "horizon, reps and denominator must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Load {
        path: PathBuf,
        source: blackwell_core::Error,
    },
    #[error(transparent)]
    Core(#[from] blackwell_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use blackwell_core::Error as E;
        match self {
            CliError::Read { .. } | CliError::Load { .. } => EXIT_PARSE,
            CliError::Core(e) => match e {
                E::Parse(_) | E::InvalidSpec(_) => EXIT_PARSE,
                E::Infeasible(_) | E::TargetOutside { .. } => EXIT_INFEASIBLE,
                E::ResourceCap { .. } => EXIT_RESOURCE,
                _ => EXIT_OTHER,
            },
            _ => EXIT_OTHER,
        }
    }
}

/// Files written by a command, a short message and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub message: String,
    pub code: i32,
}

pub fn load_game(path: &Path) -> Result<Game, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Game::from_json(&text).map_err(|source| CliError::Load {
        path: path.to_path_buf(),
        source,
    })
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Writer { dir, files: Vec::new() })
    }

    fn text(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("report serialises");
        s.push('\n');
        self.text(name, &s)
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        self.text(name, &String::from_utf8(bytes).expect("csv is utf-8"))
    }
}

fn format_vector(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(exact::format_rational).collect();
    format!("({})", parts.join(", "))
}

pub fn cmd_minmax(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let game = load_game(&cfg.spec)?;
    let certs = blackwell_minmax_all(&game)?;
    let doc = MinmaxDoc::new(&game, &certs)?;
    let mut w = Writer::new(&cfg.out)?;
    if cfg.wants(Format::Json) {
        w.json("minmax.json", &doc)?;
    }
    if cfg.wants(Format::Csv) {
        let header = ["player", "value_lo", "value_hi", "exact", "method"].map(String::from);
        let rows: Vec<Vec<String>> = doc
            .players
            .iter()
            .map(|c| {
                vec![
                    c.player.clone(),
                    c.value_lo.to_string(),
                    c.value_hi.to_string(),
                    c.exact.clone().unwrap_or_default(),
                    c.method.tag().to_string(),
                ]
            })
            .collect();
        w.csv("minmax.csv", &header, &rows)?;
    }
    let message = doc
        .players
        .iter()
        .map(|c| match &c.exact {
            Some(v) => format!("player {}: v = {v} ({})", c.player, c.method.tag()),
            None => format!("player {}: v in [{}, {}] ({})", c.player, c.value_lo, c.value_hi, c.method.tag()),
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome { files: w.files, message, code: EXIT_OK })
}

fn parse_target(game: &Game, target: &[String]) -> Result<Vec<Rational>, CliError> {
    if target.len() != game.n_players() {
        return Err(CliError::Config(format!(
            "target has {} coordinates for {} players",
            target.len(),
            game.n_players()
        )));
    }
    target
        .iter()
        .map(|t| exact::parse_rational(t).ok_or_else(|| CliError::Config(format!("bad target coordinate `{t}`"))))
        .collect()
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let game = load_game(&cfg.spec)?;
    let certs = blackwell_minmax_all(&game)?;
    let eps = cfg.epsilon();
    let mut w = Writer::new(&cfg.out)?;
    let result = match &cfg.target {
        Some(t) => folk_equilibrium(&game, certs.clone(), &parse_target(&game, t)?, eps),
        None => synthesize_with(&game, certs.clone(), eps, cfg.denominator),
    };
    let artifact = match result {
        Ok(a) => a,
        Err(blackwell_core::Error::Infeasible(report)) => {
            if cfg.wants(Format::Json) {
                w.json(
                    "infeasible.json",
                    &serde_json::json!({"schema_version": SCHEMA_VERSION, "infeasible": &*report}),
                )?;
            }
            return Err(blackwell_core::Error::Infeasible(report).into());
        }
        Err(e) => return Err(e.into()),
    };
    let doc = ArtifactDoc::new(&game, &artifact);
    let plays = PlayDoc::new(&game, &artifact)?;
    if cfg.wants(Format::Json) {
        w.json("automaton.json", &doc)?;
        w.json("play.json", &plays)?;
    }
    let mut summary = String::new();
    summary += &format!("game: {}\n", cfg.spec.display());
    summary += &format!("epsilon: {eps}\n");
    let values: Vec<String> = certs
        .iter()
        .map(|c| format!("{} = {}", game.player_name(c.player), exact::format_rational(&c.upper())))
        .collect();
    summary += &format!("minmax values: {}\n", values.join(", "));
    summary += &format!("lottery rounds: {}\n", artifact.rounds);
    summary += "plays:\n";
    for p in &plays.plays {
        summary += &format!(
            "  weight {}: {} payoffs ({})\n",
            p.weight,
            p.description,
            p.payoffs.join(", ")
        );
    }
    summary += &format!("expected payoffs: {}\n", format_vector(&artifact.expected_payoffs));
    summary += &format!("declared gain bound: {}\n", artifact.declared_gain_bound);
    if let Some(t) = artifact.target_tolerance {
        summary += &format!("target tolerance: {t}\n");
    }
    summary += &format!("automaton states: {}\n", artifact.automaton.n_states());
    w.text("summary.txt", &summary)?;
    Ok(Outcome { files: w.files, message: summary.trim_end().to_string(), code: EXIT_OK })
}

pub fn cmd_payoff_set(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let game = load_game(&cfg.spec)?;
    let certs = blackwell_minmax_all(&game)?;
    let hulls = cfg
        .epsilon
        .iter()
        .map(|&e| Ok((e, payoff_set(&game, &certs, e, cfg.denominator)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let feasible = feasible_outcomes(&game, cfg.denominator)?;
    let values: Vec<Rational> = certs.iter().map(|c| c.upper()).collect();
    let doc = PayoffSetDoc::new(&game, &values, &hulls, &feasible);
    let mut w = Writer::new(&cfg.out)?;
    let mut notes = Vec::new();
    if cfg.wants(Format::Json) {
        w.json("payoff_set.json", &doc)?;
    }
    if cfg.wants(Format::Csv) {
        let mut header = vec!["epsilon".to_string(), "vertex".to_string()];
        header.extend(game.players().iter().map(|p| format!("payoff_{p}")));
        header.push("witness".into());
        let mut rows = Vec::new();
        for h in &doc.hulls {
            for (k, v) in h.vertices.iter().enumerate() {
                let mut row = vec![h.epsilon.to_string(), k.to_string()];
                row.extend(v.payoff.iter().cloned());
                row.push(v.witness.clone().unwrap_or_else(|| "closure".into()));
                rows.push(row);
            }
        }
        w.csv("payoff_set.csv", &header, &rows)?;
    }
    if cfg.wants(Format::Svg) {
        if game.n_players() == 2 {
            w.text("payoff_set.svg", &render_payoff_plot(&game, &values, &hulls, &feasible))?;
        } else {
            notes.push(format!(
                "SVG needs two players, this game has {}; wrote CSV only",
                game.n_players()
            ));
        }
    }
    let mut lines: Vec<String> = doc
        .hulls
        .iter()
        .map(|h| {
            let vs: Vec<String> = h.vertices.iter().map(|v| format!("({})", v.payoff.join(", "))).collect();
            format!("epsilon {}: {} vertices {}", h.epsilon, vs.len(), vs.join(" "))
        })
        .collect();
    lines.extend(notes);
    Ok(Outcome { files: w.files, message: lines.join("\n"), code: EXIT_OK })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let game = load_game(&cfg.spec)?;
    let path = cfg.automaton.clone().unwrap_or_else(|| cfg.out.join("automaton.json"));
    let text = fs::read_to_string(&path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })?;
    let doc: ArtifactDoc = serde_json::from_str(&text).map_err(|e| CliError::Load {
        path: path.clone(),
        source: e.into(),
    })?;
    let automaton = StrategyAutomaton::from_doc(&game, &doc.automaton).map_err(|source| CliError::Load {
        path: path.clone(),
        source,
    })?;
    let certs = blackwell_minmax_all(&game)?;
    let artifact = doc.into_artifact(automaton, certs)?;
    let eps = cfg.epsilon();
    let report = verify_equilibrium(&game, &artifact, eps)?;
    let mc = monte_carlo(&game, &artifact.automaton, cfg.horizon.max(game.max_horizon()), cfg.reps, cfg.seed)?;
    let doc = VerifyDoc::new(&game, report, mc);
    let mut w = Writer::new(&cfg.out)?;
    if cfg.wants(Format::Json) {
        w.json("verify.json", &doc)?;
    }
    if cfg.wants(Format::Csv) {
        let header = ["player", "on_path", "best_value", "gain", "method"].map(String::from);
        let rows: Vec<Vec<String>> = doc
            .deviations
            .iter()
            .map(|d| {
                vec![
                    game.player_name(d.player).to_string(),
                    exact::format_rational(&d.on_path),
                    exact::format_rational(&d.best_value),
                    d.gain.to_string(),
                    serde_json::to_value(d.method).expect("method serialises").as_str().unwrap_or("").to_string(),
                ]
            })
            .collect();
        w.csv("verify.csv", &header, &rows)?;
    }
    let mut message = format!(
        "{} at epsilon {}: max gain {}, mass outside {} (bound {})",
        if doc.pass { "pass" } else { "FAIL" },
        eps,
        doc.max_gain,
        doc.mass_check.mass_outside,
        doc.mass_check.bound
    );
    for d in &doc.deviations {
        message += &format!("\n  player {}: gain {}", game.player_name(d.player), d.gain);
    }
    let code = if doc.pass { EXIT_OK } else { EXIT_VERIFY_FAIL };
    Ok(Outcome { files: w.files, message, code })
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Minmax(c) => cmd_minmax(c),
        Command::Synth(c) => cmd_synth(c),
        Command::PayoffSet(c) => cmd_payoff_set(c),
        Command::Verify(c) => cmd_verify(c),
    }
}

/// Caps the global thread pool at `BLACKWELL_THREADS` when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("BLACKWELL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("BLACKWELL_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_OTHER } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match run(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
