//! Command-line front end: configuration, dispatch and artifacts on disk.

pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::assembly::{run_pipeline, verify_globals, Pipeline, PipelineOptions};
use crate::error::{Error, Result};
use crate::lemma1::{construct_lemma1_with, default_exponent_cap, verify_lemma1, Lemma1Construction, Lemma1Input, Lemma1Options};
use crate::lemma2::{construct_lemma2, verify_lemma2, Lemma2Construction, RankOneChain};
use crate::linalg::{real, rank_one, Projection, Real};
use crate::monomial::{choose_r, construct_lemma4, grid_targets, verify_block, BlockFrame, BlockMonomial, MonomialOptions};
use crate::properties::{evaluator_suite, perturbation_suite};
use crate::report::Report;
use crate::wordexpr::{eval_literal, BigExponent, SpectralEvaluator, WordExpr};

use output::{
    format_csv, trajectory_rows, write_json, AssemblyDoc, BlockDoc, ConstructionDoc, ErrorRecord, Lemma1Doc,
    Lemma2Doc, ReportDoc,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONSTRUCTION: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Run parameters. Every field has a default, so `{}` is a valid config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Number of blocks in the assembled run.
    pub k: usize,
    /// Per-block tolerances; defaults to `epsilon` repeated `k` times.
    pub eps_schedule: Option<Vec<f64>>,
    /// Tolerance for single-construction subcommands and the default schedule.
    pub epsilon: f64,
    /// Grid size override.
    pub r: Option<usize>,
    /// Target angles (radians) for `lemma1` and `lemma2`; defaults to the grid.
    pub angles: Option<Vec<f64>>,
    /// Bound on idempotence defects in the hygiene report.
    pub projection_tol: f64,
    pub exponent_cap: BigExponent,
    /// Longest word `expand-word` will write out.
    pub literal_cap: u64,
    pub precision_bits: usize,
    pub seed: u64,
    /// Random cases per property suite in `verify-all`.
    pub property_cases: usize,
    /// Word to expand; defaults to the block word at `epsilon`.
    pub word: Option<WordExpr>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 4,
            eps_schedule: None,
            epsilon: 0.5,
            r: None,
            angles: None,
            projection_tol: 1e-10,
            exponent_cap: default_exponent_cap(),
            literal_cap: 1_000_000,
            precision_bits: real::DEFAULT_PRECISION_BITS,
            seed: 0,
            property_cases: 50,
            word: None,
        }
    }
}

fn eps_in_range(e: f64) -> Result<()> {
    if e > 0.0 && e < 1.0 {
        Ok(())
    } else {
        Err(Error::EpsOutOfRange(e))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        eps_in_range(self.epsilon)?;
        if let Some(s) = &self.eps_schedule {
            if s.len() != self.k {
                return Err(Error::Config(format!("k = {} but eps_schedule has {} entries", self.k, s.len())));
            }
            s.iter().try_for_each(|&e| eps_in_range(e))?;
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.r == Some(0) {
            return Err(Error::Config("r must be positive".into()));
        }
        if let (Some(a), Some(r)) = (&self.angles, self.r) {
            if a.len() != r + 1 {
                return Err(Error::Config(format!("r = {r} needs {} angles, got {}", r + 1, a.len())));
            }
        }
        if !(self.projection_tol > 0.0) {
            return Err(Error::Config("projection_tol must be positive".into()));
        }
        if self.exponent_cap.is_zero() || self.literal_cap == 0 {
            return Err(Error::Config("caps must be positive".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Vec<f64> {
        self.eps_schedule.clone().unwrap_or_else(|| vec![self.epsilon; self.k])
    }

    fn grid_r(&self) -> usize {
        self.r.or_else(|| self.angles.as_ref().map(|a| a.len().saturating_sub(1))).unwrap_or_else(|| choose_r(self.epsilon))
    }

    fn target_angles(&self, r: usize) -> Vec<Real> {
        match &self.angles {
            Some(a) => a.iter().map(|&x| Real::from_f64(x)).collect(),
            None => grid_targets(r),
        }
    }

    fn lemma1_options(&self) -> Lemma1Options {
        Lemma1Options { exponent_cap: self.exponent_cap.clone(), ..Lemma1Options::default() }
    }

    fn monomial_options(&self) -> MonomialOptions {
        let mut opts = MonomialOptions { r_override: self.r, ..MonomialOptions::default() };
        opts.corollary3.lemma1 = self.lemma1_options();
        opts
    }

    fn pipeline_options(&self) -> PipelineOptions {
        let mut monomial = self.monomial_options();
        monomial.r_override = None;
        PipelineOptions { exponent_cap: self.exponent_cap.clone(), monomial }
    }
}

#[derive(Debug, Parser)]
#[command(name = "projdiv", version, about = "Five-projection norm divergence, truncated to finitely many blocks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Comma-separated per-block tolerances.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Comma-separated target angles in radians.
    #[arg(long, global = true, value_delimiter = ',')]
    pub angles: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub exponent_cap: Option<String>,
    #[arg(long, global = true)]
    pub literal_cap: Option<u64>,
    #[arg(long, global = true)]
    pub precision_bits: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub property_cases: Option<usize>,
    /// JSON file holding a word tree for `expand-word`.
    #[arg(long, global = true)]
    pub word: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Chain of projections approximating the target directions.
    Lemma1,
    /// Companion projection for a lemma1 chain.
    Lemma2,
    /// Single block word and its overlap.
    Monomial,
    /// Global operators for the block schedule.
    Assemble,
    /// Divergence certificate and trajectory.
    Certify,
    /// Every invariant suite.
    VerifyAll,
    /// Literal expansion of a word under the cap.
    ExpandWord,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Config file (if any) with flags applied on top, validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => read_json(path)?,
        None => RunConfig::default(),
    };
    if let Some(k) = cli.k {
        cfg.k = k;
    }
    if let Some(e) = &cli.eps {
        cfg.eps_schedule = Some(e.clone());
        if cli.k.is_none() {
            cfg.k = e.len();
        }
    }
    if let Some(e) = cli.epsilon {
        cfg.epsilon = e;
    }
    if cli.r.is_some() {
        cfg.r = cli.r;
    }
    if let Some(a) = &cli.angles {
        cfg.angles = Some(a.clone());
    }
    if let Some(c) = &cli.exponent_cap {
        cfg.exponent_cap = c.parse().map_err(|e: Error| Error::Config(format!("exponent cap: {e}")))?;
    }
    if let Some(c) = cli.literal_cap {
        cfg.literal_cap = c;
    }
    if let Some(p) = cli.precision_bits {
        cfg.precision_bits = p;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.property_cases {
        cfg.property_cases = n;
    }
    if let Some(w) = &cli.word {
        cfg.word = Some(read_json(w)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::EpsOutOfRange(_) | Error::InvalidExponent(_) => EXIT_CONFIG,
        _ => EXIT_CONSTRUCTION,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::EpsOutOfRange(_) => "eps out of range",
        Error::Config(_) | Error::InvalidExponent(_) => "config error",
        Error::ToleranceTooTight(_) => "tolerance too tight",
        Error::WordTooLong { .. } => "word too long",
        Error::Io(_) => "io error",
        _ => "construction failure",
    }
}

pub fn error_record(err: &Error) -> ErrorRecord {
    ErrorRecord { kind: error_kind(err).into(), message: err.to_string(), exit_code: exit_code_for(err) }
}

/// Parses arguments, runs, and returns the exit status. Errors are printed
/// to stderr and written to `error.json` in the output directory.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    let outcome = resolve_config(&cli).and_then(|cfg| run(cli.command, &cfg, &cli.out));
    match outcome {
        Ok(pass) => {
            if pass {
                EXIT_PASS
            } else {
                EXIT_VERIFICATION
            }
        }
        Err(err) => {
            let record = error_record(&err);
            let text = output::to_json(&record).unwrap_or_else(|_| format!("{err}\n"));
            eprint!("{text}");
            if std::fs::create_dir_all(&cli.out).is_ok() {
                let _ = std::fs::write(cli.out.join("error.json"), &text);
            }
            record.exit_code
        }
    }
}

/// Runs one subcommand; `Ok(false)` means a verification failed.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<bool> {
    cfg.validate()?;
    real::set_precision_bits(cfg.precision_bits);
    std::fs::create_dir_all(out)?;
    let stale = out.join("error.json");
    if stale.exists() {
        std::fs::remove_file(stale)?;
    }
    match command {
        Command::Lemma1 => run_lemma1(cfg, out),
        Command::Lemma2 => run_lemma2(cfg, out),
        Command::Monomial => run_monomial(cfg, out),
        Command::Assemble => run_assemble(cfg, out),
        Command::Certify => run_certify(cfg, out),
        Command::VerifyAll => run_verify_all(cfg, out),
        Command::ExpandWord => run_expand_word(cfg, out),
    }
}

fn finish(out: &Path, construction: Option<&ConstructionDoc>, reports: Vec<Report>) -> Result<bool> {
    if let Some(doc) = construction {
        write_json(&out.join("construction.json"), doc)?;
    }
    let doc = ReportDoc::new(reports);
    write_json(&out.join("report.json"), &doc)?;
    Ok(doc.pass)
}

fn build_lemma1(cfg: &RunConfig) -> Result<(BlockFrame, Lemma1Construction)> {
    let r = cfg.grid_r();
    let frame = BlockFrame::new(r);
    let input = Lemma1Input {
        e: frame.e(),
        e_prime: frame.e_prime(),
        target_angles: cfg.target_angles(r),
        epsilon: cfg.epsilon,
        ancillas: frame.chain_ancillas(),
    };
    Ok((frame, construct_lemma1_with(&input, &cfg.lemma1_options())?))
}

fn run_lemma1(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let (_, c) = build_lemma1(cfg)?;
    let rep = verify_lemma1(&c, &c.targets);
    finish(out, Some(&ConstructionDoc::Lemma1(Lemma1Doc::new(&c))), vec![rep])
}

fn build_lemma2(cfg: &RunConfig) -> Result<(Lemma1Construction, RankOneChain, Lemma2Construction)> {
    let (frame, c1) = build_lemma1(cfg)?;
    let chain = RankOneChain::from_lemma1(&c1);
    let c2 = construct_lemma2(&chain, cfg.epsilon, &frame.q_ancillas())?;
    Ok((c1, chain, c2))
}

fn run_lemma2(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let (c1, chain, c2) = build_lemma2(cfg)?;
    let doc = ConstructionDoc::Lemma2 { lemma1: Lemma1Doc::new(&c1), lemma2: Lemma2Doc::new(&c2) };
    let reports = vec![verify_lemma1(&c1, &c1.targets), verify_lemma2(&c2, &chain)];
    finish(out, Some(&doc), reports)
}

fn run_monomial(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let b = construct_lemma4(cfg.epsilon, &cfg.monomial_options())?;
    let reports = block_reports(&b);
    finish(out, Some(&ConstructionDoc::Monomial(BlockDoc::new(&b))), reports)
}

fn block_reports(b: &BlockMonomial) -> Vec<Report> {
    let c = &b.construction;
    vec![verify_lemma1(&c.lemma1, &c.lemma1.targets), verify_lemma2(&c.lemma2, &c.chain), verify_block(b)]
}

fn pipeline(cfg: &RunConfig) -> Result<Pipeline> {
    run_pipeline(&cfg.schedule(), &cfg.pipeline_options())
}

fn run_assemble(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let run = pipeline(cfg)?;
    let doc = ConstructionDoc::Assembly(AssemblyDoc::new(&run.layout, &run.blocks));
    finish(out, Some(&doc), vec![verify_globals(&run.layout, &run.globals)])
}

fn write_certificate(run: &Pipeline, out: &Path) -> Result<()> {
    write_json(&out.join("certificate.json"), &run.certificate)?;
    std::fs::write(out.join("trajectory.csv"), format_csv(&trajectory_rows(&run.trajectory))?)?;
    Ok(())
}

fn run_certify(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let run = pipeline(cfg)?;
    write_certificate(&run, out)?;
    Ok(run.certificate.pass)
}

/// Every projection a run produces, with a label.
pub fn produced_projections(run: &Pipeline) -> Result<Vec<(String, Projection)>> {
    let mut all = Vec::new();
    for (i, b) in run.blocks.iter().enumerate() {
        let c = &b.construction;
        let tag = |what: &str| format!("block[{}].{what}", i + 1);
        all.push((tag("P"), b.p.clone()));
        all.push((tag("Q"), b.q.clone()));
        all.push((tag("E"), b.e.clone()));
        for (s, p) in c.lemma1.chain.iter().enumerate() {
            all.push((tag(&format!("chain[{s}]")), p.clone()));
        }
        for (t, v) in c.lemma2.qs.iter().enumerate() {
            all.push((tag(&format!("q_part[{}]", t + 1)), rank_one(v)?));
        }
    }
    let g = &run.globals;
    for (name, p) in [("P", &g.p), ("Q", &g.q), ("R", &g.r), ("S", &g.s), ("E", &g.e)] {
        all.push((format!("global.{name}"), p.clone()));
    }
    Ok(all)
}

pub fn hygiene_report(run: &Pipeline, projection_tol: f64) -> Result<Report> {
    let mut rep = Report::new("hygiene");
    for (name, p) in produced_projections(run)? {
        let d = p.defects();
        rep.at_most(format!("idempotence[{name}]"), d.idempotence, projection_tol);
        rep.at_most(format!("symmetry[{name}]"), d.symmetry, crate::linalg::SYM_TOL);
        rep.at_most(format!("spectrum[{name}]"), d.spectrum, crate::linalg::SPECTRUM_TOL);
    }
    Ok(rep)
}

fn run_verify_all(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let run = pipeline(cfg)?;
    write_certificate(&run, out)?;
    let mut reports = Vec::new();
    let mut seen = Vec::new();
    for b in &run.blocks {
        if !seen.contains(&b.eps.to_bits()) {
            seen.push(b.eps.to_bits());
            reports.extend(block_reports(b));
        }
    }
    reports.push(verify_globals(&run.layout, &run.globals));
    reports.push(run.certificate.report.clone());
    reports.push(hygiene_report(&run, cfg.projection_tol)?);
    reports.push(perturbation_suite(cfg.seed, cfg.property_cases)?);
    reports.push(evaluator_suite(cfg.seed, cfg.property_cases)?);
    let doc = ConstructionDoc::Assembly(AssemblyDoc::new(&run.layout, &run.blocks));
    finish(out, Some(&doc), reports)
}

#[derive(Serialize)]
struct Expansion<'a> {
    word: &'a WordExpr,
    length: BigExponent,
    expansion: String,
    report: Report,
}

fn run_expand_word(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let (word, block) = match &cfg.word {
        Some(w) => (w.clone(), None),
        None => {
            let b = construct_lemma4(cfg.epsilon, &cfg.monomial_options())?;
            (b.word.clone(), Some(b))
        }
    };
    let expansion = word.expand(cfg.literal_cap)?;
    let mut rep = Report::new("expansion");
    if let Some(b) = &block {
        let letters = b.letters();
        let x = b.frame.e();
        let literal = eval_literal(&word, &letters, &x, cfg.literal_cap)?;
        let spectral = SpectralEvaluator::new(&letters).apply(&word, &x)?;
        rep.at_most("literal_matches_spectral", literal.sub(&spectral).max_abs().to_f64(), 1e-8);
    }
    let doc = Expansion { word: &word, length: word.word_length(), expansion, report: rep.clone() };
    write_json(&out.join("report.json"), &doc)?;
    Ok(rep.all_pass())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("projdiv").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_validate() {
        let cfg = resolve_config(&parse(&["certify"])).unwrap();
        assert_eq!(cfg.schedule(), vec![0.5; 4]);
    }

    #[test]
    fn flags_override() {
        let cfg = resolve_config(&parse(&["lemma1", "--r", "1", "--epsilon", "0.25"])).unwrap();
        assert_eq!(cfg.r, Some(1));
        assert_eq!(cfg.epsilon, 0.25);
        let cfg = resolve_config(&parse(&["certify", "--eps", "0.5,0.4"])).unwrap();
        assert_eq!(cfg.k, 2);
    }

    #[test]
    fn bad_eps_is_a_config_error() {
        let err = resolve_config(&parse(&["certify", "--epsilon", "1.5"])).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_CONFIG);
        assert_eq!(error_record(&err).kind, "eps out of range");
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig { eps_schedule: Some(vec![0.5, 0.25]), k: 2, ..RunConfig::default() };
        let text = output::to_json(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(output::to_json(&back).unwrap(), text);
    }
}
