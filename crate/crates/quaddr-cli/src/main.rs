//! `quaddr`: batch front end for the quadruple complex engine.

mod compare;
mod config;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quaddr::complex::QuadComplex;
use quaddr::engine::{cartan_total, fixed_p_pages, oracle_total, spectral_pages, total_cohomology};
use quaddr::error::{EngineError, ModelError, Witness};
use quaddr::field::Flatness;
use quaddr::identities::{cup_laws, run_suite};
use quaddr::model::SignConventions;
use quaddr::natural::{commutation_report, induced_map, ComplexMap, GroupHom, Morphism};
use quaddr::registry::build_model;
use quaddr::structure::derived_connection;

use crate::config::{fingerprint, load_model, load_morphism, model_hash, parse_override, Options};
use crate::report::{CheckRow, Induced, Pages, Report, WitnessRow};

const CACHE_ENV: &str = "QUADDR_CACHE_DIR";
const DEFAULT_DEGREE: usize = 4;
const DEFAULT_R: usize = 3;
const PREFLIGHT_DEGREE: usize = 2;
const SEED: u64 = 0;

#[derive(Parser)]
#[command(name = "quaddr", version, about = "Exact de Rham cohomology of flat groupoid quotient stacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every identity of the complex, cup-product laws and flatness.
    Validate(RunArgs),
    /// Total cohomology, summed over sectors.
    Cohomology(RunArgs),
    /// Pages of the spectral sequence of the total filtration.
    Pages(RunArgs),
    /// Pages of the double complex at fixed form degree p.
    FixedP(RunArgs),
    /// Cohomology of the simplicial de Rham double complex.
    Oracle(RunArgs),
    /// Cohomology of the Cartan model.
    Cartan(RunArgs),
    /// Pullback along a morphism of models.
    Natural(NaturalArgs),
    /// Differences between two JSON reports.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long = "r")]
    r_max: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON sign conventions replacing the certified defaults. Only for
    /// mutation testing: results under an override are meaningless.
    #[arg(long, value_name = "JSON")]
    unsafe_sign_override: Option<String>,
}

#[derive(Args)]
struct NaturalArgs {
    #[arg(long)]
    morphism: PathBuf,
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A nonzero exit, with the witnesses that justify it.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub witnesses: Vec<Witness>,
}

impl Failure {
    fn rows(&self) -> Vec<WitnessRow> {
        let row = if self.code == 1 { WitnessRow::violation } else { WitnessRow::rejection };
        self.witnesses.iter().map(row).collect()
    }

    pub fn config(detail: impl Into<String>) -> Self {
        Failure { code: 2, witnesses: vec![Witness::new("configuration", None, detail)] }
    }

    fn violations(witnesses: Vec<Witness>) -> Self {
        Failure { code: 1, witnesses }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Axiom { identity } => Failure::violations(vec![Witness::new(identity, None, "model axiom")]),
            ModelError::Kernel(k) => {
                Failure { code: 2, witnesses: vec![Witness::new("exact kernel", None, k.to_string())] }
            }
            other => Failure::config(other.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::SectorLeak(w) | EngineError::Violation(w) => Failure::violations(vec![w]),
            EngineError::Refused(msg) => Failure { code: 2, witnesses: vec![Witness::new("refused", None, msg)] },
            EngineError::Model(m) => m.into(),
            EngineError::Kernel(k) => {
                Failure { code: 2, witnesses: vec![Witness::new("exact kernel", None, k.to_string())] }
            }
        }
    }
}

fn format_of(flag: Option<Format>, options: &Options) -> Result<Format, Failure> {
    match (flag, options.format.as_deref()) {
        (Some(f), _) => Ok(f),
        (None, None) => Ok(Format::Json),
        (None, Some(s)) => Format::from_str(s, true).map_err(|_| Failure::config(format!("unknown format {s:?}"))),
    }
}

fn set_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn emit(report: &Report, format: Format) {
    let mut out = io::stdout().lock();
    match format {
        Format::Json => {
            let _ = out.write_all(report.to_json().as_bytes());
        }
        Format::Csv => {
            let _ = report.write_csv(&mut out);
        }
    }
    for w in &report.witnesses {
        eprintln!("{}", w.message);
    }
}

struct Job {
    command: &'static str,
    max_degree: usize,
    r_max: usize,
    p: usize,
    conventions: SignConventions,
}

impl Job {
    fn parameters(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::from([("max_degree".to_string(), self.max_degree)]);
        match self.command {
            "pages" => {
                m.insert("r_max".into(), self.r_max);
            }
            "fixed-p" => {
                m.insert("r_max".into(), self.r_max);
                m.insert("p".into(), self.p);
            }
            _ => {}
        }
        m
    }
}

fn compute(cx: &QuadComplex, job: &Job, report: &mut Report) -> Result<(), Failure> {
    let d = job.max_degree;
    if job.command != "validate" {
        let pre = run_suite(cx, d.min(PREFLIGHT_DEGREE))?.witnesses();
        if !pre.is_empty() {
            return Err(Failure::violations(pre));
        }
    }
    match job.command {
        "validate" => validate(cx, d, report)?,
        "cohomology" => {
            let r = total_cohomology(cx, d)?;
            report.set_dims(r.dims);
            report.stabilized = r.stabilized;
        }
        "oracle" => {
            let r = oracle_total(cx, d)?;
            report.set_dims(r.dims);
            report.stabilized = r.stabilized;
        }
        "cartan" => {
            let r = cartan_total(cx, d)?;
            report.set_dims(r.dims);
            report.stabilized = r.stabilized;
        }
        "pages" => {
            let p = spectral_pages(cx, d, job.r_max)?;
            report.set_dims(p.cohomology.clone());
            report.pages = Pages::from_spectral(&p);
            report.stabilized = total_cohomology(cx, d)?.stabilized;
        }
        "fixed-p" => {
            let p = fixed_p_pages(cx, d, job.p, job.r_max)?;
            report.set_dims(p.cohomology.clone());
            report.pages = Pages::from_spectral(&p);
            report.stabilized = total_cohomology(cx, d)?.stabilized;
        }
        other => unreachable!("{other} is dispatched elsewhere"),
    }
    Ok(())
}

fn validate(cx: &QuadComplex, d: usize, report: &mut Report) -> Result<(), Failure> {
    let mut suite = run_suite(cx, d)?;
    suite.absorb(cup_laws(cx, 200, 100, SEED)?);
    let model = cx.model();
    let flat = match model.check_flatness() {
        Flatness::Flat => None,
        Flatness::NotInvolutive { i, j, bracket, .. } => {
            Some(Witness::new("flatness", None, format!("[θ{i},θ{j}] = {bracket} leaves the distribution")))
        }
        Flatness::Degenerate(why) => Some(Witness::new("flatness", None, why)),
    };
    suite.push("flatness", flat);
    let conn = derived_connection(cx.tower())?;
    suite.push(
        "connection curvature",
        (!conn.curvature_vanishes)
            .then(|| Witness::new("connection curvature", None, "curvature of the derived connection is nonzero")),
    );
    suite.push(
        "connection difference formula",
        (!conn.difference_formula).then(|| {
            Witness::new("connection difference formula", None, "difference of lifts disagrees with the formula")
        }),
    );
    report.checks = Some(
        suite
            .outcomes
            .iter()
            .map(|o| CheckRow { identity: o.identity.clone(), checked: o.checked, passed: o.witness.is_none() })
            .collect(),
    );
    report.stabilized = true;
    let ws = suite.witnesses();
    if ws.is_empty() {
        Ok(())
    } else {
        Err(Failure::violations(ws))
    }
}

fn cache_path(key: &str) -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(|dir| Path::new(&dir).join(format!("{key}.json")))
}

fn cached(key: &str) -> Option<Report> {
    let text = fs::read_to_string(cache_path(key)?).ok()?;
    serde_json::from_str(&text).ok()
}

fn store(key: &str, report: &Report) {
    if let Some(path) = cache_path(key) {
        if let Some(dir) = path.parent() {
            let _ = fs::create_dir_all(dir);
        }
        let _ = fs::write(path, report.to_json());
    }
}

fn finish(mut report: Report, result: Result<(), Failure>, format: Format, cache_key: Option<&str>) -> ExitCode {
    match result {
        Ok(()) => {
            if let Some(key) = cache_key {
                store(key, &report);
            }
            emit(&report, format);
            ExitCode::SUCCESS
        }
        Err(f) => {
            report.witnesses = f.rows();
            emit(&report, format);
            ExitCode::from(f.code)
        }
    }
}

fn run_model(command: &'static str, args: RunArgs) -> ExitCode {
    let fallback = args.format.unwrap_or(Format::Json);
    let loaded = match load_model(&args.model) {
        Ok(m) => m,
        Err(f) => return finish(Report::new(command, String::new()), Err(f), fallback, None),
    };
    let format = match format_of(args.format, &loaded.options) {
        Ok(f) => f,
        Err(f) => return finish(Report::new(command, String::new()), Err(f), fallback, None),
    };
    let conventions = match args.unsafe_sign_override.as_deref().map(parse_override).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(f) => return finish(Report::new(command, String::new()), Err(f), format, None),
    };
    let job = Job {
        command,
        max_degree: args.max_degree.or(loaded.options.max_degree).unwrap_or(DEFAULT_DEGREE),
        r_max: args.r_max.or(loaded.options.r_max).unwrap_or(DEFAULT_R).max(1),
        p: args.p.or(loaded.options.p).unwrap_or(0),
        conventions,
    };
    set_jobs(args.jobs);
    let mut report = Report::new(command, model_hash(&loaded.config, &job.conventions));
    report.parameters = job.parameters();
    let key = fingerprint(&(env!("CARGO_PKG_VERSION"), command, &report.model_hash, &report.parameters));
    if let Some(hit) = cached(&key) {
        emit(&hit, format);
        return ExitCode::SUCCESS;
    }
    let result = build_model(&loaded.config)
        .map_err(Failure::from)
        .and_then(|m| Ok(QuadComplex::new(Arc::new(m.with_conventions(job.conventions)))?))
        .and_then(|cx| compute(&cx, &job, &mut report));
    finish(report, result, format, Some(&key))
}

fn run_natural(args: NaturalArgs) -> ExitCode {
    let fallback = args.format.unwrap_or(Format::Json);
    let loaded = match load_morphism(&args.morphism) {
        Ok(m) => m,
        Err(f) => return finish(Report::new("natural", String::new()), Err(f), fallback, None),
    };
    let options = loaded.config.options.clone().unwrap_or_default();
    let format = match format_of(args.format, &options) {
        Ok(f) => f,
        Err(f) => return finish(Report::new("natural", String::new()), Err(f), fallback, None),
    };
    set_jobs(args.jobs);
    let d = args.max_degree.or(options.max_degree).unwrap_or(DEFAULT_DEGREE);
    let mut report = Report::new(
        "natural",
        fingerprint(&(
            &loaded.source.config,
            &loaded.target.config,
            &loaded.config.group_matrix,
            &loaded.config.elements,
            &loaded.config.base_images,
        )),
    );
    report.parameters = BTreeMap::from([("max_degree".to_string(), d)]);
    let result = natural(&loaded, d, &mut report);
    finish(report, result, format, None)
}

fn natural(loaded: &config::LoadedMorphism, d: usize, report: &mut Report) -> Result<(), Failure> {
    let group = match (&loaded.config.group_matrix, &loaded.config.elements) {
        (Some(m), None) => GroupHom::Matrix(m.clone()),
        (None, Some(e)) => GroupHom::Elements(e.clone()),
        _ => return Err(Failure::config("give exactly one of group_matrix and elements")),
    };
    let source = QuadComplex::new(Arc::new(build_model(&loaded.source.config)?))?;
    let target = QuadComplex::new(Arc::new(build_model(&loaded.target.config)?))?;
    let images: Vec<&str> = loaded.config.base_images.iter().map(String::as_str).collect();
    let morphism = Morphism::parse(source.model(), target.model(), group, &images)?;
    let map = ComplexMap::new(&source, &target, morphism)?;
    let ws = commutation_report(&map, d, 50, SEED)?.witnesses();
    if !ws.is_empty() {
        return Err(Failure::violations(ws));
    }
    let h = induced_map(&map, d)?;
    report.set_dims(h.ranks.clone());
    report.stabilized = total_cohomology(&source, d)?.stabilized && total_cohomology(&target, d)?.stabilized;
    report.induced = Some(Induced {
        isomorphism: h.is_isomorphism(),
        source_dims: h.source_dims,
        target_dims: h.target_dims,
        ranks: h.ranks,
    });
    Ok(())
}

fn read_report(path: &Path) -> Result<Report, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn run_compare(args: CompareArgs) -> ExitCode {
    let format = args.format.unwrap_or(Format::Json);
    let reports = read_report(&args.a).and_then(|a| Ok((a, read_report(&args.b)?)));
    let diff = match reports {
        Ok((a, b)) => match compare::incompatible(&a, &b) {
            Some(why) => Err(Failure { code: 2, witnesses: vec![Witness::new("comparable ranges", None, why)] }),
            None => Ok(compare::compare(&a, &b)),
        },
        Err(f) => Err(f),
    };
    let (diff, code) = match diff {
        Ok(d) => {
            let code = if d.is_empty() { 0 } else { 1 };
            (d, code)
        }
        Err(f) => {
            let d = compare::Diff { command: "compare".into(), witnesses: f.rows(), ..Default::default() };
            (d, f.code)
        }
    };
    let mut out = io::stdout().lock();
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&diff).expect("diffs serialize");
            s.push('\n');
            let _ = out.write_all(s.as_bytes());
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(&mut out);
            let _ = w.write_record(["table", "degree", "a", "b"]);
            for x in &diff.dims {
                let _ = w.write_record(["dims".to_string(), x.degree.to_string(), x.a.to_string(), x.b.to_string()]);
            }
            let _ = w.write_record(["table", "page", "m", "n", "dim_a", "dim_b", "d_rank_a", "d_rank_b"]);
            for x in &diff.pages {
                let _ = w.write_record([
                    "pages".to_string(),
                    x.page.clone(),
                    x.m.to_string(),
                    x.n.to_string(),
                    x.dim[0].to_string(),
                    x.dim[1].to_string(),
                    x.d_rank[0].to_string(),
                    x.d_rank[1].to_string(),
                ]);
            }
            let _ = w.flush();
        }
    }
    for w in &diff.witnesses {
        eprintln!("{}", w.message);
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate(a) => run_model("validate", a),
        Command::Cohomology(a) => run_model("cohomology", a),
        Command::Pages(a) => run_model("pages", a),
        Command::FixedP(a) => run_model("fixed-p", a),
        Command::Oracle(a) => run_model("oracle", a),
        Command::Cartan(a) => run_model("cartan", a),
        Command::Natural(a) => run_natural(a),
        Command::Compare(a) => run_compare(a),
    }
}
