//! Command-line entry point.
//!
//! Every subcommand resolves a [`RunConfig`] from an optional TOML file and
//! flag overrides, writes its artifacts under `--out`, and records a
//! `<subcommand>.manifest.toml` next to them. A manifest is itself a valid
//! config file: passing it back with `--config` reproduces the run.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::claims::{
    read_beneficiaries, read_claims, write_beneficiaries, write_claims, Beneficiary, Claim,
    ClaimsByBeneficiary, CodeMap, StudyConfig, DEFAULT_COHORTS,
};
use crate::error::{Error, Result};
use crate::experiments::{
    compute_trajectory, run_screening, run_window_sweep, write_diff_csv, write_screening_csv,
    write_sweep_csv, write_trajectory_csv, ScreeningOptions, ScreeningReport,
};
use crate::features::{
    build_matrix, write_feature_csv, write_feature_meta, Cohort, VariableSet, WindowSplit,
};
use crate::learners::{ClassifierSpec, Family, Sampling};
use crate::synth::{generate_population, CohortPreset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "claims-mortality", version, about = "Six-month mortality prediction from claims")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Seed for every random draw of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism). Results do not
    /// depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct DataArgs {
    #[arg(long)]
    beneficiaries: Option<PathBuf>,
    #[arg(long)]
    claims: Option<PathBuf>,
    #[arg(long)]
    code_map: Option<PathBuf>,
    /// Comma-separated cohort group names.
    #[arg(long, value_delimiter = ',')]
    cohorts: Option<Vec<String>>,
}

#[derive(Debug, Args, Default)]
struct SynthArgs {
    /// Comma-separated preset names.
    #[arg(long, value_delimiter = ',')]
    preset: Option<Vec<String>>,
    /// Beneficiaries per preset.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    decay_tau: Option<f64>,
    #[arg(long)]
    gap_scale: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct ScreenArgs {
    /// Comma-separated classifier families.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    #[arg(long)]
    n_bootstrap: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct SpecArgs {
    /// Spec file written by `screen` (best_spec.toml).
    #[arg(long)]
    spec_file: Option<PathBuf>,
    /// Inline spec: classifier family.
    #[arg(long)]
    family: Option<String>,
    /// Inline spec: `name=value;...` parameters.
    #[arg(long)]
    params: Option<String>,
    /// Inline spec: none, up or down.
    #[arg(long)]
    sampling: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic beneficiary and claims files.
    Synth(SynthArgs),
    /// Write feature matrices per cohort and variable set.
    Features {
        #[command(flatten)]
        data: DataArgs,
        /// Window boundary month for augmented features; 0 for no split.
        #[arg(long)]
        boundary: Option<u32>,
    },
    /// Tune and validate classifiers per cohort.
    Screen {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        screen: ScreenArgs,
    },
    /// Refit a chosen spec on every window split.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        n_bootstrap: Option<usize>,
    },
    /// Mean distinct diagnoses per month by outcome.
    Trajectory {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Synthesize (unless data is given), screen, sweep and trajectory.
    All {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        synth: SynthArgs,
        #[command(flatten)]
        screen: ScreenArgs,
    },
}

/// Input files and cohort selection.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub beneficiaries: Option<PathBuf>,
    pub claims: Option<PathBuf>,
    pub code_map: Option<PathBuf>,
    pub cohorts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub presets: Vec<CohortPreset>,
    pub n: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            presets: CohortPreset::defaults(),
            n: 4000,
        }
    }
}

/// Replacement candidates for one tuner parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverride {
    pub family: String,
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenConfig {
    pub families: Vec<String>,
    pub variable_sets: Vec<String>,
    pub sampling: Vec<String>,
    pub grid: Vec<GridOverride>,
    pub passes: usize,
    pub n_bootstrap: usize,
    pub refit_on_development: bool,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        let d = ScreeningOptions::default();
        ScreenConfig {
            families: d.families.iter().map(|f| f.to_string()).collect(),
            variable_sets: d.variable_sets.iter().map(|v| v.to_string()).collect(),
            sampling: d.sampling.iter().map(|s| s.to_string()).collect(),
            grid: vec![],
            passes: d.passes,
            n_bootstrap: d.n_bootstrap,
            refit_on_development: d.refit_on_development,
        }
    }
}

/// A classifier choice in file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub family: String,
    #[serde(default)]
    pub params: String,
    #[serde(default = "default_sampling")]
    pub sampling: String,
}

fn default_sampling() -> String {
    Sampling::None.to_string()
}

impl SpecConfig {
    fn from_spec(spec: &ClassifierSpec) -> Self {
        SpecConfig {
            family: spec.family.to_string(),
            params: spec.params_string(),
            sampling: spec.sampling.to_string(),
        }
    }

    fn to_spec(&self) -> Result<ClassifierSpec> {
        ClassifierSpec::parse(self.family.parse()?, &self.params, self.sampling.parse()?)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Spec per cohort; the `default` key applies to cohorts not listed.
    pub specs: BTreeMap<String, SpecConfig>,
    pub n_bootstrap: Option<usize>,
}

/// Provenance block of a manifest; ignored when the file is read back as
/// a config.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifestInfo {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub artifacts: BTreeMap<String, String>,
}

/// The full resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub study: StudyConfig,
    pub data: DataConfig,
    pub synth: SynthConfig,
    pub screen: ScreenConfig,
    pub sweep: SweepConfig,
    pub manifest: Option<ManifestInfo>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
    }

    fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Hash of the configuration without its manifest block.
    pub fn hash(&self) -> Result<String> {
        let mut bare = self.clone();
        bare.manifest = None;
        Ok(hex::encode(Sha256::digest(bare.to_toml()?.as_bytes())))
    }

    fn require_seed(&self) -> Result<u64, Usage> {
        self.seed
            .ok_or_else(|| Usage("a seed is required (--seed or `seed` in the config)".into()))
    }

    fn cohorts(&self) -> Vec<String> {
        if self.data.cohorts.is_empty() {
            DEFAULT_COHORTS.iter().map(|s| s.to_string()).collect()
        } else {
            self.data.cohorts.clone()
        }
    }

    fn code_map(&self) -> Result<CodeMap> {
        match &self.data.code_map {
            Some(p) => CodeMap::load(p),
            None => Ok(CodeMap::bundled()),
        }
    }

    fn screening_options(&self) -> Result<ScreeningOptions> {
        let s = &self.screen;
        Ok(ScreeningOptions {
            families: s.families.iter().map(|f| f.parse()).collect::<Result<_>>()?,
            variable_sets: s.variable_sets.iter().map(|v| v.parse()).collect::<Result<_>>()?,
            sampling: s.sampling.iter().map(|v| v.parse()).collect::<Result<_>>()?,
            grid_overrides: s
                .grid
                .iter()
                .map(|g| Ok((g.family.parse::<Family>()?, g.param.clone(), g.values.clone())))
                .collect::<Result<_>>()?,
            passes: s.passes,
            n_bootstrap: s.n_bootstrap,
            refit_on_development: s.refit_on_development,
        })
    }
}

/// A usage error: bad flags or a missing precondition.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(Usage),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Validation(_) | Error::Schema(_) | Error::Csv(_) => EXIT_DATA,
        Error::Io { .. } | Error::InvalidInput(_) | Error::NotImplemented(_) => EXIT_RUNTIME,
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("usage").trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    let threads = cli
        .global
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(Usage(msg))) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}

fn apply_data(cfg: &mut RunConfig, data: DataArgs) {
    if data.beneficiaries.is_some() {
        cfg.data.beneficiaries = data.beneficiaries;
    }
    if data.claims.is_some() {
        cfg.data.claims = data.claims;
    }
    if data.code_map.is_some() {
        cfg.data.code_map = data.code_map;
    }
    if let Some(c) = data.cohorts {
        cfg.data.cohorts = c;
    }
}

fn apply_synth(cfg: &mut RunConfig, args: SynthArgs) -> Result<()> {
    if let Some(names) = args.preset {
        cfg.synth.presets = names
            .iter()
            .map(|n| CohortPreset::by_name(n).map_err(|e| Error::Validation(e.to_string())))
            .collect::<Result<_>>()?;
    }
    if let Some(n) = args.n {
        cfg.synth.n = n;
    }
    for p in &mut cfg.synth.presets {
        if let Some(t) = args.decay_tau {
            p.decay_tau = t;
        }
        if let Some(g) = args.gap_scale {
            p.gap_scale = g;
        }
    }
    Ok(())
}

fn apply_screen(cfg: &mut RunConfig, args: ScreenArgs) {
    if let Some(f) = args.families {
        cfg.screen.families = f;
    }
    if let Some(n) = args.n_bootstrap {
        cfg.screen.n_bootstrap = n;
    }
}

/// Collects artifacts written under the output directory.
struct Output {
    dir: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl Output {
    fn new(dir: PathBuf) -> Result<Output> {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Output {
            dir,
            artifacts: BTreeMap::new(),
        })
    }

    /// Writes `name` (a plain file name) inside the output directory.
    fn write(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        debug_assert!(!name.contains('/') && !name.contains(".."));
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = self.dir.join(name);
        fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
        self.artifacts
            .insert(name.to_string(), hex::encode(Sha256::digest(&buf)));
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn finish(self, command: &str, cfg: &RunConfig, seed: u64) -> Result<()> {
        let mut resolved = cfg.clone();
        resolved.seed = Some(seed);
        let hash = resolved.hash()?;
        resolved.manifest = Some(ManifestInfo {
            command: command.to_string(),
            config_hash: hash,
            seed,
            artifacts: self.artifacts,
        });
        let path = self.dir.join(format!("{command}.manifest.toml"));
        fs::write(&path, resolved.to_toml()?).map_err(|e| Error::io(&path, e))
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.manifest = None;
    if cli.global.seed.is_some() {
        cfg.seed = cli.global.seed;
    }
    cfg.study.validate()?;
    let out = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Synth(args) => {
            apply_synth(&mut cfg, args)?;
            let seed = cfg.require_seed()?;
            let mut output = Output::new(out)?;
            synthesize(&cfg, seed, &mut output)?;
            output.finish("synth", &cfg, seed)?;
        }
        Command::Features { data, boundary } => {
            apply_data(&mut cfg, data);
            let seed = cfg.seed.unwrap_or(0);
            let split = match boundary {
                None => WindowSplit::PRIMARY,
                Some(0) => WindowSplit::NONE,
                Some(b) => WindowSplit::at(b)?,
            };
            let mut output = Output::new(out)?;
            let (people, claims) = load_data(&cfg)?;
            let map = cfg.code_map()?;
            for name in cfg.cohorts() {
                let cohort = Cohort::select(&name, &people, claims.clone(), &map, &cfg.study)?;
                for vs in [VariableSet::Traditional, VariableSet::Augmented] {
                    let fm = build_matrix(&cohort, &map, &cfg.study, vs, split)?;
                    let stem = format!("features_{name}_{vs}");
                    output.write(&format!("{stem}.csv"), |w| write_feature_csv(w, &fm))?;
                    output.write(&format!("{stem}.meta"), |w| write_feature_meta(w, &fm))?;
                }
            }
            output.finish("features", &cfg, seed)?;
        }
        Command::Screen { data, screen } => {
            apply_data(&mut cfg, data);
            apply_screen(&mut cfg, screen);
            let seed = cfg.require_seed()?;
            let mut output = Output::new(out)?;
            screen_all(&cfg, seed, &mut output)?;
            output.finish("screen", &cfg, seed)?;
        }
        Command::Sweep {
            data,
            spec,
            n_bootstrap,
        } => {
            apply_data(&mut cfg, data);
            if let Some(n) = n_bootstrap {
                cfg.sweep.n_bootstrap = Some(n);
            }
            resolve_sweep_specs(&mut cfg, spec)?;
            let seed = cfg.require_seed()?;
            let mut output = Output::new(out)?;
            sweep_all(&cfg, seed, &mut output)?;
            output.finish("sweep", &cfg, seed)?;
        }
        Command::Trajectory { data } => {
            apply_data(&mut cfg, data);
            let seed = cfg.seed.unwrap_or(0);
            let mut output = Output::new(out)?;
            trajectory_all(&cfg, &mut output)?;
            output.finish("trajectory", &cfg, seed)?;
        }
        Command::All {
            data,
            synth,
            screen,
        } => {
            apply_data(&mut cfg, data);
            apply_synth(&mut cfg, synth)?;
            apply_screen(&mut cfg, screen);
            let seed = cfg.require_seed()?;
            let mut output = Output::new(out.clone())?;
            if cfg.data.beneficiaries.is_none() && cfg.data.claims.is_none() {
                synthesize(&cfg, seed, &mut output)?;
                cfg.data.beneficiaries = Some(out.join("beneficiaries.csv"));
                cfg.data.claims = Some(out.join("claims.csv"));
                if cfg.data.cohorts.is_empty() {
                    cfg.data.cohorts = cfg.synth.presets.iter().map(|p| p.name.clone()).collect();
                }
            }
            let reports = screen_all(&cfg, seed, &mut output)?;
            for r in &reports {
                if let Some(best) = r.best() {
                    cfg.sweep
                        .specs
                        .insert(best.cohort.clone(), SpecConfig::from_spec(&best.spec));
                }
            }
            sweep_all(&cfg, seed, &mut output)?;
            trajectory_all(&cfg, &mut output)?;
            output.finish("all", &cfg, seed)?;
        }
    }
    Ok(())
}

fn synthesize(cfg: &RunConfig, seed: u64, output: &mut Output) -> Result<()> {
    let map = cfg.code_map()?;
    let mut people: Vec<Beneficiary> = Vec::new();
    let mut claims: Vec<Claim> = Vec::new();
    for preset in &cfg.synth.presets {
        let pop = generate_population(preset, cfg.synth.n, &map, &cfg.study, seed)?;
        people.extend(pop.beneficiaries);
        claims.extend(pop.claims);
    }
    output.write("beneficiaries.csv", |w| write_beneficiaries(BufWriter::new(w), &people))?;
    output.write("claims.csv", |w| write_claims(BufWriter::new(w), &claims))
}

fn existing(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let p = path
        .clone()
        .ok_or_else(|| Error::Validation(format!("no {what} file configured")))?;
    if !p.is_file() {
        return Err(Error::Validation(format!("{what} file {} does not exist", p.display())));
    }
    Ok(p)
}

fn load_data(cfg: &RunConfig) -> Result<(Vec<Beneficiary>, ClaimsByBeneficiary)> {
    let ingested = read_beneficiaries(existing(&cfg.data.beneficiaries, "beneficiaries")?, &cfg.study)?;
    if ingested.rejected_dead + ingested.rejected_hospice > 0 {
        log::warn!(
            "rejected {} beneficiaries dead by t0 and {} in hospice at t0",
            ingested.rejected_dead,
            ingested.rejected_hospice
        );
    }
    let claims = read_claims(existing(&cfg.data.claims, "claims")?)?;
    Ok((ingested.beneficiaries, ClaimsByBeneficiary::new(claims)))
}

fn screen_all(cfg: &RunConfig, seed: u64, output: &mut Output) -> Result<Vec<ScreeningReport>> {
    let (people, claims) = load_data(cfg)?;
    let map = cfg.code_map()?;
    let options = cfg.screening_options()?;
    let mut reports = Vec::new();
    for name in cfg.cohorts() {
        let cohort = Cohort::select(&name, &people, claims.clone(), &map, &cfg.study)?;
        log::info!("screening cohort {name} ({} members)", cohort.beneficiaries.len());
        let report = run_screening(&cohort, &map, &cfg.study, &options, seed)?;
        for (row, trace) in report.rows.iter().zip(&report.traces) {
            let file = format!("tuning_{}_{}_{}.csv", name, row.family, row.variable_set);
            output.write(&file, |w| trace.write_csv(w))?;
        }
        reports.push(report);
    }
    let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    output.write("screening.csv", |w| write_screening_csv(w, &rows))?;

    let mut best = SweepConfig::default();
    let mut splits = BTreeMap::new();
    for r in &reports {
        if let Some(b) = r.best() {
            best.specs.insert(b.cohort.clone(), SpecConfig::from_spec(&b.spec));
            splits.insert(b.cohort.clone(), r.split.fingerprint());
        }
    }
    let text = toml::to_string(&best).map_err(|e| Error::Parse(e.to_string()))?;
    output.write("best_spec.toml", |w| {
        w.extend_from_slice(text.as_bytes());
        Ok(())
    })?;
    let text = toml::to_string(&BTreeMap::from([("split_fingerprint", splits)]))
        .map_err(|e| Error::Parse(e.to_string()))?;
    output.write("screening_meta.toml", |w| {
        w.extend_from_slice(text.as_bytes());
        Ok(())
    })?;
    Ok(reports)
}

fn resolve_sweep_specs(cfg: &mut RunConfig, args: SpecArgs) -> Result<(), Failure> {
    if let Some(path) = &args.spec_file {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SweepConfig =
            toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        cfg.sweep.specs = file.specs;
    }
    if let Some(family) = args.family {
        let spec = SpecConfig {
            family,
            params: args.params.unwrap_or_default(),
            sampling: args.sampling.unwrap_or_else(default_sampling),
        };
        // the column count is unknown until the data is loaded
        spec.to_spec()?.validate(usize::MAX)?;
        cfg.sweep.specs = BTreeMap::from([("default".to_string(), spec)]);
    } else if args.params.is_some() || args.sampling.is_some() {
        return Err(Usage("--params and --sampling need --family".into()).into());
    }
    if cfg.sweep.specs.is_empty() {
        return Err(Usage(
            "sweep needs a classifier spec: --spec-file (from screen), --family, or [sweep.specs] in the config"
                .into(),
        )
        .into());
    }
    Ok(())
}

fn sweep_all(cfg: &RunConfig, seed: u64, output: &mut Output) -> Result<()> {
    let (people, claims) = load_data(cfg)?;
    let map = cfg.code_map()?;
    let n_bootstrap = cfg.sweep.n_bootstrap.unwrap_or(cfg.screen.n_bootstrap);
    let mut rows = Vec::new();
    for name in cfg.cohorts() {
        let spec = cfg
            .sweep
            .specs
            .get(&name)
            .or_else(|| cfg.sweep.specs.get("default"))
            .ok_or_else(|| Error::Validation(format!("no sweep spec for cohort {name}")))?
            .to_spec()?;
        let cohort = Cohort::select(&name, &people, claims.clone(), &map, &cfg.study)?;
        rows.extend(run_window_sweep(&cohort, &map, &cfg.study, &spec, n_bootstrap, seed)?);
    }
    output.write("sweep.csv", |w| write_sweep_csv(w, &rows))
}

fn trajectory_all(cfg: &RunConfig, output: &mut Output) -> Result<()> {
    let (people, claims) = load_data(cfg)?;
    let map = cfg.code_map()?;
    let mut all = Vec::new();
    for name in cfg.cohorts() {
        let cohort = Cohort::select(&name, &people, claims.clone(), &map, &cfg.study)?;
        if cohort.beneficiaries.is_empty() {
            return Err(Error::InvalidInput(format!("cohort {name} is empty")));
        }
        all.push(compute_trajectory(&cohort, &cfg.study));
    }
    output.write("trajectory.csv", |w| write_trajectory_csv(w, &all))?;
    output.write("trajectory_diff.csv", |w| write_diff_csv(w, &all))
}
