//! `mirrorbench`: generate instances, build composites, sample them and run
//! the P_sym / Hamming experiments from a JSON config.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 validation error,
//! 3 `check` found no symmetric answer.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mirrorbench::harness::{
    answer_check, run_hamming_sweep, run_psym_sweep, run_schedule_sweep, ExperimentConfig, HammingGroup,
};
use mirrorbench::{
    build_composite, generate_batch, Backend, ChimeraTopology, CompositeProblem, IsingInstance, MirrorPlane,
    MirrorSign, Region, ScheduleConfig,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NONE_SYMMETRIC: u8 = 3;

#[derive(Parser)]
#[command(name = "mirrorbench", version, about = "Mirror-symmetric composite Ising benchmarks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Sampler backend: exact, sa or sqa; overrides the config
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Worker threads; overrides the config
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances next to the mirror plane
    Gen(GenArgs),
    /// Build a composite problem from an instance
    Compose(ComposeArgs),
    /// Sample a composite problem
    Sample(SampleArgs),
    /// P_sym for every problem size in the config
    Psym,
    /// Column Hamming profiles for every mirror strength in the config
    Hamming,
    /// Column Hamming profiles for every schedule in the config
    Sweep,
    /// Check the symmetry of every answer in a sample set
    Check(CheckArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Problem rows in unit cells
    #[arg(long)]
    rows: u32,
    /// Problem width in unit cells
    #[arg(long)]
    cols: u32,
    /// Host topology (JSON); defaults to an ideal host exactly twice as wide
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Draw local fields as well as couplings
    #[arg(long)]
    fields: bool,
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Host topology (JSON); defaults to the ideal host named in the instance
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Signed mirror strength in 1/28 units; negative selects antiferro mode
    #[arg(long, default_value_t = 28, allow_negative_numbers = true)]
    strength: i32,
    /// Mode used when the strength is zero
    #[arg(long, default_value = "ferro", value_parser = parse_sign)]
    sign: MirrorSign,
    /// Output file; stdout when omitted
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, default_value_t = 100)]
    reads: u64,
    /// Sweeps per read; ignored when --schedule is given
    #[arg(long)]
    sweeps: Option<u32>,
    /// Schedule (JSON)
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    samples: PathBuf,
}

fn parse_sign(s: &str) -> std::result::Result<MirrorSign, String> {
    match s {
        "ferro" => Ok(MirrorSign::Ferro),
        "antiferro" => Ok(MirrorSign::Antiferro),
        other => Err(format!("expected ferro or antiferro, got {other:?}")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| mirrorbench::Error::InvalidConfig("this command needs --config".into()))?;
    let mut c = ExperimentConfig::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = g.seed {
        c.base_seed = seed;
    }
    if let Some(dir) = &g.out_dir {
        c.out_dir = dir.clone();
    }
    if let Some(backend) = g.backend {
        c.backend = backend;
    }
    if g.workers.is_some() {
        c.workers = g.workers;
    }
    c.validate()?;
    Ok(c)
}

fn gen(g: &Global, a: &GenArgs) -> Result<()> {
    let raw = match &a.topology {
        Some(path) => ChimeraTopology::from_json(&read(path)?)?,
        None => ChimeraTopology::ideal(a.rows, 2 * a.cols)?,
    };
    let plane = MirrorPlane::centered(&raw)?;
    let host = raw.symmetrize_dead_sets(plane)?;
    let region = Region::adjacent_to_plane(&host, plane, a.rows, a.cols)?;
    let batch = generate_batch(&region, a.count, a.fields, g.seed.unwrap_or(0))?;
    let dir = g.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    write(&dir.join("topology.json"), &host.to_json())?;
    for (k, inst) in batch.instances.iter().enumerate() {
        write(&dir.join(format!("instance_{k:05}.json")), &inst.to_json())?;
    }
    eprintln!("wrote {} instances and topology.json to {}", a.count, dir.display());
    Ok(())
}

fn compose(a: &ComposeArgs) -> Result<()> {
    let inst = IsingInstance::from_json(&read(&a.instance)?)?;
    let host = match &a.topology {
        Some(path) => ChimeraTopology::from_json(&read(path)?)?,
        None => ChimeraTopology::ideal(inst.region().host_rows, inst.region().host_cols)?,
    };
    let plane = MirrorPlane::centered(&host)?;
    let (strength, sign) = if a.strength == 0 { (0, a.sign) } else { MirrorSign::split(a.strength) };
    let problem = build_composite(&inst, &host, plane, strength, sign)?;
    emit(a.output.as_deref(), &problem.to_json())
}

fn sample(g: &Global, a: &SampleArgs) -> Result<()> {
    let problem = CompositeProblem::from_json(&read(&a.problem)?)?;
    let mut schedule: ScheduleConfig = match &a.schedule {
        Some(path) => serde_json::from_str(&read(path)?).map_err(mirrorbench::Error::from)?,
        None => ScheduleConfig::default(),
    };
    if let (None, Some(sweeps)) = (&a.schedule, a.sweeps) {
        schedule.sweeps = sweeps;
    }
    let backend = g.backend.unwrap_or(Backend::Sa);
    let set = backend.run(&problem, &schedule, a.reads, g.seed.unwrap_or(0))?;
    emit(a.output.as_deref(), &set.to_json())
}

fn report_groups(groups: &[HammingGroup], warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    for grp in groups {
        if let Some(p) = &grp.profile {
            let cols: Vec<String> = p.per_column.iter().map(|c| format!("{:.3}", c.mean)).collect();
            println!(
                "{}x{} M={} schedule {}: {} instances, columns {}",
                grp.size.rows,
                grp.size.cols,
                grp.mirror_strength,
                grp.schedule_index,
                p.instance_count,
                cols.join(" ")
            );
        }
    }
}

fn check(g: &Global, a: &CheckArgs) -> Result<ExitCode> {
    let report = answer_check(&read(&a.problem)?, &read(&a.samples)?)?;
    if let Some(dir) = &g.out_dir {
        write(&dir.join("check_report.json"), &report.to_json())?;
        write(&dir.join("symmetric_samples.json"), &report.filtered.to_json())?;
    }
    let symmetric = report.entries.iter().filter(|e| e.verdict.symmetric).count();
    println!("{symmetric} of {} entries symmetric", report.entries.len());
    Ok(if report.some_symmetric() {
        println!("some symmetric");
        ExitCode::SUCCESS
    } else {
        println!("none symmetric");
        ExitCode::from(EXIT_NONE_SYMMETRIC)
    })
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => gen(g, a)?,
        Command::Compose(a) => compose(a)?,
        Command::Sample(a) => sample(g, a)?,
        Command::Psym => {
            let c = load_config(g)?;
            let (rows, _) = run_psym_sweep(&c)?;
            for r in &rows {
                let e = &r.estimate;
                println!(
                    "{}x{}: P_sym {:.4} [{:.4}, {:.4}] ({}/{})",
                    r.rows, r.width, e.p_hat, e.ci_low, e.ci_high, e.successes, e.trials
                );
            }
            eprintln!("wrote psym.csv to {}", c.out_dir.display());
        }
        Command::Hamming => {
            let c = load_config(g)?;
            let (groups, _, warnings) = run_hamming_sweep(&c)?;
            report_groups(&groups, &warnings);
            eprintln!("wrote hamming.csv to {}", c.out_dir.display());
        }
        Command::Sweep => {
            let c = load_config(g)?;
            let (groups, _, warnings) = run_schedule_sweep(&c)?;
            report_groups(&groups, &warnings);
            eprintln!("wrote hamming.csv to {}", c.out_dir.display());
        }
        Command::Check(a) => return check(g, a),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e
                .chain()
                .find_map(|c| c.downcast_ref::<mirrorbench::Error>())
                .is_some_and(|e| e.is_validation());
            ExitCode::from(if validation { EXIT_VALIDATION } else { 1 })
        }
    }
}
