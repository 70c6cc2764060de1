//! Experiment orchestration: size, mirror-strength and schedule sweeps,
//! CSV tables, plot scripts and a hash manifest of everything written.
//!
//! Experiment configs are JSON documents (see [`ExperimentConfig`]). Output
//! tables are versioned by [`CSV_SCHEMA_VERSION`]; any column change must
//! bump it.
//!
//! Seeds: the instances of every batch use `rng::derive(base_seed, k)`; the
//! sampler for instance `k` runs with `rng::derive(instance_seed, SAMPLER_STREAM)`.
//! Batches of different sizes therefore share seeds, as do runs of the same
//! size under different strengths or schedules.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{self, check_symmetry, HammingProfile, PsymEstimate, SymmetryVerdict};
use crate::embedding::{build_composite, CompositeProblem, MirrorSign};
use crate::error::{Error, Result};
use crate::instances::{generate_batch, Region, SCALE};
use crate::rng;
use crate::solvers::{Backend, SampleSet, ScheduleConfig};
use crate::topology::{ChimeraTopology, Coupler, MirrorPlane, QubitId};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const PSYM_HEADER: &str = "rows,width,trials,successes,p_hat,ci_low,ci_high";
pub const HAMMING_HEADER: &str =
    "rows,width,mirror_strength,schedule,sweeps,backend_digest,column_index,mean,stderr,qubit_count";

/// Stream index used to derive a sampler seed from an instance seed.
pub const SAMPLER_STREAM: u64 = 0x5341_4d50;

/// Bernoulli dead-qubit mask drawn before symmetrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticDead {
    pub probability: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub rows: u32,
    pub cols: u32,
    #[serde(default)]
    pub dead_qubits: Vec<u32>,
    #[serde(default)]
    pub dead_couplers: Vec<Coupler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_dead: Option<SyntheticDead>,
}

impl TopologySpec {
    pub fn ideal(rows: u32, cols: u32) -> Self {
        TopologySpec {
            rows,
            cols,
            dead_qubits: Vec::new(),
            dead_couplers: Vec::new(),
            synthetic_dead: None,
        }
    }

    /// The host with synthetic dead qubits added and all dead sets mirrored.
    pub fn build(&self) -> Result<(ChimeraTopology, MirrorPlane)> {
        let mut dead: Vec<QubitId> = self.dead_qubits.iter().copied().map(QubitId).collect();
        if let Some(synthetic) = &self.synthetic_dead {
            if !(0.0..=1.0).contains(&synthetic.probability) {
                return Err(Error::InvalidConfig(format!(
                    "dead-qubit probability {} outside [0, 1]",
                    synthetic.probability
                )));
            }
            let mut rng = rng::stream(synthetic.seed);
            let total = 8 * self.rows * self.cols;
            dead.extend((0..total).filter(|_| rng.gen_bool(synthetic.probability)).map(QubitId));
        }
        let raw = ChimeraTopology::new(self.rows, self.cols, dead, self.dead_couplers.iter().copied())?;
        let plane = MirrorPlane::centered(&raw)?;
        Ok((raw.symmetrize_dead_sets(plane)?, plane))
    }
}

/// Problem graph size in unit cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSize {
    pub rows: u32,
    pub cols: u32,
}

fn default_true() -> bool {
    true
}

fn default_strengths() -> Vec<i32> {
    vec![SCALE]
}

fn default_schedules() -> Vec<ScheduleConfig> {
    vec![ScheduleConfig::default()]
}

/// One experiment, stored as JSON.
///
/// `mirror_strengths` are signed integer-unit values of `M_k`: negative
/// values run in antiferro mode with negated right-half fields. A strength
/// of zero uses `mirror_sign` to pick the mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologySpec,
    pub sizes: Vec<ProblemSize>,
    pub instances: usize,
    #[serde(default)]
    pub fields: bool,
    #[serde(default = "default_sign")]
    pub mirror_sign: MirrorSign,
    #[serde(default = "default_strengths")]
    pub mirror_strengths: Vec<i32>,
    pub backend: Backend,
    #[serde(default = "default_schedules")]
    pub schedules: Vec<ScheduleConfig>,
    pub reads: u64,
    pub base_seed: u64,
    /// Hamming profiles keep only instances with no symmetric lowest-energy answer.
    #[serde(default = "default_true")]
    pub asymmetric_only: bool,
    /// Also write every instance, composite and sample set.
    #[serde(default)]
    pub save_artifacts: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

fn default_sign() -> MirrorSign {
    MirrorSign::Ferro
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.topology.cols % 2 != 0 {
            return bad(format!("host width {} must be even", self.topology.cols));
        }
        if self.sizes.is_empty() {
            return bad("no problem sizes given".into());
        }
        for s in &self.sizes {
            if s.rows == 0 || s.cols == 0 || s.rows > self.topology.rows || s.cols > self.topology.cols / 2 {
                return bad(format!(
                    "size {}x{} does not fit the {}x{} half-grid",
                    s.rows,
                    s.cols,
                    self.topology.rows,
                    self.topology.cols / 2
                ));
            }
        }
        if self.instances == 0 || self.reads == 0 {
            return bad("instances and reads must be at least 1".into());
        }
        if self.mirror_strengths.is_empty() {
            return bad("no mirror strengths given".into());
        }
        if let Some(m) = self.mirror_strengths.iter().find(|m| m.abs() > SCALE) {
            return bad(format!("mirror strength {m} outside [-{SCALE}, {SCALE}]"));
        }
        if self.schedules.is_empty() {
            return bad("no schedules given".into());
        }
        for s in &self.schedules {
            s.validate()?;
            if self.backend == Backend::Sa && s.offsets.is_some() {
                return bad("annealing offsets need the sqa backend".into());
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    fn sign_for(&self, strength: i32) -> (i32, MirrorSign) {
        if strength == 0 {
            (0, self.mirror_sign)
        } else {
            MirrorSign::split(strength)
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Composites and sample sets of one (size, strength, schedule) cell.
#[derive(Debug, Clone)]
pub struct Batch {
    pub size: ProblemSize,
    pub mirror_strength: i32,
    pub schedule_index: usize,
    pub problems: Vec<CompositeProblem>,
    pub sample_sets: Vec<SampleSet>,
}

impl Batch {
    pub fn psym(&self) -> Result<PsymEstimate> {
        analysis::estimate_psym(&self.problems, &self.sample_sets)
    }

    pub fn hamming(&self, asymmetric_only: bool) -> Result<HammingProfile> {
        analysis::hamming_profile(&self.problems, &self.sample_sets, asymmetric_only)
    }

    pub fn backend_digest(&self) -> &str {
        &self.sample_sets[0].backend.digest
    }
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Timing of the pipeline stages summed over batches.
#[derive(Debug, Clone, Default)]
struct StageClock {
    generate: f64,
    compose: f64,
    sample: f64,
}

/// Generates, embeds and samples one batch. Instances run in parallel on
/// the worker pool; results keep batch order.
pub fn run_pipeline(
    config: &ExperimentConfig,
    size: ProblemSize,
    mirror_strength: i32,
    schedule_index: usize,
) -> Result<Batch> {
    run_pipeline_timed(config, size, mirror_strength, schedule_index, &mut StageClock::default())
}

fn run_pipeline_timed(
    config: &ExperimentConfig,
    size: ProblemSize,
    mirror_strength: i32,
    schedule_index: usize,
    clock: &mut StageClock,
) -> Result<Batch> {
    config.validate()?;
    let schedule = config
        .schedules
        .get(schedule_index)
        .ok_or_else(|| Error::InvalidConfig(format!("no schedule {schedule_index}")))?;
    let (host, plane) = config.topology.build()?;

    let t = Instant::now();
    let region = Region::adjacent_to_plane(&host, plane, size.rows, size.cols)?;
    let batch = generate_batch(&region, config.instances, config.fields, config.base_seed)?;
    clock.generate += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (strength, sign) = config.sign_for(mirror_strength);
    let problems = batch
        .instances
        .iter()
        .map(|inst| {
            build_composite(inst, &host, plane, strength, sign).map_err(|e| Error::Instance {
                seed: inst.seed(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    clock.compose += t.elapsed().as_secs_f64();

    let t = Instant::now();
    let sample_sets = with_pool(config.workers, || {
        problems
            .par_iter()
            .map(|p| {
                let seed = rng::derive(p.seed(), SAMPLER_STREAM);
                config
                    .backend
                    .run(p, schedule, config.reads, seed)
                    .map_err(|e| Error::Instance {
                        seed: p.seed(),
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    clock.sample += t.elapsed().as_secs_f64();

    Ok(Batch {
        size,
        mirror_strength,
        schedule_index,
        problems,
        sample_sets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsymRow {
    pub rows: u32,
    pub width: u32,
    pub estimate: PsymEstimate,
}

#[derive(Debug, Clone)]
pub struct HammingGroup {
    pub size: ProblemSize,
    pub mirror_strength: i32,
    pub schedule_index: usize,
    pub sweeps: u32,
    pub backend_digest: String,
    /// `None` when the filter retained no instance.
    pub profile: Option<HammingProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStage {
    pub name: String,
    pub seconds: f64,
    pub files: Vec<ManifestFile>,
}

/// Record of one run; file paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_digest: String,
    pub csv_schema_version: u32,
    pub stages: Vec<ManifestStage>,
}

impl RunManifest {
    pub const FILE_NAME: &'static str = "manifest.json";

    /// Re-hashes every listed file under `dir`.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for stage in &self.stages {
            for f in &stage.files {
                let bytes = fs::read(dir.join(&f.path))?;
                if sha256_hex(&bytes) != f.sha256 {
                    return Err(Error::InvalidConfig(format!("{} does not match its recorded digest", f.path)));
                }
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.join(Self::FILE_NAME))?)?)
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    fn write(&self, relative: &str, contents: &str) -> Result<ManifestFile> {
        let path = self.dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        Ok(ManifestFile {
            path: relative.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        })
    }
}

fn save_batch(out: &Output, batch: &Batch) -> Result<Vec<ManifestFile>> {
    let dir = format!(
        "artifacts/{}x{}/m{}_s{}",
        batch.size.rows, batch.size.cols, batch.mirror_strength, batch.schedule_index
    );
    let mut files = Vec::new();
    for (k, (p, s)) in batch.problems.iter().zip(&batch.sample_sets).enumerate() {
        files.push(out.write(&format!("{dir}/instance_{k:05}.json"), &p.left_instance().to_json())?);
        files.push(out.write(&format!("{dir}/composite_{k:05}.json"), &p.to_json())?);
        files.push(out.write(&format!("{dir}/samples_{k:05}.json"), &s.to_json())?);
    }
    Ok(files)
}

fn stages(clock: &StageClock, artifacts: Vec<ManifestFile>, analyze: f64, tables: Vec<ManifestFile>) -> Vec<ManifestStage> {
    let (generate, compose, sample) = if artifacts.is_empty() {
        (vec![], vec![], vec![])
    } else {
        let pick = |kind: &str| {
            artifacts
                .iter()
                .filter(|f| f.path.rsplit('/').next().is_some_and(|n| n.starts_with(kind)))
                .cloned()
                .collect::<Vec<_>>()
        };
        (pick("instance_"), pick("composite_"), pick("samples_"))
    };
    vec![
        ManifestStage { name: "generate".into(), seconds: clock.generate, files: generate },
        ManifestStage { name: "compose".into(), seconds: clock.compose, files: compose },
        ManifestStage { name: "sample".into(), seconds: clock.sample, files: sample },
        ManifestStage { name: "analyze".into(), seconds: analyze, files: tables },
    ]
}

fn finish(out: &Output, command: &str, config: &ExperimentConfig, stages: Vec<ManifestStage>) -> Result<RunManifest> {
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config_digest: config.digest(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        stages,
    };
    out.write(
        RunManifest::FILE_NAME,
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

pub fn psym_csv(rows: &[PsymRow]) -> String {
    let mut s = format!("{PSYM_HEADER}\n");
    for r in rows {
        let e = &r.estimate;
        let _ = writeln!(
            s,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            r.rows, r.width, e.trials, e.successes, e.p_hat, e.ci_low, e.ci_high
        );
    }
    s
}

pub fn hamming_csv(groups: &[HammingGroup]) -> String {
    let mut s = format!("{HAMMING_HEADER}\n");
    for g in groups {
        let key = format!(
            "{},{},{},{},{},{}",
            g.size.rows, g.size.cols, g.mirror_strength, g.schedule_index, g.sweeps, g.backend_digest
        );
        match &g.profile {
            Some(p) => {
                for c in &p.per_column {
                    let _ = writeln!(s, "{key},{},{:.6},{:.6},{}", c.column, c.mean, c.stderr, c.qubit_count);
                }
            }
            None => {
                let _ = writeln!(s, "{key},0,NA,NA,0");
            }
        }
    }
    s
}

const PSYM_PLOT: &str = "\
# gnuplot script for psym.csv
set datafile separator ','
set key top right
set logscale y
set xlabel 'problem width N (unit cells)'
set ylabel 'P_sym'
set xtics 1
plot 'psym.csv' every ::1 using 2:5:6:7 with yerrorlines title 'P_sym (95% Wilson)'
";

const HAMMING_PLOT: &str = "\
# gnuplot script for hamming.csv; one curve per (size, strength, schedule) group
set datafile separator ','
set key outside right
set xlabel 'column index from the mirror plane'
set ylabel 'normalized Hamming distance'
set yrange [0:1]
set xtics 1
groups = system(\"awk -F, 'NR>1 && $8!=\\\"NA\\\" {print $1\\\"x\\\"$2\\\"_M\\\"$3\\\"_s\\\"$4}' hamming.csv | uniq\")
plot for [g in groups] sprintf(\"< awk -F, 'NR>1 && ($1\\\"x\\\"$2\\\"_M\\\"$3\\\"_s\\\"$4)==\\\"%s\\\"' hamming.csv\", g) \\
    using 7:8:9 with yerrorlines title g
";

/// One P_sym row per problem size, using the first mirror strength and
/// schedule. Writes `psym.csv`, `psym.gp` and the manifest.
pub fn run_psym_sweep(config: &ExperimentConfig) -> Result<(Vec<PsymRow>, RunManifest)> {
    config.validate()?;
    let out = Output::new(&config.out_dir)?;
    let mut clock = StageClock::default();
    let mut artifacts = Vec::new();
    let mut analyze = 0.0;
    let mut rows = Vec::new();
    for size in &config.sizes {
        let batch = run_pipeline_timed(config, *size, config.mirror_strengths[0], 0, &mut clock)?;
        if config.save_artifacts {
            artifacts.extend(save_batch(&out, &batch)?);
        }
        let t = Instant::now();
        rows.push(PsymRow {
            rows: size.rows,
            width: size.cols,
            estimate: batch.psym()?,
        });
        analyze += t.elapsed().as_secs_f64();
    }
    let tables = vec![out.write("psym.csv", &psym_csv(&rows))?, out.write("psym.gp", PSYM_PLOT)?];
    let manifest = finish(&out, "psym", config, stages(&clock, artifacts, analyze, tables))?;
    Ok((rows, manifest))
}

/// Hamming profiles over the given strength and schedule indices for every size.
fn hamming_grid(
    config: &ExperimentConfig,
    command: &str,
    strengths: &[i32],
    schedules: &[usize],
) -> Result<(Vec<HammingGroup>, RunManifest, Vec<String>)> {
    config.validate()?;
    let out = Output::new(&config.out_dir)?;
    let mut clock = StageClock::default();
    let mut artifacts = Vec::new();
    let mut analyze = 0.0;
    let mut groups = Vec::new();
    let mut warnings = Vec::new();
    for size in &config.sizes {
        for &strength in strengths {
            for &schedule in schedules {
                let batch = run_pipeline_timed(config, *size, strength, schedule, &mut clock)?;
                if config.save_artifacts {
                    artifacts.extend(save_batch(&out, &batch)?);
                }
                let t = Instant::now();
                let profile = match batch.hamming(config.asymmetric_only) {
                    Ok(p) => Some(p),
                    Err(Error::NoRetainedInstances(filter)) => {
                        warnings.push(format!(
                            "{}x{} M={strength} schedule {schedule}: no instances retained by the {filter} filter",
                            size.rows, size.cols
                        ));
                        None
                    }
                    Err(e) => return Err(e),
                };
                analyze += t.elapsed().as_secs_f64();
                groups.push(HammingGroup {
                    size: *size,
                    mirror_strength: strength,
                    schedule_index: schedule,
                    sweeps: config.schedules[schedule].sweeps,
                    backend_digest: batch.backend_digest().to_string(),
                    profile,
                });
            }
        }
    }
    let tables = vec![out.write("hamming.csv", &hamming_csv(&groups))?, out.write("hamming.gp", HAMMING_PLOT)?];
    let manifest = finish(&out, command, config, stages(&clock, artifacts, analyze, tables))?;
    Ok((groups, manifest, warnings))
}

/// Profiles for every mirror strength (first schedule). Groups that retain no
/// instance are reported in the returned warnings and as an `NA` row.
pub fn run_hamming_sweep(config: &ExperimentConfig) -> Result<(Vec<HammingGroup>, RunManifest, Vec<String>)> {
    hamming_grid(config, "hamming", &config.mirror_strengths, &[0])
}

/// Profiles for every schedule (first mirror strength).
pub fn run_schedule_sweep(config: &ExperimentConfig) -> Result<(Vec<HammingGroup>, RunManifest, Vec<String>)> {
    if config.schedules.len() < 2 {
        return Err(Error::InvalidConfig("a schedule sweep needs at least two schedules".into()));
    }
    let schedules: Vec<usize> = (0..config.schedules.len()).collect();
    hamming_grid(config, "sweep", &config.mirror_strengths[..1], &schedules)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryVerdict {
    pub bits: String,
    pub energy: i64,
    pub occurrences: u64,
    pub verdict: SymmetryVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerReport {
    pub entries: Vec<EntryVerdict>,
    pub filtered: SampleSet,
}

impl AnswerReport {
    pub fn some_symmetric(&self) -> bool {
        !self.filtered.is_empty()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            some_symmetric: bool,
            entries: &'a [EntryVerdict],
        }
        serde_json::to_string_pretty(&Doc {
            some_symmetric: self.some_symmetric(),
            entries: &self.entries,
        })
        .expect("report serializes")
    }
}

/// Verdicts for every entry of an ingested sample set plus the symmetric
/// subset. Energies are recomputed on ingest; a mismatch is an error.
pub fn answer_check(problem_json: &str, samples_json: &str) -> Result<AnswerReport> {
    let problem = CompositeProblem::from_json(problem_json)?;
    let set = SampleSet::from_json(samples_json, &problem)?;
    let entries = set
        .entries
        .iter()
        .map(|e| {
            Ok(EntryVerdict {
                bits: crate::solvers::spins_to_bits(&e.config.spins),
                energy: e.energy,
                occurrences: e.occurrences,
                verdict: check_symmetry(&problem, &e.config)?,
            })
        })
        .collect::<Result<_>>()?;
    let filtered = analysis::symmetry_filter(&problem, &set)?;
    Ok(AnswerReport { entries, filtered })
}
