//! Symmetry verdicts, symmetric-success probability and column-wise Hamming
//! distance profiles.

use serde::Serialize;

use crate::embedding::{CompositeConfig, CompositeProblem, MirrorSign};
use crate::error::{Error, Result};
use crate::solvers::{lowest_energy_entries, SampleEntry, SampleSet};
use crate::topology::QubitId;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetryVerdict {
    pub symmetric: bool,
    pub mode: MirrorSign,
    /// Left-half qubits whose mirror partner breaks the constraint.
    pub violating_qubits: Vec<QubitId>,
}

/// Ferro: `S_i == S_mirror(i)` on every left qubit. Antiferro: `S_i == -S_mirror(i)`.
pub fn check_symmetry(problem: &CompositeProblem, config: &CompositeConfig) -> Result<SymmetryVerdict> {
    problem.model().check(&config.spins)?;
    let sign = problem.mirror_sign().value() as i8;
    let violating_qubits: Vec<QubitId> = problem
        .left_indices()
        .filter(|&i| config.spins[i] != sign * config.spins[problem.mirror_index(i)])
        .map(|i| problem.qubits()[i])
        .collect();
    Ok(SymmetryVerdict {
        symmetric: violating_qubits.is_empty(),
        mode: problem.mirror_sign(),
        violating_qubits,
    })
}

fn is_symmetric(problem: &CompositeProblem, config: &CompositeConfig) -> bool {
    let sign = problem.mirror_sign().value() as i8;
    problem
        .left_indices()
        .all(|i| config.spins[i] == sign * config.spins[problem.mirror_index(i)])
}

/// True when at least one lowest-energy entry of `set` is symmetric.
pub fn has_symmetric_minimum(problem: &CompositeProblem, set: &SampleSet) -> Result<bool> {
    let lowest = lowest_energy_entries(set)?;
    for e in lowest {
        problem.model().check(&e.config.spins)?;
    }
    Ok(lowest.iter().any(|e| is_symmetric(problem, &e.config)))
}

/// Success count with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsymEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl PsymEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        PsymEstimate {
            successes,
            trials,
            p_hat: p,
            ci_low: (center - half).clamp(0.0, p),
            ci_high: (center + half).clamp(p, 1.0),
        }
    }

    /// Interval half-width expressed as one standard deviation.
    pub fn sigma(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * Z95)
    }

    pub fn overlaps(&self, other: &PsymEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

fn check_batch(problems: &[CompositeProblem], sets: &[SampleSet]) -> Result<()> {
    if problems.len() != sets.len() {
        return Err(Error::BatchMismatch {
            problems: problems.len(),
            sample_sets: sets.len(),
        });
    }
    if problems.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    Ok(())
}

/// Fraction of instances whose lowest-energy answers include a symmetric one.
pub fn estimate_psym(problems: &[CompositeProblem], sets: &[SampleSet]) -> Result<PsymEstimate> {
    check_batch(problems, sets)?;
    let mut successes = 0;
    for (p, s) in problems.iter().zip(sets) {
        successes += u64::from(has_symmetric_minimum(p, s)?);
    }
    Ok(PsymEstimate::from_counts(successes, problems.len() as u64))
}

/// Functional left-half qubits per column, index 0 holding column 1.
pub fn column_qubit_counts(problem: &CompositeProblem) -> Vec<usize> {
    let mut counts = vec![0; problem.num_columns() as usize];
    for i in problem.left_indices() {
        counts[problem.column(i) as usize - 1] += 1;
    }
    counts
}

/// Normalized Hamming distance between each left column and its mirror
/// column: 0 when identical, 1 when every spin is flipped. Columns without
/// functional qubits yield `None`.
pub fn column_distances(problem: &CompositeProblem, config: &CompositeConfig) -> Vec<Option<f64>> {
    let counts = column_qubit_counts(problem);
    let mut differing = vec![0usize; counts.len()];
    for i in problem.left_indices() {
        if config.spins[i] != config.spins[problem.mirror_index(i)] {
            differing[problem.column(i) as usize - 1] += 1;
        }
    }
    differing
        .into_iter()
        .zip(counts)
        .map(|(d, q)| (q > 0).then(|| d as f64 / q as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnStat {
    /// 1 is the column coupled to the mirror.
    pub column: u32,
    pub mean: f64,
    pub stderr: f64,
    pub qubit_count: usize,
}

/// Column-wise distance averaged over instances.
///
/// Each instance contributes the occurrence-weighted mean over its
/// lowest-energy solutions; the profile averages those per-instance means
/// and reports their standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HammingProfile {
    pub per_column: Vec<ColumnStat>,
    pub instance_count: usize,
    /// Distinct lowest-energy solutions across retained instances.
    pub solution_count: usize,
    #[serde(skip)]
    instance_means: Vec<Vec<Option<f64>>>,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl HammingProfile {
    pub fn column(&self, column: u32) -> Option<&ColumnStat> {
        self.per_column.iter().find(|c| c.column == column)
    }

    /// Mean over columns `>= from_column`, averaged per instance first; the
    /// standard error is taken across instances.
    pub fn tail_mean(&self, from_column: u32) -> Option<(f64, f64)> {
        let skip = from_column.saturating_sub(1) as usize;
        let values: Vec<f64> = self
            .instance_means
            .iter()
            .filter_map(|cols| {
                let tail: Vec<f64> = cols.iter().skip(skip).flatten().copied().collect();
                (!tail.is_empty()).then(|| tail.iter().sum::<f64>() / tail.len() as f64)
            })
            .collect();
        (!values.is_empty()).then(|| mean_and_stderr(&values))
    }
}

fn instance_column_means(problem: &CompositeProblem, lowest: &[SampleEntry]) -> Vec<Option<f64>> {
    let columns = problem.num_columns() as usize;
    let mut sums = vec![0.0; columns];
    let mut weight = 0u64;
    let mut present = vec![false; columns];
    for e in lowest {
        for (c, d) in column_distances(problem, &e.config).into_iter().enumerate() {
            if let Some(d) = d {
                sums[c] += d * e.occurrences as f64;
                present[c] = true;
            }
        }
        weight += e.occurrences;
    }
    sums.into_iter()
        .zip(present)
        .map(|(s, p)| p.then(|| s / weight as f64))
        .collect()
}

/// Column-wise Hamming profile of the lowest-energy solutions. With
/// `asymmetric_only`, only instances where no lowest-energy solution is
/// symmetric are kept.
pub fn hamming_profile(
    problems: &[CompositeProblem],
    sets: &[SampleSet],
    asymmetric_only: bool,
) -> Result<HammingProfile> {
    check_batch(problems, sets)?;
    let mut instance_means = Vec::new();
    let mut solution_count = 0;
    let mut qubit_counts: Vec<usize> = Vec::new();
    for (p, s) in problems.iter().zip(sets) {
        let lowest = lowest_energy_entries(s)?;
        for e in lowest {
            p.model().check(&e.config.spins)?;
        }
        if asymmetric_only && lowest.iter().any(|e| is_symmetric(p, &e.config)) {
            continue;
        }
        solution_count += lowest.len();
        let counts = column_qubit_counts(p);
        if counts.len() > qubit_counts.len() {
            qubit_counts.resize(counts.len(), 0);
        }
        for (total, c) in qubit_counts.iter_mut().zip(&counts) {
            *total = (*total).max(*c);
        }
        instance_means.push(instance_column_means(p, lowest));
    }
    if instance_means.is_empty() {
        return Err(Error::NoRetainedInstances(if asymmetric_only {
            "asymmetric-only"
        } else {
            "unfiltered"
        }));
    }
    let per_column = (0..qubit_counts.len())
        .filter_map(|c| {
            let values: Vec<f64> = instance_means.iter().filter_map(|m| m.get(c).copied().flatten()).collect();
            (!values.is_empty()).then(|| {
                let (mean, stderr) = mean_and_stderr(&values);
                ColumnStat {
                    column: c as u32 + 1,
                    mean,
                    stderr,
                    qubit_count: qubit_counts[c],
                }
            })
        })
        .collect();
    Ok(HammingProfile {
        per_column,
        instance_count: instance_means.len(),
        solution_count,
        instance_means,
    })
}

/// Keeps only entries with the required symmetry; `reads` becomes the
/// retained occurrence total. May be empty.
pub fn symmetry_filter(problem: &CompositeProblem, set: &SampleSet) -> Result<SampleSet> {
    let mut entries = Vec::new();
    for e in &set.entries {
        if check_symmetry(problem, &e.config)?.symmetric {
            entries.push(e.clone());
        }
    }
    Ok(SampleSet {
        reads: entries.iter().map(|e| e.occurrences).sum(),
        entries,
        backend: set.backend.clone(),
        seed: set.seed,
    })
}
