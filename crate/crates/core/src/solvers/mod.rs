//! Sampler backends and the sample sets they produce.
//!
//! Every backend returns a [`SampleSet`] whose energies are recomputed from
//! the composite Hamiltonian; sets read back from disk go through the same
//! check in [`SampleSet::ingest`].

mod exact;
mod sa;
mod sqa;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embedding::{CompositeConfig, CompositeProblem};
use crate::error::{Error, Result};
use crate::ising::Spin;

#[cfg(test)]
pub(crate) use exact::enumerate_minima;
pub use exact::{solve_exact, EXACT_QUBIT_LIMIT};
pub use sa::{beta_ladder, solve_sa};
pub use sqa::solve_sqa;

/// Backend selector used by configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Sa,
    Sqa,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Sa => "sa",
            Backend::Sqa => "sqa",
        }
    }

    pub fn run(
        self,
        problem: &CompositeProblem,
        schedule: &ScheduleConfig,
        reads: u64,
        seed: u64,
    ) -> Result<SampleSet> {
        match self {
            Backend::Exact => solve_exact(problem),
            Backend::Sa => solve_sa(problem, schedule, reads, seed),
            Backend::Sqa => solve_sqa(problem, schedule, reads, seed),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "sa" => Ok(Backend::Sa),
            "sqa" => Ok(Backend::Sqa),
            other => Err(Error::InvalidConfig(format!(
                "unknown backend {other:?} (expected exact, sa or sqa)"
            ))),
        }
    }
}

/// Per-qubit schedule offsets in `[-1, 1]`; negative values delay a qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Offsets {
    /// Same offset on every qubit left of the plane, zero on the right.
    LeftHalf(f64),
    /// Explicit offsets keyed by qubit id; unlisted qubits get zero.
    PerQubit(BTreeMap<u32, f64>),
}

impl Offsets {
    /// Offsets per dense index of `problem`.
    pub fn resolve(&self, problem: &CompositeProblem) -> Vec<f64> {
        match self {
            Offsets::LeftHalf(v) => (0..problem.num_qubits())
                .map(|i| if problem.is_left(i) { *v } else { 0.0 })
                .collect(),
            Offsets::PerQubit(map) => problem
                .qubits()
                .iter()
                .map(|q| map.get(&q.0).copied().unwrap_or(0.0))
                .collect(),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Offsets::LeftHalf(v) => vec![*v],
            Offsets::PerQubit(map) => map.values().copied().collect(),
        }
    }
}

/// Annealing schedule shared by the SA and SQA backends.
///
/// Inverse temperatures and transverse fields are in integer energy units
/// (1/28 of the dimensionless coupling scale), so `beta = 5` here equals
/// `beta = 140` against couplings of magnitude one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Monte Carlo sweeps per read; stands in for the annealing time.
    pub sweeps: u32,
    pub beta_start: f64,
    pub beta_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Offsets>,
    pub trotter_slices: u32,
    pub transverse_field_start: f64,
    pub transverse_field_end: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 5.0,
            offsets: None,
            trotter_slices: 16,
            transverse_field_start: 84.0,
            transverse_field_end: 0.28,
        }
    }
}

impl ScheduleConfig {
    pub fn with_sweeps(sweeps: u32) -> Self {
        ScheduleConfig {
            sweeps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sweeps == 0 {
            return bad("sweeps must be at least 1".into());
        }
        if !(self.beta_start.is_finite() && self.beta_end.is_finite()) {
            return bad("inverse temperatures must be finite".into());
        }
        if self.beta_start <= 0.0 || self.beta_end < self.beta_start {
            return bad(format!(
                "need 0 < beta_start <= beta_end, got {} and {}",
                self.beta_start, self.beta_end
            ));
        }
        if let Some(offsets) = &self.offsets {
            if let Some(v) = offsets.values().into_iter().find(|v| !(-1.0..=1.0).contains(v)) {
                return bad(format!("offset {v} outside [-1, 1]"));
            }
        }
        Ok(())
    }

    fn validate_quantum(&self) -> Result<()> {
        self.validate()?;
        if self.trotter_slices < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 Trotter slices, got {}",
                self.trotter_slices
            )));
        }
        let (g0, g1) = (self.transverse_field_start, self.transverse_field_end);
        if !(g0.is_finite() && g1.is_finite()) || g0 <= 0.0 || g1 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "transverse fields must be positive, got {g0} and {g1}"
            )));
        }
        Ok(())
    }
}

/// Backend name, the parameters it ran with and a digest of those parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub name: String,
    pub params: serde_json::Value,
    pub digest: String,
}

impl BackendInfo {
    pub fn new(name: &str, params: serde_json::Value) -> Self {
        let digest = params_digest(&params);
        BackendInfo {
            name: name.to_string(),
            params,
            digest,
        }
    }
}

/// First 16 hex digits of SHA-256 over the compact JSON rendering.
pub fn params_digest(params: &serde_json::Value) -> String {
    let hash = Sha256::digest(params.to_string().as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleEntry {
    pub config: CompositeConfig,
    pub energy: i64,
    pub occurrences: u64,
}

/// Distinct configurations with energies and occurrence counts, ordered by
/// energy then by the canonical spin order (`+1 < -1`, qubit-id order).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub entries: Vec<SampleEntry>,
    pub reads: u64,
    pub backend: BackendInfo,
    pub seed: u64,
}

/// `'0'` for spin up, `'1'` for spin down; sorts the same as the canonical order.
pub fn spins_to_bits(spins: &[Spin]) -> String {
    spins.iter().map(|s| if *s > 0 { '0' } else { '1' }).collect()
}

pub fn bits_to_spins(bits: &str) -> Result<Vec<Spin>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(1),
            '1' => Ok(-1),
            other => Err(Error::CorruptSampleSet(format!("bad spin character {other:?}"))),
        })
        .collect()
}

fn canonical_key(spins: &[Spin]) -> Vec<u8> {
    spins.iter().map(|s| u8::from(*s < 0)).collect()
}

impl SampleSet {
    /// Aggregates raw reads; energies are computed from `problem`.
    pub fn from_reads(
        problem: &CompositeProblem,
        reads: impl IntoIterator<Item = Vec<Spin>>,
        backend: BackendInfo,
        seed: u64,
    ) -> Result<Self> {
        let mut counts: BTreeMap<Vec<u8>, (Vec<Spin>, u64)> = BTreeMap::new();
        let mut total = 0u64;
        for spins in reads {
            problem.model().check(&spins)?;
            total += 1;
            counts
                .entry(canonical_key(&spins))
                .or_insert_with(|| (spins, 0))
                .1 += 1;
        }
        let entries = counts
            .into_values()
            .map(|(spins, occurrences)| SampleEntry {
                energy: problem.model().energy_unchecked(&spins),
                config: CompositeConfig::new(spins),
                occurrences,
            })
            .collect();
        let mut set = SampleSet {
            entries,
            reads: total,
            backend,
            seed,
        };
        set.sort();
        Ok(set)
    }

    fn sort(&mut self) {
        self.entries.sort_by(|x, y| {
            x.energy
                .cmp(&y.energy)
                .then_with(|| canonical_key(&x.config.spins).cmp(&canonical_key(&y.config.spins)))
        });
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_energy(&self) -> Option<i64> {
        self.entries.first().map(|e| e.energy)
    }

    /// Checks every invariant against `problem`: complete configurations,
    /// exact energies, occurrence total, ordering and distinctness.
    pub fn validate(&self, problem: &CompositeProblem) -> Result<()> {
        let mut total = 0u64;
        for (i, e) in self.entries.iter().enumerate() {
            let energy = problem.composite_energy(&e.config)?;
            if energy != e.energy {
                return Err(Error::CorruptSampleSet(format!(
                    "entry {i} claims energy {} but recomputes to {energy}",
                    e.energy
                )));
            }
            if e.occurrences == 0 {
                return Err(Error::CorruptSampleSet(format!("entry {i} has zero occurrences")));
            }
            total += e.occurrences;
        }
        if total != self.reads {
            return Err(Error::CorruptSampleSet(format!(
                "occurrences sum to {total}, reads = {}",
                self.reads
            )));
        }
        let ordered = self.entries.windows(2).all(|w| {
            (w[0].energy, canonical_key(&w[0].config.spins)) < (w[1].energy, canonical_key(&w[1].config.spins))
        });
        if !ordered {
            return Err(Error::CorruptSampleSet(
                "entries are not in canonical order or repeat a configuration".into(),
            ));
        }
        Ok(())
    }

    pub fn to_document(&self) -> SampleSetDocument {
        SampleSetDocument {
            backend: self.backend.name.clone(),
            params: self.backend.params.clone(),
            digest: self.backend.digest.clone(),
            seed: self.seed,
            reads: self.reads,
            entries: self
                .entries
                .iter()
                .map(|e| (spins_to_bits(&e.config.spins), e.energy, e.occurrences))
                .collect(),
        }
    }

    /// Reads a document and revalidates it against `problem`.
    pub fn ingest(doc: &SampleSetDocument, problem: &CompositeProblem) -> Result<Self> {
        if params_digest(&doc.params) != doc.digest {
            return Err(Error::CorruptSampleSet("parameter digest mismatch".into()));
        }
        let entries = doc
            .entries
            .iter()
            .map(|(bits, energy, occurrences)| {
                Ok(SampleEntry {
                    config: CompositeConfig::new(bits_to_spins(bits)?),
                    energy: *energy,
                    occurrences: *occurrences,
                })
            })
            .collect::<Result<_>>()?;
        let set = SampleSet {
            entries,
            reads: doc.reads,
            backend: BackendInfo {
                name: doc.backend.clone(),
                params: doc.params.clone(),
                digest: doc.digest.clone(),
            },
            seed: doc.seed,
        };
        set.validate(problem)?;
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("sample set serializes")
    }

    pub fn from_json(text: &str, problem: &CompositeProblem) -> Result<Self> {
        Self::ingest(&serde_json::from_str(text)?, problem)
    }
}

/// On-disk sample set; entries are `[bits, energy, occurrences]` in
/// canonical order, bits in ascending qubit-id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSetDocument {
    pub backend: String,
    pub params: serde_json::Value,
    pub digest: String,
    pub seed: u64,
    pub reads: u64,
    pub entries: Vec<(String, i64, u64)>,
}

/// All entries tied at the lowest energy.
pub fn lowest_energy_entries(set: &SampleSet) -> Result<&[SampleEntry]> {
    let min = set.min_energy().ok_or(Error::EmptySampleSet)?;
    let end = set.entries.iter().take_while(|e| e.energy == min).count();
    Ok(&set.entries[..end])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{build_composite, MirrorSign};
    use crate::instances::{generate_instance, Region};
    use crate::topology::{ChimeraTopology, MirrorPlane};

    fn problem() -> CompositeProblem {
        let t = ChimeraTopology::ideal(1, 2).unwrap();
        let p = MirrorPlane::centered(&t).unwrap();
        let r = Region::adjacent_to_plane(&t, p, 1, 1).unwrap();
        build_composite(&generate_instance(&r, true, 3).unwrap(), &t, p, 28, MirrorSign::Ferro).unwrap()
    }

    fn info() -> BackendInfo {
        BackendInfo::new("test", serde_json::json!({"k": 1}))
    }

    #[test]
    fn aggregation_and_ordering() {
        let p = problem();
        let up = vec![1; 16];
        let down = vec![-1; 16];
        let mut mixed = up.clone();
        mixed[3] = -1;
        let set = SampleSet::from_reads(&p, vec![mixed.clone(), up.clone(), up.clone(), down.clone()], info(), 0).unwrap();
        assert_eq!(set.reads, 4);
        assert_eq!(set.entries.iter().map(|e| e.occurrences).sum::<u64>(), 4);
        set.validate(&p).unwrap();
        let up_entry = set.entries.iter().find(|e| e.config.spins == up).unwrap();
        assert_eq!(up_entry.occurrences, 2);
    }

    #[test]
    fn lowest_entries() {
        let p = problem();
        let mk = |e: i64| SampleEntry {
            config: CompositeConfig::new(vec![1; 16]),
            energy: e,
            occurrences: 1,
        };
        let set = SampleSet {
            entries: vec![mk(-56), mk(-56), mk(-40)],
            reads: 3,
            backend: info(),
            seed: 0,
        };
        assert_eq!(lowest_energy_entries(&set).unwrap().len(), 2);
        let flat = SampleSet {
            entries: vec![mk(-3), mk(-3)],
            ..set.clone()
        };
        assert_eq!(lowest_energy_entries(&flat).unwrap().len(), 2);
        let empty = SampleSet {
            entries: vec![],
            ..set
        };
        assert!(matches!(lowest_energy_entries(&empty), Err(Error::EmptySampleSet)));
        let exact = solve_exact(&p).unwrap();
        assert_eq!(lowest_energy_entries(&exact).unwrap(), &exact.entries[..]);
    }

    #[test]
    fn ingest_catches_corruption() {
        let p = problem();
        let set = solve_sa(&p, &ScheduleConfig::with_sweeps(50), 20, 1).unwrap();
        let json = set.to_json();
        assert_eq!(SampleSet::from_json(&json, &p).unwrap(), set);

        let mut doc = set.to_document();
        doc.entries[0].1 -= 4;
        assert!(matches!(SampleSet::ingest(&doc, &p), Err(Error::CorruptSampleSet(_))));
        let mut doc = set.to_document();
        doc.reads += 1;
        assert!(SampleSet::ingest(&doc, &p).is_err());
        let mut doc = set.to_document();
        doc.entries[0].0.pop();
        assert!(SampleSet::ingest(&doc, &p).is_err());
        let mut doc = set.to_document();
        doc.params = serde_json::json!({"tampered": true});
        assert!(SampleSet::ingest(&doc, &p).is_err());
    }

    #[test]
    fn bit_strings_sort_canonically() {
        assert_eq!(spins_to_bits(&[1, -1, 1]), "010");
        assert_eq!(bits_to_spins("010").unwrap(), vec![1, -1, 1]);
        assert!(bits_to_spins("0x").is_err());
        assert!(spins_to_bits(&[1, 1]) < spins_to_bits(&[1, -1]));
    }

    #[test]
    fn schedule_validation() {
        assert!(ScheduleConfig::default().validate().is_ok());
        assert!(ScheduleConfig::with_sweeps(0).validate().is_err());
        let hot_end = ScheduleConfig {
            beta_start: 2.0,
            beta_end: 1.0,
            ..Default::default()
        };
        assert!(hot_end.validate().is_err());
        let offsets = ScheduleConfig {
            offsets: Some(Offsets::LeftHalf(-1.5)),
            ..Default::default()
        };
        assert!(offsets.validate().is_err());
        let slices = ScheduleConfig {
            trotter_slices: 1,
            ..Default::default()
        };
        assert!(slices.validate_quantum().is_err());
    }

    #[test]
    fn schedule_json_accepts_partial_documents() {
        let s: ScheduleConfig = serde_json::from_str(r#"{"sweeps": 7, "offsets": {"left_half": -0.0866969}}"#).unwrap();
        assert_eq!(s.sweeps, 7);
        assert_eq!(s.beta_end, 5.0);
        assert_eq!(s.offsets, Some(Offsets::LeftHalf(-0.0866969)));
        let s: ScheduleConfig = serde_json::from_str(r#"{"offsets": {"per_qubit": {"3": 0.5}}}"#).unwrap();
        assert!(matches!(s.offsets, Some(Offsets::PerQubit(ref m)) if m[&3] == 0.5));
    }
}
