//! Composite problem: the instance on the left of the mirror plane, its
//! mirror image on the right, and mirror couplings across the plane.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{self, IsingInstance, RegionDescriptor, SCALE};
use crate::ising::{Spin, SpinModel};
use crate::topology::{ChimeraTopology, Coupler, MirrorPlane, QubitId, TopologyDocument};

/// Sign of every mirror coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorSign {
    /// `M_k > 0`: mirror qubits are pulled into alignment.
    Ferro,
    /// `M_k < 0`: mirror qubits are pulled apart; right-half fields are negated.
    Antiferro,
}

impl MirrorSign {
    pub fn value(self) -> i32 {
        match self {
            MirrorSign::Ferro => 1,
            MirrorSign::Antiferro => -1,
        }
    }

    /// Splits a signed strength into (magnitude, sign). Zero counts as ferro.
    pub fn split(strength: i32) -> (i32, MirrorSign) {
        let sign = if strength < 0 {
            MirrorSign::Antiferro
        } else {
            MirrorSign::Ferro
        };
        (strength.abs(), sign)
    }
}

impl fmt::Display for MirrorSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MirrorSign::Ferro => "ferro",
            MirrorSign::Antiferro => "antiferro",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MirrorPair {
    pub left: QubitId,
    pub right: QubitId,
    /// Signed coupling in integer units.
    pub strength: i32,
}

/// Spins over every functional qubit of the composite, in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompositeConfig {
    pub spins: Vec<Spin>,
}

impl CompositeConfig {
    pub fn new(spins: Vec<Spin>) -> Self {
        CompositeConfig { spins }
    }
}

/// `H_T = H_prob + H'_prob + H_M` on a symmetrized Chimera host.
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    topology: ChimeraTopology,
    plane: MirrorPlane,
    region: RegionDescriptor,
    seed: u64,
    qubits: Vec<QubitId>,
    couplings: BTreeMap<Coupler, i32>,
    fields: BTreeMap<QubitId, i32>,
    mirror_pairs: Vec<MirrorPair>,
    mirror_sign: MirrorSign,
    strength: i32,
    model: SpinModel,
    is_left: Vec<bool>,
    mirror_index: Vec<usize>,
    columns: Vec<u32>,
}

/// Embeds `instance` and its mirror image around `plane`.
///
/// The instance must sit flush against the plane on the left and use only
/// qubits and couplers that stay functional once the host's dead sets are
/// symmetrized.
pub fn build_composite(
    instance: &IsingInstance,
    topology: &ChimeraTopology,
    plane: MirrorPlane,
    mirror_strength: i32,
    mirror_sign: MirrorSign,
) -> Result<CompositeProblem> {
    let strength = mirror_strength.abs();
    if strength > SCALE {
        return Err(Error::InvalidConfig(format!(
            "mirror strength {strength} exceeds {SCALE} (1.0)"
        )));
    }
    let host = topology.symmetrize_dead_sets(plane)?;
    let region = instance.region();
    if region.host_rows != host.rows() || region.host_cols != host.cols() {
        return Err(Error::InvalidRegion(format!(
            "instance was generated for a {}x{} host, topology is {}x{}",
            region.host_rows,
            region.host_cols,
            host.rows(),
            host.cols()
        )));
    }
    if region.cols > plane.split_col {
        return Err(Error::InvalidRegion(format!(
            "instance width {} exceeds the half-grid width {}",
            region.cols, plane.split_col
        )));
    }
    if region.col_offset + region.cols != plane.split_col {
        return Err(Error::InvalidRegion(format!(
            "instance occupies columns {}..{}, not flush against the plane at {}",
            region.col_offset,
            region.col_offset + region.cols,
            plane.split_col
        )));
    }
    for q in instance.fields().keys() {
        if !host.is_functional_qubit(*q) || !region.contains(&host, *q) {
            return Err(Error::InvalidRegion(format!(
                "qubit {} is outside the region or dead on the symmetrized host",
                q.0
            )));
        }
    }
    for c in instance.couplings().keys() {
        if !host.is_functional_coupler(*c) {
            return Err(Error::InvalidRegion(format!(
                "coupler ({}, {}) is dead on the symmetrized host",
                c.a().0,
                c.b().0
            )));
        }
    }

    let sign = mirror_sign.value();
    let mut couplings = instance.couplings().clone();
    for (c, v) in instance.couplings() {
        couplings.insert(host.mirror_coupler(plane, *c)?, *v);
    }
    let mut fields = instance.fields().clone();
    for (q, h) in instance.fields() {
        fields.insert(host.mirror(plane, *q)?, sign * h);
    }

    let boundary = plane.split_col - 1;
    let mut mirror_pairs = Vec::new();
    for row in region.row_offset..region.row_offset + region.rows {
        for k in 4..8 {
            let left = host.qubit(row, boundary, k);
            let right = host.qubit(row, plane.split_col, k);
            if instance.fields().contains_key(&left) && host.is_functional_coupler(Coupler::new(left, right)) {
                mirror_pairs.push(MirrorPair {
                    left,
                    right,
                    strength: sign * strength,
                });
            }
        }
    }
    if mirror_pairs.is_empty() {
        return Err(Error::InvalidRegion(
            "no functional couplers cross the mirror plane next to the instance".into(),
        ));
    }

    Ok(CompositeProblem::assemble(
        host,
        plane,
        region,
        instance.seed(),
        couplings,
        fields,
        mirror_pairs,
        mirror_sign,
        strength,
    ))
}

impl CompositeProblem {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        topology: ChimeraTopology,
        plane: MirrorPlane,
        region: RegionDescriptor,
        seed: u64,
        couplings: BTreeMap<Coupler, i32>,
        fields: BTreeMap<QubitId, i32>,
        mirror_pairs: Vec<MirrorPair>,
        mirror_sign: MirrorSign,
        strength: i32,
    ) -> Self {
        let qubits: Vec<QubitId> = fields.keys().copied().collect();
        let index: BTreeMap<QubitId, usize> = qubits.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        let edges = couplings
            .iter()
            .map(|(c, v)| (index[&c.a()], index[&c.b()], *v))
            .chain(
                mirror_pairs
                    .iter()
                    .map(|p| (index[&p.left], index[&p.right], p.strength)),
            );
        let model = SpinModel::new(fields.values().copied().collect(), edges);
        let is_left = qubits.iter().map(|q| topology.is_left_of(plane, *q)).collect();
        let mirror_index = qubits
            .iter()
            .map(|q| index[&topology.mirror(plane, *q).expect("plane checked")])
            .collect();
        let columns = qubits
            .iter()
            .map(|q| topology.column_of(plane, *q).expect("plane checked"))
            .collect();
        CompositeProblem {
            topology,
            plane,
            region,
            seed,
            qubits,
            couplings,
            fields,
            mirror_pairs,
            mirror_sign,
            strength,
            model,
            is_left,
            mirror_index,
            columns,
        }
    }

    pub fn topology(&self) -> &ChimeraTopology {
        &self.topology
    }

    pub fn plane(&self) -> MirrorPlane {
        self.plane
    }

    pub fn region(&self) -> RegionDescriptor {
        self.region
    }

    /// Seed of the instance this composite was built from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// All qubits of both halves in ascending id order.
    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// In-half couplings of both halves (mirror couplings excluded).
    pub fn couplings(&self) -> &BTreeMap<Coupler, i32> {
        &self.couplings
    }

    pub fn fields(&self) -> &BTreeMap<QubitId, i32> {
        &self.fields
    }

    pub fn mirror_pairs(&self) -> &[MirrorPair] {
        &self.mirror_pairs
    }

    pub fn mirror_sign(&self) -> MirrorSign {
        self.mirror_sign
    }

    /// `|M_k|` shared by every pair.
    pub fn mirror_strength(&self) -> i32 {
        self.strength
    }

    /// Signed strength `M_k`.
    pub fn signed_strength(&self) -> i32 {
        self.mirror_sign.value() * self.strength
    }

    pub fn model(&self) -> &SpinModel {
        &self.model
    }

    pub fn is_left(&self, index: usize) -> bool {
        self.is_left[index]
    }

    /// Dense index of the mirror image of the qubit at `index`.
    pub fn mirror_index(&self, index: usize) -> usize {
        self.mirror_index[index]
    }

    /// Column (1 = next to the plane) of the qubit at `index`.
    pub fn column(&self, index: usize) -> u32 {
        self.columns[index]
    }

    pub fn num_columns(&self) -> u32 {
        self.region.cols
    }

    /// Dense indices of the left-half qubits, ascending.
    pub fn left_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.qubits.len()).filter(|i| self.is_left[*i])
    }

    pub fn left_qubits(&self) -> Vec<QubitId> {
        self.left_indices().map(|i| self.qubits[i]).collect()
    }

    pub fn composite_energy(&self, config: &CompositeConfig) -> Result<i64> {
        self.model.energy(&config.spins)
    }

    /// Extends a left-half configuration (ordered as [`Self::left_qubits`])
    /// across the plane: copied in ferro mode, negated in antiferro mode.
    pub fn symmetric_extension(&self, sigma: &[Spin]) -> Result<CompositeConfig> {
        let left: Vec<usize> = self.left_indices().collect();
        if sigma.len() != left.len() {
            return Err(Error::ConfigLength {
                expected: left.len(),
                got: sigma.len(),
            });
        }
        let mut spins = vec![0; self.qubits.len()];
        for (pos, &i) in left.iter().enumerate() {
            spins[i] = sigma[pos];
            spins[self.mirror_index[i]] = self.mirror_sign.value() as Spin * sigma[pos];
        }
        self.model.check(&spins)?;
        Ok(CompositeConfig { spins })
    }

    /// The left half as a standalone instance.
    pub fn left_instance(&self) -> IsingInstance {
        let couplings = self
            .couplings
            .iter()
            .filter(|(c, _)| self.topology.is_left_of(self.plane, c.a()))
            .map(|(c, v)| (*c, *v))
            .collect();
        let fields = self
            .fields
            .iter()
            .filter(|(q, _)| self.topology.is_left_of(self.plane, **q))
            .map(|(q, v)| (*q, *v))
            .collect();
        IsingInstance::from_parts(self.region, couplings, fields, self.seed)
            .expect("left half is a valid instance")
    }

    pub fn to_document(&self) -> CompositeDocument {
        CompositeDocument {
            region: self.region,
            scale: SCALE,
            seed: self.seed,
            topology: self.topology.to_document(),
            couplings: self
                .couplings
                .iter()
                .map(|(c, v)| (c.a().0, c.b().0, *v))
                .collect(),
            fields: self.fields.iter().map(|(q, v)| (q.0, *v)).collect(),
            mirror_sign: self.mirror_sign,
            mirror_pairs: self
                .mirror_pairs
                .iter()
                .map(|p| (p.left.0, p.right.0, p.strength))
                .collect(),
        }
    }

    /// Parses and fully re-validates a composite document: the right half,
    /// field signs and mirror pairs must be exactly what [`build_composite`]
    /// would produce from the left half.
    pub fn from_document(doc: &CompositeDocument) -> Result<Self> {
        instances::check_scale(doc.scale)?;
        let topology = ChimeraTopology::from_document(&doc.topology)?;
        let plane = MirrorPlane::centered(&topology)?;
        let couplings = instances::collect_couplings(&doc.couplings)?;
        let fields = instances::collect_fields(&doc.fields)?;
        for q in fields.keys() {
            topology.check_qubit(*q)?;
        }
        let strengths: BTreeSet<i32> = doc.mirror_pairs.iter().map(|p| p.2).collect();
        if strengths.len() != 1 {
            return Err(Error::InvalidConfig(format!(
                "mirror pairs must share one strength, found {strengths:?}"
            )));
        }
        let signed = *strengths.iter().next().expect("nonempty");
        if signed * doc.mirror_sign.value() < 0 {
            return Err(Error::InvalidConfig(format!(
                "mirror strength {signed} disagrees with mirror_sign {}",
                doc.mirror_sign
            )));
        }
        let left_couplings = couplings
            .iter()
            .filter(|(c, _)| topology.is_left_of(plane, c.a()) && topology.is_left_of(plane, c.b()))
            .map(|(c, v)| (*c, *v))
            .collect();
        let left_fields = fields
            .iter()
            .filter(|(q, _)| topology.is_left_of(plane, **q))
            .map(|(q, v)| (*q, *v))
            .collect();
        let left = IsingInstance::from_parts(doc.region, left_couplings, left_fields, doc.seed)?;
        let rebuilt = build_composite(&left, &topology, plane, signed, doc.mirror_sign)?;
        let canonical = rebuilt.to_document();
        let mut given = doc.clone();
        given.couplings.sort_unstable();
        given.fields.sort_unstable();
        given.mirror_pairs.sort_unstable();
        let mut expected = canonical;
        expected.mirror_pairs.sort_unstable();
        if given != expected {
            return Err(Error::InvalidConfig(
                "composite document is not mirror-consistent with its left half".into(),
            ));
        }
        Ok(rebuilt)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("composite serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}

/// Instance schema plus the host topology, `mirror_sign` and
/// `mirror_pairs` as `[left, right, M]` triples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeDocument {
    pub region: RegionDescriptor,
    pub scale: i32,
    pub seed: u64,
    pub topology: TopologyDocument,
    pub couplings: Vec<(u32, u32, i32)>,
    pub fields: Vec<(u32, i32)>,
    pub mirror_sign: MirrorSign,
    pub mirror_pairs: Vec<(u32, u32, i32)>,
}
