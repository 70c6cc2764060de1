//! Random Ising instances with couplings and fields drawn from the Sidon set
//! `{±8, ±13, ±19, ±28} / 28`.
//!
//! All values are stored as integers in units of 1/28 so that energies are
//! exact and ties between configurations are never blurred by rounding.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{Spin, SpinModel};
use crate::rng;
use crate::topology::{ChimeraTopology, Coupler, MirrorPlane, QubitId};

/// Denominator of the integer unit.
pub const SCALE: i32 = 28;

/// Magnitudes of the Sidon set in integer units.
pub const SIDON_MAGNITUDES: [i32; 4] = [8, 13, 19, 28];

pub fn is_sidon_value(v: i32) -> bool {
    SIDON_MAGNITUDES.contains(&v.abs())
}

/// Uniform draw from the eight signed Sidon values.
fn draw_sidon<R: Rng>(rng: &mut R) -> i32 {
    let i = rng.gen_range(0..8usize);
    let magnitude = SIDON_MAGNITUDES[i / 2];
    if i % 2 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// Placement of a rectangular block of unit cells inside a host grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDescriptor {
    pub host_rows: u32,
    pub host_cols: u32,
    pub row_offset: u32,
    pub col_offset: u32,
    pub rows: u32,
    pub cols: u32,
}

impl RegionDescriptor {
    pub fn contains(&self, topology: &ChimeraTopology, q: QubitId) -> bool {
        let c = topology.coord(q);
        (self.row_offset..self.row_offset + self.rows).contains(&c.row)
            && (self.col_offset..self.col_offset + self.cols).contains(&c.col)
    }
}

/// The functional qubits and couplers of a block of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    descriptor: RegionDescriptor,
    qubits: Vec<QubitId>,
    couplers: Vec<Coupler>,
}

impl Region {
    pub fn new(
        topology: &ChimeraTopology,
        row_offset: u32,
        col_offset: u32,
        rows: u32,
        cols: u32,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidRegion(format!("empty block {rows}x{cols}")));
        }
        if row_offset + rows > topology.rows() || col_offset + cols > topology.cols() {
            return Err(Error::InvalidRegion(format!(
                "block {rows}x{cols} at ({row_offset}, {col_offset}) exceeds the {}x{} host",
                topology.rows(),
                topology.cols()
            )));
        }
        let descriptor = RegionDescriptor {
            host_rows: topology.rows(),
            host_cols: topology.cols(),
            row_offset,
            col_offset,
            rows,
            cols,
        };
        let qubits: Vec<QubitId> = topology
            .functional_qubits()
            .filter(|q| descriptor.contains(topology, *q))
            .collect();
        if qubits.is_empty() {
            return Err(Error::InvalidRegion("no functional qubits in block".into()));
        }
        let couplers = topology
            .functional_couplers()
            .into_iter()
            .filter(|c| descriptor.contains(topology, c.a()) && descriptor.contains(topology, c.b()))
            .collect();
        Ok(Region {
            descriptor,
            qubits,
            couplers,
        })
    }

    /// A `rows x cols` block occupying the columns just left of the plane,
    /// starting at the top row.
    pub fn adjacent_to_plane(
        topology: &ChimeraTopology,
        plane: MirrorPlane,
        rows: u32,
        cols: u32,
    ) -> Result<Self> {
        if cols > plane.split_col {
            return Err(Error::InvalidRegion(format!(
                "width {cols} exceeds the half-grid width {}",
                plane.split_col
            )));
        }
        Region::new(topology, 0, plane.split_col - cols, rows, cols)
    }

    pub fn descriptor(&self) -> RegionDescriptor {
        self.descriptor
    }

    pub fn qubits(&self) -> &[QubitId] {
        &self.qubits
    }

    pub fn couplers(&self) -> &[Coupler] {
        &self.couplers
    }
}

/// Problem Hamiltonian on a region, in integer units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingInstance {
    region: RegionDescriptor,
    couplings: BTreeMap<Coupler, i32>,
    fields: BTreeMap<QubitId, i32>,
    seed: u64,
}

impl IsingInstance {
    /// Builds an instance from explicit values. `fields` must list every
    /// functional qubit (zero included) and cover both ends of each coupler.
    pub fn from_parts(
        region: RegionDescriptor,
        couplings: BTreeMap<Coupler, i32>,
        fields: BTreeMap<QubitId, i32>,
        seed: u64,
    ) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::InvalidRegion("instance has no qubits".into()));
        }
        for c in couplings.keys() {
            if !fields.contains_key(&c.a()) || !fields.contains_key(&c.b()) {
                return Err(Error::InvalidRegion(format!(
                    "coupler ({}, {}) touches a qubit with no field entry",
                    c.a().0,
                    c.b().0
                )));
            }
        }
        Ok(IsingInstance {
            region,
            couplings,
            fields,
            seed,
        })
    }

    pub fn region(&self) -> RegionDescriptor {
        self.region
    }

    pub fn couplings(&self) -> &BTreeMap<Coupler, i32> {
        &self.couplings
    }

    pub fn fields(&self) -> &BTreeMap<QubitId, i32> {
        &self.fields
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Qubits in ascending id order; configurations are indexed the same way.
    pub fn qubits(&self) -> Vec<QubitId> {
        self.fields.keys().copied().collect()
    }

    pub fn num_qubits(&self) -> usize {
        self.fields.len()
    }

    pub fn model(&self) -> SpinModel {
        let index: BTreeMap<QubitId, usize> =
            self.fields.keys().enumerate().map(|(i, q)| (*q, i)).collect();
        SpinModel::new(
            self.fields.values().copied().collect(),
            self.couplings
                .iter()
                .map(|(c, v)| (index[&c.a()], index[&c.b()], *v)),
        )
    }

    /// `-sum J s s - sum h s` in integer units; `spins` follows [`Self::qubits`].
    pub fn energy(&self, spins: &[Spin]) -> Result<i64> {
        self.model().energy(spins)
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            region: self.region,
            scale: SCALE,
            seed: self.seed,
            couplings: self
                .couplings
                .iter()
                .map(|(c, v)| (c.a().0, c.b().0, *v))
                .collect(),
            fields: self.fields.iter().map(|(q, v)| (q.0, *v)).collect(),
        }
    }

    pub fn from_document(doc: &InstanceDocument) -> Result<Self> {
        check_scale(doc.scale)?;
        let couplings = collect_couplings(&doc.couplings)?;
        let fields = collect_fields(&doc.fields)?;
        IsingInstance::from_parts(doc.region, couplings, fields, doc.seed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }
}

pub(crate) fn check_scale(scale: i32) -> Result<()> {
    if scale == SCALE {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "scale denominator must be {SCALE}, got {scale}"
        )))
    }
}

pub(crate) fn collect_couplings(list: &[(u32, u32, i32)]) -> Result<BTreeMap<Coupler, i32>> {
    let mut out = BTreeMap::new();
    for &(a, b, v) in list {
        if a == b {
            return Err(Error::NotACoupler { a, b });
        }
        if out.insert(Coupler::new(QubitId(a), QubitId(b)), v).is_some() {
            return Err(Error::InvalidConfig(format!("duplicate coupler ({a}, {b})")));
        }
    }
    Ok(out)
}

pub(crate) fn collect_fields(list: &[(u32, i32)]) -> Result<BTreeMap<QubitId, i32>> {
    let mut out = BTreeMap::new();
    for &(q, v) in list {
        if out.insert(QubitId(q), v).is_some() {
            return Err(Error::InvalidConfig(format!("duplicate field for qubit {q}")));
        }
    }
    Ok(out)
}

/// On-disk instance. `couplings` holds `[a, b, value]` with `a < b`, `fields`
/// holds `[qubit, value]`; both sorted, values in units of 1/`scale`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub region: RegionDescriptor,
    pub scale: i32,
    pub seed: u64,
    pub couplings: Vec<(u32, u32, i32)>,
    pub fields: Vec<(u32, i32)>,
}

/// Draws one instance. Couplers are visited in ascending order, then (if
/// enabled) qubits in ascending order, each consuming one uniform draw.
pub fn generate_instance(region: &Region, with_fields: bool, seed: u64) -> Result<IsingInstance> {
    if region.qubits.is_empty() {
        return Err(Error::InvalidRegion("no functional qubits in region".into()));
    }
    let mut rng = rng::stream(seed);
    let couplings = region
        .couplers
        .iter()
        .map(|c| (*c, draw_sidon(&mut rng)))
        .collect();
    let fields = region
        .qubits
        .iter()
        .map(|q| (*q, if with_fields { draw_sidon(&mut rng) } else { 0 }))
        .collect();
    IsingInstance::from_parts(region.descriptor, couplings, fields, seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceBatch {
    pub instances: Vec<IsingInstance>,
    pub with_fields: bool,
    pub base_seed: u64,
}

/// Instance `k` uses seed `rng::derive(base_seed, k)`.
pub fn generate_batch(
    region: &Region,
    count: usize,
    with_fields: bool,
    base_seed: u64,
) -> Result<InstanceBatch> {
    if count == 0 {
        return Err(Error::InvalidConfig("batch size must be at least 1".into()));
    }
    let instances = (0..count as u64)
        .map(|k| generate_instance(region, with_fields, rng::derive(base_seed, k)))
        .collect::<Result<_>>()?;
    Ok(InstanceBatch {
        instances,
        with_fields,
        base_seed,
    })
}
