//! Chimera host graph: unit-cell geometry, dead-qubit masks and the mirror plane.
//!
//! Qubit ids are laid out row-major over unit cells with the intra-cell index
//! varying fastest: `id = 8 * (row * cols + col) + k`. Within a cell,
//! `k in 0..4` is the vertical partition and `k in 4..8` the horizontal one.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CELL_SIZE: u32 = 8;
const HALF_CELL: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// An undirected coupler, always stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coupler {
    a: QubitId,
    b: QubitId,
}

impl Coupler {
    pub fn new(x: QubitId, y: QubitId) -> Self {
        if x <= y {
            Coupler { a: x, b: y }
        } else {
            Coupler { a: y, b: x }
        }
    }

    pub fn a(&self) -> QubitId {
        self.a
    }

    pub fn b(&self) -> QubitId {
        self.b
    }

    pub fn touches(&self, q: QubitId) -> bool {
        self.a == q || self.b == q
    }
}

impl Serialize for Coupler {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a.0, self.b.0].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coupler {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[u32; 2]>::deserialize(d)?;
        Ok(Coupler::new(QubitId(a), QubitId(b)))
    }
}

/// Position of a qubit inside the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCoord {
    pub row: u32,
    pub col: u32,
    pub k: u32,
}

/// Vertical plane between unit-cell columns `split_col - 1` and `split_col`.
///
/// The couplers crossing it are the horizontal inter-cell couplers
/// (intra index 4..8) joining those two columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MirrorPlane {
    pub split_col: u32,
}

impl MirrorPlane {
    /// The plane cutting `topology` into two halves of equal width.
    pub fn centered(topology: &ChimeraTopology) -> Result<Self> {
        if topology.cols % 2 != 0 {
            return Err(Error::InvalidTopology(format!(
                "a mirror plane needs an even number of cell columns, got {}",
                topology.cols
            )));
        }
        Ok(MirrorPlane {
            split_col: topology.cols / 2,
        })
    }

    fn check(&self, topology: &ChimeraTopology) -> Result<()> {
        if self.split_col == 0 || 2 * self.split_col != topology.cols {
            return Err(Error::InvalidTopology(format!(
                "split column {} does not halve {} columns",
                self.split_col, topology.cols
            )));
        }
        Ok(())
    }
}

/// A Chimera graph `C_{rows,cols}` with inaccessible qubits and couplers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraTopology {
    rows: u32,
    cols: u32,
    dead_qubits: BTreeSet<QubitId>,
    dead_couplers: BTreeSet<Coupler>,
}

impl ChimeraTopology {
    /// Builds the topology; every coupler touching a dead qubit is marked dead.
    pub fn new(
        rows: u32,
        cols: u32,
        dead_qubits: impl IntoIterator<Item = QubitId>,
        dead_couplers: impl IntoIterator<Item = Coupler>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidTopology(format!(
                "grid must have at least one cell, got {rows}x{cols}"
            )));
        }
        let count = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(CELL_SIZE))
            .ok_or_else(|| Error::InvalidTopology(format!("{rows}x{cols} grid is too large")))?;
        let mut topology = ChimeraTopology {
            rows,
            cols,
            dead_qubits: BTreeSet::new(),
            dead_couplers: BTreeSet::new(),
        };
        for q in dead_qubits {
            if q.0 >= count {
                return Err(Error::QubitOutOfRange { id: q.0, count });
            }
            topology.dead_qubits.insert(q);
        }
        for c in dead_couplers {
            topology.check_coupler(c.a, c.b)?;
            topology.dead_couplers.insert(c);
        }
        topology.close_dead_couplers();
        Ok(topology)
    }

    pub fn ideal(rows: u32, cols: u32) -> Result<Self> {
        Self::new(rows, cols, [], [])
    }

    fn close_dead_couplers(&mut self) {
        let dead: Vec<QubitId> = self.dead_qubits.iter().copied().collect();
        for q in dead {
            for n in self.neighbors(q) {
                self.dead_couplers.insert(Coupler::new(q, n));
            }
        }
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn num_qubits(&self) -> u32 {
        CELL_SIZE * self.rows * self.cols
    }

    pub fn dead_qubits(&self) -> &BTreeSet<QubitId> {
        &self.dead_qubits
    }

    pub fn dead_couplers(&self) -> &BTreeSet<Coupler> {
        &self.dead_couplers
    }

    pub fn check_qubit(&self, q: QubitId) -> Result<()> {
        if q.0 < self.num_qubits() {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange {
                id: q.0,
                count: self.num_qubits(),
            })
        }
    }

    fn check_coupler(&self, a: QubitId, b: QubitId) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if self.is_coupler(a, b) {
            Ok(())
        } else {
            Err(Error::NotACoupler { a: a.0, b: b.0 })
        }
    }

    /// Panics if `q` is out of range.
    pub fn coord(&self, q: QubitId) -> CellCoord {
        assert!(q.0 < self.num_qubits(), "{q} out of range");
        let cell = q.0 / CELL_SIZE;
        CellCoord {
            row: cell / self.cols,
            col: cell % self.cols,
            k: q.0 % CELL_SIZE,
        }
    }

    pub fn qubit(&self, row: u32, col: u32, k: u32) -> QubitId {
        debug_assert!(row < self.rows && col < self.cols && k < CELL_SIZE);
        QubitId(CELL_SIZE * (row * self.cols + col) + k)
    }

    pub fn is_coupler(&self, a: QubitId, b: QubitId) -> bool {
        if a.0 >= self.num_qubits() || b.0 >= self.num_qubits() || a == b {
            return false;
        }
        let (x, y) = (self.coord(a), self.coord(b));
        if (x.row, x.col) == (y.row, y.col) {
            return (x.k < HALF_CELL) != (y.k < HALF_CELL);
        }
        if x.k != y.k {
            return false;
        }
        if x.k < HALF_CELL {
            x.col == y.col && x.row.abs_diff(y.row) == 1
        } else {
            x.row == y.row && x.col.abs_diff(y.col) == 1
        }
    }

    /// All Chimera neighbours of `q`, dead or alive.
    pub fn neighbors(&self, q: QubitId) -> Vec<QubitId> {
        let c = self.coord(q);
        let mut out = Vec::with_capacity(6);
        let partners = if c.k < HALF_CELL {
            HALF_CELL..CELL_SIZE
        } else {
            0..HALF_CELL
        };
        out.extend(partners.map(|k| self.qubit(c.row, c.col, k)));
        if c.k < HALF_CELL {
            if c.row > 0 {
                out.push(self.qubit(c.row - 1, c.col, c.k));
            }
            if c.row + 1 < self.rows {
                out.push(self.qubit(c.row + 1, c.col, c.k));
            }
        } else {
            if c.col > 0 {
                out.push(self.qubit(c.row, c.col - 1, c.k));
            }
            if c.col + 1 < self.cols {
                out.push(self.qubit(c.row, c.col + 1, c.k));
            }
        }
        out
    }

    /// Every coupler of the ideal graph, in ascending order.
    pub fn couplers(&self) -> Vec<Coupler> {
        let mut out = Vec::new();
        for id in 0..self.num_qubits() {
            let q = QubitId(id);
            out.extend(self.neighbors(q).into_iter().filter(|n| *n > q).map(|n| Coupler::new(q, n)));
        }
        out.sort();
        out
    }

    pub fn is_functional_qubit(&self, q: QubitId) -> bool {
        q.0 < self.num_qubits() && !self.dead_qubits.contains(&q)
    }

    pub fn is_functional_coupler(&self, c: Coupler) -> bool {
        self.is_coupler(c.a, c.b) && !self.dead_couplers.contains(&c)
    }

    pub fn functional_qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        (0..self.num_qubits())
            .map(QubitId)
            .filter(|q| !self.dead_qubits.contains(q))
    }

    pub fn functional_couplers(&self) -> Vec<Coupler> {
        self.couplers()
            .into_iter()
            .filter(|c| !self.dead_couplers.contains(c))
            .collect()
    }

    /// Reflection of `q` through `plane`; row and intra-cell index are kept.
    pub fn mirror(&self, plane: MirrorPlane, q: QubitId) -> Result<QubitId> {
        plane.check(self)?;
        self.check_qubit(q)?;
        let c = self.coord(q);
        Ok(self.qubit(c.row, 2 * plane.split_col - 1 - c.col, c.k))
    }

    pub fn mirror_coupler(&self, plane: MirrorPlane, c: Coupler) -> Result<Coupler> {
        Ok(Coupler::new(self.mirror(plane, c.a)?, self.mirror(plane, c.b)?))
    }

    /// Union of the dead sets with their mirror images.
    pub fn symmetrize_dead_sets(&self, plane: MirrorPlane) -> Result<ChimeraTopology> {
        plane.check(self)?;
        let mut qubits = self.dead_qubits.clone();
        for q in &self.dead_qubits {
            qubits.insert(self.mirror(plane, *q)?);
        }
        let mut couplers = self.dead_couplers.clone();
        for c in &self.dead_couplers {
            couplers.insert(self.mirror_coupler(plane, *c)?);
        }
        ChimeraTopology::new(self.rows, self.cols, qubits, couplers)
    }

    /// Distance of the qubit's cell column from the plane, starting at 1 on
    /// both sides.
    pub fn column_of(&self, plane: MirrorPlane, q: QubitId) -> Result<u32> {
        plane.check(self)?;
        self.check_qubit(q)?;
        let col = self.coord(q).col;
        Ok(if col < plane.split_col {
            plane.split_col - col
        } else {
            col - plane.split_col + 1
        })
    }

    pub fn is_left_of(&self, plane: MirrorPlane, q: QubitId) -> bool {
        self.coord(q).col < plane.split_col
    }

    pub fn to_document(&self) -> TopologyDocument {
        TopologyDocument {
            rows: self.rows,
            cols: self.cols,
            dead_qubits: self.dead_qubits.iter().map(|q| q.0).collect(),
            dead_couplers: self.dead_couplers.iter().copied().collect(),
        }
    }

    pub fn from_document(doc: &TopologyDocument) -> Result<Self> {
        ChimeraTopology::new(
            doc.rows,
            doc.cols,
            doc.dead_qubits.iter().copied().map(QubitId),
            doc.dead_couplers.iter().copied(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("topology serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TopologyDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// On-disk form of a topology. Arrays are sorted so files are byte-comparable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    pub rows: u32,
    pub cols: u32,
    pub dead_qubits: Vec<u32>,
    pub dead_couplers: Vec<Coupler>,
}
