//! Compiled Ising model over dense spin indices, shared by every backend.

use crate::error::{Error, Result};

pub type Spin = i8;

/// `E(s) = -sum J_ij s_i s_j - sum h_i s_i` over dense indices `0..n`,
/// in integer units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinModel {
    fields: Vec<i32>,
    edges: Vec<(u32, u32, i32)>,
    adjacency: Vec<Vec<(u32, i32)>>,
}

impl SpinModel {
    /// Zero-valued edges are kept out of the adjacency lists.
    pub fn new(fields: Vec<i32>, edges: impl IntoIterator<Item = (usize, usize, i32)>) -> Self {
        let n = fields.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut kept = Vec::new();
        for (i, j, w) in edges {
            assert!(i < n && j < n && i != j, "edge ({i}, {j}) invalid for {n} spins");
            if w == 0 {
                continue;
            }
            adjacency[i].push((j as u32, w));
            adjacency[j].push((i as u32, w));
            kept.push((i as u32, j as u32, w));
        }
        SpinModel {
            fields,
            edges: kept,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[i32] {
        &self.fields
    }

    pub fn edges(&self) -> &[(u32, u32, i32)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(u32, i32)] {
        &self.adjacency[i]
    }

    pub fn check(&self, spins: &[Spin]) -> Result<()> {
        if spins.len() != self.len() {
            return Err(Error::ConfigLength {
                expected: self.len(),
                got: spins.len(),
            });
        }
        match spins.iter().position(|s| *s != 1 && *s != -1) {
            Some(index) => Err(Error::InvalidSpin {
                index,
                value: spins[index],
            }),
            None => Ok(()),
        }
    }

    /// Energy of a configuration already known to be valid.
    pub fn energy_unchecked(&self, spins: &[Spin]) -> i64 {
        let mut e = 0i64;
        for &(i, j, w) in &self.edges {
            e -= i64::from(w) * i64::from(spins[i as usize]) * i64::from(spins[j as usize]);
        }
        for (h, s) in self.fields.iter().zip(spins) {
            e -= i64::from(*h) * i64::from(*s);
        }
        e
    }

    pub fn energy(&self, spins: &[Spin]) -> Result<i64> {
        self.check(spins)?;
        Ok(self.energy_unchecked(spins))
    }

    /// `h_i + sum_j J_ij s_j`.
    #[inline]
    pub fn local_field(&self, i: usize, spins: &[Spin]) -> i64 {
        let mut f = i64::from(self.fields[i]);
        for &(j, w) in &self.adjacency[i] {
            f += i64::from(w) * i64::from(spins[j as usize]);
        }
        f
    }

    /// Energy change if spin `i` were flipped.
    #[inline]
    pub fn flip_delta(&self, i: usize, spins: &[Spin]) -> i64 {
        2 * i64::from(spins[i]) * self.local_field(i, spins)
    }
}
