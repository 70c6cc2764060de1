use serde_json::json;

use crate::embedding::CompositeProblem;
use crate::error::{Error, Result};
use crate::ising::{Spin, SpinModel};
use crate::solvers::{BackendInfo, SampleSet};

/// Largest problem the exhaustive backend will enumerate.
pub const EXACT_QUBIT_LIMIT: usize = 28;

/// Walks all `2^n` configurations in Gray-code order, updating the energy
/// with one single-spin flip per step. Returns the minimum and every
/// configuration attaining it.
pub(crate) fn enumerate_minima(model: &SpinModel) -> Result<(i64, Vec<Vec<Spin>>)> {
    let n = model.len();
    if n > EXACT_QUBIT_LIMIT {
        return Err(Error::TooLargeForExact {
            qubits: n,
            limit: EXACT_QUBIT_LIMIT,
        });
    }
    let mut spins: Vec<Spin> = vec![1; n];
    let mut energy = model.energy_unchecked(&spins);
    let mut mask = 0u32;
    let mut best = energy;
    let mut minima = vec![0u32];
    for step in 1u32..(1u32 << n) {
        let bit = step.trailing_zeros() as usize;
        energy += model.flip_delta(bit, &spins);
        spins[bit] = -spins[bit];
        mask ^= 1 << bit;
        if energy < best {
            best = energy;
            minima.clear();
            minima.push(mask);
        } else if energy == best {
            minima.push(mask);
        }
    }
    let configs = minima
        .into_iter()
        .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { -1 } else { 1 }).collect())
        .collect();
    Ok((best, configs))
}

/// Every ground state of the composite, each with one occurrence.
pub fn solve_exact(problem: &CompositeProblem) -> Result<SampleSet> {
    let (_, minima) = enumerate_minima(problem.model())?;
    let info = BackendInfo::new("exact", json!({ "limit": EXACT_QUBIT_LIMIT }));
    SampleSet::from_reads(problem, minima, info, 0)
}
