//! Simulated quantum annealing by path-integral Monte Carlo.
//!
//! The transverse-field Ising model at inverse temperature `beta` maps onto
//! `P` coupled classical replicas (Trotter slices) with weight
//!
//! ```text
//! exp( -(beta/P) sum_k E(s_k) + sum_k sum_i K_i s_{k,i} s_{k+1,i} ),
//! K_i = -1/2 ln tanh(beta * Gamma_i / P)
//! ```
//!
//! with periodic boundary in `k`. The transverse field is ramped from
//! `transverse_field_start` to `transverse_field_end`; a qubit with offset
//! `o` sees the ramp at progress `clamp(s + o, 0, 1)`.

use serde_json::json;

use crate::embedding::CompositeProblem;
use crate::error::{Error, Result};
use crate::ising::{Spin, SpinModel};
use crate::rng;
use crate::solvers::sa::{metropolis, random_spins};
use crate::solvers::{BackendInfo, SampleSet, ScheduleConfig};

fn replica_coupling(beta: f64, gamma: f64, slices: f64) -> f64 {
    -0.5 * (beta * gamma / slices).tanh().ln()
}

struct Ramp<'a> {
    schedule: &'a ScheduleConfig,
    offsets: &'a [f64],
}

impl Ramp<'_> {
    /// Replica coupling of every qubit at sweep `step`.
    fn couplings(&self, step: u32, out: &mut [f64]) {
        let s = self.schedule;
        let progress = if s.sweeps == 1 {
            1.0
        } else {
            f64::from(step) / f64::from(s.sweeps - 1)
        };
        let slices = f64::from(s.trotter_slices);
        for (k, o) in out.iter_mut().zip(self.offsets) {
            let p = (progress + o).clamp(0.0, 1.0);
            let gamma = s.transverse_field_start + (s.transverse_field_end - s.transverse_field_start) * p;
            *k = replica_coupling(s.beta_end, gamma, slices);
        }
    }
}

fn anneal(model: &SpinModel, ramp: &Ramp<'_>, seed: u64) -> Vec<Spin> {
    let mut rng = rng::stream(seed);
    let n = model.len();
    let p = ramp.schedule.trotter_slices as usize;
    let scaled_beta = ramp.schedule.beta_end / p as f64;
    let mut slices: Vec<Vec<Spin>> = (0..p).map(|_| random_spins(n, &mut rng)).collect();
    let mut k_perp = vec![0.0; n];
    for step in 0..ramp.schedule.sweeps {
        ramp.couplings(step, &mut k_perp);
        // local moves
        for k in 0..p {
            let (prev, next) = ((k + p - 1) % p, (k + 1) % p);
            for i in 0..n {
                let s = slices[k][i];
                let classical = scaled_beta * model.flip_delta(i, &slices[k]) as f64;
                let neighbours = f64::from(slices[prev][i] + slices[next][i]);
                let kinetic = 2.0 * k_perp[i] * f64::from(s) * neighbours;
                if metropolis(classical + kinetic, &mut rng) {
                    slices[k][i] = -s;
                }
            }
        }
        // world-line moves: flip qubit i in every slice at once
        for i in 0..n {
            let delta: f64 = slices
                .iter()
                .map(|slice| scaled_beta * model.flip_delta(i, slice) as f64)
                .sum();
            if metropolis(delta, &mut rng) {
                for slice in slices.iter_mut() {
                    slice[i] = -slice[i];
                }
            }
        }
    }
    slices.swap_remove(0)
}

/// Path-integral annealing at fixed `beta_end`; the final state of slice 0
/// is returned for each read. Read `r` uses `rng::derive(seed, r)`.
pub fn solve_sqa(
    problem: &CompositeProblem,
    schedule: &ScheduleConfig,
    reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    schedule.validate_quantum()?;
    if reads == 0 {
        return Err(Error::InvalidConfig("reads must be at least 1".into()));
    }
    let offsets = match &schedule.offsets {
        Some(o) => o.resolve(problem),
        None => vec![0.0; problem.num_qubits()],
    };
    let ramp = Ramp {
        schedule,
        offsets: &offsets,
    };
    let info = BackendInfo::new(
        "sqa",
        json!({
            "sweeps": schedule.sweeps,
            "beta": schedule.beta_end,
            "trotter_slices": schedule.trotter_slices,
            "transverse_field_start": schedule.transverse_field_start,
            "transverse_field_end": schedule.transverse_field_end,
            "offsets": schedule.offsets,
        }),
    );
    let model = problem.model();
    let samples = (0..reads).map(|r| anneal(model, &ramp, rng::derive(seed, r)));
    SampleSet::from_reads(problem, samples, info, seed)
}
