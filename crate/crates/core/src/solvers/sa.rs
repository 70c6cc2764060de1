use rand::Rng;
use serde_json::json;

use crate::embedding::CompositeProblem;
use crate::error::{Error, Result};
use crate::ising::{Spin, SpinModel};
use crate::rng;
use crate::solvers::{BackendInfo, SampleSet, ScheduleConfig};

/// Geometric interpolation from `start` to `end` over `sweeps` steps.
pub fn beta_ladder(start: f64, end: f64, sweeps: u32) -> Vec<f64> {
    if sweeps == 1 {
        return vec![end];
    }
    let ratio = (end / start).ln() / f64::from(sweeps - 1);
    (0..sweeps).map(|i| start * (ratio * f64::from(i)).exp()).collect()
}

pub(crate) fn random_spins<R: Rng>(n: usize, rng: &mut R) -> Vec<Spin> {
    (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()
}

#[inline]
pub(crate) fn metropolis<R: Rng>(delta: f64, rng: &mut R) -> bool {
    delta <= 0.0 || rng.gen::<f64>() < (-delta).exp()
}

fn anneal(model: &SpinModel, ladder: &[f64], seed: u64) -> Vec<Spin> {
    let mut rng = rng::stream(seed);
    let mut spins = random_spins(model.len(), &mut rng);
    for &beta in ladder {
        for i in 0..spins.len() {
            let delta = model.flip_delta(i, &spins);
            if metropolis(beta * delta as f64, &mut rng) {
                spins[i] = -spins[i];
            }
        }
    }
    spins
}

/// Thermal annealing: `reads` independent restarts from random states, each
/// doing `sweeps` sequential Metropolis sweeps down a geometric beta ladder.
/// Read `r` uses the stream `rng::derive(seed, r)`.
pub fn solve_sa(
    problem: &CompositeProblem,
    schedule: &ScheduleConfig,
    reads: u64,
    seed: u64,
) -> Result<SampleSet> {
    schedule.validate()?;
    if schedule.offsets.is_some() {
        return Err(Error::InvalidConfig(
            "annealing offsets need a quantum schedule; use the sqa backend".into(),
        ));
    }
    if reads == 0 {
        return Err(Error::InvalidConfig("reads must be at least 1".into()));
    }
    let ladder = beta_ladder(schedule.beta_start, schedule.beta_end, schedule.sweeps);
    let info = BackendInfo::new(
        "sa",
        json!({
            "sweeps": schedule.sweeps,
            "beta_start": schedule.beta_start,
            "beta_end": schedule.beta_end,
            "ladder": "geometric",
        }),
    );
    let model = problem.model();
    let samples = (0..reads).map(|r| anneal(model, &ladder, rng::derive(seed, r)));
    SampleSet::from_reads(problem, samples, info, seed)
}
