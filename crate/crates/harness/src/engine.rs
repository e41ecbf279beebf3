//! Trial execution. Trial `t` of job `j` draws from substream
//! `j·N + t` of the root seed, so results do not depend on how trials are
//! split across workers.

use std::thread;

use ontic_core::dd::{DdError, DdPreparation, PathOrdering, Resolution, Sampler};
use ontic_core::stats::SeedStream;
use ontic_core::{Direction, DirectionGrid, QubitState, Sign};
use rand::Rng;

/// Everything a batch of sequential-measurement trials needs.
#[derive(Debug, Clone, Copy)]
pub struct ChainJob<'a> {
    pub grid: &'a DirectionGrid,
    pub resolution: Resolution,
    pub ordering: PathOrdering,
    pub sampler: Sampler,
    pub prep: QubitState,
    pub chain: &'a [Direction],
}

/// Quantized `(N₊, N₋)` for every grid eigenstate and axis, indexed by
/// `2·direction + (sign == −)` then axis id.
struct CountTable {
    axes: usize,
    pairs: Vec<(u32, u32)>,
}

impl CountTable {
    fn new(grid: &DirectionGrid, resolution: Resolution) -> Self {
        let axes = grid.len();
        let mut pairs = Vec::with_capacity(2 * axes * axes);
        for state in grid.eigenstates() {
            let counts = ontic_core::dd::quantized_counts_for(&state, grid, resolution);
            pairs.extend(grid.directions().iter().map(|axis| counts.pair(axis.id())));
        }
        Self { axes, pairs }
    }

    fn pair(&self, state: &QubitState, axis: usize) -> (u32, u32) {
        let row = 2 * state.direction.id() + usize::from(state.sign == Sign::Minus);
        self.pairs[row * self.axes + axis]
    }
}

/// Index of an outcome sequence in [`chain_counts`]' result: step `k`
/// contributes bit `L−1−k` when its outcome is `−`, so `+…+` is 0 and the
/// order is lexicographic with `+` first.
pub fn sequence_index(outcomes: &[Sign]) -> usize {
    outcomes
        .iter()
        .fold(0, |acc, s| (acc << 1) | usize::from(*s == Sign::Minus))
}

pub fn sequence_label(index: usize, len: usize) -> String {
    (0..len)
        .map(|k| {
            if index >> (len - 1 - k) & 1 == 1 {
                '-'
            } else {
                '+'
            }
        })
        .collect()
}

/// Runs `trials` trials of `job` on substreams `first_trial..first_trial +
/// trials` and returns the count of every outcome sequence, indexed by
/// [`sequence_index`].
pub fn chain_counts(
    job: &ChainJob<'_>,
    stream: SeedStream,
    first_trial: u64,
    trials: u64,
    workers: usize,
) -> Result<Vec<u64>, DdError> {
    assert!(
        job.chain.len() < 32,
        "chains longer than 31 steps are not supported"
    );
    let prep = DdPreparation::new(job.prep, job.grid, job.resolution, job.ordering)?;
    for axis in job.chain {
        if !job.grid.contains(axis) {
            return Err(DdError::AxisNotInGrid(axis.id()));
        }
    }
    let table =
        (job.sampler == Sampler::VisitCounts).then(|| CountTable::new(job.grid, job.resolution));
    let outcomes = 1usize << job.chain.len();

    let run = |range: std::ops::Range<u64>| -> Result<Vec<u64>, DdError> {
        let mut counts = vec![0u64; outcomes];
        let mut buffer = Vec::with_capacity(job.chain.len());
        for t in range {
            let mut rng = stream.rng(first_trial + t);
            buffer.clear();
            match &table {
                Some(table) => {
                    let mut state = job.prep;
                    for axis in job.chain {
                        let (plus, minus) = table.pair(&state, axis.id());
                        let visible = plus + minus;
                        if visible == 0 {
                            return Err(DdError::EmptyVisibleSet(axis.id()));
                        }
                        // Same draw as VisitCounts::select.
                        let sign = if rng.gen_range(0..visible) < plus {
                            Sign::Plus
                        } else {
                            Sign::Minus
                        };
                        buffer.push(sign);
                        state = QubitState::new(*axis, sign);
                    }
                }
                None => buffer.extend(prep.run_sequential(job.chain, job.sampler, &mut rng)?),
            }
            counts[sequence_index(&buffer)] += 1;
        }
        Ok(counts)
    };

    let workers = workers.clamp(1, trials.max(1) as usize);
    if workers == 1 {
        return run(0..trials);
    }
    let chunk = trials.div_ceil(workers as u64);
    let partials: Vec<Result<Vec<u64>, DdError>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let start = (w * chunk).min(trials);
                let end = ((w + 1) * chunk).min(trials);
                let run = &run;
                scope.spawn(move || run(start..end))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut total = vec![0u64; outcomes];
    for partial in partials {
        for (acc, n) in total.iter_mut().zip(partial?) {
            *acc += n;
        }
    }
    Ok(total)
}
