use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How measurement outcomes are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    /// Sample the exact outcome distribution from a seeded stream.
    Seeded(u64),
    /// Least support value in the caller's preferred class, falling back to
    /// the least support value overall. Callers prefer the least useful
    /// outcome, so this is an adversarial but reproducible schedule.
    Deterministic,
}

enum Kind {
    Seeded(ChaCha8Rng),
    Deterministic { strict: bool },
    Replay(VecDeque<Vec<u64>>),
}

/// Outcome source plus a log of every outcome it produced.
pub struct Sampler {
    kind: Kind,
    log: Vec<Vec<u64>>,
}

pub type Prefer<'a> = Option<&'a dyn Fn(&[u64]) -> bool>;

impl Sampler {
    pub fn new(mode: MeasureMode) -> Self {
        match mode {
            MeasureMode::Seeded(seed) => Self::seeded(seed),
            MeasureMode::Deterministic => Self::deterministic(),
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Sampler { kind: Kind::Seeded(ChaCha8Rng::seed_from_u64(seed)), log: Vec::new() }
    }

    pub fn deterministic() -> Self {
        Sampler { kind: Kind::Deterministic { strict: false }, log: Vec::new() }
    }

    /// Deterministic, but the support must lie inside one class of the
    /// announced partition (a single value when no partition is announced).
    pub fn strict() -> Self {
        Sampler { kind: Kind::Deterministic { strict: true }, log: Vec::new() }
    }

    /// Replays a recorded outcome sequence.
    pub fn replay(outcomes: impl IntoIterator<Item = Vec<u64>>) -> Self {
        Sampler { kind: Kind::Replay(outcomes.into_iter().collect()), log: Vec::new() }
    }

    pub fn log(&self) -> &[Vec<u64>] {
        &self.log
    }

    pub fn into_log(self) -> Vec<Vec<u64>> {
        self.log
    }

    /// Picks one of `values` (sorted, all with positive weight).
    pub fn choose<W>(
        &mut self,
        values: &[Vec<u64>],
        weights: &[W],
        prefer: Prefer<'_>,
        sample: impl FnOnce(&[W], &mut ChaCha8Rng) -> usize,
    ) -> Result<usize> {
        assert!(!values.is_empty() && values.len() == weights.len());
        let idx = match &mut self.kind {
            Kind::Seeded(rng) => sample(weights, rng),
            Kind::Deterministic { strict: false } => match prefer {
                Some(p) => values.iter().position(|v| p(v)).unwrap_or(0),
                None => 0,
            },
            Kind::Deterministic { strict: true } => {
                let confined = match prefer {
                    Some(p) => {
                        let first = p(&values[0]);
                        values.iter().all(|v| p(v) == first)
                    }
                    None => values.len() == 1,
                };
                if !confined {
                    return Err(Error::NotConfined);
                }
                0
            }
            Kind::Replay(queue) => {
                let want = queue.pop_front().ok_or_else(|| Error::Precondition("replay log exhausted".into()))?;
                values
                    .iter()
                    .position(|v| *v == want)
                    .ok_or_else(|| Error::Precondition(format!("replayed outcome {want:?} has zero mass")))?
            }
        };
        self.log.push(values[idx].clone());
        Ok(idx)
    }
}
