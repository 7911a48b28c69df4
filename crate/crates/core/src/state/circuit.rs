use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::backend::Backend;
use super::sparse::SparseState;
use crate::Result;

pub type Predicate = Arc<dyn Fn(&[u64]) -> bool + Send + Sync>;
pub type LabelFn = Arc<dyn Fn(&mut [u64]) + Send + Sync>;

/// A reversible classical map on labels, given with its inverse.
#[derive(Clone)]
pub struct ClassicalMap {
    name: String,
    forward: LabelFn,
    inverse: LabelFn,
    /// Applications count as oracle queries.
    oracle: bool,
}

impl ClassicalMap {
    pub fn new(name: impl Into<String>, forward: LabelFn, inverse: LabelFn) -> Self {
        ClassicalMap { name: name.into(), forward, inverse, oracle: false }
    }

    /// A self-inverse map, e.g. an XOR write.
    pub fn involution(name: impl Into<String>, f: LabelFn) -> Self {
        Self::new(name, f.clone(), f)
    }

    pub fn counted_as_oracle(mut self) -> Self {
        self.oracle = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_oracle(&self) -> bool {
        self.oracle
    }

    pub fn apply(&self, label: &mut [u64], inverse: bool) {
        if inverse {
            (self.inverse)(label)
        } else {
            (self.forward)(label)
        }
    }
}

#[derive(Clone)]
pub enum Step {
    Qft {
        slot: usize,
        inverse: bool,
    },
    Hadamard {
        slot: usize,
    },
    /// Multiply labels satisfying the predicate by `i^quarter_turns`.
    Phase {
        name: String,
        pred: Predicate,
        quarter_turns: u32,
    },
    Map {
        map: ClassicalMap,
        inverse: bool,
    },
    Sub(Circuit),
}

impl Step {
    fn inverse(&self) -> Step {
        match self {
            Step::Qft { slot, inverse } => Step::Qft { slot: *slot, inverse: !inverse },
            Step::Hadamard { slot } => Step::Hadamard { slot: *slot },
            Step::Phase { name, pred, quarter_turns } => {
                Step::Phase { name: name.clone(), pred: pred.clone(), quarter_turns: (4 - quarter_turns % 4) % 4 }
            }
            Step::Map { map, inverse } => Step::Map { map: map.clone(), inverse: !inverse },
            Step::Sub(c) => Step::Sub(c.inverse()),
        }
    }
}

impl fmt::Debug for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Qft { slot, inverse } => write!(f, "qft{}[{slot}]", if *inverse { "^-1" } else { "" }),
            Step::Hadamard { slot } => write!(f, "h[{slot}]"),
            Step::Phase { name, quarter_turns, .. } => write!(f, "phase(i^{quarter_turns})[{name}]"),
            Step::Map { map, inverse } => write!(f, "{}{}", map.name, if *inverse { "^-1" } else { "" }),
            Step::Sub(c) => write!(f, "{c:?}"),
        }
    }
}

/// Query and transform counters accumulated while circuits run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub oracle_forward: u64,
    pub oracle_inverse: u64,
    pub qft_forward: u64,
    pub qft_inverse: u64,
    pub hadamard: u64,
    pub phase: u64,
}

impl GateCounts {
    pub fn oracle_calls(&self) -> u64 {
        self.oracle_forward + self.oracle_inverse
    }

    pub fn qft_calls(&self) -> u64 {
        self.qft_forward + self.qft_inverse
    }

    pub fn absorb(&mut self, other: &GateCounts) {
        self.oracle_forward += other.oracle_forward;
        self.oracle_inverse += other.oracle_inverse;
        self.qft_forward += other.qft_forward;
        self.qft_inverse += other.qft_inverse;
        self.hadamard += other.hadamard;
        self.phase += other.phase;
    }
}

/// Ordered list of invertible steps.
#[derive(Clone, Default)]
pub struct Circuit {
    steps: Vec<Step>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, step: Step) -> &mut Self {
        self.steps.push(step);
        self
    }

    pub fn qft(mut self, slot: usize) -> Self {
        self.steps.push(Step::Qft { slot, inverse: false });
        self
    }

    pub fn qft_inverse(mut self, slot: usize) -> Self {
        self.steps.push(Step::Qft { slot, inverse: true });
        self
    }

    pub fn hadamard(mut self, slot: usize) -> Self {
        self.steps.push(Step::Hadamard { slot });
        self
    }

    pub fn phase(mut self, name: &str, pred: Predicate, quarter_turns: u32) -> Self {
        self.steps.push(Step::Phase { name: name.into(), pred, quarter_turns });
        self
    }

    pub fn map(mut self, map: ClassicalMap) -> Self {
        self.steps.push(Step::Map { map, inverse: false });
        self
    }

    pub fn then(mut self, other: Circuit) -> Self {
        self.steps.push(Step::Sub(other));
        self
    }

    /// The same circuit acting on slots `offset..offset + width` of a wider
    /// layout.
    pub fn embed(&self, offset: usize, width: usize) -> Circuit {
        let steps = self
            .steps
            .iter()
            .map(|step| match step {
                Step::Qft { slot, inverse } => Step::Qft { slot: slot + offset, inverse: *inverse },
                Step::Hadamard { slot } => Step::Hadamard { slot: slot + offset },
                Step::Phase { name, pred, quarter_turns } => {
                    let pred = pred.clone();
                    Step::Phase {
                        name: name.clone(),
                        pred: Arc::new(move |l: &[u64]| pred(&l[offset..offset + width])),
                        quarter_turns: *quarter_turns,
                    }
                }
                Step::Map { map, inverse } => {
                    let (f, g) = (map.forward.clone(), map.inverse.clone());
                    let map = ClassicalMap {
                        name: map.name.clone(),
                        forward: Arc::new(move |l: &mut [u64]| f(&mut l[offset..offset + width])),
                        inverse: Arc::new(move |l: &mut [u64]| g(&mut l[offset..offset + width])),
                        oracle: map.oracle,
                    };
                    Step::Map { map, inverse: *inverse }
                }
                Step::Sub(c) => Step::Sub(c.embed(offset, width)),
            })
            .collect();
        Circuit { steps }
    }

    /// Reverse order, each step inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit { steps: self.steps.iter().rev().map(Step::inverse).collect() }
    }

    pub fn apply<B: Backend>(&self, state: &mut SparseState<B>, counts: &mut GateCounts) -> Result<()> {
        for step in &self.steps {
            match step {
                Step::Qft { slot, inverse } => {
                    state.apply_qft(*slot, *inverse)?;
                    if *inverse {
                        counts.qft_inverse += 1;
                    } else {
                        counts.qft_forward += 1;
                    }
                }
                Step::Hadamard { slot } => {
                    state.apply_hadamard(*slot)?;
                    counts.hadamard += 1;
                }
                Step::Phase { pred, quarter_turns, .. } => {
                    state.conditional_phase_i(pred.as_ref(), *quarter_turns);
                    counts.phase += 1;
                }
                Step::Map { map, inverse } => {
                    state.apply_classical_map(map, *inverse)?;
                    if map.oracle {
                        if *inverse {
                            counts.oracle_inverse += 1;
                        } else {
                            counts.oracle_forward += 1;
                        }
                    }
                }
                Step::Sub(c) => c.apply(state, counts)?,
            }
        }
        Ok(())
    }

    /// Applies the circuit to `start` and returns the result.
    pub fn run<B: Backend>(&self, start: SparseState<B>, counts: &mut GateCounts) -> Result<SparseState<B>> {
        let mut s = start;
        self.apply(&mut s, counts)?;
        Ok(s)
    }
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.steps).finish()
    }
}

/// `prep . S_0(i) . prep^-1 . S_good(i) . prep` (rightmost first): with good
/// mass exactly 1/2 the output lies entirely in the good subspace.
pub fn amplitude_amplify(prep: &Circuit, good: Predicate) -> Circuit {
    let all_zero: Predicate = Arc::new(|l: &[u64]| l.iter().all(|&v| v == 0));
    Circuit::new()
        .then(prep.clone())
        .phase("good", good, 1)
        .then(prep.inverse())
        .phase("zero", all_zero, 1)
        .then(prep.clone())
}
