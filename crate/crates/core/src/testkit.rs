//! Seeded random step functions for sweeps and tests.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stepfn::StepFunction;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of the generated functions.
#[derive(Debug, Clone)]
pub struct StepGen {
    pub max_pieces: usize,
    /// Draw values from this many distinct magnitudes (`None`: all distinct).
    pub levels: Option<usize>,
    pub signed: bool,
    /// Probability of a zero piece.
    pub zero_rate: f64,
    pub max_value: f64,
}

impl Default for StepGen {
    fn default() -> Self {
        StepGen {
            max_pieces: 20,
            levels: None,
            signed: true,
            zero_rate: 0.1,
            max_value: 5.0,
        }
    }
}

impl StepGen {
    pub fn nonnegative(mut self) -> Self {
        self.signed = false;
        self
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn with_max_pieces(mut self, max_pieces: usize) -> Self {
        self.max_pieces = max_pieces;
        self
    }

    pub fn sample(&self, rng: &mut impl Rng) -> StepFunction {
        let pieces = rng.random_range(1..=self.max_pieces.max(1));
        let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.random::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        let mut breakpoints = vec![0.0];
        for c in cuts {
            if c > *breakpoints.last().unwrap() && c < 1.0 {
                breakpoints.push(c);
            }
        }
        breakpoints.push(1.0);
        let palette: Vec<f64> = match self.levels {
            Some(k) => (0..k.max(1))
                .map(|_| rng.random_range(0.05..=self.max_value))
                .collect(),
            None => Vec::new(),
        };
        let values = (1..breakpoints.len())
            .map(|_| {
                if rng.random::<f64>() < self.zero_rate {
                    return 0.0;
                }
                let v = if palette.is_empty() {
                    rng.random_range(0.05..=self.max_value)
                } else {
                    *palette.choose(rng).unwrap()
                };
                if self.signed && rng.random::<bool>() {
                    -v
                } else {
                    v
                }
            })
            .collect();
        StepFunction::new(breakpoints, values).expect("valid by construction")
    }

    /// A function `g` with `0 ≤ g ≤ |h|` pointwise.
    pub fn sample_below(&self, h: &StepFunction, rng: &mut impl Rng) -> StepFunction {
        let values = h.values().iter().map(|v| v.abs() * rng.random::<f64>()).collect();
        StepFunction::new(h.breakpoints().to_vec(), values).expect("same grid")
    }
}

/// Non-negative functions whose layer profile has exactly `layers` levels.
pub fn with_layer_count(layers: usize, rng: &mut impl Rng) -> StepFunction {
    loop {
        let f = StepGen {
            max_pieces: layers + 6,
            levels: Some(layers),
            signed: false,
            zero_rate: 0.15,
            max_value: 5.0,
        }
        .sample(rng);
        if f.layer_profile().len() == layers {
            return f;
        }
    }
}
