#![allow(dead_code)]

use imbhn_core::{Corpus, Instance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TARGET: &str = "bank";

/// Shape of a generated corpus.
#[derive(Debug, Clone)]
pub struct Synth {
    pub class_sizes: Vec<usize>,
    /// Words private to each sense.
    pub sense_vocab: usize,
    /// Words any sense may use.
    pub shared_vocab: usize,
    /// Probability that a context word comes from the shared pool.
    pub shared_rate: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Sprinkle stopwords and punctuation into contexts.
    pub noise: bool,
}

impl Synth {
    pub fn disjoint(class_sizes: Vec<usize>) -> Self {
        Synth {
            class_sizes,
            sense_vocab: 12,
            shared_vocab: 0,
            shared_rate: 0.0,
            min_len: 8,
            max_len: 16,
            noise: false,
        }
    }

    pub fn noisy(class_sizes: Vec<usize>) -> Self {
        Synth {
            class_sizes,
            sense_vocab: 15,
            shared_vocab: 30,
            shared_rate: 0.6,
            min_len: 8,
            max_len: 20,
            noise: true,
        }
    }

    pub fn generate(&self, seed: u64) -> Corpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let senses: Vec<String> = (0..self.class_sizes.len())
            .map(|s| format!("sense{s}"))
            .collect();
        let mut labels: Vec<usize> = self
            .class_sizes
            .iter()
            .enumerate()
            .flat_map(|(s, &n)| std::iter::repeat_n(s, n))
            .collect();
        labels.shuffle(&mut rng);

        let instances = labels
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let len = rng.gen_range(self.min_len..=self.max_len);
                let target_index = rng.gen_range(0..len);
                let tokens: Vec<String> = (0..len)
                    .map(|p| {
                        if p == target_index {
                            return TARGET.to_string();
                        }
                        if self.noise && rng.gen_bool(0.15) {
                            return ["the", "of", ",", "and", "."][rng.gen_range(0..5)].to_string();
                        }
                        if self.shared_vocab > 0 && rng.gen_bool(self.shared_rate) {
                            format!("common{}", rng.gen_range(0..self.shared_vocab))
                        } else {
                            format!("s{s}word{}", rng.gen_range(0..self.sense_vocab))
                        }
                    })
                    .collect();
                Instance::new(
                    format!("{TARGET}.{k:04}"),
                    TARGET,
                    &tokens,
                    target_index,
                    senses[s].clone(),
                )
                .expect("generated instance is valid")
            })
            .collect();
        Corpus::new(TARGET, instances, senses).expect("generated corpus is valid")
    }
}
