//! Seeded synthetic text: sentences of pseudo-words with commas, periods
//! and question marks in plausible positions.
//!
//! Nothing here is meant to resemble real language statistics; it exists so
//! that invariance and round-trip checks have unlimited, reproducible input.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datapipe::LabeledExample;
use crate::token::{PunctTag, Sentence, TaggedToken, Token};

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "st", "tr", "ch",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const SPECIAL: &[&str] = &[
    "don't",
    "well-known",
    "it's",
    "42",
    "1990s",
    "o'neil",
    "x-ray",
    "i",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub min_len: usize,
    pub max_len: usize,
    /// Per-word chance of a comma inside a sentence.
    pub comma_rate: f64,
    /// Chance that a sentence ends in a question mark.
    pub question_rate: f64,
    pub vocab_size: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            min_len: 3,
            max_len: 18,
            comma_rate: 0.08,
            question_rate: 0.15,
            vocab_size: 400,
        }
    }
}

/// Seeded sentence generator.
pub struct Generator {
    config: SynthConfig,
    vocab: Vec<Token>,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(config: SynthConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vocab: Vec<Token> = SPECIAL
            .iter()
            .map(|w| Token::new(*w).expect("valid"))
            .collect();
        while vocab.len() < config.vocab_size.max(SPECIAL.len() + 1) {
            let syllables = rng.gen_range(1..=3);
            let word: String = (0..syllables)
                .map(|_| {
                    format!(
                        "{}{}",
                        ONSETS.choose(&mut rng).unwrap(),
                        NUCLEI.choose(&mut rng).unwrap()
                    )
                })
                .collect();
            vocab.push(Token::new(word).expect("syllables are lowercase letters"));
        }
        Generator { config, vocab, rng }
    }

    pub fn sentence(&mut self) -> Sentence {
        let c = &self.config;
        let n = self
            .rng
            .gen_range(c.min_len.max(1)..=c.max_len.max(c.min_len.max(1)));
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let token = self.vocab.choose(&mut self.rng).unwrap().clone();
            let tag = if i + 1 == n {
                if self.rng.gen_bool(c.question_rate) {
                    PunctTag::Question
                } else {
                    PunctTag::Period
                }
            } else if i > 0 && i + 2 < n && self.rng.gen_bool(c.comma_rate) {
                PunctTag::Comma
            } else {
                PunctTag::None
            };
            out.push(TaggedToken::new(token, tag));
        }
        Sentence::new(out).expect("generated sentence ends in a boundary")
    }

    pub fn sentences(&mut self, n: usize) -> Vec<Sentence> {
        (0..n).map(|_| self.sentence()).collect()
    }

    /// A paragraph of `min..=max` sentences as one labeled example.
    pub fn paragraph(&mut self, min_sentences: usize, max_sentences: usize) -> LabeledExample {
        let k = self
            .rng
            .gen_range(min_sentences.max(1)..=max_sentences.max(min_sentences.max(1)));
        LabeledExample::from_tagged(
            self.sentences(k)
                .into_iter()
                .flat_map(Sentence::into_tagged),
        )
    }
}

/// `n` sentences concatenated into one stream.
pub fn sentence_stream(n: usize, seed: u64) -> (Vec<Sentence>, LabeledExample) {
    let sentences = Generator::new(SynthConfig::default(), seed).sentences(n);
    let ex = LabeledExample::from_tagged(sentences.iter().flat_map(|s| s.tagged().to_vec()));
    (sentences, ex)
}

/// `n` paragraphs of 1 to 6 sentences each.
pub fn paragraphs(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut g = Generator::new(SynthConfig::default(), seed);
    (0..n).map(|_| g.paragraph(1, 6)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(paragraphs(20, 3), paragraphs(20, 3));
        assert_ne!(paragraphs(20, 3), paragraphs(20, 4));
    }

    #[test]
    fn sentences_are_well_formed() {
        let (sentences, ex) = sentence_stream(200, 1);
        assert_eq!(sentences.len(), 200);
        let boundaries = ex.tags().iter().filter(|t| t.is_boundary()).count();
        assert_eq!(boundaries, 200);
        assert!(ex.tags().last().unwrap().is_boundary());
        assert!(ex.tags().contains(&PunctTag::Comma));
        assert!(ex.tags().contains(&PunctTag::Question));
    }
}
