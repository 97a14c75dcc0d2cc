//! Seeded decoder-segmentation simulator.
//!
//! Real decoders cut on silence; text has no timing, so cut frequency stands
//! in for pause behaviour. `max_len` plays the role of the decoder's hard
//! timeout and always wins, even mid-sentence.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token::{PunctTag, Segment, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegError {
    #[error("{tokens} tokens but {tags} reference tags")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegKind {
    /// Cut every `mean_len` tokens.
    Fixed,
    /// Geometric segment lengths with mean `mean_len`.
    Geometric,
    /// Independent cuts at rate `1 / mean_len`, each snapped to the nearest
    /// true sentence boundary with probability `boundary_affinity`.
    PauseNoise,
}

impl SegKind {
    pub fn name(self) -> &'static str {
        match self {
            SegKind::Fixed => "fixed",
            SegKind::Geometric => "geometric",
            SegKind::PauseNoise => "pause-noise",
        }
    }
}

impl FromStr for SegKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "fixed" => Ok(SegKind::Fixed),
            "geometric" => Ok(SegKind::Geometric),
            "pause-noise" => Ok(SegKind::PauseNoise),
            _ => Err(format!("unknown segmentation kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegPolicy {
    pub kind: SegKind,
    pub mean_len: usize,
    pub max_len: usize,
    pub boundary_affinity: f64,
    pub seed: u64,
}

impl SegPolicy {
    pub fn new(
        kind: SegKind,
        mean_len: usize,
        max_len: usize,
        boundary_affinity: f64,
        seed: u64,
    ) -> Result<Self, SegError> {
        let p = SegPolicy {
            kind,
            mean_len,
            max_len,
            boundary_affinity,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn fixed(mean_len: usize) -> Result<Self, SegError> {
        SegPolicy::new(SegKind::Fixed, mean_len, mean_len, 0.0, 0)
    }

    pub fn validate(&self) -> Result<(), SegError> {
        if self.mean_len == 0 || self.mean_len > self.max_len {
            return Err(SegError::InvalidPolicy(format!(
                "need 1 <= mean_len ({}) <= max_len ({})",
                self.mean_len, self.max_len
            )));
        }
        if !(0.0..=1.0).contains(&self.boundary_affinity) {
            return Err(SegError::InvalidPolicy(format!(
                "boundary_affinity {} outside [0, 1]",
                self.boundary_affinity
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Short label such as `pause-noise(mean=8,max=40,aff=0.2)`.
    pub fn label(&self) -> String {
        match self.kind {
            SegKind::Fixed => format!("fixed(len={})", self.mean_len),
            SegKind::Geometric => format!("geometric(mean={},max={})", self.mean_len, self.max_len),
            SegKind::PauseNoise => format!(
                "pause-noise(mean={},max={},aff={})",
                self.mean_len, self.max_len, self.boundary_affinity
            ),
        }
    }
}

/// Parses `kind:mean[:max[:affinity]]`, e.g. `pause-noise:6:40:0.2`.
/// `max` defaults to four times the mean and affinity to 0. The seed is 0.
impl FromStr for SegPolicy {
    type Err = SegError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |what: &str| SegError::InvalidPolicy(format!("{what} in {s:?}"));
        let mut parts = s.split(':');
        let kind: SegKind = parts
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e: String| SegError::InvalidPolicy(e))?;
        let mean: usize = parts
            .next()
            .ok_or_else(|| bad("missing mean length"))?
            .parse()
            .map_err(|_| bad("bad mean length"))?;
        let max: usize = match parts.next() {
            Some(m) => m.parse().map_err(|_| bad("bad max length"))?,
            None => mean.saturating_mul(4),
        };
        let aff: f64 = match parts.next() {
            Some(a) => a.parse().map_err(|_| bad("bad affinity"))?,
            None => 0.0,
        };
        if parts.next().is_some() {
            return Err(bad("too many fields"));
        }
        SegPolicy::new(kind, mean, max, aff, 0)
    }
}

/// Partitions `tokens` into numbered segments according to `policy`.
pub fn simulate(
    tokens: &[Token],
    ref_tags: &[PunctTag],
    policy: &SegPolicy,
) -> Result<Vec<Segment>, SegError> {
    if tokens.len() != ref_tags.len() {
        return Err(SegError::LengthMismatch {
            tokens: tokens.len(),
            tags: ref_tags.len(),
        });
    }
    policy.validate()?;
    let n = tokens.len();
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let lengths = match policy.kind {
        SegKind::Fixed => fixed_lengths(n, policy.mean_len),
        SegKind::Geometric => geometric_lengths(n, policy, &mut rng),
        SegKind::PauseNoise => pause_noise_lengths(ref_tags, policy, &mut rng),
    };
    let mut out = Vec::with_capacity(lengths.len());
    let mut start = 0;
    for (i, len) in lengths.into_iter().enumerate() {
        out.push(Segment::new(tokens[start..start + len].to_vec(), i));
        start += len;
    }
    debug_assert_eq!(start, n);
    Ok(out)
}

fn fixed_lengths(n: usize, len: usize) -> Vec<usize> {
    let mut out = vec![len; n / len];
    if !n.is_multiple_of(len) {
        out.push(n % len);
    }
    out
}

fn geometric_lengths(n: usize, policy: &SegPolicy, rng: &mut ChaCha8Rng) -> Vec<usize> {
    // Support {1, 2, ...} with success probability 1/mean has the right mean.
    let p = 1.0 / policy.mean_len as f64;
    let mut out = Vec::new();
    let mut left = n;
    while left > 0 {
        let len = if p >= 1.0 {
            1
        } else {
            let u: f64 = 1.0 - rng.gen::<f64>();
            (u.ln() / (1.0 - p).ln()).ceil().max(1.0) as usize
        };
        let len = len.min(policy.max_len).min(left);
        out.push(len);
        left -= len;
    }
    out
}

/// The true boundary closest to `pos`, ties going left. `boundaries` excludes
/// the final token since a cut there is no cut.
fn nearest_boundary(boundaries: &[usize], pos: usize) -> Option<usize> {
    let i = boundaries.partition_point(|&b| b < pos);
    let right = boundaries.get(i).copied();
    let left = i.checked_sub(1).map(|j| boundaries[j]);
    match (left, right) {
        (Some(l), Some(r)) => Some(if pos - l <= r - pos { l } else { r }),
        (l, r) => l.or(r),
    }
}

fn pause_noise_lengths(tags: &[PunctTag], policy: &SegPolicy, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = tags.len();
    if n == 0 {
        return Vec::new();
    }
    let boundaries: Vec<usize> = tags[..n - 1]
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_boundary())
        .map(|(i, _)| i)
        .collect();
    let rate = 1.0 / policy.mean_len as f64;
    // cut[i] means a segment ends after token i.
    let mut cut = vec![false; n];
    for i in 0..n - 1 {
        if !rng.gen_bool(rate) {
            continue;
        }
        let snap = rng.gen_bool(policy.boundary_affinity);
        let at = if snap {
            nearest_boundary(&boundaries, i).unwrap_or(n - 1)
        } else {
            i
        };
        cut[at] = true;
    }
    cut[n - 1] = true;

    let mut out = Vec::new();
    let mut len = 0;
    for c in cut {
        len += 1;
        if c || len == policy.max_len {
            out.push(len);
            len = 0;
        }
    }
    out
}

/// Positions `i` where a segment ends after token `i` but the reference has
/// no sentence boundary there. The stream's last token is not a cut.
pub fn mid_sentence_cuts(segments: &[Segment], ref_tags: &[PunctTag]) -> usize {
    let mut end = 0;
    let mut count = 0;
    for seg in segments.iter().take(segments.len().saturating_sub(1)) {
        end += seg.len();
        if end > 0 && end < ref_tags.len() && !ref_tags[end - 1].is_boundary() {
            count += 1;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::toks;
    use proptest::prelude::*;
    use PunctTag::*;

    fn new_york() -> (Vec<Token>, Vec<PunctTag>) {
        (
            toks(&["it", "can", "happen", "in", "new", "york", "city", "right"]),
            vec![None, None, None, None, None, None, Comma, Question],
        )
    }

    fn sizes(segs: &[Segment]) -> Vec<usize> {
        segs.iter().map(Segment::len).collect()
    }

    #[test]
    fn fixed_cuts() {
        let (t, g) = new_york();
        let segs = simulate(&t, &g, &SegPolicy::fixed(3).unwrap()).unwrap();
        assert_eq!(sizes(&segs), [3, 3, 2]);
        assert_eq!(
            segs.iter().map(|s| s.source_index).collect::<Vec<_>>(),
            [0, 1, 2]
        );
        let segs = simulate(&t, &g, &SegPolicy::fixed(8).unwrap()).unwrap();
        assert_eq!(sizes(&segs), [8]);
        let segs = simulate(&t, &g, &SegPolicy::fixed(20).unwrap()).unwrap();
        assert_eq!(sizes(&segs), [8]);
    }

    #[test]
    fn policy_parsing() {
        let p: SegPolicy = "pause-noise:6:40:0.2".parse().unwrap();
        assert_eq!(
            (p.kind, p.mean_len, p.max_len, p.boundary_affinity),
            (SegKind::PauseNoise, 6, 40, 0.2)
        );
        let p: SegPolicy = "fixed:5".parse().unwrap();
        assert_eq!((p.mean_len, p.max_len), (5, 20));
        assert!("fixed".parse::<SegPolicy>().is_err());
        assert!("wobbly:3".parse::<SegPolicy>().is_err());
        assert!("geometric:3:2".parse::<SegPolicy>().is_err());
        assert!("fixed:3:9:0:1".parse::<SegPolicy>().is_err());
    }

    #[test]
    fn policy_validation() {
        assert!(SegPolicy::new(SegKind::Fixed, 0, 5, 0.0, 0).is_err());
        assert!(SegPolicy::new(SegKind::Geometric, 6, 5, 0.0, 0).is_err());
        assert!(SegPolicy::new(SegKind::PauseNoise, 3, 5, 1.5, 0).is_err());
        let (t, _) = new_york();
        assert!(matches!(
            simulate(&t, &[None], &SegPolicy::fixed(3).unwrap()),
            Err(SegError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn full_affinity_cuts_only_on_boundaries() {
        let text = "it can happen in new york city right we went home early did you see it";
        let t = crate::token::tokenize(text);
        let mut g = vec![None; t.len()];
        g[7] = Question;
        g[11] = Period;
        *g.last_mut().unwrap() = Question;
        for seed in 0..200 {
            let p = SegPolicy::new(SegKind::PauseNoise, 2, 100, 1.0, seed).unwrap();
            let segs = simulate(&t, &g, &p).unwrap();
            assert_eq!(mid_sentence_cuts(&segs, &g), 0, "seed {seed}");
        }
    }

    #[test]
    fn zero_affinity_cuts_mid_sentence() {
        let (t, g) = new_york();
        let total: usize = (0..200)
            .map(|seed| {
                let p = SegPolicy::new(SegKind::PauseNoise, 2, 100, 0.0, seed).unwrap();
                mid_sentence_cuts(&simulate(&t, &g, &p).unwrap(), &g)
            })
            .sum();
        // Seven interior gaps at rate 1/2 over 200 seeds: expect ~700.
        assert!(total > 500, "only {total} mid-sentence cuts");
    }

    #[test]
    fn geometric_mean_is_close() {
        let t: Vec<Token> = (0..20_000)
            .map(|i| Token::new(format!("w{i}")).unwrap())
            .collect();
        let g = vec![None; t.len()];
        let p = SegPolicy::new(SegKind::Geometric, 6, 1000, 0.0, 9).unwrap();
        let segs = simulate(&t, &g, &p).unwrap();
        let mean = t.len() as f64 / segs.len() as f64;
        assert!((mean - 6.0).abs() < 0.3, "mean {mean}");
    }

    fn stream() -> impl Strategy<Value = (Vec<Token>, Vec<PunctTag>)> {
        proptest::collection::vec(0usize..4, 1..200).prop_map(|tags| {
            let t = (0..tags.len())
                .map(|i| Token::new(format!("t{i}")).unwrap())
                .collect();
            (t, tags.into_iter().map(|k| PunctTag::ALL[k]).collect())
        })
    }

    fn policy() -> impl Strategy<Value = SegPolicy> {
        (
            0usize..3,
            1usize..12,
            0usize..20,
            0.0f64..=1.0,
            any::<u64>(),
        )
            .prop_map(|(k, mean, extra, aff, seed)| {
                let kind = [SegKind::Fixed, SegKind::Geometric, SegKind::PauseNoise][k];
                SegPolicy::new(kind, mean, mean + extra, aff, seed).unwrap()
            })
    }

    proptest! {
        #[test]
        fn partitions_exactly_and_respects_max((t, g) in stream(), p in policy()) {
            let segs = simulate(&t, &g, &p).unwrap();
            let joined: Vec<Token> = segs.iter().flat_map(|s| s.tokens.clone()).collect();
            prop_assert_eq!(&joined, &t);
            prop_assert!(segs.iter().all(|s| !s.is_empty() && s.len() <= p.max_len));
            prop_assert_eq!(segs, simulate(&t, &g, &p).unwrap());
        }
    }
}
