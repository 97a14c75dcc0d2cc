//! Word-level punctuation and segmentation scoring.
//!
//! Punctuation is scored per class (COMMA, PERIOD, QUESTION) and overall by
//! micro-averaging the summed counts. Segmentation ignores commas and treats
//! PERIOD and QUESTION as one BOUNDARY class; its headline number is F0.5,
//! which weights precision above recall.
//!
//! All values are percentages in `[0, 100]`. A 0/0 ratio is reported as 0
//! with `degenerate` set.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token::{normalize_word, PunctTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("reference has {reference} tags but hypothesis has {hypothesis}")]
    LengthMismatch { reference: usize, hypothesis: usize },
    #[error("token streams diverge at position {0}")]
    TokenMismatch(usize),
    #[error("relative gain is undefined for a non-positive baseline")]
    ZeroBaseline,
}

/// `(1 + b^2) P R / (b^2 P + R)`, or 0 when both are 0.
pub fn fbeta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

/// Percentage change from `baseline` to `candidate`.
pub fn relative_gain(baseline: f64, candidate: f64) -> Result<f64, MetricsError> {
    if baseline <= 0.0 {
        return Err(MetricsError::ZeroBaseline);
    }
    Ok(100.0 * (candidate - baseline) / baseline)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl std::ops::Add for ClassCounts {
    type Output = ClassCounts;

    fn add(self, o: ClassCounts) -> ClassCounts {
        ClassCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl ClassCounts {
    pub fn scores(&self) -> Prf {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                (0.0, true)
            } else {
                (100.0 * num as f64 / den as f64, false)
            }
        };
        let (precision, dp) = ratio(self.tp, self.tp + self.fp);
        let (recall, dr) = ratio(self.tp, self.tp + self.fn_);
        Prf {
            precision,
            recall,
            f1: fbeta(precision, recall, 1.0),
            degenerate: dp || dr,
        }
    }
}

/// Precision, recall, F1 as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub tag: PunctTag,
    pub counts: ClassCounts,
    pub scores: Prf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PunctuationScores {
    /// COMMA, PERIOD, QUESTION in that order.
    pub per_class: Vec<ClassScore>,
    pub overall_counts: ClassCounts,
    pub overall: Prf,
}

impl PunctuationScores {
    pub fn class(&self, tag: PunctTag) -> Option<&ClassScore> {
        self.per_class.iter().find(|c| c.tag == tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationScores {
    pub counts: ClassCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f05: f64,
    pub degenerate: bool,
}

fn check_lengths(reference: &[PunctTag], hypothesis: &[PunctTag]) -> Result<(), MetricsError> {
    if reference.len() != hypothesis.len() {
        return Err(MetricsError::LengthMismatch {
            reference: reference.len(),
            hypothesis: hypothesis.len(),
        });
    }
    Ok(())
}

fn count_class(reference: &[PunctTag], hypothesis: &[PunctTag], class: PunctTag) -> ClassCounts {
    let mut c = ClassCounts::default();
    for (&r, &h) in reference.iter().zip(hypothesis) {
        match (r == class, h == class) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    c
}

pub fn score_punctuation(
    reference: &[PunctTag],
    hypothesis: &[PunctTag],
) -> Result<PunctuationScores, MetricsError> {
    check_lengths(reference, hypothesis)?;
    let per_class: Vec<ClassScore> = PunctTag::PUNCTUATION
        .into_iter()
        .map(|tag| {
            let counts = count_class(reference, hypothesis, tag);
            ClassScore {
                tag,
                counts,
                scores: counts.scores(),
            }
        })
        .collect();
    let overall_counts = per_class
        .iter()
        .fold(ClassCounts::default(), |acc, c| acc + c.counts);
    Ok(PunctuationScores {
        per_class,
        overall: overall_counts.scores(),
        overall_counts,
    })
}

/// Maps PERIOD and QUESTION to one boundary class and drops commas.
fn boundary_view(tags: &[PunctTag]) -> Vec<PunctTag> {
    tags.iter()
        .map(|t| {
            if t.is_boundary() {
                PunctTag::Period
            } else {
                PunctTag::None
            }
        })
        .collect()
}

pub fn score_segmentation(
    reference: &[PunctTag],
    hypothesis: &[PunctTag],
) -> Result<SegmentationScores, MetricsError> {
    check_lengths(reference, hypothesis)?;
    let counts = count_class(
        &boundary_view(reference),
        &boundary_view(hypothesis),
        PunctTag::Period,
    );
    let prf = counts.scores();
    Ok(SegmentationScores {
        counts,
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        f05: fbeta(prf.precision, prf.recall, 0.5),
        degenerate: prf.degenerate,
    })
}

/// Checks that two token streams agree word for word after normalization.
pub fn verify_alignment<A: AsRef<str>, B: AsRef<str>>(
    reference: &[A],
    hypothesis: &[B],
) -> Result<(), MetricsError> {
    let n = reference.len().max(hypothesis.len());
    for i in 0..n {
        let r = reference.get(i).and_then(|w| normalize_word(w.as_ref()));
        let h = hypothesis.get(i).and_then(|w| normalize_word(w.as_ref()));
        if r.is_none() || r != h {
            return Err(MetricsError::TokenMismatch(i));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub punctuation_f1: f64,
    pub segmentation_f1: f64,
    pub segmentation_f05: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub punctuation: PunctuationScores,
    pub segmentation: SegmentationScores,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gains: Option<Gains>,
}

pub fn evaluate(
    reference: &[PunctTag],
    hypothesis: &[PunctTag],
) -> Result<EvalReport, MetricsError> {
    Ok(EvalReport {
        punctuation: score_punctuation(reference, hypothesis)?,
        segmentation: score_segmentation(reference, hypothesis)?,
        gains: None,
    })
}

impl EvalReport {
    /// Fills `gains` relative to `baseline`. Gains against a zero baseline
    /// metric are reported as 0.
    pub fn with_gains_over(mut self, baseline: &EvalReport) -> Self {
        let g = |b: f64, c: f64| relative_gain(b, c).unwrap_or(0.0);
        self.gains = Some(Gains {
            punctuation_f1: g(baseline.punctuation.overall.f1, self.punctuation.overall.f1),
            segmentation_f1: g(baseline.segmentation.f1, self.segmentation.f1),
            segmentation_f05: g(baseline.segmentation.f05, self.segmentation.f05),
        });
        self
    }

    /// Aligned plain-text table: per-class and overall punctuation P/R/F1,
    /// then the segmentation block. Values are rounded to integers.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>5} {:>5} {:>5}   {:>6} {:>6} {:>6}",
            "CLASS", "P", "R", "F1", "TP", "FP", "FN"
        );
        let row = |out: &mut String, name: &str, c: &ClassCounts, s: &Prf| {
            let _ = writeln!(
                out,
                "{:<10} {:>5.0} {:>5.0} {:>5.0}   {:>6} {:>6} {:>6}",
                name, s.precision, s.recall, s.f1, c.tp, c.fp, c.fn_
            );
        };
        for c in &self.punctuation.per_class {
            let name = if c.tag == PunctTag::Question {
                "Q-MARK"
            } else {
                c.tag.label()
            };
            row(&mut out, name, &c.counts, &c.scores);
        }
        row(
            &mut out,
            "OVERALL",
            &self.punctuation.overall_counts,
            &self.punctuation.overall,
        );
        let s = &self.segmentation;
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>5} {:>5} {:>5} {:>6}",
            "SEGMENTATION", "P", "R", "F1", "F0.5"
        );
        let _ = writeln!(
            out,
            "{:<12} {:>5.0} {:>5.0} {:>5.0} {:>6.0}",
            "", s.precision, s.recall, s.f1, s.f05
        );
        if let Some(g) = &self.gains {
            let _ = writeln!(
                out,
                "{:<12} punct-F1 {:+.1}%  seg-F1 {:+.1}%  seg-F0.5 {:+.1}%",
                "GAIN", g.punctuation_f1, g.segmentation_f1, g.segmentation_f05
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::toks;
    use proptest::prelude::*;
    use PunctTag::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fbeta_table_values() {
        // Hand-computed: 2*64*82/146, 1.25*64*82/(0.25*64+82), 1.25*80*69/(20+69).
        assert!(close(fbeta(64.0, 82.0, 1.0), 71.890_41, 1e-4));
        assert!(close(fbeta(64.0, 82.0, 0.5), 66.938_78, 1e-4));
        assert!(close(fbeta(80.0, 69.0, 0.5), 77.528_09, 1e-4));
        assert_eq!(fbeta(0.0, 0.0, 0.5), 0.0);
        assert_eq!(fbeta(0.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn gains() {
        assert!(close(relative_gain(72.0, 73.0).unwrap(), 1.388_9, 1e-3));
        let g = relative_gain(67.0, 78.0).unwrap();
        assert!(close(g, 16.417_9, 1e-3));
        assert!(close(g, 15.8, 1.0));
        assert_eq!(relative_gain(50.0, 50.0).unwrap(), 0.0);
        assert_eq!(relative_gain(0.0, 5.0), Err(MetricsError::ZeroBaseline));
    }

    #[test]
    fn punctuation_identity() {
        let r = [None, Comma, Period, None, Question, Comma];
        let s = score_punctuation(&r, &r).unwrap();
        for c in &s.per_class {
            assert_eq!(c.scores.precision, 100.0);
            assert_eq!(c.scores.recall, 100.0);
            assert_eq!(c.scores.f1, 100.0);
        }
        assert_eq!(s.overall.f1, 100.0);
    }

    #[test]
    fn single_confusion() {
        let s = score_punctuation(&[Period], &[Comma]).unwrap();
        let p = s.class(Period).unwrap().counts;
        let c = s.class(Comma).unwrap().counts;
        assert_eq!((p.tp, p.fp, p.fn_), (0, 0, 1));
        assert_eq!((c.tp, c.fp, c.fn_), (0, 1, 0));
    }

    #[test]
    fn micro_average_by_hand() {
        let s = score_punctuation(&[None, Comma, Period], &[None, Comma, Question]).unwrap();
        assert_eq!(
            s.overall_counts,
            ClassCounts {
                tp: 1,
                fp: 1,
                fn_: 1
            }
        );
        assert_eq!(s.overall.precision, 50.0);
        assert_eq!(s.overall.recall, 50.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            score_punctuation(&[None], &[]),
            Err(MetricsError::LengthMismatch { .. })
        ));
        assert!(score_segmentation(&[None], &[None, None]).is_err());
    }

    #[test]
    fn segmentation_examples() {
        let s = score_segmentation(&[Period], &[Question]).unwrap();
        assert_eq!((s.precision, s.recall), (100.0, 100.0));

        let s = score_segmentation(&[Comma], &[None]).unwrap();
        assert_eq!((s.precision, s.recall, s.f05), (0.0, 0.0, 0.0));
        assert!(s.degenerate);

        let s = score_segmentation(&[None, Period, None, Period], &[Period; 4]).unwrap();
        assert_eq!(
            s.counts,
            ClassCounts {
                tp: 2,
                fp: 2,
                fn_: 0
            }
        );
        assert_eq!((s.precision, s.recall), (50.0, 100.0));
    }

    #[test]
    fn alignment() {
        assert!(verify_alignment(&toks(&["it", "can"]), &toks(&["it", "can"])).is_ok());
        assert_eq!(
            verify_alignment(&toks(&["it", "can"]), &toks(&["it", "cant"])),
            Err(MetricsError::TokenMismatch(1))
        );
        assert!(verify_alignment(&["It", "CAN"], &["it", "can"]).is_ok());
        assert_eq!(
            verify_alignment(&["it"], &["it", "can"]),
            Err(MetricsError::TokenMismatch(1))
        );
    }

    #[test]
    fn table_layout() {
        let r = [None, Comma, Period, None, Question];
        let h = [None, None, Period, Period, Question];
        let report = evaluate(&r, &h).unwrap();
        let base = evaluate(&r, &[None; 5]).unwrap();
        let t = report.with_gains_over(&base).to_table();
        assert!(t.starts_with("CLASS"));
        assert!(t.contains("Q-MARK"));
        assert!(t.contains("OVERALL"));
        assert!(t.contains("SEGMENTATION"));
        assert!(t.contains("GAIN"));
    }

    fn tags() -> impl Strategy<Value = Vec<PunctTag>> {
        proptest::collection::vec((0usize..4).prop_map(|k| PunctTag::ALL[k]), 1..60)
    }

    fn pair() -> impl Strategy<Value = (Vec<PunctTag>, Vec<PunctTag>)> {
        tags().prop_flat_map(|r| {
            let n = r.len();
            (
                Just(r),
                proptest::collection::vec((0usize..4).prop_map(|k| PunctTag::ALL[k]), n),
            )
        })
    }

    fn swap_boundary(t: &[PunctTag]) -> Vec<PunctTag> {
        t.iter()
            .map(|x| match x {
                Period => Question,
                Question => Period,
                o => *o,
            })
            .collect()
    }

    proptest! {
        #[test]
        fn fbeta_symmetric_and_fixed_point(p in 0.0f64..=100.0, r in 0.0f64..=100.0, b in 0.1f64..4.0) {
            prop_assert!((fbeta(p, r, 1.0) - fbeta(r, p, 1.0)).abs() < 1e-9);
            prop_assert!((fbeta(p, p, b) - p).abs() < 1e-9);
            let f = fbeta(p, r, b);
            prop_assert!((0.0..=100.0 + 1e-9).contains(&f));
        }

        #[test]
        fn fbeta_monotone(p in 0.0f64..=100.0, r in 0.0f64..=100.0, d in 0.0f64..10.0, b in 0.1f64..4.0) {
            prop_assert!(fbeta((p + d).min(100.0), r, b) + 1e-9 >= fbeta(p, r, b));
            prop_assert!(fbeta(p, (r + d).min(100.0), b) + 1e-9 >= fbeta(p, r, b));
        }

        #[test]
        fn self_score_is_perfect(r in tags()) {
            let s = score_punctuation(&r, &r).unwrap();
            for c in &s.per_class {
                if c.counts.tp + c.counts.fn_ > 0 {
                    prop_assert_eq!(c.scores.f1, 100.0);
                }
            }
        }

        #[test]
        fn merging_invariance((r, h) in pair()) {
            let base = score_segmentation(&r, &h).unwrap();
            prop_assert_eq!(&base, &score_segmentation(&swap_boundary(&r), &h).unwrap());
            prop_assert_eq!(&base, &score_segmentation(&r, &swap_boundary(&h)).unwrap());
        }

        #[test]
        fn overall_is_sum_of_classes((r, h) in pair()) {
            let s = score_punctuation(&r, &h).unwrap();
            let sum = s.per_class.iter().fold(ClassCounts::default(), |a, c| a + c.counts);
            prop_assert_eq!(s.overall_counts, sum);
            for v in [s.overall.precision, s.overall.recall, s.overall.f1] {
                prop_assert!((0.0..=100.0).contains(&v));
            }
        }
    }
}
