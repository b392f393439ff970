//! Synthetic cohorts for exercising the pipeline without real student data.
//!
//! Each objective mark is an independent Bernoulli draw. A student's signal
//! is the kind-weighted mean of their per-kind fractions correct, times the
//! comparison fraction raised to `comparison_gate`, so it lies in `[0, 1]`.
//! Each code-writing mark is then
//! `6 * signal^curvature + s * N(0, 1)` on the label scale, rounded and
//! clamped to `0..=6`, where the spread `s` falls linearly from `noise` at
//! signal 0 to `noise_top` at signal 1. Weak students answer every question
//! with `weak_pass_rate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{CodeMark, StudentRecord, CODE_WRITING_QUESTIONS, OBJECTIVE_QUESTIONS};
use crate::instruments::QuestionKind;

/// Question kinds of the generated columns: three of each, in the order
/// tracing, detection, comparison, analysis.
pub const SYNTH_KIND_MAP: [QuestionKind; OBJECTIVE_QUESTIONS] = [
    QuestionKind::Tracing,
    QuestionKind::Tracing,
    QuestionKind::Tracing,
    QuestionKind::Detection,
    QuestionKind::Detection,
    QuestionKind::Detection,
    QuestionKind::Comparison,
    QuestionKind::Comparison,
    QuestionKind::Comparison,
    QuestionKind::Analysis,
    QuestionKind::Analysis,
    QuestionKind::Analysis,
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid generator parameter: {0}")]
    InvalidParams(String),
}

/// Signal strength per question kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KindWeights {
    pub tracing: f64,
    pub detection: f64,
    pub comparison: f64,
    pub analysis: f64,
}

impl KindWeights {
    pub fn weight(&self, kind: QuestionKind) -> f64 {
        match kind {
            QuestionKind::Tracing => self.tracing,
            QuestionKind::Detection => self.detection,
            QuestionKind::Comparison => self.comparison,
            QuestionKind::Analysis => self.analysis,
        }
    }

    pub fn zero() -> Self {
        KindWeights {
            tracing: 0.0,
            detection: 0.0,
            comparison: 0.0,
            analysis: 0.0,
        }
    }
}

impl Default for KindWeights {
    fn default() -> Self {
        KindWeights {
            tracing: 0.4,
            detection: 1.0,
            comparison: 2.0,
            analysis: 1.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub students: usize,
    pub weights: KindWeights,
    /// Chance of a correct answer, per question.
    pub pass_rates: [f64; OBJECTIVE_QUESTIONS],
    /// Exponent applied to the signal before scaling to labels.
    pub curvature: f64,
    /// The signal is scaled by the comparison fraction raised to this power;
    /// 0 turns the gate off.
    pub comparison_gate: f64,
    /// Standard deviation of the label-scale noise at signal 0.
    pub noise: f64,
    /// Standard deviation at signal 1; linear in between.
    pub noise_top: f64,
    /// Students drawn with `weak_pass_rate` on every question.
    pub weak_students: usize,
    pub weak_pass_rate: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            students: 243,
            weights: KindWeights::default(),
            pass_rates: [0.95, 0.9, 0.85, 0.9, 0.85, 0.8, 0.9, 0.85, 0.8, 0.85, 0.8, 0.75],
            curvature: 4.0,
            comparison_gate: 1.0,
            noise: 1.0,
            noise_top: 0.0,
            weak_students: 40,
            weak_pass_rate: 0.1,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        if self.students == 0 {
            return bad("cohort size must be at least 1".into());
        }
        if self.weak_students > self.students {
            return bad(format!(
                "{} weak students in a cohort of {}",
                self.weak_students, self.students
            ));
        }
        let w = self.weights;
        if [w.tracing, w.detection, w.comparison, w.analysis]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return bad("kind weights must be finite and nonnegative".into());
        }
        let rates = self.pass_rates.iter().chain(std::iter::once(&self.weak_pass_rate));
        if rates.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("pass rates must lie in [0, 1]".into());
        }
        if !(self.curvature.is_finite() && self.curvature > 0.0) {
            return bad("curvature must be positive".into());
        }
        if !(self.comparison_gate.is_finite() && self.comparison_gate >= 0.0) {
            return bad("comparison gate must be nonnegative".into());
        }
        if ![self.noise, self.noise_top].iter().all(|n| n.is_finite() && *n >= 0.0) {
            return bad("noise must be nonnegative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCohort {
    pub records: Vec<StudentRecord>,
    /// Ids of the planted weak students.
    pub weak: Vec<String>,
}

/// Draws a cohort. Ids are `s0001`, `s0002`, ...; weak students are spread
/// through the cohort at seeded positions.
pub fn generate(params: &SynthParams) -> Result<SynthCohort, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let weak_rows = rand::seq::index::sample(&mut rng, params.students, params.weak_students).into_vec();
    let total_weight: f64 = QuestionKind::ALL.iter().map(|&k| params.weights.weight(k)).sum();

    let mut records = Vec::with_capacity(params.students);
    let mut weak = Vec::new();
    for row in 0..params.students {
        let id = format!("s{:04}", row + 1);
        let is_weak = weak_rows.contains(&row);
        let mut objective = [0u8; OBJECTIVE_QUESTIONS];
        for (q, mark) in objective.iter_mut().enumerate() {
            let p = if is_weak { params.weak_pass_rate } else { params.pass_rates[q] };
            *mark = u8::from(rng.random_bool(p));
        }
        let signal = if total_weight > 0.0 {
            let fraction = |kind: QuestionKind| {
                let marks: Vec<f64> = SYNTH_KIND_MAP
                    .iter()
                    .zip(&objective)
                    .filter(|(k, _)| **k == kind)
                    .map(|(_, &m)| m as f64)
                    .collect();
                marks.iter().sum::<f64>() / marks.len() as f64
            };
            let weighted: f64 = QuestionKind::ALL
                .iter()
                .map(|&kind| params.weights.weight(kind) * fraction(kind))
                .sum();
            weighted / total_weight * fraction(QuestionKind::Comparison).powf(params.comparison_gate)
        } else {
            rng.random::<f64>()
        };
        let centre = 6.0 * signal.powf(params.curvature);
        let spread = params.noise + (params.noise_top - params.noise) * signal;
        let mut code_writing = [CodeMark::from_label(0).expect("0 is a label"); CODE_WRITING_QUESTIONS];
        for mark in code_writing.iter_mut() {
            let value = (centre + spread * unit.sample(&mut rng)).round().clamp(0.0, 6.0);
            *mark = CodeMark::from_label(value as u8).expect("clamped to label range");
        }
        if is_weak {
            weak.push(id.clone());
        }
        records.push(StudentRecord {
            student_key: id,
            objective,
            code_writing,
        });
    }
    Ok(SynthCohort { records, weak })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cohort_size_and_weak_count() {
        let cohort = generate(&SynthParams::default()).unwrap();
        assert_eq!(cohort.records.len(), 243);
        assert_eq!(cohort.weak.len(), 40);
        let ids: std::collections::BTreeSet<_> = cohort.records.iter().map(|r| &r.student_key).collect();
        assert_eq!(ids.len(), 243);
        assert_eq!(cohort, generate(&SynthParams::default()).unwrap());
        let other = generate(&SynthParams { seed: 1, ..SynthParams::default() }).unwrap();
        assert_ne!(cohort.records, other.records);
    }

    #[test]
    fn zero_noise_is_a_function_of_the_marks() {
        let params = SynthParams {
            noise: 0.0,
            weak_students: 0,
            ..SynthParams::default()
        };
        for r in generate(&params).unwrap().records {
            assert_eq!(r.code_writing[0], r.code_writing[1]);
            assert_eq!(r.code_writing[1], r.code_writing[2]);
            if r.objective.iter().all(|&m| m == 1) {
                assert_eq!(r.code_writing[0].label(), 6);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let base = SynthParams::default();
        for bad in [
            SynthParams { students: 0, ..base.clone() },
            SynthParams { weak_students: 300, ..base.clone() },
            SynthParams { curvature: 0.0, ..base.clone() },
            SynthParams { noise: -1.0, ..base.clone() },
            SynthParams { weak_pass_rate: 1.5, ..base.clone() },
            SynthParams {
                weights: KindWeights { tracing: f64::NAN, ..KindWeights::default() },
                ..base.clone()
            },
        ] {
            assert!(matches!(generate(&bad), Err(SynthError::InvalidParams(_))));
        }
    }
}
