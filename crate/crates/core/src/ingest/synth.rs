use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{IngestError, RawTable};
use crate::catalog::{AnswerKind, QuestionCatalog, QuestionRole, SurveyQuestion};

/// Planted-signal settings for [`generate_synthetic`].
///
/// The latent score is `bias + sum(weight * value) + noise * N(0, 1)` and the
/// intention label is `score > 0`. A single-choice answer's value is its
/// option position centred on the middle option; a multi-select answer's
/// value is the number of selected options minus its expectation. Unanswered
/// questions contribute 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalConfig {
    pub weights: Vec<(String, f64)>,
    pub bias: f64,
    pub noise: f64,
    /// Probability that any single answer is left blank.
    pub missing_rate: f64,
    /// Probability that a cohort-selection answer is the "never" code.
    pub cohort_pass_rate: f64,
    /// Probability that a secondary target question agrees with the label.
    pub target_agreement: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        SignalConfig {
            weights: Vec::new(),
            bias: 0.0,
            noise: 0.0,
            missing_rate: 0.05,
            cohort_pass_rate: 0.9,
            target_agreement: 0.85,
        }
    }
}

impl SignalConfig {
    pub fn with_weights<I, S>(weights: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        SignalConfig {
            weights: weights.into_iter().map(|(q, w)| (q.into(), w)).collect(),
            ..Default::default()
        }
    }
}

impl FromStr for SignalConfig {
    type Err = IngestError;

    /// Comma-separated `key=value` pairs, e.g. `Q6=2,Q27=-1.5,noise=0.5`.
    /// Reserved keys: `bias`, `noise`, `missing`, `pass`, `agree`. `none` or an
    /// empty string gives the default (no signal).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = SignalConfig::default();
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(cfg);
        }
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| IngestError::InvalidSignal(format!("{part:?} is not key=value")))?;
            let (k, v) = (k.trim(), v.trim());
            let v: f64 = v
                .parse()
                .map_err(|_| IngestError::InvalidSignal(format!("{v:?} is not a number")))?;
            if !v.is_finite() {
                return Err(IngestError::InvalidSignal(format!("{k} is not finite")));
            }
            match k {
                "bias" => cfg.bias = v,
                "noise" => cfg.noise = v,
                "missing" => cfg.missing_rate = v,
                "pass" => cfg.cohort_pass_rate = v,
                "agree" => cfg.target_agreement = v,
                q => cfg.weights.push((q.to_owned(), v)),
            }
        }
        Ok(cfg)
    }
}

const MULTI_SELECT_RATE: f64 = 0.3;

fn check_probability(name: &str, p: f64) -> Result<(), IngestError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(IngestError::InvalidSignal(format!(
            "{name} = {p} is not a probability"
        )))
    }
}

/// Generates a raw survey table over every catalog column with a planted,
/// tunable relation between predictors and the target questions.
pub fn generate_synthetic(
    n_rows: usize,
    catalog: &QuestionCatalog,
    signal: &SignalConfig,
    seed: u64,
) -> Result<RawTable, IngestError> {
    if n_rows == 0 {
        return Err(IngestError::ZeroRows);
    }
    check_probability("missing", signal.missing_rate)?;
    check_probability("pass", signal.cohort_pass_rate)?;
    check_probability("agree", signal.target_agreement)?;
    if !(signal.noise >= 0.0) {
        return Err(IngestError::InvalidSignal(
            "noise must be non-negative".into(),
        ));
    }

    let mut weights = Vec::with_capacity(signal.weights.len());
    for (id, w) in &signal.weights {
        let qi = catalog
            .questions
            .iter()
            .position(|q| &q.id == id && q.role == QuestionRole::Predictor)
            .ok_or_else(|| IngestError::SignalQuestion(id.clone()))?;
        weights.push((qi, *w));
    }

    let columns = catalog.all_columns();
    let names: Vec<String> = columns.iter().map(|(c, _)| c.name.clone()).collect();
    // first column of each question
    let mut question_start = Vec::with_capacity(catalog.questions.len());
    let mut pos = 0;
    for q in &catalog.questions {
        question_start.push(pos);
        pos += q.columns().len();
    }
    let primary_target = catalog
        .question("Q16")
        .filter(|q| q.role == QuestionRole::TargetSmokingIntention)
        .map(|q| q.id.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let mut row: Vec<Option<u32>> = vec![None; names.len()];
        for (qi, q) in catalog.questions.iter().enumerate() {
            let start = question_start[qi];
            match q.role {
                QuestionRole::Predictor => {
                    draw_predictor(q, &mut row[start..], signal.missing_rate, &mut rng)
                }
                QuestionRole::CohortSelectionNonSmoker
                | QuestionRole::CohortSelectionNonESmoker => {
                    if !rng.random_bool(signal.missing_rate) {
                        let pass = rng.random_bool(signal.cohort_pass_rate);
                        row[start] = Some(draw_code(q, pass, &q.pass_codes, &mut rng));
                    }
                }
                QuestionRole::TargetSmokingIntention => {}
            }
        }

        let mut score = signal.bias;
        for &(qi, w) in &weights {
            let q = &catalog.questions[qi];
            score += w * answer_value(q, &row[question_start[qi]..]);
        }
        if signal.noise > 0.0 {
            let eps: f64 = rng.sample(StandardNormal);
            score += signal.noise * eps;
        }
        let label = score > 0.0;

        for (qi, q) in catalog.questions.iter().enumerate() {
            if q.role != QuestionRole::TargetSmokingIntention {
                continue;
            }
            let is_primary = primary_target.as_deref().map_or(true, |p| p == q.id);
            let yes = if is_primary || rng.random_bool(signal.target_agreement) {
                label
            } else {
                !label
            };
            let codes = if yes { &q.yes_codes } else { &q.no_codes };
            let code = codes[rng.random_range(0..codes.len())];
            if !rng.random_bool(signal.missing_rate) {
                row[question_start[qi]] = Some(code);
            }
        }
        rows.push(row);
    }

    Ok(RawTable {
        row_ids: (0..rows.len()).collect(),
        columns: names,
        rows,
        unmatched: Vec::new(),
    })
}

fn draw_predictor(
    q: &SurveyQuestion,
    cells: &mut [Option<u32>],
    missing: f64,
    rng: &mut ChaCha8Rng,
) {
    match q.domain.kind {
        AnswerKind::MultiSelect => {
            if rng.random_bool(missing) {
                return;
            }
            for cell in cells.iter_mut().take(q.domain.options.len()) {
                if rng.random_bool(MULTI_SELECT_RATE) {
                    *cell = Some(1);
                }
            }
        }
        _ => {
            if !rng.random_bool(missing) {
                let opts = &q.domain.options;
                cells[0] = Some(opts[rng.random_range(0..opts.len())].code);
            }
        }
    }
}

/// A code from `wanted` when `hit`, otherwise one outside it (falling back to
/// `wanted` when every code is wanted).
fn draw_code(q: &SurveyQuestion, hit: bool, wanted: &[u32], rng: &mut ChaCha8Rng) -> u32 {
    let others: Vec<u32> = q.domain.codes().filter(|c| !wanted.contains(c)).collect();
    let pool: &[u32] = if hit || others.is_empty() {
        wanted
    } else {
        &others
    };
    pool[rng.random_range(0..pool.len())]
}

fn answer_value(q: &SurveyQuestion, cells: &[Option<u32>]) -> f64 {
    let k = q.domain.options.len();
    match q.domain.kind {
        AnswerKind::MultiSelect => {
            let selected = cells[..k]
                .iter()
                .filter(|c| c.is_some_and(|v| v > 0))
                .count();
            if cells[..k].iter().all(Option::is_none) {
                0.0
            } else {
                selected as f64 - MULTI_SELECT_RATE * k as f64
            }
        }
        _ => match cells[0] {
            None | Some(0) => 0.0,
            Some(code) => {
                let pos = q
                    .domain
                    .options
                    .iter()
                    .position(|o| o.code == code)
                    .unwrap_or(0);
                pos as f64 - (k as f64 - 1.0) / 2.0
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let cat = QuestionCatalog::nyts2018();
        let sig: SignalConfig = "Q6=2,Q27=1.5,Q36=-1,noise=0.3".parse().unwrap();
        let csv = |seed| {
            let mut buf = Vec::new();
            generate_synthetic(200, &cat, &sig, seed)
                .unwrap()
                .write_csv(&mut buf)
                .unwrap();
            buf
        };
        assert_eq!(csv(5), csv(5));
        assert_ne!(csv(5), csv(6));
    }

    #[test]
    fn all_cells_in_domain() {
        let cat = QuestionCatalog::nyts2018();
        let t = generate_synthetic(300, &cat, &SignalConfig::default(), 1).unwrap();
        let cols = cat.all_columns();
        assert_eq!(t.columns.len(), cols.len());
        for row in &t.rows {
            for ((col, q), cell) in cols.iter().zip(row) {
                if let Some(code) = cell {
                    assert!(col.allowed_codes(q).contains(code), "{} = {code}", col.name);
                }
            }
        }
    }

    #[test]
    fn signal_must_reference_predictors() {
        let cat = QuestionCatalog::nyts2018();
        for q in ["Q16", "Q7", "Q1234"] {
            let sig = SignalConfig::with_weights([(q, 1.0)]);
            assert!(matches!(
                generate_synthetic(10, &cat, &sig, 0),
                Err(IngestError::SignalQuestion(id)) if id == q
            ));
        }
        assert!(matches!(
            generate_synthetic(0, &cat, &SignalConfig::default(), 0),
            Err(IngestError::ZeroRows)
        ));
    }

    #[test]
    fn signal_parsing() {
        let s: SignalConfig = "Q6=2, bias=-0.5, missing=0".parse().unwrap();
        assert_eq!(s.weights, vec![("Q6".to_string(), 2.0)]);
        assert_eq!((s.bias, s.missing_rate), (-0.5, 0.0));
        assert_eq!(
            "none".parse::<SignalConfig>().unwrap(),
            SignalConfig::default()
        );
        assert!("Q6".parse::<SignalConfig>().is_err());
        assert!("Q6=abc".parse::<SignalConfig>().is_err());
    }
}
