//! Corpus-level BLEU-1..4 and ROUGE-L for scoring translations.
//!
//! BLEU uses corpus-level modified n-gram precision with clipping and the
//! brevity penalty; BLEU-k is the geometric mean of p_1..p_k times the
//! penalty, scaled to [0, 100]. ROUGE-L is the mean per-pair LCS F1 in
//! [0, 1]. Tokens are opaque strings: inputs are split on whitespace and
//! never case-folded. No smoothing is applied unless requested.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub const BLEU_MAX_N: usize = 4;

/// Hypothesis/reference token pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pairs: Vec<(Vec<String>, Vec<String>)>,
}

impl Corpus {
    pub fn new(pairs: Vec<(Vec<String>, Vec<String>)>) -> Self {
        Self { pairs }
    }

    /// Whitespace-tokenizes parallel hypothesis/reference lines.
    pub fn from_lines<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R]) -> Result<Self> {
        if hyps.len() != refs.len() {
            return Err(Error::InvalidInput(format!(
                "{} hypothesis lines vs {} reference lines",
                hyps.len(),
                refs.len()
            )));
        }
        let tokenize =
            |s: &str| -> Vec<String> { s.split_whitespace().map(str::to_string).collect() };
        Ok(Self {
            pairs: hyps
                .iter()
                .zip(refs)
                .map(|(h, r)| (tokenize(h.as_ref()), tokenize(r.as_ref())))
                .collect(),
        })
    }

    pub fn pairs(&self) -> &[(Vec<String>, Vec<String>)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn check_scorable(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for (i, (_, reference)) in self.pairs.iter().enumerate() {
            if reference.is_empty() {
                return Err(Error::EmptyReference { pair: i });
            }
        }
        Ok(())
    }
}

/// BLEU-1..4 (in [0, 100]), the per-n modified precisions, the brevity
/// penalty, and ROUGE-L (in [0, 1]).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub bleu: [f64; BLEU_MAX_N],
    pub precisions: [f64; BLEU_MAX_N],
    pub brevity_penalty: f64,
    pub rouge_l: f64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU: clipped n-gram matches and totals are accumulated over
/// all pairs, `BP = min(1, exp(1 - r/c))` from the total reference and
/// hypothesis lengths, and `BLEU-k = 100 * BP * exp(mean of ln p_1..p_k)`.
/// Any zero precision zeroes every BLEU-k with k >= that order. `smoothing`
/// applies add-one to each order's matches and totals.
pub fn bleu(corpus: &Corpus, smoothing: bool) -> Result<BleuReport> {
    corpus.check_scorable()?;
    let mut matches = [0usize; BLEU_MAX_N];
    let mut totals = [0usize; BLEU_MAX_N];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;
    for (hyp, reference) in &corpus.pairs {
        hyp_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=BLEU_MAX_N {
            let hyp_grams = ngram_counts(hyp, n);
            if hyp_grams.is_empty() {
                continue;
            }
            let ref_grams = ngram_counts(reference, n);
            for (gram, count) in &hyp_grams {
                let clipped = (*count).min(ref_grams.get(gram).copied().unwrap_or(0));
                matches[n - 1] += clipped;
                totals[n - 1] += count;
            }
        }
    }

    let mut precisions = [0.0; BLEU_MAX_N];
    for n in 0..BLEU_MAX_N {
        let (m, t) = if smoothing {
            (matches[n] + 1, totals[n] + 1)
        } else {
            (matches[n], totals[n])
        };
        precisions[n] = if t == 0 { 0.0 } else { m as f64 / t as f64 };
    }

    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp().min(1.0)
    };

    let mut scores = [0.0; BLEU_MAX_N];
    for k in 1..=BLEU_MAX_N {
        if precisions[..k].contains(&0.0) {
            continue;
        }
        let log_mean: f64 = precisions[..k].iter().map(|p| p.ln()).sum::<f64>() / k as f64;
        scores[k - 1] = 100.0 * brevity_penalty * log_mean.exp();
    }
    Ok(BleuReport {
        scores,
        precisions,
        brevity_penalty,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuReport {
    pub scores: [f64; BLEU_MAX_N],
    pub precisions: [f64; BLEU_MAX_N],
    pub brevity_penalty: f64,
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Mean per-pair LCS F1: precision `l/c`, recall `l/r`, `F1 = 2PR / (P + R)`
/// (zero when the LCS is empty).
pub fn rouge_l(corpus: &Corpus) -> Result<f64> {
    corpus.check_scorable()?;
    let mut total = 0.0;
    for (hyp, reference) in &corpus.pairs {
        let l = lcs_len(hyp, reference);
        if l == 0 {
            continue;
        }
        let p = l as f64 / hyp.len() as f64;
        let r = l as f64 / reference.len() as f64;
        total += 2.0 * p * r / (p + r);
    }
    Ok(total / corpus.pairs.len() as f64)
}

/// BLEU and ROUGE-L in one report.
pub fn score_report(corpus: &Corpus, smoothing: bool) -> Result<ScoreReport> {
    let b = bleu(corpus, smoothing)?;
    Ok(ScoreReport {
        bleu: b.scores,
        precisions: b.precisions,
        brevity_penalty: b.brevity_penalty,
        rouge_l: rouge_l(corpus)?,
    })
}
