use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{hyp} hypotheses but {refs} references")]
    LengthMismatch { hyp: usize, refs: usize },
}

/// Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_lowercase).collect()
}

fn chars(s: &str) -> Vec<char> {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn check_lengths(hyp: usize, refs: usize) -> Result<(), MetricError> {
    if hyp != refs {
        return Err(MetricError::LengthMismatch { hyp, refs });
    }
    if hyp == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

fn rate<T: PartialEq>(pairs: impl Iterator<Item = (Vec<T>, Vec<T>)>) -> Result<f64, MetricError> {
    let (mut edits, mut len) = (0, 0);
    for (h, r) in pairs {
        edits += edit_distance(&h, &r);
        len += r.len();
    }
    if len == 0 {
        return Err(MetricError::EmptyReference);
    }
    Ok(edits as f64 / len as f64)
}

/// Word error rate over lowercased whitespace tokens.
pub fn wer(hyp: &str, reference: &str) -> Result<f64, MetricError> {
    rate(std::iter::once((words(hyp), words(reference))))
}

/// Character error rate over characters with whitespace removed.
pub fn cer(hyp: &str, reference: &str) -> Result<f64, MetricError> {
    rate(std::iter::once((chars(hyp), chars(reference))))
}

/// Total word edits over total reference words.
pub fn corpus_wer<S: AsRef<str>>(hyps: &[S], refs: &[S]) -> Result<f64, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    rate(hyps.iter().zip(refs).map(|(h, r)| (words(h.as_ref()), words(r.as_ref()))))
}

pub fn corpus_cer<S: AsRef<str>>(hyps: &[S], refs: &[S]) -> Result<f64, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    rate(hyps.iter().zip(refs).map(|(h, r)| (chars(h.as_ref()), chars(r.as_ref()))))
}

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuScores {
    /// BLEU-1 to BLEU-4 on a 0-100 scale.
    pub bleu: [f64; MAX_ORDER],
    /// Smoothed n-gram precisions, 0 where no n-grams of that order exist.
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuScores {
    pub fn length_ratio(&self) -> f64 {
        self.hyp_len as f64 / self.ref_len as f64
    }
}

fn ngram_counts<T: Hash + Eq>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for g in tokens.windows(n) {
            *m.entry(g).or_insert(0) += 1;
        }
    }
    m
}

/// Corpus BLEU with one reference per hypothesis and exponential
/// smoothing: the k-th zero precision becomes `1 / (2^k * total)`. An
/// order with no hypothesis n-grams at all gives 0 for that and every
/// higher order.
pub fn bleu<T: Hash + Eq>(hyps: &[Vec<T>], refs: &[Vec<T>]) -> Result<BleuScores, MetricError> {
    check_lengths(hyps.len(), refs.len())?;
    let mut correct = [0usize; MAX_ORDER];
    let mut total = [0usize; MAX_ORDER];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hyps.iter().zip(refs) {
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=MAX_ORDER {
            let rc = ngram_counts(r, n);
            for (g, c) in ngram_counts(h, n) {
                correct[n - 1] += c.min(rc.get(g).copied().unwrap_or(0));
            }
            total[n - 1] += h.len().saturating_sub(n - 1);
        }
    }
    if ref_len == 0 {
        return Err(MetricError::EmptyReference);
    }
    let mut precisions = [0.0; MAX_ORDER];
    let mut smooth = 1.0;
    for n in 0..MAX_ORDER {
        if total[n] == 0 {
            break;
        }
        precisions[n] = if correct[n] == 0 {
            smooth *= 2.0;
            1.0 / (smooth * total[n] as f64)
        } else {
            correct[n] as f64 / total[n] as f64
        };
    }
    let brevity_penalty = if hyp_len >= ref_len {
        1.0
    } else if hyp_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let mut bleu = [0.0; MAX_ORDER];
    for n in 1..=MAX_ORDER {
        let ps = &precisions[..n];
        if ps.iter().all(|&p| p > 0.0) {
            let mean_log = ps.iter().map(|p| p.ln()).sum::<f64>() / n as f64;
            bleu[n - 1] = 100.0 * brevity_penalty * mean_log.exp();
        }
    }
    Ok(BleuScores {
        bleu,
        precisions,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScoreReport {
    pub wer: Option<f64>,
    pub cer: Option<f64>,
    pub bleu: Option<BleuScores>,
}

impl ScoreReport {
    /// `key = value` lines with three decimals, only for the scores present.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(w) = self.wer {
            let _ = writeln!(s, "wer = {w:.3}");
        }
        if let Some(c) = self.cer {
            let _ = writeln!(s, "cer = {c:.3}");
        }
        if let Some(b) = &self.bleu {
            for (i, v) in b.bleu.iter().enumerate() {
                let _ = writeln!(s, "bleu{} = {v:.3}", i + 1);
            }
            let _ = writeln!(s, "length_ratio = {:.3}", b.length_ratio());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    fn corpus<'a>(lines: &[&'a str]) -> Vec<Vec<&'a str>> {
        lines.iter().map(|l| toks(l)).collect()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(edit_distance(&toks("see the dog"), &toks("see the dog")), 0);
        assert_eq!(edit_distance(&toks("see the dog"), &toks("see a dog")), 1);
        assert_eq!(edit_distance(&toks("a b c"), &[]), 3);
        assert_eq!(edit_distance::<u8>(&[], &[1, 2]), 2);
        assert_eq!(edit_distance(b"kitten", b"sitting"), 3);
    }

    #[test]
    fn error_rates() {
        assert_eq!(wer("see a dog", "see the dog").unwrap(), 1.0 / 3.0);
        assert_eq!(wer("See The", "see the").unwrap(), 0.0);
        assert_eq!(cer("abcd", "abce").unwrap(), 0.25);
        assert_eq!(cer("a b", "ab").unwrap(), 0.0);
        assert_eq!(wer("x", " "), Err(MetricError::EmptyReference));
        assert_eq!(corpus_wer(&["a b", "c"], &["a", "c d"]).unwrap(), 2.0 / 3.0);
        assert_eq!(
            corpus_cer(&["a"], &["a", "b"]),
            Err(MetricError::LengthMismatch { hyp: 1, refs: 2 })
        );
    }

    #[test]
    fn bleu_smoothed_zero_four_gram() {
        let b = bleu(&corpus(&["a b c d"]), &corpus(&["a b c e"])).unwrap();
        assert_eq!(b.precisions, [0.75, 2.0 / 3.0, 0.5, 0.5]);
        assert!(close(b.bleu[0], 75.0));
        assert!(close(b.bleu[3], 59.46035575013605));
    }

    #[test]
    fn bleu_identity() {
        let c = corpus(&["the cat sat on the mat", "hello world again and again"]);
        let b = bleu(&c, &c).unwrap();
        assert!(b.bleu.iter().all(|&v| close(v, 100.0)));
        assert_eq!(b.length_ratio(), 1.0);
    }

    #[test]
    fn bleu_brevity() {
        let b = bleu(&corpus(&["a b c d"]), &corpus(&["a b c d e f g h"])).unwrap();
        for v in b.bleu {
            assert!(close(v, 100.0 * (-1.0f64).exp()));
        }
        assert_eq!(b.length_ratio(), 0.5);
    }

    #[test]
    fn bleu_no_four_grams() {
        let b = bleu(&corpus(&["a b", "x y z"]), &corpus(&["a c", "x y w"])).unwrap();
        assert!(close(b.bleu[0], 60.0));
        assert_eq!(b.bleu[3], 0.0);
    }

    #[test]
    fn bleu_errors() {
        let e: Vec<Vec<&str>> = vec![];
        assert_eq!(bleu(&e, &e), Err(MetricError::EmptyCorpus));
        assert_eq!(
            bleu(&corpus(&["a"]), &corpus(&["a", "b"])),
            Err(MetricError::LengthMismatch { hyp: 1, refs: 2 })
        );
    }

    #[test]
    fn report_format() {
        let c = corpus(&["a b c d"]);
        let r = ScoreReport {
            bleu: Some(bleu(&c, &c).unwrap()),
            ..Default::default()
        };
        assert_eq!(
            r.render(),
            "bleu1 = 100.000\nbleu2 = 100.000\nbleu3 = 100.000\nbleu4 = 100.000\nlength_ratio = 1.000\n"
        );
    }
}
