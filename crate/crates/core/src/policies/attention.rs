//! Splitting a segment into sub-segments from decoder attention.

use std::ops::Range;

use thiserror::Error;

use crate::stream::Token;

pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttentionError {
    #[error("attention matrix needs at least one row and one column")]
    Empty,
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} has a negative or non-finite weight at column {col}")]
    BadWeight { row: usize, col: usize },
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
}

/// Attention of N output tokens over I input frames, one row per token.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    n_frames: usize,
    rows: Vec<Vec<f64>>,
}

impl AttentionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, AttentionError> {
        let n_frames = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n_frames == 0 {
            return Err(AttentionError::Empty);
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_frames {
                return Err(AttentionError::Ragged {
                    row: r,
                    expected: n_frames,
                    found: row.len(),
                });
            }
            if let Some(c) = row.iter().position(|w| !w.is_finite() || *w < 0.0) {
                return Err(AttentionError::BadWeight { row: r, col: c });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(AttentionError::NotStochastic { row: r, sum });
            }
        }
        Ok(Self { n_frames, rows })
    }

    pub fn n_tokens(&self) -> usize {
        self.rows.len()
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Sub-segment cuts over `[0, n_frames)` plus the sub-segment each token
/// belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentBoundaries {
    /// Interior cut points, strictly increasing, each in `1..n_frames`.
    pub cuts: Vec<usize>,
    pub n_frames: usize,
    /// For every token, the index of its sub-segment.
    pub token_segment: Vec<usize>,
}

impl SegmentBoundaries {
    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut edges = Vec::with_capacity(self.cuts.len() + 2);
        edges.push(0);
        edges.extend(&self.cuts);
        edges.push(self.n_frames);
        edges.windows(2).map(|w| w[0]..w[1]).collect()
    }

    pub fn n_segments(&self) -> usize {
        self.cuts.len() + 1
    }
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &w) in row.iter().enumerate() {
        if w > row[best] {
            best = i;
        }
    }
    best
}

/// Anchors each token at its attention peak (lowest frame on ties),
/// clamps anchors to be non-decreasing and cuts half-way (rounded up)
/// between consecutive distinct anchors.
pub fn segment_by_attention(attention: &AttentionMatrix) -> SegmentBoundaries {
    let mut anchors: Vec<usize> = attention.rows.iter().map(|r| argmax(r)).collect();
    for n in 1..anchors.len() {
        anchors[n] = anchors[n].max(anchors[n - 1]);
    }
    let mut cuts = Vec::new();
    let mut token_segment = Vec::with_capacity(anchors.len());
    token_segment.push(0);
    for pair in anchors.windows(2) {
        if pair[1] != pair[0] {
            cuts.push((pair[0] + pair[1]).div_ceil(2));
        }
        token_segment.push(cuts.len());
    }
    SegmentBoundaries {
        cuts,
        n_frames: attention.n_frames,
        token_segment,
    }
}

/// Inserts `<m>` after the last token of every sub-segment.
pub fn mark_sub_segments(tokens: &[Token], bounds: &SegmentBoundaries) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len() + bounds.n_segments());
    for (i, tok) in tokens.iter().enumerate() {
        out.push(tok.clone());
        let seg = bounds.token_segment.get(i).copied();
        let next = bounds.token_segment.get(i + 1).copied();
        if next != seg {
            out.push(Token::end_block());
        }
    }
    out
}
