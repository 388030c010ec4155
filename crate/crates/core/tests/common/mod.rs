#![allow(dead_code)]

use cascade_core::policies::Transducer;
use cascade_core::stream::{Channel, Payload, Provenance, TimedEvent, Token};

pub fn tok(s: &str) -> Token {
    Token::from_text(s).unwrap()
}

/// Builds a stream of consecutive segments on `channel`. Each segment is
/// a list of (text, gap before it in ms); `</s>` is appended to each.
pub fn stream(channel: Channel, segments: &[Vec<(String, u64)>]) -> Vec<TimedEvent> {
    let mut out = Vec::new();
    let mut t = 0;
    for (seg, items) in segments.iter().enumerate() {
        let first = t;
        for (text, gap) in items.iter().cloned().chain(std::iter::once(("</s>".to_string(), 0))) {
            t += gap;
            out.push(TimedEvent::new(
                channel,
                out.len() as u64,
                t,
                Payload::Token(tok(&text)),
                Provenance {
                    segment_id: seg as u64,
                    first_input_ms: first,
                },
            ));
        }
    }
    out
}

pub fn regular_texts(evs: &[TimedEvent]) -> Vec<String> {
    evs.iter()
        .filter_map(|e| e.token())
        .filter(|t| t.is_regular())
        .map(|t| t.text().to_string())
        .collect()
}

/// Releases a fixed target sequence in full on the first read.
pub struct FixedOutput {
    pub target: Vec<Token>,
    pub released: bool,
}

impl FixedOutput {
    pub fn new(n: usize) -> Self {
        Self {
            target: (0..n).map(|i| tok(&format!("t{i}"))).collect(),
            released: false,
        }
    }
}

impl Transducer for FixedOutput {
    fn consume(&mut self, _: &Token) -> Vec<Token> {
        if std::mem::replace(&mut self.released, true) {
            Vec::new()
        } else {
            self.target.clone()
        }
    }

    fn finish(&mut self) -> Vec<Token> {
        if std::mem::replace(&mut self.released, true) {
            Vec::new()
        } else {
            self.target.clone()
        }
    }

    fn reset(&mut self) {
        self.released = false;
    }
}

/// Echoes each token one read late, tagged with how many tokens it has
/// seen since the last reset, so leaked state shows up in the output.
#[derive(Default)]
pub struct DelayedEcho {
    held: Option<Token>,
    seen: usize,
}

impl Transducer for DelayedEcho {
    fn consume(&mut self, token: &Token) -> Vec<Token> {
        self.seen += 1;
        let tagged = tok(&format!("{}#{}", token.text(), self.seen));
        self.held.replace(tagged).into_iter().collect()
    }

    fn finish(&mut self) -> Vec<Token> {
        self.held.take().into_iter().collect()
    }

    fn reset(&mut self) {
        *self = Self::default();
    }
}
