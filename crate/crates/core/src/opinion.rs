//! Opinion polarity estimation.
//!
//! Each word of a pre-tagged message is looked up in a polarity lexicon,
//! giving a probability distribution over Θ = {Pos, Neg, Neut}. A message's
//! polarity is the mean of its word distributions, and a user's opinion is
//! the mean over their messages. [`opinion_to_bba`] turns a user's opinion
//! into a mass function on Θ by fusing one simple BBA for the positive
//! component with one for the negative component.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{dempster_combine, simple_bba, BeliefError, Frame, MassFunction, Subset};

pub const POS: &str = "Pos";
pub const NEG: &str = "Neg";
pub const NEUT: &str = "Neut";

#[derive(Debug, Error)]
pub enum OpinionError {
    #[error("invalid opinion distribution ({pos}, {neg}, {neut})")]
    InvalidDistribution { pos: f64, neg: f64, neut: f64 },
    #[error("message has no tokens")]
    EmptyMessage,
    #[error("no messages to aggregate")]
    NoMessages,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = OpinionError> = std::result::Result<T, E>;

/// The opinion frame Θ = {Pos, Neg, Neut}.
pub fn opinion_frame() -> &'static Frame {
    static FRAME: OnceLock<Frame> = OnceLock::new();
    FRAME.get_or_init(|| Frame::new([POS, NEG, NEUT]).expect("static frame"))
}

pub fn pos_subset() -> Subset {
    Subset::from_bits(0b001)
}

pub fn neg_subset() -> Subset {
    Subset::from_bits(0b010)
}

/// Probability distribution over Θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpinionDistribution {
    pos: f64,
    neg: f64,
    neut: f64,
}

impl OpinionDistribution {
    pub const NEUTRAL: OpinionDistribution = OpinionDistribution {
        pos: 0.0,
        neg: 0.0,
        neut: 1.0,
    };

    pub fn new(pos: f64, neg: f64, neut: f64) -> Result<Self> {
        let ok = [pos, neg, neut].iter().all(|x| (0.0..=1.0).contains(x)) && (pos + neg + neut - 1.0).abs() <= 1e-9;
        if ok {
            Ok(OpinionDistribution { pos, neg, neut })
        } else {
            Err(OpinionError::InvalidDistribution { pos, neg, neut })
        }
    }

    pub fn pos(&self) -> f64 {
        self.pos
    }

    pub fn neg(&self) -> f64 {
        self.neg
    }

    pub fn neut(&self) -> f64 {
        self.neut
    }

    /// Component-wise mean. `None` for an empty input.
    pub fn mean<I>(items: I) -> Option<Self>
    where
        I: IntoIterator<Item = OpinionDistribution>,
    {
        let (mut p, mut n, mut u, mut count) = (0.0, 0.0, 0.0, 0usize);
        for d in items {
            p += d.pos;
            n += d.neg;
            u += d.neut;
            count += 1;
        }
        if count == 0 {
            return None;
        }
        let c = count as f64;
        Some(OpinionDistribution {
            pos: p / c,
            neg: n / c,
            neut: u / c,
        })
    }
}

/// Part-of-speech label attached to a token by external tagging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl FromStr for Tag {
    type Err = std::convert::Infallible;

    /// Accepts full names and SentiWordNet's single-letter codes; anything else
    /// (conjunctions, particles, punctuation) becomes [`Tag::Other`].
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "noun" | "n" => Tag::Noun,
            "verb" | "v" => Tag::Verb,
            "adj" | "adjective" | "a" | "s" => Tag::Adj,
            "adv" | "adverb" | "r" => Tag::Adv,
            _ => Tag::Other,
        })
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Noun => "noun",
            Tag::Verb => "verb",
            Tag::Adj => "adj",
            Tag::Adv => "adv",
            Tag::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: Tag,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, tag: Tag) -> Self {
        TaggedToken {
            surface: surface.into(),
            tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub author: String,
    pub tokens: Vec<TaggedToken>,
    pub timestamp: Option<i64>,
}

/// Word polarities keyed by lower-cased word and tag.
#[derive(Debug, Clone, Default)]
pub struct PolarityLexicon {
    entries: HashMap<(String, Tag), OpinionDistribution>,
}

impl PolarityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, tag: Tag, polarity: OpinionDistribution) {
        self.entries.insert((word.to_lowercase(), tag), polarity);
    }

    pub fn get(&self, word: &str, tag: Tag) -> Option<&OpinionDistribution> {
        self.entries.get(&(word.to_lowercase(), tag))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads the `word\ttag\tpos\tneg\tneut` format. The first non-comment
    /// line is the header; lines starting with `#` are skipped.
    pub fn from_tsv<R: Read>(reader: R) -> Result<Self> {
        let mut text = String::new();
        let mut reader = reader;
        reader.read_to_string(&mut text)?;
        let mut lex = PolarityLexicon::new();
        let mut seen_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !seen_header {
                seen_header = true;
                let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
                if cols != ["word", "tag", "pos", "neg", "neut"] {
                    return Err(OpinionError::Parse {
                        line,
                        message: format!("expected header word/tag/pos/neg/neut, got {cols:?}"),
                    });
                }
                continue;
            }
            let cols: Vec<&str> = trimmed.split('\t').collect();
            if cols.len() != 5 {
                return Err(OpinionError::Parse {
                    line,
                    message: format!("expected 5 columns, found {}", cols.len()),
                });
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| OpinionError::Parse {
                    line,
                    message: format!("bad number `{s}`: {e}"),
                })
            };
            let dist = OpinionDistribution::new(num(cols[2])?, num(cols[3])?, num(cols[4])?).map_err(|e| {
                OpinionError::Parse {
                    line,
                    message: e.to_string(),
                }
            })?;
            let word = cols[0].trim();
            if word.is_empty() {
                return Err(OpinionError::Parse {
                    line,
                    message: "empty word".into(),
                });
            }
            let tag: Tag = cols[1].trim().parse().unwrap_or(Tag::Other);
            lex.insert(word, tag, dist);
        }
        if !seen_header {
            return Err(OpinionError::Parse {
                line: 0,
                message: "missing header row".into(),
            });
        }
        Ok(lex)
    }
}

/// Parses newline-delimited `user_id\ttimestamp\ttoken/tag token/tag ...`
/// records. An empty timestamp column is allowed; a record with no tokens is
/// kept with an empty token list and skipped at aggregation time.
pub fn parse_messages<R: Read>(reader: R) -> Result<Vec<Message>> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut cols = raw.splitn(3, '\t');
        let author = cols.next().unwrap_or("").trim();
        if author.is_empty() {
            return Err(OpinionError::Parse {
                line,
                message: "missing user id".into(),
            });
        }
        let ts = cols.next().ok_or_else(|| OpinionError::Parse {
            line,
            message: "missing timestamp column".into(),
        })?;
        let timestamp = match ts.trim() {
            "" => None,
            t => Some(t.parse::<i64>().map_err(|e| OpinionError::Parse {
                line,
                message: format!("bad timestamp `{t}`: {e}"),
            })?),
        };
        let tokens = cols
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|tok| match tok.rsplit_once('/') {
                Some((w, t)) if !w.is_empty() => Ok(TaggedToken::new(w, t.parse().unwrap_or(Tag::Other))),
                _ => Err(OpinionError::Parse {
                    line,
                    message: format!("token `{tok}` is not in word/tag form"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Message {
            author: author.to_string(),
            tokens,
            timestamp,
        });
    }
    Ok(out)
}

/// Lexicon polarity of one token; unknown words are fully neutral.
pub fn token_polarity(token: &TaggedToken, lexicon: &PolarityLexicon) -> OpinionDistribution {
    lexicon
        .get(&token.surface, token.tag)
        .copied()
        .unwrap_or(OpinionDistribution::NEUTRAL)
}

/// Mean token polarity of a message.
pub fn message_polarity(msg: &Message, lexicon: &PolarityLexicon) -> Result<OpinionDistribution> {
    OpinionDistribution::mean(msg.tokens.iter().map(|t| token_polarity(t, lexicon))).ok_or(OpinionError::EmptyMessage)
}

/// Mean opinion over a user's message polarities.
pub fn user_opinion(messages: &[OpinionDistribution]) -> Result<OpinionDistribution> {
    OpinionDistribution::mean(messages.iter().copied()).ok_or(OpinionError::NoMessages)
}

/// How an opinion component becomes the discount α of its simple BBA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BbaMapping {
    /// m({Pos}) = Pr(Pos), m(Θ) = 1 − Pr(Pos); likewise for Neg.
    #[default]
    Default,
    /// α = Pr(Pos) verbatim: m({Pos}) = 1 − Pr(Pos).
    LiteralAlpha,
}

impl FromStr for BbaMapping {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "default" => Ok(BbaMapping::Default),
            "literal-alpha" => Ok(BbaMapping::LiteralAlpha),
            other => Err(format!("unknown bba mapping `{other}`")),
        }
    }
}

/// Opinion BBA m_u^Θ under the default mapping. Never fails.
pub fn opinion_to_bba(pr: &OpinionDistribution) -> MassFunction {
    opinion_to_bba_with(pr, BbaMapping::Default).expect("default mapping cannot conflict totally")
}

/// Opinion BBA under an explicit mapping. The literal mapping yields total
/// conflict when both Pr(Pos) and Pr(Neg) are zero.
pub fn opinion_to_bba_with(pr: &OpinionDistribution, mapping: BbaMapping) -> Result<MassFunction> {
    let theta = opinion_frame();
    let (alpha_pos, alpha_neg) = match mapping {
        BbaMapping::Default => (1.0 - pr.pos, 1.0 - pr.neg),
        BbaMapping::LiteralAlpha => (pr.pos, pr.neg),
    };
    let m_pos = simple_bba(theta, pos_subset(), alpha_pos)?;
    let m_neg = simple_bba(theta, neg_subset(), alpha_neg)?;
    Ok(dempster_combine(&m_pos, &m_neg)?)
}
