use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::policies::{parse_dictionary_table, BlockEmitterConfig, BoundaryRules, ComputeModel, UnknownTokens};
use crate::stream::{HopMs, Token};
use crate::tts::{SynthCompute, TableDurationModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("`{field}`: {reason}")]
    Field { field: String, reason: String },
}

impl ConfigError {
    /// Dotted path of the offending field, if the error concerns one.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Field { field, .. } => Some(field),
            _ => None,
        }
    }

    fn field_err(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RunMode {
    #[default]
    Sim,
    Pipe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImtPolicyKind {
    WaitK(usize),
    PassThrough,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceConfig {
    pub block_frames: u32,
    pub hop: HopMs,
    /// Block size for token-file lines without `<m>` separators.
    pub tokens_per_block: usize,
    /// Silence between consecutive segments of a token file.
    pub gap_ms: u64,
}

#[derive(Debug, Clone)]
pub struct ImtConfig {
    pub policy: ImtPolicyKind,
    /// `None` is the identity.
    pub table: Option<HashMap<String, Vec<Token>>>,
    pub unknown: UnknownTokens,
    pub compute: ComputeModel,
}

#[derive(Debug, Clone)]
pub struct IttsConfig {
    pub rules: BoundaryRules,
    pub durations: TableDurationModel,
    pub compute: SynthCompute,
}

/// Everything needed to build the SRC → ISR → IMT → ITTS cascade.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub source: SourceConfig,
    pub isr: BlockEmitterConfig,
    pub imt: ImtConfig,
    pub itts: IttsConfig,
    pub mode: RunMode,
    /// Config file this was loaded from, if any.
    pub path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source: SourceConfig {
                block_frames: 32,
                hop: HopMs::default(),
                tokens_per_block: 1,
                gap_ms: 0,
            },
            isr: BlockEmitterConfig::default(),
            imt: ImtConfig {
                policy: ImtPolicyKind::WaitK(1),
                table: None,
                unknown: UnknownTokens::PassThrough,
                compute: ComputeModel::default(),
            },
            itts: IttsConfig {
                rules: BoundaryRules::every_token(),
                durations: TableDurationModel::default(),
                compute: SynthCompute::default(),
            },
            mode: RunMode::Sim,
            path: None,
        }
    }
}

const KEYS: &[&str] = &[
    "source.block_frames",
    "source.hop_ms",
    "source.tokens_per_block",
    "source.gap_ms",
    "isr.lookahead_blocks",
    "isr.compute_ms_per_block",
    "imt.policy",
    "imt.k",
    "imt.table",
    "imt.unknown",
    "imt.stage_ms",
    "imt.per_token_ms",
    "itts.rules",
    "itts.durations",
    "itts.stage_ms",
    "itts.per_mora_ms",
    "run.mode",
];

fn parse_num<T: std::str::FromStr>(field: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError::field_err(field, format!("`{v}` is not a non-negative integer")))
}

fn positive<T: std::str::FromStr + PartialOrd + Default>(field: &str, v: &str) -> Result<T, ConfigError> {
    let n: T = parse_num(field, v)?;
    if n <= T::default() {
        return Err(ConfigError::field_err(field, "must be at least 1"));
    }
    Ok(n)
}

fn read_ref(field: &str, base: &Path, value: &str) -> Result<String, ConfigError> {
    let path = base.join(value);
    fs::read_to_string(&path)
        .map_err(|e| ConfigError::field_err(field, format!("cannot read {}: {e}", path.display())))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(&text, base)?;
        cfg.path = Some(path.to_path_buf());
        Ok(cfg)
    }

    /// Parses `section.key = value` lines; referenced files are resolved
    /// against `base_dir` and read immediately.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut values: HashMap<&str, &str> = HashMap::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    reason: format!("expected `section.key = value`, got `{trimmed}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::Syntax {
                    line,
                    reason: format!("unknown key `{key}`"),
                });
            };
            if !seen.insert(known) {
                return Err(ConfigError::Syntax {
                    line,
                    reason: format!("`{key}` set twice"),
                });
            }
            values.insert(known, value);
        }

        let mut cfg = Self::default();
        let get = |k: &str| values.get(k).copied();

        if let Some(v) = get("source.block_frames") {
            cfg.source.block_frames = positive("source.block_frames", v)?;
        }
        if let Some(v) = get("source.hop_ms") {
            cfg.source.hop = v
                .parse()
                .ok()
                .filter(|h: &HopMs| h.units() > 0)
                .ok_or_else(|| ConfigError::field_err("source.hop_ms", format!("`{v}` is not a positive canonical decimal")))?;
        }
        if let Some(v) = get("source.tokens_per_block") {
            cfg.source.tokens_per_block = positive("source.tokens_per_block", v)?;
        }
        if let Some(v) = get("source.gap_ms") {
            cfg.source.gap_ms = parse_num("source.gap_ms", v)?;
        }
        cfg.isr.block_frames = cfg.source.block_frames;
        cfg.isr.hop_ms = cfg.source.hop;
        if let Some(v) = get("isr.lookahead_blocks") {
            cfg.isr.lookahead_blocks = parse_num("isr.lookahead_blocks", v)?;
        }
        if let Some(v) = get("isr.compute_ms_per_block") {
            cfg.isr.compute_ms_per_block = parse_num("isr.compute_ms_per_block", v)?;
        }

        let k = match get("imt.k") {
            Some(v) => Some(positive::<usize>("imt.k", v)?),
            None => None,
        };
        cfg.imt.policy = match get("imt.policy").unwrap_or("wait_k") {
            "wait_k" => ImtPolicyKind::WaitK(k.unwrap_or(1)),
            "passthrough" => ImtPolicyKind::PassThrough,
            other => {
                return Err(ConfigError::field_err(
                    "imt.policy",
                    format!("`{other}` is not one of wait_k, passthrough"),
                ))
            }
        };
        if let Some(v) = get("imt.table") {
            let text = read_ref("imt.table", base_dir, v)?;
            let table = parse_dictionary_table(&text)
                .map_err(|e| ConfigError::field_err("imt.table", format!("{v}: {e}")))?;
            cfg.imt.table = Some(table);
        }
        if let Some(v) = get("imt.unknown") {
            cfg.imt.unknown = match v {
                "pass" => UnknownTokens::PassThrough,
                "drop" => UnknownTokens::Drop,
                other => {
                    return Err(ConfigError::field_err(
                        "imt.unknown",
                        format!("`{other}` is not one of pass, drop"),
                    ))
                }
            };
        }
        if let Some(v) = get("imt.stage_ms") {
            cfg.imt.compute.stage_ms = parse_num("imt.stage_ms", v)?;
        }
        if let Some(v) = get("imt.per_token_ms") {
            cfg.imt.compute.per_token_ms = parse_num("imt.per_token_ms", v)?;
        }

        if let Some(v) = get("itts.rules") {
            let text = read_ref("itts.rules", base_dir, v)?;
            cfg.itts.rules = BoundaryRules::parse(&text)
                .map_err(|e| ConfigError::field_err("itts.rules", format!("{v}: {e}")))?;
        }
        if let Some(v) = get("itts.durations") {
            let text = read_ref("itts.durations", base_dir, v)?;
            cfg.itts.durations = TableDurationModel::parse(&text)
                .map_err(|e| ConfigError::field_err("itts.durations", format!("{v}: {e}")))?;
        }
        if let Some(v) = get("itts.stage_ms") {
            cfg.itts.compute.stage_ms = parse_num("itts.stage_ms", v)?;
        }
        if let Some(v) = get("itts.per_mora_ms") {
            cfg.itts.compute.per_mora_ms = parse_num("itts.per_mora_ms", v)?;
        }
        if let Some(v) = get("run.mode") {
            cfg.mode = match v {
                "sim" => RunMode::Sim,
                "pipe" => RunMode::Pipe,
                other => {
                    return Err(ConfigError::field_err(
                        "run.mode",
                        format!("`{other}` is not one of sim, pipe"),
                    ))
                }
            };
        }
        Ok(cfg)
    }
}
