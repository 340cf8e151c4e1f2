//! JSON configuration of a FER sweep.

use std::path::Path;

use ookpolar_core::channel::{db_to_linear, optimize_p};
use ookpolar_core::construction::CodeParams;
use ookpolar_core::decoder::DecodeConfig;
use ookpolar_core::kernel::{CheckNode, Metric};
use ookpolar_core::{CrcConfig, EncodeRule};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{PowerConvention, StopRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub code: CodeBlock,
    #[serde(default)]
    pub encode: EncodeBlock,
    #[serde(default)]
    pub decode: DecodeBlock,
    pub sweep: SweepBlock,
    #[serde(default)]
    pub stop: StopRule,
    pub seed: u64,
    #[serde(default)]
    pub power_convention: PowerConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeBlock {
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    /// Target ones-probability; optimized for `design_snr_db` when absent.
    #[serde(default)]
    pub p: Option<f64>,
    pub design_snr_db: f64,
    #[serde(rename = "D", default)]
    pub dynamic_len: usize,
    #[serde(default)]
    pub crc_width: u32,
    #[serde(default)]
    pub trials: Trials,
    /// Construction seed; the master seed when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trials {
    pub source: u64,
    pub channel: u64,
}

impl Default for Trials {
    fn default() -> Self {
        Self { source: 2000, channel: 10000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    Randomized,
    Argmax,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodeBlock {
    pub rule: RuleName,
    #[serde(default = "one")]
    pub list_size: usize,
}

impl Default for EncodeBlock {
    fn default() -> Self {
        Self { rule: RuleName::Argmax, list_size: 1 }
    }
}

impl EncodeBlock {
    /// Randomized rounding gets its seed per frame.
    pub fn rule(&self) -> EncodeRule {
        match self.rule {
            RuleName::Randomized => EncodeRule::RandomizedRounding { seed: 0 },
            RuleName::Argmax => EncodeRule::Argmax,
            RuleName::List => EncodeRule::List { list_size: self.list_size },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeBlock {
    #[serde(default = "one")]
    pub list_size: usize,
    #[serde(default)]
    pub check_node: CheckNode,
    #[serde(default)]
    pub metric: Metric,
    /// Rebuild dynamic bits from the encoder's randomized-rounding draws.
    #[serde(default)]
    pub mimic: bool,
}

impl Default for DecodeBlock {
    fn default() -> Self {
        Self { list_size: 1, check_node: CheckNode::Exact, metric: Metric::Exact, mimic: false }
    }
}

impl DecodeBlock {
    pub fn config(&self) -> DecodeConfig {
        DecodeConfig { list_size: self.list_size, check_node: self.check_node, metric: self.metric }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub snr_db: Vec<f64>,
}

fn one() -> usize {
    1
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("field `{}`: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !self.code.len.is_power_of_two() || self.code.len < 2 {
            return bad(format!("code.N = {} is not a power of two >= 2", self.code.len));
        }
        if let Some(p) = self.code.p {
            if !(p > 0.0 && p <= 0.5) {
                return bad(format!("code.p = {p} outside (0, 0.5]"));
            }
        }
        CrcConfig::for_width(self.code.crc_width).map_err(|e| Error::Config(format!("code.crc_width: {e}")))?;
        if self.encode.rule == RuleName::List {
            ookpolar_core::encoder::check_list_size(self.encode.list_size)
                .map_err(|e| Error::Config(format!("encode.list_size: {e}")))?;
        }
        if self.decode.list_size == 0 || !self.decode.list_size.is_power_of_two() {
            return bad(format!("decode.list_size = {} is not a power of two", self.decode.list_size));
        }
        if self.decode.mimic && self.encode.rule != RuleName::Randomized {
            return bad("decode.mimic requires encode.rule = randomized".into());
        }
        if self.sweep.snr_db.is_empty() || self.sweep.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("sweep.snr_db must be a non-empty list of finite values".into());
        }
        if self.stop.max_frames == 0 || self.stop.min_frame_errors == 0 {
            return bad("stop.max_frames and stop.min_frame_errors must be positive".into());
        }
        Ok(())
    }

    pub fn target_p(&self) -> Result<f64> {
        match self.code.p {
            Some(p) => Ok(p),
            None => Ok(optimize_p(db_to_linear(self.code.design_snr_db))?.p),
        }
    }

    pub fn code_params(&self) -> Result<CodeParams> {
        Ok(CodeParams {
            len: self.code.len,
            rate: self.code.rate,
            p: self.target_p()?,
            dynamic_len: self.code.dynamic_len,
            crc: CrcConfig::for_width(self.code.crc_width)?,
            design_snr_db: self.code.design_snr_db,
            seed: self.code.seed.unwrap_or(self.seed),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "code": {"N": 64, "R": 0.5, "design_snr_db": 3.0},
        "sweep": {"snr_db": [1.0, 2.0]},
        "seed": 7
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = SweepConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.encode.rule(), EncodeRule::Argmax);
        assert_eq!(cfg.decode.config(), DecodeConfig::sc());
        assert_eq!(cfg.stop, StopRule::default());
        assert_eq!(cfg.power_convention, PowerConvention::SecondMoment);
        let params = cfg.code_params().unwrap();
        assert_eq!(params.seed, 7);
        assert!(params.p > 0.0 && params.p < 0.5);
    }

    #[test]
    fn error_names_the_field() {
        let text = MINIMAL.replace("\"R\": 0.5", "\"R\": \"half\"");
        let err = SweepConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("code.R"), "{err}");
        assert!(err.contains("line"), "{err}");
        let text = MINIMAL.replace("\"seed\": 7", "\"seed\": 7, \"sed\": 1");
        let err = SweepConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            ("\"N\": 64", "\"N\": 60"),
            ("\"design_snr_db\": 3.0", "\"design_snr_db\": 3.0, \"crc_width\": 12"),
            ("[1.0, 2.0]", "[]"),
        ] {
            let err = SweepConfig::from_json(&MINIMAL.replace(from, to)).unwrap_err();
            assert_eq!(err.exit_code(), 2);
        }
    }
}
