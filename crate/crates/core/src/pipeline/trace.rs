//! Replayable touch traces: one JSON object per line.
//!
//! ```text
//! # comment
//! {"t_ms":0,"x":0,"y":6143,"z":80,"finger":true}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_codec::TouchSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub t_ms: u64,
    pub x: u16,
    pub y: u16,
    pub z: u8,
    pub finger: bool,
}

impl TraceRecord {
    pub fn sample(&self) -> TouchSample {
        TouchSample {
            t_ms: self.t_ms,
            x: self.x,
            y: self.y,
            z: self.z,
            finger: self.finger,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("trace record serializes")
    }
}

impl From<TouchSample> for TraceRecord {
    fn from(s: TouchSample) -> Self {
        Self {
            t_ms: s.t_ms,
            x: s.x,
            y: s.y,
            z: s.z,
            finger: s.finger,
        }
    }
}

/// Parses a whole trace. Blank lines and lines starting with `#` are
/// skipped; coordinates must be in range and timestamps non-decreasing.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut records: Vec<TraceRecord> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record: TraceRecord =
            serde_json::from_str(trimmed).map_err(|e| Error::TraceFormat {
                line,
                message: e.to_string(),
            })?;
        record
            .sample()
            .check_range()
            .map_err(|e| Error::TraceFormat {
                line,
                message: e.to_string(),
            })?;
        if let Some(prev) = records.last() {
            if record.t_ms < prev.t_ms {
                return Err(Error::TraceFormat {
                    line,
                    message: format!(
                        "t_ms {} goes backwards (previous {})",
                        record.t_ms, prev.t_ms
                    ),
                });
            }
        }
        records.push(record);
    }
    Ok(records)
}

pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}
