//! The five-channel RGBYW light cluster and its 3-byte command format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHANNEL_COUNT: usize = 5;

/// Highest level a channel (and a command) can carry.
pub const LEVEL_MAX: u8 = 22;

pub const COMMAND_LEN: usize = 3;

const COMMAND_HEADER: u8 = 0xC0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum ChannelId {
    Red = 0,
    Green = 1,
    Blue = 2,
    Yellow = 3,
    White = 4,
}

impl ChannelId {
    /// Slider order, left to right.
    pub const ALL: [ChannelId; CHANNEL_COUNT] = [
        ChannelId::Red,
        ChannelId::Green,
        ChannelId::Blue,
        ChannelId::Yellow,
        ChannelId::White,
    ];

    pub fn from_index(index: usize) -> Option<ChannelId> {
        Self::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelId::Red => "red",
            ChannelId::Green => "green",
            ChannelId::Blue => "blue",
            ChannelId::Yellow => "yellow",
            ChannelId::White => "white",
        }
    }

    /// Linear display contribution of this channel at full level.
    fn primary(self) -> [f64; 3] {
        match self {
            ChannelId::Red => [1.0, 0.0, 0.0],
            ChannelId::Green => [0.0, 1.0, 0.0],
            ChannelId::Blue => [0.0, 0.0, 1.0],
            ChannelId::Yellow => [1.0, 1.0, 0.0],
            ChannelId::White => [1.0, 1.0, 1.0],
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LightCommand {
    pub channel: ChannelId,
    pub level: u8,
}

impl LightCommand {
    pub fn new(channel: ChannelId, level: u8) -> Result<Self> {
        if level > LEVEL_MAX {
            return Err(Error::range("level", level, LEVEL_MAX));
        }
        Ok(Self { channel, level })
    }

    pub fn encode(&self) -> Result<[u8; COMMAND_LEN]> {
        encode_command(self)
    }
}

/// `[0xC0 + channel, level, byte0 ^ byte1]`
pub fn encode_command(cmd: &LightCommand) -> Result<[u8; COMMAND_LEN]> {
    if cmd.level > LEVEL_MAX {
        return Err(Error::range("level", cmd.level, LEVEL_MAX));
    }
    let head = COMMAND_HEADER + cmd.channel as u8;
    Ok([head, cmd.level, head ^ cmd.level])
}

pub fn decode_command(bytes: &[u8; COMMAND_LEN]) -> Result<LightCommand> {
    let [head, level, check] = *bytes;
    let channel = head
        .checked_sub(COMMAND_HEADER)
        .and_then(|c| ChannelId::from_index(c as usize))
        .ok_or(Error::Framing("command header outside 0xC0..=0xC4"))?;
    let expected = head ^ level;
    if check != expected {
        return Err(Error::Checksum {
            expected,
            actual: check,
        });
    }
    LightCommand::new(channel, level)
}

/// One line of a command log: `"<t_ms> <HEX6>"`.
pub fn format_log_line(t_ms: u64, cmd: &LightCommand) -> Result<String> {
    let [a, b, c] = encode_command(cmd)?;
    Ok(format!("{t_ms} {a:02X}{b:02X}{c:02X}"))
}

pub fn parse_log_line(line: &str) -> Result<(u64, LightCommand)> {
    let (t, hex) = line
        .trim()
        .split_once(' ')
        .ok_or(Error::Framing("log line must be \"t_ms HEX6\""))?;
    let t_ms = t
        .parse()
        .map_err(|_| Error::Framing("log timestamp is not an integer"))?;
    if hex.len() != 2 * COMMAND_LEN || !hex.is_ascii() {
        return Err(Error::Framing("log command must be 6 hex digits"));
    }
    let mut bytes = [0u8; COMMAND_LEN];
    for (i, dst) in bytes.iter_mut().enumerate() {
        *dst = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
            .map_err(|_| Error::Framing("log command must be 6 hex digits"))?;
    }
    Ok((t_ms, decode_command(&bytes)?))
}

/// Current level of every channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LightState {
    pub levels: [u8; CHANNEL_COUNT],
}

impl LightState {
    pub fn new(levels: [u8; CHANNEL_COUNT]) -> Result<Self> {
        if let Some(&bad) = levels.iter().find(|&&l| l > LEVEL_MAX) {
            return Err(Error::range("level", bad, LEVEL_MAX));
        }
        Ok(Self { levels })
    }

    pub fn level(&self, channel: ChannelId) -> u8 {
        self.levels[channel.index()]
    }

    pub fn apply(&mut self, cmd: &LightCommand) {
        self.levels[cmd.channel.index()] = cmd.level;
    }

    pub fn blend(&self) -> [u8; 3] {
        blend_display(self)
    }
}

impl FromStr for ChannelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or(Error::Framing("unknown channel name"))
    }
}

const DISPLAY_GAMMA: f64 = 2.2;

/// Approximate on-screen color of the cluster.
///
/// Channel primaries are summed in linear space weighted by level, the sum is
/// scaled down if any component exceeds 1, and the result is gamma encoded.
pub fn blend_display(state: &LightState) -> [u8; 3] {
    let mut linear = [0.0f64; 3];
    for ch in ChannelId::ALL {
        let weight = f64::from(state.level(ch)) / f64::from(LEVEL_MAX);
        for (acc, p) in linear.iter_mut().zip(ch.primary()) {
            *acc += p * weight;
        }
    }
    let norm = linear.iter().copied().fold(1.0f64, f64::max);
    linear.map(|c| (255.0 * (c / norm).powf(1.0 / DISPLAY_GAMMA)).round() as u8)
}
