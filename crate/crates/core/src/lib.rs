//! Touchpad-driven lighting control.
//!
//! A pad's absolute x/y/pressure reports are split into five virtual
//! vertical sliders, one per channel of a red/green/blue/yellow/white LED
//! cluster. The crate provides:
//!
//! - [`frame_codec`]: the 6-byte touch frame wire format and a resyncing
//!   stream decoder,
//! - [`slider_engine`]: band/gap geometry and level quantization,
//! - [`light_model`]: channels, light state, the 3-byte command format and
//!   a display blend,
//! - [`pipeline`]: the rate-limited controller, trace replay and the
//!   WebSocket service.

pub mod error;
pub mod frame_codec;
pub mod light_model;
pub mod pipeline;
pub mod slider_engine;

pub use error::{Error, Result};
pub use frame_codec::{decode_frame, encode_frame, RawFrame, StreamDecoder, TouchSample};
pub use light_model::{decode_command, encode_command, ChannelId, LightCommand, LightState};
pub use pipeline::{run_replay, Controller, Metrics, ReplayOutcome, TraceRecord};
pub use slider_engine::{
    locate_slider, quantize_level, EngineConfig, EngineState, SliderHit, SliderLayout,
};
