//! Input source → slider engine → rate limiter → light command sink.
//!
//! [`Controller`] is the single owner of engine and light state. Replay
//! drives it from a virtual clock taken from the trace timestamps, so every
//! run is a pure function of its inputs; the socket server drives the same
//! controller from the wall clock.

pub mod limiter;
pub mod metrics;
pub mod server;
pub mod trace;

use crate::error::{Error, Result};
use crate::frame_codec::{Decoded, Diagnostic, StepClock, StreamDecoder, TouchSample};
use crate::light_model::{format_log_line, LightCommand, LightState};
use crate::slider_engine::{EngineConfig, EngineState};

pub use limiter::{Batch, RateLimiter, DEFAULT_TICK_MS};
pub use metrics::Metrics;
pub use trace::{parse_trace, write_trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogEntry {
    pub t_ms: u64,
    pub command: LightCommand,
}

impl LogEntry {
    pub fn to_line(&self) -> String {
        format_log_line(self.t_ms, &self.command).expect("logged commands are valid")
    }
}

pub fn format_command_log(log: &[LogEntry]) -> String {
    let mut out = String::new();
    for entry in log {
        out.push_str(&entry.to_line());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct Controller {
    config: EngineConfig,
    engine: EngineState,
    light: LightState,
    limiter: Option<RateLimiter>,
    metrics: Metrics,
}

impl Controller {
    pub fn new(config: EngineConfig, limiter_on: bool) -> Self {
        Self::with_limiter(config, limiter_on.then(RateLimiter::default))
    }

    pub fn with_limiter(config: EngineConfig, limiter: Option<RateLimiter>) -> Self {
        Self {
            config,
            engine: EngineState::new(),
            light: LightState::default(),
            limiter,
            metrics: Metrics::default(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn engine(&self) -> &EngineState {
        &self.engine
    }

    pub fn light(&self) -> &LightState {
        &self.light
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Feeds one sample stamped at `sample.t_ms`. Returns the batches that
    /// left the limiter as a result, oldest first.
    pub fn handle_sample(&mut self, sample: &TouchSample) -> Result<Vec<Batch>> {
        sample.check_range()?;
        self.metrics.samples_in += 1;
        let now = sample.t_ms;
        let mut out: Vec<Batch> = self.poll(now).into_iter().collect();
        let Some(change) = self.engine.apply_sample(sample, &self.config)? else {
            return Ok(out);
        };
        let batch = match &mut self.limiter {
            Some(limiter) => limiter.push(change, now),
            None => Some(Batch {
                t_ms: now,
                commands: vec![change.into()],
                queued_at: vec![now],
            }),
        };
        if let Some(b) = batch {
            out.push(self.emit(b));
        }
        Ok(out)
    }

    /// Releases a held batch whose deadline is at or before `now_ms`.
    pub fn poll(&mut self, now_ms: u64) -> Option<Batch> {
        let b = self.limiter.as_mut()?.poll(now_ms)?;
        Some(self.emit(b))
    }

    pub fn deadline(&self) -> Option<u64> {
        self.limiter.as_ref()?.deadline()
    }

    /// End of input: releases anything still held.
    pub fn finish(&mut self) -> Option<Batch> {
        let b = self.limiter.as_mut()?.drain()?;
        Some(self.emit(b))
    }

    pub fn note_bad_frame(&mut self) {
        self.metrics.frames_bad += 1;
    }

    fn emit(&mut self, batch: Batch) -> Batch {
        for cmd in &batch.commands {
            self.light.apply(cmd);
        }
        for latency in batch.latencies() {
            self.metrics.record_latency(latency);
        }
        self.metrics.batches_out += 1;
        batch
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayOutcome {
    pub light: LightState,
    pub log: Vec<LogEntry>,
    pub metrics: Metrics,
    pub diagnostics: Vec<Diagnostic>,
}

fn log_batches(log: &mut Vec<LogEntry>, batches: impl IntoIterator<Item = Batch>) {
    for b in batches {
        log.extend(b.commands.iter().map(|&command| LogEntry {
            t_ms: b.t_ms,
            command,
        }));
    }
}

/// Replays a time-ordered trace on a virtual clock.
pub fn run_replay(
    trace: &[TraceRecord],
    config: &EngineConfig,
    limiter_on: bool,
) -> Result<ReplayOutcome> {
    let mut ctl = Controller::new(*config, limiter_on);
    let mut log = Vec::new();
    let mut last_t = 0;
    for (i, record) in trace.iter().enumerate() {
        let format_err = |message: String| Error::TraceFormat {
            line: i + 1,
            message,
        };
        if record.t_ms < last_t {
            return Err(format_err(format!(
                "t_ms {} goes backwards (previous {last_t})",
                record.t_ms
            )));
        }
        last_t = record.t_ms;
        let batches = ctl
            .handle_sample(&record.sample())
            .map_err(|e| format_err(e.to_string()))?;
        log_batches(&mut log, batches);
    }
    log_batches(&mut log, ctl.finish());
    Ok(ReplayOutcome {
        light: ctl.light,
        log,
        metrics: ctl.metrics,
        diagnostics: Vec::new(),
    })
}

/// Decodes a raw frame stream and runs it through the controller. Samples
/// are stamped `0, period_ms, 2 * period_ms, ...` in arrival order.
pub fn run_stream(
    bytes: &[u8],
    config: &EngineConfig,
    limiter_on: bool,
    period_ms: u64,
) -> ReplayOutcome {
    let mut decoder = StreamDecoder::with_clock(StepClock::new(0, period_ms));
    let mut ctl = Controller::new(*config, limiter_on);
    let mut log = Vec::new();
    let mut diagnostics = Vec::new();
    let mut decoded = decoder.extend(bytes);
    decoded.extend(decoder.finish());
    for item in decoded {
        match item {
            Decoded::Sample(s) => {
                let batches = ctl
                    .handle_sample(&s)
                    .expect("decoded samples are within range");
                log_batches(&mut log, batches);
            }
            Decoded::Diagnostic(d) => {
                ctl.note_bad_frame();
                diagnostics.push(d);
            }
        }
    }
    log_batches(&mut log, ctl.finish());
    ReplayOutcome {
        light: ctl.light,
        log,
        metrics: ctl.metrics,
        diagnostics,
    }
}
