//! Output-side rate limiting with latest-wins coalescing.
//!
//! At most one batch of light commands leaves the limiter per tick. Changes
//! that arrive before the tick has elapsed are held, and a later change to
//! the same channel replaces the held level.

use crate::light_model::{LightCommand, CHANNEL_COUNT};
use crate::slider_engine::ChannelChange;

/// 40 batches per second.
pub const DEFAULT_TICK_MS: u64 = 25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub t_ms: u64,
    /// Commands in channel order.
    pub commands: Vec<LightCommand>,
    /// For each command, the time its channel first became pending.
    pub queued_at: Vec<u64>,
}

impl Batch {
    pub fn latencies(&self) -> impl Iterator<Item = u64> + '_ {
        self.queued_at.iter().map(move |&q| self.t_ms - q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pending {
    level: u8,
    since: u64,
}

#[derive(Debug, Clone)]
pub struct RateLimiter {
    tick_period_ms: u64,
    last_emit: Option<u64>,
    pending: [Option<Pending>; CHANNEL_COUNT],
}

impl Default for RateLimiter {
    fn default() -> Self {
        Self::new(DEFAULT_TICK_MS)
    }
}

impl RateLimiter {
    pub fn new(tick_period_ms: u64) -> Self {
        Self {
            tick_period_ms,
            last_emit: None,
            pending: [None; CHANNEL_COUNT],
        }
    }

    pub fn tick_period_ms(&self) -> u64 {
        self.tick_period_ms
    }

    pub fn pending_len(&self) -> usize {
        self.pending.iter().flatten().count()
    }

    /// Earliest time the next batch may leave.
    fn ready_at(&self) -> u64 {
        self.last_emit.map_or(0, |t| t + self.tick_period_ms)
    }

    /// When the held batch is due, if anything is held.
    pub fn deadline(&self) -> Option<u64> {
        (self.pending_len() > 0).then(|| self.ready_at())
    }

    /// Stores `change` and returns a batch if the tick has elapsed.
    ///
    /// Callers driving a clock should [`poll`](Self::poll) first so that an
    /// overdue batch leaves at its deadline rather than at `now_ms`.
    pub fn push(&mut self, change: ChannelChange, now_ms: u64) -> Option<Batch> {
        let slot = &mut self.pending[change.channel.index()];
        let since = slot.map_or(now_ms, |p| p.since);
        *slot = Some(Pending {
            level: change.level,
            since,
        });
        if now_ms >= self.ready_at() {
            self.take(now_ms)
        } else {
            None
        }
    }

    /// Emits the held batch, stamped with its deadline, if the deadline is
    /// at or before `now_ms`.
    pub fn poll(&mut self, now_ms: u64) -> Option<Batch> {
        match self.deadline() {
            Some(due) if due <= now_ms => self.take(due),
            _ => None,
        }
    }

    /// Emits whatever is held at its deadline regardless of the clock; used
    /// at end of input.
    pub fn drain(&mut self) -> Option<Batch> {
        let due = self.deadline()?;
        self.take(due)
    }

    fn take(&mut self, t_ms: u64) -> Option<Batch> {
        let mut commands = Vec::new();
        let mut queued_at = Vec::new();
        for (i, slot) in self.pending.iter_mut().enumerate() {
            if let Some(p) = slot.take() {
                commands.push(LightCommand {
                    channel: crate::light_model::ChannelId::ALL[i],
                    level: p.level,
                });
                queued_at.push(p.since);
            }
        }
        if commands.is_empty() {
            return None;
        }
        self.last_emit = Some(t_ms);
        Some(Batch {
            t_ms,
            commands,
            queued_at,
        })
    }
}
