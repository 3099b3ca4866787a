use serde::{Deserialize, Serialize};

/// Pipeline counters plus source-to-emit latency of every emitted command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub samples_in: u64,
    pub frames_bad: u64,
    pub commands_out: u64,
    pub batches_out: u64,
    pub max_latency_ms: u64,
    pub mean_latency_ms: f64,
    #[serde(skip)]
    latency_sum_ms: u64,
}

impl Metrics {
    pub(crate) fn record_latency(&mut self, latency_ms: u64) {
        self.latency_sum_ms += latency_ms;
        self.commands_out += 1;
        self.max_latency_ms = self.max_latency_ms.max(latency_ms);
        self.mean_latency_ms = self.latency_sum_ms as f64 / self.commands_out as f64;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize")
    }
}
