//! Time-ordered event queue for the link simulation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

/// Event kinds. At equal times, earlier variants are processed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Pulse,
    Emission,
    Herald,
    Retrieval,
    Absorption,
    Detection,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pulse => "pulse",
            Self::Emission => "emission",
            Self::Absorption => "absorption",
            Self::Herald => "herald",
            Self::Retrieval => "retrieval",
            Self::Detection => "detection",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time_ns: f64,
    pub kind: EventKind,
    pub cycle: usize,
    pub pulse: usize,
    pub slot: usize,
    /// Click pattern for heralds, node for absorption/retrieval/detection.
    pub detail: String,
}

struct Queued {
    event: Event,
    seq: u64,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .event
            .time_ns
            .total_cmp(&self.event.time_ns)
            .then(other.event.kind.cmp(&self.event.kind))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Pending events plus the record of processed ones.
#[derive(Default)]
pub struct EventLog {
    queue: BinaryHeap<Queued>,
    seq: u64,
    processed: Vec<Event>,
    keep: bool,
}

impl EventLog {
    /// With `keep` false, processed events are not retained.
    pub fn new(keep: bool) -> Self {
        Self { keep, ..Self::default() }
    }

    pub fn schedule(&mut self, event: Event) {
        self.seq += 1;
        self.queue.push(Queued { event, seq: self.seq });
    }

    /// Removes the earliest pending event and records it.
    pub fn next_event(&mut self) -> Option<Event> {
        let e = self.queue.pop()?.event;
        if self.keep {
            self.processed.push(e.clone());
        }
        Some(e)
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn processed(&self) -> &[Event] {
        &self.processed
    }

    pub fn into_processed(self) -> Vec<Event> {
        self.processed
    }
}

pub fn is_time_ordered(events: &[Event]) -> bool {
    events.windows(2).all(|w| w[0].time_ns <= w[1].time_ns)
}
