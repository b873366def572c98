//! Useless-activation detection: a select not followed by any reduce of
//! the selected constraint before it leaves the active slot. Activations
//! opened by a tell are not counted.

use crate::trace::{Port, TraceEvent, TraceSink};

/// One select-initiated activation of a constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationRecord {
    pub constraint_id: u64,
    /// chrono of the activating select event.
    pub select_chrono: u64,
    pub reduce_count: u32,
    /// The port that moved the constraint out of `A`.
    pub terminal: Port,
}

#[derive(Default)]
pub struct UselessTracker {
    current: Option<(u64, u64, u32)>,
    records: Vec<ActivationRecord>,
}

impl UselessTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, event: &TraceEvent) {
        match event.port {
            Port::Select => {
                self.current = Some((event.constraint.id, event.chrono, 0));
            }
            Port::Reduce => {
                if let Some((id, _, count)) = &mut self.current {
                    if *id == event.constraint.id {
                        *count += 1;
                    }
                }
            }
            Port::True | Port::Suspend | Port::Reject => {
                if let Some((id, select_chrono, reduce_count)) = self.current {
                    if id == event.constraint.id {
                        if reduce_count == 0 {
                            self.records.push(ActivationRecord {
                                constraint_id: id,
                                select_chrono,
                                reduce_count,
                                terminal: event.port,
                            });
                        }
                        self.current = None;
                    }
                }
            }
            Port::Tell | Port::Told => {
                self.current = None;
            }
            _ => {}
        }
    }

    pub fn finish(self) -> Vec<ActivationRecord> {
        self.records
    }
}

impl TraceSink for UselessTracker {
    fn emit(&mut self, event: &TraceEvent) {
        self.observe(event);
    }
}

/// Scans a stream for select-initiated activations that never reduced.
pub fn detect_useless_activations<'a>(
    events: impl IntoIterator<Item = &'a TraceEvent>,
) -> Vec<ActivationRecord> {
    let mut tracker = UselessTracker::new();
    for event in events {
        tracker.observe(event);
    }
    tracker.finish()
}
