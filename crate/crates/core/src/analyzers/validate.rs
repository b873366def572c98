//! Trace validation: asserts on a stream the invariants the operational
//! semantics guarantees by construction.
//!
//! Checked rules, each reported as `chrono=<n> rule=<name> message=<...>`:
//!
//! * `chrono` — event numbers are contiguous from 1;
//! * `depth` — +1 at tell, -1 after told, stable otherwise, never < 1;
//! * `balance` — tell/told parenthesization, with matching constraints;
//! * `partition` — the embedded store snapshots keep the five lists
//!   pairwise disjoint with `A` and `R` at most singletons;
//! * `priority` — after a reduce, no reduce/true/suspend/select may fire
//!   while a suspended constraint's awakening condition intersects the
//!   pending update list (a reject may preempt);
//! * `cause` — a wake-up's cause is a nonempty subset of the last
//!   reduce's update list;
//! * `attributes` — port-specific attributes sit on the right ports.

use std::fmt;

use crate::domain::UpdateType;
use crate::model::parse_constraint_text;
use crate::trace::{Port, TraceEvent, TraceSink};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub chrono: u64,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chrono={} rule={} message={}", self.chrono, self.rule, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self) -> String {
        if self.violations.is_empty() {
            return "ok\n".to_string();
        }
        let mut out = String::new();
        for v in &self.violations {
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

pub struct Validator {
    violations: Vec<Violation>,
    expected_chrono: u64,
    depth: u32,
    open_tells: Vec<(u64, u64)>, // (constraint id, tell chrono)
    pending: Option<Vec<(String, UpdateType)>>,
    last_chrono: u64,
    // Awakening conditions per abstract text; None marks unparseable
    // (foreign) constraints, which the priority check skips.
    awake_cache: std::collections::HashMap<String, Option<Vec<(String, UpdateType)>>>,
}

impl Default for Validator {
    fn default() -> Self {
        Self::new()
    }
}

impl Validator {
    pub fn new() -> Self {
        Validator {
            violations: Vec::new(),
            expected_chrono: 1,
            depth: 0,
            open_tells: Vec::new(),
            pending: None,
            last_chrono: 0,
            awake_cache: std::collections::HashMap::new(),
        }
    }

    fn report(&mut self, chrono: u64, rule: &'static str, message: String) {
        self.violations.push(Violation { chrono, rule, message });
    }

    fn check_partition(&mut self, event: &TraceEvent) {
        let store = &event.store;
        if store.active.len() > 1 {
            self.report(event.chrono, "partition", format!("|A| = {} > 1", store.active.len()));
        }
        if store.rejected.len() > 1 {
            self.report(event.chrono, "partition", format!("|R| = {} > 1", store.rejected.len()));
        }
        let mut seen = std::collections::BTreeMap::new();
        for (name, list) in store.partitions() {
            for (id, _) in list {
                if let Some(previous) = seen.insert(*id, name) {
                    self.report(
                        event.chrono,
                        "partition",
                        format!("constraint {id} is in both {previous} and {name}"),
                    );
                }
            }
        }
    }

    /// Awakening condition of a constraint known only by its abstract
    /// text, as (variable name, update type) pairs. Unparseable text is
    /// treated as unknown and skipped.
    fn awake_condition<'a>(
        cache: &'a mut std::collections::HashMap<String, Option<Vec<(String, UpdateType)>>>,
        abstract_text: &str,
    ) -> &'a Option<Vec<(String, UpdateType)>> {
        cache.entry(abstract_text.to_string()).or_insert_with(|| {
            let form = parse_constraint_text(abstract_text).ok()?;
            Some(
                form.awakening_condition()
                    .into_iter()
                    .map(|(v, k)| (v.name().to_string(), k))
                    .collect(),
            )
        })
    }

    fn check_priority(&mut self, event: &TraceEvent) {
        let Some(pending) = &self.pending else { return };
        let mut stale = Vec::new();
        for (id, abstract_text) in &event.store.suspended {
            let Some(condition) = Self::awake_condition(&mut self.awake_cache, abstract_text)
            else {
                continue;
            };
            let verified = condition
                .iter()
                .any(|(var, kind)| pending.iter().any(|(pv, pk)| pv == var && pk == kind));
            if verified {
                stale.push((*id, abstract_text.to_string()));
            }
        }
        for (id, abstract_text) in stale {
            self.report(
                event.chrono,
                "priority",
                format!(
                    "{} fired while suspended constraint ({id}, {abstract_text}) was wakeable",
                    event.port
                ),
            );
        }
    }

    fn check_cause(&mut self, event: &TraceEvent) {
        let Some(cause) = &event.cause else {
            self.report(event.chrono, "cause", "wake-up without cause".into());
            return;
        };
        if cause.is_empty() {
            self.report(event.chrono, "cause", "wake-up with empty cause".into());
            return;
        }
        let mut missing = Vec::new();
        match &self.pending {
            None => missing.push("no preceding reduce in phase".to_string()),
            Some(pending) => {
                for entry in cause {
                    let hit = pending
                        .iter()
                        .any(|(v, k)| v == &*entry.var && *k == entry.kind);
                    if !hit {
                        missing.push(format!(
                            "cause {}->{} not in the last reduce's update list",
                            entry.var, entry.kind
                        ));
                    }
                }
            }
        }
        for message in missing {
            self.report(event.chrono, "cause", message);
        }
    }

    fn check_attributes(&mut self, event: &TraceEvent) {
        match event.port {
            Port::Reduce => {
                match &event.withdrawn {
                    None => self.report(event.chrono, "attributes", "reduce without withdrawn".into()),
                    Some(w) if w.values.is_empty() => {
                        self.report(event.chrono, "attributes", "reduce with empty withdrawn".into())
                    }
                    _ => {}
                }
                if event.update.as_ref().is_none_or(|u| u.is_empty()) {
                    self.report(event.chrono, "attributes", "reduce without update list".into());
                }
            }
            Port::WakeUp => {}
            _ => {
                if event.withdrawn.is_some() || event.update.is_some() || event.cause.is_some() {
                    self.report(
                        event.chrono,
                        "attributes",
                        format!("port-specific attribute on a {} event", event.port),
                    );
                }
            }
        }
    }

    pub fn observe(&mut self, event: &TraceEvent) {
        self.last_chrono = event.chrono;
        if event.chrono != self.expected_chrono {
            self.report(
                event.chrono,
                "chrono",
                format!("chrono gap at {} (expected {})", event.chrono, self.expected_chrono),
            );
            self.expected_chrono = event.chrono;
        }
        self.expected_chrono += 1;

        self.check_partition(event);
        self.check_attributes(event);

        match event.port {
            Port::Tell => {
                if event.depth != self.depth + 1 {
                    self.report(
                        event.chrono,
                        "depth",
                        format!("tell at depth {} after depth {}", event.depth, self.depth),
                    );
                }
                self.depth = event.depth;
                self.open_tells.push((event.constraint.id, event.chrono));
                self.pending = None;
            }
            Port::Told => {
                if event.depth != self.depth {
                    self.report(
                        event.chrono,
                        "depth",
                        format!("told at depth {} while at depth {}", event.depth, self.depth),
                    );
                }
                match self.open_tells.pop() {
                    Some((id, _)) if id == event.constraint.id => {}
                    Some((id, tell_chrono)) => self.report(
                        event.chrono,
                        "balance",
                        format!(
                            "told of constraint {} does not match open tell of {} at chrono {}",
                            event.constraint.id, id, tell_chrono
                        ),
                    ),
                    None => self.report(event.chrono, "balance", "told with no open tell".into()),
                }
                self.depth = self.depth.saturating_sub(1);
                self.pending = None;
            }
            other => {
                if event.depth != self.depth {
                    self.report(
                        event.chrono,
                        "depth",
                        format!("{} at depth {} while at depth {}", event.port, event.depth, self.depth),
                    );
                }
                if event.depth == 0 {
                    self.report(event.chrono, "depth", "event at depth 0".into());
                }
                match other {
                    Port::Select => {
                        if !event.store.active.is_empty() {
                            self.report(event.chrono, "partition", "select with a nonempty A".into());
                        }
                        self.check_priority(event);
                        self.pending = None;
                    }
                    Port::Reduce => {
                        self.check_priority(event);
                        self.pending = event.update.as_ref().map(|u| {
                            u.iter().map(|e| (e.var.to_string(), e.kind)).collect()
                        });
                    }
                    Port::True | Port::Suspend => {
                        self.check_priority(event);
                        self.pending = None;
                    }
                    Port::WakeUp => {
                        self.check_cause(event);
                    }
                    Port::Reject => {
                        self.pending = None;
                    }
                    _ => {}
                }
            }
        }
    }

    pub fn finish(mut self) -> ValidationReport {
        if !self.open_tells.is_empty() {
            let open = self.open_tells.len();
            self.report(
                self.last_chrono,
                "balance",
                format!("{open} tells still open at end of stream"),
            );
        }
        ValidationReport { violations: self.violations }
    }
}

impl TraceSink for Validator {
    fn emit(&mut self, event: &TraceEvent) {
        self.observe(event);
    }
}

/// Validates a complete stream.
pub fn validate_trace<'a>(events: impl IntoIterator<Item = &'a TraceEvent>) -> ValidationReport {
    let mut validator = Validator::new();
    for event in events {
        validator.observe(event);
    }
    validator.finish()
}
