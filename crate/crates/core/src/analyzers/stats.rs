//! Aggregate statistics over a trace stream.

use std::collections::BTreeMap;

use crate::trace::{Port, TraceEvent, TraceSink};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub events: u64,
    pub by_port: BTreeMap<&'static str, u64>,
    pub max_depth: u32,
    pub withdrawn_values: u64,
    pub distinct_constraints: u64,
}

impl TraceStats {
    pub fn count(&self, port: Port) -> u64 {
        self.by_port.get(port.display_name()).copied().unwrap_or(0)
    }

    /// Line-oriented rendering, one `name=value` per line.
    pub fn render(&self) -> String {
        let mut out = format!("events={}\n", self.events);
        for port in [
            Port::Tell,
            Port::Told,
            Port::Select,
            Port::Reject,
            Port::WakeUp,
            Port::Reduce,
            Port::True,
            Port::Suspend,
        ] {
            out.push_str(&format!(
                "{}={}\n",
                port.display_name().to_lowercase(),
                self.count(port)
            ));
        }
        out.push_str(&format!("max_depth={}\n", self.max_depth));
        out.push_str(&format!("withdrawn_values={}\n", self.withdrawn_values));
        out.push_str(&format!("distinct_constraints={}\n", self.distinct_constraints));
        out
    }
}

#[derive(Default)]
pub struct StatsCollector {
    stats: TraceStats,
    seen_ids: std::collections::BTreeSet<u64>,
}

impl StatsCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, event: &TraceEvent) {
        self.stats.events += 1;
        *self.stats.by_port.entry(event.port.display_name()).or_insert(0) += 1;
        self.stats.max_depth = self.stats.max_depth.max(event.depth);
        if let Some(w) = &event.withdrawn {
            self.stats.withdrawn_values += w.values.len() as u64;
        }
        if self.seen_ids.insert(event.constraint.id) {
            self.stats.distinct_constraints += 1;
        }
    }

    pub fn finish(self) -> TraceStats {
        self.stats
    }
}

impl TraceSink for StatsCollector {
    fn emit(&mut self, event: &TraceEvent) {
        self.observe(event);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::generate_sorted;
    use crate::search::{solve_model, SolveOptions};
    use crate::trace::VecSink;

    #[test]
    fn sorted_counts() {
        let mut sink = VecSink::new();
        solve_model(&generate_sorted(), &SolveOptions::default(), &mut sink, &mut |_| {}).unwrap();
        let mut collector = StatsCollector::new();
        for e in &sink.events {
            collector.observe(e);
        }
        let stats = collector.finish();
        assert_eq!(stats.events, 40);
        assert_eq!(stats.count(Port::Tell), 5);
        assert_eq!(stats.count(Port::Told), 5);
        assert_eq!(stats.count(Port::Reduce), 9);
        assert_eq!(stats.count(Port::WakeUp), 6);
        assert_eq!(stats.count(Port::Select), 5);
        assert_eq!(stats.count(Port::True), 5);
        assert_eq!(stats.count(Port::Suspend), 4);
        assert_eq!(stats.count(Port::Reject), 1);
        assert_eq!(stats.max_depth, 4);
        assert_eq!(stats.distinct_constraints, 5);
        assert!(stats.render().contains("events=40"));
    }
}
