//! The generic trace: events, the JSON Lines machine format, the compact
//! human format, and the sink interface the engine emits into.
//!
//! One event is one elementary execution step. Every event carries the
//! common attributes (chrono, depth, port, constraint, full domains, the
//! five store partitions); `reduce` events add `withdrawn` and `update`,
//! `wake-up` events add `cause`. Attribute values always describe the
//! state immediately before the event's actions.
//!
//! The machine format is UTF-8 JSON Lines (conventional extension
//! `.fdtrace.jsonl`): one record per event, fixed key order, domains as
//! explicit value arrays. `parse` and `serialize` are exact inverses on
//! engine-emitted events.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::domain::{Domain, UpdateType};

/// The eight event types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Tell,
    Told,
    Select,
    Reject,
    #[serde(rename = "wake-up")]
    WakeUp,
    Reduce,
    True,
    Suspend,
}

impl Port {
    /// The capitalised rendering used by the compact format.
    pub fn display_name(self) -> &'static str {
        match self {
            Port::Tell => "Tell",
            Port::Told => "Told",
            Port::Select => "Select",
            Port::Reject => "Reject",
            Port::WakeUp => "Wake-up",
            Port::Reduce => "Reduce",
            Port::True => "True",
            Port::Suspend => "Suspend",
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// The constraint quadruple carried by every event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventConstraint {
    pub id: u64,
    #[serde(rename = "abstract")]
    pub abstract_text: Arc<str>,
    pub concrete: Arc<str>,
    pub context: Arc<str>,
}

/// Full domain state at the event, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventDomains(pub Vec<(Arc<str>, Domain)>);

impl EventDomains {
    pub fn get(&self, name: &str) -> Option<&Domain> {
        self.0.iter().find(|(n, _)| &**n == name).map(|(_, d)| d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Domain)> {
        self.0.iter().map(|(n, d)| (&**n, d))
    }

    pub fn all_singleton(&self) -> bool {
        self.0.iter().all(|(_, d)| d.is_singleton())
    }
}

impl Serialize for EventDomains {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (name, dom) in &self.0 {
            map.serialize_entry(&**name, dom)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for EventDomains {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct DomainsVisitor;
        impl<'de> Visitor<'de> for DomainsVisitor {
            type Value = EventDomains;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from variable name to value array")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<EventDomains, A::Error> {
                let mut entries = Vec::with_capacity(access.size_hint().unwrap_or(0));
                while let Some((name, dom)) = access.next_entry::<String, Domain>()? {
                    entries.push((Arc::from(name.as_str()), dom));
                }
                Ok(EventDomains(entries))
            }
        }
        deserializer.deserialize_map(DomainsVisitor)
    }
}

/// One store partition entry: `(constraint id, abstract text)`.
pub type StoreEntry = (u64, Arc<str>);

/// The five partitions as id/abstract pair lists, in store order: `A` the
/// active constraint, `S` suspended (most recently suspended first), `Q`
/// the propagation queue (front first), `T` solved, `R` rejected.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventStore {
    #[serde(rename = "A")]
    pub active: Vec<StoreEntry>,
    #[serde(rename = "S")]
    pub suspended: Vec<StoreEntry>,
    #[serde(rename = "Q")]
    pub queue: Vec<StoreEntry>,
    #[serde(rename = "T")]
    pub solved: Vec<StoreEntry>,
    #[serde(rename = "R")]
    pub rejected: Vec<StoreEntry>,
}

impl EventStore {
    pub fn partitions(&self) -> [(&'static str, &Vec<StoreEntry>); 5] {
        [
            ("A", &self.active),
            ("S", &self.suspended),
            ("Q", &self.queue),
            ("T", &self.solved),
            ("R", &self.rejected),
        ]
    }
}

/// The withdrawn set of a reduce event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Withdrawn {
    pub var: Arc<str>,
    pub values: Domain,
}

/// One `(variable, update type)` pair, used both by `update` and `cause`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateEntry {
    pub var: Arc<str>,
    #[serde(rename = "type")]
    pub kind: UpdateType,
}

/// A single trace event with the full attribute set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub chrono: u64,
    pub depth: u32,
    pub port: Port,
    pub constraint: EventConstraint,
    pub domains: Arc<EventDomains>,
    pub store: Arc<EventStore>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub withdrawn: Option<Withdrawn>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub update: Option<Vec<UpdateEntry>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cause: Option<Vec<UpdateEntry>>,
}

impl TraceEvent {
    /// The names of the event constraint's variables, in form order,
    /// recovered from the concrete functor rendering.
    pub fn constraint_vars(&self) -> Vec<&str> {
        let mut names = Vec::new();
        let text = &*self.constraint.concrete;
        let mut rest = text;
        while let Some(pos) = rest.find("var(") {
            rest = &rest[pos + 4..];
            let Some(comma) = rest.find(',') else { break };
            let Some(close) = rest.find(')') else { break };
            if close <= comma {
                break;
            }
            names.push(rest[comma + 1..close].trim());
            rest = &rest[close + 1..];
        }
        names
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
}

/// A parse failure located in its input stream.
#[derive(Debug, thiserror::Error)]
#[error("line {line}: {source}")]
pub struct TraceReadError {
    pub line: usize,
    #[source]
    pub source: ParseError,
}

/// Serializes one event as a single JSON Lines record (no newline).
pub fn serialize(event: &TraceEvent) -> String {
    serde_json::to_string(event).expect("trace events always serialize")
}

/// Parses one line. Blank lines are tolerated separators and yield `None`.
/// Port-specific attributes are checked: `withdrawn`/`update` must be
/// present (and nonempty) exactly on reduce events, `cause` exactly on
/// wake-up events.
pub fn parse(line: &str) -> Result<Option<TraceEvent>, ParseError> {
    if line.trim().is_empty() {
        return Ok(None);
    }
    let event: TraceEvent = serde_json::from_str(line)?;
    check_port_attributes(&event)?;
    Ok(Some(event))
}

fn check_port_attributes(event: &TraceEvent) -> Result<(), ParseError> {
    let schema = |msg: String| Err(ParseError::Schema(msg));
    match event.port {
        Port::Reduce => {
            match &event.withdrawn {
                None => return schema(format!("chrono {}: reduce event lacks withdrawn", event.chrono)),
                Some(w) if w.values.is_empty() => {
                    return schema(format!("chrono {}: reduce event has empty withdrawn set", event.chrono))
                }
                Some(_) => {}
            }
            match &event.update {
                None => return schema(format!("chrono {}: reduce event lacks update", event.chrono)),
                Some(u) if u.is_empty() => {
                    return schema(format!("chrono {}: reduce event has empty update list", event.chrono))
                }
                Some(_) => {}
            }
            if event.cause.is_some() {
                return schema(format!("chrono {}: cause on a reduce event", event.chrono));
            }
        }
        Port::WakeUp => {
            match &event.cause {
                None => return schema(format!("chrono {}: wake-up event lacks cause", event.chrono)),
                Some(c) if c.is_empty() => {
                    return schema(format!("chrono {}: wake-up event has empty cause", event.chrono))
                }
                Some(_) => {}
            }
            if event.withdrawn.is_some() || event.update.is_some() {
                return schema(format!("chrono {}: withdrawn/update on a wake-up event", event.chrono));
            }
        }
        _ => {
            if event.withdrawn.is_some() || event.update.is_some() || event.cause.is_some() {
                return schema(format!(
                    "chrono {}: port-specific attribute on a {} event",
                    event.chrono, event.port
                ));
            }
        }
    }
    Ok(())
}

/// Reads a JSON Lines trace, reporting failures with 1-based line numbers.
pub fn read_jsonl<R: BufRead>(reader: R) -> impl Iterator<Item = Result<TraceEvent, TraceReadError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| {
            let line_no = idx + 1;
            let line = match line {
                Ok(line) => line,
                Err(err) => {
                    return Some(Err(TraceReadError {
                        line: line_no,
                        source: ParseError::Json(serde_json::Error::io(err)),
                    }))
                }
            };
            match parse(&line) {
                Ok(Some(event)) => Some(Ok(event)),
                Ok(None) => None,
                Err(source) => Some(Err(TraceReadError { line: line_no, source })),
            }
        })
}

/// Parses a whole trace held in memory.
pub fn parse_stream(text: &str) -> Result<Vec<TraceEvent>, TraceReadError> {
    read_jsonl(io::Cursor::new(text)).collect()
}

/// Renders the compact one-line display used in the trace figures:
/// `<chrono> [<depth>] <Port> <abstract> <var:dom>... [<withdrawn>]`,
/// with domains restricted to the event constraint's variables.
pub fn format_compact(event: &TraceEvent) -> String {
    let mut line = format!(
        "{} [{}] {} {}",
        event.chrono, event.depth, event.port, event.constraint.abstract_text
    );
    for name in event.constraint_vars() {
        if let Some(dom) = event.domains.get(name) {
            line.push_str(&format!(" {name}:{dom}"));
        }
    }
    if let Some(w) = &event.withdrawn {
        line.push_str(&format!(" {}{}", w.var, w.values));
    }
    line
}

/// Receiver of completed trace events. Events arrive in chrono order and
/// are immutable; a sink must not assume it can influence the engine, and
/// must report its own failures out-of-band (the engine never checks).
pub trait TraceSink {
    fn emit(&mut self, event: &TraceEvent);
}

/// Discards events.
#[derive(Debug, Default)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn emit(&mut self, _event: &TraceEvent) {}
}

/// Collects events in memory; the workhorse of the test suites.
#[derive(Debug, Default)]
pub struct VecSink {
    pub events: Vec<TraceEvent>,
}

impl VecSink {
    pub fn new() -> Self {
        Self::default()
    }
}

impl TraceSink for VecSink {
    fn emit(&mut self, event: &TraceEvent) {
        self.events.push(event.clone());
    }
}

/// Streams events as JSON Lines into a writer. I/O failures are stored and
/// retrievable after the run instead of interrupting the engine.
pub struct JsonLinesWriter<W: Write> {
    writer: W,
    error: Option<io::Error>,
}

impl<W: Write> JsonLinesWriter<W> {
    pub fn new(writer: W) -> Self {
        JsonLinesWriter { writer, error: None }
    }

    /// Flushes and returns the writer, or the first error seen.
    pub fn finish(mut self) -> io::Result<W> {
        if let Some(err) = self.error.take() {
            return Err(err);
        }
        self.writer.flush()?;
        Ok(self.writer)
    }
}

impl<W: Write> TraceSink for JsonLinesWriter<W> {
    fn emit(&mut self, event: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let line = serialize(event);
        if let Err(err) = self.writer.write_all(line.as_bytes()).and_then(|()| self.writer.write_all(b"\n")) {
            self.error = Some(err);
        }
    }
}

/// Streams events in the compact text format.
pub struct CompactWriter<W: Write> {
    writer: W,
    error: Option<io::Error>,
}

impl<W: Write> CompactWriter<W> {
    pub fn new(writer: W) -> Self {
        CompactWriter { writer, error: None }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(err) = self.error.take() {
            return Err(err);
        }
        self.writer.flush()?;
        Ok(self.writer)
    }
}

impl<W: Write> TraceSink for CompactWriter<W> {
    fn emit(&mut self, event: &TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let line = format_compact(event);
        if let Err(err) = self.writer.write_all(line.as_bytes()).and_then(|()| self.writer.write_all(b"\n")) {
            self.error = Some(err);
        }
    }
}

/// Fans one event stream out to several consumers, preserving order.
pub struct FanoutSink<'a> {
    sinks: Vec<&'a mut dyn TraceSink>,
}

impl<'a> FanoutSink<'a> {
    pub fn new(sinks: Vec<&'a mut dyn TraceSink>) -> Self {
        FanoutSink { sinks }
    }
}

impl TraceSink for FanoutSink<'_> {
    fn emit(&mut self, event: &TraceEvent) {
        for sink in &mut self.sinks {
            sink.emit(event);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_reduce_event() -> TraceEvent {
        TraceEvent {
            chrono: 14,
            depth: 4,
            port: Port::Reduce,
            constraint: EventConstraint {
                id: 4,
                abstract_text: "X#=2".into(),
                concrete: "assign(var(1, X), 2)".into(),
                context: "labelling([X, Y, Z])".into(),
            },
            domains: Arc::new(EventDomains(vec![
                ("X".into(), Domain::new(vec![2, 3])),
                ("Y".into(), Domain::new(vec![2, 3])),
                ("Z".into(), Domain::new(vec![1, 2])),
            ])),
            store: Arc::new(EventStore {
                active: vec![(4, "X#=2".into())],
                suspended: vec![(2, "X#>=Y".into()), (3, "Y#>Z".into()), (1, "X##Y".into())],
                queue: vec![],
                solved: vec![],
                rejected: vec![],
            }),
            withdrawn: Some(Withdrawn { var: "X".into(), values: Domain::singleton(3) }),
            update: Some(vec![
                UpdateEntry { var: "X".into(), kind: UpdateType::Any },
                UpdateEntry { var: "X".into(), kind: UpdateType::Ground },
                UpdateEntry { var: "X".into(), kind: UpdateType::Max },
            ]),
            cause: None,
        }
    }

    #[test]
    fn serialize_reduce_event_shape() {
        let line = serialize(&sample_reduce_event());
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["port"], "reduce");
        assert_eq!(value["update"][0]["var"], "X");
        assert_eq!(value["update"][0]["type"], "any");
        assert_eq!(value["update"][1]["type"], "ground");
        assert_eq!(value["update"][2]["type"], "max");
        assert_eq!(value["withdrawn"]["var"], "X");
        assert_eq!(value["withdrawn"]["values"][0], 3);
        assert_eq!(value["store"]["S"][0][0], 2);
        assert_eq!(value["store"]["S"][0][1], "X#>=Y");
        assert_eq!(value["domains"]["X"][0], 2);
        // Key order is fixed by the schema.
        assert!(line.starts_with("{\"chrono\":14,\"depth\":4,\"port\":\"reduce\",\"constraint\""));
    }

    #[test]
    fn round_trip_identity() {
        let event = sample_reduce_event();
        let parsed = parse(&serialize(&event)).unwrap().unwrap();
        assert_eq!(parsed, event);
    }

    #[test]
    fn wake_up_serializes_cause() {
        let mut event = sample_reduce_event();
        event.port = Port::WakeUp;
        event.withdrawn = None;
        event.update = None;
        event.cause = Some(vec![UpdateEntry { var: "X".into(), kind: UpdateType::Ground }]);
        let line = serialize(&event);
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["port"], "wake-up");
        assert_eq!(value["cause"][0]["type"], "ground");
        assert!(line.contains("\"cause\""));
        assert!(!line.contains("\"withdrawn\""));
        assert_eq!(parse(&line).unwrap().unwrap(), event);
    }

    #[test]
    fn reduce_without_withdrawn_is_schema_error() {
        let mut event = sample_reduce_event();
        event.withdrawn = None;
        let line = serialize(&event);
        assert!(matches!(parse(&line), Err(ParseError::Schema(_))));
    }

    #[test]
    fn blank_lines_are_skipped() {
        assert!(parse("").unwrap().is_none());
        assert!(parse("   ").unwrap().is_none());
    }

    #[test]
    fn read_jsonl_reports_line_numbers() {
        let event = sample_reduce_event();
        let text = format!("{}\n\nnot json\n", serialize(&event));
        let results: Vec<_> = read_jsonl(io::Cursor::new(text)).collect();
        assert_eq!(results.len(), 2);
        assert!(results[0].is_ok());
        let err = results[1].as_ref().unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn compact_format_restricts_to_constraint_vars() {
        let event = sample_reduce_event();
        assert_eq!(format_compact(&event), "14 [4] Reduce X#=2 X:[2,3] X[3]");
    }

    #[test]
    fn constraint_vars_in_form_order() {
        let mut event = sample_reduce_event();
        event.constraint.concrete = "gt(var(2, Y), var(3, Z))".into();
        assert_eq!(event.constraint_vars(), vec!["Y", "Z"]);
    }

    #[test]
    fn writer_sink_stores_errors_out_of_band() {
        struct Failing;
        impl Write for Failing {
            fn write(&mut self, _: &[u8]) -> io::Result<usize> {
                Err(io::Error::other("disk full"))
            }
            fn flush(&mut self) -> io::Result<()> {
                Ok(())
            }
        }
        let mut sink = JsonLinesWriter::new(Failing);
        sink.emit(&sample_reduce_event());
        assert!(sink.finish().is_err());
    }
}
