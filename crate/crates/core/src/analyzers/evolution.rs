//! Domain-evolution matrix: one row per tell, reject, and solution,
//! recording every variable's domain size plus the most significant
//! update type of the variable's last reduce in the preceding phase. The
//! CSV this produces is the data layer of the 3D domain-size views.

use std::collections::HashMap;
use std::sync::Arc;

use crate::domain::UpdateType;
use crate::trace::{Port, TraceEvent, TraceSink};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    Tell,
    Reject,
    Solution,
}

impl Trigger {
    pub fn as_str(self) -> &'static str {
        match self {
            Trigger::Tell => "tell",
            Trigger::Reject => "reject",
            Trigger::Solution => "solution",
        }
    }
}

/// One matrix row: per-variable `(size, coloring update type)` in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionRow {
    pub step: usize,
    pub trigger: Trigger,
    pub cells: Vec<(Arc<str>, usize, Option<UpdateType>)>,
}

fn significance(kind: UpdateType) -> u8 {
    match kind {
        UpdateType::Empty => 4,
        UpdateType::Ground => 3,
        UpdateType::Min => 2,
        UpdateType::Max => 1,
        UpdateType::Any => 0,
    }
}

#[derive(Default)]
pub struct EvolutionBuilder {
    rows: Vec<EvolutionRow>,
    var_names: Vec<Arc<str>>,
    last_update: HashMap<Arc<str>, UpdateType>,
    phase_open: bool,
    phase_rejected: bool,
}

impl EvolutionBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_row(&mut self, trigger: Trigger, event: &TraceEvent) {
        let cells = self
            .var_names
            .iter()
            .map(|name| {
                let size = event.domains.get(name).map_or(0, |d| d.len());
                (Arc::clone(name), size, self.last_update.get(name).copied())
            })
            .collect();
        self.rows.push(EvolutionRow { step: self.rows.len() + 1, trigger, cells });
        self.last_update.clear();
    }

    fn check_solution(&mut self, boundary: &TraceEvent) {
        if self.phase_open && !self.phase_rejected && boundary.domains.all_singleton() {
            self.push_row(Trigger::Solution, boundary);
        }
        self.phase_open = false;
    }

    pub fn observe(&mut self, event: &TraceEvent) {
        if self.var_names.is_empty() {
            self.var_names = event.domains.0.iter().map(|(n, _)| Arc::clone(n)).collect();
        }
        match event.port {
            Port::Tell => {
                self.check_solution(event);
                self.push_row(Trigger::Tell, event);
                self.phase_open = true;
                self.phase_rejected = false;
            }
            Port::Told => {
                self.check_solution(event);
            }
            Port::Reject => {
                self.push_row(Trigger::Reject, event);
                self.phase_rejected = true;
            }
            Port::Reduce => {
                if let Some(update) = &event.update {
                    for entry in update {
                        let kind = entry.kind;
                        self.last_update
                            .entry(Arc::clone(&entry.var))
                            .and_modify(|k| {
                                if significance(kind) > significance(*k) {
                                    *k = kind;
                                }
                            })
                            .or_insert(kind);
                    }
                }
            }
            _ => {}
        }
    }

    pub fn finish(self) -> Vec<EvolutionRow> {
        self.rows
    }

    pub fn header(&self) -> Vec<Arc<str>> {
        self.var_names.clone()
    }
}

impl TraceSink for EvolutionBuilder {
    fn emit(&mut self, event: &TraceEvent) {
        self.observe(event);
    }
}

/// Folds a complete stream into the evolution matrix.
pub fn evolution_matrix<'a>(events: impl IntoIterator<Item = &'a TraceEvent>) -> Vec<EvolutionRow> {
    let mut builder = EvolutionBuilder::new();
    for event in events {
        builder.observe(event);
    }
    builder.finish()
}

/// CSV rendering with header `step,trigger,<var names...>`. A cell is the
/// domain size, suffixed with `:<type>` when the preceding phase reduced
/// the variable (e.g. `2:min`).
pub fn rows_to_csv(rows: &[EvolutionRow]) -> String {
    let mut out = String::from("step,trigger");
    if let Some(first) = rows.first() {
        for (name, ..) in &first.cells {
            out.push(',');
            out.push_str(name);
        }
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{}", row.step, row.trigger.as_str()));
        for (_, size, kind) in &row.cells {
            match kind {
                Some(kind) => out.push_str(&format!(",{size}:{kind}")),
                None => out.push_str(&format!(",{size}")),
            }
        }
        out.push('\n');
    }
    out
}
