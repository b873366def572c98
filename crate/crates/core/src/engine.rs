//! The propagation engine: a prioritized rule machine over the store
//! partition `<A, S, Q, T, R>` with tell/told control and event emission.
//!
//! Propagation applies six rules in fixed priority order:
//!
//! 1. `select` — `Q` nonempty, `A` and `R` empty: the FIFO head of `Q`
//!    becomes active.
//! 2. `reject` — the active constraint has a variable with an empty
//!    domain: it moves to `R` and propagation halts.
//! 3. `wake-up` — a suspended constraint (scanned in `S` order, most
//!    recently suspended first) has its awakening condition verified by
//!    the pending modification list: it moves to the end of `Q`.
//! 4. `reduce` — the active constraint's variables are scanned in form
//!    order; the first with a nonempty withdrawal set has it removed.
//! 5. `true` — the active constraint's solved condition holds: it moves
//!    to `T`.
//! 6. `suspend` — the active constraint is prepended to `S`.
//!
//! Each fired rule emits exactly one event whose attributes capture the
//! state immediately before the rule's actions. The pending modification
//! list is replaced by each `reduce` and cleared whenever `A` changes.
//!
//! Control is two operations: [`SolverState::tell`] pushes a full snapshot
//! of store and domains, makes the new constraint active and propagates to
//! fixpoint or rejection; [`SolverState::told`] restores the snapshot of
//! the matching tell.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::constraint::{ConstraintForm, ConstraintInstance};
use crate::domain::{classify_update, Domain, DomainState, UpdateType, VarRef};
use crate::trace::{
    EventConstraint, EventDomains, EventStore, Port, TraceEvent, TraceSink, UpdateEntry, Withdrawn,
};

/// The constraint store, partitioned by status. `A` and `R` hold at most
/// one constraint each, which the representation enforces.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StorePartition {
    pub active: Option<Arc<ConstraintInstance>>,
    pub suspended: Vec<Arc<ConstraintInstance>>,
    pub queue: VecDeque<Arc<ConstraintInstance>>,
    pub solved: Vec<Arc<ConstraintInstance>>,
    pub rejected: Option<Arc<ConstraintInstance>>,
}

impl StorePartition {
    pub fn is_empty(&self) -> bool {
        self.active.is_none()
            && self.suspended.is_empty()
            && self.queue.is_empty()
            && self.solved.is_empty()
            && self.rejected.is_none()
    }

    /// All constraints currently in the store, whatever their status.
    pub fn all(&self) -> impl Iterator<Item = &Arc<ConstraintInstance>> {
        self.active
            .iter()
            .chain(self.suspended.iter())
            .chain(self.queue.iter())
            .chain(self.solved.iter())
            .chain(self.rejected.iter())
    }

    /// The partition lists must be pairwise disjoint.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = std::collections::BTreeSet::new();
        for c in self.all() {
            if !seen.insert(c.id) {
                return Err(format!("constraint {} appears in more than one partition", c.id));
            }
        }
        Ok(())
    }

    fn entries(list: impl Iterator<Item = Arc<ConstraintInstance>>) -> Vec<(u64, Arc<str>)> {
        list.map(|c| (c.id, Arc::clone(&c.abstract_text))).collect()
    }

    fn to_event_store(&self) -> EventStore {
        EventStore {
            active: Self::entries(self.active.iter().cloned()),
            suspended: Self::entries(self.suspended.iter().cloned()),
            queue: Self::entries(self.queue.iter().cloned()),
            solved: Self::entries(self.solved.iter().cloned()),
            rejected: Self::entries(self.rejected.iter().cloned()),
        }
    }
}

/// Result of a propagation step or phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// A rule fired and emitted one event of this port.
    Fired(Port),
    /// No rule applies: the queue is empty and nothing is active.
    Fixpoint,
    /// The constraint with this id was rejected; only `told` can proceed.
    Halted(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("cannot tell {telling}: constraint {active} is still active")]
    ActiveNotEmpty { telling: String, active: String },
    #[error("cannot tell: store was rejected by constraint {rejected_id}; told required")]
    StoreRejected { rejected_id: u64 },
    #[error("told with an empty control stack")]
    EmptyControlStack,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
}

struct Snapshot {
    store: StorePartition,
    domains: DomainState,
    told_constraint: Arc<ConstraintInstance>,
}

/// The full solver state: partitioned store, domains, pending modification
/// list, event counter and control stack. Single-threaded by design; the
/// events it emits are immutable snapshots safe to hand elsewhere.
pub struct SolverState {
    domains: DomainState,
    store: StorePartition,
    pending_mods: Vec<(VarRef, UpdateType)>,
    chrono: u64,
    control: Vec<Snapshot>,
    next_id: u64,
    cached_domains: Option<Arc<EventDomains>>,
    cached_store: Option<Arc<EventStore>>,
}

impl SolverState {
    pub fn new(variables: Vec<(VarRef, Domain)>) -> Self {
        SolverState {
            domains: DomainState::new(variables),
            store: StorePartition::default(),
            pending_mods: Vec::new(),
            chrono: 0,
            control: Vec::new(),
            next_id: 1,
            cached_domains: None,
            cached_store: None,
        }
    }

    pub fn domains(&self) -> &DomainState {
        &self.domains
    }

    pub fn store(&self) -> &StorePartition {
        &self.store
    }

    pub fn chrono(&self) -> u64 {
        self.chrono
    }

    /// Current control depth; equals the number of open tells.
    pub fn depth(&self) -> u32 {
        self.control.len() as u32
    }

    pub fn pending_mods(&self) -> &[(VarRef, UpdateType)] {
        &self.pending_mods
    }

    fn domains_snapshot(&mut self) -> Arc<EventDomains> {
        if let Some(cached) = &self.cached_domains {
            return Arc::clone(cached);
        }
        let snapshot = Arc::new(EventDomains(
            self.domains
                .iter()
                .map(|(v, d)| (v.name_arc(), d.clone()))
                .collect(),
        ));
        self.cached_domains = Some(Arc::clone(&snapshot));
        snapshot
    }

    fn store_snapshot(&mut self) -> Arc<EventStore> {
        if let Some(cached) = &self.cached_store {
            return Arc::clone(cached);
        }
        let snapshot = Arc::new(self.store.to_event_store());
        self.cached_store = Some(Arc::clone(&snapshot));
        snapshot
    }

    fn emit(
        &mut self,
        port: Port,
        constraint: &Arc<ConstraintInstance>,
        withdrawn: Option<Withdrawn>,
        update: Option<Vec<UpdateEntry>>,
        cause: Option<Vec<UpdateEntry>>,
        sink: &mut dyn TraceSink,
    ) {
        self.chrono += 1;
        let event = TraceEvent {
            chrono: self.chrono,
            depth: self.depth(),
            port,
            constraint: EventConstraint {
                id: constraint.id,
                abstract_text: Arc::clone(&constraint.abstract_text),
                concrete: Arc::clone(&constraint.concrete),
                context: Arc::clone(&constraint.context),
            },
            domains: self.domains_snapshot(),
            store: self.store_snapshot(),
            withdrawn,
            update,
            cause,
        };
        sink.emit(&event);
    }

    fn update_entries(mods: &[(VarRef, UpdateType)]) -> Vec<UpdateEntry> {
        mods.iter()
            .map(|(v, k)| UpdateEntry { var: v.name_arc(), kind: *k })
            .collect()
    }

    /// Adds a constraint to the store as the active one and propagates.
    ///
    /// A snapshot of store and domains is pushed first; the depth grows by
    /// one and the tell event carries the pre-tell state with the new
    /// constraint already active. Returns the outcome of the propagation
    /// phase: [`StepOutcome::Fixpoint`] or [`StepOutcome::Halted`].
    pub fn tell(
        &mut self,
        form: ConstraintForm,
        abstract_text: &str,
        context: &str,
        sink: &mut dyn TraceSink,
    ) -> Result<StepOutcome, EngineError> {
        if let Some(active) = &self.store.active {
            return Err(EngineError::ActiveNotEmpty {
                telling: abstract_text.to_string(),
                active: active.abstract_text.to_string(),
            });
        }
        if let Some(rejected) = &self.store.rejected {
            return Err(EngineError::StoreRejected { rejected_id: rejected.id });
        }
        for var in form.vars() {
            if !self.domains.contains_var(var) {
                return Err(EngineError::UnknownVariable(var.name().to_string()));
            }
        }
        let instance = Arc::new(ConstraintInstance::new(
            self.next_id,
            abstract_text,
            form,
            context,
        ));
        self.next_id += 1;
        self.control.push(Snapshot {
            store: self.store.clone(),
            domains: self.domains.clone(),
            told_constraint: Arc::clone(&instance),
        });
        self.store.active = Some(Arc::clone(&instance));
        self.cached_store = None;
        self.pending_mods.clear();
        self.emit(Port::Tell, &instance, None, None, None, sink);
        Ok(self.run_propagation(sink))
    }

    /// Restores the store and the domains to their state before the
    /// matching tell. The told event is emitted at the current depth with
    /// the pre-restore state and names the constraint of the matching tell.
    pub fn told(&mut self, sink: &mut dyn TraceSink) -> Result<Arc<ConstraintInstance>, EngineError> {
        if self.control.is_empty() {
            return Err(EngineError::EmptyControlStack);
        }
        let constraint = Arc::clone(&self.control.last().unwrap().told_constraint);
        self.emit(Port::Told, &constraint, None, None, None, sink);
        let snapshot = self.control.pop().unwrap();
        self.store = snapshot.store;
        self.domains = snapshot.domains;
        self.pending_mods.clear();
        self.cached_store = None;
        self.cached_domains = None;
        Ok(constraint)
    }

    /// Attempts the six propagation rules in priority order and fires the
    /// first applicable one. Inapplicability is a fixpoint, not an error.
    pub fn propagation_step(&mut self, sink: &mut dyn TraceSink) -> StepOutcome {
        if let Some(rejected) = &self.store.rejected {
            return StepOutcome::Halted(rejected.id);
        }

        // select
        if self.store.active.is_none() {
            if let Some(front) = self.store.queue.front() {
                let constraint = Arc::clone(front);
                self.emit(Port::Select, &constraint, None, None, None, sink);
                self.store.queue.pop_front();
                self.store.active = Some(constraint);
                self.cached_store = None;
                self.pending_mods.clear();
                return StepOutcome::Fired(Port::Select);
            }
        }

        // reject
        if let Some(active) = &self.store.active {
            let emptied = active
                .vars()
                .iter()
                .any(|v| self.domains.get(v).map(Domain::is_empty).unwrap_or(false));
            if emptied {
                let constraint = Arc::clone(active);
                self.emit(Port::Reject, &constraint, None, None, None, sink);
                self.store.active = None;
                self.store.rejected = Some(Arc::clone(&constraint));
                self.cached_store = None;
                self.pending_mods.clear();
                return StepOutcome::Halted(constraint.id);
            }
        }

        // wake-up
        if !self.pending_mods.is_empty() {
            let mut woken = None;
            for (pos, candidate) in self.store.suspended.iter().enumerate() {
                let verified = candidate.form.awake_intersection(&self.pending_mods);
                if !verified.is_empty() {
                    woken = Some((pos, Arc::clone(candidate), verified));
                    break;
                }
            }
            if let Some((pos, constraint, verified)) = woken {
                let cause = Self::update_entries(&verified);
                self.emit(Port::WakeUp, &constraint, None, None, Some(cause), sink);
                self.store.suspended.remove(pos);
                self.store.queue.push_back(constraint);
                self.cached_store = None;
                return StepOutcome::Fired(Port::WakeUp);
            }
        }

        // reduce
        if let Some(active) = &self.store.active {
            let constraint = Arc::clone(active);
            for var in constraint.vars() {
                let withdrawn = constraint
                    .form
                    .reduce_step(&self.domains, var)
                    .expect("active constraint variables are in the domain state");
                if withdrawn.is_empty() {
                    continue;
                }
                let old = self.domains.get(var).expect("variable present").clone();
                let updates = classify_update(&old, &withdrawn)
                    .expect("withdrawal sets are nonempty subsets of the domain");
                let mods: Vec<(VarRef, UpdateType)> =
                    updates.iter().map(|k| ((*var).clone(), *k)).collect();
                self.emit(
                    Port::Reduce,
                    &constraint,
                    Some(Withdrawn { var: var.name_arc(), values: withdrawn.clone() }),
                    Some(Self::update_entries(&mods)),
                    None,
                    sink,
                );
                let narrowed = old.remove_values(&withdrawn);
                self.domains.set(var, narrowed).expect("variable present");
                self.cached_domains = None;
                self.pending_mods = mods;
                return StepOutcome::Fired(Port::Reduce);
            }
        }

        // true
        if let Some(active) = &self.store.active {
            if active.form.is_solved(&self.domains) {
                let constraint = Arc::clone(active);
                self.emit(Port::True, &constraint, None, None, None, sink);
                self.store.active = None;
                self.store.solved.insert(0, constraint);
                self.cached_store = None;
                self.pending_mods.clear();
                return StepOutcome::Fired(Port::True);
            }
        }

        // suspend
        if let Some(active) = &self.store.active {
            let constraint = Arc::clone(active);
            self.emit(Port::Suspend, &constraint, None, None, None, sink);
            self.store.active = None;
            self.store.suspended.insert(0, constraint);
            self.cached_store = None;
            self.pending_mods.clear();
            return StepOutcome::Fired(Port::Suspend);
        }

        StepOutcome::Fixpoint
    }

    /// Iterates [`propagation_step`](Self::propagation_step) until the
    /// fixpoint is reached or a constraint is rejected.
    pub fn run_propagation(&mut self, sink: &mut dyn TraceSink) -> StepOutcome {
        loop {
            match self.propagation_step(sink) {
                StepOutcome::Fired(_) => continue,
                terminal => return terminal,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{format_compact, VecSink};

    fn vars3() -> (VarRef, VarRef, VarRef) {
        (VarRef::new(1, "X"), VarRef::new(2, "Y"), VarRef::new(3, "Z"))
    }

    fn sorted_state() -> (SolverState, VarRef, VarRef, VarRef) {
        let (x, y, z) = vars3();
        let state = SolverState::new(vec![
            (x.clone(), Domain::from_range(1, 3)),
            (y.clone(), Domain::from_range(1, 3)),
            (z.clone(), Domain::from_range(1, 3)),
        ]);
        (state, x, y, z)
    }

    const CONTEXT: &str = "sorted([X, Y, Z])";

    fn tell_sorted_prefix(state: &mut SolverState, sink: &mut VecSink) {
        let (x, y, z) = vars3();
        state
            .tell(ConstraintForm::Neq(x.clone(), y.clone()), "X##Y", CONTEXT, sink)
            .unwrap();
        state
            .tell(ConstraintForm::Geq(x.clone(), y.clone()), "X#>=Y", CONTEXT, sink)
            .unwrap();
        state
            .tell(ConstraintForm::Gt(y.clone(), z.clone()), "Y#>Z", CONTEXT, sink)
            .unwrap();
    }

    #[test]
    fn telling_the_third_constraint_propagates_to_the_known_fixpoint() {
        let (mut state, x, y, z) = sorted_state();
        let mut sink = VecSink::new();
        tell_sorted_prefix(&mut state, &mut sink);

        assert_eq!(state.domains().get(&x).unwrap(), &Domain::new(vec![2, 3]));
        assert_eq!(state.domains().get(&y).unwrap(), &Domain::new(vec![2, 3]));
        assert_eq!(state.domains().get(&z).unwrap(), &Domain::new(vec![1, 2]));

        let lines: Vec<String> = sink.events.iter().map(format_compact).collect();
        let expected = [
            "1 [1] Tell X##Y X:[1,2,3] Y:[1,2,3]",
            "2 [1] Suspend X##Y X:[1,2,3] Y:[1,2,3]",
            "3 [2] Tell X#>=Y X:[1,2,3] Y:[1,2,3]",
            "4 [2] Suspend X#>=Y X:[1,2,3] Y:[1,2,3]",
            "5 [3] Tell Y#>Z Y:[1,2,3] Z:[1,2,3]",
            "6 [3] Reduce Y#>Z Y:[1,2,3] Z:[1,2,3] Y[1]",
            "7 [3] Wake-up X#>=Y X:[1,2,3] Y:[2,3]",
            "8 [3] Reduce Y#>Z Y:[2,3] Z:[1,2,3] Z[3]",
            "9 [3] Suspend Y#>Z Y:[2,3] Z:[1,2]",
            "10 [3] Select X#>=Y X:[1,2,3] Y:[2,3]",
            "11 [3] Reduce X#>=Y X:[1,2,3] Y:[2,3] X[1]",
            "12 [3] Suspend X#>=Y X:[2,3] Y:[2,3]",
        ];
        assert_eq!(lines, expected);
        state.store().check_invariants().unwrap();
    }

    #[test]
    fn telling_the_failing_label_halts_with_a_rejection() {
        let (mut state, x, ..) = sorted_state();
        let mut sink = VecSink::new();
        tell_sorted_prefix(&mut state, &mut sink);

        let outcome = state
            .tell(ConstraintForm::EqConst(x.clone(), 2), "X#=2", "labelling([X, Y, Z])", &mut sink)
            .unwrap();
        // X##Y was told first, so it carries id 1.
        assert_eq!(outcome, StepOutcome::Halted(1));

        let lines: Vec<String> = sink.events[12..].iter().map(format_compact).collect();
        let expected = [
            "13 [4] Tell X#=2 X:[2,3]",
            "14 [4] Reduce X#=2 X:[2,3] X[3]",
            "15 [4] Wake-up X#>=Y X:[2] Y:[2,3]",
            "16 [4] Wake-up X##Y X:[2] Y:[2,3]",
            "17 [4] True X#=2 X:[2]",
            "18 [4] Select X#>=Y X:[2] Y:[2,3]",
            "19 [4] Reduce X#>=Y X:[2] Y:[2,3] Y[3]",
            "20 [4] Wake-up Y#>Z Y:[2] Z:[1,2]",
            "21 [4] True X#>=Y X:[2] Y:[2]",
            "22 [4] Select X##Y X:[2] Y:[2]",
            "23 [4] Reduce X##Y X:[2] Y:[2] X[2]",
            "24 [4] Reject X##Y X:[] Y:[2]",
        ];
        assert_eq!(lines, expected);

        // Telling into a rejected store is refused until told.
        let err = state
            .tell(ConstraintForm::EqConst(x.clone(), 3), "X#=3", "labelling([X, Y, Z])", &mut sink)
            .unwrap_err();
        assert!(matches!(err, EngineError::StoreRejected { rejected_id: 1 }));
    }

    #[test]
    fn told_restores_the_pre_tell_state() {
        let (mut state, x, ..) = sorted_state();
        let mut sink = VecSink::new();
        tell_sorted_prefix(&mut state, &mut sink);

        let store_before = state.store().clone();
        let domains_before = state.domains().clone();
        state
            .tell(ConstraintForm::EqConst(x.clone(), 2), "X#=2", "labelling([X, Y, Z])", &mut sink)
            .unwrap();
        let told = state.told(&mut sink).unwrap();
        assert_eq!(&*told.abstract_text, "X#=2");

        let told_event = sink.events.last().unwrap();
        assert_eq!(format_compact(told_event), "25 [4] Told X#=2 X:[]");

        assert_eq!(state.store(), &store_before);
        assert_eq!(state.domains(), &domains_before);
        assert_eq!(state.depth(), 3);
    }

    #[test]
    fn tell_then_told_is_the_identity_even_without_reductions() {
        let (x, y, _) = vars3();
        let mut state = SolverState::new(vec![
            (x.clone(), Domain::new(vec![2, 3])),
            (y.clone(), Domain::singleton(1)),
        ]);
        let mut sink = VecSink::new();
        let store_before = state.store().clone();
        let domains_before = state.domains().clone();
        state
            .tell(ConstraintForm::Geq(x.clone(), y.clone()), "X#>=Y", "m", &mut sink)
            .unwrap();
        state.told(&mut sink).unwrap();
        assert_eq!(state.store(), &store_before);
        assert_eq!(state.domains(), &domains_before);
    }

    #[test]
    fn reject_takes_priority_over_wake_up() {
        let (x, y, _) = vars3();
        let mut state = SolverState::new(vec![
            (x.clone(), Domain::new(vec![1, 2])),
            (y.clone(), Domain::new(vec![1, 2])),
        ]);
        let mut sink = VecSink::new();
        // Suspend X#=Y, whose awakening condition matches any change of X.
        state
            .tell(ConstraintForm::Eq(x.clone(), y.clone()), "X#=Y", "m", &mut sink)
            .unwrap();
        // X#=3 withdraws all of X at once; the emptying must reject, not wake.
        let outcome = state
            .tell(ConstraintForm::EqConst(x.clone(), 3), "X#=3", "m", &mut sink)
            .unwrap();
        assert!(matches!(outcome, StepOutcome::Halted(_)));
        let ports: Vec<Port> = sink.events.iter().map(|e| e.port).collect();
        assert_eq!(
            ports,
            vec![Port::Tell, Port::Suspend, Port::Tell, Port::Reduce, Port::Reject]
        );
    }

    #[test]
    fn immediately_solved_constraint_goes_to_t() {
        let x = VarRef::new(1, "X");
        let mut state = SolverState::new(vec![(x.clone(), Domain::singleton(2))]);
        let mut sink = VecSink::new();
        let outcome = state
            .tell(ConstraintForm::EqConst(x.clone(), 2), "X#=2", "m", &mut sink)
            .unwrap();
        assert_eq!(outcome, StepOutcome::Fixpoint);
        assert_eq!(state.store().solved.len(), 1);
        let ports: Vec<Port> = sink.events.iter().map(|e| e.port).collect();
        assert_eq!(ports, vec![Port::Tell, Port::True]);
    }

    #[test]
    fn empty_store_is_an_immediate_fixpoint() {
        let (mut state, ..) = sorted_state();
        let mut sink = VecSink::new();
        assert_eq!(state.run_propagation(&mut sink), StepOutcome::Fixpoint);
        assert!(sink.events.is_empty());
    }

    #[test]
    fn told_on_empty_stack_is_an_error() {
        let (mut state, ..) = sorted_state();
        let mut sink = VecSink::new();
        assert_eq!(state.told(&mut sink).unwrap_err(), EngineError::EmptyControlStack);
    }

    #[test]
    fn withdrawn_totals_match_domain_shrinkage_along_one_branch() {
        let (x, y, z) = vars3();
        let mut state = SolverState::new(vec![
            (x.clone(), Domain::from_range(1, 3)),
            (y.clone(), Domain::from_range(1, 3)),
            (z.clone(), Domain::from_range(1, 3)),
        ]);
        let initial_total = state.domains().total_size();
        let mut sink = VecSink::new();
        state
            .tell(ConstraintForm::Gt(x.clone(), y.clone()), "x#>y", "m", &mut sink)
            .unwrap();
        state
            .tell(ConstraintForm::Gt(y.clone(), z.clone()), "y#>z", "m", &mut sink)
            .unwrap();

        let withdrawn_total: usize = sink
            .events
            .iter()
            .filter_map(|e| e.withdrawn.as_ref())
            .map(|w| w.values.len())
            .sum();
        assert_eq!(
            withdrawn_total,
            initial_total - state.domains().total_size()
        );
    }

    #[test]
    fn domains_only_shrink_within_a_propagation_phase() {
        let (mut state, ..) = sorted_state();
        let mut sink = VecSink::new();
        tell_sorted_prefix(&mut state, &mut sink);
        let mut previous: Option<TraceEvent> = None;
        for event in &sink.events {
            if let Some(prev) = &previous {
                if event.port != Port::Tell && event.port != Port::Told {
                    for (name, dom) in event.domains.iter() {
                        let before = prev.domains.get(name).unwrap();
                        assert!(dom.is_subset_of(before), "domain of {name} grew");
                    }
                }
            }
            previous = Some(event.clone());
        }
    }

    #[test]
    fn unknown_variable_is_rejected_at_tell() {
        let (mut state, ..) = sorted_state();
        let mut sink = VecSink::new();
        let foreign = VarRef::new(9, "W");
        let err = state
            .tell(ConstraintForm::EqConst(foreign, 1), "W#=1", "m", &mut sink)
            .unwrap_err();
        assert_eq!(err, EngineError::UnknownVariable("W".into()));
    }
}
