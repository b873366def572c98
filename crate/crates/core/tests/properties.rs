//! Exhaustive and property-based checks of the constraint catalog and the
//! domain algebra, plus serialization round-trips over engine-emitted
//! traces.
//!
//! The brute-force suites enumerate every pair of domains inside `{1..6}`
//! and check, per primitive constraint form:
//!
//! * support soundness — every value a reduction withdraws has no support
//!   in the other variable's domain;
//! * arc-consistency completeness — once no reduction applies, every
//!   remaining value has a support;
//! * solved soundness — a solved constraint is satisfied by every
//!   assignment drawn from the current domains;
//! * awakening soundness — a modification that does not verify the
//!   awakening condition cannot enable a new reduction.

use proptest::prelude::*;

use fdtrace_core::constraint::ConstraintForm;
use fdtrace_core::domain::{classify_update, Domain, DomainState, UpdateType, VarRef};
use fdtrace_core::model::{generate_nqueens, generate_random, generate_sorted};
use fdtrace_core::search::{solve_model, SolveOptions};
use fdtrace_core::trace::{parse, serialize, VecSink};

fn x() -> VarRef {
    VarRef::new(1, "X")
}

fn y() -> VarRef {
    VarRef::new(2, "Y")
}

/// All subsets of {1..6}, the empty one included, as bitmask expansions.
fn subsets() -> Vec<Domain> {
    (0u32..64)
        .map(|mask| Domain::new((1..=6).filter(|v| mask & (1 << (v - 1)) != 0).collect()))
        .collect()
}

/// The two-variable forms under test, offsets included.
fn binary_forms() -> Vec<ConstraintForm> {
    let mut forms = vec![
        ConstraintForm::Eq(x(), y()),
        ConstraintForm::Neq(x(), y()),
        ConstraintForm::Gt(x(), y()),
        ConstraintForm::Geq(x(), y()),
    ];
    for n in [-2, 0, 1, 2, 3] {
        forms.push(ConstraintForm::EqOffset(x(), y(), n));
        forms.push(ConstraintForm::NeqOffset(x(), y(), n));
    }
    forms
}

fn unary_forms() -> Vec<ConstraintForm> {
    (0..=7)
        .flat_map(|n| [ConstraintForm::EqConst(x(), n), ConstraintForm::NeqConst(x(), n)])
        .collect()
}

fn state2(dx: &Domain, dy: &Domain) -> DomainState {
    DomainState::new(vec![(x(), dx.clone()), (y(), dy.clone())])
}

fn state1(dx: &Domain) -> DomainState {
    DomainState::new(vec![(x(), dx.clone())])
}

/// Does `value` for `var` participate in a satisfying assignment over the
/// other variables' current domains?
fn has_support(form: &ConstraintForm, state: &DomainState, var: &VarRef, value: i64) -> bool {
    let vars = form.vars();
    let others: Vec<&VarRef> = vars.into_iter().filter(|v| *v != var).collect();
    match others.as_slice() {
        [] => form.check_satisfied(|_| value),
        [other] => {
            let dom = state.get(other).unwrap();
            dom.iter().any(|other_value| {
                form.check_satisfied(|v| if v == var { value } else { other_value })
            })
        }
        _ => unreachable!("primitive constraints have at most two variables"),
    }
}

#[test]
fn support_soundness_binary() {
    let subsets = subsets();
    for form in binary_forms() {
        for dx in &subsets {
            for dy in &subsets {
                let state = state2(dx, dy);
                for var in [x(), y()] {
                    let withdrawn = form.reduce_step(&state, &var).unwrap();
                    for value in withdrawn.iter() {
                        assert!(
                            !has_support(&form, &state, &var, value),
                            "{form}: removed supported value {value} of {} with Dx={dx} Dy={dy}",
                            var.name()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn support_soundness_unary() {
    for form in unary_forms() {
        for dx in subsets() {
            let state = state1(&dx);
            let withdrawn = form.reduce_step(&state, &x()).unwrap();
            for value in withdrawn.iter() {
                assert!(
                    !has_support(&form, &state, &x(), value),
                    "{form}: removed satisfiable value {value} with Dx={dx}"
                );
            }
        }
    }
}

#[test]
fn arc_consistency_completeness_at_local_fixpoints() {
    let subsets = subsets();
    for form in binary_forms() {
        for dx in &subsets {
            for dy in &subsets {
                if dx.is_empty() || dy.is_empty() {
                    continue;
                }
                let state = state2(dx, dy);
                let quiet = [x(), y()]
                    .iter()
                    .all(|v| form.reduce_step(&state, v).unwrap().is_empty());
                if !quiet {
                    continue;
                }
                for var in [x(), y()] {
                    for value in state.get(&var).unwrap().iter() {
                        assert!(
                            has_support(&form, &state, &var, value),
                            "{form}: unsupported value {value} of {} survives a fixpoint with Dx={dx} Dy={dy}",
                            var.name()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn solved_soundness() {
    let subsets = subsets();
    for form in binary_forms() {
        for dx in &subsets {
            for dy in &subsets {
                if dx.is_empty() || dy.is_empty() {
                    continue;
                }
                let state = state2(dx, dy);
                if !form.is_solved(&state) {
                    continue;
                }
                for vx in dx.iter() {
                    for vy in dy.iter() {
                        assert!(
                            form.check_satisfied(|v| if *v == x() { vx } else { vy }),
                            "{form}: solved with Dx={dx} Dy={dy} but X={vx} Y={vy} violates it"
                        );
                    }
                }
            }
        }
    }
    for form in unary_forms() {
        for dx in subsets.iter().filter(|d| !d.is_empty()) {
            let state = state1(dx);
            if form.is_solved(&state) {
                for vx in dx.iter() {
                    assert!(form.check_satisfied(|_| vx));
                }
            }
        }
    }
}

#[test]
fn awakening_soundness_under_single_removals() {
    let subsets = subsets();
    for form in binary_forms() {
        let condition = form.awakening_condition();
        for dx in &subsets {
            for dy in &subsets {
                if dx.is_empty() || dy.is_empty() {
                    continue;
                }
                let state = state2(dx, dy);
                let quiet = [x(), y()]
                    .iter()
                    .all(|v| form.reduce_step(&state, v).unwrap().is_empty());
                if !quiet {
                    continue;
                }
                for var in [x(), y()] {
                    let dom = state.get(&var).unwrap().clone();
                    for removed in dom.iter() {
                        let withdrawn = Domain::new(vec![removed]);
                        let updates = classify_update(&dom, &withdrawn).unwrap();
                        let woken = updates.iter().any(|kind| {
                            condition.iter().any(|(cv, ck)| cv == &var && ck == kind)
                        });
                        if woken {
                            continue;
                        }
                        let mut narrowed = state.clone();
                        narrowed.set(&var, dom.remove_values(&withdrawn)).unwrap();
                        for target in [x(), y()] {
                            assert!(
                                form.reduce_step(&narrowed, &target).unwrap().is_empty(),
                                "{form}: silent removal of {removed} from {} enabled a reduction \
                                 (Dx={dx} Dy={dy})",
                                var.name()
                            );
                        }
                    }
                }
            }
        }
    }
}

fn engine_traces() -> Vec<Vec<fdtrace_core::trace::TraceEvent>> {
    let mut models = vec![generate_sorted(), generate_nqueens(4).unwrap()];
    models.extend((0..20).map(generate_random));
    models
        .iter()
        .map(|model| {
            let mut sink = VecSink::new();
            solve_model(model, &SolveOptions::default(), &mut sink, &mut |_| {}).unwrap();
            sink.events
        })
        .collect()
}

#[test]
fn serialization_round_trips_on_engine_events() {
    for events in engine_traces() {
        for event in events {
            let line = serialize(&event);
            let parsed = parse(&line).unwrap().unwrap();
            assert_eq!(parsed, event, "round trip diverged on: {line}");
        }
    }
}

fn arb_domain() -> impl Strategy<Value = Domain> {
    prop::collection::vec(-8i64..=8, 0..8).prop_map(Domain::new)
}

proptest! {
    #[test]
    fn intersect_commutative(a in arb_domain(), b in arb_domain()) {
        prop_assert_eq!(a.intersect(&b), b.intersect(&a));
    }

    #[test]
    fn intersect_associative(a in arb_domain(), b in arb_domain(), c in arb_domain()) {
        prop_assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
    }

    #[test]
    fn intersect_idempotent(a in arb_domain()) {
        prop_assert_eq!(a.intersect(&a), a);
    }

    #[test]
    fn remove_values_is_a_subset_with_the_right_size(d in arb_domain(), w in arb_domain()) {
        let removed = d.remove_values(&w);
        prop_assert!(removed.is_subset_of(&d));
        prop_assert_eq!(removed.len(), d.len() - d.intersect(&w).len());
    }

    #[test]
    fn classify_always_any_never_ground_and_empty(
        d in arb_domain().prop_filter("nonempty", |d| !d.is_empty()),
        mask in prop::collection::vec(any::<bool>(), 8),
    ) {
        let withdrawn = Domain::new(
            d.iter()
                .enumerate()
                .filter(|(i, _)| mask.get(*i).copied().unwrap_or(false))
                .map(|(_, v)| v)
                .collect(),
        );
        prop_assume!(!withdrawn.is_empty());
        let updates = classify_update(&d, &withdrawn).unwrap();
        prop_assert_eq!(updates.first(), Some(&UpdateType::Any));
        prop_assert!(
            !(updates.contains(&UpdateType::Ground) && updates.contains(&UpdateType::Empty))
        );
        // Canonical emission order.
        let order = [UpdateType::Any, UpdateType::Ground, UpdateType::Min, UpdateType::Max, UpdateType::Empty];
        let positions: Vec<usize> = updates
            .iter()
            .map(|u| order.iter().position(|o| o == u).unwrap())
            .collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }
}
