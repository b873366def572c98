//! Depth-first labelling: variable selection, value enumeration, and the
//! tell/told-driven exploration of choice points.
//!
//! Labelling assigns values by telling `v #= c` constraints, one value at
//! a time, and backtracks with told on rejection or subtree exhaustion.
//! Variables whose domain is already a singleton are skipped silently (no
//! tell is emitted for them); when no candidate is left the current ground
//! assignment is a solution.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use crate::constraint::ConstraintForm;
use crate::domain::{Domain, DomainState, VarRef};
use crate::engine::{EngineError, SolverState, StepOutcome};
use crate::model::{Labelling, Model};
use crate::trace::TraceSink;

/// Variable selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStrategy {
    /// First non-ground variable of the labelling list.
    InputOrder,
    /// Smallest domain first, ties broken by declaration order.
    FirstFail,
    /// The labelling list is reordered middle-outward (middle variable
    /// first, lower side first on distance ties) before first-fail
    /// selection with ties broken by that reordered position.
    MiddleFirst,
}

/// Value enumeration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValStrategy {
    /// Ascending order.
    Min,
    /// From the nearest domain value to `(min + max) / 2` outward, lower
    /// side first on ties.
    Middle,
}

impl fmt::Display for VarStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarStrategy::InputOrder => "input_order",
            VarStrategy::FirstFail => "first_fail",
            VarStrategy::MiddleFirst => "middle_first",
        })
    }
}

impl FromStr for VarStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "input_order" => Ok(VarStrategy::InputOrder),
            "first_fail" => Ok(VarStrategy::FirstFail),
            "middle_first" => Ok(VarStrategy::MiddleFirst),
            other => Err(format!("unknown variable strategy '{other}'")),
        }
    }
}

impl fmt::Display for ValStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValStrategy::Min => "min",
            ValStrategy::Middle => "middle",
        })
    }
}

impl FromStr for ValStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(ValStrategy::Min),
            "middle" => Ok(ValStrategy::Middle),
            other => Err(format!("unknown value strategy '{other}'")),
        }
    }
}

/// A ground assignment, keyed by variable in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Solution(pub BTreeMap<VarRef, i64>);

impl Solution {
    pub fn get(&self, name: &str) -> Option<i64> {
        self.0.iter().find(|(v, _)| v.name() == name).map(|(_, c)| *c)
    }
}

impl fmt::Display for Solution {
    /// Renders as `{X:3, Y:2, Z:1}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (var, value)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", var.name(), value)?;
        }
        write!(f, "}}")
    }
}

fn middle_out_positions(len: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    // Distance to the list centre, doubled to stay in integers.
    let dist = |i: usize| (2 * i as i64 - (len as i64 - 1)).abs();
    order.sort_by_key(|&i| (dist(i), i));
    order
}

/// Picks the next variable to label among `vars`, skipping ground ones;
/// `None` when every candidate is ground.
pub fn select_variable(
    strategy: VarStrategy,
    domains: &DomainState,
    vars: &[VarRef],
) -> Option<VarRef> {
    let size = |v: &VarRef| {
        domains
            .get(v)
            .expect("labelling variables are model variables")
            .len()
    };
    let candidates = |order: &[usize]| -> Option<VarRef> {
        order
            .iter()
            .map(|&i| &vars[i])
            .filter(|v| size(v) >= 2)
            .next()
            .cloned()
    };
    match strategy {
        VarStrategy::InputOrder => candidates(&(0..vars.len()).collect::<Vec<_>>()),
        VarStrategy::FirstFail => vars
            .iter()
            .filter(|v| size(v) >= 2)
            .min_by_key(|v| (size(v), v.index()))
            .cloned(),
        VarStrategy::MiddleFirst => {
            let order = middle_out_positions(vars.len());
            order
                .iter()
                .map(|&i| &vars[i])
                .filter(|v| size(v) >= 2)
                .min_by_key(|v| size(v))
                .cloned()
        }
    }
}

/// The value enumeration order of a domain under a strategy.
pub fn order_values(domain: &Domain, strategy: ValStrategy) -> Vec<i64> {
    let mut values: Vec<i64> = domain.iter().collect();
    match strategy {
        ValStrategy::Min => {}
        ValStrategy::Middle => {
            let (Some(min), Some(max)) = (domain.min(), domain.max()) else {
                return values;
            };
            let target = (min + max).div_euclid(2);
            values.sort_by_key(|&v| ((v - target).abs(), v));
        }
    }
    values
}

/// The current ground assignment of the state.
fn ground_solution(state: &SolverState) -> Solution {
    let map = state
        .domains()
        .iter()
        .filter_map(|(v, d)| d.single_value().map(|c| (v.clone(), c)))
        .collect();
    Solution(map)
}

/// Depth-first labelling from the current fixpoint. Every solution is
/// passed to `on_solution`; returning [`ControlFlow::Break`] stops the
/// enumeration early. Either way, every tell performed here is unwound by
/// a told before returning, so the trace stays balanced.
pub fn label(
    state: &mut SolverState,
    labelling: &Labelling,
    sink: &mut dyn TraceSink,
    on_solution: &mut dyn FnMut(Solution) -> ControlFlow<()>,
) -> Result<(), EngineError> {
    let _ = label_rec(state, labelling, &labelling.context_string(), sink, on_solution)?;
    Ok(())
}

fn label_rec(
    state: &mut SolverState,
    labelling: &Labelling,
    context: &str,
    sink: &mut dyn TraceSink,
    on_solution: &mut dyn FnMut(Solution) -> ControlFlow<()>,
) -> Result<ControlFlow<()>, EngineError> {
    let Some(var) = select_variable(labelling.var_strategy, state.domains(), &labelling.vars)
    else {
        return Ok(on_solution(ground_solution(state)));
    };
    let domain = state.domains().get(&var).expect("selected variable exists").clone();
    for value in order_values(&domain, labelling.val_strategy) {
        let abstract_text = format!("{}#={}", var.name(), value);
        let outcome = state.tell(
            ConstraintForm::EqConst(var.clone(), value),
            &abstract_text,
            context,
            sink,
        )?;
        let flow = match outcome {
            StepOutcome::Halted(_) => ControlFlow::Continue(()),
            _ => label_rec(state, labelling, context, sink, on_solution)?,
        };
        state.told(sink)?;
        if flow.is_break() {
            return Ok(ControlFlow::Break(()));
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// Options for a complete solve run.
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Overrides the model's labelling variable strategy.
    pub var_strategy: Option<VarStrategy>,
    /// Overrides the model's labelling value strategy.
    pub val_strategy: Option<ValStrategy>,
    /// Stop after this many solutions.
    pub max_solutions: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveSummary {
    pub solutions: usize,
    /// The model constraints themselves were rejected during setup.
    pub setup_rejected: bool,
}

/// The labelling directive a solve run actually uses: the model's, with
/// option overrides applied; models without one label all variables
/// first-fail/min.
pub fn effective_labelling(model: &Model, options: &SolveOptions) -> Labelling {
    let mut labelling = model.labelling.clone().unwrap_or_else(|| Labelling {
        vars: model.variables.iter().map(|(v, _)| v.clone()).collect(),
        var_strategy: VarStrategy::FirstFail,
        val_strategy: ValStrategy::Min,
    });
    if let Some(vs) = options.var_strategy {
        labelling.var_strategy = vs;
    }
    if let Some(vs) = options.val_strategy {
        labelling.val_strategy = vs;
    }
    labelling
}

/// Runs a model end to end: tells the model constraints, labels, then
/// unwinds every model tell so that the trace ends balanced.
pub fn solve_model(
    model: &Model,
    options: &SolveOptions,
    sink: &mut dyn TraceSink,
    on_solution: &mut dyn FnMut(&Solution),
) -> Result<SolveSummary, EngineError> {
    let mut state = SolverState::new(model.variables.clone());
    let mut summary = SolveSummary::default();
    let mut open_tells = 0;
    for constraint in &model.constraints {
        let outcome = state.tell(
            constraint.form.clone(),
            &constraint.abstract_text,
            &constraint.context,
            sink,
        )?;
        open_tells += 1;
        if matches!(outcome, StepOutcome::Halted(_)) {
            summary.setup_rejected = true;
            break;
        }
    }
    if !summary.setup_rejected {
        let labelling = effective_labelling(model, options);
        let max = options.max_solutions.unwrap_or(usize::MAX);
        let mut count = 0usize;
        label(&mut state, &labelling, sink, &mut |solution| {
            count += 1;
            on_solution(&solution);
            if count >= max {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        summary.solutions = count;
    }
    for _ in 0..open_tells {
        state.told(sink)?;
    }
    Ok(summary)
}
