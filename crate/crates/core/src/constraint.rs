//! The catalog of the eight primitive constraints: reduction operators,
//! solved conditions, awakening conditions, and ground satisfaction.
//!
//! Each constraint form is characterised by three things:
//!
//! * its reduction operators — for each of its variables `x`, the set
//!   `W_x` of values inconsistent with the other variable's current
//!   domain ([`ConstraintForm::reduce_step`]); the reductions here are
//!   full arc consistency, not bounds approximations;
//! * its solved condition — a domain predicate under which no future
//!   withdrawal can invalidate the constraint ([`ConstraintForm::is_solved`]);
//! * its awakening condition — the disjunction of `(variable, update type)`
//!   pairs under which a suspended instance must be re-queued
//!   ([`ConstraintForm::awakening_condition`]).

use std::fmt;
use std::sync::Arc;

use crate::domain::{Domain, DomainError, DomainState, UpdateType, VarRef};

/// One of the eight primitive constraint forms.
///
/// In the two-variable forms the first variable is the one written on the
/// left in the surface syntax; reduction operators are scanned in that
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintForm {
    /// `x #= y`
    Eq(VarRef, VarRef),
    /// `x ## y`
    Neq(VarRef, VarRef),
    /// `x #= y + n`
    EqOffset(VarRef, VarRef, i64),
    /// `x ## y + n`
    NeqOffset(VarRef, VarRef, i64),
    /// `x #> y`
    Gt(VarRef, VarRef),
    /// `x #>= y`
    Geq(VarRef, VarRef),
    /// `x #= n`
    EqConst(VarRef, i64),
    /// `x ## n`
    NeqConst(VarRef, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("variable {var} does not occur in constraint {constraint}")]
    VarNotInConstraint { var: String, constraint: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl ConstraintForm {
    /// The variables of the constraint, in form order (left first).
    pub fn vars(&self) -> Vec<&VarRef> {
        match self {
            ConstraintForm::Eq(x, y)
            | ConstraintForm::Neq(x, y)
            | ConstraintForm::EqOffset(x, y, _)
            | ConstraintForm::NeqOffset(x, y, _)
            | ConstraintForm::Gt(x, y)
            | ConstraintForm::Geq(x, y) => vec![x, y],
            ConstraintForm::EqConst(x, _) | ConstraintForm::NeqConst(x, _) => vec![x],
        }
    }

    /// The withdrawal set `W_x` of the reduction operator attached to
    /// `target`: the values of `target` with no support in the other
    /// variable's current domain. An empty result means no reduction.
    pub fn reduce_step(&self, domains: &DomainState, target: &VarRef) -> Result<Domain, CatalogError> {
        if !self.vars().contains(&target) {
            return Err(CatalogError::VarNotInConstraint {
                var: target.name().to_string(),
                constraint: self.render_abstract(),
            });
        }
        let dom = |v: &VarRef| -> Result<Domain, CatalogError> { Ok(domains.get(v)?.clone()) };
        let w = match self {
            ConstraintForm::Eq(x, y) => {
                let (dx, dy) = (dom(x)?, dom(y)?);
                let common = dx.intersect(&dy);
                if target == x {
                    dx.remove_values(&common)
                } else {
                    dy.remove_values(&common)
                }
            }
            ConstraintForm::Neq(x, y) => {
                // Prunes only once the opposite side is ground.
                let (dx, dy) = (dom(x)?, dom(y)?);
                if target == x {
                    match dy.single_value() {
                        Some(v) if dx.contains(v) => Domain::singleton(v),
                        _ => Domain::empty(),
                    }
                } else {
                    match dx.single_value() {
                        Some(v) if dy.contains(v) => Domain::singleton(v),
                        _ => Domain::empty(),
                    }
                }
            }
            ConstraintForm::EqOffset(x, y, n) => {
                let (dx, dy) = (dom(x)?, dom(y)?);
                if target == x {
                    dx.filter(|v| !dy.contains(v - n))
                } else {
                    dy.filter(|v| !dx.contains(v + n))
                }
            }
            ConstraintForm::NeqOffset(x, y, n) => {
                let (dx, dy) = (dom(x)?, dom(y)?);
                if target == x {
                    match dy.single_value() {
                        Some(v) if dx.contains(v + n) => Domain::singleton(v + n),
                        _ => Domain::empty(),
                    }
                } else {
                    match dx.single_value() {
                        Some(v) if dy.contains(v - n) => Domain::singleton(v - n),
                        _ => Domain::empty(),
                    }
                }
            }
            ConstraintForm::Gt(x, y) => {
                let (dx, dy) = (dom(x)?, dom(y)?);
                if target == x {
                    match dy.min() {
                        Some(min_y) => dx.filter(|v| v <= min_y),
                        None => Domain::empty(),
                    }
                } else {
                    match dx.max() {
                        Some(max_x) => dy.filter(|v| v >= max_x),
                        None => Domain::empty(),
                    }
                }
            }
            ConstraintForm::Geq(x, y) => {
                let (dx, dy) = (dom(x)?, dom(y)?);
                if target == x {
                    match dy.min() {
                        Some(min_y) => dx.filter(|v| v < min_y),
                        None => Domain::empty(),
                    }
                } else {
                    match dx.max() {
                        Some(max_x) => dy.filter(|v| v > max_x),
                        None => Domain::empty(),
                    }
                }
            }
            ConstraintForm::EqConst(x, n) => {
                let dx = dom(x)?;
                dx.filter(|v| v != *n)
            }
            ConstraintForm::NeqConst(x, n) => {
                let dx = dom(x)?;
                if dx.contains(*n) {
                    Domain::singleton(*n)
                } else {
                    Domain::empty()
                }
            }
        };
        Ok(w)
    }

    /// Whether the solved condition holds: no future withdrawal can
    /// invalidate the constraint, so its operators are useless from now on.
    pub fn is_solved(&self, domains: &DomainState) -> bool {
        let dom = |v: &VarRef| domains.get(v).cloned().unwrap_or_else(|_| Domain::empty());
        match self {
            ConstraintForm::Eq(x, y) => {
                let (dx, dy) = (dom(x), dom(y));
                dx.is_singleton() && dx == dy
            }
            ConstraintForm::Neq(x, y) => dom(x).intersect(&dom(y)).is_empty(),
            ConstraintForm::EqOffset(x, y, n) => {
                match (dom(x).single_value(), dom(y).single_value()) {
                    (Some(vx), Some(vy)) => vx == vy + n,
                    _ => false,
                }
            }
            ConstraintForm::NeqOffset(x, y, n) => {
                let (dx, dy) = (dom(x), dom(y));
                let no_support = dy.iter().all(|v| !dx.contains(v + n));
                no_support
            }
            ConstraintForm::Gt(x, y) => match (dom(x).min(), dom(y).max()) {
                (Some(min_x), Some(max_y)) => min_x > max_y,
                _ => false,
            },
            ConstraintForm::Geq(x, y) => match (dom(x).min(), dom(y).max()) {
                (Some(min_x), Some(max_y)) => min_x >= max_y,
                _ => false,
            },
            ConstraintForm::EqConst(x, n) => dom(x).single_value() == Some(*n),
            ConstraintForm::NeqConst(x, n) => !dom(x).contains(*n),
        }
    }

    /// The awakening condition as a disjunct list. The single-variable
    /// forms return the empty list: they are never woken (the active
    /// constraint itself is the only thing that narrows their variable).
    pub fn awakening_condition(&self) -> Vec<(VarRef, UpdateType)> {
        match self {
            ConstraintForm::Eq(x, y) | ConstraintForm::EqOffset(x, y, _) => vec![
                (x.clone(), UpdateType::Any),
                (y.clone(), UpdateType::Any),
            ],
            ConstraintForm::Neq(x, y) | ConstraintForm::NeqOffset(x, y, _) => vec![
                (x.clone(), UpdateType::Ground),
                (y.clone(), UpdateType::Ground),
            ],
            ConstraintForm::Gt(x, y) | ConstraintForm::Geq(x, y) => vec![
                (x.clone(), UpdateType::Max),
                (y.clone(), UpdateType::Min),
            ],
            ConstraintForm::EqConst(..) | ConstraintForm::NeqConst(..) => vec![],
        }
    }

    /// The verified part of the awakening condition against a modification
    /// list, in condition order; empty means the constraint stays asleep.
    pub fn awake_intersection(&self, mods: &[(VarRef, UpdateType)]) -> Vec<(VarRef, UpdateType)> {
        let disjuncts: &[(&VarRef, UpdateType)] = &match self {
            ConstraintForm::Eq(x, y) | ConstraintForm::EqOffset(x, y, _) => {
                [(x, UpdateType::Any), (y, UpdateType::Any)]
            }
            ConstraintForm::Neq(x, y) | ConstraintForm::NeqOffset(x, y, _) => {
                [(x, UpdateType::Ground), (y, UpdateType::Ground)]
            }
            ConstraintForm::Gt(x, y) | ConstraintForm::Geq(x, y) => {
                [(x, UpdateType::Max), (y, UpdateType::Min)]
            }
            ConstraintForm::EqConst(..) | ConstraintForm::NeqConst(..) => return vec![],
        };
        let mut verified = Vec::new();
        for (var, kind) in disjuncts {
            if mods.iter().any(|(mv, mk)| mv == *var && mk == kind) {
                verified.push(((*var).clone(), *kind));
            }
        }
        verified
    }

    /// Ground satisfaction for the brute-force oracle: does the total
    /// assignment satisfy the constraint's mathematical relation?
    pub fn check_satisfied(&self, assignment: impl Fn(&VarRef) -> i64) -> bool {
        match self {
            ConstraintForm::Eq(x, y) => assignment(x) == assignment(y),
            ConstraintForm::Neq(x, y) => assignment(x) != assignment(y),
            ConstraintForm::EqOffset(x, y, n) => assignment(x) == assignment(y) + n,
            ConstraintForm::NeqOffset(x, y, n) => assignment(x) != assignment(y) + n,
            ConstraintForm::Gt(x, y) => assignment(x) > assignment(y),
            ConstraintForm::Geq(x, y) => assignment(x) >= assignment(y),
            ConstraintForm::EqConst(x, n) => assignment(x) == *n,
            ConstraintForm::NeqConst(x, n) => assignment(x) != *n,
        }
    }

    /// The surface rendering: `X#=Y`, `X##Y`, `X#=Y+n`, `X##Y+n`, `X#>Y`,
    /// `X#>=Y`, `X#=n`, `X##n`.
    pub fn render_abstract(&self) -> String {
        match self {
            ConstraintForm::Eq(x, y) => format!("{}#={}", x.name(), y.name()),
            ConstraintForm::Neq(x, y) => format!("{}##{}", x.name(), y.name()),
            ConstraintForm::EqOffset(x, y, n) => format!("{}#={}+{}", x.name(), y.name(), n),
            ConstraintForm::NeqOffset(x, y, n) => format!("{}##{}+{}", x.name(), y.name(), n),
            ConstraintForm::Gt(x, y) => format!("{}#>{}", x.name(), y.name()),
            ConstraintForm::Geq(x, y) => format!("{}#>={}", x.name(), y.name()),
            ConstraintForm::EqConst(x, n) => format!("{}#={}", x.name(), n),
            ConstraintForm::NeqConst(x, n) => format!("{}##{}", x.name(), n),
        }
    }

    /// The internal functor rendering, e.g. `diff(var(1, X), var(2, Y))`
    /// or `assign(var(1, X), 2)`.
    pub fn render_concrete(&self) -> String {
        match self {
            ConstraintForm::Eq(x, y) => format!("equal({x}, {y})"),
            ConstraintForm::Neq(x, y) => format!("diff({x}, {y})"),
            ConstraintForm::EqOffset(x, y, n) => format!("equalN({x}, {y}, {n})"),
            ConstraintForm::NeqOffset(x, y, n) => format!("diffN({x}, {y}, {n})"),
            ConstraintForm::Gt(x, y) => format!("gt({x}, {y})"),
            ConstraintForm::Geq(x, y) => format!("geq({x}, {y})"),
            ConstraintForm::EqConst(x, n) => format!("assign({x}, {n})"),
            ConstraintForm::NeqConst(x, n) => format!("nassign({x}, {n})"),
        }
    }
}

impl fmt::Display for ConstraintForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_abstract())
    }
}

/// A constraint as it lives in the store: the form plus its identity and
/// provenance. The id is assigned by the engine in tell order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintInstance {
    pub id: u64,
    pub abstract_text: Arc<str>,
    pub form: ConstraintForm,
    pub concrete: Arc<str>,
    pub context: Arc<str>,
}

impl ConstraintInstance {
    pub fn new(
        id: u64,
        abstract_text: impl Into<Arc<str>>,
        form: ConstraintForm,
        context: impl Into<Arc<str>>,
    ) -> Self {
        let concrete: Arc<str> = form.render_concrete().into();
        ConstraintInstance {
            id,
            abstract_text: abstract_text.into(),
            form,
            concrete,
            context: context.into(),
        }
    }

    pub fn vars(&self) -> Vec<&VarRef> {
        self.form.vars()
    }
}

impl fmt::Display for ConstraintInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.id, self.abstract_text, self.concrete, self.context
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32, n: &str) -> VarRef {
        VarRef::new(i, n)
    }

    fn d(values: &[i64]) -> Domain {
        Domain::new(values.to_vec())
    }

    fn state(doms: &[(&VarRef, &[i64])]) -> DomainState {
        DomainState::new(
            doms.iter()
                .map(|(var, values)| ((*var).clone(), d(values)))
                .collect(),
        )
    }

    #[test]
    fn reduce_neq_prunes_ground_value() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[3]), (&y, &[2, 3])]);
        let c = ConstraintForm::Neq(x.clone(), y.clone());
        assert_eq!(c.reduce_step(&st, &y).unwrap(), d(&[3]));
        assert_eq!(c.reduce_step(&st, &x).unwrap(), Domain::empty());
    }

    #[test]
    fn reduce_gt_removes_unsupported_low_values() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[1, 2, 3]), (&y, &[1, 2, 3])]);
        let c = ConstraintForm::Gt(x.clone(), y.clone());
        assert_eq!(c.reduce_step(&st, &x).unwrap(), d(&[1]));
    }

    #[test]
    fn reduce_geq_trims_high_values_of_rhs() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[2]), (&y, &[2, 3])]);
        let c = ConstraintForm::Geq(x.clone(), y.clone());
        assert_eq!(c.reduce_step(&st, &y).unwrap(), d(&[3]));
    }

    #[test]
    fn reduce_eq_const_withdraws_everything_else() {
        let x = v(1, "X");
        let st = state(&[(&x, &[2, 3])]);
        let c = ConstraintForm::EqConst(x.clone(), 2);
        assert_eq!(c.reduce_step(&st, &x).unwrap(), d(&[3]));
    }

    #[test]
    fn reduce_eq_with_equal_domains_is_noop() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[1, 2]), (&y, &[1, 2])]);
        let c = ConstraintForm::Eq(x.clone(), y.clone());
        assert_eq!(c.reduce_step(&st, &x).unwrap(), Domain::empty());
    }

    #[test]
    fn reduce_rejects_foreign_variable() {
        let (x, y, z) = (v(1, "X"), v(2, "Y"), v(3, "Z"));
        let st = state(&[(&x, &[1]), (&y, &[1]), (&z, &[1])]);
        let c = ConstraintForm::Eq(x, y);
        assert!(matches!(
            c.reduce_step(&st, &z),
            Err(CatalogError::VarNotInConstraint { .. })
        ));
    }

    #[test]
    fn reduce_eq_offset_both_sides() {
        // X #= Y + 1 with X in {2}, Y in {1,2}: Y=2 has no support.
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[2]), (&y, &[1, 2])]);
        let c = ConstraintForm::EqOffset(x.clone(), y.clone(), 1);
        assert_eq!(c.reduce_step(&st, &y).unwrap(), d(&[2]));
        assert_eq!(c.reduce_step(&st, &x).unwrap(), Domain::empty());
    }

    #[test]
    fn solved_geq_on_bound_meet() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[2]), (&y, &[2])]);
        assert!(ConstraintForm::Geq(x, y).is_solved(&st));
    }

    #[test]
    fn solved_neq_on_disjoint_domains() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[3]), (&y, &[2])]);
        assert!(ConstraintForm::Neq(x, y).is_solved(&st));
    }

    #[test]
    fn eq_not_solved_until_ground() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let st = state(&[(&x, &[1, 2]), (&y, &[1, 2])]);
        assert!(!ConstraintForm::Eq(x, y).is_solved(&st));
    }

    #[test]
    fn awakening_conditions_match_catalog() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        assert_eq!(
            ConstraintForm::Neq(x.clone(), y.clone()).awakening_condition(),
            vec![(x.clone(), UpdateType::Ground), (y.clone(), UpdateType::Ground)]
        );
        assert_eq!(
            ConstraintForm::Gt(x.clone(), y.clone()).awakening_condition(),
            vec![(x.clone(), UpdateType::Max), (y.clone(), UpdateType::Min)]
        );
        assert_eq!(ConstraintForm::EqConst(x.clone(), 2).awakening_condition(), vec![]);
    }

    #[test]
    fn awake_intersection_keeps_condition_order() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let c = ConstraintForm::Geq(x.clone(), y.clone());
        let mods = vec![
            (x.clone(), UpdateType::Any),
            (x.clone(), UpdateType::Ground),
            (x.clone(), UpdateType::Max),
        ];
        assert_eq!(c.awake_intersection(&mods), vec![(x.clone(), UpdateType::Max)]);
        let unrelated = vec![(y.clone(), UpdateType::Max)];
        assert!(c.awake_intersection(&unrelated).is_empty());
    }

    #[test]
    fn check_satisfied_examples() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let asg = |var: &VarRef| if var.name() == "X" { 3 } else { 2 };
        assert!(ConstraintForm::Gt(x.clone(), y.clone()).check_satisfied(asg));
        assert!(!ConstraintForm::NeqOffset(x.clone(), y.clone(), 1).check_satisfied(asg));
        assert!(ConstraintForm::EqConst(x.clone(), 3).check_satisfied(asg));
    }

    #[test]
    fn renderings() {
        let (x, y) = (v(1, "X"), v(2, "Y"));
        let c = ConstraintForm::Neq(x.clone(), y.clone());
        assert_eq!(c.render_abstract(), "X##Y");
        assert_eq!(c.render_concrete(), "diff(var(1, X), var(2, Y))");
        let a = ConstraintForm::EqConst(x.clone(), 2);
        assert_eq!(a.render_abstract(), "X#=2");
        assert_eq!(a.render_concrete(), "assign(var(1, X), 2)");
        assert_eq!(
            ConstraintForm::NeqOffset(x.clone(), y.clone(), 2).render_abstract(),
            "X##Y+2"
        );
    }
}
