//! The model language frontend and built-in problem generators.
//!
//! A model file (`.fd`, UTF-8, `%` line comments) declares variables with
//! their initial domains, states constraints over the eight primitive
//! forms, and optionally names a labelling directive:
//!
//! ```text
//! % sort three numbers
//! var X in 1..3; var Y in 1..3; var Z in 1..3;
//! X ## Y; X #>= Y; Y #> Z;
//! label [X, Y, Z] var first_fail val min;
//! ```
//!
//! `[X, Y, Z] :: 1..3;` declares several variables over the same range at
//! once, and `var X in {1,3,5};` gives a non-contiguous initial domain.
//! `#\=` is accepted as an alias for `##`. Offsets are normalized: a zero
//! offset collapses to the plain form and a negative one swaps sides
//! (`X #= Y + -2` becomes `Y#=X+2`), so every stored constraint is one of
//! the eight primitive forms with the abstract text rendered canonically.

mod parse;

pub use parse::{parse_constraint_text, parse_model, ModelParseError, ParseErrorKind};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraint::ConstraintForm;
use crate::domain::{Domain, VarRef};
use crate::search::{ValStrategy, VarStrategy};

/// A constraint of a model: its primitive form, the canonical source
/// rendering, and the invocation context recorded in trace events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConstraint {
    pub form: ConstraintForm,
    pub abstract_text: String,
    pub context: String,
}

/// The labelling directive: which variables to enumerate and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labelling {
    pub vars: Vec<VarRef>,
    pub var_strategy: VarStrategy,
    pub val_strategy: ValStrategy,
}

impl Labelling {
    /// The invocation context recorded for labelling constraints, e.g.
    /// `labelling([X, Y, Z])`.
    pub fn context_string(&self) -> String {
        let names: Vec<&str> = self.vars.iter().map(VarRef::name).collect();
        format!("labelling([{}])", names.join(", "))
    }
}

/// A parsed problem: variables with initial domains, constraints in
/// declaration order, and an optional labelling directive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub variables: Vec<(VarRef, Domain)>,
    pub constraints: Vec<ModelConstraint>,
    pub labelling: Option<Labelling>,
}

impl Model {
    pub fn var_by_name(&self, name: &str) -> Option<&VarRef> {
        self.variables
            .iter()
            .map(|(v, _)| v)
            .find(|v| v.name() == name)
    }

    /// Renders the model in the canonical syntax; `parse_model` returns an
    /// equal model when fed the result.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (var, dom) in &self.variables {
            let contiguous = match (dom.min(), dom.max()) {
                (Some(lo), Some(hi)) => dom.len() as i64 == hi - lo + 1,
                _ => false,
            };
            if contiguous {
                out.push_str(&format!(
                    "var {} in {}..{};\n",
                    var.name(),
                    dom.min().unwrap(),
                    dom.max().unwrap()
                ));
            } else {
                let values: Vec<String> = dom.iter().map(|v| v.to_string()).collect();
                out.push_str(&format!("var {} in {{{}}};\n", var.name(), values.join(",")));
            }
        }
        for c in &self.constraints {
            out.push_str(&c.abstract_text);
            out.push_str(";\n");
        }
        if let Some(lab) = &self.labelling {
            let names: Vec<&str> = lab.vars.iter().map(VarRef::name).collect();
            out.push_str(&format!(
                "label [{}] var {} val {};\n",
                names.join(", "),
                lab.var_strategy,
                lab.val_strategy
            ));
        }
        out
    }
}

/// The three-variable sorting example: `X ## Y, X #>= Y, Y #> Z` over
/// `1..3`, labelled first-fail with ascending values. Its unique solution
/// is `{X:3, Y:2, Z:1}`.
pub fn generate_sorted() -> Model {
    let x = VarRef::new(1, "X");
    let y = VarRef::new(2, "Y");
    let z = VarRef::new(3, "Z");
    let context = "sorted([X, Y, Z])".to_string();
    let dom = Domain::from_range(1, 3);
    let constraint = |form: ConstraintForm| {
        let abstract_text = form.render_abstract();
        ModelConstraint { form, abstract_text, context: context.clone() }
    };
    Model {
        name: "sorted".into(),
        variables: vec![(x.clone(), dom.clone()), (y.clone(), dom.clone()), (z.clone(), dom)],
        constraints: vec![
            constraint(ConstraintForm::Neq(x.clone(), y.clone())),
            constraint(ConstraintForm::Geq(x.clone(), y.clone())),
            constraint(ConstraintForm::Gt(y.clone(), z.clone())),
        ],
        labelling: Some(Labelling {
            vars: vec![x, y, z],
            var_strategy: VarStrategy::FirstFail,
            val_strategy: ValStrategy::Min,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("n-queens needs n >= 1, got {0}")]
    QueensTooSmall(u32),
}

/// The n-queens problem over the primitive constraints: `Qi` is the column
/// of the queen in row `i`; rows differ pairwise in column and in both
/// diagonals (`Qi ## Qj`, `Qi ## Qj + d`, `Qj ## Qi + d` with `d = j - i`).
pub fn generate_nqueens(n: u32) -> Result<Model, GenerateError> {
    if n < 1 {
        return Err(GenerateError::QueensTooSmall(n));
    }
    let context = format!("nqueens({n})");
    let vars: Vec<VarRef> = (1..=n)
        .map(|i| VarRef::new(i, format!("Q{i}").as_str()))
        .collect();
    let dom = Domain::from_range(1, n as i64);
    let mut constraints = Vec::new();
    let mut add = |form: ConstraintForm| {
        let abstract_text = form.render_abstract();
        constraints.push(ModelConstraint { form, abstract_text, context: context.clone() });
    };
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let d = (j - i) as i64;
            add(ConstraintForm::Neq(vars[i].clone(), vars[j].clone()));
            add(ConstraintForm::NeqOffset(vars[i].clone(), vars[j].clone(), d));
            add(ConstraintForm::NeqOffset(vars[j].clone(), vars[i].clone(), d));
        }
    }
    Ok(Model {
        name: format!("nqueens{n}"),
        variables: vars.iter().cloned().map(|v| (v, dom.clone())).collect(),
        constraints,
        labelling: Some(Labelling {
            vars,
            var_strategy: VarStrategy::FirstFail,
            val_strategy: ValStrategy::Min,
        }),
    })
}

/// A small seeded random model for differential testing against the
/// brute-force oracle: up to 4 variables with domains inside `1..6`, up to
/// 6 random primitive constraints, all variables labelled. The same seed
/// always yields the same model.
pub fn generate_random(seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let context = format!("random({seed})");
    let names = ["X", "Y", "Z", "W"];
    let nvars = rng.random_range(1..=4usize);
    let mut variables = Vec::new();
    for (i, name) in names.iter().enumerate().take(nvars) {
        let dom = loop {
            let values: Vec<i64> = (1..=6).filter(|_| rng.random_bool(0.5)).collect();
            if !values.is_empty() {
                break Domain::new(values);
            }
        };
        variables.push((VarRef::new(i as u32 + 1, *name), dom));
    }
    let vars: Vec<VarRef> = variables.iter().map(|(v, _)| v.clone()).collect();

    let ncons = rng.random_range(0..=6usize);
    let mut constraints = Vec::new();
    for _ in 0..ncons {
        let form = if nvars < 2 {
            match rng.random_range(0..2) {
                0 => ConstraintForm::EqConst(vars[0].clone(), rng.random_range(0..=7)),
                _ => ConstraintForm::NeqConst(vars[0].clone(), rng.random_range(0..=7)),
            }
        } else {
            let xi = rng.random_range(0..nvars);
            let yi = loop {
                let j = rng.random_range(0..nvars);
                if j != xi {
                    break j;
                }
            };
            let (x, y) = (vars[xi].clone(), vars[yi].clone());
            match rng.random_range(0..8) {
                0 => ConstraintForm::Eq(x, y),
                1 => ConstraintForm::Neq(x, y),
                2 => ConstraintForm::EqOffset(x, y, rng.random_range(1..=4)),
                3 => ConstraintForm::NeqOffset(x, y, rng.random_range(1..=4)),
                4 => ConstraintForm::Gt(x, y),
                5 => ConstraintForm::Geq(x, y),
                6 => ConstraintForm::EqConst(x, rng.random_range(0..=7)),
                _ => ConstraintForm::NeqConst(x, rng.random_range(0..=7)),
            }
        };
        let abstract_text = form.render_abstract();
        constraints.push(ModelConstraint { form, abstract_text, context: context.clone() });
    }

    let var_strategy = match rng.random_range(0..3) {
        0 => VarStrategy::InputOrder,
        1 => VarStrategy::FirstFail,
        _ => VarStrategy::MiddleFirst,
    };
    let val_strategy = if rng.random_bool(0.5) { ValStrategy::Min } else { ValStrategy::Middle };

    Model {
        name: format!("random{seed}"),
        variables,
        constraints,
        labelling: Some(Labelling { vars, var_strategy, val_strategy }),
    }
}
