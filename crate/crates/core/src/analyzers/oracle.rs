//! Brute-force oracle: enumerates the Cartesian product of the initial
//! domains and keeps the assignments satisfying every model constraint.
//! Ground truth for differential testing of the solver.

use std::collections::BTreeSet;

use crate::model::Model;
use crate::search::Solution;

/// Upper bound on the number of assignments the oracle will enumerate.
pub const ORACLE_SIZE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("search space of {size} assignments exceeds the oracle limit of {limit}")]
    SearchSpaceTooLarge { size: u128, limit: u128 },
}

/// All solutions of the model, by exhaustive enumeration.
pub fn oracle_solve(model: &Model) -> Result<BTreeSet<Solution>, OracleError> {
    let size: u128 = model
        .variables
        .iter()
        .map(|(_, d)| d.len() as u128)
        .product();
    if size > ORACLE_SIZE_LIMIT {
        return Err(OracleError::SearchSpaceTooLarge { size, limit: ORACLE_SIZE_LIMIT });
    }

    let mut solutions = BTreeSet::new();
    if model.variables.iter().any(|(_, d)| d.is_empty()) {
        return Ok(solutions);
    }
    let domains: Vec<&[i64]> = model.variables.iter().map(|(_, d)| d.values()).collect();
    let mut cursor = vec![0usize; domains.len()];
    loop {
        let values: Vec<i64> = cursor.iter().zip(&domains).map(|(&i, d)| d[i]).collect();
        let assignment = |v: &crate::domain::VarRef| values[v.index() as usize - 1];
        if model.constraints.iter().all(|c| c.form.check_satisfied(assignment)) {
            solutions.insert(Solution(
                model
                    .variables
                    .iter()
                    .map(|(v, _)| v.clone())
                    .zip(values.iter().copied())
                    .collect(),
            ));
        }
        // Odometer step.
        let mut pos = cursor.len();
        loop {
            if pos == 0 {
                return Ok(solutions);
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < domains[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_nqueens, generate_sorted, parse_model};

    #[test]
    fn sorted_has_exactly_one_solution() {
        let solutions = oracle_solve(&generate_sorted()).unwrap();
        assert_eq!(solutions.len(), 1);
        assert_eq!(solutions.iter().next().unwrap().to_string(), "{X:3, Y:2, Z:1}");
    }

    #[test]
    fn four_queens_has_two_solutions() {
        let solutions = oracle_solve(&generate_nqueens(4).unwrap()).unwrap();
        let tuples: BTreeSet<Vec<i64>> = solutions
            .iter()
            .map(|s| s.0.values().copied().collect())
            .collect();
        assert_eq!(
            tuples,
            BTreeSet::from([vec![2, 4, 1, 3], vec![3, 1, 4, 2]])
        );
    }

    #[test]
    fn unconstrained_variable_enumerates_its_domain() {
        let model = parse_model("var X in 1..2;", "m").unwrap();
        let solutions = oracle_solve(&model).unwrap();
        let values: Vec<i64> = solutions.iter().map(|s| s.get("X").unwrap()).collect();
        assert_eq!(values, vec![1, 2]);
    }

    #[test]
    fn size_guard_trips() {
        let model = generate_nqueens(12).unwrap();
        assert!(matches!(
            oracle_solve(&model),
            Err(OracleError::SearchSpaceTooLarge { .. })
        ));
    }
}
