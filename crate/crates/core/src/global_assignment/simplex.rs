//! Dense tableau simplex with Bland's rule, generic over the scalar type.
//!
//! Exact rationals give exact optima; `f64` runs with pivot tolerance
//! [`FLOAT_PIVOT_EPS`](crate::numeric::FLOAT_PIVOT_EPS).

use crate::error::LpError;
use crate::numeric::Scalar;

const MAX_PIVOTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    /// Primal solution, one entry per structural column.
    pub x: Vec<T>,
    /// Dual prices, one entry per constraint row.
    pub dual: Vec<T>,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs `z_j - c_j`; the last entry holds the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, i: usize) -> &T {
        self.rows[i].last().expect("tableau rows are non-empty")
    }

    fn entering(&self) -> Option<usize> {
        let ncols = self.obj.len() - 1;
        (0..ncols).find(|&j| self.obj[j].is_negative_tol())
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row[col].is_positive_tol() {
                continue;
            }
            let ratio = self.rhs(i).clone() / row[col].clone();
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let diff = ratio.clone() - br.clone();
                    if diff.is_negative_tol() || (diff.is_zero_tol() && self.basis[i] < self.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |target: &mut Vec<T>| {
            let f = target[c].clone();
            if f.is_zero() {
                return;
            }
            for (t, pv) in target.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *t = t.clone() - f.clone() * pv.clone();
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.basis[r] = c;
    }

    fn run(&mut self) -> Result<(), LpError> {
        for _ in 0..MAX_PIVOTS {
            let Some(col) = self.entering() else {
                return Ok(());
            };
            let row = self.leaving(col).ok_or(LpError::Unbounded)?;
            self.pivot(row, col);
        }
        Err(LpError::Unbounded)
    }

    fn column_values(&self, ncols: usize) -> Vec<T> {
        let mut x = vec![T::zero(); ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < ncols {
                x[b] = self.rhs(i).clone();
            }
        }
        x
    }
}

/// Maximizes `c·x` subject to `A x <= b`, `x >= 0`, with `b >= 0`.
///
/// The slack basis is feasible because `b >= 0`, so no phase one is needed.
/// `a` is given row-major.
pub fn maximize_le<T: Scalar>(a: &[Vec<T>], b: &[T], c: &[T]) -> Result<LpSolution<T>, LpError> {
    let m = a.len();
    let n = c.len();
    let mut rows = Vec::with_capacity(m);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        debug_assert_eq!(ai.len(), n);
        debug_assert!(!bi.is_negative_tol());
        let mut row = Vec::with_capacity(n + m + 1);
        row.extend(ai.iter().cloned());
        row.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        row.push(bi.clone());
        rows.push(row);
    }
    let mut obj: Vec<T> = c.iter().map(|cj| -cj.clone()).collect();
    obj.extend(std::iter::repeat_n(T::zero(), m + 1));
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
    };
    t.run()?;
    Ok(LpSolution {
        value: t.obj[n + m].clone(),
        x: t.column_values(n),
        dual: t.obj[n..n + m].to_vec(),
    })
}

/// Phase-one feasibility of `A x = b`, `x >= 0`, with `b >= 0`.
///
/// Returns a feasible `x` when one exists. Redundant equality rows are
/// allowed; their artificials stay basic at zero.
pub fn feasible_eq<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Result<Option<Vec<T>>, LpError> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut rows = Vec::with_capacity(m);
    let mut obj = vec![T::zero(); n + m + 1];
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let mut row = Vec::with_capacity(n + m + 1);
        row.extend(ai.iter().cloned());
        row.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
        row.push(bi.clone());
        // Artificial costs are -1 in the maximization; price them out of the
        // objective row.
        for (j, v) in ai.iter().enumerate() {
            obj[j] = obj[j].clone() - v.clone();
        }
        obj[n + m] = obj[n + m].clone() - bi.clone();
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
    };
    t.run()?;
    if t.obj[n + m].is_zero_tol() {
        Ok(Some(t.column_values(n)))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let a = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(2, 1)], vec![q(3, 1), q(2, 1)]];
        let b = vec![q(4, 1), q(12, 1), q(18, 1)];
        let c = vec![q(3, 1), q(5, 1)];
        let sol = maximize_le(&a, &b, &c).unwrap();
        assert_eq!(sol.value, q(36, 1));
        assert_eq!(sol.x, vec![q(2, 1), q(6, 1)]);
        // Strong duality: b·y equals the optimum.
        let by = b.iter().zip(&sol.dual).fold(q(0, 1), |acc, (bi, yi)| acc + bi * yi);
        assert_eq!(by, q(36, 1));
        assert!(sol.dual.iter().all(|y| y >= &q(0, 1)));
    }

    #[test]
    fn float_matches_exact() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let sol = maximize_le(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0]).unwrap();
        assert!((sol.value - 36.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        // max x - y s.t. -x + y <= 1
        let a = vec![vec![q(-1, 1), q(1, 1)]];
        assert_eq!(maximize_le(&a, &[q(1, 1)], &[q(1, 1), q(-1, 1)]), Err(LpError::Unbounded));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // A classic cycling example for the largest-coefficient rule (Beale).
        let a = vec![
            vec![q(1, 4), q(-8, 1), q(-1, 1), q(9, 1)],
            vec![q(1, 2), q(-12, 1), q(-1, 2), q(3, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)],
        ];
        let b = vec![q(0, 1), q(0, 1), q(1, 1)];
        let c = vec![q(3, 4), q(-20, 1), q(1, 2), q(-6, 1)];
        let sol = maximize_le(&a, &b, &c).unwrap();
        assert_eq!(sol.value, q(5, 4));
    }

    #[test]
    fn equality_feasibility() {
        // x + y = 1, x - y = 0 -> (1/2, 1/2)
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)]];
        let x = feasible_eq(&a, &[q(1, 1), q(0, 1)]).unwrap().unwrap();
        assert_eq!(x, vec![q(1, 2), q(1, 2)]);
        // x + y = 1, x + y = 2 is infeasible.
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        assert_eq!(feasible_eq(&a, &[q(1, 1), q(2, 1)]).unwrap(), None);
        // Redundant rows are fine.
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        assert!(feasible_eq(&a, &[q(1, 1), q(2, 1)]).unwrap().is_some());
    }
}
