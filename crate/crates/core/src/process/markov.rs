use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Stationary law and second-largest eigenvalue modulus of a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ChainAnalysis {
    pub stationary: Vec<f64>,
    pub slem: f64,
}

pub(crate) fn analyze(transition: &[Vec<f64>]) -> Result<ChainAnalysis> {
    let n = transition.len();
    if n == 0 {
        return Err(Error::Structural("transition matrix is empty".into()));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Structural(format!(
                "transition matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Structural(format!(
                "not stochastic: row {i} has a negative or non-finite entry"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Structural(format!(
                "not stochastic: row {i} sums to {sum}"
            )));
        }
    }

    if !strongly_connected(transition) {
        return Err(Error::Structural("chain is reducible".into()));
    }
    let period = period(transition);
    if period != 1 {
        return Err(Error::Structural(format!("chain is periodic with period {period}")));
    }

    let stationary = stationary_distribution(transition)?;
    let slem = second_eigenvalue_modulus(transition);
    Ok(ChainAnalysis { stationary, slem })
}

fn reachable(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && edge(u, v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn strongly_connected(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    reachable(n, |u, v| p[u][v] > 0.0).into_iter().all(|b| b)
        && reachable(n, |u, v| p[v][u] > 0.0).into_iter().all(|b| b)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Period of an irreducible chain: gcd of level[u] + 1 - level[v] over all edges u -> v,
// with levels taken from a BFS rooted at state 0.
fn period(p: &[Vec<f64>]) -> u64 {
    let n = p.len();
    let mut level = vec![u64::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if p[u][v] > 0.0 && level[v] == u64::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for u in 0..n {
        for v in 0..n {
            if p[u][v] > 0.0 {
                g = gcd(g, (level[u] + 1).abs_diff(level[v]));
            }
        }
    }
    g
}

fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // (Pᵀ − I) π = 0 with the last equation replaced by Σπ = 1.
    let mut a = DMatrix::from_fn(n, n, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Structural("stationary distribution is not unique".into()))?;
    let mut pi: Vec<f64> = pi.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    Ok(pi)
}

fn second_eigenvalue_modulus(p: &[Vec<f64>]) -> f64 {
    let n = p.len();
    if n == 1 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| p[i][j]);
    let mut moduli: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli[1]
}
