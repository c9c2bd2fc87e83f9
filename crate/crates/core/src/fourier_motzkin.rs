//! Exact feasibility of strict homogeneous systems `c_i . x > 0` over the
//! rationals: Fourier–Motzkin elimination while the projected systems stay
//! small, an exact simplex once they would not.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmError {
    #[error("constraint has {found} coefficients, expected {expected}")]
    Width { expected: usize, found: usize },
}

/// Largest projected system elimination is allowed to build before the
/// simplex takes over.
pub const DEFAULT_CAP: usize = 4_000;

/// Divides by the absolute value of the first nonzero entry so that positive
/// multiples coincide.
fn normalise(c: &mut [Q]) {
    if let Some(lead) = c.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        if !lead.is_one() {
            for x in c.iter_mut() {
                *x /= &lead;
            }
        }
    }
}

fn dedup(system: Vec<Vec<Q>>) -> Vec<Vec<Q>> {
    let mut seen = HashSet::new();
    system
        .into_iter()
        .map(|mut c| {
            normalise(&mut c);
            c
        })
        .filter(|c| seen.insert(c.clone()))
        .collect()
}

fn dot(c: &[Q], x: &[Q]) -> Q {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Is there a rational `x` with `c . x > 0` for every row? Returns such a
/// point (inside the unit cube) when one exists.
pub fn strict_feasible(system: &[Vec<Q>], n: usize, cap: usize) -> Result<Option<Vec<Q>>, FmError> {
    for c in system {
        if c.len() != n {
            return Err(FmError::Width {
                expected: n,
                found: c.len(),
            });
        }
    }
    let rows = dedup(system.to_vec());
    if rows.iter().any(|c| c.iter().all(Zero::is_zero)) {
        return Ok(None);
    }
    let x = match eliminate(&rows, n, cap) {
        Some(answer) => answer,
        None => simplex(&rows, n),
    };
    debug_assert!(x.as_ref().is_none_or(|x| system.iter().all(|c| dot(c, x).is_positive())));
    Ok(x)
}

/// `None` when some projection would exceed `cap` rows.
fn eliminate(system: &[Vec<Q>], n: usize, cap: usize) -> Option<Option<Vec<Q>>> {
    // stages[k] mentions only variables k..n
    let mut stages: Vec<Vec<Vec<Q>>> = Vec::with_capacity(n + 1);
    let mut current = system.to_vec();
    let mut x = vec![Q::zero(); n];
    let mut solved = n;
    for k in 0..n {
        if current.iter().any(|c| c.iter().all(Zero::is_zero)) {
            return Some(None);
        }
        if k + 2 == n {
            let Some((u, v)) = plane(&current, k) else {
                return Some(None);
            };
            x[k] = u;
            x[k + 1] = v;
            solved = k;
            current.clear();
            break;
        }
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in &current {
            if c[k].is_positive() {
                pos.push(c);
            } else if c[k].is_negative() {
                neg.push(c);
            } else {
                rest.push(c.clone());
            }
        }
        if rest.len() + pos.len() * neg.len() > cap {
            return None;
        }
        for p in &pos {
            for m in &neg {
                let (a, b) = (p[k].clone(), -m[k].clone());
                let combined: Vec<Q> = p.iter().zip(m.iter()).map(|(x, y)| x * &b + y * &a).collect();
                rest.push(combined);
            }
        }
        stages.push(current);
        current = dedup(rest);
    }
    if !current.is_empty() {
        return Some(None);
    }

    for k in (0..solved).rev() {
        let mut lower: Option<Q> = None;
        let mut upper: Option<Q> = None;
        for c in &stages[k] {
            if c[k].is_zero() {
                continue;
            }
            // c_k x_k + r > 0
            let r = dot(c, &x) - &c[k] * &x[k];
            let bound = -r / &c[k];
            if c[k].is_positive() {
                if lower.as_ref().is_none_or(|l| bound > *l) {
                    lower = Some(bound);
                }
            } else if upper.as_ref().is_none_or(|u| bound < *u) {
                upper = Some(bound);
            }
        }
        x[k] = match (lower, upper) {
            (Some(l), Some(u)) => (l + u) / Q::from_integer(2.into()),
            (Some(l), None) => l.floor() + Q::one(),
            (None, Some(u)) => u.ceil() - Q::one(),
            (None, None) => Q::zero(),
        };
    }
    let scale = x.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero);
    if scale > Q::one() {
        for v in &mut x {
            *v /= &scale;
        }
    }
    Some(Some(x))
}

/// Two remaining variables: every direction strictly inside the half-plane
/// of the first constraint is a positive multiple of `c0 + s w` with `w`
/// orthogonal to `c0`, and each other constraint bounds `s` on one side.
fn plane(rows: &[Vec<Q>], k: usize) -> Option<(Q, Q)> {
    let Some(first) = rows.first() else {
        return Some((Q::zero(), Q::zero()));
    };
    let (u0, v0) = (&first[k], &first[k + 1]);
    let w = (-v0.clone(), u0.clone());
    let mut lower: Option<Q> = None;
    let mut upper: Option<Q> = None;
    for c in rows {
        let (u, v) = (&c[k], &c[k + 1]);
        let alpha = u * u0 + v * v0;
        let beta = u * &w.0 + v * &w.1;
        if beta.is_zero() {
            if !alpha.is_positive() {
                return None;
            }
            continue;
        }
        let bound = -alpha / &beta;
        if beta.is_positive() {
            if lower.as_ref().is_none_or(|l| bound > *l) {
                lower = Some(bound);
            }
        } else if upper.as_ref().is_none_or(|h| bound < *h) {
            upper = Some(bound);
        }
    }
    let s = match (lower, upper) {
        (Some(l), Some(h)) if l >= h => return None,
        (Some(l), Some(h)) => (l + h) / Q::from_integer(2.into()),
        (Some(l), None) => l.floor() + Q::one(),
        (None, Some(h)) => h.ceil() - Q::one(),
        (None, None) => Q::zero(),
    };
    Some((u0 + &s * &w.0, v0 + &s * &w.1))
}

/// Maximises `t` subject to `c_i . x >= t`, `|x_j| <= 1`, `0 <= t <= 1`,
/// writing `x = p - m` with `0 <= p, m <= 1`. The system is feasible exactly
/// when the optimum is positive; the search stops at the first vertex with
/// `t > 0`. Dictionary form with Bland's rule, so it terminates.
fn simplex(system: &[Vec<Q>], n: usize) -> Option<Vec<Q>> {
    let cols = 2 * n + 1;
    let t_col = 2 * n;
    // each row reads: basic = rhs - sum_j a[j] * nonbasic_j
    let mut a: Vec<Vec<Q>> = Vec::with_capacity(system.len() + cols);
    let mut rhs: Vec<Q> = Vec::with_capacity(system.len() + cols);
    for c in system {
        let mut row = Vec::with_capacity(cols);
        row.extend(c.iter().map(|v| -v));
        row.extend(c.iter().cloned());
        row.push(Q::one());
        a.push(row);
        rhs.push(Q::zero());
    }
    for j in 0..cols {
        let mut row = vec![Q::zero(); cols];
        row[j] = Q::one();
        a.push(row);
        rhs.push(Q::one());
    }
    // variable ids: 0..cols are the structural ones, cols.. the slacks
    let mut nonbasic: Vec<usize> = (0..cols).collect();
    let mut basic: Vec<usize> = (cols..cols + a.len()).collect();
    let mut obj = vec![Q::zero(); cols];
    obj[t_col] = Q::one();
    let mut value = Q::zero();

    loop {
        if value.is_positive() {
            let mut y = vec![Q::zero(); cols];
            for (r, &b) in basic.iter().enumerate() {
                if b < cols {
                    y[b] = rhs[r].clone();
                }
            }
            return Some((0..n).map(|j| &y[j] - &y[n + j]).collect());
        }
        let j = (0..cols).filter(|&j| obj[j].is_positive()).min_by_key(|&j| nonbasic[j])?;
        let mut leave: Option<(usize, Q)> = None;
        for r in 0..a.len() {
            if !a[r][j].is_positive() {
                continue;
            }
            let ratio = &rhs[r] / &a[r][j];
            let better = match &leave {
                None => true,
                Some((s, best)) => ratio < *best || (ratio == *best && basic[r] < basic[*s]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        // every variable is bounded, so some row always limits the step
        let (r, _) = leave.expect("bounded problem");

        let p = a[r][j].clone();
        for k in 0..cols {
            if k != j {
                a[r][k] /= &p;
            }
        }
        a[r][j] = Q::one() / &p;
        rhs[r] /= &p;
        let pivot_row = a[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..a.len() {
            if i == r || a[i][j].is_zero() {
                continue;
            }
            let f = a[i][j].clone();
            for k in 0..cols {
                if k != j {
                    let d = &f * &pivot_row[k];
                    a[i][k] -= d;
                }
            }
            a[i][j] = -(&f * &pivot_row[j]);
            rhs[i] -= &f * &pivot_rhs;
        }
        let f = obj[j].clone();
        for k in 0..cols {
            if k != j {
                obj[k] -= &f * &pivot_row[k];
            }
        }
        obj[j] = -(&f * &pivot_row[j]);
        value += &f * &pivot_rhs;
        std::mem::swap(&mut nonbasic[j], &mut basic[r]);
    }
}
