//! Dense two-phase simplex for the small equality-form linear programs the
//! projection solvers need: feasibility of L ∩ Δ(X), the max-min-mass
//! program, and per-coordinate support detection.
//!
//! Problems here have |X|+O(1) variables and k+O(|X|) rows, so a dense
//! tableau with Bland's anti-cycling rule is plenty.

use crate::error::{AlphaError, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-8;
const MAX_PIVOTS: usize = 50_000;

pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Maximize `c·x` subject to `A x = b`, `x ≥ 0`. `None` means infeasible.
pub(crate) fn solve_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Option<LpSolution>> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    // rows normalized to rhs ≥ 0, artificial identity appended
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        debug_assert_eq!(a[i].len(), n);
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for j in 0..n {
            row[j] = flip * a[i][j];
        }
        row[n + i] = 1.0;
        row[width - 1] = flip * b[i];
        tab.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: drive Σ artificials to zero
    let mut cost1 = vec![0.0; n + m];
    for cj in cost1.iter_mut().skip(n) {
        *cj = -1.0;
    }
    let v1 = run_simplex(&mut tab, &mut basis, &cost1, n + m)?;
    if v1 < -FEAS_EPS {
        return Ok(None);
    }
    purge_artificials(&mut tab, &mut basis, n);

    // phase 2: only structural columns may enter
    let mut cost2 = vec![0.0; n + m];
    cost2[..n].copy_from_slice(c);
    let objective = run_simplex(&mut tab, &mut basis, &cost2, n)?;

    let mut x = vec![0.0; n];
    let w = tab.first().map_or(width, Vec::len);
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab[i][w - 1];
        }
    }
    Ok(Some(LpSolution { x, objective }))
}

/// Bland's-rule primal simplex on a tableau already in basic feasible form.
/// `enter_limit` bounds which columns may enter (structural-only in phase 2).
fn run_simplex(
    tab: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    enter_limit: usize,
) -> Result<f64> {
    let m = tab.len();
    if m == 0 {
        return Ok(0.0);
    }
    let width = tab[0].len();
    for _ in 0..MAX_PIVOTS {
        // reduced costs r_j = c_j − c_B·(column j of the current tableau)
        let mut enter = None;
        for j in 0..enter_limit {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cost[basis[i]] * tab[i][j];
            }
            if r > PIVOT_EPS {
                enter = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(jcol) = enter else {
            let obj = (0..m).map(|i| cost[basis[i]] * tab[i][width - 1]).sum();
            return Ok(obj);
        };
        // ratio test; ties broken by smallest basis index (Bland)
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if tab[i][jcol] > PIVOT_EPS {
                let ratio = tab[i][width - 1] / tab[i][jcol];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_EPS
                            || (ratio < lr + PIVOT_EPS && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((irow, _)) = leave else {
            // unbounded; cannot happen for the programs built in this module
            return Err(AlphaError::NotConverged { iters: MAX_PIVOTS });
        };
        pivot(tab, irow, jcol);
        basis[irow] = jcol;
    }
    Err(AlphaError::NotConverged { iters: MAX_PIVOTS })
}

fn pivot(tab: &mut [Vec<f64>], irow: usize, jcol: usize) {
    let width = tab[0].len();
    let piv = tab[irow][jcol];
    for v in tab[irow].iter_mut() {
        *v /= piv;
    }
    for i in 0..tab.len() {
        if i == irow {
            continue;
        }
        let factor = tab[i][jcol];
        if factor != 0.0 {
            for j in 0..width {
                let delta = factor * tab[irow][j];
                tab[i][j] -= delta;
            }
            tab[i][jcol] = 0.0;
        }
    }
}

/// After phase 1: pivot basic artificials onto structural columns where
/// possible; rows where impossible are redundant and get deleted so a basic
/// artificial can never drift off zero in phase 2.
fn purge_artificials(tab: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, n: usize) {
    let mut i = 0;
    while i < tab.len() {
        if basis[i] >= n {
            let jcol = (0..n).find(|&j| tab[i][j].abs() > PIVOT_EPS);
            match jcol {
                Some(j) => {
                    pivot(tab, i, j);
                    basis[i] = j;
                    i += 1;
                }
                None => {
                    tab.remove(i);
                    basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
}

/// Maximize the minimum coordinate over L ∩ Δ. Returns the maximizing vector
/// and the attained min; a strictly positive value certifies that the family
/// contains a full-support member.
pub(crate) fn max_min_mass(f: &[Vec<f64>], n: usize) -> Result<Option<(Vec<f64>, f64)>> {
    let k = f.len();
    let nv = 2 * n + 1; // P, t, slacks
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(k + 1 + n);
    let mut b = Vec::with_capacity(k + 1 + n);
    for fi in f {
        let mut row = vec![0.0; nv];
        row[..n].copy_from_slice(fi);
        a.push(row);
        b.push(0.0);
    }
    let mut sum_row = vec![0.0; nv];
    for v in sum_row.iter_mut().take(n) {
        *v = 1.0;
    }
    a.push(sum_row);
    b.push(1.0);
    for x in 0..n {
        let mut row = vec![0.0; nv];
        row[x] = 1.0;
        row[n] = -1.0;
        row[n + 1 + x] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    let mut c = vec![0.0; nv];
    c[n] = 1.0;
    Ok(solve_lp(&c, &a, &b)?.map(|s| (clean(s.x[..n].to_vec()), s.objective)))
}

/// Maximize `P(x0)` over L ∩ Δ.
pub(crate) fn max_coordinate(
    f: &[Vec<f64>],
    n: usize,
    x0: usize,
) -> Result<Option<(Vec<f64>, f64)>> {
    let mut a: Vec<Vec<f64>> = f.to_vec();
    a.push(vec![1.0; n]);
    let mut b = vec![0.0; f.len()];
    b.push(1.0);
    let mut c = vec![0.0; n];
    c[x0] = 1.0;
    Ok(solve_lp(&c, &a, &b)?.map(|s| (clean(s.x), s.objective)))
}

/// The support of L ∩ Δ (union of member supports) together with a vector in
/// the family's relative interior: strictly positive exactly on that support.
/// `None` when L ∩ Δ = ∅.
pub(crate) fn family_support(f: &[Vec<f64>], n: usize) -> Result<Option<(Vec<usize>, Vec<f64>)>> {
    let Some((p0, tmin)) = max_min_mass(f, n)? else {
        return Ok(None);
    };
    if tmin > 1e-9 {
        return Ok(Some(((0..n).collect(), p0)));
    }
    let mut marked = vec![false; n];
    for (x, &w) in p0.iter().enumerate() {
        if w > 1e-9 {
            marked[x] = true;
        }
    }
    let mut acc = p0;
    let mut count = 1.0;
    for x in 0..n {
        if marked[x] {
            continue;
        }
        let (px, v) = max_coordinate(f, n, x)?.expect("feasibility already established");
        if v > 1e-9 {
            for (y, &w) in px.iter().enumerate() {
                if w > 1e-9 {
                    marked[y] = true;
                }
            }
            for (av, &w) in acc.iter_mut().zip(px.iter()) {
                *av += w;
            }
            count += 1.0;
        }
    }
    let support: Vec<usize> = (0..n).filter(|&x| marked[x]).collect();
    // convex combination of members: positive exactly on Supp(L); stray
    // sub-tolerance mass outside the support is numerical junk, drop it
    for (x, v) in acc.iter_mut().enumerate() {
        *v = if marked[x] { *v / count } else { 0.0 };
    }
    let total: f64 = acc.iter().sum();
    for v in acc.iter_mut() {
        *v /= total;
    }
    Ok(Some((support, acc)))
}

fn clean(mut x: Vec<f64>) -> Vec<f64> {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    x
}
