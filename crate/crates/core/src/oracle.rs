//! Brute-force reference implementations: simplex lattice search for forward
//! projections, θ-grid search for reverse projections, and high-precision
//! divergence evaluation. Slow by design; every fast path is checked against
//! these at small alphabet sizes.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::divergence::{relative_alpha_entropy, DivergenceValue};
use crate::error::{AlphaError, Result};
use crate::families::{LinearFamily, ParametricFamily};
use crate::linalg;
use crate::measures::{AlphaParam, ProbMeasure};

/// Largest alphabet the lattice enumeration will accept.
pub const GRID_SIZE_LIMIT: usize = 6;

/// Refinement-window halfwidth in lattice units of the refined (×10) step.
/// Wide enough to cover the along-family drift a slack-relaxed coarse winner
/// picks up; residual drift beyond the window is recovered by the adaptive
/// parabolic close-out.
const WINDOW_UNITS: u64 = 60;

/// Lattice-search schedule: starting step and number of ×10 refinements
/// around the incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub resolution: f64,
    pub refine_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            resolution: 0.02,
            refine_rounds: 6,
        }
    }
}

/// One admissible-parameter interval of a scan grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl ThetaRange {
    fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=count)
            .map(|i| (self.lo + i as f64 * self.step).min(self.hi))
            .collect()
    }
}

/// A refined local minimum of a θ-scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanMinimum {
    pub theta: Vec<f64>,
    pub value: f64,
}

/// Exhaustive minimization of I_α(P, R) over lattice points of the simplex
/// that satisfy the linear constraints within a step-proportional slack,
/// followed by ×10 window refinements and a final projection of the
/// incumbent onto the exact constraint set. Returns the snapped minimizer
/// and its objective value.
pub fn grid_forward_oracle(
    l: &LinearFamily,
    r: &ProbMeasure,
    alpha: AlphaParam,
    g: &GridSpec,
) -> Result<(ProbMeasure, f64)> {
    let m = r.len();
    if m > GRID_SIZE_LIMIT {
        return Err(AlphaError::TooLarge {
            size: m,
            limit: GRID_SIZE_LIMIT,
        });
    }
    if l.alphabet().size() != m {
        return Err(AlphaError::DimensionMismatch {
            expected: m,
            got: l.alphabet().size(),
        });
    }
    let a = alpha.get();
    let rows = l.rows();
    let max_row: f64 = rows
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);

    // per-symbol data for the incremental objective
    let kl = a == 1.0;
    let cross_w: Vec<f64> = r
        .weights()
        .iter()
        .map(|&w| {
            if kl {
                if w > 0.0 { w.ln() } else { f64::NEG_INFINITY }
            } else if w > 0.0 {
                w.powf(a - 1.0)
            } else if a > 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect();
    // constant term ln ΣR^α of the expanded form (zero in the KL case)
    let const_term = if kl {
        0.0
    } else {
        crate::measures::log_power_sum(r.weights(), a)
    };
    // symbols that would force an infinite divergence can never enter the
    // minimizer's support (α ≤ 1 with R(x) = 0)
    let forbidden: Vec<bool> = r.weights().iter().map(|&w| a <= 1.0 && w <= 0.0).collect();

    let mut step = g.resolution;
    let mut n = (1.0 / step).ceil() as u64;
    step = 1.0 / n as f64;
    // incumbent is always snapped onto the exact constraint set and valued
    // there — the slack-relaxed lattice winner drifts along the feasible
    // manifold by O(slack), which would walk later (narrower) windows off
    // the true minimizer if carried across rounds
    let mut incumbent: Option<(ProbMeasure, f64)> = None;

    for round in 0..=g.refine_rounds {
        let (lo, hi): (Vec<u64>, Vec<u64>) = match &incumbent {
            None => (
                vec![0; m],
                (0..m).map(|x| if forbidden[x] { 0 } else { n }).collect(),
            ),
            Some((best, _)) => {
                // window around the snapped incumbent from the coarser
                // round; wide enough (12 previous steps) to cover the
                // along-family drift the slack-relaxed winner picks up
                let centers: Vec<u64> = best
                    .weights()
                    .iter()
                    .map(|&w| (w * n as f64).round().max(0.0) as u64)
                    .collect();
                let lo = centers
                    .iter()
                    .map(|&k| k.saturating_sub(WINDOW_UNITS))
                    .collect();
                let hi = centers
                    .iter()
                    .enumerate()
                    .map(|(x, &k)| {
                        if forbidden[x] {
                            0
                        } else {
                            (k + WINDOW_UNITS).min(n)
                        }
                    })
                    .collect();
                (lo, hi)
            }
        };
        let slack = 2.0 * step * max_row;
        let best = enumerate_lattice(
            n, &lo, &hi, rows, &cross_w, a, kl, const_term, slack,
        );
        match best {
            Some((best_k, _)) => {
                let raw: Vec<f64> = best_k.iter().map(|&k| k as f64 / n as f64).collect();
                let snapped = snap_to_family(&raw, rows).unwrap_or(raw);
                let candidate = ProbMeasure::normalized(snapped, l.alphabet())?;
                let v = relative_alpha_entropy(&candidate, r, alpha)?;
                let v = if v.is_finite() { v.value() } else { f64::INFINITY };
                if incumbent.as_ref().map(|(_, b)| v < *b).unwrap_or(true) {
                    incumbent = Some((candidate, v));
                }
            }
            None if incumbent.is_some() => {} // degenerate window; keep incumbent
            None => return Err(AlphaError::Infeasible),
        }
        if round < g.refine_rounds {
            n *= 10;
            step /= 10.0;
        }
    }

    let (p_star, value) = parabolic_polish(l, r, alpha, incumbent.unwrap(), step);
    Ok((p_star, value))
}

/// Close-out of the lattice search: parabolic coordinate descent along the
/// feasible directions (null space of the constraint rows plus total mass),
/// with a shrinking probe step. Kills the O(step²) lattice quantization
/// error while staying exactly on the constraint set; moves are only ever
/// accepted on strict improvement, so the lattice incumbent is a floor.
fn parabolic_polish(
    l: &LinearFamily,
    r: &ProbMeasure,
    alpha: AlphaParam,
    start: (ProbMeasure, f64),
    step: f64,
) -> (ProbMeasure, f64) {
    let n = r.len();
    let mut constraint_rows: Vec<Vec<f64>> = l.rows().to_vec();
    constraint_rows.push(vec![1.0; n]);
    let interior_dirs = linalg::null_space(&constraint_rows, n);
    if interior_dirs.is_empty() {
        return start;
    }
    // an incumbent on a simplex facet also needs directions parallel to
    // that facet — the interior directions all probe into the wall there
    // and get zero reach
    let directions_at = |p: &ProbMeasure| -> Vec<Vec<f64>> {
        let mut dirs = interior_dirs.clone();
        let zeros: Vec<usize> = (0..n).filter(|&x| p.weights()[x] <= 0.0).collect();
        if !zeros.is_empty() {
            let mut face_rows = constraint_rows.clone();
            for &x in &zeros {
                let mut e = vec![0.0; n];
                e[x] = 1.0;
                face_rows.push(e);
            }
            dirs.extend(linalg::null_space(&face_rows, n));
        }
        dirs
    };
    let eval = |w: Vec<f64>| -> f64 {
        match ProbMeasure::normalized(w, r.alphabet()) {
            Ok(c) => match relative_alpha_entropy(&c, r, alpha) {
                Ok(v) if v.is_finite() => v.value(),
                _ => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };
    let (mut p, mut value) = start;
    // adaptive step: hold while the descent keeps taking near-full-length
    // moves (the snapped lattice winner can sit several slack-widths from
    // the true minimizer), shrink once moves come up short
    let mut h = 2.0 * step;
    for _ in 0..60 {
        if h < 1e-10 {
            break;
        }
        let mut longest_move = 0.0f64;
        for d in &directions_at(&p) {
            // the symmetric probe must stay inside the simplex
            let mut reach = h;
            for (&w, &dv) in p.weights().iter().zip(d.iter()) {
                if dv.abs() > 1e-14 {
                    reach = reach.min(w / dv.abs());
                }
            }
            if reach < 1e-15 {
                continue;
            }
            let shift = |t: f64| -> Vec<f64> {
                p.weights()
                    .iter()
                    .zip(d.iter())
                    .map(|(&w, &dv)| (w + t * dv).max(0.0))
                    .collect()
            };
            let vp = eval(shift(reach));
            let vm = eval(shift(-reach));
            let denom = vm - 2.0 * value + vp;
            let mut t_star = if denom > 0.0 {
                0.5 * reach * (vm - vp) / denom
            } else if vp < vm {
                reach
            } else {
                -reach
            };
            t_star = t_star.clamp(-reach, reach);
            let vs = eval(shift(t_star));
            let (best_t, best_v) = [(t_star, vs), (reach, vp), (-reach, vm)]
                .into_iter()
                .fold((0.0, value), |acc, c| if c.1 < acc.1 { c } else { acc });
            if best_v < value {
                if let Ok(moved) = ProbMeasure::normalized(shift(best_t), r.alphabet()) {
                    p = moved;
                    value = best_v;
                    longest_move = longest_move.max(best_t.abs());
                }
            }
        }
        if longest_move <= 0.25 * h {
            h /= 3.0;
        } else if longest_move >= 0.9 * h {
            // the minimizer is further out than expected; widen the reach
            // so travel is not step-budget-limited
            h *= 2.0;
        }
    }
    (p, value)
}

/// Depth-first walk over lattice vectors k (Σk = n) within a per-coordinate
/// box, maintaining the constraint sums and the two objective accumulators
/// incrementally. Returns the best feasible point, if any.
#[allow(clippy::too_many_arguments)]
fn enumerate_lattice(
    n: u64,
    lo: &[u64],
    hi: &[u64],
    rows: &[Vec<f64>],
    cross_w: &[f64],
    a: f64,
    kl: bool,
    const_term: f64,
    slack: f64,
) -> Option<(Vec<u64>, f64)> {
    let m = lo.len();
    let nf = n as f64;
    // suffix bounds for pruning partial sums
    let mut suf_lo = vec![0u64; m + 1];
    let mut suf_hi = vec![0u64; m + 1];
    for x in (0..m).rev() {
        suf_lo[x] = suf_lo[x + 1] + lo[x];
        suf_hi[x] = suf_hi[x + 1].saturating_add(hi[x]);
    }
    if suf_lo[0] > n || suf_hi[0] < n {
        return None;
    }
    // per-coordinate tables of (k/n)^α (or (k/n)ln(k/n) for KL) over the box
    let tables: Vec<Vec<f64>> = (0..m)
        .map(|x| {
            (lo[x]..=hi[x])
                .map(|k| {
                    let p = k as f64 / nf;
                    if kl {
                        if p > 0.0 { p * p.ln() } else { 0.0 }
                    } else {
                        p.powf(a)
                    }
                })
                .collect()
        })
        .collect();
    // per-row suffix bounds of the achievable constraint contribution, for
    // pruning subtrees that cannot re-enter the slack tube
    let mut con_lo = vec![vec![0.0; m + 1]; rows.len()];
    let mut con_hi = vec![vec![0.0; m + 1]; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        for x in (0..m).rev() {
            let (c_lo, c_hi) = if row[x] >= 0.0 {
                (lo[x] as f64 / nf * row[x], hi[x] as f64 / nf * row[x])
            } else {
                (hi[x] as f64 / nf * row[x], lo[x] as f64 / nf * row[x])
            };
            con_lo[i][x] = con_lo[i][x + 1] + c_lo;
            con_hi[i][x] = con_hi[i][x + 1] + c_hi;
        }
    }

    struct Walk<'s> {
        n: u64,
        nf: f64,
        lo: &'s [u64],
        hi: &'s [u64],
        suf_lo: &'s [u64],
        suf_hi: &'s [u64],
        con_lo: &'s [Vec<f64>],
        con_hi: &'s [Vec<f64>],
        rows: &'s [Vec<f64>],
        cross_w: &'s [f64],
        tables: &'s [Vec<f64>],
        a: f64,
        kl: bool,
        const_term: f64,
        slack: f64,
        k: Vec<u64>,
        fdot: Vec<f64>,
        cross: f64,
        palpha: f64,
        best: Option<(Vec<u64>, f64)>,
    }

    impl Walk<'_> {
        fn go(&mut self, x: usize, used: u64) {
            if x == self.k.len() {
                if self.fdot.iter().any(|v| v.abs() > self.slack) {
                    return;
                }
                let value = if self.kl {
                    self.palpha - self.cross
                } else if self.cross <= 0.0 {
                    return; // infinite divergence (α>1, disjoint supports)
                } else {
                    self.a / (1.0 - self.a) * self.cross.ln()
                        - 1.0 / (1.0 - self.a) * self.palpha.ln()
                        + self.const_term
                };
                if self
                    .best
                    .as_ref()
                    .map(|(_, b)| value < *b)
                    .unwrap_or(true)
                {
                    self.best = Some((self.k.clone(), value));
                }
                return;
            }
            for i in 0..self.fdot.len() {
                if self.fdot[i] + self.con_lo[i][x] > self.slack
                    || self.fdot[i] + self.con_hi[i][x] < -self.slack
                {
                    return;
                }
            }
            let remain = self.n - used;
            let k_lo = self.lo[x].max(remain.saturating_sub(self.suf_hi[x + 1]));
            let k_hi = self.hi[x].min(remain.saturating_sub(self.suf_lo[x + 1]));
            if k_lo > k_hi {
                return;
            }
            for k in k_lo..=k_hi {
                let p = k as f64 / self.nf;
                self.k[x] = k;
                // k = 0 contributes nothing even when cross_w[x] is ±∞
                let dcross = if k == 0 { 0.0 } else { p * self.cross_w[x] };
                let dalpha = self.tables[x][(k - self.lo[x]) as usize];
                self.cross += dcross;
                self.palpha += dalpha;
                for (f, row) in self.fdot.iter_mut().zip(self.rows.iter()) {
                    *f += p * row[x];
                }
                self.go(x + 1, used + k);
                self.cross -= dcross;
                self.palpha -= dalpha;
                for (f, row) in self.fdot.iter_mut().zip(self.rows.iter()) {
                    *f -= p * row[x];
                }
            }
            self.k[x] = self.lo[x];
        }
    }

    let mut w = Walk {
        n,
        nf,
        lo,
        hi,
        suf_lo: &suf_lo,
        suf_hi: &suf_hi,
        con_lo: &con_lo,
        con_hi: &con_hi,
        rows,
        cross_w,
        tables: &tables,
        a,
        kl,
        const_term,
        slack,
        k: vec![0; m],
        fdot: vec![0.0; rows.len()],
        cross: 0.0,
        palpha: 0.0,
        best: None,
    };
    w.go(0, 0);
    w.best
}

/// Euclidean projection of a near-feasible point onto
/// {P : F·P = 0, ΣP = 1, P ≥ 0} by active-set clipping: project onto the
/// affine part, pin the most negative coordinate to zero, repeat.
fn snap_to_family(p: &[f64], rows: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = p.len();
    let mut active: Vec<usize> = Vec::new();
    for _ in 0..=m {
        let mut a_rows: Vec<Vec<f64>> = rows.to_vec();
        a_rows.push(vec![1.0; m]);
        let mut b: Vec<f64> = vec![0.0; rows.len()];
        b.push(1.0);
        for &x in &active {
            let mut e = vec![0.0; m];
            e[x] = 1.0;
            a_rows.push(e);
            b.push(0.0);
        }
        // q = p − Aᵀ(AAᵀ)⁻¹(Ap − b)
        let nr = a_rows.len();
        let mut gram = vec![vec![0.0; nr]; nr];
        for i in 0..nr {
            for j in 0..nr {
                gram[i][j] = linalg::dot(&a_rows[i], &a_rows[j]);
            }
        }
        let resid: Vec<f64> = a_rows
            .iter()
            .zip(b.iter())
            .map(|(row, bv)| linalg::dot(row, p) - bv)
            .collect();
        let lambda = linalg::solve(gram, resid)?;
        let mut q = p.to_vec();
        for (row, l) in a_rows.iter().zip(lambda.iter()) {
            for (qx, rv) in q.iter_mut().zip(row.iter()) {
                *qx -= l * rv;
            }
        }
        match q
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < -1e-12)
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        {
            Some((worst, _)) => active.push(worst),
            None => {
                for v in q.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                return Some(q);
            }
        }
    }
    None
}

/// Dense product-grid evaluation of θ ↦ I_α(P̂, P_θ) returning the full
/// series (inadmissible points carry an infinite value) and all grid-local
/// minima, each refined by a per-coordinate quadratic fit.
pub(crate) fn scan_series<F: ParametricFamily + ?Sized>(
    family: &F,
    p_hat: &ProbMeasure,
    alpha: AlphaParam,
    grid: &[ThetaRange],
) -> Result<(Vec<(Vec<f64>, f64)>, Vec<ScanMinimum>)> {
    if grid.len() != family.dim() {
        return Err(AlphaError::DimensionMismatch {
            expected: family.dim(),
            got: grid.len(),
        });
    }
    let axes: Vec<Vec<f64>> = grid.iter().map(|r| r.points()).collect();
    let dims: Vec<usize> = axes.iter().map(|ax| ax.len()).collect();
    let total: usize = dims.iter().product();
    let eval = |theta: &[f64]| -> f64 {
        match family.member(theta) {
            Ok(p_theta) => match relative_alpha_entropy(p_hat, &p_theta, alpha) {
                Ok(v) if v.is_finite() => v.value(),
                _ => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };
    let mut series = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    for flat in 0..total {
        let theta = unflatten(flat, &dims, &axes);
        let v = eval(&theta);
        values.push(v);
        series.push((theta, v));
    }

    let mut minima = Vec::new();
    'points: for flat in 0..total {
        let v = values[flat];
        if !v.is_finite() {
            continue;
        }
        let idx = indices(flat, &dims);
        let mut strictly_below = false;
        for d in 0..dims.len() {
            for dir in [-1isize, 1] {
                let ni = idx[d] as isize + dir;
                if ni < 0 || ni as usize >= dims[d] {
                    continue;
                }
                let mut nidx = idx.clone();
                nidx[d] = ni as usize;
                let nv = values[flatten(&nidx, &dims)];
                if nv < v {
                    continue 'points;
                }
                if nv > v {
                    strictly_below = true;
                }
            }
        }
        // plateau interiors tie with every neighbour; keep only points that
        // beat at least one (single-point grids keep their lone point)
        if !strictly_below && total > 1 {
            continue;
        }
        // quadratic refinement, one coordinate at a time
        let mut theta = unflatten(flat, &dims, &axes);
        for d in 0..dims.len() {
            if idx[d] == 0 || idx[d] + 1 >= dims[d] {
                continue;
            }
            let mut left = idx.clone();
            left[d] -= 1;
            let mut right = idx.clone();
            right[d] += 1;
            let vl = values[flatten(&left, &dims)];
            let vr = values[flatten(&right, &dims)];
            if !(vl.is_finite() && vr.is_finite()) {
                continue;
            }
            let denom = vl - 2.0 * v + vr;
            if denom > 0.0 {
                let h = axes[d][idx[d]] - axes[d][idx[d] - 1];
                let delta = 0.5 * h * (vl - vr) / denom;
                theta[d] += delta.clamp(-0.5 * h, 0.5 * h);
            }
        }
        let refined = eval(&theta);
        if refined <= v {
            minima.push(ScanMinimum {
                theta,
                value: refined,
            });
        } else {
            minima.push(ScanMinimum {
                theta: unflatten(flat, &dims, &axes),
                value: v,
            });
        }
    }
    minima.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    Ok((series, minima))
}

fn indices(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for d in (0..dims.len()).rev() {
        idx[d] = flat % dims[d];
        flat /= dims[d];
    }
    idx
}

fn flatten(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims.iter()).fold(0, |acc, (i, d)| acc * d + i)
}

fn unflatten(flat: usize, dims: &[usize], axes: &[Vec<f64>]) -> Vec<f64> {
    indices(flat, dims)
        .iter()
        .zip(axes.iter())
        .map(|(&i, ax)| ax[i])
        .collect()
}

/// θ-grid search for reverse projections: all local minima of
/// θ ↦ I_α(P̂, P_θ) over a product grid, refined.
pub fn grid_reverse_oracle<F: ParametricFamily + ?Sized>(
    family: &F,
    p_hat: &ProbMeasure,
    alpha: AlphaParam,
    grid: &[ThetaRange],
) -> Result<Vec<ScanMinimum>> {
    Ok(scan_series(family, p_hat, alpha, grid)?.1)
}

const HP_BITS: usize = 384; // ≈ 115 decimal digits

/// Evaluate I_α(P, Q) in 384-bit arithmetic (α = 1 gives the KL limit).
/// Used to pin reference values far below double-precision noise.
pub fn highprec_divergence(
    p: &ProbMeasure,
    q: &ProbMeasure,
    alpha: AlphaParam,
) -> Result<DivergenceValue> {
    crate::measures::check_same_size(p, q)?;
    if p == q {
        return Ok(DivergenceValue::finite(0.0));
    }
    let a = alpha.get();
    if a < 1.0 && !p.absolutely_continuous_wrt(q) {
        return Ok(DivergenceValue::infinite());
    }
    if a > 1.0 && p.singular_with(q) {
        return Ok(DivergenceValue::infinite());
    }
    let rm = RoundingMode::None;
    let mut cc = Consts::new().expect("constants cache");
    let bf = |v: f64| BigFloat::from_f64(v, HP_BITS);
    let value = if alpha.is_one() {
        if !p.absolutely_continuous_wrt(q) {
            return Ok(DivergenceValue::infinite());
        }
        let mut acc = bf(0.0);
        for (&pw, &qw) in p.weights().iter().zip(q.weights()) {
            if pw > 0.0 {
                let ratio = bf(pw).div(&bf(qw), HP_BITS, rm);
                let term = bf(pw).mul(&ratio.ln(HP_BITS, rm, &mut cc), HP_BITS, rm);
                acc = acc.add(&term, HP_BITS, rm);
            }
        }
        acc
    } else {
        let ex = bf(a - 1.0);
        let mut cross = bf(0.0);
        let mut palpha = bf(0.0);
        let mut qalpha = bf(0.0);
        for (&pw, &qw) in p.weights().iter().zip(q.weights()) {
            if pw > 0.0 && qw > 0.0 {
                let term = bf(pw).mul(&bf(qw).pow(&ex, HP_BITS, rm, &mut cc), HP_BITS, rm);
                cross = cross.add(&term, HP_BITS, rm);
            }
            if pw > 0.0 {
                palpha = palpha.add(&bf(pw).pow(&bf(a), HP_BITS, rm, &mut cc), HP_BITS, rm);
            }
            if qw > 0.0 {
                qalpha = qalpha.add(&bf(qw).pow(&bf(a), HP_BITS, rm, &mut cc), HP_BITS, rm);
            }
        }
        if cross.is_zero() {
            return Ok(DivergenceValue::infinite());
        }
        let t1 = bf(a / (1.0 - a)).mul(&cross.ln(HP_BITS, rm, &mut cc), HP_BITS, rm);
        let t2 = bf(1.0 / (1.0 - a)).mul(&palpha.ln(HP_BITS, rm, &mut cc), HP_BITS, rm);
        t1.sub(&t2, HP_BITS, rm)
            .add(&qalpha.ln(HP_BITS, rm, &mut cc), HP_BITS, rm)
    };
    let v: f64 = format!("{value}").parse().unwrap_or(f64::NAN);
    debug_assert!(v.is_finite(), "high-precision value failed to round-trip");
    Ok(DivergenceValue::finite(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::BinomialFamily;
    use crate::measures::Alphabet;

    fn pm(w: &[f64]) -> ProbMeasure {
        ProbMeasure::from_weights(w.to_vec()).unwrap()
    }

    fn alpha(a: f64) -> AlphaParam {
        AlphaParam::new(a).unwrap()
    }

    #[test]
    fn highprec_matches_frozen_references() {
        let v = highprec_divergence(&pm(&[0.5, 0.5]), &pm(&[0.25, 0.75]), alpha(0.5)).unwrap();
        assert!((v.value() - 0.0745045720308165535101916073885).abs() < 1e-15);
        let kl = highprec_divergence(&pm(&[0.3, 0.7]), &pm(&[0.6, 0.4]), alpha(1.0)).unwrap();
        assert!((kl.value() - 0.18378689738681228756).abs() < 1e-15);
        // I_2(Q, R) for the support-shrinkage projection = ln 2.5
        let i2 = highprec_divergence(
            &pm(&[0.75, 0.25, 0.0, 0.0]),
            &ProbMeasure::uniform(4),
            alpha(2.0),
        )
        .unwrap();
        assert!((i2.value() - 0.91629073187415506518).abs() < 1e-15);
    }

    #[test]
    fn highprec_agrees_with_double_path() {
        let cases = [
            (vec![0.2, 0.3, 0.5], vec![0.5, 0.25, 0.25], 0.5),
            (vec![0.2, 0.3, 0.5], vec![0.5, 0.25, 0.25], 2.0),
            (vec![0.1, 0.2, 0.3, 0.4], vec![0.4, 0.3, 0.2, 0.1], 4.0),
            (vec![0.1, 0.2, 0.3, 0.4], vec![0.4, 0.3, 0.2, 0.1], 1.0),
        ];
        for (pw, qw, a) in cases {
            let p = pm(&pw);
            let q = pm(&qw);
            let hp = highprec_divergence(&p, &q, alpha(a)).unwrap().value();
            let dd = relative_alpha_entropy(&p, &q, alpha(a)).unwrap().value();
            assert!((hp - dd).abs() <= 1e-12 * (1.0 + hp.abs()), "alpha {a}");
        }
    }

    #[test]
    fn highprec_zero_and_infinite_cases() {
        let p = pm(&[0.4, 0.6]);
        assert_eq!(highprec_divergence(&p, &p, alpha(0.7)).unwrap().value(), 0.0);
        let v = highprec_divergence(&pm(&[0.5, 0.5]), &pm(&[1.0, 0.0]), alpha(0.5)).unwrap();
        assert!(!v.is_finite());
        let w =
            highprec_divergence(&pm(&[1.0, 0.0]), &pm(&[0.0, 1.0]), alpha(2.0)).unwrap();
        assert!(!w.is_finite());
    }

    #[test]
    fn forward_oracle_reproduces_support_shrinkage() {
        let l = LinearFamily::new(
            vec![vec![1.0, -3.0, -5.0, -6.0]],
            Alphabet::new(4).unwrap(),
        )
        .unwrap();
        let spec = GridSpec {
            resolution: 0.02,
            refine_rounds: 3,
        };
        let (p_star, value) =
            grid_forward_oracle(&l, &ProbMeasure::uniform(4), alpha(2.0), &spec).unwrap();
        let expect = [0.75, 0.25, 0.0, 0.0];
        let tv: f64 = p_star
            .weights()
            .iter()
            .zip(expect.iter())
            .map(|(w, e)| (w - e).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 2e-3, "tv {tv}");
        assert!((value - 0.91629073187415506518).abs() < 1e-6);
    }

    #[test]
    fn forward_oracle_zero_at_reference_in_family() {
        let r = pm(&[0.25, 0.5, 0.25]);
        // one constraint satisfied by R itself
        let l = LinearFamily::new(vec![vec![1.0, 0.0, -1.0]], r.alphabet()).unwrap();
        let (p_star, value) =
            grid_forward_oracle(&l, &r, alpha(0.5), &GridSpec::default()).unwrap();
        assert!(value.abs() < 1e-9);
        assert!(p_star.total_variation(&r) < 1e-4);
    }

    #[test]
    fn forward_oracle_guards_large_alphabets() {
        let l = LinearFamily::new(vec![], Alphabet::new(7).unwrap()).unwrap();
        assert_eq!(
            grid_forward_oracle(&l, &ProbMeasure::uniform(7), alpha(2.0), &GridSpec::default())
                .err(),
            Some(AlphaError::TooLarge { size: 7, limit: 6 })
        );
    }

    #[test]
    fn forward_oracle_detects_infeasible_family() {
        let l =
            LinearFamily::new(vec![vec![1.0, 1.0, 1.0]], Alphabet::new(3).unwrap()).unwrap();
        assert_eq!(
            grid_forward_oracle(&l, &ProbMeasure::uniform(3), alpha(2.0), &GridSpec::default())
                .err(),
            Some(AlphaError::Infeasible)
        );
    }

    #[test]
    fn forward_oracle_stable_under_step_halving() {
        let l = LinearFamily::new(
            vec![vec![-1.0, 0.0, 1.0]],
            Alphabet::new(3).unwrap(),
        )
        .unwrap();
        let r = pm(&[0.2, 0.3, 0.5]);
        let coarse = GridSpec {
            resolution: 0.02,
            refine_rounds: 2,
        };
        let fine = GridSpec {
            resolution: 0.01,
            refine_rounds: 2,
        };
        let (_, v1) = grid_forward_oracle(&l, &r, alpha(0.5), &coarse).unwrap();
        let (_, v2) = grid_forward_oracle(&l, &r, alpha(0.5), &fine).unwrap();
        // both end at step 2e-4 after refinement and snapping
        assert!((v1 - v2).abs() <= 10.0 * 2e-4 * 2e-4);
    }

    #[test]
    fn reverse_oracle_binomial_minima() {
        let fam = BinomialFamily::new(2).unwrap();
        let r = ProbMeasure::uniform(3);
        let grid = [ThetaRange {
            lo: 0.01,
            hi: 0.99,
            step: 1e-3,
        }];
        let minima = grid_reverse_oracle(&fam, &r, alpha(2.0), &grid).unwrap();
        assert_eq!(minima.len(), 1);
        assert!((minima[0].theta[0] - 0.5).abs() < 1e-6);

        let minima4 = grid_reverse_oracle(&fam, &r, alpha(4.0), &grid).unwrap();
        assert_eq!(minima4.len(), 2);
        let (a, b) = (minima4[0].theta[0], minima4[1].theta[0]);
        assert!((a + b - 1.0).abs() < 1e-6, "not symmetric: {a} {b}");
        assert!((minima4[0].value - minima4[1].value).abs() < 1e-9);
    }

    #[test]
    fn reverse_oracle_zero_when_target_in_family() {
        let fam = BinomialFamily::new(2).unwrap();
        let target = fam.member(&[0.3]).unwrap();
        let grid = [ThetaRange {
            lo: 0.05,
            hi: 0.95,
            step: 1e-3,
        }];
        let minima = grid_reverse_oracle(&fam, &target, alpha(2.0), &grid).unwrap();
        assert!((minima[0].theta[0] - 0.3).abs() < 1e-6);
        assert!(minima[0].value < 1e-10);
    }
}
