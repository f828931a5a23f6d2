//! Forward projection: minimize I_α(P, R) over a linear family L. The
//! minimizer has a k-parameter power-law form, so the primary solver is a
//! damped Newton iteration on the k dual variables; a projected-gradient
//! primal method covers the rare stalls. Returns the dual certificate
//! (θ*, Z, active support, residuals) alongside Q.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::divergence::relative_alpha_entropy;
use crate::error::{AlphaError, Result};
use crate::families::{LinearFamily, MEMBERSHIP_TOL};
use crate::linalg;
use crate::measures::{log_sum_exp, AlphaParam, ProbMeasure};

/// Knobs for [`forward_project`]; the defaults match the documented
/// tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on the combined membership + form residual.
    pub kkt_tol: f64,
    pub max_newton_iters: usize,
    pub max_fallback_iters: usize,
    /// Total number of Newton starts (the first is always θ = 0).
    pub multistart_count: usize,
    pub rng_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kkt_tol: 1e-8,
            max_newton_iters: 200,
            max_fallback_iters: 5000,
            multistart_count: 1,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    Infeasible,
}

/// A forward projection together with its dual certificate.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub q: ProbMeasure,
    pub theta_star: Vec<f64>,
    pub z: f64,
    pub active_support: Vec<usize>,
    /// max of ‖F·Q‖_∞ and the scaled power-law form residual.
    pub kkt_residual: f64,
    /// Numerical tolerance on the Pythagorean statement implied by the
    /// residuals of this certificate.
    pub pythagorean_gap_bound: f64,
    pub status: Status,
    family: LinearFamily,
}

impl ProjectionResult {
    /// The family this projection was computed for.
    pub fn family(&self) -> &LinearFamily {
        &self.family
    }
}

/// ∂I_α(P,R)/∂P(x) = (α/(1−α))[R^{α−1}(x)/ΣPR^{α−1} − P^{α−1}(x)/ΣP^α];
/// the α→1 limit is the KL gradient ln(P(x)/R(x)) + 1. Only gradient
/// differences matter on the simplex.
pub fn objective_gradient(
    p: &ProbMeasure,
    r: &ProbMeasure,
    alpha: AlphaParam,
) -> Result<Vec<f64>> {
    crate::measures::check_same_size(p, r)?;
    if !r.has_full_support() {
        return Err(AlphaError::DegenerateDenominator("gradient reference"));
    }
    let a = alpha.get();
    if alpha.is_one() {
        return Ok(p
            .weights()
            .iter()
            .zip(r.weights())
            .map(|(&pw, &rw)| (pw.max(f64::MIN_POSITIVE) / rw).ln() + 1.0)
            .collect());
    }
    // floor zero coordinates: for α<1 the gradient blows up at the boundary
    // and the fallback solver only needs a finite, inward-pointing value
    let floor = 1e-280;
    let rpow: Vec<f64> = r.weights().iter().map(|&w| w.powf(a - 1.0)).collect();
    let cross: f64 = p
        .weights()
        .iter()
        .zip(rpow.iter())
        .map(|(&pw, &rp)| pw * rp)
        .sum();
    let palpha: f64 = p.weights().iter().map(|&w| w.max(floor).powf(a)).sum();
    if !(cross > 0.0) || !(palpha > 0.0) {
        return Err(AlphaError::DegenerateDenominator("gradient"));
    }
    let c = a / (1.0 - a);
    Ok(p
        .weights()
        .iter()
        .zip(rpow.iter())
        .map(|(&pw, &rp)| c * (rp / cross - pw.max(floor).powf(a - 1.0) / palpha))
        .collect())
}

/// The dual subproblem: coordinates in play, R^{α−1} (or ln R at α = 1)
/// there, constraint values there, and per-coordinate force-clip flags.
struct DualProblem {
    rpow: Vec<f64>,
    rows: Vec<Vec<f64>>,
    a: f64,
    forced: Vec<bool>,
}

struct NewtonOut {
    theta: Vec<f64>,
    /// normalized member weights on the subproblem coordinates
    weights: Vec<f64>,
    z: f64,
    residual: f64,
    converged: bool,
}

impl DualProblem {
    fn k(&self) -> usize {
        self.rows.len()
    }

    fn m(&self) -> usize {
        self.rpow.len()
    }

    fn u_at(&self, theta: &[f64]) -> Vec<f64> {
        let mut u = self.rpow.clone();
        for (x, uv) in u.iter_mut().enumerate() {
            let tilt: f64 = theta
                .iter()
                .zip(self.rows.iter())
                .map(|(t, row)| t * row[x])
                .sum();
            if self.a == 1.0 {
                *uv -= tilt; // log-domain: ln R − θ·f
            } else {
                *uv += (1.0 - self.a) * tilt;
            }
        }
        u
    }

    /// Potential value; −(1/α)Σ[u]₊^{α/(α−1)}, or −ln Σ R e^{−θf} at α = 1.
    /// Concave in θ; its stationary points are the moment equations.
    fn phi(&self, u: &[f64]) -> f64 {
        if self.a == 1.0 {
            let logs: Vec<f64> = u
                .iter()
                .zip(self.forced.iter())
                .map(|(&l, &fz)| if fz { f64::NEG_INFINITY } else { l })
                .collect();
            return -log_sum_exp(&logs);
        }
        let beta = self.a / (self.a - 1.0);
        let mut s = 0.0;
        for (x, &uv) in u.iter().enumerate() {
            if self.forced[x] || uv <= 0.0 {
                continue;
            }
            s += uv.powf(beta);
        }
        -s / self.a
    }

    /// Normalized member weights and the normalizer Z for a given u.
    fn member(&self, u: &[f64]) -> (Vec<f64>, f64) {
        if self.a == 1.0 {
            let logs: Vec<f64> = u
                .iter()
                .zip(self.forced.iter())
                .map(|(&l, &fz)| if fz { f64::NEG_INFINITY } else { l })
                .collect();
            let lz = log_sum_exp(&logs);
            return (logs.iter().map(|&l| (l - lz).exp()).collect(), lz.exp());
        }
        let ex = 1.0 / (self.a - 1.0);
        let logs: Vec<f64> = u
            .iter()
            .zip(self.forced.iter())
            .map(|(&uv, &fz)| {
                if fz || uv <= 0.0 {
                    f64::NEG_INFINITY
                } else if uv.is_finite() {
                    ex * uv.ln()
                } else {
                    f64::NEG_INFINITY // u = +∞ at α<1 ⇒ weight 0
                }
            })
            .collect();
        let lz = log_sum_exp(&logs);
        (logs.iter().map(|&l| (l - lz).exp()).collect(), lz.exp())
    }

    /// ∇Φ = Z·F·Q (normalized here to F·Q so tolerances are scale-free).
    fn moments(&self, q_norm: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| linalg::dot(row, q_norm))
            .collect()
    }

    /// Negated Hessian of Φ restricted to the given clip pattern.
    fn neg_hessian(&self, u: &[f64], q_norm: &[f64], z: f64, clipped: &[bool]) -> Vec<Vec<f64>> {
        let k = self.k();
        let mut h = vec![vec![0.0; k]; k];
        if self.a == 1.0 {
            // covariance of f under Q
            let means = self.moments(q_norm);
            for x in 0..self.m() {
                if self.forced[x] {
                    continue;
                }
                for i in 0..k {
                    for j in i..k {
                        h[i][j] +=
                            q_norm[x] * (self.rows[i][x] - means[i]) * (self.rows[j][x] - means[j]);
                    }
                }
            }
        } else {
            let ex = (2.0 - self.a) / (self.a - 1.0);
            for x in 0..self.m() {
                if self.forced[x] || clipped[x] || u[x] <= 0.0 || !u[x].is_finite() {
                    continue;
                }
                let w = u[x].powf(ex);
                if !w.is_finite() {
                    continue;
                }
                for i in 0..k {
                    for j in i..k {
                        h[i][j] += w * self.rows[i][x] * self.rows[j][x];
                    }
                }
            }
            // gradient scale is Z·F·Q while we work with F·Q, so divide
            for row in h.iter_mut() {
                for v in row.iter_mut() {
                    *v /= z;
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                h[i][j] = h[j][i];
            }
        }
        h
    }

    fn admissible(&self, u: &[f64]) -> bool {
        if self.a == 1.0 {
            return true;
        }
        if self.a < 1.0 {
            // the open parameter set: positivity everywhere in play
            u.iter()
                .zip(self.forced.iter())
                .all(|(&uv, &fz)| fz || uv > 0.0)
        } else {
            // just need a nonempty unclipped part
            u.iter()
                .zip(self.forced.iter())
                .any(|(&uv, &fz)| !fz && uv > 0.0)
        }
    }

    /// Damped Newton ascent of Φ with Armijo backtracking and hysteretic
    /// clip-pattern updates (enter below −1e-12, leave above +1e-12).
    fn newton(&self, theta0: &[f64], max_iters: usize, tol: f64) -> NewtonOut {
        const POLISH_TOL: f64 = 1e-13;
        const PATTERN_TOL: f64 = 1e-12;
        let k = self.k();
        let mut theta = theta0.to_vec();
        let mut u = self.u_at(&theta);
        if !self.admissible(&u) {
            // shrink toward the always-admissible origin
            let mut t = 0.5;
            for _ in 0..60 {
                let cand: Vec<f64> = theta.iter().map(|v| v * t).collect();
                u = self.u_at(&cand);
                if self.admissible(&u) {
                    theta = cand;
                    break;
                }
                t *= 0.5;
            }
            if !self.admissible(&u) {
                theta = vec![0.0; k];
                u = self.u_at(&theta);
            }
        }
        let mut clipped: Vec<bool> = u.iter().map(|&uv| uv <= 0.0).collect();
        let mut best: Option<NewtonOut> = None;
        let mut phi = self.phi(&u);
        for _ in 0..max_iters {
            let (q, z) = self.member(&u);
            let grad = self.moments(&q);
            let residual = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            let improved = best.as_ref().map(|b| residual < b.residual).unwrap_or(true);
            if improved {
                best = Some(NewtonOut {
                    theta: theta.clone(),
                    weights: q.clone(),
                    z,
                    residual,
                    converged: residual <= tol,
                });
            }
            if residual <= POLISH_TOL {
                break;
            }
            let h = self.neg_hessian(&u, &q, z, &clipped);
            let delta = match solve_spd_with_ridge(&h, &grad) {
                Some(d) => d,
                None => break,
            };
            // Armijo ascent on Φ; ∇Φ·Δ = Z·(F·Q)·Δ but the positive factor
            // Z is irrelevant to the test direction
            let slope: f64 = grad.iter().zip(delta.iter()).map(|(g, d)| g * d).sum();
            if !(slope > 0.0) {
                break;
            }
            // ∇Φ = Z·F·Q for α≠1 while grad holds F·Q, hence the z factor
            let slope_scale = if self.a == 1.0 { 1.0 } else { z };
            let mut accepted = false;
            let mut t = 1.0;
            for _ in 0..40 {
                let cand: Vec<f64> = theta
                    .iter()
                    .zip(delta.iter())
                    .map(|(th, d)| th + t * d)
                    .collect();
                let u_cand = self.u_at(&cand);
                if self.admissible(&u_cand) {
                    let phi_cand = self.phi(&u_cand);
                    if phi_cand >= phi + 1e-4 * t * slope * slope_scale {
                        theta = cand;
                        u = u_cand;
                        phi = phi_cand;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
            for (x, c) in clipped.iter_mut().enumerate() {
                if *c && u[x] > PATTERN_TOL {
                    *c = false;
                } else if !*c && u[x] < -PATTERN_TOL {
                    *c = true;
                }
            }
        }
        best.unwrap_or_else(|| {
            let (q, z) = self.member(&u);
            let grad = self.moments(&q);
            let residual = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            NewtonOut {
                theta,
                weights: q,
                z,
                residual,
                converged: residual <= tol,
            }
        })
    }

}

fn solve_spd_with_ridge(h: &[Vec<f64>], g: &[f64]) -> Option<Vec<f64>> {
    let k = g.len();
    if k == 0 {
        return Some(vec![]);
    }
    let trace: f64 = (0..k).map(|i| h[i][i]).sum();
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut hr = h.to_vec();
        for (i, row) in hr.iter_mut().enumerate() {
            row[i] += ridge;
        }
        if let Some(d) = linalg::solve(hr, g.to_vec()) {
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        ridge = if ridge == 0.0 {
            (trace.abs() / k as f64).max(1e-300) * 1e-12
        } else {
            ridge * 100.0
        };
    }
    None
}

/// Forward I_α-projection of R onto L with certificate. `status` is
/// `Converged` when the combined residual meets `opts.kkt_tol`;
/// `MaxIterations` returns the best iterate found.
pub fn forward_project(
    l: &LinearFamily,
    r: &ProbMeasure,
    alpha: AlphaParam,
    opts: &SolverOptions,
) -> Result<ProjectionResult> {
    let n = r.len();
    if l.alphabet().size() != n {
        return Err(AlphaError::DimensionMismatch {
            expected: n,
            got: l.alphabet().size(),
        });
    }
    if !r.has_full_support() {
        return Err(AlphaError::ReferenceNotFullSupport);
    }
    let a = alpha.get();
    let k = l.k();
    if k == 0 {
        return Ok(ProjectionResult {
            q: r.clone(),
            theta_star: vec![],
            z: 1.0,
            active_support: (0..n).collect(),
            kkt_residual: 0.0,
            pythagorean_gap_bound: 0.0,
            status: Status::Converged,
            family: l.clone(),
        });
    }

    // phase 1: feasibility, and (for α ≤ 1) the support of L, which is the
    // support of the projection
    let (supp, interior) = match crate::linprog::family_support(l.rows(), n)? {
        Some(si) => si,
        None => return Err(AlphaError::Infeasible),
    };
    let coords: Vec<usize> = if a <= 1.0 { supp } else { (0..n).collect() };

    let rows_sub: Vec<Vec<f64>> = l
        .rows()
        .iter()
        .map(|row| coords.iter().map(|&x| row[x]).collect())
        .collect();
    let rpow: Vec<f64> = coords
        .iter()
        .map(|&x| {
            let w = r.weights()[x];
            if a == 1.0 {
                w.ln()
            } else {
                w.powf(a - 1.0)
            }
        })
        .collect();
    let prob = DualProblem {
        rpow,
        rows: rows_sub,
        a,
        forced: vec![false; coords.len()],
    };

    let mut out = prob.newton(&vec![0.0; k], opts.max_newton_iters, opts.kkt_tol);
    if opts.multistart_count > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
        let scale = theta_scale(&prob);
        for _ in 1..opts.multistart_count {
            let theta0: Vec<f64> = (0..k).map(|_| rng.random_range(-scale..scale)).collect();
            let cand = prob.newton(&theta0, opts.max_newton_iters, opts.kkt_tol);
            if cand.residual < out.residual {
                out = cand;
            }
        }
    }

    // boundary polish (α>1): coordinates that converged to numerically-zero
    // mass usually sit exactly at a clip boundary; force them out and
    // re-solve so the support comes out exact. The threshold is generous —
    // degenerate boundaries (optimal u exactly zero) stall Newton with
    // leftover mass near the stopping tolerance — and safe, because the
    // re-solve is only accepted when the forced coordinates would have been
    // clipped anyway (u ≤ 0 at the restricted optimum).
    if a > 1.0 && out.converged {
        let forced: Vec<bool> = out.weights.iter().map(|&w| w < 1e-7).collect();
        if forced.iter().any(|&f| f) && !forced.iter().all(|&f| f) {
            let polished_prob = DualProblem {
                rpow: prob.rpow.clone(),
                rows: prob.rows.clone(),
                a,
                forced: forced.clone(),
            };
            let polished = polished_prob.newton(&out.theta, opts.max_newton_iters, opts.kkt_tol);
            if polished.converged {
                let u = polished_prob.u_at(&polished.theta);
                let pattern_ok = forced
                    .iter()
                    .zip(u.iter())
                    .all(|(&fz, &uv)| !fz || uv <= 1e-12);
                if pattern_ok && polished.residual <= out.residual.max(opts.kkt_tol) {
                    out = polished;
                }
            }
        }
    }

    // fallback: primal projected gradient when the dual path stalled
    if !out.converged && opts.max_fallback_iters > 0 {
        let start: Vec<f64> = interior.clone();
        if let Some(fb) = projected_gradient(l.rows(), r, alpha, &start, opts) {
            let fb_out = recover_dual(&prob, &coords, &fb);
            if fb_out.residual < out.residual {
                out = fb_out;
            }
        }
    }

    assemble_result(l, r, alpha, &coords, &prob, out, opts)
}

/// A crude admissible scale for random Newton starts.
fn theta_scale(prob: &DualProblem) -> f64 {
    let rmin = prob
        .rpow
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(1e-8);
    let fmax = prob
        .rows
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-8);
    if prob.a == 1.0 {
        1.0 / fmax
    } else {
        rmin.abs() / ((1.0 - prob.a).abs() * fmax)
    }
}

/// Express a primal iterate in dual coordinates by least squares so the
/// fallback can report the same certificate as the Newton path.
fn recover_dual(prob: &DualProblem, coords: &[usize], q_full: &ProbMeasure) -> NewtonOut {
    let a = prob.a;
    let k = prob.k();
    let mut lhs: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (xi, &x) in coords.iter().enumerate() {
        let qw = q_full.weights()[x];
        if qw <= 0.0 {
            continue;
        }
        // ζ q^{α−1} − (1−α)θf = R^{α−1}   |   c − θf = ln q − ln R (α=1)
        let mut row = vec![0.0; k + 1];
        if a == 1.0 {
            row[0] = 1.0;
            for i in 0..k {
                row[i + 1] = -prob.rows[i][xi];
            }
            lhs.push(row);
            rhs.push(qw.ln() - prob.rpow[xi]);
        } else {
            row[0] = qw.powf(a - 1.0);
            for i in 0..k {
                row[i + 1] = (a - 1.0) * prob.rows[i][xi];
            }
            lhs.push(row);
            rhs.push(prob.rpow[xi]);
        }
    }
    let sol = linalg::lstsq(&lhs, &rhs).unwrap_or_else(|| vec![0.0; k + 1]);
    let theta = sol[1..].to_vec();
    let weights: Vec<f64> = coords.iter().map(|&x| q_full.weights()[x]).collect();
    let z = if a == 1.0 {
        (-sol[0]).exp()
    } else if sol[0] > 0.0 {
        sol[0].powf(1.0 / (a - 1.0))
    } else {
        1.0
    };
    let grad = prob.moments(&weights);
    let residual = grad.iter().fold(0.0f64, |m2, g| m2.max(g.abs()));
    NewtonOut {
        theta,
        weights,
        z,
        residual,
        converged: false, // caller re-derives from the combined residual
    }
}

fn projected_gradient(
    rows: &[Vec<f64>],
    r: &ProbMeasure,
    alpha: AlphaParam,
    start: &[f64],
    opts: &SolverOptions,
) -> Option<ProbMeasure> {
    let n = r.len();
    let mut p = dykstra(start, rows, n)?;
    let mut value = objective_value(&p, r, alpha)?;
    let mut step = 1.0;
    for _ in 0..opts.max_fallback_iters {
        let pm = ProbMeasure::normalized(p.clone(), r.alphabet()).ok()?;
        let g = objective_gradient(&pm, r, alpha).ok()?;
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut accepted = false;
        let mut t = step / gmax;
        for _ in 0..40 {
            let cand: Vec<f64> = p.iter().zip(g.iter()).map(|(pv, gv)| pv - t * gv).collect();
            if let Some(proj) = dykstra(&cand, rows, n) {
                if let Some(v) = objective_value(&proj, r, alpha) {
                    if v < value - 1e-16 {
                        let moved: f64 = proj
                            .iter()
                            .zip(p.iter())
                            .map(|(a2, b)| (a2 - b).abs())
                            .fold(0.0, f64::max);
                        p = proj;
                        value = v;
                        accepted = true;
                        if moved < 1e-14 {
                            return ProbMeasure::normalized(p, r.alphabet()).ok();
                        }
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 1.5).min(1.0);
    }
    ProbMeasure::normalized(p, r.alphabet()).ok()
}

fn objective_value(p: &[f64], r: &ProbMeasure, alpha: AlphaParam) -> Option<f64> {
    let pm = ProbMeasure::normalized(p.to_vec(), r.alphabet()).ok()?;
    let v = relative_alpha_entropy(&pm, r, alpha).ok()?;
    Some(if v.is_finite() {
        v.value()
    } else {
        f64::INFINITY
    })
}

/// Dykstra's alternating projection onto {F·P = 0, ΣP = 1} ∩ {P ≥ 0}.
fn dykstra(v: &[f64], rows: &[Vec<f64>], n: usize) -> Option<Vec<f64>> {
    let mut a_rows: Vec<Vec<f64>> = rows.to_vec();
    a_rows.push(vec![1.0; n]);
    let mut b = vec![0.0; rows.len()];
    b.push(1.0);
    let nr = a_rows.len();
    let mut gram = vec![vec![0.0; nr]; nr];
    for i in 0..nr {
        for j in 0..nr {
            gram[i][j] = linalg::dot(&a_rows[i], &a_rows[j]);
        }
    }
    let affine = |x: &[f64]| -> Option<Vec<f64>> {
        let resid: Vec<f64> = a_rows
            .iter()
            .zip(b.iter())
            .map(|(row, bv)| linalg::dot(row, x) - bv)
            .collect();
        let lambda = linalg::solve(gram.clone(), resid)?;
        let mut out = x.to_vec();
        for (row, l) in a_rows.iter().zip(lambda.iter()) {
            for (o, rv) in out.iter_mut().zip(row.iter()) {
                *o -= l * rv;
            }
        }
        Some(out)
    };
    let mut x = v.to_vec();
    let mut pc = vec![0.0; n];
    let mut qc = vec![0.0; n];
    for _ in 0..300 {
        let y_in: Vec<f64> = x.iter().zip(pc.iter()).map(|(a2, b2)| a2 + b2).collect();
        let y = affine(&y_in)?;
        for i in 0..n {
            pc[i] = y_in[i] - y[i];
        }
        let x_in: Vec<f64> = y.iter().zip(qc.iter()).map(|(a2, b2)| a2 + b2).collect();
        let x_new: Vec<f64> = x_in.iter().map(|&v2| v2.max(0.0)).collect();
        for i in 0..n {
            qc[i] = x_in[i] - x_new[i];
        }
        let moved: f64 = x
            .iter()
            .zip(x_new.iter())
            .map(|(a2, b2)| (a2 - b2).abs())
            .fold(0.0, f64::max);
        x = x_new;
        if moved < 1e-15 {
            break;
        }
    }
    // final exactness pass: nonnegativity is already there, pin the affine part
    let y = affine(&x)?;
    Some(y.iter().map(|&v2| v2.max(0.0)).collect())
}

#[allow(clippy::too_many_arguments)]
fn assemble_result(
    l: &LinearFamily,
    r: &ProbMeasure,
    alpha: AlphaParam,
    coords: &[usize],
    prob: &DualProblem,
    out: NewtonOut,
    opts: &SolverOptions,
) -> Result<ProjectionResult> {
    let a = alpha.get();
    let n = r.len();
    let mut weights = vec![0.0; n];
    for (xi, &x) in coords.iter().enumerate() {
        weights[x] = out.weights[xi];
    }
    let q = ProbMeasure::normalized(weights, l.alphabet())?;
    let member_resid = l.residual(&q)?;
    let form_resid = form_residual(prob, coords, &q, &out.theta, out.z, a);
    let kkt_residual = member_resid.max(form_resid);
    let status = if kkt_residual <= opts.kkt_tol {
        Status::Converged
    } else {
        Status::MaxIterations
    };
    let active_support = q.support();
    let gap = gap_bound(&q, &out.theta, out.z, a, kkt_residual, &active_support);
    Ok(ProjectionResult {
        q,
        theta_star: out.theta,
        z: out.z,
        active_support,
        kkt_residual,
        pythagorean_gap_bound: gap,
        status,
        family: l.clone(),
    })
}

/// Scaled violation of the power-law form: on the support
/// |ζQ^{α−1} − u|/max(1,|u|-scale), off the support the positive excess of u
/// (α>1). At α=1 the exponential form |ln Q + ln Z − ln R + θf|.
fn form_residual(
    prob: &DualProblem,
    coords: &[usize],
    q: &ProbMeasure,
    theta: &[f64],
    z: f64,
    a: f64,
) -> f64 {
    let u = prob.u_at(theta);
    let scale = u
        .iter()
        .filter(|v| v.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (xi, &x) in coords.iter().enumerate() {
        let qw = q.weights()[x];
        if a == 1.0 {
            if qw > 0.0 {
                worst = worst.max((qw.ln() + z.ln() - u[xi]).abs());
            }
            continue;
        }
        if qw > 0.0 {
            let zeta = z.powf(a - 1.0);
            worst = worst.max((zeta * qw.powf(a - 1.0) - u[xi]).abs() / scale);
        } else if a > 1.0 && u[xi] > 0.0 {
            worst = worst.max(u[xi] / scale);
        }
    }
    worst
}

/// Numerical slack of the Pythagorean statement implied by this
/// certificate's residuals (membership tolerance for P, moment residual for
/// Q). Exact arithmetic gives zero.
fn gap_bound(
    q: &ProbMeasure,
    theta: &[f64],
    z: f64,
    a: f64,
    residual: f64,
    support: &[usize],
) -> f64 {
    let theta_l1: f64 = theta.iter().map(|v| v.abs()).sum();
    if a == 1.0 {
        return theta_l1 * (MEMBERSHIP_TOL + residual);
    }
    let zeta = z.powf(a - 1.0);
    let qalpha: f64 = support.iter().map(|&x| q.weights()[x].powf(a)).sum();
    let den_q = zeta * qalpha;
    // pointwise lower bound of Q^{α−1} on its support
    let (qmin, qmax) = support.iter().fold((1.0f64, 0.0f64), |(lo, hi), &x| {
        (lo.min(q.weights()[x]), hi.max(q.weights()[x]))
    });
    let qpow_low = if a < 1.0 {
        qmax.powf(a - 1.0)
    } else {
        qmin.powf(a - 1.0)
    };
    let den_p = zeta * qpow_low;
    if !(den_q > 0.0) || !(den_p > 0.0) {
        return f64::INFINITY;
    }
    let big_a = (1.0 - a).abs() * theta_l1 * MEMBERSHIP_TOL / den_p;
    let big_b = (1.0 - a).abs() * theta_l1 * residual / den_q;
    if big_b >= 1.0 {
        return f64::INFINITY;
    }
    (a / (1.0 - a)).abs() * ((1.0 + big_a).ln() - (1.0 - big_b).ln())
}

/// Both sides of the Pythagorean relation at P:
/// lhs = I_α(P,R), rhs = I_α(P,Q) + I_α(Q,R). Requires P ∈ L.
pub fn pythagorean_check(
    p: &ProbMeasure,
    proj: &ProjectionResult,
    r: &ProbMeasure,
    alpha: AlphaParam,
) -> Result<(f64, f64)> {
    let resid = proj.family.residual(p)?;
    if resid > MEMBERSHIP_TOL {
        return Err(AlphaError::NotInFamily { residual: resid });
    }
    let lhs = relative_alpha_entropy(p, r, alpha)?;
    let t1 = relative_alpha_entropy(p, &proj.q, alpha)?;
    let t2 = relative_alpha_entropy(&proj.q, r, alpha)?;
    let to_f = |v: crate::divergence::DivergenceValue| {
        if v.is_finite() {
            v.value()
        } else {
            f64::INFINITY
        }
    };
    Ok((to_f(lhs), to_f(t1) + to_f(t2)))
}
