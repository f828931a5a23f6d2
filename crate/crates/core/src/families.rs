//! Linear families, α-power-law families and their clipped extension,
//! membership and parameter fitting, the orthogonal-family construction, and
//! reference-measure reparametrization. Also the small parametric families
//! (binomial, exponential) used by scans and estimation front ends.

use std::sync::Arc;

use rand::{Rng, RngExt};

use crate::error::{AlphaError, Result};
use crate::linalg;
use crate::measures::{check_same_size, log_sum_exp, Alphabet, AlphaParam, ProbMeasure};

/// Constraint-residual tolerance for membership decisions.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// The linear family {P : Σ_x P(x) fᵢ(x) = 0, i = 1..k} on a finite alphabet.
///
/// Constraints are homogeneous; affine constraints Σ P g = c are ingested by
/// shifting g − c·𝟙 before construction. k = 0 is allowed and denotes the
/// whole simplex. Dependent rows are dropped at construction (Gram-Schmidt
/// with threshold 1e-10), keeping the earliest independent subset.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFamily {
    rows: Vec<Vec<f64>>,
    retained: Vec<usize>,
    alphabet: Arc<Alphabet>,
}

impl LinearFamily {
    pub fn new(rows: Vec<Vec<f64>>, alphabet: Arc<Alphabet>) -> Result<Self> {
        for row in &rows {
            validate_row(row, alphabet.size())?;
        }
        let retained = linalg::independent_rows(&rows, RANK_TOL);
        let rows = retained.iter().map(|&i| rows[i].clone()).collect();
        Ok(LinearFamily {
            rows,
            retained,
            alphabet,
        })
    }

    /// Number of (independent) constraints.
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Positions, within the originally supplied row list, of the rows kept
    /// after rank reduction.
    pub fn retained_indices(&self) -> &[usize] {
        &self.retained
    }

    pub fn alphabet(&self) -> Arc<Alphabet> {
        Arc::clone(&self.alphabet)
    }

    /// The moment vector F·P.
    pub fn constraint_values(&self, p: &ProbMeasure) -> Result<Vec<f64>> {
        if p.len() != self.alphabet.size() {
            return Err(AlphaError::DimensionMismatch {
                expected: self.alphabet.size(),
                got: p.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| linalg::dot(row, p.weights()))
            .collect())
    }

    /// ‖F·P‖_∞.
    pub fn residual(&self, p: &ProbMeasure) -> Result<f64> {
        Ok(self
            .constraint_values(p)?
            .iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn is_member(&self, p: &ProbMeasure) -> Result<bool> {
        self.is_member_with_tol(p, MEMBERSHIP_TOL)
    }

    pub fn is_member_with_tol(&self, p: &ProbMeasure, tol: f64) -> Result<bool> {
        Ok(self.residual(p)? <= tol)
    }
}

fn validate_row(row: &[f64], n: usize) -> Result<()> {
    if row.len() != n {
        return Err(AlphaError::DimensionMismatch {
            expected: n,
            got: row.len(),
        });
    }
    for (index, &value) in row.iter().enumerate() {
        if !value.is_finite() {
            return Err(AlphaError::BadConstraint { index, value });
        }
    }
    Ok(())
}

/// The α-power-law family M⁽α⁾ generated by a reference measure R and k
/// constraint functions: members satisfy
/// `P_θ(x)^{α−1} = Z(θ)^{1−α} [R(x)^{α−1} + (1−α) Σ θᵢ fᵢ(x)]`
/// for θ in the open admissible set where the bracket is positive everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFamily {
    alpha: AlphaParam,
    r: ProbMeasure,
    rows: Vec<Vec<f64>>,
}

impl PowerLawFamily {
    /// α ≠ 1; for α > 1 the reference must have full support.
    pub fn new(alpha: AlphaParam, r: ProbMeasure, rows: Vec<Vec<f64>>) -> Result<Self> {
        if alpha.is_one() {
            return Err(AlphaError::InvalidAlpha(1.0));
        }
        if alpha.get() > 1.0 && !r.has_full_support() {
            return Err(AlphaError::ReferenceNotFullSupport);
        }
        for row in &rows {
            validate_row(row, r.len())?;
        }
        Ok(PowerLawFamily { alpha, r, rows })
    }

    pub fn alpha(&self) -> AlphaParam {
        self.alpha
    }

    pub fn reference(&self) -> &ProbMeasure {
        &self.r
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// The bracket u_θ(x) = R(x)^{α−1} + (1−α) Σ θᵢ fᵢ(x). For α < 1 a zero
    /// of R contributes R(x)^{α−1} = +∞, so u_θ(x) = +∞ there (and the member
    /// weight is 0, as the theory wants).
    pub fn u_values(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.rows.len() {
            return Err(AlphaError::DimensionMismatch {
                expected: self.rows.len(),
                got: theta.len(),
            });
        }
        let a = self.alpha.get();
        let n = self.r.len();
        let mut u = vec![0.0; n];
        for (x, uv) in u.iter_mut().enumerate() {
            let rw = self.r.weights()[x];
            let rpow = if rw > 0.0 {
                rw.powf(a - 1.0)
            } else {
                f64::INFINITY // α<1 only; α>1 references are full-support
            };
            let mut tilt = 0.0;
            for (ti, row) in theta.iter().zip(self.rows.iter()) {
                tilt += ti * row[x];
            }
            *uv = rpow + (1.0 - a) * tilt;
        }
        Ok(u)
    }

    /// True when the positivity condition holds at every symbol.
    pub fn is_admissible(&self, theta: &[f64]) -> Result<bool> {
        Ok(self.u_values(theta)?.iter().all(|&v| v > 0.0))
    }

    pub fn member(&self, theta: &[f64]) -> Result<ProbMeasure> {
        Ok(self.member_with_z(theta)?.0)
    }

    /// The member P_θ together with its normalizer Z(θ) = Σ u_θ^{1/(α−1)}.
    pub fn member_with_z(&self, theta: &[f64]) -> Result<(ProbMeasure, f64)> {
        let u = self.u_values(theta)?;
        if let Some(index) = u.iter().position(|&v| !(v > 0.0)) {
            return Err(AlphaError::InadmissibleTheta { index });
        }
        let ex = 1.0 / (self.alpha.get() - 1.0);
        let logs: Vec<f64> = u
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    ex * v.ln()
                } else {
                    f64::NEG_INFINITY // u = +∞, α<1: weight 0
                }
            })
            .collect();
        let log_z = log_sum_exp(&logs);
        let weights: Vec<f64> = logs.iter().map(|&l| (l - log_z).exp()).collect();
        let p = ProbMeasure::normalized(weights, self.r.alphabet())?;
        Ok((p, log_z.exp()))
    }

    /// The clipped member P(x) ∝ [u_θ(x)]₊^{1/(α−1)} of the extended family
    /// (α > 1 only); θ need not be admissible, but some u must be positive.
    pub fn clipped_member_with_z(&self, theta: &[f64]) -> Result<(ProbMeasure, f64)> {
        let a = self.alpha.get();
        if a < 1.0 {
            return Err(AlphaError::InvalidAlpha(a));
        }
        let u = self.u_values(theta)?;
        if !u.iter().any(|&v| v > 0.0) {
            return Err(AlphaError::InadmissibleTheta { index: 0 });
        }
        let ex = 1.0 / (a - 1.0);
        let logs: Vec<f64> = u
            .iter()
            .map(|&v| if v > 0.0 { ex * v.ln() } else { f64::NEG_INFINITY })
            .collect();
        let log_z = log_sum_exp(&logs);
        let weights: Vec<f64> = logs.iter().map(|&l| (l - log_z).exp()).collect();
        let p = ProbMeasure::normalized(weights, self.r.alphabet())?;
        Ok((p, log_z.exp()))
    }

    /// Least-squares fit of (θ, Z) assuming `p` follows the power-law form on
    /// its support: solve `ζ p(x)^{α−1} − (1−α) Σ θᵢfᵢ(x) = R(x)^{α−1}` over
    /// Supp(p) for (ζ, θ), with ζ = Z^{α−1}. `force_zero` lists off-support
    /// symbols where the bracket must vanish exactly (closure fits); those
    /// equations are eliminated as hard constraints before the least squares
    /// — folding them in as big-weight rows would wreck the Gram matrix.
    pub fn fit_parameters(&self, p: &ProbMeasure, force_zero: &[usize]) -> Result<PowerLawFit> {
        check_same_size(p, &self.r)?;
        let a = self.alpha.get();
        let k = self.rows.len();
        // u_θ(x) = 0 at each forced symbol reads (α−1) Σθᵢfᵢ(x) = R(x)^{α−1},
        // pinning θ to an affine subspace: θ = θ_base + span(directions)
        let (theta_base, directions) = if force_zero.is_empty() {
            let identity: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            (vec![0.0; k], identity)
        } else {
            let g: Vec<Vec<f64>> = force_zero
                .iter()
                .map(|&x| (0..k).map(|i| (a - 1.0) * self.rows[i][x]).collect())
                .collect();
            let h: Vec<f64> = force_zero
                .iter()
                .map(|&x| self.r.weights()[x].powf(a - 1.0))
                .collect();
            let base = linalg::lstsq(&g, &h)
                .ok_or(AlphaError::DegenerateDenominator("forced-zero system"))?;
            (base, linalg::null_space(&g, k))
        };
        let mut lhs: Vec<Vec<f64>> = Vec::new();
        let mut rhs: Vec<f64> = Vec::new();
        for x in 0..p.len() {
            let pw = p.weights()[x];
            if pw <= 0.0 {
                continue;
            }
            let fx: Vec<f64> = (0..k).map(|i| self.rows[i][x]).collect();
            let mut row = vec![0.0; directions.len() + 1];
            row[0] = pw.powf(a - 1.0);
            for (d, dir) in directions.iter().enumerate() {
                row[d + 1] = (a - 1.0) * linalg::dot(dir, &fx);
            }
            lhs.push(row);
            rhs.push(
                self.r.weights()[x].powf(a - 1.0) - (a - 1.0) * linalg::dot(&theta_base, &fx),
            );
        }
        let sol =
            linalg::lstsq(&lhs, &rhs).ok_or(AlphaError::DegenerateDenominator("form fit"))?;
        let zeta = sol[0];
        let mut theta = theta_base;
        for (d, dir) in directions.iter().enumerate() {
            for (t, dv) in theta.iter_mut().zip(dir.iter()) {
                *t += sol[d + 1] * dv;
            }
        }
        let u = self.u_values(&theta)?;
        let mut support_residual = 0.0f64;
        let mut off_support_excess = 0.0f64;
        for x in 0..p.len() {
            let pw = p.weights()[x];
            if pw > 0.0 {
                support_residual = support_residual.max((zeta * pw.powf(a - 1.0) - u[x]).abs());
            } else if u[x].is_finite() {
                // for α>1 the clipped form needs u ≤ 0 off the support; for
                // α<1 an off-support u is +∞ (R zero) and imposes nothing
                off_support_excess = off_support_excess.max(u[x]);
            }
        }
        let z = if zeta > 0.0 {
            Some(zeta.powf(1.0 / (a - 1.0)))
        } else {
            None
        };
        Ok(PowerLawFit {
            theta,
            zeta,
            z,
            support_residual,
            off_support_excess,
        })
    }
}

/// Result of [`PowerLawFamily::fit_parameters`].
#[derive(Debug, Clone)]
pub struct PowerLawFit {
    /// Fitted dual parameters.
    pub theta: Vec<f64>,
    /// Fitted Z^{α−1} (may be nonpositive when the form does not fit).
    pub zeta: f64,
    /// Z recovered from ζ when ζ > 0.
    pub z: Option<f64>,
    /// max over Supp(p) of |ζ p^{α−1} − u_θ|.
    pub support_residual: f64,
    /// max over off-support symbols of u_θ (0 when none); positive values
    /// break the clipped form.
    pub off_support_excess: f64,
}

/// The extension M̂⁽α⁾₊ of a power-law family (α > 1): clipped members tied
/// to the forward projection Q = P_{θ*} of R on the associated linear family.
#[derive(Debug, Clone)]
pub struct ExtendedPowerLawFamily {
    base: PowerLawFamily,
    theta_star: Vec<f64>,
}

impl ExtendedPowerLawFamily {
    pub fn new(base: PowerLawFamily, theta_star: Vec<f64>) -> Result<Self> {
        if base.alpha().get() < 1.0 {
            return Err(AlphaError::InvalidAlpha(base.alpha().get()));
        }
        if theta_star.len() != base.k() {
            return Err(AlphaError::DimensionMismatch {
                expected: base.k(),
                got: theta_star.len(),
            });
        }
        Ok(ExtendedPowerLawFamily { base, theta_star })
    }

    pub fn base(&self) -> &PowerLawFamily {
        &self.base
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    /// Membership test for the pair (P, θ): (a) P equals the normalized
    /// clipped member at θ, (b) Supp(P_{θ*}) ⊆ Supp(P), and (c)
    /// Σθᵢfᵢ(x) ≤ Σθ*ᵢfᵢ(x) off Supp(P). All to tolerance 1e-9.
    pub fn contains(&self, p: &ProbMeasure, theta: &[f64]) -> Result<bool> {
        check_same_size(p, self.base.reference())?;
        let clipped = match self.base.clipped_member_with_z(theta) {
            Ok((c, _)) => c,
            Err(AlphaError::InadmissibleTheta { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let form_ok = p
            .weights()
            .iter()
            .zip(clipped.weights().iter())
            .all(|(&pw, &cw)| (pw - cw).abs() <= MEMBERSHIP_TOL);
        if !form_ok {
            return Ok(false);
        }
        let (qstar, _) = self.base.clipped_member_with_z(&self.theta_star)?;
        for x in 0..p.len() {
            if qstar.weights()[x] > 0.0 && p.weights()[x] <= 0.0 {
                return Ok(false);
            }
        }
        for x in 0..p.len() {
            if p.weights()[x] <= 0.0 {
                let tilt: f64 = (0..self.base.k())
                    .map(|i| theta[i] * self.base.rows[i][x])
                    .sum();
                let tilt_star: f64 = (0..self.base.k())
                    .map(|i| self.theta_star[i] * self.base.rows[i][x])
                    .sum();
                if tilt > tilt_star + MEMBERSHIP_TOL {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// The linear family L̃ orthogonal to M⁽α⁾ through P̂: rows
/// f̃ᵢ = fᵢ − τᵢᴿ R^{α−1} with τᵢᴿ = Σ P̂ fᵢ / Σ P̂ R^{α−1}, so that P̂ ∈ L̃.
pub fn orthogonal_linear_family(
    m: &PowerLawFamily,
    p_hat: &ProbMeasure,
) -> Result<LinearFamily> {
    Ok(orthogonal_family_with_taus(m, p_hat)?.0)
}

/// As [`orthogonal_linear_family`], also returning the tilts τᵢᴿ needed to
/// map dual parameters back to the original constraint basis.
pub fn orthogonal_family_with_taus(
    m: &PowerLawFamily,
    p_hat: &ProbMeasure,
) -> Result<(LinearFamily, Vec<f64>)> {
    check_same_size(m.reference(), p_hat)?;
    if !m.reference().has_full_support() {
        return Err(AlphaError::ReferenceNotFullSupport);
    }
    let a = m.alpha().get();
    let rpow: Vec<f64> = m
        .reference()
        .weights()
        .iter()
        .map(|&w| w.powf(a - 1.0))
        .collect();
    let denom = linalg::dot(p_hat.weights(), &rpow);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(AlphaError::DegenerateDenominator("orthogonal-family tilt"));
    }
    let mut taus = Vec::with_capacity(m.k());
    let mut rows = Vec::with_capacity(m.k());
    for fi in m.rows() {
        let tau = linalg::dot(p_hat.weights(), fi) / denom;
        let row: Vec<f64> = fi
            .iter()
            .zip(rpow.iter())
            .map(|(&f, &rp)| f - tau * rp)
            .collect();
        taus.push(tau);
        rows.push(row);
    }
    let family = LinearFamily::new(rows, p_hat.alphabet())?;
    Ok((family, taus))
}

/// A power-law family re-expressed around one of its own members:
/// R′ = P_{θ*}, same constraint functions, with the parameter map
/// ξ(θ) = (θ − θ*)/Z(θ*)^{α−1}.
#[derive(Debug, Clone)]
pub struct Reparametrized {
    family: PowerLawFamily,
    theta_star: Vec<f64>,
    z_star: f64,
}

impl Reparametrized {
    pub fn family(&self) -> &PowerLawFamily {
        &self.family
    }

    pub fn z_star(&self) -> f64 {
        self.z_star
    }

    /// Map a parameter of the original family to the new one.
    pub fn xi(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.theta_star.len() {
            return Err(AlphaError::DimensionMismatch {
                expected: self.theta_star.len(),
                got: theta.len(),
            });
        }
        let scale = self.z_star.powf(self.family.alpha().get() - 1.0);
        Ok(theta
            .iter()
            .zip(self.theta_star.iter())
            .map(|(t, ts)| (t - ts) / scale)
            .collect())
    }
}

/// Translate-and-rescale the parameter space so that the member at
/// `theta_star` becomes the reference measure.
pub fn reparametrize(m: &PowerLawFamily, theta_star: &[f64]) -> Result<Reparametrized> {
    let (r_prime, z_star) = m.member_with_z(theta_star)?;
    let family = PowerLawFamily::new(m.alpha(), r_prime, m.rows().to_vec())?;
    Ok(Reparametrized {
        family,
        theta_star: theta_star.to_vec(),
        z_star,
    })
}

/// A finite-dimensional parametric family over a fixed alphabet, the input
/// contract for scans and estimating equations.
pub trait ParametricFamily {
    fn dim(&self) -> usize;
    fn alphabet(&self) -> Arc<Alphabet>;
    fn member(&self, theta: &[f64]) -> Result<ProbMeasure>;

    /// Score s_j(x;θ) = ∂ ln P_θ(x)/∂θ_j; central differences (step 1e-6)
    /// unless a closed form is provided. Requires P_θ(x) > 0 near θ.
    fn score(&self, theta: &[f64], x: usize) -> Result<Vec<f64>> {
        let h = 1e-6;
        let mut s = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let mut plus = theta.to_vec();
            plus[j] += h;
            let mut minus = theta.to_vec();
            minus[j] -= h;
            let wp = self.member(&plus)?.weights()[x];
            let wm = self.member(&minus)?.weights()[x];
            if !(wp > 0.0 && wm > 0.0) {
                return Err(AlphaError::DegenerateDenominator("score at zero mass"));
            }
            s.push((wp.ln() - wm.ln()) / (2.0 * h));
        }
        Ok(s)
    }
}

impl ParametricFamily for PowerLawFamily {
    fn dim(&self) -> usize {
        self.k()
    }

    fn alphabet(&self) -> Arc<Alphabet> {
        self.r.alphabet()
    }

    fn member(&self, theta: &[f64]) -> Result<ProbMeasure> {
        PowerLawFamily::member(self, theta)
    }

    // closed form: s_j(x) = E_{P_θ}[f_j/u_θ] − f_j(x)/u_θ(x)
    fn score(&self, theta: &[f64], x: usize) -> Result<Vec<f64>> {
        let u = self.u_values(theta)?;
        if let Some(index) = u.iter().position(|&v| !(v > 0.0)) {
            return Err(AlphaError::InadmissibleTheta { index });
        }
        let p = self.member(theta)?;
        let mut s = Vec::with_capacity(self.k());
        for row in &self.rows {
            let mean: f64 = (0..u.len())
                .filter(|&y| u[y].is_finite())
                .map(|y| p.weights()[y] * row[y] / u[y])
                .sum();
            s.push(mean - row[x] / u[x]);
        }
        Ok(s)
    }
}

/// The binomial family on X = {0,…,n}: P_θ(x) = C(n,x) θˣ (1−θ)^{n−x},
/// θ ∈ (0,1). Reverse-projecting onto it can be bimodal in θ at large α.
#[derive(Debug, Clone)]
pub struct BinomialFamily {
    trials: usize,
    coeffs: Vec<f64>,
    alphabet: Arc<Alphabet>,
}

impl BinomialFamily {
    pub fn new(trials: usize) -> Result<Self> {
        if trials == 0 {
            return Err(AlphaError::AlphabetTooSmall(1));
        }
        let mut coeffs = vec![1.0; trials + 1];
        for x in 1..=trials {
            coeffs[x] = coeffs[x - 1] * (trials - x + 1) as f64 / x as f64;
        }
        Ok(BinomialFamily {
            trials,
            coeffs,
            alphabet: Alphabet::new(trials + 1)?,
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }
}

impl ParametricFamily for BinomialFamily {
    fn dim(&self) -> usize {
        1
    }

    fn alphabet(&self) -> Arc<Alphabet> {
        Arc::clone(&self.alphabet)
    }

    fn member(&self, theta: &[f64]) -> Result<ProbMeasure> {
        if theta.len() != 1 {
            return Err(AlphaError::DimensionMismatch {
                expected: 1,
                got: theta.len(),
            });
        }
        let t = theta[0];
        if !(t > 0.0 && t < 1.0) {
            return Err(AlphaError::InadmissibleTheta { index: 0 });
        }
        let weights: Vec<f64> = (0..=self.trials)
            .map(|x| self.coeffs[x] * t.powi(x as i32) * (1.0 - t).powi((self.trials - x) as i32))
            .collect();
        ProbMeasure::normalized(weights, Arc::clone(&self.alphabet))
    }

    fn score(&self, theta: &[f64], x: usize) -> Result<Vec<f64>> {
        let t = theta[0];
        if !(t > 0.0 && t < 1.0) {
            return Err(AlphaError::InadmissibleTheta { index: 0 });
        }
        Ok(vec![x as f64 / t - (self.trials - x) as f64 / (1.0 - t)])
    }
}

/// The exponential family P_θ ∝ R e^{−θ·f}: the α→1 limit of the power-law
/// family with the same data.
#[derive(Debug, Clone)]
pub struct ExponentialFamily {
    r: ProbMeasure,
    rows: Vec<Vec<f64>>,
}

impl ExponentialFamily {
    pub fn new(r: ProbMeasure, rows: Vec<Vec<f64>>) -> Result<Self> {
        for row in &rows {
            validate_row(row, r.len())?;
        }
        Ok(ExponentialFamily { r, rows })
    }

    pub fn reference(&self) -> &ProbMeasure {
        &self.r
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl ParametricFamily for ExponentialFamily {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn alphabet(&self) -> Arc<Alphabet> {
        self.r.alphabet()
    }

    fn member(&self, theta: &[f64]) -> Result<ProbMeasure> {
        if theta.len() != self.rows.len() {
            return Err(AlphaError::DimensionMismatch {
                expected: self.rows.len(),
                got: theta.len(),
            });
        }
        let logs: Vec<f64> = (0..self.r.len())
            .map(|x| {
                let rw = self.r.weights()[x];
                if rw > 0.0 {
                    let tilt: f64 = theta
                        .iter()
                        .zip(self.rows.iter())
                        .map(|(t, row)| t * row[x])
                        .sum();
                    rw.ln() - tilt
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let m = log_sum_exp(&logs);
        let weights: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
        ProbMeasure::normalized(weights, self.r.alphabet())
    }

    // s_j(x) = −f_j(x) + E_{P_θ}[f_j]
    fn score(&self, theta: &[f64], x: usize) -> Result<Vec<f64>> {
        let p = self.member(theta)?;
        Ok(self
            .rows
            .iter()
            .map(|row| linalg::dot(p.weights(), row) - row[x])
            .collect())
    }
}

/// Random members of L ∩ Δ via the null-space parametrization around a
/// relative-interior point. Samples cover the relative interior (not
/// uniformly) and all satisfy the constraints to membership tolerance.
pub fn sample_in_family<R: Rng + ?Sized>(
    l: &LinearFamily,
    count: usize,
    rng: &mut R,
) -> Result<Vec<ProbMeasure>> {
    let n = l.alphabet().size();
    let (support, interior) =
        crate::linprog::family_support(l.rows(), n)?.ok_or(AlphaError::Infeasible)?;
    let m = support.len();
    // constraint rows restricted to the support sub-alphabet, plus the
    // total-mass row
    let mut rows_s: Vec<Vec<f64>> = l
        .rows()
        .iter()
        .map(|row| support.iter().map(|&x| row[x]).collect())
        .collect();
    rows_s.push(vec![1.0; m]);
    let nullity = linalg::null_space(&rows_s, m);
    if nullity.is_empty() {
        let p = ProbMeasure::normalized(interior, l.alphabet())?;
        return Ok(vec![p; count]);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut dir_s = vec![0.0; m];
        for basis_vec in &nullity {
            let z: f64 = rng.random_range(-1.0..1.0);
            for (d, b) in dir_s.iter_mut().zip(basis_vec.iter()) {
                *d += z * b;
            }
        }
        // stay strictly inside: step range determined by the first wall hit
        let mut t_max = f64::INFINITY;
        let mut t_min = f64::NEG_INFINITY;
        for (i, &x) in support.iter().enumerate() {
            let w = interior[x];
            if dir_s[i] < -1e-15 {
                t_max = t_max.min(-w / dir_s[i]);
            } else if dir_s[i] > 1e-15 {
                t_min = t_min.max(-w / dir_s[i]);
            }
        }
        if !(t_max.is_finite() && t_min.is_finite()) {
            t_max = 0.0;
            t_min = 0.0;
        }
        let t = rng.random_range(0.95 * t_min..=0.95 * t_max);
        let mut weights = interior.clone();
        for (i, &x) in support.iter().enumerate() {
            weights[x] = (weights[x] + t * dir_s[i]).max(0.0);
        }
        out.push(ProbMeasure::normalized(weights, l.alphabet())?);
    }
    Ok(out)
}
