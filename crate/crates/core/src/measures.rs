//! Probability measures on a finite alphabet, escort transforms, the
//! generalized logarithm/exponential pair, and the two mixture operations
//! (geometric and ln_α) that family definitions are built from.

use std::sync::Arc;

use crate::error::{AlphaError, Result};

/// Tolerance to which stored weights must sum to 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Constructors renormalize inputs whose sum deviates from 1 by at most this
/// much (CSV/JSON inputs carry rounding noise) and reject anything worse.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// A finite alphabet. Labels are for display only; symbols are indexed 0..size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Arc<Self>> {
        if size < 2 {
            return Err(AlphaError::AlphabetTooSmall(size));
        }
        Ok(Arc::new(Alphabet { size, labels: None }))
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Arc<Self>> {
        if labels.len() < 2 {
            return Err(AlphaError::AlphabetTooSmall(labels.len()));
        }
        Ok(Arc::new(Alphabet { size: labels.len(), labels: Some(labels) }))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, x: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(x)).map(String::as_str)
    }
}

/// The order parameter of the divergence. `alpha = 1` is legal and routes to
/// Kullback-Leibler limits everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam(f64);

impl AlphaParam {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(AlphaError::InvalidAlpha(alpha));
        }
        Ok(AlphaParam(alpha))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1.0
    }
}

/// A probability measure on a finite alphabet: nonnegative weights summing
/// to 1 (within [`NORMALIZATION_TOL`]). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMeasure {
    weights: Vec<f64>,
    alphabet: Arc<Alphabet>,
}

impl ProbMeasure {
    /// Build from weights that already sum to ~1. Inputs off by at most
    /// [`RENORMALIZE_TOL`] are renormalized; anything worse is rejected.
    pub fn new(weights: Vec<f64>, alphabet: Arc<Alphabet>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(AlphaError::DimensionMismatch {
                expected: alphabet.size(),
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(AlphaError::BadWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(AlphaError::NotNormalized { sum });
        }
        let mut m = ProbMeasure { weights, alphabet };
        m.renormalize();
        Ok(m)
    }

    /// Build from weights, deriving an unlabeled alphabet of matching size.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(weights.len())?;
        ProbMeasure::new(weights, alphabet)
    }

    /// Normalize an arbitrary nonnegative vector with positive total mass.
    /// Used internally where unnormalized weights arise (escorts, mixtures,
    /// power-law members).
    pub fn normalized(weights: Vec<f64>, alphabet: Arc<Alphabet>) -> Result<Self> {
        if weights.len() != alphabet.size() {
            return Err(AlphaError::DimensionMismatch {
                expected: alphabet.size(),
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(AlphaError::BadWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(AlphaError::NotNormalized { sum });
        }
        let mut m = ProbMeasure { weights, alphabet };
        m.renormalize();
        Ok(m)
    }

    pub fn uniform(size: usize) -> Self {
        let alphabet = Alphabet::new(size).expect("uniform needs size >= 2");
        ProbMeasure {
            weights: vec![1.0 / size as f64; size],
            alphabet,
        }
    }

    fn renormalize(&mut self) {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            for w in &mut self.weights {
                *w /= sum;
            }
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alphabet(&self) -> Arc<Alphabet> {
        Arc::clone(&self.alphabet)
    }

    /// Indices carrying strictly positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&x| self.weights[x] > 0.0).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// True if the supports of `self` and `other` are disjoint.
    pub fn singular_with(&self, other: &ProbMeasure) -> bool {
        self.weights
            .iter()
            .zip(other.weights.iter())
            .all(|(&p, &q)| p == 0.0 || q == 0.0)
    }

    /// True if `self` is absolutely continuous w.r.t. `other`
    /// (every zero of `other` is a zero of `self`).
    pub fn absolutely_continuous_wrt(&self, other: &ProbMeasure) -> bool {
        self.weights
            .iter()
            .zip(other.weights.iter())
            .all(|(&p, &q)| q > 0.0 || p == 0.0)
    }

    /// Total-variation distance, `(1/2) Σ |P(x) − Q(x)|`.
    pub fn total_variation(&self, other: &ProbMeasure) -> f64 {
        0.5 * self
            .weights
            .iter()
            .zip(other.weights.iter())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    }
}

/// The escort measure of order α: weights proportional to `P(x)^α`.
///
/// Powers are taken in the log domain so that very small weights keep their
/// (relative) mass for large α instead of underflowing.
pub fn escort(p: &ProbMeasure, alpha: AlphaParam) -> ProbMeasure {
    let a = alpha.get();
    let logs: Vec<f64> = p
        .weights()
        .iter()
        .map(|&w| if w > 0.0 { a * w.ln() } else { f64::NEG_INFINITY })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|&l| (l - m).exp()).collect();
    ProbMeasure::normalized(weights, p.alphabet()).expect("escort of a nonempty measure")
}

/// The α-norm `(Σ_x P(x)^α)^{1/α}` (computed via a log-domain power sum).
pub fn alpha_norm(p: &ProbMeasure, alpha: AlphaParam) -> f64 {
    let a = alpha.get();
    (log_power_sum(p.weights(), a) / a).exp()
}

/// `ln Σ_x w(x)^a` over the support of `w`, stabilized against under/overflow.
pub(crate) fn log_power_sum(w: &[f64], a: f64) -> f64 {
    let logs: Vec<f64> = w
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| a * x.ln())
        .collect();
    log_sum_exp(&logs)
}

/// `ln Σ exp(l_i)` with the usual max shift.
pub(crate) fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m; // empty or all -inf => ln(0); all +inf => +inf
    }
    m + logs.iter().map(|&l| (l - m).exp()).sum::<f64>().ln()
}

/// The generalized logarithm `ln_α(u) = (u^{1−α} − 1)/(1−α)`, natural log at α=1.
///
/// `ln_α(0)` is the formula's own limit: `−1/(1−α)` for α<1 (finite) and −∞
/// for α>1, consistent with the clamp branch of [`e_alpha`].
pub fn ln_alpha(u: f64, alpha: AlphaParam) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(AlphaError::NegativeArgument(u));
    }
    let a = alpha.get();
    if a == 1.0 {
        return Ok(u.ln());
    }
    Ok((u.powf(1.0 - a) - 1.0) / (1.0 - a))
}

/// The generalized exponential `e_α(u) = (max{1 + (1−α)u, 0})^{1/(1−α)}`,
/// natural exp at α=1. Inverse of [`ln_alpha`] wherever the value is finite
/// and positive. For α>1 the value saturates to +∞ once the base clamps.
pub fn e_alpha(u: f64, alpha: AlphaParam) -> f64 {
    let a = alpha.get();
    if a == 1.0 {
        return u.exp();
    }
    let base = (1.0 + (1.0 - a) * u).max(0.0);
    base.powf(1.0 / (1.0 - a))
}

/// The normalized geometric mixture: weights ∝ `P(x)^t Q(x)^{1−t}`.
///
/// Endpoints return the corresponding argument exactly. For t in (0,1) the
/// support is the intersection of the two supports.
pub fn geometric_mixture(p: &ProbMeasure, q: &ProbMeasure, t: f64) -> Result<ProbMeasure> {
    check_same_size(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(AlphaError::BadMixtureWeight(t));
    }
    if t == 1.0 {
        return Ok(p.clone());
    }
    if t == 0.0 {
        return Ok(q.clone());
    }
    let weights: Vec<f64> = p
        .weights()
        .iter()
        .zip(q.weights().iter())
        .map(|(&pw, &qw)| {
            if pw > 0.0 && qw > 0.0 {
                (t * pw.ln() + (1.0 - t) * qw.ln()).exp()
            } else {
                0.0
            }
        })
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(AlphaError::SingularPair);
    }
    ProbMeasure::normalized(weights, p.alphabet())
}

/// The ln_α-mixture: weights ∝ `[t P(x)^{α−1} + (1−t) Q(x)^{α−1}]^{1/(α−1)}`.
///
/// Agrees with [`geometric_mixture`] in the α→1 limit (and dispatches to it
/// at α=1 exactly). For α<1 the support is the intersection of supports; for
/// α>1 it is the union.
pub fn ln_alpha_mixture(
    p: &ProbMeasure,
    q: &ProbMeasure,
    t: f64,
    alpha: AlphaParam,
) -> Result<ProbMeasure> {
    check_same_size(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(AlphaError::BadMixtureWeight(t));
    }
    let a = alpha.get();
    if a == 1.0 {
        return geometric_mixture(p, q, t);
    }
    if t == 1.0 {
        return Ok(p.clone());
    }
    if t == 0.0 {
        return Ok(q.clone());
    }
    let am1 = a - 1.0;
    let weights: Vec<f64> = p
        .weights()
        .iter()
        .zip(q.weights().iter())
        .map(|(&pw, &qw)| {
            // 0^{α−1} = +∞ for α<1; t·∞ = ∞ and ∞^{1/(α−1)} = 0, so zeros of
            // either argument force zeros of the mixture, as the formula wants.
            let pp = if pw > 0.0 { pw.powf(am1) } else { 0f64.powf(am1) };
            let qp = if qw > 0.0 { qw.powf(am1) } else { 0f64.powf(am1) };
            let inner = t * pp + (1.0 - t) * qp;
            if inner > 0.0 && inner.is_finite() {
                inner.powf(1.0 / am1)
            } else if inner.is_infinite() {
                0.0 // α<1 with a zero on either side
            } else {
                0.0
            }
        })
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(AlphaError::SingularPair);
    }
    ProbMeasure::normalized(weights, p.alphabet())
}

pub(crate) fn check_same_size(p: &ProbMeasure, q: &ProbMeasure) -> Result<()> {
    if p.len() != q.len() {
        return Err(AlphaError::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(w: &[f64]) -> ProbMeasure {
        ProbMeasure::from_weights(w.to_vec()).unwrap()
    }

    #[test]
    fn constructor_validates_and_renormalizes() {
        assert!(ProbMeasure::from_weights(vec![0.5, 0.5]).is_ok());
        // within the renormalize band
        let m = ProbMeasure::from_weights(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOL);
        // too far off
        assert!(matches!(
            ProbMeasure::from_weights(vec![0.5, 0.6]),
            Err(AlphaError::NotNormalized { .. })
        ));
        assert!(matches!(
            ProbMeasure::from_weights(vec![-0.1, 1.1]),
            Err(AlphaError::BadWeight { .. })
        ));
        assert!(matches!(
            ProbMeasure::from_weights(vec![1.0]),
            Err(AlphaError::AlphabetTooSmall(1))
        ));
    }

    #[test]
    fn support_tracks_positive_weights() {
        let m = pm(&[0.5, 0.0, 0.5]);
        assert_eq!(m.support(), vec![0, 2]);
        assert!(!m.has_full_support());
        assert!(pm(&[0.2, 0.3, 0.5]).has_full_support());
    }

    #[test]
    fn escort_uniform_is_fixed_point() {
        let u = ProbMeasure::uniform(4);
        for a in [0.3, 0.5, 1.0, 2.0, 4.0] {
            let e = escort(&u, AlphaParam::new(a).unwrap());
            for &w in e.weights() {
                assert!((w - 0.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn escort_direct_arithmetic() {
        // (0.25, 0.75) at α=2: (0.0625, 0.5625)/0.625 = (0.1, 0.9)
        let e = escort(&pm(&[0.25, 0.75]), AlphaParam::new(2.0).unwrap());
        assert!((e.weights()[0] - 0.1).abs() < 1e-14);
        assert!((e.weights()[1] - 0.9).abs() < 1e-14);
    }

    #[test]
    fn escort_preserves_zeros_and_ties() {
        let e = escort(&pm(&[0.5, 0.5, 0.0]), AlphaParam::new(0.5).unwrap());
        assert!((e.weights()[0] - 0.5).abs() < 1e-15);
        assert!((e.weights()[1] - 0.5).abs() < 1e-15);
        assert_eq!(e.weights()[2], 0.0);
    }

    #[test]
    fn escort_survives_extreme_ratios() {
        let m = ProbMeasure::normalized(vec![1.0, 1e-60], Alphabet::new(2).unwrap()).unwrap();
        let e = escort(&m, AlphaParam::new(4.0).unwrap());
        assert_eq!(e.support(), vec![0, 1]);
        // (1e-60)^4 / 1^4 = 1e-240, representable and exact in relative terms
        assert!((e.weights()[1] / 1e-240 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn escort_inverse_pair() {
        let m = pm(&[0.1, 0.2, 0.3, 0.4]);
        for a in [0.3, 0.7, 1.5, 4.0] {
            let inner = escort(&m, AlphaParam::new(a).unwrap());
            let back = escort(&inner, AlphaParam::new(1.0 / a).unwrap());
            for (w, v) in back.weights().iter().zip(m.weights()) {
                assert!((w - v).abs() < 1e-12, "alpha={a}");
            }
        }
    }

    #[test]
    fn alpha_norm_closed_forms() {
        let m = pm(&[0.25, 0.75]);
        assert!((alpha_norm(&m, AlphaParam::new(1.0).unwrap()) - 1.0).abs() < 1e-12);
        // (Σ p^2)^{1/2} = sqrt(0.625)
        assert!(
            (alpha_norm(&m, AlphaParam::new(2.0).unwrap()) - 0.7905694150420949).abs() < 1e-13
        );
        // uniform on n: n^{(1−α)/α}
        let u = ProbMeasure::uniform(5);
        for a in [0.4, 2.0, 3.0] {
            let expect = 5f64.powf((1.0 - a) / a);
            assert!((alpha_norm(&u, AlphaParam::new(a).unwrap()) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_alpha_values_and_edges() {
        let a2 = AlphaParam::new(2.0).unwrap();
        let a05 = AlphaParam::new(0.5).unwrap();
        let a1 = AlphaParam::new(1.0).unwrap();
        for a in [a2, a05, a1] {
            assert_eq!(ln_alpha(1.0, a).unwrap(), 0.0);
        }
        assert!((ln_alpha(std::f64::consts::E, a1).unwrap() - 1.0).abs() < 1e-15);
        // (4^{−1} − 1)/(−1) = 0.75
        assert!((ln_alpha(4.0, a2).unwrap() - 0.75).abs() < 1e-15);
        // u=0: finite limit −1/(1−α) for α<1, −∞ for α>1
        assert!((ln_alpha(0.0, a05).unwrap() - (-2.0)).abs() < 1e-15);
        assert_eq!(ln_alpha(0.0, a2).unwrap(), f64::NEG_INFINITY);
        // saturation at +∞ for α>1: 1/(α−1)
        assert!((ln_alpha(f64::INFINITY, a2).unwrap() - 1.0).abs() < 1e-15);
        assert!(ln_alpha(-0.5, a2).is_err());
    }

    #[test]
    fn e_alpha_values_and_clamp() {
        let a2 = AlphaParam::new(2.0).unwrap();
        let a05 = AlphaParam::new(0.5).unwrap();
        for a in [0.3, 0.7, 1.0, 1.5, 4.0] {
            assert_eq!(e_alpha(0.0, AlphaParam::new(a).unwrap()), 1.0);
        }
        assert!((e_alpha(0.75, a2) - 4.0).abs() < 1e-12);
        // clamp branch: max{1 − 1.5, 0}^2 = 0
        assert_eq!(e_alpha(-3.0, a05), 0.0);
    }

    #[test]
    fn e_ln_roundtrip() {
        for a in [0.3, 0.7, 1.0, 1.5, 4.0] {
            let alpha = AlphaParam::new(a).unwrap();
            for u in [1e-3, 0.2, 1.0, 3.0, 50.0] {
                let back = e_alpha(ln_alpha(u, alpha).unwrap(), alpha);
                assert!((back - u).abs() / u < 1e-12, "a={a} u={u} back={back}");
            }
        }
    }

    #[test]
    fn geometric_mixture_basics() {
        let p = pm(&[0.5, 0.5]);
        let q = pm(&[0.1, 0.9]);
        assert_eq!(geometric_mixture(&p, &q, 1.0).unwrap(), p);
        assert_eq!(geometric_mixture(&p, &q, 0.0).unwrap(), q);
        let h = geometric_mixture(&p, &q, 0.5).unwrap();
        // normalize(√0.05, √0.45) = (1, 3)/4
        assert!((h.weights()[0] - 0.25).abs() < 1e-12);
        assert!((h.weights()[1] - 0.75).abs() < 1e-12);
        let same = geometric_mixture(&p, &p, 0.3).unwrap();
        for (w, v) in same.weights().iter().zip(p.weights()) {
            assert!((w - v).abs() < 1e-15);
        }
        let disjoint = pm(&[1.0, 0.0]);
        let other = pm(&[0.0, 1.0]);
        assert_eq!(
            geometric_mixture(&disjoint, &other, 0.5),
            Err(AlphaError::SingularPair)
        );
    }

    #[test]
    fn geometric_mixture_support_is_intersection() {
        let p = pm(&[0.5, 0.5, 0.0]);
        let q = pm(&[0.0, 0.5, 0.5]);
        let h = geometric_mixture(&p, &q, 0.5).unwrap();
        assert_eq!(h.support(), vec![1]);
    }

    #[test]
    fn ln_alpha_mixture_endpoints_and_idempotence() {
        let p = pm(&[0.7, 0.3]);
        let q = pm(&[0.2, 0.8]);
        for a in [0.5, 2.0, 4.0] {
            let alpha = AlphaParam::new(a).unwrap();
            assert_eq!(ln_alpha_mixture(&p, &q, 1.0, alpha).unwrap(), p);
            assert_eq!(ln_alpha_mixture(&p, &q, 0.0, alpha).unwrap(), q);
            let same = ln_alpha_mixture(&p, &p, 0.4, alpha).unwrap();
            for (w, v) in same.weights().iter().zip(p.weights()) {
                assert!((w - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ln_alpha_mixture_matches_geometric_near_one() {
        // The two mixtures differ at first order in (α−1) by ~(α−1)·Var/2
        // with Var the (t,1−t)-variance of ln(P/Q), so the 1e-6 agreement at
        // α = 1±1e-4 needs P and Q within a moderate log-distance.
        let p = pm(&[0.35, 0.33, 0.32]);
        let q = pm(&[0.30, 0.34, 0.36]);
        let t = 0.4;
        let geo = geometric_mixture(&p, &q, t).unwrap();
        for a in [1.0 - 1e-4, 1.0 + 1e-4] {
            let m = ln_alpha_mixture(&p, &q, t, AlphaParam::new(a).unwrap()).unwrap();
            for (w, v) in m.weights().iter().zip(geo.weights()) {
                assert!((w - v).abs() < 1e-6, "alpha={a}");
            }
        }
    }

    #[test]
    fn ln_alpha_mixture_support_rules() {
        let p = pm(&[0.5, 0.5, 0.0]);
        let q = pm(&[0.0, 0.5, 0.5]);
        // α<1: intersection
        let lo = ln_alpha_mixture(&p, &q, 0.5, AlphaParam::new(0.5).unwrap()).unwrap();
        assert_eq!(lo.support(), vec![1]);
        // α>1: union
        let hi = ln_alpha_mixture(&p, &q, 0.5, AlphaParam::new(2.0).unwrap()).unwrap();
        assert_eq!(hi.support(), vec![0, 1, 2]);
        // α<1 disjoint supports: singular
        let a = pm(&[1.0, 0.0]);
        let b = pm(&[0.0, 1.0]);
        assert_eq!(
            ln_alpha_mixture(&a, &b, 0.5, AlphaParam::new(0.5).unwrap()),
            Err(AlphaError::SingularPair)
        );
    }

    #[test]
    fn holder_bound_on_escort_pairs() {
        // Σ P'^t Q'^{1−t} ≤ 1 for escorts P', Q'
        let p = pm(&[0.6, 0.3, 0.1]);
        let q = pm(&[0.2, 0.5, 0.3]);
        for a in [0.3, 0.7, 1.5, 4.0] {
            let alpha = AlphaParam::new(a).unwrap();
            let pe = escort(&p, alpha);
            let qe = escort(&q, alpha);
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let s: f64 = pe
                    .weights()
                    .iter()
                    .zip(qe.weights())
                    .map(|(&x, &y)| x.powf(t) * y.powf(1.0 - t))
                    .sum();
                assert!(s <= 1.0 + 1e-12, "a={a} t={t} s={s}");
            }
        }
    }
}
