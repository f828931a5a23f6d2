//! Relative α-entropy in both algebraic forms, its α→1 Kullback-Leibler
//! limit, Rényi entropy, and the log-convexity gap used as a test oracle.

use crate::error::{AlphaError, Result};
use crate::measures::{
    check_same_size, escort, geometric_mixture, log_power_sum, log_sum_exp, AlphaParam,
    ProbMeasure,
};

/// A divergence evaluation: a nonnegative real or +∞.
///
/// +∞ is a value, not an error, so minimizers can compare candidates
/// uniformly — reverse projections legitimately evaluate infinite candidates.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DivergenceValue {
    value: f64,
    finite: bool,
}

impl DivergenceValue {
    pub fn finite(value: f64) -> Self {
        debug_assert!(value > -1e-9, "divergence evaluated to {value}");
        DivergenceValue {
            value: value.max(0.0),
            finite: true,
        }
    }

    pub fn infinite() -> Self {
        DivergenceValue {
            value: f64::INFINITY,
            finite: false,
        }
    }

    /// The numeric value; +∞ when not finite.
    pub fn value(self) -> f64 {
        self.value
    }

    pub fn is_finite(self) -> bool {
        self.finite
    }
}

impl std::fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.finite {
            write!(f, "{}", self.value)
        } else {
            write!(f, "inf")
        }
    }
}

/// Relative α-entropy `I_α(P, Q)` in the expanded form
/// `(α/(1−α)) ln Σ P Q^{α−1} − (1/(1−α)) ln Σ P^α + ln Σ Q^α`.
///
/// Infinite exactly when (α<1 and P is not absolutely continuous w.r.t. Q)
/// or (α>1 and the supports of P and Q are disjoint). `α=1` dispatches to
/// [`kl_divergence`]. All power sums run in the log domain.
pub fn relative_alpha_entropy(
    p: &ProbMeasure,
    q: &ProbMeasure,
    alpha: AlphaParam,
) -> Result<DivergenceValue> {
    check_same_size(p, q)?;
    let a = alpha.get();
    if a == 1.0 {
        return kl_divergence(p, q);
    }
    if p.weights() == q.weights() {
        return Ok(DivergenceValue::finite(0.0));
    }
    if a < 1.0 && !p.absolutely_continuous_wrt(q) {
        return Ok(DivergenceValue::infinite());
    }
    if a > 1.0 && p.singular_with(q) {
        return Ok(DivergenceValue::infinite());
    }
    // Cross term over the common support; for α>1 the terms with Q(x)=0
    // contribute P(x)·0^{α−1} = 0 and are correctly dropped.
    let cross_logs: Vec<f64> = p
        .weights()
        .iter()
        .zip(q.weights().iter())
        .filter(|(&pw, &qw)| pw > 0.0 && qw > 0.0)
        .map(|(&pw, &qw)| pw.ln() + (a - 1.0) * qw.ln())
        .collect();
    let log_cross = log_sum_exp(&cross_logs);
    let log_pa = log_power_sum(p.weights(), a);
    let log_qa = log_power_sum(q.weights(), a);
    let v = a / (1.0 - a) * log_cross - log_pa / (1.0 - a) + log_qa;
    Ok(DivergenceValue::finite(v))
}

/// The same divergence in the `‖·‖`-normalized form
/// `(α/(1−α)) ln Σ (P/‖P‖)(Q/‖Q‖)^{α−1}` with `‖·‖` the α-norm.
///
/// Takes raw nonnegative weight vectors: the form is invariant under
/// rescaling of either argument, so `q` need not be normalized. Linear-domain
/// arithmetic on purpose — this is the independent cross-check path for
/// [`relative_alpha_entropy`], not the production evaluator.
pub fn relative_alpha_entropy_norm_form(
    p: &[f64],
    q: &[f64],
    alpha: AlphaParam,
) -> Result<DivergenceValue> {
    if p.len() != q.len() {
        return Err(AlphaError::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    for (index, &value) in p.iter().chain(q.iter()).enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(AlphaError::BadWeight {
                index: index % p.len(),
                value,
            });
        }
    }
    if !(p.iter().sum::<f64>() > 0.0) || !(q.iter().sum::<f64>() > 0.0) {
        return Err(AlphaError::NotNormalized { sum: 0.0 });
    }
    let a = alpha.get();
    if a == 1.0 {
        let pm = ProbMeasure::normalized(p.to_vec(), crate::measures::Alphabet::new(p.len())?)?;
        let qm = ProbMeasure::normalized(q.to_vec(), pm.alphabet())?;
        return kl_divergence(&pm, &qm);
    }
    let np = (log_power_sum(p, a) / a).exp();
    let nq = (log_power_sum(q, a) / a).exp();
    let mut s = 0.0;
    for (&pw, &qw) in p.iter().zip(q.iter()) {
        if pw > 0.0 {
            // q=0 terms: 0^{α−1} is 0 for α>1 and +∞ for α<1, exactly the
            // IEEE powf semantics, so the infinity conditions fall out here.
            s += (pw / np) * (qw / nq).powf(a - 1.0);
        }
    }
    let v = a / (1.0 - a) * s.ln();
    if v.is_finite() {
        Ok(DivergenceValue::finite(v))
    } else {
        Ok(DivergenceValue::infinite())
    }
}

/// Kullback-Leibler divergence `Σ P(x) ln(P(x)/Q(x))` with the conventions
/// `0 ln(0/q) = 0` and `p ln(p/0) = +∞` for p>0.
pub fn kl_divergence(p: &ProbMeasure, q: &ProbMeasure) -> Result<DivergenceValue> {
    check_same_size(p, q)?;
    if p.weights() == q.weights() {
        return Ok(DivergenceValue::finite(0.0));
    }
    let mut total = 0.0;
    for (&pw, &qw) in p.weights().iter().zip(q.weights().iter()) {
        if pw == 0.0 {
            continue;
        }
        if qw == 0.0 {
            return Ok(DivergenceValue::infinite());
        }
        total += pw * (pw.ln() - qw.ln());
    }
    Ok(DivergenceValue::finite(total))
}

/// Rényi entropy `(1/(1−α)) ln Σ P(x)^α`; Shannon entropy at α=1.
pub fn renyi_entropy(p: &ProbMeasure, alpha: AlphaParam) -> f64 {
    let a = alpha.get();
    if a == 1.0 {
        return -p
            .weights()
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| w * w.ln())
            .sum::<f64>();
    }
    log_power_sum(p.weights(), a) / (1.0 - a)
}

/// The log-convexity gap
/// `t I_α(R,P) + (1−t) I_α(R,Q) − [I_α(R, geo-mix(P,Q,t)) − ln Σ P'^t Q'^{1−t}]`
/// with P', Q' the α-escorts. Nonnegative for α<1, nonpositive for α>1.
///
/// Requires every constituent divergence to be finite; otherwise the gap is
/// not defined and `InfiniteTerm` is returned.
pub fn log_convexity_gap(
    r: &ProbMeasure,
    p: &ProbMeasure,
    q: &ProbMeasure,
    t: f64,
    alpha: AlphaParam,
) -> Result<f64> {
    check_same_size(r, p)?;
    check_same_size(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(AlphaError::BadMixtureWeight(t));
    }
    if t == 0.0 || t == 1.0 || p.weights() == q.weights() {
        return Ok(0.0);
    }
    let irp = relative_alpha_entropy(r, p, alpha)?;
    let irq = relative_alpha_entropy(r, q, alpha)?;
    let mix = geometric_mixture(p, q, t)?;
    let irm = relative_alpha_entropy(r, &mix, alpha)?;
    if !(irp.is_finite() && irq.is_finite() && irm.is_finite()) {
        return Err(AlphaError::InfiniteTerm);
    }
    let pe = escort(p, alpha);
    let qe = escort(q, alpha);
    let holder_sum: f64 = pe
        .weights()
        .iter()
        .zip(qe.weights().iter())
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (t * x.ln() + (1.0 - t) * y.ln()).exp())
        .sum();
    if !(holder_sum > 0.0) {
        return Err(AlphaError::InfiniteTerm);
    }
    let lhs = t * irp.value() + (1.0 - t) * irq.value();
    let rhs = irm.value() - holder_sum.ln();
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(w: &[f64]) -> ProbMeasure {
        ProbMeasure::from_weights(w.to_vec()).unwrap()
    }

    fn alpha(a: f64) -> AlphaParam {
        AlphaParam::new(a).unwrap()
    }

    #[test]
    fn zero_iff_equal() {
        let p = pm(&[0.2, 0.3, 0.5]);
        for a in [0.5, 2.0] {
            let d = relative_alpha_entropy(&p, &p, alpha(a)).unwrap();
            assert_eq!(d.value(), 0.0);
            assert!(d.is_finite());
        }
        let q = pm(&[0.25, 0.3, 0.45]);
        for a in [0.5, 2.0] {
            assert!(relative_alpha_entropy(&p, &q, alpha(a)).unwrap().value() > 1e-4);
        }
    }

    #[test]
    fn infinity_conditions() {
        let e0 = pm(&[1.0, 0.0]);
        let e1 = pm(&[0.0, 1.0]);
        let h = pm(&[0.5, 0.5]);
        // α<1, disjoint supports (a fortiori P ⊄ Q)
        assert!(!relative_alpha_entropy(&e0, &e1, alpha(0.5)).unwrap().is_finite());
        // α<1, P ⊄ Q with overlapping supports
        assert!(!relative_alpha_entropy(&h, &e0, alpha(0.5)).unwrap().is_finite());
        // α>1, disjoint supports
        assert!(!relative_alpha_entropy(&e0, &e1, alpha(2.0)).unwrap().is_finite());
        // α>1, P ⊄ Q but supports intersect: finite, equals ln 2 here
        let d = relative_alpha_entropy(&h, &e0, alpha(2.0)).unwrap();
        assert!(d.is_finite());
        assert!((d.value() - std::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn half_alpha_reference_value() {
        // independently computed to 30 digits with 60-digit arithmetic
        let d = relative_alpha_entropy(&pm(&[0.5, 0.5]), &pm(&[0.25, 0.75]), alpha(0.5)).unwrap();
        assert!((d.value() - 0.074504572030816553510).abs() < 1e-14);
    }

    #[test]
    fn support_shrinkage_divergence_is_log_5_over_2() {
        // I_2((3/4, 1/4, 0, 0), uniform-4) = ln(5/2)
        let q = pm(&[0.75, 0.25, 0.0, 0.0]);
        let r = ProbMeasure::uniform(4);
        let d = relative_alpha_entropy(&q, &r, alpha(2.0)).unwrap();
        assert!((d.value() - 0.916290731874155065).abs() < 1e-13);
    }

    #[test]
    fn forms_agree_and_norm_form_is_scale_free() {
        let p = pm(&[0.5, 0.3, 0.2]);
        let q = pm(&[0.1, 0.6, 0.3]);
        for a in [0.3, 0.7, 1.5, 4.0] {
            let d1 = relative_alpha_entropy(&p, &q, alpha(a)).unwrap().value();
            let d2 = relative_alpha_entropy_norm_form(p.weights(), q.weights(), alpha(a))
                .unwrap()
                .value();
            assert!((d1 - d2).abs() < 1e-10, "a={a}: {d1} vs {d2}");
            for tau in [0.5, 2.0] {
                let scaled: Vec<f64> = q.weights().iter().map(|w| tau * w).collect();
                let d3 = relative_alpha_entropy_norm_form(p.weights(), &scaled, alpha(a))
                    .unwrap()
                    .value();
                assert!((d1 - d3).abs() < 1e-10, "a={a} tau={tau}");
            }
        }
    }

    #[test]
    fn norm_form_infinity_conditions() {
        assert!(!relative_alpha_entropy_norm_form(&[1.0, 0.0], &[0.0, 1.0], alpha(0.5))
            .unwrap()
            .is_finite());
        assert!(!relative_alpha_entropy_norm_form(&[1.0, 0.0], &[0.0, 1.0], alpha(2.0))
            .unwrap()
            .is_finite());
        assert!(!relative_alpha_entropy_norm_form(&[0.5, 0.5], &[1.0, 0.0], alpha(0.5))
            .unwrap()
            .is_finite());
    }

    #[test]
    fn kl_values() {
        let p = pm(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap().value(), 0.0);
        let d = kl_divergence(&pm(&[1.0, 0.0]), &pm(&[0.5, 0.5])).unwrap();
        assert!((d.value() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(!kl_divergence(&pm(&[0.5, 0.5]), &pm(&[1.0, 0.0]))
            .unwrap()
            .is_finite());
        let d = kl_divergence(&p, &pm(&[0.6, 0.4])).unwrap();
        assert!((d.value() - 0.18378689738681228756).abs() < 1e-15);
    }

    #[test]
    fn alpha_continuity_at_one() {
        let p = pm(&[0.3, 0.7]);
        let q = pm(&[0.6, 0.4]);
        let kl = kl_divergence(&p, &q).unwrap().value();
        let lo = relative_alpha_entropy(&p, &q, alpha(1.0 - 1e-4)).unwrap().value();
        let hi = relative_alpha_entropy(&p, &q, alpha(1.0 + 1e-4)).unwrap().value();
        assert!((lo - kl).abs() <= 1e-3);
        assert!((hi - kl).abs() <= 1e-3);
        // frozen from 60-digit evaluation of the expanded form; the 1/(1−α)
        // factor amplifies rounding by ~1e4, hence the looser tolerance
        assert!((hi - 0.18380487314317921006).abs() < 1e-9);
        assert!((lo - 0.18376892149078108038).abs() < 1e-9);
        // exact dispatch at α=1
        let at_one = relative_alpha_entropy(&p, &q, alpha(1.0)).unwrap().value();
        assert_eq!(at_one, kl);
    }

    #[test]
    fn renyi_values() {
        for a in [0.5, 2.0, 4.0] {
            let u = ProbMeasure::uniform(5);
            assert!((renyi_entropy(&u, alpha(a)) - 5f64.ln()).abs() < 1e-13);
        }
        assert!(renyi_entropy(&pm(&[1.0, 0.0, 0.0]), alpha(2.0)).abs() < 1e-15);
        let h = renyi_entropy(&pm(&[0.25, 0.75]), alpha(2.0));
        assert!((h - 0.47000362924573555365).abs() < 1e-14);
        // α=1 gives Shannon entropy
        let s = renyi_entropy(&pm(&[0.25, 0.75]), alpha(1.0));
        let expect = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((s - expect).abs() < 1e-15);
    }

    #[test]
    fn gap_endpoint_and_idempotent_cases_are_exact_zero() {
        let r = pm(&[0.2, 0.3, 0.5]);
        let p = pm(&[0.5, 0.25, 0.25]);
        let q = pm(&[0.25, 0.5, 0.25]);
        for a in [0.5, 2.0] {
            assert_eq!(log_convexity_gap(&r, &p, &q, 0.0, alpha(a)).unwrap(), 0.0);
            assert_eq!(log_convexity_gap(&r, &p, &q, 1.0, alpha(a)).unwrap(), 0.0);
            assert_eq!(log_convexity_gap(&r, &p, &p, 0.4, alpha(a)).unwrap(), 0.0);
        }
    }

    #[test]
    fn gap_reference_values_and_signs() {
        let r = pm(&[0.2, 0.3, 0.5]);
        let p = pm(&[0.5, 0.25, 0.25]);
        let q = pm(&[0.25, 0.5, 0.25]);
        let lo = log_convexity_gap(&r, &p, &q, 0.5, alpha(0.5)).unwrap();
        assert!((lo - 0.0067270506048616203).abs() < 1e-13);
        assert!(lo >= 0.0);
        let hi = log_convexity_gap(&r, &p, &q, 0.5, alpha(2.0)).unwrap();
        assert!((hi - (-0.068233008342250247)).abs() < 1e-13);
        assert!(hi <= 0.0);
    }

    #[test]
    fn gap_rejects_infinite_terms() {
        let r = pm(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let p = pm(&[0.5, 0.5, 0.0]);
        let q = pm(&[0.25, 0.5, 0.25]);
        // α<1 and R ⊄ P makes I_α(R,P) infinite
        assert_eq!(
            log_convexity_gap(&r, &p, &q, 0.5, alpha(0.5)),
            Err(AlphaError::InfiniteTerm)
        );
        assert!(matches!(
            log_convexity_gap(&r, &p, &q, 1.5, alpha(0.5)),
            Err(AlphaError::BadMixtureWeight(_))
        ));
    }
}
