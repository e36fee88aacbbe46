use super::StateVector;

/// `ρ_k' = −2k ρ_k + k Σ_{a+b=k} ρ_a ρ_b`, the Erdős–Rényi rate
/// equations with sol–gel interaction, by direct convolution.
pub fn rhs_er_closed(state: &StateVector) -> Vec<f64> {
    let rho = &state.rho;
    let kmax = rho.len();
    let mut out = vec![0.0; kmax];
    for k in 1..=kmax {
        let mut conv = 0.0;
        for a in 1..k {
            conv += rho[a - 1] * rho[k - a - 1];
        }
        let kf = k as f64;
        out[k - 1] = -2.0 * kf * rho[k - 1] + kf * conv;
    }
    out
}

/// `ln k!`, exact summation for small `k` and a Stirling series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    if k <= 32 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// Pre-gelation solution `ρ_k(t) = k^{k−1} (2t)^{k−1} e^{−2kt} / k!`,
/// evaluated in log space.
///
/// ```
/// use achlioptas::kinetics::er_analytic;
/// assert_eq!(er_analytic(1, 0.0), 1.0);
/// assert!((er_analytic(2, 0.1) - 0.2 * (-0.4f64).exp()).abs() < 1e-15);
/// ```
pub fn er_analytic(k: u64, t: f64) -> f64 {
    assert!(k >= 1 && t >= 0.0, "er_analytic needs k ≥ 1 and t ≥ 0");
    let kf = k as f64;
    if k == 1 {
        return (-2.0 * t).exp();
    }
    if t == 0.0 {
        return 0.0;
    }
    let ln = (kf - 1.0) * kf.ln() + (kf - 1.0) * (2.0 * t).ln() - 2.0 * kf * t - ln_factorial(k);
    ln.exp()
}

/// Closed-form time derivative `ρ_k(t)·((k−1)/t − 2k)` of [`er_analytic`].
pub fn er_analytic_derivative(k: u64, t: f64) -> f64 {
    let kf = k as f64;
    if k == 1 {
        return -2.0 * (-2.0 * t).exp();
    }
    if t == 0.0 {
        // Right derivative: only ρ_2 grows linearly from zero.
        return if k == 2 { 2.0 } else { 0.0 };
    }
    er_analytic(k, t) * ((kf - 1.0) / t - 2.0 * kf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_closed_examples() {
        let s = StateVector::initial(5);
        let d = rhs_er_closed(&s);
        assert_eq!(d, vec![-2.0, 2.0, 0.0, 0.0, 0.0]);
        assert_eq!(rhs_er_closed(&StateVector { rho: vec![0.0; 4], t: 0.0 }), vec![0.0; 4]);
        let s = StateVector {
            rho: vec![0.5, 0.25, 0.0],
            t: 0.0,
        };
        // −6·0 + 3·(2·0.5·0.25)
        assert!((rhs_er_closed(&s)[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ln_factorial_matches_summation_across_switch() {
        for k in [33u64, 40, 100, 1000] {
            let exact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
            assert!((ln_factorial(k) - exact).abs() < 1e-9 * exact, "k={k}");
        }
    }

    #[test]
    fn analytic_mass_before_gelation() {
        let total: f64 = (1..=5000).map(|k| er_analytic(k, 0.25)).sum();
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn analytic_susceptibility() {
        // Σ k ρ_k = 1/(1 − 2t) at t = 0.25.
        let chi: f64 = (1..=2000).map(|k| k as f64 * er_analytic(k, 0.25)).sum();
        assert!((chi - 2.0).abs() < 1e-6, "{chi}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for k in [1u64, 2, 5, 17] {
            for t in [0.1, 0.3] {
                let h = 1e-6;
                let fd = (er_analytic(k, t + h) - er_analytic(k, t - h)) / (2.0 * h);
                assert!((fd - er_analytic_derivative(k, t)).abs() < 1e-7, "k={k} t={t}");
            }
        }
    }
}
