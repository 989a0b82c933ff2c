//! Log-space evaluation of the parameter-free potentials.

use std::f64::consts::PI;

/// Above this argument `exp(x^2) * erfc(x)` overflows its first factor, so
/// the asymptotic series takes over.
const ERFCX_SERIES_FROM: f64 = 26.0;

/// Scaled complementary error function `exp(x^2) erfc(x)` for `x >= 0`.
pub(crate) fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < ERFCX_SERIES_FROM {
        (x * x).exp() * libm::erfc(x)
    } else {
        let inv2 = 1.0 / (x * x);
        let series = 1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2;
        series / (x * PI.sqrt())
    }
}

/// `ln w(R, C)` for AdaNormalHedge, where
/// `w = (Phi(R + 1, C + 1) - Phi(R - 1, C + 1)) / 2` and
/// `Phi(R, C) = exp([R]_+^2 / (3C))`.
pub(crate) fn ln_adanormalhedge_weight(regret: f64, abs_sum: f64) -> f64 {
    let denom = 3.0 * (abs_sum + 1.0);
    let hi = (regret + 1.0).max(0.0).powi(2) / denom;
    let lo = (regret - 1.0).max(0.0).powi(2) / denom;
    if hi <= lo {
        return f64::NEG_INFINITY;
    }
    0.5f64.ln() + hi + (-(lo - hi).exp_m1()).ln()
}

/// `ln integral_0^{1/2} exp(g R - g^2 V) dg`, the Squint evidence under the
/// improper `1/g` prior over learning rates.
pub(crate) fn ln_squint_weight(regret: f64, variance: f64) -> f64 {
    if variance < 1e-10 {
        // (e^{R/2} - 1) / R
        return if regret == 0.0 {
            0.5f64.ln()
        } else if regret > 0.0 {
            regret / 2.0 + (-(-regret / 2.0).exp_m1()).ln() - regret.ln()
        } else {
            (-(regret / 2.0).exp_m1()).ln() - (-regret).ln()
        };
    }
    // Completing the square: the integral equals
    // exp(a^2) / sqrt(V) * (sqrt(pi) / 2) * (erf(b) - erf(a)).
    let sd = variance.sqrt();
    let a = -regret / (2.0 * sd);
    let b = sd / 2.0 - regret / (2.0 * sd);
    let half_sqrt_pi = 0.5 * PI.sqrt();
    let scaled = if a >= 0.0 {
        // exp(a^2) (erfc a - erfc b)
        ((erfcx(a) - (a * a - b * b).exp() * erfcx(b)).ln(), 0.0)
    } else if b <= 0.0 {
        // exp(a^2) (erfc(-b) - erfc(-a)) = exp(a^2 - b^2) (erfcx(-b) - exp(b^2 - a^2) erfcx(-a))
        let gap = (a - b) * (a + b);
        ((erfcx(-b) - (-gap).exp() * erfcx(-a)).ln(), gap)
    } else {
        ((libm::erf(b) - libm::erf(a)).ln(), a * a)
    };
    scaled.1 + scaled.0 + half_sqrt_pi.ln() - sd.ln()
}
