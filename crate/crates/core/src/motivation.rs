//! Motivation engine: fused score, mood-modulated threshold, tie reinforcement.

use crate::scalar::{clamp, Scalar};

/// Fusion coefficients for intimacy, novelty, reciprocity and risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> Default for Coefficients<T> {
    fn default() -> Self {
        Coefficients {
            alpha: T::lit(0.40),
            beta: T::lit(0.35),
            gamma: T::lit(0.20),
            delta: T::lit(0.25),
        }
    }
}

/// `alpha*I + beta*N + gamma*R - delta*K`, with `I` clamped to `[0, 1]` first.
pub fn motivation_score<T: Scalar>(i: T, n: T, r: T, k: T, c: &Coefficients<T>) -> T {
    let i = clamp(i, T::zero(), T::one());
    c.alpha * i + c.beta * n + c.gamma * r - c.delta * k
}

/// Positive mood lowers the bar for acting.
pub fn decision_threshold<T: Scalar>(theta0: T, kappa: T, valence: T) -> T {
    theta0 - kappa * valence
}

/// Satisfaction-driven reinforcement of a stored tie and its share history.
pub fn update_ties<T: Scalar>(intimacy: T, r_hist: T, satisfaction: T, rho_i: T, rho_r: T, i_max: T) -> (T, T) {
    (
        clamp(intimacy + rho_i * satisfaction, T::zero(), i_max),
        clamp(r_hist + rho_r * satisfaction, T::zero(), T::one()),
    )
}
