//! Proportional-integral-derivative control of the weight multiplier.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub kd: f64,
    pub kip: f64,
    pub kid: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MultiplierState {
    pub lambda: f64,
    /// Integral accumulator `Λ ≥ 0`.
    pub integral: f64,
    pub g_prev: f64,
}

/// `ġ = g − g_prev`, `Λ ← max(Λ + K_IP g + K_ID ġ, 0)`,
/// `λ = max(K_P g, 0) + K_D ġ + Λ`.
pub fn update_multiplier(m: &MultiplierState, g: f64, gains: &PidGains) -> MultiplierState {
    let dg = g - m.g_prev;
    let integral = (m.integral + gains.kip * g + gains.kid * dg).max(0.0);
    let lambda = (gains.kp * g).max(0.0) + gains.kd * dg + integral;
    MultiplierState {
        lambda,
        integral,
        g_prev: g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: PidGains = PidGains {
        kp: 10.0,
        kd: 5.0,
        kip: 1.0,
        kid: 0.0,
    };

    #[test]
    fn zero_state_stays_zero() {
        let m = update_multiplier(&MultiplierState::default(), 0.0, &G);
        assert_eq!(m.lambda, 0.0);
        assert_eq!(m.integral, 0.0);
    }

    #[test]
    fn first_step_hand_value() {
        let m = update_multiplier(&MultiplierState::default(), 0.1, &G);
        assert!((m.integral - 0.1).abs() < 1e-15);
        assert!((m.lambda - 1.6).abs() < 1e-14);
    }

    #[test]
    fn feasible_constraint_ratchets_integral_down() {
        let mut m = MultiplierState {
            lambda: 1.0,
            integral: 0.35,
            g_prev: -0.05,
        };
        let mut prev = m.integral;
        for _ in 0..10 {
            m = update_multiplier(&m, -0.05, &G);
            assert!(m.integral <= prev && m.integral >= 0.0);
            // Proportional term clamped, no rate: λ reduces to Λ.
            assert_eq!(m.lambda, m.integral);
            prev = m.integral;
        }
        assert_eq!(m.integral, 0.0);
    }
}
