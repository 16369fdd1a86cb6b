//! Fiber channel with two threshold detectors, used to simulate the observed
//! gains and error gains.

/// Channel and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Detection efficiency of Bob's detectors.
    pub eta_det: f64,
    /// Dark-count probability per detector and round.
    pub p_d: f64,
    /// Fiber loss in dB/km.
    pub alpha_db: f64,
    /// Misalignment angle in radians.
    pub delta_a: f64,
    /// Error-correction inefficiency.
    pub f_ec: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            eta_det: 0.65,
            p_d: 7.2e-8,
            alpha_db: 0.2,
            delta_a: 0.08,
            f_ec: 1.16,
        }
    }
}

impl ChannelParams {
    /// Overall transmittance at distance `l_km`.
    pub fn eta(&self, l_km: f64) -> f64 {
        self.eta_det * 10f64.powf(-self.alpha_db * l_km / 10.0)
    }
}

/// Detection probability Q of a phase-randomized pulse of mean photon number `beta`.
pub fn gain(params: &ChannelParams, l_km: f64, beta: f64) -> f64 {
    let eta = params.eta(l_km);
    let s = 1.0 - params.p_d;
    // 1 − s²e^{−ηβ} written to keep precision when both terms are close to 1.
    let v = -(2.0 * (-params.p_d).ln_1p() - eta * beta).exp_m1();
    debug_assert!((v - (1.0 - s * s * (-eta * beta).exp())).abs() < 1e-12);
    v.clamp(0.0, 1.0)
}

/// Error gain E·Q of a pulse of mean photon number `beta`.
pub fn error_gain(params: &ChannelParams, l_km: f64, beta: f64) -> f64 {
    let eta = params.eta(l_km);
    let s = 1.0 - params.p_d;
    let (c, sn) = (params.delta_a.cos().powi(2), params.delta_a.sin().powi(2));
    let h = 0.5 * ((-eta * beta * c).exp() - (-eta * beta * sn).exp());
    let v = 0.5 + s * h - 0.5 * s * s * (-eta * beta).exp();
    v.clamp(0.0, gain(params, l_km, beta))
}

/// Per-photon-number yield Yⁿ and error probability ξⁿ of the simulated channel.
pub fn true_yield_oracle(params: &ChannelParams, l_km: f64, n: usize) -> (f64, f64) {
    let eta = params.eta(l_km);
    let s = 1.0 - params.p_d;
    let (c, sn) = (params.delta_a.cos().powi(2), params.delta_a.sin().powi(2));
    let k = n as i32;
    let all_lost = (1.0 - eta).powi(k);
    let y = 1.0 - s * s * all_lost;
    // Each photon reaches the correct detector with probability ηc and the
    // wrong one with probability ηs; double clicks are assigned at random.
    let xi = 0.5 + 0.5 * s * ((1.0 - eta * c).powi(k) - (1.0 - eta * sn).powi(k))
        - 0.5 * s * s * all_lost;
    (y, xi.clamp(0.0, y))
}
