//! Key-rate evaluation: builds the decoy inputs of a scenario, runs the
//! linear programs and the coin bound, and optimizes μ and ν per distance.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{error_gain, gain, ChannelParams};
use crate::decoylp::{
    combine_bounds, monte_carlo_best, solve_refined, DecoyInputs, GainMode, Quantity, References,
};
use crate::error::{domain, Error, Result};
use crate::gramsdp::{overlap_lower_bound, GramProblem, DEFAULT_TOL};
use crate::perturb::{perturb_statistics, photon_gamma, PerturbedStatistics};
use crate::phase_error::{assess_coin, bures_triangle_fidelity, real_ideal_fidelity_lower};
use crate::source::{
    ideal_coin_overlap, ideal_intensity_overlap, photon_statistics, poisson_pmf, Basis, Encoding,
    IntensitySet, PhaseDistribution,
};
use crate::tha::{
    pm_coin_fidelity, pm_leak_fidelity, tha_coin_fidelity, tha_overlaps, tha_photon_statistics,
    PmScenario, ThaScenario,
};

/// h(x) = −x log₂x − (1−x) log₂(1−x).
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("binary entropy argument {x} outside [0, 1]"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// How the source leaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeakageModel {
    /// Only the leakage parameter ε is known.
    GeneralEpsilon { epsilon: f64, dist: PhaseDistribution },
    /// Coherent back-reflection carrying global and encoding phases.
    CharacterizedTha(ThaScenario),
    /// Back-reflection behind an extra phase modulator, global phase hidden.
    ExtraPm(PmScenario),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceScenario {
    pub model: LeakageModel,
    /// Weakest decoy intensity ω.
    pub omega: f64,
    pub p_mu: f64,
    pub p_z: f64,
    /// Photon-number cut for continuous phases; discrete phases always use N − 1.
    pub n_cut: usize,
}

impl SourceScenario {
    pub fn new(model: LeakageModel) -> Self {
        Self { model, omega: 0.0, p_mu: 1.0, p_z: 1.0, n_cut: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            LeakageModel::GeneralEpsilon { epsilon, dist } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return domain(format!("epsilon = {epsilon} outside [0, 1]"));
                }
                dist.validate()?;
            }
            LeakageModel::CharacterizedTha(s) => {
                ThaScenario::new(s.leak, s.phases)?;
            }
            LeakageModel::ExtraPm(s) => {
                PmScenario::new(s.leak, s.leak_pm, s.phases)?;
            }
        }
        for (name, p) in [("p_mu", self.p_mu), ("p_z", self.p_z)] {
            if !(p > 0.0 && p <= 1.0) {
                return domain(format!("{name} = {p} outside (0, 1]"));
            }
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return domain(format!("omega = {} must be nonnegative", self.omega));
        }
        if self.n_cut == 0 {
            return domain("n_cut must be at least 1");
        }
        Ok(())
    }

    /// Largest photon number entering the linear programs.
    pub fn effective_n_cut(&self) -> usize {
        match self.model {
            LeakageModel::GeneralEpsilon { dist: PhaseDistribution::DiscreteUniform { n }, .. } => n - 1,
            LeakageModel::CharacterizedTha(s) => s.phases - 1,
            _ => self.n_cut,
        }
    }
}

/// Search grid for (μ, ν).  Coarse μ values are evenly spaced, ν values
/// geometrically spaced in [nu_min, nu_max_ratio·μ].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerGrid {
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    pub nu_min: f64,
    pub nu_max_ratio: f64,
    pub nu_points: usize,
    pub refine_rounds: usize,
    pub refine_points: usize,
    pub shrink: f64,
}

impl Default for OptimizerGrid {
    fn default() -> Self {
        Self {
            mu_min: 0.05,
            mu_max: 1.0,
            mu_points: 8,
            nu_min: 0.005,
            nu_max_ratio: 0.5,
            nu_points: 6,
            refine_rounds: 2,
            refine_points: 5,
            shrink: 5.0,
        }
    }
}

impl OptimizerGrid {
    /// A grid holding the single point (μ, ν).
    pub fn fixed(mu: f64, nu: f64) -> Self {
        Self {
            mu_min: mu,
            mu_max: mu,
            mu_points: 1,
            nu_min: nu,
            nu_max_ratio: nu / mu,
            nu_points: 1,
            refine_rounds: 0,
            refine_points: 1,
            shrink: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_min > 0.0 && self.mu_min <= self.mu_max) {
            return domain("grid needs 0 < mu_min <= mu_max");
        }
        if !(self.nu_min > 0.0 && self.nu_max_ratio > 0.0 && self.nu_max_ratio < 1.0) {
            return domain("grid needs nu_min > 0 and 0 < nu_max_ratio < 1");
        }
        if self.mu_points == 0 || self.nu_points == 0 || self.refine_points == 0 {
            return domain("grid point counts must be positive");
        }
        if !(self.shrink > 1.0) {
            return domain("grid shrink factor must exceed 1");
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 || lo == hi {
        return vec![lo];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

fn geomspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), k).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub channel: ChannelParams,
    pub grid: OptimizerGrid,
    /// Monte Carlo reference draws at the first distance.
    pub restarts: usize,
    /// Fixed-point reference iterations per LP.
    pub lp_rounds: usize,
    pub sdp_tol: f64,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            grid: OptimizerGrid::default(),
            restarts: 50,
            lp_rounds: 3,
            sdp_tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointStatus {
    /// All bounds certified.
    Ok,
    /// Bounds certified but too weak for any key.
    Vacuous,
    /// The decoy constraints admit no solution.
    Infeasible,
    /// A bound could not be certified.
    Uncertified,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Vacuous => "vacuous",
            PointStatus::Infeasible => "infeasible",
            PointStatus::Uncertified => "uncertified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub distance_km: f64,
    pub mu: f64,
    pub nu: f64,
    pub q_mu_z: f64,
    pub e_mu_z: f64,
    pub p1_lower: f64,
    pub y1_lower: f64,
    pub y1_x_lower: f64,
    pub e_bx_upper: f64,
    pub delta: f64,
    pub eph1_upper: f64,
    pub lambda_ec: f64,
    /// The key-rate bound before flooring at zero.
    pub raw_rate: f64,
    pub rate: f64,
    pub status: PointStatus,
}

impl KeyRatePoint {
    fn failed(distance_km: f64, status: PointStatus) -> Self {
        Self {
            distance_km,
            mu: f64::NAN,
            nu: f64::NAN,
            q_mu_z: f64::NAN,
            e_mu_z: f64::NAN,
            p1_lower: f64::NAN,
            y1_lower: f64::NAN,
            y1_x_lower: f64::NAN,
            e_bx_upper: f64::NAN,
            delta: f64::NAN,
            eph1_upper: f64::NAN,
            lambda_ec: f64::NAN,
            raw_rate: f64::NEG_INFINITY,
            rate: 0.0,
            status,
        }
    }
}

/// Inputs of the single-photon key-rate formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    pub p_z: f64,
    pub p_mu: f64,
    pub f_ec: f64,
    pub q_mu_z: f64,
    pub e_mu_z: f64,
    pub p1_lower: f64,
    pub y1_lower: f64,
    pub eph1_upper: f64,
}

/// Returns (λ_EC, unfloored rate).
pub fn key_rate(r: &RateInputs) -> Result<(f64, f64)> {
    let w = r.p_z * r.p_z * r.p_mu;
    let lambda = w * r.f_ec * r.q_mu_z * binary_entropy(r.e_mu_z)?;
    let secret = w * r.p1_lower * r.y1_lower * (1.0 - binary_entropy(r.eph1_upper.min(0.5))?);
    Ok((lambda, secret - lambda))
}

/// Tangent references carried between evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub yields: References,
    pub errors: References,
}

/// Decoy inputs shared by a set of encodings.
#[derive(Debug, Clone, PartialEq)]
pub struct InputGroup {
    pub encodings: Vec<Encoding>,
    pub inputs: DecoyInputs,
}

/// Key-rate engine for one scenario.  Overlap bounds from the SDP do not
/// depend on distance and are cached across evaluations.
pub struct Engine {
    pub scenario: SourceScenario,
    pub config: EngineConfig,
    sdp_cache: Mutex<HashMap<(u64, u64, u64), f64>>,
}

struct Evaluation {
    point: KeyRatePoint,
    warm: WarmStart,
}

fn status_of(e: &Error) -> PointStatus {
    match e {
        Error::Infeasible(_) => PointStatus::Infeasible,
        _ => PointStatus::Uncertified,
    }
}

impl Engine {
    pub fn new(scenario: SourceScenario, config: EngineConfig) -> Result<Self> {
        scenario.validate()?;
        config.grid.validate()?;
        if !(config.sdp_tol > 0.0) {
            return domain("SDP tolerance must be positive");
        }
        Ok(Self { scenario, config, sdp_cache: Mutex::new(HashMap::new()) })
    }

    fn sdp_z(&self, c0: f64, gz: f64, gg: f64) -> Result<f64> {
        if gz >= 1.0 || gg >= 1.0 {
            return Ok(0.0);
        }
        let key = (c0.to_bits(), gz.to_bits(), gg.to_bits());
        if let Some(z) = self.sdp_cache.lock().expect("cache lock").get(&key) {
            return Ok(*z);
        }
        let problem = GramProblem { ideal_overlap: c0, gamma_zeta: gz, gamma_gamma: gg };
        let z = overlap_lower_bound(&problem, self.config.sdp_tol)?.z();
        self.sdp_cache.lock().expect("cache lock").insert(key, z);
        Ok(z)
    }

    fn general_inputs(
        &self,
        epsilon: f64,
        dist: PhaseDistribution,
        betas: [f64; 3],
        n_cut: usize,
    ) -> Result<(Vec<[[f64; 3]; 3]>, [PerturbedStatistics; 3])> {
        let stats = betas
            .map(|b| photon_statistics(b, dist, n_cut).and_then(|s| perturb_statistics(&s, epsilon)));
        let [s0, s1, s2] = stats;
        let stats = [s0?, s1?, s2?];
        let kappa = stats[0].kappa;
        let mut gammas = Vec::with_capacity(n_cut + 1);
        for n in 0..=n_cut {
            let mut g = [0.0; 3];
            for b in 0..3 {
                g[b] = photon_gamma(betas[b], dist, n, kappa)?.gamma_n;
            }
            gammas.push(g);
        }
        let mut z = vec![[[1.0; 3]; 3]; n_cut + 1];
        for n in 0..=n_cut {
            for zeta in 0..3 {
                for gamma in (zeta + 1)..3 {
                    let c0 = ideal_intensity_overlap(n, betas[zeta], betas[gamma], dist)?;
                    let v = self.sdp_z(c0, gammas[n][zeta], gammas[n][gamma])?;
                    z[n][zeta][gamma] = v;
                    z[n][gamma][zeta] = v;
                }
            }
        }
        Ok((z, stats))
    }

    /// Decoy inputs of every encoding at distance `l_km`, grouped when equal.
    pub fn decoy_inputs(&self, l_km: f64, set: &IntensitySet) -> Result<Vec<InputGroup>> {
        let betas = set.values();
        let ch = &self.config.channel;
        let gains = betas.map(|b| gain(ch, l_km, b));
        let error_gains = betas.map(|b| error_gain(ch, l_km, b));
        let n_cut = self.scenario.effective_n_cut();
        let mu = set.mu;
        let mut groups: Vec<InputGroup> = Vec::new();
        let mut push = |a: Encoding, inputs: DecoyInputs| {
            if let Some(g) = groups.iter_mut().find(|g| g.inputs == inputs) {
                g.encodings.push(a);
            } else {
                groups.push(InputGroup { encodings: vec![a], inputs });
            }
        };
        match self.scenario.model {
            LeakageModel::GeneralEpsilon { epsilon, dist } => {
                let (z, stats) = self.general_inputs(epsilon, dist, betas, n_cut)?;
                let mode = match dist {
                    PhaseDistribution::UniformContinuous => GainMode::General,
                    PhaseDistribution::DiscreteUniform { .. } => GainMode::DiscreteExact,
                };
                let inputs = DecoyInputs { n_cut, mode, gains, error_gains, stats, z };
                for a in Encoding::ALL {
                    push(a, inputs.clone());
                }
            }
            LeakageModel::CharacterizedTha(s) => {
                for a in Encoding::ALL {
                    let [s0, s1, s2] = betas.map(|b| {
                        tha_photon_statistics(&s, mu, b, a).map(PerturbedStatistics::exact)
                    });
                    let stats = [s0?, s1?, s2?];
                    let mut z = vec![[[1.0; 3]; 3]; n_cut + 1];
                    for (n, zn) in z.iter_mut().enumerate() {
                        for zeta in 0..3 {
                            for gamma in (zeta + 1)..3 {
                                let o = tha_overlaps(&s, mu, betas[zeta], betas[gamma], a, n)?;
                                zn[zeta][gamma] = o * o;
                                zn[gamma][zeta] = o * o;
                            }
                        }
                    }
                    let mode = GainMode::ThaExact;
                    push(a, DecoyInputs { n_cut, mode, gains, error_gains, stats, z });
                }
            }
            LeakageModel::ExtraPm(s) => {
                let [s0, s1, s2] = betas.map(|b| poisson_pmf(b, n_cut).map(PerturbedStatistics::exact));
                let stats = [s0?, s1?, s2?];
                for a in Encoding::ALL {
                    let mut f = [[1.0; 3]; 3];
                    for zeta in 0..3 {
                        for gamma in (zeta + 1)..3 {
                            let v = pm_leak_fidelity(&s, mu, betas[zeta], betas[gamma], a)?;
                            f[zeta][gamma] = v;
                            f[gamma][zeta] = v;
                        }
                    }
                    let z = vec![f; n_cut + 1];
                    let inputs = DecoyInputs {
                        n_cut,
                        mode: GainMode::General,
                        gains,
                        error_gains,
                        stats: stats.clone(),
                        z,
                    };
                    push(a, inputs);
                }
            }
        }
        Ok(groups)
    }

    /// Fidelity lower bound between the Z and X single-photon coin states at μ.
    fn coin_fidelity(&self, set: &IntensitySet, groups: &[InputGroup]) -> Result<f64> {
        let mu = set.mu;
        match self.scenario.model {
            LeakageModel::GeneralEpsilon { dist, .. } => {
                let stats = &groups[0].inputs.stats[0];
                let g = photon_gamma(mu, dist, 1, stats.kappa)?;
                let f_ri = real_ideal_fidelity_lower(stats, 1, &g);
                let c = ideal_coin_overlap(1, mu, dist)?;
                Ok(bures_triangle_fidelity(f_ri, c, f_ri))
            }
            LeakageModel::CharacterizedTha(s) => tha_coin_fidelity(&s, mu, mu, 1),
            LeakageModel::ExtraPm(s) => pm_coin_fidelity(&s, mu, mu, 1),
        }
    }

    fn pilot(&self, l_km: f64, set: &IntensitySet, rng: &mut ChaCha8Rng) -> Result<WarmStart> {
        let groups = self.decoy_inputs(l_km, set)?;
        let inputs = &groups[0].inputs;
        let k = self.config.restarts.max(1);
        let y = monte_carlo_best(inputs, Quantity::Yield, (1, 0), k, rng)?;
        let e = monte_carlo_best(inputs, Quantity::Error, (1, 0), k, rng)?;
        Ok(WarmStart { yields: y.point, errors: e.point })
    }

    fn evaluate(&self, l_km: f64, set: &IntensitySet, warm: &WarmStart) -> Result<Evaluation> {
        let groups = self.decoy_inputs(l_km, set)?;
        let rounds = self.config.lp_rounds;
        let mut yields = [1.0f64; 4];
        let mut xi_x = [0.0f64; 2];
        let mut p1 = [1.0f64; 2];
        let mut next = warm.clone();
        for g in &groups {
            let y = solve_refined(&g.inputs, Quantity::Yield, (1, 0), &warm.yields, rounds)?;
            let has_x = g.encodings.iter().any(|a| a.basis() == Basis::X);
            let e = if has_x {
                Some(solve_refined(&g.inputs, Quantity::Error, (1, 0), &warm.errors, rounds)?)
            } else {
                None
            };
            for &a in &g.encodings {
                yields[a.index()] = y.bound;
                match a.basis() {
                    Basis::Z => p1[a.bit()] = g.inputs.stats[0].lower(1),
                    Basis::X => xi_x[a.bit()] = e.as_ref().map_or(1.0, |e| e.bound),
                }
            }
            if g.encodings.contains(&Encoding::Z0) || groups.len() == 1 {
                next.yields = y.point.clone();
            }
            if let Some(e) = e {
                next.errors = e.point;
            }
        }
        let bounds = combine_bounds(yields, xi_x);
        let f = self.coin_fidelity(set, &groups)?;
        let coin = assess_coin(1, f, bounds.y_z_lower, bounds.y_x_lower, bounds.e_bx_upper);
        let ch = &self.config.channel;
        let q = gain(ch, l_km, set.mu);
        let e_mu = if q > 0.0 { (error_gain(ch, l_km, set.mu) / q).clamp(0.0, 1.0) } else { 0.0 };
        let p1_lower = p1[0].min(p1[1]);
        let (lambda_ec, raw) = key_rate(&RateInputs {
            p_z: self.scenario.p_z,
            p_mu: self.scenario.p_mu,
            f_ec: ch.f_ec,
            q_mu_z: q,
            e_mu_z: e_mu,
            p1_lower,
            y1_lower: bounds.y_z_lower,
            eph1_upper: coin.e_ph_upper,
        })?;
        let vacuous = bounds.vacuous || coin.vacuous || !(bounds.y_z_lower > 0.0);
        let point = KeyRatePoint {
            distance_km: l_km,
            mu: set.mu,
            nu: set.nu,
            q_mu_z: q,
            e_mu_z: e_mu,
            p1_lower,
            y1_lower: bounds.y_z_lower,
            y1_x_lower: bounds.y_x_lower,
            e_bx_upper: bounds.e_bx_upper,
            delta: coin.delta,
            eph1_upper: coin.e_ph_upper,
            lambda_ec,
            raw_rate: raw,
            rate: raw.max(0.0),
            status: if vacuous { PointStatus::Vacuous } else { PointStatus::Ok },
        };
        Ok(Evaluation { point, warm: next })
    }

    fn intensity_set(&self, mu: f64, nu: f64) -> Option<IntensitySet> {
        IntensitySet::asymptotic(mu, nu, self.scenario.omega).ok()
    }

    fn nu_range(&self, mu: f64) -> (f64, f64) {
        let g = &self.config.grid;
        let hi = (g.nu_max_ratio * mu).max(g.nu_min);
        (g.nu_min, hi)
    }

    fn coarse_grid(&self) -> Vec<(f64, f64)> {
        let g = &self.config.grid;
        let mut out = Vec::new();
        for mu in linspace(g.mu_min, g.mu_max, g.mu_points) {
            let (lo, hi) = self.nu_range(mu);
            for nu in geomspace(lo, hi, g.nu_points) {
                out.push((mu, nu));
            }
        }
        out
    }

    fn refined_grid(&self, center: (f64, f64), round: usize) -> Vec<(f64, f64)> {
        let g = &self.config.grid;
        let k = g.refine_points;
        let scale = g.shrink.powi(round as i32);
        let half_mu = 0.5 * (g.mu_max - g.mu_min) / scale;
        let mu_lo = (center.0 - half_mu).max(g.mu_min);
        let mu_hi = (center.0 + half_mu).min(g.mu_max);
        let mut out = Vec::new();
        for mu in linspace(mu_lo, mu_hi, k) {
            let (lo, hi) = self.nu_range(mu);
            let half = 0.5 * (hi / lo).ln() / scale;
            let nu_c = center.1.clamp(lo, hi);
            let nlo = (nu_c.ln() - half).exp().max(lo);
            let nhi = (nu_c.ln() + half).exp().min(hi);
            for nu in geomspace(nlo, nhi, k) {
                out.push((mu, nu));
            }
        }
        out
    }

    fn evaluate_all(&self, l_km: f64, cands: &[(f64, f64)], warm: &WarmStart) -> Vec<Result<Evaluation>> {
        cands
            .par_iter()
            .map(|&(mu, nu)| match self.intensity_set(mu, nu) {
                Some(set) => self.evaluate(l_km, &set, warm),
                None => domain(format!("invalid intensities mu = {mu}, nu = {nu}")),
            })
            .collect()
    }

    /// Best (μ, ν) at one distance.  Without a warm start, a Monte Carlo
    /// pilot at the first coarse candidate supplies the tangent references.
    pub fn optimize_at(&self, l_km: f64, warm: Option<&WarmStart>) -> (KeyRatePoint, Option<WarmStart>) {
        let coarse = self.coarse_grid();
        let pilot;
        let warm = match warm {
            Some(w) => w,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ l_km.to_bits());
                let first = coarse.iter().find_map(|&(m, n)| self.intensity_set(m, n));
                let made = first.map(|set| self.pilot(l_km, &set, &mut rng));
                match made {
                    Some(Ok(w)) => {
                        pilot = w;
                        &pilot
                    }
                    Some(Err(e)) => return (KeyRatePoint::failed(l_km, status_of(&e)), None),
                    None => return (KeyRatePoint::failed(l_km, PointStatus::Infeasible), None),
                }
            }
        };
        let mut best: Option<Evaluation> = None;
        let mut first_error: Option<Error> = None;
        let mut consider = |results: Vec<Result<Evaluation>>, best: &mut Option<Evaluation>| {
            for r in results {
                match r {
                    Ok(ev) => {
                        let better = best.as_ref().map_or(true, |b| ev.point.raw_rate > b.point.raw_rate);
                        if better {
                            *best = Some(ev);
                        }
                    }
                    Err(e) => {
                        if first_error.is_none() {
                            first_error = Some(e);
                        }
                    }
                }
            }
        };
        consider(self.evaluate_all(l_km, &coarse, warm), &mut best);
        for round in 1..=self.config.grid.refine_rounds {
            let Some(b) = best.as_ref() else { break };
            let cands = self.refined_grid((b.point.mu, b.point.nu), round);
            let w = b.warm.clone();
            consider(self.evaluate_all(l_km, &cands, &w), &mut best);
        }
        match best {
            Some(ev) => (ev.point, Some(ev.warm)),
            None => {
                let status = first_error.as_ref().map_or(PointStatus::Infeasible, status_of);
                (KeyRatePoint::failed(l_km, status), None)
            }
        }
    }

    /// Key rate at a fixed intensity set, references from a Monte Carlo pilot.
    pub fn evaluate_point(&self, l_km: f64, set: &IntensitySet) -> Result<KeyRatePoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ l_km.to_bits());
        let warm = self.pilot(l_km, set, &mut rng)?;
        Ok(self.evaluate(l_km, set, &warm)?.point)
    }

    /// Optimized key rate at each distance, warm-starting along the list.
    pub fn sweep(&self, distances: &[f64]) -> Vec<KeyRatePoint> {
        let mut warm: Option<WarmStart> = None;
        let mut out = Vec::with_capacity(distances.len());
        for &l in distances {
            let (p, w) = self.optimize_at(l, warm.as_ref());
            if w.is_some() {
                warm = w;
            }
            out.push(p);
        }
        out
    }
}

/// Optimized (μ*, ν*, R*) at one distance.
pub fn optimize_intensities(
    scenario: &SourceScenario,
    config: &EngineConfig,
    l_km: f64,
) -> Result<KeyRatePoint> {
    Ok(Engine::new(*scenario, *config)?.optimize_at(l_km, None).0)
}

/// Optimized key rates along `distances`, which must be ascending.
pub fn sweep(scenario: &SourceScenario, config: &EngineConfig, distances: &[f64]) -> Result<Vec<KeyRatePoint>> {
    if distances.windows(2).any(|w| !(w[0] <= w[1])) {
        return domain("distances must be sorted ascending");
    }
    if distances.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
        return domain("distances must be finite and nonnegative");
    }
    Ok(Engine::new(*scenario, *config)?.sweep(distances))
}
