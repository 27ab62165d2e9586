//! Data generators and Monte Carlo size/power experiments.
//!
//! Two designs are supported. Compound symmetry draws `y = Σ^{1/2} z` with
//! `Σ = D^{1/2} {(1-ρ) I + ρ J} D^{1/2}`; the moving-average design draws
//! `y_k = z_k + θ_1 z_{k+1} + ... + θ_m z_{k+m}`. Innovations `z` are standard
//! normal, standardized `t_5`, or standardized `χ²_1`.
//!
//! Nuisance quantities that define the alternative (the variance shifts `u_k`
//! and the coefficients `θ_j`) are drawn once per configuration from a
//! dedicated stream, so a configuration always denotes the same pair of
//! populations. Replication `i` draws its data from stream `i`.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::sym_sqrt;
use crate::model::{Method, SampleBlock};
use crate::pipeline::{covariance_test, TestOptions};
use crate::rng::{stream, NUISANCE_STREAM};
use crate::special::{normal_cdf, normal_upper_quantile};
use crate::traces::Group;

/// Scale that standardizes `t_5` (variance 5/3) to unit variance.
pub const T5_SCALE: f64 = 1.290_994_448_735_805_6;

/// Distribution of the i.i.d. innovations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    /// Model 1: `N(0, 1)`.
    Normal,
    /// Model 2: `u / sqrt(5/3)`, `u ~ t_5`.
    T5,
    /// Model 3: `(u - 1) / sqrt(2)`, `u ~ χ²_1`.
    Chisq1,
}

impl Innovation {
    /// Maps model numbers 1, 2, 3.
    pub fn from_model_number(model: u8) -> Option<Self> {
        match model {
            1 => Some(Innovation::Normal),
            2 => Some(Innovation::T5),
            3 => Some(Innovation::Chisq1),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Innovation::Normal => "normal",
            Innovation::T5 => "t5",
            Innovation::Chisq1 => "chisq1",
        }
    }

    /// `E z^4` of the standardized innovation.
    pub fn kurtosis(self) -> f64 {
        match self {
            Innovation::Normal => 3.0,
            // 3 (ν - 2) / (ν - 4) at ν = 5
            Innovation::T5 => 9.0,
            // 3 + 12 / k at k = 1
            Innovation::Chisq1 => 15.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => StandardNormal.sample(rng),
            Innovation::T5 => {
                let t = StudentT::new(5.0).expect("5 degrees of freedom");
                t.sample(rng) / T5_SCALE
            }
            Innovation::Chisq1 => {
                let z: f64 = StandardNormal.sample(rng);
                (z * z - 1.0) / std::f64::consts::SQRT_2
            }
        }
    }
}

/// `count` i.i.d. innovations with mean 0 and variance 1.
pub fn gen_innovation<R: Rng + ?Sized>(model: Innovation, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| model.sample(rng)).collect()
}

/// Covariance structure of the simulated populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    CompoundSymmetry,
    MovingAverage,
}

impl Design {
    pub fn tag(self) -> &'static str {
        match self {
            Design::CompoundSymmetry => "compound_symmetry",
            Design::MovingAverage => "moving_average",
        }
    }
}

/// Variances of the second group under compound symmetry; the first group
/// always has `σ²_{1k} = 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaProfile {
    /// `σ²_{2k} = 4`.
    Constant4,
    /// `σ²_{2k} = 3.5 + u_k`, `u_k ~ U[0, 1]`.
    UniformShift,
}

/// One simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: Innovation,
    pub design: Design,
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma_profile: SigmaProfile,
    /// Moving-average orders `(m1, m2)`.
    pub ma_orders: (usize, usize),
    /// Uniform ranges for `θ_{1j}` and `θ_{2j}`.
    pub theta_ranges: [(f64, f64); 2],
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Group-mean centering inside the test.
    pub center: bool,
}

impl SimConfig {
    fn base(model: Innovation, design: Design, p: usize, n1: usize, n2: usize) -> Self {
        Self {
            model,
            design,
            p,
            n1,
            n2,
            rho1: 0.0,
            rho2: 0.0,
            sigma_profile: SigmaProfile::Constant4,
            ma_orders: (0, 0),
            theta_ranges: [(2.0, 3.0), (2.0, 3.0)],
            reps: 2000,
            alpha: 0.05,
            seed: 0,
            center: true,
        }
    }

    /// Compound symmetry with `Σ1 = Σ2` (`σ² = 4`, common `ρ`).
    pub fn compound_symmetry_null(model: Innovation, p: usize, n1: usize, n2: usize, rho: f64) -> Self {
        Self { rho1: rho, rho2: rho, ..Self::base(model, Design::CompoundSymmetry, p, n1, n2) }
    }

    /// Compound symmetry alternative: `σ²_{2k} = 3.5 + u_k` and separate correlations.
    pub fn compound_symmetry_alternative(
        model: Innovation,
        p: usize,
        n1: usize,
        n2: usize,
        rho1: f64,
        rho2: f64,
    ) -> Self {
        Self {
            rho1,
            rho2,
            sigma_profile: SigmaProfile::UniformShift,
            ..Self::base(model, Design::CompoundSymmetry, p, n1, n2)
        }
    }

    /// Moving average null: `m = 0.5 p`, shared `θ_j ~ U[2, 3]`.
    pub fn moving_average_null(model: Innovation, p: usize, n1: usize, n2: usize) -> Self {
        let m = p / 2;
        Self { ma_orders: (m, m), ..Self::base(model, Design::MovingAverage, p, n1, n2) }
    }

    /// Moving average alternative: `m1 = 0.5 p` with `U[2, 3]`, `m2 = 0.4 p` with `U[3, 4]`.
    pub fn moving_average_alternative(model: Innovation, p: usize, n1: usize, n2: usize) -> Self {
        Self {
            ma_orders: (p / 2, (0.4 * p as f64).round() as usize),
            theta_ranges: [(2.0, 3.0), (3.0, 4.0)],
            ..Self::base(model, Design::MovingAverage, p, n1, n2)
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_center(mut self, center: bool) -> Self {
        self.center = center;
        self
    }

    /// True when both moving-average groups use the same order and
    /// coefficient range; the coefficients are then shared exactly.
    fn ma_shared(&self) -> bool {
        self.ma_orders.0 == self.ma_orders.1 && self.theta_ranges[0] == self.theta_ranges[1]
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be positive".into()));
        }
        if self.n1 < 4 || self.n2 < 4 {
            return Err(Error::InvalidConfig("both group sizes must be at least 4".into()));
        }
        for rho in [self.rho1, self.rho2] {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidConfig(format!("rho = {rho} must lie in [0, 1)")));
            }
        }
        for (lo, hi) in self.theta_ranges {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidConfig(format!("invalid theta range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// `D^{1/2} {(1-ρ) I + ρ J} D^{1/2}` for variances `σ²_k`.
pub fn compound_symmetry_cov(variances: &[f64], rho: f64) -> DMatrix<f64> {
    let p = variances.len();
    DMatrix::from_fn(p, p, |k, l| {
        let corr = if k == l { 1.0 } else { rho };
        corr * (variances[k] * variances[l]).sqrt()
    })
}

/// `Σ_{kl} = Σ_j θ_j θ_{j+|k-l|}` with `θ_0 = 1`.
pub fn moving_average_cov(theta: &[f64], p: usize) -> DMatrix<f64> {
    let coeffs = ma_coefficients(theta);
    DMatrix::from_fn(p, p, |k, l| {
        let lag = k.abs_diff(l);
        coeffs.iter().zip(coeffs.iter().skip(lag)).map(|(a, b)| a * b).sum()
    })
}

fn ma_coefficients(theta: &[f64]) -> Vec<f64> {
    std::iter::once(1.0).chain(theta.iter().copied()).collect()
}

#[derive(Debug, Clone)]
enum Factor {
    /// Symmetric square root of `Σ`.
    Dense(DMatrix<f64>),
    /// `(1, θ_1, ..., θ_m)`.
    MovingAverage(Vec<f64>),
}

/// The two populations of a configuration, with every nuisance draw fixed.
#[derive(Debug, Clone)]
pub struct Population {
    model: Innovation,
    p: usize,
    factors: [Factor; 2],
    covariances: [DMatrix<f64>; 2],
}

impl Population {
    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = stream(cfg.seed, NUISANCE_STREAM);
        let p = cfg.p;
        let (factors, covariances) = match cfg.design {
            Design::CompoundSymmetry => {
                let var1 = vec![4.0; p];
                let var2: Vec<f64> = match cfg.sigma_profile {
                    SigmaProfile::Constant4 => vec![4.0; p],
                    SigmaProfile::UniformShift => (0..p).map(|_| 3.5 + rng.random::<f64>()).collect(),
                };
                let s1 = compound_symmetry_cov(&var1, cfg.rho1);
                let s2 = compound_symmetry_cov(&var2, cfg.rho2);
                let f1 = sym_sqrt(&s1)?;
                let f2 = if s1 == s2 { f1.clone() } else { sym_sqrt(&s2)? };
                ([Factor::Dense(f1), Factor::Dense(f2)], [s1, s2])
            }
            Design::MovingAverage => {
                let draw = |rng: &mut crate::rng::StreamRng, m: usize, (lo, hi): (f64, f64)| -> Vec<f64> {
                    (0..m).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
                };
                let theta1 = draw(&mut rng, cfg.ma_orders.0, cfg.theta_ranges[0]);
                let theta2 =
                    if cfg.ma_shared() { theta1.clone() } else { draw(&mut rng, cfg.ma_orders.1, cfg.theta_ranges[1]) };
                let s1 = moving_average_cov(&theta1, p);
                let s2 = moving_average_cov(&theta2, p);
                (
                    [Factor::MovingAverage(ma_coefficients(&theta1)), Factor::MovingAverage(ma_coefficients(&theta2))],
                    [s1, s2],
                )
            }
        };
        Ok(Self { model: cfg.model, p, factors, covariances })
    }

    /// Population covariance `Σ_i`.
    pub fn covariance(&self, group: Group) -> &DMatrix<f64> {
        &self.covariances[group_index(group)]
    }

    /// `tr{(Σ1 - Σ2)^2}`.
    pub fn frobenius_sq_diff(&self) -> f64 {
        (&self.covariances[0] - &self.covariances[1]).norm_squared()
    }

    /// Draws `n` i.i.d. rows from group `group`.
    pub fn sample<R: Rng + ?Sized>(&self, group: Group, n: usize, rng: &mut R) -> SampleBlock {
        let p = self.p;
        let mut data = Vec::with_capacity(n * p);
        match &self.factors[group_index(group)] {
            Factor::Dense(root) => {
                let mut z = vec![0.0; p];
                for _ in 0..n {
                    z.iter_mut().for_each(|v| *v = self.model.sample(rng));
                    // root is symmetric, so column k doubles as row k
                    for k in 0..p {
                        let col = root.column(k);
                        data.push(col.iter().zip(&z).map(|(a, b)| a * b).sum());
                    }
                }
            }
            Factor::MovingAverage(coeffs) => {
                let m = coeffs.len() - 1;
                let mut z = vec![0.0; p + m];
                for _ in 0..n {
                    z.iter_mut().for_each(|v| *v = self.model.sample(rng));
                    for k in 0..p {
                        data.push(coeffs.iter().zip(&z[k..]).map(|(a, b)| a * b).sum());
                    }
                }
            }
        }
        SampleBlock::new(n, p, data).expect("generated data is finite")
    }
}

fn group_index(group: Group) -> usize {
    match group {
        Group::First => 0,
        Group::Second => 1,
    }
}

fn group_size(cfg: &SimConfig, group: Group) -> usize {
    match group {
        Group::First => cfg.n1,
        Group::Second => cfg.n2,
    }
}

/// One sample from the compound-symmetry design of `cfg`.
pub fn gen_compound_symmetry<R: Rng + ?Sized>(cfg: &SimConfig, group: Group, rng: &mut R) -> Result<SampleBlock> {
    if cfg.design != Design::CompoundSymmetry {
        return Err(Error::InvalidConfig("configuration is not compound symmetry".into()));
    }
    Ok(Population::from_config(cfg)?.sample(group, group_size(cfg, group), rng))
}

/// One sample from the moving-average design of `cfg`.
pub fn gen_moving_average<R: Rng + ?Sized>(cfg: &SimConfig, group: Group, rng: &mut R) -> Result<SampleBlock> {
    if cfg.design != Design::MovingAverage {
        return Err(Error::InvalidConfig("configuration is not moving average".into()));
    }
    Ok(Population::from_config(cfg)?.sample(group, group_size(cfg, group), rng))
}

/// Aggregate of a size or power experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerResult {
    /// Rejections over successful replications.
    pub rejection_rate: f64,
    /// Binomial standard error `sqrt(r (1 - r) / m)`, `m` successful replications.
    pub se: f64,
    /// Mean `d̂` over replications calibrated by the chi-square reference.
    pub mean_d: f64,
    pub reps: usize,
    /// Replications that errored (degenerate estimates) and were excluded.
    pub failures: usize,
    /// Replications that used the normal fallback.
    pub fallbacks: usize,
    pub config: Option<SimConfig>,
}

struct RepOutcome {
    reject: bool,
    d: Option<f64>,
}

fn aggregate(outcomes: Vec<Result<RepOutcome>>, reps: usize, config: Option<SimConfig>) -> SizePowerResult {
    let mut rejections = 0usize;
    let mut failures = 0usize;
    let mut fallbacks = 0usize;
    let mut d_sum = 0.0;
    let mut d_count = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                rejections += usize::from(o.reject);
                match o.d {
                    Some(d) => {
                        d_sum += d;
                        d_count += 1;
                    }
                    None => fallbacks += 1,
                }
            }
            Err(_) => failures += 1,
        }
    }
    let ok = reps - failures;
    let rate = if ok > 0 { rejections as f64 / ok as f64 } else { f64::NAN };
    SizePowerResult {
        rejection_rate: rate,
        se: (rate * (1.0 - rate) / ok as f64).sqrt(),
        mean_d: if d_count > 0 { d_sum / d_count as f64 } else { f64::NAN },
        reps,
        failures,
        fallbacks,
        config,
    }
}

fn run_one(x: &SampleBlock, y: &SampleBlock, center: bool, alpha: f64) -> Result<RepOutcome> {
    let opts = TestOptions { center, exec: Execution::Sequential };
    let report = covariance_test(x, y, &opts)?;
    let d = match report.method {
        Method::ThreeCumulantChi2 => report.d,
        Method::NormalFallback => None,
    };
    Ok(RepOutcome { reject: report.p_value <= alpha, d })
}

/// Runs `cfg.reps` replications with the default (parallel) execution.
pub fn empirical_size_power(cfg: &SimConfig) -> Result<SizePowerResult> {
    empirical_size_power_with(cfg, Execution::default())
}

/// Runs `cfg.reps` replications: draw both samples, test, reject when `p <= α`.
pub fn empirical_size_power_with(cfg: &SimConfig, exec: Execution) -> Result<SizePowerResult> {
    let population = Population::from_config(cfg)?;
    let outcomes = exec.map(cfg.reps, |rep| {
        let mut rng = stream(cfg.seed, rep as u64);
        let x = population.sample(Group::First, cfg.n1, &mut rng);
        let y = population.sample(Group::Second, cfg.n2, &mut rng);
        run_one(&x, &y, cfg.center, cfg.alpha)
    });
    Ok(aggregate(outcomes, cfg.reps, Some(cfg.clone())))
}

/// Average relative error `100 / M Σ |α̂_j - α| / α`.
pub fn are(sizes: &[f64], alpha: f64) -> Result<f64> {
    if sizes.is_empty() {
        return Err(Error::EmptyList);
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must be positive")));
    }
    let total: f64 = sizes.iter().map(|s| (s - alpha).abs() / alpha).sum();
    Ok(100.0 * total / sizes.len() as f64)
}

/// Large-`d` local power `Φ(-z_α + n τ (1-τ) tr{(Σ1-Σ2)^2} / sqrt(2 tr(Ω^2)))`,
/// with `Ω = (1-τ) Ω1 + τ Ω2` and `τ = n1 / n`.
pub fn asymptotic_power(n: f64, tau: f64, tr_omega_sq: f64, frob_sq_diff: f64, alpha: f64) -> Result<f64> {
    if !(tr_omega_sq > 0.0) {
        return Err(Error::InvalidParams(format!("tr(Omega^2) = {tr_omega_sq} must be positive")));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParams(format!("tau = {tau} must lie in (0, 1)")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let shift = n * tau * (1.0 - tau) * frob_sq_diff / (2.0 * tr_omega_sq).sqrt();
    Ok(normal_cdf(-normal_upper_quantile(alpha) + shift))
}

/// Sizes of the two halves of a random split of `n` rows.
pub fn split_sizes(n: usize) -> (usize, usize) {
    (n / 2, n - n / 2)
}

/// Empirical size from repeatedly splitting one sample into random halves and
/// testing the halves against each other.
pub fn random_split_size(
    x: &SampleBlock,
    reps: usize,
    alpha: f64,
    seed: u64,
    center: bool,
    exec: Execution,
) -> Result<SizePowerResult> {
    const MIN_SPLIT: usize = 8;
    if x.n() < MIN_SPLIT {
        return Err(Error::TooFewObservations { n: x.n(), min: MIN_SPLIT });
    }
    if reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let (n1, _) = split_sizes(x.n());
    let outcomes = exec.map(reps, |rep| {
        let mut rng = stream(seed, rep as u64);
        let (first, second) = random_partition(x.n(), n1, &mut rng);
        run_one(&x.permuted_rows(&first), &x.permuted_rows(&second), center, alpha)
    });
    Ok(aggregate(outcomes, reps, None))
}

/// Shuffles `0..n` and cuts it after `n1` entries.
pub fn random_partition<R: Rng + ?Sized>(n: usize, n1: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let second = idx.split_off(n1);
    (idx, second)
}
