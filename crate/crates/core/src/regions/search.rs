//! Weighted-sum search over coding configurations.
//!
//! Each start draws a random base configuration (p₀, φ₀, F₀) and searches the
//! real vector θ = (logits, Δφ, generators) with
//! p = softmax(θ_p + ln p₀), φ = (φ₀ + Δφ)/‖·‖, F^(x) = exp(iK_x) F₀^(x),
//! where K_x is the Hermitian matrix spelled out by its real coordinates.

use rayon::prelude::*;

use super::{secure_rates, terms_unchecked, CodingConfig, RatePoint};
use crate::channels::WiretapChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, c, re, CMat, CVec};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::random;
use crate::tensor::{PureState, Register};

/// Largest per-symbol output vector (d_out · d_G2) the search accepts.
const SEARCH_DIM_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchDims {
    pub x: usize,
    pub g1: usize,
    pub g2: usize,
}

impl SearchDims {
    /// |X| = d_A², d_G1 = d_G2 = d_A.
    pub fn default_for(d_a: usize) -> Self {
        SearchDims {
            x: d_a * d_a,
            g1: d_a,
            g2: d_a,
        }
    }

    fn squared(self) -> Self {
        SearchDims {
            x: self.x * self.x,
            g1: self.g1 * self.g1,
            g2: self.g2 * self.g2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegionOptions {
    /// Weights λ on R; the objective is λR + (1−λ)R'.
    pub weights: Vec<f64>,
    /// Objective evaluations per weight, shared by all starts.
    pub budget: usize,
    pub seed: u64,
    pub dims: Option<SearchDims>,
    pub starts: usize,
}

impl RegionOptions {
    pub fn new(weights: Vec<f64>, budget: usize, seed: u64) -> Self {
        RegionOptions {
            weights,
            budget,
            seed,
            dims: None,
            starts: 16,
        }
    }

    /// `count` weights evenly spaced on [0, 1].
    pub fn evenly_spaced(count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![0.5],
            _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeightResult {
    pub lambda: f64,
    pub point: RatePoint,
    pub objective: f64,
    pub evals: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RegionSample {
    /// Best point per weight, in weight order.
    pub weights: Vec<WeightResult>,
    /// Pareto flag per entry of `weights`.
    pub frontier: Vec<bool>,
    /// Non-dominated (R, R') pairs among every evaluated configuration.
    pub explored: Vec<RatePoint>,
}

impl RegionSample {
    pub fn points(&self) -> impl Iterator<Item = &RatePoint> {
        self.weights.iter().map(|w| &w.point)
    }
}

/// Marks points not dominated by any other point.
pub fn pareto_flags(points: &[(f64, f64)]) -> Vec<bool> {
    points
        .iter()
        .map(|&(r, rp)| {
            !points
                .iter()
                .any(|&(r2, rp2)| r2 >= r && rp2 >= rp && (r2 > r || rp2 > rp))
        })
        .collect()
}

/// Pareto filter of a large point cloud, sorted by decreasing R.
fn pareto_filter(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut best_rp = f64::NEG_INFINITY;
    for p in points {
        if p.1 > best_rp {
            out.push(p);
            best_rp = p.1;
        }
    }
    out
}

fn hermitian_from_params(params: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    let mut k = d;
    for i in 0..d {
        h[(i, i)] = re(params[i]);
        for j in i + 1..d {
            let z = c(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

struct Parameterization<'a> {
    base: &'a CodingConfig,
    log_p: Vec<f64>,
}

impl<'a> Parameterization<'a> {
    fn new(base: &'a CodingConfig) -> Self {
        let log_p = base.p_x().iter().map(|p| p.max(1e-12).ln()).collect();
        Parameterization { base, log_p }
    }

    fn len(&self) -> usize {
        let b = self.base;
        b.x_size() + 2 * b.d_g1() * b.d_g2() + b.x_size() * b.d_a() * b.d_a()
    }

    fn config(&self, theta: &[f64]) -> CodingConfig {
        let b = self.base;
        let nx = b.x_size();
        let logits: Vec<f64> = theta[..nx].iter().zip(&self.log_p).map(|(t, l)| t + l).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let s: f64 = w.iter().sum();
        let p_x = w.into_iter().map(|v| v / s).collect();

        let dg = b.d_g1() * b.d_g2();
        let delta = &theta[nx..nx + 2 * dg];
        let v = CVec::from_fn(dg, |i, _| b.phi().amplitudes()[i] + c(delta[2 * i], delta[2 * i + 1]));
        let norm = v.norm();
        let amplitudes = if norm > 1e-12 && norm.is_finite() {
            v / re(norm)
        } else {
            b.phi().amplitudes().clone()
        };
        let phi = PureState::from_parts_unchecked(b.phi().registers().to_vec(), amplitudes);

        let da = b.d_a();
        let gens = &theta[nx + 2 * dg..];
        let encoders = b
            .encoders()
            .iter()
            .enumerate()
            .map(|(x, f0)| {
                let k = hermitian_from_params(&gens[x * da * da..(x + 1) * da * da], da);
                linalg::unitary_from_hermitian(&k) * f0
            })
            .collect();
        CodingConfig::from_parts_unchecked(p_x, phi, encoders)
    }
}

fn random_config(dims: SearchDims, d_a: usize, seed: u64) -> CodingConfig {
    let mut rng = random::rng(seed);
    let p_x = random::probability_vector(dims.x, &mut rng);
    let phi = PureState::from_parts_unchecked(
        vec![Register::new("G1", dims.g1), Register::new("G2", dims.g2)],
        random::pure_vector(dims.g1 * dims.g2, &mut rng),
    );
    let encoders = (0..dims.x).map(|_| random::isometry(d_a, dims.g1, &mut rng)).collect();
    CodingConfig::from_parts_unchecked(p_x, phi, encoders)
}

struct StartOutcome {
    config: CodingConfig,
    rates: (f64, f64),
    objective: f64,
    evals: usize,
    explored: Vec<(f64, f64)>,
}

fn run_start(channel: &WiretapChannel, base: &CodingConfig, lambda: f64, budget: usize) -> StartOutcome {
    let param = Parameterization::new(base);
    let mut explored = Vec::with_capacity(budget);
    let objective = |rates: (f64, f64)| lambda * rates.0 + (1.0 - lambda) * rates.1;
    let res = nelder_mead(
        |theta| {
            let rates = secure_rates(&terms_unchecked(&param.config(theta), channel));
            explored.push(rates);
            -objective(rates)
        },
        &vec![0.0; param.len()],
        NelderMeadOptions {
            max_evals: budget.max(1),
            initial_step: 0.5,
            ftol: 1e-13,
        },
    );
    let config = param.config(&res.x);
    let rates = secure_rates(&terms_unchecked(&config, channel));
    StartOutcome {
        config,
        rates,
        objective: objective(rates),
        evals: res.evals,
        explored,
    }
}

fn validate(channel: &WiretapChannel, opts: &RegionOptions, dims: SearchDims) -> Result<()> {
    if opts.budget == 0 {
        return Err(Error::Parameter("budget must be positive".into()));
    }
    if opts.weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::Parameter("weights must lie in [0, 1]".into()));
    }
    if dims.x == 0 || dims.g1 == 0 || dims.g2 == 0 {
        return Err(Error::Parameter("search dimensions must be positive".into()));
    }
    if dims.g1 > channel.d_a() {
        return Err(Error::Parameter(format!(
            "d_G1 = {} exceeds the channel input dimension {}",
            dims.g1,
            channel.d_a()
        )));
    }
    let needed = channel.isometry().nrows() * dims.g2;
    if needed > SEARCH_DIM_LIMIT {
        return Err(Error::Capacity {
            needed,
            limit: SEARCH_DIM_LIMIT,
        });
    }
    Ok(())
}

fn search(
    channel: &WiretapChannel,
    opts: &RegionOptions,
    dims: SearchDims,
    warm: Option<&[CodingConfig]>,
    n: usize,
) -> Result<RegionSample> {
    validate(channel, opts, dims)?;
    let starts = opts.starts.max(1);
    let per_start = (opts.budget / starts).max(1);
    let tasks: Vec<(usize, usize)> = (0..opts.weights.len())
        .flat_map(|w| (0..starts).map(move |s| (w, s)))
        .collect();
    let outcomes: Vec<StartOutcome> = tasks
        .par_iter()
        .map(|&(w, s)| {
            let weight_seed = random::derive_seed(opts.seed, w as u64);
            let base = match (warm, s) {
                (Some(cfgs), 0) => cfgs[w].clone(),
                _ => random_config(dims, channel.d_a(), random::derive_seed(weight_seed, s as u64)),
            };
            run_start(channel, &base, opts.weights[w], per_start)
        })
        .collect();

    let scale = 1.0 / n as f64;
    let mut weights = Vec::with_capacity(opts.weights.len());
    let mut cloud = Vec::new();
    for (w, &lambda) in opts.weights.iter().enumerate() {
        let group = &outcomes[w * starts..(w + 1) * starts];
        // Highest objective wins; ties go to the lowest start index.
        let (_, best) = group
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.objective.total_cmp(&b.1.objective).then(b.0.cmp(&a.0)))
            .expect("at least one start");
        for o in group {
            cloud.extend(o.explored.iter().copied());
        }
        weights.push(WeightResult {
            lambda,
            point: RatePoint {
                r: best.rates.0 * scale,
                rp: best.rates.1 * scale,
                n,
                channel: channel.label().to_string(),
                config: Some(best.config.clone()),
            },
            objective: best.objective * scale,
            evals: group.iter().map(|o| o.evals).sum(),
            seed: random::derive_seed(opts.seed, w as u64),
        });
    }
    let frontier = pareto_flags(&weights.iter().map(|w| (w.point.r, w.point.rp)).collect::<Vec<_>>());
    let explored = pareto_filter(cloud)
        .into_iter()
        .map(|(r, rp)| RatePoint {
            r: r * scale,
            rp: rp * scale,
            n,
            channel: channel.label().to_string(),
            config: None,
        })
        .collect();
    Ok(RegionSample {
        weights,
        frontier,
        explored,
    })
}

/// Maximizes λR + (1−λ)R' of the secure rate pair for every weight.
/// Budget exhaustion returns the best point found.
pub fn optimize_region(channel: &WiretapChannel, opts: &RegionOptions) -> Result<RegionSample> {
    let dims = opts.dims.unwrap_or_else(|| SearchDims::default_for(channel.d_a()));
    search(channel, opts, dims, None, 1)
}

/// Region of N^{⊗n} with rates divided by n, for n ∈ {1, 2}. The n = 2 search
/// seeds one start per weight with the product of the n = 1 optimum, so its
/// frontier can only match or improve on single-letter points.
pub fn regularized_points(channel: &WiretapChannel, n: usize, opts: &RegionOptions) -> Result<RegionSample> {
    match n {
        1 => optimize_region(channel, opts),
        2 => {
            let power = channel.tensor_power(2)?;
            let dims = opts.dims.unwrap_or_else(|| SearchDims::default_for(channel.d_a()));
            let single = search(channel, opts, dims, None, 1)?;
            let warm: Vec<CodingConfig> = single
                .weights
                .iter()
                .map(|w| {
                    let cfg = w.point.config.as_ref().expect("search keeps configs");
                    cfg.product(cfg)
                })
                .collect();
            search(&power, opts, dims.squared(), Some(&warm), 2)
        }
        _ => Err(Error::Parameter(format!("regularized evaluation supports n ∈ {{1, 2}}, got {n}"))),
    }
}
