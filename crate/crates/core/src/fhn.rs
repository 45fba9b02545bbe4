//! Networks of FitzHugh–Nagumo neurons with diffusive coupling and local
//! feedback gains.
//!
//! Neuron `i` has membrane voltage `v_i` and recovery variable `w_i`:
//!
//! ```text
//! v_i' = c (v_i + w_i - v_i^3 / 3 + r(t)) - gamma (L v)_i - l_i v_i
//! w_i' = -(v_i - a + b w_i) / c
//! ```
//!
//! with `L` the graph Laplacian. In the scaled norm `|x|_{2,T} = |T x|_2`,
//! `T = diag(I, c I)`, the Jacobian measure is bounded by
//! `max(mu_2(J11_hat - diag l), -b/c)` where
//! `J11_hat = c I - gamma (L + L^T) / 2`. The smallest gains giving rate `eta`
//! are `l* = (c + eta) 1 - (gamma / 2) L^T 1`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{matrix_measure, Norm};
use crate::ode;

/// Absolute slack used when comparing certified and requested rates.
pub const RATE_TOL: f64 = 1e-9;

/// Periodic external input `r(t)` fed to every neuron.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum InputSignal {
    #[default]
    Zero,
    /// `offset + amplitude * sin(2 pi t / period)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        period: f64,
    },
    /// Piecewise-linear in `t mod period` through `(times[k], values[k])`.
    Spike {
        times: Vec<f64>,
        values: Vec<f64>,
        period: f64,
    },
}

impl InputSignal {
    pub fn sinusoid(offset: f64, amplitude: f64, period: f64) -> Self {
        InputSignal::Sinusoid {
            offset,
            amplitude,
            period,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InputSignal::Zero => Ok(()),
            InputSignal::Sinusoid { period, .. } if *period > 0.0 => Ok(()),
            InputSignal::Spike {
                times,
                values,
                period,
            } => {
                if !(*period > 0.0) || times.len() != values.len() || times.len() < 2 {
                    return Err(Error::InvalidArgument(
                        "spike input needs a positive period and matching breakpoints".into(),
                    ));
                }
                if times.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidArgument(
                        "spike breakpoints must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Err(Error::InvalidArgument("input period must be positive".into())),
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            InputSignal::Zero => None,
            InputSignal::Sinusoid { period, .. } | InputSignal::Spike { period, .. } => Some(*period),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            InputSignal::Zero => 0.0,
            InputSignal::Sinusoid {
                offset,
                amplitude,
                period,
            } => offset + amplitude * (2.0 * std::f64::consts::PI * t / period).sin(),
            InputSignal::Spike {
                times,
                values,
                period,
            } => {
                let s = t.rem_euclid(*period);
                if s <= times[0] {
                    return values[0];
                }
                for k in 1..times.len() {
                    if s <= times[k] {
                        let frac = (s - times[k - 1]) / (times[k] - times[k - 1]);
                        return values[k - 1] + frac * (values[k] - values[k - 1]);
                    }
                }
                values[values.len() - 1]
            }
        }
    }
}

/// Adjacency as nested rows or one flat row-major array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdjacencySpec {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl AdjacencySpec {
    pub fn to_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            AdjacencySpec::Nested(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: rows.len(),
                    });
                }
                Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            }
            AdjacencySpec::Flat(v) => {
                if v.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: n * n,
                        got: v.len(),
                    });
                }
                Ok(DMatrix::from_row_slice(n, n, v))
            }
        }
    }
}

impl From<&DMatrix<f64>> for AdjacencySpec {
    fn from(m: &DMatrix<f64>) -> Self {
        AdjacencySpec::Nested(m.row_iter().map(|r| r.iter().copied().collect()).collect())
    }
}

/// `"auto"` for the minimal gains, or an explicit gain per neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Explicit(Vec<f64>),
    Keyword(String),
}

impl Default for GainSpec {
    fn default() -> Self {
        GainSpec::Keyword("auto".into())
    }
}

fn default_t_end() -> f64 {
    25.0
}

fn default_step() -> f64 {
    1e-3
}

/// Network parameters as read from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FhnConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub adjacency: AdjacencySpec,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub eta: f64,
    #[serde(default)]
    pub input: InputSignal,
    #[serde(default)]
    pub gains: GainSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Initial state `(v, w)`; drawn from `[-4, 4]^{2N}` with `seed` if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl FhnConfig {
    /// Six-neuron directed network with `a = 0, b = 2, c = 6, gamma = 0.05,
    /// eta = 0.05`, driven by `4 + 4 sin(2 pi t)`.
    pub fn six_neuron_example() -> Self {
        let adjacency = vec![
            vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        FhnConfig {
            n: 6,
            adjacency: AdjacencySpec::Nested(adjacency),
            a: 0.0,
            b: 2.0,
            c: 6.0,
            gamma: 0.05,
            eta: 0.05,
            input: InputSignal::sinusoid(4.0, 4.0, 1.0),
            gains: GainSpec::default(),
            seed: 0,
            t_end: 25.0,
            step: 1e-3,
            x0: None,
        }
    }

    pub fn adjacency_matrix(&self) -> Result<DMatrix<f64>> {
        self.adjacency.to_matrix(self.n)
    }

    /// Validates parameters and resolves gains into a simulatable network.
    pub fn network(&self) -> Result<FhnNetwork> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("network needs at least one neuron".into()));
        }
        if !(self.b >= 0.0 && self.a >= 0.0) {
            return Err(Error::InvalidArgument("a and b must be nonnegative".into()));
        }
        if !(self.c > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidArgument("c and gamma must be positive".into()));
        }
        self.input.validate()?;
        let lap = laplacian(&self.adjacency_matrix()?)?;
        let gains = match &self.gains {
            GainSpec::Explicit(g) => {
                if g.len() != self.n {
                    return Err(Error::DimensionMismatch {
                        expected: self.n,
                        got: g.len(),
                    });
                }
                DVector::from_column_slice(g)
            }
            GainSpec::Keyword(k) if k == "auto" => fhn_gains(&lap, self.c, self.gamma, self.eta)?,
            GainSpec::Keyword(k) => {
                return Err(Error::InvalidArgument(format!("unknown gains keyword '{k}'")))
            }
        };
        Ok(FhnNetwork {
            laplacian: lap,
            a: self.a,
            b: self.b,
            c: self.c,
            gamma: self.gamma,
            gains,
            input: self.input.clone(),
        })
    }

    /// The configured `x0`, or a seeded uniform draw from `[-4, 4]^{2N}`.
    pub fn initial_state(&self) -> Result<Vec<f64>> {
        match &self.x0 {
            Some(x) if x.len() == 2 * self.n => Ok(x.clone()),
            Some(x) => Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                got: x.len(),
            }),
            None => Ok(random_initial_state(self.n, self.seed)),
        }
    }
}

/// Uniform draw from `[-4, 4]^{2N}`.
pub fn random_initial_state(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..2 * n).map(|_| rng.random_range(-4.0..4.0)).collect()
}

/// Graph Laplacian `L = diag(out-degree) - M` of a 0/1 adjacency matrix
/// (`M[i][j] = 1` when `j` is a neighbour of `i`).
pub fn laplacian(adjacency: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !adjacency.is_square() {
        return Err(Error::NotSquare {
            rows: adjacency.nrows(),
            cols: adjacency.ncols(),
        });
    }
    let n = adjacency.nrows();
    for i in 0..n {
        for j in 0..n {
            let v = adjacency[(i, j)];
            if v != 0.0 && v != 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "adjacency entry ({i}, {j}) = {v} is not 0/1"
                )));
            }
            if i == j && v != 0.0 {
                return Err(Error::InvalidArgument(format!("self-loop at neuron {i}")));
            }
        }
    }
    let mut l = -adjacency.clone();
    for i in 0..n {
        l[(i, i)] = adjacency.row(i).sum();
    }
    Ok(l)
}

/// `c I - gamma (L + L^T) / 2`, the symmetric-part bound of the voltage block.
pub fn voltage_block_bound(lap: &DMatrix<f64>, c: f64, gamma: f64) -> DMatrix<f64> {
    let n = lap.nrows();
    DMatrix::identity(n, n) * c - (lap + lap.transpose()) * (0.5 * gamma)
}

/// Minimal gains `(c + eta) 1 - (gamma / 2) L^T 1` for rate `eta`.
pub fn fhn_gains(lap: &DMatrix<f64>, c: f64, gamma: f64, eta: f64) -> Result<DVector<f64>> {
    let max_deg = lap.diagonal().iter().copied().fold(0.0, f64::max);
    let floor = gamma * max_deg - c;
    if eta < floor {
        return Err(Error::HypothesisViolated(format!(
            "eta >= gamma * max_i L_ii - c fails: {eta} < {floor}"
        )));
    }
    let col_sums = lap.row_sum().transpose();
    Ok(DVector::from_element(lap.nrows(), c + eta) - col_sums * (0.5 * gamma))
}

/// Validated network with resolved gains.
#[derive(Debug, Clone)]
pub struct FhnNetwork {
    pub laplacian: DMatrix<f64>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub gains: DVector<f64>,
    pub input: InputSignal,
}

impl FhnNetwork {
    pub fn neurons(&self) -> usize {
        self.laplacian.nrows()
    }

    /// Closed-loop vector field at `(t, x)`, `x = (v, w)`.
    pub fn vector_field(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let n = self.neurons();
        let (v, w) = x.split_at(n);
        let r = self.input.eval(t);
        for i in 0..n {
            let coupling: f64 = v.iter().enumerate().map(|(j, vj)| self.laplacian[(i, j)] * vj).sum();
            dx[i] = self.c * (v[i] + w[i] - v[i].powi(3) / 3.0 + r)
                - self.gamma * coupling
                - self.gains[i] * v[i];
            dx[n + i] = -(v[i] - self.a + self.b * w[i]) / self.c;
        }
    }

    /// Closed-loop Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.neurons();
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for s in 0..n {
                j[(r, s)] = -self.gamma * self.laplacian[(r, s)];
            }
            j[(r, r)] += self.c - self.c * x[r] * x[r] - self.gains[r];
            j[(r, n + r)] = self.c;
            j[(n + r, r)] = -1.0 / self.c;
            j[(n + r, n + r)] = -self.b / self.c;
        }
        j
    }

    /// Diagonal of `T = diag(I, c I)`.
    pub fn norm_scaling(&self) -> Vec<f64> {
        let n = self.neurons();
        (0..2 * n).map(|k| if k < n { 1.0 } else { self.c }).collect()
    }

    /// `|x|_{2,T}`.
    pub fn scaled_norm(&self, x: &[f64]) -> f64 {
        let n = self.neurons();
        x.iter()
            .enumerate()
            .map(|(k, v)| if k < n { v * v } else { (self.c * v).powi(2) })
            .sum::<f64>()
            .sqrt()
    }

    /// `mu_{2,T}(J(x))`.
    pub fn scaled_jacobian_measure(&self, x: &[f64]) -> f64 {
        matrix_measure(&self.jacobian(x), Norm::Two, Some(&self.norm_scaling()))
            .expect("jacobian is square with positive scaling")
    }

    pub fn simulate(&self, x0: &[f64], t_end: f64, step: f64) -> Result<Trajectory> {
        let n = self.neurons();
        if x0.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: x0.len(),
            });
        }
        if !(t_end > 0.0 && step > 0.0) {
            return Err(Error::InvalidArgument("t_end and step must be positive".into()));
        }
        let steps = (t_end / step).round() as usize;
        let mut times = Vec::with_capacity(steps + 1);
        let mut states = Vec::with_capacity(steps + 1);
        let mut input_trace = Vec::with_capacity(steps + 1);
        ode::integrate(
            |t, x, dx| self.vector_field(t, x, dx),
            0.0,
            x0,
            step,
            steps,
            |_, t, x| {
                times.push(t);
                states.push(x.to_vec());
                input_trace.push(self.input.eval(t));
            },
        )?;
        Ok(Trajectory {
            neurons: n,
            times,
            states,
            input_trace,
        })
    }
}

/// Time-stamped samples of a simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub neurons: usize,
    pub times: Vec<f64>,
    /// `(v_1..v_N, w_1..w_N)` per sample.
    pub states: Vec<Vec<f64>>,
    pub input_trace: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,v1..vN,w1..wN,r`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.neurons;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("v{i}")));
        header.extend((1..=n).map(|i| format!("w{i}")));
        header.push("r".into());
        writeln!(out, "{}", header.join(","))?;
        for ((t, x), r) in self.times.iter().zip(&self.states).zip(&self.input_trace) {
            write!(out, "{}", crate::io::format_f64(*t))?;
            for v in x {
                write!(out, ",{}", crate::io::format_f64(*v))?;
            }
            writeln!(out, ",{}", crate::io::format_f64(*r))?;
        }
        Ok(())
    }
}

/// Convenience wrapper: resolve `config` and simulate from `x0`.
pub fn simulate(config: &FhnConfig, x0: &[f64], t_end: f64, step: f64) -> Result<Trajectory> {
    config.network()?.simulate(x0, t_end, step)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    /// Amount by which the inequality is violated (<= 0 when satisfied).
    pub residual: f64,
    /// Checks that are not required report on gain optimality only.
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionCertificate {
    pub eta_requested: f64,
    pub eta_certified: f64,
    /// `max(mu_2(J11_hat - diag l), -b/c)`, a bound on `mu_{2,T}(J)`.
    pub mu_scaled: f64,
    pub mu_voltage_block: f64,
    pub gains: Vec<f64>,
    pub hypothesis_checks: Vec<HypothesisCheck>,
    pub passed: bool,
}

impl ContractionCertificate {
    pub fn failed_checks(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.hypothesis_checks.iter().filter(|c| c.required && !c.passed)
    }
}

/// Scaled-L2 contraction certificate for the configured gains.
pub fn certify(config: &FhnConfig) -> Result<ContractionCertificate> {
    let net = config.network()?;
    let eta = config.eta;
    let j11 = voltage_block_bound(&net.laplacian, net.c, net.gamma);
    let mut closed = j11.clone();
    for i in 0..net.neurons() {
        closed[(i, i)] -= net.gains[i];
    }
    let mu_block = matrix_measure(&closed, Norm::Two, None)?;
    let w_rate = -net.b / net.c;
    let mu_scaled = mu_block.max(w_rate);
    let eta_certified = -mu_scaled;

    let nonneg_residual = -(0..net.neurons())
        .map(|i| j11[(i, i)] + eta)
        .fold(f64::INFINITY, f64::min);
    let range_residual = (eta - net.b / net.c).max(-eta);
    let checks = vec![
        HypothesisCheck {
            name: "0 <= eta <= b/c".into(),
            passed: range_residual <= RATE_TOL,
            residual: range_residual,
            required: true,
        },
        HypothesisCheck {
            name: "mu2(J11_hat - diag(l)) <= -eta".into(),
            passed: mu_block + eta <= RATE_TOL,
            residual: mu_block + eta,
            required: true,
        },
        HypothesisCheck {
            name: "J11_hat + eta I >= 0".into(),
            passed: nonneg_residual <= 0.0,
            residual: nonneg_residual,
            required: false,
        },
    ];
    let passed = checks.iter().all(|c| c.passed || !c.required) && eta_certified >= eta - RATE_TOL;
    Ok(ContractionCertificate {
        eta_requested: eta,
        eta_certified,
        mu_scaled,
        mu_voltage_block: mu_block,
        gains: net.gains.iter().copied().collect(),
        hypothesis_checks: checks,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntrainmentOptions {
    /// Start of the log-linear fit window.
    pub fit_start: f64,
    /// Allowed slack factor `K` in `gap(t) <= K e^{-eta t} gap(0)`.
    pub slack_tol: f64,
    /// Threshold on the last-period periodicity residual.
    pub periodicity_tol: f64,
}

impl Default for EntrainmentOptions {
    fn default() -> Self {
        Self {
            fit_start: 1.0,
            slack_tol: 1.05,
            periodicity_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairContraction {
    pub first: usize,
    pub second: usize,
    pub initial_gap: f64,
    /// `max_t gap(t) / (e^{-eta t} gap(0))`.
    pub slack: f64,
    /// Negated least-squares slope of `ln gap(t)` over the fit window;
    /// `None` when the gap is identically zero.
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntrainmentReport {
    pub eta: f64,
    pub period: f64,
    pub pairs: Vec<PairContraction>,
    /// Per trajectory: `max |x(t) - x(t - T)|_inf` over the last period.
    pub periodicity: Vec<f64>,
    /// Per trajectory: `max_ij |v_i - v_j|` over the last period.
    pub sync_spread: Vec<f64>,
    pub contraction_ok: bool,
    pub periodic_ok: bool,
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Contraction, periodicity and synchronisation diagnostics for trajectories
/// simulated on a common grid.
pub fn entrainment_check(
    config: &FhnConfig,
    trajectories: &[Trajectory],
    period: f64,
    opts: &EntrainmentOptions,
) -> Result<EntrainmentReport> {
    let net = config.network()?;
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trajectories".into()))?;
    for tr in trajectories {
        if tr.times != first.times || tr.neurons != net.neurons() {
            return Err(Error::InvalidArgument("trajectories are not on a common grid".into()));
        }
    }
    if first.len() < 2 || !(period > 0.0) {
        return Err(Error::InvalidArgument("need a positive period and at least two samples".into()));
    }
    let step = first.times[1] - first.times[0];
    let lag = (period / step).round() as usize;
    let last = first.len() - 1;
    if lag == 0 || 2 * lag > last {
        return Err(Error::InvalidArgument(
            "trajectory must span at least two periods".into(),
        ));
    }

    let eta = config.eta;
    let mut pairs = Vec::new();
    for p in 0..trajectories.len() {
        for q in p + 1..trajectories.len() {
            let gaps: Vec<f64> = trajectories[p]
                .states
                .iter()
                .zip(&trajectories[q].states)
                .map(|(x, y)| {
                    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                    net.scaled_norm(&d)
                })
                .collect();
            let g0 = gaps[0];
            let slack = if g0 > 0.0 {
                first
                    .times
                    .iter()
                    .zip(&gaps)
                    .map(|(t, g)| g / (g0 * (-eta * t).exp()))
                    .fold(0.0, f64::max)
            } else if gaps.iter().all(|&g| g == 0.0) {
                1.0
            } else {
                f64::INFINITY
            };
            let (ts, ls): (Vec<f64>, Vec<f64>) = first
                .times
                .iter()
                .zip(&gaps)
                .filter(|(t, g)| **t >= opts.fit_start && **g > 0.0)
                .map(|(t, g)| (*t, g.ln()))
                .unzip();
            let decay_rate = (ts.len() >= 2).then(|| -least_squares_slope(&ts, &ls));
            pairs.push(PairContraction {
                first: p,
                second: q,
                initial_gap: g0,
                slack,
                decay_rate,
            });
        }
    }

    let n = net.neurons();
    let mut periodicity = Vec::new();
    let mut sync_spread = Vec::new();
    for tr in trajectories {
        let mut per: f64 = 0.0;
        let mut spread: f64 = 0.0;
        for k in last - lag..=last {
            let (x, y) = (&tr.states[k], &tr.states[k - lag]);
            per = x.iter().zip(y).fold(per, |m, (a, b)| m.max((a - b).abs()));
            let v = &x[..n];
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            spread = spread.max(hi - lo);
        }
        periodicity.push(per);
        sync_spread.push(spread);
    }

    let contraction_ok = pairs.iter().all(|p| p.slack <= opts.slack_tol);
    let periodic_ok = periodicity.iter().all(|&p| p <= opts.periodicity_tol);
    Ok(EntrainmentReport {
        eta,
        period,
        pairs,
        periodicity,
        sync_spread,
        contraction_ok,
        periodic_ok,
    })
}
