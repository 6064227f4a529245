//! Weighted utility maximization over access probabilities.
//!
//! Maximizes `J(p) = sum_i alpha_i U(S_i(p))` by projected gradient ascent,
//! with `S(p)` from the exact engine. Each update is
//! `p <- clamp(p + eta * grad J, lo, hi)`; pinned coordinates keep their
//! value and are excluded from the update.
//!
//! Gradients come from central finite differences on the engine, or, for the
//! three-node path with `T = 2`, from the closed-form throughput expressions
//! in [`path3`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::exact_throughput;
use crate::config::{check_probabilities, NetworkConfig};
use crate::error::{Error, Result};

pub mod path3;

const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Utility {
    /// `ln(max(x, epsilon))`
    Log { epsilon: f64 },
    Linear,
}

impl Utility {
    pub fn log() -> Self {
        Utility::Log { epsilon: 1e-12 }
    }

    pub fn value(self, x: f64) -> f64 {
        match self {
            Utility::Log { epsilon } => x.max(epsilon).ln(),
            Utility::Linear => x,
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Utility::Log { epsilon } if x > epsilon => 1.0 / x,
            Utility::Log { .. } => 0.0,
            Utility::Linear => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    /// Always step by `eta0`.
    Fixed,
    /// Halve the step from `eta0` until `J` does not decrease.
    Backtracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// Closed-form derivative, three-node path with `T = 2` only.
    AnalyticPath3,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub alpha: Vec<f64>,
    pub utility: Utility,
    pub eta0: f64,
    pub step_rule: StepRule,
    pub gradient: GradientMode,
    pub fd_h: f64,
    pub max_iters: usize,
    /// Stop once an update moves `p` by less than this in the max norm.
    pub tol: f64,
    pub lo: f64,
    pub hi: f64,
    /// `(node, value)` pairs held fixed, even outside `[lo, hi]`.
    pub pinned: Vec<(usize, f64)>,
}

impl OptimizerConfig {
    /// Log utility, backtracking steps and finite differences on
    /// `[1e-4, 1 - 1e-4]`.
    pub fn new(alpha: Vec<f64>) -> Self {
        Self {
            alpha,
            utility: Utility::log(),
            eta0: 0.5,
            step_rule: StepRule::Backtracking,
            gradient: GradientMode::FiniteDifference,
            fd_h: 1e-5,
            max_iters: 5000,
            tol: 1e-9,
            lo: 1e-4,
            hi: 1.0 - 1e-4,
            pinned: Vec::new(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.alpha.len() != n {
            return bad(format!("{} weights for {n} nodes", self.alpha.len()));
        }
        if self.alpha.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return bad("weights must be finite and non-negative".into());
        }
        if let Utility::Log { epsilon } = self.utility {
            if !(epsilon > 0.0) {
                return bad("log utility needs epsilon > 0".into());
            }
        }
        if !(self.eta0 >= 0.0 && self.eta0.is_finite()) {
            return bad(format!("step size eta0={} must be non-negative", self.eta0));
        }
        if !(0.0 <= self.lo && self.lo < self.hi && self.hi <= 1.0) {
            return bad(format!("projection box [{}, {}] not inside [0,1]", self.lo, self.hi));
        }
        if !(self.fd_h > 0.0 && self.fd_h <= 1e-2) {
            return bad(format!("finite-difference step {} not in (0, 1e-2]", self.fd_h));
        }
        for &(i, v) in &self.pinned {
            if i >= n {
                return Err(Error::NodeOutOfRange { id: i, n });
            }
            check_probabilities(&[v])?;
        }
        Ok(())
    }

    fn pin(&self, i: usize) -> Option<f64> {
        self.pinned.iter().find(|&&(j, _)| j == i).map(|&(_, v)| v)
    }

    /// Clamps free coordinates into `[lo, hi]` and applies pins.
    pub fn project(&self, p: &mut [f64]) {
        for (i, x) in p.iter_mut().enumerate() {
            *x = self.pin(i).unwrap_or_else(|| x.clamp(self.lo, self.hi));
        }
    }
}

fn utility_sum(s: &[f64], opt: &OptimizerConfig) -> f64 {
    s.iter()
        .zip(&opt.alpha)
        .filter(|&(_, &a)| a != 0.0)
        .map(|(&x, &a)| a * opt.utility.value(x))
        .sum()
}

fn evaluate(p: &[f64], template: &NetworkConfig) -> Result<Vec<f64>> {
    Ok(exact_throughput(&template.with_p(p.to_vec())?)?.0)
}

/// `J(p)` with throughput from the exact engine.
pub fn objective(p: &[f64], template: &NetworkConfig, opt: &OptimizerConfig) -> Result<f64> {
    Ok(utility_sum(&evaluate(p, template)?, opt))
}

/// `dJ/dp`; zero on pinned coordinates.
pub fn gradient(p: &[f64], template: &NetworkConfig, opt: &OptimizerConfig) -> Result<Vec<f64>> {
    opt.validate(template.n())?;
    let mut g = match opt.gradient {
        GradientMode::AnalyticPath3 => analytic_gradient(p, template, opt)?,
        GradientMode::FiniteDifference => fd_gradient(p, template, opt)?,
    };
    for &(i, _) in &opt.pinned {
        g[i] = 0.0;
    }
    Ok(g)
}

fn analytic_gradient(p: &[f64], template: &NetworkConfig, opt: &OptimizerConfig) -> Result<Vec<f64>> {
    if !path3::is_path3(template) {
        return Err(Error::InvalidConfig(
            "analytic gradient is only available for the three-node path 0-1-2 with T = 2".into(),
        ));
    }
    let p = [p[0], p[1], p[2]];
    let s = path3::throughput(p);
    let jac = path3::jacobian(p);
    Ok((0..3)
        .map(|i| {
            (0..3)
                .map(|k| opt.alpha[k] * opt.utility.derivative(s[k]) * jac[k][i])
                .sum()
        })
        .collect())
}

fn fd_gradient(p: &[f64], template: &NetworkConfig, opt: &OptimizerConfig) -> Result<Vec<f64>> {
    let h = opt.fd_h;
    let pinned: Vec<bool> = (0..p.len()).map(|i| opt.pin(i).is_some()).collect();
    (0..p.len())
        .into_par_iter()
        .map(|i| {
            if pinned[i] {
                return Ok(0.0);
            }
            let (lo, hi) = if p[i] - h >= opt.lo && p[i] + h <= opt.hi {
                (p[i] - h, p[i] + h)
            } else if p[i] + h <= opt.hi {
                (p[i], p[i] + h)
            } else {
                (p[i] - h, p[i])
            };
            let mut x = p.to_vec();
            x[i] = hi;
            let up = objective(&x, template, opt)?;
            x[i] = lo;
            let down = objective(&x, template, opt)?;
            Ok((up - down) / (hi - lo))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub k: usize,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub j: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub iterations: Vec<Iterate>,
    pub converged: bool,
    /// Why the loop stopped without converging.
    pub reason: Option<String>,
}

impl OptimizerTrace {
    pub fn final_iterate(&self) -> &Iterate {
        self.iterations.last().expect("trace holds the starting point")
    }

    /// CSV with columns `iter, p_0..p_{n-1}, S_0..S_{n-1}, J`.
    pub fn to_csv(&self) -> String {
        let n = self.final_iterate().p.len();
        let mut out = String::from("iter");
        (0..n).for_each(|i| out.push_str(&format!(",p_{i}")));
        (0..n).for_each(|i| out.push_str(&format!(",S_{i}")));
        out.push_str(",J\n");
        for it in &self.iterations {
            out.push_str(&it.k.to_string());
            for v in it.p.iter().chain(&it.s) {
                out.push(',');
                out.push_str(&crate::report::format_sig9(*v));
            }
            out.push(',');
            out.push_str(&crate::report::format_sig9(it.j));
            out.push('\n');
        }
        out
    }
}

/// Projected gradient ascent from `p0`.
pub fn optimize(template: &NetworkConfig, opt: &OptimizerConfig, p0: &[f64]) -> Result<OptimizerTrace> {
    let n = template.n();
    opt.validate(n)?;
    if p0.len() != n {
        return Err(Error::InvalidConfig(format!("start vector has {} entries for {n} nodes", p0.len())));
    }
    if let Some(i) = (0..n).find(|&i| opt.pin(i).is_none() && !(opt.lo..=opt.hi).contains(&p0[i])) {
        return Err(Error::InvalidConfig(format!(
            "start p_{i}={} outside the box [{}, {}]",
            p0[i], opt.lo, opt.hi
        )));
    }
    let mut p = p0.to_vec();
    opt.project(&mut p);
    let mut s = evaluate(&p, template)?;
    let mut j = utility_sum(&s, opt);
    let mut iterations = vec![Iterate { k: 0, p: p.clone(), s: s.clone(), j }];

    for k in 1..=opt.max_iters {
        let g = gradient(&p, template, opt)?;
        let step = |eta: f64| {
            let mut x: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a + eta * b).collect();
            opt.project(&mut x);
            x
        };
        let accepted = match opt.step_rule {
            StepRule::Fixed => {
                let x = step(opt.eta0);
                let sx = evaluate(&x, template)?;
                let jx = utility_sum(&sx, opt);
                Some((x, sx, jx))
            }
            StepRule::Backtracking => {
                let mut eta = opt.eta0;
                let mut found = None;
                for _ in 0..=MAX_HALVINGS {
                    let x = step(eta);
                    let sx = evaluate(&x, template)?;
                    let jx = utility_sum(&sx, opt);
                    if jx >= j {
                        found = Some((x, sx, jx));
                        break;
                    }
                    eta *= 0.5;
                }
                found
            }
        };
        let Some((x, sx, jx)) = accepted else {
            return Ok(OptimizerTrace {
                iterations,
                converged: false,
                reason: Some(format!(
                    "stalled at iteration {k}: no step up to {MAX_HALVINGS} halvings improved J"
                )),
            });
        };
        let moved = x.iter().zip(&p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (p, s, j) = (x, sx, jx);
        iterations.push(Iterate { k, p: p.clone(), s: s.clone(), j });
        if moved < opt.tol {
            return Ok(OptimizerTrace {
                iterations,
                converged: true,
                reason: None,
            });
        }
    }
    Ok(OptimizerTrace {
        iterations,
        converged: false,
        reason: Some(format!("reached max_iters = {}", opt.max_iters)),
    })
}

/// One weight vector's optimum in a boundary sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub j: f64,
    pub converged: bool,
    pub error: Option<String>,
}

/// Runs [`optimize`] once per weight vector. Failures are recorded per point
/// and the sweep continues. Output order follows `weights`.
pub fn region_boundary(
    template: &NetworkConfig,
    weights: &[Vec<f64>],
    opt: &OptimizerConfig,
    p0: &[f64],
) -> Vec<RegionPoint> {
    weights
        .par_iter()
        .map(|alpha| {
            let cfg = OptimizerConfig {
                alpha: alpha.clone(),
                ..opt.clone()
            };
            match optimize(template, &cfg, p0) {
                Ok(trace) => {
                    let last = trace.final_iterate();
                    RegionPoint {
                        alpha: alpha.clone(),
                        p: last.p.clone(),
                        s: last.s.clone(),
                        j: last.j,
                        converged: trace.converged,
                        error: trace.reason.clone(),
                    }
                }
                Err(e) => RegionPoint {
                    alpha: alpha.clone(),
                    p: Vec::new(),
                    s: Vec::new(),
                    j: f64::NAN,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Weight vectors `alpha_a = t, alpha_b = 1 - t`, all others zero, for
/// `t = 0, 1/steps, ..., 1`.
pub fn pairwise_weight_grid(n: usize, a: usize, b: usize, steps: usize) -> Vec<Vec<f64>> {
    (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            let mut w = vec![0.0; n];
            w[a] = t;
            w[b] = 1.0 - t;
            w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConflictGraph, Topology};
    use approx::assert_abs_diff_eq;

    fn path_template() -> NetworkConfig {
        NetworkConfig::new(ConflictGraph::named(Topology::Path, 3).unwrap(), vec![0.5; 3], 2).unwrap()
    }

    fn single(t: usize) -> NetworkConfig {
        NetworkConfig::new(ConflictGraph::empty(1).unwrap(), vec![0.5], t).unwrap()
    }

    #[test]
    fn objective_selects_weighted_node() {
        let tpl = path_template();
        let mut opt = OptimizerConfig::new(vec![1.0, 0.0, 0.0]);
        opt.utility = Utility::Linear;
        let p = [0.3, 0.6, 0.2];
        let s = evaluate(&p, &tpl).unwrap();
        assert_eq!(objective(&p, &tpl, &opt).unwrap(), s[0]);
        opt.alpha = vec![0.0; 3];
        assert_eq!(objective(&p, &tpl, &opt).unwrap(), 0.0);
    }

    #[test]
    fn single_node_linear_gradient() {
        for (p, t) in [(0.3, 2usize), (0.7, 4)] {
            let mut opt = OptimizerConfig::new(vec![1.0]);
            opt.utility = Utility::Linear;
            let g = gradient(&[p], &single(t), &opt).unwrap();
            let t = t as f64;
            let expect = t / (1.0 + (t - 1.0) * p).powi(2);
            assert_abs_diff_eq!(g[0], expect, epsilon = 1e-7);
        }
    }

    #[test]
    fn projection_fixed_point_at_corner() {
        let mut opt = OptimizerConfig::new(vec![1.0]);
        opt.utility = Utility::Linear;
        opt.step_rule = StepRule::Fixed;
        let tpl = single(2);
        let trace = optimize(&tpl, &opt, &[opt.hi]).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.final_iterate().p, vec![opt.hi]);
    }

    #[test]
    fn monotone_single_node_reaches_upper_bound() {
        let mut opt = OptimizerConfig::new(vec![1.0]);
        opt.utility = Utility::Linear;
        let trace = optimize(&single(3), &opt, &[0.2]).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.final_iterate().p, vec![opt.hi]);
    }

    #[test]
    fn zero_step_converges_immediately() {
        let mut opt = OptimizerConfig::new(vec![0.6, 0.6, 0.3]);
        opt.eta0 = 0.0;
        let trace = optimize(&path_template(), &opt, &[0.5; 3]).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations.len(), 2);
        assert_eq!(trace.iterations[1].k, 1);
        assert_eq!(trace.iterations[0].p, trace.iterations[1].p);
    }

    #[test]
    fn single_iteration_budget() {
        let mut opt = OptimizerConfig::new(vec![0.6, 0.6, 0.3]);
        opt.max_iters = 1;
        let trace = optimize(&path_template(), &opt, &[0.5; 3]).unwrap();
        assert_eq!(trace.iterations.len(), 2);
        assert!(!trace.converged);
        assert!(trace.reason.unwrap().contains("max_iters"));
    }

    #[test]
    fn pinned_nodes_stay_put() {
        let mut opt = OptimizerConfig::new(vec![0.0, 0.5, 0.5]);
        opt.pinned = vec![(0, 0.0)];
        let trace = optimize(&path_template(), &opt, &[0.0, 0.5, 0.5]).unwrap();
        assert!(trace.iterations.iter().all(|it| it.p[0] == 0.0));
        assert_eq!(trace.final_iterate().s[0], 0.0);
    }

    #[test]
    fn validation() {
        let tpl = path_template();
        let mut opt = OptimizerConfig::new(vec![1.0, 1.0]);
        assert!(optimize(&tpl, &opt, &[0.5; 3]).is_err());
        opt.alpha = vec![1.0, -1.0, 0.0];
        assert!(optimize(&tpl, &opt, &[0.5; 3]).is_err());
        opt.alpha = vec![1.0; 3];
        opt.fd_h = 0.1;
        assert!(optimize(&tpl, &opt, &[0.5; 3]).is_err());
        opt.fd_h = 1e-5;
        assert!(optimize(&tpl, &opt, &[0.5, 0.5, 1.0]).is_err());
        opt.gradient = GradientMode::AnalyticPath3;
        assert!(gradient(&[0.5], &single(2), &OptimizerConfig {
            alpha: vec![1.0],
            ..opt.clone()
        })
        .is_err());
    }

    #[test]
    fn weight_grid() {
        let w = pairwise_weight_grid(3, 1, 2, 10);
        assert_eq!(w.len(), 11);
        assert_eq!(w[0], vec![0.0, 0.0, 1.0]);
        assert_eq!(w[10], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn trace_csv_header() {
        let mut opt = OptimizerConfig::new(vec![0.6, 0.6, 0.3]);
        opt.max_iters = 2;
        let csv = optimize(&path_template(), &opt, &[0.5; 3]).unwrap().to_csv();
        assert!(csv.starts_with("iter,p_0,p_1,p_2,S_0,S_1,S_2,J\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
