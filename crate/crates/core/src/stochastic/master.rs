//! Integration of the master equation on a truncated state space.

use crate::error::{Error, Result};
use crate::graph::Multigraph;

use super::{explore, CtmcSpec, StateSpace};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Largest state space the truncation may produce.
    pub max_states: usize,
    /// Leakage above this bound is an error.
    pub max_leakage: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            atol: 1e-10,
            rtol: 1e-10,
            max_states: 100_000,
            max_leakage: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MasterSolution {
    pub space: StateSpace,
    pub times: Vec<f64>,
    /// Probability of each state at each requested time.
    pub probabilities: Vec<Vec<f64>>,
    /// Mass lost through the truncation boundary by each time.
    pub leakage: Vec<f64>,
}

impl MasterSolution {
    pub fn states(&self) -> &[Multigraph] {
        &self.space.states
    }

    /// `Σ_s p_s(t) f(s)` at every requested time.
    pub fn expectation(&self, f: impl Fn(&Multigraph) -> f64) -> Vec<f64> {
        let values: Vec<f64> = self.space.states.iter().map(f).collect();
        self.probabilities
            .iter()
            .map(|p| p.iter().zip(&values).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Probability mass of each edge count at time index `i`.
    pub fn edge_count_distribution(&self, i: usize) -> Vec<f64> {
        let max = self.space.states.iter().map(Multigraph::edge_count).max().unwrap_or(0);
        let mut out = vec![0.0; max + 1];
        for (p, g) in self.probabilities[i].iter().zip(&self.space.states) {
            out[g.edge_count()] += p;
        }
        out
    }
}

/// Solves `dp/dt = p Q` from the point mass on the initial state, where
/// `Q` is the generator restricted to states reachable inside `keep`.
/// Requested times must be non-negative and increasing.
pub fn master_equation_integrate(
    spec: &CtmcSpec,
    keep: &dyn Fn(&Multigraph) -> bool,
    times: &[f64],
    options: OdeOptions,
) -> Result<MasterSolution> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("times must be non-negative and increasing".into()));
    }
    let space = explore(spec, keep, options.max_states)?;
    let n = space.states.len();
    let rhs = |p: &[f64], out: &mut [f64]| {
        for (i, x) in out.iter_mut().enumerate() {
            *x = -space.exit[i] * p[i];
        }
        for (i, row) in space.jumps.iter().enumerate() {
            for &(j, r) in row {
                out[j] += p[i] * r;
            }
        }
    };

    let mut p = vec![0.0; n];
    p[0] = 1.0;
    let mut t = 0.0;
    let mut probabilities = Vec::with_capacity(times.len());
    let mut leakage = Vec::with_capacity(times.len());
    let mut h = 1e-3;
    for &target in times {
        h = integrate(&rhs, &mut p, t, target, h, options.atol, options.rtol)?;
        t = target;
        let lost = 1.0 - p.iter().sum::<f64>();
        if lost > options.max_leakage {
            return Err(Error::Stochastic(format!(
                "truncation leaks {lost:e} of the probability mass by t = {target}"
            )));
        }
        probabilities.push(p.clone());
        leakage.push(lost.max(0.0));
    }
    Ok(MasterSolution {
        space,
        times: times.to_vec(),
        probabilities,
        leakage,
    })
}

// Dormand–Prince 5(4) tableau; the system is autonomous, so the nodes
// are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive integration of `y' = f(y)` from `t0` to `t1`; returns the last
/// accepted step size.
fn integrate<F>(f: &F, y: &mut [f64], t0: f64, t1: f64, mut h: f64, atol: f64, rtol: f64) -> Result<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut t = t0;
    let mut steps = 0usize;
    while t < t1 {
        let step = h.min(t1 - t);
        if step <= 0.0 {
            break;
        }
        f(y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += step * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            f(&stage, &mut k[s]);
        }
        let mut err = 0.0f64;
        for i in 0..n {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += step * B5[s] * k[s][i];
                lo += step * B4[s] * k[s][i];
            }
            y5[i] = hi;
            let scale = atol + rtol * y[i].abs().max(hi.abs());
            err = err.max(((hi - lo) / scale).abs());
        }
        if err <= 1.0 {
            t += step;
            y.copy_from_slice(&y5);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * factor;
        steps += 1;
        if steps > 10_000_000 {
            return Err(Error::Stochastic("ODE integration did not converge".into()));
        }
    }
    Ok(h)
}
