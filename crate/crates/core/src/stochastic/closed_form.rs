//! Exact solution of the edge birth-death system: edges appear at total
//! rate `κ₊·C(N_V, 2)` and each edge disappears at rate `κ₋`. The edge
//! count at time `t` is `Poisson(A) + Binomial(N_E, q)` with
//! `q = e^{-κ₋t}` and `A = (κ₊/κ₋)·C(N_V, 2)·(1 − q)`.

use crate::error::{Error, Result};

struct Params {
    /// Poisson parameter `A`.
    a: f64,
    /// Survival probability of an initial edge.
    q: f64,
    /// `(κ₊/κ₋)·C(N_V, 2)`, or `None` when `κ₋ = 0`.
    stationary: Option<f64>,
    n_e: f64,
}

fn params(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64, t: f64) -> Result<Params> {
    if !(k_plus >= 0.0 && k_minus >= 0.0 && t >= 0.0 && k_plus.is_finite() && k_minus.is_finite() && t.is_finite()) {
        return Err(Error::Precondition(
            "rates and time must be finite and non-negative".into(),
        ));
    }
    let pairs = (n_v * n_v.saturating_sub(1) / 2) as f64;
    let n_e = n_e as f64;
    if k_minus == 0.0 {
        // Limit κ₋ → 0: no deletions, Poisson(κ₊·C·t) new edges.
        return Ok(Params {
            a: k_plus * pairs * t,
            q: 1.0,
            stationary: None,
            n_e,
        });
    }
    let q = (-k_minus * t).exp();
    let stationary = k_plus / k_minus * pairs;
    Ok(Params {
        a: stationary * -(-k_minus * t).exp_m1(),
        q,
        stationary: Some(stationary),
        n_e,
    })
}

impl Params {
    fn mean(&self) -> f64 {
        match self.stationary {
            // Written so that `stationary == N_E` gives exactly `N_E`.
            Some(s) => s + (self.n_e - s) * self.q,
            None => self.a + self.n_e,
        }
    }
}

/// `ε`-derivative of order `order` at `ε = 0` of the moment generating
/// function `E(t; ε) = ⟨e^{ε O_E}⟩`: order 0 is 1, order 1 the mean and
/// order 2 the second moment `⟨O_E²⟩`. With `κ₋ = 0` the `κ₋ → 0` limit
/// is returned.
pub fn edge_moment_closed_form(
    n_v: usize,
    n_e: usize,
    k_plus: f64,
    k_minus: f64,
    t: f64,
    order: u32,
) -> Result<f64> {
    let p = params(n_v, n_e, k_plus, k_minus, t)?;
    match order {
        0 => Ok(1.0),
        1 => Ok(p.mean()),
        2 => {
            let m = p.mean();
            Ok(p.a + p.n_e * p.q * (1.0 - p.q) + m * m)
        }
        _ => Err(Error::Precondition(format!("moment order {order} is not 0, 1 or 2"))),
    }
}

/// `E(t; ε) = exp[A(e^ε − 1)]·((e^ε − 1)q + 1)^{N_E}`.
pub fn edge_mgf(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64, t: f64, eps: f64) -> Result<f64> {
    let p = params(n_v, n_e, k_plus, k_minus, t)?;
    let z = eps.exp_m1();
    Ok((p.a * z).exp() * (z * p.q + 1.0).powf(p.n_e))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Probabilities of `0, 1, 2, …` edges at time `t`, truncated once the
/// listed mass reaches `coverage`.
pub fn edge_distribution_closed_form(
    n_v: usize,
    n_e: usize,
    k_plus: f64,
    k_minus: f64,
    t: f64,
    coverage: f64,
) -> Result<Vec<f64>> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::Precondition(format!("coverage {coverage} is not in (0, 1]")));
    }
    let p = params(n_v, n_e, k_plus, k_minus, t)?;

    let mut poisson = Vec::new();
    if p.a == 0.0 {
        poisson.push(1.0);
    } else {
        // Grow the table until the mass is covered or the tail underflows.
        let ln_a = p.a.ln();
        let mut ln_fact = 0.0;
        let mut mass = 0.0;
        let mut k = 0usize;
        loop {
            if k > 0 {
                ln_fact += (k as f64).ln();
            }
            let pk = (-p.a + k as f64 * ln_a - ln_fact).exp();
            poisson.push(pk);
            mass += pk;
            let past_mode = k as f64 > p.a;
            if mass >= coverage || (past_mode && pk < 1e-300) {
                break;
            }
            k += 1;
        }
    }

    let n = n_e;
    let lf = ln_factorials(n);
    let binom: Vec<f64> = (0..=n)
        .map(|j| {
            if p.q == 1.0 {
                f64::from(u8::from(j == n))
            } else if p.q == 0.0 {
                f64::from(u8::from(j == 0))
            } else {
                (lf[n] - lf[j] - lf[n - j] + j as f64 * p.q.ln() + (n - j) as f64 * (-p.q).ln_1p()).exp()
            }
        })
        .collect();

    let mut out = vec![0.0; poisson.len() + n];
    for (i, &a) in poisson.iter().enumerate() {
        for (j, &b) in binom.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Ok(out)
}

/// Largest edge count kept by the default master-equation truncation:
/// the stationary mean plus ten standard deviations, and at least the
/// initial edge count.
pub fn edge_truncation(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64) -> usize {
    let pairs = (n_v * n_v.saturating_sub(1) / 2) as f64;
    let mean = if k_minus > 0.0 { k_plus / k_minus * pairs } else { 0.0 };
    let bound = (mean + 10.0 * mean.sqrt()).ceil() as usize;
    bound.max(n_e) + 1
}
