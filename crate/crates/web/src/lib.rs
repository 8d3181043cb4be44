//! wasm-bindgen bindings behind the static page in `www/`. The `demo`
//! functions hold the logic so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo {
    use serde_json::json;

    use rulealg::stochastic::{edge_distribution_closed_form, edge_moment_closed_form};
    use rulealg::{hw_normal_order, hw_sequence, GraphKind, LinearRule, RuleVector};

    type Result<T> = std::result::Result<T, String>;

    fn text(e: rulealg::Error) -> String {
        e.to_string()
    }

    /// Mean and variance of the edge count of the edge birth-death chain at
    /// `points` equidistant times in `[0, t_max]`, as a JSON object of columns.
    pub fn edge_moments(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64, t_max: f64, points: usize) -> Result<String> {
        if points < 2 {
            return Err("at least two time points are needed".into());
        }
        let mut times = Vec::with_capacity(points);
        let mut mean = Vec::with_capacity(points);
        let mut variance = Vec::with_capacity(points);
        for i in 0..points {
            let t = t_max * i as f64 / (points - 1) as f64;
            let m1 = edge_moment_closed_form(n_v, n_e, k_plus, k_minus, t, 1).map_err(text)?;
            let m2 = edge_moment_closed_form(n_v, n_e, k_plus, k_minus, t, 2).map_err(text)?;
            times.push(t);
            mean.push(m1);
            variance.push((m2 - m1 * m1).max(0.0));
        }
        Ok(json!({"time": times, "mean": mean, "variance": variance}).to_string())
    }

    /// Edge-count probabilities at time `t`, covering all but `1e-9` of the mass.
    pub fn edge_distribution(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64, t: f64) -> Result<Vec<f64>> {
        edge_distribution_closed_form(n_v, n_e, k_plus, k_minus, t, 1.0 - 1e-9).map_err(text)
    }

    /// Rows `{partition, coefficient}` of `n` edge creations on three
    /// isolated vertices, as JSON.
    pub fn edge_sequence(n: usize) -> Result<String> {
        if n > 12 {
            return Err("n above 12 is too slow for the browser".into());
        }
        let rows: Vec<_> = hw_sequence(n)
            .map_err(text)?
            .into_iter()
            .map(|(p, c)| json!({"partition": p, "coefficient": c.to_string()}))
            .collect();
        Ok(serde_json::Value::Array(rows).to_string())
    }

    /// The product of the words `(r, s)` and `(k, l)` computed by the
    /// composition engine, next to the closed-form normal order. A word
    /// `(c, d)` creates `c` vertices and deletes `d`.
    pub fn normal_order(r: usize, s: usize, k: usize, l: usize) -> Result<String> {
        if r.max(s).max(k).max(l) > 4 {
            return Err("word lengths above 4 are too slow for the browser".into());
        }
        let u = GraphKind::Undirected;
        let engine = RuleVector::delta(&LinearRule::hw_word(u, r, s))
            .product(&RuleVector::delta(&LinearRule::hw_word(u, k, l)))
            .map_err(text)?;
        let formula = hw_normal_order(u, r, s, k, l);
        let agrees = engine.minus(&formula).map_err(text)?.is_zero();
        let terms: Vec<_> = engine
            .iter()
            .map(|(_, c, rule)| {
                json!({
                    "coefficient": c.to_string(),
                    "created": rule.output().vertex_count() - rule.context().vertex_count(),
                    "deleted": rule.input().vertex_count() - rule.context().vertex_count(),
                })
            })
            .collect();
        Ok(json!({"terms": terms, "agrees": agrees}).to_string())
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub fn edge_moments(
    n_v: usize,
    n_e: usize,
    k_plus: f64,
    k_minus: f64,
    t_max: f64,
    points: usize,
) -> Result<String, JsError> {
    demo::edge_moments(n_v, n_e, k_plus, k_minus, t_max, points).map_err(js)
}

#[wasm_bindgen]
pub fn edge_distribution(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64, t: f64) -> Result<Vec<f64>, JsError> {
    demo::edge_distribution(n_v, n_e, k_plus, k_minus, t).map_err(js)
}

#[wasm_bindgen]
pub fn edge_sequence(n: usize) -> Result<String, JsError> {
    demo::edge_sequence(n).map_err(js)
}

#[wasm_bindgen]
pub fn normal_order(r: usize, s: usize, k: usize, l: usize) -> Result<String, JsError> {
    demo::normal_order(r, s, k, l).map_err(js)
}
