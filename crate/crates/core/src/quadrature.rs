//! Quadrature rules shared by the integral-heavy modules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GlRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let xs = self.nodes.iter().map(|t| mid + half * t).collect();
        let ws = self.weights.iter().map(|w| half * w).collect();
        (xs, ws)
    }
}

/// Cached rule of the given order (order ≥ 2).
pub fn gauss_legendre(order: usize) -> Arc<GlRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GlRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(order)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(order.max(2)).expect("order >= 2");
            let mut pairs: Vec<(f64, f64)> = rule.into_node_weight_pairs();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            Arc::new(GlRule {
                nodes: pairs.iter().map(|p| p.0).collect(),
                weights: pairs.iter().map(|p| p.1).collect(),
            })
        })
        .clone()
}

/// Composite Simpson rule over uniformly spaced samples with spacing `h`.
///
/// An even number of samples is handled by closing the last three intervals
/// with the 3/8 rule.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (samples[0] + samples[1]),
        3 => h / 3.0 * (samples[0] + 4.0 * samples[1] + samples[2]),
        _ => {
            let (body, tail) = if n % 2 == 1 { (n, 0.0) } else {
                let t = &samples[n - 4..];
                (n - 3, 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3]))
            };
            let s = &samples[..body];
            let mut acc = s[0] + s[body - 1];
            for (i, v) in s.iter().enumerate().take(body - 1).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            acc * h / 3.0 + tail
        }
    }
}

/// Simpson integral of `f` over `[a, b]` with `intervals` (rounded up to even) panels.
pub fn simpson_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
