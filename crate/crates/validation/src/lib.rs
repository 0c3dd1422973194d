//! Reference computations that share no code with the `dualpace` oracle module.
//!
//! The acceptance suite compares the library's Monte-Carlo and scan-and-bisect
//! oracles against these: deterministic quadrature for the exponential
//! second-price environment, and brute-force bid search for per-round dual values.

use dualpace::AuctionSample;

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Root of a continuous `f` on `[lo, hi]` with `f(lo) > 0 > f(hi)`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Values `v ~ Exp(mean value_mean)` against a competing bid `d ~ Exp(mean bid_mean)`
/// in a second-price auction, integrated over `v` numerically.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialQuadrature {
    pub value_mean: f64,
    pub bid_mean: f64,
    pub panels: usize,
}

impl ExponentialQuadrature {
    pub fn new(value_mean: f64, bid_mean: f64) -> Self {
        ExponentialQuadrature {
            value_mean,
            bid_mean,
            panels: 40_000,
        }
    }

    fn density(&self, v: f64) -> f64 {
        (-v / self.value_mean).exp() / self.value_mean
    }

    /// `(E[v 1{d < k v}], E[d 1{d < k v}])`.
    pub fn outcome(&self, k: f64) -> (f64, f64) {
        let th = self.bid_mean;
        let upper = 60.0 * self.value_mean;
        let value = simpson(
            |v| v * (1.0 - (-k * v / th).exp()) * self.density(v),
            0.0,
            upper,
            self.panels,
        );
        // E[d 1{d < a}] for d ~ Exp(th) is th (1 - e^{-a/th} (1 + a/th)).
        let pay = simpson(
            |v| {
                let r = k * v / th;
                th * (1.0 - (-r).exp() * (1.0 + r)) * self.density(v)
            },
            0.0,
            upper,
            self.panels,
        );
        (value, pay)
    }

    /// `(k_B, k_R)`: zeros of `rho - E[p]` and `E[v x - p]` on `(0, k_hi]`.
    pub fn crossings(&self, rho: f64, k_hi: f64) -> (Option<f64>, Option<f64>) {
        let kb = bisect(|k| rho - self.outcome(k).1, 1e-9, k_hi, 1e-9);
        let kr = bisect(
            |k| {
                let (v, p) = self.outcome(k);
                v - p
            },
            1e-6,
            k_hi,
            1e-9,
        );
        (kb, kr)
    }
}

/// `max_b (1 + lambda) v x(b) - (lambda + mu) p(b)` for one round, by evaluating
/// every bid on a uniform grid over `[0, b_max]` plus the extra candidates given.
pub fn round_dual_brute(s: &AuctionSample, lambda: f64, mu: f64, b_max: f64, steps: usize, extra: &[f64]) -> f64 {
    let obj = |b: f64| (1.0 + lambda) * s.value * s.allocation_at(b) - (lambda + mu) * s.payment_at(b);
    let grid = (0..=steps).map(|i| b_max * i as f64 / steps as f64);
    grid.chain(extra.iter().copied())
        .map(obj)
        .fold(f64::NEG_INFINITY, f64::max)
}
