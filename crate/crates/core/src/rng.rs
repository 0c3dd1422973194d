//! Seeded random streams.
//!
//! Every stochastic quantity in the crate is drawn from a [`SimRng`] derived from a
//! master seed plus a key path (for example `[campaign, seed, T]`). Two streams with
//! different keys are independent; the same key always yields the same stream, no
//! matter which worker thread consumes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream for `key` under `master_seed`.
pub fn stream(master_seed: u64, key: &[u64]) -> SimRng {
    let mut h = splitmix64(master_seed);
    for &k in key {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.set_stream(key.first().copied().unwrap_or(0));
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit(rng: &mut SimRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Exponential draw with the given mean via the inverse CDF.
pub fn exponential(rng: &mut SimRng, mean: f64) -> f64 {
    -mean * open_unit(rng).ln()
}

/// Gaussian draw with `mean` and `sd`, rejected until it lands in `[lo, hi]`.
pub fn truncated_normal(rng: &mut SimRng, mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    use rand_distr::{Distribution, Normal};
    if sd == 0.0 {
        return mean.clamp(lo, hi);
    }
    let normal = Normal::new(mean, sd).expect("finite normal parameters");
    loop {
        let z = normal.sample(rng);
        if (lo..=hi).contains(&z) {
            return z;
        }
    }
}

/// Smallest `n` with `P(Poisson(rate) <= n) >= u`.
///
/// For a fixed `u` the quantile is nondecreasing in `rate`, so a single uniform
/// couples the click count across every bid.
pub fn poisson_quantile(rate: f64, u: f64) -> u64 {
    if rate <= 0.0 {
        return 0;
    }
    let mut pmf = (-rate).exp();
    if pmf == 0.0 {
        // Large rate: normal approximation keeps the quantile finite.
        let z = inverse_std_normal(u);
        return (rate + z * rate.sqrt()).round().max(0.0) as u64;
    }
    let mut cdf = pmf;
    let mut n = 0u64;
    while cdf < u {
        n += 1;
        pmf *= rate / n as f64;
        cdf += pmf;
        if pmf < 1e-300 && n as f64 > rate {
            break;
        }
    }
    n
}

// Acklam's rational approximation; only used for very large Poisson rates.
fn inverse_std_normal(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}
