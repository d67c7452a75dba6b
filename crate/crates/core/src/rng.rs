//! Seeded random streams.
//!
//! Every stochastic draw in the pipeline comes from a stream keyed by
//! `(seed, tag, id)`, so two scenarios that share a seed see the same draws
//! for the same agent (common random numbers).
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub mod tags {
    pub const ESTABLISHMENTS: u64 = 1;
    pub const INDIVIDUALS: u64 = 2;
    pub const CONTRACTS: u64 = 3;
    pub const FUNCTIONS: u64 = 4;
    pub const FLOOR_STARTS: u64 = 5;
    pub const CITY_TABLES: u64 = 6;
    pub const PREDAY: u64 = 10;
    pub const DESTINATIONS: u64 = 11;
    pub const ECOMMERCE: u64 = 12;
    pub const SHIPMENTS: u64 = 13;
    pub const VOP: u64 = 14;
    pub const ROUTE: u64 = 15;
    pub const DWELL: u64 = 16;
    pub const CARPOOL: u64 = 17;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a sequence of keys into one 64-bit seed.
pub fn mix(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x2545_F491_4F6C_DD1D, |acc, &k| splitmix64(acc ^ splitmix64(k)))
}

/// Stream for one entity under one tag.
pub fn stream(seed: u64, tag: u64, id: u64) -> SimRng {
    SimRng::seed_from_u64(mix(&[seed, tag, id]))
}

/// Stream for one entity under one tag on a given simulated day.
pub fn day_stream(seed: u64, tag: u64, id: u64, day: u64) -> SimRng {
    SimRng::seed_from_u64(mix(&[seed, tag, id, day]))
}

/// A single uniform draw in [0, 1) keyed by `keys`, for hot loops where
/// building a full stream is wasteful.
pub fn uniform(keys: &[u64]) -> f64 {
    (mix(keys) >> 11) as f64 / (1u64 << 53) as f64
}

/// Inverse standard normal CDF (Acklam's rational approximation, relative
/// error below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
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
    const D: [f64; 4] = [7.784695709041462e-3, 3.224671290700398e-1, 2.445134137142996, 3.754408661907416];
    let tail = |q: f64| (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}
