//! Unit conversions used at configuration boundaries. Everything past the
//! boundary is SI: bits, seconds, hertz, watts, joules.

/// 1 Mbyte = 8 × 10^6 bits.
pub const BITS_PER_MBYTE: f64 = 8.0e6;

pub fn mbyte_to_bits(mbyte: f64) -> f64 {
    mbyte * BITS_PER_MBYTE
}

pub fn bits_to_mbyte(bits: f64) -> f64 {
    bits / BITS_PER_MBYTE
}

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn mhz(v: f64) -> f64 {
    v * 1e6
}

pub fn ghz(v: f64) -> f64 {
    v * 1e9
}
