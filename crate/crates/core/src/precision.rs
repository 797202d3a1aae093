//! Numeric precision modes and fixed-point rendering.

use std::fmt;
use std::str::FromStr;

/// Slack applied before rounding so that values such as `0.545`, which are
/// stored as `0.54499999...`, still round the way they read in decimal.
const DECIMAL_SLACK: f64 = 1e-9;

/// Arithmetic mode for every credibility computation.
///
/// `Full` keeps machine precision throughout. `Round2` rounds every published
/// intermediate (truth triples, resolved credibility factors and the weighted
/// terms of the multi-constituent sum) to two decimals, half away from zero,
/// which is how hand-worked tables are usually produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    Full,
    Round2,
}

impl Precision {
    /// Applies the mode to one intermediate value.
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Precision::Full => x,
            Precision::Round2 => round_half_up(x, 2),
        }
    }

    /// Decimals used when rendering numbers for humans.
    pub fn display_decimals(self) -> usize {
        match self {
            Precision::Full => 6,
            Precision::Round2 => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Full => "full",
            Precision::Round2 => "round2",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Precision::Full),
            "round2" => Ok(Precision::Round2),
            other => Err(format!("unknown precision mode `{other}`")),
        }
    }
}

/// Rounds half away from zero at `decimals` places, reading the value as the
/// decimal it was meant to be.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(decimals as i32);
    let scaled = x.abs() * scale;
    let rounded = (scaled + 0.5 + DECIMAL_SLACK).floor();
    x.signum() * rounded / scale
}

/// Renders `x` with exactly `decimals` fractional digits using
/// [`round_half_up`]. Negative zero is printed as zero.
pub fn format_fixed(x: f64, decimals: usize) -> String {
    let r = round_half_up(x, decimals as u32);
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.decimals$}")
}
