//! ERB-number scale (Glasberg & Moore).

use crate::error::{GesiError, Result};

/// ERB-number of `freq_hz`: 21.4 log10(0.00437 f + 1).
pub fn erb_number(freq_hz: f64) -> Result<f64> {
    if !(freq_hz > 0.0) || !freq_hz.is_finite() {
        return Err(GesiError::invalid(format!("frequency must be positive, got {freq_hz}")));
    }
    Ok(21.4 * (0.00437 * freq_hz + 1.0).log10())
}

/// Inverse of [`erb_number`].
pub fn erb_number_to_hz(erb: f64) -> f64 {
    (10f64.powf(erb / 21.4) - 1.0) / 0.00437
}

/// Equivalent rectangular bandwidth in Hz at `freq_hz`.
pub fn erb_bandwidth(freq_hz: f64) -> f64 {
    24.7 * (0.00437 * freq_hz + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_value_at_1khz() {
        // Independent evaluation: log10(5.37) = 0.729974...
        let expected = 21.4 * 5.37f64.ln() / std::f64::consts::LN_10;
        assert!((erb_number(1000.0).unwrap() - expected).abs() < 1e-12);
        assert!((erb_number(1000.0).unwrap() - 15.621).abs() < 1e-3);
    }

    #[test]
    fn inverse_round_trip() {
        let f = erb_number_to_hz(erb_number(440.0).unwrap());
        assert!((f - 440.0).abs() / 440.0 < 1e-6);
    }

    #[test]
    fn strictly_increasing() {
        assert!(erb_number(2000.0).unwrap() > erb_number(1000.0).unwrap());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(erb_number(0.0).is_err());
        assert!(erb_number(-5.0).is_err());
    }

    #[test]
    fn bandwidth_at_1khz() {
        assert!((erb_bandwidth(1000.0) - 132.639).abs() < 1e-3);
    }
}
