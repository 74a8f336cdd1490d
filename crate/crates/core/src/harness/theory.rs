//! Ensemble size prescribed by the high-probability regret analysis.
//!
//! Documentation helper only; experiments use the tuned presets.

use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalParams {
    /// `⌈ln(4HK/δ) / ln(64/63)⌉`.
    pub m_theory: u64,
    pub note: String,
}

pub fn theoretical_params(
    delta: f64,
    horizon: usize,
    episodes: usize,
    dim: usize,
) -> Result<TheoreticalParams, HarnessError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(HarnessError::InvalidDelta(delta));
    }
    let ratio = (4.0 * horizon as f64 * episodes as f64 / delta).ln() / (64.0f64 / 63.0).ln();
    let m_theory = ratio.ceil().max(1.0) as u64;
    let note = format!(
        "M = {m_theory} ensures optimism with probability 1 - {delta} over H = {horizon}, \
         K = {episodes} (d = {dim}); the matching posterior scale nu depends on unspecified \
         absolute constants and is not computed"
    );
    Ok(TheoreticalParams { m_theory, note })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_value() {
        // ln(8e6) = 15.8950, ln(64/63) = 0.0157484 → 1009.3.
        assert_eq!(theoretical_params(0.05, 20, 5000, 10).unwrap().m_theory, 1010);
    }

    #[test]
    fn delta_bounds() {
        for bad in [0.0, 1.0, -0.5, 2.0, f64::NAN] {
            assert!(matches!(
                theoretical_params(bad, 20, 5000, 10),
                Err(HarnessError::InvalidDelta(_))
            ));
        }
    }

    #[test]
    fn decreasing_in_delta() {
        let tight = theoretical_params(0.01, 20, 5000, 10).unwrap().m_theory;
        let loose = theoretical_params(0.1, 20, 5000, 10).unwrap().m_theory;
        assert!(tight > loose);
    }
}
