use crate::error::{Error, Result};

/// Relative 1-sigma uncertainty of a Poisson count, `1/sqrt(n)`.
pub fn poisson_rel_uncertainty(n_tot: u64) -> Result<f64> {
    if n_tot == 0 {
        return Err(Error::UndefinedUncertainty);
    }
    Ok(1.0 / (n_tot as f64).sqrt())
}

/// Quadrature sum of independent relative uncertainties.
pub fn combine_rel_uncertainties(stat: f64, geom: f64) -> f64 {
    debug_assert!(stat >= 0.0 && geom >= 0.0);
    stat.hypot(geom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_rel_uncertainty(10_000).unwrap(), 0.01);
        assert_eq!(poisson_rel_uncertainty(1).unwrap(), 1.0);
        // 1.46e-6 * 4096 * 432000 = 2583.4
        let n = (1.46e-6_f64 * 4096.0 * 432_000.0).round() as u64;
        assert_eq!(n, 2583);
        assert!((poisson_rel_uncertainty(n).unwrap() - 0.019_676).abs() < 1e-6);
        assert!(matches!(poisson_rel_uncertainty(0), Err(Error::UndefinedUncertainty)));
    }

    #[test]
    fn quadrature_examples() {
        assert_eq!(combine_rel_uncertainties(0.02, 0.0), 0.02);
        assert!((combine_rel_uncertainties(0.03, 0.04) - 0.05).abs() < 1e-15);
        assert!((combine_rel_uncertainties(0.020, 0.03) - 0.036_056).abs() < 1e-6);
    }
}
