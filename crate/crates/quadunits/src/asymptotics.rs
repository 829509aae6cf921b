//! Predicted counting functions for sums of units and comparison reports
//! against the exact counts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::quadfield::FieldDescriptor;
use crate::sums_of_units::{self, Mode};
use crate::trace_sums::Predicted;
use crate::unit_equation::BoundConfig;

/// Leading-term data for one `(k, variant)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticSpec {
    pub k: usize,
    pub rho: usize,
    pub variant: Mode,
    pub leading_constant: BigRational,
}

impl AsymptoticSpec {
    pub fn new(k: usize, variant: Mode) -> Self {
        AsymptoticSpec { k, rho: k / 2, variant, leading_constant: leading_constant(k, variant) }
    }
}

/// One comparison of exact count against prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub x: i64,
    pub exact: u64,
    pub predicted: f64,
    pub ratio: f64,
    pub certificate_stable: bool,
}

/// The constant in front of `(2 log X / log eta)^rho`: with `rho = floor(k/2)`,
/// it is `1/rho!` for even `k`, and for odd `k` either `3/rho!` (at most) or
/// `2/rho!` (exactly).
pub fn leading_constant(k: usize, variant: Mode) -> BigRational {
    assert!(k >= 1, "need k >= 1");
    let rho = k / 2;
    let mut fact = BigInt::one();
    for i in 2..=rho {
        fact *= BigInt::from(i as i64);
    }
    let numer = if k.is_multiple_of(2) {
        BigInt::one()
    } else {
        match variant {
            Mode::AtMost => BigInt::from(3),
            Mode::Exactly => BigInt::from(2),
        }
    };
    BigRational::new(numer, fact)
}

/// Leading term `c_k (2 log X / log eta)^rho`.
pub fn predict_count(field: &FieldDescriptor, k: usize, x: i64, variant: Mode) -> Predicted {
    assert!(x >= 2, "need X >= 2");
    let rho = k / 2;
    let c = leading_constant(k, variant);
    let c_f = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
    let log_eta = field.log_eta();
    let le = log_eta.to_f64();
    let base = 2.0 * (x as f64).ln() / le;
    let value = c_f * base.powi(rho as i32);
    let rel = log_eta.error_bound() / le + 1e-13;
    Predicted { value, error_bound: value * rho as f64 * rel }
}

/// One row per grid point: exact count, prediction and their ratio.
pub fn comparison_report(
    field: &FieldDescriptor,
    k: usize,
    grid: &[i64],
    variant: Mode,
    cfg: &BoundConfig,
) -> Vec<ComparisonRow> {
    debug_assert!(grid.windows(2).all(|w| w[0] < w[1]), "grid must ascend");
    grid.iter()
        .map(|&x| {
            assert!(x >= 2, "grid entries must be >= 2");
            let (exact, cert) = sums_of_units::count(field, k, x, variant, cfg);
            let predicted = predict_count(field, k, x, variant).value;
            ComparisonRow {
                x,
                exact,
                predicted,
                ratio: exact as f64 / predicted,
                certificate_stable: cert.stable,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    #[test]
    fn leading_constant_table() {
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(leading_constant(4, Mode::AtMost), half);
        assert_eq!(leading_constant(3, Mode::AtMost), BigRational::from(BigInt::from(3)));
        assert_eq!(leading_constant(5, Mode::Exactly), BigRational::one());
        assert_eq!(leading_constant(1, Mode::Exactly), BigRational::from(BigInt::from(2)));
        assert_eq!(leading_constant(2, Mode::Exactly), BigRational::one());
    }

    #[test]
    fn predict_examples() {
        let f = make_field(2).unwrap();
        let p = predict_count(&f, 2, 1_000_000, Mode::Exactly);
        assert!((p.value - 31.3497).abs() < 1e-3);

        let p4 = predict_count(&f, 4, 10_000, Mode::Exactly);
        assert!((p4.value - 218.4).abs() < 0.2);
    }

    #[test]
    fn even_k_modes_agree_and_odd_k_ratio_is_three_halves() {
        let f = make_field(5).unwrap();
        for x in [10i64, 1000] {
            let even_exact = predict_count(&f, 4, x, Mode::Exactly).value;
            let even_atmost = predict_count(&f, 4, x, Mode::AtMost).value;
            assert_eq!(even_exact, even_atmost);

            let odd_exact = predict_count(&f, 3, x, Mode::Exactly).value;
            let odd_atmost = predict_count(&f, 3, x, Mode::AtMost).value;
            assert!((odd_atmost / odd_exact - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn report_rows_and_empty_grid() {
        let f = make_field(2).unwrap();
        let cfg = BoundConfig::default();
        assert!(comparison_report(&f, 2, &[], Mode::Exactly, &cfg).is_empty());

        let rows = comparison_report(&f, 2, &[100, 10_000], Mode::Exactly, &cfg);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].exact, 11);
        assert_eq!(rows[1].exact, 21);
        for r in &rows {
            assert!(r.certificate_stable);
            assert!((r.ratio - r.exact as f64 / r.predicted).abs() < 1e-15);
        }
    }

    #[test]
    fn ratio_deviation_admits_inverse_log_constant() {
        let f = make_field(2).unwrap();
        let cfg = BoundConfig::default();
        let rows =
            comparison_report(&f, 2, &[100, 10_000, 1_000_000], Mode::Exactly, &cfg);
        let k_const = rows
            .iter()
            .map(|r| (r.ratio - 1.0).abs() * (r.x as f64).ln())
            .fold(0.0, f64::max);
        assert!(k_const <= 2.0, "K = {}", k_const);
    }

    #[test]
    fn asymptotic_spec_fields() {
        let s = AsymptoticSpec::new(5, Mode::AtMost);
        assert_eq!(s.rho, 2);
        assert_eq!(
            s.leading_constant,
            BigRational::new(BigInt::from(3), BigInt::from(2))
        );
    }
}
