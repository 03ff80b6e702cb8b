//! The value-weighted ratio decomposition shared by every statistic level.
//!
//! Each level observes pairs `(numerator, base)` whose ratio is the random
//! variable of interest:
//!
//! | level                | numerator        | base               | ratio          |
//! |----------------------|------------------|--------------------|----------------|
//! | price                | trade value C    | volume U           | price p        |
//! | anticipated return   | current value C  | past value C_o     | p(t)/p(t−τ)    |
//! | single sale          | leg value        | leg original value | leg return     |
//! | investor-day         | C(tᵢ;1)          | C_o(tᵢ;1)          | sale mean g    |
//! | cross-investor       | C(t;1\|1,q)      | C_o(t;1\|1,q)      | investor G     |
//!
//! The market-based mean is `Σ numerator / Σ base`. The second moment and the
//! volatility are evaluated from frequency moments of numerators and bases:
//!
//! ```text
//! second = [E[C²] + 2h²Φ² − 2h·cov(C, B)] / E[B²]
//! vol    = [Ω_C²  +  h²Φ² − 2h·cov(C, B)] / E[B²]
//! ```
//!
//! [`direct_form`] evaluates the same volatility as `Σ (rᵢ − h)² Bᵢ² / Σ Bⱼ²`
//! straight from the ratios; it is the independent route used by oracle mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{self, VARIANCE_NOISE_FLOOR};
use crate::sum;
use twofloat::TwoFloat;

/// Relative tolerance between the decomposed and direct volatility.
pub const ORACLE_REL_TOLERANCE: f64 = 1e-9;

/// Rounding-noise multiplier applied to the magnitude of the decomposition terms.
const NOISE_ULPS: f64 = 64.0;

/// Ulps of error allowed on each deviation in the direct form.
const DEVIATION_ULPS: f64 = 4.0;

/// Normalized m-th powers of `bases`: `bᵢᵐ / Σ bⱼᵐ`.
pub fn normalized_weights(bases: &[f64], m: u32) -> Result<Vec<f64>> {
    if bases.is_empty() {
        return Err(Error::domain("empty series"));
    }
    let exp = i32::try_from(m).map_err(|_| Error::domain("weight order too large"))?;
    let powered: Vec<f64> = bases.iter().map(|b| b.powi(exp)).collect();
    let total = sum::sum(powered.iter().copied());
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::domain(format!("weight denominator is {total}")));
    }
    Ok(powered.into_iter().map(|p| p / total).collect())
}

/// Frequency moments of the numerators and bases together with the
/// decomposed mean, second moment and volatility of their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioDecomposition {
    pub count: usize,
    pub mean: f64,
    pub second_moment: f64,
    /// Decomposed volatility before the noise-floor clamp.
    pub raw_volatility: f64,
    pub volatility: f64,
    pub numerator_mean: f64,
    pub numerator_second: f64,
    pub numerator_variance: f64,
    pub base_mean: f64,
    pub base_second: f64,
    pub base_variance: f64,
    pub covariance: f64,
    /// Bound on the rounding error of the decomposed volatility.
    pub noise_tolerance: f64,
}

type Dd = TwoFloat;

fn dd_total(xs: &[f64]) -> Dd {
    xs.iter().fold(Dd::from(0.0), |acc, &x| acc + x)
}

fn dd_sum_squares(xs: &[f64]) -> Dd {
    xs.iter()
        .fold(Dd::from(0.0), |acc, &x| acc + Dd::new_mul(x, x))
}

pub fn decompose(numerators: &[f64], bases: &[f64]) -> Result<RatioDecomposition> {
    if numerators.len() != bases.len() {
        return Err(Error::domain(format!(
            "length mismatch: {} numerators vs {} bases",
            numerators.len(),
            bases.len()
        )));
    }
    if numerators.is_empty() {
        return Err(Error::domain("empty series"));
    }
    if let Some(x) = numerators.iter().chain(bases).find(|x| !x.is_finite()) {
        return Err(Error::domain(format!("non-finite value {x}")));
    }
    let n = numerators.len() as f64;
    // Terms are accumulated in double-double: the volatility is a small
    // difference of large terms whenever the ratios are nearly equal.
    let numerator_total = dd_total(numerators);
    let base_total = dd_total(bases);
    if base_total.hi().partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::domain(format!(
            "total base value is {}",
            base_total.hi()
        )));
    }
    let base_second = dd_sum_squares(bases) / n;
    if !(base_second.hi() > 0.0 && base_second.hi().is_finite()) {
        return Err(Error::domain("second moment of base values is zero"));
    }
    let numerator_second = dd_sum_squares(numerators) / n;

    let numerator_mean = numerator_total / n;
    let base_mean = base_total / n;
    let (mut vcc, mut vbb, mut vcb) = (Dd::from(0.0), Dd::from(0.0), Dd::from(0.0));
    for (&c, &b) in numerators.iter().zip(bases) {
        let dc = Dd::from(c) - numerator_mean;
        let db = Dd::from(b) - base_mean;
        vcc += dc * dc;
        vbb += db * db;
        vcb += dc * db;
    }
    let numerator_variance = vcc / n;
    let base_variance = vbb / n;
    let covariance = vcb / n;

    let h = numerator_total / base_total;
    let h2 = h * h;
    let cross = h * covariance * 2.0;
    let second_moment = ((numerator_second + h2 * base_variance * 2.0 - cross) / base_second).hi();
    let raw_volatility = ((numerator_variance + h2 * base_variance - cross) / base_second).hi();

    let term_scale = (numerator_variance.hi() + h2.hi() * base_variance.hi() + cross.hi().abs())
        / base_second.hi();
    let noise_tolerance = NOISE_ULPS * f64::EPSILON * f64::EPSILON * term_scale;
    let volatility = moments::clamp_variance(raw_volatility, VARIANCE_NOISE_FLOOR)?;

    Ok(RatioDecomposition {
        count: numerators.len(),
        mean: h.hi(),
        second_moment,
        raw_volatility,
        volatility,
        numerator_mean: numerator_mean.hi(),
        numerator_second: numerator_second.hi(),
        numerator_variance: numerator_variance.hi(),
        base_mean: base_mean.hi(),
        base_second: base_second.hi(),
        base_variance: base_variance.hi(),
        covariance: covariance.hi(),
        noise_tolerance,
    })
}

/// Mean and volatility evaluated directly as weighted sums over the ratios:
/// mean with weights `bᵢ/Σb`, volatility with weights `bᵢ²/Σb²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectForm {
    pub mean: f64,
    pub volatility: f64,
    /// First-order bound on the rounding error of `volatility`, including the
    /// one-ulp mismatch between a ratio and its numerator over its base.
    pub rounding_bound: f64,
}

pub fn direct_form(ratios: &[f64], bases: &[f64]) -> Result<DirectForm> {
    if ratios.len() != bases.len() {
        return Err(Error::domain("length mismatch between ratios and bases"));
    }
    let w1 = normalized_weights(bases, 1)?;
    let w2 = normalized_weights(bases, 2)?;
    let mean = sum::sum(ratios.iter().zip(&w1).map(|(r, w)| r * w));
    let volatility = sum::sum(ratios.iter().zip(&w2).map(|(r, w)| (r - mean).powi(2) * w));
    // each deviation rᵢ − mean is off by at most a few ulps of |rᵢ| + |mean|
    let spread = sum::sum(
        ratios
            .iter()
            .zip(&w2)
            .map(|(r, w)| (r.abs() + mean.abs()).powi(2) * w),
    )
    .sqrt();
    let e = DEVIATION_ULPS * f64::EPSILON;
    let rounding_bound =
        2.0 * e * volatility.sqrt() * spread + (e * spread).powi(2) + e * volatility;
    Ok(DirectForm {
        mean,
        volatility,
        rounding_bound,
    })
}

/// Disagreement between a decomposed volatility and its direct evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleDelta {
    pub direct: f64,
    pub abs: f64,
    pub rel: f64,
    pub passed: bool,
}

impl OracleDelta {
    /// Compare `decomposed` against `direct`. Passes when the relative delta is
    /// within [`ORACLE_REL_TOLERANCE`], or when the absolute delta is inside
    /// the combined rounding bounds of the two routes (which only matters for
    /// volatilities many orders of magnitude below the squared ratios).
    pub fn compare(decomposed: &RatioDecomposition, direct: &DirectForm) -> Self {
        let abs = (decomposed.volatility - direct.volatility).abs();
        let rel = relative_delta(decomposed.volatility, direct.volatility);
        let bound = decomposed.noise_tolerance + direct.rounding_bound;
        OracleDelta {
            direct: direct.volatility,
            abs,
            rel,
            passed: rel <= ORACLE_REL_TOLERANCE || abs <= bound,
        }
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both are zero.
pub fn relative_delta(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Decompose and, in debug builds, check against the direct form.
pub(crate) fn decompose_checked(
    ratios: &[f64],
    numerators: &[f64],
    bases: &[f64],
) -> Result<RatioDecomposition> {
    if cfg!(debug_assertions) {
        dual_route(ratios, numerators, bases).map(|(d, _)| d)
    } else {
        decompose(numerators, bases)
    }
}

/// Decompose and evaluate the direct form alongside.
pub fn dual_route(
    ratios: &[f64],
    numerators: &[f64],
    bases: &[f64],
) -> Result<(RatioDecomposition, OracleDelta)> {
    let d = decompose(numerators, bases)?;
    let direct = direct_form(ratios, bases)?;
    let delta = OracleDelta::compare(&d, &direct);
    debug_assert!(
        delta.passed,
        "decomposed volatility {} disagrees with direct {}",
        d.volatility, direct.volatility
    );
    Ok((d, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_examples() {
        assert_eq!(
            normalized_weights(&[1.0, 3.0], 1).unwrap(),
            vec![0.25, 0.75]
        );
        assert_eq!(normalized_weights(&[1.0, 3.0], 2).unwrap(), vec![0.1, 0.9]);
        assert!(normalized_weights(&[], 1).is_err());
        assert!(normalized_weights(&[0.0, 0.0], 1).is_err());
    }

    #[test]
    fn price_example() {
        // p = [10, 20], U = [1, 3]
        let d = decompose(&[10.0, 60.0], &[1.0, 3.0]).unwrap();
        assert!((d.mean - 17.5).abs() < 1e-12);
        assert!((d.volatility - 11.25).abs() < 1e-9);
        assert!((d.second_moment - 317.5).abs() < 1e-9);
        let direct = direct_form(&[10.0, 20.0], &[1.0, 3.0]).unwrap();
        assert!(OracleDelta::compare(&d, &direct).passed);
    }

    #[test]
    fn single_pair_has_zero_volatility() {
        let d = decompose(&[33.0], &[30.0]).unwrap();
        assert_eq!(d.raw_volatility, 0.0);
        assert!((d.mean - 1.1).abs() < 1e-15);
        assert!((d.second_moment - 1.21).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decompose(&[], &[]).is_err());
        assert!(decompose(&[1.0], &[1.0, 2.0]).is_err());
        assert!(decompose(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn relative_delta_conventions() {
        assert_eq!(relative_delta(0.0, 0.0), 0.0);
        assert_eq!(relative_delta(1.0, 0.0), 1.0);
        assert!((relative_delta(2.0, 1.0) - 0.5).abs() < 1e-15);
    }
}
