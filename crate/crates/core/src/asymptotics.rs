//! Gaussian and large-`n` approximations, and their comparison against the
//! exact engine.
//!
//! Every formula here is evaluated in binary64. The exact side of each
//! comparison comes from [`crate::exact_dist`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exact_dist::{score_pmf, threshold, LatticePmf, Mode, Quantity, Threshold};
use crate::model::PayoffModel;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// `Phi(x)` through `erfc`, accurate in the far left tail as well.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// `1 - Phi(x)` without cancellation for large `x`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Inverse of `Phi` on `(0, 1)`: Acklam's rational approximation followed by
/// one Halley step against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
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
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = std_normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * PI) * libm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

/// Large-`n` form of `P(s_1(n) > t_n)`: `(log(n-1))^(eps/2) / (sqrt(4 pi) (n-1))`.
pub fn tail_asymptotic(n: usize, epsilon: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(format!(
            "tail asymptotic needs n >= 3, got n = {n}"
        )));
    }
    let m = (n - 1) as f64;
    Ok(libm::pow(libm::log(m), epsilon / 2.0) / (libm::sqrt(4.0 * PI) * m))
}

/// `x_n / (n-1)^(1/6)`; the normal tail approximation for the threshold
/// needs this to vanish.
pub fn moderate_deviation_ratio(t: &Threshold) -> f64 {
    t.x_n / libm::pow((t.n - 1) as f64, 1.0 / 6.0)
}

/// Gaussian local approximation to `P(score = y/k)` over `n_games` games.
/// The `1/k` factor is the lattice spacing in score units.
pub fn llt_gaussian(model: &PayoffModel, n_games: usize, y: i64) -> f64 {
    let moments = model.moments();
    let k = f64::from(model.k());
    let m = n_games as f64;
    let spread = moments.sigma * libm::sqrt(m);
    let z = (y as f64 / k - m * moments.mu_f64()) / spread;
    std_normal_pdf(z) / (k * spread)
}

/// Uniform local-limit error of one PMF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LltError {
    pub n_games: usize,
    /// `sup_y |sigma sqrt(m) k P(y) - phi(z_y)|`.
    pub sup_error: f64,
    /// `sup_error * sqrt(m)`; stays bounded when the error is `O(1/sqrt(m))`.
    pub scaled: f64,
    pub argmax_y: usize,
}

pub fn llt_sup_error(model: &PayoffModel, pmf: &LatticePmf) -> Result<LltError> {
    let m = pmf.n_games();
    if m == 0 {
        return Err(Error::domain(
            "local limit comparison needs at least one game",
        ));
    }
    let moments = model.moments();
    let k = f64::from(model.k());
    let spread = moments.sigma * libm::sqrt(m as f64);
    let centre = m as f64 * moments.mu_f64();
    let masses = pmf.to_f64_vec();
    let mut sup_error = 0.0;
    let mut argmax_y = 0;
    for (y, p) in masses.iter().enumerate() {
        let z = (y as f64 / k - centre) / spread;
        let err = libm::fabs(spread * k * p - std_normal_pdf(z));
        if err > sup_error {
            sup_error = err;
            argmax_y = y;
        }
    }
    Ok(LltError {
        n_games: m,
        sup_error,
        scaled: sup_error * libm::sqrt(m as f64),
        argmax_y,
    })
}

/// Lattice point `ceil(k * score)` for a score-unit value.
pub fn lattice_ceil(k: u32, score: f64) -> i64 {
    libm::ceil(f64::from(k) * score) as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim2Point {
    pub x: f64,
    pub y_x: i64,
    pub p_x: Quantity,
    pub y_x1: i64,
    pub p_x1: Quantity,
    /// `phi(x) / (k sigma sqrt(n-2))`, reported alongside, not compared.
    pub gaussian_x: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Claim2Report {
    pub n: usize,
    pub points: Vec<Claim2Point>,
}

impl Claim2Report {
    pub fn violations(&self) -> usize {
        self.points.iter().filter(|p| p.violation).count()
    }
}

fn quantity_lt(a: &Quantity, b: &Quantity) -> bool {
    match (a, b) {
        (Quantity::Exact(a), Quantity::Exact(b)) => a < b,
        _ => a.to_f64() < b.to_f64(),
    }
}

/// Checks `P_n(x) >= P_n(x+1)` where
/// `P_n(x) = P(s_u(n-1) = ceil((n-2) mu + x sqrt(n-2) sigma))` on the lattice.
pub fn claim2_check(
    model: &PayoffModel,
    n: usize,
    x_grid: &[f64],
    mode: Mode,
) -> Result<Claim2Report> {
    if n < 3 {
        return Err(Error::domain(format!(
            "claim 2 check needs n >= 3, got n = {n}"
        )));
    }
    let m = n - 2;
    let pmf = score_pmf(model, m, mode)?;
    let moments = model.moments();
    let spread = moments.sigma * libm::sqrt(m as f64);
    let centre = m as f64 * moments.mu_f64();
    let k = model.k();
    let points = x_grid
        .iter()
        .map(|&x| {
            let y_x = lattice_ceil(k, centre + x * spread);
            let y_x1 = lattice_ceil(k, centre + (x + 1.0) * spread);
            let p_x = pmf.mass(y_x);
            let p_x1 = pmf.mass(y_x1);
            let violation = quantity_lt(&p_x, &p_x1);
            Claim2Point {
                x,
                y_x,
                p_x,
                y_x1,
                p_x1,
                gaussian_x: std_normal_pdf(x) / (f64::from(k) * spread),
                violation,
            }
        })
        .collect();
    Ok(Claim2Report { n, points })
}

/// `(1/(sigma sqrt(n-2))) (log(n-2))^(eps/2) / (sqrt(2 pi) (n-2))`.
///
/// The formula carries no `1/k` lattice factor, so for `k > 1` the exact
/// point probability tends to `1/k` times this value.
pub fn claim3_asymptotic(model: &PayoffModel, n: usize, epsilon: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::domain(format!(
            "claim 3 asymptotic needs n >= 4, got n = {n}"
        )));
    }
    let m = (n - 2) as f64;
    let sigma = model.moments().sigma;
    Ok(libm::pow(libm::log(m), epsilon / 2.0) / (sigma * libm::sqrt(m) * libm::sqrt(2.0 * PI) * m))
}

/// Exact `P(s_1(n-1) = ceil(t_{n-1} - 1))`, with the ceiling on the lattice.
pub fn claim3_exact(model: &PayoffModel, n: usize, epsilon: f64, mode: Mode) -> Result<Quantity> {
    if n < 4 {
        return Err(Error::domain(format!("claim 3 needs n >= 4, got n = {n}")));
    }
    let t = threshold(model, n - 1, epsilon)?;
    let y = lattice_ceil(model.k(), t.t_n - 1.0);
    Ok(score_pmf(model, n - 2, mode)?.mass(y))
}

/// Asymptotic form of the `RHS_n` bound: the product of the claim 3 point
/// probability and the tail asymptotic, times `n(n-1)/2`.
pub fn rhs_asymptotic(model: &PayoffModel, n: usize, epsilon: f64) -> Result<f64> {
    let point = claim3_asymptotic(model, n, epsilon)?;
    let m = (n - 2) as f64;
    let tail = libm::pow(libm::log(m), epsilon / 2.0) / (libm::sqrt(4.0 * PI) * m);
    let pairs = (n as f64) * (n as f64 - 1.0) / 2.0;
    Ok(pairs * point * tail)
}

/// Exact-to-asymptotic ratios over a grid of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioDiagnostic {
    pub quantity: String,
    pub epsilon: f64,
    pub n_grid: Vec<usize>,
    pub exact_values: Vec<f64>,
    pub asymptotic_values: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl RatioDiagnostic {
    pub fn new(quantity: impl Into<String>, epsilon: f64) -> Self {
        RatioDiagnostic {
            quantity: quantity.into(),
            epsilon,
            n_grid: Vec::new(),
            exact_values: Vec::new(),
            asymptotic_values: Vec::new(),
            ratios: Vec::new(),
        }
    }

    pub fn push(&mut self, n: usize, exact: f64, asymptotic: f64) {
        self.n_grid.push(n);
        self.exact_values.push(exact);
        self.asymptotic_values.push(asymptotic);
        self.ratios.push(exact / asymptotic);
    }

    pub fn len(&self) -> usize {
        self.n_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_grid.is_empty()
    }
}

/// Which exact/asymptotic pair a diagnostic compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioQuantity {
    /// `P(s_1(n) > t_n)` against [`tail_asymptotic`].
    Tail,
    /// The claim 3 point probability against [`claim3_asymptotic`].
    Claim3,
    /// `RHS_n` against [`rhs_asymptotic`].
    Rhs,
}

impl RatioQuantity {
    pub fn name(self) -> &'static str {
        match self {
            RatioQuantity::Tail => "tail",
            RatioQuantity::Claim3 => "claim3",
            RatioQuantity::Rhs => "rhs",
        }
    }
}

/// One `(exact, asymptotic)` pair at a single `n`.
pub fn ratio_point(
    quantity: RatioQuantity,
    model: &PayoffModel,
    n: usize,
    epsilon: f64,
    mode: Mode,
) -> Result<(f64, f64)> {
    match quantity {
        RatioQuantity::Tail => {
            let t = threshold(model, n, epsilon)?;
            let exact = score_pmf(model, n - 1, mode)?
                .tail_prob(t.t_n_lattice)
                .to_f64();
            Ok((exact, tail_asymptotic(n, epsilon)?))
        }
        RatioQuantity::Claim3 => Ok((
            claim3_exact(model, n, epsilon, mode)?.to_f64(),
            claim3_asymptotic(model, n, epsilon)?,
        )),
        RatioQuantity::Rhs => Ok((
            crate::exact_dist::expected_wn_upper(model, n, epsilon, mode)?.to_f64(),
            rhs_asymptotic(model, n, epsilon)?,
        )),
    }
}

pub fn ratio_diagnostic(
    quantity: RatioQuantity,
    model: &PayoffModel,
    n_grid: &[usize],
    epsilon: f64,
    mode: Mode,
) -> Result<RatioDiagnostic> {
    let mut diag = RatioDiagnostic::new(quantity.name(), epsilon);
    for &n in n_grid {
        let (exact, asymptotic) = ratio_point(quantity, model, n, epsilon, mode)?;
        diag.push(n, exact, asymptotic);
    }
    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_rational::BigRational;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn normal_basics() {
        assert_eq!(std_normal_pdf(0.0), 0.3989422804014327);
        assert_eq!(std_normal_cdf(0.0), 0.5);
    }

    #[test]
    fn normal_cdf_against_high_precision_values() {
        // 40-digit reference values.
        let cases = [
            (-8.0, 6.220960574271784e-16),
            (-3.0, 0.0013498980316300946),
            (-1.5, 0.06680720126885807),
            (0.3, 0.6179114221889526),
            (2.0, 0.9772498680518208),
            (8.0, 0.9999999999999993),
        ];
        for (x, want) in cases {
            assert!(rel(std_normal_cdf(x), want) <= 1e-12, "x={x}");
        }
        assert!(rel(std_normal_sf(5.0), 2.866515718791939e-7) <= 1e-12);
    }

    #[test]
    fn cdf_reflection() {
        let mut x = -8.0;
        while x <= 8.0 {
            assert!(
                (std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14,
                "x={x}"
            );
            x += 0.01;
        }
    }

    #[test]
    fn mills_ratio_at_five() {
        let ratio = std_normal_sf(5.0) / (std_normal_pdf(5.0) / 5.0);
        assert!((ratio - 0.9640405235765788).abs() < 1e-12);
        assert!((ratio - 1.0).abs() < 0.05);
        let far = std_normal_sf(30.0) / (std_normal_pdf(30.0) / 30.0);
        assert!((far - 1.0).abs() < 0.002);
    }

    #[test]
    fn quantile_inverts_cdf() {
        assert!((std_normal_quantile(0.975) - 1.959963984540054).abs() < 1e-13);
        for p in [1e-10, 0.01, 0.3, 0.5, 0.8, 0.999] {
            assert!(
                rel(std_normal_cdf(std_normal_quantile(p)), p) < 1e-12,
                "p={p}"
            );
        }
        assert_eq!(std_normal_quantile(0.5), 0.0);
    }

    #[test]
    fn tail_asymptotic_values() {
        assert!(rel(tail_asymptotic(101, 1.0).unwrap(), 6.053658393399101e-3) < 1e-13);
        // eps -> 0 removes the log factor
        let v = tail_asymptotic(101, 1e-300).unwrap();
        assert!(rel(v, 1.0 / (libm::sqrt(4.0 * PI) * 100.0)) < 1e-12);
        assert!(tail_asymptotic(2, 1.0).is_err());
    }

    #[test]
    fn llt_small_case() {
        let m = PayoffModel::classic();
        let g = llt_gaussian(&m, 2, 1);
        assert!((g - 0.5641895835477563).abs() < 1e-12);
        let exact = score_pmf(&m, 2, Mode::Exact).unwrap().mass_f64(1);
        assert_eq!(exact, 0.5);
        assert!((g - exact - 0.0642).abs() < 1e-4);
        let chess = PayoffModel::chess(BigRational::new(1.into(), 3.into())).unwrap();
        for y in 0..=40 {
            assert!((llt_gaussian(&chess, 20, y) - llt_gaussian(&chess, 20, 40 - y)).abs() < 1e-15);
        }
    }

    #[test]
    fn claim2_beyond_support_is_not_a_violation() {
        let m = PayoffModel::classic();
        let r = claim2_check(&m, 10, &[50.0], Mode::Exact).unwrap();
        assert_eq!(r.points[0].p_x.to_f64(), 0.0);
        assert_eq!(r.points[0].p_x1.to_f64(), 0.0);
        assert_eq!(r.violations(), 0);
    }

    #[test]
    fn claim2_no_violations_at_two_hundred() {
        let grid = [0.5, 1.0, 1.5, 2.0];
        for m in [
            PayoffModel::classic(),
            PayoffModel::chess(BigRational::new(1.into(), 2.into())).unwrap(),
        ] {
            let r = claim2_check(&m, 200, &grid, Mode::Exact).unwrap();
            assert_eq!(r.violations(), 0, "{m}");
        }
    }

    #[test]
    fn claim3_algebra() {
        let m = PayoffModel::classic();
        let n = 1001;
        let v1 = claim3_asymptotic(&m, n, 1.0).unwrap();
        let v2 = claim3_asymptotic(&m, n, 2.0).unwrap();
        let l = libm::log((n - 2) as f64);
        assert!(rel(v2 / v1, libm::sqrt(l)) < 1e-12);
        let scaled = v1 * libm::pow((n - 2) as f64, 1.5);
        assert!(rel(scaled, libm::sqrt(l) / (0.5 * libm::sqrt(2.0 * PI))) < 1e-12);
        assert!(claim3_asymptotic(&m, 3, 1.0).is_err());
        let exact = claim3_exact(&m, n, 1.0, Mode::Float).unwrap().to_f64();
        assert!(exact > 0.0);
    }

    #[test]
    fn rhs_asymptotic_decreases() {
        let m = PayoffModel::classic();
        assert!(rhs_asymptotic(&m, 10_000, 1.0).unwrap() < rhs_asymptotic(&m, 100, 1.0).unwrap());
        let mut prev = f64::INFINITY;
        for n in (100..3000).step_by(37) {
            let v = rhs_asymptotic(&m, n, 1.0).unwrap();
            assert!(v < prev, "n={n}");
            prev = v;
        }
    }

    #[test]
    fn diagnostic_ratios_are_finite() {
        let m = PayoffModel::classic();
        let grid = vec![128usize, 256, 512];
        for q in [
            RatioQuantity::Tail,
            RatioQuantity::Claim3,
            RatioQuantity::Rhs,
        ] {
            let d = ratio_diagnostic(q, &m, &grid, 1.0, Mode::Float).unwrap();
            assert_eq!(d.len(), 3);
            assert!(
                d.ratios.iter().all(|r| r.is_finite() && *r > 0.0),
                "{:?}",
                d
            );
        }
    }
}
