//! The convolution engine against brute-force enumeration.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use uniqmax_core::enumeration::{self, outcome_count};
use uniqmax_core::exact_dist::{expected_wn_exact, score_pmf, Mode};
use uniqmax_core::PayoffModel;

const CAP: u64 = 1_000_000;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn models() -> Vec<(&'static str, PayoffModel)> {
    vec![
        ("M1", PayoffModel::classic()),
        ("M2(1/4)", PayoffModel::chess(q(1, 4)).unwrap()),
        ("M2(1/2)", PayoffModel::chess(q(1, 2)).unwrap()),
        ("M3", PayoffModel::uniform(3).unwrap()),
    ]
}

/// Every (model, n) pair with at most `CAP` outcomes.
fn instances() -> Vec<(&'static str, PayoffModel, usize)> {
    let mut out = Vec::new();
    for (name, m) in models() {
        let mut n = 2;
        while outcome_count(m.k(), n).is_some_and(|c| c <= CAP) {
            out.push((name, m.clone(), n));
            n += 1;
        }
    }
    out
}

#[test]
fn instance_list_covers_expected_sizes() {
    let max_n = |label: &str| {
        instances()
            .iter()
            .filter(|(l, _, _)| *l == label)
            .map(|(_, _, n)| *n)
            .max()
    };
    assert_eq!(max_n("M1"), Some(6));
    assert_eq!(max_n("M2(1/4)"), Some(5));
    assert_eq!(max_n("M2(1/2)"), Some(5));
    assert_eq!(max_n("M3"), Some(4));
}

#[test]
fn score_pmf_equals_enumerated_marginal() {
    for (name, m, n) in instances() {
        let conv = score_pmf(&m, n - 1, Mode::Exact)
            .unwrap()
            .to_rationals()
            .unwrap();
        for player in [0, n - 1] {
            let brute = enumeration::marginal_pmf(&m, n, player, CAP).unwrap();
            assert_eq!(conv, brute, "{name} n={n} player={player}");
        }
    }
}

#[test]
fn expected_wn_equals_enumerated_mean() {
    for (name, m, n) in instances() {
        let y_max = f64::from(m.k()) * (n - 1) as f64;
        for y in [y_max / 2.0 - 0.5, 0.75 * y_max, y_max - 1.5] {
            let conv = expected_wn_exact(&m, n, y, Mode::Exact).unwrap();
            let dist = enumeration::wn_distribution_exact(&m, n, y, CAP).unwrap();
            assert_eq!(conv.as_exact().unwrap(), &dist.mean(), "{name} n={n} y>{y}");
        }
    }
}

#[test]
fn negative_dependence_holds_exactly() {
    for (name, m, n) in instances() {
        let report = enumeration::nd_inequality_check(&m, n, CAP).unwrap();
        assert!(report.holds(), "{name} n={n}: max diff {}", report.max_diff);
        assert!(report.max_diff <= BigRational::zero());
    }
}

#[test]
fn census_probabilities_sum_to_one() {
    for (name, m, n) in instances() {
        let table = enumeration::score_census(&m, n, CAP).unwrap();
        assert_eq!(table.total_probability(), q(1, 1), "{name} n={n}");
        assert_eq!(
            table.unique_max_probability(),
            enumeration::exact_unique_max(&m, n, CAP).unwrap().r_n,
            "{name} n={n}"
        );
    }
}

#[test]
fn unique_max_fixtures() {
    let m = PayoffModel::classic();
    let expected = [
        (2, q(1, 1)),
        (3, q(3, 4)),
        (4, q(1, 2)),
        (5, q(75, 128)),
        (6, q(321, 512)),
    ];
    for (n, r) in expected {
        assert_eq!(
            enumeration::exact_unique_max(&m, n, CAP).unwrap().r_n,
            r,
            "n={n}"
        );
    }
}
