//! Statistical tests checked against independent reference computations.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sotacheck::stats::special::{student_t_cdf, student_t_two_sided};
use sotacheck::stats::{
    binomial_sign_test, binomial_sign_test_with, bonferroni, paired_t_test, wilcoxon_rank_sum,
    wilcoxon_rank_sum_with, wilcoxon_signed_rank, wilcoxon_signed_rank_with, BinomialTwoSided,
    Exactness, Method, PairedSample,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_pairs(r: &mut ChaCha8Rng, n: usize, tied: bool) -> PairedSample {
    PairedSample::from_pairs((0..n).map(|_| {
        if tied {
            (f64::from(r.random_range(0..6)), f64::from(r.random_range(0..6)))
        } else {
            (r.random::<f64>(), r.random::<f64>())
        }
    }))
    .unwrap()
}

#[test]
fn signed_rank_exact_equals_enumeration() {
    let mut r = rng(11);
    for case in 0..300 {
        let n = r.random_range(1..=12);
        let pairs = random_pairs(&mut r, n, case % 2 == 0);
        let got = wilcoxon_signed_rank_with(&pairs, Exactness::Exact).unwrap();
        let want = common::signed_rank_enumeration(&pairs.differences());
        assert_eq!(got.p_value, want, "case {case}: {pairs:?}");
    }
}

#[test]
fn rank_sum_exact_equals_enumeration() {
    let mut r = rng(12);
    for case in 0..200 {
        let nx = r.random_range(1..=8);
        let ny = r.random_range(1..=(12 - nx));
        let x: Vec<f64> = (0..nx).map(|_| r.random()).collect();
        let y: Vec<f64> = (0..ny).map(|_| r.random::<f64>() + 0.2).collect();
        let got = wilcoxon_rank_sum_with(&x, &y, Exactness::Exact).unwrap();
        let want = common::rank_sum_enumeration(&x, &y);
        assert_eq!(got.p_value, want, "case {case}");
        assert_eq!(got.method, Method::Exact);
    }
}

#[test]
fn binomial_matches_exact_rational_sum() {
    let mut r = rng(13);
    let mut ns: Vec<u64> = (0..=60).collect();
    ns.extend([99, 100, 101, 500, 999, 1000]);
    for n in ns {
        let mut ks: Vec<u64> = vec![0, n / 2, n];
        ks.extend((0..4).map(|_| r.random_range(0..=n)));
        for k in ks {
            let got = binomial_sign_test(k, n).unwrap().p_value;
            let want = common::binomial_direct_sum(k, n);
            assert!((got - want).abs() <= 1e-12, "n={n} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn binomial_conventions_agree_for_a_fair_coin() {
    for n in 1..200u64 {
        for k in 0..=n {
            let a = binomial_sign_test_with(k, n, BinomialTwoSided::MinLike).unwrap();
            let b = binomial_sign_test_with(k, n, BinomialTwoSided::DoubleTail).unwrap();
            assert!((a.p_value - b.p_value).abs() < 1e-12, "n={n} k={k}");
        }
    }
}

#[test]
fn t_cdf_matches_quadrature() {
    for df in [1.0, 4.0, 30.0, 5000.0] {
        for t in [-40.0, -6.0, -2.5, -1.0, -0.1, 0.0, 0.3, 1.0, 1.96, 3.0, 8.0, 50.0] {
            let got = student_t_cdf(t, df);
            let want = common::student_t_cdf_quadrature(t, df);
            assert!((got - want).abs() <= 1e-8, "df={df} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn paired_t_known_value() {
    // differences 1..5: mean 3, sd sqrt(2.5), t = 3 / (sqrt(2.5) / sqrt(5))
    let pairs = PairedSample::from_pairs((1..=5).map(|d| (0.0, f64::from(d)))).unwrap();
    let r = paired_t_test(&pairs).unwrap();
    assert!((r.statistic - 4.242640687119285).abs() < 1e-12);
    assert!((r.p_value - 0.013235599564).abs() < 1e-6);
    assert!((r.p_greater - r.p_value / 2.0).abs() < 1e-15);
    assert!((student_t_two_sided(r.statistic, 4.0) - r.p_value).abs() < 1e-15);
}

#[test]
fn small_known_values() {
    let all_up = PairedSample::from_pairs((1..=5).map(|d| (0.0, f64::from(d)))).unwrap();
    assert_eq!(wilcoxon_signed_rank(&all_up).unwrap().p_value, 0.0625);
    assert_eq!(wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0]).unwrap().p_value, 1.0 / 3.0);
    assert_eq!(binomial_sign_test(10, 10).unwrap().p_value, 0.001953125);
}

#[test]
fn swapping_samples_mirrors_tails() {
    let mut r = rng(14);
    for case in 0..100 {
        let n = r.random_range(2..40);
        let pairs = random_pairs(&mut r, n, case % 3 == 0);
        let swapped = pairs.swapped();
        for (a, b) in [
            (wilcoxon_signed_rank(&pairs), wilcoxon_signed_rank(&swapped)),
            (paired_t_test(&pairs), paired_t_test(&swapped)),
            (
                wilcoxon_rank_sum(pairs.x(), pairs.y()),
                wilcoxon_rank_sum(pairs.y(), pairs.x()),
            ),
        ] {
            let (a, b) = (a.unwrap(), b.unwrap());
            assert!((a.p_value - b.p_value).abs() < 1e-12, "case {case}");
            assert!((a.p_greater - b.p_less).abs() < 1e-12, "case {case}");
            assert!((a.p_less - b.p_greater).abs() < 1e-12, "case {case}");
        }
    }
}

#[test]
fn positive_rescaling_leaves_p_unchanged() {
    let mut r = rng(15);
    for _ in 0..50 {
        let n = r.random_range(3..60);
        let pairs = random_pairs(&mut r, n, false);
        let c = 2f64.powi(r.random_range(-6..6));
        let scaled =
            PairedSample::new(pairs.x().iter().map(|v| v * c).collect(), pairs.y().iter().map(|v| v * c).collect())
                .unwrap();
        let t0 = paired_t_test(&pairs).unwrap();
        let t1 = paired_t_test(&scaled).unwrap();
        assert!((t0.p_value - t1.p_value).abs() < 1e-10);
        assert_eq!(
            wilcoxon_signed_rank(&pairs).unwrap().p_value,
            wilcoxon_signed_rank(&scaled).unwrap().p_value
        );
    }
}

#[test]
fn p_values_stay_in_unit_interval() {
    let mut r = rng(16);
    for case in 0..300 {
        let n = r.random_range(1..80);
        let pairs = random_pairs(&mut r, n, case % 2 == 1);
        let mut results = vec![
            wilcoxon_signed_rank(&pairs).unwrap(),
            wilcoxon_rank_sum(pairs.x(), pairs.y()).unwrap(),
        ];
        if n >= 2 {
            results.push(paired_t_test(&pairs).unwrap());
        }
        for t in results {
            for p in [t.p_value, t.p_greater, t.p_less] {
                assert!((0.0..=1.0).contains(&p), "{t:?}");
            }
        }
    }
}

#[test]
fn signed_rank_normal_tracks_exact_at_twenty() {
    let mut r = rng(17);
    for case in 0..100 {
        // heavy ties make the exact law lumpy; the bound is for distinct magnitudes
        let pairs = random_pairs(&mut r, 20, false);
        let exact = wilcoxon_signed_rank_with(&pairs, Exactness::Exact).unwrap();
        let normal = wilcoxon_signed_rank_with(&pairs, Exactness::Normal).unwrap();
        assert!((exact.p_value - normal.p_value).abs() <= 0.02, "case {case}");
    }
}

#[test]
fn rank_sum_normal_tracks_exact() {
    let mut r = rng(18);
    for _ in 0..100 {
        let x: Vec<f64> = (0..10).map(|_| r.random()).collect();
        let y: Vec<f64> = (0..10).map(|_| r.random()).collect();
        let exact = wilcoxon_rank_sum_with(&x, &y, Exactness::Exact).unwrap();
        let normal = wilcoxon_rank_sum_with(&x, &y, Exactness::Normal).unwrap();
        assert!((exact.p_value - normal.p_value).abs() <= 0.02);
    }
}

/// Kolmogorov-Smirnov distance between a sample and U(0, 1).
fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn rank_sum_p_roughly_uniform_under_null() {
    let mut r = rng(19);
    let ps: Vec<f64> = (0..2000)
        .map(|_| {
            let x: Vec<f64> = (0..40).map(|_| r.random()).collect();
            let y: Vec<f64> = (0..40).map(|_| r.random()).collect();
            wilcoxon_rank_sum(&x, &y).unwrap().p_less
        })
        .collect();
    let d = ks_uniform(ps);
    // 1% critical value is about 1.63 / sqrt(n)
    assert!(d < 1.63 / 2000f64.sqrt(), "KS distance {d}");
}

#[test]
fn bonferroni_caps_and_validates() {
    assert_eq!(bonferroni(&[0.01, 0.3, 1.0], 5).unwrap(), [0.05, 1.0, 1.0]);
    assert!(bonferroni(&[0.1], 0).is_err());
    assert!(bonferroni(&[f64::NAN], 2).is_err());
    assert!(bonferroni(&[1.5], 2).is_err());
}
