//! Independent reference computations for the statistical tests.
//!
//! Nothing here calls into the library's statistics code.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Doubled midrank of each value: `2 * (#less) + #equal + 1`.
fn doubled_midranks(values: &[f64]) -> Vec<i64> {
    values
        .iter()
        .map(|v| {
            let less = values.iter().filter(|w| *w < v).count() as i64;
            let equal = values.iter().filter(|w| *w == v).count() as i64;
            2 * less + equal + 1
        })
        .collect()
}

/// Two-sided exact signed-rank p by walking all 2^n sign vectors.
///
/// A vector counts when its `W+` is at least as far from the null centre as the
/// observed one. Zero differences are dropped first.
pub fn signed_rank_enumeration(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return 1.0;
    }
    let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = doubled_midranks(&mags);
    let centre2: i64 = ranks.iter().sum(); // 2 * (doubled total / 2)
    let observed: i64 = d
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();
    let obs_dev = (2 * observed - centre2).abs();
    let mut count: u64 = 0;
    for mask in 0u64..(1u64 << n) {
        let w: i64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if (2 * w - centre2).abs() >= obs_dev {
            count += 1;
        }
    }
    count as f64 / (1u64 << n) as f64
}

/// Two-sided exact rank-sum p by enumerating every assignment of the pooled
/// values to a sample of size |x|. Tie-free input only.
pub fn rank_sum_enumeration(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    let nx = x.len();
    let ny = y.len();
    // 2U = 2 * #{(i, j): x_i > y_j}; centre of 2U is nx * ny
    let u2 = |xs: &[usize]| -> i64 {
        let mut u = 0i64;
        for i in 0..n {
            if !xs.contains(&i) {
                continue;
            }
            for j in 0..n {
                if xs.contains(&j) {
                    continue;
                }
                if pooled[i] > pooled[j] {
                    u += 2;
                }
            }
        }
        u
    };
    let observed: Vec<usize> = (0..nx).collect();
    let centre = (nx * ny) as i64;
    let obs_dev = (u2(&observed) - centre).abs();
    let mut total: u64 = 0;
    let mut count: u64 = 0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != nx {
            continue;
        }
        let xs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        total += 1;
        if (u2(&xs) - centre).abs() >= obs_dev {
            count += 1;
        }
    }
    count as f64 / total as f64
}

fn big_choose(n: u64, k: u64) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// Two-sided binomial(n, 1/2) p with exact integer arithmetic: total mass of
/// outcomes no more likely than `k`.
pub fn binomial_direct_sum(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let coeffs: Vec<BigUint> = (0..=n).map(|i| big_choose(n, i)).collect();
    let observed = &coeffs[k as usize];
    let mut mass = BigUint::zero();
    for c in &coeffs {
        if c <= observed {
            mass += c;
        }
    }
    let ratio = BigRational::new(mass.into(), (BigUint::one() << n as usize).into());
    ratio.to_f64().unwrap().min(1.0)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(order);
    for i in 1..=order {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(10);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let s: f64 = rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum();
        total += 0.5 * h * s;
    }
    total
}

/// Student t CDF by quadrature.
///
/// With `x = sqrt(df) tan(theta)` the t density becomes proportional to
/// `cos(theta)^(df - 1)` on `(-pi/2, pi/2)`, so both the normaliser and the
/// partial integral are finite integrals of a smooth function.
pub fn student_t_cdf_quadrature(t: f64, df: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |theta: f64| {
        let c = theta.cos();
        if c <= 0.0 {
            0.0
        } else {
            ((df - 1.0) * c.ln()).exp()
        }
    };
    let upper = (t / df.sqrt()).atan();
    let panels = 4000;
    // integrate the smaller side for accuracy
    let whole = 2.0 * integrate(f, 0.0, half_pi, panels);
    if upper <= 0.0 {
        integrate(f, -half_pi, upper, panels) / whole
    } else {
        1.0 - integrate(f, upper, half_pi, panels) / whole
    }
}

/// [`binomial_direct_sum`] for every `k` in `0..=n` at once.
///
/// Coefficients are sorted so each mass is a prefix sum over integers. The
/// final division is by a power of two, so the only rounding is the one
/// conversion of the integer mass to `f64`.
pub fn binomial_direct_all(n: u64) -> Vec<f64> {
    let mut coeffs = vec![BigUint::one()];
    for i in 0..n {
        let next = coeffs[i as usize].clone() * BigUint::from(n - i) / BigUint::from(i + 1);
        coeffs.push(next);
    }
    let mut sorted = coeffs.clone();
    sorted.sort();
    let mut prefix = Vec::with_capacity(sorted.len());
    let mut acc = BigUint::zero();
    for c in &sorted {
        acc += c;
        prefix.push(acc.clone());
    }
    let scale = 2f64.powi(-(n as i32));
    coeffs
        .iter()
        .map(|c| {
            // last index whose coefficient is <= c
            let idx = sorted.partition_point(|s| s <= c) - 1;
            (prefix[idx].to_f64().unwrap() * scale).min(1.0)
        })
        .collect()
}
