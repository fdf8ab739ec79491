//! Small numerical helpers shared across the crate: error function,
//! Gauss-Hermite rules, and the Kolmogorov-Smirnov tail.

/// Error function, Abramowitz & Stegun 7.1.26 rational approximation
/// (max absolute error < 1.5e-7).
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    1.0 - poly * (-x * x).exp()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Nodes and weights of the n-point Gauss-Hermite rule for
/// `int f(x) exp(-x^2) dx ~= sum w_i f(x_i)`.
///
/// Roots are bracketed by scanning sign changes of the orthonormal
/// Hermite polynomial and polished with Newton steps; weights come from
/// the Christoffel function `w_i = 1 / sum_k p_k(x_i)^2`, which stays in
/// range for any practical order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be >= 1");
    if n == 1 {
        return (vec![0.0], vec![std::f64::consts::PI.sqrt()]);
    }

    // Orthonormal recurrence p_{k+1} = x sqrt(2/(k+1)) p_k - sqrt(k/(k+1)) p_{k-1}.
    let eval = |x: f64| -> (f64, f64) {
        let mut pm = 0.0f64;
        let mut p = std::f64::consts::PI.powf(-0.25);
        for k in 0..n {
            let pn = x * (2.0 / (k as f64 + 1.0)).sqrt() * p
                - (k as f64 / (k as f64 + 1.0)).sqrt() * pm;
            pm = p;
            p = pn;
        }
        // p = p_n, pm = p_{n-1}; p_n' = sqrt(2n) p_{n-1}
        (p, (2.0 * n as f64).sqrt() * pm)
    };

    let limit = (2.0 * n as f64 + 1.0).sqrt() + 2.0;
    let steps = 80 * n;
    let dx = 2.0 * limit / steps as f64;
    let mut roots = Vec::with_capacity(n);
    let mut prev_x = -limit;
    let mut prev_v = eval(prev_x).0;
    for i in 1..=steps {
        let x = -limit + i as f64 * dx;
        let v = eval(x).0;
        if prev_v == 0.0 {
            roots.push(prev_x);
        } else if prev_v.signum() != v.signum() {
            // Newton from the midpoint.
            let mut r = 0.5 * (prev_x + x);
            for _ in 0..60 {
                let (f, fp) = eval(r);
                let step = f / fp;
                r -= step;
                if step.abs() < 1e-15 * (1.0 + r.abs()) {
                    break;
                }
            }
            roots.push(r);
        }
        prev_x = x;
        prev_v = v;
    }
    assert_eq!(roots.len(), n, "failed to bracket all Hermite roots");
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let weights = roots
        .iter()
        .map(|&r| {
            let mut pm = 0.0f64;
            let mut p = std::f64::consts::PI.powf(-0.25);
            let mut sum = p * p;
            for k in 0..n - 1 {
                let pn = r * (2.0 / (k as f64 + 1.0)).sqrt() * p
                    - (k as f64 / (k as f64 + 1.0)).sqrt() * pm;
                pm = p;
                p = pn;
                sum += p * p;
            }
            1.0 / sum
        })
        .collect();
    (roots, weights)
}

/// Two-sided Kolmogorov-Smirnov statistic of `sorted` against the CDF `f`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sorted: &[f64], f: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = f(x);
        let hi = (i as f64 + 1.0) / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic Kolmogorov-Smirnov tail probability for statistic `d` at
/// sample size `n` (Stephens' small-sample correction).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
