//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln ∫ f` for `ln f` sampled on a uniform grid of spacing `h` (trapezoid).
fn trapezoid_ln(ln_f: &[f64], h: f64) -> f64 {
    let mut v = ln_f.to_vec();
    let n = v.len();
    v[0] += 0.5f64.ln();
    v[n - 1] += 0.5f64.ln();
    log_sum_exp(&v) + h.ln()
}

/// `ln [p0 ∫ Π_t Poisson(y_t; b) Gamma(b; α, β) db]` by dense quadrature in
/// `ln b`.
pub fn empty_marginal(y: &[u32], alpha_b: f64, beta_b: f64, ln_prior: f64) -> f64 {
    let t = y.len() as f64;
    let ybar: f64 = y.iter().map(|&c| c as f64).sum();
    let fact: f64 = y.iter().map(|&c| ln_factorial(c)).sum();
    let s = ybar + alpha_b;
    let centre = (s / (t + beta_b)).ln();
    let (lo, hi) = (centre - 40.0 / s.sqrt() - 80.0 / s, centre + 6.0 + 40.0 / s.sqrt());
    let n = 40_001;
    let h = (hi - lo) / (n - 1) as f64;
    let ln_f: Vec<f64> = (0..n)
        .map(|i| {
            let x = lo + h * i as f64;
            let b = x.exp();
            let loglik: f64 = y.iter().map(|&c| c as f64 * x - b).sum::<f64>() - fact;
            let prior = alpha_b * beta_b.ln() - ln_gamma(alpha_b) + (alpha_b - 1.0) * x - beta_b * b;
            loglik + prior + x
        })
        .collect();
    ln_prior + trapezoid_ln(&ln_f, h)
}

/// `ln [p(u=1) Σ_d (1/T) ∫∫ Π_t Poisson(y_t; b(ωTg(t-d)+1)) p(ω, b) dω db]`
/// with the background integral done in closed form and `ω` on a dense
/// log grid. `p(ω, b)` is the gamma reflectivity prior on `r = ωbT`
/// transported to `ω`, times the gamma background prior.
pub fn target_marginal(y: &[u32], g: &[f64], alpha_r: f64, beta_r: f64, alpha_b: f64, beta_b: f64, ln_prior: f64) -> f64 {
    let tn = y.len();
    let t = tn as f64;
    let ybar: f64 = y.iter().map(|&c| c as f64).sum();
    let fact: f64 = y.iter().map(|&c| ln_factorial(c)).sum();
    let (lo, hi) = (1e-10f64.ln(), 1e10f64.ln());
    let n = 20_001;
    let h = (hi - lo) / (n - 1) as f64;
    let per_depth: Vec<f64> = (0..tn)
        .map(|d| {
            let ln_f: Vec<f64> = (0..n)
                .map(|i| {
                    let x = lo + h * i as f64;
                    let w = x.exp();
                    // Π_t (b(ωTg+1))^{y_t} e^{-b(ωTg+1)} / y_t!
                    //   = b^{ȳ} e^{-bT(1+ω)} Π_t (ωTg+1)^{y_t} / Π y_t!
                    let shape_terms: f64 = (0..tn).map(|s| y[s] as f64 * (w * t * g[(s + tn - d) % tn] + 1.0).ln()).sum();
                    // p(r = ωbT) bT: b^{α_r} terms folded into the b integral
                    let ln_c_r = alpha_r * (beta_r * t).ln() + (alpha_r - 1.0) * x - ln_gamma(alpha_r);
                    let ln_c_b = alpha_b * beta_b.ln() - ln_gamma(alpha_b);
                    let shape = ybar + alpha_b + alpha_r;
                    let rate = t * (1.0 + w) + beta_r * w * t + beta_b;
                    let b_integral = ln_gamma(shape) - shape * rate.ln();
                    shape_terms - fact + ln_c_r + ln_c_b + b_integral + x
                })
                .collect();
            trapezoid_ln(&ln_f, h) - t.ln()
        })
        .collect();
    ln_prior + log_sum_exp(&per_depth)
}

/// `Σ_t y_t ln(ωTg(t-d)+1)` for every `d`, circular.
pub fn direct_scores(y: &[u32], g: &[f64], omega: f64) -> Vec<f64> {
    let tn = y.len();
    (0..tn)
        .map(|d| (0..tn).map(|t| y[t] as f64 * (omega * tn as f64 * g[(t + tn - d) % tn] + 1.0).ln()).sum())
        .collect()
}

/// `argmax_d Σ_l Σ_t y_{l,t} max(ln g_l(t-d), floor)`, ties to the smallest.
pub fn xcorr_direct(y: &[u32], irf: &[Vec<f64>], floor: f64) -> usize {
    let tn = irf[0].len();
    let mut best = (0, f64::NEG_INFINITY);
    for d in 0..tn {
        let mut s = 0.0;
        for (l, g) in irf.iter().enumerate() {
            for t in 0..tn {
                let c = y[l * tn + t];
                if c > 0 {
                    let v = g[(t + tn - d) % tn];
                    s += c as f64 * if v > 0.0 { v.ln().max(floor) } else { floor };
                }
            }
        }
        if s > best.1 + 1e-9 * s.abs().max(1.0) {
            best = (d, s);
        }
    }
    best.0
}

/// `½ Σ |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
