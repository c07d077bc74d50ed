//! Minimizer for `F(sigma) = Tr Y^alpha`, `alpha > 1`, over density matrices `sigma`,
//! where the caller builds `Y` from `s = sigma^{-beta/2}`, `beta = (alpha - 1)/alpha`.
//!
//! `F` is convex and its stationary points satisfy `Z ∝ sigma`, with `Z` the
//! caller-supplied reduced operator (`Tr_A Y^alpha`, or `sum_x Q(x) Y_x^alpha`
//! for a cq family) and `Tr Z = F`. The main loop is the damped fixed-point
//! map `sigma <- exp(beta log sigma + (1 - beta) log Z)`, which lands on the
//! optimum in one step when everything commutes. If it stalls we fall back to
//! projected gradient descent.

use super::linalg::{
    c, eigh, fro, mat_fn, project_density, psd_log, psd_pow, weighted, CMat, EIG_CLIP,
};
use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const TOL: f64 = 1e-11;
const ACCEPT_TOL: f64 = 1e-9;
const KERNEL_LOG: f64 = -800.0;

#[derive(Clone, Debug)]
pub struct SolverReport {
    /// Minimum of `Tr Y^alpha` found.
    pub value: f64,
    pub sigma: CMat,
    pub iterations: usize,
    /// `‖Z / F - sigma‖_2` at the returned point.
    pub residual: f64,
    pub used_fallback: bool,
}

fn normalize(m: &CMat) -> CMat {
    let tr = m.trace().re;
    super::linalg::hermitize(m) * c(1.0 / tr)
}

fn gradient(sigma: &CMat, z: &CMat, alpha: f64, beta: f64) -> CMat {
    // dF = alpha Tr[ D(sigma^{-beta/2})[dsigma] (sigma^{beta/2} Z + Z sigma^{beta/2}) ]
    let (vals, vecs) = eigh(sigma);
    let lam: Vec<f64> = vals.iter().map(|&l| l.max(EIG_CLIP)).collect();
    let f = |l: f64| l.powf(-beta / 2.0);
    let half = weighted(
        &lam.iter().map(|&l| l.powf(beta / 2.0)).collect::<Vec<_>>(),
        &vecs,
    );
    let s = &half * z + z * &half;
    let s_hat = vecs.adjoint() * s * &vecs;
    let n = lam.len();
    let g_hat = CMat::from_fn(n, n, |i, j| {
        let (a, b) = (lam[i], lam[j]);
        let dd = if (a - b).abs() <= 1e-12 * a.max(b) {
            -(beta / 2.0) * a.powf(-beta / 2.0 - 1.0)
        } else {
            (f(a) - f(b)) / (a - b)
        };
        s_hat[(i, j)] * c(alpha * dd)
    });
    &vecs * g_hat * vecs.adjoint()
}

/// Minimizes `F` starting from `sigma0`. `eval(s)` receives `s = sigma^{-beta/2}`
/// (generalized inverse power) and returns `(F, Z)`.
pub fn minimize_sandwiched<E>(alpha: f64, sigma0: &CMat, eval: E) -> Result<SolverReport>
where
    E: Fn(&CMat) -> (f64, CMat),
{
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "solver needs order > 1, got {alpha}"
        )));
    }
    let beta = (alpha - 1.0) / alpha;
    let run = |sigma: &CMat| eval(&psd_pow(sigma, -beta / 2.0));
    let residual = |sigma: &CMat, f: f64, z: &CMat| fro(&(z * c(1.0 / f) - sigma));

    let mut sigma = normalize(sigma0);
    let (mut f, mut z) = run(&sigma);
    let mut iterations = 0;
    let mut res = residual(&sigma, f, &z);
    while iterations < MAX_ITER && res > TOL {
        iterations += 1;
        let mix = psd_log(&sigma, KERNEL_LOG) * c(beta) + psd_log(&z, KERNEL_LOG) * c(1.0 - beta);
        let target = normalize(&mat_fn(&mix, |v| {
            if v < KERNEL_LOG / 2.0 {
                0.0
            } else {
                v.exp()
            }
        }));
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-6 {
            let trial = if step == 1.0 {
                target.clone()
            } else {
                normalize(&(&sigma * c(1.0 - step) + &target * c(step)))
            };
            let (ft, zt) = run(&trial);
            if ft <= f * (1.0 + 1e-14) {
                accepted = Some((trial, ft, zt));
                break;
            }
            step /= 2.0;
        }
        let Some((trial, ft, zt)) = accepted else {
            break;
        };
        let moved = fro(&(&trial - &sigma));
        sigma = trial;
        f = ft;
        z = zt;
        res = residual(&sigma, f, &z);
        if moved < 1e-14 {
            break;
        }
    }

    let mut used_fallback = false;
    if res > ACCEPT_TOL {
        used_fallback = true;
        let mut eta = 0.1;
        for _ in 0..MAX_ITER {
            iterations += 1;
            let g = gradient(&sigma, &z, alpha, beta);
            let mut improved = false;
            while eta > 1e-16 {
                let trial = project_density(&(&sigma - &g * c(eta)));
                let (ft, zt) = run(&trial);
                if ft < f {
                    let gain = f - ft;
                    sigma = trial;
                    f = ft;
                    z = zt;
                    eta *= 1.5;
                    improved = gain > 1e-16 * f;
                    break;
                }
                eta /= 2.0;
            }
            res = residual(&sigma, f, &z);
            if !improved || res <= TOL {
                break;
            }
        }
    }

    Ok(SolverReport {
        value: f,
        sigma,
        iterations,
        residual: res,
        used_fallback,
    })
}
