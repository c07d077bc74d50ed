//! Asymptotic rates, finite-length completeness/secrecy/verification bounds and their
//! inversion into block lengths. Rates are in bits per channel use.
//!
//! With `P` the Bob-to-Alice noise and `P~` the Alice-to-Bob noise:
//!
//! * `R1* = 2 log p - H(P~ * P)`, `R2* = H(P)`, `R* = R1* - R2*`;
//! * `eps_E(n, s) = min_t 2^{(1-t)/(1+t)} 2^{t/(1+t) (n H_{1/(1+t)}(P) - s log p)}`;
//! * `eps_C(n, n1) = 4 min_t 2^{t (n1 log p - n (2 log p - H_{1-t}(P~ * P)))}`;
//! * `eps_B(n3) = p^{-n3}`.
//!
//! Every bound is capped at 1 and optimized over `t in (0, 1]` on a [`TGrid`].

use crate::dists::PauliDist;
use crate::error::{Error, Result};
use crate::qexact::DensityMatrix;
use crate::real::Real;

/// Asymptotic rates for one pair of channels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateTriple<T: Real = f64> {
    pub r1_star: T,
    pub r2_star: T,
    pub r_star: T,
}

pub fn asymptotic_rates<T: Real>(
    p_dist: &PauliDist<T>,
    p_tilde: &PauliDist<T>,
) -> Result<RateTriple<T>> {
    let conv = p_tilde.convolve(p_dist)?;
    let two_log_p = T::lit(2.0) * T::from_u32(p_dist.p()).unwrap().log2();
    let r1_star = two_log_p - conv.shannon();
    let r2_star = p_dist.shannon();
    Ok(RateTriple {
        r1_star,
        r2_star,
        r_star: r1_star - r2_star,
    })
}

/// Rate for a general shared state `tau_ABE` (dims `[p, p, d_E]`) whose `A` half is
/// sent through the Pauli channel `lambda`:
/// `H(G(L tau_AB)) - H(L tau_AB) - H(G(tau_AE)) + H(tau_AE)`, with `G` the full
/// Weyl twirl on `A`.
pub fn general_rate(tau_abe: &DensityMatrix, lambda: &PauliDist) -> Result<f64> {
    let p = lambda.p();
    match tau_abe.dims() {
        [a, b, _] if *a == p as usize && *b == p as usize => {}
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "expected dims [{p}, {p}, d_E]"
            )))
        }
    }
    let twirl = PauliDist::uniform(p)?;
    let ab = tau_abe.partial_trace(&[0, 1])?.pauli_channel(lambda, 0)?;
    let ae = tau_abe.partial_trace(&[0, 2])?;
    Ok(ab.pauli_channel(&twirl, 0)?.entropy()
        - ab.entropy()
        - ae.pauli_channel(&twirl, 0)?.entropy()
        + ae.entropy())
}

/// Search grid over `t`, refined by golden-section search around the best grid point.
#[derive(Clone, Debug)]
pub struct TGrid<T: Real = f64> {
    points: Vec<T>,
}

impl<T: Real> TGrid<T> {
    /// 200 log-spaced points from 0.001 to 1.
    pub fn standard() -> Self {
        Self::log_spaced(T::lit(1e-3), T::one(), 200).expect("valid default grid")
    }

    pub fn log_spaced(lo: T, hi: T, count: usize) -> Result<Self> {
        if !(lo > T::zero()) || !(hi >= lo) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid [{lo}, {hi}] with {count} points"
            )));
        }
        if count == 1 {
            return Ok(Self { points: vec![hi] });
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / T::from_usize_lossy(count - 1);
        Ok(Self {
            points: (0..count)
                .map(|i| (a + step * T::from_usize_lossy(i)).exp())
                .collect(),
        })
    }

    pub fn from_points(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty t-grid".into()));
        }
        if points.iter().any(|&t| !(t > T::zero()) || t > T::one()) {
            return Err(Error::InvalidParameter(
                "t-grid points must lie in (0, 1]".into(),
            ));
        }
        let mut points = points;
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { points })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// `(argmin, min)` of `f` over the grid plus golden-section refinement.
    pub fn minimize(&self, f: impl Fn(T) -> T) -> (T, T) {
        let vals: Vec<T> = self.points.iter().map(|&t| f(t)).collect();
        let (best, _) = vals
            .iter()
            .enumerate()
            .fold(
                (0, T::infinity()),
                |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
            );
        let (mut t_best, mut v_best) = (self.points[best], vals[best]);
        if self.points.len() < 3 {
            return (t_best, v_best);
        }
        let lo = self.points[best.saturating_sub(1)];
        let hi = self.points[(best + 1).min(self.points.len() - 1)];
        let (t, v) = golden_section(lo, hi, &f);
        if v < v_best {
            t_best = t;
            v_best = v;
        }
        (t_best, v_best)
    }

    pub fn maximize(&self, f: impl Fn(T) -> T) -> (T, T) {
        let (t, v) = self.minimize(|t| -f(t));
        (t, -v)
    }
}

impl<T: Real> Default for TGrid<T> {
    fn default() -> Self {
        Self::standard()
    }
}

fn golden_section<T: Real>(mut a: T, mut b: T, f: &impl Fn(T) -> T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    // values near a smooth minimum only resolve the abscissa to about sqrt(eps)
    let tol = T::epsilon().sqrt();
    for _ in 0..80 {
        if (b - a).abs() <= tol * (T::one() + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn log2p<T: Real>(p: u32) -> T {
    T::from_u32(p).unwrap().log2()
}

/// `p^{-n3}`.
pub fn eps_b_bound<T: Real>(n3: u64, p: u32) -> T {
    (-T::from_u64(n3).unwrap() * log2p::<T>(p)).exp2()
}

/// `log2` of the uncapped secrecy bound at a single `t`.
pub fn eps_e_log2_at<T: Real>(t: T, n: u64, sacrifice: u64, p_dist: &PauliDist<T>) -> T {
    let one = T::one();
    let order = one / (one + t);
    let h = p_dist.renyi(order).expect("order in (0, 1)");
    let w = t / (one + t);
    (one - t) / (one + t)
        + w * (T::from_u64(n).unwrap() * h
            - T::from_u64(sacrifice).unwrap() * log2p::<T>(p_dist.p()))
}

/// Secrecy bound for `n` uses with `sacrifice = n1 - n2 - n3` randomizer symbols, capped at 1.
pub fn eps_e_bound<T: Real>(n: u64, sacrifice: u64, p_dist: &PauliDist<T>, grid: &TGrid<T>) -> T {
    let (_, log_val) = grid.minimize(|t| eps_e_log2_at(t, n, sacrifice, p_dist));
    log_val.min(T::zero()).exp2()
}

/// `log2` of the uncapped completeness bound at a single `t`.
pub fn eps_c_log2_at<T: Real>(t: T, n: u64, n1: u64, p_eff: &PauliDist<T>) -> T {
    let one = T::one();
    let lp = log2p::<T>(p_eff.p());
    let h = p_eff.renyi(one - t).unwrap_or_else(|_| T::zero());
    T::lit(2.0)
        + t * (T::from_u64(n1).unwrap() * lp - T::from_u64(n).unwrap() * (T::lit(2.0) * lp - h))
}

/// Random-coding completeness bound for `n` uses carrying `n1` code symbols, capped at 1.
///
/// This is an existence bound for a random linear code, not a property of any particular decoder.
pub fn eps_c_bound<T: Real>(n: u64, n1: u64, p_eff: &PauliDist<T>, grid: &TGrid<T>) -> Result<T> {
    if n1 > 2 * n {
        return Err(Error::InvalidParameter(format!(
            "n1 = {n1} exceeds 2n = {}",
            2 * n
        )));
    }
    // t = 1 would make H_0 appear; the grid stays inside (0, 1) for this bound
    let (_, log_val) = grid.minimize(|t| {
        let t = t.min(T::one() - T::lit(1e-9));
        eps_c_log2_at(t, n, n1, p_eff)
    });
    Ok(log_val.min(T::zero()).exp2())
}

/// Targets `eps_C`, `eps_E`, `eps_B`, each in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecurityTargets<T: Real = f64> {
    pub eps_c: T,
    pub eps_e: T,
    pub eps_b: T,
}

impl<T: Real> SecurityTargets<T> {
    pub fn new(eps_c: T, eps_e: T, eps_b: T) -> Result<Self> {
        for (name, v) in [("eps_C", eps_c), ("eps_E", eps_e), ("eps_B", eps_b)] {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} outside (0, 1]"
                )));
            }
        }
        Ok(Self {
            eps_c,
            eps_e,
            eps_b,
        })
    }
}

/// Block lengths and rates chosen for `n` channel uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteLengthReport<T: Real = f64> {
    pub n: u64,
    /// Code dimension `m1`.
    pub n1: u64,
    /// Randomizer symbols `m2 = n1 - n2 - n3`.
    pub sacrifice: u64,
    /// Verification symbols `m3`.
    pub n3: u64,
    /// Message symbols `n1 - sacrifice - n3`; negative when the budget is exhausted.
    pub n2: i64,
    pub r1: T,
    pub r2: T,
    pub r3: T,
    pub r: T,
    pub eps_c: T,
    pub eps_e: T,
    pub eps_b: T,
}

/// `ceil(-log2 eps_B / log2 p)`.
pub fn m_hat_3<T: Real>(eps_b: T, p: u32) -> u64 {
    let x = -eps_b.log2() / log2p::<T>(p);
    let x = x.to_f64().unwrap();
    (x - 1e-9).ceil().max(0.0) as u64
}

/// Smallest sacrifice with `eps_E <= eps_e`.
pub fn m_hat_2<T: Real>(eps_e: T, n: u64, p_dist: &PauliDist<T>, grid: &TGrid<T>) -> u64 {
    let feasible = |s: u64| eps_e_bound(n, s, p_dist, grid) <= eps_e;
    // at t = 1 the exponent is (n H_{1/2} - s log p)/2, so this s always works
    let h_half = p_dist.renyi(T::lit(0.5)).unwrap().to_f64().unwrap();
    let lp = (p_dist.p() as f64).log2();
    let mut hi = (((n as f64) * h_half - 2.0 * eps_e.log2().to_f64().unwrap()) / lp)
        .ceil()
        .max(0.0) as u64
        + 1;
    while !feasible(hi) {
        hi = hi * 2 + 1;
    }
    let mut lo = 0u64;
    if feasible(lo) {
        return 0;
    }
    // invariant: lo infeasible, hi feasible
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest `n1 <= 2n` with `eps_C <= eps_c`.
pub fn m_hat_1<T: Real>(eps_c: T, n: u64, p_eff: &PauliDist<T>, grid: &TGrid<T>) -> Result<u64> {
    let feasible = |n1: u64| eps_c_bound(n, n1, p_eff, grid).map(|v| v <= eps_c);
    if !feasible(0)? {
        return Err(Error::Infeasible(format!(
            "no code length meets eps_C = {eps_c} at n = {n}"
        )));
    }
    if feasible(2 * n)? {
        return Ok(2 * n);
    }
    let (mut lo, mut hi) = (0u64, 2 * n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Chooses `(m1, m2, m3)` for `n` uses and reports the resulting rates.
pub fn m_hat_lengths<T: Real>(
    targets: &SecurityTargets<T>,
    n: u64,
    p_dist: &PauliDist<T>,
    p_tilde: &PauliDist<T>,
    grid: &TGrid<T>,
) -> Result<FiniteLengthReport<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let p = p_dist.p();
    let p_eff = p_tilde.convolve(p_dist)?;
    let n3 = m_hat_3(targets.eps_b, p);
    let sacrifice = m_hat_2(targets.eps_e, n, p_dist, grid);
    let n1 = m_hat_1(targets.eps_c, n, &p_eff, grid)?;
    let per_use = log2p::<T>(p) / T::from_u64(n).unwrap();
    let r1 = T::from_u64(n1).unwrap() * per_use;
    let r2 = T::from_u64(sacrifice).unwrap() * per_use;
    let r3 = T::from_u64(n3).unwrap() * per_use;
    Ok(FiniteLengthReport {
        n,
        n1,
        sacrifice,
        n3,
        n2: n1 as i64 - sacrifice as i64 - n3 as i64,
        r1,
        r2,
        r3,
        r: r1 - r2 - r3,
        eps_c: eps_c_bound(n, n1, &p_eff, grid)?,
        eps_e: eps_e_bound(n, sacrifice, p_dist, grid),
        eps_b: eps_b_bound(n3, p),
    })
}

/// `max(0, max_t t/(1+t) (R2 - H_{1/(1+t)}(P)))`, a lower bound on the leakage exponent.
pub fn leakage_exponent_lower<T: Real>(r2: T, p_dist: &PauliDist<T>, grid: &TGrid<T>) -> Result<T> {
    if r2 < T::zero() {
        return Err(Error::InvalidParameter(format!("R2 = {r2} is negative")));
    }
    let (_, v) = grid.maximize(|t| {
        let h = p_dist
            .renyi(T::one() / (T::one() + t))
            .expect("order in (0, 1)");
        t / (T::one() + t) * (r2 - h)
    });
    Ok(v.max(T::zero()))
}

/// Sibson's form of the sandwiched mutual information of a classical channel,
/// `(alpha/(alpha-1)) log2 sum_e (sum_x Q(x) W(e|x)^alpha)^{1/alpha}`.
pub fn sibson_info<T: Real>(q: &[T], channel: &[Vec<T>], alpha: T) -> Result<T> {
    if q.len() != channel.len() || q.is_empty() {
        return Err(Error::LengthMismatch {
            expected: channel.len(),
            actual: q.len(),
        });
    }
    if !(alpha > T::one()) {
        return Err(Error::InvalidParameter(format!(
            "order {alpha} must exceed 1"
        )));
    }
    let outputs = channel[0].len();
    let mut total = T::zero();
    for e in 0..outputs {
        let inner: T = q
            .iter()
            .zip(channel)
            .map(|(&qx, row)| qx * row[e].powf(alpha))
            .sum();
        total = total + inner.powf(T::one() / alpha);
    }
    Ok(alpha / (alpha - T::one()) * total.log2())
}

/// Additive-noise channel on `F_p^2`: `W(e|x) = P(e - x)`.
pub fn additive_channel<T: Real>(p_dist: &PauliDist<T>) -> Vec<Vec<T>> {
    let p = p_dist.p();
    (0..p * p)
        .map(|x| {
            (0..p * p)
                .map(|e| {
                    let (dx, dz) = ((e / p + p - x / p) % p, (e % p + p - x % p) % p);
                    p_dist.get(dx, dz)
                })
                .collect()
        })
        .collect()
}
