//! Dense complex matrix helpers. Matrix functions go through the Hermitian
//! eigendecomposition with eigenvalues below [`EIG_CLIP`] treated as zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const EIG_CLIP: f64 = 1e-12;

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.trace()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `U diag(f(lambda)) U^dagger`.
pub fn rebuild(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let weights: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
    weighted(&weights, vecs)
}

/// `U diag(w) U^dagger`.
pub fn weighted(weights: &[f64], vecs: &CMat) -> CMat {
    let mut scaled = vecs.clone();
    for (k, &w) in weights.iter().enumerate() {
        scaled.column_mut(k).scale_mut(w);
    }
    &scaled * vecs.adjoint()
}

pub fn mat_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    rebuild(&vals, &vecs, f)
}

/// `m^a` on the support of a PSD matrix; zero elsewhere. Negative `a` gives the generalized inverse power.
pub fn psd_pow(m: &CMat, a: f64) -> CMat {
    mat_fn(m, |l| if l > EIG_CLIP { l.powf(a) } else { 0.0 })
}

/// Natural log on the support; `floor_log` on the kernel.
pub fn psd_log(m: &CMat, floor_log: f64) -> CMat {
    mat_fn(m, |l| if l > EIG_CLIP { l.ln() } else { floor_log })
}

pub fn support_projector(m: &CMat) -> CMat {
    mat_fn(m, |l| if l > EIG_CLIP { 1.0 } else { 0.0 })
}

pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean projection of a real vector onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Nearest density matrix (Frobenius) to a Hermitian matrix.
pub fn project_density(m: &CMat) -> CMat {
    let (vals, vecs) = eigh(m);
    hermitize(&weighted(&project_simplex(&vals), &vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigh_reconstructs() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                c(2.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                c(2.0),
            ],
        );
        let (vals, vecs) = eigh(&m);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
        let back = rebuild(&vals, &vecs, |l| l);
        assert!(fro(&(back - &m)) < 1e-12);
    }

    #[test]
    fn powers_compose() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                c(0.7),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                c(0.3),
            ],
        );
        let half = psd_pow(&m, 0.5);
        assert!(fro(&(&half * &half - &m)) < 1e-12);
        let inv = psd_pow(&m, -1.0);
        assert!(fro(&(&inv * &m - identity(2))) < 1e-12);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.6, 0.6]);
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
    }
}
