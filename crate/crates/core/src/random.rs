//! Seeded sampling of states and local operator sets used by the property
//! checks and the CLI. All randomized entry points take an explicit RNG so
//! runs are reproducible from a recorded seed.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{det, principal_root, svd, C64};
use crate::tensor::{DensityOperator, MultiTensor};

/// RNG used throughout; ChaCha so that a seed pins the stream across
/// platforms and releases.
pub type TestRng = rand_chacha::ChaCha12Rng;

fn standard_complex<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_fn((rows, cols), |_| standard_complex(rng))
}

/// Haar-ish random unitary: Ginibre draw, Gram–Schmidt, column phases fixed
/// by the R-diagonal.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let g = ginibre(n, n, rng);
    let mut q = g.clone();
    for j in 0..n {
        for k in 0..j {
            let mut overlap = C64::new(0.0, 0.0);
            for i in 0..n {
                overlap += q[[i, k]].conj() * q[[i, j]];
            }
            for i in 0..n {
                let sub = overlap * q[[i, k]];
                q[[i, j]] -= sub;
            }
        }
        let norm = (0..n).map(|i| q[[i, j]].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            // Degenerate draw; retry from fresh randomness.
            return random_unitary(n, rng);
        }
        // Phase convention: r_jj = ⟨g_j, q_j⟩ made real positive.
        let mut r = C64::new(0.0, 0.0);
        for i in 0..n {
            r += q[[i, j]].conj() * g[[i, j]] / norm;
        }
        let phase = if r.norm() > 0.0 { r / r.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[[i, j]] = q[[i, j]] / norm * phase;
        }
    }
    q
}

/// Random determinant-1 matrix: Ginibre divided by the principal n-th root
/// of its determinant. Draws whose singular-value ratio σ_min/σ_max falls
/// below `cond_floor` are rejected so transformed states stay numerically
/// well conditioned.
pub fn random_sl<R: Rng>(n: usize, cond_floor: f64, rng: &mut R) -> Array2<C64> {
    loop {
        let g = ginibre(n, n, rng);
        let s = svd(&g).s;
        if s[n - 1] < cond_floor * s[0] {
            continue;
        }
        let d = det(&g);
        if d.norm() < 1e-12 {
            continue;
        }
        let root = principal_root(d, n as u32);
        return g.mapv(|z| z / root);
    }
}

/// Determinant-1 random unitary (Haar unitary divided by a principal root of
/// its determinant phase).
pub fn random_su<R: Rng>(n: usize, rng: &mut R) -> Array2<C64> {
    let u = random_unitary(n, rng);
    let d = det(&u);
    let root = principal_root(d, n as u32);
    u.mapv(|z| z / root)
}

/// Sets of independent per-party determinant-1 operators.
pub fn random_sl_set<R: Rng>(dims: &[usize], cond_floor: f64, rng: &mut R) -> Vec<Array2<C64>> {
    dims.iter().map(|&n| random_sl(n, cond_floor, rng)).collect()
}

pub fn random_unitary_set<R: Rng>(dims: &[usize], rng: &mut R) -> Vec<Array2<C64>> {
    dims.iter().map(|&n| random_unitary(n, rng)).collect()
}

pub fn random_su_set<R: Rng>(dims: &[usize], rng: &mut R) -> Vec<Array2<C64>> {
    dims.iter().map(|&n| random_su(n, rng)).collect()
}

/// Random normalized pure state with Ginibre amplitudes.
pub fn random_pure<R: Rng>(dims: &[usize], rng: &mut R) -> MultiTensor {
    let total: usize = dims.iter().product();
    loop {
        let data: Vec<C64> = (0..total).map(|_| standard_complex(rng)).collect();
        let norm2: f64 = data.iter().map(|z| z.norm_sqr()).sum();
        if norm2 > 1e-12 {
            let norm = norm2.sqrt();
            let data = data.into_iter().map(|z| z / norm).collect();
            return MultiTensor::new(dims.to_vec(), data).expect("sampled state is valid");
        }
    }
}

/// Random full-rank mixed state: GG†/tr plus a ridge `ridge·I/D` keeping the
/// smallest eigenvalue comfortably away from zero, renormalized to trace 1.
pub fn random_density_full_rank<R: Rng>(dims: &[usize], ridge: f64, rng: &mut R) -> DensityOperator {
    let total: usize = dims.iter().product();
    let g = ginibre(total, total, rng);
    let mut m = Array2::from_elem((total, total), C64::new(0.0, 0.0));
    for i in 0..total {
        for j in 0..total {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..total {
                acc += g[[i, k]] * g[[j, k]].conj();
            }
            m[[i, j]] = acc;
        }
    }
    let tr: f64 = (0..total).map(|i| m[[i, i]].re).sum();
    let denom = tr + ridge;
    for i in 0..total {
        for j in 0..total {
            m[[i, j]] /= denom;
        }
        m[[i, i]] += C64::new(ridge / (total as f64 * denom), 0.0);
    }
    DensityOperator::new(dims.to_vec(), m).expect("sampled density operator is valid")
}
