//! Dense complex linear algebra for small matrices.
//!
//! Everything here is Jacobi-based: cyclic two-sided Jacobi for hermitian
//! eigenproblems and one-sided Jacobi for the SVD. At the matrix sizes this
//! crate works with (party dimensions up to ~10, composite dimensions up to
//! a few hundred) Jacobi delivers eigenvalues and singular values at close
//! to machine precision, which the per-step trace identities downstream
//! depend on.

use ndarray::Array2;
use num_complex::Complex64;

pub type C64 = Complex64;

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    let (m, n) = a.dim();
    Array2::from_shape_fn((n, m), |(i, j)| a[[j, i]].conj())
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn frobenius(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().iter().sum()
}

/// Max |a_ij - (a†)_ij| over all entries; zero for exactly hermitian input.
pub fn hermitian_deviation(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    dev
}

/// Deviation of `a` from unitarity, measured as ‖a†a − I‖_F.
pub fn unitary_deviation(a: &Array2<C64>) -> f64 {
    let g = adjoint(a).dot(a);
    let n = g.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            sum += (g[[i, j]] - target).norm_sqr();
        }
    }
    sum.sqrt()
}

/// Determinant via LU factorization with partial pivoting.
pub fn det(a: &Array2<C64>) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "det: matrix must be square");
    let mut m = a.clone();
    let mut d = C64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = m[[col, col]].norm();
        for row in col + 1..n {
            let v = m[[row, col]].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                let tmp = m[[col, j]];
                m[[col, j]] = m[[pivot, j]];
                m[[pivot, j]] = tmp;
            }
            d = -d;
        }
        let p = m[[col, col]];
        d *= p;
        for row in col + 1..n {
            let f = m[[row, col]] / p;
            for j in col + 1..n {
                let sub = f * m[[col, j]];
                m[[row, j]] -= sub;
            }
        }
    }
    d
}

/// Hermitian eigendecomposition `a = Q diag(values) Q†`.
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Columns are the corresponding eigenvectors.
    pub vectors: Array2<C64>,
}

/// Cyclic complex Jacobi for hermitian matrices. The strictly lower/upper
/// parts of the input are averaged first, so slightly non-hermitian input
/// (within validation tolerance) is handled gracefully.
pub fn eigh(a: &Array2<C64>) -> Eigh {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh: matrix must be square");
    let mut m = Array2::from_shape_fn((n, n), |(i, j)| (a[[i, j]] + a[[j, i]].conj()) * 0.5);
    let mut q = identity(n);
    let scale = frobenius(&m).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for r in p + 1..n {
                off += m[[p, r]].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let z = m[[p, r]];
                let absz = z.norm();
                if absz <= 1e-18 * scale {
                    continue;
                }
                let app = m[[p, p]].re;
                let arr = m[[r, r]].re;
                let phi = z.arg();
                // t solves |z| t² − (arr − app) t − |z| = 0 (smaller root).
                let tau = (arr - app) / (2.0 * absz);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // R = diag(1, e^{-iφ}) · [[c, -s], [s, c]] embedded at (p, r).
                let eim = C64::from_polar(1.0, -phi);
                let rpp = C64::new(c, 0.0);
                let rpr = C64::new(-s, 0.0);
                let rrp = eim * s;
                let rrr = eim * c;
                // m ← R† m R, applied as column then row updates.
                for i in 0..n {
                    let mp = m[[i, p]];
                    let mr = m[[i, r]];
                    m[[i, p]] = mp * rpp + mr * rrp;
                    m[[i, r]] = mp * rpr + mr * rrr;
                }
                for j in 0..n {
                    let mp = m[[p, j]];
                    let mr = m[[r, j]];
                    m[[p, j]] = rpp.conj() * mp + rrp.conj() * mr;
                    m[[r, j]] = rpr.conj() * mp + rrr.conj() * mr;
                }
                for i in 0..n {
                    let qp = q[[i, p]];
                    let qr = q[[i, r]];
                    q[[i, p]] = qp * rpp + qr * rrp;
                    q[[i, r]] = qp * rpr + qr * rrr;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| q[[i, order[j]]]);
    Eigh { values, vectors }
}

/// Thin singular value decomposition `a = U diag(s) V†`.
pub struct Svd {
    /// m×r, orthonormal columns (r = min(m, n)).
    pub u: Array2<C64>,
    /// Singular values in descending order.
    pub s: Vec<f64>,
    /// n×r, orthonormal columns.
    pub v: Array2<C64>,
}

/// One-sided Jacobi SVD. For wide matrices the adjoint is decomposed and the
/// factors swapped back.
pub fn svd(a: &Array2<C64>) -> Svd {
    let (m, n) = a.dim();
    if m < n {
        let t = svd(&adjoint(a));
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let mut w = a.clone();
    let mut v = identity(n);
    let scale2: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().max(f64::MIN_POSITIVE);

    for _sweep in 0..120 {
        let mut rotated = false;
        for p in 0..n {
            for r in p + 1..n {
                let mut zpr = C64::new(0.0, 0.0);
                let mut npp = 0.0;
                let mut nrr = 0.0;
                for i in 0..m {
                    let wp = w[[i, p]];
                    let wr = w[[i, r]];
                    zpr += wp.conj() * wr;
                    npp += wp.norm_sqr();
                    nrr += wr.norm_sqr();
                }
                let absz = zpr.norm();
                if absz <= 1e-16 * (npp * nrr).sqrt() + 1e-300 * scale2 {
                    continue;
                }
                rotated = true;
                let phi = zpr.arg();
                let tau = (nrr - npp) / (2.0 * absz);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let eim = C64::from_polar(1.0, -phi);
                let rpp = C64::new(c, 0.0);
                let rpr = C64::new(-s, 0.0);
                let rrp = eim * s;
                let rrr = eim * c;
                for i in 0..m {
                    let wp = w[[i, p]];
                    let wr = w[[i, r]];
                    w[[i, p]] = wp * rpp + wr * rrp;
                    w[[i, r]] = wp * rpr + wr * rrr;
                }
                for i in 0..n {
                    let vp = v[[i, p]];
                    let vr = v[[i, r]];
                    v[[i, p]] = vp * rpp + vr * rrp;
                    v[[i, r]] = vp * rpr + vr * rrr;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[[i, j]].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    norms = order.iter().map(|&j| norms[j]).collect();
    let wmax = norms.first().copied().unwrap_or(0.0);

    let mut u = Array2::from_shape_fn((m, n), |(i, j)| w[[i, order[j]]]);
    let v = Array2::from_shape_fn((n, n), |(i, j)| v[[i, order[j]]]);
    // Normalize columns of u; columns with (numerically) zero singular value
    // get an orthonormal completion so that u is always an isometry.
    for j in 0..n {
        if norms[j] > 1e-300 + 1e-200 * wmax {
            for i in 0..m {
                u[[i, j]] /= norms[j];
            }
        } else {
            norms[j] = 0.0;
            complete_column(&mut u, j);
        }
    }
    Svd { u, s: norms, v }
}

/// Replace column `j` of `u` with a unit vector orthogonal to columns 0..j.
fn complete_column(u: &mut Array2<C64>, j: usize) {
    let m = u.nrows();
    for cand in 0..m {
        let mut col: Vec<C64> = (0..m)
            .map(|i| if i == cand { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        for k in 0..j {
            let overlap: C64 = (0..m).map(|i| u[[i, k]].conj() * col[i]).sum();
            for i in 0..m {
                let sub = overlap * u[[i, k]];
                col[i] -= sub;
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.5 {
            for i in 0..m {
                u[[i, j]] = col[i] / norm;
            }
            return;
        }
    }
    // Unreachable for j < m: some canonical vector always survives projection.
    panic!("complete_column: no orthogonal completion found");
}

/// Largest singular value.
pub fn operator_norm(a: &Array2<C64>) -> f64 {
    svd(a).s.first().copied().unwrap_or(0.0)
}

/// Extend an m×k isometry (k ≤ m, orthonormal columns) to a full m×m
/// unitary by Gram–Schmidt completion of the remaining columns.
pub fn complete_to_unitary(thin: &Array2<C64>) -> Array2<C64> {
    let (m, k) = thin.dim();
    assert!(k <= m, "complete_to_unitary: more columns than rows");
    let mut u = Array2::from_elem((m, m), C64::new(0.0, 0.0));
    for j in 0..k {
        for i in 0..m {
            u[[i, j]] = thin[[i, j]];
        }
    }
    for j in k..m {
        complete_column(&mut u, j);
    }
    u
}

/// Polar decomposition `a = U H` with `U` unitary and `H` hermitian PSD.
pub fn polar(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "polar: matrix must be square");
    let f = svd(a);
    let u = f.u.dot(&adjoint(&f.v));
    let mut h = Array2::from_elem((n, n), C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += f.v[[i, k]] * f.s[k] * f.v[[j, k]].conj();
            }
            h[[i, j]] = acc;
        }
    }
    (u, h)
}

/// Principal k-th root of a nonzero complex number.
pub fn principal_root(z: C64, k: u32) -> C64 {
    C64::from_polar(z.norm().powf(1.0 / k as f64), z.arg() / k as f64)
}

/// Unitary `W` (d×d) mapping `v` to `‖v‖ e₀` with a real non-negative first
/// coordinate. Returns the identity for (near-)zero input.
pub fn rotate_to_e0(v: &[C64]) -> Array2<C64> {
    let d = v.len();
    let alpha = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut w = identity(d);
    if alpha <= 1e-300 {
        return w;
    }
    let tail: f64 = v[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if tail <= 1e-18 * alpha && v[0].re > 0.0 && v[0].im.abs() <= 1e-18 * alpha {
        return w;
    }
    let beta = if v[0].norm() > 0.0 { v[0].arg() } else { 0.0 };
    let shift = C64::from_polar(alpha, beta);
    // u = v + α e^{iβ} e₀ avoids cancellation; H = I − 2uu†/‖u‖² sends v to −αe^{iβ}e₀.
    let mut u: Vec<C64> = v.to_vec();
    u[0] += shift;
    let unorm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    for i in 0..d {
        for j in 0..d {
            let correction = u[i] * u[j].conj() * (2.0 / unorm2);
            w[[i, j]] -= correction;
        }
    }
    // Fix the phase of the image: row 0 scaled by −e^{−iβ} gives Wv = αe₀.
    let fix = -C64::from_polar(1.0, -beta);
    for j in 0..d {
        w[[0, j]] *= fix;
    }
    w
}
