//! Finite-difference Christoffel/Ricci assembly for an arbitrary metric field.
//!
//! Used as the independent oracle for the conformal-change formulas and as the
//! fallback for fields without closed-form derivatives. First and second
//! derivatives of g_ij come from central and mixed central differences with
//! step h·max(1, |x|).

use super::AmbientMetric;
use crate::error::Result;

pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct FdCurvature {
    /// Γ^l_ij as christoffel[l][i][j].
    pub christoffel: Vec<Vec<Vec<f64>>>,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
}

/// Curvature of the metric field `g` (row-major n×n) at `x`.
pub fn fd_curvature<G: Fn(&[f64]) -> Vec<f64>>(g: G, x: &[f64], step: f64) -> FdCurvature {
    let n = x.len();
    let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let h = step * scale;
    let idx = |i: usize, j: usize| i * n + j;
    let g0 = g(x);
    let mut y = x.to_vec();

    // dg[k][ij] = ∂_k g_ij, ddg[k][l][ij] = ∂_k∂_l g_ij
    let mut dg = vec![vec![0.0; n * n]; n];
    let mut ddg = vec![vec![vec![0.0; n * n]; n]; n];
    for k in 0..n {
        y[k] = x[k] + h;
        let gp = g(&y);
        y[k] = x[k] - h;
        let gm = g(&y);
        y[k] = x[k];
        for a in 0..n * n {
            dg[k][a] = (gp[a] - gm[a]) / (2.0 * h);
            ddg[k][k][a] = (gp[a] - 2.0 * g0[a] + gm[a]) / (h * h);
        }
    }
    for k in 0..n {
        for l in 0..k {
            let mut acc = vec![0.0; n * n];
            for (sk, sl, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                y[k] = x[k] + sk * h;
                y[l] = x[l] + sl * h;
                let gv = g(&y);
                for a in 0..n * n {
                    acc[a] += sign * gv[a];
                }
            }
            y[k] = x[k];
            y[l] = x[l];
            for a in 0..n * n {
                let v = acc[a] / (4.0 * h * h);
                ddg[k][l][a] = v;
                ddg[l][k][a] = v;
            }
        }
    }

    let ginv = invert(&g0, n);
    // lowered Γ_mij = ½(∂_i g_jm + ∂_j g_im - ∂_m g_ij) and its derivatives
    let low = |m: usize, i: usize, j: usize| 0.5 * (dg[i][idx(j, m)] + dg[j][idx(i, m)] - dg[m][idx(i, j)]);
    let dlow = |k: usize, m: usize, i: usize, j: usize| {
        0.5 * (ddg[k][i][idx(j, m)] + ddg[k][j][idx(i, m)] - ddg[k][m][idx(i, j)])
    };
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[l][i][j] = (0..n).map(|m| ginv[idx(l, m)] * low(m, i, j)).sum();
            }
        }
    }
    // ∂_k g^{lm} = -g^{la} ∂_k g_ab g^{bm}
    let mut dginv = vec![vec![0.0; n * n]; n];
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc -= ginv[idx(l, a)] * dg[k][idx(a, b)] * ginv[idx(b, m)];
                    }
                }
                dginv[k][idx(l, m)] = acc;
            }
        }
    }
    // dgamma(k, l, i, j) = ∂_k Γ^l_ij
    let dgamma = |k: usize, l: usize, i: usize, j: usize| -> f64 {
        (0..n).map(|m| dginv[k][idx(l, m)] * low(m, i, j) + ginv[idx(l, m)] * dlow(k, m, i, j)).sum()
    };
    let mut ricci = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += dgamma(k, k, i, j) - dgamma(j, k, i, k);
                for l in 0..n {
                    acc += gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
                }
            }
            ricci[i][j] = acc;
        }
    }
    let scalar = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| ginv[idx(i, j)] * ricci[i][j]).sum();
    FdCurvature { christoffel: gamma, ricci, scalar }
}

/// Oracle curvature of the conformal metric ω·ḡ.
pub fn conformal_fd_curvature(metric: &AmbientMetric, x: &[f64], step: f64) -> Result<FdCurvature> {
    metric.check_domain(x)?;
    let n = metric.dim;
    let field = |y: &[f64]| {
        let w = metric.omega_value(y);
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            g[i * n + i] = w;
        }
        g
    };
    Ok(fd_curvature(field, x, step))
}

/// Gauss–Jordan inverse of a small row-major matrix with partial pivoting.
pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&r, &s| m[r * n + c].abs().total_cmp(&m[s * n + c].abs())).unwrap();
        if p != c {
            for k in 0..n {
                m.swap(p * n + k, c * n + k);
                inv.swap(p * n + k, c * n + k);
            }
        }
        let d = m[c * n + c];
        for k in 0..n {
            m[c * n + k] /= d;
            inv[c * n + k] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r * n + c];
                if f != 0.0 {
                    for k in 0..n {
                        m[r * n + k] -= f * m[c * n + k];
                        inv[r * n + k] -= f * inv[c * n + k];
                    }
                }
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_chart() {
        // stereographic metric 4/(1+|x|²)² on R^3: constant curvature 1, R = 6
        let g = |y: &[f64]| {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            let w = 4.0 / ((1.0 + r2) * (1.0 + r2));
            let mut m = vec![0.0; 9];
            for i in 0..3 {
                m[i * 3 + i] = w;
            }
            m
        };
        let c = fd_curvature(g, &[0.3, -0.2, 0.5], FD_STEP);
        assert!((c.scalar - 6.0).abs() < 1e-5, "{}", c.scalar);
    }

    #[test]
    fn inverse_roundtrip() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let b = invert(&a, 3);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * b[k * 3 + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }
}
