//! Closed-form eigen-solvers for symmetric 2×2 and 3×3 matrices, with a
//! cyclic Jacobi fallback for nearly repeated 3×3 spectra.

use std::f64::consts::PI;

use crate::field::{Sym3, Vec3};

/// Eigen-decomposition of `[[a11, a12], [a12, a22]]`, largest eigenvalue first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigen2 {
    pub values: [f64; 2],
    pub vectors: [[f64; 2]; 2],
}

pub fn sym2_eigen(a11: f64, a22: f64, a12: f64) -> Eigen2 {
    let mean = 0.5 * (a11 + a22);
    let half_gap = 0.5 * (a11 - a22);
    let radius = half_gap.hypot(a12);
    let det = a11 * a22 - a12 * a12;
    // the eigenvalue of smaller magnitude comes from det / (larger one)
    let (hi, lo) = if mean >= 0.0 {
        let hi = mean + radius;
        (hi, if hi != 0.0 { det / hi } else { mean - radius })
    } else {
        let lo = mean - radius;
        (if lo != 0.0 { det / lo } else { mean + radius }, lo)
    };
    let theta = if radius == 0.0 {
        0.0
    } else {
        0.5 * a12.atan2(half_gap)
    };
    let (s, c) = theta.sin_cos();
    Eigen2 {
        values: [hi, lo],
        vectors: [[c, s], [-s, c]],
    }
}

/// Threshold on `1 − r²` (the normalized cubic discriminant) below which the
/// trigonometric formula hands over to Jacobi rotations.
const TRIG_DISCRIMINANT_FLOOR: f64 = 1e-6;

/// Eigenvalues in ascending order.
pub fn sym3_eigenvalues(m: &Sym3) -> [f64; 3] {
    let off = m.xy * m.xy + m.xz * m.xz + m.yz * m.yz;
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return [0.0; 3];
    }
    if off == 0.0 {
        let mut d = [m.xx, m.yy, m.zz];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = m.trace() / 3.0;
    let p2 = (m.xx - q).powi(2) + (m.yy - q).powi(2) + (m.zz - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    if p <= 1e-12 * scale {
        return jacobi_eigen(m).0;
    }
    // B = (M − qI)/p, r = det(B)/2 ∈ [−1, 1]
    let (bxx, byy, bzz) = ((m.xx - q) / p, (m.yy - q) / p, (m.zz - q) / p);
    let (bxy, bxz, byz) = (m.xy / p, m.xz / p, m.yz / p);
    let det_b = bxx * (byy * bzz - byz * byz) - bxy * (bxy * bzz - byz * bxz)
        + bxz * (bxy * byz - byy * bxz);
    let r = (0.5 * det_b).clamp(-1.0, 1.0);
    if 1.0 - r * r < TRIG_DISCRIMINANT_FLOOR {
        return jacobi_eigen(m).0;
    }
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let middle = 3.0 * q - largest - smallest;
    let mut v = [smallest, middle, largest];
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &Sym3) -> f64 {
    sym3_eigenvalues(m)[0]
}

/// Cyclic Jacobi rotations. Eigenvalues ascending, eigenvectors matching.
pub fn jacobi_eigen(m: &Sym3) -> ([f64; 3], [Vec3; 3]) {
    let mut a = m.rows();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = m.frobenius_norm();
    for _sweep in 0..64 {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off.sqrt() <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if a[i][j] == 0.0 {
                continue;
            }
            let tau = (a[j][j] - a[i][i]) / (2.0 * a[i][j]);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let t = if tau == 0.0 { 1.0 } else { t };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (aki, akj) = (row[i], row[j]);
                row[i] = c * aki - s * akj;
                row[j] = s * aki + c * akj;
            }
            let (ri, rj) = (a[i], a[j]);
            for k in 0..3 {
                a[i][k] = c * ri[k] - s * rj[k];
                a[j][k] = s * ri[k] + c * rj[k];
            }
            for row in v.iter_mut() {
                let (vi, vj) = (row[i], row[j]);
                row[i] = c * vi - s * vj;
                row[j] = s * vi + c * vj;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let values = order.map(|k| a[k][k]);
    let vectors = order.map(|k| Vec3([v[0][k], v[1][k], v[2][k]]));
    (values, vectors)
}
