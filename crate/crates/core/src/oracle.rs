//! Slow, independent reference computations used to cross-check the fast
//! paths in tests and in the self-test command.

use crate::linalg::HermitianMatrix;

/// All eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi
/// rotations on the real symmetric embedding `[[Re, -Im], [Im, Re]]` (each
/// eigenvalue appears twice there and is reported once).
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Vec<f64> {
    let n = m.dim();
    let k = 2 * n;
    let mut a = vec![0.0; k * k];
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            a[i * k + j] = v.re;
            a[(i + n) * k + (j + n)] = v.re;
            a[(i + n) * k + j] = v.im;
            a[i * k + (j + n)] = -v.im;
        }
    }
    let mut eig = symmetric_eigenvalues(k, &mut a);
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig.into_iter().step_by(2).collect()
}

/// Eigenvalues of a real symmetric `k x k` matrix (row-major, destroyed).
pub fn symmetric_eigenvalues(k: usize, a: &mut [f64]) -> Vec<f64> {
    for _sweep in 0..100 {
        let off: f64 = (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * k + j] * a[i * k + j])
            .sum();
        let diag: f64 = (0..k).map(|i| a[i * k + i] * a[i * k + i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * k + p];
                let aqq = a[q * k + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[r * k + p];
                    let arq = a[r * k + q];
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[p * k + r];
                    let aqr = a[q * k + r];
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..k).map(|i| a[i * k + i]).collect()
}
