//! Eigenvalues of 4x4 complex hermitian matrices.
//!
//! A hermitian `H = A + iB` embeds into the real symmetric 8x8 matrix
//! `[[A, -B], [B, A]]` whose spectrum is that of `H` with every eigenvalue
//! doubled. A cyclic Jacobi iteration then diagonalizes the embedding; the
//! doubled pairs are averaged back out. This is exact enough (far below the
//! state-validation tolerances) and keeps the crate free of heavyweight
//! linear-algebra dependencies in a hot path that only ever sees 4x4 inputs.

use crate::math;
use crate::state::Mat4;

/// Eigenvalues in ascending order. The input is assumed hermitian up to
/// roundoff; the symmetric embedding below silently symmetrizes any residual
/// skew, so callers should check hermiticity first when it matters.
pub(crate) fn eigvals_hermitian4(m: &Mat4) -> [f64; 4] {
    let mut s = [[0.0f64; 8]; 8];
    for i in 0..4 {
        for j in 0..4 {
            // average with the adjoint so tiny hermiticity violations do not
            // break the symmetry the Jacobi sweep relies on
            let re = 0.5 * (m[i][j].re + m[j][i].re);
            let im = 0.5 * (m[i][j].im - m[j][i].im);
            s[i][j] = re;
            s[i + 4][j + 4] = re;
            s[i][j + 4] = -im;
            s[i + 4][j] = im;
        }
    }
    let mut eigs = jacobi_eigenvalues(&mut s);
    sort8(&mut eigs);
    // spectrum comes out doubled: (e0, e0, e1, e1, ...) after sorting
    [
        0.5 * (eigs[0] + eigs[1]),
        0.5 * (eigs[2] + eigs[3]),
        0.5 * (eigs[4] + eigs[5]),
        0.5 * (eigs[6] + eigs[7]),
    ]
}

fn off_diagonal_norm(s: &[[f64; 8]; 8]) -> f64 {
    let mut sum = 0.0;
    for i in 0..8 {
        for j in (i + 1)..8 {
            sum += s[i][j] * s[i][j];
        }
    }
    math::sqrt(2.0 * sum)
}

/// Cyclic Jacobi sweeps on a symmetric matrix, in place; returns the
/// diagonal. Converges quadratically; the sweep cap is generous.
fn jacobi_eigenvalues(s: &mut [[f64; 8]; 8]) -> [f64; 8] {
    let scale = {
        let mut frob = 0.0;
        for row in s.iter() {
            for &v in row.iter() {
                frob += v * v;
            }
        }
        math::sqrt(frob).max(1.0)
    };
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        if off_diagonal_norm(s) <= tol {
            break;
        }
        for p in 0..8 {
            for q in (p + 1)..8 {
                let apq = s[p][q];
                if math::abs(apq) <= tol / 64.0 {
                    continue;
                }
                let tau = (s[q][q] - s[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + math::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let sn = t * c;

                for k in 0..8 {
                    let skp = s[k][p];
                    let skq = s[k][q];
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for k in 0..8 {
                    let spk = s[p][k];
                    let sqk = s[q][k];
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
        }
    }

    let mut diag = [0.0f64; 8];
    for (i, d) in diag.iter_mut().enumerate() {
        *d = s[i][i];
    }
    diag
}

fn sort8(v: &mut [f64; 8]) {
    // insertion sort: tiny fixed size, no_std friendly
    for i in 1..8 {
        let x = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] > x {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::C;

    const ZERO: C = C::new(0.0, 0.0);

    #[test]
    fn diagonal_matrix_eigenvalues_pass_through() {
        let mut m = [[ZERO; 4]; 4];
        let d = [0.7, -0.25, 0.0, 1.4];
        for i in 0..4 {
            m[i][i] = C::new(d[i], 0.0);
        }
        let eigs = eigvals_hermitian4(&m);
        assert!((eigs[0] + 0.25).abs() < 1e-12);
        assert!((eigs[1] - 0.0).abs() < 1e-12);
        assert!((eigs[2] - 0.7).abs() < 1e-12);
        assert!((eigs[3] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn rank_one_projector_spectrum() {
        // |psi><psi| with |psi> = (|0> - |3>)/sqrt(2): eigenvalues (0,0,0,1)
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = C::new(0.5, 0.0);
        m[3][3] = C::new(0.5, 0.0);
        m[0][3] = C::new(-0.5, 0.0);
        m[3][0] = C::new(-0.5, 0.0);
        let eigs = eigvals_hermitian4(&m);
        assert!((eigs[3] - 1.0).abs() < 1e-12);
        for &e in &eigs[..3] {
            assert!(e.abs() < 1e-12);
        }
    }

    #[test]
    fn complex_off_diagonal_block() {
        // [[a, b],[conj(b), c]] embedded in the top-left 2x2 corner with
        // b = 0.3 - 0.4i: eigenvalues (a+c)/2 +- sqrt(((a-c)/2)^2 + |b|^2)
        let (a, c) = (0.6, 0.2);
        let b = C::new(0.3, -0.4);
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = C::new(a, 0.0);
        m[1][1] = C::new(c, 0.0);
        m[0][1] = b;
        m[1][0] = b.conj();
        let mid = 0.5 * (a + c);
        let rad = math::sqrt(0.25 * (a - c) * (a - c) + b.norm_sqr());
        // mid - rad is negative here, so ascending order puts it first
        let eigs = eigvals_hermitian4(&m);
        assert!((eigs[0] - (mid - rad)).abs() < 1e-12);
        assert!((eigs[1] - 0.0).abs() < 1e-12);
        assert!((eigs[2] - 0.0).abs() < 1e-12);
        assert!((eigs[3] - (mid + rad)).abs() < 1e-12);
    }

    #[test]
    fn trace_matches_eigenvalue_sum_on_random_hermitian() {
        // deterministic pseudo-random hermitian matrices via an LCG
        let mut x = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 33) as f64) / ((1u64 << 31) as f64) - 1.0
        };
        for _ in 0..50 {
            let mut m = [[ZERO; 4]; 4];
            for i in 0..4 {
                m[i][i] = C::new(next(), 0.0);
                for j in (i + 1)..4 {
                    let v = C::new(next(), next());
                    m[i][j] = v;
                    m[j][i] = v.conj();
                }
            }
            let tr: f64 = (0..4).map(|i| m[i][i].re).sum();
            let eigs = eigvals_hermitian4(&m);
            let sum: f64 = eigs.iter().sum();
            assert!((tr - sum).abs() < 1e-10, "trace {tr} vs eig sum {sum}");
            // and the eigenvalues reproduce tr(M^2) as well
            let mut tr2 = 0.0;
            for i in 0..4 {
                for k in 0..4 {
                    tr2 += (m[i][k] * m[k][i]).re;
                }
            }
            let sum2: f64 = eigs.iter().map(|e| e * e).sum();
            assert!((tr2 - sum2).abs() < 1e-10);
        }
    }
}
