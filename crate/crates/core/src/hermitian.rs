//! Small dense complex Hermitian matrices and their eigendecompositions.
//!
//! The beamforming stack only ever sees `n_b x n_b` matrices (a handful of
//! antennas), so a cyclic Jacobi sweep is accurate, fast, and — unlike a
//! general-purpose LAPACK route — bit-deterministic across runs.

use num_complex::Complex;

pub type C64 = Complex<f64>;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> CMat {
        CMat {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> CMat {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Rank-one outer product `h h^H`.
    pub fn outer(h: &[C64]) -> CMat {
        let n = h.len();
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = h[i] * h[j].conj();
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in i..self.n {
                let diff = self[(i, j)] - self[(j, i)].conj();
                if diff.norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(self * other)`; real-valued for a pair of Hermitian matrices.
    pub fn trace_product(&self, other: &CMat) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self[(i, j)] * other[(j, i)];
            }
        }
        acc.re
    }

    /// Quadratic form `v^H self v` (real part).
    pub fn quad_form(&self, v: &[C64]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i].conj() * self[(i, j)] * v[j];
            }
        }
        acc.re
    }

    pub fn scale(&self, c: f64) -> CMat {
        CMat {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &CMat, c: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    /// Force exact Hermitian symmetry by averaging with the adjoint.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            self[(i, i)] = C64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..self.n {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigH {
    pub values: Vec<f64>,
    /// Column eigenvectors, one `Vec<C64>` per eigenvalue.
    pub vectors: Vec<Vec<C64>>,
}

impl EigH {
    /// Reassemble `sum_k f(lambda_k) u_k u_k^H`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.vectors[0].len();
        let mut out = CMat::zeros(n);
        for (lam, u) in self.values.iter().zip(&self.vectors) {
            let w = f(*lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += u[i] * u[j].conj() * w;
                }
            }
        }
        out.symmetrize();
        out
    }
}

/// Cyclic Jacobi eigendecomposition for Hermitian matrices.
pub fn eig_hermitian(a: &CMat) -> EigH {
    let n = a.n;
    let mut m = a.clone();
    m.symmetrize();
    let mut v = CMat::identity(n);
    let scale = m.frobenius_norm().max(1e-300);
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= tol * 1e-2 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Unitary rotation J zeroing the (p, q) entry:
                //   J[p][p] = c, J[p][q] = s e^{i phi},
                //   J[q][p] = -s e^{-i phi}, J[q][q] = c,
                // phi = arg(a_pq); t = s/c is the small-magnitude root of
                //   t^2 - 2 tau t - 1 = 0, tau = (a_pp - a_qq) / (2|a_pq|).
                let phase = apq / apq.norm();
                let tau = (app - aqq) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let se_pos = phase * s; // s e^{+i phi}
                let se_neg = phase.conj() * s; // s e^{-i phi}
                // m <- m J (columns p, q)
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * se_neg;
                    m[(k, q)] = mkp * se_pos + mkq * c;
                }
                // m <- J^H m (rows p, q)
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * se_pos;
                    m[(q, k)] = mpk * se_neg + mqk * c;
                }
                // v <- v J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * se_neg;
                    v[(k, q)] = vkp * se_pos + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));

    EigH {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: order
            .iter()
            .map(|&col| (0..n).map(|row| v[(row, col)]).collect())
            .collect(),
    }
}

/// Largest eigenvalue and a unit eigenvector.
pub fn top_eigenpair(a: &CMat) -> (f64, Vec<C64>) {
    let eig = eig_hermitian(a);
    (eig.values[0], eig.vectors[0].clone())
}

/// `exp(A)` for Hermitian `A`, computed through the eigendecomposition.
/// The spectrum is shifted by its maximum before exponentiation so large
/// mirror-descent potentials cannot overflow.
pub fn expm_hermitian_normalized(a: &CMat) -> CMat {
    let eig = eig_hermitian(a);
    let top = eig.values[0];
    let mut g = eig.map(|lam| (lam - top).exp());
    let tr = g.trace().re;
    if tr > 0.0 {
        g = g.scale(1.0 / tr);
    }
    g.symmetrize();
    g
}

/// PSD square root with negative eigenvalues clamped to zero.
pub fn sqrt_psd(a: &CMat) -> CMat {
    eig_hermitian(a).map(|lam| lam.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = crate::rng::stream(seed, &[0xdead]);
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.gen_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn reconstruct(eig: &EigH) -> CMat {
        eig.map(|lam| lam)
    }

    #[test]
    fn eig_reconstructs_matrix() {
        for seed in 0..10u64 {
            let n = 2 + (seed % 4) as usize;
            let a = random_hermitian(n, seed);
            let eig = eig_hermitian(&a);
            let back = reconstruct(&eig);
            for (x, y) in a.data.iter().zip(&back.data) {
                assert!((x - y).norm() < 1e-10, "seed {seed}");
            }
            // Eigenvalues sorted descending.
            for w in eig.values.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn eig_vectors_orthonormal() {
        let a = random_hermitian(4, 3);
        let eig = eig_hermitian(&a);
        for i in 0..4 {
            for j in 0..4 {
                let dot: C64 = eig.vectors[i]
                    .iter()
                    .zip(&eig.vectors[j])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot.norm() - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exp_of_zero_is_uniform() {
        let g = expm_hermitian_normalized(&CMat::zeros(4));
        for i in 0..4 {
            assert_relative_eq!(g[(i, i)].re, 0.25, epsilon = 1e-12);
        }
        assert_relative_eq!(g.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut a = random_hermitian(3, 7);
        // make PSD: A <- A^2 (Hermitian square is PSD)
        let eig = eig_hermitian(&a);
        a = eig.map(|lam| lam * lam);
        let r = sqrt_psd(&a);
        let eig_r = eig_hermitian(&r);
        let back = eig_r.map(|lam| lam * lam);
        for (x, y) in a.data.iter().zip(&back.data) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn trace_product_matches_quad_form_for_rank_one() {
        let h = vec![C64::new(0.3, 0.1), C64::new(-0.7, 0.9), C64::new(0.0, 1.0)];
        let hh = CMat::outer(&h);
        let g = random_hermitian(3, 11);
        assert_relative_eq!(g.trace_product(&hh), g.quad_form(&h), max_relative = 1e-12);
    }
}
