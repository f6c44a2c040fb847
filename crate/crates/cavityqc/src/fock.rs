//! Dense complex matrices, truncated bosonic ladder operators, and the
//! hermitian matrix exponential used by every other module.
//!
//! Everything here is plain dense `nalgebra` linear algebra over `Complex64`.
//! The largest matrices in practice are the full two-mode truncated spaces,
//! dimension `2 * (n_max + 1)^2` (72 for `n_max = 5`), so no sparsity is
//! attempted.

use nalgebra::DMatrix;
use thiserror::Error;

pub use num_complex::Complex64 as C64;

/// Dense square complex matrix, the carrier for all operators and unitaries.
pub type CMat = DMatrix<C64>;

/// Absolute entrywise tolerance below which a generator counts as hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default tolerance on `max |U†U - I|` for a matrix flagged unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("tensor product of an empty factor list")]
    EmptyTensorProduct,
    #[error("generator is not hermitian: max |H - H†| = {deviation:.3e} exceeds {tol:.1e}")]
    NonHermitian { deviation: f64, tol: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Truncation of the joint Hilbert space: one qubit and `mode_count`
/// oscillator modes, each keeping Fock levels `0..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    /// Highest retained Fock level per mode.
    pub n_max: usize,
    pub mode_count: usize,
}

impl FockConfig {
    pub fn new(n_max: usize, mode_count: usize) -> Self {
        assert!(mode_count >= 1, "at least one mode");
        Self { n_max, mode_count }
    }

    /// Total Hilbert dimension `2 * (n_max + 1)^mode_count`.
    pub fn dimension(&self) -> usize {
        2 * (self.n_max + 1).pow(self.mode_count as u32)
    }
}

/// Identity matrix of the given dimension.
pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Truncated ladder operators on Fock levels `0..=n_max`.
pub struct ModeOperators {
    /// `⟨n-1|a|n⟩ = √n`.
    pub annihilation: CMat,
    /// Adjoint of `annihilation`.
    pub creation: CMat,
    /// `creation * annihilation`, diagonal `(0, 1, ..., n_max)`.
    pub number: CMat,
}

/// Build annihilation, creation and number operators of one truncated mode.
pub fn build_mode_operators(n_max: usize) -> ModeOperators {
    let dim = n_max + 1;
    let mut annihilation = CMat::zeros(dim, dim);
    for n in 1..dim {
        annihilation[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let creation = annihilation.adjoint();
    let number = &creation * &annihilation;
    ModeOperators { annihilation, creation, number }
}

/// Kronecker product of the factors in the given order.
pub fn tensor_product(factors: &[&CMat]) -> Result<CMat, FockError> {
    let (first, rest) = factors.split_first().ok_or(FockError::EmptyTensorProduct)?;
    let mut out = (*first).clone();
    for f in rest {
        out = out.kronecker(f);
    }
    Ok(out)
}

/// Largest entry modulus of `m`.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Entrywise deviation of `h` from its own adjoint.
pub fn hermiticity_deviation(h: &CMat) -> f64 {
    max_abs(&(h - h.adjoint()))
}

/// Eigendecomposition of a hermitian matrix by cyclic complex Jacobi
/// rotations: `h = V diag(w) V†` with real `w` and unitary `V`.
///
/// Jacobi converges unconditionally for hermitian input and keeps the
/// reconstruction error at a small multiple of machine epsilon even for
/// highly degenerate spectra, which the library tridiagonalization route
/// does not guarantee.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let mut a = h.clone();
    let mut v = identity(n);
    let scale = max_abs(h).max(1e-300);
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let z = a[(p, q)];
                if z.norm() < 1e-18 * scale {
                    continue;
                }
                // diagonalize the 2x2 block [[ap, z], [z*, aq]] exactly,
                // taking the eigenvalue branch nearest ap so the rotation
                // stays inner (|c| ≥ 1/√2) and the cyclic sweep converges
                let ap = a[(p, p)].re;
                let aq = a[(q, q)].re;
                let half_gap = 0.5 * (ap - aq);
                let disc = (half_gap * half_gap + z.norm_sqr()).sqrt();
                // d = λ_near − ap, rationalized: |d| ≤ |z|
                let d = if half_gap >= 0.0 {
                    z.norm_sqr() / (disc + half_gap)
                } else {
                    -z.norm_sqr() / (disc - half_gap)
                };
                let nrm = (z.norm_sqr() + d * d).sqrt();
                if nrm == 0.0 {
                    continue;
                }
                // rotation columns: (z, d)/nrm and (−d, z̄)/nrm
                let c00 = z / C64::new(nrm, 0.0);
                let c10 = C64::new(d / nrm, 0.0);
                let c01 = C64::new(-d / nrm, 0.0);
                let c11 = z.conj() / C64::new(nrm, 0.0);
                for r in 0..n {
                    let (arp, arq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = arp * c00 + arq * c10;
                    a[(r, q)] = arp * c01 + arq * c11;
                }
                for c in 0..n {
                    let (apc, aqc) = (a[(p, c)], a[(q, c)]);
                    a[(p, c)] = c00.conj() * apc + c10.conj() * aqc;
                    a[(q, c)] = c01.conj() * apc + c11.conj() * aqc;
                }
                for r in 0..n {
                    let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = vrp * c00 + vrq * c10;
                    v[(r, q)] = vrp * c01 + vrq * c11;
                }
            }
        }
    }
    let w = (0..n).map(|k| a[(k, k)].re).collect();
    (w, v)
}

/// `exp(-i * scale * h)` for hermitian `h`, via eigendecomposition.
///
/// The eigendecomposition route keeps the result unitary to machine
/// precision for every scale; non-hermitian input is rejected.
pub fn matrix_exponential(h: &CMat, scale: f64) -> Result<CMat, FockError> {
    if !h.is_square() {
        return Err(FockError::NotSquare { rows: h.nrows(), cols: h.ncols() });
    }
    let deviation = hermiticity_deviation(h);
    if deviation >= HERMITICITY_TOL {
        return Err(FockError::NonHermitian { deviation, tol: HERMITICITY_TOL });
    }
    let (w, v) = hermitian_eigen(h);
    let phases: Vec<C64> = w.iter().map(|&x| C64::from_polar(1.0, -scale * x)).collect();
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_vec(phases));
    Ok(&v * diag * v.adjoint())
}

/// Result of a unitarity check.
#[derive(Debug, Clone, Copy)]
pub struct UnitarityReport {
    /// `max |U†U - I|`.
    pub max_deviation: f64,
    pub pass: bool,
}

/// Measure `max |U†U - I|` and compare against `tol`.
pub fn check_unitary(u: &CMat, tol: f64) -> UnitarityReport {
    let dim = u.ncols();
    let max_deviation = max_abs(&(u.adjoint() * u - identity(dim)));
    UnitarityReport { max_deviation, pass: max_deviation < tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    pub(crate) fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
        let raw = CMat::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&raw + raw.adjoint()).scale(0.5)
    }

    #[test]
    fn ladder_operator_entries() {
        let ops = build_mode_operators(2);
        assert_eq!(ops.annihilation[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(ops.annihilation[(1, 2)], C64::new(SQRT_2, 0.0));
        let nonzero = ops.annihilation.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
        for n in 0..3 {
            assert!((ops.number[(n, n)] - C64::new(n as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn ladder_operator_trivial_truncation() {
        let ops = build_mode_operators(0);
        assert_eq!(ops.annihilation.nrows(), 1);
        assert_eq!(ops.annihilation[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn creation_is_exact_adjoint() {
        for n_max in 0..6 {
            let ops = build_mode_operators(n_max);
            assert_eq!(ops.creation, ops.annihilation.adjoint());
        }
    }

    #[test]
    fn tensor_product_identities() {
        let i2 = identity(2);
        let out = tensor_product(&[&i2, &i2]).unwrap();
        assert_eq!(out, identity(4));

        let sz = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        let i3 = identity(3);
        let block = tensor_product(&[&sz, &i3]).unwrap();
        let expect = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        for (k, e) in expect.iter().enumerate() {
            assert_eq!(block[(k, k)], C64::new(*e, 0.0));
        }
    }

    #[test]
    fn tensor_product_matches_index_oracle() {
        // sigma_x ⊗ a at n_max = 1, checked against direct index arithmetic:
        // (A ⊗ B)[(i1*d2+i2),(j1*d2+j2)] = A[i1,j1] * B[i2,j2].
        let sx = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let a = build_mode_operators(1).annihilation;
        let out = tensor_product(&[&sx, &a]).unwrap();
        assert_eq!(out.nrows(), 4);
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let want = sx[(i1, j1)] * a[(i2, j2)];
                        assert_eq!(out[(i1 * 2 + i2, j1 * 2 + j2)], want);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_product_rejects_empty_list() {
        assert!(matches!(tensor_product(&[]), Err(FockError::EmptyTensorProduct)));
    }

    #[test]
    fn exponential_at_zero_scale_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(5, &mut rng);
        let u = matrix_exponential(&h, 0.0).unwrap();
        assert!(max_abs(&(u - identity(5))) < 1e-12);
    }

    #[test]
    fn exponential_of_sigma_x_at_half_pi() {
        let sx = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let u = matrix_exponential(&sx, FRAC_PI_2).unwrap();
        // exp(-i sigma_x pi/2) = -i sigma_x
        let want = sx.map(|z| z * C64::new(0.0, -1.0));
        assert!(max_abs(&(u - want)) < 1e-12);
    }

    #[test]
    fn exponential_on_exchange_doublet_closed_form() {
        // a†σ⁻ + aσ⁺ acts as sigma_x on the doublet {|e,0⟩, |g,1⟩}; at
        // scale pi*sqrt(2) the rotation has cos(pi√2) ≈ -0.26625 on the
        // diagonal and -i sin(pi√2) ≈ +0.96390i off it.
        let theta = PI * SQRT_2;
        let g = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        ]);
        let u = matrix_exponential(&g, theta).unwrap();
        assert!((u[(0, 0)].re - theta.cos()).abs() < 1e-12);
        assert!((u[(0, 0)].re - (-0.26625)).abs() < 1.1e-5);
        assert!((u[(1, 0)].im + theta.sin()).abs() < 1e-12);
        assert!((u[(1, 0)].im - 0.96390).abs() < 1.1e-5);
    }

    #[test]
    fn exponential_rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[
            C64::new(0.0, 0.0), C64::new(1.0, 0.0),
            C64::new(0.0, 0.0), C64::new(0.0, 0.0),
        ]);
        assert!(matches!(
            matrix_exponential(&m, 1.0),
            Err(FockError::NonHermitian { .. })
        ));
    }

    #[test]
    fn check_unitary_examples() {
        let report = check_unitary(&identity(8), 1e-10);
        assert!(report.pass);
        assert_eq!(report.max_deviation, 0.0);

        let double = identity(2).scale(2.0);
        let report = check_unitary(&double, 1e-10);
        assert!(!report.pass);
        assert!((report.max_deviation - 3.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_outputs_are_unitary_over_random_seeds() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(8, &mut rng);
            let s = rng.gen_range(-10.0..10.0);
            let u = matrix_exponential(&h, s).unwrap();
            assert!(check_unitary(&u, 1e-10).pass, "seed {seed}");
        }
    }

    #[test]
    fn exponential_is_additive_in_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=16);
            let h = random_hermitian(dim, &mut rng);
            let s = rng.gen_range(-3.0..3.0);
            let t = rng.gen_range(-3.0..3.0);
            let lhs = matrix_exponential(&h, s).unwrap() * matrix_exponential(&h, t).unwrap();
            let rhs = matrix_exponential(&h, s + t).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-9);
        }
    }

    #[test]
    fn tensor_product_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_hermitian(2, &mut rng);
            let b = random_hermitian(3, &mut rng);
            let c = random_hermitian(2, &mut rng);
            let d = random_hermitian(3, &mut rng);
            let lhs = tensor_product(&[&a, &b]).unwrap() * tensor_product(&[&c, &d]).unwrap();
            let rhs = tensor_product(&[&(&a * &c), &(&b * &d)]).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn eigendecomposition_reconstructs_the_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..30 {
            let dim = rng.gen_range(2..=32);
            let mut h = random_hermitian(dim, &mut rng);
            if trial % 2 == 0 {
                h = h.map(|z| -z); // sign patterns must not degrade accuracy
            }
            let (w, v) = hermitian_eigen(&h);
            let diag =
                CMat::from_diagonal(&nalgebra::DVector::from_vec(
                    w.iter().map(|&x| C64::new(x, 0.0)).collect(),
                ));
            let recon = &v * diag * v.adjoint();
            assert!(max_abs(&(recon - &h)) < 1e-12, "trial {trial}");
            assert!(check_unitary(&v, 1e-12).pass);
        }
    }

    #[test]
    fn eigendecomposition_handles_degenerate_spectra() {
        // pauli ⊗ identity has two 16-fold degenerate eigenvalues
        let sz = CMat::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(0.0, 0.0),
            C64::new(0.0, 0.0), C64::new(-1.0, 0.0),
        ]);
        let h = tensor_product(&[&sz, &identity(16)]).unwrap();
        let (w, v) = hermitian_eigen(&h);
        let mut sorted = w.clone();
        sorted.sort_by(f64::total_cmp);
        for (k, x) in sorted.iter().enumerate() {
            let want = if k < 16 { -1.0 } else { 1.0 };
            assert!((x - want).abs() < 1e-13);
        }
        assert!(check_unitary(&v, 1e-12).pass);
    }

    #[test]
    fn exponential_determinant_has_unit_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=12);
            let h = random_hermitian(dim, &mut rng);
            let u = matrix_exponential(&h, rng.gen_range(-5.0..5.0)).unwrap();
            assert!((u.determinant().norm() - 1.0).abs() < 1e-9);
        }
    }
}
