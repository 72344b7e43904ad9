//! Dense complex matrices: ladder operators and the matrix exponential.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

pub type C<T> = Complex<T>;
pub type CMatrix<T> = Array2<Complex<T>>;
pub type CVector<T> = Array1<Complex<T>>;

/// Lowering operator truncated to `dim` levels.
pub fn annihilation<T: Real>(dim: usize) -> CMatrix<T> {
    let mut a = CMatrix::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = C::new(T::from_usize_lossy(n).sqrt(), T::zero());
    }
    a
}

/// `γ a† − γ* a` on `dim` levels.
pub fn displacement_generator<T: Real>(gamma: C<T>, dim: usize) -> CMatrix<T> {
    let mut g = CMatrix::zeros((dim, dim));
    for n in 1..dim {
        let root = T::from_usize_lossy(n).sqrt();
        g[[n, n - 1]] = gamma * root;
        g[[n - 1, n]] = -gamma.conj() * root;
    }
    g
}

pub fn dagger<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.t().mapv(|z| z.conj())
}

pub fn identity<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::eye(dim)
}

/// max |U†U − 1| over entries.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let prod = dagger(u).dot(u);
    let eye = identity::<T>(u.ncols());
    max_abs_diff(&prod, &eye)
}

pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), T::max)
}

fn one_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<T>())
        .fold(T::zero(), T::max)
}

/// Solve `a x = b` by LU with partial pivoting. `a` must be nonsingular.
pub fn solve<T: Real>(mut a: CMatrix<T>, mut b: CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[[i, k]].norm().partial_cmp(&a[[j, k]].norm()).expect("finite"))
            .expect("non-empty column");
        if pivot != k {
            for j in 0..n {
                a.swap([k, j], [pivot, j]);
            }
            for j in 0..b.ncols() {
                b.swap([k, j], [pivot, j]);
            }
        }
        let inv = C::<T>::one() / a[[k, k]];
        for i in k + 1..n {
            let factor = a[[i, k]] * inv;
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let v = a[[k, j]];
                a[[i, j]] -= factor * v;
            }
            for j in 0..b.ncols() {
                let v = b[[k, j]];
                b[[i, j]] -= factor * v;
            }
        }
    }
    for k in (0..n).rev() {
        let inv = C::<T>::one() / a[[k, k]];
        for j in 0..b.ncols() {
            let mut acc = b[[k, j]];
            for i in k + 1..n {
                acc -= a[[k, i]] * b[[i, j]];
            }
            b[[k, j]] = acc * inv;
        }
    }
    b
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    let norm = one_norm(a).as_f64();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scale = C::new(T::lit(0.5_f64.powi(squarings)), T::zero());
    let a = a.mapv(|z| z * scale);
    let scaled = |m: &CMatrix<T>, k: usize| m.mapv(|z| z * T::lit(PADE13[k]));
    let eye = identity::<T>(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let inner_u = scaled(&a6, 13) + scaled(&a4, 11) + scaled(&a2, 9);
    let u = a.dot(&(a6.dot(&inner_u) + scaled(&a6, 7) + scaled(&a4, 5) + scaled(&a2, 3) + scaled(&eye, 1)));
    let inner_v = scaled(&a6, 12) + scaled(&a4, 10) + scaled(&a2, 8);
    let v = a6.dot(&inner_v) + scaled(&a6, 6) + scaled(&a4, 4) + scaled(&a2, 2) + scaled(&eye, 0);

    let mut r = solve(&v - &u, &v + &u);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    r
}

pub fn inner<T: Real>(a: ArrayView1<C<T>>, b: ArrayView1<C<T>>) -> C<T> {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn expm_of_diagonal() {
        let mut a = CMatrix::<f64>::zeros((2, 2));
        a[[0, 0]] = c(0.0, 3.0);
        a[[1, 1]] = c(0.0, -5.0);
        let e = expm(&a);
        assert!((e[[0, 0]] - c(3.0_f64.cos(), 3.0_f64.sin())).norm() < 1e-13);
        assert!((e[[1, 1]] - c(5.0_f64.cos(), -(5.0_f64.sin()))).norm() < 1e-13);
        assert!(e[[0, 1]].norm() < 1e-15);
    }

    #[test]
    fn expm_of_nilpotent_and_rotation() {
        let mut n = CMatrix::<f64>::zeros((2, 2));
        n[[0, 1]] = c(2.5, 0.0);
        let e = expm(&n);
        assert!((e[[0, 1]] - c(2.5, 0.0)).norm() < 1e-13);
        assert!((e[[0, 0]] - c(1.0, 0.0)).norm() < 1e-13);

        let theta = 20.0;
        let mut r = CMatrix::<f64>::zeros((2, 2));
        r[[0, 1]] = c(-theta, 0.0);
        r[[1, 0]] = c(theta, 0.0);
        let e = expm(&r);
        assert!((e[[0, 0]] - c(theta.cos(), 0.0)).norm() < 1e-11);
        assert!((e[[1, 0]] - c(theta.sin(), 0.0)).norm() < 1e-11);
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = ndarray::array![[c(0.0, 0.0), c(2.0, 1.0)], [c(1.0, 0.0), c(3.0, -1.0)]];
        let x = ndarray::array![[c(1.0, 2.0)], [c(-1.0, 0.5)]];
        let b = a.dot(&x);
        let got = solve(a, b);
        assert!(max_abs_diff(&got, &x) < 1e-14);
    }

    #[test]
    fn generator_is_anti_hermitian() {
        let g = displacement_generator(c(0.3, -0.8), 12);
        let gd = dagger(&g);
        assert!(max_abs_diff(&gd, &g.mapv(|z| -z)) < 1e-15);
        let a = annihilation::<f64>(12);
        let direct = &dagger(&a) * c(0.3, -0.8) - &a * c(0.3, 0.8);
        assert!(max_abs_diff(&direct, &g) < 1e-15);
    }
}
