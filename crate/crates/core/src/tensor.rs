//! Dense 3×3×3×3 tensors and the small amount of algebra the response needs.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Scalar field for [`Tensor4`]: real or complex.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + AddAssign
{
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Rank-4 Cartesian tensor with slots ordered `(i, k, m, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4<T> {
    data: [T; 81],
}

#[inline]
fn flat(i: usize, k: usize, m: usize, j: usize) -> usize {
    ((i * 3 + k) * 3 + m) * 3 + j
}

impl<T: Scalar> Default for Tensor4<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Scalar> Tensor4<T> {
    pub fn zeros() -> Self {
        Self { data: [T::default(); 81] }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for k in 0..3 {
                for m in 0..3 {
                    for j in 0..3 {
                        t.data[flat(i, k, m, j)] = f(i, k, m, j);
                    }
                }
            }
        }
        t
    }

    /// Builds a tensor from a flat slice in `(i, k, m, j)` row-major order.
    pub fn from_slice(values: &[T]) -> Result<Self> {
        if values.len() != 81 {
            return Err(Error::ShapeMismatch(values.len()));
        }
        let mut t = Self::zeros();
        t.data.copy_from_slice(values);
        Ok(t)
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize, m: usize, j: usize) -> T {
        self.data[flat(i, k, m, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, m: usize, j: usize, v: T) {
        self.data[flat(i, k, m, j)] = v;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for v in out.data.iter_mut() {
            *v = *v * s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// The three full contractions `(f_μμγγ, f_μνμν, f_μννμ)`.
    pub fn contractions(&self) -> [T; 3] {
        let mut c = [T::default(); 3];
        for a in 0..3 {
            for b in 0..3 {
                c[0] += self.get(a, a, b, b);
                c[1] += self.get(a, b, a, b);
                c[2] += self.get(a, b, b, a);
            }
        }
        c
    }

    /// `f'_{ikmj} = R_ia R_kb R_mc R_jd f_abcd`.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        // one slot at a time keeps this at 4·3⁵ multiplications
        let mut cur = *self;
        for slot in 0..4 {
            let mut next = Self::zeros();
            for i in 0..3 {
                for k in 0..3 {
                    for m in 0..3 {
                        for j in 0..3 {
                            let idx = [i, k, m, j];
                            let mut acc = T::default();
                            for (a, row) in r[idx[slot]].iter().enumerate() {
                                let mut src = idx;
                                src[slot] = a;
                                acc += cur.get(src[0], src[1], src[2], src[3]) * *row;
                            }
                            next.set(i, k, m, j, acc);
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

impl<T: Scalar> Add for Tensor4<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += *b;
        }
        self
    }
}

impl<T: Scalar> Sub for Tensor4<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a = *a - *b;
        }
        self
    }
}

impl Tensor4<Complex64> {
    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut out = *self;
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn re(&self) -> Tensor4<f64> {
        Tensor4::from_fn(|i, k, m, j| self.get(i, k, m, j).re)
    }
}

impl From<Tensor4<f64>> for Tensor4<Complex64> {
    fn from(t: Tensor4<f64>) -> Self {
        Tensor4::from_fn(|i, k, m, j| Complex64::new(t.get(i, k, m, j), 0.0))
    }
}

#[inline]
pub fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The three isotropic basis tensors `δ_ikδ_mj`, `δ_imδ_kj`, `δ_ijδ_km`.
pub fn isotropic_basis() -> [Tensor4<f64>; 3] {
    [
        Tensor4::from_fn(|i, k, m, j| delta(i, k) * delta(m, j)),
        Tensor4::from_fn(|i, k, m, j| delta(i, m) * delta(k, j)),
        Tensor4::from_fn(|i, k, m, j| delta(i, j) * delta(k, m)),
    ]
}
