//! Dense second- and fourth-order tensors in two or three dimensions.
//!
//! Storage is always the full 3×3 (or 3⁴) array; `dim` marks how many
//! leading indices are active. Entries outside the active block are kept at
//! zero so that norms and contractions never see stale data. There is no
//! Voigt packing here; that only happens when element matrices are formed.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2 {
    dim: usize,
    m: [[f64; 3]; 3],
}

impl Tensor2 {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3");
        Self { dim, m: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.m[i][i] = 1.0;
        }
        t
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut t = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            t.m[i][i] = *v;
        }
        t
    }

    pub fn from_rows2(r: [[f64; 2]; 2]) -> Self {
        let mut t = Self::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                t.m[i][j] = r[i][j];
            }
        }
        t
    }

    pub fn from_rows3(r: [[f64; 3]; 3]) -> Self {
        Self { dim: 3, m: r }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                t.m[i][j] = f(i, j);
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.m[j][i])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.m[i][i]).sum()
    }

    /// Double contraction `A : B = A_ij B_ij`.
    pub fn ddot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.m[i][j] * other.m[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    pub fn sym(&self) -> Self {
        Self::from_fn(self.dim, |i, j| 0.5 * (self.m[i][j] + self.m[j][i]))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut a = 0.0_f64;
        for i in 0..self.dim {
            for j in 0..i {
                a = a.max((self.m[i][j] - self.m[j][i]).abs());
            }
        }
        a
    }

    pub fn det(&self) -> f64 {
        det(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        inverse(self)
    }

    /// Embeds a 2×2 tensor into 3D with `a33` in the out-of-plane slot.
    pub fn embed(&self, a33: f64) -> Self {
        debug_assert_eq!(self.dim, 2);
        let mut t = Self { dim: 3, m: self.m };
        t.m[2][2] = a33;
        t
    }

    /// The leading 2×2 block.
    pub fn in_plane(&self) -> Self {
        Self::from_fn(2, |i, j| self.m[i][j])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(self.dim, |i, j| f(self.m[i][j]))
    }
}

impl Index<(usize, usize)> for Tensor2 {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for Tensor2 {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.m[i][j]
    }
}

impl Add for Tensor2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.m[i][j] + rhs.m[i][j])
    }
}

impl Sub for Tensor2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.m[i][j] - rhs.m[i][j])
    }
}

impl Neg for Tensor2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl AddAssign for Tensor2 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for Tensor2 {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Mul<f64> for Tensor2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|v| v * s)
    }
}

impl Mul<Tensor2> for f64 {
    type Output = Tensor2;
    fn mul(self, t: Tensor2) -> Tensor2 {
        t * self
    }
}

/// Single contraction (matrix product).
impl Mul for Tensor2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        Self::from_fn(d, |i, j| (0..d).map(|k| self.m[i][k] * rhs.m[k][j]).sum())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    a: [f64; 81],
}

#[inline]
fn idx(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "tensor dimension must be 2 or 3");
        Self { dim, a: [0.0; 81] }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        t.a[idx(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Fourth-order symmetric identity `𝕀 = I ⊙ I`.
    pub fn sym_identity(dim: usize) -> Self {
        odot(&Tensor2::identity(dim), &Tensor2::identity(dim))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.a[idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.a[idx(i, j, k, l)] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.a[idx(i, j, k, l)] += v;
    }

    /// `(𝔸 : B)_ij = 𝔸_ijkl B_kl`.
    pub fn ddot2(&self, b: &Tensor2) -> Tensor2 {
        let d = self.dim;
        Tensor2::from_fn(d, |i, j| {
            let mut s = 0.0;
            for k in 0..d {
                for l in 0..d {
                    s += self.get(i, j, k, l) * b[(k, l)];
                }
            }
            s
        })
    }

    /// `(B : 𝔸)_kl = B_ij 𝔸_ijkl`.
    pub fn left_ddot2(&self, b: &Tensor2) -> Tensor2 {
        let d = self.dim;
        Tensor2::from_fn(d, |k, l| {
            let mut s = 0.0;
            for i in 0..d {
                for j in 0..d {
                    s += b[(i, j)] * self.get(i, j, k, l);
                }
            }
            s
        })
    }

    /// `(𝔸 : 𝔹)_ijkl = 𝔸_ijmn 𝔹_mnkl`.
    pub fn ddot4(&self, b: &Tensor4) -> Tensor4 {
        let d = self.dim;
        Tensor4::from_fn(d, |i, j, k, l| {
            let mut s = 0.0;
            for m in 0..d {
                for n in 0..d {
                    s += self.get(i, j, m, n) * b.get(m, n, k, l);
                }
            }
            s
        })
    }

    pub fn norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Largest violation of `𝔸_ijkl = 𝔸_klij`.
    pub fn major_asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut m = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        m = m.max((self.get(i, j, k, l) - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        m
    }

    /// Largest violation of `𝔸_ijkl = 𝔸_jikl = 𝔸_ijlk`.
    pub fn minor_asymmetry(&self) -> f64 {
        let d = self.dim;
        let mut m = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = self.get(i, j, k, l);
                        m = m.max((v - self.get(j, i, k, l)).abs());
                        m = m.max((v - self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        m
    }

    /// Leading 2×2×2×2 block.
    pub fn in_plane(&self) -> Tensor4 {
        Tensor4::from_fn(2, |i, j, k, l| self.get(i, j, k, l))
    }

    pub fn scaled(&self, s: f64) -> Tensor4 {
        let mut t = self.clone();
        t.a.iter_mut().for_each(|v| *v *= s);
        t
    }
}

impl Add for &Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: &Tensor4) -> Tensor4 {
        let mut t = self.clone();
        t += rhs;
        t
    }
}

impl Sub for &Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: &Tensor4) -> Tensor4 {
        let mut t = self.clone();
        t -= rhs;
        t
    }
}

impl AddAssign<&Tensor4> for Tensor4 {
    fn add_assign(&mut self, rhs: &Tensor4) {
        debug_assert_eq!(self.dim, rhs.dim);
        self.a.iter_mut().zip(rhs.a.iter()).for_each(|(a, b)| *a += b);
    }
}

impl SubAssign<&Tensor4> for Tensor4 {
    fn sub_assign(&mut self, rhs: &Tensor4) {
        debug_assert_eq!(self.dim, rhs.dim);
        self.a.iter_mut().zip(rhs.a.iter()).for_each(|(a, b)| *a -= b);
    }
}

pub fn det(a: &Tensor2) -> f64 {
    let m = &a.m;
    match a.dim {
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

/// `det(I + M) − 1` from the invariants of `M`, accurate when `M` is small.
pub fn det_shifted(m: &Tensor2) -> f64 {
    let a = &m.m;
    let tr = m.trace();
    match m.dim {
        2 => tr + det(m),
        _ => {
            let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
                - a[1][2] * a[2][1];
            tr + minors + det(m)
        }
    }
}

/// Inverse by the adjugate. Fails when `|det A| <= 1e-14 ‖A‖^dim`.
pub fn inverse(a: &Tensor2) -> Result<Tensor2> {
    let d = det(a);
    let guard = 1e-14 * a.norm().powi(a.dim as i32);
    if !(d.abs() > guard) {
        return Err(Error::SingularTensor { det: d });
    }
    let m = &a.m;
    let inv = match a.dim {
        2 => Tensor2::from_rows2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]),
        _ => {
            let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
            Tensor2::from_rows3([
                [c(1, 2, 1, 2) / d, -c(0, 2, 1, 2) / d, c(0, 1, 1, 2) / d],
                [-c(1, 2, 0, 2) / d, c(0, 2, 0, 2) / d, -c(0, 1, 0, 2) / d],
                [c(1, 2, 0, 1) / d, -c(0, 2, 0, 1) / d, c(0, 1, 0, 1) / d],
            ])
        }
    };
    Ok(inv)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub i_c: f64,
    pub ii_c: f64,
    pub j: f64,
}

/// First and second invariants and volume ratio of a right Cauchy–Green
/// tensor. The second invariant uses `½[(tr C)² + tr C²]`.
pub fn invariants(c: &Tensor2) -> Result<Invariants> {
    let d = det(c);
    if !(d > 0.0) {
        return Err(Error::NonSpd { det: d });
    }
    let tr = c.trace();
    let tr_sq = (*c * *c).trace();
    Ok(Invariants { i_c: tr, ii_c: 0.5 * (tr * tr + tr_sq), j: d.sqrt() })
}

/// Invariants of the unimodular part `Ĉ = J^{-2/dim} C`.
pub fn iso_invariants(c: &Tensor2) -> Result<Invariants> {
    let inv = invariants(c)?;
    let s = inv.j.powf(-2.0 / c.dim as f64);
    Ok(Invariants { i_c: s * inv.i_c, ii_c: s * s * inv.ii_c, j: 1.0 })
}

/// Multiplicative split `F = J^{1/dim} F̂` with `det F̂ = 1`.
pub fn iso_split(f: &Tensor2) -> Result<(f64, Tensor2)> {
    let j = det(f);
    if !(j > 0.0) {
        return Err(Error::InvertedElement { det: j });
    }
    Ok((j, *f * j.powf(-1.0 / f.dim as f64)))
}

/// `[A ⊗ B]_ijkl = A_ij B_kl`.
pub fn otimes(a: &Tensor2, b: &Tensor2) -> Tensor4 {
    assert_eq!(a.dim, b.dim);
    Tensor4::from_fn(a.dim, |i, j, k, l| a[(i, j)] * b[(k, l)])
}

/// `[A ⊙ B]_ijkl = ½[A_ik B_jl + A_il B_jk]`.
pub fn odot(a: &Tensor2, b: &Tensor2) -> Tensor4 {
    assert_eq!(a.dim, b.dim);
    Tensor4::from_fn(a.dim, |i, j, k, l| 0.5 * (a[(i, k)] * b[(j, l)] + a[(i, l)] * b[(j, k)]))
}

/// Spatial tangent `𝕔_ijkl = J⁻¹ F_iI F_jJ F_kK F_lL ℂ_IJKL`.
pub fn push_forward_tangent(f: &Tensor2, cc: &Tensor4) -> Result<Tensor4> {
    let j = det(f);
    if !(j > 0.0) {
        return Err(Error::InvertedElement { det: j });
    }
    let d = f.dim;
    // Contract one index at a time: O(d^5) rather than O(d^8).
    let mut t1 = Tensor4::zeros(d);
    let mut t2 = Tensor4::zeros(d);
    for a in 0..d {
        for jj in 0..d {
            for k in 0..d {
                for l in 0..d {
                    t1.set(a, jj, k, l, (0..d).map(|m| f[(a, m)] * cc.get(m, jj, k, l)).sum());
                }
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            for k in 0..d {
                for l in 0..d {
                    t2.set(a, b, k, l, (0..d).map(|m| f[(b, m)] * t1.get(a, m, k, l)).sum());
                }
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for l in 0..d {
                    t1.set(a, b, c, l, (0..d).map(|m| f[(c, m)] * t2.get(a, b, m, l)).sum());
                }
            }
        }
    }
    let inv_j = 1.0 / j;
    Ok(Tensor4::from_fn(d, |a, b, c, e| inv_j * (0..d).map(|m| f[(e, m)] * t1.get(a, b, c, m)).sum::<f64>()))
}
