//! Pointwise nonlinear maps used on the torus grid, generic over a scalar so
//! that forward-mode derivatives come from the same code.
//!
//! 6D: Ω̂ = ρ(κ)Ω / (3φ), with κ the K-matrix and φ = √(−λ).
//! 7D: Θ = ∗Ω = 3s·Γ, where dφ(e_A) = [e_A ∧ Γ], Γ = −(φ/54)(Ξ + 2Ψ),
//!     Ξ = Σ b⁻¹_{wv} ι_vΩ∧ι_wΩ, Ψ = Σ b⁻¹_{wv} ι_v(ι_wΩ∧Ω), and s the orientation.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::exterior::{basis_masks, interior_table, wedge_sign, wedge_table};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn c(x: f64) -> Self;
    fn val(self) -> f64;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn scale(self, t: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn c(x: f64) -> Self {
        x
    }
    #[inline]
    fn val(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    #[inline]
    fn scale(self, t: f64) -> Self {
        self * t
    }
}

/// First-order dual number v + d·δ.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.v * o.d + self.d * o.v)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        let q = self.v / o.v;
        Dual::new(q, (self.d - q * o.d) / o.v)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, o: Dual) {
        self.v += o.v;
        self.d += o.d;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, o: Dual) {
        self.v -= o.v;
        self.d -= o.d;
    }
}

impl Scalar for Dual {
    #[inline]
    fn c(x: f64) -> Self {
        Dual::new(x, 0.0)
    }
    #[inline]
    fn val(self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        Dual::new(r, self.d / (2.0 * r))
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        let r = self.v.powf(p);
        Dual::new(r, p * r / self.v * self.d)
    }
    #[inline]
    fn scale(self, t: f64) -> Self {
        Dual::new(self.v * t, self.d * t)
    }
}

#[inline]
fn wedge_acc<T: Scalar>(n: usize, p: usize, q: usize, a: &[T], b: &[T], out: &mut [T]) {
    for &(ia, ib, o, s) in &wedge_table(n, p, q).entries {
        let t = a[ia as usize] * b[ib as usize];
        if s > 0.0 {
            out[o as usize] += t;
        } else {
            out[o as usize] -= t;
        }
    }
}

/// ι(w_i) a for every basis vector at once: out[i] has C(n, k−1) entries.
#[inline]
fn interior_all<T: Scalar, const M: usize>(n: usize, k: usize, a: &[T], out: &mut [[T; M]]) {
    for &(ia, i, o, s) in interior_table(n, k) {
        let x = a[ia as usize];
        if s > 0.0 {
            out[i as usize][o as usize] += x;
        } else {
            out[i as usize][o as usize] -= x;
        }
    }
}

/// Reasons a grid point falls outside the open orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointFailure {
    NotNegative(f64),
    NotDefinite,
}

/// κ_{ji} = [θ_j ∧ ι(w_i)Ω ∧ Ω].
pub fn kappa6<T: Scalar>(o: &[T; 20]) -> [[T; 6]; 6] {
    let z = T::c(0.0);
    let mut io = [[z; 15]; 6];
    interior_all(6, 3, o, &mut io);
    let masks5 = basis_masks(6, 5);
    let mut k = [[z; 6]; 6];
    for i in 0..6 {
        let mut eta = [z; 6];
        wedge_acc(6, 2, 3, &io[i], o, &mut eta);
        for (p, &m) in masks5.iter().enumerate() {
            let j = (!m & 0x3f).trailing_zeros() as usize;
            k[j][i] = if wedge_sign(1 << j, m) > 0.0 { eta[p] } else { -eta[p] };
        }
    }
    k
}

/// ρ(a)Ω = Σ_i (Σ_j a_ij θ_j) ∧ ι(w_i)Ω on 3-forms in R^6.
pub fn rho6<T: Scalar>(a: &[[T; 6]; 6], o: &[T; 20]) -> [T; 20] {
    let z = T::c(0.0);
    let mut io = [[z; 15]; 6];
    interior_all(6, 3, o, &mut io);
    let mut out = [z; 20];
    for i in 0..6 {
        wedge_acc(6, 1, 2, &a[i], &io[i], &mut out);
    }
    out
}

/// (Ω̂, φ) at a point with λ < −band; `band` is the absolute dead-band on λ.
pub fn hat6<T: Scalar>(o: &[T; 20], band: f64) -> Result<([T; 20], T), PointFailure> {
    let k = kappa6(o);
    let mut tr = T::c(0.0);
    for i in 0..6 {
        for j in 0..6 {
            tr += k[i][j] * k[j][i];
        }
    }
    let lambda = tr.scale(1.0 / 6.0);
    if lambda.val() >= -band {
        return Err(PointFailure::NotNegative(lambda.val()));
    }
    let phi = (-lambda).sqrt();
    let r = rho6(&k, o);
    let den = phi.scale(3.0);
    let mut h = [T::c(0.0); 20];
    for a in 0..20 {
        h[a] = r[a] / den;
    }
    Ok((h, phi))
}

/// φ = √(−λ) at a point.
pub fn phi6(o: &[f64; 20]) -> f64 {
    let k = kappa6(o);
    let mut tr = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            tr += k[i][j] * k[j][i];
        }
    }
    (-tr / 6.0).sqrt()
}

/// (Θ, φ) at a point in the positive orbit. `band` is relative to ‖Ω‖³ on the Cholesky pivots.
pub fn theta7<T: Scalar>(o: &[T; 35], band: f64) -> Result<([T; 35], T), PointFailure> {
    let z = T::c(0.0);
    let mut io = [[z; 21]; 7];
    interior_all(7, 3, o, &mut io);
    let mut eta = [[z; 21]; 7];
    for w in 0..7 {
        wedge_acc(7, 2, 3, &io[w], o, &mut eta[w]);
    }
    // b_vw = −(1/6)[ι_vΩ ∧ η_w]; the 2∧5 → 7 table has a single output
    let tab = &wedge_table(7, 2, 5).entries;
    let mut b = [[z; 7]; 7];
    for v in 0..7 {
        for w in v..7 {
            let mut t = z;
            for &(ia, ib, _, s) in tab {
                let x = io[v][ia as usize] * eta[w][ib as usize];
                if s > 0.0 {
                    t += x;
                } else {
                    t -= x;
                }
            }
            b[v][w] = t.scale(-1.0 / 6.0);
            b[w][v] = b[v][w];
        }
    }
    let s = if b[0][0].val() > 0.0 { 1.0 } else { -1.0 };
    let scale: f64 = o.iter().map(|x| x.val() * x.val()).sum::<f64>().powf(1.5);
    // Cholesky of s·b
    let mut l = [[z; 7]; 7];
    let mut logdet_terms = [z; 7];
    for j in 0..7 {
        let mut d = b[j][j].scale(s);
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d.val() <= band * scale {
            return Err(PointFailure::NotDefinite);
        }
        let dj = d.sqrt();
        l[j][j] = dj;
        logdet_terms[j] = d;
        for i in j + 1..7 {
            let mut x = b[i][j].scale(s);
            for k in 0..j {
                x -= l[i][k] * l[j][k];
            }
            l[i][j] = x / dj;
        }
    }
    let mut det = T::c(1.0);
    for d in logdet_terms {
        det = det * d;
    }
    let phi = det.powf(1.0 / 9.0);
    // (s·b)⁻¹ column by column
    let mut binv = [[z; 7]; 7];
    for c in 0..7 {
        let mut y = [z; 7];
        for i in 0..7 {
            let mut x = if i == c { T::c(1.0) } else { z };
            for k in 0..i {
                x -= l[i][k] * y[k];
            }
            y[i] = x / l[i][i];
        }
        for i in (0..7).rev() {
            let mut x = y[i];
            for k in i + 1..7 {
                x -= l[k][i] * binv[k][c];
            }
            binv[i][c] = x / l[i][i];
        }
    }
    // b⁻¹ = s·(s·b)⁻¹
    let mut xi = [z; 35];
    let mut psi5 = [[z; 21]; 7];
    for v in 0..7 {
        let mut chi = [z; 21];
        for w in 0..7 {
            let c = binv[w][v].scale(s);
            for p in 0..21 {
                chi[p] += c * io[w][p];
                psi5[v][p] += c * eta[w][p];
            }
        }
        wedge_acc(7, 2, 2, &io[v], &chi, &mut xi);
    }
    let mut psi = [z; 35];
    for &(ia, i, o_, sg) in interior_table(7, 5) {
        let x = psi5[i as usize][ia as usize];
        if sg > 0.0 {
            psi[o_ as usize] += x;
        } else {
            psi[o_ as usize] -= x;
        }
    }
    let f = phi.scale(-3.0 * s / 54.0);
    let mut theta = [z; 35];
    for a in 0..35 {
        theta[a] = f * (xi[a] + psi[a].scale(2.0));
    }
    Ok((theta, phi))
}

/// φ = |det b|^{1/9} at a point.
pub fn phi7(o: &[f64; 35]) -> Result<f64, PointFailure> {
    theta7(o, 0.0).map(|(_, p)| p)
}

pub fn dual_lift<const M: usize>(x: &[f64; M], dx: &[f64; M]) -> [Dual; M] {
    let mut out = [Dual::default(); M];
    for i in 0..M {
        out[i] = Dual::new(x[i], dx[i]);
    }
    out
}

pub fn tangent<const M: usize>(x: &[Dual; M]) -> [f64; M] {
    let mut out = [0.0; M];
    for i in 0..M {
        out[i] = x[i].d;
    }
    out
}

pub fn value<const M: usize>(x: &[Dual; M]) -> [f64; M] {
    let mut out = [0.0; M];
    for i in 0..M {
        out[i] = x[i].v;
    }
    out
}

/// Signed permutation P with [a ∧ b] = aᵀ P b for a ∈ Λ^k, b ∈ Λ^{n−k}: entries (row, col, sign).
pub fn top_pairing(n: usize, k: usize) -> Vec<(usize, usize, f64)> {
    let full = (1u32 << n) - 1;
    let masks = basis_masks(n, k);
    masks
        .iter()
        .enumerate()
        .map(|(a, &m)| {
            let comp = full & !m;
            (a, crate::exterior::mask_position(n, comp), wedge_sign(m, comp))
        })
        .collect()
}
