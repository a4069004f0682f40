//! Band-limited Fourier fields of forms on T^n = R^n/(2πZ)^n with unit volume.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{binomial, interior_table, wedge_table, Form};
use crate::sample::normal_vec;

/// A real k-form field with modes ‖m‖∞ ≤ N, stored over the full box.
///
/// Layout: `coeffs[mode * C(n,k) + component]`, where the mode index is
/// Σ (m_i + N)(2N+1)^{n−1−i}. Reality means coeff(−m) = conj(coeff(m)).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierForm {
    n: usize,
    degree: usize,
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl FourierForm {
    pub fn zeros(n: usize, degree: usize, cutoff: usize) -> Self {
        let modes = (2 * cutoff + 1).pow(n as u32);
        FourierForm { n, degree, cutoff, coeffs: vec![Complex64::new(0.0, 0.0); modes * binomial(n, degree)] }
    }

    /// The constant field equal to `form`.
    pub fn constant(form: &Form, cutoff: usize) -> Self {
        let mut f = Self::zeros(form.dim(), form.degree(), cutoff);
        let c = f.center();
        let nc = f.ncomp();
        for (i, &x) in form.re().iter().enumerate() {
            f.coeffs[c * nc + i] = Complex64::new(x, 0.0);
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn ncomp(&self) -> usize {
        binomial(self.n, self.degree)
    }

    pub fn nmodes(&self) -> usize {
        (2 * self.cutoff + 1).pow(self.n as u32)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Index of the zero mode.
    pub fn center(&self) -> usize {
        (self.nmodes() - 1) / 2
    }

    pub fn wavevector(&self, mode: usize) -> Vec<i64> {
        wavevector(self.n, self.cutoff, mode)
    }

    pub fn mode_index(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.n {
            return None;
        }
        let k = 2 * self.cutoff as i64 + 1;
        let mut idx = 0i64;
        for &mi in m {
            if mi.unsigned_abs() as usize > self.cutoff {
                return None;
            }
            idx = idx * k + mi + self.cutoff as i64;
        }
        Some(idx as usize)
    }

    /// Coefficient at wavevector m and sorted 1-based multi-index.
    pub fn coeff(&self, m: &[i64], idx: &[usize]) -> Option<Complex64> {
        let mode = self.mode_index(m)?;
        let pos = component_index(self.n, idx)?;
        Some(self.coeffs[mode * self.ncomp() + pos])
    }

    /// Sets coefficient (m, I) and its conjugate partner (−m, I).
    pub fn set_coeff(&mut self, m: &[i64], idx: &[usize], z: Complex64) -> Result<()> {
        let mode = self
            .mode_index(m)
            .ok_or_else(|| Error::Precondition(format!("wavevector {m:?} outside the band")))?;
        let pos = component_index(self.n, idx)
            .ok_or_else(|| Error::degree(format!("multi-index {idx:?} is not a sorted {}-index", self.degree)))?;
        let nc = self.ncomp();
        let neg = self.nmodes() - 1 - mode;
        if neg == mode && z.im != 0.0 {
            return Err(Error::Precondition("zero mode must be real".into()));
        }
        self.coeffs[mode * nc + pos] = z;
        self.coeffs[neg * nc + pos] = z.conj();
        Ok(())
    }

    pub fn constant_part(&self) -> Form {
        let c = self.center();
        let nc = self.ncomp();
        let re = self.coeffs[c * nc..(c + 1) * nc].iter().map(|z| z.re).collect();
        Form::from_real(self.n, self.degree, re).expect("sizes match")
    }

    /// Largest |coeff(m) − conj(coeff(−m))|.
    pub fn reality_defect(&self) -> f64 {
        let nc = self.ncomp();
        let nm = self.nmodes();
        let mut worst: f64 = 0.0;
        for mode in 0..nm {
            let neg = nm - 1 - mode;
            for c in 0..nc {
                worst = worst.max((self.coeffs[mode * nc + c] - self.coeffs[neg * nc + c].conj()).norm());
            }
        }
        worst
    }

    /// L² norm over the unit-volume torus (Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm of the non-constant modes.
    pub fn oscillation_norm(&self) -> f64 {
        let c = self.center();
        let nc = self.ncomp();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| i / nc != c)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Real L² inner product ∫⟨a, b⟩.
    pub fn inner(&self, other: &FourierForm) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn scale(&self, t: f64) -> FourierForm {
        let mut f = self.clone();
        f.coeffs.iter_mut().for_each(|z| *z *= t);
        f
    }

    pub fn axpy(&mut self, t: f64, other: &FourierForm) {
        assert!(self.n == other.n && self.degree == other.degree && self.cutoff == other.cutoff);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * t;
        }
    }

    /// Random real field with standard normal coefficients on the non-zero modes.
    pub fn random<R: Rng>(rng: &mut R, n: usize, degree: usize, cutoff: usize) -> Self {
        let mut f = Self::zeros(n, degree, cutoff);
        let nc = f.ncomp();
        let nm = f.nmodes();
        let c = f.center();
        for mode in c + 1..nm {
            let v = normal_vec(rng, 2 * nc);
            let neg = nm - 1 - mode;
            for j in 0..nc {
                let z = Complex64::new(v[2 * j], v[2 * j + 1]);
                f.coeffs[mode * nc + j] = z;
                f.coeffs[neg * nc + j] = z.conj();
            }
        }
        f
    }

    /// Independent real coordinates: (Re, Im) of every component on modes with index above the centre.
    pub fn to_coordinates(&self) -> Vec<f64> {
        let nc = self.ncomp();
        let mut out = Vec::with_capacity(self.nmodes() * nc);
        for mode in self.center() + 1..self.nmodes() {
            for j in 0..nc {
                let z = self.coeffs[mode * nc + j];
                out.push(z.re);
                out.push(z.im);
            }
        }
        out
    }

    /// Inverse of [`to_coordinates`](Self::to_coordinates); the zero mode is set to 0.
    pub fn from_coordinates(n: usize, degree: usize, cutoff: usize, x: &[f64]) -> Result<Self> {
        let mut f = Self::zeros(n, degree, cutoff);
        let nc = f.ncomp();
        let nm = f.nmodes();
        let c = f.center();
        if x.len() != 2 * nc * (nm - 1 - c) {
            return Err(Error::dim(format!("expected {} coordinates, got {}", 2 * nc * (nm - 1 - c), x.len())));
        }
        for (k, mode) in (c + 1..nm).enumerate() {
            let neg = nm - 1 - mode;
            for j in 0..nc {
                let z = Complex64::new(x[2 * (k * nc + j)], x[2 * (k * nc + j) + 1]);
                f.coeffs[mode * nc + j] = z;
                f.coeffs[neg * nc + j] = z.conj();
            }
        }
        Ok(f)
    }

    /// Samples on the uniform G^n grid, layout `[point][component]`.
    pub fn to_grid(&self, g: usize) -> Vec<f64> {
        band_to_grid(self.n, self.cutoff, g, self.ncomp(), &self.coeffs)
    }

    /// Band-limited projection of grid samples (grid DFT restricted to ‖m‖∞ ≤ N).
    pub fn from_grid(n: usize, degree: usize, cutoff: usize, g: usize, values: &[f64]) -> Self {
        let nc = binomial(n, degree);
        FourierForm { n, degree, cutoff, coeffs: grid_to_band(n, cutoff, g, nc, values) }
    }
}

pub(crate) fn wavevector(n: usize, cutoff: usize, mode: usize) -> Vec<i64> {
    let k = 2 * cutoff + 1;
    let mut m = vec![0i64; n];
    let mut r = mode;
    for i in (0..n).rev() {
        m[i] = (r % k) as i64 - cutoff as i64;
        r /= k;
    }
    m
}

fn component_index(n: usize, idx: &[usize]) -> Option<usize> {
    if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i == 0 || i > n) {
        return None;
    }
    let mask = idx.iter().fold(0u32, |m, &i| m | (1 << (i - 1)));
    Some(crate::exterior::mask_position(n, mask))
}

/// d: mode m of dF is i·m ∧ F̂(m).
pub fn exterior_derivative(f: &FourierForm) -> Result<FourierForm> {
    if f.degree >= f.n {
        return Err(Error::degree(format!("d of a degree-{} form on T^{}", f.degree, f.n)));
    }
    let (n, k) = (f.n, f.degree);
    let nc_in = f.ncomp();
    let mut out = FourierForm::zeros(n, k + 1, f.cutoff);
    let nc_out = out.ncomp();
    let tab = &wedge_table(n, 1, k).entries;
    for mode in 0..f.nmodes() {
        let m = f.wavevector(mode);
        let src = &f.coeffs[mode * nc_in..(mode + 1) * nc_in];
        let dst = &mut out.coeffs[mode * nc_out..(mode + 1) * nc_out];
        for &(i, ia, o, s) in tab {
            let mi = m[i as usize];
            if mi != 0 {
                let z = src[ia as usize];
                dst[o as usize] += Complex64::new(-z.im, z.re) * (s * mi as f64);
            }
        }
    }
    Ok(out)
}

/// L² adjoint of d: mode m gets −i·ι(m) F̂(m).
pub fn codifferential(f: &FourierForm) -> Result<FourierForm> {
    if f.degree == 0 {
        return Err(Error::degree("adjoint of d on functions"));
    }
    let (n, k) = (f.n, f.degree);
    let nc_in = f.ncomp();
    let mut out = FourierForm::zeros(n, k - 1, f.cutoff);
    let nc_out = out.ncomp();
    let tab = interior_table(n, k);
    for mode in 0..f.nmodes() {
        let m = f.wavevector(mode);
        let src = &f.coeffs[mode * nc_in..(mode + 1) * nc_in];
        let dst = &mut out.coeffs[mode * nc_out..(mode + 1) * nc_out];
        for &(ia, i, o, s) in tab {
            let mi = m[i as usize];
            if mi != 0 {
                let z = src[ia as usize];
                dst[o as usize] += Complex64::new(z.im, -z.re) * (s * mi as f64);
            }
        }
    }
    Ok(out)
}

fn fwd_matrix(cutoff: usize, g: usize) -> Vec<Complex64> {
    let k = 2 * cutoff + 1;
    let mut m = Vec::with_capacity(k * g);
    for a in 0..k {
        let freq = a as f64 - cutoff as f64;
        for j in 0..g {
            let t = -std::f64::consts::TAU * freq * j as f64 / g as f64;
            m.push(Complex64::from_polar(1.0 / g as f64, t));
        }
    }
    m
}

fn inv_matrix(cutoff: usize, g: usize) -> Vec<Complex64> {
    let k = 2 * cutoff + 1;
    let mut m = Vec::with_capacity(k * g);
    for j in 0..g {
        for a in 0..k {
            let freq = a as f64 - cutoff as f64;
            let t = std::f64::consts::TAU * freq * j as f64 / g as f64;
            m.push(Complex64::from_polar(1.0, t));
        }
    }
    m
}

/// Applies `mat` (out_len × in_len) along `axis` of an array with shape `dims` and an inner batch `c`.
fn transform_axis<I: Copy, O: Copy>(
    data: &[I],
    dims: &mut [usize],
    axis: usize,
    c: usize,
    mat: &[Complex64],
    out_len: usize,
    cin: impl Fn(I) -> Complex64,
    cout: impl Fn(Complex64) -> O,
) -> Vec<O> {
    let in_len = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product::<usize>() * c;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(outer * out_len * inner);
    let mut acc = vec![zero; inner];
    for o in 0..outer {
        for k in 0..out_len {
            acc.iter_mut().for_each(|z| *z = zero);
            for j in 0..in_len {
                let w = mat[k * in_len + j];
                let src = &data[(o * in_len + j) * inner..(o * in_len + j + 1) * inner];
                for (a, &s) in acc.iter_mut().zip(src) {
                    *a += w * cin(s);
                }
            }
            out.extend(acc.iter().map(|&z| cout(z)));
        }
    }
    dims[axis] = out_len;
    out
}

/// Band coefficients → real grid samples.
pub(crate) fn band_to_grid(n: usize, cutoff: usize, g: usize, c: usize, coeffs: &[Complex64]) -> Vec<f64> {
    let k = 2 * cutoff + 1;
    let mat = inv_matrix(cutoff, g);
    let mut dims = vec![k; n];
    if n == 1 {
        return transform_axis(coeffs, &mut dims, 0, c, &mat, g, |z| z, |z| z.re);
    }
    let mut cur = transform_axis(coeffs, &mut dims, 0, c, &mat, g, |z| z, |z| z);
    for axis in 1..n - 1 {
        cur = transform_axis(&cur, &mut dims, axis, c, &mat, g, |z| z, |z| z);
    }
    transform_axis(&cur, &mut dims, n - 1, c, &mat, g, |z| z, |z| z.re)
}

/// Real grid samples → band coefficients (grid DFT, aliases included, truncated to the band).
pub(crate) fn grid_to_band(n: usize, cutoff: usize, g: usize, c: usize, values: &[f64]) -> Vec<Complex64> {
    let k = 2 * cutoff + 1;
    let mat = fwd_matrix(cutoff, g);
    let mut dims = vec![g; n];
    // the last axis first so that the real input is read once
    let mut cur = transform_axis(values, &mut dims, n - 1, c, &mat, k, |x| Complex64::new(x, 0.0), |z| z);
    for axis in (0..n - 1).rev() {
        cur = transform_axis(&cur, &mut dims, axis, c, &mat, k, |z| z, |z| z);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::rng;

    #[test]
    fn grid_roundtrip() {
        let mut r = rng(1, 0);
        let f = FourierForm::random(&mut r, 3, 1, 2);
        let g = f.to_grid(7);
        let back = FourierForm::from_grid(3, 1, 2, 7, &g);
        let err = f.coeffs().iter().zip(back.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(back.reality_defect() < 1e-12);
    }

    #[test]
    fn sin_x1_dx2() {
        // sin(x1) = (e^{ix1} − e^{−ix1})/(2i)
        let mut f = FourierForm::zeros(6, 1, 1);
        f.set_coeff(&[1, 0, 0, 0, 0, 0], &[2], Complex64::new(0.0, -0.5)).unwrap();
        let df = exterior_derivative(&f).unwrap();
        // cos(x1) dx1∧dx2: coefficient 1/2 at ±e1
        let z = df.coeff(&[1, 0, 0, 0, 0, 0], &[1, 2]).unwrap();
        assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let z = df.coeff(&[-1, 0, 0, 0, 0, 0], &[1, 2]).unwrap();
        assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((df.l2_norm() - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn d_squared_and_adjoint() {
        let mut r = rng(2, 0);
        let b = FourierForm::random(&mut r, 6, 2, 2);
        let ddb = exterior_derivative(&exterior_derivative(&b).unwrap()).unwrap();
        assert!(ddb.l2_norm() < 1e-13 * b.l2_norm());
        let c = FourierForm::random(&mut r, 6, 3, 2);
        let lhs = exterior_derivative(&b).unwrap().inner(&c);
        let rhs = b.inner(&codifferential(&c).unwrap());
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn constant_has_zero_derivative() {
        let f = FourierForm::constant(&crate::forms6::phi_c(), 1);
        assert_eq!(exterior_derivative(&f).unwrap().l2_norm(), 0.0);
        assert_eq!(f.constant_part(), crate::forms6::phi_c());
    }

    #[test]
    fn coordinates_roundtrip() {
        let mut r = rng(3, 0);
        let f = FourierForm::random(&mut r, 6, 2, 1);
        let x = f.to_coordinates();
        assert_eq!(FourierForm::from_coordinates(6, 2, 1, &x).unwrap(), f);
    }
}
