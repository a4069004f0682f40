//! Alternating forms on R^n with a dense lexicographic basis.
//!
//! Basis elements are stored internally as bitmasks, so `n` is limited to
//! [`MAX_DIM`]. Externally indices are 1-based (`θ1 .. θn`).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

struct DimTables {
    masks: Vec<Vec<u32>>,
    pos: Vec<usize>,
}

fn tables(n: usize) -> &'static DimTables {
    static T: OnceLock<Vec<DimTables>> = OnceLock::new();
    let all = T.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|n| {
                let mut masks = vec![Vec::new(); n + 1];
                let mut pos = vec![0usize; 1 << n];
                // lexicographic order on sorted index tuples
                for k in 0..=n {
                    let mut cur: Vec<usize> = (0..k).collect();
                    loop {
                        let m = cur.iter().fold(0u32, |m, &i| m | (1 << i));
                        pos[m as usize] = masks[k].len();
                        masks[k].push(m);
                        let mut i = k;
                        let mut advanced = false;
                        while i > 0 {
                            i -= 1;
                            if cur[i] < n - k + i {
                                cur[i] += 1;
                                for j in i + 1..k {
                                    cur[j] = cur[j - 1] + 1;
                                }
                                advanced = true;
                                break;
                            }
                        }
                        if !advanced {
                            break;
                        }
                    }
                }
                DimTables { masks, pos }
            })
            .collect()
    });
    &all[n]
}

/// Bitmasks of the degree-`k` basis of Λ^k(R^n)*, in lexicographic order.
pub fn basis_masks(n: usize, k: usize) -> &'static [u32] {
    &tables(n).masks[k]
}

/// Position of a basis mask within its degree.
#[inline]
pub fn mask_position(n: usize, mask: u32) -> usize {
    tables(n).pos[mask as usize]
}

/// Sign of moving the indices of `b` past those of `a` into sorted order,
/// i.e. θ_a ∧ θ_b = sign · θ_{a|b}. Zero if they overlap.
#[inline]
pub fn wedge_sign(a: u32, b: u32) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Precomputed structure constants for Λ^p × Λ^q → Λ^{p+q}.
pub struct WedgeTable {
    pub entries: Vec<(u16, u16, u16, f64)>,
}

/// Cached wedge table for degrees (p, q) in dimension n.
pub fn wedge_table(n: usize, p: usize, q: usize) -> &'static WedgeTable {
    static T: OnceLock<Vec<WedgeTable>> = OnceLock::new();
    let all = T.get_or_init(|| {
        let mut v = Vec::new();
        for n in 0..=MAX_DIM {
            for p in 0..=MAX_DIM {
                for q in 0..=MAX_DIM {
                    let mut entries = Vec::new();
                    if n <= MAX_DIM && p + q <= n {
                        for (ia, &ma) in basis_masks(n, p).iter().enumerate() {
                            for (ib, &mb) in basis_masks(n, q).iter().enumerate() {
                                if ma & mb == 0 {
                                    entries.push((
                                        ia as u16,
                                        ib as u16,
                                        mask_position(n, ma | mb) as u16,
                                        wedge_sign(ma, mb),
                                    ));
                                }
                            }
                        }
                    }
                    v.push(WedgeTable { entries });
                }
            }
        }
        v
    });
    let s = MAX_DIM + 1;
    &all[(n * s + p) * s + q]
}

/// Interior product table for degree k: (source, vector axis, target, sign).
pub fn interior_table(n: usize, k: usize) -> &'static [(u16, u8, u16, f64)] {
    static T: OnceLock<Vec<Vec<(u16, u8, u16, f64)>>> = OnceLock::new();
    let all = T.get_or_init(|| {
        let mut v = Vec::new();
        for n in 0..=MAX_DIM {
            for k in 0..=MAX_DIM {
                let mut e = Vec::new();
                if k >= 1 && k <= n {
                    for (ia, &m) in basis_masks(n, k).iter().enumerate() {
                        for i in mask_indices(m) {
                            let below = (m & ((1u32 << i) - 1)).count_ones();
                            let s = if below % 2 == 0 { 1.0 } else { -1.0 };
                            e.push((ia as u16, i as u8, mask_position(n, m & !(1 << i)) as u16, s));
                        }
                    }
                }
                v.push(e);
            }
        }
        v
    });
    &all[n * (MAX_DIM + 1) + k]
}

/// Strictly increasing 1-based multi-index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.iter().any(|&i| i == 0) {
            return Err(Error::Parse("multi-index entries are 1-based".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parse(format!("multi-index {indices:?} is not strictly increasing")));
        }
        Ok(MultiIndex(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mask(&self) -> u32 {
        self.0.iter().fold(0, |m, &i| m | (1 << (i - 1)))
    }

    pub fn from_mask(mask: u32) -> Self {
        MultiIndex(mask_indices(mask).into_iter().map(|i| i + 1).collect())
    }
}

/// All multi-indices of degree k in dimension n, in storage order.
pub fn basis(n: usize, k: usize) -> Vec<MultiIndex> {
    basis_masks(n, k).iter().map(|&m| MultiIndex::from_mask(m)).collect()
}

/// A k-form on R^n, real or complexified.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    dim: usize,
    degree: usize,
    re: Vec<f64>,
    im: Option<Vec<f64>>,
}

impl Form {
    pub fn zeros(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim, "form shape ({dim}, {degree}) out of range");
        Form { dim, degree, re: vec![0.0; binomial(dim, degree)], im: None }
    }

    pub fn from_real(dim: usize, degree: usize, re: Vec<f64>) -> Result<Self> {
        if dim > MAX_DIM || degree > dim {
            return Err(Error::degree(format!("degree {degree} in dimension {dim}")));
        }
        if re.len() != binomial(dim, degree) {
            return Err(Error::dim(format!(
                "expected {} coefficients, got {}",
                binomial(dim, degree),
                re.len()
            )));
        }
        Ok(Form { dim, degree, re, im: None })
    }

    pub fn from_complex(dim: usize, degree: usize, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        let mut f = Form::from_real(dim, degree, re)?;
        if im.len() != f.re.len() {
            return Err(Error::dim("real and imaginary parts differ in length"));
        }
        f.im = Some(im);
        Ok(f)
    }

    /// Real part `re` plus `i` times the real form `im`.
    pub fn complexify(re: &Form, im: &Form) -> Result<Self> {
        check_same(re, im)?;
        Form::from_complex(re.dim, re.degree, re.re.clone(), im.re.clone())
    }

    /// Build from 1-based index tuples in any order; repeated indices contribute zero.
    pub fn from_terms(dim: usize, degree: usize, terms: &[(&[usize], f64)]) -> Self {
        let mut f = Form::zeros(dim, degree);
        for (idx, c) in terms {
            assert_eq!(idx.len(), degree, "term degree mismatch");
            let (mask, sign) = sort_sign(idx);
            if sign != 0.0 {
                f.re[mask_position(dim, mask)] += sign * c;
            }
        }
        f
    }

    /// The single basis element θ_I for a 1-based multi-index.
    pub fn basis_element(dim: usize, idx: &[usize]) -> Self {
        Form::from_terms(dim, idx.len(), &[(idx, 1.0)])
    }

    /// The one-form Σ c_i θ_i.
    pub fn one_form(c: &[f64]) -> Self {
        Form { dim: c.len(), degree: 1, re: c.to_vec(), im: None }
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        Form { dim, degree: 0, re: vec![c], im: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn re_mut(&mut self) -> &mut [f64] {
        &mut self.re
    }

    pub fn im(&self) -> Option<&[f64]> {
        self.im.as_deref()
    }

    pub fn is_complex(&self) -> bool {
        self.im.is_some()
    }

    pub fn real_part(&self) -> Form {
        Form { dim: self.dim, degree: self.degree, re: self.re.clone(), im: None }
    }

    pub fn imag_part(&self) -> Form {
        let re = self.im.clone().unwrap_or_else(|| vec![0.0; self.re.len()]);
        Form { dim: self.dim, degree: self.degree, re, im: None }
    }

    pub fn conj(&self) -> Form {
        let mut f = self.clone();
        if let Some(im) = f.im.as_mut() {
            im.iter_mut().for_each(|x| *x = -*x);
        }
        f
    }

    /// Drop the imaginary part if it is exactly zero.
    pub fn simplify(mut self) -> Form {
        if self.im.as_ref().is_some_and(|im| im.iter().all(|&x| x == 0.0)) {
            self.im = None;
        }
        self
    }

    pub fn coeff(&self, idx: &[usize]) -> Complex64 {
        let (mask, sign) = sort_sign(idx);
        if sign == 0.0 || idx.len() != self.degree {
            return Complex64::new(0.0, 0.0);
        }
        let p = mask_position(self.dim, mask);
        let im = self.im.as_ref().map_or(0.0, |v| v[p]);
        Complex64::new(sign * self.re[p], sign * im)
    }

    pub fn coeff_at(&self, pos: usize) -> Complex64 {
        Complex64::new(self.re[pos], self.im.as_ref().map_or(0.0, |v| v[pos]))
    }

    /// Coefficient of θ1∧…∧θn (real part) for a top-degree form.
    pub fn top(&self) -> f64 {
        debug_assert_eq!(self.degree, self.dim);
        self.re[0]
    }

    pub fn top_complex(&self) -> Complex64 {
        self.coeff_at(0)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        let mut s: f64 = self.re.iter().map(|x| x * x).sum();
        if let Some(im) = &self.im {
            s += im.iter().map(|x| x * x).sum::<f64>();
        }
        s.sqrt()
    }

    pub fn scale(&self, t: f64) -> Form {
        let mut f = self.clone();
        f.re.iter_mut().for_each(|x| *x *= t);
        if let Some(im) = f.im.as_mut() {
            im.iter_mut().for_each(|x| *x *= t);
        }
        f
    }

    pub fn scale_complex(&self, z: Complex64) -> Form {
        let im0 = self.im.clone().unwrap_or_else(|| vec![0.0; self.re.len()]);
        let re: Vec<f64> = self.re.iter().zip(&im0).map(|(a, b)| z.re * a - z.im * b).collect();
        let im: Vec<f64> = self.re.iter().zip(&im0).map(|(a, b)| z.im * a + z.re * b).collect();
        Form { dim: self.dim, degree: self.degree, re, im: Some(im) }
    }

    pub fn axpy(&mut self, t: f64, other: &Form) {
        assert!(same_shape(self, other), "axpy on forms of different shape");
        self.re.iter_mut().zip(&other.re).for_each(|(a, b)| *a += t * b);
        if let Some(oim) = &other.im {
            let im = self.im.get_or_insert_with(|| vec![0.0; oim.len()]);
            im.iter_mut().zip(oim).for_each(|(a, b)| *a += t * b);
        }
    }

    /// Max-norm distance, counting imaginary parts.
    pub fn max_diff(&self, other: &Form) -> f64 {
        assert!(same_shape(self, other));
        let d = (self - other).simplify();
        let mut m = d.re.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(im) = &d.im {
            m = im.iter().fold(m, |m, x| m.max(x.abs()));
        }
        m
    }

    /// Nonzero terms as (1-based multi-index, coefficient).
    pub fn terms(&self) -> Vec<(MultiIndex, Complex64)> {
        basis_masks(self.dim, self.degree)
            .iter()
            .enumerate()
            .filter_map(|(p, &m)| {
                let c = self.coeff_at(p);
                (c.re != 0.0 || c.im != 0.0).then(|| (MultiIndex::from_mask(m), c))
            })
            .collect()
    }
}

fn sort_sign(idx: &[usize]) -> (u32, f64) {
    let mut mask = 0u32;
    let mut sign = 1.0;
    for &i in idx {
        assert!(i >= 1, "indices are 1-based");
        let b = 1u32 << (i - 1);
        if mask & b != 0 {
            return (0, 0.0);
        }
        if (mask >> i).count_ones() % 2 == 1 {
            sign = -sign;
        }
        mask |= b;
    }
    (mask, sign)
}

fn same_shape(a: &Form, b: &Form) -> bool {
    a.dim == b.dim && a.degree == b.degree
}

fn check_same(a: &Form, b: &Form) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::dim(format!("dimensions {} and {}", a.dim, b.dim)));
    }
    if a.degree != b.degree {
        return Err(Error::degree(format!("degrees {} and {}", a.degree, b.degree)));
    }
    Ok(())
}

impl Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        let mut f = self.clone();
        f.axpy(1.0, rhs);
        f
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        let mut f = self.clone();
        f.axpy(-1.0, rhs);
        f
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

impl AddAssign<&Form> for Form {
    fn add_assign(&mut self, rhs: &Form) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Form> for Form {
    fn sub_assign(&mut self, rhs: &Form) {
        self.axpy(-1.0, rhs);
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(-1.0)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(-1.0)
    }
}

impl Mul<&Form> for f64 {
    type Output = Form;
    fn mul(self, rhs: &Form) -> Form {
        rhs.scale(self)
    }
}

impl Mul<Form> for f64 {
    type Output = Form;
    fn mul(self, rhs: Form) -> Form {
        rhs.scale(self)
    }
}

/// Real wedge product on raw coefficient slices.
pub fn wedge_into(n: usize, p: usize, q: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    for &(ia, ib, o, s) in &wedge_table(n, p, q).entries {
        out[o as usize] += s * a[ia as usize] * b[ib as usize];
    }
}

pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    if a.dim != b.dim {
        return Err(Error::dim(format!("wedge of forms on R^{} and R^{}", a.dim, b.dim)));
    }
    let n = a.dim;
    let k = a.degree + b.degree;
    if k > n {
        return Err(Error::degree(format!("wedge degree {k} exceeds dimension {n}")));
    }
    let mut out = Form::zeros(n, k);
    wedge_into(n, a.degree, b.degree, &a.re, &b.re, &mut out.re);
    if a.im.is_some() || b.im.is_some() {
        let zero_a;
        let zero_b;
        let ai = match &a.im {
            Some(v) => v.as_slice(),
            None => {
                zero_a = vec![0.0; a.re.len()];
                &zero_a
            }
        };
        let bi = match &b.im {
            Some(v) => v.as_slice(),
            None => {
                zero_b = vec![0.0; b.re.len()];
                &zero_b
            }
        };
        let mut neg = vec![0.0; out.re.len()];
        wedge_into(n, a.degree, b.degree, ai, bi, &mut neg);
        out.re.iter_mut().zip(&neg).for_each(|(x, y)| *x -= y);
        let mut im = vec![0.0; out.re.len()];
        wedge_into(n, a.degree, b.degree, &a.re, bi, &mut im);
        wedge_into(n, a.degree, b.degree, ai, &b.re, &mut im);
        out.im = Some(im);
    }
    Ok(out)
}

/// Interior product on raw real coefficients.
pub fn interior_into(n: usize, k: usize, v: &[f64], a: &[f64], out: &mut [f64]) {
    for &(ia, i, o, s) in interior_table(n, k) {
        out[o as usize] += s * v[i as usize] * a[ia as usize];
    }
}

pub fn interior(v: &[f64], a: &Form) -> Result<Form> {
    if v.len() != a.dim {
        return Err(Error::dim(format!("vector of length {} on R^{}", v.len(), a.dim)));
    }
    if a.degree == 0 {
        return Err(Error::degree("interior product of a 0-form"));
    }
    let mut out = Form::zeros(a.dim, a.degree - 1);
    interior_into(a.dim, a.degree, v, &a.re, &mut out.re);
    if let Some(im) = &a.im {
        let mut o = vec![0.0; out.re.len()];
        interior_into(a.dim, a.degree, v, im, &mut o);
        out.im = Some(o);
    }
    Ok(out)
}

/// ι(w_i) for the i-th standard basis vector (0-based).
pub fn interior_basis(i: usize, a: &Form) -> Form {
    let mut v = vec![0.0; a.dim];
    v[i] = 1.0;
    interior(&v, a).expect("degree checked by caller")
}

/// Matrix of Λ^k A in the form basis: entry (I, J) = det A[I, J].
pub fn compound_matrix(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "compound of a non-square matrix");
    let dim = binomial(n, k);
    let mut m = DMatrix::zeros(dim, dim);
    if k == 0 {
        m[(0, 0)] = 1.0;
        return m;
    }
    // Build A*θ_I by successive wedges of pulled-back one-forms.
    let rows: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).iter().copied().collect()).collect();
    for (ii, &mask) in basis_masks(n, k).iter().enumerate() {
        let idx = mask_indices(mask);
        let mut acc = rows[idx[0]].clone();
        let mut deg = 1;
        for &i in &idx[1..] {
            let mut next = vec![0.0; binomial(n, deg + 1)];
            wedge_into(n, deg, 1, &acc, &rows[i], &mut next);
            acc = next;
            deg += 1;
        }
        for (jj, c) in acc.into_iter().enumerate() {
            m[(ii, jj)] = c;
        }
    }
    m
}

/// GL(n) action with A*θ_i = Σ_j A_ij θ_j, so pullback(AB, a) = pullback(B, pullback(A, a)).
pub fn pullback(a_mat: &DMatrix<f64>, a: &Form) -> Result<Form> {
    if a_mat.nrows() != a.dim || a_mat.ncols() != a.dim {
        return Err(Error::dim(format!(
            "{}x{} matrix acting on forms over R^{}",
            a_mat.nrows(),
            a_mat.ncols(),
            a.dim
        )));
    }
    let c = compound_matrix(a_mat, a.degree);
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (j, o) in out.iter_mut().enumerate() {
                    *o += xi * c[(i, j)];
                }
            }
        }
        out
    };
    let mut out = Form::zeros(a.dim, a.degree);
    out.re = apply(&a.re);
    out.im = a.im.as_ref().map(|im| apply(im));
    Ok(out)
}

/// Infinitesimal action ρ(a)Ω = Σ a_ij θ_j ∧ ι(w_i)Ω.
pub fn lie_action(a_mat: &DMatrix<f64>, omega: &Form) -> Result<Form> {
    let n = omega.dim;
    if a_mat.nrows() != n || a_mat.ncols() != n {
        return Err(Error::dim("Lie algebra element has the wrong size"));
    }
    if omega.degree == 0 {
        return Ok(Form::zeros(n, 0));
    }
    let mut out = Form::zeros(n, omega.degree);
    for i in 0..n {
        let contracted = interior_basis(i, omega);
        let row: Vec<f64> = (0..n).map(|j| a_mat[(i, j)]).collect();
        if row.iter().all(|&x| x == 0.0) {
            continue;
        }
        out += &wedge(&Form::one_form(&row), &contracted)?;
    }
    Ok(out)
}

/// A nondegenerate symmetric bilinear form on vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricG {
    matrix: DMatrix<f64>,
    signature: (usize, usize),
}

impl MetricG {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n == 0 {
            return Err(Error::Metric("metric must be a nonempty square matrix".into()));
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Metric("metric is not symmetric".into()));
        }
        let eig = nalgebra::SymmetricEigen::new(matrix.clone());
        let tol = 1e-12 * scale;
        if eig.eigenvalues.iter().any(|e| e.abs() <= tol) {
            return Err(Error::Metric("metric is singular".into()));
        }
        let p = eig.eigenvalues.iter().filter(|&&e| e > 0.0).count();
        Ok(MetricG { matrix, signature: (p, n - p) })
    }

    pub fn with_signature(matrix: DMatrix<f64>, p: usize, q: usize) -> Result<Self> {
        let g = MetricG::new(matrix)?;
        if g.signature != (p, q) {
            return Err(Error::Metric(format!(
                "declared signature ({p}, {q}) but eigenvalues give {:?}",
                g.signature
            )));
        }
        Ok(g)
    }

    pub fn euclidean(n: usize) -> Self {
        MetricG { matrix: DMatrix::identity(n, n), signature: (n, 0) }
    }

    /// diag(−1, 1, …, 1).
    pub fn lorentzian(n: usize) -> Self {
        let mut m = DMatrix::identity(n, n);
        m[(0, 0)] = -1.0;
        MetricG { matrix: m, signature: (n - 1, 1) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Metric("metric is singular".into()))
    }

    /// Gram matrix of the induced inner product on k-forms.
    pub fn form_gram(&self, k: usize) -> Result<DMatrix<f64>> {
        Ok(compound_matrix(&self.inverse()?, k))
    }
}

/// ε = coeff · θ1∧…∧θn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeElement {
    pub coeff: f64,
}

impl VolumeElement {
    pub fn new(coeff: f64) -> Self {
        VolumeElement { coeff }
    }

    pub fn standard() -> Self {
        VolumeElement { coeff: 1.0 }
    }

    pub fn is_trivialization(&self) -> bool {
        self.coeff != 0.0 && self.coeff.is_finite()
    }
}

/// Inner product of forms induced by g (Gram determinants of g⁻¹); bilinear in complex forms.
pub fn inner_g(g: &MetricG, a: &Form, b: &Form) -> Result<f64> {
    check_same(a, b)?;
    let gram = g.form_gram(a.degree)?;
    let va = nalgebra::DVector::from_column_slice(&a.re);
    let vb = nalgebra::DVector::from_column_slice(&b.re);
    let mut s = va.dot(&(&gram * &vb));
    if let (Some(ai), Some(bi)) = (&a.im, &b.im) {
        let va = nalgebra::DVector::from_column_slice(ai);
        let vb = nalgebra::DVector::from_column_slice(bi);
        s -= va.dot(&(&gram * &vb));
    }
    Ok(s)
}

/// Matrix of ∗ on Λ^k: column J holds the coefficients of ∗θ_J.
pub fn hodge_matrix(g: &MetricG, vol: &VolumeElement, k: usize) -> Result<DMatrix<f64>> {
    let n = g.dim();
    let gram = g.form_gram(k)?;
    let masks = basis_masks(n, k);
    let full = (1u32 << n) - 1;
    let mut m = DMatrix::zeros(binomial(n, n - k), masks.len());
    for (i, &mi) in masks.iter().enumerate() {
        let comp = full & !mi;
        let row = mask_position(n, comp);
        let s = wedge_sign(mi, comp) * vol.coeff;
        for j in 0..masks.len() {
            m[(row, j)] += s * gram[(i, j)];
        }
    }
    Ok(m)
}

/// Hodge star defined by b ∧ ∗a = ⟨b, a⟩_g ε.
pub fn hodge_star(g: &MetricG, vol: &VolumeElement, a: &Form) -> Result<Form> {
    if g.dim() != a.dim {
        return Err(Error::dim(format!("metric on R^{} applied to a form on R^{}", g.dim(), a.dim)));
    }
    if !vol.is_trivialization() {
        return Err(Error::Metric("volume element must be nonzero".into()));
    }
    let h = hodge_matrix(g, vol, a.degree)?;
    let apply = |x: &[f64]| -> Vec<f64> {
        (&h * nalgebra::DVector::from_column_slice(x)).iter().copied().collect()
    };
    let mut out = Form::zeros(a.dim, a.dim - a.degree);
    out.re = apply(&a.re);
    out.im = a.im.as_ref().map(|im| apply(im));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_lexicographic() {
        let b = basis(4, 2);
        let got: Vec<Vec<usize>> = b.iter().map(|m| m.indices().to_vec()).collect();
        assert_eq!(got, vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]);
        assert_eq!(basis(7, 3).len(), 35);
    }

    #[test]
    fn wedge_signs() {
        let t = |i: &[usize]| Form::basis_element(4, i);
        let w = wedge(&t(&[1]), &t(&[2])).unwrap();
        assert_eq!(w.coeff(&[1, 2]).re, 1.0);
        assert_eq!(wedge(&t(&[1, 2]), &t(&[1, 2])).unwrap().norm(), 0.0);
        assert_eq!(wedge(&t(&[1, 2]), &t(&[3, 4])).unwrap().top(), 1.0);
        // θ2θ3θ1θ4: θ1 moves past two factors
        assert_eq!(wedge(&t(&[2, 3]), &t(&[1, 4])).unwrap().top(), 1.0);
        assert_eq!(wedge(&t(&[2, 4]), &t(&[1, 3])).unwrap().top(), -1.0);
    }

    #[test]
    fn wedge_errors() {
        let a = Form::basis_element(6, &[1, 2, 3]);
        let b = Form::basis_element(7, &[1]);
        assert!(matches!(wedge(&a, &b), Err(Error::Dim(_))));
        let c = Form::basis_element(6, &[4, 5, 6, 1]);
        assert!(matches!(wedge(&a, &c), Err(Error::Degree(_))));
    }

    #[test]
    fn interior_examples() {
        let a = Form::basis_element(6, &[1, 2, 3]);
        assert_eq!(interior_basis(0, &a), Form::basis_element(6, &[2, 3]));
        assert_eq!(interior_basis(1, &a), -Form::basis_element(6, &[1, 3]));
        assert_eq!(interior_basis(3, &a).norm(), 0.0);
        assert!(matches!(interior(&[1.0; 6], &Form::scalar(6, 1.0)), Err(Error::Degree(_))));
    }

    #[test]
    fn from_terms_sorts_with_sign() {
        let f = Form::from_terms(6, 3, &[(&[4, 2, 3], 1.0)]);
        assert_eq!(f.coeff(&[2, 3, 4]).re, 1.0);
        let f = Form::from_terms(6, 3, &[(&[2, 1, 3], 2.0)]);
        assert_eq!(f.coeff(&[1, 2, 3]).re, -2.0);
        assert_eq!(f.coeff(&[2, 1, 3]).re, 2.0);
    }

    #[test]
    fn pullback_examples() {
        let a = Form::from_terms(6, 3, &[(&[1, 2, 3], 1.0), (&[2, 4, 6], -0.5)]);
        let id = DMatrix::identity(6, 6);
        assert_eq!(pullback(&id, &a).unwrap(), a);
        let t = 1.7;
        let s = pullback(&(id.clone() * t), &a).unwrap();
        assert!(s.max_diff(&a.scale(t * t * t)) < 1e-14);
        let mut p = id.clone();
        p.swap_rows(0, 1);
        let e = Form::basis_element(6, &[1, 2, 3]);
        assert_eq!(pullback(&p, &e).unwrap(), -e);
    }

    #[test]
    fn hodge_examples() {
        let lor = MetricG::lorentzian(6);
        let vol = VolumeElement::standard();
        // external 0-based labels e0..e5 are internal axes 1..6
        let e012 = Form::basis_element(6, &[1, 2, 3]);
        let e345 = Form::basis_element(6, &[4, 5, 6]);
        assert_eq!(hodge_star(&lor, &vol, &e012).unwrap(), -e345.clone());
        assert_eq!(hodge_star(&lor, &vol, &e345).unwrap(), -e012.clone());
        let euc = MetricG::euclidean(6);
        assert_eq!(hodge_star(&euc, &vol, &e012).unwrap(), e345);
    }

    #[test]
    fn metric_validation() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 0.5;
        assert!(MetricG::new(m).is_err());
        assert!(MetricG::new(DMatrix::zeros(3, 3)).is_err());
        assert!(MetricG::with_signature(DMatrix::identity(3, 3), 2, 1).is_err());
        assert_eq!(MetricG::lorentzian(6).signature(), (5, 1));
    }
}
