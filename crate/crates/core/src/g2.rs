//! Positive 3-forms on R^7: the bilinear form B, the induced metric and volume,
//! ∗Ω, the 1/7/27 splitting, DΘ and the dual 4-form functional.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::exterior::{
    basis_masks, binomial, hodge_star, interior_basis, interior_into, wedge, wedge_into, Form, MetricG,
    VolumeElement,
};

pub const DIM: usize = 7;
pub const N3: usize = 35;
/// Relative band on the smallest eigenvalue of b against ‖Ω‖³.
pub const DEAD_BAND: f64 = 1e-9;

/// Calibration of ψ = c₀ |det C_Θ|^{1/12}, fixed by ψ(∗φ_std) = 24/7.
/// At ∗φ_std, det C = 2^7, so c₀ = (24/7)·2^{−7/12}.
pub const PSI_C0: f64 = 2.288296892862916;

fn std_terms(last: [usize; 3]) -> Form {
    Form::from_terms(
        7,
        3,
        &[
            (&[1, 2, 5], 1.0),
            (&[3, 4, 5], -1.0),
            (&[1, 3, 6], 1.0),
            (&[4, 2, 6], -1.0),
            (&[1, 4, 7], 1.0),
            (&[2, 3, 7], -1.0),
            (&last, 1.0),
        ],
    )
}

/// The standard form exactly as printed, ending in θ4∧θ6∧θ7.
pub fn phi_std_printed() -> Form {
    std_terms([4, 6, 7])
}

/// The standard form ending in θ5∧θ6∧θ7, which induces the Euclidean metric.
pub fn phi_std() -> Form {
    std_terms([5, 6, 7])
}

/// θ1234 − (θ12 − θ34)θ67 − (θ13 − θ42)θ75 − (θ14 − θ23)θ56.
pub fn star_phi_std() -> Form {
    Form::from_terms(
        7,
        4,
        &[
            (&[1, 2, 3, 4], 1.0),
            (&[1, 2, 6, 7], -1.0),
            (&[3, 4, 6, 7], 1.0),
            (&[1, 3, 7, 5], -1.0),
            (&[4, 2, 7, 5], 1.0),
            (&[1, 4, 5, 6], -1.0),
            (&[2, 3, 5, 6], 1.0),
        ],
    )
}

fn check_three_form(omega: &Form) -> Result<()> {
    if omega.dim() != DIM {
        return Err(Error::dim(format!("expected a form on R^7, got R^{}", omega.dim())));
    }
    if omega.degree() != 3 {
        return Err(Error::degree(format!("expected a 3-form, got degree {}", omega.degree())));
    }
    if omega.is_complex() {
        return Err(Error::Precondition("real 3-form required".into()));
    }
    Ok(())
}

/// T(x, y, z)_{vw} = −(1/6)[ι(w_v)x ∧ ι(w_w)y ∧ z] for ε = θ1…θ7.
pub fn b_trilinear_raw(x: &[f64], y: &[f64], z: &[f64]) -> [[f64; 7]; 7] {
    let mut ix = [[0.0; 21]; 7];
    let mut iy = [[0.0; 21]; 7];
    for v in 0..7 {
        let mut e = [0.0; 7];
        e[v] = 1.0;
        interior_into(7, 3, &e, x, &mut ix[v]);
        interior_into(7, 3, &e, y, &mut iy[v]);
    }
    let mut t = [[0.0; 7]; 7];
    for w in 0..7 {
        // ι(w)y ∧ z is a 5-form; wedge with ι(v)x gives the top form
        let mut eta = [0.0; 21];
        wedge_into(7, 2, 3, &iy[w], z, &mut eta);
        for v in 0..7 {
            let mut top = [0.0; 1];
            wedge_into(7, 2, 5, &ix[v], &eta, &mut top);
            t[v][w] = -top[0] / 6.0;
        }
    }
    t
}

pub fn b_raw(omega: &[f64]) -> [[f64; 7]; 7] {
    b_trilinear_raw(omega, omega, omega)
}

/// B_Ω = b ⊗ ε.
#[derive(Clone, Debug, PartialEq)]
pub struct BForm7 {
    pub b: DMatrix<f64>,
}

pub fn b_form(omega: &Form, eps: &VolumeElement) -> Result<BForm7> {
    check_three_form(omega)?;
    let b = b_raw(omega.re());
    Ok(BForm7 { b: DMatrix::from_fn(7, 7, |i, j| b[i][j] / eps.coeff) })
}

/// Metric, volume and φ induced by a positive form.
#[derive(Clone, Debug, PartialEq)]
pub struct G2Structure {
    pub g: DMatrix<f64>,
    /// Positive volume coefficient; the oriented volume form is `orientation · vol · ε`.
    pub vol: f64,
    pub phi: f64,
    /// Sign of det b relative to ε.
    pub orientation: f64,
}

impl G2Structure {
    pub fn metric(&self) -> MetricG {
        MetricG::with_signature(self.g.clone(), 7, 0).expect("positive forms give a Euclidean metric")
    }

    pub fn volume_element(&self) -> VolumeElement {
        VolumeElement::new(self.orientation * self.vol)
    }
}

fn definite_sign(b: &DMatrix<f64>, scale: f64) -> Option<f64> {
    let eig = SymmetricEigen::new(b.clone()).eigenvalues;
    let band = DEAD_BAND * scale;
    if eig.iter().all(|&e| e > band) {
        Some(1.0)
    } else if eig.iter().all(|&e| e < -band) {
        Some(-1.0)
    } else {
        None
    }
}

/// True iff b is definite (above the dead-band), i.e. Ω lies in the open G2 orbit.
pub fn is_positive(omega: &Form) -> bool {
    match b_form(omega, &VolumeElement::standard()) {
        Ok(bf) => definite_sign(&bf.b, omega.norm().powi(3)).is_some(),
        Err(_) => false,
    }
}

/// Induced structure relative to ε = θ1…θ7 and the coordinate basis.
pub fn g2_metric(omega: &Form) -> Result<G2Structure> {
    let b = b_form(omega, &VolumeElement::standard())?.b;
    let Some(sign) = definite_sign(&b, omega.norm().powi(3)) else {
        return Err(Error::orbit("form is not positive"));
    };
    // det(−b) = −det(b) in odd dimension, so sign·b is positive definite with positive determinant
    let bp = &b * sign;
    let vol = bp.determinant().powf(1.0 / 9.0);
    Ok(G2Structure { g: bp / vol, vol, phi: vol, orientation: sign })
}

/// φ(Ω) for ε = θ1…θ7.
pub fn phi7(omega: &Form) -> Result<f64> {
    Ok(g2_metric(omega)?.phi)
}

/// dφ(Ω̇) = (φ/9) tr(b⁻¹ Db(Ω̇)), from the definition of φ through det b.
pub fn phi_derivative(omega: &Form, dot: &Form) -> Result<f64> {
    check_three_form(dot)?;
    let s = g2_metric(omega)?;
    let b = DMatrix::from_fn(7, 7, |i, j| b_raw(omega.re())[i][j]);
    let (o, d) = (omega.re(), dot.re());
    let t1 = b_trilinear_raw(d, o, o);
    let t2 = b_trilinear_raw(o, d, o);
    let t3 = b_trilinear_raw(o, o, d);
    let db = DMatrix::from_fn(7, 7, |i, j| t1[i][j] + t2[i][j] + t3[i][j]);
    let binv = b.try_inverse().ok_or_else(|| Error::orbit("b is singular"))?;
    Ok(s.phi / 9.0 * (binv * db).trace())
}

/// Θ(Ω) = ∗Ω for the metric and orientation induced by Ω.
pub fn star_omega(omega: &Form) -> Result<Form> {
    let s = g2_metric(omega)?;
    hodge_star(&s.metric(), &s.volume_element(), omega)
}

/// Induced inner product on 3-forms at Ω, as a 35×35 Gram matrix.
pub fn form_gram3(s: &G2Structure) -> DMatrix<f64> {
    s.metric().form_gram(3).expect("metric is nondegenerate")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proj3Split {
    pub p1: Form,
    pub p7: Form,
    pub p27: Form,
}

/// Projector matrices (P1, P7, P27) on Λ³ at a positive Ω, g-orthogonal.
pub fn projectors_137(omega: &Form) -> Result<[DMatrix<f64>; 3]> {
    let s = g2_metric(omega)?;
    let gram = form_gram3(&s);
    let theta = hodge_star(&s.metric(), &s.volume_element(), omega)?;
    let w = DVector::from_column_slice(omega.re());
    let p1 = &w * (w.transpose() * &gram) / (w.transpose() * &gram * &w)[(0, 0)];
    let mut v = DMatrix::zeros(N3, 7);
    for i in 0..7 {
        let c = interior_basis(i, &theta);
        v.column_mut(i).copy_from_slice(c.re());
    }
    let vg = v.transpose() * &gram;
    let inner = (&vg * &v).try_inverse().ok_or_else(|| Error::Structure("π7 span is degenerate".into()))?;
    let p7 = &v * inner * vg;
    let p27 = DMatrix::identity(N3, N3) - &p1 - &p7;
    Ok([p1, p7, p27])
}

pub fn project_137(omega: &Form, alpha: &Form) -> Result<Proj3Split> {
    check_three_form(alpha)?;
    let ps = projectors_137(omega)?;
    let a = DVector::from_column_slice(alpha.re());
    let mk = |p: &DMatrix<f64>| Form::from_real(7, 3, (p * &a).iter().copied().collect()).expect("shape");
    Ok(Proj3Split { p1: mk(&ps[0]), p7: mk(&ps[1]), p27: mk(&ps[2]) })
}

/// DΘ(α̇) = (4/3)∗π1(α̇) + ∗π7(α̇) − ∗π27(α̇).
pub fn d_theta(omega: &Form, alphadot: &Form) -> Result<Form> {
    let s = g2_metric(omega)?;
    let sp = project_137(omega, alphadot)?;
    let comb = &(&sp.p1.scale(4.0 / 3.0) + &sp.p7) - &sp.p27;
    hodge_star(&s.metric(), &s.volume_element(), &comb)
}

/// Symmetric 35×35 matrix of Q(α) = [DΘ(α) ∧ α] relative to the oriented volume.
pub fn hessian7_matrix(omega: &Form) -> Result<DMatrix<f64>> {
    let s = g2_metric(omega)?;
    let masks = basis_masks(7, 3);
    let mut q = DMatrix::zeros(N3, N3);
    for a in 0..N3 {
        let mut e = Form::zeros(7, 3);
        e.re_mut()[a] = 1.0;
        let dt = d_theta(omega, &e)?;
        for (b, _) in masks.iter().enumerate() {
            let mut f = Form::zeros(7, 3);
            f.re_mut()[b] = 1.0;
            q[(b, a)] = wedge(&dt, &f)?.top() * s.orientation;
        }
    }
    Ok((&q + q.transpose()) * 0.5)
}

pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    e
}

/// (positive, negative) eigenvalue counts with a relative threshold.
pub fn sign_counts(eigs: &[f64], rel_tol: f64) -> (usize, usize) {
    let top = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let t = rel_tol * top;
    (eigs.iter().filter(|&&e| e > t).count(), eigs.iter().filter(|&&e| e < -t).count())
}

pub fn hessian7_signature(omega: &Form) -> Result<(usize, usize)> {
    Ok(sign_counts(&sorted_eigenvalues(&hessian7_matrix(omega)?), 1e-9))
}

/// The 21×21 matrix of C_Θ : w_i∧w_j ↦ ι(w_i)ι(w_j)Θ.
pub fn c_theta(theta: &Form) -> Result<DMatrix<f64>> {
    if theta.dim() != DIM || theta.degree() != 4 {
        return Err(Error::degree("C_Θ needs a 4-form on R^7"));
    }
    let n2 = binomial(7, 2);
    let mut c = DMatrix::zeros(n2, n2);
    for (col, &m) in basis_masks(7, 2).iter().enumerate() {
        let i = m.trailing_zeros() as usize;
        let j = 31 - (m.leading_zeros() as usize);
        let r = interior_basis(i, &interior_basis(j, theta));
        for (row, &x) in r.re().iter().enumerate() {
            c[(row, col)] = x;
        }
    }
    Ok(c)
}

/// |det C_Θ|^{1/12} before calibration.
pub fn det_c_root(theta: &Form) -> Result<f64> {
    let d = c_theta(theta)?.determinant();
    if d == 0.0 || !d.is_finite() {
        return Err(Error::orbit("C_Θ is singular"));
    }
    Ok(d.abs().powf(1.0 / 12.0))
}

/// ψ(Θ) = c₀ |det C_Θ|^{1/12}.
pub fn dual_functional(theta: &Form) -> Result<f64> {
    Ok(PSI_C0 * det_c_root(theta)?)
}

/// Basis of the 14-dimensional kernel of χ ↦ χ ∧ ∗Ω in Λ², as 21-vectors.
pub fn g2_subalgebra_basis(omega: &Form) -> Result<Vec<Form>> {
    let theta = star_omega(omega)?;
    let n2 = binomial(7, 2);
    let mut m = DMatrix::zeros(7, n2);
    for c in 0..n2 {
        let mut e = Form::zeros(7, 2);
        e.re_mut()[c] = 1.0;
        let w = wedge(&e, &theta)?;
        m.column_mut(c).copy_from_slice(w.re());
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    // rows of V^T beyond the rank span the kernel; full SVD not available, so complete via projection
    let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10).count();
    let row_space: Vec<DVector<f64>> = (0..rank).map(|r| vt.row(r).transpose()).collect();
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for c in 0..n2 {
        let mut v = DVector::zeros(n2);
        v[c] = 1.0;
        for u in row_space.iter().chain(kernel.iter()) {
            let d = u.dot(&v);
            v -= u * d;
        }
        let nv = v.norm();
        if nv > 1e-8 {
            kernel.push(v / nv);
        }
    }
    Ok(kernel
        .into_iter()
        .map(|v| Form::from_real(7, 2, v.iter().copied().collect()).expect("shape"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_form_gives_identity_metric() {
        let s = g2_metric(&phi_std()).unwrap();
        assert!((s.g.clone() - DMatrix::identity(7, 7)).amax() < 1e-12);
        assert!((s.vol - 1.0).abs() < 1e-12 && (s.phi - 1.0).abs() < 1e-12);
        let b = b_form(&phi_std(), &VolumeElement::standard()).unwrap().b;
        assert!((b - DMatrix::identity(7, 7)).amax() < 1e-14);
    }

    #[test]
    fn printed_form_is_not_the_identity() {
        let b = b_form(&phi_std_printed(), &VolumeElement::standard()).unwrap().b;
        assert!((b.clone() - DMatrix::identity(7, 7)).amax() > 0.1);
        assert!((b.determinant() + 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn positivity_examples() {
        assert!(is_positive(&phi_std()));
        assert!(!is_positive(&Form::basis_element(7, &[1, 2, 3])));
        assert!(is_positive(&-phi_std()));
        assert!(matches!(g2_metric(&Form::basis_element(7, &[1, 2, 3])), Err(Error::Orbit(_))));
        assert_eq!(b_form(&Form::zeros(7, 3), &VolumeElement::standard()).unwrap().b.amax(), 0.0);
    }

    #[test]
    fn star_of_standard_form() {
        let t = star_omega(&phi_std()).unwrap();
        assert!(t.max_diff(&star_phi_std()) < 1e-12);
    }

    #[test]
    fn homogeneity_of_phi() {
        let t = 2f64.powf(3.0 / 7.0);
        let p = phi7(&phi_std().scale(t)).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn project_examples() {
        let o = phi_std();
        let s = project_137(&o, &o).unwrap();
        assert!(s.p1.max_diff(&o) < 1e-12 && s.p7.norm() < 1e-12 && s.p27.norm() < 1e-12);
        let a = interior_basis(0, &star_omega(&o).unwrap());
        let s = project_137(&o, &a).unwrap();
        assert!(s.p7.max_diff(&a) < 1e-12 && s.p1.norm() < 1e-12 && s.p27.norm() < 1e-12);
    }

    #[test]
    fn d_theta_on_euler_direction() {
        let o = phi_std();
        let d = d_theta(&o, &o).unwrap();
        assert!(d.max_diff(&star_omega(&o).unwrap().scale(4.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn psi_calibration() {
        let d = c_theta(&star_phi_std()).unwrap().determinant();
        assert!((d - 128.0).abs() < 1e-9);
        let c0 = 24.0 / 7.0 / d.powf(1.0 / 12.0);
        assert!((c0 - PSI_C0).abs() < 1e-15);
        assert!((dual_functional(&star_phi_std()).unwrap() - 24.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn g2_subalgebra_has_dimension_14() {
        assert_eq!(g2_subalgebra_basis(&phi_std()).unwrap().len(), 14);
    }
}
