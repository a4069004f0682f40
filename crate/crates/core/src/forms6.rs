//! Three-forms on R^6: the invariant λ, the endomorphism K, the hat map,
//! the induced complex structure and the special pseudo-Kähler data.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::{
    basis_masks, interior_into, lie_action as rho, mask_position, pullback, wedge, wedge_into, wedge_sign,
    Form, VolumeElement,
};

pub const DIM: usize = 6;
pub const N3: usize = 20;
/// Relative dead-band on |λ| / ‖Ω‖⁴.
pub const DEAD_BAND: f64 = 1e-9;

/// θ123 + θ456.
pub fn phi_r() -> Form {
    Form::from_terms(6, 3, &[(&[1, 2, 3], 1.0), (&[4, 5, 6], 1.0)])
}

/// (θ1 + iθ2) ∧ (θ3 + iθ4) ∧ (θ5 + iθ6).
pub fn alpha_c() -> Form {
    let z = |a: usize, b: usize| {
        Form::complexify(&Form::basis_element(6, &[a]), &Form::basis_element(6, &[b])).unwrap()
    };
    let w = wedge(&z(1, 2), &z(3, 4)).unwrap();
    wedge(&w, &z(5, 6)).unwrap()
}

/// α + ᾱ for the α of [`alpha_c`].
pub fn phi_c() -> Form {
    alpha_c().real_part().scale(2.0)
}

fn check_three_form(omega: &Form) -> Result<()> {
    if omega.dim() != DIM {
        return Err(Error::dim(format!("expected a form on R^6, got R^{}", omega.dim())));
    }
    if omega.degree() != 3 {
        return Err(Error::degree(format!("expected a 3-form, got degree {}", omega.degree())));
    }
    Ok(())
}

/// κ_{ji} = [θ_j ∧ ι(w_i)Ω ∧ Ω] for ε = θ1…θ6, on raw coefficients.
pub fn kappa_raw(omega: &[f64]) -> [[f64; 6]; 6] {
    let masks5 = basis_masks(6, 5);
    let mut k = [[0.0; 6]; 6];
    for i in 0..6 {
        let mut w = [0.0; 6];
        w[i] = 1.0;
        let mut c = [0.0; 15];
        interior_into(6, 3, &w, omega, &mut c);
        let mut eta = [0.0; 6];
        wedge_into(6, 2, 3, &c, omega, &mut eta);
        for (p, &m) in masks5.iter().enumerate() {
            let j = (!m & 0x3f).trailing_zeros();
            k[j as usize][i] += wedge_sign(1 << j, m) * eta[p];
        }
    }
    k
}

/// λ for ε = θ1…θ6 on raw coefficients.
pub fn lambda_raw(omega: &[f64]) -> f64 {
    let k = kappa_raw(omega);
    let mut t = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            t += k[i][j] * k[j][i];
        }
    }
    t / 6.0
}

/// K_Ω = κ ⊗ ε.
#[derive(Clone, Debug, PartialEq)]
pub struct KMap6 {
    pub kappa: DMatrix<f64>,
}

pub fn k_map(omega: &Form, eps: &VolumeElement) -> Result<KMap6> {
    check_three_form(omega)?;
    if omega.is_complex() {
        return Err(Error::Precondition("K is defined here for real forms".into()));
    }
    let k = kappa_raw(omega.re());
    let kappa = DMatrix::from_fn(6, 6, |i, j| k[i][j] / eps.coeff);
    Ok(KMap6 { kappa })
}

pub fn lambda_inv(omega: &Form) -> Result<f64> {
    lambda_with(omega, &VolumeElement::standard())
}

pub fn lambda_with(omega: &Form, eps: &VolumeElement) -> Result<f64> {
    let k = k_map(omega, eps)?.kappa;
    Ok((&k * &k).trace() / 6.0)
}

/// φ = √|λ|.
pub fn phi6(omega: &Form) -> Result<f64> {
    Ok(lambda_inv(omega)?.abs().sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orbit6 {
    PositiveOrbit,
    NegativeOrbit,
    Degenerate,
}

impl Orbit6 {
    pub fn name(&self) -> &'static str {
        match self {
            Orbit6::PositiveOrbit => "positive_pair",
            Orbit6::NegativeOrbit => "negative_complex",
            Orbit6::Degenerate => "degenerate",
        }
    }
}

pub fn classify_lambda(lambda: f64, norm: f64) -> Orbit6 {
    let band = DEAD_BAND * norm.powi(4);
    if lambda.abs() <= band {
        Orbit6::Degenerate
    } else if lambda > 0.0 {
        Orbit6::PositiveOrbit
    } else {
        Orbit6::NegativeOrbit
    }
}

pub fn classify6(omega: &Form) -> Result<Orbit6> {
    Ok(classify_lambda(lambda_inv(omega)?, omega.norm()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionKind {
    RealPair,
    ComplexConjugatePair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition6 {
    pub kind: DecompositionKind,
    pub alpha: Form,
    pub beta: Form,
    pub lambda: f64,
}

fn orbit_checked(omega: &Form, eps: &VolumeElement) -> Result<(KMap6, f64)> {
    let k = k_map(omega, eps)?;
    let lambda = (&k.kappa * &k.kappa).trace() / 6.0;
    // dead-band relative to the same trivialization
    if classify_lambda(lambda * eps.coeff * eps.coeff, omega.norm()) == Orbit6::Degenerate {
        return Err(Error::orbit(format!("λ = {lambda:e} lies in the degenerate band")));
    }
    Ok((k, lambda))
}

pub fn decompose6(omega: &Form, eps: &VolumeElement) -> Result<Decomposition6> {
    let (k, lambda) = orbit_checked(omega, eps)?;
    let k_omega = pullback(&k.kappa, omega)?;
    if lambda > 0.0 {
        let d = k_omega.scale(1.0 / lambda.powf(1.5));
        let mut alpha = (omega + &d).scale(0.5);
        let mut beta = (omega - &d).scale(0.5);
        if wedge(&alpha, &beta)?.top() / eps.coeff < 0.0 {
            std::mem::swap(&mut alpha, &mut beta);
        }
        Ok(Decomposition6 { kind: DecompositionKind::RealPair, alpha, beta, lambda })
    } else {
        let s = (-lambda).sqrt();
        let h = k_omega.scale(-1.0 / (s * s * s));
        let mut alpha = Form::complexify(omega, &h)?.scale(0.5);
        // i α ∧ ᾱ must be positive
        let v = wedge(&alpha, &alpha.conj())?.top_complex() * Complex64::new(0.0, 1.0);
        if v.re / eps.coeff < 0.0 {
            alpha = alpha.conj();
        }
        let beta = alpha.conj();
        Ok(Decomposition6 { kind: DecompositionKind::ComplexConjugatePair, alpha, beta, lambda })
    }
}

/// Ω̂ = α − β (λ > 0) or i(ᾱ − α) (λ < 0), with the orientation ordering.
pub fn hat(omega: &Form, eps: &VolumeElement) -> Result<Form> {
    let d = decompose6(omega, eps)?;
    Ok(match d.kind {
        DecompositionKind::RealPair => &d.alpha - &d.beta,
        DecompositionKind::ComplexConjugatePair => d.alpha.imag_part().scale(2.0),
    })
}

/// Largest Plücker residual of a 3-form: ι(v)a∧a and ι(w_j)ι(w_i)a∧a over basis vectors.
pub fn decomposability_residual(a: &Form) -> f64 {
    let n = a.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        let ia = crate::exterior::interior_basis(i, a);
        worst = worst.max(wedge(&ia, a).expect("shapes agree").norm());
        for j in 0..n {
            let ija = crate::exterior::interior_basis(j, &ia);
            worst = worst.max(wedge(&ija, a).expect("shapes agree").norm());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructureI {
    pub i: DMatrix<f64>,
}

impl ComplexStructureI {
    pub fn new(i: DMatrix<f64>) -> Result<Self> {
        if i.nrows() != DIM || i.ncols() != DIM {
            return Err(Error::Structure("complex structure must be 6x6".into()));
        }
        let r = (&i * &i + DMatrix::identity(6, 6)).amax();
        if r > 1e-8 * i.amax().max(1.0).powi(2) {
            return Err(Error::Structure(format!("I² + 1 has size {r:e}")));
        }
        Ok(ComplexStructureI { i })
    }
}

pub fn complex_structure(omega: &Form, eps: &VolumeElement) -> Result<ComplexStructureI> {
    let (k, lambda) = orbit_checked(omega, eps)?;
    if lambda >= 0.0 {
        return Err(Error::orbit("complex structure needs λ < 0"));
    }
    Ok(ComplexStructureI { i: k.kappa / (-lambda).sqrt() })
}

/// ω(Ω1, Ω2) ε = Ω1 ∧ Ω2.
pub fn symplectic_pairing(o1: &Form, o2: &Form, eps: &VolumeElement) -> Result<f64> {
    check_three_form(o1)?;
    check_three_form(o2)?;
    Ok(wedge(o1, o2)?.top() / eps.coeff)
}

/// The 20×20 matrix of ω in the standard basis.
pub fn omega20(eps: &VolumeElement) -> DMatrix<f64> {
    let masks = basis_masks(6, 3);
    DMatrix::from_fn(N3, N3, |a, b| wedge_sign(masks[a], masks[b]) / eps.coeff)
}

/// ρ(a)Ω for a ∈ gl(6); a should be traceless for the sl(6) action.
pub fn lie_action(a: &DMatrix<f64>, omega: &Form) -> Result<Form> {
    check_three_form(omega)?;
    rho(a, omega)
}

/// Symmetrized Q(x, y)_{ji} = ½([θ_j∧ι(w_i)x∧y] + [θ_j∧ι(w_i)y∧x]).
fn q_bilinear(x: &[f64], y: &[f64]) -> [[f64; 6]; 6] {
    let masks5 = basis_masks(6, 5);
    let mut q = [[0.0; 6]; 6];
    for i in 0..6 {
        let mut w = [0.0; 6];
        w[i] = 1.0;
        let mut cx = [0.0; 15];
        let mut cy = [0.0; 15];
        interior_into(6, 3, &w, x, &mut cx);
        interior_into(6, 3, &w, y, &mut cy);
        let mut eta = [0.0; 6];
        wedge_into(6, 2, 3, &cx, y, &mut eta);
        wedge_into(6, 2, 3, &cy, x, &mut eta);
        for (p, &m) in masks5.iter().enumerate() {
            let j = (!m & 0x3f).trailing_zeros() as usize;
            q[j][i] += 0.5 * wedge_sign(1 << j, m) * eta[p];
        }
    }
    q
}

fn tr_prod(a: &[[f64; 6]; 6], b: &[[f64; 6]; 6]) -> f64 {
    let mut t = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            t += a[i][j] * b[j][i];
        }
    }
    t
}

/// Gradient and Hessian of φ = √(−λ) in the standard coordinates (ε = θ1…θ6),
/// computed from the quartic structure of λ.
pub fn phi_gradient_hessian(omega: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let kappa = q_bilinear(omega, omega);
    let lambda = tr_prod(&kappa, &kappa) / 6.0;
    let phi = (-lambda).sqrt();
    let e = |a: usize| {
        let mut v = [0.0; N3];
        v[a] = 1.0;
        v
    };
    let qs: Vec<[[f64; 6]; 6]> = (0..N3).map(|a| q_bilinear(omega, &e(a))).collect();
    let grad_l = DVector::from_fn(N3, |a, _| 2.0 / 3.0 * tr_prod(&kappa, &qs[a]));
    let mut h_l = DMatrix::zeros(N3, N3);
    for a in 0..N3 {
        for b in a..N3 {
            let v = 4.0 / 3.0 * tr_prod(&qs[b], &qs[a])
                + 2.0 / 3.0 * tr_prod(&kappa, &q_bilinear(&e(a), &e(b)));
            h_l[(a, b)] = v;
            h_l[(b, a)] = v;
        }
    }
    let grad = -&grad_l / (2.0 * phi);
    let hess = (-h_l - 2.0 * &grad * grad.transpose()) / (2.0 * phi);
    (grad, hess)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecialKahlerData {
    pub j: DMatrix<f64>,
    pub g_hess: DMatrix<f64>,
    pub omega20: DMatrix<f64>,
}

/// J by central differences of Ω ↦ −Ω̂; gHess from the closed-form Hessian of φ.
pub fn special_kahler(omega: &Form) -> Result<SpecialKahlerData> {
    let eps = VolumeElement::standard();
    let (_, lambda) = orbit_checked(omega, &eps)?;
    if lambda >= 0.0 {
        return Err(Error::orbit("special Kähler data needs λ < 0"));
    }
    let h = 1e-5 * omega.norm();
    let mut j = DMatrix::zeros(N3, N3);
    for b in 0..N3 {
        let mut plus = omega.clone();
        plus.re_mut()[b] += h;
        let mut minus = omega.clone();
        minus.re_mut()[b] -= h;
        let d = hat(&plus, &eps)? - hat(&minus, &eps)?;
        for a in 0..N3 {
            j[(a, b)] = -d.re()[a] / (2.0 * h);
        }
    }
    let (_, g_hess) = phi_gradient_hessian(omega.re());
    Ok(SpecialKahlerData { j, g_hess, omega20: omega20(&eps) })
}

/// Matrix of ρ(a) on Λ³ in the standard basis.
pub fn rho_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(N3, N3);
    for (b, &mb) in basis_masks(6, 3).iter().enumerate() {
        let e = Form::basis_element(6, &crate::exterior::MultiIndex::from_mask(mb).indices().to_vec());
        let r = rho(a, &e).expect("shapes agree");
        for (p, &c) in r.re().iter().enumerate() {
            m[(p, b)] = c;
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeComponents {
    pub c30: Form,
    pub c21: Form,
    pub c12: Form,
    pub c03: Form,
}

impl TypeComponents {
    pub fn sum(&self) -> Form {
        &(&self.c30 + &self.c21) + &(&self.c12 + &self.c03)
    }
}

/// Projectors onto types (3,0), (2,1), (1,2), (0,3).
///
/// A complex structure acts on covectors by θ ↦ −θ∘I, so type (p,q) is the
/// i(p−q)-eigenspace of −ρ(I).
pub fn type_projectors(i: &ComplexStructureI) -> Result<[DMatrix<Complex64>; 4]> {
    let ci = ComplexStructureI::new(i.i.clone())?;
    let d = rho_matrix(&ci.i).map(|x| Complex64::new(-x, 0.0));
    let eig = [3.0, 1.0, -1.0, -3.0].map(|t| Complex64::new(0.0, t));
    let id = DMatrix::<Complex64>::identity(N3, N3);
    let proj = |k: usize| {
        let mut p = id.clone();
        for (m, &mu) in eig.iter().enumerate() {
            if m != k {
                p = p * (&d - &id * mu) / (eig[k] - mu);
            }
        }
        p
    };
    Ok([proj(0), proj(1), proj(2), proj(3)])
}

pub fn type_decompose(i: &ComplexStructureI, a: &Form) -> Result<TypeComponents> {
    check_three_form(a)?;
    let ps = type_projectors(i)?;
    let im0 = vec![0.0; N3];
    let v = DVector::from_fn(N3, |p, _| Complex64::new(a.re()[p], a.im().unwrap_or(&im0)[p]));
    let apply = |p: &DMatrix<Complex64>| {
        let w = p * &v;
        Form::from_complex(6, 3, w.iter().map(|z| z.re).collect(), w.iter().map(|z| z.im).collect())
            .expect("shape is valid")
    };
    Ok(TypeComponents { c30: apply(&ps[0]), c21: apply(&ps[1]), c12: apply(&ps[2]), c03: apply(&ps[3]) })
}

/// Complex rank of a projector.
pub fn complex_rank(p: &DMatrix<Complex64>) -> usize {
    let svd = p.clone().svd(false, false);
    let top = svd.singular_values.max();
    svd.singular_values.iter().filter(|&&s| s > 1e-8 * top.max(1.0)).count()
}

/// Basis index of θ_I for a 1-based multi-index.
pub fn index3(idx: &[usize]) -> usize {
    mask_position(6, idx.iter().fold(0, |m, &i| m | (1 << (i - 1))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps() -> VolumeElement {
        VolumeElement::standard()
    }

    #[test]
    fn kappa_of_phi_r() {
        let k = k_map(&phi_r(), &eps()).unwrap().kappa;
        let want = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]));
        assert!((k - want).amax() < 1e-15);
        assert_eq!(lambda_inv(&phi_r()).unwrap(), 1.0);
        assert_eq!(classify6(&phi_r()).unwrap(), Orbit6::PositiveOrbit);
    }

    #[test]
    fn zero_and_decomposable() {
        assert_eq!(k_map(&Form::zeros(6, 3), &eps()).unwrap().kappa.amax(), 0.0);
        let t = Form::basis_element(6, &[1, 2, 3]);
        assert_eq!(lambda_inv(&t).unwrap(), 0.0);
        assert_eq!(classify6(&t).unwrap(), Orbit6::Degenerate);
        assert!(matches!(decompose6(&t, &eps()), Err(Error::Orbit(_))));
    }

    #[test]
    fn phi_c_expansion() {
        let want = Form::from_terms(
            6,
            3,
            &[(&[1, 3, 5], 2.0), (&[1, 4, 6], -2.0), (&[2, 3, 6], -2.0), (&[2, 4, 5], -2.0)],
        );
        assert_eq!(phi_c(), want);
    }

    #[test]
    fn phi_c_invariants() {
        let k = k_map(&phi_c(), &eps()).unwrap().kappa;
        assert!((&k * &k + DMatrix::identity(6, 6) * 64.0).amax() < 1e-12);
        assert!((lambda_inv(&phi_c()).unwrap() + 64.0).abs() < 1e-12);
        assert_eq!(classify6(&phi_c()).unwrap(), Orbit6::NegativeOrbit);
    }

    #[test]
    fn hat_examples() {
        let h = hat(&phi_r(), &eps()).unwrap();
        assert!(h.max_diff(&Form::from_terms(6, 3, &[(&[1, 2, 3], 1.0), (&[4, 5, 6], -1.0)])) < 1e-14);
        let hc = hat(&phi_c(), &eps()).unwrap();
        let want = Form::from_terms(
            6,
            3,
            &[(&[1, 3, 6], 2.0), (&[1, 4, 5], 2.0), (&[2, 3, 5], 2.0), (&[2, 4, 6], -2.0)],
        );
        assert!(hc.max_diff(&want) < 1e-13);
        let d = decompose6(&phi_c(), &eps()).unwrap();
        assert!(d.alpha.max_diff(&alpha_c()) < 1e-13);
    }

    #[test]
    fn pairing_examples() {
        let e = eps();
        let a = Form::basis_element(6, &[1, 2, 3]);
        let b = Form::basis_element(6, &[4, 5, 6]);
        assert_eq!(symplectic_pairing(&a, &b, &e).unwrap(), 1.0);
        let hr = hat(&phi_r(), &e).unwrap();
        assert!((symplectic_pairing(&phi_r(), &hr, &e).unwrap() + 2.0).abs() < 1e-14);
        let hc = hat(&phi_c(), &e).unwrap();
        assert!((symplectic_pairing(&phi_c(), &hc, &e).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn lie_action_examples() {
        let t = Form::basis_element(6, &[1, 2, 3]);
        let mut a = DMatrix::zeros(6, 6);
        a[(0, 3)] = 1.0;
        assert_eq!(lie_action(&a, &t).unwrap(), Form::basis_element(6, &[2, 3, 4]));
        let mut a = DMatrix::zeros(6, 6);
        a[(0, 1)] = 1.0;
        assert_eq!(lie_action(&a, &t).unwrap().norm(), 0.0);
    }

    #[test]
    fn complex_structure_sign_at_phi_c() {
        let i = complex_structure(&phi_c(), &eps()).unwrap().i;
        // I(w1) = −w2 in this convention
        assert!((i[(1, 0)] + 1.0).abs() < 1e-14);
        assert!((i[(0, 1)] - 1.0).abs() < 1e-14);
        assert!(matches!(complex_structure(&phi_r(), &eps()), Err(Error::Orbit(_))));
    }

    #[test]
    fn projector_ranks() {
        let i = complex_structure(&phi_c(), &eps()).unwrap();
        let ps = type_projectors(&i).unwrap();
        let ranks: Vec<usize> = ps.iter().map(complex_rank).collect();
        assert_eq!(ranks, vec![1, 9, 9, 1]);
        let bad = ComplexStructureI { i: DMatrix::identity(6, 6) };
        assert!(matches!(type_projectors(&bad), Err(Error::Structure(_))));
    }

    #[test]
    fn omega_plus_i_hat_is_30() {
        let e = eps();
        let o = phi_c();
        let i = complex_structure(&o, &e).unwrap();
        let oc = Form::complexify(&o, &hat(&o, &e).unwrap()).unwrap();
        let t = type_decompose(&i, &oc).unwrap();
        assert!(t.c30.max_diff(&oc) < 1e-10);
        for c in [&t.c21, &t.c12, &t.c03] {
            assert!(c.norm() < 1e-10);
        }
    }
}
