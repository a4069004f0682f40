//! Self-dual and anti-self-dual 3-forms in signature (5,1).
//!
//! The metric is diag(−1, 1, 1, 1, 1, 1) with vol = e0∧…∧e5. Labels e0..e5
//! are the axes θ1..θ6 of the other modules.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{hodge_star, inner_g, wedge, Form, MetricG, VolumeElement};
use crate::forms6::{self, decompose6, decomposability_residual, lambda_inv, symplectic_pairing, DEAD_BAND};
use crate::sample::{normal_vec, random_form, rng};

pub fn lorentz_metric() -> MetricG {
    MetricG::lorentzian(6)
}

pub fn lorentz_volume() -> VolumeElement {
    VolumeElement::standard()
}

fn star(a: &Form) -> Form {
    hodge_star(&lorentz_metric(), &lorentz_volume(), a).expect("Lorentz metric is nondegenerate")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SDSplit {
    pub plus: Form,
    pub minus: Form,
}

pub fn sd_split(omega: &Form, g: &MetricG, vol: &VolumeElement) -> Result<SDSplit> {
    if g.signature() != (5, 1) {
        return Err(Error::Metric(format!("expected signature (5, 1), got {:?}", g.signature())));
    }
    if omega.degree() != 3 || omega.dim() != 6 {
        return Err(Error::degree("self-duality is defined here for 3-forms on R^6"));
    }
    let s = hodge_star(g, vol, omega)?;
    Ok(SDSplit { plus: (omega + &s).scale(0.5), minus: (omega - &s).scale(0.5) })
}

/// Projection onto Λ₊ for the standard Lorentz metric.
pub fn self_dual_part(omega: &Form) -> Form {
    (omega + &star(omega)).scale(0.5)
}

pub fn anti_self_dual_part(omega: &Form) -> Form {
    (omega - &star(omega)).scale(0.5)
}

/// Decomposition of a λ > 0 form with the timelike ordering: α is the factor
/// whose induced norm (α, α) is negative (it contains the time axis).
pub fn lorentz_decompose(omega: &Form) -> Result<(Form, Form)> {
    let d = decompose6(omega, &lorentz_volume())?;
    if d.kind != forms6::DecompositionKind::RealPair {
        return Err(Error::orbit("Lorentz ordering needs λ > 0"));
    }
    let g = lorentz_metric();
    if inner_g(&g, &d.alpha, &d.alpha)? > 0.0 {
        Ok((d.beta, d.alpha))
    } else {
        Ok((d.alpha, d.beta))
    }
}

/// Ω̂ = α − β with the timelike ordering.
pub fn lorentz_hat(omega: &Form) -> Result<Form> {
    let (a, b) = lorentz_decompose(omega)?;
    Ok(&a - &b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub samples: usize,
    pub max_residual: f64,
    pub violations: usize,
}

impl CheckReport {
    fn new(check: &str, samples: usize) -> Self {
        CheckReport { check: check.into(), samples, max_residual: 0.0, violations: 0 }
    }

    fn record(&mut self, residual: f64, tol: f64) {
        self.max_residual = self.max_residual.max(residual);
        if residual > tol || residual.is_nan() {
            self.violations += 1;
        }
    }
}

fn random_sd(seed: u64, i: usize) -> Form {
    let mut r = rng(seed, i as u64);
    self_dual_part(&random_form(&mut r, 6, 3))
}

fn above_band(omega: &Form) -> Option<f64> {
    let l = lambda_inv(omega).ok()?;
    (l > DEAD_BAND * omega.norm().powi(4)).then_some(l)
}

/// λ ≥ 0 on Λ₊, and Ω = α + ∗α for the decomposition when λ > 0.
///
/// The residual is max(−λ/‖Ω‖⁴, ‖∗α − β‖/‖Ω‖).
pub fn check_sd_lambda(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("lambda", samples);
    for i in 0..samples {
        let o = random_sd(seed, i);
        let n = o.norm();
        if n == 0.0 {
            continue;
        }
        let l = lambda_inv(&o).expect("3-form on R^6");
        rep.record((-l / n.powi(4)).max(0.0), DEAD_BAND);
        if above_band(&o).is_some() {
            match lorentz_decompose(&o) {
                Ok((a, b)) => rep.record(star(&a).max_diff(&b) / n, 1e-8),
                Err(_) => rep.record(f64::INFINITY, 1e-8),
            }
        }
    }
    rep
}

/// ∗Ω̂ = −Ω̂ for self-dual Ω with λ > 0.
pub fn check_hat_antiselfdual(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("hat", samples);
    for i in 0..samples {
        let o = random_sd(seed, i);
        if above_band(&o).is_none() {
            continue;
        }
        let h = lorentz_hat(&o).expect("above dead-band");
        rep.record((&star(&h) + &h).norm() / o.norm(), 1e-8);
    }
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subspace {
    Plus,
    Minus,
}

/// max |ω(x, y)| / (‖x‖‖y‖) over random pairs in Λ₊ or Λ₋.
pub fn check_lagrangian(subspace: Subspace, samples: usize, seed: u64) -> CheckReport {
    let name = match subspace {
        Subspace::Plus => "lagrangian_plus",
        Subspace::Minus => "lagrangian_minus",
    };
    let mut rep = CheckReport::new(name, samples);
    let eps = lorentz_volume();
    for i in 0..samples {
        let mut r = rng(seed, i as u64);
        let (x, y) = (random_form(&mut r, 6, 3), random_form(&mut r, 6, 3));
        let (x, y) = match subspace {
            Subspace::Plus => (self_dual_part(&x), self_dual_part(&y)),
            Subspace::Minus => (anti_self_dual_part(&x), anti_self_dual_part(&y)),
        };
        let w = symplectic_pairing(&x, &y, &eps).expect("3-forms");
        rep.record(w.abs() / (x.norm() * y.norm()), 1e-10);
    }
    rep
}

/// First |ω(x₊, y₋)| above `floor` among random mixed pairs, with the number of draws used.
pub fn mixed_pairing_witness(seed: u64, floor: f64, max_draws: usize) -> Option<(f64, usize)> {
    let eps = lorentz_volume();
    (0..max_draws).find_map(|i| {
        let mut r = rng(seed, i as u64);
        let x = self_dual_part(&random_form(&mut r, 6, 3));
        let y = anti_self_dual_part(&random_form(&mut r, 6, 3));
        let w = symplectic_pairing(&x, &y, &eps).ok()?;
        (w.abs() > floor).then_some((w, i + 1))
    })
}

fn graph_map(f: &dyn Fn(f64) -> f64, o: &Form) -> Result<Form> {
    let phi = lambda_inv(o)?.max(0.0).sqrt();
    Ok(o + &lorentz_hat(o)?.scale(f(phi)))
}

/// Isotropy of the graph {Ω + f(φ(Ω)) Ω̂ : Ω ∈ Λ₊}.
///
/// Tangents are central differences with step `fd_step`·‖Ω‖; the residual is
/// |ω(U, V)| / (‖U‖‖V‖).
pub fn check_lagrangian_graph(f: &dyn Fn(f64) -> f64, samples: usize, fd_step: f64, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("graph", samples);
    let eps = lorentz_volume();
    let mut done = 0usize;
    let mut stream = 0u64;
    while done < samples {
        let mut r = rng(seed, stream);
        stream += 1;
        let o = self_dual_part(&random_form(&mut r, 6, 3));
        if above_band(&o).is_none() {
            continue;
        }
        let u = self_dual_part(&random_form(&mut r, 6, 3));
        let v = self_dual_part(&random_form(&mut r, 6, 3));
        let h = fd_step * o.norm();
        let tangent = |d: &Form| -> Option<Form> {
            let p = graph_map(f, &(&o + &d.scale(h / d.norm()))).ok()?;
            let m = graph_map(f, &(&o - &d.scale(h / d.norm()))).ok()?;
            Some((&p - &m).scale(d.norm() / (2.0 * h)))
        };
        let (Some(tu), Some(tv)) = (tangent(&u), tangent(&v)) else {
            continue;
        };
        let w = symplectic_pairing(&tu, &tv, &eps).expect("3-forms");
        rep.record(w.abs() / (tu.norm() * tv.norm()), 1e-6);
        done += 1;
    }
    rep
}

/// dφ(u) = −ω(Ω̂, u) for u ∈ Λ₊, against central differences of φ = √λ.
pub fn check_hat_gradient(samples: usize, fd_step: f64, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("hat_gradient", samples);
    let eps = lorentz_volume();
    for i in 0..samples {
        let o = random_sd(seed, i);
        if above_band(&o).is_none() {
            continue;
        }
        let mut r = rng(seed ^ 0x9e37_79b9, i as u64);
        let u = self_dual_part(&Form::from_real(6, 3, normal_vec(&mut r, 20)).expect("shape"));
        let h = fd_step * o.norm() / u.norm();
        let phi = |x: &Form| lambda_inv(x).expect("3-form").sqrt();
        let fd = (phi(&(&o + &u.scale(h))) - phi(&(&o - &u.scale(h)))) / (2.0 * h);
        let an = -symplectic_pairing(&lorentz_hat(&o).expect("above band"), &u, &eps).expect("3-forms");
        rep.record((fd - an).abs() / an.abs().max(1e-300), 1e-5);
    }
    rep
}

/// ∗ preserves decomposability: Plücker residual of ∗(x∧y∧z) relative to its norm².
pub fn check_star_decomposable(samples: usize, seed: u64) -> CheckReport {
    let mut rep = CheckReport::new("star_decomposable", samples);
    for i in 0..samples {
        let mut r = rng(seed, i as u64);
        let a = random_form(&mut r, 6, 1);
        let b = random_form(&mut r, 6, 1);
        let c = random_form(&mut r, 6, 1);
        let beta = wedge(&wedge(&a, &b).expect("1-forms"), &c).expect("2-form and 1-form");
        let s = star(&beta);
        rep.record(decomposability_residual(&s) / s.norm().powi(2), 1e-10);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(idx: &[usize]) -> Form {
        // e0..e5 -> θ1..θ6
        let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        Form::basis_element(6, &shifted)
    }

    #[test]
    fn split_examples() {
        let g = lorentz_metric();
        let v = lorentz_volume();
        let sd = &e(&[0, 1, 2]) - &e(&[3, 4, 5]);
        let s = sd_split(&sd, &g, &v).unwrap();
        assert!(s.plus.max_diff(&sd) < 1e-15 && s.minus.norm() < 1e-15);
        let asd = &e(&[0, 1, 2]) + &e(&[3, 4, 5]);
        let s = sd_split(&asd, &g, &v).unwrap();
        assert!(s.minus.max_diff(&asd) < 1e-15 && s.plus.norm() < 1e-15);
        let s = sd_split(&e(&[0, 1, 2]), &g, &v).unwrap();
        assert!(s.plus.max_diff(&sd.scale(0.5)) < 1e-15);
        assert!(s.minus.max_diff(&asd.scale(0.5)) < 1e-15);
        assert!(matches!(sd_split(&sd, &MetricG::euclidean(6), &v), Err(Error::Metric(_))));
    }

    #[test]
    fn timelike_ordering_example() {
        let o = &e(&[0, 1, 2]) - &e(&[3, 4, 5]);
        assert!((lambda_inv(&o).unwrap() - 1.0).abs() < 1e-14);
        let (a, b) = lorentz_decompose(&o).unwrap();
        assert!(a.max_diff(&e(&[0, 1, 2])) < 1e-14);
        assert!(b.max_diff(&-e(&[3, 4, 5])) < 1e-14);
        let h = lorentz_hat(&o).unwrap();
        assert!(h.max_diff(&(&e(&[0, 1, 2]) + &e(&[3, 4, 5]))) < 1e-14);
        let h3 = lorentz_hat(&o.scale(3.0)).unwrap();
        assert!(h3.max_diff(&h.scale(3.0)) < 1e-13);
    }

    #[test]
    fn zero_form_is_skipped() {
        assert!(above_band(&Form::zeros(6, 3)).is_none());
    }

    #[test]
    fn mixed_pairs_are_not_isotropic() {
        let (w, draws) = mixed_pairing_witness(3, 1e-3, 100).unwrap();
        assert!(w.abs() > 1e-3 && draws <= 100);
    }

    #[test]
    fn graph_constant_zero() {
        let r = check_lagrangian_graph(&|_| 0.0, 5, 1e-5, 1);
        assert!(r.max_residual < 1e-12, "{r:?}");
    }
}
