use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::flow::{output_jacobian, residual, wedge_matrix, FlowConfig, HessianSummary, Mode};
use super::fourier::{wavevector, FourierForm};
use super::kernels::top_pairing;
use crate::error::{Error, Result};
use crate::exterior::{binomial, interior_basis, Form};

const KERNEL_TOL: f64 = 1e-9;
const RANK_TOL: f64 = 1e-10;

/// Pointwise second variation at a constant form.
///
/// 6D: the Hessian of φ = √(−λ). 7D: the form (a, b) ↦ [DΘ(a) ∧ b] with the orientation
/// sign, i.e. the Hessian of 3φ, which is the normalization whose gradient is Θ itself.
pub fn pointwise_hessian(omega: &Form) -> Result<DMatrix<f64>> {
    let mode = Mode::from_dim(omega.dim())?;
    let d = output_jacobian(mode, omega.re())?;
    let n = mode.dim();
    let nin = binomial(n, 3);
    let mut p = DMatrix::zeros(nin, d.nrows());
    for (a, c, s) in top_pairing(n, 3) {
        p[(a, c)] = s;
    }
    let mut h = p * d;
    if mode == Mode::Seven {
        let t = crate::g2::star_omega(omega)?;
        let top = crate::exterior::wedge(omega, &t)?.top();
        h *= top.signum();
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransverseHessian {
    /// All eigenvalues, descending; each exact mode pair contributes its block twice (cos and sin).
    pub spectrum: Vec<f64>,
    pub kernel_dim: usize,
    /// Rank of the truncated gauge directions d(ι(X)Ω₀).
    pub gauge_rank: usize,
    pub signature: (usize, usize),
    /// Smallest |eigenvalue| outside the kernel.
    pub gap: f64,
    /// Largest entry of H − Hᵀ over all blocks.
    pub asymmetry: f64,
    /// Largest ‖H·v‖/‖v‖ over the gauge directions.
    pub gauge_defect: f64,
    #[serde(skip)]
    pub constant_block: DMatrix<f64>,
}

impl TransverseHessian {
    pub fn summary(&self) -> HessianSummary {
        HessianSummary {
            spectrum: self.spectrum.clone(),
            kernel_dim: self.kernel_dim,
            gauge_rank: self.gauge_rank,
            signature: self.signature,
        }
    }
}

fn flat_background(f: &FourierForm, config: &FlowConfig) -> Result<Form> {
    let r = residual(f, config.grid)?;
    if r >= config.tol {
        return Err(Error::Precondition(format!("not a critical point: residual {r:e} ≥ {:e}", config.tol)));
    }
    if f.oscillation_norm() > 1e-14 * f.l2_norm() {
        return Err(Error::Precondition("second variation is assembled on flat (constant) backgrounds".into()));
    }
    Ok(f.constant_part())
}

fn orthonormal_range(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let top = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
    let cols: Vec<usize> = (0..svd.singular_values.len()).filter(|&j| svd.singular_values[j] > RANK_TOL * top).collect();
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| u[(i, cols[j])])
}

fn rank(a: &DMatrix<f64>) -> usize {
    let sv = a.clone().singular_values();
    let top = sv.iter().fold(0.0f64, |x, &y| x.max(y));
    sv.iter().filter(|&&s| s > RANK_TOL * top).count()
}

/// Second variation over constant + exact variations in the band, at a flat critical field.
///
/// The quadratic form is block diagonal in ±m; each block is computed on an orthonormal
/// basis of m∧Λ², and kernel and gauge rank are measured independently.
pub fn transverse_hessian(f: &FourierForm, config: &FlowConfig) -> Result<TransverseHessian> {
    let omega = flat_background(f, config)?;
    let n = omega.dim();
    let hc = pointwise_hessian(&omega)?;
    let mut asym = (&hc - hc.transpose()).amax();
    let hs = (&hc + hc.transpose()) * 0.5;
    let mut spectrum: Vec<f64> = SymmetricEigen::new(hs.clone()).eigenvalues.iter().copied().collect();
    let ib: Vec<Form> = (0..n).map(|i| interior_basis(i, &omega)).collect();
    let mut gauge_rank = 0;
    let mut gauge_defect: f64 = 0.0;
    let nm = (2 * f.cutoff() + 1).pow(n as u32);
    for idx in (nm - 1) / 2 + 1..nm {
        let m = wavevector(n, f.cutoff(), idx);
        let wm = wedge_matrix(n, 2, &m);
        let v = orthonormal_range(&wm);
        let block = v.transpose() * &hc * &v;
        asym = asym.max((&block - block.transpose()).amax());
        let block = (&block + block.transpose()) * 0.5;
        let eig = SymmetricEigen::new(block.clone());
        for &e in eig.eigenvalues.iter() {
            spectrum.push(e);
            spectrum.push(e);
        }
        let gm = DMatrix::from_fn(v.nrows(), n, |r, k| (&wm * nalgebra::DVector::from_column_slice(ib[k].re()))[r]);
        gauge_rank += 2 * rank(&gm);
        for k in 0..n {
            let col = gm.column(k);
            let nrm = col.norm();
            if nrm > 0.0 {
                let coords = v.transpose() * col;
                gauge_defect = gauge_defect.max((&block * coords).norm() / nrm);
            }
        }
    }
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let top = spectrum.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let thr = KERNEL_TOL * top;
    let kernel_dim = spectrum.iter().filter(|e| e.abs() <= thr).count();
    let pos = spectrum.iter().filter(|&&e| e > thr).count();
    let neg = spectrum.iter().filter(|&&e| e < -thr).count();
    let gap = spectrum.iter().filter(|e| e.abs() > thr).fold(f64::INFINITY, |a, b| a.min(b.abs()));
    Ok(TransverseHessian {
        spectrum,
        kernel_dim,
        gauge_rank,
        signature: (pos, neg),
        gap,
        asymmetry: asym,
        gauge_defect,
        constant_block: hs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuliMetric {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub signature: (usize, usize),
    pub eigenvalues: Vec<f64>,
}

/// Second variation restricted to constant-form directions (H³ of the flat torus).
pub fn moduli_metric(f: &FourierForm, config: &FlowConfig) -> Result<ModuliMetric> {
    let omega = flat_background(f, config)?;
    let h = pointwise_hessian(&omega)?;
    let h = (&h + h.transpose()) * 0.5;
    let eigs = crate::g2::sorted_eigenvalues(&h);
    let signature = crate::g2::sign_counts(&eigs, KERNEL_TOL);
    Ok(ModuliMetric { matrix: h, signature, eigenvalues: eigs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{forms6, g2};

    fn cfg(mode: Mode, cutoff: usize) -> FlowConfig {
        FlowConfig { cutoff, grid: 4, ..FlowConfig::new(mode) }
    }

    #[test]
    fn flat_six_matches_pointwise() {
        let f = FourierForm::constant(&forms6::phi_c(), 0);
        let h = transverse_hessian(&f, &cfg(Mode::Six, 0)).unwrap();
        let sk = forms6::special_kahler(&forms6::phi_c()).unwrap();
        assert!((&h.constant_block - &sk.g_hess).amax() < 1e-8);
        assert_eq!(h.spectrum.len(), 20);
        assert_eq!(h.kernel_dim, 0);
    }

    #[test]
    fn flat_seven_matches_pointwise() {
        let f = FourierForm::constant(&g2::phi_std(), 0);
        let h = transverse_hessian(&f, &cfg(Mode::Seven, 0)).unwrap();
        let q = g2::hessian7_matrix(&g2::phi_std()).unwrap();
        assert!((&h.constant_block - &q).amax() < 1e-8);
        assert_eq!(h.signature, (8, 27));
    }

    #[test]
    fn kernel_is_gauge() {
        for mode in [Mode::Six, Mode::Seven] {
            let f = FourierForm::constant(&mode.standard_form(), 1);
            let h = transverse_hessian(&f, &cfg(mode, 1)).unwrap();
            assert_eq!(h.kernel_dim, h.gauge_rank);
            assert!(h.gauge_defect < 1e-10);
            assert!(h.asymmetry < 1e-8);
        }
    }

    #[test]
    fn rejects_non_flat() {
        let mut f = FourierForm::constant(&forms6::phi_c(), 1);
        f.set_coeff(&[1, 0, 0, 0, 0, 0], &[2, 3, 4], num_complex::Complex64::new(0.01, 0.0)).unwrap();
        assert!(matches!(transverse_hessian(&f, &cfg(Mode::Six, 1)), Err(Error::Precondition(_))));
    }
}
