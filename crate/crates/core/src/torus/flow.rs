use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::fourier::{codifferential, exterior_derivative, FourierForm};
use super::kernels::{dual_lift, hat6, tangent, theta7, top_pairing, PointFailure};
use crate::error::{Error, Result};
use crate::exterior::{binomial, Form};
use crate::sample::rng;
use crate::{forms6, g2};

/// Which functional: √|λ| on T⁶ or det(b)^{1/9} on T⁷.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Six,
    Seven,
}

impl Mode {
    pub fn from_dim(n: usize) -> Result<Mode> {
        match n {
            6 => Ok(Mode::Six),
            7 => Ok(Mode::Seven),
            _ => Err(Error::dim(format!("torus dimension must be 6 or 7, got {n}"))),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Mode::Six => 6,
            Mode::Seven => 7,
        }
    }

    /// Degree of the field the residual differentiates: Ω̂ (3) or ∗Ω (4).
    pub fn out_degree(self) -> usize {
        match self {
            Mode::Six => 3,
            Mode::Seven => 4,
        }
    }

    /// The standard constant representative: φ_C or φ_std.
    pub fn standard_form(self) -> Form {
        match self {
            Mode::Six => forms6::phi_c(),
            Mode::Seven => g2::phi_std(),
        }
    }
}

/// The fixed constant part of the field.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyClass {
    pub constant: Form,
}

impl CohomologyClass {
    pub fn new(constant: Form) -> Result<Self> {
        Mode::from_dim(constant.dim())?;
        if constant.degree() != 3 || constant.is_complex() {
            return Err(Error::degree("class representative must be a real 3-form"));
        }
        Ok(CohomologyClass { constant })
    }

    pub fn mode(&self) -> Mode {
        Mode::from_dim(self.constant.dim()).expect("checked in new")
    }

    /// Ω₀ + dβ.
    pub fn field(&self, beta: &FourierForm) -> Result<FourierForm> {
        if beta.degree() != 2 || beta.n() != self.constant.dim() {
            return Err(Error::degree("potential must be a 2-form on the same torus"));
        }
        let mut f = exterior_derivative(beta)?;
        let c = f.center();
        let nc = f.ncomp();
        for (i, &x) in self.constant.re().iter().enumerate() {
            f.coeffs_mut()[c * nc + i] += Complex64::new(x, 0.0);
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    pub grid: usize,
    pub cutoff: usize,
    pub initial_step: f64,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl FlowConfig {
    pub fn new(mode: Mode) -> Self {
        FlowConfig {
            grid: match mode {
                Mode::Six => 8,
                Mode::Seven => 5,
            },
            cutoff: 1,
            initial_step: 1.0,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            tol: 1e-6,
            max_iter: 5000,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 * self.cutoff + 2 {
            return Err(Error::Precondition(format!(
                "grid {} too coarse for cutoff {} (need at least {})",
                self.grid,
                self.cutoff,
                2 * self.cutoff + 2
            )));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || self.initial_step <= 0.0 || self.tol <= 0.0 {
            return Err(Error::Precondition("invalid step policy".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlowStatus {
    Converged,
    #[serde(rename = "FlowStalled")]
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessianSummary {
    pub spectrum: Vec<f64>,
    pub kernel_dim: usize,
    pub gauge_rank: usize,
    pub signature: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub dim: usize,
    #[serde(rename = "N")]
    pub cutoff: usize,
    #[serde(rename = "G")]
    pub grid: usize,
    pub seed: u64,
    pub status: FlowStatus,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub final_phi: f64,
    pub hessian: Option<HessianSummary>,
    #[serde(skip)]
    pub final_beta: FourierForm,
}

// ---------------------------------------------------------------------------
// pointwise evaluation over the grid

const CHUNK: usize = 1024;

/// Worker count: STABLE_FORMS_THREADS if set, else the available parallelism.
pub fn thread_count() -> usize {
    std::env::var("STABLE_FORMS_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Runs `f` over fixed-size point chunks. Outputs are per point and the per-chunk
/// scalars are returned in chunk order, so results do not depend on the thread count.
fn par_points<F>(npts: usize, out_stride: usize, out: &mut [f64], f: F) -> Vec<std::result::Result<f64, (usize, PointFailure)>>
where
    F: Fn(Range<usize>, &mut [f64]) -> std::result::Result<f64, (usize, PointFailure)> + Sync,
{
    let nchunks = npts.div_ceil(CHUNK);
    let threads = thread_count().min(nchunks).max(1);
    let mut results = vec![Ok(0.0); nchunks];
    let mut slots: Vec<(usize, &mut [f64], &mut std::result::Result<f64, (usize, PointFailure)>)> = out
        .chunks_mut(CHUNK * out_stride)
        .zip(results.iter_mut())
        .enumerate()
        .map(|(i, (o, r))| (i, o, r))
        .collect();
    if threads == 1 {
        for (i, o, r) in slots.iter_mut() {
            **r = f(*i * CHUNK..((*i + 1) * CHUNK).min(npts), o);
        }
    } else {
        let mut buckets: Vec<Vec<_>> = (0..threads).map(|_| Vec::new()).collect();
        for (k, s) in slots.into_iter().enumerate() {
            buckets[k % threads].push(s);
        }
        std::thread::scope(|sc| {
            for bucket in buckets {
                let f = &f;
                sc.spawn(move || {
                    for (i, o, r) in bucket {
                        *r = f(i * CHUNK..((i + 1) * CHUNK).min(npts), o);
                    }
                });
            }
        });
    }
    results
}

fn collect_chunks(results: Vec<std::result::Result<f64, (usize, PointFailure)>>, n: usize, g: usize) -> Result<f64> {
    let mut total = 0.0;
    for r in results {
        match r {
            Ok(s) => total += s,
            Err((p, why)) => {
                let mut x = vec![0usize; n];
                let mut q = p;
                for i in (0..n).rev() {
                    x[i] = q % g;
                    q /= g;
                }
                let what = match why {
                    PointFailure::NotNegative(l) => format!("λ = {l:e} is not negative"),
                    PointFailure::NotDefinite => "the form is not positive".to_string(),
                };
                return Err(Error::Orbit(format!("grid point {x:?}: {what}")));
            }
        }
    }
    Ok(total)
}

fn band(mode: Mode, o: &[f64]) -> f64 {
    let s: f64 = o.iter().map(|x| x * x).sum();
    match mode {
        Mode::Six => forms6::DEAD_BAND * s * s,
        Mode::Seven => g2::DEAD_BAND,
    }
}

/// Pointwise nonlinear map: returns the output field (Ω̂ or Θ on the grid) and the grid mean of φ.
pub(crate) fn pointwise(mode: Mode, omega: &[f64], g: usize) -> Result<(Vec<f64>, f64)> {
    let n = mode.dim();
    let nin = binomial(n, 3);
    let nout = binomial(n, mode.out_degree());
    let npts = omega.len() / nin;
    let mut out = vec![0.0; npts * nout];
    let results = par_points(npts, nout, &mut out, |r, o| {
        let mut sum = 0.0;
        for (k, p) in r.clone().enumerate() {
            let x = &omega[p * nin..(p + 1) * nin];
            let bd = band(mode, x);
            let phi = match mode {
                Mode::Six => {
                    let (h, phi) = hat6::<f64>(x.try_into().unwrap(), bd).map_err(|e| (p, e))?;
                    o[k * nout..(k + 1) * nout].copy_from_slice(&h);
                    phi
                }
                Mode::Seven => {
                    let (t, phi) = theta7::<f64>(x.try_into().unwrap(), bd).map_err(|e| (p, e))?;
                    o[k * nout..(k + 1) * nout].copy_from_slice(&t);
                    phi
                }
            };
            sum += phi;
        }
        Ok(sum)
    });
    let total = collect_chunks(results, n, g)?;
    Ok((out, total / npts as f64))
}

/// Pairing permutation P: a ∈ Λ³ ↦ the Λ^{n−3} form with [a ∧ b] = ⟨P a, b⟩.
fn apply_pairing(pairs: &[(usize, usize, f64)], x: &[f64], transpose: bool, y: &mut [f64]) {
    for &(a, c, s) in pairs {
        if transpose {
            y[a] = s * x[c];
        } else {
            y[c] = s * x[a];
        }
    }
}

/// Pointwise adjoint of the derivative of the output map, applied to a grid field `s`.
fn pointwise_vjp(mode: Mode, omega: &[f64], s: &[f64], g: usize) -> Result<Vec<f64>> {
    let n = mode.dim();
    let nin = binomial(n, 3);
    let pairs = top_pairing(n, 3);
    let npts = omega.len() / nin;
    let mut out = vec![0.0; npts * nin];
    let results = par_points(npts, nin, &mut out, |r, o| {
        for (k, p) in r.clone().enumerate() {
            let x = &omega[p * nin..(p + 1) * nin];
            let sp = &s[p * nin..(p + 1) * nin];
            let bd = band(mode, x);
            // Dᵀ u = P · D(P u), P the top-degree pairing
            match mode {
                Mode::Six => {
                    let mut pu = [0.0; 20];
                    apply_pairing(&pairs, sp, true, &mut pu);
                    let xa: [f64; 20] = x.try_into().unwrap();
                    let (h, _) = hat6(&dual_lift(&xa, &pu), bd).map_err(|e| (p, e))?;
                    apply_pairing(&pairs, &tangent(&h), true, &mut o[k * nin..(k + 1) * nin]);
                }
                Mode::Seven => {
                    let mut pu = [0.0; 35];
                    apply_pairing(&pairs, sp, true, &mut pu);
                    let xa: [f64; 35] = x.try_into().unwrap();
                    let (t, _) = theta7(&dual_lift(&xa, &pu), bd).map_err(|e| (p, e))?;
                    apply_pairing(&pairs, &tangent(&t), true, &mut o[k * nin..(k + 1) * nin]);
                }
            }
        }
        Ok(0.0)
    });
    collect_chunks(results, n, g)?;
    Ok(out)
}

fn check_field(f: &FourierForm) -> Result<Mode> {
    let mode = Mode::from_dim(f.n())?;
    if f.degree() != 3 {
        return Err(Error::degree(format!("degree must be 3, got {}", f.degree())));
    }
    Ok(mode)
}

/// Grid mean of √|λ| (T⁶) or φ (T⁷); the torus has volume 1.
pub fn functional_value(f: &FourierForm, g: usize) -> Result<f64> {
    let mode = check_field(f)?;
    let (_, phi) = pointwise(mode, &f.to_grid(g), g)?;
    Ok(phi)
}

/// Orientation sign of Θ relative to Ω: [Ω ∧ Θ] = 7sφ.
fn orientation7(o: &[f64], t: &[f64]) -> f64 {
    let mut v = 0.0;
    for (a, c, s) in top_pairing(7, 3) {
        v += s * o[a] * t[c];
    }
    v.signum()
}

/// L² gradient field of Φ with respect to the potential β (a band-limited 2-form).
pub fn functional_gradient_field(f: &FourierForm, g: usize) -> Result<FourierForm> {
    let mode = check_field(f)?;
    let n = mode.dim();
    let nin = binomial(n, 3);
    let omega = f.to_grid(g);
    let (out, _) = pointwise(mode, &omega, g)?;
    let pairs = top_pairing(n, 3);
    let npts = omega.len() / nin;
    // ∇φ = P·Ω̂ (6D) or P·Θ/(3s) (7D)
    let mut grad = vec![0.0; npts * nin];
    for p in 0..npts {
        let o = &out[p * nin..(p + 1) * nin];
        let dst = &mut grad[p * nin..(p + 1) * nin];
        apply_pairing(&pairs, o, true, dst);
        if mode == Mode::Seven {
            let s = orientation7(&omega[p * nin..(p + 1) * nin], o);
            dst.iter_mut().for_each(|x| *x /= 3.0 * s);
        }
    }
    let gb = FourierForm::from_grid(n, 3, f.cutoff(), g, &grad);
    codifferential(&gb)
}

/// ∂Φ/∂x for the potential coordinates x of [`FourierForm::to_coordinates`].
pub fn functional_gradient(f: &FourierForm, g: usize) -> Result<Vec<f64>> {
    let gf = functional_gradient_field(f, g)?;
    Ok(gf.to_coordinates().into_iter().map(|x| 2.0 * x).collect())
}

struct Eval {
    omega: Vec<f64>,
    resid: FourierForm,
    norm: f64,
    phi: f64,
}

fn evaluate(mode: Mode, f: &FourierForm, g: usize) -> Result<Eval> {
    let n = mode.dim();
    let omega = f.to_grid(g);
    let (out, phi) = pointwise(mode, &omega, g)?;
    let h = FourierForm::from_grid(n, mode.out_degree(), f.cutoff(), g, &out);
    let resid = exterior_derivative(&h)?;
    let norm = resid.l2_norm();
    Ok(Eval { omega, resid, norm, phi })
}

/// ‖P_N d(Ω̂)‖ (T⁶) or ‖P_N d(∗Ω)‖ (T⁷) in L², with P_N the band projection of the grid samples.
pub fn residual(f: &FourierForm, g: usize) -> Result<f64> {
    let mode = check_field(f)?;
    Ok(evaluate(mode, f, g)?.norm)
}

/// L² gradient of ½‖r‖² with respect to β at an evaluated point.
fn residual_gradient(mode: Mode, e: &Eval, g: usize) -> Result<FourierForm> {
    let n = mode.dim();
    let s = codifferential(&e.resid)?;
    let s_grid = s.to_grid(g);
    let v = pointwise_vjp(mode, &e.omega, &s_grid, g)?;
    let vb = FourierForm::from_grid(n, 3, e.resid.cutoff(), g, &v);
    codifferential(&vb)
}

/// Matrix of the pointwise output derivative at a constant form (columns D(e_A)).
pub(crate) fn output_jacobian(mode: Mode, omega: &[f64]) -> Result<DMatrix<f64>> {
    let n = mode.dim();
    let nin = binomial(n, 3);
    let nout = binomial(n, mode.out_degree());
    let bd = band(mode, omega);
    let mut m = DMatrix::zeros(nout, nin);
    for a in 0..nin {
        let col: Vec<f64> = match mode {
            Mode::Six => {
                let mut u = [0.0; 20];
                u[a] = 1.0;
                let (h, _) = hat6(&dual_lift(omega.try_into().unwrap(), &u), bd)
                    .map_err(|_| Error::orbit("representative is not in the negative orbit"))?;
                tangent(&h).to_vec()
            }
            Mode::Seven => {
                let mut u = [0.0; 35];
                u[a] = 1.0;
                let (t, _) = theta7(&dual_lift(omega.try_into().unwrap(), &u), bd)
                    .map_err(|_| Error::orbit("representative is not a positive form"))?;
                tangent(&t).to_vec()
            }
        };
        for (i, x) in col.into_iter().enumerate() {
            m[(i, a)] = x;
        }
    }
    Ok(m)
}

/// Per-mode Gauss–Newton preconditioner from the linearization at the constant representative.
struct Preconditioner {
    blocks: Vec<DMatrix<f64>>,
    // orthogonal projector onto the complement of closed and gauge potentials
    slice: Vec<DMatrix<f64>>,
}

impl Preconditioner {
    fn new(mode: Mode, omega0: &Form, cutoff: usize) -> Result<Self> {
        let n = mode.dim();
        let d0 = output_jacobian(mode, omega0.re())?;
        let k2 = binomial(n, 2);
        let k3 = binomial(n, 3);
        let nm = (2 * cutoff + 1).pow(n as u32);
        let c = (nm - 1) / 2;
        let mut blocks = Vec::with_capacity(nm - 1 - c);
        let mut slice = Vec::with_capacity(nm - 1 - c);
        for mode_idx in c + 1..nm {
            let m = super::fourier::wavevector(n, cutoff, mode_idx);
            let wm = wedge_matrix(n, 2, &m);
            let wo = wedge_matrix(n, mode.out_degree(), &m);
            let l = &wo * &d0 * &wm;
            debug_assert_eq!(wm.ncols(), k2);
            debug_assert_eq!(wm.nrows(), k3);
            let mtm = l.transpose() * &l;
            let eig = SymmetricEigen::new(mtm);
            let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let mut pinv = DMatrix::zeros(k2, k2);
            let mut proj = DMatrix::zeros(k2, k2);
            for (j, &ev) in eig.eigenvalues.iter().enumerate() {
                if ev > 1e-10 * top {
                    let v = eig.eigenvectors.column(j);
                    pinv += (v * v.transpose()) / ev;
                    proj += v * v.transpose();
                }
            }
            blocks.push(pinv);
            slice.push(proj);
        }
        Ok(Preconditioner { blocks, slice })
    }

    fn apply(&self, gr: &FourierForm) -> FourierForm {
        Self::apply_blocks(&self.blocks, gr)
    }

    fn project(&self, gr: &FourierForm) -> FourierForm {
        Self::apply_blocks(&self.slice, gr)
    }

    fn apply_blocks(blocks: &[DMatrix<f64>], gr: &FourierForm) -> FourierForm {
        let nc = gr.ncomp();
        let nm = gr.nmodes();
        let c = gr.center();
        let mut out = FourierForm::zeros(gr.n(), gr.degree(), gr.cutoff());
        for (k, mode) in (c + 1..nm).enumerate() {
            let b = &blocks[k];
            for side in [mode, nm - 1 - mode] {
                let src = &gr.coeffs()[side * nc..(side + 1) * nc];
                let dst = &mut out.coeffs_mut()[side * nc..(side + 1) * nc];
                for i in 0..nc {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..nc {
                        acc += src[j] * b[(i, j)];
                    }
                    dst[i] = acc;
                }
            }
        }
        out
    }
}

/// Real matrix of v ↦ m ∧ v on k-forms.
pub(crate) fn wedge_matrix(n: usize, k: usize, m: &[i64]) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(binomial(n, k + 1), binomial(n, k));
    for &(i, ia, o, s) in &crate::exterior::wedge_table(n, 1, k).entries {
        w[(o as usize, ia as usize)] += s * m[i as usize] as f64;
    }
    w
}

/// Random potential with ‖dβ‖ = eps·‖Ω₀‖, drawn from a stream of `seed`.
///
/// The draw is projected off the closed potentials and off the gauge potentials ι(X)Ω₀,
/// mode by mode, before rescaling. Truncation breaks gauge invariance, so a gauge component
/// would otherwise persist through the flow and pin the residual above zero.
pub fn initial_potential(class: &CohomologyClass, cutoff: usize, eps: f64, seed: u64) -> Result<FourierForm> {
    let n = class.constant.dim();
    if eps == 0.0 || cutoff == 0 {
        return Ok(FourierForm::zeros(n, 2, cutoff));
    }
    let mut r = rng(seed, 11);
    let pre = Preconditioner::new(class.mode(), &class.constant, cutoff)?;
    let beta = pre.project(&FourierForm::random(&mut r, n, 2, cutoff));
    let db = exterior_derivative(&beta)?.l2_norm();
    Ok(beta.scale(eps * class.constant.norm() / db))
}

/// Minimizes ½‖residual‖² over β by preconditioned gradient descent with Armijo backtracking.
///
/// The search direction is the gradient mapped through the per-mode Gauss–Newton
/// pseudo-inverse of the linearization at the constant representative.
/// A trial point outside the orbit counts as a failed Armijo test.
pub fn descend(class: &CohomologyClass, init_beta: &FourierForm, config: &FlowConfig) -> Result<FlowReport> {
    config.validate()?;
    let mode = class.mode();
    let g = config.grid;
    if init_beta.cutoff() != config.cutoff {
        return Err(Error::Precondition("potential cutoff differs from config".into()));
    }
    let mut beta = init_beta.clone();
    let mut cur = evaluate(mode, &class.field(&beta)?, g)?;
    let mut history = vec![cur.norm];
    let mut iterations = 0;
    let mut status = FlowStatus::Converged;
    let pre = if cur.norm >= config.tol { Some(Preconditioner::new(mode, &class.constant, config.cutoff)?) } else { None };
    while cur.norm >= config.tol {
        if iterations >= config.max_iter {
            status = FlowStatus::Stalled;
            break;
        }
        let grad = residual_gradient(mode, &cur, g)?;
        let mut dir = pre.as_ref().expect("built when needed").apply(&grad).scale(-1.0);
        let mut slope = grad.inner(&dir);
        if slope >= 0.0 {
            dir = grad.scale(-1.0);
            slope = -grad.inner(&grad);
        }
        let f0 = 0.5 * cur.norm * cur.norm;
        let mut t = config.initial_step;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let mut trial = beta.clone();
            trial.axpy(t, &dir);
            match evaluate(mode, &class.field(&trial)?, g) {
                Ok(e) if 0.5 * e.norm * e.norm <= f0 + config.armijo_c * t * slope => {
                    accepted = Some((trial, e));
                    break;
                }
                Ok(_) | Err(Error::Orbit(_)) => t *= config.backtrack,
                Err(e) => return Err(e),
            }
        }
        match accepted {
            Some((b, e)) => {
                beta = b;
                cur = e;
                iterations += 1;
                history.push(cur.norm);
            }
            None => {
                status = FlowStatus::Stalled;
                break;
            }
        }
    }
    Ok(FlowReport {
        dim: mode.dim(),
        cutoff: config.cutoff,
        grid: g,
        seed: config.seed,
        status,
        iterations,
        residual_history: history,
        final_phi: cur.phi,
        hessian: None,
        final_beta: beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values() {
        let f = FourierForm::constant(&forms6::phi_c(), 1);
        assert!((functional_value(&f, 4).unwrap() - 8.0).abs() < 1e-12);
        assert!((functional_value(&f.scale(1.5), 4).unwrap() - 18.0).abs() < 1e-12);
        assert!(residual(&f, 4).unwrap() < 1e-14);
        let f = FourierForm::constant(&g2::phi_std(), 1);
        assert!((functional_value(&f, 4).unwrap() - 1.0).abs() < 1e-12);
        assert!(residual(&f, 4).unwrap() < 1e-14);
    }

    #[test]
    fn orbit_violation_names_point() {
        let f = FourierForm::constant(&forms6::phi_r(), 1);
        match functional_value(&f, 4) {
            Err(Error::Orbit(msg)) => assert!(msg.contains("[0, 0, 0, 0, 0, 0]"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    fn fd_check(mode: Mode, g: usize) {
        let class = CohomologyClass::new(mode.standard_form()).unwrap();
        let beta = initial_potential(&class, 1, 0.05, 5).unwrap();
        let f = class.field(&beta).unwrap();
        let grad = functional_gradient(&f, g).unwrap();
        let x = beta.to_coordinates();
        let h = 1e-5;
        let scale = grad.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        for k in (0..x.len()).step_by(x.len() / 13) {
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let fp = functional_value(&class.field(&FourierForm::from_coordinates(mode.dim(), 2, 1, &xp).unwrap()).unwrap(), g).unwrap();
            let fm = functional_value(&class.field(&FourierForm::from_coordinates(mode.dim(), 2, 1, &xm).unwrap()).unwrap(), g).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!((fd - grad[k]).abs() < 1e-5 * scale, "{k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn gradient_matches_fd_6() {
        fd_check(Mode::Six, 4);
    }

    #[test]
    fn gradient_matches_fd_7() {
        fd_check(Mode::Seven, 4);
    }

    fn vjp_check(mode: Mode) {
        let class = CohomologyClass::new(mode.standard_form()).unwrap();
        let beta = initial_potential(&class, 1, 0.05, 9).unwrap();
        let g = 4;
        let e = evaluate(mode, &class.field(&beta).unwrap(), g).unwrap();
        let grad = residual_gradient(mode, &e, g).unwrap();
        let mut r = rng(10, 0);
        let dir = FourierForm::random(&mut r, mode.dim(), 2, 1).scale(1e-2);
        let h = 1e-5;
        let mut bp = beta.clone();
        bp.axpy(h, &dir);
        let mut bm = beta.clone();
        bm.axpy(-h, &dir);
        let rp = residual(&class.field(&bp).unwrap(), g).unwrap();
        let rm = residual(&class.field(&bm).unwrap(), g).unwrap();
        let fd = (0.5 * rp * rp - 0.5 * rm * rm) / (2.0 * h);
        let an = grad.inner(&dir);
        assert!((fd - an).abs() < 1e-6 * an.abs(), "{fd} vs {an}");
    }

    #[test]
    fn residual_gradient_matches_fd_6() {
        vjp_check(Mode::Six);
    }

    #[test]
    fn residual_gradient_matches_fd_7() {
        vjp_check(Mode::Seven);
    }

    #[test]
    fn zero_perturbation_takes_no_steps() {
        let class = CohomologyClass::new(forms6::phi_c()).unwrap();
        let cfg = FlowConfig::new(Mode::Six);
        let beta = initial_potential(&class, 1, 0.0, 42).unwrap();
        let rep = descend(&class, &beta, &FlowConfig { grid: 4, ..cfg }).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.residual_history.len(), 1);
        assert!(rep.residual_history[0] < 1e-14);
        assert_eq!(rep.status, FlowStatus::Converged);
    }
}
