//! Seeded random inputs for property checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::exterior::{binomial, Form};

pub type SampleRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn rng(seed: u64, stream: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn normal_vec<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_form<R: Rng>(rng: &mut R, dim: usize, degree: usize) -> Form {
    Form::from_real(dim, degree, normal_vec(rng, binomial(dim, degree))).expect("shape is valid")
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_iterator(n, n, normal_vec(rng, n * n))
}

/// Identity plus a normal perturbation of size `s`, sign-flipped if needed so det > 0.
pub fn random_gl_plus<R: Rng>(rng: &mut R, n: usize, s: f64) -> DMatrix<f64> {
    let mut a = DMatrix::identity(n, n) + random_matrix(rng, n) * s;
    if a.determinant() < 0.0 {
        a.row_mut(0).neg_mut();
    }
    a
}

pub fn random_traceless<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut a = random_matrix(rng, n);
    let t = a.trace() / n as f64;
    for i in 0..n {
        a[(i, i)] -= t;
    }
    a
}

pub fn random_skew<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n);
    (&a - a.transpose()) * 0.5
}

/// Random rotation via QR of a normal matrix.
pub fn random_rotation<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = random_matrix(rng, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}
