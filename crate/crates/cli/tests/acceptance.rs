//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use stable_forms::suite::{forms6_suite, g2_suite, lorentz_suite, InvariantResult, SuiteResult};
use stable_forms::torus::{descend, initial_potential, transverse_hessian, CohomologyClass, FlowConfig, FourierForm, Mode};
use stable_forms::{forms6, g2, VolumeElement};

struct Line {
    ok: bool,
    detail: Vec<String>,
}

impl Line {
    fn new() -> Self {
        Line { ok: true, detail: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.ok &= ok;
        self.detail.push(format!("{}{}", if ok { "" } else { "FAIL " }, what));
    }

    /// The suite tolerance must equal the one stated for the criterion.
    fn invariant(&mut self, s: &SuiteResult, name: &str, tol: f64) {
        let inv: &InvariantResult = s.invariant(name).unwrap_or_else(|| panic!("no invariant {name}"));
        assert_eq!(inv.tol, tol, "{name} tolerance");
        self.check(inv.pass, format!("{name} {:.2e} (n={}, tol {:.0e})", inv.max_residual, inv.samples, tol));
    }

    fn runtime(&mut self, t: Instant, limit: f64) {
        let s = t.elapsed().as_secs_f64();
        self.check(s < limit, format!("{s:.1}s < {limit}s"));
    }
}

fn criterion_1() -> Line {
    let t = Instant::now();
    let mut l = Line::new();
    let eps = VolumeElement::standard();
    let lam = forms6::lambda_inv(&forms6::phi_r()).unwrap();
    l.check((lam - 1.0).abs() < 1e-12, format!("lambda(phi_R) = {lam}"));
    let k = forms6::k_map(&forms6::phi_r(), &eps).unwrap().kappa;
    let mut dev: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let want = if i != j { 0.0 } else if i < 3 { 1.0 } else { -1.0 };
            dev = dev.max((k[(i, j)] - want).abs());
        }
    }
    l.check(dev < 1e-12, format!("K(phi_R) diag(1,1,1,-1,-1,-1) dev {dev:.1e}"));
    let s = g2::g2_metric(&g2::phi_std()).unwrap();
    let mut gd: f64 = 0.0;
    for i in 0..7 {
        for j in 0..7 {
            gd = gd.max((s.g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    l.check(gd < 1e-12 && (s.vol - 1.0).abs() < 1e-12 && (s.phi - 1.0).abs() < 1e-12, format!("g(phi_std) = I dev {gd:.1e}, vol {}, phi {}", s.vol, s.phi));
    l.runtime(t, 1.0);
    l
}

fn main() {
    let seed = 1;
    let mut lines: Vec<(usize, &str, Line)> = Vec::new();
    lines.push((1, "standard-form goldens", criterion_1()));

    let t = Instant::now();
    let f6 = forms6_suite(seed);
    let f6_time = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let g7 = g2_suite(seed);
    let g7_time = t.elapsed().as_secs_f64();

    let mut l = Line::new();
    l.invariant(&f6, "lambda_equivariance", 1e-8);
    l.invariant(&g7, "metric_equivariance", 1e-8);
    l.invariant(&g7, "phi_equivariance", 1e-8);
    l.check(f6_time + g7_time < 10.0, format!("suites {:.1}s < 10s", f6_time + g7_time));
    lines.push((2, "equivariance", l));

    let mut l = Line::new();
    for name in ["kappa_traceless", "kappa_squared", "hat_involution", "omega_wedge_hat", "moment_map"] {
        l.invariant(&f6, name, 1e-9);
    }
    l.invariant(&g7, "omega_star_omega_6phi", 1e-9);
    l.detail.push(format!("measured Omega^*Omega / phi = {}", g7.records["omega_star_omega_over_phi"]));
    lines.push((3, "structural identities", l));

    let mut l = Line::new();
    l.invariant(&f6, "phi_derivative_fd", 1e-5);
    l.invariant(&g7, "phi_derivative_7_18", 1e-5);
    l.detail.push(format!("measured factor {}", g7.records["phi_derivative_factor"]));
    l.invariant(&g7, "d_theta_fd", 1e-5);
    l.invariant(&f6, "j_squared", 1e-5);
    l.invariant(&f6, "j_type", 1e-5);
    l.check(f6_time + g7_time < 60.0, format!("suites {:.1}s < 60s", f6_time + g7_time));
    lines.push((4, "derivative oracles", l));

    let mut l = Line::new();
    let sk = forms6::special_kahler(&forms6::phi_c()).unwrap();
    let sig6 = g2::sign_counts(&g2::sorted_eigenvalues(&sk.g_hess), 1e-8);
    l.check(sig6 == (2, 18), format!("6D Hessian signature {sig6:?}, stated (2, 18)"));
    l.invariant(&g7, "hessian_eigenvalues", 1e-8);
    let sig7 = g2::hessian7_signature(&g2::phi_std()).unwrap();
    l.check(sig7 == (8, 27), format!("7D signature {sig7:?}"));
    lines.push((5, "signatures", l));

    let t = Instant::now();
    let lz = lorentz_suite(seed);
    let mut l = Line::new();
    l.invariant(&lz, "sd_lambda", 1e-8);
    l.check(lz.invariant("sd_lambda").unwrap().samples == 500, "500 self-dual samples".into());
    l.invariant(&lz, "hat_antiselfdual", 1e-8);
    l.invariant(&lz, "lagrangian_plus", 1e-10);
    l.invariant(&lz, "lagrangian_minus", 1e-10);
    for name in ["graph_zero", "graph_constant", "graph_identity"] {
        l.invariant(&lz, name, 1e-6);
    }
    l.runtime(t, 30.0);
    lines.push((6, "lorentz", l));

    let mut l = Line::new();
    l.invariant(&g7, "legendre_duality", 1e-8);
    lines.push((7, "legendre duality", l));

    let t = Instant::now();
    let mut l = Line::new();
    for mode in [Mode::Six, Mode::Seven] {
        let n = mode.dim();
        let class = CohomologyClass::new(mode.standard_form()).unwrap();
        let config = FlowConfig::new(mode);
        let beta = initial_potential(&class, 1, 0.05, 42).unwrap();
        let rep = descend(&class, &beta, &config).unwrap();
        let last = *rep.residual_history.last().unwrap();
        l.check(last < 1e-6 && rep.iterations <= 5000, format!("{n}D G={} residual {last:.2e} after {} iterations", config.grid, rep.iterations));
        let th = transverse_hessian(&FourierForm::constant(&class.constant, 1), &config).unwrap();
        l.check(th.kernel_dim == th.gauge_rank, format!("{n}D kernel {} = gauge rank {}", th.kernel_dim, th.gauge_rank));
        let cfg0 = FlowConfig { cutoff: 0, ..config };
        let h0 = transverse_hessian(&FourierForm::constant(&class.constant, 0), &cfg0).unwrap().constant_block;
        let pw = match mode {
            Mode::Six => forms6::special_kahler(&class.constant).unwrap().g_hess,
            Mode::Seven => g2::hessian7_matrix(&class.constant).unwrap(),
        };
        let d = (&h0 - &pw).amax();
        l.check(d < 1e-8, format!("{n}D N=0 Hessian vs pointwise {d:.1e}"));
    }
    l.runtime(t, 300.0);
    lines.push((8, "torus flow", l));

    let mut l = Line::new();
    let cases: [&[&str]; 3] = [&["suite", "all"], &["flow", "--dim", "6"], &["flow", "--dim", "7"]];
    for args in cases {
        let outs: Vec<Vec<u8>> = ["1", "2", "1"]
            .iter()
            .map(|th| {
                let o = Command::new(env!("CARGO_BIN_EXE_stable-forms"))
                    .args(args)
                    .env("STABLE_FORMS_THREADS", th)
                    .output()
                    .expect("binary runs");
                assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
                o.stdout
            })
            .collect();
        l.check(outs.windows(2).all(|w| w[0] == w[1]), format!("{} identical at 1/2/1 threads ({} bytes)", args.join(" "), outs[0].len()));
    }
    lines.push((9, "determinism", l));

    let mut failed = 0;
    for (k, name, l) in &lines {
        println!("criterion {k} ({name}): {}: {}", if l.ok { "PASS" } else { "FAIL" }, l.detail.join("; "));
        failed += usize::from(!l.ok);
    }
    println!("{} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
