//! Acceptance suite: every quantitative claim the lab is expected to
//! reproduce at desk scale, one test per criterion, each printing a single
//! PASS/FAIL line (visible with `--nocapture`, or on failure).
//!
//! All tolerances are pinned here, in code. The simulation criteria use
//! configurations whose windows sit inside the validity region of the
//! asymptotics on a truncated domain (box-size and horizon effects are
//! discussed inline).

use gradabs_cli::config::ExperimentConfig;
use gradabs_cli::experiment::run_experiment;
use gradabs_cli::report::RunReport;
use gradabs_cli::sweep::{run_sweep, SweepSpec};

use gradabs_core::exponents::{critical_exponents, sigma_constants, Params};
use gradabs_core::verify::{
    check_stationary_supersolution, check_time_supersolution, Bernstein, BernsteinChoice,
    DerivativeMode, TimeBarrier,
};

fn pass_line(criterion: &str, detail: &str) {
    println!("criterion {criterion}: PASS — {detail}");
}

fn run_config(json: &str) -> RunReport {
    let config = ExperimentConfig::from_json(json).expect("config parses");
    run_experiment(&config).expect("experiment runs").report
}

fn check(report: &RunReport, id_prefix: &str) -> (bool, f64, String) {
    let run = report.run.as_ref().expect("run block");
    assert!(run.aborted.is_none(), "solver aborted: {:?}", run.aborted);
    let c = run
        .checks
        .iter()
        .find(|c| c.id.starts_with(id_prefix))
        .unwrap_or_else(|| panic!("check {id_prefix} missing"));
    (c.passed, c.measured, c.note.clone())
}

// ---------------------------------------------------------------- 1 ----

#[test]
fn criterion_01_exponent_table() {
    // Hand-computed table; None marks exponents outside their domain.
    #[allow(clippy::type_complexity)]
    let table: [(f64, f64, u32, [f64; 5], [Option<f64>; 3]); 12] = [
        // p, q, N, [p_c, p_sc, q_star, k, q_1], [xi, eta, theta]
        (
            1.5,
            1.0,
            2,
            [4.0 / 3.0, 1.2, 5.0 / 6.0, 0.375, 2.0 / 3.0],
            [Some(1.0), Some(2.0), None],
        ),
        (
            1.5,
            0.75,
            1,
            [1.0, 1.0, 1.0, 0.5, 0.5],
            [Some(2.0), Some(1.0), Some(2.0 / 3.0)],
        ),
        (
            1.2,
            1.5,
            2,
            [4.0 / 3.0, 1.2, 1.2 - 2.0 / 3.0, 0.0, 2.0 / 3.0],
            [Some(0.4), None, None],
        ),
        (
            1.9,
            0.95,
            1,
            [1.0, 1.0, 1.4, 0.1, 0.9],
            [Some(10.0 / 9.0), Some(5.0 / 9.0), Some(18.0 / 19.0)],
        ),
        (
            4.0 / 3.0,
            1.0,
            2,
            [4.0 / 3.0, 1.2, 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0],
            [Some(1.0), None, None],
        ),
        (
            1.1,
            0.3,
            3,
            [1.5, 4.0 / 3.0, 0.35, -3.15, 0.75],
            [None, None, Some(0.25)],
        ),
        (
            1.6,
            0.8,
            1,
            [1.0, 1.0, 1.1, 0.4, 0.6],
            [Some(5.0 / 3.0), Some(5.0 / 6.0), Some(0.75)],
        ),
        (
            1.75,
            2.5,
            4,
            [1.6, 10.0 / 7.0, 0.95, 0.1875, 0.8],
            [Some(2.0 / 17.0), Some(4.0 / 3.0), None],
        ),
        (
            1.4,
            0.56,
            1,
            [1.0, 1.0, 0.9, 0.6, 0.5],
            [Some(25.0 / 3.0), Some(1.25), Some(17.0 / 21.0)],
        ),
        (
            1.6,
            0.64,
            1,
            [1.0, 1.0, 1.1, 0.4, 0.6],
            [Some(25.0 / 7.0), Some(5.0 / 6.0), Some(23.0 / 24.0)],
        ),
        (
            1.5,
            0.5,
            2,
            [4.0 / 3.0, 1.2, 5.0 / 6.0, 0.375, 2.0 / 3.0],
            [None, Some(2.0), Some(1.0)],
        ),
        (
            1.5,
            3.0,
            3,
            [1.5, 4.0 / 3.0, 0.75, 0.25, 0.75],
            [Some(1.0 / 9.0), None, None],
        ),
    ];
    let tol = 1e-12;
    for (p, q, n, fixed, optional) in table {
        let e = critical_exponents(&Params::new(p, q, n).unwrap());
        let got = [e.p_c, e.p_sc, e.q_star, e.k, e.q_1];
        for (g, want) in got.iter().zip(&fixed) {
            assert!(
                (g - want).abs() < tol,
                "({p},{q},{n}): got {g}, want {want}"
            );
        }
        for (g, want) in [e.xi, e.eta, e.theta].iter().zip(&optional) {
            match (g, want) {
                (Some(g), Some(w)) => {
                    assert!((g - w).abs() < tol, "({p},{q},{n}): got {g}, want {w}")
                }
                (None, None) => {}
                other => panic!("({p},{q},{n}): presence mismatch {other:?}"),
            }
        }
    }
    pass_line("1 (exponent table)", "12 triples reproduced to 1e-12");
}

// ---------------------------------------------------------------- 2 ----

#[test]
fn criterion_02_bernstein_identities() {
    let cases = [
        (BernsteinChoice::SharpPower, 1.5, 1.2, 1, 1.0),
        (BernsteinChoice::BalancedPower, 1.5, 0.6, 1, 1.0),
        (BernsteinChoice::CriticalLog, 4.0 / 3.0, 1.0, 2, 1.0),
        (
            BernsteinChoice::CriticalLogHalf,
            4.0 / 3.0,
            2.0 / 3.0,
            2,
            2.0,
        ),
        (BernsteinChoice::SubcriticalImplicit, 1.25, 0.5, 2, 1.0),
        (BernsteinChoice::HjSqrt, 1.5, 0.7, 1, 1.0),
        (BernsteinChoice::HjPower, 1.5, 2.0, 1, 1.0),
    ];
    let mut worst_closed: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for (choice, p, q, n, u0) in cases {
        let params = Params::new(p, q, n).unwrap();
        let b = Bernstein::new(choice, &params, u0).unwrap();
        let report = b.certify(64).unwrap();
        assert!(
            report.max_residual < 1e-6,
            "{}: closed residual {}",
            choice.as_str(),
            report.max_residual
        );
        assert!(
            report.fd_max_deviation < 1e-4,
            "{}: fd deviation {}",
            choice.as_str(),
            report.fd_max_deviation
        );
        assert!(report.passed);
        worst_closed = worst_closed.max(report.max_residual);
        worst_fd = worst_fd.max(report.fd_max_deviation);
    }
    pass_line(
        "2 (Bernstein identities)",
        &format!("7 choices; worst closed residual {worst_closed:.2e}, worst FD deviation {worst_fd:.2e}"),
    );
}

// ---------------------------------------------------------------- 3 ----

#[test]
fn criterion_03_exact_supersolution_cancellations() {
    let sharp = check_time_supersolution(
        TimeBarrier::SharpPowerExact,
        &Params::new(1.5, 1.2, 1).unwrap(),
        1.0,
    )
    .unwrap();
    assert!(sharp.passed, "sharp residual {}", sharp.measured);
    let hj = check_time_supersolution(
        TimeBarrier::HjPowerExact,
        &Params::new(1.5, 2.0, 1).unwrap(),
        1.0,
    )
    .unwrap();
    assert!(hj.passed, "hj residual {}", hj.measured);
    assert!(sharp.measured < 1e-12 && hj.measured < 1e-12);
    pass_line(
        "3 (exact super-solutions)",
        &format!(
            "relative residuals {:.2e} (diffusion) and {:.2e} (absorption) on t in [1e-3, 1e3]",
            sharp.measured, hj.measured
        ),
    );
}

// ---------------------------------------------------------------- 4 ----

#[test]
fn criterion_04_subcritical_implicit_rho() {
    // (p, N) = (1.25, 2): k = 0.1875, beta = 2 - p - 2k = 0.375.
    let params = Params::new(1.25, 0.5, 2).unwrap();
    let b = Bernstein::new(BernsteinChoice::SubcriticalImplicit, &params, 1.0).unwrap();
    let sub = b.subcritical().unwrap();

    // normalization rho(u0) = K0 to root-finder tolerance 1e-10
    let rho_top = sub.eval(1.0).unwrap();
    let norm_err = (rho_top - sub.k0()).abs() / sub.k0();
    assert!(norm_err < 1e-10, "normalization error {norm_err}");

    // ODE residual |k rho'^2 - rho rho'' - rho^{2-p}| < 1e-5 with
    // finite-difference derivatives at 32 interior samples
    let e = critical_exponents(&params);
    let mut worst: f64 = 0.0;
    for i in 1..=32 {
        let r = 0.03 + 0.94 * (i as f64 - 1.0) / 31.0;
        let (r1_fd, _) = b.eval_r1_r2(r, DerivativeMode::FiniteDifference).unwrap();
        let rho = sub.eval(r).unwrap();
        // R1 = rho^{p-2} (k rho'^2 - rho rho''), so the ODE residual is
        // |R1 - 1| * rho^{2-p}
        let residual = (r1_fd - 1.0).abs() * rho.powf(2.0 - params.p());
        worst = worst.max(residual);
        let _ = e;
    }
    assert!(worst < 1e-5, "ODE residual {worst}");

    // growth bound rho(r) <= C K0^{beta/2(1-k)} r^{1/(1-k)}: report C
    let mut c_growth: f64 = 0.0;
    for i in 1..=16 {
        let r = i as f64 / 16.0;
        let rho = sub.eval(r).unwrap();
        c_growth = c_growth.max(sub.growth_constant(r, rho));
    }
    assert!(c_growth.is_finite() && c_growth > 0.0);

    pass_line(
        "4 (subcritical implicit rho)",
        &format!(
            "ODE residual {worst:.2e} at 32 samples; normalization error {norm_err:.2e}; kappa = {:.6}; growth constant {c_growth:.4}",
            sub.kappa()
        ),
    );
}

// ---------------------------------------------------------------- 5 ----

#[test]
fn criterion_05_stationary_barrier() {
    let params = Params::new(1.5, 0.75, 1).unwrap();
    let sigma = sigma_constants(&params).unwrap();
    assert!((sigma.alpha - 3.0).abs() < 1e-12);
    assert!((sigma.a0 - 16.0 / 3.0).abs() < 1e-12);
    let radii = [0.1, 1.0, 10.0];
    for mult in [1.0, 2.0, 10.0] {
        let rep = check_stationary_supersolution(mult * sigma.a0, &params, &radii).unwrap();
        assert!(
            rep.passed && rep.measured >= 0.0,
            "A = {mult}·A0 failed: {rep:?}"
        );
    }
    // falsification control: far below the threshold the excess goes negative
    let rep = check_stationary_supersolution(sigma.a0 / 100.0, &params, &[1.0]).unwrap();
    assert!(rep.measured < 0.0, "sub-threshold barrier did not fail");
    pass_line(
        "5 (stationary barrier)",
        &format!(
            "E >= 0 for A in {{A0, 2A0, 10A0}} at radii {{0.1, 1, 10}}; E = {:.4} < 0 at A0/100 (A0 = 16/3)",
            rep.measured
        ),
    );
}

// ---------------------------------------------------------------- 6 ----

fn mass_balance_config(m: usize) -> String {
    let h = 10.0 / m as f64;
    format!(
        r#"{{
        "params": {{"p": 1.5, "q": 0.9, "n": 1}},
        "run": {{
            "grid": {{"geometry": "line", "l": 10.0, "m": {m}}},
            "solver": {{"t_end": 1.0, "dt": {{"fixed": {dt}}}, "scheme": "semi-implicit-diffusion", "observer_stride": 100, "absorption": true}},
            "datum": {{"bump": {{"amplitude": 1.0, "width": 2.0}}}},
            "checks": [{{"mass-balance": {{"t": 1.0, "tol": 0.01}}}}]
        }}
    }}"#,
        dt = h / 10.0
    )
}

#[test]
fn criterion_06_mass_balance() {
    let mut residuals = Vec::new();
    for m in [200usize, 400, 800] {
        let report = run_config(&mass_balance_config(m));
        let (passed, measured, _) = check(&report, "mass-balance");
        if m == 400 {
            assert!(passed && measured < 1e-2, "M=400 residual {measured}");
        }
        residuals.push(measured);
    }
    let gain = residuals[0] / residuals[2];
    assert!(
        gain >= 2.0,
        "refinement gain {gain} (residuals {residuals:?})"
    );
    pass_line(
        "6 (mass balance)",
        &format!(
            "residuals M=200/400/800: {:.2e}/{:.2e}/{:.2e}; refinement gain {gain:.1}x",
            residuals[0], residuals[1], residuals[2]
        ),
    );
}

// ---------------------------------------------------------------- 7 ----

// Diffusion-dominated decay (q > q_*): radial box large enough that the
// fat Barenblatt-type tail never reaches the wall over the fit window, and
// low mass so the absorption transient in the L1 ledger has died out.
const DECAY_DIFFUSION: &str = r#"{
    "params": {"p": 1.5, "q": 1.2, "n": 1},
    "run": {
        "grid": {"geometry": {"radial": {"dim": 1}}, "l": 200.0, "m": 800},
        "solver": {"eps": 1e-5, "t_end": 20.0, "dt": {"fixed": 0.005}, "scheme": "semi-implicit-diffusion", "observer_stride": 400, "absorption": true},
        "datum": {"bump": {"amplitude": 0.4, "width": 5.0}},
        "ext_tol_rel": 1e-9,
        "checks": [{"decay-fit": {"norm": "linf", "kind": "power", "expected": -1.0, "rel_tol": 0.15}}]
    }
}"#;

// Universal absorption rate -N·xi = -5 (valid without a tail assumption):
// realized by a datum with no fast tail (near the mass-critical |x|^{-1}).
// The similarity length grows like t^5, so the window is pinned inside the
// tail-driven regime before the truncated supply runs out.
const DECAY_UNIVERSAL: &str = r#"{
    "params": {"p": 1.5, "q": 0.6, "n": 1},
    "fast_decay_data": false,
    "run": {
        "grid": {"geometry": "line", "l": 100.0, "m": 800},
        "solver": {"eps": 1e-5, "t_end": 4.0, "dt": {"fixed": 0.002}, "scheme": "semi-implicit-diffusion", "observer_stride": 100, "absorption": true},
        "datum": {"power-tail": {"c0": 1.0, "alpha_tail": 1.07, "core_radius": 1.0}},
        "ext_tol_rel": 1e-9,
        "checks": [{"decay-fit": {"norm": "linf", "kind": "power", "expected": -5.0, "rel_tol": 0.15, "window": [2.4, 3.6]}}]
    }
}"#;

// Fast algebraic decay (p/2 < q < q_*) with the sharp-tail datum.
const DECAY_FAST_ALGEBRAIC: &str = r#"{
    "params": {"p": 1.5, "q": 0.9, "n": 1},
    "run": {
        "grid": {"geometry": {"radial": {"dim": 1}}, "l": 400.0, "m": 800},
        "solver": {"eps": 1e-7, "t_end": 60.0, "dt": {"fixed": 0.01}, "scheme": "semi-implicit-diffusion", "observer_stride": 400, "absorption": true},
        "datum": {"power-tail": {"c0": 1.0, "alpha_tail": 1.5, "core_radius": 1.0}},
        "ext_tol_rel": 1e-9,
        "checks": [
            {"decay-fit": {"norm": "linf", "kind": "power", "expected": -2.0, "rel_tol": 0.15, "window": [12.0, 55.0]}},
            {"decay-fit": {"norm": "l1", "kind": "power", "expected": -0.6666666666666666, "rel_tol": 0.3, "window": [12.0, 55.0]}}
        ]
    }
}"#;

// Exponential decay at the branch point q = p/2 (window ends before the
// box-remnant plateau).
const DECAY_EXPONENTIAL: &str = r#"{
    "params": {"p": 1.5, "q": 0.75, "n": 1},
    "run": {
        "grid": {"geometry": "line", "l": 100.0, "m": 800},
        "solver": {"eps": 1e-7, "t_end": 7.0, "dt": {"fixed": 0.004}, "scheme": "semi-implicit-diffusion", "observer_stride": 200, "absorption": true},
        "datum": {"power-tail": {"c0": 1.0, "alpha_tail": 3.0, "core_radius": 1.0}},
        "ext_tol_rel": 1e-9,
        "checks": [
            {"exp-beats-power": {"window": [1.0, 6.0]}},
            {"lower-envelope": {"max_residual": 0.1, "window": [1.0, 6.0]}}
        ]
    }
}"#;

#[test]
fn criterion_07_decay_rates() {
    let r = run_config(DECAY_DIFFUSION);
    let (ok, fitted, _) = check(&r, "decay-fit:linf");
    assert!(ok, "diffusion-decay exponent {fitted} not within 15% of -1");
    let diffusion = fitted;

    let r = run_config(DECAY_UNIVERSAL);
    let (ok, fitted, _) = check(&r, "decay-fit:linf");
    assert!(ok, "universal-rate exponent {fitted} not within 15% of -5");
    let universal = fitted;

    let r = run_config(DECAY_FAST_ALGEBRAIC);
    let (ok, fitted, _) = check(&r, "decay-fit:linf");
    assert!(ok, "fast-algebraic exponent {fitted} not within 15% of -2");
    let (ok_l1, fitted_l1, _) = check(&r, "decay-fit:l1");
    assert!(ok_l1, "fast-algebraic L1 exponent {fitted_l1}");
    let fast = fitted;

    let r = run_config(DECAY_EXPONENTIAL);
    let (ok, margin, note) = check(&r, "exp-beats-power");
    assert!(ok, "exponential fit did not beat power fit: {note}");
    let (ok_env, envelope, _) = check(&r, "lower-envelope");
    assert!(ok_env, "exponential lower envelope {envelope} >= 0.1");

    pass_line(
        "7 (decay rates)",
        &format!(
            "fitted exponents: {diffusion:.3} (want -1), {universal:.3} (want -5), {fast:.3} (want -2); exp r2 edge {margin:.4}; envelope dip {envelope:.3}"
        ),
    );
}

// ---------------------------------------------------------------- 8 ----

// Extinction with the sharp-tail datum (tail exponent (p-q)/(q-p+1) = 9).
const EXTINCTION_RUN: &str = r#"{
    "params": {"p": 1.5, "q": 0.6, "n": 1},
    "run": {
        "grid": {"geometry": "line", "l": 80.0, "m": 640},
        "solver": {"eps": 1e-6, "t_end": 15.0, "dt": {"fixed": 0.005}, "scheme": "semi-implicit-diffusion", "observer_stride": 100, "absorption": true},
        "datum": {"power-tail": {"c0": 1.0, "alpha_tail": 9.0, "core_radius": 1.0}},
        "ext_tol_rel": 1e-4,
        "checks": [
            {"extinction": {"expect": "finite"}},
            {"extinction-shape": {"slack": 0.15}}
        ]
    }
}"#;

fn positivity_run(q: f64) -> String {
    format!(
        r#"{{
        "params": {{"p": 1.5, "q": {q}, "n": 1}},
        "run": {{
            "grid": {{"geometry": "line", "l": 40.0, "m": 400}},
            "solver": {{"eps": 1e-6, "t_end": 10.5, "dt": {{"fixed": 0.005}}, "scheme": "semi-implicit-diffusion", "observer_stride": 100, "absorption": true}},
            "datum": {{"bump": {{"amplitude": 1.0, "width": 2.0}}}},
            "ext_tol_rel": 1e-4,
            "checks": [
                {{"extinction": {{"expect": "none"}}}},
                {{"positivity": {{"t": 1.0}}}}
            ]
        }}
    }}"#
    )
}

#[test]
fn criterion_08_extinction_dichotomy() {
    let r = run_config(EXTINCTION_RUN);
    let (ok, t_e, _) = check(&r, "extinction");
    assert!(ok, "no extinction detected for the fast-tail datum");
    let (ok_shape, fitted_b, note) = check(&r, "extinction-shape");
    assert!(ok_shape, "near-extinction shape failed: {note}");
    assert!(t_e > 0.0 && t_e < 15.0);

    // Positivity regimes over a horizon more than 5x the extinction time.
    assert!(10.5 > 5.0 * t_e / 2.0, "horizon vs T_e sanity");
    let mut min_excesses = Vec::new();
    for q in [0.75, 1.2] {
        let r = run_config(&positivity_run(q));
        let (ok, _, note) = check(&r, "extinction");
        assert!(ok, "unexpected extinction at q={q}: {note}");
        let (ok_pos, min_excess, _) = check(&r, "positivity");
        assert!(ok_pos && min_excess > 0.0, "positivity failed at q={q}");
        min_excesses.push(min_excess);
    }
    pass_line(
        "8 (extinction dichotomy)",
        &format!(
            "T_e = {t_e:.3}; near-T_e fitted exponent {fitted_b:.3} respects the cubic lower bound; no extinction at q=0.75/1.2 over t=10.5 with min excess {:.1e}/{:.1e}",
            min_excesses[0], min_excesses[1]
        ),
    );
}

// ---------------------------------------------------------------- 9 ----

const GRAD_EST_BASE: &str = r#"{
    "params": {"p": 1.5, "q": QVAL, "n": 1},
    "run": {
        "grid": {"geometry": "line", "l": 10.0, "m": 400},
        "solver": {"eps": 1e-5, "t_end": 1.0, "dt": {"fixed": 0.0005}, "scheme": "semi-implicit-diffusion", "observer_stride": 25, "absorption": ABSORB},
        "datum": {"bump": {"amplitude": 1.0, "width": 2.0}},
        "ext_tol_rel": 1e-9,
        "checks": [{"gradient-estimate": {"id": "ESTID", "delta": "floor", "window": [0.1, 1.0], "ratio_tol": 1.1}}]
    }
}"#;

fn grad_config(q: &str, absorb: bool, id: &str) -> String {
    GRAD_EST_BASE
        .replace("QVAL", q)
        .replace("ABSORB", if absorb { "true" } else { "false" })
        .replace("ESTID", id)
}

#[test]
fn criterion_09_gradient_estimates() {
    // Sharp negative-power estimate with its explicit constant, with
    // absorption on.
    let r = run_config(&grad_config("1.2", true, "neg-power-sharp"));
    let (ok, ratio_abs, _) = check(&r, "gradient-estimate");
    assert!(ok && ratio_abs <= 1.1, "absorbed ratio {ratio_abs}");

    // Pure diffusion reproduces the same estimate with the same constant.
    let r = run_config(&grad_config("1.2", false, "diffusion-neg-power"));
    let (ok, ratio_diff, _) = check(&r, "gradient-estimate");
    assert!(ok && ratio_diff <= 1.1, "diffusion ratio {ratio_diff}");

    // Hamilton-Jacobi estimate at q = 2 with constant (1/q)(q-1)^{(q-1)/q}.
    let r = run_config(&grad_config("2.0", true, "hj-power"));
    let (ok, ratio_hj, _) = check(&r, "gradient-estimate");
    assert!(ok && ratio_hj <= 1.1, "hj ratio {ratio_hj}");

    pass_line(
        "9 (gradient estimates)",
        &format!(
            "max LHS/RHS ratios: {ratio_abs:.3} (absorbed), {ratio_diff:.3} (diffusion-only), {ratio_hj:.3} (Hamilton-Jacobi), all <= 1.1"
        ),
    );
}

// --------------------------------------------------------------- 10 ----

fn atlas_sweep(p: f64, qs: &[f64]) -> String {
    format!(
        r#"{{
        "p_values": [{p}],
        "q_values": [{qs}],
        "n": 1,
        "grid": {{"geometry": "line", "l": 60.0, "m": 600}},
        "solver": {{"eps": 1e-6, "t_end": 3.0, "dt": {{"fixed": 0.003}}, "scheme": "semi-implicit-diffusion", "observer_stride": 100, "absorption": true}},
        "datum": {{"bump": {{"amplitude": 1.0, "width": 2.0}}}},
        "ext_tol_rel": 1e-3
    }}"#,
        qs = qs
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
}

const ATLAS_ROWS: [(f64, [f64; 4]); 3] = [
    (1.4, [0.56, 0.70, 0.80, 1.12]),
    (1.5, [0.60, 0.75, 0.875, 1.20]),
    (1.6, [0.64, 0.80, 0.95, 1.28]),
];

#[test]
fn criterion_10_regime_atlas() {
    let mut agree = 0usize;
    let mut counted = 0usize;
    let mut rows = Vec::new();
    for (p, qs) in ATLAS_ROWS {
        let spec = SweepSpec::from_json(&atlas_sweep(p, &qs)).unwrap();
        let atlas = run_sweep(&spec).unwrap();
        assert_eq!(atlas.cells.len(), 4);
        for cell in &atlas.cells {
            assert!(
                cell.error.is_none(),
                "cell ({}, {}) errored",
                cell.p,
                cell.q
            );
            if !cell.near_threshold {
                counted += 1;
                if cell.agree {
                    agree += 1;
                }
            }
            rows.push(format!(
                "({}, {}) {} -> {}",
                cell.p, cell.q, cell.predicted_regime, cell.observed_regime
            ));
        }
    }
    assert_eq!(counted, 12, "expected 12 counted cells");
    assert!(agree >= 10, "agreement {agree}/12:\n{}", rows.join("\n"));
    pass_line(
        "10 (regime atlas)",
        &format!("predicted = observed in {agree}/{counted} cells (threshold 10/12)"),
    );
}

// --------------------------------------------------------------- 11 ----

#[test]
fn criterion_11_determinism() {
    // Re-run representative simulation configs from criteria 6-10 and
    // require byte-identical serialized outputs.
    let configs = [
        ("mass-balance M=400", mass_balance_config(400)),
        ("decay diffusion", DECAY_DIFFUSION.to_string()),
        ("decay universal", DECAY_UNIVERSAL.to_string()),
        ("decay fast-algebraic", DECAY_FAST_ALGEBRAIC.to_string()),
        ("decay exponential", DECAY_EXPONENTIAL.to_string()),
        ("extinction", EXTINCTION_RUN.to_string()),
        (
            "gradient estimate",
            grad_config("1.2", true, "neg-power-sharp"),
        ),
    ];
    for (name, cfg) in &configs {
        let a = run_config(cfg).to_json();
        let b = run_config(cfg).to_json();
        assert!(a == b, "report bytes differ for {name}");
    }
    // and a sweep: byte-identical CSV + JSON
    let spec = SweepSpec::from_json(&atlas_sweep(1.5, &[0.60, 0.75, 0.875, 1.20])).unwrap();
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert!(a.to_csv() == b.to_csv(), "atlas CSV differs");
    assert!(a.to_json() == b.to_json(), "atlas JSON differs");
    pass_line(
        "11 (determinism)",
        "repeated runs of criteria 6-10 configurations produced byte-identical reports, CSV, and JSON",
    );
}
