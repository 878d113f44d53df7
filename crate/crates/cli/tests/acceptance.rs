//! Acceptance criteria, one line each. Runs as a plain binary so the verdicts
//! show up in `cargo test` output; exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nlwave::diagnostics::{energy, CertificateStatus};
use nlwave::kernels::{apply_b, apply_p, mildly_singular_b};
use nlwave::nonlinearity::{check_exactness, check_global_g_bound, SampleBox};
use nlwave::solver::picard_iterate;
use nlwave::{
    EvolutionConfig, Execution, Grid, InitialData, KernelSpec, NonlinearitySpec, Outcome, RealField,
    SingularKernelDescriptor, WaveSystem,
};
use nlwave_cli::config::{reconfigure, FieldConfig};
use nlwave_cli::runner::{run_scenario, RunOutput, EXIT_BLOWUP, EXIT_COMPLETED};
use nlwave_cli::{preset, RunReport};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_preset(name: &str) -> Result<(RunOutput, Duration), String> {
    let cfg = preset(name).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = run_scenario(&cfg).map_err(|e| e.to_string())?;
    Ok((out, start.elapsed()))
}

fn within_budget(elapsed: Duration, budget_s: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < budget_s,
        format!("took {:.2}s, budget {budget_s}s", elapsed.as_secs_f64()),
    )
}

fn hypothesis_passed(report: &RunReport, prefix: &str) -> Result<(), String> {
    let h = report
        .hypotheses
        .iter()
        .find(|h| h.predicate.starts_with(prefix))
        .ok_or(format!("no {prefix} check in report"))?;
    ensure(
        h.passed,
        format!(
            "{} failed at {:?} (margin {})",
            h.predicate, h.worst_point, h.worst_margin
        ),
    )?;
    // the box must cover the range the run visited
    let covers = |range: [f64; 2], reach: f64| range[0] <= -reach && range[1] >= reach;
    ensure(
        covers(h.sample_box.u1, report.visited[0]) && covers(h.sample_box.u2, report.visited[1]),
        format!("{} box does not cover visited range {:?}", h.predicate, report.visited),
    )
}

/// cos x under the exponential kernel: ω(1) = 1/√2.
fn linear_dispersion() -> Verdict {
    let (out, elapsed) = run_preset("linear-dispersion")?;
    ensure(
        out.exit_code() == EXIT_COMPLETED,
        format!("outcome {:?}", out.report.outcome),
    )?;
    let g = &out.scenario.grid;
    ensure(
        g.n() == 512 && (g.period() - 16.0 * PI).abs() < 1e-12,
        "preset grid changed",
    )?;
    let s = &out.result.final_state;
    let w = 1.0 / 2f64.sqrt();
    let u1 = g.sample(|x| (w * s.t).cos() * x.cos());
    let v1 = g.sample(|x| -w * (w * s.t).sin() * x.cos());
    let err = [
        s.u1.combine(1.0, &u1, -1.0).map_err(|e| e.to_string())?.sup_norm(),
        s.v1.combine(1.0, &v1, -1.0).map_err(|e| e.to_string())?.sup_norm(),
        s.u2.sup_norm(),
        s.v2.sup_norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ensure((s.t - 1.0).abs() < 1e-12, format!("ended at t = {}", s.t))?;
    ensure(err <= 1e-8, format!("sup error {err:e} > 1e-8"))?;
    within_budget(elapsed, 5.0)?;
    Ok(format!("sup error {err:.2e} at T=1, {:.2}s", elapsed.as_secs_f64()))
}

fn energy_conservation() -> Verdict {
    let (out, elapsed) = run_preset("energy-conservation")?;
    let cfg = &out.report.config;
    ensure(
        cfg.nonlinearity.family == "quartic"
            && cfg.nonlinearity.params["kappa1"] == 1.0
            && cfg.nonlinearity.params["kappa2"] == 1.0
            && cfg.grid.n == 256
            && cfg.evolution.dt == 1e-3
            && cfg.evolution.t_end == 10.0,
        "preset parameters changed",
    )?;
    ensure(out.scenario.init.phi1.mean().abs() < 1e-14, "bump is not zero-mean")?;
    ensure(
        out.exit_code() == EXIT_COMPLETED,
        format!("outcome {:?}", out.report.outcome),
    )?;
    let drift = out.report.energy.as_ref().ok_or("no energy summary")?.relative_drift;
    ensure(drift <= 1e-7, format!("relative drift {drift:e} > 1e-7"))?;
    within_budget(elapsed, 30.0)?;
    Ok(format!(
        "relative drift {drift:.2e} over T=10, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn blowup_negative_energy() -> Verdict {
    let (out, elapsed) = run_preset("blowup-negative-energy")?;
    let r = &out.report;
    ensure(
        r.config.nonlinearity.params["kappa1"] == -1.0,
        "preset is not quartic(-1, 0)",
    )?;
    let cert = r.certificate.ok_or("no certificate")?;
    ensure(cert.nu == 0.5, "nu changed")?;
    ensure(
        cert.status == CertificateStatus::NegativeEnergy,
        format!("status {:?}", cert.status),
    )?;
    ensure(cert.initial_energy <= -0.1, format!("E(0) = {}", cert.initial_energy))?;
    for f in [&out.scenario.init.phi1, &out.scenario.init.psi1] {
        ensure(f.mean().abs() < 1e-14, "data is not zero-mean")?;
    }
    hypothesis_passed(r, "blowup_growth")?;
    let Outcome::BlowupDetected { t_detect, .. } = r.outcome else {
        return Err(format!("outcome {:?}", r.outcome));
    };
    ensure(r.exit_code == EXIT_BLOWUP, "exit code")?;
    let bound = cert.levine_bound.ok_or("no Levine bound")?;
    ensure(
        t_detect <= 1.05 * bound,
        format!("t_detect {t_detect} > 1.05 x {bound}"),
    )?;
    let c = r.concavity.as_ref().ok_or("no concavity summary")?;
    let check = c.report.as_ref().ok_or("too few resolved samples")?;
    ensure(
        check.passed,
        format!(
            "concavity margin {:e} at sample {}",
            check.worst_margin, check.worst_index
        ),
    )?;
    within_budget(elapsed, 60.0)?;
    Ok(format!(
        "E(0) = {:.3}, t_detect {t_detect} <= 1.05 x {bound:.2}, concavity on {}/{} resolved samples (worst {:.1e}), {:.2}s",
        cert.initial_energy,
        c.resolved,
        c.samples,
        check.worst_margin,
        elapsed.as_secs_f64()
    ))
}

fn inner(a: &RealField, b: &RealField) -> Result<f64, String> {
    a.inner_product(b).map_err(|e| e.to_string())
}

/// `(E0, A, B)` from the energy and inner-product operations.
fn energy_terms(init: &InitialData, sys: &WaveSystem) -> Result<(f64, f64, f64), String> {
    let p = |k: &KernelSpec, f: &RealField| apply_p(k, f).map_err(|e| e.to_string());
    let (pf1, pf2) = (p(sys.kernel1(), &init.phi1)?, p(sys.kernel2(), &init.phi2)?);
    let (pp1, pp2) = (p(sys.kernel1(), &init.psi1)?, p(sys.kernel2(), &init.psi2)?);
    let a = inner(&pf1, &pp1)? + inner(&pf2, &pp2)?;
    let b = inner(&pf1, &pf1)? + inner(&pf2, &pf2)?;
    let e0 = energy(&init.state(), sys).map_err(|e| e.to_string())?.total;
    Ok((e0, a, b))
}

fn blowup_positive_energy() -> Verdict {
    let (out, _) = run_preset("blowup-positive-energy")?;
    let (e0, a, b) = energy_terms(&out.scenario.init, &out.scenario.system)?;
    ensure(
        e0 > 0.0 && a * a < e0 * b,
        format!("E0 = {e0}, A^2 = {}, E0 B = {}", a * a, e0 * b),
    )?;
    let cert = out.report.certificate.ok_or("no certificate")?;
    ensure(
        cert.status == CertificateStatus::PositiveEnergy,
        format!("status {:?}", cert.status),
    )?;
    ensure(
        (cert.initial_energy - e0).abs() <= 1e-12 * e0.abs(),
        "certificate E0 disagrees",
    )?;
    let Outcome::BlowupDetected { t_detect, .. } = out.report.outcome else {
        return Err(format!("guard did not trip: {:?}", out.report.outcome));
    };
    let t_end = out.report.config.evolution.t_end;
    ensure(t_detect < t_end, "tripped at t_end")?;

    // ψ₁ = sφ₁ gives A = sB and E0 = s²B + V with V < 0, so A² > E0·B for every s
    let base = preset("blowup-negative-energy").map_err(|e| e.to_string())?;
    let mut rejected = 0;
    for s in [0.5, 1.0, 2.0, 4.0, -1.0, -3.0] {
        let mut cfg = base.clone();
        cfg.initial.psi1 = FieldConfig::gaussian(2.0 * s, 1.0, 0.0);
        let cfg = reconfigure(&cfg, &[]).map_err(|e| e.to_string())?;
        let sc = cfg.scenario().map_err(|e| e.to_string())?;
        let (e0, a, b) = energy_terms(&sc.init, &sc.system)?;
        if e0 <= 0.0 {
            continue;
        }
        ensure(a * a >= e0 * b, format!("s = {s}: A^2 < E0 B"))?;
        let cert = nlwave::diagnostics::build_certificate(&sc.init, 0.5, &sc.system).map_err(|e| e.to_string())?;
        ensure(
            cert.status == CertificateStatus::NotCertified && cert.levine_bound.is_none(),
            format!("s = {s}: status {:?}", cert.status),
        )?;
        rejected += 1;
    }
    ensure(rejected >= 2, format!("only {rejected} positive-energy scalings"))?;
    Ok(format!(
        "certified with A^2 = {:.2} < E0 B = {:.2}, tripped at {t_detect}; {rejected} scalings psi = s phi not certified",
        a * a,
        e0 * b
    ))
}

fn global_smooth_kernel() -> Verdict {
    let (out, elapsed) = run_preset("global-smooth-kernel")?;
    let r = &out.report;
    ensure(
        r.config.kernel1.family == "gaussian" && r.config.nonlinearity.params["kappa1"] == 1.0,
        "preset changed",
    )?;
    hypothesis_passed(r, "global_g_bound(k=0)")?;
    ensure(
        r.outcome == Outcome::Completed && r.t_final == 50.0,
        format!("outcome {:?}", r.outcome),
    )?;
    let growth = r.sup.max / r.sup.initial;
    ensure(growth <= 10.0, format!("sup grew by {growth}"))?;
    let drift = r.energy.as_ref().ok_or("no energy summary")?.relative_drift;
    ensure(drift <= 1e-6, format!("relative drift {drift:e} > 1e-6"))?;
    within_budget(elapsed, 120.0)?;
    Ok(format!(
        "T=50 without guard trip, sup growth {growth:.3}x, drift {drift:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn global_singular_kernel() -> Verdict {
    let (out, _) = run_preset("global-singular-kernel")?;
    let r = &out.report;
    ensure(r.config.kernel1.family == "mildly_singular", "preset changed")?;
    let h = r
        .hypotheses
        .iter()
        .find(|h| h.predicate.starts_with("global_g_power_bound"))
        .ok_or("no power bound")?;
    ensure(
        h.predicate.contains("q1=1.3333333333333333,q2=1.3333333333333333"),
        h.predicate.clone(),
    )?;
    hypothesis_passed(r, "global_g_power_bound")?;
    ensure(
        r.outcome == Outcome::Completed && r.t_final == 50.0,
        format!("outcome {:?}", r.outcome),
    )?;

    let desc = SingularKernelDescriptor::exponential();
    let reference = KernelSpec::exponential();
    let mut worst = 0.0_f64;
    for s in &out.result.snapshots {
        for u in [&s.u1, &s.u2] {
            let direct = mildly_singular_b(&desc, u).map_err(|e| e.to_string())?;
            let spectral = apply_b(&reference, u).map_err(|e| e.to_string())?;
            worst = worst.max(
                direct
                    .combine(1.0, &spectral, -1.0)
                    .map_err(|e| e.to_string())?
                    .sup_norm(),
            );
        }
    }
    ensure(worst <= 1e-8, format!("B disagreement {worst:e} > 1e-8"))?;
    Ok(format!(
        "T=50 without guard trip, B disagreement {worst:.2e} over {} snapshots",
        out.result.snapshots.len()
    ))
}

fn band_limited(g: &Grid, rng: &mut StdRng, max_mode: usize) -> RealField {
    let modes: Vec<(f64, f64, f64)> = (1..=max_mode)
        .map(|k| (k as f64, rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let scale = 2.0 * PI / g.period();
    g.sample(|x| modes.iter().map(|&(k, a, th)| a * (k * scale * x + th).cos()).sum())
}

fn reduction_identities() -> Verdict {
    let g = Grid::new(16, 2.0 * PI).map_err(|e| e.to_string())?;
    let (a, b) = (0.7, 0.3);
    let ho = KernelSpec::higher_order(a, b).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    let trials = 500;
    for _ in 0..trials {
        let w = band_limited(&g, &mut rng, 5);
        let d2 = w.derivative(2);
        let be = apply_b(&KernelSpec::exponential(), &w).map_err(|e| e.to_string())?;
        let lhs = be.combine(1.0, &be.derivative(2), -1.0).map_err(|e| e.to_string())?;
        worst = worst.max(lhs.combine(1.0, &d2, -1.0).map_err(|e| e.to_string())?.sup_norm());
        let bh = apply_b(&ho, &w).map_err(|e| e.to_string())?;
        let lhs = bh
            .combine(1.0, &bh.derivative(2), -a)
            .and_then(|l| l.combine(1.0, &bh.derivative(4), b))
            .map_err(|e| e.to_string())?;
        worst = worst.max(lhs.combine(1.0, &d2, -1.0).map_err(|e| e.to_string())?.sup_norm());
    }
    ensure(worst <= 1e-12, format!("identity residual {worst:e} > 1e-12"))?;
    Ok(format!(
        "worst residual {worst:.2e} over {trials} random fields, both kernels"
    ))
}

fn picard_vs_rk4() -> Verdict {
    let g = Grid::new(64, 16.0).map_err(|e| e.to_string())?;
    let sys = WaveSystem::new(
        &g,
        KernelSpec::exponential(),
        KernelSpec::exponential(),
        NonlinearitySpec::quartic(1.0, 1.0),
    )
    .map_err(|e| e.to_string())?;
    let bump = |a: f64, w: f64, c: f64| g.sample(|x| a * (-((x - c) / w).powi(2)).exp()).centered();
    let init = InitialData::new(
        bump(0.3, 1.0, 0.0),
        bump(0.2, 1.5, 2.0),
        bump(0.1, 1.0, -1.0),
        g.zeros(),
    )
    .map_err(|e| e.to_string())?;
    let cfg = EvolutionConfig {
        dt: 1e-3,
        t_end: 0.1,
        ..Default::default()
    };
    let rk4 = sys.integrate(&init, &cfg).map_err(|e| e.to_string())?.final_state;
    let picard = picard_iterate(&init, 0.1, 201, 8, &sys, Execution::Parallel).map_err(|e| e.to_string())?;
    let gap = picard.state.distance_sup(&rk4).map_err(|e| e.to_string())?;
    ensure(gap <= 1e-4, format!("disagreement {gap:e} > 1e-4"))?;
    Ok(format!("sup disagreement {gap:.2e} at T=0.1"))
}

/// Single mode cos x with β̂ = 400/(1+ξ²): ω = √200, fast enough that the
/// time error is well above rounding at these steps.
fn convergence_order() -> Verdict {
    let c2 = 400.0;
    let k = KernelSpec::custom(
        "scaled exponential",
        Arc::new(move |x: f64| c2 / (1.0 + x * x)),
        2.0,
        c2,
    )
    .map_err(|e| e.to_string())?;
    let g = Grid::new(32, 2.0 * PI).map_err(|e| e.to_string())?;
    let sys = WaveSystem::new(&g, k.clone(), k, NonlinearitySpec::linear()).map_err(|e| e.to_string())?;
    let init = InitialData::new(g.sample(f64::cos), g.zeros(), g.zeros(), g.zeros()).map_err(|e| e.to_string())?;
    let omega = (c2 / 2.0).sqrt();
    let exact = g.sample(|x| omega.cos() * x.cos());
    let error = |dt: f64| -> Result<f64, String> {
        let cfg = EvolutionConfig {
            dt,
            t_end: 1.0,
            ..Default::default()
        };
        let s = sys.integrate(&init, &cfg).map_err(|e| e.to_string())?.final_state;
        Ok(s.u1.combine(1.0, &exact, -1.0).map_err(|e| e.to_string())?.sup_norm())
    };
    let (coarse, fine) = (error(2e-3)?, error(1e-3)?);
    let ratio = coarse / fine;
    ensure(fine > 1e-12, format!("fine error {fine:e} is at rounding level"))?;
    ensure(ratio >= 12.0, format!("ratio {ratio:.2} < 12"))?;
    Ok(format!("errors {coarse:.2e} -> {fine:.2e}, ratio {ratio:.2}"))
}

fn hypothesis_checkers() -> Verdict {
    let rotation = NonlinearitySpec::custom(
        "rotation",
        Arc::new(|_, _| 0.0),
        Arc::new(|_, b| b),
        Arc::new(|a, _| -a),
    )
    .map_err(|e| e.to_string())?;
    let region = SampleBox::square(3.0).with_per_axis(61);
    ensure(
        !check_exactness(&rotation, &region, 1e-4, 1e-6).passed,
        "rotation passed exactness",
    )?;
    let built_ins = [
        NonlinearitySpec::linear(),
        NonlinearitySpec::quartic(-1.0, 0.0),
        NonlinearitySpec::quartic(1.0, 0.0),
        NonlinearitySpec::quartic(1.0, 1.0),
        NonlinearitySpec::quartic(0.3, -2.0),
        NonlinearitySpec::isotropic_power(1.0, 2.0).map_err(|e| e.to_string())?,
        NonlinearitySpec::isotropic_power(-0.5, 3.0).map_err(|e| e.to_string())?,
    ];
    for nl in &built_ins {
        let r = check_exactness(nl, &region, 1e-4, 1e-6);
        ensure(
            r.passed,
            format!("{:?} failed exactness at {:?}", nl.family(), r.worst_point),
        )?;
    }
    let k = 1.0;
    let reach = (4.0 * k + 1.0_f64).sqrt() + 0.5;
    let r = check_global_g_bound(&NonlinearitySpec::quartic(-1.0, 0.0), k, &SampleBox::square(reach));
    ensure(!r.passed, "focusing quartic passed the G bound")?;
    let [u, v] = r.worst_point;
    ensure(
        u * u + v * v > 4.0 * k + 1.0,
        format!("worst point {:?} inside u^2 <= 4k+1", r.worst_point),
    )?;
    let r = check_global_g_bound(&NonlinearitySpec::quartic(1.0, 0.0), 0.0, &SampleBox::square(reach));
    ensure(r.passed, "defocusing quartic failed the k = 0 bound")?;
    Ok(format!(
        "rotation flagged, {} built-ins exact, G bound separates kappa1 = -1 from 1",
        built_ins.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("linear oracle equivalence", linear_dispersion),
        ("energy conservation", energy_conservation),
        ("negative-energy blow-up", blowup_negative_energy),
        ("positive-energy blow-up", blowup_positive_energy),
        ("global regime, smooth kernel", global_smooth_kernel),
        ("global regime, mildly singular kernel", global_singular_kernel),
        ("reduction identities", reduction_identities),
        ("Picard-RK4 cross-validation", picard_vs_rk4),
        ("convergence order", convergence_order),
        ("hypothesis checkers", hypothesis_checkers),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
