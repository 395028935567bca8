//! Acceptance run: every criterion at its pinned tolerance, one PASS/FAIL
//! line each. Exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use kbavg::dynamics::{amplitude_errors, integrate_fast, integrate_interaction, integrate_slow, SimulationProblem};
use kbavg::exec::Execution;
use kbavg::field::{distance, norm, sample_ball, Monomial, Polynomial, PolynomialField};
use kbavg::hamiltonian::{action_drift, check_ham_eff, energy, hamiltonian_field, HamiltonianPoly};
use kbavg::resonance::{resonant_part, rotate, FrequencyVector};
use kbavg::Complex64;
use kbavg_cli::commands::{average_study, convergence_study, drift_study};
use kbavg_cli::config::{example_2_4, random_field, ExperimentConfig};
use kbavg_cli::Cli;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_index(rng: &mut ChaCha8Rng, dim: usize, degree: u32) -> Vec<u32> {
    let mut idx = vec![0u32; dim];
    for _ in 0..degree {
        idx[rng.random_range(0..dim)] += 1;
    }
    idx
}

/// Hermitian `h`: each random term is paired with its conjugate mirror.
fn random_hamiltonian(rng: &mut ChaCha8Rng, dim: usize, max_degree: u32, pairs: usize) -> HamiltonianPoly {
    let mut poly = Polynomial::zero(dim);
    for _ in 0..pairs {
        let d = rng.random_range(1..=max_degree);
        let da = rng.random_range(0..=d);
        let alpha = random_index(rng, dim, da);
        let beta = random_index(rng, dim, d - da);
        let m = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let pair = Polynomial::from_monomials(
            dim,
            [
                Monomial::new(alpha.clone(), beta.clone(), m),
                Monomial::new(beta, alpha, m.conj()),
            ],
        )
        .unwrap();
        poly = poly.add(&pair).unwrap();
    }
    HamiltonianPoly::new(poly).unwrap()
}

// 1. Closed-form amplitude of the worked example.
fn worked_example() -> Outcome {
    let freqs = FrequencyVector::new(vec![1.0]).map_err(s)?;
    let mut worst = Vec::new();
    for (eps, limit) in [(1e-3, 2e-2), (1e-4, 2e-3)] {
        let prob = SimulationProblem::new(example_2_4(), freqs.clone(), eps, vec![c(1.0, 0.0)])
            .and_then(|p| p.with_fast_horizon(200.0))
            .map_err(s)?;
        let traj = integrate_fast(&prob, None).map_err(s)?;
        let mut err: f64 = 0.0;
        for t in [50.0, 100.0, 200.0] {
            let v = traj.interpolate(t).ok_or_else(|| format!("t={t} outside trajectory"))?;
            let exact = (1.0 - 2.0 * eps * t).powf(-0.5);
            err = err.max((norm(&v) - exact).abs());
        }
        ensure(err <= limit, || format!("eps={eps}: error {err:.3e} > {limit:.0e}"))?;
        worst.push(err);
    }
    ensure(worst[1] < worst[0], || {
        format!("error did not shrink: {:.3e} -> {:.3e}", worst[0], worst[1])
    })?;
    Ok(format!(
        "max error {:.2e} (eps=1e-3), {:.2e} (eps=1e-4)",
        worst[0], worst[1]
    ))
}

// 2. Resonant part of v²v̄ + v³ is exactly v²v̄.
fn resonant_part_exactness() -> Outcome {
    let expected = PolynomialField::from_terms(1, [(0, Monomial::new(vec![2], vec![1], c(1.0, 0.0)))]).map_err(s)?;
    let literals = ["1", "3/2", "3.141592653589793", "355/113"];
    for lit in literals {
        let freqs = FrequencyVector::parse(&[lit]).map_err(s)?;
        let res = resonant_part(&example_2_4(), &freqs, freqs.default_tolerance()).map_err(s)?;
        ensure(res == expected, || format!("omega={lit}: got {res:?}"))?;
    }
    Ok(format!("exact for omega in {literals:?}"))
}

// 3. Convergence of the interaction picture to the effective flow.
fn convergence_trend() -> Outcome {
    let eps = [1e-1, 1e-2, 1e-3];
    let sqrt2 = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).map_err(s)?;
    let cases = [
        (
            "example-2.4",
            example_2_4(),
            FrequencyVector::new(vec![1.0]).map_err(s)?,
            vec![c(1.0, 0.0)],
            Some(0.2),
        ),
        (
            "random seed 0",
            random_field(0, 2, 3, 3),
            sqrt2,
            vec![c(0.3, 0.1), c(-0.2, 0.2)],
            None,
        ),
    ];
    let mut detail = Vec::new();
    for (name, field, freqs, v0, theta) in cases {
        let report = convergence_study(&field, &freqs, &v0, &eps, theta, None, Execution::default()).map_err(s)?;
        let d: Vec<f64> = report
            .rows
            .iter()
            .map(|r| r.sup_distance.ok_or_else(|| format!("{name}: {:?}", r.failure)))
            .collect::<Result<_, _>>()?;
        ensure(report.strictly_decreasing(), || {
            format!("{name}: not strictly decreasing {d:?}")
        })?;
        ensure(d[2] <= 0.1 * d[0], || format!("{name}: ratio {:.3} > 0.1", d[2] / d[0]))?;
        detail.push(format!("{name} {:.2e}/{:.2e}/{:.2e}", d[0], d[1], d[2]));
    }
    Ok(detail.join(", "))
}

// 4. Generic numeric average against the evaluated resonant part.
fn average_agreement() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let dim = 1 + (k % 3) as usize;
        let field = random_field(100 + k, dim, 4, 4);
        let literals: Vec<String> = (0..dim)
            .map(|_| format!("{}/{}", r.random_range(1..5), r.random_range(1..3)))
            .collect();
        let freqs = FrequencyVector::parse(&literals).map_err(s)?;
        let points: Vec<Vec<Complex64>> = (0..5).map(|_| sample_ball(&mut r, dim, 1.0)).collect();
        let rows = average_study(&field, &freqs, &points, 2e-4, Execution::default()).map_err(s)?;
        let d = rows.iter().map(|row| row.discrepancy()).fold(0.0, f64::max);
        ensure(d <= 1e-3, || format!("field {k} (Λ={literals:?}): discrepancy {d:.3e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("worst discrepancy {worst:.2e} over 20 fields x 5 points"))
}

// 5. Averaging commutes with taking the Hamiltonian field.
fn hamiltonian_identity() -> Outcome {
    let mut r = rng(5);
    let mut worst_float: f64 = 0.0;
    for k in 0..50 {
        let dim = 1 + k % 3;
        let h = random_hamiltonian(&mut r, dim, 4, 6);
        let ratios: Vec<(i64, i64)> = (0..dim).map(|_| (r.random_range(1..7), r.random_range(1..4))).collect();
        let literals: Vec<String> = ratios.iter().map(|(p, q)| format!("{p}/{q}")).collect();
        let exact = FrequencyVector::parse(&literals).map_err(s)?;
        let report = check_ham_eff(&h, &exact, 0.0).map_err(s)?;
        ensure(report.exact_mode && report.max_discrepancy == 0.0, || {
            format!("h {k}: exact discrepancy {}", report.max_discrepancy)
        })?;
        let float = FrequencyVector::new(ratios.iter().map(|&(p, q)| p as f64 / q as f64).collect()).map_err(s)?;
        let report = check_ham_eff(&h, &float, float.default_tolerance()).map_err(s)?;
        ensure(report.passed && report.max_discrepancy <= 1e-12, || {
            format!("h {k}: float discrepancy {:.3e}", report.max_discrepancy)
        })?;
        worst_float = worst_float.max(report.max_discrepancy);
    }
    Ok(format!("50 Hamiltonians, exact 0, float max {worst_float:.1e}"))
}

// 6. Action drift of a nonresonant coupled pair over |t| <= θ/ε.
fn action_conservation() -> Outcome {
    let freqs = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).map_err(s)?;
    let h = HamiltonianPoly::from_monomials(
        2,
        [
            Monomial::new(vec![2, 0], vec![0, 2], c(0.05, 0.0)),
            Monomial::new(vec![0, 2], vec![2, 0], c(0.05, 0.0)),
            Monomial::new(vec![2, 0], vec![2, 0], c(1.0, 0.0)),
        ],
    )
    .map_err(s)?;
    let z0 = vec![c(0.3, 0.0), c(0.2, 0.1)];
    let theta = 0.5;
    let eps = [1e-1, 1e-2, 1e-3];
    let forward = drift_study(&h, &freqs, &z0, &eps, Some(theta), 20, Execution::default()).map_err(s)?;
    let field = hamiltonian_field(&h);
    let mut drift = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let prob = SimulationProblem::new(field.clone(), freqs.clone(), e, z0.clone())
            .and_then(|p| p.with_theta(theta))
            .map_err(s)?
            .backward();
        let back = action_drift(&integrate_fast(&prob, None).map_err(s)?);
        let fwd = forward[2 * i..2 * i + 2].iter().map(|row| row.drift);
        drift.push(fwd.chain(back).fold(0.0, f64::max));
    }
    ensure(drift.windows(2).all(|w| w[1] < w[0]), || {
        format!("drift not decreasing: {drift:?}")
    })?;
    Ok(format!("drift {:.2e}/{:.2e}/{:.2e}", drift[0], drift[1], drift[2]))
}

// 7. Compact property sweep.
fn properties() -> Outcome {
    let mut r = rng(7);
    let sqrt2 = FrequencyVector::new(vec![1.0, 2f64.sqrt()]).map_err(s)?;
    for _ in 0..200 {
        let z = sample_ball(&mut r, 3, 2.0);
        let w1: Vec<f64> = (0..3).map(|_| r.random_range(-50.0..50.0)).collect();
        let w2: Vec<f64> = (0..3).map(|_| r.random_range(-50.0..50.0)).collect();
        let once = rotate(&w1, &z).map_err(s)?;
        ensure((norm(&once) - norm(&z)).abs() <= 1e-14 * (1.0 + norm(&z)), || {
            "rotation not unitary".into()
        })?;
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let twice = rotate(&w1, &rotate(&w2, &z).map_err(s)?).map_err(s)?;
        let direct = rotate(&sum, &z).map_err(s)?;
        ensure(distance(&twice, &direct) <= 1e-12 * (1.0 + norm(&z)), || {
            "group law violated".into()
        })?;
    }

    for k in 0..4u64 {
        let p = random_field(200 + k, 2, 3, 3);
        let v0 = sample_ball(&mut r, 2, 0.8);
        let prob = SimulationProblem::new(p, sqrt2.clone(), 0.1, v0).map_err(s)?;
        let step = prob.default_slow_step();
        let slow = integrate_slow(&prob, Some(step)).map_err(s)?;
        let inter = integrate_interaction(&prob, Some(step)).map_err(s)?;
        let amp = amplitude_errors(&slow, &inter)
            .map_err(s)?
            .into_iter()
            .fold(0.0, f64::max);
        ensure(amp <= 1e-6, || format!("amplitude identity off by {amp:.2e}"))?;
        let limit = 2.0 * prob.radius() + 1e-6;
        for traj in [integrate_fast(&prob, None).map_err(s)?, slow, inter] {
            ensure(traj.max_norm() <= limit, || {
                format!("left the doubled ball: {}", traj.max_norm())
            })?;
        }
    }

    let integer = FrequencyVector::parse(&["1", "2"]).map_err(s)?;
    for k in 0..20u64 {
        let p = random_field(300 + k, 2, 4, 6);
        let q = random_field(400 + k, 2, 4, 6);
        let (a, b) = (r.random_range(-3.0..3.0), r.random_range(-3.0..3.0));
        let combo = p.scale(c(a, 0.0)).add(&q.scale(c(b, 0.0))).map_err(s)?;
        let lhs = resonant_part(&combo, &integer, 0.0).map_err(s)?;
        let rhs = resonant_part(&p, &integer, 0.0)
            .and_then(|x| {
                x.scale(c(a, 0.0))
                    .add(&resonant_part(&q, &integer, 0.0)?.scale(c(b, 0.0)))
            })
            .map_err(s)?;
        ensure(lhs == rhs, || "resonant part is not linear".into())?;

        let res = resonant_part(&p, &sqrt2, sqrt2.default_tolerance()).map_err(s)?;
        let a0 = sample_ball(&mut r, 2, 1.0);
        let th = r.random_range(-20.0..20.0);
        let w: Vec<f64> = sqrt2.values().iter().map(|l| l * th).collect();
        let lhs = res.eval(&rotate(&w, &a0).map_err(s)?).map_err(s)?;
        let rhs = rotate(&w, &res.eval(&a0).map_err(s)?).map_err(s)?;
        ensure(distance(&lhs, &rhs) <= 1e-12 * (1.0 + norm(&rhs)), || {
            "equivariance violated".into()
        })?;

        let z = sample_ball(&mut r, 2, 2.0);
        for comp in p.components() {
            for j in 0..2 {
                let h = 1e-5;
                let shifted = |dz: Complex64| {
                    let mut v = z.clone();
                    v[j] += dz;
                    comp.eval(&v).unwrap()
                };
                let dx = (shifted(c(h, 0.0)) - shifted(c(-h, 0.0))) / (2.0 * h);
                let dy = (shifted(c(0.0, h)) - shifted(c(0.0, -h))) / (2.0 * h);
                let fd_dz = (dx - Complex64::i() * dy) * 0.5;
                let fd_dzbar = (dx + Complex64::i() * dy) * 0.5;
                let dz = comp.dz(j).and_then(|d| d.eval(&z)).map_err(s)?;
                let dzbar = comp.dzbar(j).and_then(|d| d.eval(&z)).map_err(s)?;
                let scale = 1.0 + dz.norm().max(dzbar.norm());
                ensure(
                    (dz - fd_dz).norm() <= 1e-6 * scale && (dzbar - fd_dzbar).norm() <= 1e-6 * scale,
                    || format!("Wirtinger derivative mismatch: {dz} vs {fd_dz}, {dzbar} vs {fd_dzbar}"),
                )?;
            }
        }
    }

    let h = random_hamiltonian(&mut r, 2, 4, 3);
    let eps = 0.1;
    let z0 = vec![c(0.3, 0.1), c(-0.2, 0.2)];
    let prob = SimulationProblem::new(hamiltonian_field(&h), sqrt2.clone(), eps, z0.clone())
        .and_then(|p| p.with_fast_horizon(5.0))
        .map_err(s)?;
    let e0 = energy(&h, &sqrt2, eps, &z0).map_err(s)?;
    let energy_drift = |dt: f64| -> Result<f64, String> {
        let traj = integrate_fast(&prob, Some(dt)).map_err(s)?;
        let mut worst: f64 = 0.0;
        for z in traj.states() {
            worst = worst.max((energy(&h, &sqrt2, eps, z).map_err(s)? - e0).abs());
        }
        Ok(worst)
    };
    let h0 = 4.0 * prob.default_fast_step();
    let (coarse, fine) = (energy_drift(h0)?, energy_drift(h0 / 2.0)?);
    ensure(fine <= coarse / 12.0, || {
        format!("energy drift {coarse:.2e} -> {fine:.2e} is not O(dt^4)")
    })?;

    let cfg_text = r#"{"study": "convergence", "field": {"random": {"dim": 2, "degree": 3, "terms": 3}},
        "frequencies": ["1", "3/2"], "v0": [[0.3, 0.1], [-0.2, 0.2]], "epsilons": [0.1, 0.01], "seed": 9}"#;
    let cfg: ExperimentConfig = cfg_text.parse().map_err(s)?;
    let again: ExperimentConfig = cfg.to_json().parse().map_err(s)?;
    ensure(again == cfg && again.to_json() == cfg.to_json(), || {
        "config round trip changed the config".into()
    })?;
    let field = random_field(11, 3, 4, 5);
    ensure(
        PolynomialField::from_json(&field.to_json()).map_err(s)? == field,
        || "field JSON round trip changed coefficients".into(),
    )?;

    thread_determinism()?;
    Ok("rotations, amplitudes, ball, linearity, equivariance, Wirtinger, energy, round trips, threads".into())
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let cli = Cli::try_parse_from(std::iter::once("kbavg").chain(args.iter().copied())).map_err(s)?;
    kbavg_cli::run(&cli).map(drop).map_err(|e| e.one_line())
}

fn read_outputs(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(s)? {
        let path = entry.map_err(s)?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        // wall-clock timings are the only nondeterministic output
        if name != "convergence_timing.csv" {
            out.insert(name, std::fs::read(&path).map_err(s)?);
        }
    }
    Ok(out)
}

fn thread_determinism() -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(s)?;
    let configs = [
        (
            "convergence",
            r#"{"field": {"builtin": "example-2.4"}, "v0": [[1.0, 0.0]], "epsilons": [0.1, 0.05, 0.02], "theta": 0.2}"#,
        ),
        (
            "average",
            r#"{"field": {"random": {"dim": 2, "degree": 3, "terms": 3}}, "frequencies": ["1", "3/2"],
                "random_points": 4, "tol": 1e-3}"#,
        ),
    ];
    for (study, text) in configs {
        let cfg_path = tmp.path().join(format!("{study}.json"));
        std::fs::write(&cfg_path, text).map_err(s)?;
        let mut seen = Vec::new();
        for threads in ["1", "4"] {
            let out = tmp.path().join(format!("{study}-{threads}"));
            let (cfg, out_s) = (cfg_path.to_string_lossy(), out.to_string_lossy());
            run_cli(&[
                study,
                "--config",
                &cfg,
                "--out",
                &out_s,
                "--seed",
                "3",
                "--threads",
                threads,
            ])?;
            seen.push(read_outputs(&out)?);
        }
        ensure(!seen[0].is_empty() && seen[0] == seen[1], || {
            format!("{study}: outputs differ across thread counts")
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 worked example closed form", worked_example, Duration::from_secs(60)),
        (
            "2 resonant part exactness",
            resonant_part_exactness,
            Duration::from_secs(1),
        ),
        ("3 convergence trend", convergence_trend, Duration::from_secs(300)),
        (
            "4 numeric/symbolic average",
            average_agreement,
            Duration::from_secs(120),
        ),
        (
            "5 Hamiltonian averaging identity",
            hamiltonian_identity,
            Duration::from_secs(30),
        ),
        ("6 action conservation", action_conservation, Duration::from_secs(300)),
        ("7 property suites", properties, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if elapsed <= budget {
                Ok(d)
            } else {
                Err(format!("{d}; took {elapsed:.1?} over budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
