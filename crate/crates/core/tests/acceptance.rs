//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{dense_scan_zeros, echo_integrand, simpson_fixed, COLLINEAR_RESIDUAL};
use qholo::dynamics::collinear_power_law_phase;
use qholo::echo::{self, EchoSweepRecord};
use qholo::geometry::{CollinearStatic, RotatingApproach, SampledTrajectory};
use qholo::numerics::{find_zeros, integrate, CumulativeIntegral};
use qholo::{
    EchoParams, EchoProtocol, Potential, QuadratureSpec, Simulation, StateConfiguration,
    Trajectory, TwoQubitState,
};

const CONCURRENCE_TOL: f64 = 1e-9;
const CLASSICAL_TOL: f64 = 1e-10;
const VIOLATION_THRESHOLD: f64 = 1e-9;
const VIOLATION_FRACTION: f64 = 0.99;
const CLOSED_FORM_TOL_COARSE: f64 = 3.2e-2;
const CLOSED_FORM_TOL_FINE: f64 = 3.2e-3;
const CLOSED_FORM_RATIO: (f64, f64) = (0.08, 0.12);
const NULL_PHASE_TOL: f64 = 1e-10;
const NULL_TIME_TOL: f64 = 1e-8;
const SUPPRESSED_TOL: f64 = 1e-9;
const PROBE_FLOOR: f64 = 1e-12;
const DIVERGENCE_DECADES: f64 = 0.3;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_STEPS: usize = 1_000_000;
const ORACLE_SCAN_POINTS: usize = 100_000;

const REFERENCE_OMEGAS: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];
const SWEEP_SEPARATION: f64 = 1.0;
const SWEEP_STATE_SEPARATION: f64 = 0.1;

type Outcome = Result<String, String>;

/// Speeds `0.01 * 2^(i/4)`, so doubling a speed moves four grid points.
fn sweep_speeds() -> Vec<f64> {
    (0..20).map(|i| 0.01 * 2f64.powf(i as f64 / 4.0)).collect()
}

fn sweep_template() -> EchoParams {
    EchoParams::new(SWEEP_SEPARATION, 0.0, 0.0, SWEEP_STATE_SEPARATION)
}

fn random_point(rng: &mut StdRng, scale: f64) -> [f64; 3] {
    [
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    ]
}

fn random_configuration(rng: &mut StdRng) -> StateConfiguration {
    loop {
        let pts: [[f64; 3]; 4] = std::array::from_fn(|_| random_point(rng, 1.0));
        if let Ok(cfg) = StateConfiguration::new(pts[0], pts[1], pts[2], pts[3]) {
            if cfg.distances().min() > 0.05 {
                return cfg;
            }
        }
    }
}

/// A rotating approach or a static configuration, plus the latest time to
/// sample it at.
fn random_trajectory(rng: &mut StdRng) -> (Trajectory, f64) {
    if rng.random_bool(0.6) {
        let l = rng.random_range(0.5..2.0);
        let v = rng.random_range(0.01..0.5);
        let w = rng.random_range(0.05..1.0);
        let x0 = rng.random_range(0.01..0.3) * l;
        let r = RotatingApproach::new(l, v, w, x0).unwrap();
        (Trajectory::RotatingApproach(r), 0.9 * l / v)
    } else {
        (Trajectory::Static(random_configuration(rng)), 50.0)
    }
}

fn criterion_concurrence_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x51);
    let initial = TwoQubitState::symmetric_product();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (trajectory, t_max) = random_trajectory(&mut rng);
        let coupling = rng.random_range(-2.0..2.0);
        let exponent = rng.random_range(0.5..3.0);
        let sim = Simulation::new(
            trajectory,
            Potential::power_law(coupling, exponent).unwrap(),
        );
        for _ in 0..20 {
            let t = rng.random_range(0.0..t_max);
            let c = sim
                .evolve(t, &initial)
                .and_then(|s| s.concurrence())
                .map_err(|e| e.to_string())?;
            let phi = sim.entangling_phase(t).map_err(|e| e.to_string())?;
            worst = worst.max((c - (phi / 2.0).sin().abs()).abs());
        }
    }
    let detail = format!("max deviation {worst:.3e}");
    if worst < CONCURRENCE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Both states of body A stay on the bisecting plane of body B's states,
/// so `d11 = d12` and `d21 = d22` throughout.
fn random_symmetric_trajectory(rng: &mut StdRng) -> Trajectory {
    let samples = (0..6)
        .map(|k| {
            let centre = random_point(rng, 2.0);
            let half = [0.0, 0.0, rng.random_range(0.1..0.5)];
            let offset = |rng: &mut StdRng| {
                let p = random_point(rng, 1.0);
                [p[0], p[1] + 0.3f64.copysign(p[1]), 0.0]
            };
            let (u1, u2) = (offset(rng), offset(rng));
            let add = |a: [f64; 3], b: [f64; 3], s: f64| std::array::from_fn(|i| a[i] + s * b[i]);
            let cfg = StateConfiguration::new(
                add(centre, u1, 1.0),
                add(centre, u2, 1.0),
                add(centre, half, 1.0),
                add(centre, half, -1.0),
            )
            .unwrap();
            (k as f64 * 3.0, cfg)
        })
        .collect();
    Trajectory::Sampled(SampledTrajectory::new(samples).unwrap())
}

fn criterion_classicality() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x52);
    let initial = TwoQubitState::symmetric_product();
    let mut worst: f64 = 0.0;
    let mut check = |sim: &Simulation, t_max: f64, rng: &mut StdRng| -> Result<(), String> {
        for _ in 0..20 {
            let t = rng.random_range(0.0..t_max);
            let c = sim
                .evolve(t, &initial)
                .and_then(|s| s.concurrence())
                .map_err(|e| e.to_string())?;
            worst = worst.max(c);
        }
        Ok(())
    };
    for _ in 0..25 {
        let (trajectory, t_max) = random_trajectory(&mut rng);
        let value = rng.random_range(-3.0..3.0);
        let sim = Simulation::new(trajectory, Potential::constant(value).unwrap());
        check(&sim, t_max, &mut rng)?;
    }
    for _ in 0..25 {
        let trajectory = random_symmetric_trajectory(&mut rng);
        let d = trajectory.distances_at(1.0).unwrap();
        assert!((d.d11 - d.d12).abs() < 1e-12 && (d.d21 - d.d22).abs() < 1e-12);
        let potential =
            Potential::power_law(rng.random_range(-2.0..2.0), rng.random_range(0.5..3.0)).unwrap();
        let sim = Simulation::new(trajectory, potential);
        check(&sim, 15.0, &mut rng)?;
    }
    let detail = format!("max concurrence {worst:.3e}");
    if worst < CLASSICAL_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_generic_violation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x53);
    let potential = Potential::power_law(1.0, 1.0).unwrap();
    let mut violated = 0;
    let mut total = 0;
    while total < 1000 {
        let x: [f64; 12] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let Ok(cfg) = StateConfiguration::from_coordinates(&x) else {
            continue;
        };
        total += 1;
        let h = cfg
            .constraint_residual(&potential)
            .map_err(|e| e.to_string())?;
        if h.abs() > VIOLATION_THRESHOLD {
            violated += 1;
        }
    }
    let fraction = violated as f64 / total as f64;
    let detail = format!("{violated}/{total} violate the constraint");
    if fraction >= VIOLATION_FRACTION {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_error(dx: f64) -> Result<(f64, f64), String> {
    let trajectory = Trajectory::CollinearStatic(CollinearStatic::new(1.0, dx).unwrap());
    let sim = Simulation::new(trajectory, Potential::power_law(1.0, 1.0).unwrap());
    let exact = sim.entangling_phase(1.0).map_err(|e| e.to_string())?;
    let approx = collinear_power_law_phase(1.0, 1.0, 1.0, dx, 1.0);
    // Deviation relative to the leading-order value.
    Ok((exact, ((approx - exact) / approx).abs()))
}

fn criterion_closed_form() -> Outcome {
    let (exact_coarse, coarse) = closed_form_error(1e-2)?;
    let (_, fine) = closed_form_error(1e-3)?;
    let ratio = fine / coarse;
    let detail =
        format!("exact {exact_coarse:.10e}, errors {coarse:.4e} / {fine:.4e}, ratio {ratio:.4}");
    let ok = (exact_coarse - COLLINEAR_RESIDUAL).abs() < 1e-15
        && coarse <= CLOSED_FORM_TOL_COARSE
        && fine <= CLOSED_FORM_TOL_FINE
        && (CLOSED_FORM_RATIO.0..=CLOSED_FORM_RATIO.1).contains(&ratio);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_symmetry_nulls() -> Outcome {
    let mut worst_phase: f64 = 0.0;
    let mut worst_time: f64 = 0.0;
    for omega in [0.05, 0.2] {
        let protocol =
            EchoProtocol::new(EchoParams::new(1.0, 0.0, omega, 0.1)).map_err(|e| e.to_string())?;
        for n in [1, 2] {
            for k in 1..=3 {
                let phi = protocol
                    .term_phase(n, k as f64 * PI / omega)
                    .map_err(|e| e.to_string())?;
                worst_phase = worst_phase.max(phi.abs());
            }
        }
        let t_star = protocol.find_null_time().map_err(|e| e.to_string())?;
        worst_time = worst_time.max((t_star - PI / omega).abs());
    }
    let detail = format!("max |phase| {worst_phase:.3e}, max null-time error {worst_time:.3e}");
    if worst_phase < NULL_PHASE_TOL && worst_time < NULL_TIME_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_reference_sweep() -> Result<Vec<EchoSweepRecord>, String> {
    echo::sweep(
        &sweep_template(),
        &QuadratureSpec::default(),
        &sweep_speeds(),
        &REFERENCE_OMEGAS,
    )
    .map_err(|e| e.to_string())
}

fn criterion_echo_suppression(records: &[EchoSweepRecord]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst_leading: f64 = 0.0;
    let mut converged = 0;
    for omega in REFERENCE_OMEGAS {
        if !records.iter().any(|r| r.omega == omega && r.converged) {
            failures.push(format!("no converged record at omega={omega}"));
        }
    }
    for r in records.iter().filter(|r| r.converged) {
        converged += 1;
        let protocol = EchoProtocol::new(sweep_template().with_motion(r.v, r.omega))
            .map_err(|e| e.to_string())?;
        let leading = protocol
            .term_phase(1, r.t_star)
            .map_err(|e| e.to_string())?;
        worst_leading = worst_leading.max(leading.abs());
        if leading.abs() >= SUPPRESSED_TOL
            || r.phi2_at_t_star.abs() <= PROBE_FLOOR
            || !(r.t_star > 0.0 && r.t_star < r.t_bar)
        {
            failures.push(format!(
                "omega={} v={:.4}: phi1={leading:.3e} phi2={:.3e} t*={} t_bar={}",
                r.omega, r.v, r.phi2_at_t_star, r.t_star, r.t_bar
            ));
        }
    }
    let detail = format!(
        "{converged}/{} converged, max |phi1(t*)| {worst_leading:.3e}",
        records.len()
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

fn criterion_trends(records: &[EchoSweepRecord]) -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for omega in REFERENCE_OMEGAS {
        let series: Vec<&EchoSweepRecord> = records
            .iter()
            .filter(|r| r.omega == omega && r.converged)
            .collect();
        let Some(slowest) = series.first() else {
            failures.push(format!("omega={omega}: nothing converged"));
            continue;
        };
        // Ascending v, so magnitude must fall along the series.
        let breaks = series
            .windows(2)
            .filter(|w| w[0].phi2_at_t_star.abs() <= w[1].phi2_at_t_star.abs())
            .count();
        if breaks > 0 {
            failures.push(format!(
                "omega={omega}: |phi2(t*)| not monotone in v ({breaks} reversals)"
            ));
        }
        let doubled = series.iter().find(|r| (r.v / slowest.v - 2.0).abs() < 1e-9);
        match doubled {
            Some(d) => {
                let gain = slowest.log10_phi2() - d.log10_phi2();
                notes.push(format!("omega={omega}: gain {gain:.3}"));
                if gain.is_nan() || gain < DIVERGENCE_DECADES {
                    failures.push(format!(
                        "omega={omega}: log10|phi2| gain from v={:.4} to v={:.4} is {gain:.3}",
                        d.v, slowest.v
                    ));
                }
            }
            None => failures.push(format!("omega={omega}: no converged record at 2v")),
        }
    }
    if failures.is_empty() {
        Ok(notes.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_oracles() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x58);
    let spec = QuadratureSpec::default();
    let mut worst_integral: f64 = 0.0;
    let mut worst_root: f64 = 0.0;
    let mut roots_seen = 0;
    for _ in 0..10 {
        let l = rng.random_range(0.5..2.0);
        let v = rng.random_range(0.02..0.3);
        let w = rng.random_range(0.05..0.4);
        let x0 = rng.random_range(0.05..0.2) * l;
        let t_bar = l / v;
        let end = 0.95 * t_bar;
        let integrand = echo_integrand(l, v, w, x0, 1, 1.0);

        let t = rng.random_range(0.1 * end..end);
        let adaptive = integrate(&integrand, 0.0, t, &spec).map_err(|e| e.to_string())?;
        let oracle = simpson_fixed(&integrand, 0.0, t, ORACLE_STEPS);
        worst_integral = worst_integral.max((adaptive - oracle).abs());

        let protocol =
            EchoProtocol::new(EchoParams::new(l, v, w, x0)).map_err(|e| e.to_string())?;
        let lib_phase = protocol.term_phase(1, t).map_err(|e| e.to_string())?;
        worst_integral = worst_integral.max((lib_phase - oracle).abs());

        let expected = dense_scan_zeros(
            &integrand,
            end,
            ORACLE_SCAN_POINTS,
            ORACLE_STEPS / ORACLE_SCAN_POINTS,
            1e-13 * end,
        );
        let start = 1e-3 * end;
        let scan_points = ((64.0 * end * w / PI).ceil() as usize).max(2000);
        let mut phase = CumulativeIntegral::new(&integrand, 0.0, spec);
        let found = find_zeros(|t| phase.value_at(t).unwrap(), start, end, scan_points);
        if found.len() != expected.len() {
            return Err(format!(
                "L={l:.3} v={v:.3} w={w:.3}: {} zeros found, oracle has {}",
                found.len(),
                expected.len()
            ));
        }
        for (a, b) in found.iter().zip(&expected) {
            worst_root = worst_root.max((a - b).abs());
        }
        roots_seen += expected.len();
    }
    let detail = format!(
        "max integral error {worst_integral:.3e}, max root error {worst_root:.3e} over {roots_seen} roots"
    );
    if worst_integral < ORACLE_TOL && worst_root < ORACLE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("sweep.json");
    let speeds: Vec<String> = sweep_speeds().iter().map(|v| format!("{v:e}")).collect();
    let omegas: Vec<String> = REFERENCE_OMEGAS.iter().map(|v| format!("{v:e}")).collect();
    let text = format!(
        "{{\"echo\": {{\"separation\": {SWEEP_SEPARATION}, \"state_separation\": {SWEEP_STATE_SEPARATION}}},\n \"v_grid\": [{}],\n \"omega_grid\": [{}]}}\n",
        speeds.join(", "),
        omegas.join(", ")
    );
    std::fs::write(&config, text).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("sweep-{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_qholo"))
            .args(["sweep", "--config"])
            .arg(&config)
            .arg("--output")
            .arg(&out)
            .args(["--threads", threads])
            .env_remove("QHOLO_THREADS")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!(
                "sweep with {threads} thread(s) exited with {status}"
            ));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let rows = outputs[0].iter().filter(|&&b| b == b'\n').count();
    if outputs[0] == outputs[1] {
        Ok(format!(
            "{} bytes, {rows} lines identical",
            outputs[0].len()
        ))
    } else {
        Err("outputs differ".into())
    }
}

struct Report {
    failed: usize,
}

impl Report {
    fn record(
        &mut self,
        id: &str,
        name: &str,
        limit: Duration,
        elapsed: Duration,
        outcome: Outcome,
    ) {
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        println!(
            "{} [{id}] {name} ({:.2}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }

    fn run<F: FnOnce() -> Outcome>(&mut self, id: &str, name: &str, limit: Duration, f: F) {
        let start = Instant::now();
        let outcome = f();
        self.record(id, name, limit, start.elapsed(), outcome);
    }
}

fn main() {
    let mut report = Report { failed: 0 };
    let secs = Duration::from_secs;

    report.run(
        "1",
        "concurrence identity",
        secs(30),
        criterion_concurrence_identity,
    );
    report.run(
        "2",
        "classicality constraint",
        secs(5),
        criterion_classicality,
    );
    report.run(
        "3",
        "generic violation",
        secs(5),
        criterion_generic_violation,
    );
    report.run(
        "4",
        "leading-order closed form",
        secs(1),
        criterion_closed_form,
    );
    report.run("5", "symmetry nulls", secs(5), criterion_symmetry_nulls);

    let start = Instant::now();
    let sweep = run_reference_sweep();
    let (suppression, trends) = match &sweep {
        Ok(records) => (
            criterion_echo_suppression(records),
            criterion_trends(records),
        ),
        Err(e) => (Err(e.clone()), Err(e.clone())),
    };
    let echo_time = start.elapsed();
    report.record("6", "echo suppression", secs(120), echo_time, suppression);
    report.record("7", "probe phase trends", secs(120), echo_time, trends);

    report.run("8", "oracle equivalence", secs(60), criterion_oracles);
    report.run(
        "9",
        "thread-count determinism",
        secs(180),
        criterion_determinism,
    );

    if report.failed > 0 {
        println!("{} criterion/criteria failed", report.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
