//! Acceptance criteria. One line per criterion; exits nonzero if any fails.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use triflow_core::dephasing::{
    decoherence_time, evolve_bell_diagonal, information_timeseries, log_time_grid,
    pointer_basis_time, theta_complex, theta_floor, theta_modulus, BathSpec, DephasingRun, Sign,
};
use triflow_core::info::{
    accessible_information, accessible_information_of, bell_diagonal, bell_mutual_information,
    correlation_report, quantum_discord, BellDiagonalParams, EntropyTable, TripartiteState,
};
use triflow_core::linalg::{random_state_with_rng, DensityOperator, Purity};
use triflow_core::nm::{ln_nm_analytic, recurrence_rise, NMParams};
use triflow_core::oracle::{
    exact_report, truncated_theta, TruncatedBath, DEFAULT_CONFIGURATION_CAP,
};
use triflow_core::scenario::Job;
use triflow_core::states::{closed_form_i3_interaction, fixture, monogamy_crossing, Fixture};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(
        0.0,
        |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) },
    )
}

fn scenario_bath(job: Job) -> BathSpec {
    job.defaults().bath().unwrap()
}

fn scenario_series(job: Job) -> triflow_core::dephasing::TimeSeries {
    let cfg = job.defaults();
    let grid = log_time_grid(cfg.t_min, cfg.t_max, cfg.points_per_decade).unwrap();
    information_timeseries(
        &DephasingRun::new(cfg.bath().unwrap(), cfg.initial().unwrap(), grid).unwrap(),
    )
    .unwrap()
}

fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn c1_fixtures() -> Outcome {
    let d = max_of(
        [
            (Fixture::Rho1, LN_2),
            (Fixture::Rho2, 0.0),
            (Fixture::Rho3, -LN_2),
        ]
        .map(|(f, want)| {
            (EntropyTable::of(&fixture(f).unwrap())
                .unwrap()
                .interaction_information()
                - want)
                .abs()
        }),
    );
    outcome(
        d < 1e-10,
        format!("max|frakI - expected| = {d:.2e} (tol 1e-10)"),
    )
}

fn states(seed: u64, n: usize, purity: Purity) -> Vec<TripartiteState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            TripartiteState::new(random_state_with_rng(&[2, 2, 2], purity, &mut rng).unwrap())
                .unwrap()
        })
        .collect()
}

fn c2_pure_ensemble() -> Outcome {
    let tables: Vec<EntropyTable> = states(2024, 1000, Purity::Pure)
        .par_iter()
        .map(|s| EntropyTable::of(s).unwrap())
        .collect();
    let frak = max_of(tables.iter().map(|e| e.interaction_information().abs()));
    let weak = max_of(
        tables
            .iter()
            .map(|e| (e.s_ac + e.s_bc - e.s_a - e.s_b).abs()),
    );
    let araki = max_of(tables.iter().map(|e| (e.s + e.s_c - e.s_ab).abs()));
    outcome(
        frak < 1e-9 && weak < 1e-9 && araki < 1e-9,
        format!("1000 pure: max|frakI| = {frak:.2e}, saturation residuals {weak:.2e} / {araki:.2e} (tol 1e-9)"),
    )
}

/// Random mixtures with the violating fixture so both signs of frakI occur.
fn signed_states(seed: u64, n: usize) -> Vec<TripartiteState> {
    let rho3 = fixture(Fixture::Rho3).unwrap().into_inner();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let w: f64 = rng.random_range(0.0..1.0);
            let r = random_state_with_rng(&[2, 2, 2], Purity::Mixed, &mut rng).unwrap();
            let m = &rho3.matrix().scale(w) + &r.matrix().scale(1.0 - w);
            TripartiteState::new(DensityOperator::new(m, vec![2, 2, 2]).unwrap()).unwrap()
        })
        .collect()
}

fn c3_pairwise_identity() -> Outcome {
    let reports: Vec<_> = states(7, 10_000, Purity::Mixed)
        .par_iter()
        .map(|s| correlation_report(s).unwrap())
        .collect();
    let signed: Vec<_> = signed_states(8, 2000)
        .par_iter()
        .map(|s| correlation_report(s).unwrap())
        .collect();
    let identity = max_of(
        reports
            .iter()
            .chain(&signed)
            .map(|r| (r.i3 - r.min_pairwise_bound() - r.interaction).abs()),
    );
    let mismatches = reports
        .iter()
        .chain(&signed)
        .filter(|r| {
            let monogamous = r.i_ab_c >= r.i_ac + r.i_bc;
            monogamous != (r.interaction >= 0.0) && r.interaction.abs() > 1e-12
        })
        .count();
    let violating = signed.iter().filter(|r| r.interaction < 0.0).count();
    outcome(
        identity < 1e-9 && mismatches == 0 && violating > 0,
        format!(
            "10000 mixed + 2000 mixtures with rho3: max identity residual {identity:.2e} (tol 1e-9), sign mismatches {mismatches}, {violating} non-monogamous"
        ),
    )
}

fn c4_crossing() -> Outcome {
    let x = monogamy_crossing();
    let (below, above) = (
        closed_form_i3_interaction(x - 1e-3).unwrap(),
        closed_form_i3_interaction(x + 1e-3).unwrap(),
    );
    let brackets = below.interaction > 0.0 && above.interaction < 0.0;
    outcome(
        (x - 0.43596).abs() < 1e-4 && brackets,
        format!("root x = {x:.10} (want 0.43596 +/- 1e-4)"),
    )
}

fn c5_witness() -> Outcome {
    let mut worst = 0.0f64;
    let mut shown = Vec::new();
    for (job, quoted) in [
        (Job::Fig1a, -9.206),
        (Job::Fig1c, -999.086),
        (Job::Fig1e, -999.212),
    ] {
        let v = ln_nm_analytic(&NMParams::new(scenario_bath(job), 1e4).unwrap());
        worst = worst.max(((v - quoted) / quoted).abs());
        shown.push(format!("{}: {v:.4}", job.name()));
    }
    outcome(
        worst < 5e-3,
        format!(
            "ln N_M {}; max relative gap {worst:.2e} (tol 5e-3)",
            shown.join(", ")
        ),
    )
}

fn c6_theta_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let bath = BathSpec {
            modes: rng.random_range(1..=10),
            beta: rng.random_range(0.5..5.0),
            g0: rng.random_range(0.02..0.5),
            delta_width: rng.random_range(1.0..100.0),
            g_a: rng.random_range(-2.0..2.0),
            g_b: rng.random_range(-2.0..2.0),
            ..BathSpec::default()
        };
        let t = rng.random_range(0.0..50.0);
        let tb = TruncatedBath::new(bath, 1e-12).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            worst =
                worst.max((theta_complex(&bath, t, sign) - truncated_theta(&tb, t, sign)).norm());
        }
    }
    outcome(
        worst < 1e-10,
        format!("50 draws: max|theta - theta_trunc| = {worst:.2e} (tol 1e-10)"),
    )
}

fn c7_exact_dynamics() -> Outcome {
    let bath = BathSpec {
        modes: 2,
        ..BathSpec::default()
    };
    let tb = TruncatedBath::new(bath, 1e-12).unwrap();
    let p = BellDiagonalParams::werner(-0.8).unwrap();
    let rho0 = bell_diagonal(&p).unwrap();
    let i_ab0 = bell_mutual_information(&p);
    let info0 = exact_report(&tb, &rho0, 0.0, DEFAULT_CONFIGURATION_CAP)
        .unwrap()
        .info_total;
    let reports: Vec<_> = log_spaced(1e-2, 1e2, 30)
        .par_iter()
        .map(|&t| exact_report(&tb, &rho0, t, DEFAULT_CONFIGURATION_CAP).unwrap())
        .collect();
    let blind = max_of(reports.iter().flat_map(|r| [r.i_ac.abs(), r.i_bc.abs()]));
    let flow = max_of(
        reports
            .iter()
            .flat_map(|r| [(r.i_ab_c - r.i3).abs(), (r.i3 - (i_ab0 - r.i_ab)).abs()]),
    );
    let info = max_of(reports.iter().map(|r| (r.info_total - info0).abs()));
    let min_frak = reports
        .iter()
        .map(|r| r.interaction)
        .fold(f64::INFINITY, f64::min);
    let max_i3 = max_of(reports.iter().map(|r| r.i3));
    outcome(
        blind < 1e-9 && flow < 1e-9 && info < 1e-9 && min_frak >= -1e-9 && max_i3 > 0.1,
        format!(
            "n_max {}: |I_XC| {blind:.1e}, flow {flow:.1e}, info drift {info:.1e}, min frakI {min_frak:.2e}, max I3 {max_i3:.3}",
            tb.n_max()
        ),
    )
}

fn c8_short_time() -> Outcome {
    let bath = scenario_bath(Job::Fig1a);
    let t_d = decoherence_time(&bath).unwrap().t_d;
    let worst = max_of((1..=200).map(|i| {
        let t = 0.2 * t_d * i as f64 / 200.0;
        let gauss = (-(t / t_d).powi(2)).exp();
        (theta_modulus(&bath, t, Sign::Minus) - gauss).abs() / gauss
    }));
    outcome(
        worst < 0.05,
        format!("t_D = {t_d:.5}: max relative gap on [0, 0.2 t_D] = {worst:.2e} (tol 0.05)"),
    )
}

fn c9_floor() -> Outcome {
    let bath = scenario_bath(Job::Fig1a);
    let floor = theta_floor(&bath);
    let min = (0..10_000)
        .map(|i| theta_modulus(&bath, 0.1 * i as f64, Sign::Minus))
        .fold(f64::INFINITY, f64::min);
    outcome(
        min >= floor - 1e-12,
        format!("min |theta_-| = {min:.6e} >= tanh^N = {floor:.6e}"),
    )
}

fn c10_pointer_basis() -> Outcome {
    let bath = scenario_bath(Job::Fig2b);
    let c = Job::Fig2b.defaults().initial().unwrap();
    let excess = |t: f64| {
        let e = evolve_bell_diagonal(&c, &bath, t).unwrap();
        e.c1.abs().max(e.c2.abs()) - e.c3.abs()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    assert!(excess(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let t_x = hi;
    let pb = pointer_basis_time(&c, &bath)
        .unwrap()
        .expect("fig2b has a sudden change");
    let gap = (t_x - pb.t_pb_approx).abs() / t_x;
    let plateau = accessible_information_of(c.c3.abs());
    let j: Vec<f64> = log_spaced(t_x * (1.0 + 1e-9), 1e4, 2000)
        .iter()
        .map(|&t| accessible_information(&evolve_bell_diagonal(&c, &bath, t).unwrap()))
        .collect();
    let spread = max_of(j.iter().map(|v| v - j[0])) + max_of(j.iter().map(|v| j[0] - v));
    let off = max_of(j.iter().map(|v| (v - plateau).abs()));
    outcome(
        gap < 0.1 && spread < 1e-9 && off < 1e-10,
        format!(
            "crossing t = {t_x:.5}, t_PB = {:.5} (gap {:.1}%), J spread {spread:.1e}, |J - J(|c3|)| {off:.1e}",
            pb.t_pb_approx,
            100.0 * gap
        ),
    )
}

fn c11_conservation() -> Outcome {
    let s = scenario_series(Job::Fig2a);
    let c0 = s.initial;
    let (i0, d0) = (bell_mutual_information(&c0), quantum_discord(&c0));
    let worst = max_of(s.points.iter().map(|p| {
        let i3 = i0 - bell_mutual_information(&p.c_prime);
        (i3 + quantum_discord(&p.c_prime) - d0)
            .abs()
            .max(p.conservation_residual.abs())
    }));
    outcome(
        worst < 1e-9,
        format!(
            "{} grid times: max|I3 + D - D(0)| = {worst:.2e} (tol 1e-9)",
            s.points.len()
        ),
    )
}

fn c12_backflow() -> Outcome {
    let low = scenario_series(Job::Fig1a);
    let theta: Vec<f64> = low.points.iter().map(|p| p.theta_minus_abs).collect();
    let local_minima = theta
        .windows(3)
        .filter(|w| w[1] < w[0] && w[1] < w[2])
        .count();
    let rise = recurrence_rise(&theta);

    let hot = scenario_series(Job::Fig1e);
    let t_d = decoherence_time(&hot.bath).unwrap().t_d;
    let late: Vec<f64> = hot
        .points
        .iter()
        .filter(|p| p.t >= t_d)
        .map(|p| p.theta_minus_abs)
        .collect();
    let hot_rise = recurrence_rise(&late);
    outcome(
        local_minima >= 1 && rise > 0.01 && hot_rise <= 1e-6,
        format!("fig1a: {local_minima} local minima, max rise {rise:.3}; fig1e after t_D: max rise {hot_rise:.2e} (noise 1e-6)"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("appendix fixtures", c1_fixtures),
        ("pure-state ensemble", c2_pure_ensemble),
        ("monogamy identity ensemble", c3_pairwise_identity),
        ("monogamy crossing", c4_crossing),
        ("non-Markovianity quotes", c5_witness),
        ("theta oracle equivalence", c6_theta_oracle),
        ("exact-dynamics identities", c7_exact_dynamics),
        ("short-time decoherence law", c8_short_time),
        ("coherence floor", c9_floor),
        ("pointer basis", c10_pointer_basis),
        ("discord conservation", c11_conservation),
        ("qualitative backflow", c12_backflow),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        failures += usize::from(!o.passed);
        println!(
            "{} [{:>2}] {name}: {} ({:.2}s)",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
