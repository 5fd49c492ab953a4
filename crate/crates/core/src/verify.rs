//! Release gate: every identity, ensemble and oracle comparison in one verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dephasing::{
    evolved_two_qubit_state, series_point, theta_complex, theta_floor, theta_modulus, BathSpec,
    Sign,
};
use crate::error::{Error, Result};
use crate::info::{
    bell_diagonal, bell_mutual_information, correlation_report, BellDiagonalParams, EntropyTable,
    TripartiteState,
};
use crate::linalg::{random_state_with_rng, DensityOperator, Purity};
use crate::oracle::{evolve_exact, truncated_theta, TruncatedBath};
use crate::scenario::RunConfig;
use crate::states::{
    appendix_grid, closed_form_i3_interaction, fixture, monogamy_crossing, Fixture,
};

const IDENTITY_TOL: f64 = 1e-9;
const THETA_DRAWS: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub bath: BathSpec,
    pub eps_trunc: f64,
    pub modes_cap: usize,
    pub configuration_cap: usize,
    pub seed: u64,
    pub pure_samples: usize,
    pub mixed_samples: usize,
    pub oracle_times: usize,
}

impl VerifyOptions {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            bath: cfg.bath()?,
            eps_trunc: cfg.eps_trunc,
            modes_cap: cfg.modes_cap.max(1),
            configuration_cap: cfg.configuration_cap,
            seed: cfg.seed,
            pure_samples: cfg.pure_samples,
            mixed_samples: cfg.mixed_samples,
            oracle_times: cfg.oracle_times.max(2),
        })
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self::from_config(&RunConfig::default()).expect("default config is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, residuals: impl IntoIterator<Item = f64>, tolerance: f64) -> Self {
        let mut samples = 0;
        let mut max_residual = 0.0f64;
        let mut finite = true;
        for r in residuals {
            samples += 1;
            finite &= r.is_finite();
            max_residual = max_residual.max(r);
        }
        Self {
            name: name.to_string(),
            max_residual,
            tolerance,
            samples,
            passed: finite && max_residual < tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub passed: bool,
    pub eps_trunc: f64,
    /// Modes used by the full-report oracle after the configuration cap.
    pub oracle_modes: usize,
    pub oracle_n_max: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn ln2() -> f64 {
    std::f64::consts::LN_2
}

fn fixture_checks() -> Result<Vec<Check>> {
    let mut r = Vec::new();
    for (f, expect) in [
        (Fixture::Rho1, ln2()),
        (Fixture::Rho2, 0.0),
        (Fixture::Rho3, -ln2()),
    ] {
        r.push((EntropyTable::of(&fixture(f)?)?.interaction_information() - expect).abs());
    }
    Ok(vec![Check::new("fixtures_interaction", r, 1e-10)])
}

fn sample_states(rng: &mut ChaCha8Rng, n: usize, purity: Purity) -> Result<Vec<TripartiteState>> {
    (0..n)
        .map(|_| TripartiteState::new(random_state_with_rng(&[2, 2, 2], purity, rng)?))
        .collect()
}

fn ensemble_checks(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let pure = sample_states(rng, opts.pure_samples, Purity::Pure)?;
    let pure_tables = pure
        .par_iter()
        .map(EntropyTable::of)
        .collect::<Result<Vec<_>>>()?;
    let mixed = sample_states(rng, opts.mixed_samples, Purity::Mixed)?;
    let reports = mixed
        .par_iter()
        .map(correlation_report)
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        Check::new(
            "pure_state_interaction",
            pure_tables
                .iter()
                .map(|e| e.interaction_information().abs()),
            IDENTITY_TOL,
        ),
        Check::new(
            "pure_state_weak_monotonicity_saturation",
            pure_tables
                .iter()
                .map(|e| (e.s_ac + e.s_bc - e.s_a - e.s_b).abs()),
            IDENTITY_TOL,
        ),
        Check::new(
            "pure_state_araki_lieb_saturation",
            pure_tables.iter().map(|e| (e.s + e.s_c - e.s_ab).abs()),
            IDENTITY_TOL,
        ),
        Check::new(
            "pairwise_identity",
            reports
                .iter()
                .map(|r| (r.i3 - r.min_pairwise_bound() - r.interaction).abs()),
            IDENTITY_TOL,
        ),
        Check::new(
            "monogamy_verdict",
            reports.iter().map(|r| {
                let direct = r.i_ab_c - r.i_ac - r.i_bc;
                let agrees =
                    (direct >= 0.0) == (r.interaction >= 0.0) || direct.abs() < IDENTITY_TOL;
                if agrees {
                    (direct - r.interaction).abs()
                } else {
                    f64::INFINITY
                }
            }),
            IDENTITY_TOL,
        ),
    ])
}

fn closed_form_checks(bath: &BathSpec) -> Result<Vec<Check>> {
    let rows = appendix_grid(101)?;
    let crossing = closed_form_i3_interaction(monogamy_crossing())?.interaction;

    let fig2a = BellDiagonalParams::werner(-0.6)?;
    let times = log_spaced(1e-2, 1e2, 200);
    let conservation = times
        .par_iter()
        .map(|&t| series_point(bath, &fig2a, t).map(|p| p.conservation_residual.abs()))
        .collect::<Result<Vec<_>>>()?;

    let floor = theta_floor(bath);
    let floor_gap: Vec<f64> = (0..10_000)
        .into_par_iter()
        .map(|i| (floor - 1e-12 - theta_modulus(bath, 0.1 * i as f64, Sign::Minus)).max(0.0))
        .collect();
    let routes: Vec<f64> = times
        .iter()
        .flat_map(|&t| {
            [Sign::Plus, Sign::Minus].map(|s| {
                let m = theta_modulus(bath, t, s);
                (theta_complex(bath, t, s).norm() - m).abs() / m
            })
        })
        .collect();
    Ok(vec![
        Check::new(
            "appendix_closed_vs_numeric",
            rows.iter().flat_map(|r| {
                [
                    (r.i3_closed - r.i3_numeric).abs(),
                    (r.interaction_closed - r.interaction_numeric).abs(),
                ]
            }),
            IDENTITY_TOL,
        ),
        Check::new("monogamy_crossing_root", [crossing.abs()], 1e-10),
        Check::new("discord_conservation", conservation, IDENTITY_TOL),
        Check::new("theta_floor", floor_gap, 1e-300),
        Check::new("theta_modulus_routes", routes, 1e-12),
    ])
}

fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn theta_oracle_check(opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut residuals = Vec::with_capacity(2 * THETA_DRAWS);
    let mut worst_modes = 1;
    for _ in 0..THETA_DRAWS {
        let bath = BathSpec {
            modes: rng.random_range(1..=10),
            beta: rng.random_range(0.5..5.0),
            g0: rng.random_range(0.02..0.5),
            delta_width: rng.random_range(1.0..100.0),
            g_a: rng.random_range(-2.0..2.0),
            g_b: rng.random_range(-2.0..2.0),
            ..opts.bath
        };
        worst_modes = worst_modes.max(bath.modes);
        let t = rng.random_range(0.0..50.0);
        let tb = TruncatedBath::new(bath, opts.eps_trunc)?;
        for sign in [Sign::Plus, Sign::Minus] {
            residuals.push((theta_complex(&bath, t, sign) - truncated_theta(&tb, t, sign)).norm());
        }
    }
    Ok(Check::new(
        "oracle_theta",
        residuals,
        truncation_tolerance(opts.eps_trunc, worst_modes),
    ))
}

/// Per mode the truncated and exact averages differ by at most twice the tail weight.
fn truncation_tolerance(eps_trunc: f64, modes: usize) -> f64 {
    1e-10 + 4.0 * modes as f64 * eps_trunc
}

/// Largest `N <= modes_cap` whose configuration count fits the cap.
fn oracle_bath(opts: &VerifyOptions) -> Result<TruncatedBath> {
    let mut n = opts.modes_cap.min(opts.bath.modes).max(1);
    loop {
        let bath = BathSpec {
            modes: n,
            ..opts.bath
        };
        let tb = TruncatedBath::new(bath, opts.eps_trunc)?;
        if tb.configuration_count() <= opts.configuration_cap as u128 {
            return Ok(tb);
        }
        if n == 1 {
            return Err(Error::ConfigurationCap {
                configs: tb.configuration_count(),
                cap: opts.configuration_cap,
            });
        }
        n -= 1;
    }
}

struct Trajectory {
    reports: Vec<crate::info::CorrelationReport>,
    reduced: Vec<DensityOperator>,
}

fn trajectory(
    tb: &TruncatedBath,
    rho0: &DensityOperator,
    times: &[f64],
    cap: usize,
) -> Result<Trajectory> {
    let mut reports = Vec::with_capacity(times.len());
    let mut reduced = Vec::with_capacity(times.len());
    for &t in times {
        let bs = evolve_exact(tb, rho0, t, cap)?;
        reports.push(bs.report()?);
        reduced.push(bs.reduced_qubits());
    }
    Ok(Trajectory { reports, reduced })
}

fn oracle_checks(
    opts: &VerifyOptions,
    tb: &TruncatedBath,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Check>> {
    let mut times = vec![0.0];
    times.extend(log_spaced(1e-2, 1e2, opts.oracle_times - 1));
    let werner_params = BellDiagonalParams::werner(-0.8)?;
    let werner = bell_diagonal(&werner_params)?;
    let generic = random_state_with_rng(&[2, 2], Purity::Mixed, rng)?;
    let w = trajectory(tb, &werner, &times, opts.configuration_cap)?;
    let g = trajectory(tb, &generic, &times, opts.configuration_cap)?;
    let i_ab0 = bell_mutual_information(&werner_params);

    let mut flow = Vec::new();
    let mut cond = Vec::new();
    let mut info = Vec::new();
    let mut interaction_flow = Vec::new();
    let mut splits = Vec::new();
    let mut local_loss = Vec::new();
    let mut monogamy = Vec::new();
    for traj in [&w, &g] {
        let r0 = &traj.reports[0];
        let local0 = [ln2() - r0.s_a, ln2() - r0.s_b];
        for r in &traj.reports {
            flow.push((r.i_ac + ln2() - r.s_a - local0[0]).abs());
            flow.push((r.i_bc + ln2() - r.s_b - local0[1]).abs());
            cond.push((r.s_ac - r0.s_a - r0.s_c).abs());
            cond.push((r.s_bc - r0.s_b - r0.s_c).abs());
            cond.push((r.s_c - r0.s_c).abs());
            info.push((r.info_total - r0.info_total).abs());
            interaction_flow.push((r.interaction - (r0.i_ab - r.i_ab)).abs());
            let loss = r0.info_local - r.info_local;
            for (pair, split) in [(r.i_ab, r.i_ab_c), (r.i_ac, r.i_ac_b), (r.i_bc, r.i_bc_a)] {
                splits.push((pair + split - r0.i_ab - loss).abs());
            }
            local_loss.push((-loss).max(0.0));
            monogamy.push((-r.interaction).max(0.0));
        }
    }
    let reduced: Vec<f64> = times
        .iter()
        .zip(&w.reduced)
        .map(|(&t, rho)| {
            let closed = evolved_two_qubit_state(
                &werner_params,
                theta_complex(tb.bath(), t, Sign::Plus),
                theta_complex(tb.bath(), t, Sign::Minus),
            )?;
            Ok(rho.matrix().max_abs_diff(closed.matrix()))
        })
        .collect::<Result<_>>()?;

    Ok(vec![
        Check::new(
            "oracle_bell_bath_blind",
            w.reports.iter().flat_map(|r| [r.i_ac.abs(), r.i_bc.abs()]),
            IDENTITY_TOL,
        ),
        Check::new(
            "oracle_bell_split_is_i3",
            w.reports.iter().map(|r| (r.i_ab_c - r.i3).abs()),
            IDENTITY_TOL,
        ),
        Check::new(
            "oracle_bell_i3_flow",
            w.reports.iter().map(|r| (r.i3 - (i_ab0 - r.i_ab)).abs()),
            IDENTITY_TOL,
        ),
        Check::new("oracle_state_information", info, IDENTITY_TOL),
        Check::new("oracle_local_flow", flow, IDENTITY_TOL),
        Check::new("oracle_conditional_entropies", cond, IDENTITY_TOL),
        Check::new("oracle_interaction_flow", interaction_flow, IDENTITY_TOL),
        Check::new("oracle_correlation_splits", splits, IDENTITY_TOL),
        Check::new("oracle_local_loss_nonnegative", local_loss, IDENTITY_TOL),
        Check::new("oracle_monogamy", monogamy, IDENTITY_TOL),
        Check::new(
            "oracle_reduced_state",
            reduced,
            truncation_tolerance(opts.eps_trunc, tb.bath().modes),
        ),
    ])
}

/// Runs every check. Failures are reported in the verdict, not as errors.
pub fn verify_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tb = oracle_bath(opts)?;
    let mut checks = fixture_checks()?;
    checks.extend(ensemble_checks(opts, &mut rng)?);
    checks.extend(closed_form_checks(&opts.bath)?);
    checks.push(theta_oracle_check(opts, &mut rng)?);
    checks.extend(oracle_checks(opts, &tb, &mut rng)?);
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        eps_trunc: opts.eps_trunc,
        oracle_modes: tb.bath().modes,
        oracle_n_max: tb.n_max(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions {
            pure_samples: 50,
            mixed_samples: 50,
            oracle_times: 6,
            modes_cap: 2,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn default_suite_passes() {
        let r = verify_all(&small()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert_eq!((r.oracle_modes, r.oracle_n_max), (2, 27));
    }

    #[test]
    fn loose_truncation_degrades_only_oracle_residuals() {
        let tight = verify_all(&small()).unwrap();
        let loose = verify_all(&VerifyOptions {
            eps_trunc: 1e-4,
            ..small()
        })
        .unwrap();
        assert!(loose.passed);
        assert!(
            loose.check("oracle_theta").unwrap().max_residual
                > 100.0 * tight.check("oracle_theta").unwrap().max_residual
        );
        for name in [
            "oracle_state_information",
            "oracle_bell_i3_flow",
            "pairwise_identity",
        ] {
            assert!(loose.check(name).unwrap().max_residual < IDENTITY_TOL);
        }
    }

    #[test]
    fn ensembles_pass_for_ten_seeds() {
        for seed in 0..10 {
            let opts = VerifyOptions {
                seed,
                pure_samples: 200,
                mixed_samples: 20,
                ..small()
            };
            let checks = ensemble_checks(&opts, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!(checks.iter().all(|c| c.passed), "seed {seed}: {checks:?}");
        }
    }

    #[test]
    fn hot_bath_falls_back_to_fewer_oracle_modes() {
        let hot = VerifyOptions {
            bath: BathSpec {
                beta: 0.1,
                delta_width: 10.0,
                ..BathSpec::default()
            },
            modes_cap: 3,
            ..small()
        };
        let tb = oracle_bath(&hot).unwrap();
        assert_eq!((tb.bath().modes, tb.n_max()), (2, 276));
    }

    #[test]
    fn checks_flag_failures() {
        let c = Check::new("x", [1.0, f64::NAN], 2.0);
        assert!(!c.passed);
        assert!(Check::new("y", [0.5, 1.5], 2.0).passed);
    }
}
