#![allow(dead_code)]

use std::f64::consts::PI;

use cavity_zeno::detection::{measure, trace_out_atom, DetectorSetup};
use cavity_zeno::dynamics::{
    evolve_coupled_lossy, evolve_coupled_unitary, lossy_amplitudes, pi_pulse_ideal, pi_pulse_lossy, readout_pulse,
    tau_pi,
};
use cavity_zeno::lindblad::{
    coupled_cavities_generator, default_step, integrate, jaynes_cummings_generator, INTEGRATION_POSITIVITY_TOL,
    INTEGRATION_TRACE_TOL,
};
use cavity_zeno::state::{Matrix4c, HERMITICITY_TOL};
use cavity_zeno::{validate, DensityMatrix, SystemParams, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `G G† / tr` for a uniform random complex `G` of random rank.
pub fn random_state(rng: &mut impl Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=4);
    let mut g = Matrix4c::zeros();
    for i in 0..4 {
        for j in 0..rank {
            g[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(m.unscale(tr)).expect("random state is valid")
}

/// `g` log-uniform in `[10², 10⁴]`, `k/g ∈ [0, 1]`, `Ω₀/k ≥ 10` (and `Ω₀ ≥ g`).
pub fn random_params(rng: &mut impl Rng) -> SystemParams {
    let g = 10f64.powf(rng.random_range(2.0..4.0));
    let k = g * rng.random_range(0.0..1.0);
    let omega0 = (10.0 * k).max(g) * 10f64.powf(rng.random_range(0.0..1.0));
    SystemParams::new(g, k, omega0).with_omega(rng.random_range(0.0..2.0 * g))
}

fn step_within(dt: f64, t: f64) -> f64 {
    if t > 0.0 {
        dt.min(t)
    } else {
        dt
    }
}

/// RK4 step for the coupled generator, resolving only the rates it contains.
pub fn coupled_step(p: &SystemParams) -> f64 {
    1.0 / (50.0 * (p.omega + p.g + p.k))
}

#[derive(Debug, Clone, Copy)]
pub struct OracleComparison {
    pub exchange: f64,
    pub pulse: f64,
    pub amplitude: f64,
}

impl OracleComparison {
    pub fn worst(&self) -> f64 {
        self.exchange.max(self.pulse).max(self.amplitude)
    }
}

/// Closed-form propagators against RK4 integration of the master equations,
/// entrywise, for one parameter set and one input state.
pub fn compare_with_oracle(p: &SystemParams, t: f64, rho: &DensityMatrix) -> OracleComparison {
    let closed = evolve_coupled_lossy(rho, p, t).unwrap();
    let rk = integrate(&coupled_cavities_generator(p), rho, t, step_within(coupled_step(p), t)).unwrap();
    let exchange = closed.max_abs_diff(&rk);

    let tau = tau_pi(p.omega0, p.k).unwrap();
    let closed = pi_pulse_lossy(rho, p).unwrap();
    let rk = integrate(
        &jaynes_cummings_generator(p),
        rho,
        tau,
        step_within(default_step(p), tau),
    )
    .unwrap();
    let pulse = closed.max_abs_diff(&rk);

    let a = lossy_amplitudes(p, t);
    let want = (-2.0 * p.k * t).exp() * (p.g * t).cos().powi(2);
    let amplitude = (a.f1.norm_sqr() - want).abs();

    OracleComparison {
        exchange,
        pulse,
        amplitude,
    }
}

/// Randomized oracle sweep; returns the worst comparison seen.
pub fn oracle_sweep(cases: usize, seed: u64) -> OracleComparison {
    let mut rng = rng(seed);
    let mut worst = OracleComparison {
        exchange: 0.0,
        pulse: 0.0,
        amplitude: 0.0,
    };
    for _ in 0..cases {
        let p = random_params(&mut rng);
        let t = rng.random_range(0.0..2.0 * PI) / p.g;
        let rho = random_state(&mut rng);
        let c = compare_with_oracle(&p, t, &rho);
        worst.exchange = worst.exchange.max(c.exchange);
        worst.pulse = worst.pulse.max(c.pulse);
        worst.amplitude = worst.amplitude.max(c.amplitude);
    }
    worst
}

/// Least-squares slope of `log(error)` against `log(dt)` for the coupled
/// lossy exchange over `2/g`, with the closed form as reference. The input
/// has full rank so that coarse steps stay inside the state space.
pub fn rk4_convergence_order() -> f64 {
    let p = SystemParams::new(1e3, 300.0, 1e5).with_omega(500.0);
    let t = 2.0 / p.g;
    let mixed = DensityMatrix::from_populations([0.25; 4]).unwrap();
    let rho = DensityMatrix::mixture([(0.5, &random_state(&mut rng(11))), (0.5, &mixed)]).unwrap();
    let exact = evolve_coupled_lossy(&rho, &p, t).unwrap();
    let gen = coupled_cavities_generator(&p);
    let points: Vec<(f64, f64)> = [8usize, 16, 32, 64]
        .into_iter()
        .map(|steps| {
            let dt = t / steps as f64;
            let rk = integrate(&gen, &rho, t, dt).unwrap();
            (dt.ln(), exact.max_abs_diff(&rk).ln())
        })
        .collect();
    let n = points.len() as f64;
    let (mx, my) = (
        points.iter().map(|p| p.0).sum::<f64>() / n,
        points.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Failures of the state invariants over `cases` random inputs, one entry
/// per violating (operation, case). Empty when everything holds.
pub fn invariant_failures(cases: usize, seed: u64) -> Vec<String> {
    let mut rng = rng(seed);
    let mut failures = Vec::new();
    let defect = |what: &str, case: usize, m: &Matrix4c| {
        let d = validate(m);
        (!d.is_valid()).then(|| format!("{what} case {case}: {d}"))
    };
    let integrator_defect = |what: &str, case: usize, m: &Matrix4c| {
        let d = validate(m);
        let ok = d.hermiticity_defect <= HERMITICITY_TOL
            && d.trace_defect <= INTEGRATION_TRACE_TOL
            && d.min_eigenvalue >= -INTEGRATION_POSITIVITY_TOL;
        (!ok).then(|| format!("{what} case {case}: {d}"))
    };
    for case in 0..cases {
        let p = random_params(&mut rng);
        let t = rng.random_range(0.0..2.0 * PI) / p.g;
        let rho = random_state(&mut rng);

        failures.extend(defect(
            "evolve_coupled_unitary",
            case,
            evolve_coupled_unitary(&rho, &p, t).unwrap().matrix(),
        ));
        failures.extend(defect(
            "evolve_coupled_lossy",
            case,
            evolve_coupled_lossy(&rho, &p, t).unwrap().matrix(),
        ));
        failures.extend(defect("pi_pulse_ideal", case, pi_pulse_ideal(&rho).matrix()));
        failures.extend(defect(
            "pi_pulse_lossy",
            case,
            pi_pulse_lossy(&rho, &p).unwrap().matrix(),
        ));
        failures.extend(defect("readout_pulse", case, readout_pulse(&rho).matrix()));
        failures.extend(defect("trace_out_atom", case, trace_out_atom(&rho).matrix()));

        let long = rng.random_range(0.0..10.0) / p.g;
        let out = integrate(
            &coupled_cavities_generator(&p),
            &rho,
            long,
            step_within(coupled_step(&p), long),
        )
        .unwrap();
        failures.extend(integrator_defect("integrate coupled", case, out.matrix()));
        let lossless = SystemParams { k: 0.0, ..p };
        let out = integrate(
            &coupled_cavities_generator(&lossless),
            &rho,
            long,
            step_within(coupled_step(&p), long),
        )
        .unwrap();
        failures.extend(integrator_defect("integrate lossless", case, out.matrix()));
        let tau = tau_pi(p.omega0, p.k).unwrap();
        let out = integrate(
            &jaynes_cummings_generator(&p),
            &rho,
            tau,
            step_within(default_step(&p), tau),
        )
        .unwrap();
        failures.extend(integrator_defect("integrate jaynes-cummings", case, out.matrix()));

        let (p_g, p_e) = (rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0));
        for setup in [
            DetectorSetup::both_perfect(),
            DetectorSetup::only_dg(p_g),
            DetectorSetup::only_de(p_e),
            DetectorSetup::none(),
        ] {
            let outs = measure(&rho, &setup).unwrap();
            let total: f64 = outs.iter().map(|o| o.probability).sum();
            if (total - 1.0).abs() > 1e-10 {
                failures.push(format!(
                    "measure {:?} case {case}: probabilities sum to {total}",
                    setup.mode()
                ));
            }
            for o in &outs {
                if let Some(post) = &o.post_state {
                    let d = validate(post.matrix());
                    if !d.is_valid() {
                        failures.push(format!("measure {:?} {} case {case}: {d}", setup.mode(), o.label));
                    }
                }
            }
        }
    }
    failures
}

/// Literal reading of the no-click product with an odd power of `|c₁|` in the sum.
pub fn noclick_literal(n: u32, p_e: f64, g: f64, t0: f64) -> f64 {
    let c1 = (g * t0 / f64::from(n)).cos().abs();
    let c2_sq = 1.0 - c1 * c1;
    let sum: f64 = (1..=n).map(|k| c1.powi(k as i32 - 1)).sum();
    c1.powi(2 * n as i32) + c2_sq * (1.0 - p_e) * sum
}
