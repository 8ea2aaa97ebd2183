use plateau_core::circuits::{assemble, local_unitary, CircuitEnsemble, LocalUnitaryParams};
use plateau_core::costs::{generic_cost, heisenberg_observable, Task};
use plateau_core::haar::haar_random_unitary;
use plateau_core::harness::{run_scaling_with_threads, EnsembleConfig, ExperimentConfig};
use plateau_core::landscape::{
    parameter_shift_derivative, transfer_tensor, variation_range_adam, variation_range_exact_m1, variation_range_grid,
    AdamConfig, ParamCircuit, ShiftContext,
};
use plateau_core::linalg::{eigvals_hermitian, spectral_width, BipartitePartition, Operator, C64};
use plateau_core::random::{random_density, random_hermitian, random_state};
use plateau_core::seed::substream;
use proptest::prelude::*;
use rand::Rng;

struct Instance {
    h: Operator,
    rho: Operator,
    v1: Operator,
    v2: Operator,
    part: BipartitePartition,
}

fn instance(seed: u64, n: usize) -> Instance {
    let mut rng = substream(seed, &[n as u64]);
    let d = 1 << n;
    Instance {
        part: BipartitePartition::new(n, vec![rng.random_range(0..n)]).unwrap(),
        h: random_hermitian(d, &mut rng),
        rho: random_density(d, &mut rng),
        v1: haar_random_unitary(d, &mut rng),
        v2: haar_random_unitary(d, &mut rng),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cost_lies_within_the_spectrum(seed in any::<u64>(), n in 1usize..=4, phase in 0.0..std::f64::consts::TAU) {
        let mut rng = substream(seed, &[]);
        let d = 1 << n;
        let h = random_hermitian(d, &mut rng);
        let rho = random_density(d, &mut rng);
        let u = haar_random_unitary(d, &mut rng);
        let c = generic_cost(&h, &rho, &u).unwrap();
        let ev = eigvals_hermitian(&h).unwrap();
        prop_assert!(c >= ev[0] - 1e-10 && c <= ev[d - 1] + 1e-10);
        let shifted = generic_cost(&h, &rho, &u.scale(C64::from_polar(1.0, phase))).unwrap();
        prop_assert!((shifted - c).abs() < 1e-10);
    }

    #[test]
    fn sampled_circuits_are_unitary(seed in any::<u64>(), n in 1usize..=4, layers in 0usize..6) {
        let mut rng = substream(seed, &[]);
        for e in [
            CircuitEnsemble::identity(n),
            CircuitEnsemble::one_design_layer(n),
            CircuitEnsemble::hardware_efficient_with_layers(n, layers),
            CircuitEnsemble::haar(n),
        ] {
            let u = e.sample(&mut rng).unwrap().to_operator();
            prop_assert!(u.is_unitary(1e-9));
        }
    }

    #[test]
    fn optimizers_are_ordered_and_bounded(seed in any::<u64>(), n in 2usize..=4) {
        let inst = instance(seed, n);
        let t = transfer_tensor(&inst.h, &inst.rho, &inst.v1, &inst.v2, &inst.part).unwrap();
        let w = spectral_width(&inst.h).unwrap();
        let exact = variation_range_exact_m1(&t).unwrap();
        let grid = variation_range_grid(&t, 12).unwrap();
        let mut rng = substream(seed, &[1]);
        let cfg = AdamConfig { max_iterations: 50, ..AdamConfig::default() };
        let adam = variation_range_adam(&t, &cfg, &mut rng).unwrap();
        prop_assert!(exact.delta <= w + 1e-9);
        prop_assert!(grid.delta <= exact.delta + 1e-9 && adam.delta <= exact.delta + 1e-9);
        // The extremal gates reproduce their values through the full circuit.
        let ua = local_unitary(&exact.argmax).unwrap();
        let full = assemble(&inst.v1, &ua, &inst.v2, &inst.part).unwrap();
        prop_assert!((generic_cost(&inst.h, &inst.rho, &full).unwrap() - exact.max_value).abs() < 1e-9);
    }

    #[test]
    fn adding_identity_to_h_shifts_values_only(seed in any::<u64>(), c in -5.0f64..5.0) {
        let inst = instance(seed, 3);
        let shifted = &inst.h + &Operator::identity(8).scale(C64::new(c, 0.0));
        let a = variation_range_exact_m1(&transfer_tensor(&inst.h, &inst.rho, &inst.v1, &inst.v2, &inst.part).unwrap()).unwrap();
        let t = transfer_tensor(&shifted, &inst.rho, &inst.v1, &inst.v2, &inst.part).unwrap();
        let b = variation_range_exact_m1(&t).unwrap();
        prop_assert!((b.max_value - a.max_value - c).abs() < 1e-9);
        prop_assert!((b.min_value - a.min_value - c).abs() < 1e-9);
        // The unshifted maximizer stays optimal for the shifted cost.
        prop_assert!((t.evaluate_params(&a.argmax).unwrap() - b.max_value).abs() < 1e-9);
    }

    #[test]
    fn shift_derivative_is_bounded_by_local_range(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = substream(seed, &[]);
        let circuit = ParamCircuit::random(n, 2, &mut rng).unwrap();
        let psi = random_state(1 << n, &mut rng);
        let ctx = ShiftContext::new(circuit, heisenberg_observable(n, true).unwrap(), psi).unwrap();
        let theta = ctx.circuit.params();
        let mu = rng.random_range(0..theta.len());
        let g = parameter_shift_derivative(&ctx, &theta, mu).unwrap();
        prop_assert!(g.abs() <= ctx.local_variation_range(&theta, mu).unwrap() + 1e-9);
    }
}

#[test]
fn identity_gate_parameters_give_the_identity() {
    let id = local_unitary(&LocalUnitaryParams::identity(1).unwrap()).unwrap();
    assert!(id.max_abs_diff(&Operator::identity(2)) < 1e-15);
}

#[test]
fn pooled_halves_agree_with_a_single_run() {
    let base = ExperimentConfig {
        task: Task::Vqe,
        n_min: 4,
        n_max: 4,
        ensemble_config: EnsembleConfig::Both,
        samples: 40,
        seed: 100,
        ..ExperimentConfig::default()
    };
    let single = &run_scaling_with_threads(&base, 0).unwrap()[0];
    let half = |seed| {
        run_scaling_with_threads(
            &ExperimentConfig {
                samples: 20,
                seed,
                ..base.clone()
            },
            0,
        )
        .unwrap()[0]
            .clone()
    };
    let (a, b) = (half(200), half(300));
    let pooled = 0.5 * (a.mean_delta_over_w + b.mean_delta_over_w);
    let pooled_stderr = 0.5 * a.stderr().hypot(b.stderr());
    let combined = single.stderr().hypot(pooled_stderr);
    assert!((pooled - single.mean_delta_over_w).abs() <= 3.0 * combined);
}

#[test]
fn every_row_respects_the_general_bound() {
    for task in [Task::Vqe, Task::Qae, Task::Qsl] {
        let cfg = ExperimentConfig {
            task,
            n_min: 2,
            n_max: 6,
            samples: 5,
            seed: 8,
            ..ExperimentConfig::default()
        };
        for r in run_scaling_with_threads(&cfg, 0).unwrap() {
            assert!(r.mean_delta_over_w <= r.bound_general, "{r:?}");
            assert!(r.mean_delta_over_w >= 0.0 && r.std_delta >= 0.0);
        }
    }
}
