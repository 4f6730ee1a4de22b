use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spherepca_core::baselines::full_precision_rgd;
use spherepca_core::geometry::{distance, exp_map, project_to_tangent, sample_uniform_with};
use spherepca_core::instance::{partition_rows, synth_instance, SyntheticSpec};
use spherepca_core::objective::over_approx_smoothness;
use spherepca_core::protocol::{run, verify_invariants, ScheduleParams, Simulation};
use spherepca_core::{CovarianceShard, Spectrum, UnitVector};

fn instance(d: usize, n: usize, gap: f64, seed: u64) -> (Vec<CovarianceShard>, Spectrum) {
    let inst = synth_instance(&SyntheticSpec::with_gap(d, 2.0, gap, 30 * d, seed)).unwrap();
    (partition_rows(&inst.rows, n, None).unwrap(), inst.spectrum)
}

/// A point at intrinsic distance `angle` from `v`.
fn point_at(v: &UnitVector, angle: f64, seed: u64) -> UnitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = sample_uniform_with(v.dim(), &mut rng).unwrap();
    let u = project_to_tangent(v, dir.coords()).unwrap();
    exp_map(v, &u.scale(angle / u.norm())).unwrap()
}

fn schedule(shards: &[CovarianceShard], spec: &Spectrum, radius: f64, eps_fraction: f64) -> ScheduleParams {
    let gamma = over_approx_smoothness(shards).unwrap();
    ScheduleParams::build(gamma, spec.gap / 2.0, radius, radius.cos() / gamma, eps_fraction * radius).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scheduled_runs_keep_every_invariant(
        d in 3usize..9,
        n in 1usize..5,
        gap in 0.15f64..0.8,
        angle in 0.0f64..1.1,
        seed in any::<u64>(),
    ) {
        let (shards, spec) = instance(d, n, gap, seed);
        let x0 = point_at(&spec.leading_vector, angle, seed ^ 1);
        let params = schedule(&shards, &spec, 1.15, 0.05);
        // Encoder preconditions are checked inside `run`; a violation is an error.
        let res = run(&shards, &x0, &params, &spec).unwrap();
        let report = verify_invariants(&res).unwrap();
        prop_assert!(report.all_hold(), "violations: {}", report.violations());
        prop_assert!(res.final_distance() <= params.epsilon);

        // Round 0 uses the a-priori radius 2γπ; every later round costs the same.
        let rounds = res.ledger.rounds();
        prop_assert!(rounds[1..].iter().all(|r| r.total() == rounds[1].total()));
        let sum: u64 = rounds.iter().map(|r| r.total()).sum();
        prop_assert_eq!(res.ledger.total(), res.ledger.setup_bits() + sum);
        prop_assert_eq!(res.records.last().unwrap().cumulative_bits, res.ledger.total());
        if n == 1 {
            prop_assert_eq!(res.ledger.total(), 0);
        }

        let again = run(&shards, &x0, &params, &spec).unwrap();
        prop_assert_eq!(&again.records, &res.records);
        prop_assert_eq!(again.final_point.coords(), res.final_point.coords());
    }

    #[test]
    fn master_and_workers_hold_the_same_point(
        d in 3usize..7,
        n in 2usize..5,
        seed in any::<u64>(),
    ) {
        let (shards, spec) = instance(d, n, 0.5, seed);
        let x0 = point_at(&spec.leading_vector, 0.9, seed ^ 2);
        let params = schedule(&shards, &spec, 1.0, 0.1);
        let mut sim = Simulation::with_schedule(&shards, &x0, &params).unwrap();
        for _ in 0..=params.horizon.min(60) {
            sim.step().unwrap();
            let master = sim.states()[0].current_point.coords().to_vec();
            for s in sim.states() {
                prop_assert_eq!(s.current_point.coords(), &master[..]);
                prop_assert_eq!(s.last_decoded_sum.coords(), sim.states()[0].last_decoded_sum.coords());
            }
        }
    }

    #[test]
    fn full_precision_rgd_contracts_at_each_step(
        d in 3usize..10,
        n in 1usize..5,
        gap in 0.2f64..0.9,
        angle in 0.05f64..1.3,
        seed in any::<u64>(),
    ) {
        let (shards, spec) = instance(d, n, gap, seed);
        let x0 = point_at(&spec.leading_vector, angle, seed ^ 3);
        let a = angle.cos();
        let gamma = spec.smoothness;
        let eta = a / gamma;
        let factor = 1.0 - a * (spec.gap / 2.0) * eta;
        let traj = full_precision_rgd(&shards, &x0, eta, 200, &spec).unwrap();
        prop_assert!((traj.records[0].dist - distance(&x0, &spec.minimizer_near(&x0))).abs() < 1e-12);
        for w in traj.records.windows(2) {
            if w[0].dist < 1e-6 {
                break;
            }
            prop_assert!(w[1].dist * w[1].dist <= factor * w[0].dist * w[0].dist * (1.0 + 1e-10));
        }
    }
}
