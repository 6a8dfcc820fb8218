//! Randomized cross-module invariants. Exhaustive search is the ground
//! truth, so every property stays on horizons it can enumerate.

use proptest::prelude::*;

use phasedp::baselines::{brute_force, cop_default_stage_budget, cop_solve};
use phasedp::costs::{evaluate_plan, StopsCost, WeightedStopsCost, WEIGHTED_COST_TOLERANCE};
use phasedp::model::{validate_plan, ArrivalTable, PhaseId, ProblemInstance};
use phasedp::solver::solve;

fn small_instance() -> impl Strategy<Value = ProblemInstance> {
    (2usize..=3, 1usize..=3)
        .prop_flat_map(|(phases, min_green)| {
            (
                Just(phases),
                Just(min_green),
                1usize..=min_green,
                min_green..=10,
            )
        })
        .prop_flat_map(|(phases, min_green, clearance, horizon)| {
            (
                proptest::collection::vec(
                    proptest::collection::vec(0u32..=5, horizon),
                    phases,
                ),
                Just(phases),
                Just(min_green),
                Just(clearance),
                Just(horizon),
            )
        })
        .prop_map(|(rows, phases, min_green, clearance, horizon)| {
            ProblemInstance::new(horizon, phases, clearance, min_green, ArrivalTable::new(rows))
                .expect("strategy only builds valid instances")
        })
}

fn scaled(instance: &ProblemInstance, factor: u32) -> ProblemInstance {
    let rows = instance
        .arrivals()
        .rows()
        .iter()
        .map(|row| row.iter().map(|&c| c * factor).collect())
        .collect();
    ProblemInstance::new(
        instance.horizon(),
        instance.phase_count(),
        instance.clearance(),
        instance.min_green(),
        ArrivalTable::new(rows),
    )
    .expect("shape is unchanged")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_matches_exhaustive_search(instance in small_instance()) {
        let exact = brute_force(&instance, &StopsCost).expect("feasible");
        let fast = solve(&instance, &StopsCost).expect("feasible");
        prop_assert_eq!(fast.optimal_cost, exact.optimal_cost);
        prop_assert!(validate_plan(&fast.plan, &instance).is_valid());
        prop_assert!(validate_plan(&exact.plan, &instance).is_valid());
    }

    #[test]
    fn stage_dp_matches_exhaustive_search(instance in small_instance()) {
        let exact = brute_force(&instance, &StopsCost).expect("feasible");
        let cop = cop_solve(&instance, &StopsCost, cop_default_stage_budget(&instance))
            .expect("feasible");
        prop_assert!(!cop.stage_budget_exhausted);
        prop_assert_eq!(cop.result.optimal_cost, exact.optimal_cost);
        prop_assert!(validate_plan(&cop.result.plan, &instance).is_valid());
    }

    // With unbounded discharge a vehicle stops exactly when it arrives
    // during a step its phase is not served, so replaying the optimal
    // plan through the queue simulation must reproduce the solver cost.
    #[test]
    fn optimal_plans_replay_to_their_cost(instance in small_instance()) {
        let result = solve(&instance, &StopsCost).expect("feasible");
        let metrics = evaluate_plan(&result.plan, &instance, u32::MAX).expect("plan is valid");
        prop_assert_eq!(metrics.total_stops, result.optimal_cost);
    }

    #[test]
    fn scaling_arrivals_scales_the_cost(instance in small_instance(), factor in 2u32..=4) {
        let base = solve(&instance, &StopsCost).expect("feasible");
        let scaled_result = solve(&scaled(&instance, factor), &StopsCost).expect("feasible");
        prop_assert_eq!(scaled_result.optimal_cost, base.optimal_cost * factor as u64);
        // Scaling preserves every comparison the solver makes, so the
        // argmin choices and the plan are identical.
        prop_assert_eq!(scaled_result.plan.entries, base.plan.entries);
    }

    #[test]
    fn extra_arrivals_never_reduce_the_cost(
        instance in small_instance(),
        phase_pick in 0usize..100,
        step_pick in 0usize..100,
        extra in 1u32..=5,
    ) {
        let base = solve(&instance, &StopsCost).expect("feasible");
        let phase = phase_pick % instance.phase_count();
        let step = step_pick % instance.horizon();
        let mut rows: Vec<Vec<u32>> = instance.arrivals().rows().to_vec();
        rows[phase][step] += extra;
        let bumped = ProblemInstance::new(
            instance.horizon(),
            instance.phase_count(),
            instance.clearance(),
            instance.min_green(),
            ArrivalTable::new(rows),
        ).expect("shape is unchanged");
        let bumped_result = solve(&bumped, &StopsCost).expect("feasible");
        prop_assert!(bumped_result.optimal_cost >= base.optimal_cost);
    }

    #[test]
    fn unit_weights_agree_with_the_unweighted_model(instance in small_instance()) {
        let unweighted = solve(&instance, &StopsCost).expect("feasible");
        let weights = vec![1.0; instance.phase_count()];
        let weighted = solve(&instance, &WeightedStopsCost::new(weights)).expect("feasible");
        let diff = (weighted.optimal_cost - unweighted.optimal_cost as f64).abs();
        prop_assert!(diff <= WEIGHTED_COST_TOLERANCE, "diff {diff}");
    }

    #[test]
    fn queue_metrics_are_internally_consistent(
        instance in small_instance(),
        saturation in 1u32..=3,
    ) {
        let result = solve(&instance, &StopsCost).expect("feasible");
        let metrics = evaluate_plan(&result.plan, &instance, saturation).expect("plan is valid");
        // A stopped vehicle sits in an end-of-step queue at least once.
        prop_assert!(metrics.total_delay >= metrics.total_stops);
        for phase in 0..instance.phase_count() {
            prop_assert!(metrics.max_queue[phase] >= metrics.final_queues[phase]);
            let supplied: u64 = (1..=instance.horizon())
                .map(|t| instance.arrivals().at(PhaseId::new(phase), t) as u64)
                .sum();
            prop_assert!(metrics.final_queues[phase] <= supplied);
        }
    }

    #[test]
    fn solving_twice_is_identical(instance in small_instance()) {
        let first = solve(&instance, &StopsCost).expect("feasible");
        let second = solve(&instance, &StopsCost).expect("feasible");
        prop_assert_eq!(first.plan.entries, second.plan.entries);
        prop_assert_eq!(first.state_sequence, second.state_sequence);
        prop_assert_eq!(first.optimal_cost, second.optimal_cost);
        prop_assert_eq!(first.relaxation_count, second.relaxation_count);
    }
}
