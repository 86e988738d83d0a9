use budgex_core::algorithms::{
    drive, Branch, Budgeted, FullInformation, Learner, MultiPoint, SingleQueryErm, StepReport, TwoPoint,
};
use budgex_core::analysis::excess_risk;
use budgex_core::environments::{BernoulliTwoExpert, GapInstance, NoiseCoupling};
use budgex_core::instance::RiskEvaluation;
use budgex_core::rng::{substream, Purpose, StreamRng};
use budgex_core::{Instance, SampledOracle};
use proptest::prelude::*;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Full,
    Budgeted,
    TwoPoint,
    MultiPoint(usize),
    Erm,
}

/// Per-round facts gathered while a learner runs.
#[derive(Debug, Default, PartialEq)]
struct Run {
    steps: Vec<StepReport>,
    survivor_sets: Vec<Vec<usize>>,
    pair_counts: Vec<Vec<u64>>,
    support: Vec<usize>,
    branch: Option<Branch>,
    /// Candidate set of the output rule.
    final_survivors: Vec<usize>,
    queries_used: u64,
}

fn record<L: Learner>(mut learner: L, instance: &GapInstance, seed: u64, horizon: Option<u64>) -> Run {
    let mut oracle = SampledOracle::new(instance, substream(seed, 0, Purpose::Environment));
    let mut run = Run::default();
    drive(&mut learner, &mut oracle, horizon, |l| {
        run.steps.push(l.last_step().clone());
        run.survivor_sets.push(l.survivors().to_vec());
        let s = l.survivors();
        let k = l.experts();
        run.pair_counts.push(
            s.iter()
                .flat_map(|&i| s.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
                .map(|(i, j)| l.stats().pair_count(i, j))
                .collect(),
        );
        assert_eq!(l.stats().experts(), k);
    });
    let outcome = learner.finalize().expect("finalize");
    run.support = outcome.prediction.support().to_vec();
    run.branch = Some(outcome.branch);
    run.final_survivors = outcome.survivors.clone();
    run.queries_used = learner.queries_used();
    run
}

fn play(kind: Kind, instance: &GapInstance, size: u64, seed: u64) -> Run {
    let k = instance.experts();
    let loss = *instance.loss();
    let delta = 0.1;
    match kind {
        Kind::Full => record(FullInformation::new(k, delta, loss).unwrap(), instance, seed, Some(size)),
        Kind::Budgeted => {
            let budget = size.max(k as u64);
            record(Budgeted::new(k, budget, delta, loss).unwrap(), instance, seed, None)
        }
        Kind::TwoPoint => record(TwoPoint::new(k, delta, loss).unwrap(), instance, seed, Some(size)),
        Kind::MultiPoint(m) => {
            let rng = substream(seed, 0, Purpose::Learner);
            record(MultiPoint::new(k, m, delta, loss, rng).unwrap(), instance, seed, Some(size))
        }
        Kind::Erm => record(SingleQueryErm::new(k, loss).unwrap(), instance, seed, Some(size)),
    }
}

fn kind_strategy(k: usize) -> impl Strategy<Value = Kind> {
    prop_oneof![
        Just(Kind::Full),
        Just(Kind::Budgeted),
        Just(Kind::TwoPoint),
        (2..=k.max(2)).prop_map(Kind::MultiPoint),
        Just(Kind::Erm),
    ]
}

fn instance_strategy() -> impl Strategy<Value = GapInstance> {
    (2usize..=6, 0.3f64..0.7, 0.0f64..0.2, any::<bool>()).prop_flat_map(|(k, p, h, shared)| {
        let half = h / 2.0;
        proptest::collection::vec(half..(1.0 - half), k).prop_map(move |centers| {
            let coupling = if shared {
                NoiseCoupling::Shared
            } else {
                NoiseCoupling::Independent
            };
            GapInstance::from_centers(p, h, coupling, &centers).unwrap()
        })
    })
}

fn case() -> impl Strategy<Value = (GapInstance, Kind, u64, u64)> {
    instance_strategy().prop_flat_map(|inst| {
        let k = inst.experts();
        (Just(inst), kind_strategy(k), 1u64..600, any::<u64>())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survivors_shrink_and_never_empty((inst, kind, size, seed) in case()) {
        let run = play(kind, &inst, size, seed);
        let mut prev: Vec<usize> = (0..inst.experts()).collect();
        for (s, step) in run.survivor_sets.iter().zip(&run.steps) {
            prop_assert!(!s.is_empty());
            prop_assert!(s.iter().all(|i| prev.contains(i)), "{s:?} not within {prev:?}");
            prop_assert_eq!(s.len(), step.survivors);
            for &(_, victim) in &step.eliminated {
                prop_assert!(!s.contains(&victim));
            }
            prev = s.clone();
        }
    }

    #[test]
    fn query_accounting_matches_reports((inst, kind, size, seed) in case()) {
        let run = play(kind, &inst, size, seed);
        let mut used = 0;
        for (n, step) in run.steps.iter().enumerate() {
            prop_assert_eq!(step.t, n as u64 + 1);
            used += step.queried.len() as u64;
            prop_assert_eq!(step.queries_used, used);
            let mut q = step.queried.clone();
            q.sort_unstable();
            q.dedup();
            prop_assert_eq!(q.len(), step.queried.len(), "duplicate query");
        }
        prop_assert_eq!(run.queries_used, used);
    }

    #[test]
    fn output_has_at_most_two_survivors((inst, kind, size, seed) in case()) {
        let run = play(kind, &inst, size, seed);
        prop_assert!((1..=2).contains(&run.support.len()));
        if !matches!(kind, Kind::Erm) && run.branch == Some(Branch::Midpoint) {
            prop_assert!(run.support.iter().all(|i| run.final_survivors.contains(i)));
        }
    }

    #[test]
    fn budgeted_spends_its_budget(inst in instance_strategy(), budget in 6u64..2000, seed in any::<u64>()) {
        let run = play(Kind::Budgeted, &inst, budget, seed);
        prop_assert!(run.queries_used <= budget);
        // Stops only when the next full round over the survivors is unaffordable.
        prop_assert!(budget - run.queries_used < run.final_survivors.len() as u64);
    }

    #[test]
    fn two_point_pair_counts_stay_balanced(inst in instance_strategy(), horizon in 1u64..600, seed in any::<u64>()) {
        let run = play(Kind::TwoPoint, &inst, horizon, seed);
        for counts in &run.pair_counts {
            if let (Some(lo), Some(hi)) = (counts.iter().min(), counts.iter().max()) {
                prop_assert!(hi - lo <= 1, "{counts:?}");
            }
        }
    }

    #[test]
    fn same_seed_same_run((inst, kind, size, seed) in case()) {
        prop_assert_eq!(play(kind, &inst, size, seed), play(kind, &inst, size, seed));
    }
}

fn budgeted_order(risks: [f64; 3], runs: u64, budget: u64) -> (u64, u64) {
    let centers: Vec<f64> = risks.iter().map(|r| 0.5 + (r - 0.25f64).sqrt()).collect();
    let instance = GapInstance::from_centers(0.5, 0.0, NoiseCoupling::Shared, &centers).unwrap();
    let mut worst_first = 0;
    let mut with_elimination = 0;
    for seed in 0..runs {
        let run = play(Kind::Budgeted, &instance, budget, seed);
        let first = run.steps.iter().flat_map(|s| s.eliminated.iter()).map(|&(_, v)| v).next();
        if let Some(v) = first {
            with_elimination += 1;
            if v == 2 {
                worst_first += 1;
            }
        }
    }
    (worst_first, with_elimination)
}

#[test]
fn budgeted_eliminates_the_worst_expert_first() {
    // Risks 0.25, 0.35, 0.50 with h = 0; centers 0.5, 0.816, 1.0.
    let (worst_first, eliminated) = budgeted_order([0.25, 0.35, 0.5], 500, 90_000);
    assert_eq!(eliminated, 500, "every run should eliminate something");
    assert!(worst_first as f64 >= 0.95 * 500.0, "{worst_first}/500");
}

#[test]
fn full_information_averages_constant_experts() {
    // F_1 = 0, F_2 = 1 and Y ~ Bernoulli(1/2) (eps -> 0). Both experts have
    // risk 1/2 and are never separated; their midpoint has risk 1/4.
    let instance = BernoulliTwoExpert::constant_experts(1e-9, false).unwrap();
    let mut learner = FullInformation::new(2, 0.05, *instance.loss()).unwrap();
    let mut oracle = SampledOracle::new(&instance, substream(3, 0, Purpose::Environment));
    drive(&mut learner, &mut oracle, Some(20_000), |_| {});
    let outcome = learner.finalize().unwrap();
    assert_eq!(outcome.branch, Branch::Midpoint);
    assert_eq!(outcome.prediction.support(), &[0, 1]);
    let excess = excess_risk::<_, StreamRng>(&instance, &outcome.prediction, RiskEvaluation::ClosedForm).unwrap();
    let risk = instance.moments().unwrap().combination_risk(&outcome.prediction).unwrap();
    assert!((risk - 0.25).abs() < 1e-12, "{risk}");
    assert!((excess.value + 0.25).abs() < 1e-8, "{}", excess.value);
}

#[test]
fn tied_optimal_experts_survive() {
    // Two optimal experts on either side of the target mean and two clearly
    // worse ones. Neither optimal expert may be eliminated.
    let instance =
        GapInstance::from_centers(0.5, 0.1, NoiseCoupling::Independent, &[0.4, 0.6, 0.95, 0.05]).unwrap();
    let runs = 100;
    // Sizes giving every pair roughly 20000 joint observations.
    let kinds = [
        (Kind::Full, 20_000),
        (Kind::Budgeted, 120_000),
        (Kind::TwoPoint, 150_000),
        (Kind::MultiPoint(3), 60_000),
    ];
    for (kind, size) in kinds {
        let mut lost = 0;
        let mut worse_gone = 0;
        for seed in 0..runs {
            let run = play(kind, &instance, size, seed);
            if !(run.final_survivors.contains(&0) && run.final_survivors.contains(&1)) {
                lost += 1;
            }
            if !run.final_survivors.contains(&2) && !run.final_survivors.contains(&3) {
                worse_gone += 1;
            }
        }
        assert_eq!(lost, 0, "{kind:?}: an optimal expert was eliminated");
        assert!(worse_gone > runs / 2, "{kind:?}: only {worse_gone} runs removed the worse experts");
    }
}

#[test]
fn single_expert_is_returned_as_is() {
    let instance = GapInstance::from_centers(0.5, 0.0, NoiseCoupling::Shared, &[0.7]).unwrap();
    for kind in [Kind::Full, Kind::Budgeted, Kind::TwoPoint, Kind::Erm] {
        let run = play(kind, &instance, 50, 1);
        assert_eq!(run.support, vec![0], "{kind:?}");
    }
}
