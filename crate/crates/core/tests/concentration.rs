use budgex_core::algorithms::{drive, FullInformation, Learner, MultiPoint, TwoPoint};
use budgex_core::environments::{GapInstance, NoiseCoupling};
use budgex_core::event::EventA;
use budgex_core::rng::{substream, Purpose};
use budgex_core::{Instance, SampledOracle};

const RUNS: u64 = 1000;

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn pairwise_risk_differences_concentrate() {
    // After T full-information rounds, every ordered pair must satisfy
    // |(R^_ij(i) - R^_ij(j)) - (R_i - R_j)| <= 3 max{L d^ a, B a^2} with
    // a = sqrt(log(4K / delta) / T), simultaneously, with probability >= 1 - delta.
    let delta = 0.1;
    let horizon = 500;
    let instance = GapInstance::from_centers(0.5, 0.3, NoiseCoupling::Independent, &[0.35, 0.55, 0.75]).unwrap();
    let moments = instance.moments().unwrap();
    let k = instance.experts();
    let (l, b) = (instance.loss().lipschitz(), instance.loss().bound());
    let a = ((4.0 * k as f64 / delta).ln() / horizon as f64).sqrt();
    let mut held = 0;
    for seed in 0..RUNS {
        let mut learner = FullInformation::new(k, delta, *instance.loss()).unwrap();
        let mut oracle = SampledOracle::new(&instance, substream(seed, 0, Purpose::Environment));
        drive(&mut learner, &mut oracle, Some(horizon), |_| {});
        let stats = learner.stats();
        let ok = (0..k).all(|i| {
            (0..k).filter(|&j| j != i).all(|j| {
                let emp = stats.pair_mean_loss(i, j).unwrap() - stats.pair_mean_loss(j, i).unwrap();
                let truth = moments.risk(i) - moments.risk(j);
                let d = stats.dist_sq(i, j).unwrap().sqrt();
                (emp - truth).abs() <= 3.0 * f64::max(l * d * a, b * a * a)
            })
        });
        held += ok as u64;
    }
    let freq = held as f64 / RUNS as f64;
    let floor = 1.0 - delta - 3.0 * binomial_se(delta, RUNS);
    assert!(freq >= floor, "coverage {freq} < {floor}");
}

#[test]
fn event_a_holds_along_two_point_runs() {
    let delta = 0.05;
    let instance = GapInstance::from_centers(0.5, 0.2, NoiseCoupling::Shared, &[0.45, 0.7, 0.85]).unwrap();
    let k = instance.experts();
    let checker = EventA::new(instance.moments(), instance.loss(), delta).unwrap();
    let mut failed = 0;
    for seed in 0..RUNS {
        let mut learner = TwoPoint::new(k, delta, *instance.loss()).unwrap();
        let mut oracle = SampledOracle::new(&instance, substream(seed, 0, Purpose::Environment));
        let mut ok = true;
        drive(&mut learner, &mut oracle, Some(600), |l| {
            ok = ok && checker.holds(l.stats());
        });
        failed += !ok as u64;
    }
    let freq = failed as f64 / RUNS as f64;
    let limit = 4.0 * delta + 3.0 * binomial_se(4.0 * delta, RUNS);
    assert!(freq <= limit, "event A failed in {freq} of runs (limit {limit})");
}

#[test]
fn random_pairs_are_covered_uniformly() {
    // With m = 2 of K = 4 experts drawn uniformly, each of the 6 pairs is
    // queried in a given round with probability 1/6.
    let horizon = 600;
    let instance = GapInstance::from_centers(0.5, 0.0, NoiseCoupling::Shared, &[0.5, 0.5, 0.5, 0.5]).unwrap();
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut counts = vec![Vec::with_capacity(RUNS as usize); pairs.len()];
    for seed in 0..RUNS {
        let rng = substream(seed, 0, Purpose::Learner);
        let mut learner = MultiPoint::new(4, 2, 0.05, *instance.loss(), rng).unwrap();
        let mut oracle = SampledOracle::new(&instance, substream(seed, 0, Purpose::Environment));
        drive(&mut learner, &mut oracle, Some(horizon), |_| {});
        assert_eq!(learner.survivors().len(), 4, "identical experts must all survive");
        for (n, &(i, j)) in pairs.iter().enumerate() {
            counts[n].push(learner.stats().pair_count(i, j) as f64);
        }
    }
    let expected = horizon as f64 / 6.0;
    for (n, c) in counts.iter().enumerate() {
        let mean = c.iter().sum::<f64>() / c.len() as f64;
        let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
        let se = (var / c.len() as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "pair {:?}: mean count {mean}, expected {expected} +- {}",
            pairs[n],
            3.0 * se
        );
    }
}
