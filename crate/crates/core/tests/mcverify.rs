use thermobound::mcverify::{run_trials, McOptions};
use thermobound::models::{NLevelLikelihood, SpinGasLikelihood};
use thermobound::{crlb_like, obb, Estimator, Prior, Probe, TemperatureGrid};

fn spin(n: u64) -> Probe {
    Probe::SpinGas(SpinGasLikelihood::new(n, 1.0).unwrap())
}

fn qubit() -> Probe {
    Probe::NLevel(NLevelLikelihood::new(2, 1.0).unwrap())
}

#[test]
fn posterior_mean_of_log_beats_competitors() {
    let prior = Prior::log_uniform(0.1, 10.0).unwrap();
    for v in [1u64, 5] {
        let mut opts = McOptions::new(v, 4000, 11);
        let ours = run_trials(&spin(10), &prior, &opts).unwrap();
        opts.estimator = Estimator::PosteriorMean;
        let mean = run_trials(&spin(10), &prior, &opts).unwrap();
        opts.estimator = Estimator::MaxLikelihood;
        let ml = run_trials(&spin(10), &prior, &opts).unwrap();
        assert!(ours.empirical_mle <= mean.empirical_mle);
        assert!(ours.empirical_mle <= ml.empirical_mle);
    }
}

#[test]
fn empirical_error_respects_optimal_biased_bound() {
    let wide = Prior::log_uniform(0.1, 10.0).unwrap();
    let wide_grid = TemperatureGrid::log_uniform(0.1, 10.0, 2049).unwrap();
    let narrow = Prior::log_uniform(0.1, 1.0).unwrap();
    let narrow_grid = TemperatureGrid::log_uniform(0.1, 1.0, 2049).unwrap();
    for (probe, prior, grid, v) in [
        (spin(10), &wide, &wide_grid, 3u64),
        (qubit(), &narrow, &narrow_grid, 5),
    ] {
        let batch = run_trials(&probe, prior, &McOptions::new(v, 5000, 3)).unwrap();
        let bound = obb(prior, &probe.fisher_model(), v, grid).unwrap().value;
        let crlb = crlb_like(prior, &probe.fisher_model(), v, grid)
            .unwrap()
            .value;
        assert!(bound < crlb);
        assert!(batch.empirical_mle + 3.0 * batch.standard_error >= bound);
    }
}

#[test]
fn large_v_approaches_the_bound() {
    let prior = Prior::log_uniform(0.1, 1.0).unwrap();
    let grid = TemperatureGrid::log_uniform(0.1, 1.0, 2049).unwrap();
    let batch = run_trials(&qubit(), &prior, &McOptions::new(200, 10_000, 17)).unwrap();
    let bound = obb(&prior, &qubit().fisher_model(), 200, &grid)
        .unwrap()
        .value;
    let crlb = crlb_like(&prior, &qubit().fisher_model(), 200, &grid)
        .unwrap()
        .value;
    assert!(bound < crlb);
    let slack = 0.1 * bound + 3.0 * batch.standard_error;
    assert!((batch.empirical_mle - bound).abs() <= slack);
}
