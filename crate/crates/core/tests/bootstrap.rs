use icboot_core::bootstrap::bootstrap_roots_from;
use icboot_core::rng::{stream, Purpose};
use icboot_core::sim::{sample_scenario, Design, EventLaw, Scenario};
use icboot_core::{
    bmse_curve, bootstrap_roots, BootstrapConfig, BootstrapScheme, CurrentStatusSample, Dataset,
    MixedCaseSubject, RootEstimator,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn mixed_data(seed: u64, n: usize) -> Dataset {
    let scenario = Scenario {
        law: EventLaw::Exponential(1.0),
        design: Design::Mixed { kmax: 3, b: 2.0 },
    };
    sample_scenario(&scenario, n, &mut stream(seed, Purpose::Dataset, 0, 0)).unwrap()
}

#[test]
fn roots_do_not_depend_on_thread_count() {
    let data = mixed_data(1, 60);
    let cfg = BootstrapConfig::new(BootstrapScheme::FromSmle(0.4), 64, 5);
    let one = in_pool(1, || bootstrap_roots(&data, 1.0, &cfg).unwrap());
    let four = in_pool(4, || bootstrap_roots(&data, 1.0, &cfg).unwrap());
    let bits = |r: &[f64]| r.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&one.roots), bits(&four.roots));
    assert_eq!(one.roots.len(), 64);
}

#[test]
fn subject_order_does_not_matter() {
    let Dataset::Panel(subjects) = mixed_data(2, 50) else {
        unreachable!()
    };
    let mut shuffled: Vec<MixedCaseSubject> = subjects.clone();
    shuffled.shuffle(&mut rand::rngs::StdRng::seed_from_u64(3));
    let cfg = BootstrapConfig::new(BootstrapScheme::FromNpmle, 40, 9);
    let a = bootstrap_roots(&Dataset::Panel(subjects), 1.0, &cfg).unwrap();
    let b = bootstrap_roots(&Dataset::Panel(shuffled), 1.0, &cfg).unwrap();
    assert_eq!(a, b);

    let times = [0.3, 1.2, 0.7, 1.9, 1.1, 0.4];
    let deltas = [false, true, false, true, true, false];
    let rev_t: Vec<f64> = times.iter().rev().copied().collect();
    let rev_d: Vec<bool> = deltas.iter().rev().copied().collect();
    let a = Dataset::CurrentStatus(CurrentStatusSample::from_pairs(&times, &deltas).unwrap());
    let b = Dataset::CurrentStatus(CurrentStatusSample::from_pairs(&rev_t, &rev_d).unwrap());
    let grid = [0.2, 0.4, 0.6];
    assert_eq!(
        bmse_curve(&a, 1.0, BootstrapScheme::FromSmle(0.5), &grid, 30, 4).unwrap(),
        bmse_curve(&b, 1.0, BootstrapScheme::FromSmle(0.5), &grid, 30, 4).unwrap()
    );
}

#[test]
fn case2_one_step_roots_use_the_log_rate() {
    let scenario = Scenario {
        law: EventLaw::Exponential(1.0),
        design: Design::Case2 { b: 2.0 },
    };
    let data = sample_scenario(&scenario, 80, &mut stream(4, Purpose::Dataset, 0, 0)).unwrap();
    let cfg = BootstrapConfig::new(BootstrapScheme::FromSmle(0.4), 30, 1)
        .with_estimator(RootEstimator::OneStep);
    let r = bootstrap_roots(&data, 1.0, &cfg).unwrap();
    let n = 80.0f64;
    assert!((r.rate - (n * n.ln()).cbrt()).abs() < 1e-12);
    assert_eq!(r.roots.len(), 30);
    assert!(r.roots.iter().all(|x| x.is_finite()));
}

#[test]
fn bmse_values_are_nonnegative_and_share_resamples() {
    let data = sample_scenario(
        &Scenario::exponential_current_status(),
        200,
        &mut stream(6, Purpose::Dataset, 0, 0),
    )
    .unwrap();
    let grid: Vec<f64> = (1..=10).map(|i| i as f64 / 20.0).collect();
    let full = bmse_curve(&data, 1.0, BootstrapScheme::FromSmle(0.5), &grid, 50, 8).unwrap();
    assert!(full.iter().all(|&(_, v)| v >= 0.0));
    // With common random numbers a sub-grid reproduces the matching entries exactly.
    let sub = bmse_curve(
        &data,
        1.0,
        BootstrapScheme::FromSmle(0.5),
        &grid[3..5],
        50,
        8,
    )
    .unwrap();
    assert_eq!(&full[3..5], &sub[..]);
}

#[test]
fn roots_are_centred_at_the_source() {
    let data = mixed_data(7, 40);
    let cfg = BootstrapConfig::new(BootstrapScheme::FromNpmle, 25, 2);
    let full = bootstrap_roots(&data, 1.0, &cfg).unwrap();
    let npmle = icboot_core::npmle_dataset(&data, Default::default()).unwrap();
    let source = icboot_core::bootstrap::Source::Step(npmle);
    let again = bootstrap_roots_from(&data, 1.0, &cfg, &source, full.estimate).unwrap();
    assert_eq!(full, again);
    assert_eq!(full.estimate, full.source_value);
}
