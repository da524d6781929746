use proptest::prelude::*;
use spikecast::dynamics::{trajectory, Integration, Mode, ModeSchedule};
use spikecast::rde::{self, delay_embed, RdeConfig};
use spikecast::series::MultiSeries;

fn toy(len: usize, seed: u64) -> (MultiSeries, Vec<f64>) {
    let traj = trajectory(&ModeSchedule::from_modes(&[Mode::Normal], len + 200), &Integration::default(), seed).unwrap();
    let traj = &traj[200..];
    let channels: Vec<Vec<f64>> = (0..3).map(|k| traj.iter().map(|s| s[k]).collect()).collect();
    let x = channels[0].clone();
    (MultiSeries::new(channels).unwrap(), rde::increments(&x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn delay_vectors_reproduce_the_tail(values in prop::collection::vec(-10.0f64..10.0, 1..60), dim in 1usize..5, delay in 1usize..4) {
        let span = (dim - 1) * delay;
        match delay_embed(&values, dim, delay) {
            Ok(e) => {
                prop_assert_eq!(e.vectors.len(), values.len() - span);
                for (i, (t, v)) in e.vectors.iter().enumerate() {
                    prop_assert_eq!(*t, span + i);
                    prop_assert_eq!(v[0], values[span + i]);
                    for k in 0..dim {
                        prop_assert_eq!(v[k], values[t - k * delay]);
                    }
                }
            }
            Err(_) => prop_assert!(values.len() <= span),
        }
    }

    #[test]
    fn predictor_order_does_not_matter(seed in any::<u64>(), rot in 1usize..20) {
        let (obs, target) = toy(150, seed % 8);
        let cfg = RdeConfig { n_embeddings: 20, ..RdeConfig::default() };
        let model = rde::fit(&obs, &target, &cfg, seed).unwrap();
        let mut shuffled = model.clone();
        shuffled.predictors.rotate_left(rot);
        shuffled.predictors.reverse();
        for t in [10, 75, 149] {
            let a = model.predict(&obs.row(t)).unwrap();
            let b = shuffled.predict(&obs.row(t)).unwrap();
            prop_assert!((a.point[0] - b.point[0]).abs() <= 1e-12);
            prop_assert!((a.spread[0] - b.spread[0]).abs() <= 1e-12);
        }
    }

    #[test]
    fn fit_is_replayable_from_seed(seed in any::<u64>()) {
        let (obs, target) = toy(120, 1);
        let cfg = RdeConfig { n_embeddings: 15, ..RdeConfig::default() };
        prop_assert_eq!(rde::fit(&obs, &target, &cfg, seed).unwrap(), rde::fit(&obs, &target, &cfg, seed).unwrap());
    }
}

#[test]
fn larger_ensembles_do_not_hurt() {
    // Leave-one-out RMSE of M = 100 against M = 10 over independent draws.
    let (obs, target) = toy(400, 4);
    let loo = |m: usize, seed: u64| {
        let cfg = RdeConfig { n_embeddings: m, subset_size: Some(2), ..RdeConfig::default() };
        rde::fit(&obs, &target, &cfg, seed).unwrap().loo_rmse()
    };
    let small: Vec<f64> = (0..20).map(|s| loo(10, s)).collect();
    let large: Vec<f64> = (0..20).map(|s| loo(100, s)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sd = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    };
    // one-sided 95% band on the difference of means
    let noise = 1.645 * (sd(&small).powi(2) / 20.0 + sd(&large).powi(2) / 20.0).sqrt();
    assert!(mean(&large) <= mean(&small) + noise, "M=100 {} vs M=10 {} (+{noise})", mean(&large), mean(&small));
}
