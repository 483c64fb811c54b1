//! Runs the desk-scale profile for each feature kind and prints per-load
//! mean rates. Useful for eyeballing generator settings.
//!
//! Usage: desk_rates [master_seed] [repetitions] [n_per_class]

use vibspec::{
    build_corpus, run_test, ExperimentConfig, FaultKind, FaultSize, FeatureKind, LoadCondition,
    SuiteConfig,
};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(20_240_101);
    let reps: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(5);
    let n: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(5);

    let cfg = SuiteConfig {
        master_seed: seed,
        ..SuiteConfig::default()
    };
    let t0 = std::time::Instant::now();
    let corpus = build_corpus(&cfg, FaultSize::In014).expect("corpus");
    eprintln!("corpus: {} images in {:.1}s", corpus.total_images(), t0.elapsed().as_secs_f64());

    for kind in FeatureKind::ALL {
        let test = ExperimentConfig {
            test_id: 1,
            fault_size: FaultSize::In014,
            training_load: LoadCondition::new(0).unwrap(),
            testing_loads: LoadCondition::ALL.to_vec(),
            classes: FaultKind::ALL.to_vec(),
            n_per_class: n,
            repetitions: reps,
            feature_kind: kind,
            d: cfg.d,
            contribution: cfg.contribution,
            master_seed: seed,
        };
        let t0 = std::time::Instant::now();
        let out = run_test(&corpus, &test).expect("run");
        let rates: Vec<f64> = out
            .loads
            .iter()
            .map(|l| l.per_rep_rates.iter().sum::<f64>() / l.per_rep_rates.len() as f64)
            .collect();
        let cross = (rates[1] + rates[2] + rates[3]) / 3.0;
        println!(
            "{kind:>5}: same={:6.2} cross={:6.2}  loads={:?}  secs(sum)={:.1} wall={:.1}",
            rates[0],
            cross,
            rates.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>(),
            out.seconds,
            t0.elapsed().as_secs_f64()
        );
    }
}
