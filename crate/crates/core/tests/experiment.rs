use rola_core::presets::preset;
use rola_core::trainer::{run_experiment, trial_csv_name, Manifest, RunOptions, AGGREGATE_FILE};
use rola_core::Error;

fn config() -> rola_core::trainer::ExperimentConfig {
    preset("rola-boxpush-6x6")
        .unwrap()
        .with_overrides(&[
            "training_episodes=20",
            "eval_interval=5",
            "eval_episodes=2",
            "hidden_units=8",
            "trials=3",
            "seed=40",
        ])
        .unwrap()
}

#[test]
fn parallel_trials_match_sequential_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    let par = dir.path().join("par");
    let cfg = config();
    run_experiment(&cfg, &seq, RunOptions { jobs: 1, overwrite: false }).unwrap();
    run_experiment(&cfg, &par, RunOptions { jobs: 3, overwrite: false }).unwrap();
    for name in (0..3).map(trial_csv_name).chain([AGGREGATE_FILE.to_string()]) {
        let a = std::fs::read(seq.join(&name)).unwrap();
        let b = std::fs::read(par.join(&name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn manifest_records_config_and_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let summary = run_experiment(&config(), &out, RunOptions::default()).unwrap();
    assert_eq!(summary.aggregate.len(), 4);
    let m = Manifest::load(&out).unwrap();
    assert_eq!(m.config, config());
    assert_eq!(m.gamma, 0.99);
    let seeds: Vec<u64> = m.trials.iter().map(|t| t.seed).collect();
    assert_eq!(seeds, vec![40, 41, 42]);
    assert!(out.join("checkpoints/trial_002/best.ckpt").is_file());
}

#[test]
fn refuses_to_clobber() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = config().with_overrides(&["trials=1"]).unwrap();
    run_experiment(&cfg, &out, RunOptions::default()).unwrap();
    let err = run_experiment(&cfg, &out, RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::OutputExists(_)));
    run_experiment(&cfg, &out, RunOptions { jobs: 1, overwrite: true }).unwrap();

    let stranger = dir.path().join("stranger");
    std::fs::create_dir_all(&stranger).unwrap();
    std::fs::write(stranger.join("notes.txt"), "keep me").unwrap();
    assert!(run_experiment(&cfg, &stranger, RunOptions { jobs: 1, overwrite: true }).is_err());
    assert!(stranger.join("notes.txt").exists());
}
