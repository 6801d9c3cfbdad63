//! Seeded experiment orchestration: one pipeline run per seed, aggregated
//! into a [`MetricsReport`].

use rand::Rng;

use crate::neural::GanPair;
use crate::rng::StreamFactory;
use crate::scenario1::{
    build_adversary_dataset, run_attack, run_baseline, throughput_reduction, AttackMode,
    EnergyBudget,
    Scenario1World,
};
use crate::scenario2::{
    build_auth_dataset, collect_adversary_observations, replay_attack_baseline,
    run_spoofing_attack, train_auth_classifier, AuthWorld,
};

use super::config::{ExperimentConfig, Scenario};
use super::defense_tables::{
    evaluate_defense_scenario1, evaluate_defense_scenario2, train_sensing_classifier,
    train_surrogate,
};
use super::report::{MetricsReport, Provenance, SeedRow};
use super::HarnessError;

fn artifact_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Formats a group key; trims float noise so "-3" stays "-3".
fn group_of(value: f64) -> String {
    format!("{value}")
}

/// Runs the configured scenario once per seed (seed, seed+1, ...) and
/// aggregates the per-seed rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricsReport, HarnessError> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.n_seeds as u64).map(|i| cfg.seed + i).collect();
    let (columns, mut rows) = (columns_for(cfg.scenario), Vec::new());
    for &seed in &seeds {
        let factory = StreamFactory::new(seed);
        let seed_rows = run_seed(cfg, seed, &factory)
            .map_err(|source| HarnessError::SeedRun { seed, source })?;
        rows.extend(seed_rows);
    }
    Ok(MetricsReport::new(
        cfg.scenario.name(),
        columns,
        rows,
        Provenance {
            config_hash: cfg.config_hash(),
            seed_list: seeds,
            artifact_version: artifact_version(),
        },
    ))
}

fn columns_for(scenario: Scenario) -> Vec<String> {
    let names: &[&str] = match scenario {
        Scenario::Baseline1 => &[
            "idle_detection",
            "busy_detection_error",
            "normalized_throughput",
            "incumbent_protection",
        ],
        Scenario::Attack1 => &[
            "ack_detection",
            "noack_error",
            "baseline_throughput",
            "jam_data_reduction",
            "jam_data_unnecessary_rate",
            "jam_data_energy",
            "jam_sensing_reduction",
            "jam_sensing_unnecessary_rate",
            "jam_sensing_energy",
            "sensing_beats_data",
        ],
        Scenario::Defense1 => &[
            "surrogate_ack_detection",
            "surrogate_noack_error",
            "attack_reduction",
            "defender_cost",
        ],
        Scenario::Auth2 => &["test_accuracy"],
        Scenario::Spoof2 => &[
            "success_probability",
            "replay_success_probability",
            "cs_test_accuracy",
        ],
        Scenario::Defense2 => &["success_probability", "n_flips"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    match cfg.scenario {
        Scenario::Baseline1 => run_baseline1(cfg, seed, factory),
        Scenario::Attack1 => run_attack1(cfg, seed, factory),
        Scenario::Defense1 => run_defense1(cfg, seed, factory),
        Scenario::Auth2 => run_auth2(cfg, seed, factory),
        Scenario::Spoof2 => run_spoof2(cfg, seed, factory),
        Scenario::Defense2 => run_defense2(cfg, seed, factory),
    }
}

/// Idle/busy detection quality on the held-out half, per class.
fn detection_rates(
    classifier: &crate::neural::Mlp,
    test: &crate::neural::LabeledDataset,
) -> Result<(f64, f64), crate::scenario1::ScenarioError> {
    let predictions = classifier.predict_batch(&test.features)?;
    let mut idle_total = 0usize;
    let mut idle_ok = 0usize;
    let mut busy_total = 0usize;
    let mut busy_missed = 0usize;
    for ((label, _), &truth) in predictions.iter().zip(&test.labels) {
        if truth == 0 {
            idle_total += 1;
            if *label == 0 {
                idle_ok += 1;
            }
        } else {
            busy_total += 1;
            if *label == 0 {
                busy_missed += 1;
            }
        }
    }
    Ok((
        idle_ok as f64 / idle_total.max(1) as f64,
        busy_missed as f64 / busy_total.max(1) as f64,
    ))
}

fn run_baseline1(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    let world = Scenario1World::new(cfg.scenario1_config()?, *factory)?;
    let train_cfg = cfg.train_config(0);
    let (classifier, test) = train_sensing_classifier(&world, &train_cfg)?;
    let (idle_detection, busy_error) = detection_rates(&classifier, &test)?;
    let (_, metrics) = run_baseline(&world, &classifier, cfg.scenario1.n_slots, "eval")?;
    Ok(vec![SeedRow {
        seed,
        group: None,
        values: vec![
            idle_detection,
            busy_error,
            metrics.normalized_throughput,
            metrics.incumbent_protection,
        ],
    }])
}

fn run_attack1(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    let world = Scenario1World::new(cfg.scenario1_config()?, *factory)?;
    let train_cfg = cfg.train_config(0);
    let (sensing, _) = train_sensing_classifier(&world, &train_cfg)?;
    let observations =
        build_adversary_dataset(&world, &sensing, cfg.scenario1.n_adversary_samples, None)?;
    let (surrogate, ack_detection, noack_error) =
        train_surrogate(&observations.dataset, &train_cfg, factory, "ca")?;

    let n_slots = cfg.scenario1.n_slots;
    let (_, baseline) = run_baseline(&world, &sensing, n_slots, "eval")?;
    let budget = cfg.budget_units();
    let (_, jam_data) = run_attack(
        &world,
        &sensing,
        &surrogate,
        AttackMode::JamData,
        EnergyBudget::new(budget),
        n_slots,
        "eval",
    )?;
    let (_, jam_sensing) = run_attack(
        &world,
        &sensing,
        &surrogate,
        AttackMode::JamSensing,
        EnergyBudget::new(budget),
        n_slots,
        "eval",
    )?;
    let jd_reduction = throughput_reduction(&baseline, &jam_data)?;
    let js_reduction = throughput_reduction(&baseline, &jam_sensing)?;
    Ok(vec![SeedRow {
        seed,
        group: None,
        values: vec![
            ack_detection,
            noack_error,
            baseline.normalized_throughput,
            jd_reduction,
            jam_data.unnecessary_jamming_rate,
            jam_data.energy_spent,
            js_reduction,
            jam_sensing.unnecessary_jamming_rate,
            jam_sensing.energy_spent,
            (js_reduction >= jd_reduction) as u8 as f64,
        ],
    }])
}

fn run_defense1(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    let scenario_cfg = cfg.scenario1_config()?;
    let train_cfg = cfg.train_config(0);
    let (rows, _) = evaluate_defense_scenario1(
        &scenario_cfg,
        &train_cfg,
        &cfg.defense.pd_values,
        factory,
    )?;
    Ok(rows
        .into_iter()
        .map(|r| SeedRow {
            seed,
            group: Some(group_of(r.p_d)),
            values: vec![
                r.surrogate_ack_detection,
                r.surrogate_noack_error,
                r.attack_reduction,
                r.defender_cost,
            ],
        })
        .collect())
}

fn run_auth2(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    let mut rows = Vec::new();
    for (i, &gamma) in cfg.auth.gammas.iter().enumerate() {
        let scoped = factory.scoped("gamma", i as u64);
        let world = AuthWorld::new(cfg.scenario2_config(gamma)?, scoped)?;
        let data = build_auth_dataset(&world)?;
        let mut init_rng = scoped.stream("cs.init");
        let classifier_cfg = crate::neural::TrainConfig {
            seed: scoped.stream("cs.train").gen(),
            ..cfg.train_config(0)
        };
        let (_, report) = train_auth_classifier(&data, &classifier_cfg, &mut init_rng)?;
        rows.push(SeedRow {
            seed,
            group: Some(group_of(gamma)),
            values: vec![report.test_accuracy],
        });
    }
    Ok(rows)
}

fn run_spoof2(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    let mut rows = Vec::new();
    for (i, &gamma) in cfg.auth.gammas.iter().enumerate() {
        let scoped = factory.scoped("gamma", i as u64);
        let scenario_cfg = cfg.scenario2_config(gamma)?;
        let world = AuthWorld::new(scenario_cfg.clone(), scoped)?;
        let data = build_auth_dataset(&world)?;
        let mut init_rng = scoped.stream("cs.init");
        let classifier_cfg = crate::neural::TrainConfig {
            seed: scoped.stream("cs.train").gen(),
            ..scenario_cfg.classifier
        };
        let (classifier, report) = train_auth_classifier(&data, &classifier_cfg, &mut init_rng)?;

        let observations = collect_adversary_observations(&world, scenario_cfg.n_adversary_obs)?;
        let mut gan_init = scoped.stream("gan.init");
        let pair = GanPair::new(&mut gan_init)?;
        let gan_cfg = crate::neural::TrainConfig {
            seed: scoped.stream("gan.train").gen(),
            ..scenario_cfg.gan
        };
        let (trained, _) = crate::neural::train_gan(pair, &observations, &gan_cfg)?;
        let spoof =
            run_spoofing_attack(&classifier, &trained, &world, scenario_cfg.n_trials, "attack")?;
        let replay =
            replay_attack_baseline(&classifier, &world, scenario_cfg.n_trials, "replay")?;
        rows.push(SeedRow {
            seed,
            group: Some(group_of(gamma)),
            values: vec![
                spoof.success_probability,
                replay.success_probability,
                report.test_accuracy,
            ],
        });
    }
    Ok(rows)
}

fn run_defense2(
    cfg: &ExperimentConfig,
    seed: u64,
    factory: &StreamFactory,
) -> Result<Vec<SeedRow>, crate::scenario1::ScenarioError> {
    let scenario_cfg = cfg.scenario2_config(cfg.auth.gamma_db)?;
    let (rows, _) = evaluate_defense_scenario2(&scenario_cfg, &cfg.defense.pd_values, factory)?;
    Ok(rows
        .into_iter()
        .map(|r| SeedRow {
            seed,
            group: Some(group_of(r.p_d)),
            values: vec![r.success_probability, r.n_flips as f64],
        })
        .collect())
}
