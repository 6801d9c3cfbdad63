//! Defense evaluation pipelines: sweep the flip ratio and measure what it
//! does to the adversary's surrogate (scenario 1) or GAN spoofing success
//! (scenario 2), together with the defender's own cost.

use crate::defense::{apply_defense, DefensePolicy, FlipAudit, Scope};
use crate::neural::{
    mlp_init, train_classifier, train_gan_with_negatives, GanPair, LabeledDataset, Mlp, MlpSpec,
    Role, TrainConfig,
};
use crate::rng::StreamFactory;
use crate::scenario1::{
    build_adversary_dataset, build_defender_dataset, run_attack, run_baseline,
    throughput_reduction, AttackMode, EnergyBudget, Scenario1Config, Scenario1World,
    ScenarioError,
};
use crate::scenario2::{
    build_auth_dataset, run_spoofing_attack, train_auth_classifier, AuthWorld, Scenario2Config,
    AUTH_FEATURE_LEN,
};

use ndarray::Array2;
use rand::Rng;

/// One row of the scenario-2 defense table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defense2Row {
    pub p_d: f64,
    pub success_probability: f64,
    pub n_flips: usize,
}

/// One row of the scenario-1 defense table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defense1Row {
    pub p_d: f64,
    pub surrogate_ack_detection: f64,
    pub surrogate_noack_error: f64,
    pub attack_reduction: f64,
    pub defender_cost: f64,
}

/// ACK-detection rate and no-ACK error of a surrogate on held-out data.
pub fn surrogate_quality(surrogate: &Mlp, test: &LabeledDataset) -> (f64, f64) {
    let predictions = surrogate
        .predict_batch(&test.features)
        .expect("shape checked");
    let mut ack_total = 0usize;
    let mut ack_hit = 0usize;
    let mut noack_total = 0usize;
    let mut noack_wrong = 0usize;
    for ((label, _), &truth) in predictions.iter().zip(&test.labels) {
        if truth == 1 {
            ack_total += 1;
            if *label == 1 {
                ack_hit += 1;
            }
        } else {
            noack_total += 1;
            if *label == 1 {
                noack_wrong += 1;
            }
        }
    }
    (
        if ack_total > 0 {
            ack_hit as f64 / ack_total as f64
        } else {
            1.0
        },
        if noack_total > 0 {
            noack_wrong as f64 / noack_total as f64
        } else {
            0.0
        },
    )
}

fn train_seed(factory: &StreamFactory, label: &str) -> u64 {
    factory.stream(label).gen()
}

/// Trains the scenario-1 sensing classifier for one seed.
pub fn train_sensing_classifier(
    world: &Scenario1World,
    train_cfg: &TrainConfig,
) -> Result<(Mlp, LabeledDataset), ScenarioError> {
    let data = build_defender_dataset(world, world.cfg.n_defender_samples)?;
    let (train, test) = data.split_half();
    let mut init_rng = world.streams().stream("ct.init");
    let model = mlp_init(
        &MlpSpec::classifier(world.cfg.n_rssi_bins),
        Role::SensingClassifier,
        &mut init_rng,
    )?;
    let cfg = TrainConfig {
        seed: train_seed(world.streams(), "ct.train"),
        ..*train_cfg
    };
    let (trained, _) = train_classifier(model, &train, &cfg)?;
    Ok((trained, test))
}

/// Trains a surrogate on the adversary's observations and reports its
/// held-out quality.
pub fn train_surrogate(
    observations: &LabeledDataset,
    train_cfg: &TrainConfig,
    factory: &StreamFactory,
    stream_tag: &str,
) -> Result<(Mlp, f64, f64), ScenarioError> {
    let (train, test) = observations.split_half();
    let mut init_rng = factory.stream(&format!("{stream_tag}.init"));
    let model = mlp_init(
        &MlpSpec::classifier(observations.dim()),
        Role::SurrogateClassifier,
        &mut init_rng,
    )?;
    let cfg = TrainConfig {
        seed: train_seed(factory, &format!("{stream_tag}.train")),
        ..*train_cfg
    };
    let (trained, _) = train_classifier(model, &train, &cfg)?;
    let (ack_detection, noack_error) = surrogate_quality(&trained, &test);
    Ok((trained, ack_detection, noack_error))
}

/// Scenario-1 defense sweep for one seed.
///
/// The world and the sensing classifier are shared across ratios, so rows
/// differ only by the defender's flips during the adversary's observation
/// window. The adversary then mounts its data-phase jamming attack with
/// whatever surrogate it managed to train; the defense itself is off
/// outside the observation window.
pub fn evaluate_defense_scenario1(
    cfg: &Scenario1Config,
    train_cfg: &TrainConfig,
    pd_values: &[f64],
    factory: &StreamFactory,
) -> Result<(Vec<Defense1Row>, FlipAudit), ScenarioError> {
    let world = Scenario1World::new(cfg.clone(), *factory)?;
    let (sensing_classifier, _) = train_sensing_classifier(&world, train_cfg)?;
    let n_slots = cfg.n_slots;
    let (_, baseline_metrics) = run_baseline(&world, &sensing_classifier, n_slots, "defeval")?;

    let mut audit = FlipAudit::default();
    let mut rows = Vec::with_capacity(pd_values.len());
    for &p_d in pd_values {
        let policy = DefensePolicy::new(p_d, Scope::TransmitDecisions)
            .map_err(ScenarioError::InvalidConfig)?;
        let observations = build_adversary_dataset(
            &world,
            &sensing_classifier,
            cfg.n_adversary_samples,
            Some(&policy),
        )?;
        audit.merge(observations.audit.clone());
        let (surrogate, ack_detection, noack_error) =
            train_surrogate(&observations.dataset, train_cfg, factory, "ca")?;
        let budget = EnergyBudget::new(cfg.default_attack_budget(n_slots));
        let (_, attacked) = run_attack(
            &world,
            &sensing_classifier,
            &surrogate,
            AttackMode::JamData,
            budget,
            n_slots,
            "defeval",
        )?;
        let reduction = throughput_reduction(&baseline_metrics, &attacked)?;
        rows.push(Defense1Row {
            p_d,
            surrogate_ack_detection: ack_detection,
            surrogate_noack_error: noack_error,
            attack_reduction: reduction,
            defender_cost: observations.defender_cost,
        });
    }
    Ok((rows, audit))
}

/// Scenario-2 defense sweep for one seed.
///
/// The adversary labels its observations with the base station's announced
/// authentication decisions. Flipped decisions hand it mislabeled rows: the
/// cleanest intended-UE observations enter its discriminator as
/// known-negatives, and the GAN trains against them.
pub fn evaluate_defense_scenario2(
    cfg: &Scenario2Config,
    pd_values: &[f64],
    factory: &StreamFactory,
) -> Result<(Vec<Defense2Row>, FlipAudit), ScenarioError> {
    let world = AuthWorld::new(cfg.clone(), *factory)?;
    let auth_data = build_auth_dataset(&world)?;
    let mut cs_init = factory.stream("cs.init");
    let classifier_cfg = TrainConfig {
        seed: train_seed(factory, "cs.train"),
        ..cfg.classifier
    };
    let (auth_classifier, _) = train_auth_classifier(&auth_data, &classifier_cfg, &mut cs_init)?;

    // The observation window: one UE frame per instance, received by both
    // the base station (which announces a decision) and the adversary.
    let n_obs = cfg.n_adversary_obs;
    let mut decisions = Vec::with_capacity(n_obs);
    let mut adv_rows = Array2::zeros((n_obs, AUTH_FEATURE_LEN));
    for k in 0..n_obs {
        let (at_gnb, at_adv) = world.ue_frame_at_both("obs", k as u64)?;
        decisions.push(auth_classifier.predict(&at_gnb)?);
        for (j, &v) in at_adv.iter().enumerate() {
            adv_rows[[k, j]] = v;
        }
    }

    let gan_seed = train_seed(factory, "gan.train");
    let mut audit = FlipAudit::default();
    let mut rows = Vec::with_capacity(pd_values.len());
    for &p_d in pd_values {
        let policy =
            DefensePolicy::new(p_d, Scope::AuthDecisions).map_err(ScenarioError::InvalidConfig)?;
        let mut defense_rng = factory.stream("defense");
        let outcome = apply_defense(&decisions, &policy, &mut defense_rng);
        audit.record(&outcome, &decisions);

        let accepted: Vec<usize> = (0..n_obs)
            .filter(|&k| outcome.decisions[k].0 == 1)
            .collect();
        let denied: Vec<usize> = (0..n_obs)
            .filter(|&k| outcome.decisions[k].0 == 0)
            .collect();
        let select = |idx: &[usize]| {
            let mut m = Array2::zeros((idx.len(), AUTH_FEATURE_LEN));
            for (r, &k) in idx.iter().enumerate() {
                m.row_mut(r).assign(&adv_rows.row(k));
            }
            m
        };
        let real_pool = select(&accepted);
        let negative_pool = select(&denied);

        let mut gan_init = factory.stream("gan.init");
        let pair = GanPair::new(&mut gan_init)?;
        let gan_cfg = TrainConfig {
            seed: gan_seed,
            ..cfg.gan
        };
        let negatives = (negative_pool.nrows() > 0).then_some(&negative_pool);
        let (trained, _) = train_gan_with_negatives(pair, &real_pool, negatives, &gan_cfg)?;
        let result = run_spoofing_attack(&auth_classifier, &trained, &world, cfg.n_trials, "attack")?;
        rows.push(Defense2Row {
            p_d,
            success_probability: result.success_probability,
            n_flips: outcome.flip_indices.len(),
        });
    }
    Ok((rows, audit))
}

/// CSV export of a scenario-2 defense table: p_d, attack success.
pub fn defense2_table_csv(rows: &[Defense2Row]) -> String {
    let mut out = String::from("p_d,attack_success_probability\n");
    for row in rows {
        out.push_str(&format!("{},{}\n", row.p_d, row.success_probability));
    }
    out
}

/// CSV export of spoofing results across SNRs: gamma_db, n_trials,
/// success_probability.
pub fn spoofing_table_csv(rows: &[(f64, usize, f64)]) -> String {
    let mut out = String::from("gamma_db,n_trials,success_probability\n");
    for (gamma, n, p) in rows {
        out.push_str(&format!("{gamma},{n},{p}\n"));
    }
    out
}
