//! Every learner, fitted on generated survey data, survives a trip through
//! the model file format.

use nyts_core::ingest::{prepare, PrepareConfig, SignalConfig};
use nyts_core::ml::{LearnerConfig, ModelKind, ModelSpec};
use nyts_core::persistence::{load, model_id, save_to_path, to_bytes, PersistError};
use nyts_core::{Dataset, Execution, QuestionCatalog};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn survey(rows: usize, seed: u64) -> Dataset {
    let catalog = QuestionCatalog::nyts2018();
    let signal: SignalConfig = "Q6=1.5,Q27=-1,Q61=0.8,noise=0.3".parse().unwrap();
    let raw = nyts_core::ingest::generate_synthetic(rows, &catalog, &signal, seed).unwrap();
    let mut csv = Vec::new();
    raw.write_csv(&mut csv).unwrap();
    prepare(csv.as_slice(), &catalog, &PrepareConfig::default())
        .unwrap()
        .0
}

fn quick(kind: ModelKind) -> ModelSpec {
    let mut spec = ModelSpec::new(kind).with_seed(11);
    match &mut spec.learner {
        LearnerConfig::RandomForest(c) => c.n_trees = 15,
        LearnerConfig::GradientBoosting(c) => c.n_stages = 20,
        LearnerConfig::Linear(c) | LearnerConfig::Logistic(c) => c.max_iters = 500,
        _ => {}
    }
    spec
}

fn random_inputs(ds: &Dataset, n: usize, seed: u64) -> Vec<Vec<u32>> {
    let domains = ds.domains.as_ref().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            domains
                .iter()
                .map(|d| {
                    if rng.random_bool(0.2) {
                        0
                    } else {
                        d[rng.random_range(0..d.len())]
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn round_trip_is_exact_for_every_kind() {
    let ds = survey(600, 1);
    let inputs = random_inputs(&ds, 1000, 2);
    let dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let mut model = quick(kind).fit(&ds).unwrap();
        model.meta.catalog_version = "nyts2018.1".into();
        let path = dir.path().join(format!("{kind}.imodel"));
        let id = save_to_path(&model, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(model_id(&bytes).unwrap(), id);
        let back = load(&bytes).unwrap();
        assert_eq!(back, model, "{kind}");
        for x in &inputs {
            let a = model.predict(x).unwrap();
            let b = back.predict(x).unwrap();
            assert_eq!(
                a.probability_yes.to_bits(),
                b.probability_yes.to_bits(),
                "{kind}"
            );
            assert_eq!(a.label, b.label);
        }
        assert_eq!(to_bytes(&back), bytes, "{kind} re-encodes identically");
    }
}

#[test]
fn fitting_is_deterministic_and_thread_independent() {
    let ds = survey(400, 3);
    for kind in ModelKind::ALL {
        let seq = quick(kind)
            .with_execution(Execution::Sequential)
            .fit(&ds)
            .unwrap();
        let par = quick(kind)
            .with_execution(Execution::Parallel)
            .fit(&ds)
            .unwrap();
        assert_eq!(to_bytes(&seq), to_bytes(&par), "{kind}");
    }
}

#[test]
fn predictions_respect_the_label_rule_and_domains() {
    let ds = survey(300, 4);
    let model = quick(ModelKind::Logistic).fit(&ds).unwrap();
    for x in random_inputs(&ds, 200, 5) {
        let p = model.predict(&x).unwrap();
        assert!((0.0..=1.0).contains(&p.probability_yes));
        assert_eq!(p.label == 1, p.probability_yes > 0.5);
    }
    let mut bad = vec![0; ds.n_features()];
    bad[0] = 99;
    assert!(model.predict(&bad).is_err());
    assert!(model.predict(&bad[1..]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn any_single_byte_change_is_a_checksum_error(pos in any::<prop::sample::Index>(), delta in 1u8..=255) {
        static BYTES: std::sync::OnceLock<Vec<u8>> = std::sync::OnceLock::new();
        let bytes = BYTES.get_or_init(|| to_bytes(&quick(ModelKind::GradientBoosting).fit(&survey(200, 6)).unwrap()));
        let mut damaged = bytes.clone();
        let i = pos.index(damaged.len());
        damaged[i] = damaged[i].wrapping_add(delta);
        let err = load(&damaged).unwrap_err();
        prop_assert!(matches!(err, PersistError::ChecksumMismatch { .. } | PersistError::ChecksumMissing), "{err:?}");
    }
}
