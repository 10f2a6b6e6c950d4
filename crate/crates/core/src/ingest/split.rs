use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::dataset::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 0,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..Default::default()
        }
    }
}

/// Test-row quota per class: largest-remainder apportionment of
/// `round(fraction * n)`, keeping every class with two or more rows on both
/// sides.
fn class_quotas(counts: &[usize], fraction: f64, n_test: usize) -> Vec<usize> {
    let ideal: Vec<f64> = counts.iter().map(|&c| c as f64 * fraction).collect();
    let mut quota: Vec<usize> = ideal.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = ideal[a] - ideal[a].floor();
        let fb = ideal[b] - ideal[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut assigned: usize = quota.iter().sum();
    for &c in order.iter().cycle().take(order.len() * 2) {
        if assigned >= n_test {
            break;
        }
        if quota[c] < counts[c] {
            quota[c] += 1;
            assigned += 1;
        }
    }

    let lo = |c: usize| usize::from(counts[c] >= 2);
    let hi = |c: usize| {
        if counts[c] >= 2 {
            counts[c] - 1
        } else {
            counts[c]
        }
    };
    for c in 0..counts.len() {
        quota[c] = quota[c].clamp(lo(c), hi(c));
    }
    // restore the total where clamping moved it and another class has room
    let mut total: usize = quota.iter().sum();
    for &c in &order {
        while total > n_test && quota[c] > lo(c) && quota[c] as f64 > ideal[c] - 1.0 {
            quota[c] -= 1;
            total -= 1;
        }
        while total < n_test && quota[c] < hi(c) && (quota[c] as f64) < ideal[c] + 1.0 {
            quota[c] += 1;
            total += 1;
        }
    }
    quota
}

/// Seeded train/test partition. Both halves keep the original row order.
pub fn train_test_split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset), IngestError> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(IngestError::InvalidSplit(format!(
            "test fraction {} is outside (0, 1)",
            spec.test_fraction
        )));
    }
    let n = ds.n_rows();
    if n == 0 {
        return Err(IngestError::InvalidSplit("dataset is empty".into()));
    }
    let n_test = (spec.test_fraction * n as f64).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(IngestError::InvalidSplit(format!(
            "{n} rows at fraction {} leaves one side empty",
            spec.test_fraction
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut is_test = vec![false; n];
    if spec.stratified {
        let counts = ds.class_counts();
        for (class, &count) in counts.iter().enumerate() {
            if count == 1 {
                return Err(IngestError::ClassTooSmall {
                    class: class as u8,
                    count,
                });
            }
        }
        let quotas = class_quotas(&counts, spec.test_fraction, n_test);
        for (class, &quota) in quotas.iter().enumerate() {
            let mut idx: Vec<usize> = (0..n).filter(|&i| usize::from(ds.y[i]) == class).collect();
            idx.shuffle(&mut rng);
            for &i in &idx[..quota] {
                is_test[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..n_test] {
            is_test[i] = true;
        }
    }

    let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| is_test[i]);
    Ok((ds.subset(&train), ds.subset(&test)))
}
