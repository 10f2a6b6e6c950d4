//! Binary information measures used by the ID3 learner. Counts are
//! `(positives, negatives)`.

/// `I(p, n)` in bits. `0 log 0` is taken as 0 and an empty node carries no
/// information.
pub fn information(p: usize, n: usize) -> f64 {
    let total = (p + n) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let term = |k: usize| {
        if k == 0 {
            0.0
        } else {
            let q = k as f64 / total;
            -q * q.log2()
        }
    };
    term(p) + term(n)
}

/// Weighted average of the children's information.
pub fn expected_information(partition: &[(usize, usize)]) -> f64 {
    let total: usize = partition.iter().map(|(p, n)| p + n).sum();
    if total == 0 {
        return 0.0;
    }
    partition
        .iter()
        .map(|&(p, n)| (p + n) as f64 / total as f64 * information(p, n))
        .sum()
}

/// Information gained by splitting a node into `partition`.
pub fn gain(partition: &[(usize, usize)]) -> f64 {
    let (p, n) = partition
        .iter()
        .fold((0, 0), |(a, b), &(p, n)| (a + p, b + n));
    information(p, n) - expected_information(partition)
}

/// Gain of splitting `rows` on column `feature` of `x`, labels in `y`.
pub fn feature_gain(x: ndarray::ArrayView2<u32>, y: &[u8], rows: &[usize], feature: usize) -> f64 {
    let mut cells: std::collections::BTreeMap<u32, (usize, usize)> = Default::default();
    for &r in rows {
        let cell = cells.entry(x[[r, feature]]).or_default();
        if y[r] == 1 {
            cell.0 += 1;
        } else {
            cell.1 += 1;
        }
    }
    gain(&cells.into_values().collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(information(3, 3), 1.0);
        assert_eq!(information(0, 5), 0.0);
        assert_eq!(information(0, 0), 0.0);
        // 9 yes / 5 no: the classic play-tennis root
        assert!((information(9, 5) - 0.940_285_958_670_631).abs() < 1e-12);
    }

    #[test]
    fn play_tennis_outlook_gain() {
        let outlook = [(2, 3), (4, 0), (3, 2)];
        assert!((gain(&outlook) - 0.246_749_819_774_439_4).abs() < 1e-12);
    }

    #[test]
    fn single_cell_gains_nothing() {
        assert!(gain(&[(4, 7)]).abs() < 1e-15);
    }
}
