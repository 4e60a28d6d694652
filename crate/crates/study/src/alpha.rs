use crate::StudyError;

const LEVELS: usize = 5;

/// Krippendorff's alpha with the ordinal metric on a 1-5 scale.
///
/// `ratings[r][i]` is rater r's score for item i, `None` when missing.
/// Items with fewer than two ratings are not pairable and are ignored.
pub fn krippendorff_alpha(ratings: &[Vec<Option<u8>>]) -> Result<f64, StudyError> {
    let n_items = ratings.iter().map(Vec::len).max().unwrap_or(0);
    let mut coincidence = [[0.0f64; LEVELS]; LEVELS];
    let mut pairable_items = 0;
    for i in 0..n_items {
        let mut counts = [0usize; LEVELS];
        for r in ratings {
            if let Some(Some(v)) = r.get(i) {
                if !(1..=5).contains(v) {
                    return Err(StudyError::OutOfRange(i64::from(*v)));
                }
                counts[usize::from(*v) - 1] += 1;
            }
        }
        let m: usize = counts.iter().sum();
        if m < 2 {
            continue;
        }
        pairable_items += 1;
        for c in 0..LEVELS {
            for k in 0..LEVELS {
                let pairs = if c == k { counts[c] * counts[c].saturating_sub(1) } else { counts[c] * counts[k] };
                coincidence[c][k] += pairs as f64 / (m - 1) as f64;
            }
        }
    }
    if pairable_items < 2 {
        return Err(StudyError::InsufficientData);
    }

    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    // Ordinal distance: squared mass between the two ranks, halving the ends.
    let delta2 = |c: usize, k: usize| -> f64 {
        let (lo, hi) = (c.min(k), c.max(k));
        let between: f64 = marginals[lo..=hi].iter().sum();
        (between - (marginals[lo] + marginals[hi]) / 2.0).powi(2)
    };
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..LEVELS {
        for k in 0..LEVELS {
            if c == k {
                continue;
            }
            let d = delta2(c, k);
            observed += coincidence[c][k] * d;
            expected += marginals[c] * marginals[k] * d;
        }
    }
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}
