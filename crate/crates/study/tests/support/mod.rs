#![allow(dead_code)]

/// Alpha from first principles: enumerate every ordered pair of pairable
/// values within items (observed) and across the whole pool (expected).
pub fn brute_force_alpha(ratings: &[Vec<Option<u8>>]) -> f64 {
    let n_items = ratings.iter().map(Vec::len).max().unwrap_or(0);
    let items: Vec<Vec<u8>> = (0..n_items)
        .map(|i| ratings.iter().filter_map(|r| r.get(i).copied().flatten()).collect::<Vec<u8>>())
        .filter(|v| v.len() >= 2)
        .collect();
    let pool: Vec<u8> = items.iter().flatten().copied().collect();
    let n = pool.len() as f64;
    let freq = |g: u8| pool.iter().filter(|&&v| v == g).count() as f64;
    let delta2 = |a: u8, b: u8| -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let s: f64 = (lo..=hi).map(freq).sum();
        (s - (freq(lo) + freq(hi)) / 2.0).powi(2)
    };
    let mut d_o = 0.0;
    for item in &items {
        let m = item.len() as f64;
        for i in 0..item.len() {
            for j in 0..item.len() {
                if i != j {
                    d_o += delta2(item[i], item[j]) / (m - 1.0);
                }
            }
        }
    }
    d_o /= n;
    let mut d_e = 0.0;
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            if i != j {
                d_e += delta2(pool[i], pool[j]);
            }
        }
    }
    d_e /= n * (n - 1.0);
    1.0 - d_o / d_e
}

/// Three raters, four items, one missing rating.
pub fn four_by_three() -> Vec<Vec<Option<u8>>> {
    vec![
        vec![Some(1), Some(2), Some(3), Some(5)],
        vec![Some(2), Some(2), Some(4), None],
        vec![Some(1), Some(3), Some(3), Some(4)],
    ]
}

pub fn perfect_agreement() -> Vec<Vec<Option<u8>>> {
    let row = vec![Some(1), Some(2), Some(4), Some(5), Some(3)];
    vec![row.clone(), row.clone(), row]
}
