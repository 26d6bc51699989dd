//! Small descriptive statistics used across the crate.

use std::cmp::Ordering;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Median; the mean of the two central order statistics for even sizes.
pub fn median(xs: &[f64]) -> f64 {
    let v = sorted(xs);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Nearest-rank quantile of already sorted data: the `ceil(p n)`-th order
/// statistic (1-based), with rank at least 1.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    // absorb representation error such as 0.05 * 100 = 5.000000000000001
    let rank = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Kendall's tau-a of paired observations in O(n log n) (Knight's
/// merge-sort count). Tied pairs count as neither concordant nor discordant.
pub fn empirical_kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    if n < 2 {
        return 0.0;
    }
    let mut v = pairs.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let total = (n * (n - 1) / 2) as i64;
    // pairs tied in x, and tied in both
    let mut tied_x = 0i64;
    let mut tied_xy = 0i64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && v[j].0 == v[i].0 {
            j += 1;
        }
        let run = (j - i) as i64;
        tied_x += run * (run - 1) / 2;
        let mut k = i;
        while k < j {
            let mut l = k;
            while l < j && v[l].1 == v[k].1 {
                l += 1;
            }
            let r = (l - k) as i64;
            tied_xy += r * (r - 1) / 2;
            k = l;
        }
        i = j;
    }

    let mut ys: Vec<f64> = v.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf) as i64;

    let mut tied_y = 0i64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        let run = (j - i) as i64;
        tied_y += run * (run - 1) / 2;
        i = j;
    }

    let discordant = swaps;
    let concordant = total - tied_x - tied_y + tied_xy - discordant;
    (concordant - discordant) as f64 / total as f64
}

fn merge_count(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = xs.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[j].total_cmp(&xs[i]) == Ordering::Less {
            buf[k] = xs[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = xs[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&xs[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&xs[j..n]);
    xs.copy_from_slice(&buf[..n]);
    swaps
}
