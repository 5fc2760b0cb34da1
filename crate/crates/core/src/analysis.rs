//! Locating extrema in sampled curves.

/// Indices `i` where `ys[i]` is the strict minimum of `ys[i-w..=i+w]`
/// (window clipped at the ends; end points themselves are excluded).
pub fn local_minima(ys: &[f64], w: usize) -> Vec<usize> {
    extrema(ys, w, |a, b| a < b)
}

/// Indices `i` where `ys[i]` is the strict maximum of `ys[i-w..=i+w]`.
pub fn local_maxima(ys: &[f64], w: usize) -> Vec<usize> {
    extrema(ys, w, |a, b| a > b)
}

fn extrema(ys: &[f64], w: usize, better: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    let w = w.max(1);
    let n = ys.len();
    (1..n.saturating_sub(1))
        .filter(|&i| {
            let y = ys[i];
            y.is_finite()
                && (i.saturating_sub(w)..(i + w + 1).min(n)).all(|j| j == i || (ys[j].is_finite() && better(y, ys[j])))
        })
        .collect()
}

/// Value in `candidates` closest to `target`.
pub fn nearest(candidates: &[f64], target: f64) -> Option<f64> {
    candidates.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

/// `max - min` over the finite entries of `ys`.
pub fn peak_to_peak(ys: &[f64]) -> f64 {
    let (lo, hi) = ys
        .iter()
        .filter(|y| y.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    hi - lo
}
