use super::IlluminanceMap;

pub const OTSU_BINS: usize = 256;

/// Otsu threshold over a 256-bin histogram spanning `[0, max(1, data max)]`.
///
/// Returns the centre of the last bin of the dark class. Ties resolve to the
/// lowest threshold; a map occupying a single bin returns that bin's centre.
pub fn otsu_threshold(ill: &IlluminanceMap) -> f64 {
    let top = ill.max().max(1.0);
    let bin_width = top / OTSU_BINS as f64;
    let center = |i: usize| (i as f64 + 0.5) * bin_width;

    let mut hist = [0u64; OTSU_BINS];
    for &v in ill.data() {
        let idx = ((v.max(0.0) / top) * OTSU_BINS as f64).floor() as usize;
        hist[idx.min(OTSU_BINS - 1)] += 1;
    }

    let total: u64 = hist.iter().sum();
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 * center(i))
        .sum();

    let mut best: Option<(usize, f64)> = None;
    let (mut w0, mut sum0) = (0u64, 0.0);
    for (t, &count) in hist.iter().enumerate() {
        w0 += count;
        sum0 += count as f64 * center(t);
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        let mu0 = sum0 / w0 as f64;
        let mu1 = (total_sum - sum0) / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (mu0 - mu1).powi(2);
        if best.is_none_or(|(_, b)| var > b) {
            best = Some((t, var));
        }
    }

    match best {
        Some((t, _)) => center(t),
        // every sample in one bin
        None => center(hist.iter().position(|&c| c > 0).unwrap_or(0)),
    }
}
