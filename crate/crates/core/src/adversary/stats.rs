use serde::Serialize;

use crate::game::InputLog;

/// Interarrival and keymask-distribution statistics of an input log.
/// Interarrival times are in frames; entropy is in bits per event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputStats {
    pub count: usize,
    pub mean: f64,
    /// Population variance; 0 with fewer than two events.
    pub variance: f64,
    pub min: u32,
    pub max: u32,
    pub entropy_bits: f64,
}

pub fn interarrival_stats(log: &InputLog) -> InputStats {
    let entries = log.entries();
    let gaps: Vec<u32> = entries.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let (mean, variance) = if gaps.is_empty() {
        (0.0, 0.0)
    } else {
        let n = gaps.len() as f64;
        let mean = gaps.iter().map(|&g| g as f64).sum::<f64>() / n;
        let var = gaps.iter().map(|&g| (g as f64 - mean).powi(2)).sum::<f64>() / n;
        (mean, var)
    };

    let mut counts = [0usize; 64];
    for &(_, k) in entries {
        counts[k.bits() as usize] += 1;
    }
    let total = entries.len() as f64;
    let entropy_bits = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0);

    InputStats {
        count: entries.len(),
        mean,
        variance,
        min: gaps.iter().copied().min().unwrap_or(0),
        max: gaps.iter().copied().max().unwrap_or(0),
        entropy_bits,
    }
}
