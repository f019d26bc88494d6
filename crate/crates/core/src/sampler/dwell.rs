use std::time::Duration;

/// `t_0 (1 + (c - 1) m_i / max_j m_j)` rounded to the nanosecond and kept
/// within `[t_0, c t_0]`.
pub fn assign_dwell(mass: &[f64], t0: Duration, c: f64) -> Vec<Duration> {
    let max = mass.iter().copied().fold(0.0, f64::max);
    let base = t0.as_nanos() as f64;
    let top = (base * c).round();
    mass.iter()
        .map(|&m| {
            let ratio = if max > 0.0 { (m / max).clamp(0.0, 1.0) } else { 0.0 };
            let nanos = (base * (1.0 + (c - 1.0) * ratio)).round().clamp(base, top);
            Duration::from_nanos(nanos as u64)
        })
        .collect()
}
