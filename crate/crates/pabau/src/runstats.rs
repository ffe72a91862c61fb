//! Run accounting: method counts, wall time, and peak memory.

use pabau_core::Label;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub total_methods: usize,
    /// Methods with ≥ 1 assigned label.
    pub biometric_methods: usize,
    pub wall_time_s: f64,
    pub peak_memory_mb: Option<f64>,
    /// Indexed by [`Label::index`].
    pub per_label_counts: [usize; 16],
}

/// Kernel-tracked peak resident set (VmHWM), so no sampling thread is
/// needed. `None` off Linux or when /proc is unavailable.
pub fn peak_rss_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    for line in status.lines() {
        if let Some(rest) = line.strip_prefix("VmHWM:") {
            let kb: f64 = rest.trim().trim_end_matches("kB").trim().parse().ok()?;
            return Some(kb / 1024.0);
        }
    }
    None
}

/// Per-label count table plus the runtime/memory summary.
pub fn render_stats(stats: &RunStats) -> String {
    let mut out = String::from("Per-label method counts\n");
    let name_w = Label::ALL.iter().map(|l| l.as_str().len()).max().unwrap();
    for l in Label::ALL {
        out.push_str(&format!(
            "  {:name_w$}  {}\n",
            l.as_str(),
            stats.per_label_counts[l.index()]
        ));
    }
    out.push_str(&format!(
        "\nMethods analyzed: {}\nMethods with labels: {}\nWall time: {:.2} s\n",
        stats.total_methods, stats.biometric_methods, stats.wall_time_s
    ));
    match stats.peak_memory_mb {
        Some(mb) => out.push_str(&format!("Peak memory: {mb:.2} MB\n")),
        None => out.push_str("Peak memory: unavailable\n"),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_rss_reads_on_linux() {
        let mb = peak_rss_mb();
        assert!(mb.is_some());
        assert!(mb.unwrap() > 0.0);
    }

    #[test]
    fn stats_render_all_labels() {
        let stats = RunStats { total_methods: 10, biometric_methods: 2, ..Default::default() };
        let text = render_stats(&stats);
        for l in Label::ALL {
            assert!(text.contains(l.as_str()));
        }
        assert!(text.contains("Methods analyzed: 10"));
    }
}
