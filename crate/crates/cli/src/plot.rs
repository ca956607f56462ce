//! Gnuplot-compatible whitespace-separated data emission.

use std::path::Path;

use anyhow::{bail, Result};

use rmtlab::stats::fmt_f64;
use rmtlab::tail::TailEstimate;

use crate::run::write_with_header;

/// Three columns: t, p_hat, confidence half-width.
pub fn emit_tail_plotdata(est: &TailEstimate, path: &Path, header: &str) -> Result<()> {
    if est.t_grid.is_empty() {
        bail!("nothing to plot");
    }
    let mut body = String::new();
    for k in 0..est.t_grid.len() {
        let half = 0.5 * (est.ci_high[k] - est.ci_low[k]);
        body.push_str(&format!(
            "{} {} {}\n",
            fmt_f64(est.t_grid[k]),
            fmt_f64(est.p_hat[k]),
            fmt_f64(half)
        ));
    }
    write_with_header(path, header, &body)
}

/// Radial histogram over [0, max modulus]: bin center, count, density.
pub fn emit_radial_histogram(moduli: &[f64], bins: usize, path: &Path, header: &str) -> Result<()> {
    if moduli.is_empty() || bins == 0 {
        bail!("nothing to plot");
    }
    let max = moduli.iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-12) * 1.0000001;
    let width = max / bins as f64;
    let mut counts = vec![0u64; bins];
    for &m in moduli {
        let idx = ((m / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = moduli.len() as f64;
    let mut body = String::new();
    for (i, &c) in counts.iter().enumerate() {
        let center = (i as f64 + 0.5) * width;
        body.push_str(&format!(
            "{} {} {}\n",
            fmt_f64(center),
            c,
            fmt_f64(c as f64 / (total * width))
        ));
    }
    write_with_header(path, header, &body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_plotdata_one_line_per_grid_point() {
        use rmtlab::ensembles::Ensemble;
        let smin: Vec<f64> = (0..50).map(|k| k as f64 / 50.0).collect();
        let grid: Vec<f64> = (1..=25).map(|k| k as f64 / 25.0).collect();
        let est = TailEstimate::from_smin_samples(grid, &smin, Ensemble::Unitary).unwrap();
        let path = std::env::temp_dir().join("rmtlab-plot-lines.dat");
        emit_tail_plotdata(&est, &path, "# test").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let data_lines = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(data_lines, 25);
    }

    #[test]
    fn histogram_rejects_empty() {
        let path = std::env::temp_dir().join("rmtlab-hist-test.dat");
        assert!(emit_radial_histogram(&[], 64, &path, "# test").is_err());
    }

    #[test]
    fn histogram_counts_sum() {
        let path = std::env::temp_dir().join("rmtlab-hist-sum.dat");
        let moduli = [0.1, 0.2, 0.2, 0.9, 1.4];
        emit_radial_histogram(&moduli, 8, &path, "# test").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# test"));
        let total: u64 = lines
            .map(|l| l.split_whitespace().nth(1).unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, 5);
    }
}
