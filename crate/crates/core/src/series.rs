//! Partial Cesàro averages on a doubling checkpoint schedule, with a
//! Cauchy-tail convergence diagnostic.
//!
//! Limits are never claimed: a series reports its stabilized value together
//! with the size of the recent increments, and callers decide what to make
//! of it. On periodic systems the full-period entry IS the limit, exactly.

use std::fmt::Write as _;

use num_complex::Complex64;

/// Default window (in checkpoint steps) for the Cauchy-tail statistic.
pub const TAIL_WINDOW: usize = 4;

/// The doubling schedule `1, 2, 4, ..` capped at `n`, with `n` appended
/// when it is not itself a power of two.
pub fn doubling_checkpoints(n: u64) -> Vec<u64> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut c = 1u64;
    while c <= n {
        out.push(c);
        if c > n / 2 {
            break;
        }
        c *= 2;
    }
    if *out.last().unwrap() != n {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CesaroSeries {
    checkpoints: Vec<u64>,
    values: Vec<Complex64>,
    l2_norms: Vec<f64>,
    /// Distance between consecutive checkpoint averages (scalar modulus or
    /// `L^2` distance, depending on how the series was produced).
    deltas: Vec<f64>,
}

impl CesaroSeries {
    /// Series of scalar averages; deltas are moduli of increments.
    pub fn from_scalars(checkpoints: Vec<u64>, values: Vec<Complex64>) -> Self {
        assert_eq!(checkpoints.len(), values.len());
        assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));
        let l2_norms = values.iter().map(|v| v.norm()).collect();
        let deltas = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        CesaroSeries {
            checkpoints,
            values,
            l2_norms,
            deltas,
        }
    }

    /// Series of function-valued averages summarized by their space mean and
    /// `L^2` norm; `deltas` are the `L^2` distances between checkpoints.
    pub fn from_function_summaries(
        checkpoints: Vec<u64>,
        means: Vec<Complex64>,
        l2_norms: Vec<f64>,
        deltas: Vec<f64>,
    ) -> Self {
        assert_eq!(checkpoints.len(), means.len());
        assert_eq!(checkpoints.len(), l2_norms.len());
        assert_eq!(deltas.len(), checkpoints.len().saturating_sub(1));
        CesaroSeries {
            checkpoints,
            values: means,
            l2_norms,
            deltas,
        }
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn l2_norms(&self) -> &[f64] {
        &self.l2_norms
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn final_value(&self) -> Complex64 {
        *self.values.last().expect("series is nonempty")
    }

    pub fn final_l2(&self) -> f64 {
        *self.l2_norms.last().expect("series is nonempty")
    }

    /// Largest increment across the last `window` checkpoint steps
    /// (all steps if fewer are available). Zero for a one-point series.
    pub fn cauchy_tail(&self, window: usize) -> f64 {
        let take = window.min(self.deltas.len());
        self.deltas[self.deltas.len() - take..]
            .iter()
            .fold(0.0, |a, &b| a.max(b))
    }

    /// The running tail statistic: entry `j` is the sup of the (up to)
    /// `window` increments ending at checkpoint `j+1`.
    pub fn tail_sequence(&self, window: usize) -> Vec<f64> {
        (0..self.deltas.len())
            .map(|j| {
                let lo = (j + 1).saturating_sub(window);
                self.deltas[lo..=j].iter().fold(0.0f64, |a, &b| a.max(b))
            })
            .collect()
    }

    /// `N,re,im,abs` rows (orbit-average dump format).
    pub fn to_csv_birkhoff(&self) -> String {
        let mut out = String::from("N,re,im,abs\n");
        for (c, v) in self.checkpoints.iter().zip(&self.values) {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c,
                crate::fmt_f64(v.re),
                crate::fmt_f64(v.im),
                crate::fmt_f64(v.norm())
            );
        }
        out
    }

    /// `N,value_re,value_im,l2_norm,cauchy_tail` rows; the tail column holds
    /// the increment that produced the row (0 for the first row).
    pub fn to_csv_average(&self) -> String {
        let mut out = String::from("N,value_re,value_im,l2_norm,cauchy_tail\n");
        for (i, (c, v)) in self.checkpoints.iter().zip(&self.values).enumerate() {
            let tail = if i == 0 { 0.0 } else { self.deltas[i - 1] };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c,
                crate::fmt_f64(v.re),
                crate::fmt_f64(v.im),
                crate::fmt_f64(self.l2_norms[i]),
                crate::fmt_f64(tail)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints_double_and_cap() {
        assert_eq!(doubling_checkpoints(1), vec![1]);
        assert_eq!(doubling_checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(doubling_checkpoints(11), vec![1, 2, 4, 8, 11]);
    }

    #[test]
    fn tail_is_max_over_window() {
        let s = CesaroSeries::from_scalars(
            vec![1, 2, 4, 8],
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.25, 0.0),
                Complex64::new(1.26, 0.0),
            ],
        );
        assert!((s.cauchy_tail(2) - 0.25).abs() < 1e-15);
        assert!((s.cauchy_tail(10) - 1.0).abs() < 1e-15);
        assert_eq!(s.final_value(), Complex64::new(1.26, 0.0));
    }

    #[test]
    fn csv_shapes() {
        let s = CesaroSeries::from_scalars(vec![1, 2], vec![Complex64::ONE, Complex64::ONE]);
        let birkhoff = s.to_csv_birkhoff();
        assert!(birkhoff.starts_with("N,re,im,abs\n"));
        assert_eq!(birkhoff.lines().count(), 3);
        let avg = s.to_csv_average();
        assert!(avg.starts_with("N,value_re,value_im,l2_norm,cauchy_tail\n"));
    }
}
