use num_complex::Complex64;
use serde::Serialize;

use crate::impedance::{parallel_all, Impedance};

/// Usable-depth threshold: a ratio of 2 is about 6 dB.
pub const DEFAULT_MIN_DEPTH_DB: f64 = 6.0;

/// Amplitude ratio in dB.
pub fn depth_db(ratio: f64) -> f64 {
    20.0 * ratio.log10()
}

fn divider(z: Complex64, z_p: Complex64) -> f64 {
    let total = z_p + z;
    if total.norm() == 0.0 {
        0.0
    } else {
        (z / total).norm()
    }
}

/// `V1^H / V1^L` for a single filter fed through `z_p`.
///
/// `z_p = 0` means the source clamps the line, so the ratio is exactly 1.
pub fn modulation_ratio(z_h: Complex64, z_l: Complex64, z_p: Complex64) -> f64 {
    if z_p.norm() == 0.0 {
        return 1.0;
    }
    divider(z_h, z_p) / divider(z_l, z_p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultinodeRatio {
    /// Joint-impedance ratio with one node low and `n − 1` high.
    pub exact: f64,
    /// `|1 + z_h/(n·z_l)|`.
    pub approx: f64,
}

fn joint(z_h: Complex64, z_l: Complex64, n: usize) -> (Complex64, Complex64) {
    let nf = n as f64;
    let high = z_h / nf;
    let low = if n == 1 {
        z_l
    } else {
        parallel_all([Impedance::Finite(z_l), Impedance::Finite(z_h / (nf - 1.0))])
            .finite()
            .unwrap_or(Complex64::new(f64::INFINITY, 0.0))
    };
    (high, low)
}

/// Ratio of the all-high joint impedance to the joint impedance with one node
/// low, for `n` identical nodes on an ideal-current-fed line.
pub fn multinode_ratio(z_h: Complex64, z_l: Complex64, n: usize) -> MultinodeRatio {
    assert!(n >= 1, "node count must be at least 1");
    let (high, low) = joint(z_h, z_l, n);
    MultinodeRatio {
        exact: high.norm() / low.norm(),
        approx: (1.0 + z_h / (n as f64 * z_l)).norm(),
    }
}

/// As [`multinode_ratio`] but with the carrier fed through `z_p`.
pub fn multinode_ratio_with_pullup(z_h: Complex64, z_l: Complex64, z_p: Complex64, n: usize) -> f64 {
    let (high, low) = joint(z_h, z_l, n);
    modulation_ratio(high, low, z_p)
}

/// Largest `n` whose joint ratio still gives `min_depth_db`; 0 if none does.
pub fn n_max(z_h: Complex64, z_l: Complex64, min_depth_db: f64) -> usize {
    let single = (z_h.norm() / z_l.norm()).max(1.0);
    let limit = ((single * 10.0).ceil() as usize).clamp(1000, 10_000_000);
    let mut best = 0;
    for n in 1..=limit {
        if depth_db(multinode_ratio(z_h, z_l, n).exact) >= min_depth_db {
            best = n;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetResult {
    pub ratio_single: f64,
    pub depth_single_db: f64,
    /// `(n, ratio)` through the pull-up, non-increasing for resistive loads.
    pub ratio_n: Vec<(usize, f64)>,
    pub min_depth_db: f64,
    pub n_max: usize,
}

/// Single-node and multi-node budget for one filter on one carrier.
pub fn budget(z_h: Complex64, z_l: Complex64, z_p: Complex64, n_hi: usize, min_depth_db: f64) -> BudgetResult {
    let ratio_single = modulation_ratio(z_h, z_l, z_p);
    let ratio_n = (1..=n_hi.max(1))
        .map(|n| (n, multinode_ratio_with_pullup(z_h, z_l, z_p, n)))
        .collect();
    BudgetResult {
        ratio_single,
        depth_single_db: depth_db(ratio_single),
        ratio_n,
        min_depth_db,
        n_max: n_max(z_h, z_l, min_depth_db),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn clamped_line_has_no_modulation() {
        assert_eq!(modulation_ratio(r(5e3), r(57.0), r(0.0)), 1.0);
    }

    #[test]
    fn large_pullup_tends_to_impedance_ratio() {
        let v = modulation_ratio(r(44.0), r(1.0), r(44e6));
        assert!((v / 44.0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hand_evaluated_divider() {
        // (5000/7000) / (57/2057)
        let expect = (5000.0 / 7000.0) / (57.0 / 2057.0);
        let v = modulation_ratio(r(5e3), r(57.0), r(2e3));
        assert!((v / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resistive_multinode_closed_form() {
        for (ratio, n) in [(10.0, 10usize), (44.0, 44), (87.0, 87), (200.0, 200), (44.0, 3)] {
            let m = multinode_ratio(r(ratio), r(1.0), n);
            let expect = 1.0 + (ratio - 1.0) / n as f64;
            assert!((m.exact / expect - 1.0).abs() < 1e-12);
            assert!((m.approx - (1.0 + ratio / n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn n_max_examples() {
        assert_eq!(n_max(r(44.0), r(1.0), 6.0), 43);
        assert_eq!(n_max(r(87.0), r(1.0), 6.0), 86);
        assert_eq!(n_max(r(3.0), r(1.0), 20.0), 0);
    }

    #[test]
    fn budget_first_row_matches_single() {
        let b = budget(r(5e3), r(57.0), Complex64::new(2e3, 53.0), 10, 6.0);
        assert_eq!(b.ratio_n[0].1, b.ratio_single);
        assert!(b.ratio_n.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}
