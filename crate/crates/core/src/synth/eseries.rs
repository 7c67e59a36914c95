use serde::{Deserialize, Serialize};

/// Standard preferred-number series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ESeries {
    E6,
    #[default]
    E12,
    E24,
}

const E6: &[u32] = &[10, 15, 22, 33, 47, 68];
const E12: &[u32] = &[10, 12, 15, 18, 22, 27, 33, 39, 47, 56, 68, 82];
const E24: &[u32] = &[
    10, 11, 12, 13, 15, 16, 18, 20, 22, 24, 27, 30, 33, 36, 39, 43, 47, 51, 56, 62, 68, 75, 82, 91,
];

impl ESeries {
    /// Two-digit mantissas of one decade.
    pub fn mantissas(self) -> &'static [u32] {
        match self {
            ESeries::E6 => E6,
            ESeries::E12 => E12,
            ESeries::E24 => E24,
        }
    }

    /// Largest ratio between adjacent members, including the wrap to the next decade.
    pub fn max_step(self) -> f64 {
        let m = self.mantissas();
        let mut worst: f64 = 100.0 / *m.last().unwrap() as f64;
        for w in m.windows(2) {
            worst = worst.max(w[1] as f64 / w[0] as f64);
        }
        worst
    }

    pub fn contains(self, value: f64) -> bool {
        value > 0.0 && snap_eseries(value, self) == value
    }

    /// Series members immediately at or below and at or above `value`.
    pub fn bracket(self, value: f64) -> (f64, f64) {
        let cands = candidates(value, self);
        let lower = cands.iter().copied().filter(|c| *c <= value).fold(f64::NAN, f64::max);
        let upper = cands.iter().copied().filter(|c| *c >= value).fold(f64::NAN, f64::min);
        (lower, upper)
    }
}

/// `m · 10^e`, computed so each decimal member has a single bit pattern.
fn decimal(m: u32, e: i32) -> f64 {
    if e >= 0 {
        m as f64 * 10f64.powi(e)
    } else {
        m as f64 / 10f64.powi(-e)
    }
}

fn candidates(value: f64, series: ESeries) -> Vec<f64> {
    let d = value.log10().floor() as i32;
    let mut out = Vec::new();
    for e in (d - 2)..=(d + 1) {
        for &m in series.mantissas() {
            out.push(decimal(m, e));
        }
    }
    out
}

/// Nearest member of `series` by ratio; exact ties go to the smaller value.
pub fn snap_eseries(value: f64, series: ESeries) -> f64 {
    assert!(value > 0.0 && value.is_finite(), "snap_eseries needs a positive value");
    let mut best = f64::NAN;
    let mut best_dist = f64::INFINITY;
    for c in candidates(value, series) {
        let dist = (c / value).ln().abs();
        if dist < best_dist || (dist == best_dist && c < best) {
            best = c;
            best_dist = dist;
        }
    }
    best
}

/// Largest member of `series` not exceeding `value`.
pub fn floor_eseries(value: f64, series: ESeries) -> f64 {
    let snapped = snap_eseries(value, series);
    if snapped <= value * (1.0 + 1e-12) {
        snapped
    } else {
        series.bracket(value).0
    }
}

/// How exact component values are turned into purchasable parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnapPolicy {
    /// Every inductor and capacitor goes to the nearest series member.
    Nearest,
    /// Chip-catalog style: inductors round down to the series, capacitors go
    /// to the nearest member, and capacitors under 10 pF use 1 pF steps.
    #[default]
    Catalog,
}

/// Inductor or capacitor, for snapping purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartKind {
    Inductor,
    Capacitor,
}

impl SnapPolicy {
    pub fn snap(self, kind: PartKind, value: f64, series: ESeries) -> f64 {
        match (self, kind) {
            (SnapPolicy::Nearest, _) => snap_eseries(value, series),
            (SnapPolicy::Catalog, PartKind::Inductor) => floor_eseries(value, series),
            (SnapPolicy::Catalog, PartKind::Capacitor) if value < 9.5e-12 => (value / 1e-12).round().max(1.0) / 1e12,
            (SnapPolicy::Catalog, PartKind::Capacitor) => snap_eseries(value, series),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        assert_eq!(snap_eseries(53.6e-12, ESeries::E12), 56e-12);
        assert_eq!(snap_eseries(1.33e-6, ESeries::E12), 1.2e-6);
        assert_eq!(snap_eseries(4.7e-6, ESeries::E12), 4.7e-6);
        assert_eq!(snap_eseries(57.3e-12, ESeries::E12), 56e-12);
    }

    #[test]
    fn tie_goes_down() {
        let mid = (1.0f64 * 1.2).sqrt();
        assert_eq!(snap_eseries(mid, ESeries::E12), 1.0);
    }

    #[test]
    fn catalog_policy() {
        let p = SnapPolicy::Catalog;
        assert_eq!(p.snap(PartKind::Inductor, 1.10e-6, ESeries::E12), 1.0e-6);
        assert_eq!(p.snap(PartKind::Inductor, 0.267e-6, ESeries::E12), 0.22e-6);
        assert_eq!(p.snap(PartKind::Capacitor, 7.64e-12, ESeries::E12), 8e-12);
        assert_eq!(p.snap(PartKind::Inductor, 4.7e-6, ESeries::E12), 4.7e-6);
    }

    #[test]
    fn decade_edges() {
        assert_eq!(snap_eseries(9.9e-6, ESeries::E12), 10e-6);
        assert_eq!(snap_eseries(0.99, ESeries::E6), 1.0);
        assert_eq!(snap_eseries(1000.0, ESeries::E24), 1000.0);
    }

    #[test]
    fn max_steps() {
        assert!((ESeries::E12.max_step() - 1.25).abs() < 1e-12);
        assert!((ESeries::E6.max_step() - 1.5).abs() < 1e-12);
    }
}
