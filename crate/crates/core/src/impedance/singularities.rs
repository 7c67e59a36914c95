use serde::{Deserialize, Serialize};

use super::{Impedance, ImpedanceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SingularityKind {
    Pole,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Singularity {
    pub frequency: f64,
    pub kind: SingularityKind,
}

/// Frequency grid spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepScale {
    #[default]
    Log,
    Linear,
}

impl SweepScale {
    /// `points` frequencies from `f_lo` to `f_hi` inclusive.
    pub fn grid(self, f_lo: f64, f_hi: f64, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![f_lo];
        }
        let last = (points - 1) as f64;
        (0..points)
            .map(|i| {
                let t = i as f64 / last;
                match self {
                    SweepScale::Log => (f_lo.ln() + t * (f_hi.ln() - f_lo.ln())).exp(),
                    SweepScale::Linear => f_lo + t * (f_hi - f_lo),
                }
            })
            .collect()
    }
}

const LOSSLESS_TOL: f64 = 1e-9;
const LOSSY_PROMINENCE: f64 = 10.0;

/// Locates poles and zeros of a one-port impedance between `f_lo` and `f_hi`.
///
/// The function is sampled on a logarithmic grid of `grid` points. If every
/// sample is purely reactive the reactance sign changes are refined by
/// bisection (`−→+` is a zero, `+→−` is a pole). Otherwise local extrema of
/// `|Z|` with at least 10× prominence are reported, refined by golden-section
/// search. No crossings yields an empty list.
pub fn find_poles_zeros<F>(z: F, f_lo: f64, f_hi: f64, grid: usize) -> Result<Vec<Singularity>, ImpedanceError>
where
    F: Fn(f64) -> Result<Impedance, ImpedanceError>,
{
    if !(f_lo > 0.0 && f_hi > f_lo && f_hi.is_finite()) {
        return Err(ImpedanceError::NonPositiveFrequency(f_lo.min(f_hi)));
    }
    let grid = grid.max(100);
    let freqs = SweepScale::Log.grid(f_lo, f_hi, grid);
    let samples = freqs.iter().map(|&f| z(f)).collect::<Result<Vec<_>, _>>()?;

    let lossless = samples.iter().all(|s| match s {
        Impedance::Pole => true,
        Impedance::Finite(c) => c.re.abs() <= LOSSLESS_TOL * c.norm(),
    });
    let mut found = if lossless {
        lossless_scan(&z, &freqs, &samples)?
    } else {
        lossy_scan(&z, &freqs, &samples)?
    };
    found.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    found.dedup_by(|b, a| a.kind == b.kind && (b.frequency / a.frequency - 1.0).abs() < 1e-9);
    Ok(found)
}

#[derive(Clone, Copy, PartialEq)]
enum Sign {
    Pole,
    Zero,
    Pos,
    Neg,
}

fn sign_of(z: Impedance) -> Sign {
    match z {
        Impedance::Pole => Sign::Pole,
        Impedance::Finite(c) if c.im == 0.0 => Sign::Zero,
        Impedance::Finite(c) if c.im > 0.0 => Sign::Pos,
        Impedance::Finite(_) => Sign::Neg,
    }
}

fn lossless_scan<F>(z: &F, freqs: &[f64], samples: &[Impedance]) -> Result<Vec<Singularity>, ImpedanceError>
where
    F: Fn(f64) -> Result<Impedance, ImpedanceError>,
{
    let mut out = Vec::new();
    let signs: Vec<Sign> = samples.iter().map(|&s| sign_of(s)).collect();
    for (i, s) in signs.iter().enumerate() {
        match s {
            Sign::Pole => out.push(Singularity {
                frequency: freqs[i],
                kind: SingularityKind::Pole,
            }),
            Sign::Zero => out.push(Singularity {
                frequency: freqs[i],
                kind: SingularityKind::Zero,
            }),
            _ => {}
        }
    }
    for i in 0..freqs.len() - 1 {
        let kind = match (signs[i], signs[i + 1]) {
            (Sign::Neg, Sign::Pos) => SingularityKind::Zero,
            (Sign::Pos, Sign::Neg) => SingularityKind::Pole,
            _ => continue,
        };
        out.push(bisect(z, freqs[i], freqs[i + 1], signs[i], kind)?);
    }
    Ok(out)
}

fn bisect<F>(
    z: &F,
    mut lo: f64,
    mut hi: f64,
    lo_sign: Sign,
    kind: SingularityKind,
) -> Result<Singularity, ImpedanceError>
where
    F: Fn(f64) -> Result<Impedance, ImpedanceError>,
{
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi || hi / lo - 1.0 < 1e-15 {
            break;
        }
        match sign_of(z(mid)?) {
            Sign::Pole if kind == SingularityKind::Pole => return Ok(Singularity { frequency: mid, kind }),
            Sign::Zero if kind == SingularityKind::Zero => return Ok(Singularity { frequency: mid, kind }),
            s if s == lo_sign => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(Singularity {
        frequency: (lo * hi).sqrt(),
        kind,
    })
}

/// Ratio of a peak to its key col, computed on `values`.
fn prominence(values: &[f64], i: usize) -> f64 {
    let peak = values[i];
    let mut left = peak;
    for &v in values[..i].iter().rev() {
        if v > peak {
            break;
        }
        left = left.min(v);
    }
    let mut right = peak;
    for &v in &values[i + 1..] {
        if v > peak {
            break;
        }
        right = right.min(v);
    }
    let col = left.max(right);
    if col <= 0.0 {
        f64::INFINITY
    } else {
        peak / col
    }
}

fn lossy_scan<F>(z: &F, freqs: &[f64], samples: &[Impedance]) -> Result<Vec<Singularity>, ImpedanceError>
where
    F: Fn(f64) -> Result<Impedance, ImpedanceError>,
{
    let mags: Vec<f64> = samples.iter().map(|s| s.norm()).collect();
    let inv: Vec<f64> = mags
        .iter()
        .map(|m| if *m == 0.0 { f64::INFINITY } else { 1.0 / m })
        .collect();
    let mut out = Vec::new();
    for i in 1..mags.len() - 1 {
        for (values, kind) in [(&mags, SingularityKind::Pole), (&inv, SingularityKind::Zero)] {
            let v = values[i];
            if v > values[i - 1] && v >= values[i + 1] && prominence(values, i) >= LOSSY_PROMINENCE {
                let sign = if kind == SingularityKind::Pole { 1.0 } else { -1.0 };
                let f = golden_max(|f| z(f).map(|v| sign * v.norm().ln()), freqs[i - 1], freqs[i + 1])?;
                out.push(Singularity { frequency: f, kind });
            }
        }
    }
    Ok(out)
}

/// Golden-section maximization of `g` over `[lo, hi]` in log-frequency.
fn golden_max<G>(g: G, lo: f64, hi: f64) -> Result<f64, ImpedanceError>
where
    G: Fn(f64) -> Result<f64, ImpedanceError>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut gc = g(c.exp())?;
    let mut gd = g(d.exp())?;
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c.exp())?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d.exp())?;
        }
    }
    Ok(((a + b) / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impedance::Network;

    #[test]
    fn parallel_lc_has_one_pole() {
        let (l, c) = (1.33e-6, 7.64e-12);
        let net = Network::parallel(vec![Network::inductor(l).unwrap(), Network::capacitor(c).unwrap()]);
        let found = find_poles_zeros(|f| net.impedance(f), 1e6, 1e9, 400).unwrap();
        let f0 = 1.0 / (2.0 * std::f64::consts::PI * (l * c).sqrt());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].kind, SingularityKind::Pole);
        assert!((found[0].frequency / f0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_inductor_has_none() {
        let net = Network::inductor(1e-6).unwrap();
        assert!(find_poles_zeros(|f| net.impedance(f), 1e3, 1e9, 200)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn series_lc_has_one_zero() {
        let net = Network::series(vec![
            Network::inductor(1e-6).unwrap(),
            Network::capacitor(1e-9).unwrap(),
        ]);
        let found = find_poles_zeros(|f| net.impedance(f), 1e5, 1e8, 200).unwrap();
        let f0 = 1.0 / (2.0 * std::f64::consts::PI * (1e-15f64).sqrt());
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].kind, SingularityKind::Zero);
        assert!((found[0].frequency / f0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lossy_tank_peak_found_by_extrema() {
        let l = Network::Element(
            crate::impedance::ReactiveElement::inductor(1e-6)
                .unwrap()
                .with_series_loss(0.5)
                .unwrap(),
        );
        let net = Network::parallel(vec![l, Network::capacitor(100e-12).unwrap()]);
        let found = find_poles_zeros(|f| net.impedance(f), 1e6, 1e8, 300).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].kind, SingularityKind::Pole);
        let f0 = 1.0 / (2.0 * std::f64::consts::PI * (1e-16f64).sqrt());
        assert!((found[0].frequency / f0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_inverted_range() {
        let net = Network::inductor(1e-6).unwrap();
        assert!(find_poles_zeros(|f| net.impedance(f), 1e6, 1e3, 200).is_err());
    }
}
