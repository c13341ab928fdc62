//! Deterministic low-discrepancy sampling of coordinate boxes.
//!
//! Points come from a Halton sequence (bases 2, 3, 5, 7), mapped into the
//! box and filtered by the chart's domain predicate. The sample set is a
//! pure function of (box, count, offset), so reports are reproducible.

use crate::chart::Chart;
use crate::expr::Params;

const BASES: [u64; 4] = [2, 3, 5, 7];

/// Radical-inverse function in the given base.
fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    while n > 0 {
        denom *= base as f64;
        inv += (n % base) as f64 / denom;
        n /= base;
    }
    inv
}

/// A per-coordinate sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub bounds: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(bounds: &[(f64, f64)]) -> Self {
        SampleBox {
            bounds: bounds.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.iter().any(|(lo, hi)| !(hi > lo))
    }

    fn point(&self, index: u64) -> Vec<f64> {
        self.bounds
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| lo + (hi - lo) * radical_inverse(index, BASES[i]))
            .collect()
    }
}

/// Deterministic samples inside the box that satisfy the chart domain.
/// Scanning starts at `offset + 1` and gives up after a bounded number of
/// rejected candidates.
pub fn sample_points(
    chart: &Chart,
    params: &Params,
    bx: &SampleBox,
    count: usize,
    offset: u64,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    if bx.is_empty() {
        return out;
    }
    let mut idx = offset + 1;
    let max_attempts = (count as u64) * 1000 + 1000;
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts {
        let p = bx.point(idx);
        if chart.contains(&p, params) {
            out.push(p);
        }
        idx += 1;
        attempts += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    #[test]
    fn deterministic_and_filtered() {
        let chart = Chart::new("c", &["x", "y"], &[])
            .with_domain("x", 0.25)
            .unwrap();
        let params = Params::new();
        let bx = SampleBox::new(&[(0.0, 1.0), (-1.0, 1.0)]);
        let a = sample_points(&chart, &params, &bx, 20, 0);
        let b = sample_points(&chart, &params, &bx, 20, 0);
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|p| p[0] > 0.25));
        let c = sample_points(&chart, &params, &bx, 20, 7);
        assert_ne!(a, c);
    }
}
