//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex-valued
//! integrands on finite intervals and on the whole real line.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and work limit for the adaptive driver.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    /// Accepts the estimate when the error is below `rel` of the value
    /// (or below `abs` for values near zero).
    pub fn checked(self, rel: f64, abs: f64) -> Result<Self> {
        if self.error <= (rel * self.value.norm()).max(abs) {
            Ok(self)
        } else {
            Err(Error::Quadrature {
                value: self.value.norm(),
                error: self.error,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut fv1 = [Complex64::new(0.0, 0.0); 7];
    let mut fv2 = [Complex64::new(0.0, 0.0); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = (fc - mean).norm() * WGK[7];
    for j in 0..7 {
        resasc += ((fv1[j] - mean).norm() + (fv2[j] - mean).norm()) * WGK[j];
    }
    let scale = half.abs();
    let resabs = resabs * scale;
    let resasc = resasc * scale;
    let mut err = ((resk - resg) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Segment {
        a,
        b,
        value: resk * half,
        error: err,
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Estimate {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]` using the interior points
    /// as initial subdivision (peaks, kinks, known resonances).
    pub fn integrate_breaks<F: FnMut(f64) -> Complex64>(&self, mut f: F, points: &[f64]) -> Estimate {
        assert!(points.len() >= 2, "need at least one interval");
        let mut heap = BinaryHeap::new();
        let mut evaluations = 0;
        for w in points.windows(2) {
            if w[1] > w[0] {
                heap.push(kronrod(&mut f, w[0], w[1]));
                evaluations += 15;
            }
        }
        loop {
            let (value, error) = heap
                .iter()
                .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), s| (v + s.value, e + s.error));
            let target = self.abs_tol.max(self.rel_tol * value.norm());
            if error <= target || heap.len() >= self.max_intervals {
                return Estimate {
                    value,
                    error,
                    evaluations,
                };
            }
            let worst = heap.pop().expect("non-empty heap");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Interval cannot be split further in floating point.
                heap.push(worst);
                return Estimate {
                    value,
                    error,
                    evaluations,
                };
            }
            heap.push(kronrod(&mut f, worst.a, mid));
            heap.push(kronrod(&mut f, mid, worst.b));
            evaluations += 30;
        }
    }

    /// Integrates over the whole real line with `x = center + scale·u/(1−u²)`,
    /// `u ∈ (−1, 1)`. `scale` should be the width of the main feature.
    pub fn integrate_real_line<F: FnMut(f64) -> Complex64>(
        &self,
        mut f: F,
        center: f64,
        scale: f64,
    ) -> Estimate {
        let mapped = |u: f64| {
            let d = 1.0 - u * u;
            let x = center + scale * u / d;
            f(x) * (scale * (1.0 + u * u) / (d * d))
        };
        self.integrate_breaks(mapped, &[-1.0, -0.5, 0.0, 0.5, 1.0])
    }
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: FnMut(f64) -> f64>(q: &Quadrature, mut f: F, points: &[f64]) -> Estimate {
    q.integrate_breaks(|x| Complex64::new(f(x), 0.0), points)
}
