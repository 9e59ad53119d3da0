//! Complex exponential integrals used by the reservoir kernels.

use num_complex::Complex64;

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}

/// `E(a, t) = ∫₀ᵗ e^{a s} ds = (e^{a t} − 1)/a`, with `E(0, t) = t`.
pub fn exp_integral(a: Complex64, t: f64) -> Complex64 {
    let z = a * t;
    if z.norm() < 1e-300 {
        return Complex64::new(t, 0.0);
    }
    expm1(z) / a
}

/// `∫₀¹ u e^{z u} du = (e^z (z − 1) + 1)/z²`.
fn ramp_integral(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        // Σ zⁿ / (n! (n + 2))
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.5, 0.0);
        for n in 1..30 {
            term *= z / n as f64;
            sum += term / (n as f64 + 2.0);
        }
        sum
    } else {
        (z.exp() * (z - 1.0) + 1.0) / (z * z)
    }
}

/// Divided difference `(E(b, t) − E(c, t))/(b − c) = ∫₀ᵗ s·e^{m s}·sinhc(h s) ds`
/// with `m = (b + c)/2`, `h = (b − c)/2`; continuous through `b = c`.
pub fn exp_integral_divided(b: Complex64, c: Complex64, t: f64) -> Complex64 {
    let h = 0.5 * (b - c);
    if (h * t).norm() < 1e-5 {
        let m = 0.5 * (b + c);
        // sinhc(hs) = 1 + (hs)²/6 + …; the correction is below 1e-11 relative.
        return ramp_integral(m * t) * (t * t);
    }
    (exp_integral(b, t) - exp_integral(c, t)) / (b - c)
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(z) = ∫₁^∞ e^{−zs}/s ds` for `Re z ≥ 0`, `z ≠ 0`.
pub fn exp_integral_e1(z: Complex64) -> Complex64 {
    if z.norm() < 2.0 {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 1..80 {
            term *= -z / n as f64;
            let add = term / n as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // Continued fraction, modified Lentz.
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (d * an + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// `∫_W^∞ cos(a t)/a² da` for `W > 0`, `t ≥ 0`.
pub fn cosine_tail(w: f64, t: f64) -> f64 {
    let y = w * t.abs();
    if y == 0.0 {
        return 1.0 / w;
    }
    // ∫_W^∞ e^{iat}/a² da = E₂(−iWt)/W with E₂(z) = e^{−z} − z E₁(z).
    let z = Complex64::new(0.0, -y);
    let e2 = (-z).exp() - z * exp_integral_e1(z);
    e2.re / w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_small_and_large() {
        let z = Complex64::new(1e-12, -3e-12);
        let e = expm1(z);
        assert!((e - z).norm() < 1e-23);
        let z = Complex64::new(0.7, 2.1);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_integral_limits() {
        assert_eq!(exp_integral(Complex64::new(0.0, 0.0), 2.5), Complex64::new(2.5, 0.0));
        let a = Complex64::new(-0.3, 4.0);
        let t = 1.7;
        let direct = ((a * t).exp() - 1.0) / a;
        assert!((exp_integral(a, t) - direct).norm() < 1e-14);
    }

    #[test]
    fn divided_difference_is_continuous() {
        let c = Complex64::new(-0.2, 1.0);
        let t = 3.0;
        let near = exp_integral_divided(c + Complex64::new(0.0, 2e-6), c, t);
        let at = exp_integral_divided(c, c, t);
        assert!((near - at).norm() < 1e-5 * at.norm());
        let b = Complex64::new(0.0, -2.0);
        let direct = (exp_integral(b, t) - exp_integral(c, t)) / (b - c);
        assert!((exp_integral_divided(b, c, t) - direct).norm() < 1e-14);
    }

    #[test]
    fn cosine_tail_reference_values() {
        // cos(Wt)/W − t(π/2 − Si(Wt)), evaluated at 25 digits.
        let cases = [
            (1.0, 0.5, 0.338_738_107_514_457_75),
            (3.0, 0.7, -0.113_750_418_251_953_64),
            (40.0, 0.01, 0.011_283_176_229_636_889),
            (40.0, 2.0, 3.094_391_392_052_033e-4),
            (120.0, 7.3, -4.615_998_909_898_341e-6),
        ];
        for (w, t, want) in cases {
            let got = cosine_tail(w, t);
            assert!((got - want).abs() < 1e-13, "w={w} t={t}: {got} vs {want}");
        }
        assert_eq!(cosine_tail(2.0, 0.0), 0.5);
    }

    #[test]
    fn e1_branches_agree() {
        // Series and continued fraction overlap near |z| = 2.
        for y in [1.9, 2.1, 5.0] {
            let z = Complex64::new(0.0, y);
            let si = std::f64::consts::FRAC_PI_2 + exp_integral_e1(z).im;
            // Si(y) by Simpson on sin(u)/u.
            let n = 20000;
            let h = y / n as f64;
            let f = |u: f64| if u == 0.0 { 1.0 } else { u.sin() / u };
            let mut s = f(0.0) + f(y);
            for k in 1..n {
                s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            assert!((si - s * h / 3.0).abs() < 1e-10, "Si({y})");
        }
    }

    #[test]
    fn ramp_series_matches_closed_form() {
        for z in [Complex64::new(0.09, 0.02), Complex64::new(-0.05, 0.08)] {
            let closed = (z.exp() * (z - 1.0) + 1.0) / (z * z);
            assert!((ramp_integral(z) - closed).norm() < 1e-13);
        }
    }
}
