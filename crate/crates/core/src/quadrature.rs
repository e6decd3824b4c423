//! Gauss–Legendre rules.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed 16-point rule mapped to `[0, 1]`: (nodes, weights).
pub fn gl16_unit() -> &'static ([f64; 16], [f64; 16]) {
    static RULE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(16);
        let mut xs = [0.0; 16];
        let mut ws = [0.0; 16];
        for i in 0..16 {
            xs[i] = 0.5 * (x[i] + 1.0);
            ws[i] = 0.5 * w[i];
        }
        (xs, ws)
    })
}

/// `∫_a^b f` with the 16-point rule on a single panel.
pub fn gl16<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let (xs, ws) = gl16_unit();
    let h = b - a;
    let mut s = 0.0;
    for i in 0..16 {
        s += ws[i] * f(a + h * xs[i]);
    }
    s * h
}

/// Panel edges splitting `[a, b]` (with `0 < a < b`) at powers of two times
/// `a`, so that each panel spans at most one octave.
pub fn octave_panels(a: f64, b: f64) -> Vec<f64> {
    debug_assert!(a > 0.0 && b > a);
    let mut edges = vec![a];
    let mut x = a;
    while x * 2.0 < b {
        x *= 2.0;
        edges.push(x);
    }
    edges.push(b);
    edges
}

/// `∫_a^b f` over octave panels, 16 points each.
pub fn gl16_octaves<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let e = octave_panels(a, b);
    e.windows(2).map(|w| gl16(w[0], w[1], &mut f)).sum()
}
