//! Reference computations that share nothing with the library internals.
#![allow(dead_code, clippy::excessive_precision, clippy::type_complexity)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod 7/15 on `[a, b]`. Returns `(value, error estimate)`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    if !(b > a) {
        return (0.0, 0.0);
    }
    let mut parts = vec![(a, b, gk15(f, a, b))];
    for _ in 0..2000 {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= rel_tol * total.abs() {
            break;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(f, lo, mid)));
        parts.push((mid, hi, gk15(f, mid, hi)));
    }
    let total: f64 = parts.iter().map(|p| p.2 .0).sum();
    let err: f64 = parts.iter().map(|p| p.2 .1).sum();
    (total, err)
}

/// Same, over consecutive pieces split at the given interior points.
pub fn integrate_pieces(f: &mut dyn FnMut(f64) -> f64, cuts: &[f64], rel_tol: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut e = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = integrate(f, w[0], w[1], rel_tol);
        v += a;
        e += b;
    }
    (v, e)
}

/// `∫_{A_1(q,r)} g(|x_1|, |x_2|) dx` with the disk `|x| <= rho` removed, by
/// nested adaptive quadrature over the positive quadrant times four.
pub fn shell_k1(g: &dyn Fn(f64, f64) -> f64, q: f64, r: f64, rho: f64) -> (f64, f64) {
    let lower_v = |u: f64| {
        if u < rho {
            (r - 1.0).max((rho * rho - u * u).sqrt())
        } else {
            r - 1.0
        }
    };
    let mut cuts = vec![q - 1.0];
    for c in [rho, (rho * rho - (r - 1.0).powi(2)).max(0.0).sqrt()] {
        if c > q - 1.0 && c < q {
            cuts.push(c);
        }
    }
    cuts.push(q);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut inner_err = 0.0;
    let mut outer = |u: f64| {
        let lo = lower_v(u);
        if lo >= r {
            return 0.0;
        }
        let (v, e) = integrate(&mut |v| g(u, v), lo, r, 1e-12);
        inner_err += e;
        v
    };
    let (v, e) = integrate_pieces(&mut outer, &cuts, 1e-11);
    (4.0 * v, 4.0 * e)
}

/// Graded one-dimensional mesh on `[-extent, extent]`: unit-width cells
/// subdivided `fine` times inside `[-core, core]`, then geometrically growing
/// cells out to `extent`.
pub fn graded_mesh(core: f64, extent: f64, fine: usize, growth: f64) -> Vec<f64> {
    let mut half = vec![0.0];
    let n_core = (core * fine as f64).ceil() as usize;
    let h = core / n_core as f64;
    for i in 1..=n_core {
        half.push(i as f64 * h);
    }
    let mut x = core;
    let mut w = h;
    while x < extent {
        w *= growth;
        x = (x + w).min(extent);
        half.push(x);
    }
    let mut mesh: Vec<f64> = half.iter().rev().map(|v| -v).collect();
    mesh.extend_from_slice(&half[1..]);
    mesh
}

/// `∫_{A_2(q,r)} f(x1) f(x2)` by a midpoint Riemann sum: `x1` over a graded
/// mesh of `[-extent, extent]^2`, `x2` over a uniform `m x m` mesh of each of
/// the four unit squares its band consists of. Disk exclusion by midpoint
/// test on both points.
pub fn shell_k2_riemann(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    q: f64,
    r: f64,
    extent: f64,
    fine: usize,
    m: usize,
) -> f64 {
    use rayon::prelude::*;
    let mesh = graded_mesh(q.max(r) + 4.0, extent, fine, 1.04);
    let cells: Vec<(f64, f64)> = mesh.windows(2).map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0])).collect();
    let h = 1.0 / m as f64;
    cells
        .par_iter()
        .map(|&(u, du)| {
            let mut acc = 0.0;
            for &(v, dv) in &cells {
                if u * u + v * v <= 1.0 {
                    continue;
                }
                let fx = f(u, v);
                let mut band = 0.0;
                // x2 with q-1 <= |u + y1| < q and r-1 <= |v + y2| < r
                for s1 in [q - 1.0, -q] {
                    for s2 in [r - 1.0, -r] {
                        for i in 0..m {
                            let y1 = s1 - u + (i as f64 + 0.5) * h;
                            for j in 0..m {
                                let y2 = s2 - v + (j as f64 + 0.5) * h;
                                if y1 * y1 + y2 * y2 > 1.0 {
                                    band += f(y1, y2);
                                }
                            }
                        }
                    }
                }
                acc += fx * band * h * h * du * dv;
            }
            acc
        })
        .sum()
}
