//! Symmetric stable variates with characteristic function `exp(-|u|^alpha)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Chambers–Mallows–Stuck draw. `alpha = 2` gives `N(0, 2)`, `alpha = 1`
/// the standard Cauchy law.
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return std::f64::consts::SQRT_2 * z;
    }
    let v = std::f64::consts::PI * (rng.gen::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    let a = alpha;
    (a * v).sin() / v.cos().powf(1.0 / a) * (((1.0 - a) * v).cos() / w).powf((1.0 - a) / a)
}
