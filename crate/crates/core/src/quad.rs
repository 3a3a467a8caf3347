//! Gauss-Legendre rules on `[-1, 1]` as `(node, weight)` pairs.

use crate::vec3::{add, scale, Vec3};

pub const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

pub const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

/// Integrate a vector-valued function over `[a, b]`.
pub fn gauss_legendre(rule: &[(f64, f64)], a: f64, b: f64, f: impl Fn(f64) -> Vec3) -> Vec3 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = [0.0; 3];
    for &(t, w) in rule {
        acc = add(acc, scale(f(mid + half * t), w * half));
    }
    acc
}

/// Integrate a scalar function over `[a, b]`.
pub fn gauss_legendre_scalar(rule: &[(f64, f64)], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    rule.iter().map(|&(t, w)| w * half * f(mid + half * t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        // GL4 is exact to degree 7, GL8 to degree 15
        let i4 = gauss_legendre_scalar(&GL4, -1.0, 2.0, |x| x.powi(7) - 3.0 * x.powi(2));
        let exact4 = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((i4 - exact4).abs() < 1e-12);
        let i8 = gauss_legendre_scalar(&GL8, 0.0, 1.0, |x| x.powi(15));
        assert!((i8 - 1.0 / 16.0).abs() < 1e-14);
    }
}
