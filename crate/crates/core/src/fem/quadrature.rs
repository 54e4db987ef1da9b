use crate::scalar::Scalar;

/// Reference-element quadrature rules.
///
/// The triangle rule lives on `{(x, y) : x, y >= 0, x + y <= 1}` (measure
/// 1/2) and is exact for polynomials of total degree 4. The segment rule is
/// three-point Gauss on `[0, 1]`, exact to degree 5.
#[derive(Clone, Debug)]
pub struct Quadrature<T> {
    pub tri_points: Vec<[T; 2]>,
    pub tri_weights: Vec<T>,
    pub seg_points: Vec<T>,
    pub seg_weights: Vec<T>,
}

impl<T: Scalar> Quadrature<T> {
    pub fn new() -> Self {
        // Six-point symmetric rule (two orbits of three points).
        const A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const W1: f64 = 0.223_381_589_678_011_465_944_693_948_637;
        const A2: f64 = 0.091_576_213_509_770_743_459_571_463_402;
        const W2: f64 = 0.109_951_743_655_321_867_388_639_384_697;
        let b1 = 1.0 - 2.0 * A1;
        let b2 = 1.0 - 2.0 * A2;
        let tri = [
            ([A1, A1], W1),
            ([b1, A1], W1),
            ([A1, b1], W1),
            ([A2, A2], W2),
            ([b2, A2], W2),
            ([A2, b2], W2),
        ];
        let r = T::of(15.0).sqrt() / T::of(10.0);
        let half = T::of(0.5);
        Quadrature {
            tri_points: tri.iter().map(|(p, _)| [T::of(p[0]), T::of(p[1])]).collect(),
            tri_weights: tri.iter().map(|(_, w)| T::of(0.5 * w)).collect(),
            seg_points: vec![half - r, half, half + r],
            seg_weights: vec![T::of(5.0) / T::of(18.0), T::of(8.0) / T::of(18.0), T::of(5.0) / T::of(18.0)],
        }
    }
}

impl<T: Scalar> Default for Quadrature<T> {
    fn default() -> Self {
        Self::new()
    }
}
