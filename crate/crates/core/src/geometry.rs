//! Planar geometry helpers.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Rotates by +90 degrees: `(x, y) -> (-y, x)`.
#[inline]
pub fn perp(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed area of the triangle `(a, b, c)`, positive when counter-clockwise.
#[inline]
pub fn signed_area(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    0.5 * cross(&(b - a), &(c - a))
}

/// Outward normal of the segment `a -> b` of a counter-clockwise loop, scaled by its length.
#[inline]
pub fn outward_scaled_normal(a: &Vec2, b: &Vec2) -> Vec2 {
    let d = b - a;
    Vec2::new(d.y, -d.x)
}

/// Area and centroid of a simple polygon given counter-clockwise.
pub fn polygon_area_centroid(pts: &[Vec2]) -> (f64, Vec2) {
    let n = pts.len();
    // shift to the first vertex to limit cancellation on far-off coordinates
    let o = pts[0];
    let mut area = 0.0;
    let mut c = Vec2::zeros();
    for k in 0..n {
        let p = pts[k] - o;
        let q = pts[(k + 1) % n] - o;
        let w = cross(&p, &q);
        area += w;
        c += (p + q) * w;
    }
    area *= 0.5;
    if area == 0.0 {
        return (0.0, o);
    }
    (area, o + c / (6.0 * area))
}

/// Largest distance between two vertices.
pub fn diameter(pts: &[Vec2]) -> f64 {
    let mut h: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            h = h.max((p - q).norm());
        }
    }
    h
}

/// Degree-4 symmetric Gauss rule on a triangle (barycentric coordinates, weights sum to one).
pub const TRIANGLE_RULE_4: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445_948_490_915_965;
    const B1: f64 = 0.108_103_018_168_070;
    const W1: f64 = 0.223_381_589_678_011;
    const A2: f64 = 0.091_576_213_509_771;
    const B2: f64 = 0.816_847_572_980_459;
    const W2: f64 = 0.109_951_743_655_322;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// Integrates `f` over the triangle `(a, b, c)` with [`TRIANGLE_RULE_4`].
pub fn integrate_triangle<T, F>(a: &Vec2, b: &Vec2, c: &Vec2, mut f: F) -> T
where
    T: core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T>,
    F: FnMut(Vec2) -> T,
{
    let area = signed_area(a, b, c).abs();
    let mut it = TRIANGLE_RULE_4.iter().map(|(l, w)| {
        let x = a * l[0] + b * l[1] + c * l[2];
        f(x) * (w * area)
    });
    let first = it.next().unwrap();
    it.fold(first, |acc, v| acc + v)
}

/// Simpson (3-point Gauss–Lobatto) weights on an edge.
pub const LOBATTO_WEIGHTS: [f64; 3] = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rule_is_exact_to_degree_four() {
        // reference triangle: int x^i y^j = i! j! / (i+j+2)!
        let a = Vec2::new(0.0, 0.0);
        let b = Vec2::new(1.0, 0.0);
        let c = Vec2::new(0.0, 1.0);
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for i in 0..=4u32 {
            for j in 0..=(4 - i) {
                let exact = fact(i) * fact(j) / fact(i + j + 2);
                let q = integrate_triangle(&a, &b, &c, |x| libm::pow(x.x, i as f64) * libm::pow(x.y, j as f64));
                assert!((q - exact).abs() < 1e-14, "x^{i} y^{j}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn square_area_and_centroid() {
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let (a, c) = polygon_area_centroid(&pts);
        assert!((a - 1.0).abs() < 1e-15);
        assert!((c - Vec2::new(0.5, 0.5)).norm() < 1e-15);
        assert!((diameter(&pts) - 2f64.sqrt()).abs() < 1e-15);
    }
}
