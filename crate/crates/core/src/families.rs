//! The two quadratic normal-form families and the named example maps.

use crate::{PlanarMap, Poly2};

/// `(y - x^2, (x - x0) - (y - y0)^2)`.
pub fn parabolic(x0: f64, y0: f64) -> PlanarMap {
    let p = Poly2::from_terms([(0, 1, 1.0), (2, 0, -1.0)]);
    let q = Poly2::from_terms([
        (1, 0, 1.0),
        (0, 0, -x0 - y0 * y0),
        (0, 2, -1.0),
        (0, 1, 2.0 * y0),
    ]);
    PlanarMap { p, q }
}

/// `(xy - 1, (x - x0)^2 - a (y - y0)^2 - 1)`.
pub fn hyperbolic(x0: f64, y0: f64, a: f64) -> PlanarMap {
    let p = Poly2::from_terms([(1, 1, 1.0), (0, 0, -1.0)]);
    let q = Poly2::from_terms([
        (2, 0, 1.0),
        (1, 0, -2.0 * x0),
        (0, 2, -a),
        (0, 1, 2.0 * a * y0),
        (0, 0, x0 * x0 - a * y0 * y0 - 1.0),
    ]);
    PlanarMap { p, q }
}

/// `(x^3 + 3xy - x, y)`.
pub fn cubic() -> PlanarMap {
    "x^3 + 3xy - x; y".parse().expect("static map")
}

/// `(x^4 - 3x^2 + xy + 2, y)`.
pub fn quartic() -> PlanarMap {
    "x^4 - 3x^2 + xy + 2; y".parse().expect("static map")
}

/// `(x^3 + xy - 2x + 2, y)`, whose Newton map has a super-attracting 2-cycle.
pub fn two_cycle() -> PlanarMap {
    "x^3 + xy - 2x + 2; y".parse().expect("static map")
}

/// Every named map with a short label, normal forms first.
pub fn named() -> Vec<(&'static str, PlanarMap)> {
    vec![
        ("parabolic(0,0)", parabolic(0.0, 0.0)),
        ("parabolic(-2,2)", parabolic(-2.0, 2.0)),
        ("parabolic(-1,2)", parabolic(-1.0, 2.0)),
        ("hyperbolic(5,0;1)", hyperbolic(5.0, 0.0, 1.0)),
        ("hyperbolic(3,-4;1)", hyperbolic(3.0, -4.0, 1.0)),
        ("cubic", cubic()),
        ("quartic", quartic()),
        ("two-cycle", two_cycle()),
    ]
}
