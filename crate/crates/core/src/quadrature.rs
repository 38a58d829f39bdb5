//! Symmetric quadrature on the reference triangle and Gauss-Legendre rules
//! on `[0, 1]`.

/// Points are reference coordinates `(xi, eta)`; weights sum to the
/// reference area `1/2`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Smallest tabulated rule exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0..=2 => symmetric(2, &[Orbit::Two(1.0 / 3.0, 1.0 / 6.0)]),
            3 | 4 => symmetric(
                4,
                &[
                    Orbit::Two(0.223_381_589_678_011_465_70, 0.445_948_490_915_964_886_32),
                    Orbit::Two(0.109_951_743_655_321_867_64, 0.091_576_213_509_770_743_46),
                ],
            ),
            _ => symmetric(
                6,
                &[
                    Orbit::Two(0.116_786_275_726_379_366_03, 0.249_286_745_170_910_421_29),
                    Orbit::Two(0.050_844_906_370_206_816_92, 0.063_089_014_491_502_228_34),
                    Orbit::Six(
                        0.082_851_075_618_373_575_19,
                        [0.053_145_049_844_816_947_35, 0.310_352_451_033_784_405_42],
                    ),
                ],
            ),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

enum Orbit {
    /// Weight (relative to area) and `a` for the orbit of `(a, a, 1 - 2a)`.
    /// `a = 1/3` collapses to the centroid.
    Two(f64, f64),
    /// Weight and `(a, b)` for the six permutations of `(a, b, 1 - a - b)`.
    Six(f64, [f64; 2]),
}

fn symmetric(degree: usize, orbits: &[Orbit]) -> TriangleRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for orbit in orbits {
        match *orbit {
            Orbit::Two(w, a) => {
                if (a - 1.0 / 3.0).abs() < 1e-15 {
                    points.push([a, a]);
                    weights.push(0.5 * w);
                } else {
                    let b = 1.0 - 2.0 * a;
                    for p in [[a, a], [a, b], [b, a]] {
                        points.push(p);
                        weights.push(0.5 * w);
                    }
                }
            }
            Orbit::Six(w, [a, b]) => {
                let c = 1.0 - a - b;
                for p in [[a, b], [b, a], [a, c], [c, a], [b, c], [c, b]] {
                    points.push(p);
                    weights.push(0.5 * w);
                }
            }
        }
    }
    TriangleRule { points, weights, degree }
}

/// Five-point Gauss-Legendre rule mapped to `[0, 1]` (exact to degree 9).
pub fn gauss_legendre_unit() -> ([f64; 5], [f64; 5]) {
    const X: [f64; 5] = [
        -0.906_179_845_938_663_992_8,
        -0.538_469_310_105_683_091_0,
        0.0,
        0.538_469_310_105_683_091_0,
        0.906_179_845_938_663_992_8,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189_087_5,
        0.478_628_670_499_366_468_0,
        0.568_888_888_888_888_888_9,
        0.478_628_670_499_366_468_0,
        0.236_926_885_056_189_087_5,
    ];
    (X.map(|x| 0.5 * (x + 1.0)), W.map(|w| 0.5 * w))
}
