//! Bivariate polynomials of total degree at most three in monomial form.

use std::ops::{Add, Mul};

pub const MAX_DEGREE: usize = 3;
const N_MONO: usize = 10;

/// Exponents `(a, b)` of `x^a y^b` in storage order.
pub const EXPONENTS: [(usize, usize); N_MONO] =
    [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

fn slot(a: usize, b: usize) -> usize {
    EXPONENTS.iter().position(|&e| e == (a, b)).expect("degree above three")
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poly(pub [f64; N_MONO]);

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(a: usize, b: usize, c: f64) -> Self {
        let mut p = Self::zero();
        p.0[slot(a, b)] = c;
        p
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        let c = &self.0;
        c[0] + x * (c[1] + x * (c[3] + x * c[6]) + y * (c[4] + x * c[7]))
            + y * (c[2] + y * (c[5] + y * c[9]) + x * y * c[8])
    }

    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for (i, &(a, b)) in EXPONENTS.iter().enumerate() {
            if a > 0 && self.0[i] != 0.0 {
                out.0[slot(a - 1, b)] += a as f64 * self.0[i];
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for (i, &(a, b)) in EXPONENTS.iter().enumerate() {
            if b > 0 && self.0[i] != 0.0 {
                out.0[slot(a, b - 1)] += b as f64 * self.0[i];
            }
        }
        out
    }

    /// Exact integral over the reference triangle `(0,0), (1,0), (0,1)`.
    pub fn integrate_reference(&self) -> f64 {
        EXPONENTS
            .iter()
            .zip(&self.0)
            .map(|(&(a, b), &c)| c * factorial(a) * factorial(b) / factorial(a + b + 2))
            .sum()
    }

    /// Restriction to the segment `p + s (q - p)` integrated against `w(s)`
    /// over `s in [0, 1]`, with Gauss-Legendre quadrature exact for the
    /// degrees used here.
    pub fn integrate_segment(&self, p: [f64; 2], q: [f64; 2], w: impl Fn(f64) -> f64) -> f64 {
        let (nodes, weights) = crate::quadrature::gauss_legendre_unit();
        nodes
            .iter()
            .zip(&weights)
            .map(|(&s, &ws)| ws * w(s) * self.eval([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]))
            .sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.map(|v| v * c))
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl Mul for Poly {
    type Output = Poly;
    /// Panics if the product exceeds degree three.
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for (i, &(a, b)) in EXPONENTS.iter().enumerate() {
            if self.0[i] == 0.0 {
                continue;
            }
            for (j, &(c, d)) in EXPONENTS.iter().enumerate() {
                if rhs.0[j] != 0.0 {
                    out.0[slot(a + c, b + d)] += self.0[i] * rhs.0[j];
                }
            }
        }
        out
    }
}

/// Vector-valued polynomial field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VecPoly(pub [Poly; 2]);

impl VecPoly {
    pub fn new(x: Poly, y: Poly) -> Self {
        Self([x, y])
    }

    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        [self.0[0].eval(p), self.0[1].eval(p)]
    }

    /// Scalar curl `d/dx v_y - d/dy v_x`.
    pub fn curl(&self) -> Poly {
        self.0[1].dx() + self.0[0].dy().scale(-1.0)
    }

    pub fn dot_const(&self, c: [f64; 2]) -> Poly {
        self.0[0].scale(c[0]) + self.0[1].scale(c[1])
    }

    pub fn scale(&self, c: f64) -> Self {
        Self([self.0[0].scale(c), self.0[1].scale(c)])
    }
}

impl Add for VecPoly {
    type Output = VecPoly;
    fn add(self, rhs: VecPoly) -> VecPoly {
        VecPoly([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

pub fn gradient(p: &Poly) -> VecPoly {
    VecPoly([p.dx(), p.dy()])
}
