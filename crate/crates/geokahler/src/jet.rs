//! Truncated Taylor ("jet") arithmetic of order <= 3 in up to four variables.
//!
//! A [`Jet`] carries a value together with dense symmetric tensors of first,
//! second and third partial derivatives with respect to the coordinates of a
//! chart. Arithmetic propagates derivatives exactly (Leibniz and chain
//! rules), so every derivative the engine uses is exact up to roundoff;
//! finite differences appear only as an independent test oracle.

use crate::error::GeomError;

pub const MAX_DIM: usize = 4;
pub const MAX_ORDER: usize = 3;

/// Value plus partial derivatives up to `order` in `dim` variables.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub dim: usize,
    pub order: usize,
    pub v: f64,
    pub d1: [f64; MAX_DIM],
    pub d2: [[f64; MAX_DIM]; MAX_DIM],
    pub d3: [[[f64; MAX_DIM]; MAX_DIM]; MAX_DIM],
}

impl Jet {
    pub fn constant(dim: usize, order: usize, v: f64) -> Self {
        debug_assert!(dim <= MAX_DIM && order <= MAX_ORDER);
        Jet {
            dim,
            order,
            v,
            d1: [0.0; MAX_DIM],
            d2: [[0.0; MAX_DIM]; MAX_DIM],
            d3: [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM],
        }
    }

    /// The coordinate function `x_i`, seeded with unit first derivative.
    pub fn variable(dim: usize, order: usize, v: f64, i: usize) -> Self {
        let mut j = Jet::constant(dim, order, v);
        if order >= 1 {
            j.d1[i] = 1.0;
        }
        j
    }

    pub fn check_order(order: usize) -> Result<(), GeomError> {
        if order > MAX_ORDER {
            Err(GeomError::OrderTooHigh(order))
        } else {
            Ok(())
        }
    }

    /// Jet of `d F / d x_i`, one order lower.
    pub fn shift(&self, i: usize) -> Jet {
        debug_assert!(self.order >= 1);
        let mut out = Jet::constant(self.dim, self.order - 1, self.d1[i]);
        if out.order >= 1 {
            for a in 0..self.dim {
                out.d1[a] = self.d2[i][a];
            }
        }
        if out.order >= 2 {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    out.d2[a][b] = self.d3[i][a][b];
                }
            }
        }
        out
    }

    /// Truncate to a lower order (drops higher derivatives).
    pub fn truncate(&self, order: usize) -> Jet {
        let mut out = *self;
        out.order = order.min(self.order);
        if out.order < 3 {
            out.d3 = [[[0.0; MAX_DIM]; MAX_DIM]; MAX_DIM];
        }
        if out.order < 2 {
            out.d2 = [[0.0; MAX_DIM]; MAX_DIM];
        }
        if out.order < 1 {
            out.d1 = [0.0; MAX_DIM];
        }
        out
    }

    fn binary_meta(a: &Jet, b: &Jet) -> (usize, usize) {
        debug_assert_eq!(a.dim, b.dim);
        (a.dim, a.order.min(b.order))
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let (dim, order) = Jet::binary_meta(self, o);
        let mut r = Jet::constant(dim, order, self.v + o.v);
        if order >= 1 {
            for i in 0..dim {
                r.d1[i] = self.d1[i] + o.d1[i];
                if order >= 2 {
                    for j in 0..dim {
                        r.d2[i][j] = self.d2[i][j] + o.d2[i][j];
                        if order >= 3 {
                            for k in 0..dim {
                                r.d3[i][j][k] = self.d3[i][j][k] + o.d3[i][j][k];
                            }
                        }
                    }
                }
            }
        }
        r
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut r = *self;
        r.v *= c;
        for i in 0..self.dim {
            r.d1[i] *= c;
            for j in 0..self.dim {
                r.d2[i][j] *= c;
                for k in 0..self.dim {
                    r.d3[i][j][k] *= c;
                }
            }
        }
        r
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut r = *self;
        r.v += c;
        r
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let (dim, order) = Jet::binary_meta(self, o);
        let mut r = Jet::constant(dim, order, self.v * o.v);
        if order >= 1 {
            for i in 0..dim {
                r.d1[i] = self.d1[i] * o.v + self.v * o.d1[i];
            }
        }
        if order >= 2 {
            for i in 0..dim {
                for j in 0..dim {
                    r.d2[i][j] = self.d2[i][j] * o.v
                        + self.d1[i] * o.d1[j]
                        + self.d1[j] * o.d1[i]
                        + self.v * o.d2[i][j];
                }
            }
        }
        if order >= 3 {
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        r.d3[i][j][k] = self.d3[i][j][k] * o.v
                            + self.d2[i][j] * o.d1[k]
                            + self.d2[i][k] * o.d1[j]
                            + self.d2[j][k] * o.d1[i]
                            + self.d1[i] * o.d2[j][k]
                            + self.d1[j] * o.d2[i][k]
                            + self.d1[k] * o.d2[i][j]
                            + self.v * o.d3[i][j][k];
                    }
                }
            }
        }
        r
    }

    pub fn div(&self, o: &Jet) -> Jet {
        self.mul(&o.recip())
    }

    /// Apply a scalar function with given derivatives at `self.v`.
    /// `ders = [f(v), f'(v), f''(v), f'''(v)]` (third-order Faa di Bruno).
    pub fn chain(&self, ders: [f64; 4]) -> Jet {
        let dim = self.dim;
        let order = self.order;
        let mut r = Jet::constant(dim, order, ders[0]);
        if order >= 1 {
            for i in 0..dim {
                r.d1[i] = ders[1] * self.d1[i];
            }
        }
        if order >= 2 {
            for i in 0..dim {
                for j in 0..dim {
                    r.d2[i][j] = ders[2] * self.d1[i] * self.d1[j] + ders[1] * self.d2[i][j];
                }
            }
        }
        if order >= 3 {
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        r.d3[i][j][k] = ders[3] * self.d1[i] * self.d1[j] * self.d1[k]
                            + ders[2]
                                * (self.d2[i][j] * self.d1[k]
                                    + self.d2[i][k] * self.d1[j]
                                    + self.d2[j][k] * self.d1[i])
                            + ders[1] * self.d3[i][j][k];
                    }
                }
            }
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let v = self.v;
        self.chain([1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v), -6.0 / (v * v * v * v)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain([c, -s, -c, s])
    }

    pub fn tan(&self) -> Jet {
        let t = self.v.tan();
        let s2 = 1.0 + t * t; // sec^2
        self.chain([t, s2, 2.0 * t * s2, s2 * (2.0 * s2 + 4.0 * t * t)])
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain([c, s, c, s])
    }

    pub fn exp(&self) -> Jet {
        let e = self.v.exp();
        self.chain([e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let v = self.v;
        self.chain([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.v.sqrt();
        self.chain([
            s,
            0.5 / s,
            -0.25 / (s * s * s),
            0.375 / (s * s * s * s * s),
        ])
    }

    pub fn abs(&self) -> Jet {
        // derivative taken as sign(v); not defined at v = 0
        let sg = if self.v >= 0.0 { 1.0 } else { -1.0 };
        self.chain([self.v.abs(), sg, 0.0, 0.0])
    }

    /// Integer power by repeated multiplication (valid for negative bases).
    pub fn powi(&self, n: i64) -> Jet {
        if n == 0 {
            return Jet::constant(self.dim, self.order, 1.0);
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = *self;
        for _ in 1..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Real power via exp(y log x); requires a positive base.
    pub fn powf(&self, e: &Jet) -> Jet {
        e.mul(&self.ln()).exp()
    }

    /// Max absolute derivative entry up to the stored order.
    pub fn max_deriv_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            m = m.max(self.d1[i].abs());
            for j in 0..self.dim {
                m = m.max(self.d2[i][j].abs());
                for k in 0..self.dim {
                    m = m.max(self.d3[i][j][k].abs());
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn var(v: f64, i: usize) -> Jet {
        Jet::variable(2, 3, v, i)
    }

    #[test]
    fn product_rule_third_order() {
        // f = x^2 y: d3/dx2dy = 2
        let x = var(3.0, 0);
        let y = var(5.0, 1);
        let f = x.mul(&x).mul(&y);
        assert_relative_eq!(f.v, 45.0);
        assert_relative_eq!(f.d1[0], 30.0);
        assert_relative_eq!(f.d1[1], 9.0);
        assert_relative_eq!(f.d2[0][0], 10.0);
        assert_relative_eq!(f.d2[0][1], 6.0);
        assert_relative_eq!(f.d3[0][0][1], 2.0);
        assert_relative_eq!(f.d3[0][1][0], 2.0);
        assert_relative_eq!(f.d3[0][0][0], 0.0);
    }

    #[test]
    fn chain_rule_composition() {
        // f = sin(x*y) at (0.7, 1.3)
        let (a, b) = (0.7, 1.3);
        let f = var(a, 0).mul(&var(b, 1)).sin();
        assert_relative_eq!(f.v, (a * b).sin(), epsilon = 1e-15);
        assert_relative_eq!(f.d1[0], b * (a * b).cos(), epsilon = 1e-14);
        // d2/dxdy = cos(xy) - xy sin(xy)
        assert_relative_eq!(
            f.d2[0][1],
            (a * b).cos() - a * b * (a * b).sin(),
            epsilon = 1e-14
        );
        // d3/dx^2 dy = -2y sin - xy^2 cos ... check against series by hand:
        // d/dx [d2/dxdy] with d2/dxdy = cos(xy) - xy sin(xy)
        // = -y sin(xy) - y sin(xy) - xy^2 cos(xy)
        assert_relative_eq!(
            f.d3[0][0][1],
            -2.0 * b * (a * b).sin() - a * b * b * (a * b).cos(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn division_and_sqrt() {
        let x = var(2.0, 0);
        let one = Jet::constant(2, 3, 1.0);
        let f = one.div(&x.mul(&x).add_scalar(1.0)); // 1/(1+x^2)
        assert_relative_eq!(f.v, 0.2);
        assert_relative_eq!(f.d1[0], -2.0 * 2.0 / 25.0, epsilon = 1e-14);
        let g = x.sqrt();
        assert_relative_eq!(g.d1[0], 0.5 / 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.d2[0][0], -0.25 / 2.0_f64.powf(1.5), epsilon = 1e-15);
    }

    #[test]
    fn shift_extracts_derivative_jet() {
        // F = x^3: dF/dx as a jet of order 2 should be 3x^2 with derivatives.
        let x = var(2.0, 0);
        let f = x.powi(3);
        let df = f.shift(0);
        assert_eq!(df.order, 2);
        assert_relative_eq!(df.v, 12.0);
        assert_relative_eq!(df.d1[0], 12.0); // 6x
        assert_relative_eq!(df.d2[0][0], 6.0);
    }

    #[test]
    fn powi_negative_base() {
        let x = var(-1.5, 0);
        let f = x.powi(2);
        assert_relative_eq!(f.v, 2.25);
        assert_relative_eq!(f.d1[0], -3.0);
    }

    #[test]
    fn symmetry_of_stored_tensors() {
        let x = var(0.4, 0);
        let y = var(-1.1, 1);
        let f = x.sin().mul(&y.exp()).add(&x.mul(&y).cosh());
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(f.d2[i][j], f.d2[j][i], epsilon = 1e-15);
                for k in 0..2 {
                    let reference = f.d3[i][j][k];
                    for perm in [[i, k, j], [j, i, k], [j, k, i], [k, i, j], [k, j, i]] {
                        assert_relative_eq!(
                            reference,
                            f.d3[perm[0]][perm[1]][perm[2]],
                            epsilon = 1e-13
                        );
                    }
                }
            }
        }
    }
}
