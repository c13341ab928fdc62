//! Small dense vectors and matrices with jet-valued entries.
//!
//! Everything here is sized by the chart dimension (3 or 4), so dense
//! storage and Gauss-Jordan inversion are entirely adequate.

use crate::jet::Jet;

#[derive(Clone, Debug)]
pub struct JVec {
    pub d: usize,
    pub e: Vec<Jet>,
}

impl JVec {
    pub fn zeros(d: usize, dim: usize, order: usize) -> Self {
        JVec {
            d,
            e: vec![Jet::constant(dim, order, 0.0); d],
        }
    }

    pub fn from_values(vals: &[f64], dim: usize, order: usize) -> Self {
        JVec {
            d: vals.len(),
            e: vals.iter().map(|&v| Jet::constant(dim, order, v)).collect(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.e.iter().map(|j| j.v).collect()
    }

    pub fn scale(&self, s: &Jet) -> JVec {
        JVec {
            d: self.d,
            e: self.e.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn add(&self, o: &JVec) -> JVec {
        JVec {
            d: self.d,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &JVec) -> JVec {
        JVec {
            d: self.d,
            e: self.e.iter().zip(&o.e).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> JVec {
        JVec {
            d: self.d,
            e: self.e.iter().map(|a| a.neg()).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct JMat {
    pub d: usize,
    m: Vec<Jet>,
}

impl JMat {
    pub fn zeros(d: usize, dim: usize, order: usize) -> Self {
        JMat {
            d,
            m: vec![Jet::constant(dim, order, 0.0); d * d],
        }
    }

    pub fn at(&self, i: usize, j: usize) -> &Jet {
        &self.m[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.m[i * self.d + j] = v;
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        (0..self.d)
            .map(|i| (0..self.d).map(|j| self.at(i, j).v).collect())
            .collect()
    }

    pub fn add(&self, o: &JMat) -> JMat {
        JMat {
            d: self.d,
            m: self.m.iter().zip(&o.m).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &JMat) -> JMat {
        JMat {
            d: self.d,
            m: self.m.iter().zip(&o.m).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn transpose(&self) -> JMat {
        let mut out = self.clone();
        for i in 0..self.d {
            for j in 0..self.d {
                out.set(i, j, *self.at(j, i));
            }
        }
        out
    }

    pub fn symmetrize(&self) -> JMat {
        let mut out = self.clone();
        for i in 0..self.d {
            for j in 0..self.d {
                out.set(i, j, self.at(i, j).add(self.at(j, i)).scale(0.5));
            }
        }
        out
    }

    pub fn mul_mat(&self, o: &JMat) -> JMat {
        let (dim, order) = (self.m[0].dim, self.m[0].order.min(o.m[0].order));
        let mut out = JMat::zeros(self.d, dim, order);
        for i in 0..self.d {
            for j in 0..self.d {
                let mut acc = Jet::constant(dim, order, 0.0);
                for k in 0..self.d {
                    acc = acc.add(&self.at(i, k).mul(o.at(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &JVec) -> JVec {
        let (dim, order) = (self.m[0].dim, self.m[0].order.min(v.e[0].order));
        let mut out = JVec::zeros(self.d, dim, order);
        for i in 0..self.d {
            let mut acc = Jet::constant(dim, order, 0.0);
            for k in 0..self.d {
                acc = acc.add(&self.at(i, k).mul(&v.e[k]));
            }
            out.e[i] = acc;
        }
        out
    }

    /// v^T M w as a jet.
    pub fn bilinear(&self, v: &JVec, w: &JVec) -> Jet {
        let (dim, order) = (self.m[0].dim, self.m[0].order);
        let mut acc = Jet::constant(dim, order, 0.0);
        for i in 0..self.d {
            for j in 0..self.d {
                acc = acc.add(&v.e[i].mul(self.at(i, j)).mul(&w.e[j]));
            }
        }
        acc
    }

    /// Gauss-Jordan inverse with partial pivoting on jet values.
    /// Returns `None` when a pivot value underflows `tol`.
    pub fn inverse(&self, tol: f64) -> Option<JMat> {
        let n = self.d;
        let (dim, order) = (self.m[0].dim, self.m[0].order);
        let mut a = self.clone();
        let mut inv = JMat::zeros(n, dim, order);
        for i in 0..n {
            inv.set(i, i, Jet::constant(dim, order, 1.0));
        }
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a.at(r, col).v.abs() > a.at(piv, col).v.abs() {
                    piv = r;
                }
            }
            if a.at(piv, col).v.abs() <= tol {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    let tmp = *a.at(col, j);
                    a.set(col, j, *a.at(piv, j));
                    a.set(piv, j, tmp);
                    let tmp = *inv.at(col, j);
                    inv.set(col, j, *inv.at(piv, j));
                    inv.set(piv, j, tmp);
                }
            }
            let pivot = a.at(col, col).recip();
            for j in 0..n {
                a.set(col, j, a.at(col, j).mul(&pivot));
                inv.set(col, j, inv.at(col, j).mul(&pivot));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = *a.at(r, col);
                if factor.v == 0.0 && factor.max_deriv_abs() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.at(r, j).sub(&factor.mul(a.at(col, j))));
                    inv.set(r, j, inv.at(r, j).sub(&factor.mul(inv.at(col, j))));
                }
            }
        }
        Some(inv)
    }

    /// Determinant by LU with partial pivoting (jet-valued).
    pub fn det(&self) -> Jet {
        let n = self.d;
        let (dim, order) = (self.m[0].dim, self.m[0].order);
        let mut a = self.clone();
        let mut det = Jet::constant(dim, order, 1.0);
        let mut sign = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a.at(r, col).v.abs() > a.at(piv, col).v.abs() {
                    piv = r;
                }
            }
            if a.at(piv, col).v == 0.0 {
                return Jet::constant(dim, order, 0.0);
            }
            if piv != col {
                sign = -sign;
                for j in 0..n {
                    let tmp = *a.at(col, j);
                    a.set(col, j, *a.at(piv, j));
                    a.set(piv, j, tmp);
                }
            }
            det = det.mul(a.at(col, col));
            let pivot = a.at(col, col).recip();
            for r in (col + 1)..n {
                let factor = a.at(r, col).mul(&pivot);
                for j in col..n {
                    a.set(r, j, a.at(r, j).sub(&factor.mul(a.at(col, j))));
                }
            }
        }
        det.scale(sign)
    }
}

/// Eigenvalues of a small symmetric matrix of plain values.
pub fn sym_eigenvalues(values: &[Vec<f64>]) -> Vec<f64> {
    let n = values.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = 0.5 * (values[i][j] + values[j][i]);
        }
    }
    let mut eigs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Signs of eigenvalues (for signature diagnostics); near-zero counts as 0.
pub fn eigenvalue_signs(values: &[Vec<f64>], tol: f64) -> Vec<i8> {
    sym_eigenvalues(values)
        .into_iter()
        .map(|e| {
            if e > tol {
                1
            } else if e < -tol {
                -1
            } else {
                0
            }
        })
        .collect()
}

pub fn det_values(values: &[Vec<f64>]) -> f64 {
    let n = values.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = values[i][j];
        }
    }
    m.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jet_matrix_inverse() {
        // M = [[x, 1], [0, y]] at (2, 5): inv = [[1/x, -1/(xy)], [0, 1/y]]
        let x = Jet::variable(2, 2, 2.0, 0);
        let y = Jet::variable(2, 2, 5.0, 1);
        let mut m = JMat::zeros(2, 2, 2);
        m.set(0, 0, x);
        m.set(0, 1, Jet::constant(2, 2, 1.0));
        m.set(1, 1, y);
        let inv = m.inverse(1e-14).unwrap();
        assert_relative_eq!(inv.at(0, 0).v, 0.5);
        assert_relative_eq!(inv.at(0, 1).v, -0.1);
        // d/dx (1/x) = -1/x^2
        assert_relative_eq!(inv.at(0, 0).d1[0], -0.25);
        // d/dy (-1/(xy)) = 1/(x y^2)
        assert_relative_eq!(inv.at(0, 1).d1[1], 1.0 / 50.0);
        let id = m.mul_mat(&inv);
        assert_relative_eq!(id.at(0, 0).v, 1.0, epsilon = 1e-14);
        assert_relative_eq!(id.at(1, 0).v, 0.0, epsilon = 1e-14);
        assert!(id.at(0, 1).max_deriv_abs() < 1e-13);
    }

    #[test]
    fn jet_det() {
        let x = Jet::variable(1, 1, 3.0, 0);
        let mut m = JMat::zeros(2, 1, 1);
        m.set(0, 0, x);
        m.set(1, 1, x);
        m.set(0, 1, Jet::constant(1, 1, 1.0));
        m.set(1, 0, Jet::constant(1, 1, 2.0));
        let d = m.det(); // x^2 - 2
        assert_relative_eq!(d.v, 7.0, epsilon = 1e-14);
        assert_relative_eq!(d.d1[0], 6.0, epsilon = 1e-14);
    }
}
