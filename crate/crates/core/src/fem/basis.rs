//! Lagrange shape functions on the reference quadrilateral/hexahedron and
//! the element-local polynomial basis for the mixed fields.
//!
//! Local node numbering is lexicographic on the `(p+1)^dim` grid of
//! equispaced points, first coordinate fastest.

/// Equispaced node positions on `[-1, 1]` for order `p`.
pub fn nodes_1d(p: usize) -> Vec<f64> {
    (0..=p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect()
}

fn lagrange_1d(p: usize, x: f64) -> ([f64; 3], [f64; 3]) {
    let mut n = [0.0; 3];
    let mut d = [0.0; 3];
    match p {
        1 => {
            n[0] = 0.5 * (1.0 - x);
            n[1] = 0.5 * (1.0 + x);
            d[0] = -0.5;
            d[1] = 0.5;
        }
        2 => {
            n[0] = 0.5 * x * (x - 1.0);
            n[1] = 1.0 - x * x;
            n[2] = 0.5 * x * (x + 1.0);
            d[0] = x - 0.5;
            d[1] = -2.0 * x;
            d[2] = x + 0.5;
        }
        _ => panic!("unsupported polynomial order {p}"),
    }
    (n, d)
}

/// Tensor-product Lagrange basis of order 1 or 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LagrangeBasis {
    pub dim: usize,
    pub order: usize,
}

impl LagrangeBasis {
    pub fn new(dim: usize, order: usize) -> Self {
        assert!((2..=3).contains(&dim) && (1..=2).contains(&order));
        Self { dim, order }
    }

    pub fn n_nodes(&self) -> usize {
        (self.order + 1).pow(self.dim as u32)
    }

    /// Local `(i, j, k)` grid index of node `a`.
    pub fn node_index(&self, a: usize) -> [usize; 3] {
        let m = self.order + 1;
        [a % m, (a / m) % m, if self.dim == 3 { a / (m * m) } else { 0 }]
    }

    pub fn node_ref_coords(&self, a: usize) -> [f64; 3] {
        let x = nodes_1d(self.order);
        let ix = self.node_index(a);
        let mut p = [0.0; 3];
        for c in 0..self.dim {
            p[c] = x[ix[c]];
        }
        p
    }

    /// Shape values and reference gradients at `xi`.
    pub fn eval(&self, xi: [f64; 3], n: &mut [f64], dn: &mut [[f64; 3]]) {
        let mut v = [[0.0; 3]; 3];
        let mut d = [[0.0; 3]; 3];
        for c in 0..self.dim {
            let (a, b) = lagrange_1d(self.order, xi[c]);
            v[c] = a;
            d[c] = b;
        }
        for a in 0..self.n_nodes() {
            let ix = self.node_index(a);
            if self.dim == 2 {
                n[a] = v[0][ix[0]] * v[1][ix[1]];
                dn[a] = [d[0][ix[0]] * v[1][ix[1]], v[0][ix[0]] * d[1][ix[1]], 0.0];
            } else {
                let (x, y, z) = (v[0][ix[0]], v[1][ix[1]], v[2][ix[2]]);
                n[a] = x * y * z;
                dn[a] = [d[0][ix[0]] * y * z, x * d[1][ix[1]] * z, x * y * d[2][ix[2]]];
            }
        }
    }

    /// Number of faces of the reference cell.
    pub fn n_faces(&self) -> usize {
        2 * self.dim
    }

    /// Local nodes on face `f` (`2c` is `ξ_c = -1`, `2c+1` is `ξ_c = +1`),
    /// ordered lexicographically in the remaining coordinates.
    pub fn face_nodes(&self, f: usize) -> Vec<usize> {
        let (c, side) = (f / 2, f % 2);
        let fixed = side * self.order;
        (0..self.n_nodes()).filter(|&a| self.node_index(a)[c] == fixed).collect()
    }

    /// Coordinates of the face, i.e. the reference directions spanning it.
    pub fn face_axes(&self, f: usize) -> Vec<usize> {
        (0..self.dim).filter(|&c| c != f / 2).collect()
    }
}

/// Complete polynomials of degree `order - 1` in reference coordinates,
/// `{1}` or `{1, ξ, η[, ζ]}`, used element-locally for the pressure and
/// dilatation fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModalBasis {
    pub dim: usize,
    pub degree: usize,
}

impl ModalBasis {
    pub fn for_order(dim: usize, order: usize) -> Self {
        assert!(order >= 1 && order <= 2);
        Self { dim, degree: order - 1 }
    }

    pub fn len(&self) -> usize {
        if self.degree == 0 {
            1
        } else {
            1 + self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn eval(&self, xi: [f64; 3], n: &mut [f64]) {
        n[0] = 1.0;
        if self.degree == 1 {
            n[1..=self.dim].copy_from_slice(&xi[..self.dim]);
        }
    }
}
