//! Gauss–Legendre rules on `[-1, 1]` and their tensor products.

/// One-dimensional Gauss–Legendre points and weights, `n >= 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Tensor-product rule on `[-1, 1]^dim` with `n` points per direction.
/// Points are ordered with the first coordinate running fastest.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn tensor(dim: usize, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let m = [n, if dim > 1 { n } else { 1 }, if dim > 2 { n } else { 1 }];
        let mut points = Vec::with_capacity(m[0] * m[1] * m[2]);
        let mut weights = Vec::with_capacity(points.capacity());
        for k in 0..m[2] {
            for j in 0..m[1] {
                for i in 0..m[0] {
                    let mut p = [0.0; 3];
                    let mut wt = w[i];
                    p[0] = x[i];
                    if dim > 1 {
                        p[1] = x[j];
                        wt *= w[j];
                    }
                    if dim > 2 {
                        p[2] = x[k];
                        wt *= w[k];
                    }
                    points.push(p);
                    weights.push(wt);
                }
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
