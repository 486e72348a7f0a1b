//! Finite-difference weights and a banded LU solver.

/// Fornberg's algorithm: weights for derivatives `0..=order` at `z` from nodes `x`.
///
/// Returns `w[m][j]`, the weight of node `j` for the `m`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A stencil row: first node index and weights.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
}

/// Order-6 first- and second-derivative stencils on the uniform grid `0..=n`
/// (unit spacing): 7-point centered in the interior, 8-point one-sided near the ends.
pub(crate) fn uniform_stencils(n: usize) -> (Vec<Stencil>, Vec<Stencil>) {
    let mut d1 = Vec::with_capacity(n + 1);
    let mut d2 = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let start = if j < 3 {
            0
        } else if j + 3 > n {
            n - 7
        } else {
            j - 3
        };
        let len = if j < 3 || j + 3 > n { 8 } else { 7 };
        let xs: Vec<f64> = (start..start + len).map(|k| k as f64).collect();
        let w = fornberg_weights(j as f64, &xs, 2);
        d1.push(Stencil { start, weights: w[1].clone() });
        d2.push(Stencil { start, weights: w[2].clone() });
    }
    (d1, d2)
}

/// Banded matrix with room for partial-pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Adds `v` at `(i, j)`; the entry must lie inside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Option<BandLu> {
        let n = self.n;
        let mut piv = vec![0usize; n];
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in k + 1..=last {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            piv[k] = p;
            let cmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=cmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.get(k, k);
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let m = self.data[ik] / pivot;
                self.data[ik] = m;
                if m != 0.0 {
                    for j in k + 1..=cmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= m * kj;
                    }
                }
            }
        }
        Some(BandLu { m: self, piv })
    }
}

/// Factored banded matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let reach = self.m.kl + self.m.ku;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.m.get(i, k) * b[k];
            }
        }
        for k in (0..n).rev() {
            let cmax = (k + reach).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=cmax {
                s -= self.m.get(k, j) * b[j];
            }
            b[k] = s / self.m.get(k, k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_central_second_derivative() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[2][0] - 1.0).abs() < 1e-14);
        assert!((w[2][1] + 2.0).abs() < 1e-14);
        assert!((w[1][2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stencils_differentiate_polynomials_exactly() {
        let (d1, d2) = uniform_stencils(20);
        let f = |x: f64| x.powi(6) - 3.0 * x.powi(4) + x;
        let df = |x: f64| 6.0 * x.powi(5) - 12.0 * x.powi(3) + 1.0;
        let ddf = |x: f64| 30.0 * x.powi(4) - 36.0 * x * x;
        for j in 0..=20 {
            let (a, b) = (&d1[j], &d2[j]);
            let v1: f64 = a.weights.iter().enumerate().map(|(q, w)| w * f((a.start + q) as f64 / 10.0)).sum::<f64>() * 10.0;
            let v2: f64 = b.weights.iter().enumerate().map(|(q, w)| w * f((b.start + q) as f64 / 10.0)).sum::<f64>() * 100.0;
            let x = j as f64 / 10.0;
            assert!((v1 - df(x)).abs() < 1e-7 * (1.0 + df(x).abs()), "d1 at {j}");
            assert!((v2 - ddf(x)).abs() < 1e-6 * (1.0 + ddf(x).abs()), "d2 at {j}");
        }
    }

    #[test]
    fn band_lu_matches_dense_solution() {
        let n = 12;
        let (kl, ku) = (2, 3);
        let mut m = BandMatrix::new(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces pivoting
                let v = if i == j { 0.1 } else { ((i * 7 + j * 3) % 5) as f64 - 1.7 };
                m.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|k| (k as f64).sin() + 0.3).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * x[j]).sum()).collect();
        m.factor().unwrap().solve(&mut b);
        for k in 0..n {
            assert!((b[k] - x[k]).abs() < 1e-10, "{k}: {} vs {}", b[k], x[k]);
        }
    }
}
