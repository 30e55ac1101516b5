//! Banded LU factorization with partial pivoting (LAPACK `dgbtrf`/`dgbtrs` layout),
//! plus a small dense solver for the singular-matrix preprocessing.

use crate::error::{Error, Result};

/// Band matrix in LAPACK general-band storage. Entry `(i, j)` with
/// `j - ku <= i <= j + kl` lives at `data[j * ldab + kl + ku + i - j]`;
/// the extra `kl` rows on top hold pivoting fill-in.
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            data: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reset(&mut self) {
        self.data.fill(0.0);
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j + self.kl && j <= i + self.ku + self.kl, "({i},{j}) outside band");
        j * self.ldab + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    /// In-place LU factorization with partial pivoting. `ipiv[j]` records the
    /// row swapped into position `j`.
    pub fn factorize(&mut self, ipiv: &mut Vec<usize>) -> Result<()> {
        let n = self.n;
        let kv = self.kl + self.ku;
        ipiv.clear();
        ipiv.resize(n, 0);

        for j in 0..n {
            let km = self.kl.min(n - 1 - j);
            // Pivot search down the column.
            let mut jp = 0usize;
            let mut pmax = self.get(j, j).abs();
            for i in 1..=km {
                let v = self.get(j + i, j).abs();
                if v > pmax {
                    pmax = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if pmax == 0.0 {
                return Err(Error::SingularJacobian { column: j });
            }
            let jmax = (j + kv).min(n - 1);
            if jp != 0 {
                for col in j..=jmax {
                    let a = self.slot(j, col);
                    let b = self.slot(j + jp, col);
                    self.data.swap(a, b);
                }
            }
            let piv = self.get(j, j);
            for i in 1..=km {
                let s = self.slot(j + i, j);
                self.data[s] /= piv;
            }
            for col in j + 1..=jmax {
                let ujc = self.get(j, col);
                if ujc != 0.0 {
                    for i in 1..=km {
                        let l = self.get(j + i, j);
                        let s = self.slot(j + i, col);
                        self.data[s] -= l * ujc;
                    }
                }
            }
        }
        Ok(())
    }

    /// Solve `A x = b` in place using a prior `factorize`.
    pub fn solve(&self, ipiv: &[usize], b: &mut [f64]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        debug_assert_eq!(b.len(), n);
        // Forward: apply pivots and L.
        for j in 0..n {
            if ipiv[j] != j {
                b.swap(j, ipiv[j]);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for i in 1..=km {
                    b[j + i] -= self.get(j + i, j) * bj;
                }
            }
        }
        // Backward: U x = y.
        for j in (0..n).rev() {
            b[j] /= self.get(j, j);
            let bj = b[j];
            if bj != 0.0 {
                let imin = j.saturating_sub(kv);
                for i in imin..j {
                    b[i] -= self.get(i, j) * bj;
                }
            }
        }
    }
}

/// Dense Gaussian elimination with partial pivoting for small systems
/// (used to build `(I - S)^-1` for the singular term at the origin).
pub fn solve_dense(a: &[f64], n: usize, b: &mut [f64]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut pmax = m[perm[k] * n + k].abs();
        for i in k + 1..n {
            let v = m[perm[i] * n + k].abs();
            if v > pmax {
                pmax = v;
                p = i;
            }
        }
        if pmax == 0.0 {
            return Err(Error::SingularJacobian { column: k });
        }
        perm.swap(k, p);
        let pk = perm[k];
        for i in k + 1..n {
            let pi = perm[i];
            let l = m[pi * n + k] / m[pk * n + k];
            m[pi * n + k] = l;
            for j in k + 1..n {
                m[pi * n + j] -= l * m[pk * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[perm[i]];
        for j in 0..i {
            s -= m[perm[i] * n + j] * y[j];
        }
        y[i] = s;
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in i + 1..n {
            s -= m[perm[i] * n + j] * b[j];
        }
        b[i] = s / m[perm[i] * n + i];
    }
    Ok(())
}

/// Invert a small dense matrix.
pub fn invert_dense(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.fill(0.0);
        col[j] = 1.0;
        solve_dense(a, n, &mut col)?;
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xorshift(state: &mut u64) -> f64 {
        let mut x = *state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        *state = x;
        (x % 10_000) as f64 / 5_000.0 - 1.0
    }

    #[test]
    fn banded_matches_dense_solve() {
        let mut state = 0x9e3779b97f4a7c15u64;
        for &(n, kl, ku) in &[(6usize, 2usize, 1usize), (15, 3, 4), (40, 5, 5), (9, 8, 8)] {
            let mut dense = vec![0.0; n * n];
            let mut band = BandMatrix::new(n, kl, ku);
            for i in 0..n {
                for j in 0..n {
                    if j + kl >= i && i + ku >= j {
                        let v = xorshift(&mut state) + if i == j { 4.0 } else { 0.0 };
                        dense[i * n + j] = v;
                        band.set(i, j, v);
                    }
                }
            }
            let b: Vec<f64> = (0..n).map(|_| xorshift(&mut state)).collect();
            let mut x_band = b.clone();
            let mut ipiv = Vec::new();
            band.factorize(&mut ipiv).unwrap();
            band.solve(&ipiv, &mut x_band);
            let mut x_dense = b.clone();
            solve_dense(&dense, n, &mut x_dense).unwrap();
            for i in 0..n {
                assert!(
                    (x_band[i] - x_dense[i]).abs() < 1e-10,
                    "mismatch at {i}: {} vs {}",
                    x_band[i],
                    x_dense[i]
                );
            }
        }
    }

    #[test]
    fn singular_column_is_reported() {
        let mut band = BandMatrix::new(3, 1, 1);
        band.set(0, 0, 1.0);
        band.set(2, 2, 1.0);
        // column 1 left identically zero
        let mut ipiv = Vec::new();
        assert!(matches!(
            band.factorize(&mut ipiv),
            Err(Error::SingularJacobian { column: 1 })
        ));
    }

    #[test]
    fn dense_inverse_roundtrip() {
        let a = vec![2.0, 0.0, 0.0, -1.0, 3.0, 0.0, 0.5, 0.0, 4.0];
        let inv = invert_dense(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[i * 3 + k] * inv[k * 3 + j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12);
            }
        }
    }
}
