//! Brute-force reference computations shared by the unit tests. Everything
//! here is plain enumeration, independent of the library's fast paths.

use crate::partition::Partition;

/// All points of `{-1, +1}^n`, variable 0 most significant, bit 0 = -1.
pub fn cube(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|idx| (0..n).map(|i| if (idx >> (n - 1 - i)) & 1 == 1 { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// `E[(F - E F - sum_i (E[F | X_i] - E F))^2]` over the uniform cube.
pub fn cost_sq_on_cube(f: &dyn Fn(&[f64]) -> f64, n: usize, p: &Partition) -> f64 {
    let pts = cube(n);
    let vals: Vec<f64> = pts.iter().map(|x| f(x)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let mut total = 0.0;
    for (x, &fx) in pts.iter().zip(&vals) {
        let mut r = fx - mean;
        for b in p.blocks() {
            let (mut s, mut c) = (0.0, 0.0);
            for (y, &fy) in pts.iter().zip(&vals) {
                if b.iter().all(|&v| x[v] == y[v]) {
                    s += fy;
                    c += 1.0;
                }
            }
            r -= s / c - mean;
        }
        total += r * r;
    }
    total / pts.len() as f64
}

/// `E[D_F(X, Y)^2]` on the uniform cube by enumerating `(X, X', Y, Y', Z)`.
pub fn df_second_moment_on_cube(f: &dyn Fn(&[f64]) -> f64, n: usize, x: &[usize], y: &[usize]) -> f64 {
    let z: Vec<usize> = (0..n).filter(|v| !x.contains(v) && !y.contains(v)).collect();
    let free = 2 * x.len() + 2 * y.len() + z.len();
    let mut total = 0.0;
    for bits in 0..1usize << free {
        let mut it = (0..free).map(|i| if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 });
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for &v in x {
            a[v] = it.next().unwrap();
            b[v] = it.next().unwrap();
        }
        for &v in y {
            a[v] = it.next().unwrap();
            b[v] = it.next().unwrap();
        }
        for &v in &z {
            a[v] = it.next().unwrap();
            b[v] = a[v];
        }
        let mut c = b.clone();
        let mut e = a.clone();
        for &v in y {
            c[v] = a[v];
            e[v] = b[v];
        }
        let d = f(&a) + f(&b) - f(&c) - f(&e);
        total += d * d;
    }
    total / (1usize << free) as f64
}
