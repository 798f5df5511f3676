//! Reference values computed by exhaustive enumeration, for tests only.
//!
//! Everything here works on plain closures and index vectors so that it
//! shares no code with the library under test.

/// A finite product space: per-variable symbols and probabilities.
#[derive(Debug, Clone)]
pub struct Space {
    pub symbols: Vec<Vec<f64>>,
    pub probs: Vec<Vec<f64>>,
}

impl Space {
    /// Uniform `{-1, +1}^n`.
    pub fn cube(n: usize) -> Self {
        Space { symbols: vec![vec![-1.0, 1.0]; n], probs: vec![vec![0.5, 0.5]; n] }
    }

    /// Uniform `{0, .., q-1}^n`.
    pub fn uniform_zq(n: usize, q: usize) -> Self {
        Space {
            symbols: vec![(0..q).map(|s| s as f64).collect(); n],
            probs: vec![vec![1.0 / q as f64; q]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    /// Every point as (symbol values, probability).
    pub fn points(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = vec![(Vec::new(), 1.0)];
        for (syms, ps) in self.symbols.iter().zip(&self.probs) {
            let mut next = Vec::with_capacity(out.len() * syms.len());
            for (pt, w) in &out {
                for (s, p) in syms.iter().zip(ps) {
                    let mut v = pt.clone();
                    v.push(*s);
                    next.push((v, w * p));
                }
            }
            out = next;
        }
        out
    }

    /// Points of the sub-space on `vars`, as (values, probability).
    fn sub_points(&self, vars: &[usize]) -> Vec<(Vec<f64>, f64)> {
        Space {
            symbols: vars.iter().map(|&v| self.symbols[v].clone()).collect(),
            probs: vars.iter().map(|&v| self.probs[v].clone()).collect(),
        }
        .points()
    }
}

/// All partitions of `0..n` into exactly `k` nonempty blocks.
pub fn set_partitions(n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            if cur.len() == k {
                out.push(cur.clone());
            }
            return;
        }
        if cur.len() + (n - i) < k {
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, k, cur, out);
            cur[b].pop();
        }
        if cur.len() < k {
            cur.push(vec![i]);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Squared 2-norm distance from `f` to the span of functions that are sums of
/// per-block functions, by weighted least squares.
pub fn l2_cost_sq(space: &Space, f: &dyn Fn(&[f64]) -> f64, blocks: &[Vec<usize>]) -> f64 {
    let pts = space.points();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for b in blocks {
        for (vals, _) in space.sub_points(b) {
            cols.push(pts.iter().map(|(p, _)| f64::from(u8::from(b.iter().zip(&vals).all(|(&v, x)| p[v] == *x)))).collect());
        }
    }
    // Weighted coordinates, then two-pass modified Gram-Schmidt.
    let sw: Vec<f64> = pts.iter().map(|(_, w)| w.sqrt()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let mut v: Vec<f64> = c.iter().zip(&sw).map(|(x, s)| x * s).collect();
        for _ in 0..2 {
            for e in &basis {
                let d = dot(&v, e);
                v.iter_mut().zip(e).for_each(|(vi, ei)| *vi -= d * ei);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut r: Vec<f64> = pts.iter().zip(&sw).map(|((p, _), s)| f(p) * s).collect();
    for _ in 0..2 {
        for e in &basis {
            let d = dot(&r, e);
            r.iter_mut().zip(e).for_each(|(ri, ei)| *ri -= d * ei);
        }
    }
    dot(&r, &r)
}

/// `E |D_F(X, Y)|^p` by enumerating `(X, X', Y, Y', Z)`.
pub fn df_moment(space: &Space, f: &dyn Fn(&[f64]) -> f64, x: &[usize], y: &[usize], p: f64) -> f64 {
    let n = space.n();
    let z: Vec<usize> = (0..n).filter(|v| !x.contains(v) && !y.contains(v)).collect();
    let (px, py, pz) = (space.sub_points(x), space.sub_points(y), space.sub_points(&z));
    let build = |xa: &[f64], ya: &[f64], za: &[f64]| {
        let mut pt = vec![0.0; n];
        for (&v, s) in x.iter().zip(xa) {
            pt[v] = *s;
        }
        for (&v, s) in y.iter().zip(ya) {
            pt[v] = *s;
        }
        for (&v, s) in z.iter().zip(za) {
            pt[v] = *s;
        }
        f(&pt)
    };
    let mut total = 0.0;
    for (xa, wa) in &px {
        for (xb, wb) in &px {
            for (ya, wc) in &py {
                for (yb, wd) in &py {
                    for (za, we) in &pz {
                        let d = build(xa, ya, za) + build(xb, yb, za) - build(xb, ya, za) - build(xa, yb, za);
                        total += wa * wb * wc * wd * we * d.abs().powf(p);
                    }
                }
            }
        }
    }
    total
}

/// Mixed-radix digits of `idx`, variable 0 most significant.
pub fn digits(mut idx: usize, q: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for i in (0..n).rev() {
        d[i] = idx % q;
        idx /= q;
    }
    d
}

/// Hamming cost `min Pr[F != F_1 + ... + F_k]` over uniform `Z_q^n`,
/// minimizing over every tuple of block functions.
pub fn hamming_cost(f: &dyn Fn(&[usize]) -> u64, q: usize, n: usize, blocks: &[Vec<usize>]) -> f64 {
    let total = q.pow(n as u32);
    let table: Vec<u64> = (0..total).map(|i| f(&digits(i, q, n))).collect();
    let sizes: Vec<usize> = blocks.iter().map(|b| q.pow(b.len() as u32)).collect();
    let counts: Vec<usize> = sizes.iter().map(|&s| q.pow(s as u32)).collect();
    let combos: usize = counts.iter().product();
    assert!(combos <= 1 << 22, "brute-force Hamming cost too large");
    let block_index = |pt: &[usize], b: &[usize]| b.iter().fold(0, |acc, &v| acc * q + pt[v]);
    let pts: Vec<Vec<usize>> = (0..total).map(|i| digits(i, q, n)).collect();
    let local: Vec<Vec<usize>> = pts.iter().map(|p| blocks.iter().map(|b| block_index(p, b)).collect()).collect();
    let mut best = usize::MAX;
    for c in 0..combos {
        // Block function j is the `sizes[j]`-digit base-q number selected by c.
        let mut rest = c;
        let funcs: Vec<Vec<u64>> = counts
            .iter()
            .zip(&sizes)
            .map(|(&cnt, &s)| {
                let id = rest % cnt;
                rest /= cnt;
                digits(id, q, s).into_iter().map(|d| d as u64).collect()
            })
            .collect();
        let errs = (0..total)
            .filter(|&i| {
                let sum: u64 = local[i].iter().zip(&funcs).map(|(&li, fj)| fj[li]).sum();
                sum % q as u64 != table[i]
            })
            .count();
        best = best.min(errs);
    }
    best as f64 / total as f64
}

/// Same cost as [`hamming_cost`], enumerating every block function except
/// the largest block's, which is fitted by a per-value plurality vote.
pub fn hamming_cost_plurality(f: &dyn Fn(&[usize]) -> u64, q: usize, n: usize, blocks: &[Vec<usize>]) -> f64 {
    let total = q.pow(n as u32);
    let largest = (0..blocks.len()).max_by_key(|&i| (blocks[i].len(), usize::MAX - i)).expect("some block");
    let block_index = |pt: &[usize], b: &[usize]| b.iter().fold(0, |acc, &v| acc * q + pt[v]);
    let pts: Vec<Vec<usize>> = (0..total).map(|i| digits(i, q, n)).collect();
    let table: Vec<u64> = pts.iter().map(|p| f(p)).collect();
    let others: Vec<usize> = (0..blocks.len()).filter(|&i| i != largest).collect();
    let sizes: Vec<usize> = others.iter().map(|&i| q.pow(blocks[i].len() as u32)).collect();
    let counts: Vec<usize> = sizes.iter().map(|&s| q.pow(s as u32)).collect();
    let combos: usize = counts.iter().product();
    assert!(combos <= 1 << 22, "brute-force Hamming cost too large");
    let groups = q.pow(blocks[largest].len() as u32);
    let mut best = usize::MAX;
    for c in 0..combos {
        let mut rest = c;
        let funcs: Vec<Vec<usize>> = counts
            .iter()
            .zip(&sizes)
            .map(|(&cnt, &s)| {
                let id = rest % cnt;
                rest /= cnt;
                digits(id, q, s)
            })
            .collect();
        let mut votes = vec![0usize; groups * q];
        for (p, &v) in pts.iter().zip(&table) {
            let shift: usize = others.iter().zip(&funcs).map(|(&b, fb)| fb[block_index(p, &blocks[b])]).sum();
            let residual = (v as usize + q * shift - shift) % q;
            votes[block_index(p, &blocks[largest]) * q + residual] += 1;
        }
        let kept: usize = votes.chunks(q).map(|c| *c.iter().max().unwrap()).sum();
        best = best.min(total - kept);
    }
    best as f64 / total as f64
}

/// `Pr[D_F(X, Y) != 0]` over uniform `Z_q^n`.
pub fn hamming_df(f: &dyn Fn(&[usize]) -> u64, q: usize, n: usize, x: &[usize], y: &[usize]) -> f64 {
    let space = Space::uniform_zq(n, q);
    let g = |a: &[f64]| f(&a.iter().map(|v| *v as usize).collect::<Vec<_>>()) as f64;
    let z: Vec<usize> = (0..n).filter(|v| !x.contains(v) && !y.contains(v)).collect();
    let (px, py, pz) = (space.sub_points(x), space.sub_points(y), space.sub_points(&z));
    let mut bad = 0.0;
    let mut all = 0.0;
    let at = |xa: &[f64], ya: &[f64], za: &[f64]| {
        let mut pt = vec![0.0; n];
        for (&v, s) in x.iter().zip(xa).chain(y.iter().zip(ya)).chain(z.iter().zip(za)) {
            pt[v] = *s;
        }
        g(&pt) as u64
    };
    let q = q as u64;
    for (xa, _) in &px {
        for (xb, _) in &px {
            for (ya, _) in &py {
                for (yb, _) in &py {
                    for (za, _) in &pz {
                        let d = (at(xa, ya, za) + at(xb, yb, za) + 2 * q - at(xb, ya, za) - at(xa, yb, za)) % q;
                        all += 1.0;
                        if d != 0 {
                            bad += 1.0;
                        }
                    }
                }
            }
        }
    }
    bad / all
}

/// Fourier coefficient `E[f(x) prod_{i in S} x_i]` on the uniform cube for
/// every subset mask `S`, by direct summation.
pub fn fourier(f: &dyn Fn(&[f64]) -> f64, n: usize) -> Vec<f64> {
    let pts = Space::cube(n).points();
    let vals: Vec<f64> = pts.iter().map(|(p, _)| f(p)).collect();
    (0..1usize << n)
        .map(|s| {
            pts.iter()
                .zip(&vals)
                .map(|((p, w), v)| w * v * (0..n).filter(|i| s >> i & 1 == 1).map(|i| p[i]).product::<f64>())
                .sum()
        })
        .collect()
}

/// Minimum of `g` over nontrivial sides containing variable 0.
pub fn min_bipartition(n: usize, g: &dyn Fn(u64) -> f64) -> f64 {
    let full = (1u64 << n) - 1;
    (0..1u64 << (n - 1))
        .map(|r| 1 | (r << 1))
        .filter(|&m| m != full)
        .map(g)
        .fold(f64::INFINITY, f64::min)
}

/// Minimum of `cost` over all partitions of `0..n` into exactly `k` blocks.
pub fn min_partition_cost(n: usize, k: usize, cost: &dyn Fn(&[Vec<usize>]) -> f64) -> f64 {
    set_partitions(n, k).iter().map(|p| cost(p)).fold(f64::INFINITY, f64::min)
}
