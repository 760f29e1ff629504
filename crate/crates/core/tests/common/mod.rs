//! Dense brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use sacd::dataset::LabeledDataset;
use sacd::sampling::CoordinateSampler;

pub type Dense = Vec<Vec<f64>>;

pub fn dense(data: &LabeledDataset) -> Dense {
    data.matrix.to_dense()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn columns(a: &Dense, idx: &[usize]) -> Dense {
    a.iter().map(|row| idx.iter().map(|&j| row[j]).collect()).collect()
}

/// `YᵀY` by the triple loop.
pub fn gram(y: &Dense) -> Dense {
    let k = y.first().map_or(0, Vec::len);
    let mut g = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            for row in y {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    g
}

pub fn transpose_times(y: &Dense, v: &[f64]) -> Vec<f64> {
    let k = y.first().map_or(0, Vec::len);
    (0..k).map(|j| y.iter().zip(v).map(|(row, vi)| row[j] * vi).sum()).collect()
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
pub fn lambda_max(g: &Dense) -> f64 {
    let n = g.len();
    let mut a = g.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|v| v * v).sum();
        if off <= 1e-32 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::NEG_INFINITY, f64::max)
}

pub fn shrink(beta: f64, alpha: f64) -> f64 {
    beta.signum() * (beta.abs() - alpha).max(0.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Iterates `x_0 … x_H` of accelerated BCD on dense data.
pub fn accbcd_oracle(data: &LabeledDataset, lambda: f64, mu: usize, iters: usize, seed: u64) -> Vec<Vec<f64>> {
    let a = dense(data);
    let b = &data.labels;
    let (m, n) = (a.len(), data.num_cols());
    let q = n.div_ceil(mu) as f64;
    let mut theta = mu as f64 / n as f64;
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut yt = vec![0.0; m];
    let mut zt: Vec<f64> = b.iter().map(|v| -v).collect();
    let mut sampler = CoordinateSampler::new(seed);
    let mut out = vec![vec![0.0; n]];
    for _ in 0..iters {
        let sel = sampler.next_block(n, mu).indices;
        let blk = columns(&a, &sel);
        let g = gram(&blk);
        let mix: Vec<f64> = yt.iter().zip(&zt).map(|(p, r)| theta * theta * p + r).collect();
        let r = transpose_times(&blk, &mix);
        let v = lambda_max(&g);
        if v > 0.0 {
            let eta = 1.0 / (q * theta * v);
            let dz: Vec<f64> =
                sel.iter().zip(&r).map(|(&i, ri)| shrink(z[i] - eta * ri, lambda * eta) - z[i]).collect();
            let c = (1.0 - q * theta) / (theta * theta);
            let adz = matvec(&blk, &dz);
            for (&i, d) in sel.iter().zip(&dz) {
                z[i] += d;
                y[i] -= c * d;
            }
            for k in 0..m {
                zt[k] += adz[k];
                yt[k] -= c * adz[k];
            }
        }
        let sq = theta * theta;
        theta = ((sq * sq + 4.0 * sq).sqrt() - sq) / 2.0;
        out.push(y.iter().zip(&z).map(|(p, r)| theta * theta * p + r).collect());
    }
    out
}

/// Iterates of proximal BCD, recomputing the residual from scratch each step.
pub fn bcd_oracle(data: &LabeledDataset, lambda: f64, mu: usize, iters: usize, seed: u64) -> Vec<Vec<f64>> {
    let a = dense(data);
    let n = data.num_cols();
    let mut x = vec![0.0; n];
    let mut sampler = CoordinateSampler::new(seed);
    let mut out = vec![x.clone()];
    for _ in 0..iters {
        let sel = sampler.next_block(n, mu).indices;
        let blk = columns(&a, &sel);
        let v = lambda_max(&gram(&blk));
        if v > 0.0 {
            let res: Vec<f64> = matvec(&a, &x).iter().zip(&data.labels).map(|(p, b)| p - b).collect();
            let grad = transpose_times(&blk, &res);
            let eta = 1.0 / v;
            let next: Vec<f64> = sel.iter().zip(&grad).map(|(&i, gi)| shrink(x[i] - eta * gi, lambda * eta)).collect();
            for (&i, nx) in sel.iter().zip(next) {
                x[i] = nx;
            }
        }
        out.push(x.clone());
    }
    out
}

/// `(α_h, x_h)` of dual coordinate descent; `x` is rebuilt from `α` every step.
pub fn svm_oracle(
    data: &LabeledDataset,
    lambda: f64,
    squared: bool,
    iters: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let a = dense(data);
    let b = &data.labels;
    let (m, n) = (a.len(), data.num_cols());
    let (gamma, nu) = if squared { (0.5 / lambda, f64::INFINITY) } else { (0.0, lambda) };
    let primal =
        |alpha: &[f64]| -> Vec<f64> { (0..n).map(|j| (0..m).map(|i| b[i] * alpha[i] * a[i][j]).sum()).collect() };
    let mut alpha = vec![0.0; m];
    let mut sampler = CoordinateSampler::new(seed);
    let mut out = vec![(alpha.clone(), vec![0.0; n])];
    for _ in 0..iters {
        let i = sampler.next_index(m);
        let x = primal(&alpha);
        let eta: f64 = a[i].iter().map(|v| v * v).sum::<f64>() + gamma;
        if eta > 0.0 {
            let dot: f64 = a[i].iter().zip(&x).map(|(p, q)| p * q).sum();
            let g = b[i] * dot - 1.0 + gamma * alpha[i];
            let proj = (alpha[i] - g).max(0.0).min(nu) - alpha[i];
            if proj != 0.0 {
                alpha[i] = (alpha[i] - g / eta).max(0.0).min(nu);
            }
        }
        let x = primal(&alpha);
        out.push((alpha.clone(), x));
    }
    out
}

/// Solves the normal equations by Gaussian elimination with partial pivoting.
pub fn least_squares(data: &LabeledDataset) -> Vec<f64> {
    let a = dense(data);
    let n = data.num_cols();
    let mut m = gram(&a);
    let mut rhs = transpose_times(&a, &data.labels);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    x
}
