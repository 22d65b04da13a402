#![allow(dead_code)]

use dpopt_core::{chol_inverse, cholesky, eval_objective, DenseMatrix, GramMatrix, Rng};

pub fn gaussian(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.standard_normal())
}

pub fn random_symmetric(n: usize, rng: &mut Rng) -> DenseMatrix {
    let mut m = gaussian(n, n, rng);
    m.symmetrize();
    m
}

/// `BᵀB/n + shift·I` with Gaussian `B`: well conditioned for moderate shift.
pub fn random_spd(n: usize, shift: f64, rng: &mut Rng) -> DenseMatrix {
    let b = gaussian(n, n, rng);
    let mut m = b.tr_matmul(&b).scaled(1.0 / n as f64);
    m.add_to_diagonal(shift);
    m.symmetrize();
    m
}

/// Random positive definite matrix rescaled to unit diagonal.
pub fn random_correlation(n: usize, rng: &mut Rng) -> DenseMatrix {
    let s = random_spd(n, 0.5, rng);
    let d: Vec<f64> = s.diagonal().iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut x = DenseMatrix::from_fn(n, n, |i, j| s[(i, j)] * d[i] * d[j]);
    for i in 0..n {
        x.row_mut(i)[i] = 1.0;
    }
    x.symmetrize();
    x
}

/// Random symmetric direction with zero diagonal.
pub fn random_offdiag(n: usize, rng: &mut Rng) -> DenseMatrix {
    let mut d = random_symmetric(n, rng);
    d.zero_diagonal();
    d
}

pub fn rel_err(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).frobenius() / b.frobenius().max(f64::MIN_POSITIVE)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (offset, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[col + 1 + offset] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Minimizer of `⟨Δ, G⟩ + ½ vec(Δ)ᵀ H vec(Δ)` over symmetric `Δ` with zero
/// diagonal, with `H = X⁻¹ ⊗ S + S ⊗ X⁻¹` and `S = −G` formed explicitly as
/// an n²×n² matrix and restricted to the off-diagonal pair basis.
pub fn dense_direction(x_inv: &DenseMatrix, g: &DenseMatrix) -> DenseMatrix {
    let n = g.rows();
    let nn = n * n;
    let idx = |i: usize, j: usize| i * n + j;
    let mut h = vec![vec![0.0; nn]; nn];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    // (X⁻¹ D S)_{ij} = Σ X⁻¹_{ik} D_{kl} S_{lj}
                    h[idx(i, j)][idx(k, l)] =
                        -x_inv[(i, k)] * g[(l, j)] - g[(i, k)] * x_inv[(l, j)];
                }
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let basis = |p: (usize, usize)| {
        let mut v = vec![0.0; nn];
        v[idx(p.0, p.1)] = 1.0;
        v[idx(p.1, p.0)] = 1.0;
        v
    };
    let bases: Vec<Vec<f64>> = pairs.iter().map(|&p| basis(p)).collect();
    let hb: Vec<Vec<f64>> = bases
        .iter()
        .map(|b| {
            (0..nn)
                .map(|r| (0..nn).map(|c| h[r][c] * b[c]).sum())
                .collect()
        })
        .collect();
    let q: Vec<Vec<f64>> = bases
        .iter()
        .map(|bk| {
            hb.iter()
                .map(|hbl| bk.iter().zip(hbl).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| -(g[(i, j)] + g[(j, i)]))
        .collect();
    let coef = if pairs.is_empty() {
        vec![]
    } else {
        gauss_solve(q, rhs)
    };
    let mut d = DenseMatrix::zeros(n, n);
    for (&(i, j), c) in pairs.iter().zip(coef) {
        d.row_mut(i)[j] = c;
        d.row_mut(j)[i] = c;
    }
    d
}

/// `X⁻¹` of a 2×2 or 3×3 matrix by cofactors, or `None` if not positive definite.
pub fn small_pd_inverse(x: &DenseMatrix) -> Option<DenseMatrix> {
    match x.rows() {
        2 => {
            let det = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
            if x[(0, 0)] <= 0.0 || det <= 0.0 {
                return None;
            }
            Some(DenseMatrix::from_rows(&[
                [x[(1, 1)] / det, -x[(0, 1)] / det],
                [-x[(1, 0)] / det, x[(0, 0)] / det],
            ]))
        }
        3 => {
            let m = |i: usize, j: usize| x[(i, j)];
            let minor2 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
            // cyclic cofactors need no sign bookkeeping
            let cof = DenseMatrix::from_fn(3, 3, |i, j| {
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let (c, d) = ((i + 1) % 3, (i + 2) % 3);
                m(a, c) * m(b, d) - m(a, d) * m(b, c)
            });
            let det: f64 = (0..3).map(|k| m(0, k) * cof[(k, 0)]).sum();
            if m(0, 0) <= 0.0 || minor2 <= 0.0 || det <= 0.0 {
                return None;
            }
            Some(cof.scaled(1.0 / det))
        }
        _ => panic!("only n = 2, 3"),
    }
}

/// Minimum of `⟨X⁻¹, V⟩` over unit-diagonal positive definite `X` on a grid of
/// off-diagonal values with the given step.
pub fn grid_minimum(v: &DenseMatrix, step: f64) -> f64 {
    let n = v.rows();
    let k = (1.0 / step).round() as i64;
    let vals: Vec<f64> = (-k + 1..k).map(|i| i as f64 * step).collect();
    let mut best = f64::INFINITY;
    let mut eval = |x: DenseMatrix| {
        if let Some(inv) = small_pd_inverse(&x) {
            best = best.min(inv.inner(v));
        }
    };
    match n {
        2 => {
            for &a in &vals {
                eval(DenseMatrix::from_rows(&[[1.0, a], [a, 1.0]]));
            }
        }
        3 => {
            for &a in &vals {
                for &b in &vals {
                    for &c in &vals {
                        eval(DenseMatrix::from_rows(&[
                            [1.0, a, b],
                            [a, 1.0, c],
                            [b, c, 1.0],
                        ]));
                    }
                }
            }
        }
        _ => panic!("only n = 2, 3"),
    }
    best
}

pub fn inv(x: &DenseMatrix) -> DenseMatrix {
    chol_inverse(&cholesky(x).unwrap())
}

pub fn objective_at(x: &DenseMatrix, v: &GramMatrix) -> f64 {
    eval_objective(&inv(x), v)
}

pub fn step(x: &DenseMatrix) -> f64 {
    1e-5 * x.frobenius().max(1.0)
}

pub fn random_gram(n: usize, rng: &mut Rng) -> GramMatrix {
    GramMatrix::from_matrix(random_spd(n, 0.2, rng)).unwrap()
}

/// Entrywise central differences of `F`, one symmetric pair at a time.
pub fn fd_gradient(x: &DenseMatrix, v: &GramMatrix) -> DenseMatrix {
    let n = x.rows();
    let h = step(x);
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut e = DenseMatrix::zeros(n, n);
            // (E_ij + E_ji)/2 has derivative G_ij, diagonal included
            e.row_mut(i)[j] += 0.5;
            e.row_mut(j)[i] += 0.5;
            let d = (objective_at(&x.add_scaled(h, &e), v)
                - objective_at(&x.add_scaled(-h, &e), v))
                / (2.0 * h);
            g.row_mut(i)[j] = d;
            g.row_mut(j)[i] = d;
        }
    }
    g
}
