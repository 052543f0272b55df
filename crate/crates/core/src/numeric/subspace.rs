use super::matrix::{dot, norm2, Matrix};

/// Orthonormal basis of the null space {x : Mx = 0}.
pub fn null_space(m: &Matrix, eps: f64) -> Vec<Vec<f64>> {
    let n = m.cols();
    if m.rows() == 0 {
        return (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
    }
    // reduced row echelon form
    let mut a = m.clone();
    let rows = a.rows();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        if r >= rows {
            break;
        }
        let mut piv = r;
        for i in r + 1..rows {
            if a.get(i, col).abs() > a.get(piv, col).abs() {
                piv = i;
            }
        }
        if a.get(piv, col).abs() <= eps {
            continue;
        }
        if piv != r {
            for j in 0..n {
                let t = a.get(r, j);
                a.set(r, j, a.get(piv, j));
                a.set(piv, j, t);
            }
        }
        let d = a.get(r, col);
        for j in 0..n {
            a.set(r, j, a.get(r, j) / d);
        }
        for i in 0..rows {
            if i != r {
                let f = a.get(i, col);
                if f != 0.0 {
                    for j in 0..n {
                        let v = a.get(i, j) - f * a.get(r, j);
                        a.set(i, j, v);
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![0.0; n];
        v[fc] = 1.0;
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -a.get(ri, fc);
        }
        basis.push(v);
    }
    orthonormalize(basis, eps)
}

/// Orthonormal basis of the span of the given vectors (modified Gram-Schmidt).
pub fn orthonormalize(vectors: Vec<Vec<f64>>, eps: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let nv = norm2(&v);
        if nv > eps.max(1e-12) * 10.0 {
            for x in v.iter_mut() {
                *x /= nv;
            }
            basis.push(v);
        }
    }
    basis
}

/// Orthonormal basis of the column span of `m`.
pub fn column_space(m: &Matrix, eps: f64) -> Vec<Vec<f64>> {
    orthonormalize(m.transpose().row_vecs(), eps)
}

/// Orthonormal basis of the orthogonal complement of span(vectors).
pub fn orthogonal_complement(vectors: &[Vec<f64>], dim: usize, eps: f64) -> Vec<Vec<f64>> {
    if vectors.is_empty() {
        return null_space(&Matrix::empty(dim), eps);
    }
    null_space(&Matrix::from_rows(vectors.to_vec(), dim), eps)
}

/// Basis of span(u) ∩ span(v), both given as lists of vectors in R^dim.
pub fn subspace_intersection(
    u: &[Vec<f64>],
    v: &[Vec<f64>],
    dim: usize,
    eps: f64,
) -> Vec<Vec<f64>> {
    let ub = orthonormalize(u.to_vec(), eps);
    let vb = orthonormalize(v.to_vec(), eps);
    if ub.is_empty() || vb.is_empty() {
        return vec![];
    }
    // null space of [U^T-columns | -V^T-columns] stacked as a dim x (k+l) map
    let k = ub.len();
    let l = vb.len();
    let m = Matrix::from_fn(dim, k + l, |i, j| {
        if j < k {
            ub[j][i]
        } else {
            -vb[j - k][i]
        }
    });
    let ns = null_space(&m, eps);
    let mut out = Vec::new();
    for coeffs in ns {
        let mut y = vec![0.0; dim];
        for (j, b) in ub.iter().enumerate() {
            for i in 0..dim {
                y[i] += coeffs[j] * b[i];
            }
        }
        out.push(y);
    }
    orthonormalize(out, eps)
}

/// Distance from x to span(basis) in the Euclidean norm (basis orthonormal).
pub fn distance_to_span(x: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut r = x.to_vec();
    for b in basis {
        let c = dot(&r, b);
        for (xi, bi) in r.iter_mut().zip(b) {
            *xi -= c * bi;
        }
    }
    norm2(&r)
}
