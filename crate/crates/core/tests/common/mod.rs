//! Shared fixture generators for the integration and acceptance suites.

#![allow(dead_code)]

use djopt_core::numeric::matrix::{axpy, dot, norm2, Matrix};
use djopt_core::numeric::Tolerance;
use djopt_core::polyhedra::{ConvexPolyhedron, PolyhedralCone, PolyhedralSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn tol() -> Tolerance {
    Tolerance::default()
}

/// Random nonzero integer vector with entries in [-2, 2].
pub fn int_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
        if v.iter().any(|x| *x != 0.0) {
            return v;
        }
    }
}

/// A random polyhedral set with integer data whose union contains `z`,
/// with a mix of rows active and inactive at `z`.
pub fn random_set_through(rng: &mut ChaCha8Rng, dim: usize, z: &[f64]) -> PolyhedralSet {
    let npieces = rng.gen_range(1..=4usize);
    let mut pieces = Vec::new();
    for pi in 0..npieces {
        let nrows = rng.gen_range(1..=3usize);
        let mut a = Matrix::zeros(0, dim);
        let mut b = Vec::new();
        for _ in 0..nrows {
            let row = int_vec(rng, dim);
            // bias toward active rows; later pieces may exclude z
            let slack = if pi == 0 {
                *[0.0, 0.0, 1.0, 2.0].get(rng.gen_range(0..4)).unwrap()
            } else {
                *[-1.0, 0.0, 0.0, 1.0, 2.0].get(rng.gen_range(0..5)).unwrap()
            };
            b.push(dot(&row, z) + slack);
            a.push_row(&row);
        }
        let mut e = Matrix::zeros(0, dim);
        let mut f = Vec::new();
        if rng.gen_bool(0.35) {
            let row = int_vec(rng, dim);
            f.push(dot(&row, z));
            e.push_row(&row);
        }
        pieces.push(ConvexPolyhedron::new(a, b, e, f).unwrap());
    }
    PolyhedralSet::new(dim, pieces).unwrap()
}

/// A random fixture (S, z, w) with z in S and w tangent at z.
pub fn random_tangent_fixture(rng: &mut ChaCha8Rng) -> (PolyhedralSet, Vec<f64>, Vec<f64>) {
    let dim = rng.gen_range(2..=4usize);
    let z: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
    let s = random_set_through(rng, dim, &z);
    let t = s.tangent_cone(&z, &tol()).unwrap();
    let dirs = t.all_directions(&tol()).unwrap();
    let w = if dirs.is_empty() || rng.gen_bool(0.15) {
        vec![0.0; dim]
    } else {
        // nonnegative combination of up to two directions of one piece
        let gens = t.generators(&tol()).unwrap();
        let pg = &gens[rng.gen_range(0..gens.len())];
        let pool = pg.directions();
        if pool.is_empty() {
            vec![0.0; dim]
        } else {
            let mut w = vec![0.0; dim];
            for _ in 0..rng.gen_range(1..=2usize) {
                let d = &pool[rng.gen_range(0..pool.len())];
                let c = rng.gen_range(1..=2u32) as f64;
                w = axpy(&w, c, d);
            }
            w
        }
    };
    (s, z, w)
}

/// Membership probes for comparing two cone representations: generator
/// directions, their pairwise combinations, and integer lattice noise.
pub fn cone_probes(
    rng: &mut ChaCha8Rng,
    dim: usize,
    sides: &[&PolyhedralCone],
    count: usize,
) -> Vec<Vec<f64>> {
    let mut probes: Vec<Vec<f64>> = Vec::new();
    let mut gens: Vec<Vec<f64>> = Vec::new();
    for side in sides {
        if let Ok(all) = side.all_directions(&tol()) {
            gens.extend(all);
        }
    }
    probes.extend(gens.iter().cloned());
    while probes.len() < count {
        let choice = rng.gen_range(0..3u32);
        let p = match choice {
            0 if !gens.is_empty() => {
                let a = &gens[rng.gen_range(0..gens.len())];
                let b = &gens[rng.gen_range(0..gens.len())];
                let la = rng.gen_range(0.0..2.0);
                let lb = rng.gen_range(0.0..2.0);
                axpy(&djopt_core::numeric::matrix::scale(a, la), lb, b)
            }
            1 => int_vec(rng, dim),
            _ => (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        };
        probes.push(p);
    }
    probes.truncate(count);
    probes
}

/// Drop probes that sit within `band` of a piece boundary of any side, so
/// that membership is numerically unambiguous.
pub fn unambiguous(probes: Vec<Vec<f64>>, sides: &[&PolyhedralCone], band: f64) -> Vec<Vec<f64>> {
    probes
        .into_iter()
        .filter(|p| {
            let scale = 1.0 + norm2(p);
            for side in sides {
                for piece in side.pieces() {
                    for i in 0..piece.a.rows() {
                        let v = dot(piece.a.row(i), p);
                        if v.abs() > 1e-12 && v.abs() < band * scale {
                            return false;
                        }
                    }
                    for i in 0..piece.e.rows() {
                        let v = dot(piece.e.row(i), p);
                        if v.abs() > 1e-12 && v.abs() < band * scale {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .collect()
}

/// Random integer matrix of full row rank d <= n (resampled until exact).
pub fn full_row_rank(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Matrix {
    loop {
        let rows: Vec<Vec<f64>> = (0..d).map(|_| int_vec(rng, n)).collect();
        let m = Matrix::from_rows(rows, n);
        if m.rank(1e-9) == d {
            return m;
        }
    }
}

/// Unimodular-style invertible integer matrix (identity plus a strictly
/// lower-triangular integer perturbation).
pub fn invertible_int(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut m = Matrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            m.set(i, j, rng.gen_range(-2i32..=2) as f64);
        }
    }
    m
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm2(v).max(1e-300);
    v.iter().map(|x| x / n).collect()
}
