//! Polyhedral sets: finite unions of convex polyhedra in H-representation,
//! their tangent cones, faces, polars and pattern regions.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::numeric::dd::{dd_v_to_h, GeneratorRep};
use crate::numeric::lp::{solve_lp, LpOutcome, LpProblem, Sense};
use crate::numeric::matrix::{dot, norm_inf, Matrix};
use crate::numeric::subspace::null_space;
use crate::numeric::{dd_h_to_v, Tolerance};
use serde::{Deserialize, Serialize};

/// One convex piece {z : Az <= b, Ez = f}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexPolyhedron {
    #[serde(rename = "A", with = "serde_matrix")]
    pub a: Matrix,
    pub b: Vec<f64>,
    #[serde(rename = "E", with = "serde_matrix", default = "serde_matrix::default_empty")]
    pub e: Matrix,
    #[serde(default)]
    pub f: Vec<f64>,
}

mod serde_matrix {
    use super::Matrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn default_empty() -> Matrix {
        Matrix::empty(0)
    }

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        m.row_vecs().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(Matrix::from_rows(rows, cols))
    }
}

impl ConvexPolyhedron {
    pub fn new(a: Matrix, b: Vec<f64>, e: Matrix, f: Vec<f64>) -> Result<Self> {
        if a.rows() != b.len() || e.rows() != f.len() {
            return Err(Error::DimensionMismatch(
                "row counts do not match right-hand sides".into(),
            ));
        }
        if a.cols() != e.cols() && a.rows() > 0 && e.rows() > 0 {
            return Err(Error::DimensionMismatch(
                "inequality and equality blocks disagree on dimension".into(),
            ));
        }
        Ok(ConvexPolyhedron { a, b, e, f })
    }

    /// Conic piece {w : Aw <= 0, Ew = 0}.
    pub fn cone(a: Matrix, e: Matrix) -> Self {
        let b = vec![0.0; a.rows()];
        let f = vec![0.0; e.rows()];
        ConvexPolyhedron { a, b, e, f }
    }

    pub fn whole_space(dim: usize) -> Self {
        ConvexPolyhedron::cone(Matrix::empty(dim), Matrix::empty(dim))
    }

    pub fn dim(&self) -> usize {
        if self.a.rows() > 0 || self.a.cols() > 0 {
            self.a.cols()
        } else {
            self.e.cols()
        }
    }

    pub fn is_cone(&self, eps: f64) -> bool {
        self.b.iter().all(|v| v.abs() <= eps) && self.f.iter().all(|v| v.abs() <= eps)
    }

    pub fn contains(&self, z: &[f64], eps: f64) -> bool {
        let scale = 1.0 + norm_inf(z);
        (0..self.a.rows()).all(|i| dot(self.a.row(i), z) - self.b[i] <= eps * scale)
            && (0..self.e.rows()).all(|i| (dot(self.e.row(i), z) - self.f[i]).abs() <= eps * scale)
    }

    /// Indices of inequality rows active at `z` within `eps`.
    pub fn active_set(&self, z: &[f64], eps: f64) -> Vec<usize> {
        let scale = 1.0 + norm_inf(z);
        (0..self.a.rows())
            .filter(|&i| (dot(self.a.row(i), z) - self.b[i]).abs() <= eps * scale)
            .collect()
    }

    /// Feasibility via phase-I LP.
    pub fn is_empty(&self, tol: &Tolerance) -> bool {
        let p = LpProblem::maximize(vec![0.0; self.dim()], self.a.clone(), self.b.clone())
            .with_eq(self.e.clone(), self.f.clone());
        matches!(solve_lp(&p, tol), Ok(LpOutcome::Infeasible { .. }))
    }

    /// Tangent cone at a member point: active inequality rows become
    /// homogeneous, equalities stay.
    pub fn tangent_cone_piece(&self, z: &[f64], tol: &Tolerance) -> ConvexPolyhedron {
        let act = self.active_set(z, tol.eps_feas);
        ConvexPolyhedron::cone(self.a.select_rows(&act), self.e.clone())
    }

    /// Generators of this piece interpreted as a cone (b, f ignored).
    pub fn cone_generators(&self, tol: &Tolerance) -> Result<GeneratorRep> {
        dd_h_to_v(&self.a, &self.e, tol)
    }

    /// Basis of {w : Aw = 0, Ew = 0}.
    pub fn lineality_space(&self, tol: &Tolerance) -> Vec<Vec<f64>> {
        let stacked = self.a.vstack(&self.e);
        null_space(&stacked, tol.eps_zero)
    }

    /// Max-norm distance to the piece via LP; `None` if empty.
    pub fn distance_inf(&self, z: &[f64], tol: &Tolerance) -> Result<Option<f64>> {
        let n = self.dim();
        if z.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, piece dimension is {}",
                z.len(),
                n
            )));
        }
        // vars (y, t): min t s.t. Ay <= b, Ey = f, y - t1 <= z, -y - t1 <= -z
        let mut a = Matrix::zeros(0, n + 1);
        let mut b = Vec::new();
        for i in 0..self.a.rows() {
            let mut row = self.a.row(i).to_vec();
            row.push(0.0);
            a.push_row(&row);
            b.push(self.b[i]);
        }
        for j in 0..n {
            let mut row = vec![0.0; n + 1];
            row[j] = 1.0;
            row[n] = -1.0;
            a.push_row(&row);
            b.push(z[j]);
            let mut row = vec![0.0; n + 1];
            row[j] = -1.0;
            row[n] = -1.0;
            a.push_row(&row);
            b.push(-z[j]);
        }
        let mut e = Matrix::zeros(0, n + 1);
        for i in 0..self.e.rows() {
            let mut row = self.e.row(i).to_vec();
            row.push(0.0);
            e.push_row(&row);
        }
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let p = LpProblem::minimize(c, a, b).with_eq(e, self.f.clone());
        match solve_lp(&p, tol)? {
            LpOutcome::Optimal { value, .. } => Ok(Some(value.max(0.0))),
            LpOutcome::Infeasible { .. } => Ok(None),
            LpOutcome::Unbounded { .. } => unreachable!("distance LP is bounded below by 0"),
        }
    }
}

/// Finite union of convex polyhedra; the home of the set D.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyhedralSet {
    pub dim: usize,
    pub pieces: Vec<ConvexPolyhedron>,
}

impl PolyhedralSet {
    pub fn new(dim: usize, pieces: Vec<ConvexPolyhedron>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptySet);
        }
        for p in &pieces {
            if p.dim() != dim && (p.a.rows() > 0 || p.e.rows() > 0) {
                return Err(Error::DimensionMismatch(format!(
                    "piece dimension {} does not match set dimension {}",
                    p.dim(),
                    dim
                )));
            }
        }
        Ok(PolyhedralSet { dim, pieces })
    }

    pub fn single(piece: ConvexPolyhedron) -> Self {
        PolyhedralSet {
            dim: piece.dim(),
            pieces: vec![piece],
        }
    }

    pub fn whole_space(dim: usize) -> Self {
        PolyhedralSet::single(ConvexPolyhedron::whole_space(dim))
    }

    pub fn contains(&self, z: &[f64], tol: &Tolerance) -> Result<bool> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, set dimension is {}",
                z.len(),
                self.dim
            )));
        }
        Ok(self.pieces.iter().any(|p| p.contains(z, tol.eps_feas)))
    }

    /// Indices of pieces containing z.
    pub fn member_pieces(&self, z: &[f64], eps: f64) -> Vec<usize> {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.contains(z, eps))
            .map(|(i, _)| i)
            .collect()
    }

    /// Tangent cone T_S(z): union of the active-constraint cones of the
    /// pieces containing z. Exact for polyhedral sets.
    pub fn tangent_cone(&self, z: &[f64], tol: &Tolerance) -> Result<PolyhedralCone> {
        let members = self.member_pieces(z, tol.eps_feas);
        if members.is_empty() {
            let distance = match self.distance_inf(z, tol)? {
                ExtReal::Finite(d) => d,
                _ => f64::INFINITY,
            };
            return Err(Error::PointNotInSet { distance });
        }
        let pieces: Vec<ConvexPolyhedron> = members
            .iter()
            .map(|&i| self.pieces[i].tangent_cone_piece(z, tol))
            .collect();
        PolyhedralCone::from_pieces(self.dim, pieces)
    }

    /// Max-norm distance to the union; `PlusInf` when every piece is empty.
    pub fn distance_inf(&self, z: &[f64], tol: &Tolerance) -> Result<ExtReal> {
        let mut best: Option<f64> = None;
        for p in &self.pieces {
            if let Some(d) = p.distance_inf(z, tol)? {
                best = Some(match best {
                    Some(b) => b.min(d),
                    None => d,
                });
            }
        }
        Ok(best.map(ExtReal::Finite).unwrap_or(ExtReal::PlusInf))
    }

    pub fn is_empty(&self, tol: &Tolerance) -> bool {
        self.pieces.iter().all(|p| p.is_empty(tol))
    }

    /// Polar cone of the set viewed as a union of cones (b, f ignored):
    /// the intersection of the piece polars, assembled in H-representation
    /// from the piece rows.
    pub fn polar(&self, tol: &Tolerance) -> Result<ConvexPolyhedron> {
        let mut a = Matrix::zeros(0, self.dim);
        let mut e = Matrix::zeros(0, self.dim);
        for p in &self.pieces {
            // polar of {Aw<=0, Ew=0} is cone{rows A} + span{rows E}
            let gens = GeneratorRep {
                dim: self.dim,
                rays: p.a.row_vecs(),
                lines: p.e.row_vecs(),
            };
            let (pa, pe) = dd_v_to_h(&gens, tol)?;
            for i in 0..pa.rows() {
                a.push_row(pa.row(i));
            }
            for i in 0..pe.rows() {
                e.push_row(pe.row(i));
            }
        }
        Ok(ConvexPolyhedron::cone(a, e))
    }
}

/// A polyhedral cone: union of convex polyhedral cone pieces (b = 0, f = 0).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyhedralCone {
    set: PolyhedralSet,
}

impl PolyhedralCone {
    pub fn from_pieces(dim: usize, pieces: Vec<ConvexPolyhedron>) -> Result<Self> {
        for p in &pieces {
            if !p.is_cone(1e-12) {
                return Err(Error::DimensionMismatch(
                    "cone pieces must have zero right-hand sides".into(),
                ));
            }
        }
        let mut cone = PolyhedralCone {
            set: PolyhedralSet::new(dim, pieces)?,
        };
        if cone.set.pieces.len() > 32 {
            cone.prune(&Tolerance::default())?;
        }
        Ok(cone)
    }

    pub fn whole_space(dim: usize) -> Self {
        PolyhedralCone {
            set: PolyhedralSet::whole_space(dim),
        }
    }

    pub fn origin(dim: usize) -> Self {
        PolyhedralCone {
            set: PolyhedralSet::single(ConvexPolyhedron::cone(
                Matrix::empty(dim),
                Matrix::identity(dim),
            )),
        }
    }

    pub fn dim(&self) -> usize {
        self.set.dim
    }

    pub fn as_set(&self) -> &PolyhedralSet {
        &self.set
    }

    pub fn pieces(&self) -> &[ConvexPolyhedron] {
        &self.set.pieces
    }

    pub fn contains(&self, w: &[f64], tol: &Tolerance) -> Result<bool> {
        self.set.contains(w, tol)
    }

    pub fn polar(&self, tol: &Tolerance) -> Result<ConvexPolyhedron> {
        self.set.polar(tol)
    }

    /// Generators piece by piece.
    pub fn generators(&self, tol: &Tolerance) -> Result<Vec<GeneratorRep>> {
        self.set
            .pieces
            .iter()
            .map(|p| p.cone_generators(tol))
            .collect()
    }

    /// All generator directions merged across pieces.
    pub fn all_directions(&self, tol: &Tolerance) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for g in self.generators(tol)? {
            out.extend(g.directions());
        }
        Ok(out)
    }

    /// Remove pieces contained in another piece (mutual-inclusion tests on
    /// generators). Only invoked on large unions.
    fn prune(&mut self, tol: &Tolerance) -> Result<()> {
        let n = self.set.pieces.len();
        let mut keep = vec![true; n];
        for i in 0..n {
            if !keep[i] {
                continue;
            }
            for j in 0..n {
                if i == j || !keep[j] || !keep[i] {
                    continue;
                }
                if piece_subset(&self.set.pieces[i], &self.set.pieces[j], tol)? {
                    let mutual = piece_subset(&self.set.pieces[j], &self.set.pieces[i], tol)?;
                    if !mutual || j < i {
                        keep[i] = false;
                    }
                }
            }
        }
        let pieces: Vec<ConvexPolyhedron> = self
            .set
            .pieces
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(p, _)| p.clone())
            .collect();
        if !pieces.is_empty() {
            self.set = PolyhedralSet::new(self.set.dim, pieces)?;
        }
        Ok(())
    }
}

/// Is cone piece p contained in cone piece q? Decided on p's generators.
fn piece_subset(p: &ConvexPolyhedron, q: &ConvexPolyhedron, tol: &Tolerance) -> Result<bool> {
    let gens = p.cone_generators(tol)?;
    for d in gens.directions() {
        if !q.contains(&d, tol.eps_feas) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A face of a convex polyhedron, identified by its maximal active set.
#[derive(Debug, Clone)]
pub struct Face {
    pub parent: usize,
    pub active: Vec<usize>,
    pub rep_point: Vec<f64>,
}

/// Enumerate all nonempty faces of `piece` (including the improper face),
/// each once, by BFS over canonical maximal active sets. The representative
/// point lies in the relative interior of the face.
pub fn faces(piece: &ConvexPolyhedron, parent: usize, tol: &Tolerance) -> Result<Vec<Face>> {
    let m = piece.a.rows();
    if m > 20 {
        return Err(Error::ScaleCapExceeded(format!(
            "face enumeration capped at 20 inequality rows, got {m}"
        )));
    }
    let mut seen: Vec<u64> = Vec::new();
    let mut out: Vec<Face> = Vec::new();
    let mut queue: Vec<u64> = Vec::new();

    let Some((mask0, rep0)) = canonical_face(piece, 0, tol)? else {
        return Err(Error::EmptySet);
    };
    seen.push(mask0);
    out.push(face_from(parent, mask0, rep0, m));
    queue.push(mask0);

    while let Some(mask) = queue.pop() {
        for i in 0..m {
            let bit = 1u64 << i;
            if mask & bit != 0 {
                continue;
            }
            if let Some((cmask, rep)) = canonical_face(piece, mask | bit, tol)? {
                if !seen.contains(&cmask) {
                    seen.push(cmask);
                    out.push(face_from(parent, cmask, rep, m));
                    queue.push(cmask);
                }
            }
        }
    }
    out.sort_by_key(|f| (f.active.len(), f.active.clone()));
    Ok(out)
}

fn face_from(parent: usize, mask: u64, rep_point: Vec<f64>, m: usize) -> Face {
    Face {
        parent,
        active: (0..m).filter(|i| mask & (1u64 << i) != 0).collect(),
        rep_point,
    }
}

/// For the face candidate forcing rows in `mask` active: `None` if empty,
/// otherwise the maximal active set and a relative-interior point.
fn canonical_face(
    piece: &ConvexPolyhedron,
    mask: u64,
    tol: &Tolerance,
) -> Result<Option<(u64, Vec<f64>)>> {
    let m = piece.a.rows();
    let forced: Vec<usize> = (0..m).filter(|i| mask & (1u64 << i) != 0).collect();
    match relint_point(piece, &forced, tol)? {
        RelintOutcome::Empty => Ok(None),
        RelintOutcome::Interior(rep) => Ok(Some((mask, rep))),
        RelintOutcome::Degenerate => {
            // some rows outside the forced set are implied-active on the face
            let mut implied = forced.clone();
            for i in 0..m {
                if implied.contains(&i) {
                    continue;
                }
                if max_slack(piece, &forced, i, tol)? <= tol.eps_feas {
                    implied.push(i);
                }
            }
            implied.sort_unstable();
            let cmask = implied.iter().fold(0u64, |acc, &i| acc | (1u64 << i));
            match relint_point(piece, &implied, tol)? {
                RelintOutcome::Interior(rep) => Ok(Some((cmask, rep))),
                // remaining rows each admit positive slack, so a uniformly
                // slack point exists by convexity; a sub-tolerance margin
                // means the face is numerically gone
                _ => Ok(None),
            }
        }
    }
}

enum RelintOutcome {
    Empty,
    Degenerate,
    Interior(Vec<f64>),
}

/// Chebyshev-style LP: maximize a uniform slack r on the non-forced rows
/// subject to the forced rows holding with equality.
fn relint_point(
    piece: &ConvexPolyhedron,
    forced: &[usize],
    tol: &Tolerance,
) -> Result<RelintOutcome> {
    let n = piece.dim();
    let m = piece.a.rows();
    // vars (z, r)
    let mut a = Matrix::zeros(0, n + 1);
    let mut b = Vec::new();
    for i in 0..m {
        if forced.contains(&i) {
            continue;
        }
        let mut row = piece.a.row(i).to_vec();
        let scale = norm_inf(&row).max(1e-12);
        row.push(scale);
        a.push_row(&row);
        b.push(piece.b[i]);
    }
    // r <= 1
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    a.push_row(&cap);
    b.push(1.0);
    let mut e = Matrix::zeros(0, n + 1);
    let mut f = Vec::new();
    for &i in forced {
        let mut row = piece.a.row(i).to_vec();
        row.push(0.0);
        e.push_row(&row);
        f.push(piece.b[i]);
    }
    for i in 0..piece.e.rows() {
        let mut row = piece.e.row(i).to_vec();
        row.push(0.0);
        e.push_row(&row);
        f.push(piece.f[i]);
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let p = LpProblem {
        c,
        a_ineq: a,
        b_ineq: b,
        a_eq: e,
        b_eq: f,
        sense: Sense::Max,
    };
    match solve_lp(&p, tol)? {
        LpOutcome::Infeasible { .. } => Ok(RelintOutcome::Empty),
        LpOutcome::Unbounded { .. } => unreachable!("slack is capped at 1"),
        LpOutcome::Optimal { x, value, .. } => {
            if value > 1e-7 {
                Ok(RelintOutcome::Interior(x[..n].to_vec()))
            } else {
                Ok(RelintOutcome::Degenerate)
            }
        }
    }
}

/// Maximum slack of row `i` over the face with `forced` rows active.
fn max_slack(piece: &ConvexPolyhedron, forced: &[usize], i: usize, tol: &Tolerance) -> Result<f64> {
    let mut e = piece.e.clone();
    let mut f = piece.f.clone();
    for &j in forced {
        e.push_row(piece.a.row(j));
        f.push(piece.b[j]);
    }
    // maximize b_i - a_i z == minimize a_i z - b_i
    let p = LpProblem {
        c: piece.a.row(i).to_vec(),
        a_ineq: piece.a.clone(),
        b_ineq: piece.b.clone(),
        a_eq: e,
        b_eq: f,
        sense: Sense::Min,
    };
    match solve_lp(&p, tol)? {
        LpOutcome::Optimal { value, .. } => Ok(piece.b[i] - value),
        LpOutcome::Unbounded { .. } => Ok(f64::INFINITY),
        LpOutcome::Infeasible { .. } => Ok(f64::NEG_INFINITY),
    }
}

/// A relatively open cell of the hyperplane arrangement spanned by all rows
/// of all pieces, together with the membership pattern it realizes.
#[derive(Debug, Clone)]
pub struct Region {
    pub rep: Vec<f64>,
    /// For every member piece: (piece index, active inequality rows).
    pub pattern: Vec<(usize, Vec<usize>)>,
}

/// Enumerate the cells of the row arrangement of `s` that meet the set,
/// each with a relative-interior representative point. On every cell the
/// piece-membership pattern, and hence the regular normal cone of the
/// union, is constant.
pub fn pattern_regions(s: &PolyhedralSet, tol: &Tolerance) -> Result<Vec<Region>> {
    // collect and dedupe oriented hyperplanes (h, c): {z : h.z = c}
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    // per piece per row: (hyperplane index, orientation)
    let mut ineq_map: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut eq_map: Vec<Vec<(usize, f64)>> = Vec::new();
    for piece in &s.pieces {
        let mut imap = Vec::new();
        for i in 0..piece.a.rows() {
            imap.push(intern_plane(&mut planes, piece.a.row(i), piece.b[i]));
        }
        ineq_map.push(imap);
        let mut emap = Vec::new();
        for i in 0..piece.e.rows() {
            emap.push(intern_plane(&mut planes, piece.e.row(i), piece.f[i]));
        }
        eq_map.push(emap);
    }
    let nh = planes.len();
    if nh > 24 {
        return Err(Error::ScaleCapExceeded(format!(
            "pattern region enumeration capped at 24 distinct hyperplanes, got {nh}"
        )));
    }

    let mut regions = Vec::new();
    let mut signs: Vec<i8> = Vec::new();
    enumerate_cells(s, &planes, &ineq_map, &eq_map, &mut signs, tol, &mut regions)?;
    Ok(regions)
}

fn intern_plane(planes: &mut Vec<(Vec<f64>, f64)>, h: &[f64], c: f64) -> (usize, f64) {
    let scale = norm_inf(h);
    if scale <= 1e-12 {
        // all-zero row: constant sign everywhere, keep as a trivial plane
        let key = (vec![0.0; h.len()], c);
        if let Some(i) = planes.iter().position(|p| plane_eq(p, &key)) {
            return (i, 1.0);
        }
        planes.push(key);
        return (planes.len() - 1, 1.0);
    }
    let mut hn: Vec<f64> = h.iter().map(|v| v / scale).collect();
    let mut cn = c / scale;
    let mut orient = 1.0;
    if let Some(first) = hn.iter().find(|v| v.abs() > 1e-9) {
        if *first < 0.0 {
            for v in hn.iter_mut() {
                *v = -*v;
            }
            cn = -cn;
            orient = -1.0;
        }
    }
    let key = (hn, cn);
    if let Some(i) = planes.iter().position(|p| plane_eq(p, &key)) {
        (i, orient)
    } else {
        planes.push(key);
        (planes.len() - 1, orient)
    }
}

fn plane_eq(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> bool {
    (a.1 - b.1).abs() <= 1e-9
        && a.0.len() == b.0.len()
        && a.0.iter().zip(&b.0).all(|(x, y)| (x - y).abs() <= 1e-9)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_cells(
    s: &PolyhedralSet,
    planes: &[(Vec<f64>, f64)],
    ineq_map: &[Vec<(usize, f64)>],
    eq_map: &[Vec<(usize, f64)>],
    signs: &mut Vec<i8>,
    tol: &Tolerance,
    out: &mut Vec<Region>,
) -> Result<()> {
    let k = signs.len();
    if k == planes.len() {
        if let Some(region) = realize_cell(s, planes, ineq_map, eq_map, signs, tol)? {
            out.push(region);
        }
        return Ok(());
    }
    for sign in [-1i8, 0, 1] {
        signs.push(sign);
        if prefix_feasible(planes, signs, tol)? {
            enumerate_cells(s, planes, ineq_map, eq_map, signs, tol, out)?;
        }
        signs.pop();
    }
    Ok(())
}

/// Relaxed feasibility of the sign prefix (strict signs relaxed to weak).
fn prefix_feasible(planes: &[(Vec<f64>, f64)], signs: &[i8], tol: &Tolerance) -> Result<bool> {
    let dim = planes[0].0.len();
    let mut a = Matrix::zeros(0, dim);
    let mut b = Vec::new();
    let mut e = Matrix::zeros(0, dim);
    let mut f = Vec::new();
    for (i, &sg) in signs.iter().enumerate() {
        let (h, c) = &planes[i];
        match sg {
            0 => {
                e.push_row(h);
                f.push(*c);
            }
            1 => {
                a.push_row(&h.iter().map(|v| -v).collect::<Vec<_>>());
                b.push(-c);
            }
            _ => {
                a.push_row(h);
                b.push(*c);
            }
        }
    }
    let p = LpProblem::maximize(vec![0.0; dim], a, b).with_eq(e, f);
    Ok(!solve_lp(&p, tol)?.is_infeasible())
}

/// Strict-margin realization of a full sign vector; returns the region when
/// the cell is nonempty, relatively open, and meets the set.
fn realize_cell(
    s: &PolyhedralSet,
    planes: &[(Vec<f64>, f64)],
    ineq_map: &[Vec<(usize, f64)>],
    eq_map: &[Vec<(usize, f64)>],
    signs: &[i8],
    tol: &Tolerance,
) -> Result<Option<Region>> {
    // membership pattern from signs alone
    let mut pattern = Vec::new();
    for pi in 0..s.pieces.len() {
        let mut member = true;
        let mut active = Vec::new();
        for (ri, &(hi, orient)) in ineq_map[pi].iter().enumerate() {
            let rv = orient * signs[hi] as f64;
            if rv > 0.5 {
                member = false;
                break;
            }
            if signs[hi] == 0 {
                active.push(ri);
            }
        }
        if member {
            for &(hi, _) in &eq_map[pi] {
                if signs[hi] != 0 {
                    member = false;
                    break;
                }
            }
        }
        if member {
            pattern.push((pi, active));
        }
    }
    if pattern.is_empty() {
        return Ok(None);
    }

    // strict margin LP: maximize r <= 1 with sign-consistent slack
    let dim = s.dim;
    let mut a = Matrix::zeros(0, dim + 1);
    let mut b = Vec::new();
    let mut e = Matrix::zeros(0, dim + 1);
    let mut f = Vec::new();
    for (i, &sg) in signs.iter().enumerate() {
        let (h, c) = &planes[i];
        let mut row: Vec<f64>;
        match sg {
            0 => {
                row = h.clone();
                row.push(0.0);
                e.push_row(&row);
                f.push(*c);
            }
            1 => {
                row = h.iter().map(|v| -v).collect();
                row.push(1.0);
                a.push_row(&row);
                b.push(-c);
            }
            _ => {
                row = h.clone();
                row.push(1.0);
                a.push_row(&row);
                b.push(*c);
            }
        }
    }
    let mut cap = vec![0.0; dim + 1];
    cap[dim] = 1.0;
    a.push_row(&cap);
    b.push(1.0);
    let mut c = vec![0.0; dim + 1];
    c[dim] = 1.0;
    let p = LpProblem {
        c,
        a_ineq: a,
        b_ineq: b,
        a_eq: e,
        b_eq: f,
        sense: Sense::Max,
    };
    match solve_lp(&p, tol)? {
        LpOutcome::Optimal { x, value, .. } if value > 1e-7 => Ok(Some(Region {
            rep: x[..dim].to_vec(),
            pattern,
        })),
        _ => Ok(None),
    }
}
