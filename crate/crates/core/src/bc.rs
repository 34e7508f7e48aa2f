//! Boundary conditions `A ψ̄ + B ψ̄' = 0` on the boundary space and their normal forms.
//!
//! Self-adjointness of the signed operator is the pair of conditions
//! `rank(A | B) = n + m` and `B J A* = A J B*` with `J = diag(1_n, -1_m)`.
//! Replacing `B` by `B J` turns this into the familiar Laplacian condition,
//! which is how the unitary and projector parametrizations are obtained.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BoundaryIndex, GluedGraph, MetricGraph, Sign};
use crate::linalg::{self, c, CMatrix, I, ONE, ZERO};

/// Default relative tolerance for the symmetry residual.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Singular-value floor used when stacking two orthonormal row bases.
pub const SUBSPACE_TOL: f64 = 1e-9;

/// Tolerance on `‖U*U − 1‖_F` accepted by [`BoundaryConditions::from_unitary`].
pub const UNITARY_TOL: f64 = 1e-10;

/// `J = diag(1_n, -1_m)` on `K` and `H = diag(1_n, 1_m, 1_n, -1_m)` on `K²`.
#[derive(Debug, Clone)]
pub struct SignatureMatrices {
    pub j: CMatrix,
    pub h: CMatrix,
}

impl SignatureMatrices {
    pub fn new(n: usize, m: usize) -> Self {
        let mut h = vec![ONE; 2 * (n + m)];
        for v in h.iter_mut().skip(2 * n + m) {
            *v = -ONE;
        }
        Self {
            j: signature(n, m),
            h: linalg::diag(&h),
        }
    }
}

pub fn signature(n: usize, m: usize) -> CMatrix {
    let mut d = vec![ONE; n + m];
    for v in d.iter_mut().skip(n) {
        *v = -ONE;
    }
    linalg::diag(&d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfAdjointReport {
    pub rank: usize,
    pub dim: usize,
    pub rank_ok: bool,
    /// `‖B S A* − A S B*‖_F / (‖A‖_F + ‖B‖_F)²` with `S = J` or `S = 1`.
    pub symmetry_residual: f64,
    pub symmetry_ok: bool,
}

impl SelfAdjointReport {
    pub fn is_self_adjoint(&self) -> bool {
        self.rank_ok && self.symmetry_ok
    }
}

/// `(P, L)` with `Ker(A, B) = Ker(L + P, P⊥ J)`.
#[derive(Debug, Clone)]
pub struct ProjectorForm {
    pub p: CMatrix,
    pub l: CMatrix,
}

impl ProjectorForm {
    /// Largest violation of `P² = P = P*`, `L = L*`, `LP = PL = 0`.
    pub fn defect(&self) -> f64 {
        let p = &self.p;
        let l = &self.l;
        [
            linalg::max_abs(&(p * p - p)),
            linalg::max_abs(&(p - p.adjoint())),
            linalg::max_abs(&(l - l.adjoint())),
            linalg::max_abs(&(l * p)),
            linalg::max_abs(&(p * l)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryConditions {
    pub a: CMatrix,
    pub b: CMatrix,
    n: usize,
    m: usize,
    report: OnceLock<SelfAdjointReport>,
}

impl BoundaryConditions {
    pub fn new(a: CMatrix, b: CMatrix, index: &BoundaryIndex) -> Result<Self> {
        Self::with_dims(a, b, index.n, index.m)
    }

    pub fn with_dims(a: CMatrix, b: CMatrix, n: usize, m: usize) -> Result<Self> {
        let d = n + m;
        if a.shape() != (d, d) || b.shape() != (d, d) {
            return Err(Error::SizeMismatch(format!(
                "A is {}x{}, B is {}x{}, boundary space has dimension {d}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self {
            a,
            b,
            n,
            m,
            report: OnceLock::new(),
        })
    }

    pub fn dirichlet(n: usize, m: usize) -> Self {
        let d = n + m;
        Self::with_dims(linalg::identity(d), CMatrix::zeros(d, d), n, m).expect("square")
    }

    pub fn neumann(n: usize, m: usize) -> Self {
        let d = n + m;
        Self::with_dims(CMatrix::zeros(d, d), linalg::identity(d), n, m).expect("square")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn j(&self) -> CMatrix {
        signature(self.n, self.m)
    }

    /// `(A | B)`
    pub fn stacked(&self) -> CMatrix {
        linalg::hstack(&self.a, &self.b)
    }

    /// `(G A, G B)`, which describes the same subspace when `G` is invertible.
    pub fn left_multiply(&self, g: &CMatrix) -> Result<Self> {
        Self::with_dims(g * &self.a, g * &self.b, self.n, self.m)
    }

    /// Reorder slots: new slot `i` is old slot `perm[i]`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let rows: Vec<usize> = (0..self.dim()).collect();
        Self::with_dims(
            linalg::select(&self.a, &rows, perm),
            linalg::select(&self.b, &rows, perm),
            self.n,
            self.m,
        )
    }

    /// Self-adjointness of the signed operator at the default tolerance (cached).
    pub fn check_self_adjoint(&self) -> SelfAdjointReport {
        *self
            .report
            .get_or_init(|| self.check_with(&self.j(), SYMMETRY_TOL))
    }

    pub fn check_self_adjoint_tol(&self, tol: f64) -> SelfAdjointReport {
        self.check_with(&self.j(), tol)
    }

    /// The Laplacian conditions: maximal rank and `A B* = B A*`.
    pub fn check_laplacian_self_adjoint(&self) -> SelfAdjointReport {
        self.check_with(&linalg::identity(self.dim()), SYMMETRY_TOL)
    }

    fn check_with(&self, s: &CMatrix, tol: f64) -> SelfAdjointReport {
        let dim = self.dim();
        let rank = linalg::numerical_rank(&self.stacked());
        let lhs = &self.b * s * self.a.adjoint();
        let rhs = &self.a * s * self.b.adjoint();
        let scale = (linalg::fro_norm(&self.a) + linalg::fro_norm(&self.b)).powi(2);
        let raw = linalg::fro_norm(&(lhs - rhs));
        let symmetry_residual = if scale > 0.0 { raw / scale } else { 0.0 };
        SelfAdjointReport {
            rank,
            dim,
            rank_ok: rank == dim,
            symmetry_residual,
            symmetry_ok: symmetry_residual <= tol,
        }
    }

    fn require_self_adjoint(&self) -> Result<()> {
        let r = self.check_self_adjoint();
        if r.is_self_adjoint() {
            Ok(())
        } else {
            Err(Error::NotSelfAdjoint {
                rank: r.rank,
                dim: r.dim,
                residual: r.symmetry_residual,
            })
        }
    }

    /// Same subspace `Ker(A | B)`.
    ///
    /// Both row spaces are orthonormalized first, so the decision does not
    /// depend on how the rows are scaled. The stacked bases have rank `r` iff
    /// the largest principal angle is below [`SUBSPACE_TOL`].
    pub fn subspace_equal(&self, other: &Self) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let q1 = linalg::row_space(&self.stacked());
        let q2 = linalg::row_space(&other.stacked());
        if q1.nrows() != q2.nrows() {
            return false;
        }
        let sv = linalg::singular_values(&linalg::vstack(&q1, &q2));
        sv.iter().filter(|&&s| s > SUBSPACE_TOL).count() == q1.nrows()
    }

    pub fn to_projector_form(&self) -> Result<ProjectorForm> {
        self.require_self_adjoint()?;
        let d = self.dim();
        let j = self.j();
        let b0 = &self.b * &j;
        let ker = linalg::null_space(&b0, None);
        let p = linalg::projector_onto(&ker);
        let p_perp = linalg::identity(d) - &p;
        let l = &p_perp * linalg::pseudo_inverse(&b0) * &self.a * &p_perp;
        let form = ProjectorForm {
            p,
            l: linalg::hermitian_part(&l),
        };
        let check = Self::with_dims(&form.l + &form.p, p_perp * j, self.n, self.m)?;
        if !self.subspace_equal(&check) {
            return Err(Error::NotSelfAdjoint {
                rank: linalg::numerical_rank(&self.stacked()),
                dim: d,
                residual: self.check_self_adjoint().symmetry_residual,
            });
        }
        Ok(form)
    }

    pub fn from_projector_form(form: &ProjectorForm, n: usize, m: usize) -> Result<Self> {
        let p_perp = linalg::identity(n + m) - &form.p;
        Self::with_dims(&form.l + &form.p, p_perp * signature(n, m), n, m)
    }

    /// The unitary `U = −(A + iBJ)⁻¹(A − iBJ)` of the equivalent Laplacian conditions.
    pub fn to_unitary(&self) -> Result<CMatrix> {
        self.require_self_adjoint()?;
        let b0 = &self.b * self.j();
        let plus = &self.a + &b0 * I;
        let minus = &self.a - &b0 * I;
        let u = linalg::solve(&plus, &minus).ok_or(Error::NotSelfAdjoint {
            rank: linalg::numerical_rank(&self.stacked()),
            dim: self.dim(),
            residual: self.check_self_adjoint().symmetry_residual,
        })?;
        Ok(-u)
    }

    /// `A = −(U − 1)/2`, `B = (U + 1) J / (2i)`.
    pub fn from_unitary(u: &CMatrix, n: usize, m: usize) -> Result<Self> {
        let d = n + m;
        if u.shape() != (d, d) {
            return Err(Error::SizeMismatch(format!(
                "U is {}x{}, expected {d}x{d}",
                u.nrows(),
                u.ncols()
            )));
        }
        let defect = linalg::unitarity_defect(u);
        if defect > UNITARY_TOL * (d as f64).sqrt().max(1.0) {
            return Err(Error::NotUnitary(defect));
        }
        let one = linalg::identity(d);
        let a = (u - &one) * c(-0.5, 0.0);
        let b = (u + &one) * signature(n, m) * (ONE / (2.0 * I));
        Self::with_dims(a, b, n, m)
    }

    pub fn from_document(doc: &BcDocument, graph: &MetricGraph) -> Result<Self> {
        let index = graph.boundary_index();
        match doc {
            BcDocument::Matrix { a, b } => Self::new(to_matrix(a)?, to_matrix(b)?, &index),
            BcDocument::Unitary { u } => Self::from_unitary(&to_matrix(u)?, index.n, index.m),
            BcDocument::StandardSignedVertices => standard_signed_vertices(graph),
        }
    }

    pub fn from_json(text: &str, graph: &MetricGraph) -> Result<Self> {
        let doc: BcDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_document(&doc, graph)
    }

    pub fn to_document(&self) -> BcDocument {
        BcDocument::Matrix {
            a: from_matrix(&self.a),
            b: from_matrix(&self.b),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("matrices serialize")
    }
}

/// Boundary-condition document. Complex entries are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcDocument {
    Matrix {
        #[serde(rename = "A")]
        a: Vec<Vec<[f64; 2]>>,
        #[serde(rename = "B")]
        b: Vec<Vec<[f64; 2]>>,
    },
    Unitary {
        #[serde(rename = "U")]
        u: Vec<Vec<[f64; 2]>>,
    },
    StandardSignedVertices,
}

fn to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Document("ragged matrix rows".into()));
    }
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| c(re, im)).collect())
        .collect();
    Ok(linalg::from_rows(&rows))
}

fn from_matrix(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Local vertex conditions: continuity of values, and the signed sum of
/// derivatives vanishing. Slots are ordered `+` first.
pub fn standard_signed_vertex(deg_plus: usize, deg_minus: usize) -> Result<(CMatrix, CMatrix)> {
    let d = deg_plus + deg_minus;
    if d == 0 {
        return Err(Error::ZeroDegree);
    }
    let mut a = CMatrix::zeros(d, d);
    let mut b = CMatrix::zeros(d, d);
    for i in 0..d - 1 {
        a[(i, i)] = ONE;
        a[(i, i + 1)] = -ONE;
    }
    for j in 0..d {
        b[(d - 1, j)] = if j < deg_plus { ONE } else { -ONE };
    }
    Ok((a, b))
}

/// Global `(A, B)` with [`standard_signed_vertex`] blocks at every vertex.
pub fn standard_signed_vertices(graph: &MetricGraph) -> Result<BoundaryConditions> {
    let index = graph.boundary_index();
    let d = index.dim();
    let mut a = CMatrix::zeros(d, d);
    let mut b = CMatrix::zeros(d, d);
    let mut row = 0;
    for v in graph.vertices() {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (e, &s) in graph.external().iter().zip(&index.external_slot) {
            if &e.at == v {
                push_signed(e.sign, s, &mut plus, &mut minus);
            }
        }
        for (e, &(o, t)) in graph.internal().iter().zip(&index.internal_slots) {
            if &e.from == v {
                push_signed(e.sign, o, &mut plus, &mut minus);
            }
            if &e.to == v {
                push_signed(e.sign, t, &mut plus, &mut minus);
            }
        }
        if plus.is_empty() && minus.is_empty() {
            continue;
        }
        plus.sort_unstable();
        minus.sort_unstable();
        let (la, lb) = standard_signed_vertex(plus.len(), minus.len())?;
        let cols: Vec<usize> = plus.into_iter().chain(minus).collect();
        for i in 0..cols.len() {
            for (j, &col) in cols.iter().enumerate() {
                a[(row + i, col)] = la[(i, j)];
                b[(row + i, col)] = lb[(i, j)];
            }
        }
        row += cols.len();
    }
    debug_assert_eq!(row, d);
    BoundaryConditions::new(a, b, &index)
}

fn push_signed(sign: Sign, slot: usize, plus: &mut Vec<usize>, minus: &mut Vec<usize>) {
    match sign {
        Sign::Plus => plus.push(slot),
        Sign::Minus => minus.push(slot),
    }
}

/// `Σ a(I+) − Σ a(I-)` for a compact graph.
pub fn form_invertibility_margin(graph: &MetricGraph) -> Result<f64> {
    if !graph.is_compact() {
        return Err(Error::NotCompact);
    }
    Ok(graph.total_length(Sign::Plus) - graph.total_length(Sign::Minus))
}

impl GluedGraph {
    /// Conditions of the glued graph: the rows of both inputs with columns
    /// carried to the new slots.
    pub fn glue_conditions(
        &self,
        bc1: &BoundaryConditions,
        bc2: &BoundaryConditions,
    ) -> Result<BoundaryConditions> {
        if bc1.dim() != self.map1.len() || bc2.dim() != self.map2.len() {
            return Err(Error::SizeMismatch(
                "boundary conditions do not match the glued graphs".into(),
            ));
        }
        let index = self.graph.boundary_index();
        let d = index.dim();
        let mut a = CMatrix::from_element(d, d, ZERO);
        let mut b = CMatrix::from_element(d, d, ZERO);
        for (offset, bc, map) in [(0, bc1, &self.map1), (bc1.dim(), bc2, &self.map2)] {
            for i in 0..bc.dim() {
                for (j, &col) in map.iter().enumerate() {
                    a[(offset + i, col)] = bc.a[(i, j)];
                    b[(offset + i, col)] = bc.b[(i, j)];
                }
            }
        }
        BoundaryConditions::new(a, b, &index)
    }
}
