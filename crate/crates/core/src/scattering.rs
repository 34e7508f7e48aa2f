//! Generalized eigenfunctions, scattering matrices and their composition.
//!
//! For `λ = k² > 0` the scattering matrix is the `E+ × E+` block of `χ(k, ik)`.
//! For `λ = −κ² < 0` it is the `E- × E-` block of `χ(iκ, −κ)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::graph::{MetricGraph, Sign};
use crate::linalg::{self, CMatrix, I};
use crate::report;
use crate::resolvent::EdgePoint;
use crate::secular::{self, SpectralParams};

/// Reciprocal condition below which a star-product bracket counts as critical.
pub const CRITICAL_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcInterval {
    pub lo: f64,
    pub hi: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcSpectrumInfo {
    pub intervals: Vec<AcInterval>,
}

/// `(0, ∞)` with multiplicity `|E+|` and `(−∞, 0)` with multiplicity `|E-|`.
pub fn ac_spectrum(g: &MetricGraph) -> AcSpectrumInfo {
    let mut intervals = Vec::new();
    let minus = g.external_count(Sign::Minus);
    let plus = g.external_count(Sign::Plus);
    if minus > 0 {
        intervals.push(AcInterval {
            lo: f64::NEG_INFINITY,
            hi: 0.0,
            multiplicity: minus,
        });
    }
    if plus > 0 {
        intervals.push(AcInterval {
            lo: 0.0,
            hi: f64::INFINITY,
            multiplicity: plus,
        });
    }
    AcSpectrumInfo { intervals }
}

/// Parameter choice for a generalized eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyBranch {
    /// `(k, ik)`
    Positive,
    /// `(−k, ik)`
    PositiveConjugate,
    /// `(iκ, κ)`
    Negative,
    /// `(iκ, −κ)`
    NegativeConjugate,
}

impl EnergyBranch {
    pub fn params(self, k: f64) -> SpectralParams {
        match self {
            EnergyBranch::Positive => SpectralParams::positive_energy(k),
            EnergyBranch::PositiveConjugate => SpectralParams::positive_energy_conjugate(k),
            EnergyBranch::Negative => SpectralParams::negative_energy(k),
            EnergyBranch::NegativeConjugate => SpectralParams::negative_energy_conjugate(k),
        }
    }
}

/// Values of `φ_l` at `points`: an incoming `e^{−izx}` on edge `l` plus the
/// response encoded in column `l` of `χ`.
pub fn generalized_eigenfunction(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    incoming: &str,
    branch: EnergyBranch,
    k: f64,
    points: &[EdgePoint],
) -> Result<Vec<Complex64>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Range(format!("k must be positive, got {k}")));
    }
    let index = g.boundary_index();
    let l_edge = g.external_edge(incoming).ok_or_else(|| {
        if g.internal_edge(incoming).is_some() {
            Error::NotExternal(incoming.to_string())
        } else {
            Error::UnknownEdge(incoming.to_string())
        }
    })?;
    let params = branch.params(k);
    let chi = secular::chi_coefficients(bc, g, &params)?;
    let l_slot = index.slot(incoming, crate::graph::Endpoint::Origin).expect("external slot");
    let col = index
        .external_columns()
        .iter()
        .position(|&s| s == l_slot)
        .expect("external column");
    points
        .iter()
        .map(|p| {
            let (sign, length) = g.edge(&p.edge).ok_or_else(|| Error::UnknownEdge(p.edge.clone()))?;
            if p.x < 0.0 || length.is_some_and(|a| p.x > a) {
                return Err(Error::PointOutside {
                    edge: p.edge.clone(),
                    x: p.x,
                });
            }
            let z = params.z(sign);
            let out = (I * z * p.x).exp();
            let mut v = Complex64::new(0.0, 0.0);
            match length {
                None => {
                    let s = index.slot(&p.edge, crate::graph::Endpoint::Origin).expect("slot");
                    v += chi[(s, col)] * out;
                    if p.edge == l_edge.id {
                        v += (-I * z * p.x).exp();
                    }
                }
                Some(_) => {
                    let o = index.slot(&p.edge, crate::graph::Endpoint::Origin).expect("slot");
                    let t = index.slot(&p.edge, crate::graph::Endpoint::Terminus).expect("slot");
                    v += chi[(o, col)] * out + chi[(t, col)] * (-I * z * p.x).exp();
                }
            }
            Ok(v)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScatteringMatrix {
    pub lambda: f64,
    pub matrix: CMatrix,
    /// External edge ids labelling rows and columns.
    pub edges: Vec<String>,
    /// `‖S* S − 1‖_F`
    pub unitarity_residual: f64,
}

fn external_ids(g: &MetricGraph, sign: Sign) -> Vec<String> {
    g.external()
        .iter()
        .filter(|e| e.sign == sign)
        .map(|e| e.id.clone())
        .collect()
}

/// `S(λ)` for nonzero real `λ`.
pub fn scattering_matrix(bc: &BoundaryConditions, g: &MetricGraph, lambda: f64) -> Result<ScatteringMatrix> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::ZeroParameter);
    }
    let (sign, params) = if lambda > 0.0 {
        (Sign::Plus, SpectralParams::positive_energy(lambda.sqrt()))
    } else {
        (Sign::Minus, SpectralParams::negative_energy_conjugate((-lambda).sqrt()))
    };
    let edges = external_ids(g, sign);
    if edges.is_empty() {
        return Err(Error::NoExternalEdges);
    }
    let chi = secular::chi_external(bc, g, &params)?;
    let np = g.external_count(Sign::Plus);
    let range: Vec<usize> = match sign {
        Sign::Plus => (0..np).collect(),
        Sign::Minus => (np..chi.nrows()).collect(),
    };
    let matrix = linalg::select(&chi, &range, &range);
    Ok(ScatteringMatrix {
        lambda,
        unitarity_residual: linalg::unitarity_defect(&matrix),
        matrix,
        edges,
    })
}

/// `χ_{E,E}(k, ik)` with its sign blocks, the input to the star product.
#[derive(Debug, Clone)]
pub struct ScatteringData {
    pub k: f64,
    pub chi_ee: CMatrix,
    pub plus_edges: Vec<String>,
    pub minus_edges: Vec<String>,
}

impl ScatteringData {
    pub fn new(bc: &BoundaryConditions, g: &MetricGraph, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Range(format!("k must be positive, got {k}")));
        }
        Ok(Self {
            k,
            chi_ee: secular::chi_external(bc, g, &SpectralParams::positive_energy(k))?,
            plus_edges: external_ids(g, Sign::Plus),
            minus_edges: external_ids(g, Sign::Minus),
        })
    }

    pub fn block(&self, rows: Sign, cols: Sign) -> CMatrix {
        let np = self.plus_edges.len();
        let d = self.chi_ee.nrows();
        let range = |s: Sign| -> Vec<usize> {
            match s {
                Sign::Plus => (0..np).collect(),
                Sign::Minus => (np..d).collect(),
            }
        };
        linalg::select(&self.chi_ee, &range(rows), &range(cols))
    }

    /// Same data with the negative edges listed in `order`.
    pub fn with_minus_order(&self, order: &[String]) -> Result<Self> {
        let np = self.plus_edges.len();
        let mut perm: Vec<usize> = (0..np).collect();
        for id in order {
            let j = self
                .minus_edges
                .iter()
                .position(|e| e == id)
                .ok_or_else(|| Error::UnknownEdge(id.clone()))?;
            if perm.contains(&(np + j)) {
                return Err(Error::DuplicateId(id.clone()));
            }
            perm.push(np + j);
        }
        if perm.len() != self.chi_ee.nrows() {
            return Err(Error::SizeMismatch(format!(
                "{} of {} negative edges listed",
                order.len(),
                self.minus_edges.len()
            )));
        }
        Ok(Self {
            k: self.k,
            chi_ee: linalg::select(&self.chi_ee, &perm, &perm),
            plus_edges: self.plus_edges.clone(),
            minus_edges: order.to_vec(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct GluedScattering {
    pub matrix: CMatrix,
    pub edges: Vec<String>,
    pub unitarity_residual: f64,
    /// Smallest reciprocal condition of the two bracketed matrices.
    pub rcond: f64,
}

fn solve_or_critical(m: &CMatrix, rhs: &CMatrix) -> Result<(CMatrix, f64)> {
    let rc = linalg::rcond(m);
    if rc < CRITICAL_RCOND {
        return Err(Error::CriticalSet(rc));
    }
    let x = linalg::solve(m, rhs).ok_or(Error::CriticalSet(rc))?;
    Ok((x, rc))
}

/// Scattering matrix of the graph obtained by joining the `i`-th negative
/// half-line of `d1` to the `i`-th negative half-line of `d2` by an edge of
/// length `lengths[i]`. Rows and columns are `E+` of `d1` then `E+` of `d2`.
pub fn star_product_glue(d1: &ScatteringData, d2: &ScatteringData, lengths: &[f64]) -> Result<GluedScattering> {
    let q = d1.minus_edges.len();
    if d2.minus_edges.len() != q || lengths.len() != q {
        return Err(Error::SizeMismatch(format!(
            "{} and {} negative edges with {} lengths",
            q,
            d2.minus_edges.len(),
            lengths.len()
        )));
    }
    if (d1.k - d2.k).abs() > 1e-14 * d1.k {
        return Err(Error::SizeMismatch("scattering data at different k".into()));
    }
    let k = d1.k;
    let e = linalg::diag(&lengths.iter().map(|a| Complex64::new((-k * a).exp(), 0.0)).collect::<Vec<_>>());
    let (pp1, pm1, mp1, mm1) = (
        d1.block(Sign::Plus, Sign::Plus),
        d1.block(Sign::Plus, Sign::Minus),
        d1.block(Sign::Minus, Sign::Plus),
        d1.block(Sign::Minus, Sign::Minus),
    );
    let (pp2, pm2, mp2, mm2) = (
        d2.block(Sign::Plus, Sign::Plus),
        d2.block(Sign::Plus, Sign::Minus),
        d2.block(Sign::Minus, Sign::Plus),
        d2.block(Sign::Minus, Sign::Minus),
    );
    let one = linalg::identity(q);
    let m1 = &one - &mm1 * &e * &mm2 * &e;
    let m2 = &one - &e * &mm2 * &e * &mm1;
    let (m1_mp1, rc1) = solve_or_critical(&m1, &mp1)?;
    let e_mp2 = &e * &mp2;
    let (m2_emp2, rc2) = solve_or_critical(&m2, &e_mp2)?;

    let s11 = &pp1 + &pm1 * &e * &mm2 * &e * &m1_mp1;
    let s21 = &pm2 * &e * &m1_mp1;
    let s12 = &pm1 * &m2_emp2;
    let s22 = &pp2 + &pm2 * &e * &mm1 * &m2_emp2;

    let (n1, n2) = (pp1.nrows(), pp2.nrows());
    let mut s = CMatrix::zeros(n1 + n2, n1 + n2);
    s.view_mut((0, 0), (n1, n1)).copy_from(&s11);
    s.view_mut((0, n1), (n1, n2)).copy_from(&s12);
    s.view_mut((n1, 0), (n2, n1)).copy_from(&s21);
    s.view_mut((n1, n1), (n2, n2)).copy_from(&s22);
    let edges = d1.plus_edges.iter().chain(&d2.plus_edges).cloned().collect();
    Ok(GluedScattering {
        unitarity_residual: linalg::unitarity_defect(&s),
        matrix: s,
        edges,
        rcond: rc1.min(rc2),
    })
}

/// Join positive half-lines `p` and `q` (indices into `s`) by an edge of
/// length `a`. Each traversal of the new edge picks up `e^{ika}`.
pub fn positive_edge_glue(s: &CMatrix, p: usize, q: usize, a: f64, k: f64) -> Result<CMatrix> {
    let d = s.nrows();
    if s.ncols() != d || p >= d || q >= d || p == q {
        return Err(Error::SizeMismatch(format!("cannot glue slots {p} and {q} of a {d}x{d} matrix")));
    }
    if !(a >= 0.0 && k > 0.0) {
        return Err(Error::Range(format!("need a >= 0 and k > 0, got a = {a}, k = {k}")));
    }
    let keep: Vec<usize> = (0..d).filter(|&i| i != p && i != q).collect();
    let glued = [p, q];
    let s_ee = linalg::select(s, &keep, &keep);
    let s_ec = linalg::select(s, &keep, &glued);
    let s_ce = linalg::select(s, &glued, &keep);
    let s_cc = linalg::select(s, &glued, &glued);
    let phase = (I * k * a).exp();
    let mut gamma = CMatrix::zeros(2, 2);
    gamma[(0, 1)] = phase;
    gamma[(1, 0)] = phase;
    let m = linalg::identity(2) - &gamma * &s_cc;
    let (x, _) = solve_or_critical(&m, &(&gamma * &s_ce))?;
    Ok(s_ee + s_ec * x)
}

/// CSV of `S(λ)` over `lambdas` (all of one sign). Resonant samples are
/// written as `NaN`.
pub fn sweep_csv(bc: &BoundaryConditions, g: &MetricGraph, lambdas: &[f64], header: &str) -> Result<(String, Vec<Option<ScatteringMatrix>>)> {
    if lambdas.is_empty() {
        return Err(Error::Range("empty sweep".into()));
    }
    let positive = lambdas[0] > 0.0;
    if lambdas.iter().any(|&l| l == 0.0 || (l > 0.0) != positive) {
        return Err(Error::Range("a sweep must stay on one side of zero".into()));
    }
    let sign = if positive { Sign::Plus } else { Sign::Minus };
    let ids = external_ids(g, sign);
    if ids.is_empty() {
        return Err(Error::NoExternalEdges);
    }
    let results: Vec<Result<Option<ScatteringMatrix>>> = lambdas
        .par_iter()
        .map(|&l| match scattering_matrix(bc, g, l) {
            Ok(s) => Ok(Some(s)),
            Err(Error::Resonance(..)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let results: Vec<Option<ScatteringMatrix>> = results.into_iter().collect::<Result<_>>()?;

    let mut out = String::from(header);
    let mut cols = vec!["lambda".to_string()];
    for r in &ids {
        for c in &ids {
            cols.push(format!("re_S_{{{r},{c}}}"));
            cols.push(format!("im_S_{{{r},{c}}}"));
        }
    }
    out.push_str(&report::row(cols));
    let q = ids.len();
    for (&l, s) in lambdas.iter().zip(&results) {
        let mut fields = vec![report::float(l)];
        for i in 0..q {
            for j in 0..q {
                let v = s.as_ref().map_or(Complex64::new(f64::NAN, f64::NAN), |s| s.matrix[(i, j)]);
                fields.push(report::float(v.re));
                fields.push(report::float(v.im));
            }
        }
        out.push_str(&report::row(fields));
    }
    Ok((out, results))
}
