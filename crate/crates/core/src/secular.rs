//! Secular matrices `X, Y, Z`, the factors `I, R±, T`, the coefficient matrix
//! `Cm` and the generalized-eigenfunction coefficients `χ`.
//!
//! Each edge is expanded in `e^{izx}` (outgoing) and `e^{-izx}` (incoming), with
//! `z = z+` on positive edges and `z = z-` on negative edges. An internal edge
//! owns two coefficient columns: `α` sits at its origin slot and `β` at its
//! terminus slot. An external edge owns a single column at its slot.

use num_complex::Complex64;

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::graph::{BoundaryIndex, MetricGraph, Sign};
use crate::linalg::{self, CMatrix, I, ONE, ZERO};

/// The pair `(z+, z-)` used on positive and negative edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
}

impl SpectralParams {
    pub fn new(z_plus: Complex64, z_minus: Complex64) -> Result<Self> {
        if z_plus == ZERO || z_minus == ZERO || !(z_plus.is_finite() && z_minus.is_finite()) {
            return Err(Error::ZeroParameter);
        }
        Ok(Self { z_plus, z_minus })
    }

    /// `(k, ik)`: positive energy `λ = k²`, also the resolvent branch for `Re k > 0`.
    pub fn positive_energy(k: f64) -> Self {
        Self::quadrant_q(Complex64::new(k, 0.0))
    }

    /// `(−k, ik)`
    pub fn positive_energy_conjugate(k: f64) -> Self {
        Self {
            z_plus: Complex64::new(-k, 0.0),
            z_minus: Complex64::new(0.0, k),
        }
    }

    /// `(iκ, κ)`: negative energy `λ = −κ²`.
    pub fn negative_energy(kappa: f64) -> Self {
        Self {
            z_plus: Complex64::new(0.0, kappa),
            z_minus: Complex64::new(kappa, 0.0),
        }
    }

    /// `(iκ, −κ)`
    pub fn negative_energy_conjugate(kappa: f64) -> Self {
        Self {
            z_plus: Complex64::new(0.0, kappa),
            z_minus: Complex64::new(-kappa, 0.0),
        }
    }

    /// `(k, ik)` for complex `k`.
    pub fn quadrant_q(k: Complex64) -> Self {
        Self {
            z_plus: k,
            z_minus: I * k,
        }
    }

    /// `(k, −ik)` for complex `k`.
    pub fn quadrant_p(k: Complex64) -> Self {
        Self {
            z_plus: k,
            z_minus: -I * k,
        }
    }

    pub fn z(&self, sign: Sign) -> Complex64 {
        match sign {
            Sign::Plus => self.z_plus,
            Sign::Minus => self.z_minus,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            z_plus: -self.z_plus,
            z_minus: -self.z_minus,
        }
    }
}

/// `det Z = mantissa · exp(log_scale)` with `|mantissa| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDeterminant {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledDeterminant {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}

/// Column shifts that damp the growing exponential of every internal edge by
/// `exp(−|Im(za)|)`. External columns are not shifted.
pub(crate) fn balancing_shifts(g: &MetricGraph, index: &BoundaryIndex, params: &SpectralParams) -> Vec<f64> {
    let mut shift = vec![0.0; index.dim()];
    for (e, &(o, t)) in g.internal().iter().zip(&index.internal_slots) {
        let iza = I * params.z(e.sign) * e.length;
        if iza.re < 0.0 {
            // |e^{iza}| = e^{-Im(za)} < 1, so β carries the growth
            shift[t] = iza.re;
        } else {
            shift[o] = -iza.re;
        }
    }
    shift
}

/// `X` and `Y` with column `j` multiplied by `exp(shift[j])`, the shift being
/// folded into the exponent so nothing overflows.
pub(crate) fn shifted_templates(
    g: &MetricGraph,
    index: &BoundaryIndex,
    params: &SpectralParams,
    shift: &[f64],
) -> (CMatrix, CMatrix) {
    let d = index.dim();
    let mut x = CMatrix::zeros(d, d);
    let mut y = CMatrix::zeros(d, d);
    for (e, &s) in g.external().iter().zip(&index.external_slot) {
        let z = params.z(e.sign);
        let f = shift[s].exp();
        x[(s, s)] = f.into();
        y[(s, s)] = I * z * f;
    }
    for (e, &(o, t)) in g.internal().iter().zip(&index.internal_slots) {
        let z = params.z(e.sign);
        let iza = I * z * e.length;
        let ea = shift[o].exp();
        let eb = shift[t].exp();
        let grow = (iza + shift[o]).exp();
        let decay = (-iza + shift[t]).exp();
        x[(o, o)] = ea.into();
        x[(o, t)] = eb.into();
        x[(t, o)] = grow;
        x[(t, t)] = decay;
        y[(o, o)] = I * z * ea;
        y[(o, t)] = -I * z * eb;
        y[(t, o)] = -I * z * grow;
        y[(t, t)] = I * z * decay;
    }
    (x, y)
}

/// Per-edge templates for `X` (values) and `Y` (inward derivatives).
pub fn build_xy(g: &MetricGraph, index: &BoundaryIndex, params: &SpectralParams) -> (CMatrix, CMatrix) {
    shifted_templates(g, index, params, &vec![0.0; index.dim()])
}

/// `I = diag(i z+ 1_n, i z- 1_m)`
pub fn i_matrix(index: &BoundaryIndex, params: &SpectralParams) -> CMatrix {
    let d: Vec<Complex64> = index.slots.iter().map(|s| I * params.z(s.sign)).collect();
    linalg::diag(&d)
}

/// `W = diag(i/(2z+) 1_n, i/(2z-) 1_m)`
pub fn w_matrix(index: &BoundaryIndex, params: &SpectralParams) -> CMatrix {
    let d: Vec<Complex64> = index
        .slots
        .iter()
        .map(|s| I / (2.0 * params.z(s.sign)))
        .collect();
    linalg::diag(&d)
}

/// `(R+, R-, T)` in closed form; `R± = (X ± I⁻¹Y)/2` and `T = R- R+⁻¹`.
pub fn build_rt(
    g: &MetricGraph,
    index: &BoundaryIndex,
    params: &SpectralParams,
) -> (CMatrix, CMatrix, CMatrix) {
    let d = index.dim();
    let mut rp = CMatrix::zeros(d, d);
    let mut rm = CMatrix::zeros(d, d);
    let mut t = CMatrix::zeros(d, d);
    for &s in &index.external_slot {
        rp[(s, s)] = ONE;
    }
    for (e, &(o, te)) in g.internal().iter().zip(&index.internal_slots) {
        let eiza = (I * params.z(e.sign) * e.length).exp();
        rp[(o, o)] = ONE;
        rp[(te, te)] = (-I * params.z(e.sign) * e.length).exp();
        rm[(o, te)] = ONE;
        rm[(te, o)] = eiza;
        t[(o, te)] = eiza;
        t[(te, o)] = eiza;
    }
    (rp, rm, t)
}

/// `R+⁻¹`, diagonal with entries `1` and `e^{iza}`.
pub fn r_plus_inverse(g: &MetricGraph, index: &BoundaryIndex, params: &SpectralParams) -> CMatrix {
    let mut r = linalg::identity(index.dim());
    for (e, &(_, t)) in g.internal().iter().zip(&index.internal_slots) {
        r[(t, t)] = (I * params.z(e.sign) * e.length).exp();
    }
    r
}

/// Injection of the external slots, columns ordered `E+` then `E-`.
pub fn external_injection(index: &BoundaryIndex) -> CMatrix {
    let cols = index.external_columns();
    let mut e = CMatrix::zeros(index.dim(), cols.len());
    for (j, &s) in cols.iter().enumerate() {
        e[(s, j)] = ONE;
    }
    e
}

#[derive(Debug, Clone)]
pub struct SecularMatrix {
    pub z: CMatrix,
    /// Plain LU determinant; may overflow for large `|Im z|·a`.
    pub det: Complex64,
    pub scaled: ScaledDeterminant,
}

/// Column-balanced form of `Z`: `Z = Zs · diag(exp(−shift))`, unit-norm columns.
#[derive(Debug, Clone)]
pub(crate) struct BalancedZ {
    pub zs: CMatrix,
    /// `Z⁻¹ = diag(colscale) · Zs⁻¹`
    pub colscale: Vec<f64>,
    pub shift: Vec<f64>,
    pub norms: Vec<f64>,
    pub scaled: ScaledDeterminant,
}

pub(crate) fn balanced_z(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    index: &BoundaryIndex,
    params: &SpectralParams,
) -> BalancedZ {
    let shift = balancing_shifts(g, index, params);
    let (xs, ys) = shifted_templates(g, index, params, &shift);
    let mut zs = &bc.a * xs + &bc.b * ys;
    let mut log_scale = 0.0;
    let mut colscale = vec![0.0; zs.ncols()];
    let mut norms = vec![1.0; zs.ncols()];
    for j in 0..zs.ncols() {
        let norm = zs.column(j).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let norm = if norm > 0.0 { norm } else { 1.0 };
        norms[j] = norm;
        zs.column_mut(j).scale_mut(1.0 / norm);
        log_scale += norm.ln() - shift[j];
        // Z = Zs · diag(norm · e^{-shift}), so Z⁻¹ = diag(e^{shift} / norm) · Zs⁻¹
        colscale[j] = shift[j].exp() / norm;
    }
    let mantissa = linalg::determinant(&zs);
    BalancedZ {
        zs,
        colscale,
        shift,
        norms,
        scaled: ScaledDeterminant {
            mantissa,
            log_scale,
        },
    }
}

/// `det(Z · diag(exp(shift) / norms))` for fixed `shift` and `norms`.
///
/// With the scaling frozen this is an analytic function of the parameters,
/// which is what the complex secant refinement needs.
pub(crate) fn frozen_determinant(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    index: &BoundaryIndex,
    params: &SpectralParams,
    shift: &[f64],
    norms: &[f64],
) -> Complex64 {
    let (xs, ys) = shifted_templates(g, index, params, shift);
    let mut zs = &bc.a * xs + &bc.b * ys;
    for (j, n) in norms.iter().enumerate() {
        zs.column_mut(j).scale_mut(1.0 / n);
    }
    linalg::determinant(&zs)
}

/// Only the balanced determinant; this is what root finding scans.
pub fn scaled_determinant(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    index: &BoundaryIndex,
    params: &SpectralParams,
) -> ScaledDeterminant {
    balanced_z(bc, g, index, params).scaled
}

/// `Z = A X + B Y` with its determinant.
pub fn secular_matrix(bc: &BoundaryConditions, g: &MetricGraph, params: &SpectralParams) -> Result<SecularMatrix> {
    let index = g.boundary_index();
    check_shape(bc, &index)?;
    let (x, y) = build_xy(g, &index, params);
    let z = &bc.a * x + &bc.b * y;
    let det = linalg::determinant(&z);
    let scaled = scaled_determinant(bc, g, &index, params);
    Ok(SecularMatrix { z, det, scaled })
}

fn check_shape(bc: &BoundaryConditions, index: &BoundaryIndex) -> Result<()> {
    if bc.n() != index.n || bc.m() != index.m {
        return Err(Error::SizeMismatch(format!(
            "boundary conditions are for (n, m) = ({}, {}), graph has ({}, {})",
            bc.n(),
            bc.m(),
            index.n,
            index.m
        )));
    }
    Ok(())
}

/// `Cm = −(A + BI)⁻¹(A − BI)` together with `rcond(A + BI)`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub cm: CMatrix,
    pub rcond: f64,
    n: usize,
}

impl CoefficientMatrix {
    /// Sign block `(row sign, column sign)`.
    pub fn block(&self, rows: Sign, cols: Sign) -> CMatrix {
        let d = self.cm.nrows();
        let range = |s: Sign| -> Vec<usize> {
            match s {
                Sign::Plus => (0..self.n).collect(),
                Sign::Minus => (self.n..d).collect(),
            }
        };
        linalg::select(&self.cm, &range(rows), &range(cols))
    }
}

pub fn coefficient_matrix(
    bc: &BoundaryConditions,
    index: &BoundaryIndex,
    params: &SpectralParams,
) -> Result<CoefficientMatrix> {
    check_shape(bc, index)?;
    let bi = &bc.b * i_matrix(index, params);
    let plus = &bc.a + &bi;
    let minus = &bc.a - &bi;
    let rcond = linalg::rcond(&plus);
    let cm = linalg::solve(&plus, &minus).ok_or(Error::Pole(params.z_plus, params.z_minus))?;
    Ok(CoefficientMatrix {
        cm: -cm,
        rcond,
        n: index.n,
    })
}

/// `𝔛 = −Z⁻¹(A − BI)`, the full coefficient transform.
pub fn coefficient_transform(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    index: &BoundaryIndex,
    params: &SpectralParams,
) -> Result<CMatrix> {
    check_shape(bc, index)?;
    let bal = balanced_z(bc, g, index, params);
    let rhs = -(&bc.a - &bc.b * i_matrix(index, params));
    let y = linalg::solve(&bal.zs, &rhs).ok_or(Error::Resonance(params.z_plus, params.z_minus))?;
    let mut out = y;
    for (i, s) in bal.colscale.iter().enumerate() {
        out.row_mut(i).scale_mut(*s);
    }
    Ok(out)
}

/// `χ = 𝔛 E`: column `l` holds the coefficients of the generalized eigenfunction
/// with an incoming wave on the `l`-th external edge.
pub fn chi_coefficients(bc: &BoundaryConditions, g: &MetricGraph, params: &SpectralParams) -> Result<CMatrix> {
    let index = g.boundary_index();
    let xf = coefficient_transform(bc, g, &index, params)?;
    Ok(xf * external_injection(&index))
}

/// The external rows of `χ`, i.e. `χ_{E,E}`, rows and columns ordered `E+` then `E-`.
pub fn chi_external(bc: &BoundaryConditions, g: &MetricGraph, params: &SpectralParams) -> Result<CMatrix> {
    let index = g.boundary_index();
    let chi = chi_coefficients(bc, g, params)?;
    let rows = index.external_columns();
    let cols: Vec<usize> = (0..rows.len()).collect();
    Ok(linalg::select(&chi, &rows, &cols))
}

/// Every parameter-dependent matrix at one `(z+, z-)`.
#[derive(Debug, Clone)]
pub struct SecularAssembly {
    pub params: SpectralParams,
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
    pub i: CMatrix,
    pub r_plus: CMatrix,
    pub r_minus: CMatrix,
    pub t: CMatrix,
    pub w: CMatrix,
    /// `None` at a pole of `Cm`.
    pub cm: Option<CoefficientMatrix>,
    /// `𝔛`; `None` when `Z` is singular.
    pub xfrak: Option<CMatrix>,
    /// `χ = 𝔛 E`; `None` when `Z` is singular.
    pub chi: Option<CMatrix>,
    pub scaled_det: ScaledDeterminant,
    pub singular: bool,
}

impl SecularAssembly {
    pub fn new(bc: &BoundaryConditions, g: &MetricGraph, params: SpectralParams) -> Result<Self> {
        let index = g.boundary_index();
        check_shape(bc, &index)?;
        let (x, y) = build_xy(g, &index, &params);
        let z = &bc.a * &x + &bc.b * &y;
        let (r_plus, r_minus, t) = build_rt(g, &index, &params);
        let cm = coefficient_matrix(bc, &index, &params).ok();
        let xfrak = coefficient_transform(bc, g, &index, &params).ok();
        let chi = xfrak.as_ref().map(|xf| xf * external_injection(&index));
        Ok(Self {
            params,
            i: i_matrix(&index, &params),
            w: w_matrix(&index, &params),
            scaled_det: scaled_determinant(bc, g, &index, &params),
            singular: xfrak.is_none(),
            x,
            y,
            z,
            r_plus,
            r_minus,
            t,
            cm,
            xfrak,
            chi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::models;
    use proptest::prelude::*;

    fn perm_matrix(m: &CMatrix, perm: &[usize]) -> CMatrix {
        linalg::select(m, perm, perm)
    }

    #[test]
    fn single_external_template() {
        let (g, _) = models::half_line(Sign::Plus);
        let idx = g.boundary_index();
        let (x, y) = build_xy(&g, &idx, &SpectralParams::positive_energy(2.0));
        assert_eq!(x[(0, 0)], ONE);
        assert_eq!(y[(0, 0)], c(0.0, 2.0));
    }

    #[test]
    fn two_vertex_templates_match_reference_matrices() {
        let a = 0.8;
        let k = 1.3;
        let (g, _) = models::two_vertex(a);
        let idx = g.boundary_index();
        let (x, y) = build_xy(&g, &idx, &SpectralParams::positive_energy(k));
        let em = (-k * a).exp();
        let ep = (k * a).exp();
        // reference order is [e1, origin, terminus, e2]
        let px = linalg::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, em, ep, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        let mut py = linalg::from_real_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, -k, k, 0.0],
            &[0.0, k * em, -k * ep, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        py[(0, 0)] = c(0.0, k);
        py[(3, 3)] = c(0.0, k);
        // canonical slot i holds reference slot perm[i]
        let perm = [0, 3, 1, 2];
        assert!(linalg::max_abs_diff(&x, &perm_matrix(&px, &perm)) < 1e-14);
        assert!(linalg::max_abs_diff(&y, &perm_matrix(&py, &perm)) < 1e-13);
    }

    #[test]
    fn dirichlet_interval_determinant() {
        let a = 1.7;
        let g = models::interval(Sign::Plus, a);
        let idx = g.boundary_index();
        let bc = BoundaryConditions::dirichlet(idx.n, idx.m);
        for k in [0.3, 1.1, 2.9] {
            let z = secular_matrix(&bc, &g, &SpectralParams::positive_energy(k)).unwrap();
            let expected = c(0.0, -2.0 * (k * a).sin());
            assert!((z.det - expected).norm() < 1e-13);
            assert!((z.scaled.value() - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn real_line_coefficient_matrix() {
        let (g, bc) = models::real_line();
        let idx = g.boundary_index();
        let cm = coefficient_matrix(&bc, &idx, &SpectralParams::positive_energy(0.7)).unwrap();
        let expected = linalg::from_rows(&[
            vec![c(0.0, 1.0), c(1.0, -1.0)],
            vec![c(1.0, 1.0), c(0.0, -1.0)],
        ]);
        assert!(linalg::max_abs_diff(&cm.cm, &expected) < 1e-14);
        assert_eq!(cm.block(Sign::Plus, Sign::Minus)[(0, 0)], cm.cm[(0, 1)]);
    }

    #[test]
    fn dirichlet_and_neumann_coefficients() {
        let (g, _) = models::three_star();
        let idx = g.boundary_index();
        let p = SpectralParams::positive_energy(1.0);
        let d = coefficient_matrix(&BoundaryConditions::dirichlet(2, 1), &idx, &p).unwrap();
        assert!(linalg::max_abs_diff(&d.cm, &(-linalg::identity(3))) < 1e-15);
        let n = coefficient_matrix(&BoundaryConditions::neumann(2, 1), &idx, &p).unwrap();
        assert!(linalg::max_abs_diff(&n.cm, &linalg::identity(3)) < 1e-15);
    }

    #[test]
    fn pole_reported() {
        let (g, _) = models::half_line(Sign::Plus);
        let idx = g.boundary_index();
        // A + B·ik = 0 at k = 1 for A = i, B = -1
        let bc = BoundaryConditions::with_dims(
            linalg::from_rows(&[vec![I]]),
            linalg::from_rows(&[vec![-ONE]]),
            1,
            0,
        )
        .unwrap();
        let r = coefficient_matrix(&bc, &idx, &SpectralParams::positive_energy(1.0));
        assert!(matches!(r, Err(Error::Pole(..))));
    }

    #[test]
    fn r_factors_agree_with_templates() {
        let (g, _) = models::two_vertex(1.1);
        let idx = g.boundary_index();
        let p = SpectralParams::new(c(0.9, 0.2), c(-0.3, 1.1)).unwrap();
        let (x, y) = build_xy(&g, &idx, &p);
        let iinv = linalg::inverse(&i_matrix(&idx, &p)).unwrap();
        let (rp, rm, t) = build_rt(&g, &idx, &p);
        let half = c(0.5, 0.0);
        assert!(linalg::max_abs_diff(&rp, &((&x + &iinv * &y) * half)) < 1e-14);
        assert!(linalg::max_abs_diff(&rm, &((&x - &iinv * &y) * half)) < 1e-14);
        let rpi = r_plus_inverse(&g, &idx, &p);
        assert!(linalg::max_abs_diff(&t, &(&rm * &rpi)) < 1e-14);
        assert!(linalg::max_abs_diff(&(&rp * &rpi), &linalg::identity(4)) < 1e-14);
    }

    #[test]
    fn star_graph_has_no_transfer() {
        let (g, bc) = models::three_star();
        let a = SecularAssembly::new(&bc, &g, SpectralParams::positive_energy(0.4)).unwrap();
        assert!(linalg::max_abs(&a.t) == 0.0);
        let bi = &bc.b * &a.i;
        assert!(linalg::max_abs_diff(&a.z, &(&bc.a + bi)) < 1e-15);
        let chi = a.chi.unwrap();
        assert!(linalg::max_abs_diff(&chi, &a.cm.unwrap().cm) < 1e-13);
    }

    #[test]
    fn balanced_determinant_survives_large_lengths() {
        let (g, bc) = models::two_vertex(800.0);
        let idx = g.boundary_index();
        let p = SpectralParams::negative_energy(3.0);
        let d = scaled_determinant(&bc, &g, &idx, &p);
        assert!(d.mantissa.is_finite() && d.log_scale.is_finite());
        assert!(d.mantissa.norm() <= 1.0 + 1e-12);
        let chi = chi_external(&bc, &g, &SpectralParams::positive_energy(3.0)).unwrap();
        assert!(chi.iter().all(|v| v.is_finite()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scaled_determinant_equals_plain(seed in any::<u64>(), kr in 0.2f64..3.0, ki in -0.5f64..0.5) {
            let (g, bc) = crate::testing::random_compact_pair(seed);
            let idx = g.boundary_index();
            let p = SpectralParams::quadrant_q(c(kr, ki));
            let plain = linalg::determinant(&(&bc.a * build_xy(&g, &idx, &p).0 + &bc.b * build_xy(&g, &idx, &p).1));
            let scaled = scaled_determinant(&bc, &g, &idx, &p).value();
            prop_assert!((plain - scaled).norm() <= 1e-10 * plain.norm().max(1e-300) + 1e-14);
        }

        #[test]
        fn factorization_through_coefficients(seed in any::<u64>(), zr in 0.2f64..3.0, zi in -1.0f64..1.0) {
            let (g, bc) = crate::testing::random_compact_pair(seed);
            let idx = g.boundary_index();
            let p = SpectralParams::new(c(zr, zi), c(-zi, zr)).unwrap();
            let (Ok(cm), Ok(back)) = (coefficient_matrix(&bc, &idx, &p), coefficient_matrix(&bc, &idx, &p.negated())) else {
                return Ok(());
            };
            let (x, y) = build_xy(&g, &idx, &p);
            let z = &bc.a * x + &bc.b * y;
            let (rp, _, t) = build_rt(&g, &idx, &p);
            let rhs = (&bc.a + &bc.b * i_matrix(&idx, &p)) * (linalg::identity(idx.dim()) - &cm.cm * t) * rp;
            prop_assert!(linalg::fro_norm(&(&z - rhs)) <= 1e-12 * linalg::fro_norm(&z));
            prop_assert!(linalg::max_abs_diff(&(&cm.cm * &back.cm), &linalg::identity(idx.dim())) < 1e-10);
        }
    }
}
