//! Eigenvalues, resonances, zero modes and counting functions.
//!
//! Roots are located by scanning the balanced determinant on a uniform grid,
//! bracketing local minima of its modulus, and refining each bracket with a
//! complex secant iteration (golden section on the modulus as a fallback).
//! The positive branch works with `(k, ik)`, the negative branch with `(iκ, κ)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bc::BoundaryConditions;
use crate::error::{Error, Result};
use crate::graph::{BoundaryIndex, MetricGraph, Sign};
use crate::linalg::{self, CMatrix, ONE};
use crate::report;
use crate::secular::{self, SpectralParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn params(self, k: Complex64) -> SpectralParams {
        match self {
            Branch::Positive => SpectralParams {
                z_plus: k,
                z_minus: linalg::I * k,
            },
            Branch::Negative => SpectralParams {
                z_plus: linalg::I * k,
                z_minus: k,
            },
        }
    }

    /// External edges whose oscillating term must vanish for an `L²` solution.
    pub fn oscillating_sign(self) -> Sign {
        match self {
            Branch::Positive => Sign::Plus,
            Branch::Negative => Sign::Minus,
        }
    }

    pub fn lambda(self, root: f64) -> f64 {
        match self {
            Branch::Positive => root * root,
            Branch::Negative => -root * root,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Positive => "positive",
            Branch::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub grid_step: f64,
    /// Grid minima of `|det|` above this are not refined.
    pub bracket_threshold: f64,
    /// Accept a refined root when the balanced determinant is at most this.
    pub root_tol: f64,
    /// Singular values `≤ mult_tol · σ_max` count towards the multiplicity.
    pub mult_tol: f64,
    pub max_halvings: u32,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            grid_step: 1e-2,
            bracket_threshold: 1e-2,
            root_tol: 1e-9,
            mult_tol: 1e-7,
            max_halvings: 3,
        }
    }
}

impl RootOptions {
    pub fn with_step(step: f64) -> Self {
        Self {
            grid_step: step,
            ..Self::default()
        }
    }
}

/// A refined zero of the secular determinant on one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub k: f64,
    /// Imaginary part the unrestricted complex iteration converged to.
    pub imag: f64,
    pub residual: f64,
    /// Nullity of `Z` at the root.
    pub nullity: usize,
    /// Nullity after imposing the `L²` side condition.
    pub l2_nullity: usize,
    /// External components of a kernel vector, in `E+` then `E-` order.
    pub kernel_external: Vec<Complex64>,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    pub root: f64,
    pub residual: f64,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    pub branch: Branch,
    pub root: f64,
    pub lambda: f64,
    pub is_eigenvalue: bool,
    pub kernel_external: Vec<Complex64>,
    pub at_boundary: bool,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub positive_eigenvalues: Vec<Eigenvalue>,
    pub negative_eigenvalues: Vec<Eigenvalue>,
    pub zero_dimension: usize,
    pub resonances: Vec<Resonance>,
    pub scan_range: (f64, f64),
    pub grid_step: f64,
}

struct Problem<'a> {
    bc: &'a BoundaryConditions,
    g: &'a MetricGraph,
    index: BoundaryIndex,
    branch: Branch,
}

impl Problem<'_> {
    fn params(&self, k: f64) -> SpectralParams {
        self.branch.params(Complex64::new(k, 0.0))
    }

    fn det(&self, k: f64) -> Complex64 {
        secular::scaled_determinant(self.bc, self.g, &self.index, &self.params(k)).mantissa
    }
}

fn validate_range(range: (f64, f64), opts: &RootOptions) -> Result<()> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Range(format!("need 0 < kmin < kmax, got ({lo}, {hi})")));
    }
    if !(opts.grid_step > 0.0 && opts.grid_step.is_finite()) {
        return Err(Error::Range(format!("grid step must be positive, got {}", opts.grid_step)));
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let intervals = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=intervals)
        .map(|i| lo + (hi - lo) * i as f64 / intervals as f64)
        .collect()
}

/// Indices of local minima of `vals` below `threshold` (endpoints included).
fn local_minima(vals: &[f64], threshold: f64) -> Vec<usize> {
    let n = vals.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || vals[i] <= vals[i - 1];
            let right = i + 1 == n || vals[i] <= vals[i + 1];
            // skip the second of two equal neighbours
            let first = i == 0 || vals[i] != vals[i - 1];
            left && right && first && vals[i] < threshold
        })
        .collect()
}

/// All zeros of the determinant of `branch` with root in `range`.
pub fn find_roots(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    branch: Branch,
    range: (f64, f64),
    opts: &RootOptions,
) -> Result<Vec<Root>> {
    validate_range(range, opts)?;
    let index = g.boundary_index();
    if bc.n() != index.n || bc.m() != index.m {
        return Err(Error::SizeMismatch("boundary conditions do not fit the graph".into()));
    }
    let p = Problem { bc, g, index, branch };
    let ks = grid(range.0, range.1, opts.grid_step);
    let vals: Vec<f64> = ks.par_iter().map(|&k| p.det(k).norm()).collect();
    let last = ks.len() - 1;
    let brackets: Vec<(f64, f64, f64, bool)> = local_minima(&vals, opts.bracket_threshold)
        .into_iter()
        .map(|i| {
            let lo = ks[i.saturating_sub(1)];
            let hi = ks[(i + 1).min(last)];
            (lo, ks[i], hi, i == 0 || i == last)
        })
        .collect();

    let mut candidates: Vec<(f64, f64, bool)> = brackets
        .par_iter()
        .flat_map_iter(|&(lo, mid, hi, edge)| {
            refine_bracket(&p, lo, mid, hi, opts, opts.max_halvings)
                .into_iter()
                .map(move |(k, imag)| (k, imag, edge))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut roots: Vec<Root> = Vec::new();
    let merge = opts.grid_step * 1e-6;
    for (k, imag, edge) in candidates {
        if let Some(prev) = roots.last() {
            if (k - prev.k).abs() <= merge.max(1e-12 * k) {
                continue;
            }
        }
        let residual = p.det(k).norm();
        if residual > opts.root_tol {
            continue;
        }
        let (nullity, l2_nullity, kernel_external) = kernel_at(&p, k, opts.mult_tol);
        roots.push(Root {
            k,
            imag,
            residual,
            nullity,
            l2_nullity,
            kernel_external,
            at_boundary: edge && ((k - range.0).abs() < opts.grid_step || (range.1 - k).abs() < opts.grid_step),
        });
    }
    Ok(roots)
}

/// Refine one bracket. A sub-scan with halved spacing separates roots that
/// share a grid cell; each sub-minimum is then refined on its own.
fn refine_bracket(
    p: &Problem<'_>,
    lo: f64,
    mid: f64,
    hi: f64,
    opts: &RootOptions,
    halvings: u32,
) -> Vec<(f64, f64)> {
    if halvings > 0 && hi > lo {
        let sub = grid(lo, hi, (hi - lo) / 16.0);
        let vals: Vec<f64> = sub.iter().map(|&k| p.det(k).norm()).collect();
        let mins = local_minima(&vals, opts.bracket_threshold);
        if mins.len() > 1 {
            let last = sub.len() - 1;
            return mins
                .into_iter()
                .flat_map(|i| {
                    refine_bracket(
                        p,
                        sub[i.saturating_sub(1)],
                        sub[i],
                        sub[(i + 1).min(last)],
                        opts,
                        halvings - 1,
                    )
                })
                .collect();
        }
    }
    refine_single(p, lo, mid, hi, opts).into_iter().collect()
}

fn refine_single(p: &Problem<'_>, lo: f64, mid: f64, hi: f64, opts: &RootOptions) -> Option<(f64, f64)> {
    let width = (hi - lo).max(f64::EPSILON * mid.abs());
    if let Some(z) = complex_secant(p, lo, mid, hi) {
        let k = z.re;
        if k >= lo && k <= hi && p.det(k).norm() <= opts.root_tol {
            return Some((k, z.im));
        }
    }
    let k = golden_section(|k| p.det(k).norm(), lo, hi, width * 1e-15);
    Some((k, 0.0))
}

/// Secant iteration on the determinant with the column scaling frozen at `mid`.
fn complex_secant(p: &Problem<'_>, lo: f64, mid: f64, hi: f64) -> Option<Complex64> {
    let bal = secular::balanced_z(p.bc, p.g, &p.index, &p.params(mid));
    let f = |k: Complex64| {
        secular::frozen_determinant(p.bc, p.g, &p.index, &p.branch.params(k), &bal.shift, &bal.norms)
    };
    let width = hi - lo;
    let mut k0 = Complex64::new(mid - 0.25 * width, 0.0);
    let mut k1 = Complex64::new(mid, 0.0);
    let mut f0 = f(k0);
    let mut f1 = f(k1);
    for _ in 0..200 {
        if f1 == Complex64::new(0.0, 0.0) {
            return Some(k1);
        }
        let denom = f1 - f0;
        if denom.norm() == 0.0 {
            break;
        }
        let k2 = k1 - f1 * (k1 - k0) / denom;
        if !k2.is_finite() || (k2.re - mid).abs() > 2.0 * width || k2.im.abs() > 2.0 * width {
            return None;
        }
        let step = (k2 - k1).norm();
        k0 = k1;
        f0 = f1;
        k1 = k2;
        f1 = f(k1);
        if step <= 4.0 * f64::EPSILON * k1.norm().max(1.0) {
            return Some(k1);
        }
    }
    Some(k1)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// `(nullity of Z, nullity with the L² rows, external part of a kernel vector)`.
fn kernel_at(p: &Problem<'_>, k: f64, mult_tol: f64) -> (usize, usize, Vec<Complex64>) {
    let bal = secular::balanced_z(p.bc, p.g, &p.index, &p.params(k));
    let nullity = linalg::nullity(&bal.zs, mult_tol);
    let zero_slots = p.index.external_columns_of(p.branch.oscillating_sign());
    let mut constrained = bal.zs.clone();
    if !zero_slots.is_empty() {
        let mut rows = CMatrix::zeros(zero_slots.len(), p.index.dim());
        for (r, &s) in zero_slots.iter().enumerate() {
            rows[(r, s)] = ONE;
        }
        constrained = linalg::vstack(&constrained, &rows);
    }
    let l2_nullity = linalg::nullity(&constrained, mult_tol);
    let ns = linalg::null_space(&bal.zs, Some(mult_tol));
    let kernel_external = if ns.ncols() > 0 {
        let mut chi: Vec<Complex64> = (0..p.index.dim())
            .map(|i| ns[(i, 0)] * bal.colscale[i])
            .collect();
        let norm = chi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            chi.iter_mut().for_each(|v| *v /= norm);
        }
        p.index.external_columns().into_iter().map(|s| chi[s]).collect()
    } else {
        Vec::new()
    };
    (nullity, l2_nullity, kernel_external)
}

/// Eigenvalues of one branch with root in `range`.
pub fn find_eigenvalues(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    branch: Branch,
    range: (f64, f64),
    opts: &RootOptions,
) -> Result<Vec<Eigenvalue>> {
    Ok(find_roots(bc, g, branch, range, opts)?
        .into_iter()
        .filter(|r| r.l2_nullity > 0)
        .map(|r| Eigenvalue {
            lambda: branch.lambda(r.k),
            multiplicity: r.l2_nullity,
            root: r.k,
            residual: r.residual,
            at_boundary: r.at_boundary,
        })
        .collect())
}

/// All real zeros of the determinant of one branch, annotated with whether the
/// kernel satisfies the `L²` side condition.
pub fn find_resonances(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    branch: Branch,
    range: (f64, f64),
    opts: &RootOptions,
) -> Result<Vec<Resonance>> {
    Ok(find_roots(bc, g, branch, range, opts)?
        .into_iter()
        .map(|r| Resonance {
            branch,
            root: r.k,
            lambda: branch.lambda(r.k),
            is_eigenvalue: r.l2_nullity > 0,
            kernel_external: r.kernel_external,
            at_boundary: r.at_boundary,
        })
        .collect())
}

/// Affine Ansatz `α + βx` on internal edges; external edges carry nothing.
pub fn zero_mode_templates(g: &MetricGraph, index: &BoundaryIndex) -> (CMatrix, CMatrix) {
    let d = index.dim();
    let mut x0 = CMatrix::zeros(d, d);
    let mut y0 = CMatrix::zeros(d, d);
    for (e, &(o, t)) in g.internal().iter().zip(&index.internal_slots) {
        x0[(o, o)] = ONE;
        x0[(t, o)] = ONE;
        x0[(t, t)] = e.length.into();
        y0[(o, t)] = ONE;
        y0[(t, t)] = -ONE;
    }
    (x0, y0)
}

/// Dimension of the kernel at zero energy.
pub fn zero_mode_dimension(bc: &BoundaryConditions, g: &MetricGraph) -> usize {
    let index = g.boundary_index();
    let cols = index.internal_columns();
    if cols.is_empty() {
        return 0;
    }
    let (x0, y0) = zero_mode_templates(g, &index);
    let z0 = &bc.a * x0 + &bc.b * y0;
    let rows: Vec<usize> = (0..index.dim()).collect();
    let restricted = linalg::select(&z0, &rows, &cols);
    cols.len() - linalg::numerical_rank(&restricted)
}

/// Both branches, zero modes and every real determinant zero in `range`.
pub fn spectrum(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    range: (f64, f64),
    opts: &RootOptions,
) -> Result<SpectrumReport> {
    let mut report = SpectrumReport {
        positive_eigenvalues: Vec::new(),
        negative_eigenvalues: Vec::new(),
        zero_dimension: zero_mode_dimension(bc, g),
        resonances: Vec::new(),
        scan_range: range,
        grid_step: opts.grid_step,
    };
    for branch in [Branch::Positive, Branch::Negative] {
        let res = find_resonances(bc, g, branch, range, opts)?;
        let eig = find_eigenvalues(bc, g, branch, range, opts)?;
        match branch {
            Branch::Positive => report.positive_eigenvalues = eig,
            Branch::Negative => report.negative_eigenvalues = eig,
        }
        report.resonances.extend(res);
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct CountingReport {
    pub branch: Branch,
    /// `(λ, N(λ))` after each eigenvalue, counted with multiplicity.
    pub samples: Vec<(f64, usize)>,
    pub lambda_max: f64,
    pub count: usize,
    /// `N(λ_max) π / √λ_max`
    pub weyl_slope: f64,
    /// Total length of internal edges of the branch's sign.
    pub expected_slope: f64,
}

/// Counting function of one branch up to `|λ| = lambda_max`.
pub fn counting_function(
    bc: &BoundaryConditions,
    g: &MetricGraph,
    branch: Branch,
    lambda_max: f64,
    opts: &RootOptions,
) -> Result<CountingReport> {
    let sign = branch.oscillating_sign();
    if g.external_count(sign) > 0 {
        return Err(Error::Unsupported(format!(
            "counting on the {} branch needs no external edges of sign {}",
            branch.name(),
            sign.symbol()
        )));
    }
    let kmax = lambda_max.sqrt();
    let eig = find_eigenvalues(bc, g, branch, (opts.grid_step.min(kmax / 2.0), kmax), opts)?;
    let mut count = 0;
    let mut samples = Vec::new();
    for e in &eig {
        count += e.multiplicity;
        samples.push((e.lambda, count));
    }
    Ok(CountingReport {
        branch,
        samples,
        lambda_max,
        count,
        weyl_slope: count as f64 * std::f64::consts::PI / kmax,
        expected_slope: g.total_length(sign),
    })
}

/// CSV with columns `branch, lambda, k_or_kappa, multiplicity, residual`.
pub fn spectrum_csv(report: &SpectrumReport, header: &str) -> String {
    let mut out = String::from(header);
    out.push_str("branch,lambda,k_or_kappa,multiplicity,residual\n");
    let rows = report
        .positive_eigenvalues
        .iter()
        .map(|e| ("positive", e))
        .chain(report.negative_eigenvalues.iter().map(|e| ("negative", e)));
    for (name, e) in rows {
        out.push_str(&report::row([
            name.to_string(),
            report::float(e.lambda),
            report::float(e.root),
            e.multiplicity.to_string(),
            report::float(e.residual),
        ]));
    }
    if report.zero_dimension > 0 {
        out.push_str(&report::row([
            "zero".to_string(),
            report::float(0.0),
            report::float(0.0),
            report.zero_dimension.to_string(),
            report::float(0.0),
        ]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::testing;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn two_vertex_negative_branch() {
        let a = 1.0;
        let (g, bc) = models::two_vertex(a);
        let eig = find_eigenvalues(&bc, &g, Branch::Negative, (0.05, 16.0), &RootOptions::default()).unwrap();
        assert_eq!(eig.len(), 5);
        for (m, e) in eig.iter().enumerate() {
            let kappa = (2 * m + 1) as f64 * PI / (2.0 * a);
            assert!((e.root - kappa).abs() < 1e-9 * kappa, "{} vs {kappa}", e.root);
            assert_eq!(e.multiplicity, 1);
            assert!(e.residual <= 1e-9);
        }
        let pos = find_eigenvalues(&bc, &g, Branch::Positive, (0.05, 16.0), &RootOptions::default()).unwrap();
        assert!(pos.is_empty());
        assert_eq!(zero_mode_dimension(&bc, &g), 0);
    }

    #[test]
    fn dirichlet_pair_spectra() {
        let (a, b) = (1.3, 0.8);
        let (g, bc) = models::dirichlet_pair(a, b);
        let opts = RootOptions::default();
        let pos = find_eigenvalues(&bc, &g, Branch::Positive, (0.05, 12.0), &opts).unwrap();
        let neg = find_eigenvalues(&bc, &g, Branch::Negative, (0.05, 12.0), &opts).unwrap();
        let expect = |len: f64| -> Vec<f64> {
            (1..).map(|m| m as f64 * PI / len).take_while(|&k| k < 12.0).collect()
        };
        assert_eq!(pos.len(), expect(a).len());
        for (e, k) in pos.iter().zip(expect(a)) {
            assert!((e.root - k).abs() < 1e-9);
            assert!((e.lambda - k * k).abs() < 1e-8);
        }
        assert_eq!(neg.len(), expect(b).len());
        for (e, k) in neg.iter().zip(expect(b)) {
            assert!((e.root - k).abs() < 1e-9);
            assert!(e.lambda < 0.0);
        }
        assert_eq!(zero_mode_dimension(&bc, &g), 0);
    }

    #[test]
    fn open_graphs_without_roots() {
        let opts = RootOptions::default();
        for (g, bc) in [models::real_line(), models::three_star()] {
            for branch in [Branch::Positive, Branch::Negative] {
                assert!(find_resonances(&bc, &g, branch, (0.05, 10.0), &opts).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn two_vertex_resonances_are_eigenvalues() {
        let (g, bc) = models::two_vertex(0.7);
        let res = find_resonances(&bc, &g, Branch::Negative, (0.05, 10.0), &RootOptions::default()).unwrap();
        assert!(!res.is_empty());
        assert!(res.iter().all(|r| r.is_eigenvalue));
    }

    #[test]
    fn zero_modes() {
        let g = models::interval(Sign::Plus, 1.5);
        assert_eq!(zero_mode_dimension(&BoundaryConditions::neumann(2, 0), &g), 1);
        assert_eq!(zero_mode_dimension(&BoundaryConditions::dirichlet(2, 0), &g), 0);
        let (g, bc) = models::real_line();
        assert_eq!(zero_mode_dimension(&bc, &g), 0);
    }

    #[test]
    fn dirichlet_counting_is_exact() {
        let (g, bc) = models::dirichlet_pair(1.0, 0.5);
        let r = counting_function(&bc, &g, Branch::Positive, 400.0, &RootOptions::default()).unwrap();
        assert_eq!(r.count, (20.0 / PI).floor() as usize);
        let (g, bc) = models::two_vertex(1.0);
        assert!(matches!(
            counting_function(&bc, &g, Branch::Positive, 10.0, &RootOptions::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn range_errors() {
        let (g, bc) = models::two_vertex(1.0);
        assert!(matches!(
            find_roots(&bc, &g, Branch::Negative, (0.0, 1.0), &RootOptions::default()),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            find_roots(&bc, &g, Branch::Negative, (1.0, 2.0), &RootOptions::with_step(-1.0)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let (g, bc) = models::two_vertex(1.0);
        let rep = spectrum(&bc, &g, (0.1, 3.0), &RootOptions::default()).unwrap();
        let csv = spectrum_csv(&rep, "# h\n");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "branch,lambda,k_or_kappa,multiplicity,residual");
        assert!(lines[2].starts_with("negative,-2.4674011"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn roots_are_real_and_singular(seed in any::<u64>()) {
            let (g, bc) = testing::random_compact_pair(seed);
            let opts = RootOptions::default();
            for branch in [Branch::Positive, Branch::Negative] {
                for r in find_roots(&bc, &g, branch, (0.1, 6.0), &opts).unwrap() {
                    prop_assert!(r.imag.abs() <= 1e-8, "imag {}", r.imag);
                    prop_assert!(r.nullity >= 1);
                    prop_assert!(r.residual <= 1e-9);
                }
            }
        }

        #[test]
        fn extending_the_range_keeps_roots(seed in any::<u64>()) {
            let (g, bc) = testing::random_compact_pair(seed);
            let opts = RootOptions::default();
            let short = find_roots(&bc, &g, Branch::Positive, (0.1, 4.0), &opts).unwrap();
            let long = find_roots(&bc, &g, Branch::Positive, (0.1, 6.0), &opts).unwrap();
            for r in short.iter().filter(|r| !r.at_boundary) {
                prop_assert!(long.iter().any(|l| (l.k - r.k).abs() < 1e-7));
            }
        }
    }
}
