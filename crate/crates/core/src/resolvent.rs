//! Green's kernel of `(T(A,B) − k²)⁻¹` and its application by quadrature.
//!
//! The kernel splits into the free part `r⁰`, which lives on the diagonal
//! blocks `edge × edge`, and a separable boundary correction
//! `r¹(x, y) = w(y) Σ Φ_s(x) G_{st} Φ_t(y)` with `G = 𝔛 R+⁻¹ J`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bc::{signature, BoundaryConditions};
use crate::error::{Error, Result};
use crate::graph::{BoundaryIndex, MetricGraph, Sign};
use crate::linalg::{CMatrix, I};
use crate::report;
use crate::secular::{self, SpectralParams};
use crate::spectral::{self, Branch, RootOptions};

/// Real parameters closer than this to a determinant zero are refused.
pub const RESONANCE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePoint {
    pub edge: String,
    pub x: f64,
}

impl EdgePoint {
    pub fn new(edge: impl Into<String>, x: f64) -> Self {
        Self {
            edge: edge.into(),
            x,
        }
    }
}

#[derive(Debug, Clone)]
struct EdgeData {
    id: String,
    sign: Sign,
    z: Complex64,
    /// `None` for half-lines.
    length: Option<f64>,
    /// Columns `(slot, outgoing)`: `outgoing` selects `e^{izx}` over `e^{-izx}`.
    cols: Vec<(usize, bool)>,
}

impl EdgeData {
    fn phi(&self, x: f64) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.cols.iter().map(move |&(s, out)| {
            let e = if out { I * self.z * x } else { -I * self.z * x };
            (s, e.exp())
        })
    }

    /// `±i/(2z)`, the free kernel prefactor.
    fn free_factor(&self) -> Complex64 {
        let w = I / (2.0 * self.z);
        match self.sign {
            Sign::Plus => w,
            Sign::Minus => -w,
        }
    }

    fn weight(&self) -> Complex64 {
        I / (2.0 * self.z)
    }
}

/// Everything needed to evaluate the kernel at one `k`.
#[derive(Debug, Clone)]
pub struct ResolventContext {
    pub k: Complex64,
    pub params: SpectralParams,
    /// `G = 𝔛 R+⁻¹ J`
    pub g_matrix: CMatrix,
    edges: Vec<EdgeData>,
}

impl ResolventContext {
    /// `Re k ≥ 0` uses `(k, ik)`, `Re k < 0` uses `(k, −ik)`.
    pub fn new(bc: &BoundaryConditions, g: &MetricGraph, k: Complex64) -> Result<Self> {
        if k == Complex64::new(0.0, 0.0) || !k.is_finite() {
            return Err(Error::ZeroParameter);
        }
        let params = if k.re >= 0.0 {
            SpectralParams::quadrant_q(k)
        } else {
            SpectralParams::quadrant_p(k)
        };
        let index = g.boundary_index();
        if k.im.abs() <= 1e-12 * k.norm() {
            guard_real_axis(bc, g, k.re.abs())?;
        }
        let xfrak = secular::coefficient_transform(bc, g, &index, &params)?;
        let mut g_matrix = xfrak * secular::r_plus_inverse(g, &index, &params);
        let j = signature(index.n, index.m);
        g_matrix *= j;
        Ok(Self {
            k,
            params,
            g_matrix,
            edges: edge_data(g, &index, &params),
        })
    }

    fn edge(&self, id: &str) -> Result<&EdgeData> {
        self.edges
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    fn check(&self, p: &EdgePoint) -> Result<&EdgeData> {
        let e = self.edge(&p.edge)?;
        let inside = p.x >= 0.0 && p.x.is_finite() && e.length.is_none_or(|a| p.x <= a);
        if inside {
            Ok(e)
        } else {
            Err(Error::PointOutside {
                edge: p.edge.clone(),
                x: p.x,
            })
        }
    }

    /// `r(p, q)`
    pub fn kernel(&self, p: &EdgePoint, q: &EdgePoint) -> Result<Complex64> {
        let ep = self.check(p)?;
        let eq = self.check(q)?;
        let mut r = Complex64::new(0.0, 0.0);
        if ep.id == eq.id {
            r += ep.free_factor() * (I * ep.z * (p.x - q.x).abs()).exp();
        }
        let phi_q: Vec<(usize, Complex64)> = eq.phi(q.x).collect();
        for (s, fs) in ep.phi(p.x) {
            for &(t, ft) in &phi_q {
                r += eq.weight() * fs * self.g_matrix[(s, t)] * ft;
            }
        }
        Ok(r)
    }
}

fn guard_real_axis(bc: &BoundaryConditions, g: &MetricGraph, k: f64) -> Result<()> {
    let lo = (k - RESONANCE_GUARD).max(k * 0.5);
    let hi = k + RESONANCE_GUARD;
    let opts = RootOptions::with_step(RESONANCE_GUARD / 8.0);
    // positive real k sits on the (k, ik) branch; it is its own boundary value
    if !spectral::find_roots(bc, g, Branch::Positive, (lo, hi), &opts)?.is_empty() {
        return Err(Error::Resonance(Complex64::new(k, 0.0), I * k));
    }
    Ok(())
}

fn edge_data(g: &MetricGraph, index: &BoundaryIndex, params: &SpectralParams) -> Vec<EdgeData> {
    let mut out = Vec::new();
    for (e, &s) in g.external().iter().zip(&index.external_slot) {
        out.push(EdgeData {
            id: e.id.clone(),
            sign: e.sign,
            z: params.z(e.sign),
            length: None,
            cols: vec![(s, true)],
        });
    }
    for (e, &(o, t)) in g.internal().iter().zip(&index.internal_slots) {
        out.push(EdgeData {
            id: e.id.clone(),
            sign: e.sign,
            z: params.z(e.sign),
            length: Some(e.length),
            cols: vec![(o, true), (t, false)],
        });
    }
    out
}

/// Samples of a function on one edge at `x_i = i · step`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub edge: String,
    pub step: f64,
    pub values: Vec<Complex64>,
}

impl EdgeSamples {
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.step
    }
}

/// A function on the graph given by uniform samples on each edge.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFunction {
    pub edges: Vec<EdgeSamples>,
}

impl GridFunction {
    /// Sample `f` with spacing close to `h`. Internal edges are covered fully
    /// (the spacing is adjusted to divide the length); half-lines are covered
    /// on `[0, support]`.
    pub fn sample(
        g: &MetricGraph,
        h: f64,
        support: f64,
        f: impl Fn(&str, f64) -> Complex64,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Range(format!("quadrature step must be positive, got {h}")));
        }
        let mut edges = Vec::new();
        let lens = g
            .external()
            .iter()
            .map(|e| (e.id.clone(), support))
            .chain(g.internal().iter().map(|e| (e.id.clone(), e.length)));
        for (id, len) in lens {
            let n = ((len / h).round() as usize).max(2);
            let step = len / n as f64;
            let values = (0..=n).map(|i| f(&id, i as f64 * step)).collect();
            edges.push(EdgeSamples {
                edge: id,
                step,
                values,
            });
        }
        Ok(Self { edges })
    }

    pub fn edge(&self, id: &str) -> Option<&EdgeSamples> {
        self.edges.iter().find(|e| e.edge == id)
    }

    pub fn sup_norm(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.values.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Weights of the composite rule on `n + 1` equispaced nodes: Simpson, with a
/// 3/8 panel at the end when `n` is odd and the trapezoid for `n = 1`.
fn composite_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let simpson_end = if n.is_multiple_of(2) { n } else { n - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if n % 2 == 1 {
        let s = n - 3;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// `∫ ±i/(2z) e^{iz|x_i − y|} f(y) dy` at every node, split at `y = x_i`.
///
/// The left part obeys `L_i = e^{izh} L_{i−1} + ∫_{x_{i−1}}^{x_i} e^{iz(x_i−y)} f`,
/// the right part the mirrored recursion; each panel uses a three-point rule,
/// so no exponential is ever evaluated with a growing argument.
fn free_part(f: &[Complex64], h: f64, z: Complex64, factor: Complex64) -> Vec<Complex64> {
    let n = f.len() - 1;
    let e1 = (I * z * h).exp();
    let em1 = (-I * z * h).exp();
    let e2 = (I * z * 2.0 * h).exp();
    // panel [x_{i-1}, x_i] of ∫ e^{iz(x_i - y)} f(y) dy
    let panel = |i: usize| -> Complex64 {
        if n == 1 {
            return h / 2.0 * (e1 * f[0] + f[1]);
        }
        if i < n {
            // nodes x_{i-1}, x_i, x_{i+1}
            h / 12.0 * (5.0 * e1 * f[i - 1] + 8.0 * f[i] - em1 * f[i + 1])
        } else {
            // nodes x_{i-2}, x_{i-1}, x_i
            h / 12.0 * (-e2 * f[i - 2] + 8.0 * e1 * f[i - 1] + 5.0 * f[i])
        }
    };
    let mut left = vec![Complex64::new(0.0, 0.0); n + 1];
    for i in 1..=n {
        left[i] = e1 * left[i - 1] + panel(i);
    }
    // mirrored: R_i = ∫_{x_i}^{x_n} e^{iz(y - x_i)} f(y) dy
    let rev: Vec<Complex64> = f.iter().rev().copied().collect();
    let panel_r = |i: usize| -> Complex64 {
        if n == 1 {
            return h / 2.0 * (e1 * rev[0] + rev[1]);
        }
        if i < n {
            h / 12.0 * (5.0 * e1 * rev[i - 1] + 8.0 * rev[i] - em1 * rev[i + 1])
        } else {
            h / 12.0 * (-e2 * rev[i - 2] + 8.0 * e1 * rev[i - 1] + 5.0 * rev[i])
        }
    };
    let mut right_rev = vec![Complex64::new(0.0, 0.0); n + 1];
    for i in 1..=n {
        right_rev[i] = e1 * right_rev[i - 1] + panel_r(i);
    }
    (0..=n)
        .map(|i| factor * (left[i] + right_rev[n - i]))
        .collect()
}

/// `u(x) = Σ_edges ∫ r(x, y) f(y) dy` at every sample point of `f`.
pub fn apply_resolvent(ctx: &ResolventContext, f: &GridFunction) -> Result<GridFunction> {
    if f.edges.is_empty() {
        return Err(Error::Range("empty support".into()));
    }
    let d = ctx.g_matrix.nrows();
    // moments m_t = w ∫ Φ_t(y) f(y) dy
    let mut moments = vec![Complex64::new(0.0, 0.0); d];
    for samples in &f.edges {
        let e = ctx.edge(&samples.edge)?;
        let n = samples.values.len() - 1;
        if n == 0 {
            continue;
        }
        if let Some(a) = e.length {
            if (n as f64 * samples.step - a).abs() > 1e-9 * a {
                return Err(Error::Range(format!("samples on `{}` do not cover the edge", e.id)));
            }
        }
        let w = composite_weights(n, samples.step);
        for &(t, out) in &e.cols {
            let s: Complex64 = (0..=n)
                .map(|i| {
                    let x = samples.x(i);
                    let ph = if out { I * e.z * x } else { -I * e.z * x };
                    w[i] * ph.exp() * samples.values[i]
                })
                .sum();
            moments[t] += e.weight() * s;
        }
    }
    let coeff = &ctx.g_matrix * CMatrix::from_column_slice(d, 1, &moments);
    let edges = f
        .edges
        .par_iter()
        .map(|samples| -> Result<EdgeSamples> {
            let e = ctx.edge(&samples.edge)?;
            let mut values = if samples.values.len() > 1 {
                free_part(&samples.values, samples.step, e.z, e.free_factor())
            } else {
                vec![Complex64::new(0.0, 0.0); samples.values.len()]
            };
            for (i, v) in values.iter_mut().enumerate() {
                for (s, fs) in e.phi(samples.x(i)) {
                    *v += fs * coeff[(s, 0)];
                }
            }
            Ok(EdgeSamples {
                edge: samples.edge.clone(),
                step: samples.step,
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // edges absent from f still see the boundary correction, but are not sampled
    Ok(GridFunction { edges })
}

/// Largest `|(τ − k²) u − f|` over interior nodes, by central differences.
pub fn ode_residual(ctx: &ResolventContext, u: &GridFunction, f: &GridFunction) -> Result<f64> {
    let k2 = ctx.k * ctx.k;
    let mut worst: f64 = 0.0;
    for (us, fs) in u.edges.iter().zip(&f.edges) {
        let e = ctx.edge(&us.edge)?;
        let h = us.step;
        let s = match e.sign {
            Sign::Plus => -1.0,
            Sign::Minus => 1.0,
        };
        for i in 1..us.values.len() - 1 {
            let d2 = (us.values[i - 1] - 2.0 * us.values[i] + us.values[i + 1]) / (h * h);
            let r = s * d2 - k2 * us.values[i] - fs.values[i];
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// `(ψ̄, ψ̄')` from second-order one-sided differences of the samples.
pub fn boundary_traces(
    g: &MetricGraph,
    u: &GridFunction,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let index = g.boundary_index();
    let d = index.dim();
    let mut val = vec![Complex64::new(0.0, 0.0); d];
    let mut der = vec![Complex64::new(0.0, 0.0); d];
    let get = |id: &str| u.edge(id).ok_or_else(|| Error::UnknownEdge(id.to_string()));
    let one_sided = |v: &[Complex64], h: f64| (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for (e, &s) in g.external().iter().zip(&index.external_slot) {
        let smp = get(&e.id)?;
        val[s] = smp.values[0];
        der[s] = one_sided(&smp.values, smp.step);
    }
    for (e, &(o, t)) in g.internal().iter().zip(&index.internal_slots) {
        let smp = get(&e.id)?;
        let rev: Vec<Complex64> = smp.values.iter().rev().copied().collect();
        val[o] = smp.values[0];
        der[o] = one_sided(&smp.values, smp.step);
        val[t] = rev[0];
        // inward derivative at the terminus is −ψ'(a)
        der[t] = one_sided(&rev, smp.step);
    }
    Ok((val, der))
}

/// `max |A ū + B ū'|` normalized by `max(|ū|, |ū'|)`.
pub fn boundary_residual(bc: &BoundaryConditions, g: &MetricGraph, u: &GridFunction) -> Result<f64> {
    let (val, der) = boundary_traces(g, u)?;
    let d = val.len();
    let v = CMatrix::from_column_slice(d, 1, &val);
    let dv = CMatrix::from_column_slice(d, 1, &der);
    let r = &bc.a * v + &bc.b * dv;
    let scale = val
        .iter()
        .chain(&der)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    Ok(r.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale)
}

/// CSV with columns `edge_p, x, edge_q, y, re, im` over all pairs of points.
pub fn kernel_csv(ctx: &ResolventContext, ps: &[EdgePoint], qs: &[EdgePoint], header: &str) -> Result<String> {
    let mut out = String::from(header);
    out.push_str("edge_p,x,edge_q,y,re,im\n");
    for p in ps {
        for q in qs {
            let r = ctx.kernel(p, q)?;
            out.push_str(&report::row([
                p.edge.clone(),
                report::float(p.x),
                q.edge.clone(),
                report::float(q.x),
                report::float(r.re),
                report::float(r.im),
            ]));
        }
    }
    Ok(out)
}
