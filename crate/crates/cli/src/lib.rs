//! Command-line front end. Exit codes: 0 success, 1 validation failure, 2 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use signgraph::bc::{form_invertibility_margin, SYMMETRY_TOL};
use signgraph::graph::glue_graphs;
use signgraph::report::{self, float, header};
use signgraph::scattering::{self, star_product_glue, ScatteringData};
use signgraph::spectral::{self, Branch, RootOptions};
use signgraph::{linalg, BoundaryConditions, EdgePoint, Error, MetricGraph, ResolventContext};

#[derive(Debug, Parser)]
#[command(name = "signgraph", version, about = "Sign-indefinite operators on metric graphs")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the boundary conditions define a self-adjoint operator.
    Validate {
        #[command(flatten)]
        input: Input,
        /// Tolerance on the symmetry residual.
        #[arg(long, default_value_t = SYMMETRY_TOL)]
        sym_tol: f64,
    },
    /// Eigenvalues of both branches and the zero-mode dimension.
    Spectrum(SpectrumArgs),
    /// Real zeros of the secular determinant, eigenvalues or not.
    Resonances(SpectrumArgs),
    /// Scattering matrix sweep over an energy interval of one sign.
    Scatter {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        lmin: f64,
        #[arg(long)]
        lmax: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolvent kernel at all pairs of the given points.
    Resolvent {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k_re: f64,
        #[arg(long, default_value_t = 0.0)]
        k_im: f64,
        /// Point as `edge:x`; repeat for several.
        #[arg(long = "point", required = true, value_parser = parse_point)]
        points: Vec<EdgePoint>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Glue two graphs along negative half-lines and compare the direct and star-product paths.
    Glue {
        graph1: PathBuf,
        bc1: PathBuf,
        graph2: PathBuf,
        bc2: PathBuf,
        /// Identified edges as `edge1:edge2`; repeat for several.
        #[arg(long = "pair", required = true, value_parser = parse_pair)]
        pairs: Vec<(String, String)>,
        /// Length of each new edge, in the order of `--pair`.
        #[arg(long = "length", required = true)]
        lengths: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        kmin: f64,
        #[arg(long, default_value_t = 10.0)]
        kmax: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Largest accepted entrywise deviation.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalue counting function against the Weyl slope.
    Weyl {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        branch: OneBranch,
        #[arg(long)]
        lambda_max: f64,
        #[command(flatten)]
        roots: RootFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Input {
    graph: PathBuf,
    bc: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = BranchChoice::Both)]
    branch: BranchChoice,
    #[arg(long, default_value_t = 0.01)]
    kmin: f64,
    #[arg(long)]
    kmax: f64,
    #[command(flatten)]
    roots: RootFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RootFlags {
    /// Scan grid spacing in k.
    #[arg(long, default_value_t = RootOptions::default().grid_step)]
    step: f64,
    #[arg(long, default_value_t = RootOptions::default().bracket_threshold)]
    bracket_tol: f64,
    #[arg(long, default_value_t = RootOptions::default().root_tol)]
    root_tol: f64,
    #[arg(long, default_value_t = RootOptions::default().mult_tol)]
    mult_tol: f64,
}

impl RootFlags {
    fn options(&self) -> RootOptions {
        RootOptions {
            grid_step: self.step,
            bracket_threshold: self.bracket_tol,
            root_tol: self.root_tol,
            mult_tol: self.mult_tol,
            ..RootOptions::default()
        }
    }

    fn settings(&self) -> Vec<(&'static str, String)> {
        vec![
            ("step", float(self.step)),
            ("bracket_tol", float(self.bracket_tol)),
            ("root_tol", float(self.root_tol)),
            ("mult_tol", float(self.mult_tol)),
        ]
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BranchChoice {
    Positive,
    Negative,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OneBranch {
    Positive,
    Negative,
}

fn parse_point(s: &str) -> Result<EdgePoint, String> {
    let (edge, x) = s.rsplit_once(':').ok_or("expected edge:x")?;
    let x: f64 = x.parse().map_err(|e| format!("bad coordinate `{x}`: {e}"))?;
    Ok(EdgePoint::new(edge, x))
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s.split_once(':').ok_or("expected edge1:edge2")?;
    Ok((a.to_string(), b.to_string()))
}

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Range(_) | Error::ZeroParameter | Error::PointOutside { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(graph: &Path, bc: &Path) -> Result<(MetricGraph, BoundaryConditions), Failure> {
    let g = MetricGraph::from_json(&read(graph)?)?;
    let bc = BoundaryConditions::from_json(&read(bc)?, &g)?;
    Ok((g, bc))
}

/// Load and refuse conditions that are not self-adjoint.
fn load_checked(input: &Input) -> Result<(MetricGraph, BoundaryConditions), Failure> {
    let (g, bc) = load(&input.graph, &input.bc)?;
    let r = bc.check_self_adjoint();
    if !r.is_self_adjoint() {
        return Err(Failure::Validation(format!(
            "boundary conditions are not self-adjoint (rank {} of {}, symmetry residual {:e})",
            r.rank, r.dim, r.symmetry_residual
        )));
    }
    Ok((g, bc))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_range(lo: f64, hi: f64, what: &str) -> Outcome {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what} range [{lo}, {hi}] is empty")))
    }
}

fn validate(input: &Input, sym_tol: f64) -> Outcome {
    let (g, bc) = load(&input.graph, &input.bc)?;
    let r = bc.check_self_adjoint_tol(sym_tol);
    let l = bc.check_laplacian_self_adjoint();
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut text = String::new();
    let _ = writeln!(text, "self-adjoint: {}", yes(r.is_self_adjoint()));
    let _ = writeln!(text, "rank: {} of {}", r.rank, r.dim);
    let _ = writeln!(text, "symmetry residual: {}", float(r.symmetry_residual));
    let _ = writeln!(text, "laplacian self-adjoint: {}", yes(l.is_self_adjoint()));
    if g.is_compact() {
        let margin = form_invertibility_margin(&g)?;
        let _ = writeln!(text, "form invertibility margin: {}", float(margin));
    }
    print!("{text}");
    if r.is_self_adjoint() {
        Ok(())
    } else {
        Err(Failure::Validation("boundary conditions are not self-adjoint".into()))
    }
}

fn spectrum_command(args: &SpectrumArgs, resonances: bool) -> Outcome {
    check_range(args.kmin, args.kmax, "k")?;
    let (g, bc) = load_checked(&args.input)?;
    let opts = args.roots.options();
    let mut settings = vec![("kmin", float(args.kmin)), ("kmax", float(args.kmax))];
    settings.extend(args.roots.settings());
    let name = if resonances { "resonances" } else { "spectrum" };
    let head = header(name, &settings);
    let mut report = spectral::spectrum(&bc, &g, (args.kmin, args.kmax), &opts)?;
    match args.branch {
        BranchChoice::Positive => {
            report.negative_eigenvalues.clear();
            report.resonances.retain(|r| r.branch == Branch::Positive);
        }
        BranchChoice::Negative => {
            report.positive_eigenvalues.clear();
            report.resonances.retain(|r| r.branch == Branch::Negative);
        }
        BranchChoice::Both => {}
    }
    let text = if resonances {
        let mut t = head;
        t.push_str(&report::row(["branch", "k_or_kappa", "lambda", "is_eigenvalue"]));
        for r in &report.resonances {
            t.push_str(&report::row([
                r.branch.name().to_string(),
                float(r.root),
                float(r.lambda),
                r.is_eigenvalue.to_string(),
            ]));
        }
        t
    } else {
        spectral::spectrum_csv(&report, &head)
    };
    emit(args.out.as_deref(), &text)
}

fn scatter(input: &Input, lmin: f64, lmax: f64, samples: usize, out: Option<&Path>) -> Outcome {
    check_range(lmin, lmax, "lambda")?;
    if samples < 2 {
        return Err(Failure::Usage("need at least two samples".into()));
    }
    if lmin < 0.0 && lmax > 0.0 {
        return Err(Failure::Usage("a sweep must stay on one side of zero".into()));
    }
    let (g, bc) = load_checked(input)?;
    let lambdas: Vec<f64> = (0..samples)
        .map(|i| lmin + (lmax - lmin) * i as f64 / (samples - 1) as f64)
        .filter(|&l| l != 0.0)
        .collect();
    let head = header(
        "scatter",
        &[("lmin", float(lmin)), ("lmax", float(lmax)), ("samples", samples.to_string())],
    );
    let (csv, results) = scattering::sweep_csv(&bc, &g, &lambdas, &head)?;
    let worst = results
        .iter()
        .flatten()
        .map(|s| s.unitarity_residual)
        .fold(0.0, f64::max);
    let resonant = results.iter().filter(|s| s.is_none()).count();
    eprintln!("max unitarity residual {worst:e}, {resonant} resonant samples");
    emit(out, &csv)
}

fn resolvent(input: &Input, k: Complex64, points: &[EdgePoint], out: Option<&Path>) -> Outcome {
    let (g, bc) = load_checked(input)?;
    let ctx = ResolventContext::new(&bc, &g, k)?;
    let head = header("resolvent", &[("k_re", float(k.re)), ("k_im", float(k.im))]);
    let csv = signgraph::resolvent::kernel_csv(&ctx, points, points, &head)?;
    emit(out, &csv)
}

fn glue(
    files: [&Path; 4],
    pairs: &[(String, String)],
    lengths: &[f64],
    (kmin, kmax, samples): (f64, f64, usize),
    tol: f64,
    out: Option<&Path>,
) -> Outcome {
    check_range(kmin, kmax, "k")?;
    if kmin <= 0.0 || samples < 2 {
        return Err(Failure::Usage("need kmin > 0 and at least two samples".into()));
    }
    let (g1, bc1) = load(files[0], files[1])?;
    let (g2, bc2) = load(files[2], files[3])?;
    for bc in [&bc1, &bc2] {
        if !bc.check_self_adjoint().is_self_adjoint() {
            return Err(Failure::Validation("boundary conditions are not self-adjoint".into()));
        }
    }
    let glued = glue_graphs(&g1, &g2, pairs, lengths)?;
    let bc = glued.glue_conditions(&bc1, &bc2)?;
    let left: Vec<String> = pairs.iter().map(|p| p.0.clone()).collect();
    let right: Vec<String> = pairs.iter().map(|p| p.1.clone()).collect();

    let head = header(
        "glue",
        &[
            ("kmin", float(kmin)),
            ("kmax", float(kmax)),
            ("samples", samples.to_string()),
            ("tol", float(tol)),
            ("critical_rcond", float(scattering::CRITICAL_RCOND)),
        ],
    );
    let mut csv = head;
    csv.push_str(&report::row(["k", "deviation", "unitarity_residual", "status"]));
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for i in 0..samples {
        let k = kmin + (kmax - kmin) * i as f64 / (samples - 1) as f64;
        let d1 = ScatteringData::new(&bc1, &g1, k).and_then(|d| d.with_minus_order(&left));
        let d2 = ScatteringData::new(&bc2, &g2, k).and_then(|d| d.with_minus_order(&right));
        let star = d1.and_then(|d1| d2.and_then(|d2| star_product_glue(&d1, &d2, lengths)));
        let direct = scattering::scattering_matrix(&bc, &glued.graph, k * k);
        match (star, direct) {
            (Ok(s), Ok(d)) => {
                let dev = linalg::max_abs_diff(&s.matrix, &d.matrix);
                worst = worst.max(dev);
                csv.push_str(&report::row([float(k), float(dev), float(s.unitarity_residual), "ok".into()]));
            }
            (Err(Error::CriticalSet(_) | Error::Resonance(..)), _) | (_, Err(Error::Resonance(..))) => {
                skipped += 1;
                csv.push_str(&report::row([float(k), "nan".into(), "nan".into(), "critical".into()]));
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    }
    emit(out, &csv)?;
    eprintln!("max deviation {worst:e} over {} points ({skipped} critical)", samples - skipped);
    if worst <= tol {
        Ok(())
    } else {
        Err(Failure::Validation(format!("deviation {worst:e} exceeds {tol:e}")))
    }
}

fn weyl(input: &Input, branch: OneBranch, lambda_max: f64, roots: &RootFlags, out: Option<&Path>) -> Outcome {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Failure::Usage(format!("lambda-max must be positive, got {lambda_max}")));
    }
    let (g, bc) = load_checked(input)?;
    let branch = match branch {
        OneBranch::Positive => Branch::Positive,
        OneBranch::Negative => Branch::Negative,
    };
    let r = spectral::counting_function(&bc, &g, branch, lambda_max, &roots.options())?;
    let mut settings = vec![("branch", branch.name().to_string()), ("lambda_max", float(lambda_max))];
    settings.extend(roots.settings());
    let mut csv = header("weyl", &settings);
    let _ = writeln!(
        csv,
        "# count={} weyl_slope={} expected_slope={}",
        r.count,
        float(r.weyl_slope),
        float(r.expected_slope)
    );
    csv.push_str(&report::row(["lambda", "count"]));
    for (l, n) in &r.samples {
        csv.push_str(&report::row([float(*l), n.to_string()]));
    }
    eprintln!(
        "N = {}, N pi / sqrt(lambda) = {:.6}, total length = {:.6}",
        r.count, r.weyl_slope, r.expected_slope
    );
    emit(out, &csv)
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { input, sym_tol } => validate(&input, sym_tol),
        Command::Spectrum(args) => spectrum_command(&args, false),
        Command::Resonances(args) => spectrum_command(&args, true),
        Command::Scatter {
            input,
            lmin,
            lmax,
            samples,
            out,
        } => scatter(&input, lmin, lmax, samples, out.as_deref()),
        Command::Resolvent {
            input,
            k_re,
            k_im,
            points,
            out,
        } => resolvent(&input, Complex64::new(k_re, k_im), &points, out.as_deref()),
        Command::Glue {
            graph1,
            bc1,
            graph2,
            bc2,
            pairs,
            lengths,
            kmin,
            kmax,
            samples,
            tol,
            out,
        } => glue(
            [&graph1, &bc1, &graph2, &bc2],
            &pairs,
            &lengths,
            (kmin, kmax, samples),
            tol,
            out.as_deref(),
        ),
        Command::Weyl {
            input,
            branch,
            lambda_max,
            roots,
            out,
        } => weyl(&input, branch, lambda_max, &roots, out.as_deref()),
    }
}

/// Parse `argv` (program name first) and run the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_point("i3:0.25").unwrap(), EdgePoint::new("i3", 0.25));
        assert!(parse_point("i3").is_err());
        assert_eq!(parse_pair("a:b").unwrap(), ("a".into(), "b".into()));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["signgraph", "frobnicate"]), 2);
        assert_eq!(run(["signgraph", "scatter", "g.json"]), 2);
        assert_eq!(run(["signgraph", "--help"]), 0);
    }
}
