//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage error, 3 I/O
//! error. Numbers are printed in Rust's shortest round-trip decimal form, so
//! every value parses back to the same `f64`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::conformal::RescaledMoment;
use crate::conventions::conventions_report;
use crate::differential::{nabla_j_defect, nabla_j_defect_with, FdParams};
use crate::fiber::{fiber_classify, fiber_sample, oracle, orbit_dimension, FiberTag};
use crate::frame::{AlmostComplex, ConfigPoint, MetricKind, TangentVector};
use crate::image::{
    boundary_mesh, delta_classify, edge_check, edges, f_bound, hessian_det_f, in_tetrahedron, variety_f,
    DeltaClass, Mesh, Sheet, DEFAULT_MEMBERSHIP_TOL, VERTICES,
};
use crate::moment::{nu, nu_differential_from_d_omega, nu_jacobian, omega_pairing, MomentValue};
use crate::quaternion::ImaginaryUnit;
use crate::torus::{torus_act, verify_homomorphism, KillingField, TorusElement, TorusSpec};

pub const SCHEMA_VERSION: u32 = 1;
const NORM_SLACK: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Parses `x,y,z` into a unit imaginary quaternion, rejecting inputs whose norm
/// is off by more than 1e-6.
pub fn parse_axis(s: &str) -> Result<ImaginaryUnit, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated reals, got `{s}`"));
    }
    let mut v = [0.0f64; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("`{part}` is not a real number"))?;
    }
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !((norm - 1.0).abs() <= NORM_SLACK) {
        return Err(format!("axis `{s}` has norm {norm}, expected 1 within {NORM_SLACK}"));
    }
    ImaginaryUnit::normalize(v).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Mesh,
}

#[derive(Debug, Parser)]
#[command(name = "nkmoment", version, about = "Multi-moment map of a torus action on nearly Kähler S3xS3")]
pub struct Cli {
    /// First torus axis, a unit imaginary quaternion `x,y,z`
    #[arg(long = "A", global = true, default_value = "1,0,0", value_parser = parse_axis, allow_hyphen_values = true)]
    pub a: ImaginaryUnit,
    /// Second torus axis
    #[arg(long = "B", global = true, default_value = "1,0,0", value_parser = parse_axis, allow_hyphen_values = true)]
    pub b: ImaginaryUnit,
    /// Third torus axis
    #[arg(long = "C", global = true, default_value = "0,1,0", value_parser = parse_axis, allow_hyphen_values = true)]
    pub c: ImaginaryUnit,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Sample count; the mesh resolution for boundary-mesh
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: Option<u64>,
    /// Overrides every check tolerance in verify and the membership tolerance elsewhere
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "fd-step", global = true, default_value_t = 1e-5)]
    pub fd_step: f64,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the verification suite and print a JSON report
    Verify,
    /// Sample the image of the multi-moment map at Haar-random points
    ImageSample,
    /// Triangulate both boundary sheets of the image
    BoundaryMesh,
    /// Classify the fiber over a point and sample it
    Fiber {
        #[arg(allow_negative_numbers = true, num_args = 3, value_names = ["X", "Y", "Z"])]
        tau: Vec<f64>,
    },
}

/// Validated settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: TorusSpec,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub fd: FdParams,
    pub out: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let (default_samples, default_format, allowed): (usize, Format, &[Format]) = match cli.command {
            Command::Verify => (1000, Format::Json, &[Format::Json]),
            Command::ImageSample => (10_000, Format::Csv, &[Format::Csv, Format::Json]),
            Command::BoundaryMesh => (33, Format::Mesh, &[Format::Mesh, Format::Json]),
            Command::Fiber { .. } => (8, Format::Json, &[Format::Json, Format::Csv]),
        };
        let format = cli.format.unwrap_or(default_format);
        if !allowed.contains(&format) {
            return Err(CliError::Usage(format!("--format {format:?} is not available for this subcommand")));
        }
        let fd = FdParams::new(cli.fd_step, false).map_err(|e| CliError::Usage(format!("--fd-step: {e}")))?;
        if let Some(t) = cli.tol {
            if !(t >= 0.0) {
                return Err(CliError::Usage(format!("--tol must be a nonnegative real, got {t}")));
            }
        }
        Ok(Self {
            spec: TorusSpec::new(cli.a, cli.b, cli.c),
            seed: cli.seed,
            samples: cli.samples.map_or(default_samples, |s| s as usize),
            tol: cli.tol,
            fd,
            out: cli.out.clone(),
            format,
        })
    }

    fn membership_tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_MEMBERSHIP_TOL)
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = RunConfig::from_cli(&cli).and_then(|cfg| dispatch(&cli.command, &cfg, stdout));
    match outcome {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut body = Vec::new();
    let code = match cmd {
        Command::Verify => {
            let report = verify_report(cfg);
            serde_json::to_writer_pretty(&mut body, &report).map_err(io::Error::from)?;
            body.push(b'\n');
            if report.all_pass {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Command::ImageSample => {
            write_image_sample(cfg, &mut body)?;
            EXIT_OK
        }
        Command::BoundaryMesh => {
            let mesh = boundary_mesh(cfg.samples).map_err(|e| CliError::Usage(format!("--samples: {e}")))?;
            write_mesh(cfg, &mesh, &mut body)?;
            EXIT_OK
        }
        Command::Fiber { tau } => {
            let tau = MomentValue::new(tau[0], tau[1], tau[2]);
            write_fiber(cfg, &tau, &mut body)?;
            EXIT_OK
        }
    };
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(&body)?;
            w.flush()?;
        }
        None => stdout.write_all(&body)?,
    }
    Ok(code)
}

fn axis_json(x: ImaginaryUnit) -> [f64; 3] {
    x.vector()
}

fn spec_json(spec: &TorusSpec) -> serde_json::Value {
    json!({ "A": axis_json(spec.a), "B": axis_json(spec.b), "C": axis_json(spec.c) })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub paper_claim: &'static str,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub spec: serde_json::Value,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub conventions: serde_json::Value,
    pub all_pass: bool,
}

struct Suite {
    override_tol: Option<f64>,
    checks: Vec<Check>,
}

impl Suite {
    fn push(&mut self, name: &'static str, paper_claim: &'static str, residual: f64, tol: f64) {
        let tol = self.override_tol.unwrap_or(tol);
        self.checks.push(Check {
            name,
            paper_claim,
            residual,
            tol,
            pass: residual <= tol,
        });
    }
}

/// Seed for the `k`-th independent stream derived from `seed`.
pub fn derived_seed(seed: u64, k: u64) -> u64 {
    seed ^ (k.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs every verification check at `cfg.samples` scale. Checks that mix the
/// configured torus with random tori say so in their claim text.
pub fn verify_report(cfg: &RunConfig) -> VerifyReport {
    let n = cfg.samples;
    let spec = cfg.spec;
    let fd = cfg.fd;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Suite {
        override_tol: cfg.tol,
        checks: Vec::new(),
    };

    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let c = ConfigPoint::sample(&mut rng);
        worst = worst.max(omega_pairing(&spec, &c).max_abs_diff(&nu(&spec, &c)));
    }
    s.push("omega_pairing", "omega on pairs of Killing fields gives the closed-form moment map", worst, 1e-12);

    let mut worst: f64 = 0.0;
    for _ in 0..n.min(200) {
        let c = ConfigPoint::sample(&mut rng);
        let j = nu_jacobian(&spec, &c, &fd).expect("anchored");
        let exact = nu_differential_from_d_omega(&spec, &c);
        for r in 0..3 {
            for k in 0..6 {
                worst = worst.max((j.rows[r][k] - exact.rows[r][k]).abs());
            }
        }
    }
    s.push("multi_moment_differential", "d of the moment map equals d omega on Killing fields (FD)", worst, 1e-6);

    let mut worst: f64 = 0.0;
    let mut flat: f64 = 0.0;
    for _ in 0..n {
        let u = TangentVector::sample(ConfigPoint::IDENTITY, &mut rng);
        worst = worst.max(nabla_j_defect(&u.unit_in(MetricKind::NKAveraged)));
        let uf = u.unit_in(MetricKind::Flat);
        flat = flat.max(nabla_j_defect_with(&uf, MetricKind::Flat, AlmostComplex::ADOPTED));
    }
    s.push("nearly_kaehler_defect", "the Levi-Civita derivative of J is skew", worst, 1e-10);
    s.push("flat_metric_control", "the flat metric is not nearly Kaehler (worst defect short of 0.1)", (0.1 - flat).max(0.0), 0.0);

    let mut worst: f64 = 0.0;
    let mut outside = 0usize;
    for _ in 0..n {
        let t = nu(&TorusSpec::sample(&mut rng), &ConfigPoint::sample(&mut rng));
        let lo = f_bound(Sheet::Lower, t.y, t.z).expect("in range");
        let hi = f_bound(Sheet::Upper, t.y, t.z).expect("in range");
        worst = worst.max(lo - t.x).max(t.x - hi);
        let u = nu(&spec, &ConfigPoint::sample(&mut rng));
        let mid = u.lerp(&t, rng.gen());
        outside += delta_classify(&mid, cfg.membership_tol()).is_outside() as usize;
    }
    s.push("image_sandwich", "values lie between the two sheets (random tori)", worst.max(0.0), 1e-12);
    s.push("image_convexity", "segments between values stay in the image (count outside)", outside as f64, 0.0);

    let mesh = boundary_mesh(33).expect("valid resolution");
    let worst = mesh.vertices.iter().map(|v| variety_f(v).abs()).fold(0.0, f64::max);
    let anchors = variety_f(&MomentValue::new(0.0, 0.0, 0.0)) - 1.0;
    let at_v = VERTICES.iter().map(|v| variety_f(v).abs()).fold(0.0, f64::max);
    s.push("boundary_variety", "mesh vertices lie on the cubic surface", worst, 1e-9);
    s.push("variety_anchors", "the cubic is 1 at the origin and 0 on V", anchors.abs().max(at_v), 0.0);

    let (mut worst, mut neg): (f64, f64) = (0.0, 0.0);
    for _ in 0..n {
        let (y, z) = (rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95));
        let (closed, numeric) = hessian_det_f(Sheet::Lower, y, z, &fd).expect("interior");
        worst = worst.max((closed - numeric).abs());
        neg = neg.max(-closed).max(-numeric);
    }
    s.push("hessian_determinant", "closed-form Hessian determinant of the lower sheet (FD)", worst, 1e-5);
    s.push("hessian_nonnegative", "the lower sheet has nonnegative Hessian determinant", neg.max(0.0), 1e-12);

    let (mut upper, mut off_boundary) = (0.0f64, 0usize);
    for (a, b) in edges() {
        for k in 0..=n.min(1000) {
            let t = -1.0 + 2.0 * k as f64 / n.min(1000) as f64;
            let e = edge_check(a, b, t).expect("valid edge");
            if (a, b) != (2, 3) {
                upper = upper.max(e.f_tilde_upper.abs()).max(e.f_tilde_lower.max(0.0));
            }
            off_boundary += !e.on_boundary(1e-12) as usize;
        }
    }
    s.push("edges_upper_sheet", "five V-edges lie on the upper sheet", upper, 1e-12);
    s.push("edges_in_boundary", "all six V-edges lie in the boundary (count off)", off_boundary as f64, 0.0);
    let bulge = tetra_face_bulge(cfg.membership_tol());
    s.push("face_bulge", "face points of the tetrahedron are interior (count not)", bulge as f64, 0.0);

    let tol = cfg.membership_tol();
    let mut wrong = VERTICES
        .iter()
        .filter(|v| fiber_classify(v, spec.c, tol).tag != FiberTag::VertexPoint)
        .count();
    for _ in 0..n.min(100) {
        let (y, z) = (rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99));
        let sheet = if rng.gen() { Sheet::Upper } else { Sheet::Lower };
        let b = MomentValue::new(f_bound(sheet, y, z).expect("in range"), y, z);
        wrong += (fiber_classify(&b, spec.c, tol).tag != FiberTag::OneCircle) as usize;
        let i = oracle::random_tau(spec.c, &mut rng);
        let class = fiber_classify(&i, spec.c, tol);
        wrong += (class.tag != FiberTag::TwoCircles) as usize;
        wrong += (class.witnesses.len() == 2 && class.witnesses[0].det(spec.c) * class.witnesses[1].det(spec.c) >= 0.0)
            as usize;
    }
    s.push("fiber_table", "fiber types over vertices, boundary and interior (count wrong)", wrong as f64, 0.0);

    let cloud = oracle::pair_cloud(spec.c, 1_000_000, derived_seed(cfg.seed, 1));
    let mut disagree = 0usize;
    let mut tested = 0usize;
    while tested < n.min(20) {
        let t = oracle::random_tau(spec.c, &mut rng);
        if oracle::component_separation(&t, spec.c) < ORACLE_RESOLUTION {
            continue;
        }
        tested += 1;
        let count = oracle::count_components(&cloud, &t, ORACLE_WINDOW, ORACLE_LINK);
        disagree += (count != fiber_classify(&t, spec.c, tol).tag.components()) as usize;
    }
    s.push("fiber_oracle", "dense sampling finds the same component count (count disagree)", disagree as f64, 0.0);

    let mut wrong = 0usize;
    let mut sphere: f64 = 0.0;
    let rescaled = RescaledMoment::new(spec, crate::conformal::DEFAULT_EPSILON).expect("positive");
    let mut seen = 0;
    while seen < n.min(100) {
        let c = ConfigPoint::sample(&mut rng);
        if delta_classify(&nu(&spec, &c), tol) != DeltaClass::Interior || !rescaled.in_window(&c) {
            continue;
        }
        seen += 1;
        wrong += (nu_jacobian(&spec, &c, &fd).expect("anchored").rank() != 3) as usize;
        wrong += (rescaled.rank(&c, &fd).expect("in window") > 2) as usize;
        sphere = sphere.max((rescaled.nu_hat(&c).expect("in window").norm() - 1.0).abs());
    }
    s.push("submersion_contrast", "rank 3 for the moment map, at most 2 after rescaling (count wrong)", wrong as f64, 0.0);
    s.push("rescaled_unit_norm", "the rescaled map takes values in the unit sphere", sphere, 1e-12);

    let mut lie: f64 = 0.0;
    for _ in 0..n.min(20) {
        let c = ConfigPoint::sample(&mut rng);
        let u = TangentVector::sample(c, &mut rng);
        let v = TangentVector::sample(c, &mut rng);
        for k in 0..3 {
            let field = KillingField::new(spec, k);
            let lg = crate::differential::lie_derivative_metric_flow(&field, &u, &v, &fd).expect("anchored");
            let lj = crate::differential::lie_derivative_j_flow(&field, &u, &fd);
            lie = lie.max(lg.abs()).max(lj.coeffs.iter().fold(0.0, |m: f64, x| m.max(x.abs())));
        }
    }
    s.push("holomorphic_isometries", "Killing fields preserve g and J (FD)", lie, 1e-6);

    let mut inv: f64 = 0.0;
    for _ in 0..n {
        let c = ConfigPoint::sample(&mut rng);
        let el = TorusElement::new(rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0), rng.gen_range(0.0..7.0));
        inv = inv.max(nu(&spec, &torus_act(&spec, &el, &c)).max_abs_diff(&nu(&spec, &c)));
    }
    s.push("torus_invariance", "the moment map is constant on torus orbits", inv, 1e-12);

    let hom = verify_homomorphism(n, &mut rng);
    s.push("composition_law", "F is a homomorphism", hom.max_composition_residual, 1e-12);
    let kernel_ok = hom.kernel_sign_triples == vec![[1, 1, 1], [-1, -1, -1]] && hom.random_kernel_hits == 0;
    s.push("kernel", "kernel among sign triples is exactly {+-(1,1,1)} (injectivity fails)", (!kernel_ok) as u8 as f64, 0.0);

    let conv = conventions_report(cfg.seed, n.min(200));
    let conventions = json!({
        "lambda": conv.lambda,
        "metric_cross_sign": conv.metric_cross_sign,
        "kernel": conv.kernel,
        "kernel_is_trivial": conv.kernel_is_trivial,
        "metric_cross_term": conv.metric_cross_term,
        "almost_complex_off_diagonal_sign": conv.adopted_off_diagonal_sign,
        "candidates": conv.candidates,
        "identity_image": conv.identity_image,
        "third_killing_field": conv.third_killing_field,
        "pairing_basis": "K1^K2, K3^K1, K2^K3",
        "hessian_display_gap_lower": conv.hessian_display_gap_lower,
        "edges": conv.edges,
    });

    let all_pass = s.checks.iter().all(|c| c.pass);
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        spec: spec_json(&spec),
        seed: cfg.seed,
        samples: n,
        checks: s.checks,
        conventions,
        all_pass,
    }
}

/// Sampling window, linking radius and minimal component separation of the
/// dense fiber oracle.
pub const ORACLE_WINDOW: f64 = 0.15;
pub const ORACLE_LINK: f64 = 0.1;
pub const ORACLE_RESOLUTION: f64 = 0.3;

/// Points on the faces of the tetrahedron on V, away from its edges, that do not
/// classify as interior.
fn tetra_face_bulge(tol: f64) -> usize {
    let mut bad = 0;
    for face in crate::image::tetrahedron_faces() {
        let [a, b, c] = face.vertices.map(|k| VERTICES[k]);
        for i in 1..10 {
            for j in 1..10 - i {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let w = 1.0 - u - v;
                let p = MomentValue::new(
                    u * a.x + v * b.x + w * c.x,
                    u * a.y + v * b.y + w * c.y,
                    u * a.z + v * b.z + w * c.z,
                );
                bad += (delta_classify(&p, tol) != DeltaClass::Interior || !in_tetrahedron(&p, 1e-12)) as usize;
            }
        }
    }
    bad
}

const IMAGE_CHUNK: usize = 4096;

/// `(value, class)` rows for `cfg.samples` Haar-random points, generated in
/// fixed chunks with derived seeds so the output depends only on the config.
pub fn image_rows(cfg: &RunConfig) -> Vec<(MomentValue, DeltaClass)> {
    let n = cfg.samples;
    let tol = cfg.membership_tol();
    (0..n.div_ceil(IMAGE_CHUNK))
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg.seed, k as u64));
            let len = IMAGE_CHUNK.min(n - k * IMAGE_CHUNK);
            (0..len)
                .map(|_| {
                    let v = nu(&cfg.spec, &ConfigPoint::sample(&mut rng));
                    (v, delta_classify(&v, tol))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn write_image_sample(cfg: &RunConfig, w: &mut dyn Write) -> io::Result<()> {
    let rows = image_rows(cfg);
    match cfg.format {
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(v, c)| json!({ "X": v.x, "Y": v.y, "Z": v.z, "class": c.label() }))
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "spec": spec_json(&cfg.spec),
                "seed": cfg.seed,
                "rows": rows,
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
        _ => {
            writeln!(w, "# nkmoment image-sample schema {SCHEMA_VERSION} seed {}", cfg.seed)?;
            writeln!(w, "X,Y,Z,class")?;
            for (v, c) in rows {
                writeln!(w, "{},{},{},{}", v.x, v.y, v.z, c.label())?;
            }
            Ok(())
        }
    }
}

fn write_mesh(cfg: &RunConfig, mesh: &Mesh, w: &mut dyn Write) -> io::Result<()> {
    match cfg.format {
        Format::Json => {
            let vertices: Vec<[f64; 3]> = mesh.vertices.iter().map(|v| v.to_array()).collect();
            let faces: Vec<[usize; 3]> = mesh.triangles.iter().map(|t| t.map(|k| k + 1)).collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "resolution": cfg.samples,
                "vertices": vertices,
                "faces": faces,
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
        _ => {
            writeln!(w, "# nkmoment boundary-mesh schema {SCHEMA_VERSION} resolution {}", cfg.samples)?;
            for v in &mesh.vertices {
                writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
            }
            for t in &mesh.triangles {
                writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
            }
            Ok(())
        }
    }
}

fn write_fiber(cfg: &RunConfig, tau: &MomentValue, w: &mut dyn Write) -> io::Result<()> {
    let tol = cfg.membership_tol();
    let class = fiber_classify(tau, cfg.spec.c, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = fiber_sample(tau, &cfg.spec, cfg.samples, tol, &mut rng).unwrap_or_default();
    match cfg.format {
        Format::Csv => {
            writeln!(w, "# nkmoment fiber schema {SCHEMA_VERSION} class {:?}", class.tag)?;
            writeln!(w, "p_w,p_x,p_y,p_z,q_w,q_x,q_y,q_z,component,residual")?;
            for s in &samples {
                let a = s.cfg.to_array();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], s.component, s.residual
                )?;
            }
            Ok(())
        }
        _ => {
            let points: Vec<_> = samples
                .iter()
                .map(|s| {
                    json!({
                        "p": s.cfg.p.quat().to_array(),
                        "q": s.cfg.q.quat().to_array(),
                        "component": s.component,
                        "residual": s.residual,
                        "orbit_dimension": orbit_dimension(&cfg.spec, &s.cfg),
                    })
                })
                .collect();
            let witnesses: Vec<_> = class
                .witnesses
                .iter()
                .map(|x| json!({ "x": x.x.vector(), "y": x.y.vector(), "det": x.det(cfg.spec.c) }))
                .collect();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "spec": spec_json(&cfg.spec),
                "seed": cfg.seed,
                "tau": tau.to_array(),
                "class": class.tag,
                "location": delta_classify(tau, tol).label(),
                "orbit_dimension": class.tag.orbit_dimension(),
                "witnesses": witnesses,
                "samples": points,
                "max_residual": samples.iter().map(|s| s.residual).fold(0.0, f64::max),
            });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
    }
}
