//! JSON run configurations, named presets, and the solve/verify drivers used
//! by the command-line tool.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary_solver::{
    error_angles, fit, orthonormalize, reconstruct_interior, upsample_periodic_linear, BoundarySystem,
    DroppedFunction, FitResult, OrthonormalBasis, DEFAULT_DROP_TOL,
};
use crate::conductivity::{
    sample_piecewise, ConductivityField, GeometricScene, Geometry, GridSampler, InterpolantKind, LimitCase, Sampler,
    Shape,
};
use crate::error::{Error, Result};
use crate::formal_powers::{boundary_powers, build_table_with, pseudoanalyticity_check, FormalPowerTable, Seed};
use crate::pseudoanalytic::{
    build_sequence_with, successor_residual, GeneratingSequence, PairConvention, RadialGrading, RadialMesh,
    RayQuadrature, Stencil,
};
use crate::verification::{cubic_trace, lorentzian_case, sinusoidal_case, spiral_points, ExactCase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConductivitySpec {
    Uniform {
        value: f64,
    },
    /// `(2 + cos(omega x)) (2 + sin(omega y))`.
    Sinusoidal {
        omega: f64,
    },
    /// `1 / (((x - beta)^2 + 0.1) (y^2 + 0.1))`.
    Lorentzian {
        beta: f64,
    },
    RadialRings,
    Scene(GeometricScene),
    /// Bilinear interpolation of an `x,y,sigma` CSV file.
    Grid {
        path: PathBuf,
    },
    /// Slab-wise separable approximation sampled from another field.
    Piecewise {
        source: Box<ConductivitySpec>,
        slabs: usize,
        samples: usize,
        #[serde(default = "default_k")]
        k: f64,
        #[serde(default)]
        interpolant: InterpolantKind,
    },
}

fn default_k() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    /// Trace of the known solution of a sinusoidal or Lorentzian field.
    Exact,
    /// `((x - shift)^3 + y^3)/3 + 0.1 (x - shift + y)`.
    Cubic {
        #[serde(default)]
        shift: f64,
    },
    /// `Re z^degree`.
    Harmonic { degree: u32 },
    /// `theta,u` rows, interpolated periodically and linearly in theta.
    Csv { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSampling {
    /// Fitted trace interpolated from the ray endpoints to the Q points.
    #[default]
    Linear,
    /// Traces recomputed on a mesh of Q rays.
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyThresholds {
    pub divergence: f64,
    pub vekua: f64,
    pub successor: f64,
}

impl Default for VerifyThresholds {
    fn default() -> Self {
        Self {
            divergence: 1e-3,
            vekua: 1e-3,
            successor: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub conductivity: ConductivitySpec,
    pub boundary: BoundarySpec,
    /// Maximum formal-power degree `N`.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Points of the error quadrature.
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default)]
    pub grading: RadialGrading,
    #[serde(default)]
    pub quadrature: RayQuadrature,
    #[serde(default)]
    pub pair_convention: PairConvention,
    #[serde(default)]
    pub error_sampling: ErrorSampling,
    #[serde(default = "default_true")]
    pub corner_snap: bool,
    #[serde(default)]
    pub dump_powers: bool,
    #[serde(default)]
    pub interior: bool,
    #[serde(default = "default_drop_tol")]
    pub drop_tol: f64,
    #[serde(default = "default_h")]
    pub stencil_h: f64,
    /// Ray count of the mesh used for the Vekua residual in `verify`.
    #[serde(default = "default_verify_rays")]
    pub verify_rays: usize,
    #[serde(default)]
    pub thresholds: VerifyThresholds,
}

fn default_n() -> usize {
    17
}
fn default_rays() -> usize {
    35
}
fn default_steps() -> usize {
    400
}
fn default_q() -> usize {
    1000
}
fn default_true() -> bool {
    true
}
fn default_drop_tol() -> f64 {
    DEFAULT_DROP_TOL
}
fn default_h() -> f64 {
    1e-4
}
fn default_verify_rays() -> usize {
    360
}

impl RunConfig {
    pub fn new(conductivity: ConductivitySpec, boundary: BoundarySpec) -> Self {
        Self {
            conductivity,
            boundary,
            n: default_n(),
            rays: default_rays(),
            steps: default_steps(),
            q: default_q(),
            grading: RadialGrading::default(),
            quadrature: RayQuadrature::default(),
            pair_convention: PairConvention::default(),
            error_sampling: ErrorSampling::default(),
            corner_snap: true,
            dump_powers: false,
            interior: false,
            drop_tol: default_drop_tol(),
            stencil_h: default_h(),
            verify_rays: default_verify_rays(),
            thresholds: VerifyThresholds::default(),
        }
    }

    /// Parses a config; a `"preset"` key starts from that preset and the
    /// remaining top-level keys override it.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::validation("config must be a JSON object"))?;
        let cfg: Self = match obj.remove("preset") {
            Some(Value::String(name)) => {
                let mut base = serde_json::to_value(preset(&name)?)?;
                let base_obj = base.as_object_mut().expect("config serializes to an object");
                for (k, v) in std::mem::take(obj) {
                    base_obj.insert(k, v);
                }
                serde_json::from_value(base)?
            }
            Some(other) => return Err(Error::validation(format!("preset must be a string, got {other}"))),
            None => serde_json::from_value(value)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::validation("n (maximum degree) must be at least 1"));
        }
        if self.rays < 4 {
            return Err(Error::validation(format!("rays = {} must be at least 4", self.rays)));
        }
        if self.rays < 2 * self.n + 1 {
            log::warn!(
                "rays = {} is below 2n + 1 = {}; some functions will be dropped",
                self.rays,
                2 * self.n + 1
            );
        }
        if self.steps < 50 {
            return Err(Error::validation(format!("steps = {} must be at least 50", self.steps)));
        }
        if self.q < self.rays {
            return Err(Error::validation(format!(
                "q = {} must be at least rays = {}",
                self.q, self.rays
            )));
        }
        if !(self.drop_tol.is_finite() && self.drop_tol >= 0.0) {
            return Err(Error::validation(format!("drop_tol = {} must be >= 0", self.drop_tol)));
        }
        Stencil::new(self.stencil_h)?;
        if self.verify_rays < 9 {
            return Err(Error::validation("verify_rays must be at least 9"));
        }
        if let RadialGrading::Rim { exponent } = self.grading {
            if !(exponent.is_finite() && exponent >= 1.0) {
                return Err(Error::validation(format!("rim grading exponent {exponent} must be >= 1")));
            }
        }
        if self.boundary == BoundarySpec::Exact && exact_case(&self.conductivity)?.is_none() {
            return Err(Error::validation(
                "boundary kind `exact` needs a sinusoidal or lorentzian conductivity",
            ));
        }
        Ok(())
    }
}

pub const PRESETS: [&str; 10] = [
    "uniform",
    "sinusoidal",
    "lorentzian-0",
    "lorentzian-0.5",
    "lorentzian-1",
    "radial-rings",
    "disk-center",
    "disk-0.6",
    "disk-0.79",
    "triangle",
];

/// Vertices of the triangle scene: two toward `pi/4` and `5 pi/4` on the
/// circle of radius 0.6, the third toward `3 pi/4`.
pub fn triangle_vertices() -> Vec<[f64; 2]> {
    [PI / 4.0, 5.0 * PI / 4.0, 3.0 * PI / 4.0]
        .iter()
        .map(|a| [0.6 * a.cos(), 0.6 * a.sin()])
        .collect()
}

fn disk_scene(cx: f64) -> ConductivitySpec {
    ConductivitySpec::Scene(GeometricScene {
        background: 10.0,
        shapes: vec![Shape {
            geometry: Geometry::Disk { cx, cy: 0.0, r2: 0.2 },
            value: 100.0,
        }],
    })
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let dense = |mut c: RunConfig| {
        c.error_sampling = ErrorSampling::Dense;
        c
    };
    Ok(match name {
        "uniform" => {
            let mut c = dense(RunConfig::new(ConductivitySpec::Uniform { value: 1.0 }, BoundarySpec::Harmonic { degree: 2 }));
            c.n = 10;
            c.rays = 360;
            c
        }
        "sinusoidal" => dense(RunConfig::new(ConductivitySpec::Sinusoidal { omega: PI }, BoundarySpec::Exact)),
        "lorentzian-0" | "lorentzian-0.5" | "lorentzian-1" => {
            let beta = name["lorentzian-".len()..].parse().expect("preset suffix is a number");
            dense(RunConfig::new(ConductivitySpec::Lorentzian { beta }, BoundarySpec::Exact))
        }
        "radial-rings" => dense(RunConfig::new(ConductivitySpec::RadialRings, BoundarySpec::Cubic { shift: 0.0 })),
        "disk-center" => dense(RunConfig::new(disk_scene(0.0), BoundarySpec::Cubic { shift: 0.0 })),
        "disk-0.6" => dense(RunConfig::new(disk_scene(0.6), BoundarySpec::Cubic { shift: 0.6 })),
        "disk-0.79" => dense(RunConfig::new(disk_scene(0.79), BoundarySpec::Cubic { shift: 0.79 })),
        "triangle" => {
            let scene = ConductivitySpec::Scene(GeometricScene {
                background: 10.0,
                shapes: vec![Shape {
                    geometry: Geometry::Polygon {
                        vertices: triangle_vertices(),
                    },
                    value: 100.0,
                }],
            });
            let mut c = dense(RunConfig::new(scene, BoundarySpec::Cubic { shift: 0.6 }));
            c.n = 32;
            c.rays = 128;
            c
        }
        other => {
            return Err(Error::validation(format!(
                "unknown preset `{other}`; known presets: {}",
                PRESETS.join(", ")
            )))
        }
    })
}

fn exact_case(spec: &ConductivitySpec) -> Result<Option<ExactCase>> {
    Ok(match spec {
        ConductivitySpec::Sinusoidal { omega } => Some(sinusoidal_case(*omega)?),
        ConductivitySpec::Lorentzian { beta } => Some(lorentzian_case(*beta)),
        ConductivitySpec::Piecewise { source, .. } => exact_case(source)?,
        _ => None,
    })
}

pub fn build_field(spec: &ConductivitySpec) -> Result<ConductivityField> {
    Ok(match spec {
        ConductivitySpec::Uniform { value } => {
            if !(value.is_finite() && *value > 0.0) {
                return Err(Error::validation(format!("uniform conductivity {value} must be positive")));
            }
            ConductivityField::uniform(*value)
        }
        ConductivitySpec::Sinusoidal { omega } => sinusoidal_case(*omega)?.sigma,
        ConductivitySpec::Lorentzian { beta } => lorentzian_case(*beta).sigma,
        ConductivitySpec::RadialRings => ConductivityField::radial_rings(),
        ConductivitySpec::Scene(scene) => {
            scene.validate()?;
            ConductivityField::GeometricScene(scene.clone())
        }
        ConductivitySpec::Grid { path } => {
            let file = File::open(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            let grid = GridSampler::from_csv(file)
                .map_err(|e| Error::validation(format!("conductivity.path {}: {e}", path.display())))?;
            ConductivityField::LimitCase(LimitCase {
                sampler: Sampler::Grid(grid),
            })
        }
        ConductivitySpec::Piecewise {
            source,
            slabs,
            samples,
            k,
            interpolant,
        } => {
            let src = build_field(source)?;
            let sigma = |x: f64, y: f64| src.evaluate(x, y).unwrap_or(f64::NAN);
            ConductivityField::PiecewiseSeparable(sample_piecewise(&sigma, *slabs, *samples, *k, *interpolant)?)
        }
    })
}

/// Boundary data as a function of the boundary angle.
pub struct BoundaryData {
    eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BoundaryData {
    pub fn at(&self, theta: f64) -> f64 {
        (self.eval)(theta)
    }

    pub fn sample(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().map(|&t| self.at(t)).collect()
    }
}

pub fn build_boundary(spec: &BoundarySpec, conductivity: &ConductivitySpec) -> Result<BoundaryData> {
    let eval: Box<dyn Fn(f64) -> f64 + Send + Sync> = match spec {
        BoundarySpec::Exact => {
            let case = exact_case(conductivity)?.ok_or_else(|| {
                Error::validation("boundary kind `exact` needs a sinusoidal or lorentzian conductivity")
            })?;
            Box::new(move |t| case.potential(t.cos(), t.sin()))
        }
        BoundarySpec::Cubic { shift } => {
            let c = *shift;
            Box::new(move |t| cubic_trace(t.cos() - c, t.sin()))
        }
        BoundarySpec::Harmonic { degree } => {
            let d = *degree as f64;
            Box::new(move |t| (d * t).cos())
        }
        BoundarySpec::Csv { path } => {
            let (theta, u) = read_boundary_csv(path)?;
            Box::new(move |t| {
                upsample_periodic_linear(&theta, &u, &[t]).expect("validated samples")[0]
            })
        }
    };
    Ok(BoundaryData { eval })
}

#[derive(Deserialize)]
struct BoundaryRow {
    theta: f64,
    u: f64,
}

fn read_boundary_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["theta", "u"] {
        return Err(Error::validation(format!(
            "boundary.path {}: header must be `theta,u`",
            path.display()
        )));
    }
    let mut theta = Vec::new();
    let mut u = Vec::new();
    for row in rdr.deserialize::<BoundaryRow>() {
        let row = row.map_err(|e| Error::validation(format!("boundary.path {}: {e}", path.display())))?;
        if !(0.0..std::f64::consts::TAU).contains(&row.theta) || !row.u.is_finite() {
            return Err(Error::validation(format!(
                "boundary.path {}: theta {} must lie in [0, 2pi) with finite u",
                path.display(),
                row.theta
            )));
        }
        theta.push(row.theta);
        u.push(row.u);
    }
    if theta.len() < 2 {
        return Err(Error::validation(format!(
            "boundary.path {}: need at least 2 rows",
            path.display()
        )));
    }
    let mut sorted = theta.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::validation(format!(
            "boundary.path {}: duplicate theta values",
            path.display()
        )));
    }
    Ok((theta, u))
}

pub fn build_mesh(cfg: &RunConfig, field: &ConductivityField) -> Result<RadialMesh> {
    let mesh = RadialMesh::graded(cfg.rays, cfg.steps, cfg.grading)?;
    let corners = field.corners();
    if cfg.corner_snap && !corners.is_empty() {
        mesh.snap_to_corners(&corners)
    } else {
        Ok(mesh)
    }
}

/// `sqrt(sigma)` at `points`, the divisor of traces under the main-Vekua
/// convention.
fn sqrt_sigma(field: &ConductivityField, points: &[Complex64]) -> Result<Vec<f64>> {
    points.iter().map(|z| Ok(field.evaluate(z.re, z.im)?.sqrt())).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub table_s: f64,
    pub fit_s: f64,
    pub error_s: f64,
    pub total_s: f64,
}

/// Everything produced by one solve.
pub struct SolveOutcome {
    pub config: RunConfig,
    pub table: FormalPowerTable,
    pub system: BoundarySystem,
    pub basis: OrthonormalBasis,
    pub result: FitResult,
    pub interior: Option<Vec<f64>>,
    pub timing: Timing,
}

impl SolveOutcome {
    pub fn dropped(&self) -> &[DroppedFunction] {
        self.basis.dropped()
    }

    /// `(alpha, b)` with `|b| > threshold`.
    pub fn significant(&self, threshold: f64) -> Vec<(usize, f64)> {
        self.result
            .alphas
            .iter()
            .zip(&self.result.coefficients)
            .filter(|(_, b)| b.abs() > threshold)
            .map(|(a, b)| (*a, *b))
            .collect()
    }
}

fn raw_boundary_traces(
    seq: &GeneratingSequence,
    mesh: &RadialMesh,
    cfg: &RunConfig,
    divisor: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>> {
    let (one, i) = rayon::join(
        || boundary_powers(seq, mesh, cfg.n, Seed::One.value(), cfg.quadrature),
        || boundary_powers(seq, mesh, cfg.n, Seed::I.value(), cfg.quadrature),
    );
    let (one, i) = (one?, i?);
    let re = |trace: &Vec<Complex64>| -> Vec<f64> {
        match divisor {
            Some(d) => trace.iter().zip(d).map(|(z, d)| z.re / d).collect(),
            None => trace.iter().map(|z| z.re).collect(),
        }
    };
    Ok(one.iter().map(re).chain(i.iter().skip(1).map(re)).collect())
}

pub fn solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let field = build_field(&cfg.conductivity)?;
    let data = build_boundary(&cfg.boundary, &cfg.conductivity)?;
    let seq = build_sequence_with(&field, cfg.pair_convention)?;
    let mesh = build_mesh(cfg, &field)?;
    let main_vekua = cfg.pair_convention == PairConvention::MainVekua;

    let table = build_table_with(&seq, &mesh, cfg.n, cfg.quadrature)?;
    let table_s = start.elapsed().as_secs_f64();

    let mut system = BoundarySystem::from_table(&table)?;
    if main_vekua {
        system.scale_traces(&sqrt_sigma(&field, &mesh.boundary_points())?)?;
    }
    let basis = orthonormalize(&system, cfg.drop_tol)?;
    let node_data = data.sample(system.arc());
    let fitted = fit(&basis, &node_data)?;
    let fit_s = start.elapsed().as_secs_f64() - table_s;

    let theta_q = error_angles(cfg.q);
    let data_q = data.sample(&theta_q);
    let fit_q = match cfg.error_sampling {
        ErrorSampling::Linear => upsample_periodic_linear(system.arc(), &fitted.fitted, &theta_q)?,
        ErrorSampling::Dense => {
            let dense = RadialMesh::graded(cfg.q, cfg.steps, cfg.grading)?;
            let divisor = if main_vekua {
                Some(sqrt_sigma(&field, &dense.boundary_points())?)
            } else {
                None
            };
            let raw = raw_boundary_traces(&seq, &dense, cfg, divisor.as_deref())?;
            basis.combine_raw(&fitted.coefficients, &raw)?
        }
    };
    let result = FitResult::new(&fitted, theta_q, data_q, fit_q)?;
    let error_s = start.elapsed().as_secs_f64() - table_s - fit_s;

    let interior = if cfg.interior {
        let divisor = if main_vekua {
            Some(sqrt_sigma(&field, mesh.nodes())?)
        } else {
            None
        };
        Some(reconstruct_interior(
            &table,
            &system,
            &basis,
            &result.coefficients,
            divisor.as_deref(),
        )?)
    } else {
        None
    };
    log::info!(
        "E = {:e} with {} basis functions ({} dropped)",
        result.error,
        basis.len(),
        basis.dropped().len()
    );
    Ok(SolveOutcome {
        config: cfg.clone(),
        table,
        system,
        basis,
        result,
        interior,
        timing: Timing {
            table_s,
            fit_s,
            error_s,
            total_s: start.elapsed().as_secs_f64(),
        },
    })
}

#[derive(Serialize)]
struct SignificantCoefficient {
    alpha: usize,
    b: f64,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    error: f64,
    basis_size: usize,
    raw_functions: usize,
    max_degree: usize,
    dropped: &'a [DroppedFunction],
    significant_coefficients: Vec<SignificantCoefficient>,
    orthonormality_defect: f64,
    timing: &'a Timing,
    config: &'a RunConfig,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Solves and writes `coefficients.csv`, `boundary_fit.csv`, `report.json`,
/// and, when configured, `interior.csv` and `powers.csv` into `out_dir`.
pub fn run_solve(cfg: &RunConfig, out_dir: &Path) -> Result<SolveOutcome> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let outcome = solve(cfg)?;
    let r = &outcome.result;

    let path = out_dir.join("coefficients.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["alpha", "b"])?;
    for (a, b) in r.alphas.iter().zip(&r.coefficients) {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush().map_err(io_err(&path))?;

    let path = out_dir.join("boundary_fit.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["theta", "l", "data", "fit", "residual"])?;
    for ((t, d), f) in r.theta.iter().zip(&r.data).zip(&r.fitted) {
        // on the unit circle arc length equals the angle
        w.write_record([t.to_string(), t.to_string(), d.to_string(), f.to_string(), (d - f).to_string()])?;
    }
    w.flush().map_err(io_err(&path))?;

    if let Some(u) = &outcome.interior {
        let path = out_dir.join("interior.csv");
        let mut w = csv::Writer::from_writer(create(&path)?);
        w.write_record(["x", "y", "u"])?;
        for (z, v) in outcome.table.mesh().nodes().iter().zip(u) {
            w.write_record([z.re.to_string(), z.im.to_string(), v.to_string()])?;
        }
        w.flush().map_err(io_err(&path))?;
    }
    if cfg.dump_powers {
        outcome.table.write_csv(create(&out_dir.join("powers.csv"))?)?;
    }

    let report = SolveReport {
        error: r.error,
        basis_size: outcome.basis.len(),
        raw_functions: outcome.system.functions().len(),
        max_degree: cfg.n,
        dropped: outcome.basis.dropped(),
        significant_coefficients: outcome
            .significant(1e-3)
            .into_iter()
            .map(|(alpha, b)| SignificantCoefficient { alpha, b })
            .collect(),
        orthonormality_defect: outcome.basis.orthonormality_defect(),
        timing: &outcome.timing,
        config: cfg,
    };
    let path = out_dir.join("report.json");
    serde_json::to_writer_pretty(create(&path)?, &report)?;
    Ok(outcome)
}

/// Builds the table and writes it as `powers.csv`.
pub fn run_powers(cfg: &RunConfig, out_dir: &Path) -> Result<FormalPowerTable> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let field = build_field(&cfg.conductivity)?;
    let seq = build_sequence_with(&field, cfg.pair_convention)?;
    let mesh = build_mesh(cfg, &field)?;
    let table = build_table_with(&seq, &mesh, cfg.n, cfg.quadrature)?;
    table.write_csv(create(&out_dir.join("powers.csv"))?)?;
    Ok(table)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub applicable: bool,
    pub value: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub note: String,
}

impl CheckResult {
    fn skipped(name: &str, threshold: f64, note: &str) -> Self {
        Self {
            name: name.into(),
            applicable: false,
            value: None,
            threshold,
            pass: true,
            note: note.into(),
        }
    }

    fn measured(name: &str, value: f64, threshold: f64, note: String) -> Self {
        Self {
            name: name.into(),
            applicable: true,
            value: Some(value),
            threshold,
            pass: value <= threshold,
            note,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub vekua_per_degree: Vec<f64>,
    pub pass: bool,
    pub failed: Vec<String>,
    pub config: RunConfig,
}

/// Divergence residual of the exact solution, Vekua residual of every formal
/// power, and the successor condition of the generating sequence.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let th = &cfg.thresholds;
    let stencil = Stencil::new(cfg.stencil_h)?;
    let field = build_field(&cfg.conductivity)?;
    let seq = build_sequence_with(&field, cfg.pair_convention)?;
    let mut checks = Vec::new();

    let points = spiral_points(200, 0.9);
    checks.push(match exact_case(&cfg.conductivity)? {
        Some(case) => {
            let rep = case.divergence(&points, cfg.stencil_h)?;
            CheckResult::measured(
                "divergence",
                rep.max_residual,
                th.divergence,
                format!("{} points, h = {}", rep.checked, cfg.stencil_h),
            )
        }
        None => CheckResult::skipped("divergence", th.divergence, "no exact solution for this conductivity"),
    });

    let mesh = RadialMesh::graded(cfg.verify_rays, cfg.steps, cfg.grading)?;
    let table = build_table_with(&seq, &mesh, cfg.n, cfg.quadrature)?;
    let vekua = pseudoanalyticity_check(&table, &seq, Some(&field), &stencil)?;
    let worst = vekua.iter().cloned().fold(0.0, f64::max);
    checks.push(CheckResult::measured(
        "vekua",
        worst,
        th.vekua,
        format!("max over degrees 0..={} on {} rays", cfg.n, cfg.verify_rays),
    ));

    checks.push(if seq.period() == 2 {
        let smooth: Vec<Complex64> = points
            .iter()
            .filter(|(x, y)| field.discontinuity_distance(*x, *y) > 4.0 * cfg.stencil_h)
            .map(|&(x, y)| Complex64::new(x, y))
            .collect();
        let value = successor_residual(&seq, &smooth, &stencil)?;
        CheckResult::measured(
            "successor",
            value,
            th.successor,
            format!("{} points, h = {}", smooth.len(), cfg.stencil_h),
        )
    } else {
        CheckResult::skipped(
            "successor",
            th.successor,
            "sequence has period 1; the successor condition applies to period-2 sequences",
        )
    });

    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    Ok(VerifyReport {
        pass: failed.is_empty(),
        failed,
        checks,
        vekua_per_degree: vekua,
        config: cfg.clone(),
    })
}

/// Runs [`verify`] and writes `verify.json` into `out_dir`.
pub fn run_verify(cfg: &RunConfig, out_dir: &Path) -> Result<VerifyReport> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let report = verify(cfg)?;
    serde_json::to_writer_pretty(create(&out_dir.join("verify.json"))?, &report)?;
    Ok(report)
}
