//! Case driver: builds the mesh, model and scheme from a [`CaseConfig`],
//! advances to the final time and records per-step diagnostics.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use pampa_core::mesh::{PolyMesh, StructuredGrid};
use pampa_core::physics::{euler_internal_energy, Advection, Bounds, Euler, Model, State, VelocityField};
use pampa_core::time::{advance, StepController};
use pampa_core::{BoundaryCondition, Scheme, SchemeOptions, SolutionField, Vec2};

use crate::cases::{self, CaseId};
use crate::config::{BcSpec, CaseConfig, MeshSource};
use crate::error::{io_err, Error, Result};
use crate::output::write_outputs;

/// Componentwise extrema of one set of states.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrema {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Extrema {
    fn empty(m: usize) -> Self {
        Self { min: vec![f64::INFINITY; m], max: vec![f64::NEG_INFINITY; m] }
    }

    fn absorb<const M: usize>(&mut self, states: &[State<M>]) {
        for u in states {
            for c in 0..M {
                self.min[c] = self.min[c].min(u[c]);
                self.max[c] = self.max[c].max(u[c]);
            }
        }
    }
}

/// Diagnostics of one time step; extrema cover all three RK stages.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    pub retries: usize,
    pub points: Extrema,
    pub averages: Extrema,
    /// Smallest internal energy over the stages (Euler only).
    pub min_internal_energy: Option<f64>,
    /// `sum_E |E| u_E` after the step, per component.
    pub mass: Vec<f64>,
    pub min_theta: f64,
    pub activations: usize,
    pub fallbacks: usize,
}

impl StepRecord {
    pub fn min_u(&self) -> f64 {
        self.points.min[0].min(self.averages.min[0])
    }

    pub fn max_u(&self) -> f64 {
        self.points.max[0].max(self.averages.max[0])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunDiagnostics {
    pub is_euler: bool,
    pub steps: Vec<StepRecord>,
}

impl RunDiagnostics {
    pub fn final_time(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t)
    }

    /// Largest `|mass_n - mass_0| / |mass_0|` of component `c` relative to `initial`.
    pub fn mass_drift(&self, initial: f64, c: usize) -> f64 {
        self.steps
            .iter()
            .map(|s| (s.mass[c] - initial).abs() / initial.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Writes `step,t,dt,min_rho,min_e,min_u,max_u,mass,min_theta,theta_activations`.
    /// Density and energy columns are empty for scalar runs.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "t", "dt", "min_rho", "min_e", "min_u", "max_u", "mass", "min_theta", "theta_activations"])?;
        let f = |x: f64| format!("{x:?}");
        for s in &self.steps {
            let (rho, e) = if self.is_euler {
                (f(s.min_u()), s.min_internal_energy.map(f).unwrap_or_default())
            } else {
                (String::new(), String::new())
            };
            w.write_record([
                s.step.to_string(),
                f(s.t),
                f(s.dt),
                rho,
                e,
                f(s.min_u()),
                f(s.max_u()),
                f(s.mass[0]),
                f(s.min_theta),
                s.activations.to_string(),
            ])?;
        }
        w.flush().map_err(io_err("diagnostics"))?;
        Ok(())
    }
}

/// What [`run_case`] produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub case: CaseId,
    pub num_elements: usize,
    pub num_points: usize,
    pub initial_mass: Vec<f64>,
    pub diagnostics: RunDiagnostics,
    pub files: Vec<PathBuf>,
    pub elapsed: Duration,
}

/// Options of [`simulate`] that do not depend on the model.
#[derive(Debug, Clone)]
pub struct RunControl<'a> {
    pub t_final: f64,
    pub controller: StepController,
    pub max_steps: Option<usize>,
    pub output: Option<OutputControl<'a>>,
}

#[derive(Debug, Clone)]
pub struct OutputControl<'a> {
    pub dir: &'a Path,
    pub stem: &'a str,
    pub every: usize,
    pub format: crate::output::Format,
    pub names: &'a [&'a str],
}

/// Advances `field` to `control.t_final`, recording every step.
///
/// `energy` is evaluated on every stage state when given (internal energy for Euler).
pub fn simulate<const M: usize, P: Model<M>>(
    scheme: &Scheme<M, P>,
    mut field: SolutionField<M>,
    control: &RunControl<'_>,
    energy: Option<fn(&State<M>) -> f64>,
) -> Result<(SolutionField<M>, RunDiagnostics, Vec<PathBuf>)> {
    let mut diagnostics = RunDiagnostics { is_euler: energy.is_some(), steps: Vec::new() };
    let mut files = Vec::new();
    let write = |field: &SolutionField<M>, stem: &str, files: &mut Vec<PathBuf>| -> Result<()> {
        if let Some(o) = &control.output {
            files.extend(write_outputs(scheme.mesh(), scheme.layout(), field, o.names, o.dir, stem, o.format)?);
        }
        Ok(())
    };
    let stem = control.output.as_ref().map_or("", |o| o.stem);
    write(&field, &format!("{stem}_{:06}", 0), &mut files)?;

    let mut t = 0.0;
    let mut step = 0;
    while t < control.t_final {
        if control.max_steps.is_some_and(|m| step >= m) {
            break;
        }
        let mut points = Extrema::empty(M);
        let mut averages = Extrema::empty(M);
        let mut min_e = f64::INFINITY;
        let (next, report) = advance(scheme, &field, t, control.t_final, &control.controller, |_, u, _| {
            points.absorb(&u.points);
            averages.absorb(&u.averages);
            if let Some(e) = energy {
                min_e = u.states().map(e).fold(min_e, f64::min);
            }
        })
        .map_err(|source| Error::Step { step: step + 1, t, source })?;
        step += 1;
        t = if report.constraint == pampa_core::time::Constraint::FinalTime { control.t_final } else { t + report.dt };
        field = next;
        diagnostics.steps.push(StepRecord {
            step,
            t,
            dt: report.dt,
            retries: report.retries,
            points,
            averages,
            min_internal_energy: energy.map(|_| min_e),
            mass: field.mass(scheme.mesh()).iter().copied().collect(),
            min_theta: report.min_theta(),
            activations: report.activations(),
            fallbacks: report.fallbacks(),
        });
        if let Some(o) = &control.output {
            if o.every > 0 && step % o.every == 0 && t < control.t_final {
                write(&field, &format!("{stem}_{step:06}"), &mut files)?;
            }
        }
    }
    write(&field, &format!("{stem}_final"), &mut files)?;
    Ok((field, diagnostics, files))
}

pub fn build_mesh(cfg: &CaseConfig) -> Result<PolyMesh> {
    match &cfg.mesh {
        MeshSource::File(path) => crate::mesh_io::read_mesh(path),
        MeshSource::Grid { nx, ny, cells, jitter, seed } => {
            let mut grid = StructuredGrid::new(*nx, *ny, cfg.case.domain(), *cells);
            if cfg.case.periodic() {
                grid = grid.periodic();
            }
            if *jitter > 0.0 {
                crate::generate::jittered(&grid, *jitter, *seed)
            } else {
                Ok(grid.build()?)
            }
        }
    }
}

fn options(cfg: &CaseConfig) -> SchemeOptions {
    SchemeOptions {
        order: cfg.order,
        stabilization: cfg.stabilization,
        entropy_fix: cfg.entropy_fix,
        ..SchemeOptions::default()
    }
}

fn boundary<const M: usize>(spec: &BcSpec) -> Result<BoundaryCondition<M>> {
    match spec {
        BcSpec::Transmissive => Ok(BoundaryCondition::Transmissive),
        BcSpec::Dirichlet(v) if v.len() == M => Ok(BoundaryCondition::Dirichlet(State::<M>::from_column_slice(v))),
        BcSpec::Dirichlet(v) => Err(Error::Config(format!("dirichlet data has {} values, the model has {M}", v.len()))),
    }
}

fn apply_boundaries<const M: usize, P: Model<M>>(scheme: &mut Scheme<M, P>, cfg: &CaseConfig) -> Result<()> {
    if let Some(bc) = &cfg.bc_default {
        scheme.default_boundary = boundary(bc)?;
    }
    for (tag, bc) in &cfg.bc {
        scheme.set_boundary(*tag, boundary(bc)?);
    }
    Ok(())
}

/// Scalar scheme and initial field of a scalar case.
pub fn scalar_setup(cfg: &CaseConfig, mesh: PolyMesh) -> Result<(Scheme<1, Advection>, SolutionField<1>)> {
    let (velocity, bounds, u0): (VelocityField, Option<Bounds>, fn(&Vec2) -> f64) = match cfg.case {
        CaseId::Zalesak | CaseId::ZalesakClassic => (
            VelocityField::Rotation { center: Vec2::zeros(), angular_speed: cases::ZALESAK_ANGULAR_SPEED },
            Some(Bounds::new(0.0, 1.0)),
            if cfg.case == CaseId::Zalesak { cases::zalesak_initial } else { cases::zalesak_classic_initial },
        ),
        CaseId::Smooth => {
            let (lo, hi) = cases::smooth_bump_bounds();
            (VelocityField::Uniform(Vec2::new(cfg.velocity.0, cfg.velocity.1)), Some(Bounds::new(lo, hi)), cases::smooth_bump)
        }
        other => return Err(Error::Config(format!("`{}` is not a scalar case", other.name()))),
    };
    let model = Advection::new(velocity);
    let field = SolutionField::from_fn(&mesh, &pampa_core::mesh::DofLayout::new(&mesh), |x| State::<1>::new(u0(x)));
    let domain = bounds.unwrap_or_else(|| model.domain(&field.states().copied().collect::<Vec<_>>()));
    let mut scheme = Scheme::new(mesh, model, domain, options(cfg))?;
    if matches!(cfg.case, CaseId::Zalesak | CaseId::ZalesakClassic) {
        scheme.default_boundary = BoundaryCondition::Dirichlet(State::<1>::zeros());
    }
    apply_boundaries(&mut scheme, cfg)?;
    Ok((scheme, field))
}

/// Euler scheme and initial field of a gas-dynamics case.
pub fn euler_setup(cfg: &CaseConfig, mesh: PolyMesh) -> Result<(Scheme<4, Euler>, SolutionField<4>)> {
    let model = Euler::new(cfg.gamma)?;
    let layout = pampa_core::mesh::DofLayout::new(&mesh);
    let field = match cfg.case {
        CaseId::Kt => SolutionField::from_fn(&mesh, &layout, |x| cases::kt_initial(&model, x)),
        CaseId::SmoothEuler => SolutionField::from_fn(&mesh, &layout, |x| cases::smooth_euler_initial(&model, cfg.velocity, x)),
        CaseId::Riemann => SolutionField::from_fn(&mesh, &layout, |x| cfg.riemann.initial(&model, x)),
        CaseId::Constant => SolutionField::constant(&layout, model.conserved(1.0, 0.0, 0.0, 1.0)),
        other => return Err(Error::Config(format!("`{}` is not a gas-dynamics case", other.name()))),
    };
    if let Some(i) = field.states().position(|u| !model.contains(&model.domain(&[]), u)) {
        return Err(Error::Config(format!("initial state {i} is not admissible")));
    }
    let domain = model.domain(&field.states().copied().collect::<Vec<_>>());
    let mut scheme = Scheme::new(mesh, model, domain, options(cfg))?;
    apply_boundaries(&mut scheme, cfg)?;
    Ok((scheme, field))
}

pub const SCALAR_NAMES: [&str; 1] = ["u"];
pub const EULER_NAMES: [&str; 4] = ["rho", "mx", "my", "E"];

/// Runs the case described by `cfg`; fields and the diagnostics CSV go to `cfg.out` if set.
pub fn run_case(cfg: &CaseConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let mesh = build_mesh(cfg)?;
    let stem = cfg.case.name();
    let control = |names: &'static [&'static str]| RunControl {
        t_final: cfg.t_final,
        controller: StepController { cfl: cfg.cfl, ..StepController::default() },
        max_steps: cfg.max_steps,
        output: cfg.out.as_deref().map(|dir| OutputControl { dir, stem, every: cfg.output_every, format: cfg.format, names }),
    };
    let (num_elements, num_points, initial_mass, diagnostics, mut files) = if cfg.case.is_scalar() {
        let (scheme, field) = scalar_setup(cfg, mesh)?;
        let mass = field.mass(scheme.mesh()).iter().copied().collect();
        let (_, diag, files) = simulate(&scheme, field, &control(&SCALAR_NAMES), None)?;
        (scheme.mesh().num_elements(), scheme.layout().num_points(), mass, diag, files)
    } else {
        let (scheme, field) = euler_setup(cfg, mesh)?;
        let mass = field.mass(scheme.mesh()).iter().copied().collect();
        let (_, diag, files) = simulate(&scheme, field, &control(&EULER_NAMES), Some(euler_internal_energy))?;
        (scheme.mesh().num_elements(), scheme.layout().num_points(), mass, diag, files)
    };
    if let Some(dir) = &cfg.out {
        let path = dir.join(format!("{stem}_diagnostics.csv"));
        let file = std::fs::File::create(&path).map_err(io_err(&path))?;
        diagnostics.write_csv(std::io::BufWriter::new(file))?;
        files.push(path);
    }
    Ok(RunSummary {
        case: cfg.case,
        num_elements,
        num_points,
        initial_mass,
        diagnostics,
        files,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, &str)]) -> CaseConfig {
        CaseConfig::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn constant_state_is_preserved() {
        for cells in ["quad", "tri"] {
            let c = cfg(&[("case", "constant"), ("grid", "5 4"), ("cells", cells), ("jitter", "0.2"), ("max_steps", "100"), ("tfinal", "100")]);
            let (scheme, field) = euler_setup(&c, build_mesh(&c).unwrap()).unwrap();
            let control = RunControl { t_final: c.t_final, controller: StepController::default(), max_steps: Some(100), output: None };
            let (end, diag, _) = simulate(&scheme, field.clone(), &control, Some(euler_internal_energy)).unwrap();
            assert_eq!(diag.steps.len(), 100);
            let drift = end.states().zip(field.states()).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
            assert!(drift < 1e-13, "{cells}: {drift:e}");
        }
    }

    #[test]
    fn short_zalesak_run_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let c = cfg(&[("case", "zalesak"), ("grid", "12 12"), ("tfinal", "0.05"), ("out", out), ("format", "csv"), ("output_every", "2")]);
        let summary = run_case(&c).unwrap();
        let d = &summary.diagnostics;
        assert!((d.final_time() - 0.05).abs() < 1e-15);
        assert!(d.steps.windows(2).all(|w| w[1].t > w[0].t));
        assert!(d.steps.iter().all(|s| s.min_u() >= -1e-13 && s.max_u() <= 1.0 + 1e-13));
        assert!(summary.files.iter().all(|f| f.exists()));
        assert!(summary.files.iter().any(|f| f.ends_with("zalesak_final.csv")));
        let text = std::fs::read_to_string(dir.path().join("zalesak_diagnostics.csv")).unwrap();
        assert!(text.starts_with("step,t,dt,min_rho,min_e,min_u,max_u,mass,min_theta,theta_activations\n"));
        assert_eq!(text.lines().count(), d.steps.len() + 1);
    }

    #[test]
    fn diagnostics_are_reproducible() {
        let c = cfg(&[("case", "riemann"), ("grid", "20 2"), ("tfinal", "0.02")]);
        let csv = || {
            let mut buf = Vec::new();
            run_case(&c).unwrap().diagnostics.write_csv(&mut buf).unwrap();
            buf
        };
        let a = csv();
        assert_eq!(a, csv());
        let text = String::from_utf8(a).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert!(row[3].parse::<f64>().unwrap() > 0.0 && row[4].parse::<f64>().unwrap() > 0.0);
    }

    #[test]
    fn periodic_mass_is_conserved() {
        let c = cfg(&[("case", "smooth-euler"), ("grid", "6 6"), ("cells", "tri"), ("max_steps", "20")]);
        let s = run_case(&c).unwrap();
        assert_eq!(s.diagnostics.steps.len(), 20);
        for comp in 0..4 {
            let drift = s.diagnostics.mass_drift(s.initial_mass[comp], comp);
            assert!(drift < 1e-13, "component {comp}: {drift:e}");
        }
    }

    #[test]
    fn boundary_data_must_match_the_model() {
        let c = cfg(&[("case", "kt"), ("grid", "4 4"), ("bc_1", "dirichlet 1 2")]);
        assert!(matches!(euler_setup(&c, build_mesh(&c).unwrap()), Err(Error::Config(_))));
        let c = cfg(&[("case", "kt"), ("grid", "4 4")]);
        assert!(scalar_setup(&c, build_mesh(&c).unwrap()).is_err());
        let c = cfg(&[("case", "zalesak"), ("grid", "4 4"), ("cells", "quad")]);
        let m = build_mesh(&c).unwrap();
        assert_eq!(m.num_elements(), 16);
    }
}
