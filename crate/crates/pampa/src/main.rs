use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pampa::config::{parse_pairs, CaseConfig};
use pampa::convergence::{write_table, Study};
use pampa::error::Error;
use pampa_core::mesh::CellKind;
use pampa_core::{Order, Vec2};

#[derive(Parser)]
#[command(name = "pampa", version, about = "Bound-preserving point/average solver on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case from a configuration file and/or flags (flags win).
    Run(RunArgs),
    /// Refinement study of smooth periodic advection; prints a CSV order table.
    Convergence(ConvergenceArgs),
    /// Write the mesh a configuration would use to a mesh file.
    Mesh {
        #[command(flatten)]
        args: RunArgs,
        /// Destination file.
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// Mesh file (replaces the generated grid).
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    #[arg(long, value_parser = ["quad", "tri"])]
    cells: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long, value_parser = ["on", "off"])]
    bp: Option<String>,
    #[arg(long, value_parser = ["low", "high", "blended"])]
    order: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["vtk", "csv"])]
    format: Option<String>,
    /// Any other configuration key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn config(&self) -> pampa::Result<CaseConfig> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?,
            None => String::new(),
        };
        let path = self.config.clone().unwrap_or_default();
        let mut pairs: Vec<(String, String)> = parse_pairs(&text, &path)?
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let path_str = |p: &PathBuf| p.to_string_lossy().into_owned();
        let flags = [
            ("case", self.case.clone()),
            ("mesh", self.mesh.as_ref().map(path_str)),
            ("grid", self.grid.as_ref().map(|g| format!("{} {}", g[0], g[1]))),
            ("cells", self.cells.clone()),
            ("cfl", self.cfl.map(|v| v.to_string())),
            ("tfinal", self.tfinal.map(|v| v.to_string())),
            ("bp", self.bp.clone()),
            ("order", self.order.clone()),
            ("out", self.out.as_ref().map(path_str)),
            ("format", self.format.clone()),
        ];
        pairs.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        CaseConfig::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Cells {
    Quad,
    Tri,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyOrder {
    Low,
    High,
    Blended,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(long, value_enum, default_value = "tri")]
    cells: Cells,
    /// Cells per direction of each mesh.
    #[arg(long, value_delimiter = ',', default_values_t = [16, 32, 64, 128])]
    sizes: Vec<usize>,
    #[arg(long, value_enum, default_value = "blended")]
    order: StudyOrder,
    #[arg(long, default_value_t = 0.4)]
    cfl: f64,
    #[arg(long, default_value_t = 1.0)]
    tfinal: f64,
    #[arg(long, num_args = 2, value_names = ["AX", "AY"], default_values_t = [1.0, 0.5])]
    velocity: Vec<f64>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> pampa::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            eprintln!("running {} to t = {} (cfl {}, {:?})", cfg.case.name(), cfg.t_final, cfg.cfl, cfg.order);
            let s = pampa::run_case(&cfg)?;
            let d = &s.diagnostics;
            let min_u = d.steps.iter().map(|r| r.min_u()).fold(f64::INFINITY, f64::min);
            let max_u = d.steps.iter().map(|r| r.max_u()).fold(f64::NEG_INFINITY, f64::max);
            println!("case          {}", s.case.name());
            println!("mesh          {} elements, {} point DOFs", s.num_elements, s.num_points);
            println!("steps         {} (t = {})", d.steps.len(), d.final_time());
            println!("{:<14}[{min_u:e}, {max_u:e}]", if s.case.is_scalar() { "u range" } else { "rho range" });
            if let Some(e) = d.steps.iter().filter_map(|r| r.min_internal_energy).reduce(f64::min) {
                println!("min rho e     {e:e}");
            }
            println!("mass drift    {:e}", d.mass_drift(s.initial_mass[0], 0));
            println!("theta < 1     {} (min {})", d.steps.iter().map(|r| r.activations).sum::<usize>(), d.steps.iter().map(|r| r.min_theta).fold(1.0, f64::min));
            println!("wall time     {:.2?}", s.elapsed);
            for f in &s.files {
                println!("wrote         {}", f.display());
            }
            Ok(())
        }
        Command::Convergence(a) => {
            let study = Study {
                cells: match a.cells {
                    Cells::Quad => CellKind::Quad,
                    Cells::Tri => CellKind::Tri,
                },
                order: match a.order {
                    StudyOrder::Low => Order::Low,
                    StudyOrder::High => Order::High,
                    StudyOrder::Blended => Order::Blended,
                },
                cfl: a.cfl,
                t_final: a.tfinal,
                velocity: Vec2::new(a.velocity[0], a.velocity[1]),
                ..Study::default()
            };
            let rows = study.run(&a.sizes)?;
            match &a.out {
                Some(path) => {
                    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
                    write_table(&rows, file)
                }
                None => write_table(&rows, std::io::stdout().lock()),
            }
        }
        Command::Mesh { args, output } => {
            let cfg = args.config()?;
            let mesh = pampa::run::build_mesh(&cfg)?;
            pampa::mesh_io::write_mesh(&mesh, &output)?;
            eprintln!("{}: {} elements", output.display(), mesh.num_elements());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
