use clap::{Args, Parser, Subcommand};
use curlflux_cli::config::Numerics;
use curlflux_cli::{run, CliError, CommandKind, Format, RunConfig};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "curlflux", version, about = "Traces, Stokes functionals and vortex sheets for curl-measure fields")]
struct Cli {
    /// JSON file whose keys override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct NumericArgs {
    /// Quadrature order per patch.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    ramp_order: Option<usize>,
    #[arg(long)]
    layer_nodes: Option<usize>,
    /// Comma-separated localizer widths.
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    osc_tol: Option<f64>,
    #[arg(long)]
    t_points: Option<usize>,
}

impl NumericArgs {
    fn apply(self, n: &mut Numerics) {
        n.order = self.order.unwrap_or(n.order);
        n.ramp_order = self.ramp_order.unwrap_or(n.ramp_order);
        n.layer_nodes = self.layer_nodes.unwrap_or(n.layer_nodes);
        if !self.deltas.is_empty() {
            n.deltas = self.deltas;
        }
        n.tol = self.tol.unwrap_or(n.tol);
        n.osc_tol = self.osc_tol.unwrap_or(n.osc_tol);
        n.t_points = self.t_points.unwrap_or(n.t_points);
    }
}

#[derive(Subcommand)]
enum Command {
    /// Layerwise tangential trace F × ν on the boundary of a region.
    Trace {
        #[arg(long)]
        field: Option<String>,
        /// ball:r=.., half_ball:r=.. or cylinder:r=..,h=..,z=..
        #[arg(long)]
        region: Option<String>,
        #[arg(long)]
        side: Option<String>,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Vorticity flux through a flat surface.
    Stokes {
        #[arg(long)]
        field: Option<String>,
        /// disk:r=..,z=.. or annulus:r0=..,r1=..,z=..
        #[arg(long)]
        surface: Option<String>,
        /// tangential, transversal or mass.
        #[arg(long)]
        route: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Maximal function of the curl measure over collar parameters.
    Maximal {
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        surface: Option<String>,
        /// transversal or tangential.
        #[arg(long)]
        direction: Option<String>,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Desingularized Birkhoff–Rott evolution of a periodic sheet.
    Br {
        /// Marker grid NxM.
        #[arg(long)]
        grid: Option<String>,
        /// uniform, shear or a constant vector a,b,c.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[arg(long)]
        delta_br: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dump_every: Option<usize>,
    },
    /// Residuals of the smooth boundary identities.
    Validate {
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        region: Option<String>,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Worked examples: annuli, line_vortex, newtonian.
    Example {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        field: Option<String>,
        #[arg(long)]
        surface: Option<String>,
        #[command(flatten)]
        numerics: NumericArgs,
    },
    /// Computed against closed-form values with pass/fail per check.
    Reproduce { name: String },
}

type Fill = Box<dyn FnOnce(&mut RunConfig)>;

fn to_config(cli: Cli) -> Result<RunConfig, CliError> {
    let (kind, fill): (CommandKind, Fill) = match cli.command {
        Command::Trace { field, region, side, numerics } => (
            CommandKind::Trace,
            Box::new(move |c| {
                c.field = field;
                c.region = region;
                c.side = side;
                numerics.apply(&mut c.numerics);
            }),
        ),
        Command::Stokes { field, surface, route, t, numerics } => (
            CommandKind::Stokes,
            Box::new(move |c| {
                c.field = field;
                c.surface = surface;
                c.route = route;
                c.t = t;
                numerics.apply(&mut c.numerics);
            }),
        ),
        Command::Maximal { field, surface, direction, numerics } => (
            CommandKind::Maximal,
            Box::new(move |c| {
                c.field = field;
                c.surface = surface;
                c.direction = direction;
                numerics.apply(&mut c.numerics);
            }),
        ),
        Command::Br { grid, gamma, amplitude, delta_br, dt, steps, dump_every } => (
            CommandKind::Br,
            Box::new(move |c| {
                let b = &mut c.br;
                b.grid = grid.unwrap_or(b.grid.clone());
                b.gamma = gamma.unwrap_or(b.gamma.clone());
                b.amplitude = amplitude.unwrap_or(b.amplitude);
                b.delta_br = delta_br.or(b.delta_br);
                b.dt = dt.unwrap_or(b.dt);
                b.steps = steps.unwrap_or(b.steps);
                b.dump_every = dump_every.unwrap_or(b.dump_every);
            }),
        ),
        Command::Validate { field, region, numerics } => (
            CommandKind::Validate,
            Box::new(move |c| {
                c.field = field;
                c.region = region;
                numerics.apply(&mut c.numerics);
            }),
        ),
        Command::Example { name, t, field, surface, numerics } => (
            CommandKind::Example,
            Box::new(move |c| {
                c.name = name;
                c.t = t;
                c.field = field;
                c.surface = surface;
                numerics.apply(&mut c.numerics);
            }),
        ),
        Command::Reproduce { name } => (CommandKind::Reproduce, Box::new(move |c| c.name = Some(name))),
    };
    let mut cfg = RunConfig::new(kind);
    fill(&mut cfg);
    cfg.output = cli.output;
    cfg.format = cli.format.unwrap_or_default();
    match &cli.config {
        Some(path) => cfg.overlay_file(path),
        None => Ok(cfg),
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let cfg = to_config(cli)?;
    let out = run(&cfg)?;
    let text = match cfg.format {
        Format::Csv => out.table.to_csv().map_err(|e| CliError::Io(e.into()))?,
        Format::Json => out.table.to_json().map_err(|e| CliError::Io(e.into()))? + "\n",
    };
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => match std::io::stdout().write_all(text.as_bytes()) {
            // A closed reader (e.g. `| head`) is not an error.
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CURLFLUX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // The pool can only be configured once per process; a failure leaves the default.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let record = serde_json::to_string(&e.record()).unwrap_or_else(|_| e.to_string());
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
