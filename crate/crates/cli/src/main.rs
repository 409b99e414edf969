use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use holonomy::checks::run_all;
use holonomy::commands::{run_adiabatic, run_gate, run_measure, run_resilience, usage, UsageError};
use holonomy::config::{Config, Source};
use holonomy::output::write_json;
use holonomy_core::adiabatic::Ramp;
use holonomy_core::holonomy::Plane;

#[derive(Parser, Debug)]
#[command(name = "holonomy", version, about = "Holonomic gates in a trapped-ion model: checks and experiments")]
struct Cli {
    /// JSON config; defaults to $HOLONOMY_CONFIG_DIR/holonomy.json when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print the effective config and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the invariant suite and write the conventions ledger.
    Verify {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute a logical gate from a loop or a (plane, area) target.
    Gate {
        #[arg(long, value_parser = parse_plane)]
        plane: Option<Plane>,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long = "loop")]
        loop_file: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        /// Report the published closed form as the gate.
        #[arg(long)]
        closed_form: bool,
        #[arg(long, value_enum)]
        source: Option<SourceArg>,
    },
    /// Adiabatic scaling study.
    Adiabatic {
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        ramp: Option<RampArg>,
        #[arg(long = "loop")]
        loop_file: Option<PathBuf>,
        /// Constant loop at the origin.
        #[arg(long = "static")]
        static_loop: bool,
        #[arg(long)]
        n_max: Option<usize>,
        /// Print suggested gnuplot commands.
        #[arg(long)]
        gnuplot_hints: bool,
    },
    /// Border-error sensitivity surface and Monte Carlo gate errors.
    Resilience {
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        sigma1: Option<f64>,
        #[arg(long)]
        sigma2: Option<f64>,
        /// Full transport per trial.
        #[arg(long)]
        slow: bool,
        #[arg(long)]
        gnuplot_hints: bool,
    },
    /// Apply the readout pulse to a logical state.
    Measure {
        /// logical0, logical1 or superposition(a, b).
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        n_max: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SourceArg {
    Analytic,
    Numeric,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RampArg {
    Smooth,
    Uniform,
}

fn parse_plane(s: &str) -> Result<Plane, String> {
    Plane::parse(s).ok_or_else(|| format!("unknown plane {s:?}; expected C_I, C_II, C_III, C_IV or free"))
}

/// Folds command-line overrides into `cfg`.
fn apply(cfg: &mut Config, cli: &Cli) {
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    match &cli.command {
        Some(Command::Verify { points, seed }) => {
            if let Some(p) = points {
                cfg.verify.points = *p;
            }
            if let Some(s) = seed {
                cfg.verify.seed = *s;
            }
        }
        Some(Command::Gate { plane, sigma, loop_file, steps, closed_form, source }) => {
            let g = &mut cfg.gate;
            if plane.is_some() || sigma.is_some() || loop_file.is_some() {
                g.plane = *plane;
                g.sigma = *sigma;
                g.loop_file = loop_file.clone();
                g.rectangle = None;
            }
            if let Some(s) = steps {
                g.steps = *s;
            }
            g.closed_form |= *closed_form;
            if let Some(s) = source {
                g.source = match s {
                    SourceArg::Analytic => Source::Analytic,
                    SourceArg::Numeric => Source::Numeric,
                };
            }
        }
        Some(Command::Adiabatic { times, ramp, loop_file, static_loop, n_max, .. }) => {
            let a = &mut cfg.adiabatic;
            if let Some(t) = times {
                a.times = t.clone();
            }
            if let Some(r) = ramp {
                a.ramp = match r {
                    RampArg::Smooth => Ramp::Smooth,
                    RampArg::Uniform => Ramp::Uniform,
                };
            }
            if loop_file.is_some() {
                a.loop_file = loop_file.clone();
            }
            a.static_loop |= *static_loop;
            if let Some(n) = n_max {
                a.n_max = *n;
            }
        }
        Some(Command::Resilience { x, r1, edges, trials, seed, sigma1, sigma2, slow, .. }) => {
            let r = &mut cfg.resilience;
            macro_rules! set {
                ($($f:ident),*) => { $(if let Some(v) = $f { r.$f = v.clone(); })* };
            }
            set!(x, r1, edges, trials, seed, sigma1, sigma2);
            r.slow |= *slow;
        }
        Some(Command::Measure { state, n_max }) => {
            if let Some(s) = state {
                cfg.measure.state = s.clone();
            }
            if let Some(n) = n_max {
                cfg.measure.n_max = *n;
            }
        }
        None => {}
    }
}

fn print<T: serde::Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> anyhow::Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn adiabatic_hints(csv: &std::path::Path) -> String {
    format!(
        "set datafile separator ','\nset logscale xy\nset xlabel 'T [1/nu]'\nset ylabel 'distance'\n\
         plot '{}' using 1:6 skip 2 with linespoints title 'distance to transport'\n",
        csv.display()
    )
}

fn resilience_hints(surface: &std::path::Path, mc: &std::path::Path) -> String {
    format!(
        "set datafile separator ','\nset xlabel 'eps1'\nset ylabel 'eps2'\nset zlabel 'delta sigma'\n\
         splot '{}' using 1:2:3 skip 2 with points title 'sensitivity'\n\
         set logscale y\nplot '{}' using 1:3:4 skip 1 with yerrorbars title 'mean gate error'\n",
        surface.display(),
        mc.display()
    )
}

/// `Ok(true)` when every check passes.
fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut cfg = Config::load(cli.config.as_deref()).map_err(usage)?;
    apply(&mut cfg, cli);
    cfg.validate().map_err(usage)?;
    if cli.print_config {
        println!("{}", cfg.to_json());
        return Ok(true);
    }
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    let Some(command) = &cli.command else {
        return Err(usage(anyhow::anyhow!("no command given; see --help")));
    };
    match command {
        Command::Verify { .. } => {
            let (report, ledger) = run_all(&cfg.verify, cfg.nu);
            write_json(&cfg.output_path(&cfg.verify.ledger_file), &ledger)?;
            write_json(&cfg.output_path(&cfg.verify.report_file), &report)?;
            print(cli.json, &report, || {
                let mut s = format!("# units: {}\n", report.units);
                for c in &report.checks {
                    let status = if c.passed() { "pass" } else { "FAIL" };
                    s += &format!("{}: {status} (value {:.3e}, tolerance {:.1e})", c.name, c.value, c.tolerance);
                    if !c.detail.is_empty() {
                        s += &format!(" [{}]", c.detail);
                    }
                    s.push('\n');
                }
                for cal in &report.calibrations {
                    s += &format!(
                        "calibration {}: G = {}, kappa = {:.12} (published {}, kappa 1)\n",
                        cal.plane, cal.generator_label, cal.kappa, cal.published_generator
                    );
                }
                s += &format!("ledger: {}\n", cfg.output_path(&cfg.verify.ledger_file).display());
                if let Some(f) = &report.first_failure {
                    s += &format!("first failing formula: {f}\n");
                }
                s
            })?;
            if let Some(f) = &report.first_failure {
                eprintln!("verify failed at {f}");
            }
            Ok(report.passed)
        }
        Command::Gate { .. } => {
            let out = run_gate(&cfg.gate)?;
            print(cli.json, &out, || out.text())?;
            Ok(true)
        }
        Command::Adiabatic { gnuplot_hints, .. } => {
            let out = run_adiabatic(&cfg)?;
            print(cli.json, &out, || out.text())?;
            if *gnuplot_hints {
                print!("{}", adiabatic_hints(&out.csv));
            }
            Ok(out.passed)
        }
        Command::Resilience { gnuplot_hints, .. } => {
            let out = run_resilience(&cfg)?;
            print(cli.json, &out, || out.text())?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            if *gnuplot_hints {
                print!("{}", resilience_hints(&out.surface_csv, &out.monte_carlo_csv));
            }
            Ok(true)
        }
        Command::Measure { .. } => {
            let out = run_measure(&cfg.measure.state, cfg.measure.n_max)?;
            print(cli.json, &out, || out.text())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
