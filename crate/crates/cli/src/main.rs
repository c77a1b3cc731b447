use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use roadgen::defaults::Defaults;
use roadgen::odr::{emit, validate, validate_builtin, EmitOptions, OdrVersion};
use roadgen::pipeline::generate;
use roadgen::stats::SizeReport;

/// Generates OpenDRIVE road networks from compact road network descriptions.
#[derive(Debug, Parser)]
#[command(name = "roadgen", version)]
struct Args {
    /// Road network description (XML).
    #[arg(long, short)]
    input: PathBuf,
    /// OpenDRIVE file to write; defaults to the input path with `.xodr`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "1.4", value_parser = ["1.4", "1.5"])]
    odr_version: String,
    /// Validate the output, against the given XSD or the shipped schema.
    #[arg(long, num_args = 0..=1, value_name = "XSD")]
    validate: Option<Option<PathBuf>>,
    /// Print line and character counts of input and output.
    #[arg(long)]
    stats: bool,
    /// Replace an input attribute before parsing, e.g. `J2.main.arc.radius=150`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
    /// Also write a top-view SVG drawing.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// TOML file overriding built-in defaults.
    #[arg(long, value_name = "PATH")]
    defaults: Option<PathBuf>,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    if k.is_empty() {
        return Err("empty key".into());
    }
    Ok((k.to_owned(), v.to_owned()))
}

struct Failure {
    stage: &'static str,
    code: u8,
    message: String,
}

fn fail(stage: &'static str, code: u8, message: impl Into<String>) -> Failure {
    Failure { stage, code, message: message.into() }
}

fn read(path: &Path, stage: &'static str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(stage, 1, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail("output", 1, format!("cannot write {}: {e}", path.display())))
}

fn run(args: Args) -> Result<(), Failure> {
    let input = read(&args.input, "input")?;
    let defaults = match &args.defaults {
        Some(p) => Defaults::with_overrides(&read(p, "defaults")?).map_err(|e| fail("defaults", 1, e.to_string()))?,
        None => Defaults::default(),
    };
    let version: OdrVersion = args.odr_version.parse().map_err(|e: String| fail("input", 1, e))?;
    let generated = generate(&input, &args.overrides, &defaults)
        .map_err(|e| fail(e.stage(), e.exit_code() as u8, e.detail()))?;
    for w in &generated.assembly.warnings {
        eprintln!("warning: assemble: {w}");
    }
    let xml = emit(&generated.assembly.network, &EmitOptions::new(version));
    let output = args.output.clone().unwrap_or_else(|| args.input.with_extension("xodr"));
    write(&output, &xml)?;
    if let Some(path) = &args.svg {
        write(path, &roadgen::svg::render(&generated.assembly.network))?;
    }
    if args.stats {
        println!("{}", SizeReport::new(&input, &xml));
    }
    if let Some(xsd) = &args.validate {
        let diagnostics = match xsd {
            Some(p) => validate(&xml, p).map_err(|e| fail("validate", 3, e.to_string()))?,
            None => validate_builtin(&xml, version),
        };
        if !diagnostics.is_empty() {
            for d in &diagnostics {
                eprintln!("error: validate: {}: {d}", output.display());
            }
            return Err(fail("validate", 3, format!("{} schema violation(s)", diagnostics.len())));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in f.message.lines() {
                eprintln!("error: {}: {line}", f.stage);
            }
            ExitCode::from(f.code)
        }
    }
}
