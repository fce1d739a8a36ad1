use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rspin::cli_io::{
    cmd_boundaries, cmd_detach, cmd_enumerate, cmd_export_dot, cmd_glue, cmd_pi, cmd_smooth,
    cmd_validate, parse_twists, CommandError, CommandOutput, ReportSections,
};

/// Graded r-spin disk graphs: validation, surgery, point insertion and gluing.
#[derive(Parser)]
#[command(name = "rspin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Graph document; `-` or nothing reads standard input.
    file: Option<PathBuf>,
}

#[derive(Args)]
struct Moduli {
    #[arg(long)]
    r: u32,
    #[arg(long)]
    h: u32,
    /// Boundary twists, comma separated.
    #[arg(long = "B", allow_hyphen_values = true, default_value = "")]
    boundary: String,
    /// Internal twists, comma separated.
    #[arg(long = "I", allow_hyphen_values = true, default_value = "")]
    internal: String,
}

#[derive(Args)]
struct Sections {
    #[arg(long)]
    euler: bool,
    #[arg(long)]
    components: bool,
    #[arg(long)]
    signs: bool,
    #[arg(long)]
    free_boundaries: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a document against its structural and spin conditions.
    Validate(Input),
    /// Smooth an edge or cb tail, given as `h` or `c:h`.
    Smooth {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        site: String,
    },
    /// Detach an edge or cb tail, given as `h`.
    Detach {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        site: String,
    },
    /// List codimension-1 boundary strata.
    Boundaries {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        classify: bool,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        h: Option<u32>,
    },
    /// Point insertion at a BI facet or its inverse at an AI facet.
    Pi {
        #[command(flatten)]
        input: Input,
        #[arg(
            long,
            conflicts_with = "backward",
            required_unless_present = "backward"
        )]
        forward: bool,
        #[arg(long)]
        backward: bool,
        /// Index into the `boundaries --classify` listing.
        #[arg(long)]
        facet: usize,
        #[arg(long)]
        h: Option<u32>,
    },
    /// Enumerate smooth (r,h)-graphs up to isomorphism.
    Enumerate(Moduli),
    /// Build the glued complex and print its full topology report.
    Glue(Moduli),
    /// Build the glued complex and print selected report sections.
    Report {
        #[command(flatten)]
        moduli: Moduli,
        #[command(flatten)]
        sections: Sections,
    },
    /// Print a DOT graph description.
    ExportDot(Input),
}

fn read_input(input: &Input) -> Result<String, CommandError> {
    match &input.file {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| CommandError::Usage(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CommandError::Usage(format!("cannot read standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn twists(m: &Moduli) -> Result<(Vec<i32>, Vec<i32>), CommandError> {
    Ok((parse_twists(&m.boundary)?, parse_twists(&m.internal)?))
}

fn run(cli: Cli) -> Result<CommandOutput, CommandError> {
    match cli.command {
        Command::Validate(input) => cmd_validate(&read_input(&input)?),
        Command::Smooth { input, site } => cmd_smooth(&read_input(&input)?, &site),
        Command::Detach { input, site } => cmd_detach(&read_input(&input)?, &site),
        Command::Boundaries {
            input,
            classify,
            r,
            h,
        } => cmd_boundaries(&read_input(&input)?, classify, r, h),
        Command::Pi {
            input,
            forward,
            backward: _,
            facet,
            h,
        } => cmd_pi(&read_input(&input)?, forward, facet, h),
        Command::Enumerate(m) => {
            let (b, i) = twists(&m)?;
            cmd_enumerate(m.r, m.h, &b, &i)
        }
        Command::Glue(m) => {
            let (b, i) = twists(&m)?;
            cmd_glue(m.r, m.h, &b, &i, ReportSections::default())
        }
        Command::Report {
            moduli: m,
            sections: s,
        } => {
            let (b, i) = twists(&m)?;
            let sections = ReportSections {
                euler: s.euler,
                components: s.components,
                signs: s.signs,
                free_boundaries: s.free_boundaries,
            };
            cmd_glue(m.r, m.h, &b, &i, sections)
        }
        Command::ExportDot(input) => cmd_export_dot(&read_input(&input)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
