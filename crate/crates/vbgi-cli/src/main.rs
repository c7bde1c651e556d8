//! `vbgi` command line: ray-cast analytic scenes into G-buffer PFMs, shade
//! them with the bitmask pass or one of the baselines, compare outputs
//! (optionally against a brute-force world-space reference), and report
//! relative wall-time scaling.

mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vbgi::slicemath::StepMode;

/// Exit with 1 for runtime failures (I/O, missing or broken files) and 2 for
/// usage and configuration errors, matching clap's own usage exits.
pub struct CliError {
    code: u8,
    message: String,
}

pub fn runtime(message: impl Into<String>) -> CliError {
    CliError { code: 1, message: message.into() }
}

pub fn usage(message: impl Into<String>) -> CliError {
    CliError { code: 2, message: message.into() }
}

#[derive(Parser)]
#[command(name = "vbgi", version, about = "Screen-space AO, GI and ambient renderer on CPU")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ray-cast a builtin scene into depth/normal/light/albedo PFMs.
    Synth(SynthArgs),
    /// Shade a synthesized G-buffer and write AO/GI/ambient images.
    Render(RenderArgs),
    /// Print error metrics between two render directories, or between a
    /// render and a brute-force reference.
    Compare(CompareArgs),
    /// Time the bitmask pass over a radius/step-count grid.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
pub struct SynthArgs {
    /// Builtin scene name: flat, poles, fence, corner, sphere_on_plane or
    /// thin_wall.
    #[arg(long)]
    pub scene: String,
    #[arg(long, default_value_t = 256)]
    pub width: u32,
    #[arg(long, default_value_t = 256)]
    pub height: u32,
    /// Recorded in the manifest as the default render seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Wall thickness in world units; thin_wall scene only.
    #[arg(long)]
    pub wall_thickness: Option<f32>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(clap::Args)]
pub struct RenderArgs {
    /// Directory written by synth.
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Bitmask)]
    pub method: Method,
    /// Which images to write; `all` means everything the method produces.
    #[arg(long, value_enum, default_value_t = Mode::All)]
    pub mode: Mode,
    /// Sampling radius in world units.
    #[arg(long, default_value_t = 2.0)]
    pub radius: f32,
    /// Marching steps per horizon side.
    #[arg(long, default_value_t = 16)]
    pub samples: u32,
    /// Hemisphere slices per pixel per frame.
    #[arg(long, default_value_t = 1)]
    pub slices: u32,
    /// Sectors per slice; one of 8, 16, 32, 64, 128.
    #[arg(long, default_value_t = 32)]
    pub sectors: u32,
    /// Assumed occluder thickness in world units.
    #[arg(long, default_value_t = 0.2)]
    pub thickness: f32,
    /// Slope of the distance-growing thickness term.
    #[arg(long, default_value_t = 0.0)]
    pub thickness_linear: f32,
    #[arg(long, value_enum, default_value_t = Steps::Const)]
    pub steps: Steps,
    /// Defaults to the seed recorded in the manifest.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Frames to accumulate.
    #[arg(long, default_value_t = 1)]
    pub frames: u32,
    /// Ambient environment, e.g. constant:1,1,1 or horizontal:1,.5,.2,.2,.4,1;
    /// defaults to the one recorded in the manifest.
    #[arg(long)]
    pub env: Option<String>,
    /// Rays per pixel for the ssr method.
    #[arg(long, default_value_t = 2)]
    pub ssr_rays: u32,
    /// Worker threads; 0 uses all cores. Output does not depend on this.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Reserved for half-resolution shading; only "off" is accepted.
    #[arg(long, default_value = "off")]
    pub half_res: String,
}

#[derive(clap::Args)]
pub struct CompareArgs {
    /// First render directory.
    pub a: PathBuf,
    /// Second render directory; omit when using --reference.
    pub b: Option<PathBuf>,
    /// Compare a's ao.pfm against a ray-cast world-space reference built
    /// from its manifest.
    #[arg(long)]
    pub reference: bool,
    /// Hemisphere rays per pixel for the reference.
    #[arg(long, default_value_t = 256)]
    pub rays: u32,
    /// Occlusion radius for the reference, world units.
    #[arg(long, default_value_t = 2.0)]
    pub radius: f32,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Also write per-pixel |a-b| PFMs into this directory.
    #[arg(long, value_name = "DIR")]
    pub diff: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "poles")]
    pub scene: String,
    /// Square image edge length.
    #[arg(long, default_value_t = 256)]
    pub size: u32,
    /// Timing repetitions per row; the minimum is reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: u32,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bitmask,
    Gtao,
    GtaoFalloff,
    Bent,
    Ssr,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bitmask => "bitmask",
            Method::Gtao => "gtao",
            Method::GtaoFalloff => "gtao-falloff",
            Method::Bent => "bent",
            Method::Ssr => "ssr",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Ao,
    Gi,
    Ambient,
    All,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ao => "ao",
            Mode::Gi => "gi",
            Mode::Ambient => "ambient",
            Mode::All => "all",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Steps {
    Const,
    Exp,
}

impl From<Steps> for StepMode {
    fn from(s: Steps) -> StepMode {
        match s {
            Steps::Const => StepMode::Constant,
            Steps::Exp => StepMode::Exponential,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => commands::cmd_synth(args),
        Command::Render(args) => commands::cmd_render(args),
        Command::Compare(args) => commands::cmd_compare(args),
        Command::Bench(args) => commands::cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
