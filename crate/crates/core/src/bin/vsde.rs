use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vsde::dibr::{mse, synthesize};
use vsde::harness::{
    compress_views, estimate_frame, generate_scene, render_validation_csv, validate_run, CaseManifest,
    EstimatorParams, NoiseSpec, SceneSpec, StereoFrames,
};
use vsde::media_io::{read_camera_config, read_raw_frame_at, write_report, PlaneLayout, ReportFormat};
use vsde::{LumaFrame, Result, VsdeError};

#[derive(Parser)]
#[command(
    name = "vsde",
    version,
    about = "Render-free view synthesis distortion estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the virtual-view distortion caused by coding the references.
    Estimate(EstimateArgs),
    /// Render a virtual view with the reference synthesizer.
    Synthesize(SynthesizeArgs),
    /// Run a validation manifest and write per-case results plus a summary row.
    Validate(ValidateArgs),
    /// Generate a synthetic stereo scene as raw 8-bit planes.
    GenScene(GenSceneArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum Layout {
    Luma,
    Yuv420,
}

impl From<Layout> for PlaneLayout {
    fn from(l: Layout) -> Self {
        match l {
            Layout::Luma => PlaneLayout::Luma,
            Layout::Yuv420 => PlaneLayout::Yuv420,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    /// Frame number inside multi-frame files.
    #[arg(long, default_value_t = 0)]
    frame_index: usize,
    #[arg(long, value_enum, default_value_t = Layout::Luma)]
    layout: Layout,
}

impl FrameArgs {
    fn read(&self, path: &Path) -> Result<LumaFrame> {
        read_raw_frame_at(
            path,
            self.width,
            self.height,
            self.frame_index,
            self.layout.into(),
        )
    }
}

#[derive(Args)]
struct StereoPaths {
    #[arg(long)]
    texture_left: PathBuf,
    #[arg(long)]
    depth_left: PathBuf,
    #[arg(long)]
    texture_right: PathBuf,
    #[arg(long)]
    depth_right: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    original: StereoPaths,
    #[arg(long)]
    recon_texture_left: PathBuf,
    #[arg(long)]
    recon_depth_left: PathBuf,
    #[arg(long)]
    recon_texture_right: PathBuf,
    #[arg(long)]
    recon_depth_right: PathBuf,
    #[command(flatten)]
    frame: FrameArgs,
    #[arg(long)]
    camera: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also render both versions and record the actual MSE in the report.
    #[arg(long)]
    oracle: bool,
    /// Turn off the large-baseline compensation of the low-slope estimate.
    #[arg(long)]
    no_compensation: bool,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    views: StereoPaths,
    #[command(flatten)]
    frame: FrameArgs,
    #[arg(long)]
    camera: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Region label plane: 0 overlap, 85 left only, 170 right only, 255 none.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    cases: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    no_compensation: bool,
}

#[derive(Args)]
struct GenSceneArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    camera: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Optional noise specification; coded views are written with a `_hat` suffix.
    #[arg(long)]
    noise: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| VsdeError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| VsdeError::Manifest(format!("{}: {e}", path.display())))
}

fn read_stereo(paths: &StereoPaths, frame: &FrameArgs) -> Result<StereoFrames> {
    Ok(StereoFrames {
        tl: frame.read(&paths.texture_left)?,
        dl: frame.read(&paths.depth_left)?,
        tr: frame.read(&paths.texture_right)?,
        dr: frame.read(&paths.depth_right)?,
    })
}

fn params(no_compensation: bool) -> EstimatorParams<f64> {
    if no_compensation {
        EstimatorParams::without_compensation()
    } else {
        EstimatorParams::default()
    }
}

fn run_estimate(args: &EstimateArgs) -> Result<()> {
    let cam = read_camera_config(&args.camera)?;
    let original = read_stereo(&args.original, &args.frame)?;
    let coded = StereoFrames {
        tl: args.frame.read(&args.recon_texture_left)?,
        dl: args.frame.read(&args.recon_depth_left)?,
        tr: args.frame.read(&args.recon_texture_right)?,
        dr: args.frame.read(&args.recon_depth_right)?,
    };
    let mut report = estimate_frame(&original, &coded, &cam, &params(args.no_compensation))?;
    if args.oracle {
        let reference = synthesize(&original.tl, &original.dl, &original.tr, &original.dr, &cam)?;
        let rendered = synthesize(&coded.tl, &coded.dl, &coded.tr, &coded.dr, &cam)?;
        report.oracle_mse = Some(mse(&reference.view, &rendered.view)?);
    }
    let format = match args.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    write_report(&[report], &args.out, format)
}

fn run_synthesize(args: &SynthesizeArgs) -> Result<()> {
    let cam = read_camera_config(&args.camera)?;
    let v = read_stereo(&args.views, &args.frame)?;
    let out = synthesize(&v.tl, &v.dl, &v.tr, &v.dr, &cam)?;
    out.view.write_raw(&args.out)?;
    if let Some(path) = &args.labels_out {
        out.labels.to_plane().write_raw(path)?;
    }
    Ok(())
}

fn run_validate(args: &ValidateArgs) -> Result<()> {
    let manifest = CaseManifest::read(&args.cases)?;
    let run = validate_run(&manifest.cases, &params(args.no_compensation))?;
    let csv = render_validation_csv(&run);
    std::fs::write(&args.out, csv).map_err(|e| VsdeError::Io {
        path: args.out.clone(),
        source: e,
    })
}

fn run_gen_scene(args: &GenSceneArgs) -> Result<()> {
    let spec: SceneSpec = read_json(&args.scene)?;
    let cam = read_camera_config(&args.camera)?;
    let frames = generate_scene(&spec, &cam)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| VsdeError::Io {
        path: args.out_dir.clone(),
        source: e,
    })?;
    let write_set = |set: &StereoFrames, suffix: &str| -> Result<()> {
        for (name, frame) in [("tl", &set.tl), ("dl", &set.dl), ("tr", &set.tr), ("dr", &set.dr)] {
            frame.write_raw(args.out_dir.join(format!("{name}{suffix}.raw")))?;
        }
        Ok(())
    };
    write_set(&frames, "")?;
    if let Some(path) = &args.noise {
        let noise: NoiseSpec = read_json(path)?;
        write_set(&compress_views(&frames, &noise)?, "_hat")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Estimate(a) => run_estimate(a),
        Command::Synthesize(a) => run_synthesize(a),
        Command::Validate(a) => run_validate(a),
        Command::GenScene(a) => run_gen_scene(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vsde: {e}");
            ExitCode::FAILURE
        }
    }
}
