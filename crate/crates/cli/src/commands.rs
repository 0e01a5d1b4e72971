use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use eigeniter::assembly::BoundaryProfile;
use eigeniter::baselines::{mixed_annulus_lambda, robin_disk_lambda, robin_square_lambda};
use eigeniter::iteration::{run, InitialVector, IterationConfig, ProblemKind, ProblemSpec};
use eigeniter::linalg::{dense_smallest_eigpair, SolverConfig};
use eigeniter::mesh::{
    generate_annulus, generate_disk, generate_unit_square, read_mesh, write_mesh, BoundaryTag, Mesh,
};

use crate::manifest::{absolute, BoundaryRecord, MeshRecord, RunManifest, RunResult};
use crate::{
    BaselineArgs, Case, Init, MeshArgs, MeshSource, OracleArgs, Problem, ProfileSource, Shape,
    SolveArgs,
};

pub enum CliError {
    /// Bad arguments or inputs.
    Usage(String),
    Core(eigeniter::Error),
    Io(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_solver_failure() => 4,
            CliError::Core(eigeniter::Error::Io(_)) | CliError::Io(..) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<eigeniter::Error> for CliError {
    fn from(e: eigeniter::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

/// Process exit status of a completed command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    MaxSteps = 3,
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>,
) -> Result<()> {
    let io_err = |e| CliError::Io(path.to_path_buf(), e);
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_file(path, |w| v.iter().try_for_each(|x| writeln!(w, "{x:.16e}")))
}

fn generate(shape: Shape, n: usize, r0: Option<f64>) -> Result<Mesh> {
    match (shape, r0) {
        (Shape::Annulus, Some(r0)) => Ok(generate_annulus(r0, n)?),
        (Shape::Annulus, None) => usage("annulus needs --r0"),
        (_, Some(_)) => usage("--r0 applies only to the annulus"),
        (Shape::Square, None) => Ok(generate_unit_square(n)?),
        (Shape::Disk, None) => Ok(generate_disk(n)?),
    }
}

fn load_mesh(record: &MeshRecord) -> Result<Mesh> {
    match record {
        MeshRecord {
            path: Some(path), ..
        } => Ok(read_mesh(path)?),
        MeshRecord {
            shape: Some(shape),
            n: Some(n),
            r0,
            ..
        } => generate(*shape, *n, *r0),
        MeshRecord { shape: Some(_), .. } => usage("--shape needs --n"),
        _ => usage("give either --mesh PATH or --shape with --n"),
    }
}

impl MeshSource {
    fn record(&self) -> MeshRecord {
        MeshRecord {
            path: self.mesh.as_deref().map(absolute),
            shape: self.shape,
            n: self.n,
            r0: self.r0,
        }
    }
}

/// `vertex value` pairs, one per line; `#` starts a comment.
fn read_profile_file(path: &Path, mesh: &Mesh) -> Result<BoundaryProfile> {
    let text = read_text(path)?;
    let mut pairs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [v, h] => v.parse::<usize>().ok().zip(h.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(pair) => pairs.push(pair),
            None => {
                return usage(format!(
                    "{}:{}: expected `vertex value`",
                    path.display(),
                    no + 1
                ))
            }
        }
    }
    Ok(BoundaryProfile::new(mesh, BoundaryTag::RobinAll, pairs)?)
}

fn robin_profile(mesh: &Mesh, boundary: &BoundaryRecord) -> Result<BoundaryProfile> {
    match (boundary.h, &boundary.h_file) {
        (Some(h), None) => {
            if !mesh.has_tag(BoundaryTag::RobinAll) {
                return usage("robin problem needs a mesh tagged RobinAll");
            }
            Ok(BoundaryProfile::constant(mesh, BoundaryTag::RobinAll, h)?)
        }
        (None, Some(path)) => read_profile_file(path, mesh),
        _ => usage("robin problem needs --h or --h-file"),
    }
}

fn build_spec<'m>(
    kind: ProblemKind,
    mesh: &'m Mesh,
    boundary: &BoundaryRecord,
) -> Result<ProblemSpec<'m>> {
    let has_h = boundary.h.is_some() || boundary.h_file.is_some();
    match kind {
        ProblemKind::Robin => {
            if boundary.mass.is_some() {
                return usage("--mass applies only to the insulation problem");
            }
            Ok(ProblemSpec::robin(mesh, robin_profile(mesh, boundary)?)?)
        }
        ProblemKind::Mixed => {
            if has_h || boundary.mass.is_some() {
                return usage("mixed problem takes no --h, --h-file or --mass");
            }
            Ok(ProblemSpec::mixed(mesh)?)
        }
        ProblemKind::Insulation => {
            if has_h {
                return usage("insulation problem takes --mass, not --h");
            }
            match boundary.mass {
                Some(m) => Ok(ProblemSpec::insulation(mesh, m)?),
                None => usage("insulation problem needs --mass"),
            }
        }
    }
}

fn kind_of(problem: Problem) -> ProblemKind {
    match problem {
        Problem::Robin => ProblemKind::Robin,
        Problem::Mixed => ProblemKind::Mixed,
        Problem::Insulation => ProblemKind::Insulation,
    }
}

pub fn mesh(args: MeshArgs) -> Result<Status> {
    let mesh = generate(args.shape, args.n, args.r0)?;
    write_mesh(&mesh, &args.out)?;
    Ok(Status::Ok)
}

fn manifest_from_args(args: &SolveArgs) -> Result<RunManifest> {
    let kind = kind_of(
        args.problem
            .expect("clap requires --problem without --manifest"),
    );
    let defaults = IterationConfig::for_kind(kind);
    let initial = match (args.init, &args.init_file) {
        (_, Some(_)) => InitialVector::User(Vec::new()),
        (Some(Init::ConstantOne), None) => InitialVector::ConstantOne,
        (Some(Init::AffinePositive), None) => InitialVector::AffinePositive,
        (None, None) => defaults.initial,
    };
    Ok(RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        problem: kind.as_str().to_string(),
        rtol: args.rtol.unwrap_or(defaults.rtol),
        max_steps: args.max_steps.unwrap_or(defaults.max_steps),
        initial: initial.name().to_string(),
        init_file: args.init_file.as_deref().map(absolute),
        cg_tolerance: args.cg_tol.unwrap_or(defaults.solver.tolerance),
        cg_max_iterations: args.cg_max_iter,
        mesh: args.source.record(),
        boundary: BoundaryRecord {
            h: args.profile.h,
            h_file: args.profile.h_file.as_deref().map(absolute),
            mass: args.mass,
        },
        result: None,
    })
}

fn read_initial(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| {
            l.trim().parse::<f64>().map_err(|_| {
                CliError::Usage(format!("{}:{}: expected a number", path.display(), no + 1))
            })
        })
        .collect()
}

fn iteration_config(manifest: &RunManifest) -> Result<IterationConfig> {
    let initial = match (manifest.initial.as_str(), &manifest.init_file) {
        ("constant-one", None) => InitialVector::ConstantOne,
        ("affine-positive", None) => InitialVector::AffinePositive,
        ("user", Some(path)) => InitialVector::User(read_initial(path)?),
        (other, _) => return usage(format!("unknown initial vector `{other}`")),
    };
    let cfg = IterationConfig {
        rtol: manifest.rtol,
        max_steps: manifest.max_steps,
        initial,
        solver: SolverConfig {
            tolerance: manifest.cg_tolerance,
            max_iterations: manifest.cg_max_iterations,
        },
        record_iterates: false,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn solve(args: SolveArgs) -> Result<Status> {
    let mut manifest = match &args.manifest {
        Some(path) => {
            let mut m = RunManifest::from_toml(&read_text(path)?, path).map_err(CliError::Usage)?;
            m.result = None;
            m
        }
        None => manifest_from_args(&args)?,
    };
    let kind: ProblemKind = manifest.problem.parse().map_err(CliError::Usage)?;
    let cfg = iteration_config(&manifest)?;
    let mesh = load_mesh(&manifest.mesh)?;
    let spec = build_spec(kind, &mesh, &manifest.boundary)?;

    let start = Instant::now();
    let solution = run(&spec, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| CliError::Io(out.clone(), e))?;
    write_file(&out.join("trace.csv"), |w| solution.trace.write_csv(w))?;
    write_vector(&out.join("solution.txt"), &solution.u)?;
    if let Some(h) = &solution.profile {
        write_file(&out.join("profile.txt"), |w| {
            h.vertices()
                .iter()
                .zip(h.values())
                .try_for_each(|(v, x)| writeln!(w, "{v} {x:.16e}"))
        })?;
    }
    manifest.result = Some(RunResult {
        converged: solution.trace.converged,
        steps: solution.trace.step_count(),
        lambda: solution.lambda,
        wall_clock_seconds: elapsed,
    });
    let text = manifest.to_toml();
    write_file(&out.join("manifest.txt"), |w| w.write_all(text.as_bytes()))?;

    println!("{:.16e}", solution.lambda);
    if solution.trace.converged {
        Ok(Status::Ok)
    } else {
        eprintln!("not converged after {} steps", solution.trace.step_count());
        Ok(Status::MaxSteps)
    }
}

pub fn oracle(args: OracleArgs) -> Result<Status> {
    let kind = kind_of(args.problem);
    if kind == ProblemKind::Insulation {
        return usage("no linear oracle for insulation");
    }
    let mesh = load_mesh(&args.source.record())?;
    let ProfileSource { h, h_file } = args.profile;
    let boundary = BoundaryRecord {
        h,
        h_file,
        mass: None,
    };
    let spec = build_spec(kind, &mesh, &boundary)?;
    let pair = match spec.constraint() {
        Some(c) => dense_smallest_eigpair(spec.stiffness(), spec.mass_matrix(), Some(c))?,
        None => dense_smallest_eigpair(
            spec.operator().expect("robin spec has an operator"),
            spec.mass_matrix(),
            None,
        )?,
    };
    if let Some(path) = &args.out {
        write_vector(path, &pair.vector)?;
    }
    println!("{:.16e}", pair.value);
    Ok(Status::Ok)
}

pub fn baseline(args: BaselineArgs) -> Result<Status> {
    let value = match (args.case, args.h, args.r0) {
        (Case::RobinDisk, Some(h), None) => robin_disk_lambda(h)?,
        (Case::RobinSquare, Some(h), None) => robin_square_lambda(h)?,
        (Case::MixedAnnulus, None, Some(r0)) => mixed_annulus_lambda(r0)?,
        (Case::MixedAnnulus, ..) => return usage("mixed-annulus takes --r0 only"),
        _ => return usage("robin cases take --h only"),
    };
    println!("{value:.16e}");
    Ok(Status::Ok)
}
