use std::path::Path;
use std::str::FromStr;

use wfid::eval::{emit_report, evaluate as run_protocol, pca_project, permutation_importance, write_projection};
use wfid::hyper::algorithm_names;
use wfid::tabular::feature_importance_mdi;
use wfid::{
    fit, stratified_holdout, Algorithm, CsiScenario, HyperValue, Hyperparameters, HyperparameterSpace,
    LabeledDataset, NbIotScenario, Protocol, Scenario, SearchBudget,
};
use wfid_service::{AppState, ServiceConfig};

use crate::{BuiltinScenario, EvaluateArgs, ImportanceArgs, ProjectArgs, ServeArgs, SimulateArgs};

pub const EXIT_INVALID: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<wfid::Error> for CliError {
    fn from(e: wfid::Error) -> Self {
        use wfid::Error::*;
        match e {
            Io { .. } | Convergence { .. } | Artifact(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn input_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{}: no such file", path.display())))
    }
}

fn output_file(path: &Path) -> Result<()> {
    if path.is_dir() {
        return Err(CliError::Invalid(format!("{}: is a directory", path.display())));
    }
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(CliError::Invalid(format!("{}: no such directory", p.display())))
        }
        _ => Ok(()),
    }
}

fn output_dir(path: &Path) -> Result<()> {
    if path.exists() && !path.is_dir() {
        return Err(CliError::Invalid(format!("{}: not a directory", path.display())));
    }
    Ok(())
}

fn load(path: &Path) -> Result<LabeledDataset> {
    wfid::io::read_dataset(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    output_file(&args.out)?;
    let scenario = match (&args.scenario, args.builtin) {
        (Some(path), _) => {
            input_file(path)?;
            Scenario::load(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        (None, Some(BuiltinScenario::Nbiot)) => Scenario::Nbiot(NbIotScenario::default()),
        (None, Some(BuiltinScenario::Csi)) => Scenario::Csi(CsiScenario::default()),
        (None, None) => unreachable!("clap requires a scenario source"),
    };
    let dataset = scenario.generate(args.seed)?;
    wfid::io::write_dataset(&args.out, &dataset)?;
    let counts = dataset.class_counts();
    let min = counts.iter().min().copied().unwrap_or(0);
    let max = counts.iter().max().copied().unwrap_or(0);
    println!("# seed: {}", args.seed);
    println!("kind: {}", dataset.kind());
    println!("rows: {}", dataset.len());
    println!("classes: {}", dataset.num_devices());
    if let Some(len) = dataset.trace_length() {
        println!("trace length: {len}");
    }
    println!("balance: {min}..{max} records per class");
    println!("wrote {}", args.out.display());
    Ok(())
}

fn parse_algorithms(names: &[String]) -> Result<Vec<Algorithm>> {
    names
        .iter()
        .map(|n| {
            Algorithm::from_str(n.trim()).map_err(|_| {
                CliError::Invalid(format!(
                    "unknown algorithm `{n}`; expected one of {}",
                    algorithm_names().join(", ")
                ))
            })
        })
        .collect()
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    input_file(&args.data)?;
    output_dir(&args.out)?;
    let algorithms = parse_algorithms(&args.algorithms)?;
    let protocol = Protocol::from_str(&args.protocol)?;
    let budget = SearchBudget {
        samples: args.samples,
        inner_folds: args.inner_folds,
        outer_folds: args.outer_folds,
        repeats: args.repeats,
        benchmark: !args.no_benchmark,
        benchmark_repetitions: args.bench_repetitions,
    };
    budget.validate()?;
    if args.kernels == Some(0) {
        return Err(CliError::Invalid("--kernels must be positive".into()));
    }
    let dataset = load(&args.data)?;
    for &a in &algorithms {
        if a.kind() != dataset.kind() {
            return Err(CliError::Invalid(format!(
                "kind mismatch: {a} trains on {} data but {} holds {} data",
                a.kind(),
                args.data.display(),
                dataset.kind()
            )));
        }
    }

    let mut entries = Vec::with_capacity(algorithms.len());
    for &a in &algorithms {
        let space = match (a, args.kernels) {
            (Algorithm::RocketRidge, Some(k)) => {
                let hp: Hyperparameters = [("kernels".to_string(), HyperValue::Int(k as i64))].into();
                Some(HyperparameterSpace::single(&hp))
            }
            _ => None,
        };
        eprintln!("evaluating {a} ({protocol}, seed {})", args.seed);
        entries.push(run_protocol(a, &dataset, protocol, space.as_ref(), &budget, args.seed)?);
    }
    let (table, records) = emit_report(&entries, &args.out)?;
    print!("{}", std::fs::read_to_string(&table).map_err(|e| CliError::Runtime(e.to_string()))?);
    eprintln!("wrote {} and {}", table.display(), records.display());
    Ok(())
}

pub fn project(args: ProjectArgs) -> Result<()> {
    if !(2..=3).contains(&args.dims) {
        return Err(CliError::Invalid(format!("--dims must be 2 or 3, got {}", args.dims)));
    }
    input_file(&args.data)?;
    output_file(&args.out)?;
    let dataset = load(&args.data)?;
    let projection = pca_project(&dataset, args.dims)?;
    let file = std::fs::File::create(&args.out)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    write_projection(&projection, std::io::BufWriter::new(file))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    let explained: Vec<String> = projection.variances.iter().map(|v| format!("{v:.4}")).collect();
    println!("component variances: {}", explained.join(", "));
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn importance(args: ImportanceArgs) -> Result<()> {
    let algorithm = match args.algorithm.as_str() {
        "dt" => Algorithm::Dt,
        "rf" => Algorithm::Rf,
        other => return Err(CliError::Invalid(format!("importance needs dt or rf, got `{other}`"))),
    };
    if !(args.test_fraction > 0.0 && args.test_fraction < 1.0) {
        return Err(CliError::Invalid("--test-fraction must lie strictly between 0 and 1".into()));
    }
    input_file(&args.data)?;
    output_file(&args.out)?;
    let dataset = load(&args.data)?;
    let plan = stratified_holdout(&dataset, &[1.0 - args.test_fraction, args.test_fraction], args.seed)?;
    let model = fit(algorithm, &dataset, &plan.part(0), &Hyperparameters::new(), args.seed)?;
    let mdi = feature_importance_mdi(&model)?;
    let perm = permutation_importance(&model, &dataset, &plan.part(1), args.seed)?;
    let mut out = String::from("attribute,mdi,permutation_drop_pct\n");
    for ((name, m), p) in dataset.attribute_names().iter().zip(&mdi.values).zip(&perm) {
        out.push_str(&format!("{name},{m},{p}\n"));
    }
    std::fs::write(&args.out, &out).map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    println!("# algorithm: {algorithm}, seed: {}", args.seed);
    if mdi.no_splits {
        println!("note: the fitted model has no splits; impurity importances are all zero");
    }
    print!("{out}");
    Ok(())
}

pub fn serve(args: ServeArgs) -> Result<()> {
    if args.threads == Some(0) {
        return Err(CliError::Invalid("--threads must be positive".into()));
    }
    output_dir(&args.store)?;
    let config = ServiceConfig {
        listen: args.listen,
        store_dir: args.store,
        harness_threads: args.threads,
        default_seed: args.seed,
        ..ServiceConfig::default()
    };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.listen)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot listen on {}: {e}", config.listen)))?;
        let addr = listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?;
        let state = AppState::open(config).map_err(|e| CliError::Runtime(e.to_string()))?;
        println!("listening on {addr}");
        wfid_service::serve(listener, state, wfid_service::shutdown_signal())
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        eprintln!("shut down");
        Ok(())
    })
}
