use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use supermaps::channels::{
    check_signaling, Channel, Classical, Quantum, SignalingRelation, Theory,
};
use supermaps::config::RunConfig;
use supermaps::io::{
    read_json, read_relation, write_json, ChannelDoc, CombDoc, Interchange, SupermapDoc, TheoryTag,
};
use supermaps::lat::{
    check_convex_linearity, check_local_applicability, decorrelating_oracle, nonlinear_oracle,
    LatOracle, MultiLatOracle,
};
use supermaps::rng::{rng_from, trial_seed};
use supermaps::supermaps::{
    classical_switch, control_output, switch_supermap, Comb, Supermap, SLOT2_IN, SLOT2_OUT,
};
use supermaps::tensor::gates::{
    basis_projector, hadamard, minus_state, pauli_x, pauli_z, plus_state,
};
use supermaps::tensor::ComplexMatrix;
use supermaps::{Error, Result, SystemType};

/// Supermaps, combs and locally-applicable transformations from the command line.
///
/// Exit status: 0 when every check passes, 1 when a property is refuted,
/// 2 on usage or parse errors.
#[derive(Parser)]
#[command(name = "supermap", version)]
struct Cli {
    /// TOML run configuration (default: $SUPERMAP_CONFIG, then built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Checks that a channel file is CP and trace preserving, and optionally
    /// that it obeys a signaling relation.
    ValidateChannel {
        file: PathBuf,
        #[arg(long)]
        signaling: Option<PathBuf>,
    },
    /// Verifies an oracle's local applicability and extracts its supermap.
    /// Built-ins: identity, switch-fixed-second, decorrelating, nonlinear;
    /// anything else is read as a comb file.
    Extract {
        #[arg(long)]
        oracle: String,
        /// Where to write the supermap (default: include it in the report).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random combs through embed and extract, comparing bodies.
    Roundtrip {
        /// Slot and target dimensions dA,dA',dB,dB'.
        #[arg(long, value_delimiter = ',', default_value = "2,2,2,2")]
        dims: Vec<usize>,
        /// Largest memory dimension of the random combs.
        #[arg(long, default_value_t = 2)]
        env: usize,
        #[arg(long)]
        classical: bool,
    },
    /// Control outputs of the quantum and classical switch.
    SwitchDemo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    cfg.trials = cli.trials.unwrap_or(cfg.trials);
    cfg.tol = cli.tol.unwrap_or(cfg.tol);
    cfg.validate()?;
    Ok(cfg)
}

fn print<S: Serialize>(value: &S) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = config(&cli)?;
    match &cli.command {
        Command::ValidateChannel { file, signaling } => {
            validate_channel(&cfg, file, signaling.as_deref())
        }
        Command::Extract { oracle, out } => extract(&cfg, oracle, out.as_deref()),
        Command::Roundtrip {
            dims,
            env,
            classical,
        } => roundtrip(&cfg, dims, *env, *classical),
        Command::SwitchDemo => switch_demo(&cfg),
    }
}

fn validate_channel(cfg: &RunConfig, file: &Path, signaling: Option<&Path>) -> Result<bool> {
    let doc: ChannelDoc = read_json(file)?;
    cfg.check_size(doc.system.in_factors.total_dim() * doc.system.out_factors.total_dim())?;
    let relation = signaling.map(read_relation).transpose()?;
    fn report<T: Interchange>(
        doc: &ChannelDoc,
        rel: Option<&SignalingRelation>,
        tol: f64,
    ) -> Result<(bool, Value)> {
        let c: Channel<T> = doc.to_channel()?;
        let r = c.is_channel(tol);
        let mut ok = r.cp && r.tp;
        let mut v = json!({
            "theory": T::NAME,
            "cp": r.cp,
            "tp": r.tp,
            "trace_deviation": c.trace_deviation(),
        });
        if let Some(rel) = rel {
            let s = check_signaling(&c, rel, tol)?;
            ok &= s.holds;
            v["signaling"] = serde_json::to_value(&s)?;
        }
        Ok((ok, v))
    }
    let (ok, v) = match doc.theory {
        TheoryTag::Quantum => report::<Quantum>(&doc, relation.as_ref(), cfg.tol)?,
        TheoryTag::Classical => report::<Classical>(&doc, relation.as_ref(), cfg.tol)?,
    };
    print(&v)?;
    Ok(ok)
}

fn qubit(l: &str) -> Result<SystemType> {
    SystemType::single(l, 2)
}

fn random_qubit_comb(seed: u64) -> Result<Comb<Quantum>> {
    let mut rng = rng_from(seed);
    let env = SystemType::single("e", rng.random_range(1..=2))?;
    Comb::random(
        &qubit("a")?,
        &qubit("a'")?,
        &qubit("b")?,
        &qubit("b'")?,
        &env,
        &mut rng,
    )
}

fn builtin_oracle(name: &str, seed: u64) -> Result<Option<LatOracle<Quantum>>> {
    Ok(Some(match name {
        "identity" => LatOracle::identity(&qubit("a")?, &qubit("a'")?),
        "switch-fixed-second" => {
            let switch = MultiLatOracle::embed(&switch_supermap(2)?);
            let psi =
                Quantum::random_channel(&qubit(SLOT2_IN)?, &qubit(SLOT2_OUT)?, &mut rng_from(seed));
            switch.curry(0, &[psi])?
        }
        "decorrelating" => decorrelating_oracle(&random_qubit_comb(seed)?.to_supermap()?),
        "nonlinear" => {
            let id = Supermap::identity(&qubit("a")?, &qubit("a'")?)?;
            let rotate = Comb::new(
                Channel::identity(&qubit("a")?),
                Channel::unitary(&qubit("a'")?, &hadamard())?,
                &SystemType::trivial(),
            )?;
            nonlinear_oracle(&id, &rotate.to_supermap()?)?
        }
        _ => return Ok(None),
    }))
}

fn extract(cfg: &RunConfig, oracle: &str, out: Option<&Path>) -> Result<bool> {
    if let Some(o) = builtin_oracle(oracle, cfg.seed)? {
        return verify_and_extract(cfg, &o, out);
    }
    let path = Path::new(oracle);
    if !path.exists() {
        return Err(Error::Parse(format!(
            "`{oracle}` is neither a built-in oracle nor a comb file"
        )));
    }
    let doc: CombDoc = read_json(path)?;
    match doc.pre.theory {
        TheoryTag::Quantum => {
            verify_and_extract(cfg, &LatOracle::from_comb(&doc.to_comb::<Quantum>()?), out)
        }
        TheoryTag::Classical => verify_and_extract(
            cfg,
            &LatOracle::from_comb(&doc.to_comb::<Classical>()?),
            out,
        ),
    }
}

fn verify_and_extract<T: Interchange>(
    cfg: &RunConfig,
    o: &LatOracle<T>,
    out: Option<&Path>,
) -> Result<bool> {
    let k = o.source();
    cfg.check_size(
        k.base_in.total_dim()
            * k.base_out.total_dim()
            * o.target().base_in.total_dim()
            * o.target().base_out.total_dim(),
    )?;
    let local = check_local_applicability(o, cfg.trials, cfg.seed, cfg.tol)?;
    let linear = check_convex_linearity(o, cfg.trials, cfg.seed, cfg.tol)?;
    let mut report = json!({
        "oracle": o.name(),
        "local_applicability": local,
        "convex_linearity": linear,
    });
    if !(local.passed() && linear.passed()) {
        print(&report)?;
        return Ok(false);
    }
    let doc = SupermapDoc::from_supermap(&o.extract()?)?;
    match out {
        Some(p) => {
            write_json(p, &doc)?;
            report["written_to"] = json!(p);
        }
        None => report["supermap"] = serde_json::to_value(&doc)?,
    }
    print(&report)?;
    Ok(true)
}

fn roundtrip(cfg: &RunConfig, dims: &[usize], env: usize, classical: bool) -> Result<bool> {
    let [da, dap, db, dbp] = dims else {
        return Err(Error::Parse(format!(
            "--dims takes four dimensions, got {}",
            dims.len()
        )));
    };
    if dims.iter().chain([&env]).any(|&d| d == 0) {
        return Err(Error::InvalidDimension(
            "dimensions must be positive".into(),
        ));
    }
    cfg.check_size(da * dap * db * dbp)?;
    let types =
        [("a", *da), ("a'", *dap), ("b", *db), ("b'", *dbp)].map(|(l, d)| SystemType::single(l, d));
    let [a, ap, b, bp] = types;
    let (a, ap, b, bp) = (a?, ap?, b?, bp?);
    fn max_distance<T: Theory>(
        cfg: &RunConfig,
        t: (&SystemType, &SystemType, &SystemType, &SystemType),
        env: usize,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..cfg.trials as u64 {
            let mut rng = rng_from(trial_seed(cfg.seed, i));
            let e = SystemType::single("e", rng.random_range(1..=env))?;
            let s = Comb::<T>::random(t.0, t.1, t.2, t.3, &e, &mut rng)?.to_supermap()?;
            worst = worst.max(LatOracle::embed(&s).extract()?.distance(&s)?);
        }
        Ok(worst)
    }
    let t = (&a, &ap, &b, &bp);
    let worst = if classical {
        max_distance::<Classical>(cfg, t, env)?
    } else {
        max_distance::<Quantum>(cfg, t, env)?
    };
    let passed = worst <= cfg.tol;
    print(&json!({
        "theory": if classical { Classical::NAME } else { Quantum::NAME },
        "dims": dims,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "max_distance": worst,
        "tol": cfg.tol,
        "passed": passed,
    }))?;
    Ok(passed)
}

fn expectation(rho: &ComplexMatrix, proj: &ComplexMatrix) -> f64 {
    rho.matmul(proj).map(|m| m.trace().re).unwrap_or(f64::NAN)
}

fn switch_demo(cfg: &RunConfig) -> Result<bool> {
    let q = switch_supermap(2)?;
    let c = classical_switch(2)?;
    let mixed = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
    let zero = basis_projector(2, 0);
    let xz = control_output(&q, &pauli_x(), &pauli_z(), &mixed, &plus_state())?;
    let hh = control_output(&q, &hadamard(), &hadamard(), &zero, &plus_state())?;
    let cxz = control_output(&c, &pauli_x(), &pauli_z(), &mixed, &plus_state())?;
    let fid_minus = expectation(&xz, &minus_state());
    let fid_plus_hh = expectation(&hh, &plus_state());
    let classical_x_basis = [
        expectation(&cxz, &plus_state()),
        expectation(&cxz, &minus_state()),
    ];
    let typing = q
        .as_supermap_non_signaling()?
        .check(cfg.trials, cfg.seed, cfg.tol)?;
    let facts = [
        (1.0 - fid_minus).abs() <= 1e-10,
        (1.0 - fid_plus_hh).abs() <= 1e-10,
        classical_x_basis.iter().all(|p| (p - 0.5).abs() <= 1e-10),
        typing.passed(),
    ];
    let matrix = |m: &ComplexMatrix| -> Vec<Vec<[f64; 2]>> {
        (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| [m.get(i, j).re, m.get(i, j).im])
                    .collect()
            })
            .collect()
    };
    print(&json!({
        "quantum_xz": { "control": matrix(&xz), "fidelity_minus": fid_minus },
        "quantum_hh": { "control": matrix(&hh), "fidelity_plus": fid_plus_hh },
        "classical_xz": { "control": matrix(&cxz), "x_basis_probabilities": classical_x_basis },
        "is_supermap_non_signaling": typing,
    }))?;
    Ok(facts.iter().all(|&f| f))
}
