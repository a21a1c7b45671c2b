use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use twisted_core::acceptance::run_all;
use twisted_core::dsl::InstanceFile;
use twisted_core::engine::{Answer, Verdict};
use twisted_core::error::Error;
use twisted_core::extension::ExtensionDatum;
use twisted_core::instance::{decide, Instance, Options};
use twisted_core::word::Word;

const BUNDLED_DATUM: &str = include_str!("../data/order3.ext");
const DEFAULT_SEED: u64 = 0x5eed_2026;

#[derive(Parser)]
#[command(name = "tcsep", version, about = "Decide (twisted) conjugacy problems with certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide one instance file. Exit 0 = YES, 1 = NO, 2 = UNDECIDED, 3 = error.
    Decide(DecideArgs),
    /// Run the acceptance suite and the bundled datum validation.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct DecideArgs {
    file: PathBuf,
    /// Where to write the certificate (NO) or witness record (YES, UNDECIDED).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget_len: Option<usize>,
    #[arg(long)]
    budget_degree: Option<usize>,
    #[arg(long)]
    budget_steps: Option<u64>,
    /// Skip the exact solvers and run the generic engine.
    #[arg(long)]
    no_fast_path: bool,
    /// Run the member and separator searches on two threads.
    #[arg(long)]
    parallel: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SelftestArgs {
    /// Multiplier on every sample count.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Negative control: replace the ν entry at (row, column), 1-based, with `a`.
    #[arg(long, num_args = 2, value_names = ["ROW", "COL"])]
    corrupt_nu: Option<Vec<usize>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Decide(args) => match cmd_decide(&args) {
            Ok(answer) => ExitCode::from(match answer {
                Answer::Yes => 0,
                Answer::No => 1,
                Answer::Undecided => 2,
            }),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Command::Selftest(args) => {
            if cmd_selftest(&args) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn load_instance(path: &Path) -> Result<InstanceFile, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let load = |name: &str| {
        let p = base.join(name);
        fs::read_to_string(&p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))
    };
    InstanceFile::parse(&text, &load)
}

fn cmd_decide(args: &DecideArgs) -> Result<Answer, Error> {
    println!("seed: {}", args.seed);
    let file = load_instance(&args.file)?;
    let mut inst = file.instance()?;
    if let Some(l) = args.budget_len {
        inst.budget.max_len = l;
    }
    if let Some(d) = args.budget_degree {
        inst.budget.max_degree = d;
    }
    if let Some(s) = args.budget_steps {
        inst.budget.max_steps = s;
    }
    let opts = Options {
        fast_path: !args.no_fast_path,
        parallel: args.parallel,
    };
    let start = Instant::now();
    let verdict = decide(&inst, &opts)?;
    let elapsed = start.elapsed();
    println!("verdict: {}", verdict.answer.as_str());
    println!("route: {}", verdict.route);
    let e = &verdict.effort;
    println!(
        "effort: member_steps={} separator_steps={} len={} degree={}",
        e.member_steps, e.separator_steps, e.len_reached, e.degree_reached
    );
    println!("time: {:.3}s", elapsed.as_secs_f64());
    if let Some(out) = &args.out {
        let text = record(&inst, &verdict)?;
        fs::write(out, text).map_err(|e| Error::Input(format!("{}: {e}", out.display())))?;
        let what = if verdict.answer == Answer::No {
            "certificate"
        } else {
            "record"
        };
        println!("{what}: {}", out.display());
    }
    Ok(verdict.answer)
}

fn record(inst: &Instance, v: &Verdict) -> Result<String, Error> {
    let alphabet = inst.group.alphabet()?;
    let word = |w: &Word| alphabet.format(w);
    if let Some(c) = &v.certificate {
        return Ok(c.to_json(alphabet.names()));
    }
    let value = match &v.witness {
        Some(w) => json!({
            "answer": v.answer.as_str(),
            "route": v.route,
            "set_element": word(&w.set_element),
            "exponent": w.exponent,
            "conjugator": word(&w.conjugator),
        }),
        None => json!({
            "answer": v.answer.as_str(),
            "route": v.route,
            "effort": v.effort,
        }),
    };
    Ok(serde_json::to_string_pretty(&value).expect("record serializes"))
}

fn cmd_selftest(args: &SelftestArgs) -> bool {
    println!("seed: {}", args.seed);
    let mut ok = true;
    for r in run_all(args.seed, args.scale) {
        println!("{}", r.line());
        ok &= r.passed;
    }
    let datum_ok = match bundled_datum(args.corrupt_nu.as_deref()) {
        Ok(()) => {
            println!("datum validation [PASS]");
            true
        }
        Err(e) => {
            println!("datum validation [FAIL] {e}");
            false
        }
    };
    ok && datum_ok
}

fn bundled_datum(corrupt: Option<&[usize]>) -> Result<(), Error> {
    let datum = ExtensionDatum::parse(BUNDLED_DATUM)?;
    let mut nu = datum.nu.clone();
    if let Some(&[i, j]) = corrupt {
        let entry = nu
            .get_mut(i.wrapping_sub(1))
            .and_then(|row| row.get_mut(j.wrapping_sub(1)))
            .ok_or_else(|| Error::Input(format!("no ν entry ({i}, {j})")))?;
        *entry = Word::gen(0);
    }
    ExtensionDatum::new(datum.rank, datum.phis.clone(), nu, datum.sigma.clone()).map(|_| ())
}
