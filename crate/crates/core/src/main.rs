use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ccbox::frontend::{check_source, print_state, print_term, print_type, Diagnostic, SourceProgram};
use ccbox::machine::{step, MachineState, StepResult};
use ccbox::testkit::{run_property, GenConfig, Property, Report};
use ccbox::AtomSupply;

const EXIT_OK: u8 = 0;
const EXIT_TYPE_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_OUT_OF_FUEL: u8 = 3;
const EXIT_STUCK: u8 = 4;

#[derive(Parser)]
#[command(name = "ccbox", version, about = "Capture checker and abstract machine for a capture calculus with boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and type check a program.
    Check { file: PathBuf },
    /// Print the inferred type of a program.
    Type { file: PathBuf },
    /// Type check, then run a program on the abstract machine.
    Eval {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        /// Print every state as it is reached.
        #[arg(long)]
        trace: bool,
    },
    /// Run generated property tests; counterexamples go to --out.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Property to run (repeatable). Defaults to preservation, progress
        /// and subtype-transitivity.
        #[arg(long = "property", value_parser = parse_property)]
        properties: Vec<Property>,
        /// Run every property.
        #[arg(long, conflicts_with = "properties")]
        all: bool,
        #[arg(long, default_value = "fuzz-failures")]
        out: PathBuf,
    },
}

fn parse_property(name: &str) -> Result<Property, String> {
    Property::from_name(name).ok_or_else(|| {
        let names: Vec<&str> = Property::ALL.iter().map(|p| p.name()).collect();
        format!("unknown property `{name}`; expected one of: {}", names.join(", "))
    })
}

fn report(file: &Path, text: &str, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprint!("{}", d.render(&file.display().to_string(), text));
    }
}

/// Exit code for a failed parse or check: 2 unless the only errors are
/// typing errors.
fn failure_code(diagnostics: &[Diagnostic]) -> u8 {
    let typing_codes: Vec<&str> = ccbox::TypingErrorKind::ALL.iter().map(|k| k.code()).collect();
    if diagnostics.iter().all(|d| typing_codes.contains(&d.code)) {
        EXIT_TYPE_ERROR
    } else {
        EXIT_USAGE
    }
}

fn load(file: &Path) -> Result<String, u8> {
    fs::read_to_string(file).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", file.display());
        EXIT_USAGE
    })
}

fn checked(file: &Path) -> Result<(SourceProgram, ccbox::TypeExpr), u8> {
    let text = load(file)?;
    check_source(&text).map_err(|ds| {
        report(file, &text, &ds);
        failure_code(&ds)
    })
}

fn eval(file: &Path, fuel: usize, trace: bool) -> u8 {
    let program = match checked(file) {
        Ok((p, _)) => p.term,
        Err(code) => return code,
    };
    let mut supply = AtomSupply::avoiding(program.free_atoms());
    let mut state = MachineState::initial(program);
    let mut steps = 0;
    loop {
        match step(&state, &mut supply) {
            StepResult::Final(answer) => {
                match answer.variable {
                    Some(x) => println!("answer: {x} = {}", print_term(&answer.value)),
                    None => println!("answer: {}", print_term(&answer.value)),
                }
                println!("steps: {steps}");
                return EXIT_OK;
            }
            StepResult::Stuck(reason) => {
                println!("stuck after {steps} steps: {reason}");
                println!("state: {}", print_state(&state));
                return EXIT_STUCK;
            }
            StepResult::Stepped(next, rule) => {
                if steps == fuel {
                    println!("out of fuel after {steps} steps");
                    println!("state: {}", print_state(&state));
                    return EXIT_OUT_OF_FUEL;
                }
                steps += 1;
                if trace {
                    println!("step {steps} [{rule}] {}", print_state(&next));
                }
                state = next;
            }
        }
    }
}

fn fuzz(cfg: GenConfig, properties: Vec<Property>, out: &Path) -> u8 {
    let report = Report {
        properties: properties.iter().map(|p| run_property(*p, &cfg)).collect(),
    };
    print!("{report}");
    let mut failed = false;
    for cx in report.counterexamples() {
        failed = true;
        let name = format!("{}-seed{}-case{}.ccbox", cx.property, cx.seed, cx.case_index);
        let path = out.join(name);
        let written = fs::create_dir_all(out).and_then(|_| fs::write(&path, cx.to_file()));
        match written {
            Ok(()) => println!("counterexample written to {}", path.display()),
            Err(e) => eprintln!("error: cannot write {}: {e}", path.display()),
        }
        print!("{}", cx.to_file());
    }
    if failed {
        EXIT_TYPE_ERROR
    } else {
        EXIT_OK
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file } => match checked(&file) {
            Ok(_) => {
                println!("ok");
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Type { file } => match checked(&file) {
            Ok((_, t)) => {
                println!("{}", print_type(&t));
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Eval { file, fuel, trace } => eval(&file, fuel, trace),
        Command::Fuzz {
            seed,
            count,
            properties,
            all,
            out,
        } => {
            let properties = if all {
                Property::ALL.to_vec()
            } else if properties.is_empty() {
                vec![Property::Preservation, Property::Progress, Property::SubtypeTransitivity]
            } else {
                properties
            };
            let cfg = GenConfig {
                seed,
                count,
                ..GenConfig::default()
            };
            fuzz(cfg, properties, &out)
        }
    };
    ExitCode::from(code)
}
