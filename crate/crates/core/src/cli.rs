//! Command-line driver.

use crate::ast::{Program, Query};
use crate::compile::{compile, CompiledProgram};
use crate::interp::Solver;
use crate::oracle;
use crate::output::{self, Options};
use crate::parser::{parse_program_with_warnings, parse_query};
use clap::Parser;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "scasp", version, about = "Goal-directed answer set programming with constraints")]
struct Args {
    /// Program files, read in order.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Query to run instead of the program's embedded `?-` directive.
    #[arg(short, long)]
    query: Option<String>,
    /// Maximum number of answers; 0 prints all.
    #[arg(short = 'n', long = "answers", default_value_t = 0)]
    answers: usize,
    /// Omit justification trees.
    #[arg(long = "no-just")]
    no_just: bool,
    /// Omit partial models.
    #[arg(long = "no-model")]
    no_model: bool,
    /// Print one JSON object per answer.
    #[arg(long = "json-lines")]
    json_lines: bool,
    /// Print the compiled program and exit.
    #[arg(long = "dump-compiled")]
    dump_compiled: bool,
    /// Check answers against brute-force stable models of the ground program.
    #[arg(long, hide = true)]
    oracle: bool,
}

pub const EXIT_ANSWERS: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

fn load(files: &[PathBuf], err: &mut dyn Write) -> Result<Program, String> {
    let mut program = Program::default();
    for path in files {
        let shown = path.display();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{shown}: cannot read file: {e}"))?;
        let (p, warnings) = parse_program_with_warnings(&text).map_err(|e| format!("{shown}:{e}"))?;
        for w in warnings {
            let _ = writeln!(err, "{shown}:{}:{}: warning: {}", w.line, w.col, w.message);
        }
        program.rules.extend(p.rules);
        program.directives.extend(p.directives);
    }
    Ok(program)
}

fn query_of(args: &Args, program: &Program) -> Result<Query, String> {
    match &args.query {
        Some(text) => {
            let mut text = text.trim().to_string();
            if !text.starts_with("?-") {
                text = format!("?- {text}");
            }
            if !text.ends_with('.') {
                text.push('.');
            }
            parse_query(&text).map_err(|e| format!("query:{e}"))
        }
        None => program.embedded_query().cloned().ok_or_else(|| "no query given and none embedded in the program".to_string()),
    }
}

/// Runs the command line `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_ANSWERS };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match execute(&args, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}

fn execute(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let program = load(&args.files, err)?;
    let compiled = compile(&program);
    let io = |e: std::io::Error| e.to_string();
    if args.dump_compiled {
        write!(out, "{}", compiled.dump()).map_err(io)?;
        return Ok(EXIT_ANSWERS);
    }
    let query = query_of(args, &program)?;
    if args.oracle {
        return check_oracle(&program, &compiled, &query, args.answers, out).map_err(|e| e.to_string());
    }
    let opts = Options { justification: !args.no_just, model: !args.no_model };
    if !args.json_lines {
        writeln!(out, "{query}\n").map_err(io)?;
    }
    let mut solver = Solver::new(&compiled, &query);
    let mut count = 0;
    let mut exhausted = true;
    loop {
        if args.answers > 0 && count == args.answers {
            exhausted = false;
            break;
        }
        let start = Instant::now();
        let Some(answer) = solver.next() else { break };
        count += 1;
        let millis = start.elapsed().as_secs_f64() * 1000.0;
        if args.json_lines {
            writeln!(out, "{}", output::render_json(&compiled, &answer, count)).map_err(io)?;
        } else {
            write!(out, "{}", output::render_answer(&compiled, &answer, count, millis, opts)).map_err(io)?;
        }
    }
    if exhausted && !args.json_lines {
        writeln!(out, "no").map_err(io)?;
    }
    let flounders = solver.nonground_disequalities();
    if flounders > 0 {
        let _ = writeln!(
            err,
            "warning: nonground_disequality: {flounders} disequalities between a variable and a non-ground term failed"
        );
    }
    Ok(if count > 0 { EXIT_ANSWERS } else { EXIT_NO })
}

fn check_oracle(
    program: &Program,
    compiled: &CompiledProgram,
    query: &Query,
    limit: usize,
    out: &mut dyn Write,
) -> Result<i32, Box<dyn std::error::Error>> {
    let gp = oracle::ground(program)?;
    let models = oracle::stable_models(&gp);
    writeln!(out, "stable models: {}", models.len())?;
    for m in &models {
        let atoms: Vec<String> = m.iter().map(|t| t.to_string()).collect();
        writeln!(out, "{{ {} }}", atoms.join(", "))?;
    }
    let answers = Solver::new(compiled, query);
    let answers: Vec<_> = if limit > 0 { answers.take(limit).collect() } else { answers.collect() };
    let mut consistent = true;
    for (i, a) in answers.iter().enumerate() {
        let model = a.model(compiled);
        if model.iter().any(|t| !t.is_ground()) {
            continue;
        }
        if !models.iter().any(|m| model.iter().all(|t| m.contains(t))) {
            writeln!(out, "answer {} is not contained in any stable model", i + 1)?;
            consistent = false;
        }
    }
    writeln!(out, "answers checked: {}", answers.len())?;
    Ok(if consistent { EXIT_ANSWERS } else { EXIT_NO })
}
