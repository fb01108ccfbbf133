use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lexinstruct_core::generate::{generate_dataset, AcceptAll, GenConfig, Screen, Templates};
use lexinstruct_core::{parse_rule, verify_instruction, Instruction, Language};
use lexinstruct_harness::collect::{collect, errors_path, EndpointConfig};
use lexinstruct_harness::records::{load_instructions, load_responses, write_jsonl};
use lexinstruct_harness::report::{parse_csv, render_csv, render_json, render_table, EvalReport};
use lexinstruct_harness::screen::CommandScreen;
use lexinstruct_harness::{score, HarnessError, Result, ScoreOptions};

#[derive(Parser)]
#[command(name = "lexeval", version, about = "Generate, verify and score fine-grained lexical instructions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    #[value(alias = "structured")]
    Json,
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check rules against a text read from stdin (or --text).
    Verify {
        /// Rule in DSL form; repeat for several rules.
        #[arg(long = "rule", required = true)]
        rules: Vec<String>,
        #[arg(long, default_value = "en")]
        lang: Language,
        #[arg(long)]
        text: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Generate an instruction file from a generator config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        lang: Option<Language>,
        /// Template file replacing the built-in templates.
        #[arg(long)]
        templates: Option<PathBuf>,
        /// Seed tasks, one per line, replacing those in the config.
        #[arg(long)]
        seed_tasks: Option<PathBuf>,
        /// Shell command that vetoes instructions (exit 0 keep, 1 reject).
        #[arg(long)]
        screen: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Render DSL rules (one per line, `-` for stdin) as a prompt.
    Render {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value = "en")]
        lang: Language,
        #[arg(long, default_value = "")]
        seed_task: String,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
    /// Query an endpoint for every instruction lacking a response.
    Collect {
        #[arg(long)]
        instructions: PathBuf,
        #[arg(long)]
        endpoint: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Concurrent requests, overriding the endpoint config.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        lang: Option<Language>,
    },
    /// Score responses against instructions.
    Score {
        #[arg(long)]
        instructions: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        strict_only: bool,
        #[arg(long)]
        lang: Option<Language>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value = "model")]
        label: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Merge reports from independent runs and render them.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long, default_value = "model")]
        label: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| HarnessError::io("<stdin>", e))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn templates(path: Option<&Path>) -> Result<Templates> {
    match path {
        Some(p) => Ok(Templates::from_toml(&read_config(p)?)?),
        None => Ok(Templates::default()),
    }
}

fn render_report(report: &EvalReport, format: Format, label: &str) -> String {
    match format {
        Format::Json => render_json(report),
        Format::Table => render_table(label, report),
        Format::Csv => render_csv(report),
    }
}

fn load_report(path: &Path) -> Result<EvalReport> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        parse_csv(&text).map_err(|e| HarnessError::malformed(path, 0, e))
    } else {
        serde_json::from_str(&text).map_err(|e| HarnessError::malformed(path, e.line(), e))
    }
}

fn usage(e: impl ToString) -> HarnessError {
    HarnessError::Config(e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Verify { rules, lang, text, format } => {
            let rules = rules.iter().map(|r| parse_rule(r).map_err(|e| usage(format!("`{r}`: {e}")))).collect::<Result<Vec<_>>>()?;
            let text = read(text.as_deref().unwrap_or(Path::new("-")))?;
            let instr = Instruction::new("cli", lang, "", rules);
            let v = verify_instruction(&instr, &text);
            let out = match format {
                Format::Json => {
                    let rules: Vec<_> = v
                        .rule_results
                        .iter()
                        .map(|(r, ok)| serde_json::json!({"rule": r.to_string(), "pass": ok}))
                        .collect();
                    let doc = serde_json::json!({
                        "rules": rules,
                        "strict": v.strict_pass,
                        "loose": v.loose_pass,
                        "loose_variant": v.loose_variant,
                    });
                    format!("{doc}\n")
                }
                _ => {
                    let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
                    let mut s = String::new();
                    for (r, ok) in &v.rule_results {
                        s.push_str(&format!("{}\t{r}\n", verdict(*ok)));
                    }
                    s.push_str(&format!("strict\t{}\n", verdict(v.strict_pass)));
                    let variant = v.loose_variant.map(|x| format!(" ({})", x.id())).unwrap_or_default();
                    s.push_str(&format!("loose\t{}{variant}\n", verdict(v.loose_pass)));
                    s
                }
            };
            emit(None, &out)
        }
        Cmd::Generate { config, seed, lang, templates: tpl, seed_tasks, screen, out } => {
            let mut table: toml::Table = read_config(&config)?.parse().map_err(|e| usage(format!("{}: {e}", config.display())))?;
            if let Some(seed) = seed {
                let seed = i64::try_from(seed).map_err(|_| usage("--seed must fit in a signed 64-bit integer"))?;
                table.insert("seed".into(), toml::Value::Integer(seed));
            }
            if let Some(lang) = lang {
                table.insert("language".into(), toml::Value::String(lang.to_string()));
            }
            if let Some(path) = seed_tasks {
                let tasks: Vec<toml::Value> =
                    read_config(&path)?.lines().filter(|l| !l.trim().is_empty()).map(|l| l.into()).collect();
                table.insert("seed_tasks".into(), toml::Value::Array(tasks));
            }
            let cfg = GenConfig::from_toml(&toml::to_string(&table).map_err(usage)?)?;
            let templates = templates(tpl.as_deref())?;
            let mut screen: Box<dyn Screen> = match screen {
                Some(cmd) => Box::new(CommandScreen::new(cmd)),
                None => Box::new(AcceptAll),
            };
            let data = generate_dataset(&cfg, &templates, screen.as_mut())?;
            match out {
                Some(p) => write_jsonl(&p, &data),
                None => {
                    let mut s = String::new();
                    for i in &data {
                        s.push_str(&serde_json::to_string(i).expect("instructions serialize"));
                        s.push('\n');
                    }
                    emit(None, &s)
                }
            }
        }
        Cmd::Render { rules, lang, seed_task, templates: tpl } => {
            let src = read(&rules)?;
            let rules = src
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| parse_rule(l.trim()).map_err(|e| HarnessError::malformed(&rules, i + 1, e)))
                .collect::<Result<Vec<_>>>()?;
            let prompt = templates(tpl.as_deref())?.render_prompt(&rules, lang, &seed_task)?;
            emit(None, &format!("{prompt}\n"))
        }
        Cmd::Collect { instructions, endpoint, out, jobs, lang } => {
            let mut cfg = EndpointConfig::from_toml(&read_config(&endpoint)?)?;
            if let Some(j) = jobs {
                cfg.concurrency = j.max(1);
            }
            let mut instrs = load_instructions(&instructions)?;
            if let Some(l) = lang {
                instrs.retain(|i| i.language == l);
            }
            let summary = collect(&instrs, &cfg, &out)?;
            eprintln!(
                "collected {} responses, skipped {} already present, {} failed",
                summary.succeeded,
                summary.skipped,
                summary.failed.len()
            );
            if summary.failed.is_empty() {
                Ok(())
            } else {
                eprintln!("failures written to {}", errors_path(&out).display());
                Err(HarnessError::Partial {
                    failed: summary.failed.len(),
                    attempted: summary.succeeded + summary.failed.len(),
                })
            }
        }
        Cmd::Score { instructions, responses, jobs, strict_only, lang, format, label, out } => {
            let mut instrs = load_instructions(&instructions)?;
            let mut resps = load_responses(&responses, &instrs)?;
            if let Some(l) = lang {
                instrs.retain(|i| i.language == l);
                let keep: std::collections::HashSet<&str> = instrs.iter().map(|i| i.id.as_str()).collect();
                resps.retain(|r| keep.contains(r.id.as_str()));
            }
            let report = score(&instrs, &resps, ScoreOptions { jobs, strict_only })?;
            emit(out.as_deref(), &render_report(&report, format, &label))
        }
        Cmd::Report { inputs, format, label, out } => {
            let reports = inputs.iter().map(|p| load_report(p)).collect::<Result<Vec<_>>>()?;
            let merged = EvalReport::merge(&reports).expect("at least one input");
            emit(out.as_deref(), &render_report(&merged, format, &label))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lexeval: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
