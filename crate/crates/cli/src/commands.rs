//! Subcommand implementations. Each returns what goes to stdout and the
//! exit status; artifacts are written under `--out` when it is given.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stance_aie::scenario::BUILTIN;
use stance_aie::{
    confusion_matrix, extract_chronology, representatives, rollout, success_rate, train_policy,
    Chronology, ObservationTrace, Policy, RolloutOptions, Scenario, Status,
};
use stance_core::kr::{canonical_serialize, is_connective, to_graph, Experience, KrError};
use stance_core::report::{
    analogy_report, augmentation_dot, gmap_dot, synthesis_report, WeightRecord,
};
use stance_core::sme::{analyze, HypothesisStatus, SmeConfig};
use stance_core::synthesis::{
    filter_hypotheses, order_bases, synthesize, BaseLibrary, SynthesisConfig,
};

use crate::args::{Cli, Command, Format};
use crate::config::{experience_id, load_experience, parse_config, Manifest, RunConfig};
use crate::output::{to_json, write_atomic, EXIT_OK, EXIT_PARSE, EXIT_USAGE};

pub const VALIDATE_SCHEMA: &str = "stance.validate/1";
pub const ORDER_SCHEMA: &str = "stance.order/1";
pub const POLICY_SCHEMA: &str = "stance.policy/1";
pub const TRACE_SCHEMA: &str = "stance.trace/1";
pub const CHRONICLE_SCHEMA: &str = "stance.chronicle/1";
pub const CONFUSION_SCHEMA: &str = "stance.confusion/1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome {
            stdout,
            warnings: Vec::new(),
            code: EXIT_OK,
        }
    }
}

struct Ctx {
    out: Option<PathBuf>,
    format: Format,
    seed: Option<u64>,
    config: RunConfig,
}

impl Ctx {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        match &self.out {
            Some(dir) => write_atomic(dir, name, contents),
            None => Ok(()),
        }
    }

    fn no_dot(&self, command: &str) -> Result<()> {
        if self.format == Format::Dot {
            bail!("`{command}` has no DOT output");
        }
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let ctx = Ctx {
        out: cli.out,
        format: cli.format,
        seed: cli.seed,
        config: RunConfig::load(cli.config.as_deref())?,
    };
    match cli.command {
        Command::Validate { paths, vocabulary } => validate(&ctx, &paths, vocabulary.as_deref()),
        Command::Match {
            base,
            target,
            vocabulary,
        } => match_pair(&ctx, &base, &target, vocabulary.as_deref()),
        Command::Order { manifest } => order(&ctx, &manifest),
        Command::Synthesize { manifest } => synthesize_cmd(&ctx, &manifest),
        Command::Train { scenario } => train(&ctx, &scenario),
        Command::Simulate {
            scenario,
            policy,
            episodes,
        } => simulate(&ctx, &scenario, policy.as_deref(), episodes),
        Command::Chronicle { traces, threshold } => chronicle(&ctx, &traces, threshold),
        Command::Evaluate => evaluate(&ctx),
        Command::ExportDot {
            path,
            original,
            vocabulary,
        } => export_dot(&ctx, &path, original.as_deref(), vocabulary.as_deref()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeclRecord {
    pub name: String,
    pub arity: usize,
    pub category: String,
    pub event: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileReport {
    pub path: String,
    pub valid: bool,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub facts: usize,
    pub rationale_roots: usize,
    pub edges: usize,
    pub declarations: Vec<DeclRecord>,
    pub entities: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateReport {
    pub schema: String,
    pub files: Vec<FileReport>,
}

fn file_report(path: &Path, exp: &Experience) -> FileReport {
    let mut warnings = Vec::new();
    if exp.facts().is_empty() {
        warnings.push("no facts".to_string());
    }
    FileReport {
        path: path.display().to_string(),
        valid: true,
        error: None,
        warnings,
        facts: exp.facts().len(),
        rationale_roots: exp.rationale_roots().len(),
        edges: exp.edge_count(),
        declarations: exp
            .declarations()
            .iter()
            .filter(|d| !is_connective(&d.name))
            .map(|d| DeclRecord {
                name: d.name.clone(),
                arity: d.arity,
                category: d.category.as_str().to_string(),
                event: d.is_event,
            })
            .collect(),
        entities: exp.entities().iter().map(|e| e.name.clone()).collect(),
    }
}

fn validate(ctx: &Ctx, paths: &[PathBuf], vocabulary: Option<&Path>) -> Result<Outcome> {
    ctx.no_dot("validate")?;
    let parse = parse_config(vocabulary)?;
    let mut files = Vec::new();
    let mut code = EXIT_OK;
    for path in paths {
        let failed = |error: String| FileReport {
            path: path.display().to_string(),
            valid: false,
            error: Some(error),
            warnings: Vec::new(),
            facts: 0,
            rationale_roots: 0,
            edges: 0,
            declarations: Vec::new(),
            entities: Vec::new(),
        };
        match load_experience(path, &parse) {
            Ok(exp) => files.push(file_report(path, &exp)),
            Err(e) => {
                let parse_error = e.chain().any(|c| c.is::<KrError>());
                code = code.max(if parse_error { EXIT_PARSE } else { EXIT_USAGE });
                let msg = match e.chain().find_map(|c| c.downcast_ref::<KrError>()) {
                    Some(kr) => format!("{}:{kr}", path.display()),
                    None => format!("{e:#}"),
                };
                files.push(failed(msg));
            }
        }
    }
    let report = ValidateReport {
        schema: VALIDATE_SCHEMA.to_string(),
        files,
    };
    let json = to_json(&report)?;
    ctx.write("validate.json", &json)?;
    let stdout = match ctx.format {
        Format::Json => json,
        _ => {
            let mut s = String::new();
            for f in &report.files {
                match &f.error {
                    Some(err) => writeln!(s, "FAIL {err}")?,
                    None => {
                        writeln!(
                            s,
                            "ok   {}: {} facts, {} rationale roots, {} edges",
                            f.path, f.facts, f.rationale_roots, f.edges
                        )?;
                        let decls: Vec<String> = f
                            .declarations
                            .iter()
                            .map(|d| {
                                let ev = if d.event { " event" } else { "" };
                                format!("{}/{} {}{ev}", d.name, d.arity, d.category)
                            })
                            .collect();
                        writeln!(s, "     predicates: {}", decls.join(", "))?;
                        writeln!(s, "     entities: {}", f.entities.join(", "))?;
                        for w in &f.warnings {
                            writeln!(s, "     warning: {w}")?;
                        }
                    }
                }
            }
            s
        }
    };
    Ok(Outcome {
        stdout,
        warnings: Vec::new(),
        code,
    })
}

fn match_pair(
    ctx: &Ctx,
    base_path: &Path,
    target_path: &Path,
    vocabulary: Option<&Path>,
) -> Result<Outcome> {
    let parse = parse_config(vocabulary)?;
    let base = load_experience(base_path, &parse)?;
    let target = load_experience(target_path, &parse)?;
    let mut gmaps = analyze(&base, &target, &ctx.config.sme())?;
    if vocabulary.is_some() {
        let mut events = parse.vocabulary.clone();
        events.absorb(base.declarations());
        for g in &mut gmaps {
            g.inferences = filter_hypotheses(std::mem::take(&mut g.inferences), &target, &events);
        }
    }
    let report = analogy_report(&gmaps, &base, &target);
    let json = to_json(&report)?;
    let dot = match gmaps.first() {
        Some(g) => gmap_dot(g, &target),
        None => augmentation_dot(&target, &target),
    };
    ctx.write("analogy.json", &json)?;
    ctx.write("analogy.dot", &dot)?;
    let stdout = match ctx.format {
        Format::Json => json,
        Format::Dot => dot,
        Format::Text => {
            let mut s = format!(
                "{} -> {}: {} gmaps\n",
                report.base,
                report.target,
                report.gmaps.len()
            );
            for (i, g) in report.gmaps.iter().enumerate() {
                let bindings: Vec<String> = g
                    .bindings
                    .iter()
                    .map(|b| format!("{}->{}", b.base, b.target))
                    .collect();
                writeln!(
                    s,
                    "gmap {} score {:.3}: {}",
                    i + 1,
                    g.score,
                    bindings.join(" ")
                )?;
                if i == 0 {
                    for h in &g.inferences {
                        writeln!(s, "  {:<28} {}", status_label(h.status), h.expression)?;
                    }
                }
            }
            s
        }
    };
    Ok(Outcome::ok(stdout))
}

fn status_label(s: HypothesisStatus) -> &'static str {
    match s {
        HypothesisStatus::Kept => "kept",
        HypothesisStatus::DiscardedUnobservedEvent => "discarded (unobserved event)",
        HypothesisStatus::DiscardedDuplicate => "discarded (duplicate)",
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderReport {
    pub schema: String,
    pub target: String,
    pub weights: Vec<WeightRecord>,
    pub order: Vec<String>,
}

fn weights_table(weights: &[WeightRecord]) -> String {
    let mut s = format!(
        "{:<16} {:>10} {:>6} {:>8}\n",
        "base", "similarity", "edges", "weight"
    );
    for w in weights {
        let _ = writeln!(
            s,
            "{:<16} {:>10.4} {:>6} {:>8.3}",
            w.base, w.similarity, w.edges, w.weight
        );
    }
    s
}

fn order(ctx: &Ctx, manifest: &Path) -> Result<Outcome> {
    ctx.no_dot("order")?;
    let m = Manifest::load(manifest)?;
    let library = BaseLibrary::new(m.bases)?;
    let weights: Vec<WeightRecord> = order_bases(&library, &m.target)
        .iter()
        .map(WeightRecord::from)
        .collect();
    let report = OrderReport {
        schema: ORDER_SCHEMA.to_string(),
        target: m.target.id().to_string(),
        order: weights.iter().map(|w| w.base.clone()).collect(),
        weights,
    };
    let json = to_json(&report)?;
    ctx.write("order.json", &json)?;
    let stdout = match ctx.format {
        Format::Json => json,
        _ => format!(
            "{}order: {}\n",
            weights_table(&report.weights),
            report.order.join(" ")
        ),
    };
    Ok(Outcome::ok(stdout))
}

fn synthesize_cmd(ctx: &Ctx, manifest: &Path) -> Result<Outcome> {
    let m = Manifest::load(manifest)?;
    let cfg = &ctx.config;
    let config = SynthesisConfig {
        sme: SmeConfig {
            weights: m.manifest.weights.unwrap_or(cfg.sme.weights),
            merge_cap: m.manifest.merge_cap.unwrap_or(cfg.sme.merge_cap),
        },
        max_passes: m.manifest.max_passes.unwrap_or(cfg.synthesis.max_passes),
        use_heuristic: m.manifest.heuristic,
        events: m.events.clone(),
    };
    let library = BaseLibrary::new(m.bases)?;
    let res = synthesize(&library, &m.target, &config)?;
    let report = synthesis_report(&res, &m.target, config.use_heuristic, |id| {
        library.get(id).cloned()
    });
    let json = to_json(&report)?;
    let dot = augmentation_dot(&m.target, &res.experience);
    let id = m.target.id();
    ctx.write("synthesis.json", &json)?;
    ctx.write(
        &format!("{id}_final.mt"),
        &canonical_serialize(&res.experience),
    )?;
    ctx.write("synthesis.dot", &dot)?;
    let stdout = match ctx.format {
        Format::Json => json,
        Format::Dot => dot,
        Format::Text => {
            let how = if report.heuristic {
                "heuristic"
            } else {
                "manifest"
            };
            let mut s = format!("ordering ({how}): {}\n", report.ordering_used.join(" "));
            s.push_str(&weights_table(&report.weights));
            for it in &res.iterations {
                writeln!(
                    s,
                    "pass {} {:<16} score {:>7.3}  kept {}  discarded {}",
                    it.pass,
                    it.base,
                    it.gmap_score,
                    it.kept().count(),
                    it.discarded().count()
                )?;
            }
            writeln!(
                s,
                "{} passes, {} -> {} facts",
                res.passes,
                m.target.facts().len(),
                res.experience.facts().len()
            )?;
            s
        }
    };
    Ok(Outcome::ok(stdout))
}

/// A built-in scenario name or a path to a scenario TOML file.
pub fn load_scenario(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "toml") {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {spec}"))?;
        return Scenario::from_toml(&text).with_context(|| spec.to_string());
    }
    Ok(Scenario::builtin(spec)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyFile {
    pub schema: String,
    pub late_success_rate: f64,
    pub greedy_success_rate: f64,
    pub converged: bool,
    pub policy: Policy,
}

fn trained(ctx: &Ctx, scenario: &Scenario, seed: u64) -> Result<PolicyFile> {
    let learn = &ctx.config.learn;
    let (policy, stats) = train_policy(scenario, &learn.params(), seed)?;
    let greedy = RolloutOptions {
        epsilon: 0.0,
        step_cap: None,
    };
    let rate = success_rate(
        scenario,
        &policy,
        learn.check_episodes,
        ctx.config.evaluate.first_seed,
        &greedy,
    )?;
    Ok(PolicyFile {
        schema: POLICY_SCHEMA.to_string(),
        late_success_rate: stats.late_success_rate,
        greedy_success_rate: rate,
        converged: rate >= learn.success_threshold,
        policy,
    })
}

fn convergence_warning(ctx: &Ctx, name: &str, pf: &PolicyFile) -> Option<String> {
    (!pf.converged).then(|| {
        format!(
            "{name}: greedy success {:.2} is below {:.2}; training did not converge",
            pf.greedy_success_rate, ctx.config.learn.success_threshold
        )
    })
}

fn train(ctx: &Ctx, spec: &str) -> Result<Outcome> {
    ctx.no_dot("train")?;
    let scenario = load_scenario(spec)?;
    let seed = ctx.seed.unwrap_or(ctx.config.learn.seed);
    let pf = trained(ctx, &scenario, seed)?;
    let json = to_json(&pf)?;
    ctx.write(&format!("{}.policy.json", scenario.name), &json)?;
    let stdout = match ctx.format {
        Format::Json => json,
        _ => format!(
            "{}: seed {seed}, {} episodes, {} states, greedy success {:.2}\n",
            scenario.name,
            pf.policy.episodes,
            pf.policy.table.len(),
            pf.greedy_success_rate
        ),
    };
    Ok(Outcome {
        stdout,
        warnings: convergence_warning(ctx, &scenario.name, &pf)
            .into_iter()
            .collect(),
        code: EXIT_OK,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub schema: String,
    #[serde(flatten)]
    pub trace: ObservationTrace,
}

/// A chronology as a micro-theory, one event per fact.
pub fn chronology_micro_theory(title: &str, c: &Chronology) -> String {
    format!("; {title}\n{}", c.to_micro_theory())
}

fn events_line(c: &Chronology) -> String {
    c.events
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn simulate(
    ctx: &Ctx,
    spec: &str,
    policy: Option<&Path>,
    episodes: Option<usize>,
) -> Result<Outcome> {
    ctx.no_dot("simulate")?;
    let scenario = load_scenario(spec)?;
    let mut warnings = Vec::new();
    let policy = match policy {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let pf: PolicyFile = serde_json::from_str(&text)
                .with_context(|| format!("invalid policy file {}", p.display()))?;
            pf.policy.check(&scenario)?;
            pf.policy
        }
        None => {
            let pf = trained(ctx, &scenario, ctx.config.learn.seed)?;
            warnings.extend(convergence_warning(ctx, &scenario.name, &pf));
            pf.policy
        }
    };
    let observe = &ctx.config.observe;
    let first = ctx.seed.unwrap_or(observe.first_seed);
    let mut files = Vec::new();
    let mut text = String::new();
    for i in 0..episodes.unwrap_or(observe.rollouts) {
        let seed = first.wrapping_add(i as u64);
        let trace = rollout(&scenario, &policy, seed, &observe.rollout_options())?;
        let chron = extract_chronology(&trace);
        let stem = format!("{}_{seed}", scenario.name);
        let title = format!("chronology of {} rollout {seed}", scenario.name);
        ctx.write(
            &format!("{stem}.mt"),
            &chronology_micro_theory(&title, &chron),
        )?;
        let tf = TraceFile {
            schema: TRACE_SCHEMA.to_string(),
            trace,
        };
        ctx.write(&format!("{stem}.trace.json"), &to_json(&tf)?)?;
        let outcome = match tf.trace.outcome {
            Status::Goal => "goal",
            Status::Failure => "failure",
            Status::Running if tf.trace.truncated => "truncated",
            Status::Running => "stopped",
        };
        writeln!(
            text,
            "seed {seed}: {outcome} after {} actions: {}",
            tf.trace.actions.len(),
            events_line(&chron)
        )?;
        files.push(tf);
    }
    let stdout = match ctx.format {
        Format::Json => to_json(&files)?,
        _ => text,
    };
    Ok(Outcome {
        stdout,
        warnings,
        code: EXIT_OK,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentativeRecord {
    pub support: usize,
    pub events: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChronicleReport {
    pub schema: String,
    pub threshold: f64,
    pub traces: usize,
    pub representatives: Vec<RepresentativeRecord>,
}

fn chronicle(ctx: &Ctx, paths: &[PathBuf], threshold: Option<f64>) -> Result<Outcome> {
    ctx.no_dot("chronicle")?;
    let threshold = threshold.unwrap_or(ctx.config.observe.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        bail!("threshold must lie in [0, 1], got {threshold}");
    }
    let mut chrons = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
        let tf: TraceFile = serde_json::from_str(&text)
            .with_context(|| format!("invalid trace file {}", p.display()))?;
        chrons.push(extract_chronology(&tf.trace));
    }
    let reps = representatives(&chrons, threshold);
    for (i, r) in reps.iter().enumerate() {
        let title = format!(
            "representative chronology {} (support {})",
            i + 1,
            r.support
        );
        ctx.write(
            &format!("representative_{}.mt", i + 1),
            &chronology_micro_theory(&title, r),
        )?;
    }
    let report = ChronicleReport {
        schema: CHRONICLE_SCHEMA.to_string(),
        threshold,
        traces: chrons.len(),
        representatives: reps
            .iter()
            .map(|r| RepresentativeRecord {
                support: r.support,
                events: r.events.iter().map(ToString::to_string).collect(),
            })
            .collect(),
    };
    let json = to_json(&report)?;
    ctx.write("chronicle.json", &json)?;
    let stdout = match ctx.format {
        Format::Json => json,
        _ => {
            let mut s = format!(
                "{} representatives from {} traces\n",
                reps.len(),
                chrons.len()
            );
            for r in &reps {
                writeln!(s, "  [{}] {}", r.support, events_line(r))?;
            }
            s
        }
    };
    Ok(Outcome::ok(stdout))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorSummary {
    pub behavior: String,
    pub greedy_success_rate: f64,
    pub representatives: Vec<RepresentativeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub schema: String,
    pub behaviors: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub diagonal_minimum_rows: usize,
    pub summaries: Vec<BehaviorSummary>,
}

fn evaluate(ctx: &Ctx) -> Result<Outcome> {
    ctx.no_dot("evaluate")?;
    let cfg = &ctx.config;
    let seed = ctx.seed.unwrap_or(cfg.learn.seed);
    let opts = cfg.observe.rollout_options();
    let mut reps = Vec::new();
    let mut eval = Vec::new();
    let mut summaries = Vec::new();
    let mut warnings = Vec::new();
    for name in BUILTIN {
        let scenario = Scenario::builtin(name)?;
        let pf = trained(ctx, &scenario, seed)?;
        warnings.extend(convergence_warning(ctx, name, &pf));
        let observe = |first: u64, n: usize| -> Result<Vec<ObservationTrace>> {
            (0..n)
                .map(|i| {
                    Ok(rollout(
                        &scenario,
                        &pf.policy,
                        first.wrapping_add(i as u64),
                        &opts,
                    )?)
                })
                .collect()
        };
        let chrons: Vec<Chronology> = observe(cfg.observe.first_seed, cfg.observe.rollouts)?
            .iter()
            .map(extract_chronology)
            .collect();
        let rs = representatives(&chrons, cfg.observe.threshold);
        summaries.push(BehaviorSummary {
            behavior: name.to_string(),
            greedy_success_rate: pf.greedy_success_rate,
            representatives: rs
                .iter()
                .map(|r| RepresentativeRecord {
                    support: r.support,
                    events: r.events.iter().map(ToString::to_string).collect(),
                })
                .collect(),
        });
        reps.push((name.to_string(), rs));
        eval.push((
            name.to_string(),
            observe(cfg.evaluate.first_seed, cfg.evaluate.traces)?,
        ));
    }
    let m = confusion_matrix(&reps, &eval)?;
    let report = ConfusionReport {
        schema: CONFUSION_SCHEMA.to_string(),
        behaviors: m.behaviors.clone(),
        values: m.values.clone(),
        diagonal_minimum_rows: m.diagonal_minimum_rows(),
        summaries,
    };
    let json = to_json(&report)?;
    let text = format!(
        "{m}diagonal is the row minimum in {} of {} rows\n",
        report.diagonal_minimum_rows,
        report.behaviors.len()
    );
    ctx.write("confusion.json", &json)?;
    ctx.write("confusion.txt", &text)?;
    let stdout = match ctx.format {
        Format::Json => json,
        _ => text,
    };
    Ok(Outcome {
        stdout,
        warnings,
        code: EXIT_OK,
    })
}

fn export_dot(
    ctx: &Ctx,
    path: &Path,
    original: Option<&Path>,
    vocabulary: Option<&Path>,
) -> Result<Outcome> {
    if ctx.format == Format::Json {
        bail!("`export-dot` has no JSON output");
    }
    let parse = parse_config(vocabulary)?;
    let current = load_experience(path, &parse)?;
    let dot = match original {
        Some(o) => augmentation_dot(&load_experience(o, &parse)?, &current),
        None => to_graph(&current).to_dot(current.id(), &BTreeSet::new()),
    };
    ctx.write(&format!("{}.dot", experience_id(path)), &dot)?;
    Ok(Outcome::ok(dot))
}
