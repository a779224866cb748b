use std::fs;
use std::path::{Path, PathBuf};

use landlord::advgen::{self, AdversarialSequence};
use landlord::analysis::{self, Algorithm, LemmaRoute, LooseParams, OptSource, TauKind};
use landlord::opt::{self, OptMove};
use landlord::rational::{self, format_rational, parse_rational, Rational};
use landlord::{EvictionSelector, Greediness, LandlordPolicy, RequestSequence};
use clap::ValueEnum;
use thiserror::Error;

use crate::args::{
    AlgArg, AuditArgs, BoundsArgs, Command, GenArgs, GreedinessArg, OptArgs, PolicyArgs, RunArgs,
    SelectorArg, SweepArgs,
};
use crate::report::ExperimentReport;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] landlord::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// What a command produced: text for stdout (if not written to a file) and
/// whether a checked invariant failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: Option<String>,
    pub violation: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violation {
            1
        } else {
            0
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let (report, violation, format, out) = match cmd {
        Command::Run(a) => {
            let seq = read_trace(&a.trace)?;
            let report = cmd_run(&seq, a)?;
            (report, false, a.output.format, a.output.out.clone())
        }
        Command::Sweep(a) => {
            let seq = read_trace(&a.trace)?;
            (cmd_sweep(&seq, a)?, false, a.output.format, a.output.out.clone())
        }
        Command::Opt(a) => {
            let seq = read_trace(&a.trace)?;
            (cmd_opt(&seq, a)?, false, a.output.format, a.output.out.clone())
        }
        Command::Audit(a) => {
            let seq = read_trace(&a.trace)?;
            let (report, ok) = cmd_audit(&seq, a)?;
            (report, !ok, a.output.format, a.output.out.clone())
        }
        Command::Gen(a) => {
            let (report, seq, ok) = cmd_gen(a)?;
            if let Some(path) = &a.out {
                write_file(path, &landlord::serialize_trace(&seq.trace().to_sequence()))?;
            }
            (report, !ok, a.format, None)
        }
        Command::Bounds(a) => (cmd_bounds(a)?, false, a.output.format, a.output.out.clone()),
    };
    let text = report.render(format);
    let stdout = match out {
        Some(path) => {
            write_file(&path, &text)?;
            None
        }
        None => Some(text),
    };
    Ok(Outcome { stdout, violation })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_trace(path: &Path) -> Result<RequestSequence, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(landlord::parse_trace(&text)?)
}

fn parse_q(flag: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Usage(format!("--{flag}: {}", e.0)))
}

pub fn policy_from(args: &PolicyArgs) -> Result<LandlordPolicy, CliError> {
    let lambda = parse_q("lambda", &args.lambda)?;
    let selector = match args.selector {
        SelectorArg::All => EvictionSelector::AllZero,
        SelectorArg::Lru => EvictionSelector::LruOrder,
        SelectorArg::Fifo => EvictionSelector::FifoOrder,
        SelectorArg::Pessimal => EvictionSelector::PessimalNextRequest,
    };
    let greediness = match args.greediness {
        GreedinessArg::AllZero => Greediness::EvictAllZero,
        GreedinessArg::UntilRoom => Greediness::EvictUntilRoom,
    };
    LandlordPolicy::new(lambda, selector, greediness).map_err(|e| CliError::Usage(e.to_string()))
}

fn record_policy(report: &mut ExperimentReport, args: &PolicyArgs) {
    report
        .param("lambda", &args.lambda)
        .param("selector", value_name(args.selector))
        .param("greediness", value_name(args.greediness));
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn record_trace(report: &mut ExperimentReport, path: &Path) {
    report.param("trace", path.display());
}

fn join_ids<'a>(ids: impl IntoIterator<Item = &'a landlord::FileId>) -> String {
    ids.into_iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" ")
}

pub fn cmd_run(seq: &RequestSequence, args: &RunArgs) -> Result<ExperimentReport, CliError> {
    let k = args.cache_size;
    let policy = policy_from(&args.policy)?;
    let run = landlord::run_trace(seq, k, &policy)?;
    let mut report = ExperimentReport::new(
        "run",
        &["index", "id", "size", "cost", "hit", "paid", "rent_rounds", "evicted", "credit_after"],
    );
    record_trace(&mut report, &args.trace);
    report.param("cache_size", k);
    record_policy(&mut report, &args.policy);
    for (i, (f, o)) in seq.iter().zip(&run.outcomes).enumerate() {
        report.push_row(vec![
            i.to_string(),
            f.id.to_string(),
            f.size.to_string(),
            format_rational(&f.cost),
            o.was_hit.to_string(),
            format_rational(&o.retrieval_cost_paid),
            o.rent_rounds.len().to_string(),
            join_ids(&o.evicted),
            format_rational(&o.credit_after),
        ]);
    }
    report.summarize("requests", seq.len());
    report.summarize("faults", run.fault_count());
    report.summarize("total_cost", format_rational(&run.total_cost));
    Ok(report)
}

fn algorithm_from(args: &SweepArgs) -> Result<Algorithm, CliError> {
    Ok(match args.alg {
        AlgArg::Landlord => Algorithm::Landlord(policy_from(&args.policy)?),
        AlgArg::Lru => Algorithm::Lru,
        AlgArg::Fifo => Algorithm::Fifo,
        AlgArg::Fwf => Algorithm::Fwf,
        AlgArg::Opt => Algorithm::Opt,
        AlgArg::Marking => match args.seed {
            Some(seed) => Algorithm::Marking { seed },
            None => return Err(CliError::Usage("--seed is required for --alg marking".into())),
        },
    })
}

fn ratio_text(alg: &Rational, opt: &Rational) -> String {
    let zero = rational::zero();
    if *opt != zero {
        format_rational(&(alg / opt))
    } else if *alg == zero {
        "undefined".into()
    } else {
        "inf".into()
    }
}

pub fn cmd_sweep(seq: &RequestSequence, args: &SweepArgs) -> Result<ExperimentReport, CliError> {
    let epsilon = parse_q("epsilon", &args.epsilon)?;
    let delta = parse_q("delta", &args.delta)?;
    let alg = algorithm_from(args)?;
    let (eps_f, delta_f) = (rational::to_f64(&epsilon), rational::to_f64(&delta));
    let c = match &args.c {
        Some(text) => parse_q("c", text)?,
        None => {
            let c = match alg {
                Algorithm::Marking { .. } => analysis::bound_c_marking(eps_f, delta_f),
                _ => analysis::bound_c_deterministic(eps_f, delta_f),
            }
            .map_err(|e| CliError::Usage(e.to_string()))?;
            rational::from_f64(c).ok_or_else(|| CliError::Usage(format!("c = {c} is not finite")))?
        }
    };
    let params = LooseParams::new(epsilon, delta.clone(), args.range, c.clone())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let result = analysis::evaluate_loose(seq, &params, &alg, &OptSource::Exact)?;

    let mut report = ExperimentReport::new(
        "sweep",
        &["k", "alg_cost", "opt_cost", "ratio", "total_request_cost", "bad"],
    );
    record_trace(&mut report, &args.trace);
    report
        .param("range", args.range)
        .param("epsilon", &args.epsilon)
        .param("delta", &args.delta)
        .param("alg", alg.name());
    if let Algorithm::Landlord(_) = alg {
        record_policy(&mut report, &args.policy);
    }
    if let Algorithm::Marking { seed } = alg {
        report.metadata.seed = Some(seed);
    }
    let total = format_rational(&result.total_request_cost);
    for row in &result.rows {
        let cells = match &row.costs {
            Some(kc) => vec![
                row.k.to_string(),
                format_rational(&kc.alg_cost),
                format_rational(&kc.opt_cost),
                ratio_text(&kc.alg_cost, &kc.opt_cost),
                total.clone(),
                row.bad.to_string(),
            ],
            None => vec![
                row.k.to_string(),
                String::new(),
                String::new(),
                String::new(),
                total.clone(),
                "inapplicable".into(),
            ],
        };
        report.push_row(cells);
    }
    report.summarize("c", format_rational(&c));
    report.summarize("c_approx", rational::to_f64(&c));
    report.summarize("bad_count", result.bad_ks.len());
    report.summarize("inapplicable_count", result.inapplicable.len());
    report.summarize("bad_fraction", format_rational(&result.bad_fraction));
    report.summarize("below_delta", result.below(&delta));
    Ok(report)
}

pub fn cmd_opt(seq: &RequestSequence, args: &OptArgs) -> Result<ExperimentReport, CliError> {
    let k = args.cache_size;
    let mut report = ExperimentReport::new("opt", &["index", "id", "action", "evicted"]);
    record_trace(&mut report, &args.trace);
    report.param("cache_size", k);

    let exhaustive = opt::opt_cost(seq, k);
    let (cost, witness, method) = match exhaustive {
        Ok(r) => (r.min_cost, Some(r.witness), "exhaustive"),
        Err(landlord::Error::InstanceTooLarge(_)) if seq.is_paging() => {
            (opt::opt_cost_fast_paging(seq, k)?, None, "belady")
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(witness) = &witness {
        for (i, (f, mv)) in seq.iter().zip(witness).enumerate() {
            let (action, evicted) = match mv {
                OptMove::Hit => ("hit", String::new()),
                OptMove::Miss { evicted } => ("miss", join_ids(evicted)),
            };
            report.push_row(vec![i.to_string(), f.id.to_string(), action.into(), evicted]);
        }
    }
    report.summarize("method", method);
    report.summarize("min_cost", format_rational(&cost));
    Ok(report)
}

/// Returns the report and whether every check passed.
pub fn cmd_audit(seq: &RequestSequence, args: &AuditArgs) -> Result<(ExperimentReport, bool), CliError> {
    let k = args.cache_size;
    let h = args.opt_size.unwrap_or(k);
    let policy = policy_from(&args.policy)?;
    let audit = analysis::audit_potential(seq, h, k, &policy)?;
    let mut report = ExperimentReport::new(
        "audit",
        &["request", "event", "phi_before", "phi_after", "change", "bound", "satisfied"],
    );
    record_trace(&mut report, &args.trace);
    report.param("cache_size", k).param("opt_size", h);
    record_policy(&mut report, &args.policy);
    for s in &audit.steps {
        report.push_row(vec![
            s.request.to_string(),
            s.event.to_string(),
            format_rational(&s.phi_before),
            format_rational(&s.phi_after),
            format_rational(&s.change()),
            format_rational(&s.bound),
            s.satisfied.to_string(),
        ]);
    }
    let violations = audit.violations().count();
    let bound_holds = audit.competitive_bound_holds();
    report.summarize("steps", audit.steps.len());
    report.summarize("violations", violations);
    report.summarize("mirror_errors", audit.mirror_errors.len());
    for (i, e) in audit.mirror_errors.iter().enumerate() {
        report.summarize(&format!("mirror_error.{i}"), e);
    }
    report.summarize("landlord_cost", format_rational(&audit.landlord_cost));
    report.summarize("opt_cost", format_rational(&audit.opt_cost));
    report.summarize("competitive_bound_holds", bound_holds);
    let ok = violations == 0 && audit.mirror_errors.is_empty() && bound_holds;
    Ok((report, ok))
}

/// Returns the report, the sequence and whether verification passed.
pub fn cmd_gen(args: &GenArgs) -> Result<(ExperimentReport, AdversarialSequence, bool), CliError> {
    let mut report = ExperimentReport::new(
        "gen",
        &["level", "k", "period", "fwf_rate", "fwf_expected", "lru_rate", "lru_expected"],
    );
    let seq = match &args.levels {
        Some(levels) => {
            report.param(
                "levels",
                levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
            );
            advgen::build_from_levels(levels).map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => {
            let (Some(e), Some(d)) = (&args.epsilon, &args.delta) else {
                return Err(CliError::Usage(
                    "gen needs --epsilon and --delta, or --levels".into(),
                ));
            };
            let epsilon = parse_q("epsilon", e)?;
            let delta = parse_q("delta", d)?;
            let n = match args.range {
                Some(n) => n,
                None => advgen::minimal_n(&epsilon, &delta)?,
            };
            report.param("epsilon", e).param("delta", d).param("range", n);
            advgen::build_sequence(&epsilon, &delta, n)?
        }
    };
    if let Some(path) = &args.out {
        report.param("out", path.display());
    }

    let structure = advgen::verify_structure(&seq);
    let rates = if args.measure {
        Some(advgen::measure_fault_rates(&seq)?)
    } else {
        None
    };
    for (i, &k) in seq.k_levels.iter().enumerate() {
        let mut row = vec![i.to_string(), k.to_string(), seq.period(i).to_string()];
        match rates.as_ref().and_then(|r| r.levels.iter().find(|l| l.level == i)) {
            Some(l) => row.extend([
                format_rational(&l.fwf_rate),
                format_rational(&l.fwf_expected),
                format_rational(&l.lru_steady_rate),
                format_rational(&l.lru_expected),
            ]),
            None => row.extend(std::iter::repeat(String::new()).take(4)),
        }
        report.push_row(row);
    }

    report.summarize("length", seq.items.len());
    report.summarize("distinct_items", seq.level_of_item.len());
    report.summarize("k0", seq.k0());
    if let Some(p) = &seq.params {
        report.summarize("c", p.c);
        report.summarize("delta_n", advgen::delta_n(p));
    }
    report.summarize("violations", structure.violations.len());
    for (i, v) in structure.violations.iter().enumerate() {
        report.summarize(&format!("violation.{i}"), format!("{v:?}"));
    }
    if let Some(r) = &rates {
        report.summarize("sizes_measured", r.sizes.len());
        report.summarize("fwf_bad_sizes", r.fwf_bad_count());
        report.summarize("pessimal_bad_sizes", r.pessimal_bad_count());
    }
    let ok = structure.is_clean();
    Ok((report, seq, ok))
}

fn route_text(route: &LemmaRoute) -> (String, String) {
    match route {
        LemmaRoute::Applied { b, c } => (b.to_string(), c.to_string()),
        LemmaRoute::Trivial { b } => (b.to_string(), "trivial".into()),
    }
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<ExperimentReport, CliError> {
    let epsilon = rational::to_f64(&parse_q("epsilon", &args.epsilon)?);
    let delta = rational::to_f64(&parse_q("delta", &args.delta)?);
    let (alpha, beta) = match (args.alpha, args.beta) {
        (Some(a), Some(b)) => (a, b),
        _ => (analysis::MARKING_ALPHA, analysis::MARKING_BETA),
    };
    let usage = |e: landlord::Error| CliError::Usage(e.to_string());

    let mut report = ExperimentReport::new("bounds", &["quantity", "b", "value"]);
    report
        .param("epsilon", &args.epsilon)
        .param("delta", &args.delta)
        .param("alpha", alpha)
        .param("beta", beta);
    let det = analysis::bound_c_deterministic(epsilon, delta).map_err(usage)?;
    let rnd = analysis::bound_c_randomized(alpha, beta, epsilon, delta).map_err(usage)?;
    report.push_row(vec!["deterministic".into(), String::new(), det.to_string()]);
    report.push_row(vec!["randomized".into(), String::new(), rnd.to_string()]);
    let lower = match analysis::lower_bound_c(epsilon, delta) {
        Ok(v) => v.to_string(),
        Err(_) => "out of domain".into(),
    };
    report.push_row(vec!["lower_bound".into(), String::new(), lower]);

    if let Some(n) = args.range {
        report.param("range", n);
        let routes = [
            ("lemma_deterministic", TauKind::RatioKOverKmh1),
            ("lemma_randomized", TauKind::LogForm { alpha, beta }),
        ];
        for (name, tau) in routes {
            let route = analysis::route_through_lemma(tau, n, epsilon, delta).map_err(usage)?;
            let (b, c) = route_text(&route);
            report.push_row(vec![name.into(), b, c]);
        }
    }
    Ok(report)
}
