//! `narayana`: command-line front end for the Narayana / Brocard checks.
//!
//! Every run produces one report (command, echoed parameters, result,
//! discrepancies, elapsed time, version) in plain text, JSON or CSV. Exit
//! status is 0 when clean, 1 when discrepancies or unexpected solutions
//! turn up, and 2 on usage errors.

mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use narayana_core::brocard::{BoundReading, SearchOutcome};
use narayana_core::laws::{errata, MIN_CAP};
use narayana_core::narayana::{narayana_window_mod, Modular};
use narayana_core::padic::vp_factorial_bounds;
use narayana_core::{
    certify_nonsolution, check_divisibility_classes, check_growth_bounds, derive_bounds, law_eval,
    narayana_fast, narayana_window, search_general, search_narayana, v3_oracle, verify_congruences,
    verify_law, vp, vp_factorial, BigNat, CongruenceFamily, LawVariant, Target, ValuationLaw,
};
use serde_json::{json, Value};

use report::{Format, Outcome, RunReport, Table};

/// Solutions of `m! + 1 = u^2` known for small `m`.
const KNOWN_BROCARD_M: [u64; 3] = [4, 5, 7];

#[derive(Parser)]
#[command(name = "narayana", version)]
#[command(about = "Narayana sequence valuations and the Brocard equation m! + 1 = u^2")]
struct Cli {
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Reserved; every computation is deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print nothing; the exit status carries the verdict
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(name = "a")]
    A,
    #[value(name = "a-1")]
    AMinus1,
    #[value(name = "a+1")]
    APlus1,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::A => Target::A,
            TargetArg::AMinus1 => Target::AMinus1,
            TargetArg::APlus1 => Target::APlus1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LawArg {
    Literal,
    Corrected,
}

impl From<LawArg> for LawVariant {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Literal => LawVariant::Literal,
            LawArg::Corrected => LawVariant::Corrected,
        }
    }
}

/// The two congruence families, by their conventional numbers.
#[derive(Clone, Copy, ValueEnum)]
enum PropArg {
    /// modulo 3^(n+3)
    #[value(name = "3.3", alias = "shallow")]
    Shallow,
    /// modulo 3^(n+4)
    #[value(name = "3.4", alias = "deep")]
    Deep,
}

impl From<PropArg> for CongruenceFamily {
    fn from(p: PropArg) -> Self {
        match p {
            PropArg::Shallow => CongruenceFamily::Shallow,
            PropArg::Deep => CongruenceFamily::Deep,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Terms a(from..=to), optionally reduced mod Q
    Seq {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long = "mod")]
        modulus: Option<u64>,
        /// Recompute every term independently by index doubling
        #[arg(long, conflicts_with = "modulus")]
        fast: bool,
    },
    /// 3-adic valuation of a(i), a(i)-1 or a(i)+1 from the residue laws
    Val {
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long)]
        index: u64,
        #[arg(long, value_enum, default_value_t = LawArg::Corrected)]
        law: LawArg,
        /// Also compute the value by brute force and compare
        #[arg(long)]
        oracle: bool,
    },
    /// Compare a residue law with the oracle on 1..=max
    VerifyLaws {
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long)]
        max: u64,
        #[arg(long, value_enum)]
        table: LawArg,
        /// Starting 3-adic precision of the oracle
        #[arg(long, default_value_t = MIN_CAP)]
        cap: u32,
    },
    /// Check a congruence family for 1 <= s <= s-max and n up to n-max
    VerifyCongruences {
        #[arg(long, value_enum)]
        prop: PropArg,
        #[arg(long)]
        s_max: u64,
        #[arg(long)]
        n_max: u32,
    },
    /// Divisibility of a(i) by 9 or 3 in the classes 16, 21 and 7 mod 24
    Corollary {
        #[arg(long)]
        max: u64,
    },
    /// Certify alpha^(n-3) <= a(n) <= alpha^(n-1) for 1 <= n <= max
    Growth {
        #[arg(long)]
        max: u64,
    },
    /// Derive m_max and n_max from the valuation inequality
    Bounds,
    /// Search 4 <= n <= n-max for a(n)^2 - 1 = m!
    Search {
        #[arg(long)]
        n_max: u64,
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Search 1 <= m <= m-max for m! + 1 a perfect square
    SearchGeneral {
        #[arg(long)]
        m_max: u64,
    },
    /// Literal versus corrected residue tables against the oracle
    Errata {
        #[arg(long, default_value_t = 100_000)]
        max: u64,
    },
    /// p-adic valuation of a decimal integer
    Vp {
        #[arg(long)]
        value: String,
        #[arg(long, default_value_t = 3)]
        prime: u64,
    },
    /// Legendre valuation of m! with its rational sandwich
    FactorialVal {
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 3)]
        prime: u64,
    },
    /// Non-solution certificate for one index n >= 4
    Certify {
        #[arg(long)]
        n: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Seq { .. } => "seq",
            Command::Val { .. } => "val",
            Command::VerifyLaws { .. } => "verify-laws",
            Command::VerifyCongruences { .. } => "verify-congruences",
            Command::Corollary { .. } => "corollary",
            Command::Growth { .. } => "growth",
            Command::Bounds => "bounds",
            Command::Search { .. } => "search",
            Command::SearchGeneral { .. } => "search-general",
            Command::Errata { .. } => "errata",
            Command::Vp { .. } => "vp",
            Command::FactorialVal { .. } => "factorial-val",
            Command::Certify { .. } => "certify",
        }
    }
}

/// Bad input detected after parsing; exits with status 2.
struct UsageError(String);

impl From<narayana_core::error::Error> for UsageError {
    fn from(e: narayana_core::error::Error) -> Self {
        UsageError(e.to_string())
    }
}

type Run = Result<Outcome, UsageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    let start = Instant::now();
    let outcome = match run(cli.command) {
        Ok(o) => o,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let report = RunReport::new(command, outcome, start.elapsed());
    if !cli.quiet {
        if let Err(e) = report.emit(cli.format, &mut std::io::stdout().lock()) {
            eprintln!("error: writing report: {e}");
            return ExitCode::from(2);
        }
    }
    if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(command: Command) -> Run {
    match command {
        Command::Seq {
            from,
            to,
            modulus,
            fast,
        } => seq(from, to, modulus, fast),
        Command::Val {
            target,
            index,
            law,
            oracle,
        } => val(target.into(), index, law.into(), oracle),
        Command::VerifyLaws {
            target,
            max,
            table,
            cap,
        } => verify_laws(target.into(), max, table.into(), cap),
        Command::VerifyCongruences { prop, s_max, n_max } => congruences(prop.into(), s_max, n_max),
        Command::Corollary { max } => corollary(max),
        Command::Growth { max } => growth(max),
        Command::Bounds => Ok(bounds()),
        Command::Search { n_max, jobs } => search(n_max, jobs),
        Command::SearchGeneral { m_max } => general(m_max),
        Command::Errata { max } => errata_suite(max),
        Command::Vp { value, prime } => valuation(&value, prime),
        Command::FactorialVal { m, prime } => factorial_val(m, prime),
        Command::Certify { n } => certify(n),
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn seq(from: u64, to: u64, modulus: Option<u64>, fast: bool) -> Run {
    if from > to {
        return Err(UsageError(format!("--from {from} exceeds --to {to}")));
    }
    let terms: Vec<String> = match modulus {
        Some(q) => {
            let arith = Modular::new(q as u128)?;
            let mut w = narayana_window_mod(from, q as u128)?;
            (from..=to)
                .map(|_| {
                    let v = w.values[0].to_string();
                    w.advance_with(&arith);
                    v
                })
                .collect()
        }
        None if fast => (from..=to).map(|n| narayana_fast(n).to_string()).collect(),
        None => {
            let mut w = narayana_window(from);
            (from..=to)
                .map(|_| {
                    let v = w.first().to_string();
                    w.advance();
                    v
                })
                .collect()
        }
    };
    let table = Table::new(
        ["index", "value"],
        terms
            .iter()
            .zip(from..)
            .map(|(v, n)| vec![n.to_string(), v.clone()]),
    );
    let plain = terms.join(",");
    Ok(Outcome {
        params: json!({ "from": from, "to": to, "mod": modulus, "fast": fast }),
        result: json!({ "terms": terms }),
        discrepancies: vec![],
        table,
        plain,
    })
}

fn val(target: Target, index: u64, variant: LawVariant, with_oracle: bool) -> Run {
    let law = ValuationLaw::new(target, variant);
    let rule = law.matching(index).first().map(|r| r.formula.to_string());
    let law_value = law_eval(&law, index);
    let oracle = if with_oracle {
        let cap = narayana_core::laws::starting_cap(law_value.as_ref().ok().copied(), MIN_CAP);
        Some(narayana_core::laws::v3_resolved(target, index, cap)?)
    } else {
        None
    };
    let mut discrepancies = Vec::new();
    let law_json = match &law_value {
        Ok(v) => to_json(v),
        Err(e) => {
            discrepancies.push(json!({ "index": index, "law_error": e.to_string() }));
            Value::Null
        }
    };
    if let (Ok(l), Some(o)) = (&law_value, oracle) {
        if *l != o {
            discrepancies.push(json!({ "index": index, "law_value": l, "oracle_value": o }));
        }
    }
    // a single oracle read at the starting cap, for the record
    let raw = v3_oracle(target, index, MIN_CAP)?;
    let show = |o: Option<narayana_core::Valuation>| o.map_or("-".to_string(), |v| v.to_string());
    let plain = format!(
        "v3({target}) at i = {index}: law {} [{variant}: {}], oracle {}",
        law_value
            .as_ref()
            .map_or_else(|e| e.to_string(), |v| v.to_string()),
        rule.as_deref().unwrap_or("no rule"),
        show(oracle),
    );
    let table = Table::new(
        ["index", "class", "law_value", "oracle_value"],
        [vec![
            index.to_string(),
            (index % 24).to_string(),
            law_value.as_ref().map_or(String::new(), |v| v.to_string()),
            oracle.map_or(String::new(), |v| v.to_string()),
        ]],
    );
    Ok(Outcome {
        params: json!({ "target": target, "index": index, "law": variant, "oracle": with_oracle }),
        result: json!({
            "law_value": law_json,
            "rule": rule,
            "oracle_value": oracle,
            "oracle_at_min_cap": raw,
        }),
        discrepancies,
        table,
        plain,
    })
}

fn verify_laws(target: Target, max: u64, variant: LawVariant, cap: u32) -> Run {
    let law = ValuationLaw::new(target, variant);
    let r = verify_law(&law, max, cap)?;
    let tally = r.by_class();
    let table = Table::new(
        ["index", "class", "law_value", "oracle_value"],
        r.entries.iter().map(|e| {
            vec![
                e.index.to_string(),
                e.class.clone(),
                e.law_value.map_or(String::new(), |v| v.to_string()),
                e.oracle_value.to_string(),
            ]
        }),
    );
    let mut plain = format!(
        "{variant} v3({target}) law over 1..={max}: {} discrepancies\n",
        r.entries.len()
    );
    for (class, t) in &tally {
        plain += &format!(
            "  class {class:>2} mod 24: {} mismatch, {} uncovered, {} overlap\n",
            t.mismatch, t.uncovered, t.overlap
        );
    }
    Ok(Outcome {
        params: json!({ "target": target, "max": max, "table": variant, "cap": cap }),
        result: json!({
            "checked": max,
            "rules": law.rules.iter().map(|r| format!("i ≡ {} (mod {}): {}", r.residue, r.modulus, r.formula)).collect::<Vec<_>>(),
            "by_class": to_json(&tally),
        }),
        discrepancies: r.entries.iter().map(to_json).collect(),
        table,
        plain,
    })
}

fn congruences(family: CongruenceFamily, s_max: u64, n_max: u32) -> Run {
    let r = verify_congruences(family, s_max, n_max)?;
    let table = Table::new(
        ["s", "n", "r", "index", "expected", "actual"],
        r.entries.iter().map(|e| {
            vec![
                e.s.to_string(),
                e.n.to_string(),
                e.r.to_string(),
                e.index.to_string(),
                e.expected.to_string(),
                e.actual.to_string(),
            ]
        }),
    );
    let plain = format!(
        "{family:?} congruences, s <= {s_max}, n <= {n_max}: {} checked, {} mismatches",
        r.checked,
        r.entries.len()
    );
    Ok(Outcome {
        params: json!({ "family": family, "s_max": s_max, "n_max": n_max }),
        result: json!({ "checked": r.checked, "claims": to_json(&family.claims()) }),
        discrepancies: r.entries.iter().map(to_json).collect(),
        table,
        plain,
    })
}

fn corollary(max: u64) -> Run {
    let r = check_divisibility_classes(max);
    let table = Table::new(
        ["index", "class", "required_divisor", "residue"],
        r.entries.iter().map(|e| {
            vec![
                e.index.to_string(),
                e.class.clone(),
                e.required_divisor.to_string(),
                e.residue.to_string(),
            ]
        }),
    );
    let plain = format!(
        "divisibility over 0..={max}: {} indices checked, {} failures",
        r.checked,
        r.entries.len()
    );
    Ok(Outcome {
        params: json!({ "max": max }),
        result: json!({ "checked": r.checked }),
        discrepancies: r.entries.iter().map(to_json).collect(),
        table,
        plain,
    })
}

fn growth(max: u64) -> Run {
    let r = check_growth_bounds(max)?;
    let mut discrepancies: Vec<Value> = r.violations.iter().map(to_json).collect();
    discrepancies.extend(
        r.undecided
            .iter()
            .map(|n| json!({ "n": n, "undecided": true })),
    );
    let table = Table::new(
        ["n", "side"],
        r.violations
            .iter()
            .map(|v| vec![v.n.to_string(), format!("{:?}", v.side).to_lowercase()]),
    );
    let plain = format!(
        "alpha in [{}, {}]; 1 <= n <= {max}: {} violations, {} undecided, up to {} bits",
        r.alpha_lower,
        r.alpha_upper,
        r.violations.len(),
        r.undecided.len(),
        r.precision_bits
    );
    Ok(Outcome {
        params: json!({ "max": max }),
        result: to_json(&r),
        discrepancies,
        table,
        plain,
    })
}

fn bounds() -> Outcome {
    let r = derive_bounds();
    // A certified crossover away from the published bound is reported,
    // not hidden.
    let discrepancies = if r.deviates {
        vec![json!({
            "m_max": r.m_max,
            "published_m_max": r.published_m_max,
            "n_max": r.n_max,
            "published_n_max": r.published_n_max,
        })]
    } else {
        vec![]
    };
    let table = Table::new(
        ["m", "lhs", "rhs_lower", "rhs_upper", "holds"],
        r.trace.iter().map(|row| {
            vec![
                row.m.to_string(),
                row.lhs.to_string(),
                row.rhs_lower.to_string(),
                row.rhs_upper.to_string(),
                row.holds.to_string(),
            ]
        }),
    );
    let mut plain = format!("m_max = {}\nn_max = {}\n", r.m_max, r.n_max);
    plain += &format!(
        "index bound at m_max in [{}, {}]\n",
        r.index_bound_lower, r.index_bound_upper
    );
    for row in &r.trace {
        plain += &format!(
            "  m = {:>4}: {:>3} <= [{:.6}, {:.6}]  {}\n",
            row.m,
            row.lhs,
            row.rhs_lower,
            row.rhs_upper,
            if row.holds { "holds" } else { "fails" }
        );
    }
    for o in &r.readings {
        let label = match o.reading {
            BoundReading::MixedBase => "mixed-base",
            BoundReading::Log3 => "log3",
            BoundReading::AsPrinted => "as-printed",
        };
        plain += &format!(
            "  reading {label}: m_max {}\n",
            o.m_max.map_or("none".to_string(), |m| m.to_string())
        );
    }
    Outcome {
        params: json!({}),
        result: to_json(&r),
        discrepancies,
        table,
        plain,
    }
}

fn solution_table(s: &SearchOutcome) -> Table {
    Table::new(
        ["m", "u", "n"],
        s.solutions.iter().map(|x| {
            vec![
                x.m.to_string(),
                x.u.to_string(),
                x.n.map_or(String::new(), |n| n.to_string()),
            ]
        }),
    )
}

fn search_plain(s: &SearchOutcome) -> String {
    let mut out = format!(
        "{} solutions in {}..={} ({} candidates, {} bracketed, {} factorial steps)",
        s.solutions.len(),
        s.from,
        s.to,
        s.stats.candidates,
        s.stats.bracketed,
        s.stats.factorial_steps
    );
    for x in &s.solutions {
        out += &format!("\n  ({}, {})", x.m, x.u);
    }
    out
}

fn search(n_max: u64, jobs: Option<usize>) -> Run {
    if jobs == Some(0) {
        return Err(UsageError("--jobs must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| UsageError(e.to_string()))?;
    let s = pool.install(|| search_narayana(n_max))?;
    Ok(Outcome {
        params: json!({ "n_max": n_max, "jobs": jobs }),
        result: to_json(&s),
        // any solution contradicts the non-existence claim
        discrepancies: s.solutions.iter().map(to_json).collect(),
        table: solution_table(&s),
        plain: search_plain(&s),
    })
}

fn general(m_max: u64) -> Run {
    let s = search_general(m_max)?;
    let discrepancies = s
        .solutions
        .iter()
        .filter(|x| !KNOWN_BROCARD_M.contains(&x.m))
        .map(to_json)
        .collect();
    Ok(Outcome {
        params: json!({ "m_max": m_max }),
        result: to_json(&s),
        discrepancies,
        table: solution_table(&s),
        plain: search_plain(&s),
    })
}

fn errata_suite(max: u64) -> Run {
    let r = errata(max)?;
    let mut plain = String::new();
    for law in &r.laws {
        plain += &format!(
            "v3({}) over 1..={max}: literal {} discrepancies, corrected {}\n",
            law.target, law.literal_discrepancies, law.corrected_discrepancies
        );
        for (line, fixed) in law.literal_table.iter().zip(law.corrected_table.iter()) {
            if line == fixed {
                plain += &format!("    {line}\n");
            } else {
                plain += &format!("  - {line}\n  + {fixed}\n");
            }
        }
        for extra in law.corrected_table.iter().skip(law.literal_table.len()) {
            plain += &format!("  + {extra}\n");
        }
        for (c, kind) in &law.literal_coverage_defects {
            plain += &format!("  class {c} mod 24: {kind:?} in literal table\n");
        }
    }
    let table = Table::new(
        ["target", "class", "mismatch", "uncovered", "overlap"],
        r.laws.iter().flat_map(|l| {
            l.literal_by_class.iter().map(move |(c, t)| {
                vec![
                    l.target.to_string(),
                    c.to_string(),
                    t.mismatch.to_string(),
                    t.uncovered.to_string(),
                    t.overlap.to_string(),
                ]
            })
        }),
    );
    // The literal defects are the finding; only the corrected tables are
    // held to zero discrepancies.
    let discrepancies = r
        .laws
        .iter()
        .flat_map(|l| l.corrected_entries.iter().map(to_json))
        .collect();
    Ok(Outcome {
        params: json!({ "max": max }),
        result: to_json(&r),
        discrepancies,
        table,
        plain,
    })
}

fn valuation(value: &str, prime: u64) -> Run {
    let x: BigNat = value
        .parse()
        .map_err(|_| UsageError(format!("not a non-negative integer: {value}")))?;
    let v = vp(&x, prime)?;
    Ok(Outcome {
        params: json!({ "value": value, "prime": prime }),
        result: json!({ "valuation": v }),
        discrepancies: vec![],
        table: Table::new(
            ["value", "prime", "valuation"],
            [vec![value.to_string(), prime.to_string(), v.to_string()]],
        ),
        plain: format!("v{prime}({value}) = {v}"),
    })
}

fn factorial_val(m: u64, prime: u64) -> Run {
    let v = vp_factorial(m, prime)?;
    let bounds = vp_factorial_bounds(m.max(1), prime)?;
    let (lo, hi) = (bounds.lower.to_string(), bounds.upper.to_string());
    Ok(Outcome {
        params: json!({ "m": m, "prime": prime }),
        result: json!({ "valuation": v, "lower_bound": lo, "upper_bound": hi }),
        discrepancies: vec![],
        table: Table::new(
            ["m", "prime", "valuation", "lower_bound", "upper_bound"],
            [vec![
                m.to_string(),
                prime.to_string(),
                v.to_string(),
                lo.clone(),
                hi.clone(),
            ]],
        ),
        plain: format!("v{prime}({m}!) = {v}, sandwich [{lo}, {hi}]"),
    })
}

fn certify(n: u64) -> Run {
    let c = certify_nonsolution(n)?;
    let (plain, discrepancies, table) =
        match &c {
            Some(c) => (
                format!(
                "a({n})^2 - 1 = {}: {}! < t < {}!, v3(t) = {}, v3 of the factorials {} and {}{}",
                c.t,
                c.below,
                c.below + 1,
                c.combined_v3,
                c.v3_below,
                c.v3_above,
                if c.excluded_by_valuation { " (excluded by valuation)" } else { "" }
            ),
                if c.check() {
                    vec![]
                } else {
                    vec![json!({ "n": n, "certificate_check": false })]
                },
                Table::new(
                    [
                        "n",
                        "below",
                        "combined_v3",
                        "v3_below",
                        "v3_above",
                        "excluded_by_valuation",
                    ],
                    [vec![
                        n.to_string(),
                        c.below.to_string(),
                        c.combined_v3.to_string(),
                        c.v3_below.to_string(),
                        c.v3_above.to_string(),
                        c.excluded_by_valuation.to_string(),
                    ]],
                ),
            ),
            None => (
                format!("a({n})^2 - 1 is a factorial"),
                vec![json!({ "n": n, "solution": true })],
                Table::new(["n", "solution"], [vec![n.to_string(), "true".into()]]),
            ),
        };
    Ok(Outcome {
        params: json!({ "n": n }),
        result: json!({ "certificate": c }),
        discrepancies,
        table,
        plain,
    })
}
