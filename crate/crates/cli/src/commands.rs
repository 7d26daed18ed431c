use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use impbounds::consistency::{self, natural_extension, upper_extension, CredalPolytope, Level, Sense};
use impbounds::jensen::{self, FunctionSpec};
use impbounds::oracle::certify;
use impbounds::tailbounds::{self, Center, Epsilon, Side, Tail};
use impbounds::{Assessment, Bound, Direction, Gamble, Target};

use crate::document::{parse_document, AssessmentDocument};
use crate::error::CliError;
use crate::expr::gamble_of;
use crate::output::{to_json, SCHEMA};

#[derive(Parser, Debug)]
#[command(
    name = "impbounds",
    version,
    about = "Consistency checks, natural extension and probability bounds for lower previsions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check avoiding sure loss, coherence or 2-coherence.
    Check {
        #[arg(long, value_enum)]
        level: LevelArg,
        file: PathBuf,
    },
    /// Natural extension of a gamble expression.
    Extend {
        file: PathBuf,
        #[arg(long)]
        expr: String,
        /// Report the upper extension instead.
        #[arg(long)]
        max: bool,
    },
    /// Jensen-type and tail bounds.
    Bound {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Lower and upper variance.
    Variance {
        file: PathBuf,
        #[arg(long)]
        x: String,
    },
    /// Markov against Cantelli at a given epsilon.
    Compare {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        eps: f64,
    },
    /// Certify every bound of a report file against the exact envelopes.
    Verify {
        file: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundCmd {
    /// Plain Jensen bounds on f(X).
    Jensen {
        file: PathBuf,
        #[arg(long)]
        x: String,
        /// square, cube, exp, sqrt, abs, neg-square, pow:K or abspow:R
        #[arg(long = "f")]
        function: String,
    },
    /// Chord-improved Jensen bounds on f(X).
    ImprovedJensen {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long = "f")]
        function: String,
    },
    /// Markov bounds on X >= a for nonnegative X.
    Markov {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        a: f64,
        /// Both sides when omitted.
        #[arg(long, value_enum)]
        side: Option<SideArg>,
    },
    /// Cantelli bound for an ASL assessment.
    Cantelli {
        file: PathBuf,
        #[arg(long)]
        x: String,
        /// Center; lpr(X) when omitted.
        #[arg(long)]
        c: Option<f64>,
        /// A positive number, or auto3sigma for 3 sqrt(upr((X-c)^2)).
        #[arg(long)]
        eps: String,
        #[arg(long, value_enum, default_value = "below")]
        side: TailArg,
    },
    /// Coherent and conjugate Cantelli bounds.
    CantelliCoh {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        eps: f64,
    },
    /// Chebyshev-like bound on |X - c| >= b with c = lpr(X) or upr(X).
    Chebyshev {
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        b: f64,
        #[arg(long, value_enum, default_value = "lower")]
        center: CenterArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LevelArg {
    Asl,
    Coherence,
    #[value(name = "2coherence")]
    TwoCoherence,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SideArg {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TailArg {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CenterArg {
    Lower,
    Upper,
}

/// What a command produced: the JSON body, an optional pass/fail verdict and
/// a one-line human summary.
pub struct Outcome {
    pub body: Value,
    pub verdict: Option<bool>,
    pub summary: String,
}

fn load(path: &Path) -> Result<AssessmentDocument, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_document(&bytes)
}

fn function(name: &str, x: &Gamble) -> Result<FunctionSpec, CliError> {
    let (inf, sup) = x.bounds();
    let (lo, hi) = (inf - 1.0, sup + 1.0);
    let nonneg = || {
        if inf >= 0.0 {
            Ok(())
        } else {
            Err(CliError::Usage(format!("{name} needs a nonnegative gamble")))
        }
    };
    let f = match name {
        "square" => FunctionSpec::square(lo, hi)?,
        "neg-square" => FunctionSpec::square(lo, hi)?.negate(),
        "exp" => FunctionSpec::exp(lo, hi)?,
        "abs" => FunctionSpec::abs_power(1.0, lo, hi)?,
        "sqrt" => {
            nonneg()?;
            FunctionSpec::sqrt(0.0, hi)?
        }
        "cube" => {
            nonneg()?;
            FunctionSpec::power(3, 0.0, hi)?
        }
        _ => {
            if let Some(k) = name.strip_prefix("pow:") {
                let k: u32 = k.parse().map_err(|_| CliError::Usage(format!("bad power in {name}")))?;
                if k % 2 == 1 {
                    nonneg()?;
                    FunctionSpec::power(k, 0.0, hi)?
                } else {
                    FunctionSpec::power(k, lo, hi)?
                }
            } else if let Some(r) = name.strip_prefix("abspow:") {
                let r: f64 = r
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad exponent in {name}")))?;
                FunctionSpec::abs_power(r, lo, hi)?
            } else {
                return Err(CliError::Usage(format!("unknown function {name}")));
            }
        }
    };
    Ok(f)
}

fn summary_of<B: Bound>(reports: &[B]) -> String {
    reports
        .iter()
        .filter_map(|r| {
            r.bound().map(|b| {
                let d = match r.direction() {
                    Direction::AtMost => "<=",
                    Direction::AtLeast => ">=",
                };
                format!("{} {d} {b}", r.target().describe())
            })
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// A bound read back from a report file.
#[derive(Deserialize)]
struct StoredBound {
    target: Option<Target>,
    event: Option<Target>,
    direction: Direction,
    bound: Option<f64>,
    #[serde(default)]
    fired: Option<String>,
    #[serde(default)]
    inequality_id: Option<String>,
}

impl Bound for StoredBound {
    fn target(&self) -> &Target {
        self.target.as_ref().or(self.event.as_ref()).expect("checked on load")
    }
    fn direction(&self) -> Direction {
        self.direction
    }
    fn bound(&self) -> Option<f64> {
        self.bound
    }
    fn rule(&self) -> String {
        self.fired.clone().or(self.inequality_id.clone()).unwrap_or_default()
    }
}

fn bound_command(which: &BoundCmd) -> Result<Outcome, CliError> {
    match which {
        BoundCmd::Jensen {
            file,
            x,
            function: fname,
        } => {
            let doc = load(file)?;
            let a = doc.to_assessment()?;
            let f = function(fname, &a.gamble(x)?)?;
            let reports = jensen::jensen_for(&a, x, &f)?;
            Ok(Outcome {
                summary: summary_of(&reports),
                body: json!({ "bound": "jensen", "bounds": to_value(&reports) }),
                verdict: None,
            })
        }
        BoundCmd::ImprovedJensen {
            file,
            x,
            function: fname,
        } => {
            let doc = load(file)?;
            let a = doc.to_assessment()?;
            let f = function(fname, &a.gamble(x)?)?;
            let (rep, reports) = jensen::improved_for(&a, x, &f)?;
            Ok(Outcome {
                summary: summary_of(&reports),
                body: json!({ "bound": "improved-jensen", "improved": to_value(&rep), "bounds": to_value(&reports) }),
                verdict: None,
            })
        }
        BoundCmd::Markov {
            file,
            x,
            a: threshold,
            side,
        } => {
            let a = load(file)?.to_assessment()?;
            let sides = match side {
                Some(SideArg::Lower) => vec![Side::Lower],
                Some(SideArg::Upper) => vec![Side::Upper],
                None => vec![Side::Lower, Side::Upper],
            };
            let reports = sides
                .into_iter()
                .map(|s| tailbounds::markov_for(&a, x, *threshold, s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome {
                summary: summary_of(&reports),
                body: json!({ "bound": "markov", "bounds": to_value(&reports) }),
                verdict: None,
            })
        }
        BoundCmd::Cantelli { file, x, c, eps, side } => {
            let a = load(file)?.to_assessment()?;
            let c = match c {
                Some(c) => *c,
                None => natural_extension(&a, &a.gamble(x)?)?,
            };
            let eps = if eps == "auto3sigma" {
                Epsilon::Sigmas(3.0)
            } else {
                Epsilon::Value(
                    eps.parse()
                        .map_err(|_| CliError::Usage(format!("--eps: \"{eps}\" is neither a number nor auto3sigma")))?,
                )
            };
            let tail = match side {
                TailArg::Below => Tail::Below,
                TailArg::Above => Tail::Above,
            };
            let r = tailbounds::cantelli_imprecise(&a, x, c, eps, tail)?;
            Ok(Outcome {
                summary: summary_of(std::slice::from_ref(&r)),
                body: json!({ "bound": "cantelli", "c": c, "bounds": [to_value(&r)] }),
                verdict: None,
            })
        }
        BoundCmd::CantelliCoh { file, x, eps } => {
            let a = load(file)?.to_assessment()?;
            let vr = tailbounds::variances(&a, x)?;
            let mut reports = tailbounds::cantelli_coherent_with(&a, x, *eps, &vr)?;
            reports.push(tailbounds::conjugate_cantelli_for(&a, x, *eps, &vr)?);
            Ok(Outcome {
                summary: summary_of(&reports),
                body: json!({ "bound": "cantelli-coh", "variance": to_value(&vr), "bounds": to_value(&reports) }),
                verdict: None,
            })
        }
        BoundCmd::Chebyshev { file, x, b, center } => {
            let a = load(file)?.to_assessment()?;
            let center = match center {
                CenterArg::Lower => Center::Lower,
                CenterArg::Upper => Center::Upper,
            };
            let r = tailbounds::chebyshev_for(&a, x, *b, center)?;
            Ok(Outcome {
                summary: summary_of(std::slice::from_ref(&r)),
                body: json!({ "bound": "chebyshev", "bounds": [to_value(&r)] }),
                verdict: None,
            })
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Check { level, file } => {
            let a = load(file)?.to_assessment()?;
            let level = match level {
                LevelArg::Asl => Level::AvoidingSureLoss,
                LevelArg::Coherence => Level::Coherence,
                LevelArg::TwoCoherence => Level::TwoCoherence,
            };
            let r = consistency::check(&a, level)?;
            Ok(Outcome {
                summary: format!(
                    "{}: {}",
                    to_value(&r.level).as_str().unwrap_or_default(),
                    if r.pass { "pass" } else { "fail" }
                ),
                verdict: Some(r.pass),
                body: json!({ "report": to_value(&r) }),
            })
        }
        Command::Extend { file, expr, max } => {
            let doc = load(file)?;
            let a = doc.to_assessment()?;
            let y = gamble_of(expr, &doc)?;
            let sense = if *max { Sense::Max } else { Sense::Min };
            let opt = CredalPolytope::new(&a).optimize(&y, sense)?;
            let which = if *max { "upper" } else { "lower" };
            Ok(Outcome {
                summary: format!("{which} extension of {expr}: {}", opt.value),
                verdict: None,
                body: json!({ "expr": expr, "sense": which, "value": opt.value, "gamble": y.values(), "witness": opt.witness }),
            })
        }
        Command::Bound { which } => bound_command(which),
        Command::Variance { file, x } => {
            let a = load(file)?.to_assessment()?;
            let vr = tailbounds::variances(&a, x)?;
            Ok(Outcome {
                summary: format!(
                    "lower variance {}, upper variance {}",
                    vr.lower_variance, vr.upper_variance
                ),
                verdict: None,
                body: json!({ "variance": to_value(&vr) }),
            })
        }
        Command::Compare { file, x, eps } => {
            let a = load(file)?.to_assessment()?;
            let g = a.gamble(x)?;
            let (l, u) = (natural_extension(&a, &g)?, upper_extension(&a, &g)?);
            let vr = tailbounds::variances(&a, x)?;
            let r = tailbounds::compare_markov_cantelli(l, u, vr.lower_variance, *eps, g.is_nonnegative())?;
            Ok(Outcome {
                summary: format!(
                    "Markov {} vs Cantelli {} at eps {eps}; crossover {}; {} preferred",
                    r.markov_bound, r.cantelli_bound, r.eps2, r.preferred_for_eps
                ),
                verdict: None,
                body: json!({ "lpr": l, "upr": u, "lower_variance": vr.lower_variance, "comparison": to_value(&r) }),
            })
        }
        Command::Verify { file, report } => {
            let a: Assessment = load(file)?.to_assessment()?;
            let text = std::fs::read(report).map_err(|e| CliError::Io(format!("{}: {e}", report.display())))?;
            let v: Value = serde_json::from_slice(&text).map_err(CliError::from_json)?;
            let items = v
                .get("bounds")
                .and_then(Value::as_array)
                .ok_or_else(|| CliError::Schema("report has no \"bounds\" array".into()))?;
            let mut certs = Vec::new();
            for item in items {
                let b: StoredBound = serde_json::from_value(item.clone()).map_err(CliError::from_json)?;
                if b.target.is_none() && b.event.is_none() {
                    return Err(CliError::Schema("bound without target".into()));
                }
                certs.push(certify(&a, &b)?);
            }
            let valid = certs.iter().filter(|c| c.valid).count();
            Ok(Outcome {
                summary: format!("{valid}/{} bounds certified", certs.len()),
                verdict: Some(valid == certs.len()),
                body: json!({ "certificates": to_value(&certs) }),
            })
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check { .. } => "check",
        Command::Extend { .. } => "extend",
        Command::Bound { .. } => "bound",
        Command::Variance { .. } => "variance",
        Command::Compare { .. } => "compare",
        Command::Verify { .. } => "verify",
    }
}

/// Parses `args`, runs the command, writes the JSON report to `out` and a
/// summary to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                let body = json!({ "schema": SCHEMA, "error": { "kind": "usage", "message": text.trim_end() } });
                let _ = writeln!(out, "{}", to_json(&body));
                return 2;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    let name = command_name(&cli.command);
    match execute(&cli.command) {
        Ok(o) => {
            let mut body = json!({ "schema": SCHEMA, "command": name });
            if let (Value::Object(dst), Value::Object(src)) = (&mut body, o.body) {
                dst.extend(src);
                if let Some(v) = o.verdict {
                    dst.insert("verdict".into(), Value::from(if v { "pass" } else { "fail" }));
                }
            }
            let _ = writeln!(out, "{}", to_json(&body));
            let _ = writeln!(err, "{name}: {}", o.summary);
            if o.verdict == Some(false) {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let body =
                json!({ "schema": SCHEMA, "command": name, "error": { "kind": e.kind(), "message": e.to_string() } });
            let _ = writeln!(out, "{}", to_json(&body));
            let _ = writeln!(err, "{name}: error: {e}");
            e.exit_code()
        }
    }
}
