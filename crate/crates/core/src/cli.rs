//! Command-line front end. `run` returns the full stdout text so that the
//! binary and the tests share one code path.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::determinantal::{
    build_gd, build_hilbert_burch, build_willink, gd_witness, hb_structural_checks, willink_membership,
};
use crate::moments::{
    cumulants_to_moments, mixture_moments, moments_to_cumulants, CumulantVector, MixtureParams, MomentVector,
};
use crate::polyring::{parse_rational, PrimeField, DEFAULT_PRIME};
use crate::recovery::{recover, RecoveryInput};
use crate::secant::{
    census, check_prime_for_order, conjecture_eleven_defect, defect_identity_d3, degree_formula_sec2_g1,
    degree_formula_sec2_x, degree_formula_sec3_x, dim_formula_d3, secant_dimension, DefectRow, RankCertificate,
    RankConfig, SecantProblem, PRNG_NAME,
};

pub const SEED_ENV: &str = "MOMVAR_SEED";
pub const PRIME_ENV: &str = "MOMVAR_PRIME";

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; exit code 2.
    Usage(String),
    /// Well-formed request the mathematics rejects; exit code 1.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gd,
    Willink,
    Cumulant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    Gd,
    Hb,
    Willink,
}

#[derive(Parser, Debug)]
#[command(name = "momentvar", version, about = "Moment varieties of Gaussian mixtures")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Seed for random evaluation points
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Prime for modular rank computations
    #[arg(long, global = true, env = PRIME_ENV, default_value_t = DEFAULT_PRIME)]
    pub prime: u64,
    /// Random points per rank computation
    #[arg(long, global = true, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Moments of a Gaussian mixture
    Moments {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Cumulants of a moment vector (or moments of a cumulant vector with --inverse)
    Cumulants {
        #[arg(long)]
        moments: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        d: Option<u32>,
        /// Read a cumulant vector and print its moments
        #[arg(long)]
        inverse: Option<PathBuf>,
    },
    /// Membership of a moment vector in the Gaussian moment variety
    Check {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long, value_enum, default_value = "willink")]
        method: Method,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<u32>,
    },
    /// Dimension of one secant variety
    Dim {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: usize,
    },
    /// Dimensions over ranges of n and k
    Census {
        #[arg(long)]
        d: u32,
        /// e.g. `5..10` (inclusive) or `2,4,6`
        #[arg(long)]
        n: String,
        #[arg(long)]
        k: String,
        #[arg(long)]
        defective_only: bool,
        /// Per n, stop at the first k whose parameter count reaches N
        #[arg(long)]
        until_fill: bool,
    },
    /// Closed-form dimension and degree formulas
    Formulas {
        #[arg(long)]
        deg_sec2_g1: bool,
        #[arg(long)]
        deg_sec2_x: bool,
        #[arg(long)]
        deg_sec3_x: bool,
        #[arg(long)]
        dim_d3: bool,
        #[arg(long)]
        defect_d3: bool,
        #[arg(long)]
        conj_eleven: bool,
        #[arg(long)]
        d: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        r: Option<String>,
    },
    /// Two-component mixture parameters from moments of order three
    Recover {
        #[arg(long)]
        moments: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        mu11: String,
        #[arg(long, allow_hyphen_values = true)]
        mu21: String,
    },
    /// Structural facts about the maximal minors of the Hilbert-Burch matrix
    Structural {
        #[arg(long)]
        d: String,
    },
    /// Dump G_d, B_d or W_{n,d} as CSV
    Matrix {
        #[arg(long, value_enum)]
        kind: MatrixKind,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: Option<usize>,
    },
}

/// `a..b` (inclusive), `a..=b`, `a`, or a comma list.
pub fn parse_range(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("bad range {s:?}; use a..b, a or a,b,c"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn read_moments(path: &Path) -> Result<MomentVector, CliError> {
    MomentVector::from_json(&read_json(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn read_params(path: &Path) -> Result<MixtureParams, CliError> {
    MixtureParams::from_json(&read_json(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn rational_arg(name: &str, s: &str) -> Result<BigRational, CliError> {
    parse_rational(s.trim()).ok_or_else(|| CliError::Usage(format!("--{name}: bad rational {s:?}")))
}

struct Meta {
    command: String,
    entries: Vec<(String, String)>,
}

impl Meta {
    fn new(command: &str, g: &Global, randomized: bool) -> Self {
        let mut entries = vec![("version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
        if randomized {
            entries.push(("prng".into(), PRNG_NAME.into()));
            entries.push(("seed".into(), g.seed.to_string()));
            entries.push(("prime".into(), g.prime.to_string()));
            entries.push(("trials".into(), g.trials.to_string()));
            for var in [SEED_ENV, PRIME_ENV] {
                let v = std::env::var(var).unwrap_or_else(|_| "unset".into());
                entries.push((format!("env {var}"), v));
            }
        }
        Meta { command: command.to_string(), entries }
    }

    fn comment_lines(&self) -> String {
        let mut s = format!("# momentvar {}\n", self.command);
        for (k, v) in &self.entries {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s
    }

    fn json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        for (k, v) in &self.entries {
            m.insert(k.replace(' ', "_"), Value::String(v.clone()));
        }
        Value::Object(m)
    }
}

fn with_meta(mut v: Value, meta: &Meta) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("meta".into(), meta.json());
    }
    v
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// Table with a header; rendered as CSV, markdown or a JSON array of objects.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self, format: Format, meta: &Meta) -> String {
        match format {
            Format::Csv => {
                let mut s = meta.comment_lines();
                let _ = writeln!(s, "{}", self.header.join(","));
                for r in &self.rows {
                    let _ = writeln!(s, "{}", r.join(","));
                }
                s
            }
            Format::Markdown => {
                let mut s = meta.comment_lines();
                s.push('\n');
                let _ = writeln!(s, "| {} |", self.header.join(" | "));
                let _ = writeln!(s, "|{}", "---|".repeat(self.header.len()));
                for r in &self.rows {
                    let _ = writeln!(s, "| {} |", r.join(" | "));
                }
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj = self
                            .header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| {
                                let val = v.parse::<i64>().map(Value::from).unwrap_or_else(|_| match v.as_str() {
                                    "true" => Value::Bool(true),
                                    "false" => Value::Bool(false),
                                    _ => Value::String(v.clone()),
                                });
                                (h.clone(), val)
                            })
                            .collect::<serde_json::Map<_, _>>();
                        Value::Object(obj)
                    })
                    .collect();
                pretty(&json!({ "meta": meta.json(), "rows": rows }))
            }
        }
    }
}

fn rank_config(g: &Global, d: u32) -> Result<RankConfig, CliError> {
    PrimeField::new(g.prime).map_err(|e| CliError::Usage(format!("--prime: {e}")))?;
    check_prime_for_order(g.prime, d).map_err(|e| CliError::Usage(format!("--prime: {e}")))?;
    if g.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(RankConfig { prime: g.prime, seed: g.seed, trials: g.trials })
}

fn row_cells(r: &DefectRow) -> Vec<String> {
    r.csv().split(',').map(str::to_string).collect()
}

const ROW_HEADER: [&str; 9] = ["n", "k", "d", "par", "N", "exp", "dim", "delta", "par_minus_dim"];

fn row_json(r: &DefectRow, c: &RankCertificate) -> Value {
    let mut v = serde_json::to_value(r).expect("row serializes");
    v["certificate"] = serde_json::to_value(c).expect("certificate serializes");
    v
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                return Ok(e.render().to_string())
            }
            _ => return Err(CliError::Usage(e.render().to_string())),
        },
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Moments { params, d, n } => {
            let p = read_params(params)?;
            if let Some(n) = n {
                if *n != p.n() {
                    return Err(CliError::Domain(format!("--n {n} but the parameters have n = {}", p.n())));
                }
            }
            let m = mixture_moments(&p, *d);
            let meta = Meta::new("moments", g, false);
            Ok(match g.format.unwrap_or(Format::Json) {
                Format::Json => pretty(&with_meta(m.to_json(), &meta)),
                f => {
                    let mut t = Table::new(&["idx", "value"]);
                    for (b, v) in m.iter() {
                        t.push(vec![b.label(), v.to_string()]);
                    }
                    t.render(f, &meta)
                }
            })
        }
        Command::Cumulants { moments, params, d, inverse } => {
            let meta = Meta::new("cumulants", g, false);
            if let Some(path) = inverse {
                let c = CumulantVector::from_json(&read_json(path)?)
                    .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
                return Ok(pretty(&with_meta(cumulants_to_moments(&c).to_json(), &meta)));
            }
            let m = match (moments, params) {
                (Some(path), None) => {
                    let m = read_moments(path)?;
                    match d {
                        Some(d) if *d <= m.d() => m.truncate(*d),
                        Some(d) => return Err(CliError::Domain(format!("--d {d} exceeds the file's d = {}", m.d()))),
                        None => m,
                    }
                }
                (None, Some(path)) => {
                    let d = d.ok_or_else(|| CliError::Usage("--params needs --d".into()))?;
                    mixture_moments(&read_params(path)?, d)
                }
                _ => return Err(CliError::Usage("give exactly one of --moments, --params, --inverse".into())),
            };
            let c = moments_to_cumulants(&m).map_err(domain)?;
            Ok(match g.format.unwrap_or(Format::Json) {
                Format::Json => pretty(&with_meta(c.to_json(), &meta)),
                f => {
                    let mut t = Table::new(&["idx", "value"]);
                    for (b, v) in c.iter() {
                        t.push(vec![b.label(), v.to_string()]);
                    }
                    t.render(f, &meta)
                }
            })
        }
        Command::Check { moments, method, n, d } => {
            let mut m = read_moments(moments)?;
            if let Some(n) = n {
                if *n != m.n() {
                    return Err(CliError::Domain(format!("--n {n} but the moment vector has n = {}", m.n())));
                }
            }
            if let Some(d) = d {
                if *d > m.d() {
                    return Err(CliError::Domain(format!("--d {d} exceeds the file's d = {}", m.d())));
                }
                m = m.truncate(*d);
            }
            let (member, witness) = match method {
                Method::Gd => {
                    if m.n() != 1 {
                        return Err(CliError::Domain(format!("method gd needs n = 1, got n = {}", m.n())));
                    }
                    match gd_witness(&m).map_err(domain)? {
                        None => (true, "all minors vanish".to_string()),
                        Some((t, v)) => (false, format!("minor on columns {:?} = {v}", t)),
                    }
                }
                Method::Willink => {
                    let r = willink_membership(m.n(), m.d(), &m, None).map_err(domain)?;
                    (r.is_member, format!("rank {} (member iff <= {})", r.rank, m.n() + 1))
                }
                Method::Cumulant => {
                    let c = moments_to_cumulants(&m).map_err(domain)?;
                    match c.first_nonzero_higher() {
                        None => (true, "cumulants of order 3..d vanish".to_string()),
                        Some((b, v)) => (false, format!("k{} = {v}", b.label())),
                    }
                }
            };
            let meta = Meta::new("check", g, false);
            let method_name = format!("{method:?}").to_lowercase();
            let mut t = Table::new(&["n", "d", "method", "member", "witness"]);
            t.push(vec![m.n().to_string(), m.d().to_string(), method_name, member.to_string(), witness]);
            Ok(t.render(g.format.unwrap_or(Format::Csv), &meta))
        }
        Command::Dim { n, d, k } => {
            let p = SecantProblem::new(*n, *d, *k).map_err(|e| CliError::Usage(e.to_string()))?;
            let cfg = rank_config(g, *d)?;
            let r = secant_dimension(&p, &cfg).map_err(domain)?;
            let meta = Meta::new("dim", g, true);
            Ok(match g.format.unwrap_or(Format::Csv) {
                Format::Json => pretty(&json!({ "meta": meta.json(), "rows": [row_json(&r.row, &r.cert)] })),
                f => {
                    let mut t = Table::new(&ROW_HEADER);
                    t.push(row_cells(&r.row));
                    let mut s = t.render(f, &meta);
                    let _ = writeln!(s, "# certificate: {}", r.cert);
                    s
                }
            })
        }
        Command::Census { d, n, k, defective_only, until_fill } => {
            let ns = parse_range(n)?;
            let ks = parse_range(k)?;
            let cfg = rank_config(g, *d)?;
            let mut pairs = Vec::new();
            for &n in &ns {
                for &k in &ks {
                    let p = SecantProblem::new(n as usize, *d, k as usize).map_err(|e| CliError::Usage(e.to_string()))?;
                    if *until_fill && k > ks[0] {
                        let prev = SecantProblem::new(n as usize, *d, k as usize - 1).expect("k - 1 >= 1");
                        if prev.params() >= prev.ambient() {
                            continue;
                        }
                    }
                    pairs.push((p.n, p.k));
                }
            }
            let rows = census(*d, &pairs, *defective_only, &cfg).map_err(domain)?;
            let meta = Meta::new("census", g, true);
            Ok(match g.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let rows: Vec<Value> = rows.iter().map(|(r, c)| row_json(r, c)).collect();
                    pretty(&json!({ "meta": meta.json(), "rows": rows }))
                }
                f => {
                    let mut t = Table::new(&ROW_HEADER);
                    for (r, _) in &rows {
                        t.push(row_cells(r));
                    }
                    t.render(f, &meta)
                }
            })
        }
        Command::Formulas { deg_sec2_g1, deg_sec2_x, deg_sec3_x, dim_d3, defect_d3, conj_eleven, d, n, k, r } => {
            let need = |name: &str, v: &Option<String>| -> Result<Vec<u64>, CliError> {
                parse_range(v.as_deref().ok_or_else(|| CliError::Usage(format!("this formula needs --{name}")))?)
            };
            let mut t = Table::new(&["formula", "n", "k", "d", "r", "value", "note"]);
            let blank = String::new;
            if *deg_sec2_g1 || *deg_sec2_x || *deg_sec3_x {
                let ds = need("d", d)?;
                for &dv in &ds {
                    let dv = dv as i64;
                    if *deg_sec2_g1 {
                        let note = if dv > 10 { "extrapolated" } else { "" };
                        let v = degree_formula_sec2_g1(dv).map_err(domain)?;
                        t.push(vec!["deg_sec2_g1".into(), blank(), blank(), dv.to_string(), blank(), v.to_string(), note.into()]);
                    }
                    if *deg_sec2_x {
                        let v = degree_formula_sec2_x(dv).map_err(domain)?;
                        t.push(vec!["deg_sec2_x".into(), blank(), blank(), dv.to_string(), blank(), v.to_string(), blank()]);
                    }
                    if *deg_sec3_x {
                        let v = degree_formula_sec3_x(dv).map_err(domain)?;
                        t.push(vec!["deg_sec3_x".into(), blank(), blank(), dv.to_string(), blank(), v.to_string(), blank()]);
                    }
                }
            }
            if *dim_d3 || *defect_d3 {
                let ns = need("n", n)?;
                let ks = need("k", k)?;
                for &nv in &ns {
                    for &kv in &ks {
                        let (nv, kv) = (nv as i64, kv as i64);
                        if *dim_d3 {
                            let v = dim_formula_d3(nv, kv).map_err(domain)?;
                            t.push(vec!["dim_d3".into(), nv.to_string(), kv.to_string(), "3".into(), blank(), v.to_string(), blank()]);
                        }
                        if *defect_d3 {
                            let v = defect_identity_d3(nv, kv).map_err(domain)?;
                            t.push(vec!["defect_d3".into(), nv.to_string(), kv.to_string(), "3".into(), blank(), v.to_string(), blank()]);
                        }
                    }
                }
            }
            if *conj_eleven {
                let ns = need("n", n)?;
                let rs = need("r", r)?;
                for &nv in &ns {
                    for &rv in &rs {
                        let v = conjecture_eleven_defect(nv as i64, rv as i64).map_err(domain)?;
                        t.push(vec![
                            "conj_eleven".into(),
                            nv.to_string(),
                            (nv + rv).to_string(),
                            "4".into(),
                            rv.to_string(),
                            v.to_string(),
                            blank(),
                        ]);
                    }
                }
            }
            if t.rows.is_empty() {
                return Err(CliError::Usage("choose at least one formula flag".into()));
            }
            Ok(t.render(g.format.unwrap_or(Format::Csv), &Meta::new("formulas", g, false)))
        }
        Command::Recover { moments, mu11, mu21 } => {
            let m = read_moments(moments)?;
            let input = RecoveryInput { m, mu11: rational_arg("mu11", mu11)?, mu21: rational_arg("mu21", mu21)? };
            let r = recover(&input).map_err(domain)?;
            let mut v = r.params.to_json();
            v["residual"] = Value::String(r.residual.to_string());
            Ok(pretty(&with_meta(v, &Meta::new("recover", g, false))))
        }
        Command::Structural { d } => {
            let mut t = Table::new(&["d", "monomials_disjoint", "no_y_squared_factor", "lowest_terms_match"]);
            for dv in parse_range(d)? {
                let r = hb_structural_checks(dv as u32).map_err(domain)?;
                t.push(vec![
                    dv.to_string(),
                    r.monomials_disjoint.to_string(),
                    r.no_y_squared_factor.to_string(),
                    r.lowest_terms_match.to_string(),
                ]);
            }
            Ok(t.render(g.format.unwrap_or(Format::Csv), &Meta::new("structural", g, false)))
        }
        Command::Matrix { kind, d, n } => {
            let m = match kind {
                MatrixKind::Gd => build_gd(*d),
                MatrixKind::Hb => build_hilbert_burch(*d),
                MatrixKind::Willink => build_willink(n.unwrap_or(1), *d),
            }
            .map_err(domain)?;
            let meta = Meta::new("matrix", g, false);
            Ok(format!("{}{}", meta.comment_lines(), m.to_csv()))
        }
    }
}
