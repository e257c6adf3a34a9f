//! Batch command-line front end. Structured input and output is JSON; formulas are text.
//!
//! Exit codes: 0 on success, 1 on a domain error (one JSON line `{"error": ...}` on stderr),
//! 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::automata::Automaton;
use crate::cells::{self, CellUnion, FiberData, OrderFormula, SCell};
use crate::eqstruct::{self, Chamber, EqDescriptor, FiberSpec};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::growth;
use crate::poly::NatPoly;
use crate::presentation::{self, Interpretation, Presentation};
use crate::semilinear::{GeneralizedVpf, SemilinearSet};

#[derive(Parser, Debug)]
#[command(name = "autostruct", version, about = "Automatic structures toolkit")]
struct Cli {
    /// Human-readable traces on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct AutomatonIn {
    /// Automaton JSON (`-` for stdin).
    #[arg(long, value_name = "FILE")]
    automaton: PathBuf,
}

#[derive(Args, Debug)]
struct PresentationIn {
    /// Presentation JSON (`-` for stdin).
    #[arg(long, value_name = "FILE")]
    presentation: PathBuf,
}

#[derive(Args, Debug)]
struct FormulaIn {
    #[arg(long, conflicts_with = "formula_file")]
    formula: Option<String>,
    #[arg(long, value_name = "FILE")]
    formula_file: Option<PathBuf>,
}

impl FormulaIn {
    fn text(&self) -> Result<String> {
        match (&self.formula, &self.formula_file) {
            (Some(f), _) => Ok(f.clone()),
            (None, Some(path)) => read_text(path),
            (None, None) => Err(Error::InvalidParameter("a formula is required (--formula or --formula-file)".into())),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Polynomial/exponential growth of a regular language.
    Growth(AutomatonIn),
    /// Cumulative word counts up to a length.
    Count {
        #[command(flatten)]
        input: AutomatonIn,
        #[arg(long)]
        length: usize,
    },
    /// Bounded patterns covering a polynomial-growth language.
    Decompose(AutomatonIn),
    /// Distinct-letter normal form of the bounded decomposition.
    Normalize(AutomatonIn),
    /// Exponent sets of each pattern of the bounded decomposition.
    Exponents(AutomatonIn),
    /// The relation defined by a formula.
    Eval {
        #[command(flatten)]
        input: PresentationIn,
        #[command(flatten)]
        formula: FormulaIn,
    },
    /// Truth of a sentence.
    Decide {
        #[command(flatten)]
        input: PresentationIn,
        #[command(flatten)]
        formula: FormulaIn,
    },
    /// Interpretations between presentations.
    #[command(subcommand)]
    Interp(InterpCmd),
    /// Built-in presentations as JSON.
    #[command(subcommand)]
    Build(BuildCmd),
    /// s-cells over ⟨ω, ≤⟩.
    #[command(subcommand)]
    Cells(CellsCmd),
    /// Semilinear sets and out-degree functions.
    #[command(subcommand)]
    Semilinear(SemilinearCmd),
    /// Equivalence structures and their class descriptors.
    #[command(subcommand)]
    Eq(EqCmd),
    /// Elements reachable from a start set by repeated steps of a formula.
    Reach {
        #[command(flatten)]
        input: PresentationIn,
        #[command(flatten)]
        formula: FormulaIn,
        /// Input variables of the step formula, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        output: String,
        /// A start element (repeatable).
        #[arg(long)]
        start: Vec<String>,
        #[arg(long)]
        steps: usize,
    },
}

#[derive(Subcommand, Debug)]
enum InterpCmd {
    /// Apply an interpretation to a presentation.
    Apply {
        #[command(flatten)]
        input: PresentationIn,
        #[arg(long, value_name = "FILE")]
        interp: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum BuildCmd {
    /// ⟨ω, ≤⟩ in unary.
    Omega,
    /// ⟨ℕ, +⟩ in base p, least significant digit first.
    Presburger {
        #[arg(long, default_value_t = 2)]
        base: usize,
    },
    /// ⟨ℕ, +, |_p⟩ with divp(x, y): x is a power of p dividing y.
    Divp {
        #[arg(long, default_value_t = 2)]
        base: usize,
    },
    /// The p-ary tree with prefix order, children and equal length.
    Tree {
        #[arg(long, default_value_t = 2)]
        base: usize,
    },
    /// The grid ℤ² with its two neighbour relations.
    Grid,
    /// ⟨ω, ≤⟩ over a*b* with P marking the triangular numbers.
    Triangular,
    /// E(p) over ⟨ω, ≤⟩ for a natural polynomial.
    Ep {
        #[arg(long, value_name = "FILE")]
        poly: PathBuf,
    },
    /// The interpretation of E(g) in ⟨ℕ, +⟩ for a generalised vector partition function.
    Eg {
        #[arg(long, value_name = "FILE")]
        gvpf: PathBuf,
        /// Output the interpreted presentation over base-2 Presburger instead.
        #[arg(long)]
        apply: bool,
    },
}

#[derive(Subcommand, Debug)]
enum CellsCmd {
    /// Disjoint s-cells of a formula over order and successor in x0..x{n-1}.
    Decompose {
        #[command(flatten)]
        formula: FormulaIn,
        #[arg(long)]
        n: usize,
    },
    /// Fiber data of a cell over its first m coordinates, or the fiber size at a point.
    Fiber {
        #[arg(long, value_name = "FILE")]
        cell: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<u64>>,
    },
    /// The affine bijection from ℕ^k onto a cell.
    Param {
        #[arg(long, value_name = "FILE")]
        cell: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum SemilinearCmd {
    /// Whether a point lies in the set.
    Member {
        #[arg(long, value_name = "FILE")]
        set: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        point: Vec<u64>,
    },
    /// Coefficients of the generating series up to a bound.
    Series {
        #[arg(long, value_name = "FILE")]
        set: PathBuf,
        #[arg(long)]
        bound: u64,
    },
    /// Out-degree function of the relation given by the first k coordinates.
    Outdegree {
        #[arg(long, value_name = "FILE")]
        set: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<u64>>,
    },
    /// An existential Presburger formula defining the set.
    Toformula {
        #[arg(long, value_name = "FILE")]
        set: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum EqCmd {
    /// Descriptor of the kernel of a function, or of E(g) from chambers.
    Classify {
        #[arg(long, value_name = "FILE", conflicts_with_all = ["gvpf", "chambers"])]
        fiber: Option<PathBuf>,
        #[arg(long, value_name = "FILE", requires = "chambers")]
        gvpf: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        chambers: Option<PathBuf>,
    },
    /// Presentation of E(p) over ⟨ω, ≤⟩.
    Build {
        #[arg(long, value_name = "FILE")]
        poly: PathBuf,
    },
    /// Compare a presentation's classes with a descriptor.
    Check {
        #[command(flatten)]
        input: PresentationIn,
        #[arg(long, value_name = "FILE")]
        descriptor: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// Class sizes among elements up to a length.
    Multiset {
        #[command(flatten)]
        input: PresentationIn,
        #[arg(long)]
        bound: usize,
    },
    /// Number of classes of a given size.
    Count {
        #[arg(long, value_name = "FILE")]
        descriptor: PathBuf,
        #[arg(long)]
        size: u64,
    },
}

/// Runs one sub-command and returns the process exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let verbose = cli.verbose;
    let result = execute(&cli.command, verbose).and_then(|v| emit(&v, cli.out.as_deref()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", json!({"error": e.to_string()}));
            1
        }
    }
}

fn emit(v: &Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Error::Json(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Error::InvalidParameter(e.to_string())),
    }
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::InvalidParameter(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| io_error(path, e))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Json(format!("{}: {e}", path.display())))
}

fn trace(verbose: bool, msg: impl FnOnce() -> String) {
    if verbose {
        eprintln!("{}", msg());
    }
}

fn automaton(a: &AutomatonIn) -> Result<Automaton> {
    Automaton::from_json_value(&read_json(&a.automaton)?)
}

fn presentation(p: &PresentationIn) -> Result<Presentation> {
    Presentation::from_json_value(&read_json(&p.presentation)?)
}

fn execute(cmd: &Command, verbose: bool) -> Result<Value> {
    match cmd {
        Command::Growth(a) => {
            let a = automaton(a)?;
            trace(verbose, || format!("{} states", a.state_count()));
            Ok(growth::classify_growth(&a)?.to_json_value())
        }
        Command::Count { input, length } => {
            let a = automaton(input)?;
            Ok(json!({"counts": a.count_words_upto(*length)}))
        }
        Command::Decompose(a) => {
            let a = automaton(a)?;
            let pats = growth::bounded_decomposition(&a)?;
            trace(verbose, || format!("{} patterns", pats.len()));
            Ok(json!({"patterns": pats.iter().map(|p| p.to_json_value(a.alphabet())).collect::<Vec<_>>()}))
        }
        Command::Normalize(a) => {
            let a = automaton(a)?;
            let pats = growth::bounded_decomposition(&a)?;
            let (normal, recode) = growth::normalize_letters(a.alphabet(), &pats)?;
            Ok(json!({
                "alphabet": recode.target.to_json(),
                "patterns": normal.iter().map(|p| p.to_json_value(&recode.target)).collect::<Vec<_>>(),
                "recode": recode.relation.to_json_value(),
            }))
        }
        Command::Exponents(a) => {
            let a = automaton(a)?;
            let pats = growth::bounded_decomposition(&a)?;
            let mut out = Vec::new();
            for p in &pats {
                let set = growth::pattern_exponents(&a, p)?;
                out.push(json!({"pattern": p.to_json_value(a.alphabet()), "exponents": set.to_json_value()}));
            }
            Ok(Value::Array(out))
        }
        Command::Eval { input, formula } => {
            let p = presentation(input)?;
            let phi = Formula::parse(&formula.text()?)?;
            let r = presentation::eval(&p, &phi)?;
            trace(verbose, || format!("{} states", r.relation.acceptor().state_count()));
            Ok(json!({"vars": r.vars, "relation": r.relation.to_json_value()}))
        }
        Command::Decide { input, formula } => {
            let p = presentation(input)?;
            let phi = Formula::parse(&formula.text()?)?;
            Ok(Value::Bool(presentation::decide(&p, &phi)?))
        }
        Command::Interp(InterpCmd::Apply { input, interp }) => {
            let p = presentation(input)?;
            let tau = Interpretation::from_json_value(&read_json(interp)?)?;
            Ok(presentation::apply_interpretation(&p, &tau)?.to_json_value())
        }
        Command::Build(b) => build(b),
        Command::Cells(c) => cells_cmd(c),
        Command::Semilinear(s) => semilinear_cmd(s),
        Command::Eq(e) => eq_cmd(e, verbose),
        Command::Reach { input, formula, inputs, output, start, steps } => {
            let p = presentation(input)?;
            let phi = Formula::parse(&formula.text()?)?;
            let start = start.iter().map(|s| p.element(s)).collect::<Result<Vec<_>>>()?;
            let r = presentation::reach(&p, &phi, inputs, output, &start, *steps)?;
            Ok(r.to_json_value())
        }
    }
}

fn build(b: &BuildCmd) -> Result<Value> {
    let p = match b {
        BuildCmd::Omega => presentation::omega_le(),
        BuildCmd::Presburger { base } => presentation::presburger(*base)?,
        BuildCmd::Divp { base } => presentation::presburger_div(*base)?,
        BuildCmd::Tree { base } => presentation::pary_tree(*base)?,
        BuildCmd::Grid => presentation::grid_example(),
        BuildCmd::Triangular => presentation::triangular_example(),
        BuildCmd::Ep { poly } => eqstruct::build_ep(&NatPoly::from_json_value(&read_json(poly)?)?)?,
        BuildCmd::Eg { gvpf, apply } => {
            let g = GeneralizedVpf::from_json_value(&read_json(gvpf)?)?;
            let tau = eqstruct::build_eg_presburger(&g)?;
            if !apply {
                return Ok(tau.to_json_value());
            }
            presentation::apply_interpretation(&presentation::presburger(2)?, &tau)?
        }
    };
    Ok(p.to_json_value())
}

fn read_cell(path: &Path) -> Result<SCell> {
    SCell::from_json_value(&read_json(path)?)
}

fn cells_cmd(c: &CellsCmd) -> Result<Value> {
    match c {
        CellsCmd::Decompose { formula, n } => {
            let psi = OrderFormula::parse(&formula.text()?)?;
            let u: CellUnion = cells::qf_to_cells(&psi, *n)?;
            Ok(u.to_json_value())
        }
        CellsCmd::Fiber { cell, m, at } => {
            let c = read_cell(cell)?;
            match at {
                Some(b) => Ok(serde_json::to_value(cells::fiber_count(&c, *m, b)?).map_err(|e| Error::Json(e.to_string()))?),
                None => {
                    let f: FiberData = cells::fiber_data(&c, *m)?;
                    Ok(f.to_json_value())
                }
            }
        }
        CellsCmd::Param { cell } => {
            let phi = cells::cell_param(&read_cell(cell)?);
            Ok(json!({"offset": phi.offset(), "columns": phi.columns()}))
        }
    }
}

fn read_set(path: &Path) -> Result<SemilinearSet> {
    SemilinearSet::from_json_value(&read_json(path)?)
}

fn semilinear_cmd(s: &SemilinearCmd) -> Result<Value> {
    match s {
        SemilinearCmd::Member { set, point } => Ok(Value::Bool(read_set(set)?.member(point)?)),
        SemilinearCmd::Series { set, bound } => {
            let coeffs = read_set(set)?.series_coeffs(*bound)?;
            Ok(Value::Array(coeffs.into_iter().map(|(x, c)| json!({"point": x, "coeff": c})).collect()))
        }
        SemilinearCmd::Outdegree { set, k, at } => {
            let g = crate::semilinear::outdegree_gvpf(&read_set(set)?, *k)?;
            match at {
                Some(x) => Ok(json!(g.eval(x)?)),
                None => Ok(g.to_json_value()),
            }
        }
        SemilinearCmd::Toformula { set } => Ok(Value::String(read_set(set)?.to_formula().to_string())),
    }
}

fn read_descriptor(path: &Path) -> Result<EqDescriptor> {
    EqDescriptor::from_json_value(&read_json(path)?)
}

fn eq_cmd(e: &EqCmd, verbose: bool) -> Result<Value> {
    match e {
        EqCmd::Classify { fiber, gvpf, chambers } => {
            let d = match (fiber, gvpf, chambers) {
                (Some(f), _, _) => eqstruct::classify(&FiberSpec::from_json_value(&read_json(f)?)?)?,
                (None, Some(g), Some(ch)) => {
                    let g = GeneralizedVpf::from_json_value(&read_json(g)?)?;
                    let chv = read_json(ch)?;
                    let list = chv.as_array().ok_or_else(|| Error::Json("chambers are an array".into()))?;
                    let list = list.iter().map(Chamber::from_json_value).collect::<Result<Vec<_>>>()?;
                    eqstruct::gvpf_to_descriptor(&g, &list)?
                }
                _ => return Err(Error::InvalidParameter("give --fiber, or --gvpf with --chambers".into())),
            };
            trace(verbose, || format!("{} polynomials", d.polys.len()));
            Ok(d.to_json_value())
        }
        EqCmd::Build { poly } => Ok(eqstruct::build_ep(&NatPoly::from_json_value(&read_json(poly)?)?)?.to_json_value()),
        EqCmd::Check { input, descriptor, bound } => {
            let p = presentation(input)?;
            let d = read_descriptor(descriptor)?;
            Ok(eqstruct::check(&p, &d, *bound)?.to_json_value())
        }
        EqCmd::Multiset { input, bound } => Ok(eqstruct::empirical_multiset(&presentation(input)?, *bound)?.to_json_value()),
        EqCmd::Count { descriptor, size } => {
            let c = eqstruct::class_count(&read_descriptor(descriptor)?, *size)?;
            serde_json::to_value(c).map_err(|e| Error::Json(e.to_string()))
        }
    }
}
