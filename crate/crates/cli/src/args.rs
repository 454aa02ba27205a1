use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "takagi", version, about = "Takagi functions and edge isoperimetry on finite abelian groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The Takagi function ω_m
    #[command(subcommand)]
    Omega(OmegaCmd),
    /// Edge boundaries in Cayley graphs
    #[command(subcommand)]
    Boundary(BoundaryCmd),
    /// Minimum-boundary searches
    #[command(subcommand)]
    Search(SearchCmd),
    /// The function classes F_m
    #[command(subcommand)]
    Fclass(FclassCmd),
}

#[derive(Subcommand, Debug)]
pub enum OmegaCmd {
    /// Evaluate ω_m at a point
    Eval(OmegaEval),
    /// Scaled table m^r ω_m(n/m^r)
    Table(OmegaTableArgs),
    /// CSV of ω_m and its logarithmic bounds
    PlotData(PlotDataArgs),
    /// Check the logarithmic bounds on a grid
    BoundsCheck(BoundsCheckArgs),
}

#[derive(Subcommand, Debug)]
pub enum BoundaryCmd {
    /// Boundary of one subset
    Count(BoundaryCountArgs),
    /// Boundary of every initial segment against the scaled Takagi table
    LexCheck(LexCheckArgs),
}

#[derive(Subcommand, Debug)]
pub enum SearchCmd {
    /// Minimum boundary over n-subsets
    Min(SearchMinArgs),
    /// Check the (e/m) n ln(|G|/n) lower bound against exhaustive minima
    VerifyMain1(VerifyMain1Args),
    /// Check (1/m) |G| f(n/|G|) against exhaustive minima
    VerifyIsoper(VerifyIsoperArgs),
    /// Look for a subset of C_m^r beating its initial segment
    FindViolation(FindViolationArgs),
}

#[derive(Subcommand, Debug)]
pub enum FclassCmd {
    /// Defect of one tuple
    Defect(DefectArgs),
    /// Search for a tuple with positive defect
    Refute(RefuteArgs),
    /// Exhaustive scan of all grid multisets
    Scan(ScanArgs),
    /// Bracket on the extremal function F_m
    Envelope(EnvelopeArgs),
    /// Grid propagation of the extremal recursion
    Propagate(PropagateArgs),
    /// Cyclic-variation inequality on a grid
    Funny(FunnyArgs),
    /// Dyadic Boros–Páles inequality
    Bp(BpArgs),
    /// Three-point integer inequality for T_r
    Bp3(Bp3Args),
    /// Power inequality for ω_m
    Kpow(KpowArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Found,
    None,
}

#[derive(Args, Debug, Serialize)]
pub struct Threads {
    /// Worker threads (default: hardware parallelism)
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct OmegaEval {
    #[arg(short = 'm')]
    pub m: u64,
    /// Rational `p/q`, or a decimal with --float
    #[arg(short = 'x', allow_hyphen_values = true)]
    pub x: String,
    /// Use the truncated series instead of exact arithmetic
    #[arg(long)]
    pub float: bool,
    /// Series terms for --float (default: enough for 1e-15)
    #[arg(long)]
    pub terms: Option<u32>,
    /// Emit a JSON report instead of the bare value
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct OmegaTableArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(short = 'r')]
    pub r: u32,
    #[arg(long, default_value_t = 1 << 22)]
    pub max_entries: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct PlotDataArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(long, default_value_t = 1024)]
    pub resolution: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsCheckArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(long, default_value_t = 1024)]
    pub grid: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct GroupArgs {
    /// Moduli, e.g. `3,3`
    #[arg(long)]
    pub group: String,
    /// Generators, e.g. `1,0;0,1` (default: unit vectors)
    #[arg(long)]
    pub gens: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundaryCountArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub group: GroupArgs,
    /// Member indices, e.g. `0,1,5`
    #[arg(long, conflicts_with_all = ["hex", "elements"])]
    pub members: Option<String>,
    /// Membership mask in hex, bit i = index i
    #[arg(long, conflicts_with = "elements")]
    pub hex: Option<String>,
    /// Member coordinates, e.g. `0,0;1,0`
    #[arg(long)]
    pub elements: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct LexCheckArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(short = 'r')]
    pub r: u32,
    #[arg(long, default_value_t = 1 << 22)]
    pub max_order: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchMinArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub group: GroupArgs,
    /// Subset sizes, e.g. `4`, `1,2,3` or `1..6`
    #[arg(long)]
    pub n: String,
    /// Enumerate every subset (the default unless --budget is given)
    #[arg(long, conflicts_with = "budget")]
    pub exhaustive: bool,
    /// Evaluations for the local search
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Start the local search from the initial segment
    #[arg(long)]
    pub from_lex: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub threads: Threads,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyMain1Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub group: GroupArgs,
    /// Subset sizes (default: 1..|G|-1)
    #[arg(long)]
    pub n: Option<String>,
    /// A multiple of the group exponent to use in the bound
    #[arg(short = 'm')]
    pub m: Option<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub threads: Threads,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyIsoperArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub group: GroupArgs,
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(short = 'm')]
    pub m: u64,
    /// Subset sizes (default: 1..|G|-1)
    #[arg(long)]
    pub n: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub threads: Threads,
}

#[derive(Args, Debug, Serialize)]
pub struct FindViolationArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(short = 'r')]
    pub r: u32,
    /// Subset sizes (default: 1..m^r-1)
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    #[command(flatten)]
    #[serde(flatten)]
    pub threads: Threads,
}

#[derive(Args, Debug, Serialize)]
pub struct DefectArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(short = 'm')]
    pub m: u64,
    /// Tuple of rationals, e.g. `0,0,1/2`
    #[arg(long)]
    pub tuple: String,
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
}

#[derive(Args, Debug, Serialize)]
pub struct RefuteArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(long, default_value_t = 243)]
    pub grid: u64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    /// Perturbation steps per restart
    #[arg(long, default_value_t = 2000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    #[command(flatten)]
    #[serde(flatten)]
    pub threads: Threads,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(long)]
    pub grid: u64,
    /// Float-path tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub threads: Threads,
}

#[derive(Args, Debug, Serialize)]
pub struct EnvelopeArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(short = 'x')]
    pub x: String,
}

#[derive(Args, Debug, Serialize)]
pub struct PropagateArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(short = 'r')]
    pub r: u32,
    #[arg(long, default_value_t = 1 << 22)]
    pub max_entries: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct FunnyArgs {
    #[arg(long = "fn")]
    #[serde(rename = "fn")]
    pub function: String,
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(long)]
    pub grid: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BpArgs {
    #[arg(long, default_value_t = 8)]
    pub r_max: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct Bp3Args {
    #[arg(long, default_value_t = 4)]
    pub r_max: u32,
    #[arg(long, default_value_t = 81)]
    pub range: i64,
}

#[derive(Args, Debug, Serialize)]
pub struct KpowArgs {
    #[arg(short = 'm')]
    pub m: u64,
    #[arg(long, default_value_t = 256)]
    pub grid: u64,
    #[arg(long, default_value_t = 4)]
    pub k_max: u32,
}
