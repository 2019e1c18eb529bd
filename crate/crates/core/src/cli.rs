//! Spec files, commands and reports for the `shiftlab` binary.
//!
//! A spec file is line oriented. Blank lines and text after `#` are ignored.
//!
//! ```text
//! universe Z
//! alphabet A set 0,1
//! alphabet B module m=2 k=2
//! subshift gm sft alphabet=A window=0..1 forbid=11
//! subshift lin sft_linear alphabet=B window=0..1 generators=1,0,1,0;0,1,0,1
//! subshift even sofic code=parity
//! ca parity domain=gm codomain=A memory=0..1 table=00:1,01:0,10:0
//! ca inv alphabet=B codomain=B memory=0..1 linear c0=1,0;0,1 c1=0,1;0,0
//! command c1 image-sft ca=parity subshift=gm depth=8
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::time::Instant;

use serde_json::{json, Value};

use crate::alphabet::{decode, Alphabet, Symbol};
use crate::cellular::{periodic_points, CellularAutomaton, LocalRule};
use crate::error::{Result, ShiftError};
use crate::imaging::{
    direct_sum_reduce, image_sft, recover_preimage_sft, sft_window_to_depth, sofic_image, sofic_preimage, Verification,
};
use crate::inversion::{
    check_injective, find_inverse_window, invert, ChainEntry, InverseCertificate, Realized, SearchOptions,
    StabilizationChain, Track, WindowSearch,
};
use crate::modlin::{Matrix, Submodule};
use crate::subshift::{restrict, Allowed, Caps, Presentation, SftPresentation, SoficPresentation};
use crate::universe::{FiniteWindow, Universe};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::Fail => EXIT_FAIL,
            Status::Inconclusive => EXIT_INCONCLUSIVE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandLine {
    pub name: String,
    pub command: String,
    pub args: BTreeMap<String, String>,
}

/// A parsed spec file. Names are unique within each kind.
#[derive(Debug, Clone)]
pub struct SpecFile {
    pub universe: Universe,
    pub alphabets: BTreeMap<String, Alphabet>,
    pub subshifts: BTreeMap<String, Presentation>,
    pub automata: BTreeMap<String, CellularAutomaton>,
    pub commands: Vec<CommandLine>,
}

struct Line<'a> {
    no: usize,
    words: Vec<&'a str>,
    keys: BTreeMap<&'a str, &'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, msg: impl Into<String>) -> ShiftError {
        ShiftError::Parse { line: self.no, msg: msg.into() }
    }

    fn key(&self, k: &str) -> Result<&'a str> {
        self.keys.get(k).copied().ok_or_else(|| self.err(format!("missing `{k}=`")))
    }

    fn ctx<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            ShiftError::Parse { .. } | ShiftError::CapExceeded { .. } => e,
            other => self.err(other.to_string()),
        })
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty())
}

impl SpecFile {
    pub fn parse(text: &str, caps: &Caps) -> Result<SpecFile> {
        let mut spec = SpecFile {
            universe: Universe::Z,
            alphabets: BTreeMap::new(),
            subshifts: BTreeMap::new(),
            automata: BTreeMap::new(),
            commands: Vec::new(),
        };
        let mut seen_universe = false;
        for (i, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut line = Line { no: i + 1, words: Vec::new(), keys: BTreeMap::new() };
            for tok in body.split_whitespace() {
                match tok.split_once('=') {
                    Some((k, v)) => {
                        if line.keys.insert(k, v).is_some() {
                            return Err(line.err(format!("duplicate key `{k}`")));
                        }
                    }
                    None => line.words.push(tok),
                }
            }
            match line.words[0] {
                "universe" => {
                    if seen_universe || !(spec.alphabets.is_empty() && spec.subshifts.is_empty()) {
                        return Err(line.err("universe must be declared once, first"));
                    }
                    spec.universe = line.ctx(Universe::parse(&line.words[1..].join(" ")))?;
                    seen_universe = true;
                }
                "alphabet" => spec.parse_alphabet(&line)?,
                "subshift" => spec.parse_subshift(&line, caps)?,
                "ca" => spec.parse_ca(&line, caps)?,
                "command" => {
                    let (name, command) = match line.words[..] {
                        [_, n, c] => (n, c),
                        _ => return Err(line.err("expected `command NAME SUBCOMMAND key=value ...`")),
                    };
                    if spec.commands.iter().any(|c| c.name == name) {
                        return Err(line.err(format!("duplicate command `{name}`")));
                    }
                    let args = line.keys.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
                    spec.commands.push(CommandLine { name: name.into(), command: command.into(), args });
                }
                other => return Err(line.err(format!("unknown declaration `{other}`"))),
            }
        }
        Ok(spec)
    }

    fn parse_alphabet(&mut self, line: &Line<'_>) -> Result<()> {
        let (name, rest) = match line.words.get(1) {
            Some(&("set" | "module")) => ("default", &line.words[1..]),
            Some(&n) => (n, &line.words[2..]),
            None => return Err(line.err("expected `alphabet NAME set ...` or `alphabet NAME module m=.. k=..`")),
        };
        let alphabet = match rest {
            ["set", symbols] => line.ctx(Alphabet::set(split_list(symbols)))?,
            ["module"] => {
                let m: u64 = line.key("m")?.parse().map_err(|_| line.err("bad modulus"))?;
                let k: usize = line.key("k")?.parse().map_err(|_| line.err("bad rank"))?;
                line.ctx(crate::modlin::ModRing::new(m).and_then(|r| Alphabet::module(r, k)))?
            }
            _ => return Err(line.err("expected `set a,b,...` or `module m=.. k=..`")),
        };
        if self.alphabets.insert(name.into(), alphabet).is_some() {
            return Err(line.err(format!("duplicate alphabet `{name}`")));
        }
        Ok(())
    }

    fn alphabet_for(&self, line: &Line<'_>) -> Result<Alphabet> {
        match line.keys.get("alphabet") {
            Some(n) => self.alphabets.get(*n).cloned().ok_or_else(|| line.err(format!("unknown alphabet `{n}`"))),
            None if self.alphabets.len() == 1 => Ok(self.alphabets.values().next().unwrap().clone()),
            None => Err(line.err("`alphabet=` required when several alphabets are declared")),
        }
    }

    fn sft(&self, line: &Line<'_>, name: &str) -> Result<SftPresentation> {
        match self.subshifts.get(name) {
            Some(Presentation::Sft(s)) => Ok(s.clone()),
            Some(Presentation::Sofic(_)) => Err(line.err(format!("`{name}` is sofic; an SFT is required here"))),
            None => Err(line.err(format!("unknown subshift `{name}`"))),
        }
    }

    fn parse_subshift(&mut self, line: &Line<'_>, caps: &Caps) -> Result<()> {
        let (name, kind) = match line.words[..] {
            [_, n, k] => (n, k),
            _ => return Err(line.err("expected `subshift NAME sft|sft_linear|sofic key=value ...`")),
        };
        if self.subshifts.contains_key(name) {
            return Err(line.err(format!("duplicate subshift `{name}`")));
        }
        let p = match kind {
            "sft" => {
                let alphabet = self.alphabet_for(line)?;
                let window = line.ctx(FiniteWindow::parse(self.universe, line.key("window")?))?;
                let blocks = |list: &str| -> Result<Vec<Vec<Symbol>>> {
                    split_list(list).map(|b| line.ctx(alphabet.parse_block(b))).collect()
                };
                let s = match (line.keys.get("allow"), line.keys.get("forbid")) {
                    (Some(a), None) => SftPresentation::from_blocks(alphabet.clone(), window, blocks(a)?),
                    (None, Some(f)) => SftPresentation::from_forbidden(alphabet.clone(), window, blocks(f)?, caps),
                    (None, None) => SftPresentation::from_forbidden(alphabet.clone(), window, Vec::new(), caps),
                    _ => return Err(line.err("give either `allow=` or `forbid=`, not both")),
                };
                Presentation::Sft(line.ctx(s)?)
            }
            "sft_linear" => {
                let alphabet = self.alphabet_for(line)?;
                let window = line.ctx(FiniteWindow::parse(self.universe, line.key("window")?))?;
                let ring = alphabet.ring().ok_or_else(|| line.err("sft_linear needs a module alphabet"))?;
                let rank = window.len() * alphabet.rank().unwrap();
                let gens = line.key("generators")?;
                let sub = if gens.trim().is_empty() {
                    Submodule::zero(ring, rank)
                } else {
                    let m = line.ctx(Matrix::parse(ring, gens))?;
                    if m.cols() != rank {
                        return Err(line.err(format!("generators need {rank} entries, got {}", m.cols())));
                    }
                    Submodule::from_matrix(&m)
                };
                Presentation::Sft(line.ctx(SftPresentation::linear(alphabet, window, sub))?)
            }
            "sofic" => {
                let code_name = line.key("code")?;
                let code = self.automata.get(code_name).ok_or_else(|| line.err(format!("unknown ca `{code_name}`")))?;
                if let Some(src) = line.keys.get("source") {
                    let s = self.sft(line, src)?;
                    if !line.ctx(crate::subshift::sft_equal(&s, code.domain(), caps))? {
                        return Err(line.err(format!("`{src}` is not the domain of `{code_name}`")));
                    }
                }
                Presentation::Sofic(SoficPresentation::new(code.clone()))
            }
            other => return Err(line.err(format!("unknown subshift kind `{other}`"))),
        };
        self.subshifts.insert(name.into(), p);
        Ok(())
    }

    fn parse_ca(&mut self, line: &Line<'_>, caps: &Caps) -> Result<()> {
        let name = match line.words.get(1) {
            Some(n) => *n,
            None => return Err(line.err("expected `ca NAME domain=.. memory=.. table=..|linear`")),
        };
        if self.automata.contains_key(name) {
            return Err(line.err(format!("duplicate ca `{name}`")));
        }
        let domain = match line.keys.get("domain") {
            Some(d) => self.sft(line, d)?,
            None => {
                let a = self.alphabet_for(line)?;
                SftPresentation::full(a, self.universe)
            }
        };
        let codomain = match line.keys.get("codomain") {
            Some(n) => self.alphabets.get(*n).cloned().ok_or_else(|| line.err(format!("unknown alphabet `{n}`")))?,
            None => domain.alphabet().clone(),
        };
        let memory = line.ctx(FiniteWindow::parse(self.universe, line.key("memory")?))?;
        let ca = if line.words.get(2) == Some(&"linear") {
            let ring = domain.alphabet().ring().ok_or_else(|| line.err("linear rules need module alphabets"))?;
            let (ka, kb) = (domain.alphabet().rank().unwrap(), codomain.rank().ok_or_else(|| line.err("codomain is not a module"))?);
            let mut coeffs = Vec::with_capacity(memory.len());
            for h in memory.elements() {
                let c = match line.keys.get(format!("c{h}").as_str()) {
                    Some(text) => line.ctx(Matrix::parse(ring, text))?,
                    None => Matrix::zeros(ring, kb, ka),
                };
                if c.rows() != kb || c.cols() != ka {
                    return Err(line.err(format!("coefficient c{h} must be {kb}x{ka}")));
                }
                coeffs.push(c);
            }
            for k in line.keys.keys().filter(|k| k.starts_with('c') && **k != "codomain") {
                let known = memory.elements().iter().any(|h| format!("c{h}") == *k);
                if !known {
                    return Err(line.err(format!("coefficient `{k}` is outside the memory")));
                }
            }
            line.ctx(CellularAutomaton::linear(domain, codomain, memory, coeffs))?
        } else {
            let table = line.key("table")?;
            let mut entries = BTreeMap::new();
            for item in split_list(table) {
                let (b, o) = item.rsplit_once(':').ok_or_else(|| line.err(format!("bad table entry `{item}`")))?;
                let block = line.ctx(domain.alphabet().parse_block(b))?;
                if block.len() != memory.len() {
                    return Err(line.err(format!("table block `{b}` does not fit the memory")));
                }
                entries.insert(block, line.ctx(codomain.parse_symbol(o))?);
            }
            line.ctx(CellularAutomaton::from_table(domain, codomain, memory, &entries, caps))?
        };
        self.automata.insert(name.into(), ca);
        Ok(())
    }

    pub fn subshift(&self, name: &str) -> Result<&Presentation> {
        self.subshifts.get(name).ok_or_else(|| ShiftError::Invalid(format!("unknown subshift `{name}`")))
    }

    pub fn automaton(&self, name: &str) -> Result<&CellularAutomaton> {
        self.automata.get(name).ok_or_else(|| ShiftError::Invalid(format!("unknown ca `{name}`")))
    }
}

/// Writes presentations back in spec syntax. Alphabets and domains are
/// emitted once each, under generated names.
#[derive(Debug, Default)]
pub struct Emitter {
    lines: Vec<String>,
    universe: Option<Universe>,
    alphabets: Vec<(Alphabet, String)>,
    sfts: Vec<(SftPresentation, String)>,
}

fn universe_text(u: Universe) -> String {
    match u {
        Universe::Z => "Z".into(),
        Universe::N => "N".into(),
        Universe::Free(r) => format!("free {r}"),
    }
}

impl Emitter {
    pub fn new() -> Self {
        Self::default()
    }

    fn universe(&mut self, u: Universe) {
        if self.universe.is_none() {
            self.universe = Some(u);
            self.lines.insert(0, format!("universe {}", universe_text(u)));
        }
    }

    pub fn alphabet(&mut self, a: &Alphabet) -> String {
        if let Some((_, n)) = self.alphabets.iter().find(|(b, _)| b == a) {
            return n.clone();
        }
        let name = format!("A{}", self.alphabets.len());
        self.lines.push(format!("alphabet {name} {a}"));
        self.alphabets.push((a.clone(), name.clone()));
        name
    }

    pub fn sft(&mut self, name: &str, s: &SftPresentation) -> String {
        self.universe(s.universe());
        let a = self.alphabet(s.alphabet());
        let body = match s.allowed() {
            Allowed::Blocks(codes) => {
                let n = s.window().len();
                let blocks: Vec<String> = codes
                    .iter()
                    .map(|&c| s.alphabet().format_block(&decode(s.alphabet().size(), n, c)))
                    .collect();
                format!("sft alphabet={a} window={} allow={}", s.window(), blocks.join(","))
            }
            Allowed::Linear(sub) => format!("sft_linear alphabet={a} window={} generators={}", s.window(), sub.matrix()),
        };
        self.lines.push(format!("subshift {name} {body}"));
        self.sfts.push((s.clone(), name.to_string()));
        name.to_string()
    }

    fn domain(&mut self, s: &SftPresentation) -> String {
        if let Some((_, n)) = self.sfts.iter().find(|(t, _)| t == s) {
            return n.clone();
        }
        let name = format!("S{}", self.sfts.len());
        self.sft(&name, s)
    }

    pub fn automaton(&mut self, name: &str, ca: &CellularAutomaton, caps: &Caps) -> Result<String> {
        let d = self.domain(ca.domain());
        let b = self.alphabet(ca.codomain());
        let mut line = format!("ca {name} domain={d} codomain={b} memory={}", ca.memory());
        match ca.rule() {
            LocalRule::Linear(cs) => {
                line.push_str(" linear");
                for (h, c) in ca.memory().elements().iter().zip(cs) {
                    let _ = write!(line, " c{h}={c}");
                }
            }
            LocalRule::Table(_) => {
                let a = ca.domain().alphabet();
                let n = ca.memory().len();
                let entries: Vec<String> = ca
                    .table(caps)?
                    .iter()
                    .map(|(&code, &out)| {
                        format!("{}:{}", a.format_block(&decode(a.size(), n, code)), ca.codomain().name(out))
                    })
                    .collect();
                let _ = write!(line, " table={}", entries.join(","));
            }
        }
        self.lines.push(line);
        Ok(name.to_string())
    }

    pub fn presentation(&mut self, name: &str, p: &Presentation, caps: &Caps) -> Result<String> {
        match p {
            Presentation::Sft(s) => Ok(self.sft(name, s)),
            Presentation::Sofic(s) => {
                self.universe(s.universe());
                let code = self.automaton(&format!("{name}_code"), s.code(), caps)?;
                let src = self.domain(s.source());
                self.lines.push(format!("subshift {name} sofic source={src} code={code}"));
                Ok(name.to_string())
            }
        }
    }

    pub fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Command-line options shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    pub ca: Option<String>,
    pub subshift: Option<String>,
    pub window: Option<String>,
    pub depth: usize,
    pub n_max: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { ca: None, subshift: None, window: None, depth: 8, n_max: 64 }
    }
}

pub const COMMANDS: &[&str] = &[
    "check-injective",
    "inverse-window",
    "synthesize-inverse",
    "image-sft",
    "recover-sft",
    "sofic-image",
    "sofic-preimage",
    "reduce-direct-sum",
    "restrict",
    "emit-graph",
];

/// Result of one command: canonical payload, a human summary and optional DOT.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: String,
    pub status: Status,
    pub summary: String,
    pub payload: Value,
    pub dot: Option<String>,
}

impl Outcome {
    fn new(command: &str, status: Status, summary: impl Into<String>, payload: Value) -> Self {
        Outcome { command: command.into(), status, summary: summary.into(), payload, dot: None }
    }

    pub fn canonical(&self) -> Value {
        json!({ "command": self.command, "status": self.status.name(), "summary": self.summary, "payload": self.payload })
    }
}

fn usage(msg: impl Into<String>) -> ShiftError {
    ShiftError::Invalid(msg.into())
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| usage(format!("--{flag} is required")))
}

fn realized_json(r: &Realized, a: &Alphabet) -> Value {
    match r {
        Realized::Pairs(p) => json!({ "pairs": p.iter().map(|&(x, y)| [a.name(x), a.name(y)]).collect::<Vec<_>>() }),
        Realized::Kernel(k) => json!({ "kernel": k.matrix().to_string() }),
    }
}

fn chain_json(c: &StabilizationChain, a: &Alphabet) -> Value {
    let entries: Vec<Value> = c
        .entries
        .iter()
        .map(|ChainEntry { n, window, realized, holds }| {
            json!({ "n": n, "window": window.to_string(), "holds": holds, "realized": realized_json(realized, a) })
        })
        .collect();
    let kernel_chain = c.kernel_chain.as_ref().map(|(subs, idx)| {
        json!({ "values": subs.iter().map(|s| s.matrix().to_string()).collect::<Vec<_>>(), "stabilized_at": idx })
    });
    json!({ "track": c.track.name(), "entries": entries, "first_success": c.first_success, "kernel_chain": kernel_chain })
}

fn verification_json(v: &Verification) -> Value {
    json!({ "exact_equal": v.exact_equal, "depth": v.depth, "equal_to_depth": v.equal_to_depth })
}

fn sft_json(s: &SftPresentation, caps: &Caps) -> Result<Value> {
    let blocks = s.allowed_blocks(caps)?;
    let a = s.alphabet();
    let names: Vec<String> = blocks.blocks().map(|b| a.format_block(&b)).collect();
    let matrix = match s.allowed() {
        Allowed::Linear(sub) => Some(sub.matrix().to_string()),
        Allowed::Blocks(_) => None,
    };
    Ok(json!({ "window": s.window().to_string(), "alphabet": a.to_string(), "block_count": names.len(), "blocks": names, "matrix": matrix }))
}

fn emitted(name: &str, p: &Presentation, caps: &Caps) -> Result<String> {
    let mut e = Emitter::new();
    e.presentation(name, p, caps)?;
    Ok(e.finish())
}

fn graph_dot(p: &Presentation, caps: &Caps) -> Result<(String, usize, usize)> {
    let s = match p {
        Presentation::Sft(s) => s.clone(),
        Presentation::Sofic(s) => s.source().clone(),
    };
    let g = s.transfer_graph(caps)?;
    let e = g.essentialize();
    Ok((e.to_dot(s.alphabet()), g.vertex_count(), e.vertex_count()))
}

/// Smallest periodic witness of non-injectivity, if one exists with period at most `max_period`.
fn periodic_witness(ca: &CellularAutomaton, track: Track, max_period: usize, caps: &Caps) -> Result<Option<String>> {
    let a = ca.domain().alphabet();
    let points = periodic_points(ca.domain(), max_period, caps)?;
    let describe = |x: &crate::cellular::PeriodicConfig| {
        let mut s = String::new();
        if !x.preperiod.is_empty() {
            s.push_str(&a.format_block(&x.preperiod));
        }
        if x.cycle.len() == 1 && x.preperiod.is_empty() {
            format!("constant {}", a.name(x.cycle[0]))
        } else {
            format!("{s}({})^inf", a.format_block(&x.cycle))
        }
    };
    let span = 2 * (max_period as i64) * 60;
    let lo = if ca.universe() == Universe::Z { -span } else { 0 };
    match track {
        Track::Linear => {
            for x in &points {
                if x.cycle.iter().chain(&x.preperiod).all(|&v| v == 0) {
                    continue;
                }
                let y = ca.apply_periodic(x)?;
                if y.cycle.iter().chain(&y.preperiod).all(|&v| v == 0) {
                    return Ok(Some(format!("kernel contains {}", describe(x))));
                }
            }
        }
        Track::Set => {
            let mut seen: HashMap<Vec<Symbol>, usize> = HashMap::new();
            for (i, x) in points.iter().enumerate() {
                let key = ca.apply_periodic(x)?.window_values(lo, span);
                if let Some(&j) = seen.get(&key) {
                    if !points[j].same_as(x) {
                        return Ok(Some(format!("{} and {} have the same image", describe(&points[j]), describe(x))));
                    }
                } else {
                    seen.insert(key, i);
                }
            }
        }
    }
    Ok(None)
}

fn certificate(ca: &CellularAutomaton, opts: &Options, caps: &Caps) -> Result<std::result::Result<InverseCertificate, WindowSearch>> {
    invert(ca, SearchOptions { n_max: opts.n_max, ..SearchOptions::default() }, caps)
}

fn inconclusive(command: &str, search: &WindowSearch, a: &Alphabet) -> Outcome {
    let (n_max, chain) = match search {
        WindowSearch::Inconclusive { n_max, chain } => (*n_max, chain),
        WindowSearch::Found { chain, .. } => (0, chain),
    };
    Outcome::new(
        command,
        Status::Inconclusive,
        format!("inconclusive: no inverse window found up to n={n_max}"),
        json!({ "n_max": n_max, "transcript": chain_json(chain, a) }),
    )
}

fn certificate_json(cert: &InverseCertificate, ca: &CellularAutomaton, caps: &Caps) -> Result<Value> {
    let a = ca.domain().alphabet();
    let b = ca.codomain();
    let n = cert.window.len();
    let eta: BTreeMap<String, String> = cert
        .eta
        .iter()
        .map(|(&code, &s)| (b.format_block(&decode(b.size(), n, code)), a.name(s)))
        .collect();
    let mut e = Emitter::new();
    e.automaton("sigma", &cert.sigma, caps)?;
    Ok(json!({
        "window": cert.window.to_string(),
        "eta": eta,
        "eta_matrix": cert.eta_linear.as_ref().map(|m| m.to_string()),
        "merged_window": cert.merged_window.to_string(),
        "sigma_memory": cert.sigma.memory().to_string(),
        "sigma": e.finish(),
        "checks": {
            "blocks": cert.checks.blocks_checked,
            "periodic": cert.checks.periodic_checked,
            "max_period": cert.checks.max_period,
        },
        "transcript": cert.transcript.as_ref().map(|c| chain_json(c, a)),
    }))
}

fn as_sofic(p: &Presentation, caps: &Caps) -> Result<SoficPresentation> {
    match p {
        Presentation::Sft(s) => SoficPresentation::of_sft(s, caps),
        Presentation::Sofic(s) => Ok(s.clone()),
    }
}

fn sft_only(spec: &SpecFile, name: &str) -> Result<SftPresentation> {
    match spec.subshift(name)? {
        Presentation::Sft(s) => Ok(s.clone()),
        Presentation::Sofic(_) => Err(usage(format!("`{name}` must be an SFT"))),
    }
}

/// Runs one command against a parsed spec.
pub fn execute(spec: &SpecFile, command: &str, opts: &Options, caps: &Caps) -> Result<Outcome> {
    let ca = || spec.automaton(need(&opts.ca, "ca")?);
    let sub = || need(&opts.subshift, "subshift");
    match command {
        "check-injective" => {
            let ca = ca()?;
            let r = check_injective(ca, caps)?;
            let a = ca.domain().alphabet();
            if r.injective {
                return Ok(Outcome::new(
                    command,
                    Status::Ok,
                    "injective",
                    json!({ "injective": true, "track": r.track.name(), "origin": realized_json(&r.at_identity, a) }),
                ));
            }
            let witness = periodic_witness(ca, r.track, opts.depth.min(6), caps).ok().flatten();
            let summary = match &witness {
                Some(w) => format!("not injective: {w}"),
                None => match &r.at_identity {
                    Realized::Kernel(k) => format!("not injective: kernel at the origin spanned by {}", k.matrix()),
                    Realized::Pairs(p) => format!("not injective: {} distinct pairs collide at the origin", p.iter().filter(|(x, y)| x != y).count()),
                },
            };
            Ok(Outcome::new(
                command,
                Status::Fail,
                summary,
                json!({ "injective": false, "track": r.track.name(), "origin": realized_json(&r.at_identity, a), "witness": witness }),
            ))
        }
        "inverse-window" => {
            let ca = ca()?;
            let a = ca.domain().alphabet();
            if !check_injective(ca, caps)?.injective {
                return Ok(Outcome::new(command, Status::Fail, "not injective", json!({ "injective": false })));
            }
            match find_inverse_window(ca, SearchOptions { n_max: opts.n_max, ..SearchOptions::default() }, caps)? {
                WindowSearch::Found { window, chain } => Ok(Outcome::new(
                    command,
                    Status::Ok,
                    format!("N={window}"),
                    json!({ "window": window.to_string(), "transcript": chain_json(&chain, a) }),
                )),
                s @ WindowSearch::Inconclusive { .. } => Ok(inconclusive(command, &s, a)),
            }
        }
        "synthesize-inverse" => {
            let ca = ca()?;
            match certificate(ca, opts, caps) {
                Err(ShiftError::NotInjective) => Ok(Outcome::new(command, Status::Fail, "not injective", json!({ "injective": false }))),
                Err(e) => Err(e),
                Ok(Err(s)) => Ok(inconclusive(command, &s, ca.domain().alphabet())),
                Ok(Ok(cert)) => Ok(Outcome::new(
                    command,
                    Status::Ok,
                    format!("N={}, sigma memory {}, {} blocks verified", cert.window, cert.sigma.memory(), cert.checks.blocks_checked),
                    certificate_json(&cert, ca, caps)?,
                )),
            }
        }
        "image-sft" | "recover-sft" => {
            let ca = ca()?;
            let s = sft_only(spec, sub()?)?;
            let cert = match certificate(ca, opts, caps) {
                Err(ShiftError::NotInjective) => return Ok(Outcome::new(command, Status::Fail, "not injective", json!({ "injective": false }))),
                Err(e) => return Err(e),
                Ok(Err(search)) => return Ok(inconclusive(command, &search, ca.domain().alphabet())),
                Ok(Ok(c)) => c,
            };
            let (p, merged, v) = if command == "image-sft" {
                let r = image_sft(ca, &s, &cert, opts.depth, caps)?;
                (r.presentation, r.merged_window, r.verification)
            } else {
                let r = recover_preimage_sft(ca, &s, &cert, opts.depth, caps)?;
                (r.presentation, r.merged_window, r.verification)
            };
            let body = sft_json(&p, caps)?;
            let p = Presentation::Sft(p);
            let mut out = Outcome::new(
                command,
                Status::Ok,
                format!("window {}, {} allowed blocks", body["window"].as_str().unwrap_or(""), body["block_count"]),
                json!({
                    "presentation": body,
                    "merged_window": merged.to_string(),
                    "verification": verification_json(&v),
                    "spec": emitted("result", &p, caps)?,
                }),
            );
            out.dot = Some(graph_dot(&p, caps)?.0);
            Ok(out)
        }
        "sofic-image" | "sofic-preimage" => {
            let ca = ca()?;
            let input = as_sofic(spec.subshift(sub()?)?, caps)?;
            let result = if command == "sofic-image" {
                sofic_image(ca, &input, caps)?
            } else {
                let cert = match certificate(ca, opts, caps) {
                    Err(ShiftError::NotInjective) => return Ok(Outcome::new(command, Status::Fail, "not injective", json!({ "injective": false }))),
                    Err(e) => return Err(e),
                    Ok(Err(search)) => return Ok(inconclusive(command, &search, ca.domain().alphabet())),
                    Ok(Ok(c)) => c,
                };
                sofic_preimage(ca, &input, &cert, caps)?
            };
            let p = Presentation::Sofic(result);
            let sft_window = sft_window_to_depth(&p, opts.depth, caps)?;
            let summary = match sft_window {
                Some(k) => format!("sofic presentation; SFT with window width {k}"),
                None => format!("sofic presentation; SFT check failed to depth {}", opts.depth),
            };
            let w = FiniteWindow::interval(p.universe(), 0, opts.depth as i64 - 1)?;
            let blocks = restrict(&p, &w, caps)?.blocks.len();
            Ok(Outcome::new(
                command,
                Status::Ok,
                summary,
                json!({ "sft_window": sft_window, "depth": opts.depth, "blocks_at_depth": blocks, "spec": emitted("result", &p, caps)? }),
            ))
        }
        "reduce-direct-sum" => {
            let ca = ca()?;
            let red = direct_sum_reduce(ca, caps)?;
            let direct = check_injective(ca, caps)?.injective;
            let reduced = check_injective(&red.automaton, caps)?.injective;
            let agree = direct == reduced;
            let status = if agree { Status::Ok } else { Status::Fail };
            Ok(Outcome::new(
                command,
                status,
                format!("injective: direct {direct}, reduced {reduced}"),
                json!({
                    "alphabet": red.domain_alphabet.to_string(),
                    "memory": red.automaton.memory().to_string(),
                    "direct_injective": direct,
                    "reduced_injective": reduced,
                    "agree": agree,
                }),
            ))
        }
        "restrict" => {
            let p = spec.subshift(sub()?)?;
            let w = FiniteWindow::parse(p.universe(), need(&opts.window, "window")?)?;
            let r = restrict(p, &w, caps)?;
            let a = p.alphabet();
            let blocks: Vec<String> = r.blocks.blocks().map(|b| a.format_block(&b)).collect();
            Ok(Outcome::new(
                command,
                Status::Ok,
                format!("{} blocks on {w}", blocks.len()),
                json!({ "window": w.to_string(), "block_count": blocks.len(), "blocks": blocks, "matrix": r.submodule.map(|s| s.matrix().to_string()) }),
            ))
        }
        "emit-graph" => {
            let p = spec.subshift(sub()?)?;
            let (dot, total, essential) = graph_dot(p, caps)?;
            let mut out = Outcome::new(
                command,
                Status::Ok,
                format!("{essential} essential vertices of {total}"),
                json!({ "vertices": total, "essential": essential }),
            );
            out.dot = Some(dot);
            Ok(out)
        }
        other => Err(usage(format!("unknown command `{other}`"))),
    }
}

/// Exit code for an error raised while running a command.
pub fn error_exit_code(e: &ShiftError) -> i32 {
    match e {
        ShiftError::CapExceeded { .. } => EXIT_INCONCLUSIVE,
        ShiftError::NotInjective
        | ShiftError::Containment(_)
        | ShiftError::NotContained(..)
        | ShiftError::VerificationFailed(_)
        | ShiftError::NonFunctional(_) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// A full run: outcomes, canonical report and timings.
#[derive(Debug, Clone)]
pub struct Run {
    pub outcomes: Vec<(String, std::result::Result<Outcome, String>)>,
    pub exit_code: i32,
    pub timings_ms: Vec<(String, f64)>,
}

impl Run {
    pub fn canonical(&self) -> Value {
        let results: Vec<Value> = self
            .outcomes
            .iter()
            .map(|(name, o)| match o {
                Ok(o) => json!({ "name": name, "result": o.canonical() }),
                Err(e) => json!({ "name": name, "result": { "status": "error", "error": e } }),
            })
            .collect();
        json!({ "exit_code": self.exit_code, "results": results })
    }

    pub fn report(&self) -> Value {
        let timings: BTreeMap<&str, f64> = self.timings_ms.iter().map(|(n, t)| (n.as_str(), *t)).collect();
        json!({ "canonical": self.canonical(), "timings_ms": timings })
    }
}

/// Runs `command` (or every `command` line of the spec for `run`).
pub fn run(spec: &SpecFile, command: &str, opts: &Options, caps: &Caps) -> Run {
    let jobs: Vec<(String, String, Options)> = if command == "run" {
        spec.commands
            .iter()
            .map(|c| {
                let mut o = opts.clone();
                o.ca = c.args.get("ca").cloned().or(o.ca);
                o.subshift = c.args.get("subshift").cloned().or(o.subshift);
                o.window = c.args.get("window").cloned().or(o.window);
                if let Some(d) = c.args.get("depth").and_then(|d| d.parse().ok()) {
                    o.depth = d;
                }
                if let Some(n) = c.args.get("nmax").and_then(|d| d.parse().ok()) {
                    o.n_max = n;
                }
                (c.name.clone(), c.command.clone(), o)
            })
            .collect()
    } else {
        vec![(command.to_string(), command.to_string(), opts.clone())]
    };
    let mut outcomes = Vec::new();
    let mut timings = Vec::new();
    let mut exit = EXIT_OK;
    for (name, cmd, o) in jobs {
        let start = Instant::now();
        let r = execute(spec, &cmd, &o, caps);
        timings.push((name.clone(), start.elapsed().as_secs_f64() * 1e3));
        let code = match &r {
            Ok(out) => out.status.exit_code(),
            Err(e) => error_exit_code(e),
        };
        exit = exit.max(code);
        outcomes.push((name, r.map_err(|e| e.to_string())));
    }
    Run { outcomes, exit_code: exit, timings_ms: timings }
}
