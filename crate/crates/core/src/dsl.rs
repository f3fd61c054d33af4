//! The `.onl` optical netlist format.
//!
//! One statement per line, `#` to end of line is a comment:
//!
//! ```text
//! version 1
//! beam src1 pol=H intensity=1
//! bs bs1 t=0.5 r=0.5
//! wp hwp1 eta=1pi phi=0
//! ps ref1 theta=1pi
//! mirror m1 sign=-1
//! det D1
//! connect src1.0 -> bs1.0
//! ```
//!
//! `pol` is `H` (x, logical 1), `V` (y, logical 0) or a raw Jones vector
//! `(re,im,re,im)`; the emitted field is `pol·√intensity`. Numbers are
//! decimal with an optional exponent and an optional `pi` suffix (`0.5pi`).
//! Ports are 0-based. Parsing reports every problem it finds, skipping to
//! the next line after each one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jones::{PolarizationState, WaveplateSpec};
use crate::network::{
    check_splitter, is_valid_identifier, validate, ElementKind, MirrorSign, Netlist,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A problem in netlist text; `line` and `column` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// A successfully parsed file.
#[derive(Debug, Clone, PartialEq)]
pub struct NetlistDocument {
    pub version: u32,
    pub netlist: Netlist,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

type LineResult<T> = std::result::Result<T, (usize, String)>;

fn tokenize(line: &str) -> LineResult<Vec<Token<'_>>> {
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let col = i + 1;
        let mut depth = 0usize;
        while i < chars.len() {
            let ch = chars[i].1;
            if depth == 0 && (ch.is_whitespace() || ch == '#') {
                break;
            }
            match ch {
                '(' => depth += 1,
                ')' if depth > 0 => depth -= 1,
                _ => {}
            }
            i += 1;
        }
        if depth > 0 {
            return Err((col, "unclosed '('".into()));
        }
        let end = chars.get(i).map_or(line.len(), |&(b, _)| b);
        tokens.push(Token { text: &line[start..end], col });
    }
    Ok(tokens)
}

/// Decimal literal with optional exponent and `pi` suffix.
pub fn parse_number(text: &str) -> std::result::Result<f64, String> {
    let (body, scale) = match text.strip_suffix("pi") {
        Some("") => ("1", PI),
        Some("-") => ("-1", PI),
        Some("+") => ("1", PI),
        Some(b) => (b, PI),
        None => (text, 1.0),
    };
    let well_formed = !body.is_empty()
        && body.chars().any(|c| c.is_ascii_digit())
        && body
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
    let value = well_formed
        .then(|| body.parse::<f64>().ok())
        .flatten()
        .ok_or_else(|| format!("'{text}' is not a number"))?;
    let value = if scale == 1.0 { value } else { value * scale };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{text}' is out of range"))
    }
}

/// `v` to 17 significant digits, trailing zeros dropped.
fn format_plain(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };

    if !(-7..=20).contains(&exp) {
        let (lead, rest) = digits.split_at(1);
        return if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        };
    }
    let point = exp + 1; // digits before the decimal point
    if point <= 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{sign}{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{sign}{int}.{frac}")
    }
}

/// Canonical rendering: `<k>pi` when `v` is exactly a small rational
/// multiple of π, else 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v != 0.0 {
        let k = (v / PI * 24.0).round() / 24.0;
        if k != 0.0 && k * PI == v {
            return format!("{}pi", format_plain(k));
        }
    }
    format_plain(v)
}

struct Params<'a> {
    values: BTreeMap<&'a str, Token<'a>>,
}

impl<'a> Params<'a> {
    fn collect(tokens: &[Token<'a>], allowed: &[&str]) -> LineResult<Self> {
        let mut values = BTreeMap::new();
        for tok in tokens {
            let (key, value) = tok
                .text
                .split_once('=')
                .ok_or_else(|| (tok.col, format!("expected key=value, found '{}'", tok.text)))?;
            if !allowed.contains(&key) {
                return Err((tok.col, format!("unknown parameter '{key}' (expected {})", allowed.join(", "))));
            }
            let value_tok = Token { text: value, col: tok.col + key.chars().count() + 1 };
            if values.insert(key, value_tok).is_some() {
                return Err((tok.col, format!("parameter '{key}' given twice")));
            }
        }
        Ok(Params { values })
    }

    fn raw(&self, key: &str, line_end: usize) -> LineResult<&Token<'a>> {
        self.values
            .get(key)
            .ok_or_else(|| (line_end, format!("missing parameter '{key}'")))
    }

    fn number(&self, key: &str, line_end: usize) -> LineResult<f64> {
        let tok = self.raw(key, line_end)?;
        parse_number(tok.text).map_err(|m| (tok.col, m))
    }
}

fn parse_polarization(tok: &Token<'_>) -> LineResult<PolarizationState> {
    match tok.text {
        "H" => Ok(PolarizationState::horizontal()),
        "V" => Ok(PolarizationState::vertical()),
        t if t.starts_with('(') && t.ends_with(')') && t.len() >= 2 => {
            let inner = &t[1..t.len() - 1];
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err((tok.col, format!("Jones vector needs 4 numbers, found {}", parts.len())));
            }
            let mut nums = [0.0; 4];
            for (slot, part) in nums.iter_mut().zip(&parts) {
                *slot = parse_number(part).map_err(|m| (tok.col, m))?;
            }
            Ok(PolarizationState::new(
                Complex64::new(nums[0], nums[1]),
                Complex64::new(nums[2], nums[3]),
            ))
        }
        other => Err((tok.col, format!("polarization must be H, V or (re,im,re,im), found '{other}'"))),
    }
}

fn parse_element(keyword: &str, params: &[Token<'_>], line_end: usize, kw_col: usize) -> LineResult<ElementKind> {
    match keyword {
        "beam" => {
            let p = Params::collect(params, &["pol", "intensity"])?;
            let pol = parse_polarization(p.raw("pol", line_end)?)?;
            let intensity = p.number("intensity", line_end)?;
            if intensity < 0.0 {
                return Err((p.raw("intensity", line_end)?.col, "intensity must be non-negative".into()));
            }
            Ok(ElementKind::Source(pol.scale(intensity.sqrt().into())))
        }
        "bs" => {
            let p = Params::collect(params, &["t", "r"])?;
            let (t, r) = (p.number("t", line_end)?, p.number("r", line_end)?);
            check_splitter(t, r).map_err(|m| (p.raw("t", line_end).map_or(kw_col, |tok| tok.col), m))?;
            Ok(ElementKind::BeamSplitter { t, r })
        }
        "wp" => {
            let p = Params::collect(params, &["eta", "phi"])?;
            Ok(ElementKind::Waveplate(WaveplateSpec {
                eta: p.number("eta", line_end)?,
                phi: p.number("phi", line_end)?,
            }))
        }
        "ps" => {
            let p = Params::collect(params, &["theta"])?;
            Ok(ElementKind::PhaseShifter { theta: p.number("theta", line_end)? })
        }
        "mirror" => {
            let p = Params::collect(params, &["sign"])?;
            match p.values.get("sign") {
                None => Ok(ElementKind::Mirror(MirrorSign::Plus)),
                Some(tok) => match tok.text {
                    "+1" | "1" => Ok(ElementKind::Mirror(MirrorSign::Plus)),
                    "-1" => Ok(ElementKind::Mirror(MirrorSign::Minus)),
                    other => Err((tok.col, format!("mirror sign must be +1 or -1, found '{other}'"))),
                },
            }
        }
        "det" => {
            Params::collect(params, &[])?;
            Ok(ElementKind::Detector)
        }
        _ => unreachable!("keyword checked by caller"),
    }
}

/// `id.port` endpoint of a `connect` statement.
fn parse_endpoint<'a>(tok: &Token<'a>) -> LineResult<(&'a str, usize, usize)> {
    let (id, port) = tok
        .text
        .rsplit_once('.')
        .ok_or_else(|| (tok.col, format!("expected <id>.<port>, found '{}'", tok.text)))?;
    if !is_valid_identifier(id) {
        return Err((tok.col, format!("'{id}' is not a valid identifier")));
    }
    let port_col = tok.col + id.chars().count() + 1;
    let port = port
        .parse::<usize>()
        .ok()
        .filter(|_| port.chars().all(|c| c.is_ascii_digit()))
        .ok_or_else(|| (port_col, format!("'{port}' is not a port number")))?;
    Ok((id, port, port_col))
}

struct PendingConnection<'a> {
    line: usize,
    from: (&'a str, usize, usize, usize),
    to: (&'a str, usize, usize, usize),
}

/// Parse `.onl` text into a validated netlist, or every diagnostic found.
pub fn parse_document(text: &str) -> std::result::Result<NetlistDocument, Vec<ParseDiagnostic>> {
    let mut errors: Vec<ParseDiagnostic> = Vec::new();
    let mut warnings: Vec<ParseDiagnostic> = Vec::new();
    let mut version: Option<u32> = None;
    let mut net = Netlist::new();
    let mut declared: HashMap<&str, Pos> = HashMap::new();
    let mut broken: BTreeSet<&str> = BTreeSet::new();
    let mut pending: Vec<PendingConnection<'_>> = Vec::new();

    let error = |line: usize, column: usize, message: String| ParseDiagnostic {
        line,
        column,
        message,
        severity: Severity::Error,
    };

    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let line_end = line.chars().count() + 1;
        let tokens = match tokenize(line) {
            Ok(t) => t,
            Err((col, msg)) => {
                errors.push(error(line_no, col, msg));
                continue;
            }
        };
        let Some((head, rest)) = tokens.split_first() else {
            continue;
        };

        match head.text {
            "version" => {
                let outcome = match rest {
                    [v] => v
                        .text
                        .parse::<u32>()
                        .ok()
                        .filter(|&v| v == FORMAT_VERSION)
                        .ok_or((v.col, format!("unsupported version '{}' (expected {FORMAT_VERSION})", v.text))),
                    _ => Err((head.col, "expected 'version <n>'".into())),
                };
                match outcome {
                    Ok(_) if version.is_some() => {
                        errors.push(error(line_no, head.col, "version declared twice".into()))
                    }
                    Ok(v) => version = Some(v),
                    Err((col, msg)) => errors.push(error(line_no, col, msg)),
                }
            }
            "connect" => {
                let outcome = match rest {
                    [from, arrow, to] if arrow.text == "->" => parse_endpoint(from).and_then(|f| {
                        parse_endpoint(to).map(|t| (f, from.col, t, to.col))
                    }),
                    [_, arrow, _] => Err((arrow.col, format!("expected '->', found '{}'", arrow.text))),
                    _ => Err((head.col, "expected 'connect <id>.<port> -> <id>.<port>'".into())),
                };
                match outcome {
                    Ok(((fid, fp, fpc), fcol, (tid, tp, tpc), tcol)) => pending.push(PendingConnection {
                        line: line_no,
                        from: (fid, fp, fcol, fpc),
                        to: (tid, tp, tcol, tpc),
                    }),
                    Err((col, msg)) => errors.push(error(line_no, col, msg)),
                }
            }
            kw @ ("beam" | "bs" | "wp" | "ps" | "mirror" | "det") => {
                let Some((id_tok, params)) = rest.split_first() else {
                    errors.push(error(line_no, line_end, format!("'{kw}' needs an identifier")));
                    continue;
                };
                if !is_valid_identifier(id_tok.text) {
                    errors.push(error(line_no, id_tok.col, format!("'{}' is not a valid identifier", id_tok.text)));
                    continue;
                }
                if let Some(first) = declared.get(id_tok.text) {
                    errors.push(error(
                        line_no,
                        id_tok.col,
                        format!("duplicate id '{}' (first declared on line {})", id_tok.text, first.line),
                    ));
                    continue;
                }
                declared.insert(id_tok.text, Pos { line: line_no, col: id_tok.col });
                match parse_element(kw, params, line_end, head.col) {
                    Ok(kind) => net.add(id_tok.text, kind).expect("identifier checked and unique"),
                    Err((col, msg)) => {
                        broken.insert(id_tok.text);
                        errors.push(error(line_no, col, msg));
                    }
                }
            }
            other => errors.push(error(line_no, head.col, format!("unknown keyword '{other}'"))),
        }
    }

    let mut used_out: HashMap<(&str, usize), usize> = HashMap::new();
    let mut used_in: HashMap<(&str, usize), usize> = HashMap::new();
    for conn in &pending {
        let mut ok = true;
        for ((id, port, id_col, port_col), is_output) in [(conn.from, true), (conn.to, false)] {
            if broken.contains(id) {
                ok = false;
                continue;
            }
            let Some(kind) = net.element(id) else {
                errors.push(error(conn.line, id_col, format!("connection names undeclared element '{id}'")));
                ok = false;
                continue;
            };
            let (arity, dir) = if is_output { (kind.outputs(), "output") } else { (kind.inputs(), "input") };
            if port >= arity {
                errors.push(error(
                    conn.line,
                    port_col,
                    format!("{} '{id}' has no {dir} port {port} ({arity} available)", kind.keyword()),
                ));
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        for ((id, port, id_col, _), uses, dir) in [
            (conn.from, &mut used_out, "output"),
            (conn.to, &mut used_in, "input"),
        ] {
            if let Some(prev) = uses.get(&(id, port)) {
                errors.push(error(
                    conn.line,
                    id_col,
                    format!("{dir} port {id}.{port} already connected on line {prev}"),
                ));
                ok = false;
            }
        }
        if ok {
            used_out.insert((conn.from.0, conn.from.1), conn.line);
            used_in.insert((conn.to.0, conn.to.1), conn.line);
            net.connect(conn.from.0, conn.from.1, conn.to.0, conn.to.1);
        }
    }

    if errors.is_empty() {
        for diag in validate(&net) {
            let pos = diag
                .element
                .as_deref()
                .and_then(|id| declared.get(id))
                .copied()
                .unwrap_or(Pos { line: 1, col: 1 });
            errors.push(error(pos.line, pos.col, diag.to_string()));
        }
    }

    if errors.is_empty() {
        let fed: BTreeSet<(&str, usize)> = used_in.keys().copied().collect();
        for (id, kind) in net.elements() {
            if matches!(kind, ElementKind::Waveplate(_) | ElementKind::PhaseShifter { .. } | ElementKind::Mirror(_))
                && !fed.contains(&(id, 0))
            {
                let pos = declared[id];
                warnings.push(ParseDiagnostic {
                    line: pos.line,
                    column: pos.col,
                    message: format!("input of '{id}' is unconnected and reads vacuum"),
                    severity: Severity::Warning,
                });
            }
        }
        Ok(NetlistDocument { version: version.unwrap_or(FORMAT_VERSION), netlist: net, warnings })
    } else {
        errors.sort_by_key(|d| (d.line, d.column));
        Err(errors)
    }
}

pub fn parse(text: &str) -> Result<Netlist> {
    parse_document(text).map(|doc| doc.netlist).map_err(Error::Parse)
}

/// Like [`parse`], but reports invalid UTF-8 as a diagnostic.
pub fn parse_bytes(bytes: &[u8]) -> Result<Netlist> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("valid prefix");
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(Error::Parse(vec![ParseDiagnostic {
                line,
                column,
                message: "invalid UTF-8".into(),
                severity: Severity::Error,
            }]))
        }
    }
}

fn format_source(s: &PolarizationState) -> String {
    let pure = |amp: Complex64, other: Complex64| {
        other == Complex64::new(0.0, 0.0) && amp.im == 0.0 && amp.re >= 0.0 && (amp.re * amp.re).sqrt() == amp.re
    };
    if pure(s.amp_x, s.amp_y) {
        format!("pol=H intensity={}", format_number(s.amp_x.re * s.amp_x.re))
    } else if pure(s.amp_y, s.amp_x) {
        format!("pol=V intensity={}", format_number(s.amp_y.re * s.amp_y.re))
    } else {
        format!(
            "pol=({},{},{},{}) intensity=1",
            format_number(s.amp_x.re),
            format_number(s.amp_x.im),
            format_number(s.amp_y.re),
            format_number(s.amp_y.im)
        )
    }
}

/// Canonical text: elements by id, connections in (source, destination)
/// order, LF line endings.
pub fn serialize(net: &Netlist) -> Result<String> {
    let diags = validate(net);
    if !diags.is_empty() {
        return Err(Error::Structural(diags));
    }
    let mut out = format!("version {FORMAT_VERSION}\n");
    for (id, kind) in net.elements() {
        let params = match kind {
            ElementKind::Source(s) => format_source(s),
            ElementKind::BeamSplitter { t, r } => format!("t={} r={}", format_number(*t), format_number(*r)),
            ElementKind::Waveplate(spec) => {
                format!("eta={} phi={}", format_number(spec.eta), format_number(spec.phi))
            }
            ElementKind::PhaseShifter { theta } => format!("theta={}", format_number(*theta)),
            ElementKind::Mirror(MirrorSign::Plus) => "sign=+1".into(),
            ElementKind::Mirror(MirrorSign::Minus) => "sign=-1".into(),
            ElementKind::Detector => String::new(),
        };
        let line = format!("{} {id} {params}", kind.keyword());
        out.push_str(line.trim_end());
        out.push('\n');
    }
    for conn in net.connections() {
        out.push_str(&format!("connect {} -> {}\n", conn.from, conn.to));
    }
    Ok(out)
}
