//! Expression and model-file parsing.
//!
//! One flat grammar serves every expression position: sums of explicit
//! `*`-products of generators, rationals, parenthesized subexpressions and
//! `^` powers. In form positions `d<generator>` tokens denote coordinate
//! differentials; `^` between differentials is the wedge. Primed
//! identifiers are reserved for tensor copies and cannot be declared.

use std::sync::Arc;

use num::{One, Zero};

use crate::chart::{Chart, Point};
use crate::element::SuperElement;
use crate::error::{Error, Result};
use crate::form::Form;
use crate::gform::GForm;
use crate::group::{translation_group, triangular_group, HopfGroup};
use crate::morphism::AlgebraMorphism;
use crate::tensor::tensor_chart;
use crate::Q;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(Q),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '#' => break,
            '+' => {
                out.push(Spanned { tok: Tok::Plus, line, col });
                i += 1;
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, line, col });
                i += 1;
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, line, col });
                i += 1;
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, line, col });
                i += 1;
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line, col });
                i += 1;
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line, col });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let numer: String = chars[start..i].iter().collect();
                let mut q = Q::from_integer(numer.parse::<i64>().map_err(|_| {
                    err_at(line, col, "integer literal out of range")
                })?.into());
                if i < chars.len() && chars[i] == '/' {
                    let dstart = i + 1;
                    let mut j = dstart;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == dstart {
                        return Err(err_at(line, i + 2, "expected denominator digits"));
                    }
                    let denom: String = chars[dstart..j].iter().collect();
                    let d: i64 = denom
                        .parse()
                        .map_err(|_| err_at(line, dstart + 1, "denominator out of range"))?;
                    if d == 0 {
                        return Err(err_at(line, dstart + 1, "zero denominator"));
                    }
                    q /= Q::from_integer(d.into());
                    i = j;
                }
                out.push(Spanned { tok: Tok::Number(q), line, col });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                while i < chars.len() && chars[i] == '\'' {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                out.push(Spanned { tok: Tok::Ident(name), line, col });
            }
            other => return Err(err_at(line, col, format!("unexpected character `{}`", other))),
        }
    }
    Ok(out)
}

/// Either an algebra element or a differential form; products promote as
/// needed.
#[derive(Debug, Clone)]
enum Value {
    Element(SuperElement),
    Form(Form),
}

impl Value {
    fn into_form(self) -> Form {
        match self {
            Value::Element(e) => Form::from_element(e),
            Value::Form(f) => f,
        }
    }

    fn mul(self, other: Value) -> Result<Value> {
        Ok(match (self, other) {
            (Value::Element(a), Value::Element(b)) => Value::Element(a.checked_mul(&b)?),
            (a, b) => Value::Form(a.into_form().wedge(&b.into_form())?),
        })
    }

    fn add(self, other: Value) -> Result<Value> {
        Ok(match (self, other) {
            (Value::Element(a), Value::Element(b)) => Value::Element(a.checked_add(&b)?),
            (a, b) => Value::Form(a.into_form().add(&b.into_form())?),
        })
    }

    fn neg(self) -> Value {
        match self {
            Value::Element(e) => Value::Element(e.neg()),
            Value::Form(f) => Value::Form(f.neg()),
        }
    }

    fn pow(self, n: i64, line: usize, col: usize) -> Result<Value> {
        match self {
            Value::Element(e) => Ok(Value::Element(e.pow(n)?)),
            Value::Form(f) => {
                if n < 0 {
                    return Err(err_at(line, col, "forms cannot carry negative powers"));
                }
                let mut acc = Form::one(&f.chart);
                for _ in 0..n {
                    acc = acc.wedge(&f)?;
                }
                Ok(Value::Form(acc))
            }
        }
    }
}

struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    chart: &'a Arc<Chart>,
    allow_forms: bool,
    line: usize,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        while let Some(sp) = self.peek() {
            match sp.tok {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(self.term()?)?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(self.term()?.neg())?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value> {
        let mut negate = false;
        while let Some(sp) = self.peek() {
            match sp.tok {
                Tok::Minus => {
                    negate = !negate;
                    self.bump();
                }
                Tok::Plus => {
                    self.bump();
                }
                _ => break,
            }
        }
        let mut acc = self.factor()?;
        while let Some(sp) = self.peek() {
            match sp.tok {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(self.factor()?)?;
                }
                _ => break,
            }
        }
        if negate {
            acc = acc.neg();
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Value> {
        let mut acc = self.atom()?;
        while let Some(sp) = self.peek() {
            if sp.tok != Tok::Caret {
                break;
            }
            let caret = self.bump().unwrap();
            // either an integer power or a wedge with another differential
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Number(_)) | Some(Tok::Minus) => {
                    let mut sign = 1i64;
                    while let Some(sp) = self.peek() {
                        if sp.tok == Tok::Minus {
                            sign = -sign;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let sp = self.bump().ok_or_else(|| {
                        err_at(self.line, caret.col, "expected exponent after `^`")
                    })?;
                    let n = match sp.tok {
                        Tok::Number(q) if q.denom().is_one() => {
                            let n: i64 = q.numer().try_into().map_err(|_| {
                                err_at(sp.line, sp.col, "exponent out of range")
                            })?;
                            n * sign
                        }
                        _ => return Err(err_at(sp.line, sp.col, "expected integer exponent")),
                    };
                    acc = acc.pow(n, caret.line, caret.col)?;
                }
                Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let rhs = self.atom()?;
                    acc = acc.mul(rhs)?;
                }
                _ => return Err(err_at(self.line, caret.col, "expected exponent after `^`")),
            }
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Value> {
        let sp = self
            .bump()
            .ok_or_else(|| err_at(self.line, 1, "unexpected end of expression"))?;
        match sp.tok {
            Tok::Number(q) => Ok(Value::Element(SuperElement::from_rational(self.chart, q))),
            Tok::Ident(name) => {
                if let Ok(gen) = SuperElement::gen_by_name(self.chart, &name) {
                    return Ok(Value::Element(gen));
                }
                if self.allow_forms {
                    if let Some(rest) = name.strip_prefix('d') {
                        if let Some(i) = self.chart.even_index(rest) {
                            if i < self.chart.coord_evens {
                                return Ok(Value::Form(Form::dx(self.chart, i)));
                            }
                        }
                        if let Some(j) = self.chart.odd_index(rest) {
                            if j < self.chart.coord_odds {
                                return Ok(Value::Form(Form::ds(self.chart, j)));
                            }
                        }
                    }
                }
                Err(err_at(sp.line, sp.col, format!("unknown generator `{}`", name)))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Spanned { tok: Tok::RParen, .. }) => Ok(inner),
                    _ => Err(err_at(sp.line, sp.col, "unclosed parenthesis")),
                }
            }
            _ => Err(err_at(sp.line, sp.col, "expected a number, generator or `(`")),
        }
    }
}

fn parse_value(text: &str, chart: &Arc<Chart>, allow_forms: bool, line: usize) -> Result<Value> {
    let toks = tokenize(text, line)?;
    if toks.is_empty() {
        return Err(err_at(line, 1, "empty expression"));
    }
    let mut p = ExprParser {
        toks: &toks,
        pos: 0,
        chart,
        allow_forms,
        line,
    };
    let v = p.expr()?;
    if let Some(sp) = p.peek() {
        return Err(err_at(sp.line, sp.col, "trailing tokens after expression"));
    }
    Ok(v)
}

/// Parse an algebra element over the chart.
pub fn parse_element(text: &str, chart: &Arc<Chart>) -> Result<SuperElement> {
    match parse_value(text, chart, false, 1)? {
        Value::Element(e) => Ok(e),
        Value::Form(_) => Err(err_at(1, 1, "expected an algebra element, found a form")),
    }
}

/// Parse a differential form (degree 0 allowed) over the chart.
pub fn parse_form(text: &str, chart: &Arc<Chart>) -> Result<Form> {
    Ok(parse_value(text, chart, true, 1)?.into_form())
}

fn parse_element_at(text: &str, chart: &Arc<Chart>, line: usize) -> Result<SuperElement> {
    match parse_value(text, chart, false, line)? {
        Value::Element(e) => Ok(e),
        Value::Form(_) => Err(err_at(line, 1, "expected an algebra element, found a form")),
    }
}

fn parse_rational_at(text: &str, line: usize) -> Result<Q> {
    let toks = tokenize(text, line)?;
    let mut sign = Q::one();
    let mut idx = 0;
    while let Some(Spanned { tok: Tok::Minus, .. }) = toks.get(idx) {
        sign = -sign;
        idx += 1;
    }
    match toks.get(idx) {
        Some(Spanned { tok: Tok::Number(q), .. }) if idx + 1 == toks.len() => Ok(q.clone() * sign),
        _ => Err(err_at(line, 1, "expected a rational literal")),
    }
}

/// Infer a chart from an expression: identifiers beginning with `s` or
/// `tau` are odd, all others even; a generator raised to a negative power
/// anywhere is marked invertible. Order of first occurrence fixes the
/// chart order, which makes render/parse round trips stable.
pub fn infer_chart(text: &str) -> Result<Arc<Chart>> {
    let toks = tokenize(text, 1)?;
    let mut evens: Vec<(String, bool)> = Vec::new();
    let mut odds: Vec<String> = Vec::new();
    for (i, sp) in toks.iter().enumerate() {
        if let Tok::Ident(name) = &sp.tok {
            let odd = name.starts_with('s') || name.starts_with("tau");
            let mut invertible = false;
            if let (Some(Spanned { tok: Tok::Caret, .. }), Some(Spanned { tok: Tok::Minus, .. })) =
                (toks.get(i + 1), toks.get(i + 2))
            {
                invertible = true;
            }
            if odd {
                if !odds.contains(name) {
                    odds.push(name.clone());
                }
            } else if let Some(entry) = evens.iter_mut().find(|(n, _)| n == name) {
                entry.1 |= invertible;
            } else {
                evens.push((name.clone(), invertible));
            }
        }
    }
    Chart::new("inferred", evens, odds)
}

// ---------------------------------------------------------------------------
// model files

#[derive(Debug, Clone, Default)]
struct Section {
    name: String,
    /// (line number, text)
    lines: Vec<(usize, String)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let name = stripped
                .strip_suffix(']')
                .ok_or_else(|| err_at(lineno + 1, 1, "unterminated section header"))?
                .trim()
                .to_string();
            sections.push(Section {
                name,
                lines: Vec::new(),
            });
        } else {
            match sections.last_mut() {
                Some(s) => s.lines.push((lineno + 1, line.to_string())),
                None => return Err(err_at(lineno + 1, 1, "content before any [section]")),
            }
        }
    }
    Ok(sections)
}

fn key_value(line: &str, lineno: usize) -> Result<(String, String)> {
    match line.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => Err(err_at(lineno, 1, "expected `name = expression`")),
    }
}

fn parse_chart_section(section: &Section, default_name: &str) -> Result<Arc<Chart>> {
    let mut name = default_name.to_string();
    let mut evens: Vec<(String, bool)> = Vec::new();
    let mut odds: Vec<String> = Vec::new();
    for (lineno, line) in &section.lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["name", n] => name = n.to_string(),
            ["even", n] => evens.push((check_gen_name(n, *lineno)?, false)),
            ["even", n, "invertible"] => evens.push((check_gen_name(n, *lineno)?, true)),
            ["odd", n] => odds.push(check_gen_name(n, *lineno)?),
            _ => {
                return Err(err_at(
                    *lineno,
                    1,
                    "expected `name <id>`, `even <id> [invertible]` or `odd <id>`",
                ))
            }
        }
    }
    Chart::new(name, evens, odds)
}

fn check_gen_name(name: &str, lineno: usize) -> Result<String> {
    if name.ends_with('\'') {
        return Err(err_at(
            lineno,
            1,
            "primed identifiers are reserved for tensor copies",
        ));
    }
    if !name
        .chars()
        .next()
        .map(|c| c.is_ascii_alphabetic() || c == '_')
        .unwrap_or(false)
    {
        return Err(err_at(lineno, 1, "generator names start with a letter"));
    }
    Ok(name.to_string())
}

/// Parse a group presentation from its sections.
fn group_from_sections(sections: &[Section], prefix: &str) -> Result<HopfGroup> {
    let find = |suffix: &str| -> Option<&Section> {
        let full = if prefix.is_empty() {
            suffix.to_string()
        } else {
            format!("{}.{}", prefix, suffix)
        };
        sections.iter().find(|s| s.name == full)
    };
    let chart_sec = find("chart").ok_or_else(|| Error::Model("missing [chart] section".into()))?;
    let chart = parse_chart_section(chart_sec, "G")?;
    let t2 = tensor_chart(format!("{}^2", chart.name), &chart, &chart, false)?;

    let cop_sec =
        find("coproduct").ok_or_else(|| Error::Model("missing [coproduct] section".into()))?;
    let mut cop_images = Vec::new();
    for (lineno, line) in &cop_sec.lines {
        let (k, v) = key_value(line, *lineno)?;
        cop_images.push((k, parse_element_at(&v, &t2.chart, *lineno)?));
    }
    for name in chart.gen_names() {
        if !cop_images.iter().any(|(k, _)| *k == name) {
            return Err(Error::Model(format!("coproduct missing generator `{}`", name)));
        }
    }

    let mut counit = vec![Q::zero(); chart.evens.len() + chart.odds.len()];
    if let Some(sec) = find("counit") {
        for (lineno, line) in &sec.lines {
            let (k, v) = key_value(line, *lineno)?;
            let idx = chart
                .even_index(&k)
                .or_else(|| chart.odd_index(&k).map(|j| chart.evens.len() + j))
                .ok_or_else(|| Error::UnknownGenerator(k.clone()))?;
            counit[idx] = parse_rational_at(&v, *lineno)?;
        }
    }

    let ant_sec =
        find("antipode").ok_or_else(|| Error::Model("missing [antipode] section".into()))?;
    let mut ant_images = Vec::new();
    for (lineno, line) in &ant_sec.lines {
        let (k, v) = key_value(line, *lineno)?;
        ant_images.push((k, parse_element_at(&v, &chart, *lineno)?));
    }
    for name in chart.gen_names() {
        if !ant_images.iter().any(|(k, _)| *k == name) {
            return Err(Error::Model(format!("antipode missing generator `{}`", name)));
        }
    }

    // identity point defaults to the counit values
    let mut id_values = counit[..chart.evens.len()].to_vec();
    if let Some(sec) = find("identity") {
        for (lineno, line) in &sec.lines {
            let (k, v) = key_value(line, *lineno)?;
            let idx = chart
                .even_index(&k)
                .ok_or_else(|| Error::UnknownGenerator(k.clone()))?;
            id_values[idx] = parse_rational_at(&v, *lineno)?;
        }
    }
    let identity = Point::new(chart.clone(), id_values)?;
    let name = chart.name.clone();
    HopfGroup::new(name, chart, cop_images, counit, ant_images, identity)
}

/// Parse a group presentation file.
pub fn parse_group_file(text: &str) -> Result<HopfGroup> {
    let sections = split_sections(text)?;
    group_from_sections(&sections, "")
}

/// Resolve a built-in group name: `triangular` or `r<p>|<q>`.
pub fn builtin_group(name: &str) -> Result<HopfGroup> {
    if name == "triangular" {
        return triangular_group();
    }
    if let Some(rest) = name.strip_prefix('r') {
        if let Some((p, q)) = rest.split_once('|') {
            let p: usize = p
                .parse()
                .map_err(|_| Error::Model(format!("bad builtin name `{}`", name)))?;
            let q: usize = q
                .parse()
                .map_err(|_| Error::Model(format!("bad builtin name `{}`", name)))?;
            return translation_group(p, q);
        }
    }
    Err(Error::Model(format!(
        "unknown builtin group `{}` (expected `triangular` or `r<p>|<q>`)",
        name
    )))
}

/// A parsed bundle model: base chart, structure group, the beta components
/// by Lie-basis name, and an optional gauge.
#[derive(Debug, Clone)]
pub struct BundleModel {
    pub base: Arc<Chart>,
    pub group: Arc<HopfGroup>,
    pub beta_by_name: Vec<(String, Form)>,
    pub gauge: Option<Vec<(String, SuperElement)>>,
}

impl BundleModel {
    /// Assemble the beta form over the derived Lie superalgebra.
    pub fn beta(&self) -> Result<GForm> {
        let lsa = self.group.lie_algebra()?;
        let mut components = vec![Form::zero(&self.base); lsa.dim()];
        for (name, form) in &self.beta_by_name {
            let k = lsa
                .basis_index(name)
                .ok_or_else(|| Error::Model(format!("unknown Lie basis element `{}`", name)))?;
            components[k] = components[k].add(form)?;
        }
        GForm::new(&self.base, &lsa, components)
    }

    /// The gauge morphism `sigma*: A(G) -> C(X)`, when a gauge section is
    /// present. Unlisted generators default to their counit values.
    pub fn gauge_morphism(&self) -> Result<Option<AlgebraMorphism>> {
        let Some(images) = &self.gauge else {
            return Ok(None);
        };
        let mut full: Vec<(String, SuperElement)> = Vec::new();
        for (idx, name) in self.group.chart.gen_names().enumerate() {
            match images.iter().find(|(k, _)| *k == name) {
                Some((_, e)) => full.push((name, e.clone())),
                None => {
                    let v = self.group.counit[idx].clone();
                    full.push((name, SuperElement::from_rational(&self.base, v)));
                }
            }
        }
        Ok(Some(AlgebraMorphism::from_images(
            &self.group.chart,
            &self.base,
            &full,
        )?))
    }
}

/// Parse a bundle model file. `load` resolves `file <path>` group
/// references to file contents.
pub fn parse_bundle_file(
    text: &str,
    load: &dyn Fn(&str) -> Result<String>,
) -> Result<BundleModel> {
    let sections = split_sections(text)?;
    let base_sec = sections
        .iter()
        .find(|s| s.name == "base")
        .ok_or_else(|| Error::Model("missing [base] section".into()))?;
    let base = parse_chart_section(base_sec, "X")?;

    let group_sec = sections
        .iter()
        .find(|s| s.name == "group")
        .ok_or_else(|| Error::Model("missing [group] section".into()))?;
    let mut group: Option<HopfGroup> = None;
    for (lineno, line) in &group_sec.lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["builtin", name] => group = Some(builtin_group(name)?),
            ["file", path] => group = Some(parse_group_file(&load(path)?)?),
            ["inline"] => group = Some(group_from_sections(&sections, "group")?),
            _ => {
                return Err(err_at(
                    *lineno,
                    1,
                    "expected `builtin <name>`, `file <path>` or `inline`",
                ))
            }
        }
    }
    let group =
        Arc::new(group.ok_or_else(|| Error::Model("empty [group] section".into()))?);

    let mut beta_by_name = Vec::new();
    if let Some(sec) = sections.iter().find(|s| s.name == "beta") {
        for (lineno, line) in &sec.lines {
            let (k, v) = key_value(line, *lineno)?;
            let toks = tokenize(&v, *lineno)?;
            let form = if toks.len() == 1 && toks[0].tok == Tok::Number(Q::zero()) {
                Form::zero(&base)
            } else {
                let mut p = ExprParser {
                    toks: &toks,
                    pos: 0,
                    chart: &base,
                    allow_forms: true,
                    line: *lineno,
                };
                let val = p.expr()?;
                if let Some(sp) = p.peek() {
                    return Err(err_at(sp.line, sp.col, "trailing tokens after expression"));
                }
                val.into_form()
            };
            beta_by_name.push((k, form));
        }
    }

    let mut gauge = None;
    if let Some(sec) = sections.iter().find(|s| s.name == "gauge") {
        let mut images = Vec::new();
        for (lineno, line) in &sec.lines {
            let (k, v) = key_value(line, *lineno)?;
            images.push((k, parse_element_at(&v, &base, *lineno)?));
        }
        gauge = Some(images);
    }

    Ok(BundleModel {
        base,
        group,
        beta_by_name,
        gauge,
    })
}
