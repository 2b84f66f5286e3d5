//! Text format: `p=<prime>; n=<vars>; <coeff>*x<i>^<e>*... + ...`.
//!
//! Whitespace (including newlines) is insignificant inside the body.
//! Coefficients must lie in `[0, p)`; a leading `-` negates a term.
//! Lines starting with `#` are comments.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

use super::{Monomial, Polynomial};

/// How variable names map to indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarNaming {
    /// `x1 .. xn`.
    Flat,
    /// `x<block>_<index>`, both one-based, `per_block` variables per block.
    Blocks { per_block: usize },
}

impl VarNaming {
    fn name(&self, var: usize) -> String {
        match *self {
            VarNaming::Flat => format!("x{}", var + 1),
            VarNaming::Blocks { per_block } => {
                format!("x{}_{}", var / per_block + 1, var % per_block + 1)
            }
        }
    }
}

/// Formats the body (no `p=`/`n=` header), highest monomial first.
pub fn format_body(f: &Polynomial, naming: &VarNaming) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let parts: Vec<String> = f
        .terms()
        .rev()
        .map(|(m, c)| {
            let mut factors = Vec::new();
            if m.degree() == 0 || c != FieldElement::ONE {
                factors.push(c.to_string());
            }
            for (i, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(naming.name(i)),
                    _ => factors.push(format!("{}^{e}", naming.name(i))),
                }
            }
            factors.join("*")
        })
        .collect();
    parts.join(" + ")
}

/// A position in the source text, both one-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

/// Header `key=value` segments plus the single body segment of a
/// semicolon/newline separated document.
#[derive(Debug, Default)]
pub(crate) struct Document {
    pub headers: Vec<(String, String, Pos)>,
    pub body: Option<(String, Pos)>,
}

impl Document {
    pub fn header(&self, key: &str) -> Option<(&str, Pos)> {
        self.headers
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, p)| (v.as_str(), *p))
    }

    pub fn header_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.header(key) {
            None => Ok(None),
            Some((v, pos)) => v.trim().parse::<usize>().map(Some).map_err(|_| {
                Error::parse(
                    pos.line,
                    pos.column,
                    format!("`{key}` must be a nonnegative integer, got `{v}`"),
                )
            }),
        }
    }
}

fn is_header(seg: &str) -> bool {
    let Some((k, _)) = seg.split_once('=') else {
        return false;
    };
    let k = k.trim();
    !k.is_empty() && k.chars().all(|c| c.is_ascii_alphabetic() || c == '_')
}

pub(crate) fn split_document(text: &str) -> Result<Document> {
    let mut doc = Document::default();
    for (li, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut start = 0;
        for seg in line.split(';') {
            let col = start + 1 + (seg.len() - seg.trim_start().len());
            start += seg.len() + 1;
            let trimmed = seg.trim();
            if trimmed.is_empty() {
                continue;
            }
            let pos = Pos {
                line: li + 1,
                column: col,
            };
            if is_header(trimmed) {
                let (k, v) = trimmed.split_once('=').expect("checked");
                doc.headers
                    .push((k.trim().to_string(), v.trim().to_string(), pos));
            } else {
                match &mut doc.body {
                    // A body may continue over several lines.
                    Some((b, _)) => {
                        b.push(' ');
                        b.push_str(trimmed);
                    }
                    None => doc.body = Some((trimmed.to_string(), pos)),
                }
            }
        }
    }
    Ok(doc)
}

/// Parses a full polynomial document with `p=` and `n=` headers.
pub fn parse_polynomial(text: &str) -> Result<Polynomial> {
    let doc = split_document(text)?;
    let (spec, n) = field_and_arity(&doc)?;
    let (body, pos) = doc
        .body
        .as_ref()
        .ok_or_else(|| Error::parse(1, 1, "missing polynomial body"))?;
    parse_polynomial_body(spec, n, VarNaming::Flat, body, pos.line, pos.column)
}

pub(crate) fn field_and_arity(doc: &Document) -> Result<(FieldSpec, usize)> {
    let (pv, ppos) = doc
        .header("p")
        .ok_or_else(|| Error::parse(1, 1, "missing `p=<prime>` header"))?;
    let p: u64 = pv
        .trim()
        .parse()
        .map_err(|_| Error::parse(ppos.line, ppos.column, format!("invalid prime `{pv}`")))?;
    let spec =
        FieldSpec::new(p).map_err(|e| Error::parse(ppos.line, ppos.column, e.to_string()))?;
    let n = doc
        .header_usize("n")?
        .ok_or_else(|| Error::parse(1, 1, "missing `n=<vars>` header"))?;
    Ok((spec, n))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn tokenize(body: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = body.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<u64>()
                    .map_err(|_| Error::parse(line, col, format!("integer `{s}` too large")))?;
                out.push((Tok::Num(v), col));
            }
            'x' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => {
                return Err(Error::parse(
                    line,
                    col,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    Ok(out)
}

fn resolve_var(
    name: &str,
    nvars: usize,
    naming: VarNaming,
    line: usize,
    col: usize,
) -> Result<usize> {
    let bad = |msg: String| Error::parse(line, col, msg);
    let rest = &name[1..];
    match naming {
        VarNaming::Flat => {
            let i: usize = rest
                .parse()
                .map_err(|_| bad(format!("malformed variable `{name}`")))?;
            if i == 0 || i > nvars {
                return Err(bad(format!("variable `{name}` outside x1..x{nvars}")));
            }
            Ok(i - 1)
        }
        VarNaming::Blocks { per_block } => {
            let (b, j) = rest.split_once('_').ok_or_else(|| {
                bad(format!(
                    "expected block variable x<block>_<index>, got `{name}`"
                ))
            })?;
            let b: usize = b
                .parse()
                .map_err(|_| bad(format!("malformed variable `{name}`")))?;
            let j: usize = j
                .parse()
                .map_err(|_| bad(format!("malformed variable `{name}`")))?;
            let blocks = if per_block == 0 { 0 } else { nvars / per_block };
            if b == 0 || b > blocks || j == 0 || j > per_block {
                return Err(bad(format!(
                    "variable `{name}` outside blocks 1..{blocks} / indices 1..{per_block}"
                )));
            }
            Ok((b - 1) * per_block + (j - 1))
        }
    }
}

/// Parses a polynomial body in a known ring. `line`/`column` locate the
/// body in its source for error messages.
pub fn parse_polynomial_body(
    spec: FieldSpec,
    nvars: usize,
    naming: VarNaming,
    body: &str,
    line: usize,
    column: usize,
) -> Result<Polynomial> {
    let toks = tokenize(body, line, column)?;
    let mut out = Polynomial::zero(spec, nvars);
    let end_col = column + body.chars().count();
    let mut i = 0;
    if toks.is_empty() {
        return Err(Error::parse(line, column, "empty polynomial body"));
    }
    loop {
        let mut negate = false;
        while i < toks.len() && matches!(toks[i].0, Tok::Plus | Tok::Minus) {
            if toks[i].0 == Tok::Minus {
                negate = !negate;
            }
            i += 1;
        }
        // term := factor ('*' factor)*
        let mut coef = FieldElement::ONE;
        let mut exps = vec![0u32; nvars];
        loop {
            let Some((tok, col)) = toks.get(i) else {
                return Err(Error::parse(
                    line,
                    end_col,
                    "expected a coefficient or variable",
                ));
            };
            match tok {
                Tok::Num(v) => {
                    if *v >= spec.p() {
                        return Err(Error::parse(
                            line,
                            *col,
                            format!("coefficient {v} not in [0, {})", spec.p()),
                        ));
                    }
                    coef = spec.mul(coef, FieldElement(*v));
                    i += 1;
                }
                Tok::Ident(name) => {
                    let var = resolve_var(name, nvars, naming, line, *col)?;
                    i += 1;
                    let mut e = 1u32;
                    if let Some((Tok::Caret, _)) = toks.get(i) {
                        i += 1;
                        match toks.get(i) {
                            Some((Tok::Num(v), _)) if *v <= u32::MAX as u64 => {
                                e = *v as u32;
                                i += 1;
                            }
                            Some((_, c)) => {
                                return Err(Error::parse(line, *c, "expected exponent after `^`"))
                            }
                            None => {
                                return Err(Error::parse(
                                    line,
                                    end_col,
                                    "expected exponent after `^`",
                                ))
                            }
                        }
                    }
                    exps[var] += e;
                }
                _ => {
                    return Err(Error::parse(
                        line,
                        *col,
                        "expected a coefficient or variable",
                    ))
                }
            }
            match toks.get(i) {
                Some((Tok::Star, _)) => i += 1,
                _ => break,
            }
        }
        if negate {
            coef = spec.neg(coef);
        }
        out.add_term(Monomial::new(exps), coef);
        match toks.get(i) {
            None => break,
            Some((Tok::Plus | Tok::Minus, _)) => {}
            Some((_, c)) => {
                return Err(Error::parse(line, *c, "expected `+` or `-` between terms"))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let f = parse_polynomial("p=5; n=3; 3*x1*x2^2 + 4*x3 + 1").unwrap();
        assert_eq!(f.num_terms(), 3);
        assert_eq!(f.to_string(), "p=5; n=3; 3*x1*x2^2 + 4*x3 + 1");
    }

    #[test]
    fn whitespace_and_signs() {
        let a = parse_polynomial("p = 5 ;n=2;\n  x1 *x2  - x2\n").unwrap();
        let b = parse_polynomial("p=5; n=2; x1*x2 + 4*x2").unwrap();
        assert_eq!(a, b);
        let z = parse_polynomial("p=3; n=1; x1 - x1").unwrap();
        assert!(z.is_zero());
        assert_eq!(z.to_string(), "p=3; n=1; 0");
    }

    #[test]
    fn rejects_out_of_range_variables_and_coefficients() {
        let e = parse_polynomial("p=5; n=2; x3").unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 1,
                    column: 11,
                    ..
                }
            ),
            "{e:?}"
        );
        assert!(parse_polynomial("p=5; n=2; 7*x1").is_err());
        assert!(parse_polynomial("p=5; n=2; x0").is_err());
        assert!(parse_polynomial("p=6; n=2; x1").is_err());
        assert!(parse_polynomial("n=2; x1").is_err());
        assert!(parse_polynomial("p=5; n=2; x1 +").is_err());
        assert!(parse_polynomial("p=5; n=2; x1 x2").is_err());
        assert!(parse_polynomial("p=5; n=2; y1").is_err());
    }

    #[test]
    fn error_positions_point_at_the_token() {
        let e = parse_polynomial("p=5; n=2;\n x1 + 9*x2").unwrap_err();
        assert_eq!(e, Error::parse(2, 7, "coefficient 9 not in [0, 5)"));
    }

    #[test]
    fn block_naming() {
        let k = FieldSpec::new(5).unwrap();
        let f = parse_polynomial_body(
            k,
            4,
            VarNaming::Blocks { per_block: 2 },
            "x1_1*x2_2 + x2_1*x1_2",
            1,
            1,
        )
        .unwrap();
        assert_eq!(
            format_body(&f, &VarNaming::Blocks { per_block: 2 }),
            "x1_1*x2_2 + x1_2*x2_1"
        );
        assert!(
            parse_polynomial_body(k, 4, VarNaming::Blocks { per_block: 2 }, "x3_1", 1, 1).is_err()
        );
    }

    mod props {
        use super::*;
        use crate::poly::Monomial;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn format_then_parse_is_identity(terms in proptest::collection::vec((0u32..3, 0u32..3, 0u32..3, 1u64..7), 0..6)) {
                let k = FieldSpec::new(7).unwrap();
                let f = Polynomial::from_terms(k, 3, terms.into_iter().map(|(a, b, c, v)| (Monomial::new(vec![a, b, c]), FieldElement(v))));
                let back = parse_polynomial(&f.to_string()).unwrap();
                prop_assert_eq!(back, f);
            }
        }
    }
}
