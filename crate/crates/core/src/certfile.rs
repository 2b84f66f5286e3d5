//! Certificate files.
//!
//! A file is a sequence of lines. Header lines hold `key=value` pairs
//! separated by `;`, entry lines hold `label: <polynomial body>`, and lines
//! starting with `#` are comments. Every file starts with a `kind=` header.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::bias::{BiasReport, Method};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec, ValueHistogram};
use crate::multilinear::{parse_block_set, MultilinearForm};
use crate::pipeline::{Artifact, CorrelationCert, PipelineRun, VarietyCert};
use crate::poly::text::{format_body, Pos};
use crate::poly::{parse_polynomial_body, HomogeneousForm, Polynomial, VarNaming};
use crate::rank::{DecompositionCert, PartitionRankCert, PrFactor, Verdict};
use crate::rkstar::{PerturbationCert, RkStarCert};

/// Any certificate that has a file format.
#[derive(Debug, Clone, PartialEq)]
pub enum CertFile {
    Decomposition(DecompositionCert),
    PartitionRank(PartitionRankCert),
    /// A variety certificate together with the polynomial and order it
    /// refers to, so it can be checked on its own.
    Variety {
        cert: VarietyCert,
        f: Polynomial,
        d: usize,
    },
    RkStar(RkStarCert),
    Perturbation(PerturbationCert),
    Correlation(CorrelationCert),
}

impl CertFile {
    pub fn kind(&self) -> &'static str {
        match self {
            CertFile::Decomposition(_) => "decomposition",
            CertFile::PartitionRank(_) => "partition-rank",
            CertFile::Variety { .. } => "variety",
            CertFile::RkStar(_) => "rkstar",
            CertFile::Perturbation(_) => "perturbation",
            CertFile::Correlation(_) => "correlation",
        }
    }

    pub fn to_text(&self) -> String {
        let mut w = Writer::default();
        w.header(&format!("kind={}", self.kind()));
        match self {
            CertFile::Decomposition(c) => {
                let t = &c.target;
                w.header(&format!(
                    "p={}; n={}; degree={}; bound={}",
                    t.spec().p(),
                    t.nvars(),
                    t.degree(),
                    c.len()
                ));
                w.poly("target", t.poly());
                for (a, b) in &c.factors {
                    w.poly("alpha", a.poly());
                    w.poly("beta", b.poly());
                }
            }
            CertFile::PartitionRank(c) => {
                let t = &c.target;
                w.header(&format!(
                    "p={}; n={}; blocks={}; support={}; bound={}",
                    t.spec().p(),
                    t.n(),
                    t.blocks(),
                    block_list(t.support()),
                    c.len()
                ));
                let naming = VarNaming::Blocks { per_block: t.n() };
                w.entry("target", &format_body(t.poly(), &naming));
                for f in &c.factors {
                    w.entry(
                        &format!("r{{{}}}", block_list(&f.blocks)),
                        &format_body(f.r.poly(), &naming),
                    );
                    w.entry("q", &format_body(f.q.poly(), &naming));
                }
            }
            CertFile::Variety { cert, f, d } => {
                w.header(&format!(
                    "p={}; n={}; d={d}; bound={}",
                    f.spec().p(),
                    f.nvars(),
                    cert.len()
                ));
                w.poly("f", f);
                let naming = VarNaming::Blocks {
                    per_block: f.nvars(),
                };
                for s in &cert.forms {
                    w.entry(
                        &format!("form{{{}}}", block_list(s.support())),
                        &format_body(s.poly(), &naming),
                    );
                }
            }
            CertFile::RkStar(c) => {
                w.header(&format!(
                    "p={}; n={}; bound={}",
                    c.target.spec().p(),
                    c.target.nvars(),
                    c.len()
                ));
                write_rkstar_body(&mut w, c);
            }
            CertFile::Perturbation(c) => {
                let f = &c.source.target;
                let order: Vec<String> = c.order.iter().map(|i| (i + 1).to_string()).collect();
                w.header(&format!(
                    "p={}; n={}; m={}; t={}",
                    f.spec().p(),
                    f.nvars(),
                    c.m(),
                    c.t
                ));
                w.header(&format!(
                    "order={}; y={}; z={}; c0={}; zero_count={}",
                    order.join(","),
                    values(&c.y),
                    values(&c.z),
                    c.c0,
                    c.zero_count
                ));
                write_rkstar_body(&mut w, &c.source);
                for (g, l) in c.generators.iter().zip(&c.witnesses) {
                    w.poly("generator", g);
                    w.poly("witness", l);
                }
            }
            CertFile::Correlation(c) => {
                let counts: Vec<String> = c
                    .exact
                    .histogram
                    .counts()
                    .iter()
                    .map(u64::to_string)
                    .collect();
                w.header(&format!(
                    "p={}; n={}; degree_bound={}; claimed_floor={}",
                    c.f.spec().p(),
                    c.f.nvars(),
                    c.degree_bound,
                    c.claimed_floor
                ));
                w.header(&format!(
                    "exact_bias={:.12}; histogram={}",
                    c.exact.magnitude,
                    counts.join(",")
                ));
                w.poly("f", &c.f);
                w.poly("correlator", &c.correlator);
                for line in &c.provenance {
                    w.entry("provenance", line);
                }
            }
        }
        w.out
    }

    pub fn parse(text: &str) -> Result<CertFile> {
        let file = Lines::parse(text)?;
        let kind = file.require("kind")?;
        let (spec, n) = file.field_and_arity()?;
        match kind.0.as_str() {
            "decomposition" => {
                let degree = file.require_usize("degree")? as u32;
                let target = file.form(spec, n, "target", degree)?;
                let pairs = file.pairs("alpha", "beta")?;
                let factors = pairs
                    .into_iter()
                    .map(|((a, ap), (b, bp))| {
                        let a = homogeneous(file.poly_at(spec, n, &a, ap)?, ap)?;
                        let b = homogeneous(file.poly_at(spec, n, &b, bp)?, bp)?;
                        Ok((a, b))
                    })
                    .collect::<Result<Vec<_>>>()?;
                file.check_bound(factors.len())?;
                Ok(CertFile::Decomposition(DecompositionCert {
                    target,
                    factors,
                }))
            }
            "partition-rank" => {
                let blocks = file.require_usize("blocks")?;
                let naming = VarNaming::Blocks { per_block: n };
                let (tb, tp) = file.entry("target")?;
                let tpoly =
                    parse_polynomial_body(spec, n * blocks, naming, tb, tp.line, tp.column)?;
                let target = match file.header("support") {
                    Some((s, p)) => MultilinearForm::with_support(
                        tpoly,
                        n,
                        blocks,
                        parse_block_set(s, blocks, p.line, p.column)?,
                    )?,
                    None => MultilinearForm::new(tpoly, n, blocks)?,
                };
                let mut factors = Vec::new();
                let mut pending: Option<(BTreeSet<usize>, MultilinearForm)> = None;
                for (label, body, pos) in &file.entries {
                    if let Some(set) = label.strip_prefix("r{").and_then(|s| s.strip_suffix('}')) {
                        if pending.is_some() {
                            return Err(Error::parse(
                                pos.line,
                                1,
                                "`r{..}` entry without its `q` partner",
                            ));
                        }
                        let set = parse_block_set(set, blocks, pos.line, 1)?;
                        let poly = parse_polynomial_body(
                            spec,
                            n * blocks,
                            naming,
                            body,
                            pos.line,
                            pos.column,
                        )?;
                        pending = Some((
                            set.clone(),
                            MultilinearForm::with_support(poly, n, blocks, set)?,
                        ));
                    } else if label == "q" {
                        let Some((set, r)) = pending.take() else {
                            return Err(Error::parse(
                                pos.line,
                                1,
                                "`q` entry without a preceding `r{..}`",
                            ));
                        };
                        let rest: BTreeSet<usize> =
                            target.support().difference(&set).copied().collect();
                        let poly = parse_polynomial_body(
                            spec,
                            n * blocks,
                            naming,
                            body,
                            pos.line,
                            pos.column,
                        )?;
                        let q = MultilinearForm::with_support(poly, n, blocks, rest)?;
                        factors.push(PrFactor { blocks: set, r, q });
                    }
                }
                if pending.is_some() {
                    return Err(Error::parse(
                        file.last_line,
                        1,
                        "`r{..}` entry without its `q` partner",
                    ));
                }
                file.check_bound(factors.len())?;
                Ok(CertFile::PartitionRank(PartitionRankCert {
                    target,
                    factors,
                }))
            }
            "variety" => {
                let d = file.require_usize("d")?;
                if d == 0 {
                    return Err(Error::parse(1, 1, "`d` must be positive"));
                }
                let (fb, fp) = file.entry("f")?;
                let f = file.poly_at(spec, n, fb, fp)?;
                let blocks = d - 1;
                let naming = VarNaming::Blocks { per_block: n };
                let mut forms = Vec::new();
                for (label, body, pos) in &file.entries {
                    if let Some(set) = label
                        .strip_prefix("form{")
                        .and_then(|s| s.strip_suffix('}'))
                    {
                        let set = parse_block_set(set, blocks, pos.line, 1)?;
                        let poly = parse_polynomial_body(
                            spec,
                            n * blocks,
                            naming,
                            body,
                            pos.line,
                            pos.column,
                        )?;
                        forms.push(MultilinearForm::with_support(poly, n, blocks, set)?);
                    }
                }
                file.check_bound(forms.len())?;
                Ok(CertFile::Variety {
                    cert: VarietyCert { forms },
                    f,
                    d,
                })
            }
            "rkstar" => {
                let cert = file.rkstar(spec, n)?;
                file.check_bound(cert.len())?;
                Ok(CertFile::RkStar(cert))
            }
            "perturbation" => {
                let source = file.rkstar(spec, n)?;
                let t = file.require_usize("t")?;
                let order = file
                    .list("order")?
                    .into_iter()
                    .map(|(i, pos)| {
                        i.checked_sub(1).map(|i| i as usize).ok_or_else(|| {
                            Error::parse(pos.line, pos.column, "term indices are one-based")
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let elems = |key: &str| -> Result<Vec<FieldElement>> {
                    file.list(key)?
                        .into_iter()
                        .map(|(v, pos)| {
                            if v >= spec.p() {
                                Err(Error::parse(
                                    pos.line,
                                    pos.column,
                                    format!("`{key}` entry {v} is not below p"),
                                ))
                            } else {
                                Ok(FieldElement(v))
                            }
                        })
                        .collect()
                };
                let (y, z) = (elems("y")?, elems("z")?);
                let c0 = elems("c0")?;
                let [c0] = c0[..] else {
                    return Err(Error::parse(1, 1, "`c0` must be a single field element"));
                };
                let zero_count = file.require_usize("zero_count")? as u64;
                let pairs = file.pairs("generator", "witness")?;
                let mut generators = Vec::new();
                let mut witnesses = Vec::new();
                for ((g, gp), (l, lp)) in pairs {
                    generators.push(file.poly_at(spec, n, &g, gp)?);
                    witnesses.push(file.poly_at(spec, n, &l, lp)?);
                }
                Ok(CertFile::Perturbation(PerturbationCert {
                    source,
                    order,
                    t,
                    y,
                    z,
                    generators,
                    witnesses,
                    c0,
                    zero_count,
                }))
            }
            "correlation" => {
                let (fb, fp) = file.entry("f")?;
                let f = file.poly_at(spec, n, fb, fp)?;
                let (cb, cp) = file.entry("correlator")?;
                let correlator = file.poly_at(spec, n, cb, cp)?;
                let degree_bound = file.require_usize("degree_bound")? as u32;
                let (floor, fpos) = file.require("claimed_floor")?;
                let claimed_floor: f64 = floor.parse().map_err(|_| {
                    Error::parse(fpos.line, fpos.column, format!("bad number `{floor}`"))
                })?;
                let counts: Vec<u64> = file
                    .list("histogram")?
                    .into_iter()
                    .map(|(v, _)| v)
                    .collect();
                if counts.len() as u64 != spec.p() {
                    return Err(Error::parse(
                        1,
                        1,
                        format!("histogram needs {} counts", spec.p()),
                    ));
                }
                let exact = BiasReport::from_histogram(
                    ValueHistogram::from_counts(counts),
                    spec,
                    Method::Exact,
                )?;
                let provenance = file
                    .entries
                    .iter()
                    .filter(|(l, _, _)| l == "provenance")
                    .map(|(_, b, _)| b.clone())
                    .collect();
                Ok(CertFile::Correlation(CorrelationCert {
                    f,
                    correlator,
                    degree_bound,
                    exact,
                    claimed_floor,
                    provenance,
                }))
            }
            other => Err(Error::parse(
                kind.1.line,
                kind.1.column,
                format!("unknown certificate kind `{other}`"),
            )),
        }
    }

    /// Re-checks the certificate from scratch.
    pub fn verify(&self, budget: u64) -> Result<Verdict> {
        Ok(match self {
            CertFile::Decomposition(c) => c.verify(),
            CertFile::PartitionRank(c) => c.verify(),
            CertFile::Variety { cert, f, d } => {
                let d = *d;
                if f.degree().finite().is_some_and(|k| k as usize > d) {
                    return Ok(Verdict::Invalid(format!("f has degree above d = {d}")));
                }
                if d < 2 {
                    return Ok(Verdict::Invalid("variety certificates need d >= 2".into()));
                }
                let t = crate::pipeline::coefficient_forms(f, d)?;
                cert.verify(&t, f.nvars(), d, budget)?
            }
            CertFile::RkStar(c) => c.verify(),
            CertFile::Perturbation(c) => c.verify(budget)?,
            CertFile::Correlation(c) => match c.verify(budget)? {
                Ok(()) => Verdict::Valid,
                Err(why) => Verdict::Invalid(why),
            },
        })
    }
}

fn homogeneous(poly: Polynomial, pos: Pos) -> Result<HomogeneousForm> {
    HomogeneousForm::from_polynomial(poly)
        .map_err(|e| Error::parse(pos.line, pos.column, e.to_string()))
}

fn block_list(set: &BTreeSet<usize>) -> String {
    set.iter()
        .map(|b| (b + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn values(v: &[FieldElement]) -> String {
    v.iter()
        .map(|x| x.value().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn write_rkstar_body(w: &mut Writer, c: &RkStarCert) {
    w.poly("target", &c.target);
    for (a, b) in &c.factors {
        w.poly("alpha", a);
        w.poly("beta", b);
    }
}

#[derive(Default)]
struct Writer {
    out: String,
}

impl Writer {
    fn header(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn entry(&mut self, label: &str, body: &str) {
        self.out.push_str(&format!("{label}: {body}\n"));
    }

    fn poly(&mut self, label: &str, p: &Polynomial) {
        self.entry(label, &format_body(p, &VarNaming::Flat));
    }
}

struct Lines {
    headers: Vec<(String, String, Pos)>,
    entries: Vec<(String, String, Pos)>,
    last_line: usize,
}

impl Lines {
    fn parse(text: &str) -> Result<Lines> {
        let mut headers = Vec::new();
        let mut entries = Vec::new();
        let mut last_line = 1;
        for (li, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            last_line = li + 1;
            let indent = line.len() - line.trim_start().len();
            if let Some((label, body)) = trimmed.split_once(':').filter(|(l, _)| !l.contains('=')) {
                let col = indent + label.len() + 2 + (body.len() - body.trim_start().len());
                entries.push((
                    label.trim().to_string(),
                    body.trim().to_string(),
                    Pos {
                        line: li + 1,
                        column: col,
                    },
                ));
                continue;
            }
            let mut start = 0;
            for seg in line.split(';') {
                let col = start + 1 + (seg.len() - seg.trim_start().len());
                start += seg.len() + 1;
                let seg = seg.trim();
                if seg.is_empty() {
                    continue;
                }
                let Some((k, v)) = seg.split_once('=') else {
                    return Err(Error::parse(
                        li + 1,
                        col,
                        format!("expected `key=value` or `label: body`, got `{seg}`"),
                    ));
                };
                headers.push((
                    k.trim().to_string(),
                    v.trim().to_string(),
                    Pos {
                        line: li + 1,
                        column: col,
                    },
                ));
            }
        }
        Ok(Lines {
            headers,
            entries,
            last_line,
        })
    }

    fn header(&self, key: &str) -> Option<(&str, Pos)> {
        self.headers
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, p)| (v.as_str(), *p))
    }

    fn require(&self, key: &str) -> Result<(String, Pos)> {
        self.header(key)
            .map(|(v, p)| (v.to_string(), p))
            .ok_or_else(|| Error::parse(1, 1, format!("missing `{key}=` header")))
    }

    fn require_usize(&self, key: &str) -> Result<usize> {
        let (v, pos) = self.require(key)?;
        v.parse().map_err(|_| {
            Error::parse(
                pos.line,
                pos.column,
                format!("`{key}` must be a nonnegative integer, got `{v}`"),
            )
        })
    }

    fn list(&self, key: &str) -> Result<Vec<(u64, Pos)>> {
        let (v, pos) = self.require(key)?;
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim().parse::<u64>().map(|x| (x, pos)).map_err(|_| {
                    Error::parse(
                        pos.line,
                        pos.column,
                        format!("bad entry `{}` in `{key}`", s.trim()),
                    )
                })
            })
            .collect()
    }

    fn field_and_arity(&self) -> Result<(FieldSpec, usize)> {
        let (p, pos) = self.require("p")?;
        let p: u64 = p
            .parse()
            .map_err(|_| Error::parse(pos.line, pos.column, format!("invalid prime `{p}`")))?;
        let spec =
            FieldSpec::new(p).map_err(|e| Error::parse(pos.line, pos.column, e.to_string()))?;
        Ok((spec, self.require_usize("n")?))
    }

    fn check_bound(&self, len: usize) -> Result<()> {
        match self.header("bound") {
            None => Ok(()),
            Some((v, pos)) => {
                let bound: usize = v
                    .parse()
                    .map_err(|_| Error::parse(pos.line, pos.column, format!("bad bound `{v}`")))?;
                if len > bound {
                    Err(Error::InvalidCertificate(format!(
                        "{len} terms exceed the declared bound {bound}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn entry(&self, label: &str) -> Result<(&str, Pos)> {
        self.entries
            .iter()
            .find(|(l, _, _)| l == label)
            .map(|(_, b, p)| (b.as_str(), *p))
            .ok_or_else(|| Error::parse(self.last_line, 1, format!("missing `{label}:` entry")))
    }

    fn poly_at(&self, spec: FieldSpec, n: usize, body: &str, pos: Pos) -> Result<Polynomial> {
        parse_polynomial_body(spec, n, VarNaming::Flat, body, pos.line, pos.column)
    }

    fn form(&self, spec: FieldSpec, n: usize, label: &str, degree: u32) -> Result<HomogeneousForm> {
        let (b, pos) = self.entry(label)?;
        HomogeneousForm::new(self.poly_at(spec, n, b, pos)?, degree)
            .map_err(|e| Error::parse(pos.line, pos.column, e.to_string()))
    }

    /// Consecutive `(first, second)` entry pairs, in file order.
    #[allow(clippy::type_complexity)]
    fn pairs(&self, first: &str, second: &str) -> Result<Vec<((String, Pos), (String, Pos))>> {
        let mut out = Vec::new();
        let mut pending: Option<(String, Pos)> = None;
        for (label, body, pos) in &self.entries {
            if label == first {
                if pending.is_some() {
                    return Err(Error::parse(
                        pos.line,
                        1,
                        format!("`{first}` without its `{second}` partner"),
                    ));
                }
                pending = Some((body.clone(), *pos));
            } else if label == second {
                let Some(a) = pending.take() else {
                    return Err(Error::parse(
                        pos.line,
                        1,
                        format!("`{second}` without a preceding `{first}`"),
                    ));
                };
                out.push((a, (body.clone(), *pos)));
            }
        }
        if pending.is_some() {
            return Err(Error::parse(
                self.last_line,
                1,
                format!("`{first}` without its `{second}` partner"),
            ));
        }
        Ok(out)
    }

    fn rkstar(&self, spec: FieldSpec, n: usize) -> Result<RkStarCert> {
        let (tb, tp) = self.entry("target")?;
        let target = self.poly_at(spec, n, tb, tp)?;
        let factors = self
            .pairs("alpha", "beta")?
            .into_iter()
            .map(|((a, ap), (b, bp))| {
                Ok((
                    self.poly_at(spec, n, &a, ap)?,
                    self.poly_at(spec, n, &b, bp)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RkStarCert { target, factors })
    }
}

/// A polynomial in the plain text format.
pub fn polynomial_to_text(f: &Polynomial) -> String {
    format!(
        "p={}; n={}; {}\n",
        f.spec().p(),
        f.nvars(),
        format_body(f, &VarNaming::Flat)
    )
}

/// Writes a pipeline run: the input, one file per stage, the final
/// certificate and `summary.txt`.
pub fn write_run(run: &PipelineRun, dir: &Path) -> Result<()> {
    let io =
        |e: std::io::Error| Error::precondition(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("input.poly"), polynomial_to_text(&run.input)).map_err(io)?;
    let mut notes = String::new();
    for (i, stage) in run.stages.iter().enumerate() {
        let stem = format!("{:02}-{}", i + 1, stage.name);
        let (ext, text) = match &stage.artifact {
            Artifact::Polynomial(p) => ("poly", polynomial_to_text(p)),
            Artifact::Multilinear(t) => ("form", format!("{}\n", t.to_text())),
            Artifact::Decomposition(c) => ("cert", CertFile::Decomposition(c.clone()).to_text()),
            Artifact::PartitionRank(c) => ("cert", CertFile::PartitionRank(c.clone()).to_text()),
            Artifact::Variety(c) => (
                "cert",
                CertFile::Variety {
                    cert: c.clone(),
                    f: run.input.clone(),
                    d: run.cert.degree_bound as usize + 1,
                }
                .to_text(),
            ),
            Artifact::RkStar(c) => ("cert", CertFile::RkStar(c.clone()).to_text()),
            Artifact::Perturbation(c) => ("cert", CertFile::Perturbation(c.clone()).to_text()),
            Artifact::Correlation(c) => ("cert", CertFile::Correlation(c.clone()).to_text()),
            Artifact::Note(s) => {
                notes.push_str(&format!("{}: {s}\n", stage.name));
                continue;
            }
        };
        fs::write(dir.join(format!("{stem}.{ext}")), text).map_err(io)?;
    }
    fs::write(dir.join("notes.txt"), notes).map_err(io)?;
    fs::write(
        dir.join("correlation.cert"),
        CertFile::Correlation(run.cert.clone()).to_text(),
    )
    .map_err(io)?;
    fs::write(dir.join("summary.txt"), run.summary.to_record()).map_err(io)?;
    Ok(())
}
