//! CSV formats. Inputs are recognized by their header line; lines starting
//! with `#` carry `key=value` metadata. Floats are written in shortest
//! round-trip form so output is byte-stable.
//!
//! | kind | header |
//! |---|---|
//! | matrix dump | `target_site,source_site,row,col,re,im` |
//! | canonical spec | `site,p,r,theta,kappa,cut_after` |
//! | Suzuki spec | `site,p,a,q_re,q_im,b_re,b_im` |
//! | state | `site,c1_re,c1_im,c2_re,c2_im` |
//! | canonical report | `site,p,r,theta,kappa` per segment |
//! | gauge | `site,row,col,re,im` |
//! | distribution | `site,prob` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::builders::{
    build_canonical, build_suzuki, GaugeTransform, SSQWParams, SiteParams, SuzukiParams, SuzukiSite,
};
use crate::canonical::CanonicalForm;
use crate::dynamics::{moments, Distribution};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, V2, ZERO};
use crate::operator::{DenseMatrix, StateVector, WalkOperator, Window};

pub const MATRIX_HEADER: &str = "target_site,source_site,row,col,re,im";
pub const CANONICAL_HEADER: &str = "site,p,r,theta,kappa,cut_after";
pub const SUZUKI_HEADER: &str = "site,p,a,q_re,q_im,b_re,b_im";
pub const STATE_HEADER: &str = "site,c1_re,c1_im,c2_re,c2_im";
pub const REPORT_HEADER: &str = "site,p,r,theta,kappa";
pub const GAUGE_HEADER: &str = "site,row,col,re,im";
pub const DISTRIBUTION_HEADER: &str = "site,prob";
pub const SUMMARY_HEADER: &str = "t,mean,second_moment,norm_residual";

/// A parsed walk input.
#[derive(Clone, Debug, PartialEq)]
pub enum WalkFile {
    Matrix(WalkOperator),
    Canonical(SSQWParams),
    Suzuki(SuzukiParams),
}

impl WalkFile {
    pub fn operator(&self) -> WalkOperator {
        match self {
            WalkFile::Matrix(u) => u.clone(),
            WalkFile::Canonical(p) => build_canonical(p),
            WalkFile::Suzuki(s) => build_suzuki(s),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            WalkFile::Matrix(_) => "matrix",
            WalkFile::Canonical(_) => "canonical",
            WalkFile::Suzuki(_) => "suzuki",
        }
    }
}

/// Data rows with their 1-based line numbers, plus `key=value` metadata.
struct Table {
    header: String,
    header_line: usize,
    meta: BTreeMap<String, (usize, String)>,
    rows: Vec<(usize, Vec<String>)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn read_table(text: &str) -> Result<Table> {
    let mut meta = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim().strip_prefix('#') {
            for kv in rest.split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    meta.insert(k.to_string(), (i + 1, v.to_string()));
                }
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(e.position().map_or(1, |p| p.line() as usize), e.to_string()))?
        .clone();
    let header_line = headers.position().map_or(1, |p| p.line() as usize);
    let header = headers.iter().collect::<Vec<_>>().join(",");
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec
            .map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != headers.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", headers.len(), rec.len()),
            ));
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table {
        header,
        header_line,
        meta,
        rows,
    })
}

fn num<T: std::str::FromStr>(line: usize, field: &str, name: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_err(line, format!("cannot read {name} from '{field}'")))
}

fn flag(line: usize, field: &str) -> Result<bool> {
    match field {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        _ => Err(parse_err(
            line,
            format!("cut_after must be 0 or 1, found '{field}'"),
        )),
    }
}

fn meta_window(t: &Table) -> Result<Option<Window>> {
    let Some((line, v)) = t.meta.get("window") else {
        return Ok(None);
    };
    let (a, b) = v
        .split_once(',')
        .ok_or_else(|| parse_err(*line, format!("window must be 'lo,hi', found '{v}'")))?;
    let lo = num(*line, a, "window lo")?;
    let hi = num(*line, b, "window hi")?;
    Window::new(lo, hi)
        .map(Some)
        .map_err(|e| parse_err(*line, e.to_string()))
}

/// Sites in rows must be consecutive and increasing.
fn contiguous(t: &Table) -> Result<Window> {
    let first = t
        .rows
        .first()
        .ok_or_else(|| parse_err(t.header_line, "no data rows"))?;
    let lo: i64 = num(first.0, &first.1[0], "site")?;
    for (k, (line, row)) in t.rows.iter().enumerate() {
        let x: i64 = num(*line, &row[0], "site")?;
        if x != lo + k as i64 {
            return Err(parse_err(
                *line,
                format!("expected site {}, found {x}", lo + k as i64),
            ));
        }
    }
    Window::new(lo, lo + t.rows.len() as i64 - 1).map_err(|e| parse_err(first.0, e.to_string()))
}

fn invariant(e: Error) -> Error {
    match e {
        Error::InvalidParams(m) => Error::InvariantViolation(m),
        Error::BandViolation {
            target,
            src: source,
        } => Error::InvariantViolation(format!(
            "band: entry in block ({target} <- {source}) is outside the band"
        )),
        other => other,
    }
}

fn parse_matrix(t: &Table) -> Result<WalkOperator> {
    let mut entries: BTreeMap<(i64, i64), Mat2> = BTreeMap::new();
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for (line, row) in &t.rows {
        let target: i64 = num(*line, &row[0], "target_site")?;
        let source: i64 = num(*line, &row[1], "source_site")?;
        let r: usize = num(*line, &row[2], "row")?;
        let c: usize = num(*line, &row[3], "col")?;
        if r > 1 || c > 1 {
            return Err(parse_err(*line, "row and col must be 0 or 1"));
        }
        let re: f64 = num(*line, &row[4], "re")?;
        let im: f64 = num(*line, &row[5], "im")?;
        if (target - source).abs() > 1 && (re != 0.0 || im != 0.0) {
            return Err(invariant(Error::BandViolation {
                target,
                src: source,
            }));
        }
        lo = lo.min(target).min(source);
        hi = hi.max(target).max(source);
        entries.entry((target, source)).or_insert_with(Mat2::zero).0[r][c] = C64::new(re, im);
    }
    let window = match meta_window(t)? {
        Some(w) => w,
        None if lo <= hi => Window::new(lo, hi)?,
        None => {
            return Err(parse_err(
                t.header_line,
                "empty matrix dump without a window line",
            ))
        }
    };
    let blocks = entries
        .into_iter()
        .filter(|((ta, so), _)| (ta - so).abs() <= 1)
        .map(|((ta, so), m)| (ta, so, m));
    WalkOperator::from_blocks(window, blocks).map_err(invariant)
}

fn parse_canonical(t: &Table) -> Result<SSQWParams> {
    let window = contiguous(t)?;
    let mut sites = Vec::new();
    let mut cuts = Vec::new();
    for (line, row) in &t.rows {
        sites.push(SiteParams::new(
            num(*line, &row[1], "p")?,
            num(*line, &row[2], "r")?,
            num(*line, &row[3], "theta")?,
            num(*line, &row[4], "kappa")?,
        ));
        cuts.push(flag(*line, &row[5])?);
    }
    let entry = match t.meta.get("entry_theta") {
        Some((line, v)) => num(*line, v, "entry_theta")?,
        None => 0.0,
    };
    SSQWParams::with_entry(window, sites, cuts, entry).map_err(invariant)
}

fn parse_suzuki(t: &Table) -> Result<SuzukiParams> {
    let window = contiguous(t)?;
    let mut sites = Vec::new();
    for (line, row) in &t.rows {
        let f = |k: usize, name: &str| num::<f64>(*line, &row[k], name);
        sites.push(SuzukiSite {
            p: f(1, "p")?,
            a: f(2, "a")?,
            q: C64::new(f(3, "q_re")?, f(4, "q_im")?),
            b: C64::new(f(5, "b_re")?, f(6, "b_im")?),
        });
    }
    SuzukiParams::new(window, sites).map_err(invariant)
}

/// Parses any of the three walk formats, chosen by header.
pub fn parse_walk_str(text: &str) -> Result<WalkFile> {
    let t = read_table(text)?;
    match t.header.as_str() {
        MATRIX_HEADER => parse_matrix(&t).map(WalkFile::Matrix),
        CANONICAL_HEADER => parse_canonical(&t).map(WalkFile::Canonical),
        SUZUKI_HEADER => parse_suzuki(&t).map(WalkFile::Suzuki),
        other => Err(parse_err(
            t.header_line,
            format!("unrecognized header '{other}'"),
        )),
    }
}

pub fn parse_walk_file(path: impl AsRef<Path>) -> Result<WalkFile> {
    parse_walk_str(&std::fs::read_to_string(path)?)
}

/// Reads a state; sites may be sparse and are placed on `window`, or on
/// the smallest window holding them when `window` is `None`.
pub fn parse_state_str(text: &str, window: Option<Window>) -> Result<StateVector> {
    let t = read_table(text)?;
    if t.header != STATE_HEADER {
        return Err(parse_err(
            t.header_line,
            format!("expected header '{STATE_HEADER}'"),
        ));
    }
    let mut entries: Vec<(i64, V2)> = Vec::new();
    for (line, row) in &t.rows {
        let f = |k: usize, name: &str| num::<f64>(*line, &row[k], name);
        let x: i64 = num(*line, &row[0], "site")?;
        if let Some(w) = window {
            if !w.contains(x) {
                return Err(parse_err(*line, format!("site {x} outside {w}")));
            }
        }
        entries.push((
            x,
            [
                C64::new(f(1, "c1_re")?, f(2, "c1_im")?),
                C64::new(f(3, "c2_re")?, f(4, "c2_im")?),
            ],
        ));
    }
    let window = match window {
        Some(w) => w,
        None => {
            let lo = entries
                .iter()
                .map(|e| e.0)
                .min()
                .ok_or_else(|| parse_err(t.header_line, "no data rows"))?;
            let hi = entries.iter().map(|e| e.0).max().unwrap();
            Window::new(lo, hi)?
        }
    };
    StateVector::from_sites(window, entries)
}

pub fn parse_state_file(path: impl AsRef<Path>, window: Option<Window>) -> Result<StateVector> {
    parse_state_str(&std::fs::read_to_string(path)?, window)
}

fn csv_text(
    comments: &[String],
    header: &str,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8"));
    out
}

fn s<T: std::fmt::Display>(v: T) -> String {
    v.to_string()
}

/// Every entry of every nonzero block.
pub fn write_matrix(u: &WalkOperator) -> String {
    let w = u.window();
    let rows = u
        .blocks()
        .filter(|(_, _, m)| !m.is_zero())
        .flat_map(|(t, so, m)| {
            (0..2).flat_map(move |r| {
                (0..2).map(move |c| vec![s(t), s(so), s(r), s(c), s(m.0[r][c].re), s(m.0[r][c].im)])
            })
        });
    csv_text(
        &[format!("window={},{}", w.lo(), w.hi())],
        MATRIX_HEADER,
        rows,
    )
}

/// A dense window matrix (e.g. a certificate factor) in the matrix format;
/// entries outside the band are kept.
pub fn write_dense(window: Window, m: &DenseMatrix) -> String {
    let mut rows = Vec::new();
    for tj in 0..window.len() {
        for sj in 0..window.len() {
            let block: Vec<C64> = (0..4)
                .map(|k| m[(2 * tj + k / 2, 2 * sj + k % 2)])
                .collect();
            if block.iter().all(|z| *z == ZERO) {
                continue;
            }
            for (k, z) in block.iter().enumerate() {
                rows.push(vec![
                    s(window.site(tj)),
                    s(window.site(sj)),
                    s(k / 2),
                    s(k % 2),
                    s(z.re),
                    s(z.im),
                ]);
            }
        }
    }
    csv_text(
        &[format!("window={},{}", window.lo(), window.hi())],
        MATRIX_HEADER,
        rows,
    )
}

pub fn write_canonical_spec(p: &SSQWParams) -> String {
    let comments = if p.entry_theta() != 0.0 {
        vec![format!("entry_theta={}", p.entry_theta())]
    } else {
        vec![]
    };
    let rows = p
        .window()
        .sites()
        .zip(p.sites())
        .zip(p.cut_flags())
        .map(|((x, sp), &c)| vec![s(x), s(sp.p), s(sp.r), s(sp.theta), s(sp.kappa), s(c as u8)]);
    csv_text(&comments, CANONICAL_HEADER, rows)
}

pub fn write_suzuki_spec(sz: &SuzukiParams) -> String {
    let rows = sz.window().sites().zip(sz.sites()).map(|(x, t)| {
        vec![
            s(x),
            s(t.p),
            s(t.a),
            s(t.q.re),
            s(t.q.im),
            s(t.b.re),
            s(t.b.im),
        ]
    });
    csv_text(&[], SUZUKI_HEADER, rows)
}

pub fn write_state(psi: &StateVector) -> String {
    let rows = psi
        .window()
        .sites()
        .zip(psi.amplitudes())
        .map(|(x, v)| vec![s(x), s(v[0].re), s(v[0].im), s(v[1].re), s(v[1].im)]);
    csv_text(&[], STATE_HEADER, rows)
}

/// One block per segment: a metadata line and the parameter rows.
pub fn write_canonical_report(form: &CanonicalForm) -> String {
    let mut out = String::new();
    for (k, seg) in form.segments.iter().enumerate() {
        let meta = format!(
            "segment={k} case={} anchor_site={} anchor_rule={} entry_theta={}",
            seg.spec.case,
            seg.anchor.site,
            seg.anchor.rule,
            seg.params.entry_theta()
        );
        let rows = seg
            .spec
            .window
            .sites()
            .zip(seg.params.sites())
            .map(|(x, sp)| vec![s(x), s(sp.p), s(sp.r), s(sp.theta), s(sp.kappa)]);
        out.push_str(&csv_text(&[meta], REPORT_HEADER, rows));
    }
    out
}

pub fn write_gauge(g: &GaugeTransform) -> String {
    let rows = g.window().sites().zip(g.blocks()).flat_map(|(x, b)| {
        let b = *b;
        (0..2).flat_map(move |r| {
            (0..2).map(move |c| vec![s(x), s(r), s(c), s(b.0[r][c].re), s(b.0[r][c].im)])
        })
    });
    csv_text(&[], GAUGE_HEADER, rows)
}

pub fn parse_gauge_str(text: &str) -> Result<GaugeTransform> {
    let t = read_table(text)?;
    if t.header != GAUGE_HEADER {
        return Err(parse_err(
            t.header_line,
            format!("expected header '{GAUGE_HEADER}'"),
        ));
    }
    let mut blocks: BTreeMap<i64, Mat2> = BTreeMap::new();
    for (line, row) in &t.rows {
        let x: i64 = num(*line, &row[0], "site")?;
        let r: usize = num(*line, &row[1], "row")?;
        let c: usize = num(*line, &row[2], "col")?;
        if r > 1 || c > 1 {
            return Err(parse_err(*line, "row and col must be 0 or 1"));
        }
        let z = C64::new(num(*line, &row[3], "re")?, num(*line, &row[4], "im")?);
        blocks.entry(x).or_insert_with(Mat2::zero).0[r][c] = z;
    }
    let (&lo, _) = blocks
        .first_key_value()
        .ok_or_else(|| parse_err(t.header_line, "no data rows"))?;
    let (&hi, _) = blocks.last_key_value().unwrap();
    let window = Window::new(lo, hi)?;
    if blocks.len() != window.len() {
        return Err(Error::InvariantViolation(
            "gauge sites are not contiguous".into(),
        ));
    }
    GaugeTransform::from_blocks(window, blocks.into_values().collect()).map_err(invariant)
}

pub fn write_distribution(d: &Distribution) -> String {
    csv_text(
        &[],
        DISTRIBUTION_HEADER,
        d.iter().map(|(x, p)| vec![s(x), s(p)]),
    )
}

/// `t,mean,second_moment,norm_residual` with its header.
pub fn write_summary(t: usize, d: &Distribution) -> String {
    let mean = moments(d, 1).expect("order 1");
    let second = moments(d, 2).expect("order 2");
    let residual = (d.total() - 1.0).abs();
    csv_text(
        &[],
        SUMMARY_HEADER,
        [vec![s(t), s(mean), s(second), s(residual)]],
    )
}
