//! Plain-text `.qlsp` instance files.
//!
//! ```text
//! # rmls qlsp instance v1
//! n 4
//! d 4
//! seed 42
//! kappa 1.0000000000000000e1
//! kappa_target 1.0000000000000000e1
//! kappa_tol 1.0000000000000000e-3
//! b_sparsity 4
//! attempts 731
//! A 37
//! 0 0 -4.1552359023113656e-1 0.0000000000000000e0
//! ...
//! b 16
//! 2.1010375432373744e-1 -5.3022316047226460e-1
//! ...
//! ```
//!
//! `A` lists `(row, col, re, im)` triplets for the upper triangle; a lower
//! entry is implied as the conjugate unless listed explicitly. Floats carry
//! 17 significant digits, so a save/load round trip is bit-exact. Lines
//! starting with `#` and blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{InstanceMetadata, QlspInstance};
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, Matrix, StateVector, C64};

pub const INSTANCE_EXTENSION: &str = "qlsp";

const MAGIC: &str = "# rmls qlsp instance v1";
const KAPPA_CONSISTENCY: f64 = 1e-9;

/// Serializes an instance to the `.qlsp` text form.
pub fn write_instance(inst: &QlspInstance) -> String {
    let mut out = String::new();
    let meta = inst.metadata();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "n {}", inst.n()).unwrap();
    writeln!(out, "d {}", inst.d()).unwrap();
    if let Some(seed) = meta.seed {
        writeln!(out, "seed {seed}").unwrap();
    }
    writeln!(out, "kappa {:.16e}", inst.kappa()).unwrap();
    if let Some(k) = meta.kappa_target {
        writeln!(out, "kappa_target {k:.16e}").unwrap();
    }
    if let Some(t) = meta.kappa_tol {
        writeln!(out, "kappa_tol {t:.16e}").unwrap();
    }
    if let Some(s) = meta.b_sparsity {
        writeln!(out, "b_sparsity {s}").unwrap();
    }
    if let Some(a) = meta.attempts {
        writeln!(out, "attempts {a}").unwrap();
    }

    let a = inst.a().matrix();
    let dim = a.dim();
    let entries: Vec<(usize, usize, C64)> = (0..dim)
        .flat_map(|i| (i..dim).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, a[(i, j)]))
        .filter(|&(_, _, z)| z != C64::new(0.0, 0.0))
        .collect();
    writeln!(out, "A {}", entries.len()).unwrap();
    for (i, j, z) in entries {
        writeln!(out, "{i} {j} {:.16e} {:.16e}", z.re, z.im).unwrap();
    }
    writeln!(out, "b {}", dim).unwrap();
    for z in inst.b().amplitudes() {
        writeln!(out, "{:.16e} {:.16e}", z.re, z.im).unwrap();
    }
    out
}

pub fn save_instance(inst: &QlspInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_instance(inst)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<QlspInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text, path)
}

struct Lines<'a> {
    path: PathBuf,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &Path) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            path: path.to_path_buf(),
            inner: it.peekable(),
            last_line: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last_line = n;
                Ok((n, l.split_whitespace().collect()))
            }
            None => Err(self.err(
                self.last_line + 1,
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    fn peek_key(&mut self) -> Option<&'a str> {
        self.inner
            .peek()
            .and_then(|(_, l)| l.split_whitespace().next())
    }
}

fn field<T: std::str::FromStr>(
    lines: &Lines,
    line: usize,
    name: &str,
    tok: Option<&&str>,
) -> Result<T> {
    let tok = tok.ok_or_else(|| lines.err(line, format!("missing field `{name}`")))?;
    tok.parse()
        .map_err(|_| lines.err(line, format!("field `{name}`: cannot parse {tok:?}")))
}

/// Parses `.qlsp` text; `path` is used for diagnostics only.
pub fn parse_instance(text: &str, path: &Path) -> Result<QlspInstance> {
    let mut lines = Lines::new(text, path);
    let mut n: Option<u32> = None;
    let mut d: Option<usize> = None;
    let mut kappa: Option<(usize, f64)> = None;
    let mut meta = InstanceMetadata::default();

    while let Some(key) = lines.peek_key() {
        if key == "A" {
            break;
        }
        let (ln, toks) = lines.next("header")?;
        let val = toks.get(1);
        match key {
            "n" => n = Some(field(&lines, ln, "n", val)?),
            "d" => d = Some(field(&lines, ln, "d", val)?),
            "kappa" => kappa = Some((ln, field(&lines, ln, "kappa", val)?)),
            "seed" => meta.seed = Some(field(&lines, ln, "seed", val)?),
            "kappa_target" => meta.kappa_target = Some(field(&lines, ln, "kappa_target", val)?),
            "kappa_tol" => meta.kappa_tol = Some(field(&lines, ln, "kappa_tol", val)?),
            "b_sparsity" => meta.b_sparsity = Some(field(&lines, ln, "b_sparsity", val)?),
            "attempts" => meta.attempts = Some(field(&lines, ln, "attempts", val)?),
            other => return Err(lines.err(ln, format!("unknown header key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| lines.err(lines.last_line, "missing header `n`"))?;
    let d = d.ok_or_else(|| lines.err(lines.last_line, "missing header `d`"))?;
    if n == 0 || n > 12 {
        return Err(lines.err(lines.last_line, format!("n = {n} out of range 1..=12")));
    }
    let dim = 1usize << n;

    let (ln, toks) = lines.next("`A <count>`")?;
    if toks.first() != Some(&"A") {
        return Err(lines.err(ln, "expected `A <count>`"));
    }
    let count: usize = field(&lines, ln, "A count", toks.get(1))?;
    let mut explicit = vec![false; dim * dim];
    let mut m = Matrix::zeros(dim);
    let mut triplets = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, toks) = lines.next("matrix entry")?;
        if toks.len() != 4 {
            return Err(lines.err(
                ln,
                format!("expected `row col re im`, got {} fields", toks.len()),
            ));
        }
        let r: usize = field(&lines, ln, "row", toks.first())?;
        let c: usize = field(&lines, ln, "col", toks.get(1))?;
        let re: f64 = field(&lines, ln, "re", toks.get(2))?;
        let im: f64 = field(&lines, ln, "im", toks.get(3))?;
        if r >= dim || c >= dim {
            return Err(lines.err(ln, format!("index ({r}, {c}) out of range for dim {dim}")));
        }
        if explicit[r * dim + c] {
            return Err(lines.err(ln, format!("duplicate entry ({r}, {c})")));
        }
        explicit[r * dim + c] = true;
        m[(r, c)] = C64::new(re, im);
        triplets.push((r, c));
    }
    for (r, c) in triplets {
        if !explicit[c * dim + r] {
            m[(c, r)] = m[(r, c)].conj();
        }
    }

    let (ln, toks) = lines.next("`b <dim>`")?;
    if toks.first() != Some(&"b") {
        return Err(lines.err(ln, "expected `b <dim>`"));
    }
    let b_dim: usize = field(&lines, ln, "b dim", toks.get(1))?;
    if b_dim != dim {
        return Err(lines.err(ln, format!("b has dimension {b_dim}, expected {dim}")));
    }
    let mut amps = Vec::with_capacity(dim);
    for _ in 0..dim {
        let (ln, toks) = lines.next("b amplitude")?;
        if toks.len() != 2 {
            return Err(lines.err(ln, "expected `re im`"));
        }
        let re: f64 = field(&lines, ln, "re", toks.first())?;
        let im: f64 = field(&lines, ln, "im", toks.get(1))?;
        amps.push(C64::new(re, im));
    }
    if let Some((ln, _)) = lines.inner.next() {
        return Err(lines.err(ln, "trailing content after b"));
    }

    let a = HermitianMatrix::new(m)?;
    let b = StateVector::new(amps)?;
    let inst = QlspInstance::new(a, b, d, meta)?;
    if let Some((ln, stored)) = kappa {
        if (stored - inst.kappa()).abs() > KAPPA_CONSISTENCY * inst.kappa() {
            return Err(lines.err(
                ln,
                format!(
                    "stored kappa {stored} disagrees with computed {}",
                    inst.kappa()
                ),
            ));
        }
    }
    Ok(inst)
}
