//! TSPLIB and QAPLIB readers, writers, and a seeded generator of small
//! random instances.
//!
//! Only the TSPLIB variants needed for symmetric TSP instances are accepted:
//! `EDGE_WEIGHT_TYPE: EXPLICIT` with one of the `FULL_MATRIX`, `UPPER_ROW`,
//! `LOWER_DIAG_ROW` or `UPPER_DIAG_ROW` layouts, and `EDGE_WEIGHT_TYPE:
//! EUC_2D`. Anything else is rejected with a parse error rather than being
//! guessed at.

use std::fmt::{self, Write as _};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major square matrix of 64-bit integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::arg(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i64]> {
        self.data.chunks(self.n.max(1)).take(self.n)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0)
    }

    pub fn min(&self) -> Option<i64> {
        self.data.iter().copied().min()
    }

    pub fn max(&self) -> Option<i64> {
        self.data.iter().copied().max()
    }
}

/// Where a TSP distance matrix came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeWeightSource {
    ExplicitFull,
    ExplicitUpperRow,
    ExplicitLowerDiagRow,
    ExplicitUpperDiagRow,
    Euc2d,
}

impl EdgeWeightSource {
    fn from_format(format: &str) -> Result<Self> {
        match format {
            "FULL_MATRIX" => Ok(Self::ExplicitFull),
            "UPPER_ROW" => Ok(Self::ExplicitUpperRow),
            "LOWER_DIAG_ROW" => Ok(Self::ExplicitLowerDiagRow),
            "UPPER_DIAG_ROW" => Ok(Self::ExplicitUpperDiagRow),
            other => Err(Error::parse(format!(
                "unsupported EDGE_WEIGHT_FORMAT `{other}`"
            ))),
        }
    }

    /// The TSPLIB keyword for an explicit layout.
    pub fn tsplib_format(self) -> Option<&'static str> {
        match self {
            Self::ExplicitFull => Some("FULL_MATRIX"),
            Self::ExplicitUpperRow => Some("UPPER_ROW"),
            Self::ExplicitLowerDiagRow => Some("LOWER_DIAG_ROW"),
            Self::ExplicitUpperDiagRow => Some("UPPER_DIAG_ROW"),
            Self::Euc2d => None,
        }
    }
}

/// A symmetric travelling salesman instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TspInstance {
    pub name: String,
    pub dist: Matrix,
    pub source: EdgeWeightSource,
}

impl TspInstance {
    pub fn n(&self) -> usize {
        self.dist.n()
    }

    /// Checks n >= 3, a symmetric matrix, a zero diagonal and non-negative
    /// entries.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n < 3 {
            return Err(Error::arg(format!("TSP needs at least 3 cities, got {n}")));
        }
        if !self.dist.has_zero_diagonal() {
            return Err(Error::arg("TSP distance matrix has a nonzero diagonal"));
        }
        if self.dist.min().unwrap_or(0) < 0 {
            return Err(Error::arg("TSP distance matrix has negative entries"));
        }
        if !self.dist.is_symmetric() {
            return Err(Error::arg("TSP distance matrix is not symmetric"));
        }
        Ok(())
    }
}

/// A quadratic assignment instance: `flow` between facilities and `dist`
/// between locations, kept in file order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QapInstance {
    pub name: String,
    pub flow: Matrix,
    pub dist: Matrix,
}

impl QapInstance {
    pub fn n(&self) -> usize {
        self.flow.n()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.flow.n();
        if n < 2 {
            return Err(Error::arg(format!("QAP needs n >= 2, got {n}")));
        }
        if self.dist.n() != n {
            return Err(Error::arg(format!(
                "flow is {n}x{n} but distance is {0}x{0}",
                self.dist.n()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tsp,
    Qap,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Tsp => "tsp",
            ProblemKind::Qap => "qap",
        })
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemKind::Tsp),
            "qap" => Ok(ProblemKind::Qap),
            other => Err(Error::arg(format!("unknown problem kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemInstance {
    Tsp(TspInstance),
    Qap(QapInstance),
}

impl ProblemInstance {
    pub fn name(&self) -> &str {
        match self {
            ProblemInstance::Tsp(t) => &t.name,
            ProblemInstance::Qap(q) => &q.name,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ProblemInstance::Tsp(t) => t.n(),
            ProblemInstance::Qap(q) => q.n(),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::Tsp(_) => ProblemKind::Tsp,
            ProblemInstance::Qap(_) => ProblemKind::Qap,
        }
    }

    /// Number of binary variables of the one-hot encoding.
    pub fn qubo_size(&self) -> usize {
        match self {
            ProblemInstance::Tsp(t) => (t.n() - 1) * (t.n() - 1),
            ProblemInstance::Qap(q) => q.n() * q.n(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProblemInstance::Tsp(t) => t.validate(),
            ProblemInstance::Qap(q) => q.validate(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    EdgeWeights,
    NodeCoords,
    Display,
}

/// Parses a TSPLIB `.tsp` file.
pub fn parse_tsplib(text: &str) -> Result<TspInstance> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut weight_format: Option<String> = None;
    let mut weights: Vec<i64> = Vec::new();
    let mut coords: Vec<f64> = Vec::new();
    let mut section = Section::None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let starts_numeric = line
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.');
        if starts_numeric {
            match section {
                Section::EdgeWeights => {
                    for tok in line.split_whitespace() {
                        weights.push(tok.parse().map_err(|_| {
                            Error::parse(format!(
                                "line {}: edge weight `{tok}` is not an integer",
                                lineno + 1
                            ))
                        })?);
                    }
                }
                Section::NodeCoords => {
                    for tok in line.split_whitespace() {
                        coords.push(tok.parse().map_err(|_| {
                            Error::parse(format!(
                                "line {}: coordinate `{tok}` is not a number",
                                lineno + 1
                            ))
                        })?);
                    }
                }
                Section::Display => {}
                Section::None => {
                    return Err(Error::parse(format!(
                        "line {}: numeric data outside of a data section",
                        lineno + 1
                    )))
                }
            }
            continue;
        }

        if let Some((key, value)) = line.split_once(':') {
            section = Section::None;
            let key = key.trim();
            let value = value.trim();
            match key {
                "NAME" => name = value.to_string(),
                "TYPE" => {
                    if value != "TSP" {
                        return Err(Error::parse(format!("unsupported TYPE `{value}`")));
                    }
                }
                "DIMENSION" => {
                    dimension =
                        Some(value.parse().map_err(|_| {
                            Error::parse(format!("DIMENSION `{value}` is not a count"))
                        })?)
                }
                "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_string()),
                "EDGE_WEIGHT_FORMAT" => weight_format = Some(value.to_string()),
                _ => {}
            }
            continue;
        }

        let mut toks = line.split_whitespace();
        let keyword = toks.next().unwrap_or_default();
        section = match keyword {
            "EDGE_WEIGHT_SECTION" => Section::EdgeWeights,
            "NODE_COORD_SECTION" => Section::NodeCoords,
            "DISPLAY_DATA_SECTION" => Section::Display,
            other => {
                return Err(Error::parse(format!(
                    "line {}: unsupported section `{other}`",
                    lineno + 1
                )))
            }
        };
        // Data may start on the keyword line itself.
        for tok in toks {
            match section {
                Section::EdgeWeights => weights.push(
                    tok.parse()
                        .map_err(|_| Error::parse(format!("bad edge weight `{tok}`")))?,
                ),
                Section::NodeCoords => coords.push(
                    tok.parse()
                        .map_err(|_| Error::parse(format!("bad coordinate `{tok}`")))?,
                ),
                _ => {}
            }
        }
    }

    let n = dimension.ok_or_else(|| Error::parse("missing DIMENSION"))?;
    let weight_type = weight_type.ok_or_else(|| Error::parse("missing EDGE_WEIGHT_TYPE"))?;
    let (dist, source) = match weight_type.as_str() {
        "EXPLICIT" => {
            let format = weight_format.ok_or_else(|| Error::parse("missing EDGE_WEIGHT_FORMAT"))?;
            let source = EdgeWeightSource::from_format(&format)?;
            (explicit_matrix(n, source, &weights)?, source)
        }
        "EUC_2D" => (euc2d_matrix(n, &coords)?, EdgeWeightSource::Euc2d),
        other => {
            return Err(Error::parse(format!(
                "unsupported EDGE_WEIGHT_TYPE `{other}`"
            )))
        }
    };
    let inst = TspInstance { name, dist, source };
    inst.validate().map_err(|e| Error::parse(e.to_string()))?;
    Ok(inst)
}

fn explicit_matrix(n: usize, source: EdgeWeightSource, weights: &[i64]) -> Result<Matrix> {
    let expected = match source {
        EdgeWeightSource::ExplicitFull => n * n,
        EdgeWeightSource::ExplicitUpperRow => n * (n.saturating_sub(1)) / 2,
        EdgeWeightSource::ExplicitLowerDiagRow | EdgeWeightSource::ExplicitUpperDiagRow => {
            n * (n + 1) / 2
        }
        EdgeWeightSource::Euc2d => unreachable!("explicit layouts only"),
    };
    if weights.len() != expected {
        return Err(Error::parse(format!(
            "DIMENSION {n} with {} layout needs {expected} edge weights, found {}",
            source.tsplib_format().unwrap_or("?"),
            weights.len()
        )));
    }
    let mut m = Matrix::zeros(n);
    let mut it = weights.iter().copied();
    let mut put = |i: usize, j: usize, v: i64| {
        m.set(i, j, v);
        m.set(j, i, v);
    };
    match source {
        EdgeWeightSource::ExplicitFull => {
            return Matrix::from_rows(&weights.chunks(n).map(<[i64]>::to_vec).collect::<Vec<_>>())
        }
        EdgeWeightSource::ExplicitUpperRow => {
            for i in 0..n {
                for j in i + 1..n {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        EdgeWeightSource::ExplicitLowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        EdgeWeightSource::ExplicitUpperDiagRow => {
            for i in 0..n {
                for j in i..n {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        EdgeWeightSource::Euc2d => unreachable!(),
    }
    Ok(m)
}

/// TSPLIB `nint` of the Euclidean distance.
pub fn euc2d_distance(a: (f64, f64), b: (f64, f64)) -> i64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    ((dx * dx + dy * dy).sqrt() + 0.5).floor() as i64
}

fn euc2d_matrix(n: usize, coords: &[f64]) -> Result<Matrix> {
    if coords.len() != 3 * n {
        return Err(Error::parse(format!(
            "DIMENSION {n} needs {n} coordinate lines of `id x y`, found {} numbers",
            coords.len()
        )));
    }
    let pts: Vec<(f64, f64)> = coords.chunks(3).map(|c| (c[1], c[2])).collect();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let d = euc2d_distance(pts[i], pts[j]);
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    Ok(m)
}

/// Writes a TSP instance as an EXPLICIT TSPLIB file in the given layout.
pub fn write_tsplib(inst: &TspInstance, layout: EdgeWeightSource) -> Result<String> {
    let format = layout
        .tsplib_format()
        .ok_or_else(|| Error::arg("EUC_2D cannot be written from a distance matrix"))?;
    let n = inst.n();
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {}", inst.name);
    let _ = writeln!(out, "TYPE: TSP");
    let _ = writeln!(out, "DIMENSION: {n}");
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EXPLICIT");
    let _ = writeln!(out, "EDGE_WEIGHT_FORMAT: {format}");
    let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
    for i in 0..n {
        let cols: Vec<usize> = match layout {
            EdgeWeightSource::ExplicitFull => (0..n).collect(),
            EdgeWeightSource::ExplicitUpperRow => (i + 1..n).collect(),
            EdgeWeightSource::ExplicitLowerDiagRow => (0..=i).collect(),
            EdgeWeightSource::ExplicitUpperDiagRow => (i..n).collect(),
            EdgeWeightSource::Euc2d => unreachable!(),
        };
        if cols.is_empty() {
            continue;
        }
        let row: Vec<String> = cols
            .iter()
            .map(|&j| inst.dist.get(i, j).to_string())
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out.push_str("EOF\n");
    Ok(out)
}

/// Parses a QAPLIB `.dat` file: `n`, then the first and second `n x n`
/// matrices, whitespace separated. The first matrix is stored as `flow`.
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let first = toks
        .first()
        .ok_or_else(|| Error::parse("empty QAPLIB file"))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::parse(format!("instance size `{first}` is not a count")))?;
    let expected = n
        .checked_mul(n)
        .and_then(|nn| nn.checked_mul(2))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::parse("instance size overflows"))?;
    if toks.len() != expected {
        return Err(Error::parse(format!(
            "QAPLIB size {n} needs {expected} tokens, found {}",
            toks.len()
        )));
    }
    let mut vals = Vec::with_capacity(expected - 1);
    for tok in &toks[1..] {
        vals.push(
            tok.parse::<i64>()
                .map_err(|_| Error::parse(format!("QAPLIB entry `{tok}` is not an integer")))?,
        );
    }
    let (a, b) = vals.split_at(n * n);
    let inst = QapInstance {
        name: String::new(),
        flow: Matrix {
            n,
            data: a.to_vec(),
        },
        dist: Matrix {
            n,
            data: b.to_vec(),
        },
    };
    inst.validate().map_err(|e| Error::parse(e.to_string()))?;
    Ok(inst)
}

pub fn write_qaplib(inst: &QapInstance) -> String {
    let mut out = format!("{}\n\n", inst.n());
    for m in [&inst.flow, &inst.dist] {
        for row in m.rows() {
            let row: Vec<String> = row.iter().map(i64::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Reads an instance file. QAPLIB files carry no name, so the file stem is
/// used; TSPLIB files fall back to it when `NAME` is absent.
pub fn load_instance(kind: ProblemKind, path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(match kind {
        ProblemKind::Tsp => {
            let mut t = parse_tsplib(&text)?;
            if t.name.is_empty() {
                t.name = stem;
            }
            ProblemInstance::Tsp(t)
        }
        ProblemKind::Qap => {
            let mut q = parse_qaplib(&text)?;
            q.name = stem;
            ProblemInstance::Qap(q)
        }
    })
}

/// Seeded random instance for oracle tests. TSP distances are symmetric in
/// `[1, max_value]`; QAP flows and distances are in `[0, max_value]` with
/// zero diagonals.
pub fn random_instance(
    kind: ProblemKind,
    n: usize,
    seed: u64,
    max_value: i64,
) -> Result<ProblemInstance> {
    if !(2..=10).contains(&n) {
        return Err(Error::arg(format!(
            "random instance size must be in 2..=10, got {n}"
        )));
    }
    if max_value < 1 {
        return Err(Error::arg("max_value must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = format!("rand-{kind}-{n}-{seed}");
    Ok(match kind {
        ProblemKind::Tsp => {
            if n < 3 {
                return Err(Error::arg("random TSP instance needs n >= 3"));
            }
            let mut dist = Matrix::zeros(n);
            for i in 0..n {
                for j in i + 1..n {
                    let d = rng.gen_range(1..=max_value);
                    dist.set(i, j, d);
                    dist.set(j, i, d);
                }
            }
            ProblemInstance::Tsp(TspInstance {
                name,
                dist,
                source: EdgeWeightSource::ExplicitFull,
            })
        }
        ProblemKind::Qap => {
            let mut gen = || {
                let mut m = Matrix::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            m.set(i, j, rng.gen_range(0..=max_value));
                        }
                    }
                }
                m
            };
            let flow = gen();
            let dist = gen();
            ProblemInstance::Qap(QapInstance { name, flow, dist })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY_FULL: &str = "NAME: tiny3\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EXPLICIT\n\
        EDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2\n1 0 3\n2 3 0\nEOF\n";

    #[test]
    fn full_matrix_echoes_input() {
        let t = parse_tsplib(TINY_FULL).unwrap();
        assert_eq!(t.n(), 3);
        assert_eq!(t.dist.get(0, 1), 1);
        assert_eq!(t.dist.get(1, 2), 3);
        assert_eq!(t.source, EdgeWeightSource::ExplicitFull);
        assert_eq!(t.name, "tiny3");
    }

    #[test]
    fn all_explicit_layouts_agree() {
        let t = parse_tsplib(TINY_FULL).unwrap();
        for layout in [
            EdgeWeightSource::ExplicitFull,
            EdgeWeightSource::ExplicitUpperRow,
            EdgeWeightSource::ExplicitLowerDiagRow,
            EdgeWeightSource::ExplicitUpperDiagRow,
        ] {
            let text = write_tsplib(&t, layout).unwrap();
            let back = parse_tsplib(&text).unwrap();
            assert_eq!(back.dist, t.dist, "{layout:?}");
            assert_eq!(back.source, layout);
        }
    }

    #[test]
    fn header_with_spaced_colon_and_display_section() {
        let text = "NAME : sq\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EXPLICIT\n\
            EDGE_WEIGHT_FORMAT : UPPER_ROW\nDISPLAY_DATA_TYPE : TWOD_DISPLAY\n\
            EDGE_WEIGHT_SECTION\n  5 7\n  9\nDISPLAY_DATA_SECTION\n 1 0.0 0.0\n 2 1.0 0.0\n 3 1.0 1.0\nEOF";
        let t = parse_tsplib(text).unwrap();
        assert_eq!(t.dist.get(0, 1), 5);
        assert_eq!(t.dist.get(2, 0), 7);
        assert_eq!(t.dist.get(1, 2), 9);
    }

    #[test]
    fn euc2d_rounds_to_nearest() {
        let text = "NAME: e\nTYPE: TSP\nDIMENSION: 3\nEDGE_WEIGHT_TYPE: EUC_2D\n\
            NODE_COORD_SECTION\n1 0 0\n2 3 4\n3 1.0 1.0\nEOF\n";
        let t = parse_tsplib(text).unwrap();
        assert_eq!(t.dist.get(0, 1), 5);
        // sqrt(2) = 1.414 -> 1
        assert_eq!(t.dist.get(0, 2), 1);
        // sqrt(4 + 9) = 3.606 -> 4
        assert_eq!(t.dist.get(1, 2), 4);
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let geo = TINY_FULL.replace("EXPLICIT", "GEO");
        assert!(matches!(parse_tsplib(&geo), Err(Error::Parse(_))));
        let atsp = TINY_FULL.replace("TYPE: TSP", "TYPE: ATSP");
        assert!(matches!(parse_tsplib(&atsp), Err(Error::Parse(_))));
        let lower_row = TINY_FULL.replace("FULL_MATRIX", "LOWER_ROW");
        assert!(matches!(parse_tsplib(&lower_row), Err(Error::Parse(_))));
        let short = TINY_FULL.replace("2 3 0\n", "2 3\n");
        let err = parse_tsplib(&short).unwrap_err().to_string();
        assert!(err.contains("needs 9 edge weights"), "{err}");
        let asym = TINY_FULL.replace("1 0 3", "4 0 3");
        assert!(parse_tsplib(&asym).is_err());
    }

    #[test]
    fn qaplib_echo() {
        let q = parse_qaplib("2 0 3 3 0 0 5 5 0").unwrap();
        assert_eq!(q.n(), 2);
        assert_eq!(
            q.flow,
            Matrix::from_rows(&[vec![0, 3], vec![3, 0]]).unwrap()
        );
        assert_eq!(
            q.dist,
            Matrix::from_rows(&[vec![0, 5], vec![5, 0]]).unwrap()
        );
        assert_eq!(parse_qaplib(&write_qaplib(&q)).unwrap(), q);
    }

    #[test]
    fn qaplib_errors() {
        assert!(parse_qaplib("2 0 3 3 0 0 5 5").is_err());
        assert!(parse_qaplib("2 0 3 3 0 0 5 5 0 1").is_err());
        assert!(parse_qaplib("2 0 3 x 0 0 5 5 0").is_err());
        assert!(parse_qaplib("").is_err());
    }

    #[test]
    fn random_instances() {
        let a = random_instance(ProblemKind::Tsp, 4, 1, 9).unwrap();
        let b = random_instance(ProblemKind::Tsp, 4, 1, 9).unwrap();
        assert_eq!(a, b);
        let ProblemInstance::Qap(q) = random_instance(ProblemKind::Qap, 2, 7, 9).unwrap() else {
            panic!("expected QAP");
        };
        assert!(q.flow.has_zero_diagonal() && q.dist.has_zero_diagonal());
        let t = random_instance(ProblemKind::Tsp, 5, 3, 9).unwrap();
        t.validate().unwrap();
        if let ProblemInstance::Tsp(t) = &t {
            assert!(t.dist.min().unwrap() >= 0 && t.dist.max().unwrap() <= 9);
        }
        assert!(random_instance(ProblemKind::Qap, 11, 0, 9).is_err());
        assert!(random_instance(ProblemKind::Qap, 1, 0, 9).is_err());
        assert!(random_instance(ProblemKind::Qap, 3, 0, 0).is_err());
    }
}
