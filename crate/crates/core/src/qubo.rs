//! QUBO models for permutation problems under the two-way one-hot encoding.
//!
//! A [`QuboModel`] stores the coefficient matrix as a packed upper triangle
//! (row-major, `row <= col`) together with a constant offset, so that the
//! energy of a bit vector `x` is `x^T Q x + constant`. All construction is
//! done in checked 64-bit integer arithmetic.
//!
//! Variables are laid out position-major: the bit saying "object `i` sits at
//! position `k`" has index `k * rows + i`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{ProblemInstance, QapInstance, TspInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    /// QAP: `n` facilities by `n` locations.
    QapFull,
    /// TSP with city 1 pinned to tour position 1: row `r` is city `r + 2`,
    /// column `c` is tour position `c + 2` (both 1-based).
    TspFixedFirst,
}

/// Shape of the one-hot grid behind a QUBO.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableLayout {
    pub rows: usize,
    pub cols: usize,
    pub kind: LayoutKind,
}

impl VariableLayout {
    pub fn qap(n: usize) -> Self {
        VariableLayout {
            rows: n,
            cols: n,
            kind: LayoutKind::QapFull,
        }
    }

    /// Layout for an `n`-city tour with the first city fixed.
    pub fn tsp(n: usize) -> Self {
        let free = n.saturating_sub(1);
        VariableLayout {
            rows: free,
            cols: free,
            kind: LayoutKind::TspFixedFirst,
        }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.rows * self.cols
    }

    /// Flat index of "object `row` at position `col`".
    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols);
        col * self.rows + row
    }

    /// Inverse of [`VariableLayout::index`].
    #[inline]
    pub fn cell(&self, var: usize) -> (usize, usize) {
        (var % self.rows, var / self.rows)
    }

    /// Length of the permutation a feasible bit vector decodes to.
    pub fn problem_size(&self) -> usize {
        match self.kind {
            LayoutKind::QapFull => self.rows,
            LayoutKind::TspFixedFirst => self.rows + 1,
        }
    }
}

#[inline]
fn row_offset(m: usize, r: usize) -> usize {
    r * (2 * m - r + 1) / 2
}

/// Upper-triangular QUBO with a constant energy offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuboModel {
    layout: VariableLayout,
    constant: i64,
    upper: Vec<i64>,
}

impl QuboModel {
    pub fn zeros(layout: VariableLayout) -> Self {
        let m = layout.m();
        QuboModel {
            layout,
            constant: 0,
            upper: vec![0; m * (m + 1) / 2],
        }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.layout.m()
    }

    pub fn layout(&self) -> &VariableLayout {
        &self.layout
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    /// Stored coefficient at `(r, c)`; zero below the diagonal.
    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> i64 {
        if r > c {
            0
        } else {
            self.upper[row_offset(self.m(), r) + (c - r)]
        }
    }

    #[inline]
    pub fn diag(&self, i: usize) -> i64 {
        self.upper[row_offset(self.m(), i)]
    }

    /// Coefficient of `x_i x_j` for `i != j`, whichever triangle it lives in.
    #[inline]
    pub fn couple(&self, i: usize, j: usize) -> i64 {
        self.entry(i.min(j), i.max(j))
    }

    /// Stored entries `(r, c)` for `c >= r`, starting at the diagonal.
    #[inline]
    pub fn upper_row(&self, r: usize) -> &[i64] {
        let m = self.m();
        let start = row_offset(m, r);
        &self.upper[start..start + (m - r)]
    }

    /// Adds `v` to the coefficient of `x_a x_b`, folding into the upper
    /// triangle. `a == b` targets the diagonal.
    pub fn add_term(&mut self, a: usize, b: usize, v: i64) -> Result<()> {
        let (r, c) = (a.min(b), a.max(b));
        let m = self.m();
        if c >= m {
            return Err(Error::arg(format!(
                "variable index {c} out of range for m = {m}"
            )));
        }
        let slot = &mut self.upper[row_offset(m, r) + (c - r)];
        *slot = slot
            .checked_add(v)
            .ok_or(Error::Overflow("accumulating a QUBO coefficient"))?;
        Ok(())
    }

    pub fn add_constant(&mut self, v: i64) -> Result<()> {
        self.constant = self
            .constant
            .checked_add(v)
            .ok_or(Error::Overflow("accumulating the QUBO constant"))?;
        Ok(())
    }

    /// Nonzero stored entries as `(row, col, value)` with `row <= col`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.m()).flat_map(move |r| {
            self.upper_row(r)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(move |(off, &v)| (r, r + off, v))
        })
    }

    /// All stored coefficients, diagonal included.
    pub fn coefficients(&self) -> &[i64] {
        &self.upper
    }

    /// Entrywise `self * s`, constant included.
    pub fn scaled(&self, s: i64) -> Result<Self> {
        let upper = self
            .upper
            .iter()
            .map(|&v| v.checked_mul(s).ok_or(Error::Overflow("scaling a QUBO")))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuboModel {
            layout: self.layout,
            constant: self
                .constant
                .checked_mul(s)
                .ok_or(Error::Overflow("scaling a QUBO"))?,
            upper,
        })
    }

    /// Plain-text export: `m constant` then one `row col value` line per
    /// nonzero stored entry (0-based, `row <= col`).
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m(), self.constant);
        for (r, c, v) in self.entries() {
            let _ = writeln!(out, "{r} {c} {v}");
        }
        out
    }

    /// Reads [`QuboModel::to_text`] output. The text carries no layout, so the
    /// caller supplies it; its `m` must match the header.
    pub fn from_text(text: &str, layout: VariableLayout) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::parse("empty QUBO file"))?;
        let mut it = header.split_whitespace();
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse("QUBO header must be `m constant`"))?;
        let constant: i64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse("QUBO header must be `m constant`"))?;
        if m != layout.m() {
            return Err(Error::parse(format!(
                "QUBO header says m = {m} but layout has {} variables",
                layout.m()
            )));
        }
        let mut model = QuboModel::zeros(layout);
        model.constant = constant;
        for (k, line) in lines.enumerate() {
            let t: Vec<&str> = line.split_whitespace().collect();
            let parsed = match t.as_slice() {
                [r, c, v] => r
                    .parse::<usize>()
                    .ok()
                    .zip(c.parse::<usize>().ok())
                    .zip(v.parse::<i64>().ok()),
                _ => None,
            };
            let ((r, c), v) = parsed.ok_or_else(|| {
                Error::parse(format!("QUBO entry line {} is not `row col value`", k + 2))
            })?;
            if r > c || c >= m {
                return Err(Error::parse(format!(
                    "QUBO entry ({r}, {c}) is outside the upper triangle of size {m}"
                )));
            }
            model.add_term(r, c, v)?;
        }
        Ok(model)
    }

    pub fn to_envelope(&self) -> QuboEnvelope {
        QuboEnvelope {
            layout: self.layout,
            m: self.m(),
            constant: self.constant,
            entries: self.entries().collect(),
        }
    }

    pub fn from_envelope(env: &QuboEnvelope) -> Result<Self> {
        if env.m != env.layout.m() {
            return Err(Error::parse("envelope m does not match its layout"));
        }
        let mut model = QuboModel::zeros(env.layout);
        model.constant = env.constant;
        for &(r, c, v) in &env.entries {
            if r > c || c >= env.m {
                return Err(Error::parse(format!(
                    "entry ({r}, {c}) outside upper triangle"
                )));
            }
            model.add_term(r, c, v)?;
        }
        Ok(model)
    }
}

/// JSON form of a [`QuboModel`] carrying its layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboEnvelope {
    pub layout: VariableLayout,
    pub m: usize,
    pub constant: i64,
    pub entries: Vec<(usize, usize, i64)>,
}

/// QAP objective `sum h_ij d_kl x_ik x_jl` over all ordered quadruples.
pub fn build_qap_cost(inst: &QapInstance) -> Result<QuboModel> {
    inst.validate()?;
    let n = inst.n();
    let layout = VariableLayout::qap(n);
    let mut q = QuboModel::zeros(layout);
    for i in 0..n {
        for j in 0..n {
            let h = inst.flow.get(i, j);
            if h == 0 {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    let w = h
                        .checked_mul(inst.dist.get(k, l))
                        .ok_or(Error::Overflow("multiplying flow by distance"))?;
                    if w != 0 {
                        q.add_term(layout.index(i, k), layout.index(j, l), w)?;
                    }
                }
            }
        }
    }
    Ok(q)
}

/// TSP tour length with city 1 fixed at tour position 1.
///
/// Consecutive free positions contribute `d_li x_lk x_i,k+1`. The legs that
/// touch the fixed city become linear terms: city `i` at the first free
/// position pays `d_1i`, and at the last free position pays `d_i1`.
pub fn build_tsp_cost(inst: &TspInstance) -> Result<QuboModel> {
    if !inst.dist.is_symmetric() {
        return Err(Error::Formulation(
            "first-city fixing needs a symmetric distance matrix".into(),
        ));
    }
    let n = inst.n();
    if n < 3 {
        return Err(Error::Formulation(format!(
            "TSP needs at least 3 cities, got {n}"
        )));
    }
    let layout = VariableLayout::tsp(n);
    let free = n - 1;
    let mut q = QuboModel::zeros(layout);
    for pos in 0..free - 1 {
        for a in 0..free {
            for b in 0..free {
                if a == b {
                    continue;
                }
                let d = inst.dist.get(a + 1, b + 1);
                if d != 0 {
                    q.add_term(layout.index(a, pos), layout.index(b, pos + 1), d)?;
                }
            }
        }
    }
    for c in 0..free {
        let first = layout.index(c, 0);
        let last = layout.index(c, free - 1);
        q.add_term(first, first, inst.dist.get(0, c + 1))?;
        q.add_term(last, last, inst.dist.get(c + 1, 0))?;
    }
    Ok(q)
}

/// Cost QUBO for either problem family.
pub fn build_cost(inst: &ProblemInstance) -> Result<QuboModel> {
    match inst {
        ProblemInstance::Tsp(t) => build_tsp_cost(t),
        ProblemInstance::Qap(q) => build_qap_cost(q),
    }
}

/// Cost and constraint QUBOs for an instance.
pub fn build_pair(inst: &ProblemInstance) -> Result<(QuboModel, QuboModel)> {
    let c = build_cost(inst)?;
    let g = build_constraint(*c.layout())?;
    Ok((c, g))
}

/// Expansion of `sum_rows (1 - sum x)^2 + sum_cols (1 - sum x)^2`: every
/// diagonal entry is -2, every same-row or same-column pair couples with +2,
/// and the constant is `rows + cols`.
pub fn build_constraint(layout: VariableLayout) -> Result<QuboModel> {
    let mut g = QuboModel::zeros(layout);
    for var in 0..layout.m() {
        g.add_term(var, var, -2)?;
    }
    for r in 0..layout.rows {
        for c1 in 0..layout.cols {
            for c2 in c1 + 1..layout.cols {
                g.add_term(layout.index(r, c1), layout.index(r, c2), 2)?;
            }
        }
    }
    for c in 0..layout.cols {
        for r1 in 0..layout.rows {
            for r2 in r1 + 1..layout.rows {
                g.add_term(layout.index(r1, c), layout.index(r2, c), 2)?;
            }
        }
    }
    g.add_constant((layout.rows + layout.cols) as i64)?;
    Ok(g)
}

/// `cost + alpha * constraint`.
pub fn combine(cost: &QuboModel, constraint: &QuboModel, alpha: i64) -> Result<QuboModel> {
    if cost.layout != constraint.layout {
        return Err(Error::arg(format!(
            "cannot combine QUBOs with layouts {:?} and {:?}",
            cost.layout, constraint.layout
        )));
    }
    if alpha < 1 {
        return Err(Error::arg(format!(
            "penalty weight must be >= 1, got {alpha}"
        )));
    }
    let upper = cost
        .upper
        .iter()
        .zip(&constraint.upper)
        .map(|(&c, &g)| {
            g.checked_mul(alpha)
                .and_then(|ag| c.checked_add(ag))
                .ok_or(Error::Overflow("combining cost and constraint"))
        })
        .collect::<Result<Vec<_>>>()?;
    let constant = constraint
        .constant
        .checked_mul(alpha)
        .and_then(|k| k.checked_add(cost.constant))
        .ok_or(Error::Overflow("combining constants"))?;
    Ok(QuboModel {
        layout: cost.layout,
        constant,
        upper,
    })
}

/// `x^T Q x + constant`, exact.
pub fn evaluate(model: &QuboModel, x: &[bool]) -> Result<i64> {
    let m = model.m();
    if x.len() != m {
        return Err(Error::arg(format!(
            "bit vector has length {}, model has m = {m}",
            x.len()
        )));
    }
    let mut acc = model.constant as i128;
    for r in (0..m).filter(|&r| x[r]) {
        let row = model.upper_row(r);
        let s: i128 = row
            .iter()
            .zip(&x[r..])
            .filter(|(_, &b)| b)
            .map(|(&v, _)| v as i128)
            .sum();
        acc += s;
    }
    i64::try_from(acc).map_err(|_| Error::Overflow("evaluating energy"))
}

/// Anything that can report a diagonal entry and add a full coupling column
/// into a field vector.
pub trait Couplings {
    fn size(&self) -> usize;
    fn diag(&self, i: usize) -> i64;
    /// `h[i] += sign * couple(i, j)` for every `i != j`.
    fn add_column(&self, j: usize, sign: i64, h: &mut [i64]);
}

impl Couplings for QuboModel {
    fn size(&self) -> usize {
        self.m()
    }

    fn diag(&self, i: usize) -> i64 {
        QuboModel::diag(self, i)
    }

    fn add_column(&self, j: usize, sign: i64, h: &mut [i64]) {
        let m = self.m();
        for (i, hi) in h.iter_mut().enumerate().take(j) {
            *hi += sign * self.upper[row_offset(m, i) + (j - i)];
        }
        for (off, &v) in self.upper_row(j).iter().enumerate().skip(1) {
            h[j + off] += sign * v;
        }
    }
}

/// Full symmetric coupling matrix (zero diagonal) plus the diagonal, for
/// contiguous column access in the annealer's inner loop.
#[derive(Clone, Debug)]
pub struct DenseCouplings {
    m: usize,
    diag: Vec<i64>,
    full: Vec<i64>,
}

impl DenseCouplings {
    pub fn new(model: &QuboModel) -> Result<Self> {
        check_field_range(model)?;
        let m = model.m();
        let mut full = vec![0i64; m * m];
        for r in 0..m {
            for (off, &v) in model.upper_row(r).iter().enumerate().skip(1) {
                let c = r + off;
                full[r * m + c] = v;
                full[c * m + r] = v;
            }
        }
        Ok(DenseCouplings {
            m,
            diag: (0..m).map(|i| model.diag(i)).collect(),
            full,
        })
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[i64] {
        &self.full[j * self.m..(j + 1) * self.m]
    }
}

impl Couplings for DenseCouplings {
    fn size(&self) -> usize {
        self.m
    }

    fn diag(&self, i: usize) -> i64 {
        self.diag[i]
    }

    #[inline]
    fn add_column(&self, j: usize, sign: i64, h: &mut [i64]) {
        let col = self.column(j);
        if sign > 0 {
            h.iter_mut().zip(col).for_each(|(hi, &c)| *hi += c);
        } else {
            h.iter_mut().zip(col).for_each(|(hi, &c)| *hi -= c);
        }
    }
}

/// Every effective field is bounded by its variable's absolute row sum; if
/// those sums fit, incremental updates cannot overflow.
fn check_field_range(model: &QuboModel) -> Result<()> {
    let m = model.m();
    let mut abs = vec![0i64; m];
    for r in 0..m {
        for (off, &v) in model.upper_row(r).iter().enumerate() {
            let a = v
                .checked_abs()
                .ok_or(Error::Overflow("bounding effective fields"))?;
            abs[r] = abs[r]
                .checked_add(a)
                .ok_or(Error::Overflow("bounding effective fields"))?;
            if off > 0 {
                abs[r + off] = abs[r + off]
                    .checked_add(a)
                    .ok_or(Error::Overflow("bounding effective fields"))?;
            }
        }
    }
    Ok(())
}

/// Current bit vector and per-variable effective fields
/// `h[j] = Q_jj + sum_{i != j} couple(i, j) x_i`, so that flipping bit `j`
/// changes the energy by `(1 - 2 x_j) h_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveFields {
    x: Vec<bool>,
    h: Vec<i64>,
}

impl EffectiveFields {
    pub fn new<C: Couplings>(couplings: &C, x: &[bool]) -> Result<Self> {
        let m = couplings.size();
        if x.len() != m {
            return Err(Error::arg(format!(
                "bit vector has length {}, model has m = {m}",
                x.len()
            )));
        }
        let mut h: Vec<i64> = (0..m).map(|i| couplings.diag(i)).collect();
        for j in (0..m).filter(|&j| x[j]) {
            couplings.add_column(j, 1, &mut h);
        }
        Ok(EffectiveFields { x: x.to_vec(), h })
    }

    pub fn x(&self) -> &[bool] {
        &self.x
    }

    pub fn fields(&self) -> &[i64] {
        &self.h
    }

    /// Energy change of flipping bit `j`.
    #[inline]
    pub fn delta(&self, j: usize) -> i64 {
        if self.x[j] {
            -self.h[j]
        } else {
            self.h[j]
        }
    }

    /// Flips bit `j` without a range check and returns the energy change.
    #[inline]
    pub fn flip_unchecked<C: Couplings>(&mut self, couplings: &C, j: usize) -> i64 {
        let delta = self.delta(j);
        let sign = if self.x[j] { -1 } else { 1 };
        self.x[j] = !self.x[j];
        couplings.add_column(j, sign, &mut self.h);
        delta
    }

    pub fn flip<C: Couplings>(&mut self, couplings: &C, j: usize) -> Result<i64> {
        if j >= self.x.len() {
            return Err(Error::arg(format!(
                "flip index {j} out of range for m = {}",
                self.x.len()
            )));
        }
        Ok(self.flip_unchecked(couplings, j))
    }
}

pub fn init_fields(model: &QuboModel, x: &[bool]) -> Result<EffectiveFields> {
    check_field_range(model)?;
    EffectiveFields::new(model, x)
}

/// Flips bit `j` and returns the exact energy change.
pub fn apply_flip(model: &QuboModel, fields: &mut EffectiveFields, j: usize) -> Result<i64> {
    fields.flip(model, j)
}

/// A decoded permutation, 0-based.
///
/// For QAP, entry `i` is the location of facility `i`. For TSP it is the tour
/// itself, starting with city 0.
pub type Permutation = Vec<usize>;

/// Decodes a two-way one-hot bit vector, or `None` when some row or column
/// does not have exactly one set bit.
pub fn decode(layout: &VariableLayout, x: &[bool]) -> Option<Permutation> {
    if x.len() != layout.m() {
        return None;
    }
    let mut pos_of_row = vec![usize::MAX; layout.rows];
    let mut col_used = vec![false; layout.cols];
    for (var, _) in x.iter().enumerate().filter(|(_, &b)| b) {
        let (r, c) = layout.cell(var);
        if pos_of_row[r] != usize::MAX || col_used[c] {
            return None;
        }
        pos_of_row[r] = c;
        col_used[c] = true;
    }
    if pos_of_row.contains(&usize::MAX) {
        return None;
    }
    Some(match layout.kind {
        LayoutKind::QapFull => pos_of_row,
        LayoutKind::TspFixedFirst => {
            let mut tour = vec![0usize; layout.rows + 1];
            for (r, &c) in pos_of_row.iter().enumerate() {
                tour[c + 1] = r + 1;
            }
            tour
        }
    })
}

/// Inverse of [`decode`].
pub fn encode(layout: &VariableLayout, perm: &[usize]) -> Result<Vec<bool>> {
    if perm.len() != layout.problem_size() || !is_permutation(perm) {
        return Err(Error::arg(format!(
            "{perm:?} is not a permutation for this layout"
        )));
    }
    let mut x = vec![false; layout.m()];
    match layout.kind {
        LayoutKind::QapFull => {
            for (i, &k) in perm.iter().enumerate() {
                x[layout.index(i, k)] = true;
            }
        }
        LayoutKind::TspFixedFirst => {
            if perm[0] != 0 {
                return Err(Error::arg(
                    "tour must start at city 0 when the first city is fixed",
                ));
            }
            for (pos, &city) in perm.iter().enumerate().skip(1) {
                x[layout.index(city - 1, pos - 1)] = true;
            }
        }
    }
    Ok(x)
}

pub(crate) fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter()
        .all(|&p| p < perm.len() && !std::mem::replace(&mut seen[p], true))
}
