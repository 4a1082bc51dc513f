//! Penalty weights for `Q = C + alpha * G`.
//!
//! Five methods: UB (all-ones objective), MQC (largest coefficient), VLM
//! (largest single-flip change of the objective), MOMC (VLM over the smallest
//! positive single-flip change of the constraint) and MOC (largest ratio of
//! objective change to constraint change, flip by flip).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::QapInstance;
use crate::qubo::QuboModel;

/// How the off-diagonal part of a flip bound is gathered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundConvention {
    /// Sum the stored row of the upper triangle: the diagonal plus entries
    /// `(i, j)` with `j > i`. This reproduces the published weight tables.
    #[default]
    UpperRow,
    /// Sum every coupling touching variable `i`, whichever triangle stores
    /// it. This is the exact worst-case flip change.
    Incident,
}

impl fmt::Display for BoundConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundConvention::UpperRow => "upper-row",
            BoundConvention::Incident => "incident",
        })
    }
}

impl FromStr for BoundConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper-row" => Ok(BoundConvention::UpperRow),
            "incident" => Ok(BoundConvention::Incident),
            _ => Err(Error::arg(format!("unknown bound convention `{s}`"))),
        }
    }
}

/// Per-variable bounds on how much one flip can lower (`down`) or raise
/// (`up`) the energy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipBounds {
    pub down: Vec<i64>,
    pub up: Vec<i64>,
}

impl FlipBounds {
    /// Both components, `down` first.
    pub fn iter_all(&self) -> impl Iterator<Item = i64> + '_ {
        self.down.iter().chain(&self.up).copied()
    }
}

pub fn flip_bounds(model: &QuboModel, conv: BoundConvention) -> Result<FlipBounds> {
    let m = model.m();
    let overflow = || Error::Overflow("summing flip bounds");
    let mut neg = vec![0i64; m];
    let mut pos = vec![0i64; m];
    for r in 0..m {
        for (off, &v) in model.upper_row(r).iter().enumerate().skip(1) {
            let slot = if v < 0 { &mut neg } else { &mut pos };
            slot[r] = slot[r].checked_add(v).ok_or_else(overflow)?;
            if conv == BoundConvention::Incident {
                let c = r + off;
                slot[c] = slot[c].checked_add(v).ok_or_else(overflow)?;
            }
        }
    }
    let mut down = Vec::with_capacity(m);
    let mut up = Vec::with_capacity(m);
    for i in 0..m {
        let d = model.diag(i);
        down.push(
            d.checked_add(neg[i])
                .and_then(i64::checked_neg)
                .ok_or_else(overflow)?,
        );
        up.push(d.checked_add(pos[i]).ok_or_else(overflow)?);
    }
    Ok(FlipBounds { down, up })
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Objective value of the all-ones vector.
pub fn ub(c: &QuboModel) -> Result<i64> {
    let sum = c
        .coefficients()
        .iter()
        .try_fold(c.constant(), |acc, &v| acc.checked_add(v))
        .ok_or(Error::Overflow("summing coefficients"))?;
    Ok(sum.max(1))
}

/// Largest stored coefficient.
pub fn mqc(c: &QuboModel) -> i64 {
    c.coefficients().iter().copied().max().unwrap_or(0).max(1)
}

fn max_bound(b: &FlipBounds) -> i64 {
    b.iter_all().max().unwrap_or(0)
}

pub fn vlm(c: &QuboModel, conv: BoundConvention) -> Result<i64> {
    Ok(max_bound(&flip_bounds(c, conv)?).max(1))
}

fn gamma_of(b: &FlipBounds) -> Result<i64> {
    b.iter_all()
        .filter(|&v| v > 0)
        .min()
        .ok_or_else(|| Error::Method("constraint matrix has no positive flip bound".into()))
}

/// Smallest positive flip bound of the constraint matrix.
pub fn gamma(g: &QuboModel, conv: BoundConvention) -> Result<i64> {
    gamma_of(&flip_bounds(g, conv)?)
}

pub fn momc(c: &QuboModel, g: &QuboModel, conv: BoundConvention) -> Result<i64> {
    let gm = gamma(g, conv)?;
    Ok(ceil_div(max_bound(&flip_bounds(c, conv)?), gm).max(1))
}

fn moc_of(bc: &FlipBounds, bg: &FlipBounds) -> Result<i64> {
    if bc.down.len() != bg.down.len() {
        return Err(Error::arg("cost and constraint matrices differ in size"));
    }
    let pairs = bc.down.iter().zip(&bg.down).chain(bc.up.iter().zip(&bg.up));
    let mut best: Option<(i64, i64)> = None;
    for (&wc, &wg) in pairs.filter(|(_, &wg)| wg > 0) {
        let num = wc.checked_abs().ok_or(Error::Overflow("taking |W^c|"))?;
        // num / wg > bn / bd  <=>  num * bd > bn * wg
        let better = match best {
            None => true,
            Some((bn, bd)) => (num as i128) * (bd as i128) > (bn as i128) * (wg as i128),
        };
        if better {
            best = Some((num, wg));
        }
    }
    let (n, d) =
        best.ok_or_else(|| Error::Method("constraint matrix has no positive flip bound".into()))?;
    Ok(ceil_div(n, d).max(1))
}

pub fn moc(c: &QuboModel, g: &QuboModel, conv: BoundConvention) -> Result<i64> {
    moc_of(&flip_bounds(c, conv)?, &flip_bounds(g, conv)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ub,
    Mqc,
    Vlm,
    Momc,
    Moc,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ub,
        Method::Mqc,
        Method::Vlm,
        Method::Momc,
        Method::Moc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ub => "ub",
            Method::Mqc => "mqc",
            Method::Vlm => "vlm",
            Method::Momc => "momc",
            Method::Moc => "moc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::arg(format!("unknown penalty method `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub ub: i64,
    pub mqc: i64,
    pub vlm: i64,
    pub momc: i64,
    pub moc: i64,
    pub gamma: i64,
    pub convention: BoundConvention,
    pub bounds_c: FlipBounds,
    pub bounds_g: FlipBounds,
}

impl PenaltyReport {
    pub fn get(&self, method: Method) -> i64 {
        match method {
            Method::Ub => self.ub,
            Method::Mqc => self.mqc,
            Method::Vlm => self.vlm,
            Method::Momc => self.momc,
            Method::Moc => self.moc,
        }
    }
}

pub fn all_weights(c: &QuboModel, g: &QuboModel, conv: BoundConvention) -> Result<PenaltyReport> {
    let bounds_c = flip_bounds(c, conv)?;
    let bounds_g = flip_bounds(g, conv)?;
    let gamma = gamma_of(&bounds_g)?;
    let raw_vlm = max_bound(&bounds_c);
    Ok(PenaltyReport {
        ub: ub(c)?,
        mqc: mqc(c),
        vlm: raw_vlm.max(1),
        momc: ceil_div(raw_vlm, gamma).max(1),
        moc: moc_of(&bounds_c, &bounds_g)?,
        gamma,
        convention: conv,
        bounds_c,
        bounds_g,
    })
}

/// `max(H) * max(D)`, the largest single flow-times-distance product; shown
/// next to MQC for QAP instances, whose stored pair entries sum two products.
pub fn qap_max_product(inst: &QapInstance) -> Result<i64> {
    let (h, d) = (inst.flow.max().unwrap_or(0), inst.dist.max().unwrap_or(0));
    h.checked_mul(d)
        .ok_or(Error::Overflow("multiplying max flow by max distance"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::parse_qaplib;
    use crate::qubo::{build_constraint, build_qap_cost, VariableLayout};

    const BOTH: [BoundConvention; 2] = [BoundConvention::UpperRow, BoundConvention::Incident];

    fn tiny() -> (QuboModel, QuboModel) {
        let c = build_qap_cost(&parse_qaplib("2 0 3 3 0 0 5 5 0").unwrap()).unwrap();
        let g = build_constraint(*c.layout()).unwrap();
        (c, g)
    }

    #[test]
    fn incident_constraint_bounds() {
        for n in 2..6 {
            let g = build_constraint(VariableLayout::qap(n)).unwrap();
            let b = flip_bounds(&g, BoundConvention::Incident).unwrap();
            let up = -2 + 2 * 2 * (n as i64 - 1);
            assert!(b.down.iter().all(|&d| d == 2));
            assert!(b.up.iter().all(|&u| u == up));
        }
    }

    #[test]
    fn upper_row_constraint_bounds() {
        let l = VariableLayout::qap(3);
        let g = build_constraint(l).unwrap();
        let b = flip_bounds(&g, BoundConvention::UpperRow).unwrap();
        assert!(b.down.iter().all(|&d| d == 2));
        // first variable sees all four same-row/same-column partners, the
        // last sees none
        assert_eq!(b.up[0], 6);
        assert_eq!(b.up[8], -2);
    }

    #[test]
    fn tiny_qap_weights() {
        let (c, g) = tiny();
        for conv in BOTH {
            let r = all_weights(&c, &g, conv).unwrap();
            assert_eq!((r.mqc, r.vlm, r.momc, r.moc, r.gamma), (30, 30, 15, 15, 2));
            assert_eq!(r.ub, 60);
        }
        let b = flip_bounds(&c, BoundConvention::Incident).unwrap();
        assert!(b.up.iter().all(|&u| u == 30));
    }

    #[test]
    fn zero_cost_clamps_to_one() {
        let l = VariableLayout::qap(3);
        let c = QuboModel::zeros(l);
        let g = build_constraint(l).unwrap();
        for conv in BOTH {
            let r = all_weights(&c, &g, conv).unwrap();
            assert_eq!([r.ub, r.mqc, r.vlm, r.momc, r.moc], [1; 5]);
            assert!(flip_bounds(&c, conv).unwrap().iter_all().all(|v| v == 0));
        }
    }

    #[test]
    fn gamma_scales_and_degenerates() {
        let g = build_constraint(VariableLayout::qap(2)).unwrap();
        for conv in BOTH {
            assert_eq!(gamma(&g, conv).unwrap(), 2);
            assert_eq!(gamma(&g.scaled(3).unwrap(), conv).unwrap(), 6);
            let z = QuboModel::zeros(*g.layout());
            assert!(matches!(gamma(&z, conv), Err(Error::Method(_))));
            assert!(matches!(moc(&z, &z, conv), Err(Error::Method(_))));
        }
    }

    #[test]
    fn ceil_div_rounds_up() {
        assert_eq!(ceil_div(7, 2), 4);
        assert_eq!(ceil_div(6, 2), 3);
        assert_eq!(ceil_div(0, 2), 0);
        assert_eq!(ceil_div(-3, 2), -1);
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("MOC".parse::<Method>().is_ok());
        assert!("foo".parse::<Method>().is_err());
    }
}
