//! Exhaustive reference solvers for small instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::permutation_cost;
use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::qubo::{combine, evaluate, DenseCouplings, EffectiveFields, QuboModel};

pub const MAX_QUBO_VARS: usize = 24;
pub const MAX_PERMUTATION_N: usize = 9;

/// Bits fixed per parallel enumeration block.
const PREFIX_BITS: usize = 4;

fn check_qubo_size(m: usize) -> Result<()> {
    if m > MAX_QUBO_VARS {
        return Err(Error::Capacity(format!(
            "exhaustive search supports m <= {MAX_QUBO_VARS}, got {m}"
        )));
    }
    Ok(())
}

/// Visits every bit vector whose last `prefix_len` bits equal `prefix`, in
/// Gray-code order over the remaining low bits, passing the energy of each
/// model alongside the vector.
fn gray_walk<F>(
    models: &[(&QuboModel, &DenseCouplings)],
    prefix: u64,
    prefix_len: usize,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[bool], &[i64]),
{
    let m = models[0].0.m();
    let free = m - prefix_len;
    let mut x = vec![false; m];
    for b in 0..prefix_len {
        x[free + b] = (prefix >> b) & 1 == 1;
    }
    let mut fields = Vec::with_capacity(models.len());
    let mut energies = Vec::with_capacity(models.len());
    for (q, c) in models {
        fields.push(EffectiveFields::new(*c, &x)?);
        energies.push(evaluate(q, &x)?);
    }
    visit(&x, &energies);
    for k in 1u64..(1u64 << free) {
        let j = k.trailing_zeros() as usize;
        for ((f, (_, c)), e) in fields.iter_mut().zip(models).zip(energies.iter_mut()) {
            *e += f.flip_unchecked(*c, j);
        }
        x[j] = !x[j];
        visit(&x, &energies);
    }
    Ok(())
}

/// `(energy, x)` ordered by energy, then lexicographically by `x`.
fn better(e: i64, x: &[bool], best: &Option<(i64, Vec<bool>)>) -> bool {
    match best {
        None => true,
        Some((be, bx)) => e < *be || (e == *be && x < bx.as_slice()),
    }
}

fn keep_min(a: Option<(i64, Vec<bool>)>, b: Option<(i64, Vec<bool>)>) -> Option<(i64, Vec<bool>)> {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => Some(if (b.0, &b.1) < (a.0, &a.1) { b } else { a }),
    }
}

/// Global minimum over all `2^m` vectors; ties go to the lexicographically
/// smallest vector.
pub fn brute_force_qubo(q: &QuboModel) -> Result<(Vec<bool>, i64)> {
    let m = q.m();
    check_qubo_size(m)?;
    let dense = DenseCouplings::new(q)?;
    let p = PREFIX_BITS.min(m);
    let best = (0..1u64 << p)
        .into_par_iter()
        .map(|prefix| {
            let mut best: Option<(i64, Vec<bool>)> = None;
            gray_walk(&[(q, &dense)], prefix, p, |x, e| {
                if better(e[0], x, &best) {
                    best = Some((e[0], x.to_vec()));
                }
            })?;
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(None, keep_min);
    let (e, x) = best.expect("at least one vector");
    Ok((x, e))
}

/// Best permutation by enumeration, ties to the lexicographically smallest.
/// TSP tours start at city 0.
pub fn brute_force_permutation(inst: &ProblemInstance) -> Result<(Vec<usize>, i64)> {
    let n = inst.n();
    if n > MAX_PERMUTATION_N {
        return Err(Error::Capacity(format!(
            "permutation enumeration supports n <= {MAX_PERMUTATION_N}, got {n}"
        )));
    }
    inst.validate()?;
    let fixed = matches!(inst, ProblemInstance::Tsp(_)) as usize;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(Vec<usize>, i64)> = None;
    loop {
        let c = permutation_cost(inst, &perm)?;
        if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
            best = Some((perm.clone(), c));
        }
        if !next_permutation(&mut perm[fixed..]) {
            break;
        }
    }
    Ok(best.expect("at least one permutation"))
}

/// Lexicographic successor in place; `false` once the last one is reached.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len())
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub alpha: i64,
    pub feasible_min: i64,
    pub infeasible_min: i64,
    /// Every infeasible vector lies strictly above the feasible optimum.
    pub strictly_valid: bool,
    /// No infeasible vector lies below the feasible optimum.
    pub tie_valid: bool,
    /// Lexicographically smallest infeasible vector attaining `infeasible_min`.
    pub witness: Vec<bool>,
}

/// Splits all `2^m` energies of `C + alpha * G` by whether `G` vanishes.
pub fn check_validity(c: &QuboModel, g: &QuboModel, alpha: i64) -> Result<ValidityReport> {
    let m = c.m();
    check_qubo_size(m)?;
    let q = combine(c, g, alpha)?;
    let dq = DenseCouplings::new(&q)?;
    let dg = DenseCouplings::new(g)?;
    let p = PREFIX_BITS.min(m);
    type Best = Option<(i64, Vec<bool>)>;
    let parts = (0..1u64 << p)
        .into_par_iter()
        .map(|prefix| -> Result<(Best, Best)> {
            let mut feas: Best = None;
            let mut infeas: Best = None;
            gray_walk(&[(&q, &dq), (g, &dg)], prefix, p, |x, e| {
                let slot = if e[1] == 0 { &mut feas } else { &mut infeas };
                if better(e[0], x, slot) {
                    *slot = Some((e[0], x.to_vec()));
                }
            })?;
            Ok((feas, infeas))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut feas, mut infeas): (Best, Best) = (None, None);
    for (f, i) in parts {
        feas = keep_min(feas, f);
        infeas = keep_min(infeas, i);
    }
    let (feasible_min, _) =
        feas.ok_or_else(|| Error::Formulation("constraint admits no feasible vector".into()))?;
    let (infeasible_min, witness) = infeas
        .ok_or_else(|| Error::Formulation("constraint admits no infeasible vector".into()))?;
    Ok(ValidityReport {
        alpha,
        feasible_min,
        infeasible_min,
        strictly_valid: infeasible_min > feasible_min,
        tie_valid: infeasible_min >= feasible_min,
        witness,
    })
}
