//! Constructors for the special cases of CMCS.

use crate::components::ComponentKind;
use crate::error::{BbqpError, Result};

use super::config::{self_loop_prohibited, CmcsConfig, Matrix};

fn invalid(msg: impl Into<String>) -> BbqpError {
    BbqpError::InvalidArgument(msg.into())
}

fn check_distinct(components: &[ComponentKind]) -> Result<()> {
    for (a, k) in components.iter().enumerate() {
        if components[..a].contains(k) {
            return Err(invalid(format!("component {k} listed more than once")));
        }
    }
    Ok(())
}

/// Zeroes prohibited self-transitions and rescales the rest of the row.
fn zero_prohibited(
    components: &[ComponentKind],
    matrix: Matrix,
    rows: &mut [Vec<f64>],
    shared: bool,
) -> Result<()> {
    for (h, row) in rows.iter_mut().enumerate() {
        if self_loop_prohibited(matrix, components[h], shared) {
            row[h] = 0.0;
        }
        let sum: f64 = row.iter().sum();
        if sum <= 0.0 {
            return Err(invalid(format!(
                "{matrix} row of {} has no admissible transition",
                components[h]
            )));
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

fn unit_row(len: usize, at: usize) -> Vec<f64> {
    let mut row = vec![0.0; len];
    row[at] = 1.0;
    row
}

/// Variable Neighbourhood Search over `hill_climbers` (in order) with one
/// diversifying `mutation`.
///
/// Success of any component returns to the first hill climber; failure of
/// hill climber `i` moves to hill climber `i + 1`, the last one hands over
/// to the mutation, and the mutation always returns to the first hill
/// climber. An idempotent first hill climber cannot follow itself, so on
/// success it continues as on failure.
pub fn make_vns(hill_climbers: &[ComponentKind], mutation: ComponentKind) -> Result<CmcsConfig> {
    if hill_climbers.is_empty() {
        return Err(invalid("VNS needs at least one hill climber"));
    }
    if let Some(k) = hill_climbers.iter().find(|k| !k.is_hill_climber()) {
        return Err(invalid(format!("{k} is not a hill climber")));
    }
    if !mutation.is_mutation() {
        return Err(invalid(format!("{mutation} is not a mutation")));
    }
    check_distinct(hill_climbers)?;

    let mut components = hill_climbers.to_vec();
    components.push(mutation);
    let h = components.len();
    let next_on_fail = |i: usize| if i + 1 < h { i + 1 } else { 0 };

    let mfail: Vec<Vec<f64>> = (0..h).map(|i| unit_row(h, next_on_fail(i))).collect();
    let msucc: Vec<Vec<f64>> = (0..h)
        .map(|i| {
            if i == 0 && components[0].is_idempotent() {
                unit_row(h, next_on_fail(0))
            } else {
                unit_row(h, 0)
            }
        })
        .collect();
    let name = format!(
        "VNS({}; {})",
        hill_climbers.iter().map(|k| k.name()).collect::<Vec<_>>().join(" "),
        mutation
    );
    Ok(CmcsConfig {
        name,
        components,
        msucc,
        mfail,
    })
}

/// Iterated Local Search: repeat `hill_climber` until it fails, mutate once,
/// repeat.
pub fn make_ils(hill_climber: ComponentKind, mutation: ComponentKind) -> Result<CmcsConfig> {
    make_vns(&[hill_climber], mutation).map(|c| c.with_name(format!("ILS({hill_climber}; {mutation})")))
}

/// Operator Probabilities: the next component is drawn from a fixed
/// distribution regardless of history (except prohibited repetitions).
/// Components with zero weight are dropped; at least one hill climber and
/// one mutation must remain.
pub fn make_op_prob(weights: &[(ComponentKind, f64)]) -> Result<CmcsConfig> {
    if let Some((k, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(invalid(format!("weight of {k} must be finite and non-negative, got {w}")));
    }
    let support: Vec<(ComponentKind, f64)> = weights.iter().copied().filter(|(_, w)| *w > 0.0).collect();
    let components: Vec<ComponentKind> = support.iter().map(|(k, _)| *k).collect();
    check_distinct(&components)?;
    if !components.iter().any(|k| k.is_hill_climber()) {
        return Err(invalid("operator probabilities need at least one hill climber"));
    }
    if !components.iter().any(|k| k.is_mutation()) {
        return Err(invalid("operator probabilities need at least one mutation"));
    }
    let total: f64 = support.iter().map(|(_, w)| w).sum();
    let p: Vec<f64> = support.iter().map(|(_, w)| w / total).collect();
    let mut msucc = vec![p.clone(); components.len()];
    let mut mfail = vec![p; components.len()];
    zero_prohibited(&components, Matrix::Succ, &mut msucc, false)?;
    zero_prohibited(&components, Matrix::Fail, &mut mfail, false)?;
    let name = format!(
        "OpProb({})",
        support
            .iter()
            .map(|(k, w)| format!("{k}:{:.3}", w / total))
            .collect::<Vec<_>>()
            .join(" ")
    );
    Ok(CmcsConfig {
        name,
        components,
        msucc,
        mfail,
    })
}

/// Static Markov chain hyper-heuristic: one matrix for both outcomes.
/// Rows are taken as relative weights; prohibited self-transitions are
/// zeroed and each row rescaled to sum to one.
pub fn make_mchh(components: &[ComponentKind], matrix: &[Vec<f64>]) -> Result<CmcsConfig> {
    if components.is_empty() {
        return Err(invalid("MCHH needs at least one component"));
    }
    check_distinct(components)?;
    let h = components.len();
    if matrix.len() != h || matrix.iter().any(|r| r.len() != h) {
        return Err(invalid(format!("MCHH matrix must be {h}x{h}")));
    }
    if matrix.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("MCHH matrix entries must be finite and non-negative"));
    }
    let mut rows = matrix.to_vec();
    zero_prohibited(components, Matrix::Succ, &mut rows, true)?;
    Ok(CmcsConfig {
        name: "MCHH".into(),
        components: components.to_vec(),
        msucc: rows.clone(),
        mfail: rows,
    })
}

/// Uniform random choice among `components`.
pub fn make_uniform(components: &[ComponentKind]) -> Result<CmcsConfig> {
    let h = components.len();
    make_mchh(components, &vec![vec![1.0; h]; h]).map(|c| c.with_name("Uniform"))
}
