use std::fmt;

use crate::error::{Error, Result};

use super::model::ProbabilityTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    OutcomeIndependence,
    ParameterIndependence,
    ConditionalParameterIndependence,
    Reproduction,
    Triviality,
    MarginalNoncontextuality,
    JointNoncontextuality,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::OutcomeIndependence,
        Condition::ParameterIndependence,
        Condition::ConditionalParameterIndependence,
        Condition::Reproduction,
        Condition::Triviality,
        Condition::MarginalNoncontextuality,
        Condition::JointNoncontextuality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::OutcomeIndependence => "OI",
            Condition::ParameterIndependence => "PI",
            Condition::ConditionalParameterIndependence => "CPI",
            Condition::Reproduction => "REPRODUCTION",
            Condition::Triviality => "TRIVIALITY",
            Condition::MarginalNoncontextuality => "MARGINAL-NC",
            Condition::JointNoncontextuality => "JOINT-NC",
        }
    }

    /// Bell-type factorization fails for the trivial model of any entangled
    /// state, so OI is reported but does not decide a model check.
    pub fn is_gating(self) -> bool {
        self != Condition::OutcomeIndependence
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the worst violation was found. Context and outcome indices refer to
/// the table's context lists; a second context on a side means the value was
/// compared across the two.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Witness {
    pub lambda: Option<usize>,
    pub alice_contexts: Vec<usize>,
    pub bob_contexts: Vec<usize>,
    pub alice_outcomes: Vec<usize>,
    pub bob_outcomes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    pub violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witness: Option<Witness>,
    /// Tuples left out because the conditioning probability was below the floor.
    pub skipped: usize,
    pub compared: usize,
}

struct Worst {
    value: f64,
    witness: Option<Witness>,
    compared: usize,
    skipped: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            witness: None,
            compared: 0,
            skipped: 0,
        }
    }

    // Only a strictly larger value replaces the incumbent, so the first
    // witness in iteration order wins ties.
    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        self.compared += 1;
        if value > self.value || (self.witness.is_none() && value >= self.value) {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    fn finish(self, condition: Condition, tolerance: f64) -> ConditionReport {
        ConditionReport {
            condition,
            violation: self.value,
            tolerance,
            passed: self.value <= tolerance,
            witness: self.witness,
            skipped: self.skipped,
            compared: self.compared,
        }
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    Ok(())
}

fn w(lambda: Option<usize>, ac: &[usize], bc: &[usize], ao: &[usize], bo: &[usize]) -> Witness {
    Witness {
        lambda,
        alice_contexts: ac.to_vec(),
        bob_contexts: bc.to_vec(),
        alice_outcomes: ao.to_vec(),
        bob_outcomes: bo.to_vec(),
    }
}

/// `|p(P,Q) − p(P)p(Q)|` with per-context-pair marginals.
pub fn check_oi(t: &ProbabilityTable, tol: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    let mut worst = Worst::new();
    for l in 0..t.hidden_count() {
        for i in 0..t.alice_context_count() {
            for j in 0..t.bob_context_count() {
                for a in 0..t.alice_sizes[i] {
                    let pa = t.marginal_a(l, i, j, a);
                    for b in 0..t.bob_sizes[j] {
                        let v = (t.joint(l, i, j, a, b) - pa * t.marginal_b(l, i, j, b)).abs();
                        worst.offer(v, || w(Some(l), &[i], &[j], &[a], &[b]));
                    }
                }
            }
        }
    }
    Ok(worst.finish(Condition::OutcomeIndependence, tol))
}

fn require_far_contexts(t: &ProbabilityTable, condition: Condition) -> Result<()> {
    if t.alice_context_count() < 2 || t.bob_context_count() < 2 {
        return Err(Error::Inconclusive(format!(
            "{condition} needs at least two contexts on each side"
        )));
    }
    Ok(())
}

/// Spread of each party's marginal as the distant context changes.
pub fn check_pi(t: &ProbabilityTable, tol: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    require_far_contexts(t, Condition::ParameterIndependence)?;
    let (na, nb) = (t.alice_context_count(), t.bob_context_count());
    let mut worst = Worst::new();
    for l in 0..t.hidden_count() {
        for i in 0..na {
            for a in 0..t.alice_sizes[i] {
                for j in 0..nb {
                    for j2 in j + 1..nb {
                        let v = (t.marginal_a(l, i, j, a) - t.marginal_a(l, i, j2, a)).abs();
                        worst.offer(v, || w(Some(l), &[i], &[j, j2], &[a], &[]));
                    }
                }
            }
        }
        for j in 0..nb {
            for b in 0..t.bob_sizes[j] {
                for i in 0..na {
                    for i2 in i + 1..na {
                        let v = (t.marginal_b(l, i, j, b) - t.marginal_b(l, i2, j, b)).abs();
                        worst.offer(v, || w(Some(l), &[i, i2], &[j], &[], &[b]));
                    }
                }
            }
        }
    }
    Ok(worst.finish(Condition::ParameterIndependence, tol))
}

/// Spread of `p(P | Q)` as the context of the conditioning projector `Q`
/// changes, in both directions. Conditionals with `p(Q) < cond_floor` are
/// skipped and counted.
pub fn check_cpi(t: &ProbabilityTable, tol: f64, cond_floor: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    check_tolerance(cond_floor)?;
    require_far_contexts(t, Condition::ConditionalParameterIndependence)?;
    let (na, nb) = (t.alice_context_count(), t.bob_context_count());
    let mut worst = Worst::new();
    for l in 0..t.hidden_count() {
        // Alice's outcome conditioned on Bob's projector.
        for i in 0..na {
            for j in 0..nb {
                for b in 0..t.bob_sizes[j] {
                    for j2 in j + 1..nb {
                        for b2 in 0..t.bob_sizes[j2] {
                            if t.bob_ids[j][b] != t.bob_ids[j2][b2] {
                                continue;
                            }
                            let q1 = t.marginal_b(l, i, j, b);
                            let q2 = t.marginal_b(l, i, j2, b2);
                            if q1 < cond_floor || q2 < cond_floor {
                                worst.skipped += 1;
                                continue;
                            }
                            for a in 0..t.alice_sizes[i] {
                                let v = (t.joint(l, i, j, a, b) / q1 - t.joint(l, i, j2, a, b2) / q2).abs();
                                worst.offer(v, || w(Some(l), &[i], &[j, j2], &[a], &[b, b2]));
                            }
                        }
                    }
                }
            }
        }
        // Bob's outcome conditioned on Alice's projector.
        for j in 0..nb {
            for i in 0..na {
                for a in 0..t.alice_sizes[i] {
                    for i2 in i + 1..na {
                        for a2 in 0..t.alice_sizes[i2] {
                            if t.alice_ids[i][a] != t.alice_ids[i2][a2] {
                                continue;
                            }
                            let p1 = t.marginal_a(l, i, j, a);
                            let p2 = t.marginal_a(l, i2, j, a2);
                            if p1 < cond_floor || p2 < cond_floor {
                                worst.skipped += 1;
                                continue;
                            }
                            for b in 0..t.bob_sizes[j] {
                                let v = (t.joint(l, i, j, a, b) / p1 - t.joint(l, i2, j, a2, b) / p2).abs();
                                worst.offer(v, || w(Some(l), &[i, i2], &[j], &[a, a2], &[b]));
                            }
                        }
                    }
                }
            }
        }
    }
    if worst.compared == 0 {
        return Err(Error::Inconclusive(format!(
            "CPI compared no conditionals ({} skipped below the conditioning floor)",
            worst.skipped
        )));
    }
    Ok(worst.finish(Condition::ConditionalParameterIndependence, tol))
}

/// `|Σ_λ ρ(λ) p_λ(P,Q) − Tr(ρ P⊗Q)|`.
pub fn check_reproduction(t: &ProbabilityTable, tol: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    let mut worst = Worst::new();
    for i in 0..t.alice_context_count() {
        for j in 0..t.bob_context_count() {
            for a in 0..t.alice_sizes[i] {
                for b in 0..t.bob_sizes[j] {
                    let v = (t.averaged(i, j, a, b) - t.quantum(i, j, a, b)).abs();
                    worst.offer(v, || w(None, &[i], &[j], &[a], &[b]));
                }
            }
        }
    }
    Ok(worst.finish(Condition::Reproduction, tol))
}

/// `|p_λ(P,Q) − Tr(ρ P⊗Q)|` for every `λ`; passing means the model is trivial.
pub fn check_triviality(t: &ProbabilityTable, tol: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    let mut worst = Worst::new();
    for l in 0..t.hidden_count() {
        for i in 0..t.alice_context_count() {
            for j in 0..t.bob_context_count() {
                for a in 0..t.alice_sizes[i] {
                    for b in 0..t.bob_sizes[j] {
                        let v = (t.joint(l, i, j, a, b) - t.quantum(i, j, a, b)).abs();
                        worst.offer(v, || w(Some(l), &[i], &[j], &[a], &[b]));
                    }
                }
            }
        }
    }
    Ok(worst.finish(Condition::Triviality, tol))
}

struct Extremes {
    min: f64,
    max: f64,
    at_min: (usize, usize, usize, usize),
    at_max: (usize, usize, usize, usize),
}

impl Extremes {
    fn spread(&self) -> f64 {
        self.max - self.min
    }
}

fn track(slot: &mut Option<Extremes>, value: f64, at: (usize, usize, usize, usize)) {
    match slot {
        None => {
            *slot = Some(Extremes {
                min: value,
                max: value,
                at_min: at,
                at_max: at,
            })
        }
        Some(e) => {
            if value < e.min {
                e.min = value;
                e.at_min = at;
            }
            if value > e.max {
                e.max = value;
                e.at_max = at;
            }
        }
    }
}

fn id_count(ids: &[Vec<usize>]) -> usize {
    ids.iter().flatten().max().map_or(0, |m| m + 1)
}

/// Spread of each projector's marginal over every context pair in which it
/// occurs.
pub fn check_marginal_noncontextuality(t: &ProbabilityTable, tol: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    let (na, nb) = (t.alice_context_count(), t.bob_context_count());
    let mut worst = Worst::new();
    for l in 0..t.hidden_count() {
        let mut alice: Vec<Option<Extremes>> = (0..id_count(&t.alice_ids)).map(|_| None).collect();
        let mut bob: Vec<Option<Extremes>> = (0..id_count(&t.bob_ids)).map(|_| None).collect();
        for i in 0..na {
            for j in 0..nb {
                for a in 0..t.alice_sizes[i] {
                    track(&mut alice[t.alice_ids[i][a]], t.marginal_a(l, i, j, a), (i, j, a, 0));
                }
                for b in 0..t.bob_sizes[j] {
                    track(&mut bob[t.bob_ids[j][b]], t.marginal_b(l, i, j, b), (i, j, 0, b));
                }
            }
        }
        for e in alice.iter().flatten() {
            let ((i1, j1, a1, _), (i2, j2, a2, _)) = (e.at_min, e.at_max);
            worst.offer(e.spread(), || w(Some(l), &[i1, i2], &[j1, j2], &[a1, a2], &[]));
        }
        for e in bob.iter().flatten() {
            let ((i1, j1, _, b1), (i2, j2, _, b2)) = (e.at_min, e.at_max);
            worst.offer(e.spread(), || w(Some(l), &[i1, i2], &[j1, j2], &[], &[b1, b2]));
        }
    }
    Ok(worst.finish(Condition::MarginalNoncontextuality, tol))
}

/// Spread of each joint probability `p(P,Q)` over every context pair
/// containing both projectors.
pub fn check_joint_noncontextuality(t: &ProbabilityTable, tol: f64) -> Result<ConditionReport> {
    check_tolerance(tol)?;
    let (na, nb) = (t.alice_context_count(), t.bob_context_count());
    let nq = id_count(&t.bob_ids);
    let mut worst = Worst::new();
    for l in 0..t.hidden_count() {
        let mut slots: Vec<Option<Extremes>> = (0..id_count(&t.alice_ids) * nq).map(|_| None).collect();
        for i in 0..na {
            for j in 0..nb {
                for a in 0..t.alice_sizes[i] {
                    for b in 0..t.bob_sizes[j] {
                        let key = t.alice_ids[i][a] * nq + t.bob_ids[j][b];
                        track(&mut slots[key], t.joint(l, i, j, a, b), (i, j, a, b));
                    }
                }
            }
        }
        for e in slots.iter().flatten() {
            let ((i1, j1, a1, b1), (i2, j2, a2, b2)) = (e.at_min, e.at_max);
            worst.offer(e.spread(), || w(Some(l), &[i1, i2], &[j1, j2], &[a1, a2], &[b1, b2]));
        }
    }
    Ok(worst.finish(Condition::JointNoncontextuality, tol))
}

/// Every condition in [`Condition::ALL`] order. Inconclusive checks are kept
/// as errors rather than counted as failures.
pub fn check_all(t: &ProbabilityTable, tol: f64, cond_floor: f64) -> Vec<(Condition, Result<ConditionReport>)> {
    Condition::ALL
        .iter()
        .map(|&c| {
            let r = match c {
                Condition::OutcomeIndependence => check_oi(t, tol),
                Condition::ParameterIndependence => check_pi(t, tol),
                Condition::ConditionalParameterIndependence => check_cpi(t, tol, cond_floor),
                Condition::Reproduction => check_reproduction(t, tol),
                Condition::Triviality => check_triviality(t, tol),
                Condition::MarginalNoncontextuality => check_marginal_noncontextuality(t, tol),
                Condition::JointNoncontextuality => check_joint_noncontextuality(t, tol),
            };
            (c, r)
        })
        .collect()
}
