//! Normal form under local unitaries: a weak multilinear generalization of
//! the singular value decomposition.
//!
//! At level j the algorithm looks at the fibers through the pivot position
//! (j,…,j) — the vectors x^k_i = ψ_{j,…,i,…,j} with i in slot k — and rotates
//! each onto ‖x‖·e_j with a unitary acting only on coordinates ≥ j, cycling
//! the parties until all fiber tails vanish. The pivot modulus grows
//! monotonically, earlier zeros are untouched (the rotations act on trailing
//! coordinates only), and recursing over j produces a fixed pattern of zero
//! entries. A final pass of diagonal phase unitaries makes the designated
//! entries ψ_{n,…,n,i,n,…,n} real and non-negative.
//!
//! Parties whose dimension exceeds the running level keep rotational freedom
//! after the others are exhausted; those extended levels spend it cleaning
//! one remaining fiber each (first non-zero fiber in row-major order), which
//! reproduces the published N×2×2 pattern including the vanishing of all
//! rows past the fourth. For two parties the whole thing reduces to the SVD.
//!
//! The normal form is not unique — generic tensors admit a finite set of
//! them — so equivalence checking combines unitarily invariant fingerprints
//! with restarted normal forms rather than trusting a single run.

use ndarray::Array2;
use rand::SeedableRng;
use serde_json::json;

use crate::error::{MpnfError, Result};
use crate::json as tjson;
use crate::linalg::{self, rotate_to_e0, svd, C64};
use crate::monotones::{self, evaluate};
use crate::random::{random_unitary_set, TestRng};
use crate::tensor::{LocalOperatorSet, MultiTensor, OpFlavor};

#[derive(Debug, Clone)]
pub struct LuConfig {
    /// Relative fiber-tail norm below which a level counts as converged.
    pub tail_tol: f64,
    /// Relative modulus bound ε_zero for reporting pattern entries as zero.
    pub zero_tol: f64,
    /// Sweep cap per level.
    pub max_sweeps_per_level: usize,
}

impl Default for LuConfig {
    fn default() -> Self {
        Self { tail_tol: 1e-10, zero_tol: 1e-8, max_sweeps_per_level: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LuStatus {
    Converged,
    IterationCap,
}

impl LuStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LuStatus::Converged => "converged",
            LuStatus::IterationCap => "iteration_cap",
        }
    }
}

/// Outcome of [`lu_normal_form`].
#[derive(Debug, Clone)]
pub struct LuNormalFormResult {
    pub psi_nf: MultiTensor,
    /// Accumulated per-party unitaries with (⊗U_k)ψ = psi_nf.
    pub unitaries: LocalOperatorSet,
    /// (index tuple, |entry|) for every pattern position.
    pub zero_pattern_report: Vec<(Vec<usize>, f64)>,
    pub status: LuStatus,
    pub restarts_used: usize,
    /// Pivot modulus after each sweep, one list per level.
    pub pivot_history: Vec<Vec<f64>>,
}

impl LuNormalFormResult {
    pub fn max_pattern_residual(&self) -> f64 {
        self.zero_pattern_report.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let fp = fingerprint(&self.psi_nf).ok();
        json!({
            "status": self.status.as_str(),
            "restarts_used": self.restarts_used,
            "psi_nf": tjson::pure_to_value(&self.psi_nf),
            "unitaries": self.unitaries.ops().iter().map(tjson::matrix_to_value).collect::<Vec<_>>(),
            "zero_pattern": self.zero_pattern_report.iter()
                .map(|(idx, r)| json!({ "index": idx, "abs": r }))
                .collect::<Vec<_>>(),
            "pivot_history": self.pivot_history,
            "max_pattern_residual": self.max_pattern_residual(),
            "fingerprints": fp.map(|f| json!({
                "norm": f.norm,
                "unfold_spectra": f.unfold_spectra,
                "monotone_values": f.monotone_values,
            })),
        })
    }
}

/// Number of pattern zeros for m parties of equal dimension n: m·n(n−1)/2.
pub fn zero_count(n: usize, m: usize) -> usize {
    m * n * (n - 1) / 2
}

/// One level of the rotation schedule.
enum LevelPlan {
    /// Pivot (j,…,j); cycle the listed parties until the fiber tails vanish.
    Standard { level: usize, parties: Vec<usize> },
    /// One-shot cleanups: (party, other-party index tuple) per action.
    Extended { level: usize, actions: Vec<(usize, Vec<usize>)> },
}

/// Builds the level schedule and the expected zero pattern for a shape by
/// symbolically replaying the algorithm on a generic tensor.
fn build_plan(dims: &[usize]) -> (Vec<LevelPlan>, Vec<Vec<usize>>) {
    let p = dims.len();
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let mut zeros: Vec<Vec<usize>> = Vec::new();
    let mut is_zero = std::collections::HashSet::new();
    let mut plan = Vec::new();

    for j in 0..max_dim {
        let active: Vec<usize> = (0..p).filter(|&k| dims[k] > j + 1).collect();
        if active.is_empty() {
            continue;
        }
        if dims.iter().all(|&n| n > j) {
            for &k in &active {
                for i in j + 1..dims[k] {
                    let mut idx: Vec<usize> = vec![j; p];
                    idx[k] = i;
                    if is_zero.insert(idx.clone()) {
                        zeros.push(idx);
                    }
                }
            }
            plan.push(LevelPlan::Standard { level: j, parties: active });
        } else {
            let mut actions = Vec::new();
            for &k in &active {
                // First row-major fiber with a symbolically nonzero tail.
                let other_dims: Vec<usize> =
                    (0..p).filter(|&q| q != k).map(|q| dims[q]).collect();
                let mut chosen: Option<Vec<usize>> = None;
                for t in row_major_tuples(&other_dims) {
                    let mut has_tail = false;
                    for c in j + 1..dims[k] {
                        let idx = insert_at(&t, k, c);
                        if !is_zero.contains(&idx) {
                            has_tail = true;
                            break;
                        }
                    }
                    if has_tail {
                        chosen = Some(t);
                        break;
                    }
                }
                if let Some(t) = chosen {
                    for c in j + 1..dims[k] {
                        let idx = insert_at(&t, k, c);
                        if is_zero.insert(idx.clone()) {
                            zeros.push(idx);
                        }
                    }
                    actions.push((k, t));
                }
            }
            if !actions.is_empty() {
                plan.push(LevelPlan::Extended { level: j, actions });
            }
        }
    }
    (plan, zeros)
}

/// All index tuples over `dims`, row-major (last index fastest).
fn row_major_tuples(dims: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut t = vec![0usize; dims.len()];
    for _ in 0..total {
        out.push(t.clone());
        for k in (0..dims.len()).rev() {
            t[k] += 1;
            if t[k] < dims[k] {
                break;
            }
            t[k] = 0;
        }
    }
    out
}

fn insert_at(others: &[usize], k: usize, value: usize) -> Vec<usize> {
    let mut idx = Vec::with_capacity(others.len() + 1);
    idx.extend_from_slice(&others[..k]);
    idx.push(value);
    idx.extend_from_slice(&others[k..]);
    idx
}

/// The zero positions the normal form enforces for a given shape, in the
/// order they are produced.
pub fn expected_zero_pattern(dims: &[usize]) -> Vec<Vec<usize>> {
    build_plan(dims).1
}

/// Rotation on party `k` sending the fiber through `base` (varying slot k,
/// coordinates ≥ level) to its norm times e_level. Returns None when the
/// fiber is already aligned.
fn fiber_rotation(
    cur: &MultiTensor,
    party: usize,
    base: &[usize],
    level: usize,
) -> Result<Option<Array2<C64>>> {
    let n = cur.dims()[party];
    let d = n - level;
    let mut v = vec![C64::new(0.0, 0.0); d];
    let mut idx = base.to_vec();
    for c in level..n {
        idx[party] = c;
        v[c - level] = cur.get(&idx)?;
    }
    let w = rotate_to_e0(&v);
    let mut is_identity = true;
    'check: for i in 0..d {
        for j in 0..d {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            if (w[[i, j]] - target).norm() > 0.0 {
                is_identity = false;
                break 'check;
            }
        }
    }
    if is_identity {
        return Ok(None);
    }
    let mut full = linalg::identity(n);
    for i in 0..d {
        for j in 0..d {
            full[[level + i, level + j]] = w[[i, j]];
        }
    }
    Ok(Some(full))
}

fn fiber_tail_norm(cur: &MultiTensor, party: usize, base: &[usize], level: usize) -> Result<f64> {
    let n = cur.dims()[party];
    let mut idx = base.to_vec();
    let mut acc = 0.0;
    for c in level + 1..n {
        idx[party] = c;
        acc += cur.get(&idx)?.norm_sqr();
    }
    Ok(acc.sqrt())
}

/// Compute the local-unitary normal form.
pub fn lu_normal_form(psi: &MultiTensor, cfg: &LuConfig) -> Result<LuNormalFormResult> {
    if cfg.tail_tol <= 0.0 || cfg.zero_tol <= 0.0 || cfg.max_sweeps_per_level == 0 {
        return Err(MpnfError::InvalidConfig("LU tolerances must be positive".into()));
    }
    let dims = psi.dims().to_vec();
    let p = dims.len();
    let norm = psi.norm();
    let (plan, pattern) = build_plan(&dims);

    let mut cur = psi.clone();
    let mut unitaries: Vec<Array2<C64>> = dims.iter().map(|&n| linalg::identity(n)).collect();
    let mut status = LuStatus::Converged;
    let mut pivot_history: Vec<Vec<f64>> = Vec::new();
    let mut enforced: Vec<Vec<usize>> = Vec::new();

    for step in &plan {
        match step {
            LevelPlan::Standard { level, parties } => {
                let j = *level;
                let pivot_idx: Vec<usize> = vec![j; p];
                let mut history = Vec::new();
                let mut converged = false;
                for _sweep in 0..cfg.max_sweeps_per_level {
                    for &k in parties {
                        if let Some(w) = fiber_rotation(&cur, k, &pivot_idx, j)? {
                            cur = cur.apply_one(k, &w)?;
                            unitaries[k] = w.dot(&unitaries[k]);
                        }
                    }
                    history.push(cur.get(&pivot_idx)?.norm());
                    let mut worst: f64 = 0.0;
                    for &k in parties {
                        worst = worst.max(fiber_tail_norm(&cur, k, &pivot_idx, j)?);
                    }
                    if worst <= cfg.tail_tol * norm {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    status = LuStatus::IterationCap;
                }
                pivot_history.push(history);
                for &k in parties {
                    for i in j + 1..dims[k] {
                        let mut idx = pivot_idx.clone();
                        idx[k] = i;
                        enforced.push(idx);
                    }
                }
            }
            LevelPlan::Extended { level, actions } => {
                let j = *level;
                let mut history = Vec::new();
                for (k, others) in actions {
                    let base = insert_at(others, *k, j);
                    if let Some(w) = fiber_rotation(&cur, *k, &base, j)? {
                        cur = cur.apply_one(*k, &w)?;
                        unitaries[*k] = w.dot(&unitaries[*k]);
                    }
                    history.push(cur.get(&base)?.norm());
                    for c in j + 1..dims[*k] {
                        enforced.push(insert_at(others, *k, c));
                    }
                }
                pivot_history.push(history);
            }
        }
        // Zeros from earlier levels must survive: the rotations only touch
        // trailing coordinates.
        for idx in &enforced {
            let v = cur.get(idx)?.norm();
            if v > cfg.zero_tol * norm && status == LuStatus::Converged {
                return Err(MpnfError::Internal(format!(
                    "pattern entry {idx:?} regressed to {v:.3e}"
                )));
            }
        }
    }

    phase_pass(&mut cur, &mut unitaries, cfg.zero_tol * norm)?;

    let report: Vec<(Vec<usize>, f64)> = pattern
        .iter()
        .map(|idx| {
            let v = cur.get(idx).expect("pattern index is in range").norm();
            (idx.clone(), v)
        })
        .collect();
    let unitaries = LocalOperatorSet::new(unitaries, OpFlavor::Unitary)?;
    Ok(LuNormalFormResult {
        psi_nf: cur,
        unitaries,
        zero_pattern_report: report,
        status,
        restarts_used: 0,
        pivot_history,
    })
}

/// Diagonal phase unitaries making the designated entries (all parties but
/// one at their top index) real and non-negative, processed from the last
/// party to the first; only the last party adjusts the shared corner entry.
/// Entries below `eps` keep phase 1 — in particular the pattern-zero
/// residuals, whose phases are noise.
fn phase_pass(cur: &mut MultiTensor, unitaries: &mut [Array2<C64>], eps: f64) -> Result<()> {
    let dims = cur.dims().to_vec();
    let p = dims.len();
    let eps = eps.max(1e-300);
    for k in (0..p).rev() {
        let nk = dims[k];
        let mut diag = vec![C64::new(1.0, 0.0); nk];
        let mut needed = false;
        for i in 0..nk {
            if k < p - 1 && i == nk - 1 {
                continue;
            }
            let mut idx: Vec<usize> = dims.iter().map(|&n| n - 1).collect();
            idx[k] = i;
            let e = cur.get(&idx)?;
            if e.norm() > eps {
                diag[i] = (e / e.norm()).conj();
                if (diag[i] - C64::new(1.0, 0.0)).norm() > 0.0 {
                    needed = true;
                }
            }
        }
        if !needed {
            continue;
        }
        let mut d = Array2::from_elem((nk, nk), C64::new(0.0, 0.0));
        for i in 0..nk {
            d[[i, i]] = diag[i];
        }
        *cur = cur.apply_one(k, &d)?;
        unitaries[k] = d.dot(&unitaries[k]);
    }
    Ok(())
}

/// Retry [`lu_normal_form`] from random initial local unitaries until it
/// converges, composing the dressing into the reported unitaries.
pub fn lu_normal_form_with_restarts(
    psi: &MultiTensor,
    cfg: &LuConfig,
    restarts: usize,
    rng_seed: u64,
) -> Result<LuNormalFormResult> {
    let mut best = lu_normal_form(psi, cfg)?;
    if best.status == LuStatus::Converged {
        return Ok(best);
    }
    let mut rng = TestRng::seed_from_u64(rng_seed);
    for attempt in 1..=restarts {
        let dressing =
            LocalOperatorSet::new(random_unitary_set(psi.dims(), &mut rng), OpFlavor::Unitary)?;
        let dressed = psi.apply_all(&dressing)?;
        let mut result = lu_normal_form(&dressed, cfg)?;
        result.unitaries = dressing.compose(&result.unitaries)?;
        result.restarts_used = attempt;
        if result.status == LuStatus::Converged {
            return Ok(result);
        }
        best = result;
    }
    Ok(best)
}

/// Local-unitary invariants used for fast inequivalence detection: the norm,
/// the sorted singular values of every unfolding, and the catalog monotones
/// matching the shape.
#[derive(Debug, Clone)]
pub struct Fingerprint {
    pub norm: f64,
    pub unfold_spectra: Vec<Vec<f64>>,
    pub monotone_values: Vec<(String, f64)>,
}

pub fn fingerprint(psi: &MultiTensor) -> Result<Fingerprint> {
    let mut spectra = Vec::with_capacity(psi.party_count());
    for k in 0..psi.party_count() {
        let m = psi.unfold(k)?;
        spectra.push(svd(&m).s);
    }
    let mut monotone_values = Vec::new();
    for spec in monotones::catalog_for_dims(psi.dims()) {
        monotone_values.push((spec.id.clone(), evaluate(&spec, psi)?.value));
    }
    Ok(Fingerprint { norm: psi.norm(), unfold_spectra: spectra, monotone_values })
}

/// Scale-aware worst-case mismatch between two fingerprints of equal shape.
pub fn fingerprint_distance(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let scale = a.norm.max(b.norm).max(1e-300);
    let mut dist: f64 = (a.norm - b.norm).abs() / scale;
    for (sa, sb) in a.unfold_spectra.iter().zip(b.unfold_spectra.iter()) {
        for (x, y) in sa.iter().zip(sb.iter()) {
            dist = dist.max((x - y).abs() / scale);
        }
    }
    for ((_, x), (_, y)) in a.monotone_values.iter().zip(b.monotone_values.iter()) {
        dist = dist.max((x - y).abs() / (scale * scale));
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceVerdict {
    EquivalentLikely,
    Inequivalent,
    Inconclusive,
}

impl EquivalenceVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            EquivalenceVerdict::EquivalentLikely => "equivalent_likely",
            EquivalenceVerdict::Inequivalent => "inequivalent",
            EquivalenceVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub verdict: EquivalenceVerdict,
    pub fingerprint_distance: f64,
    /// Best entrywise residual over compared normal-form pairs, after fitting
    /// the residual diagonal-phase freedom.
    pub best_match_residual: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict.as_str(),
            "fingerprint_distance": self.fingerprint_distance,
            "best_match_residual": self.best_match_residual,
            "restarts": self.restarts,
            "seed": self.seed,
        })
    }
}

const EQUIVALENCE_TOL: f64 = 1e-6;

/// Decide whether two states are related by local unitaries: fingerprints
/// first (any mismatch ⇒ inequivalent), then normal forms from restarted
/// random initial rotations, matched entrywise up to the residual
/// diagonal-phase freedom.
pub fn lu_equivalence_probe(
    psi1: &MultiTensor,
    psi2: &MultiTensor,
    restarts: usize,
    rng_seed: u64,
) -> Result<EquivalenceReport> {
    if psi1.dims() != psi2.dims() {
        return Err(MpnfError::InvalidDims(format!(
            "probe requires equal dims, got {:?} vs {:?}",
            psi1.dims(),
            psi2.dims()
        )));
    }
    let f1 = fingerprint(psi1)?;
    let f2 = fingerprint(psi2)?;
    let fdist = fingerprint_distance(&f1, &f2);
    if fdist > EQUIVALENCE_TOL {
        return Ok(EquivalenceReport {
            verdict: EquivalenceVerdict::Inequivalent,
            fingerprint_distance: fdist,
            best_match_residual: None,
            restarts,
            seed: rng_seed,
        });
    }

    let cfg = LuConfig::default();
    let scale = psi1.norm().max(psi2.norm()).max(1e-300);
    let mut rng = TestRng::seed_from_u64(rng_seed);
    let mut forms1 = vec![lu_normal_form(psi1, &cfg)?.psi_nf];
    let mut forms2 = vec![lu_normal_form(psi2, &cfg)?.psi_nf];
    for _ in 0..restarts {
        for (psi, forms) in [(psi1, &mut forms1), (psi2, &mut forms2)] {
            let dressing =
                LocalOperatorSet::new(random_unitary_set(psi.dims(), &mut rng), OpFlavor::Unitary)?;
            forms.push(lu_normal_form(&psi.apply_all(&dressing)?, &cfg)?.psi_nf);
        }
    }

    let mut best = f64::INFINITY;
    for a in &forms1 {
        for b in &forms2 {
            best = best.min(phase_fit_residual(a, b)?);
            if best <= EQUIVALENCE_TOL * scale {
                return Ok(EquivalenceReport {
                    verdict: EquivalenceVerdict::EquivalentLikely,
                    fingerprint_distance: fdist,
                    best_match_residual: Some(best),
                    restarts,
                    seed: rng_seed,
                });
            }
        }
    }
    Ok(EquivalenceReport {
        verdict: EquivalenceVerdict::Inconclusive,
        fingerprint_distance: fdist,
        best_match_residual: Some(best),
        restarts,
        seed: rng_seed,
    })
}

/// min over per-party diagonal phases D of ‖b − D·a‖, via coordinate ascent
/// on the overlap Re⟨b, D·a⟩.
pub fn phase_fit_residual(a: &MultiTensor, b: &MultiTensor) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(MpnfError::InvalidDims("phase fit requires equal dims".into()));
    }
    let dims = a.dims().to_vec();
    let p = dims.len();
    let strides = a.strides();
    let mut phases: Vec<Vec<C64>> = dims.iter().map(|&n| vec![C64::new(1.0, 0.0); n]).collect();

    let overlap = |phases: &[Vec<C64>]| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (flat, (x, y)) in a.data().iter().zip(b.data().iter()).enumerate() {
            let mut v = *x;
            let mut rem = flat;
            for k in 0..p {
                let idx = rem / strides[k];
                rem %= strides[k];
                v *= phases[k][idx];
            }
            acc += y.conj() * v;
        }
        acc.re
    };

    let mut prev = overlap(&phases);
    for _ in 0..300 {
        for k in 0..p {
            for i in 0..dims[k] {
                // Optimal phase for coordinate (k, i) with the others fixed.
                let mut s = C64::new(0.0, 0.0);
                for (flat, (x, y)) in a.data().iter().zip(b.data().iter()).enumerate() {
                    if (flat / strides[k]) % dims[k] != i {
                        continue;
                    }
                    let mut v = *x;
                    let mut rem = flat;
                    for q in 0..p {
                        let idx = rem / strides[q];
                        rem %= strides[q];
                        if q != k {
                            v *= phases[q][idx];
                        }
                    }
                    s += y.conj() * v;
                }
                if s.norm() > 1e-300 {
                    phases[k][i] = (s / s.norm()).conj();
                }
            }
        }
        let now = overlap(&phases);
        if now <= prev {
            break;
        }
        prev = now;
    }

    let mut dist2 = 0.0;
    for (flat, (x, y)) in a.data().iter().zip(b.data().iter()).enumerate() {
        let mut v = *x;
        let mut rem = flat;
        for k in 0..p {
            let idx = rem / strides[k];
            rem %= strides[k];
            v *= phases[k][idx];
        }
        dist2 += (y - v).norm_sqr();
    }
    Ok(dist2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_pure, random_unitary_set, TestRng};
    use crate::states::{self, CanonicalState};
    use rand::SeedableRng;

    #[test]
    fn zero_count_formula() {
        assert_eq!(zero_count(2, 3), 3);
        assert_eq!(zero_count(3, 3), 9);
        assert_eq!(zero_count(1, 5), 0);
        assert_eq!(zero_count(4, 2), 12);
    }

    #[test]
    fn expected_pattern_matches_zero_count_for_equal_dims() {
        for (n, m) in [(2usize, 2usize), (2, 3), (3, 3), (2, 4), (4, 2)] {
            let dims = vec![n; m];
            assert_eq!(expected_zero_pattern(&dims).len(), zero_count(n, m), "n={n} m={m}");
        }
    }

    #[test]
    fn expected_pattern_for_three_qubits() {
        let mut pattern = expected_zero_pattern(&[2, 2, 2]);
        pattern.sort();
        assert_eq!(pattern, vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
    }

    #[test]
    fn expected_pattern_for_n22_matches_display() {
        // For 6×2×2: (i,0,0) i≥1; (0,1,0); (0,0,1); (i,1,1) i≥2; (i,0,1) i≥3;
        // (i,1,0) i≥4 — sixteen zeros, rows past the fourth entirely gone.
        let mut pattern = expected_zero_pattern(&[6, 2, 2]);
        pattern.sort();
        let mut expect = vec![
            vec![0, 0, 1],
            vec![0, 1, 0],
            vec![1, 0, 0],
            vec![2, 0, 0],
            vec![3, 0, 0],
            vec![4, 0, 0],
            vec![5, 0, 0],
            vec![2, 1, 1],
            vec![3, 1, 1],
            vec![4, 1, 1],
            vec![5, 1, 1],
            vec![3, 0, 1],
            vec![4, 0, 1],
            vec![5, 0, 1],
            vec![4, 1, 0],
            vec![5, 1, 0],
        ];
        expect.sort();
        assert_eq!(pattern, expect);
    }

    fn check_result(psi: &MultiTensor, r: &LuNormalFormResult, zero_tol: f64) {
        assert_eq!(r.status, LuStatus::Converged);
        let norm = psi.norm();
        // norm preserved
        assert!((r.psi_nf.norm() - norm).abs() <= 1e-12 * norm);
        // replay
        let replay = psi.apply_all(&r.unitaries).unwrap();
        let diff2: f64 = replay
            .data()
            .iter()
            .zip(r.psi_nf.data().iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        assert!(diff2.sqrt() <= 1e-8 * norm, "replay deviation {:.3e}", diff2.sqrt());
        // pattern
        assert!(
            r.max_pattern_residual() <= zero_tol * norm,
            "pattern residual {:.3e}",
            r.max_pattern_residual()
        );
        // pivot ascent
        for level in &r.pivot_history {
            for w in level.windows(2) {
                assert!(w[1] >= w[0] - 1e-12 * norm);
            }
        }
        // designated entries (all other parties at their top index) are real
        // and non-negative
        let dims = r.psi_nf.dims().to_vec();
        for k in 0..dims.len() {
            for i in 0..dims[k] {
                let mut idx: Vec<usize> = dims.iter().map(|&n| n - 1).collect();
                idx[k] = i;
                let z = r.psi_nf.get(&idx).unwrap();
                assert!(
                    z.im.abs() <= zero_tol * norm && z.re >= -zero_tol * norm,
                    "designated entry {idx:?} = {z:?} not real non-negative"
                );
            }
        }
    }

    #[test]
    fn bipartite_normal_form_is_the_svd() {
        let mut rng = TestRng::seed_from_u64(201);
        for dims in [vec![2usize, 2usize], vec![3, 3], vec![4, 3]] {
            let psi = random_pure(&dims, &mut rng);
            let r = lu_normal_form(&psi, &LuConfig::default()).unwrap();
            check_result(&psi, &r, 1e-8);
            let m = psi.unfold(0).unwrap();
            let svals = svd(&m).s;
            let k = dims[0].min(dims[1]);
            let mut diag: Vec<f64> = (0..k)
                .map(|i| {
                    let mut idx = vec![0usize; 2];
                    idx[0] = i;
                    idx[1] = i;
                    r.psi_nf.get(&idx).unwrap()
                })
                .map(|z| {
                    assert!(z.im.abs() < 1e-10, "diagonal should be real");
                    assert!(z.re > -1e-10, "diagonal should be non-negative");
                    z.norm()
                })
                .collect();
            diag.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (d, s) in diag.iter().zip(svals.iter()) {
                assert!((d - s).abs() < 1e-10, "diag {d} vs singular value {s}");
            }
        }
    }

    #[test]
    fn three_qubit_pattern_and_reality_count() {
        let mut rng = TestRng::seed_from_u64(203);
        for _ in 0..10 {
            let psi = random_pure(&[2, 2, 2], &mut rng);
            let r = lu_normal_form(&psi, &LuConfig::default()).unwrap();
            check_result(&psi, &r, 1e-8);
            // Of the five non-pattern entries, at least four are real
            // non-negative (the Acin-form count).
            let non_pattern = [
                [0usize, 0, 0],
                [0, 1, 1],
                [1, 0, 1],
                [1, 1, 0],
                [1, 1, 1],
            ];
            let real_count = non_pattern
                .iter()
                .filter(|idx| {
                    let z = r.psi_nf.get(&idx[..]).unwrap();
                    z.im.abs() <= 1e-8 && z.re >= -1e-8
                })
                .count();
            assert!(real_count >= 4, "only {real_count} real entries");
        }
    }

    #[test]
    fn three_qutrit_pattern() {
        let mut rng = TestRng::seed_from_u64(207);
        let psi = random_pure(&[3, 3, 3], &mut rng);
        let r = lu_normal_form(&psi, &LuConfig::default()).unwrap();
        check_result(&psi, &r, 1e-8);
        assert_eq!(r.zero_pattern_report.len(), 9);
    }

    #[test]
    fn n22_pattern() {
        let mut rng = TestRng::seed_from_u64(211);
        let psi = random_pure(&[6, 2, 2], &mut rng);
        let r = lu_normal_form(&psi, &LuConfig::default()).unwrap();
        check_result(&psi, &r, 1e-8);
        assert_eq!(r.zero_pattern_report.len(), 16);
    }

    #[test]
    fn fingerprints_distinguish_ghz_from_w() {
        let ghz = states::make(CanonicalState::Ghz { parties: 3 }, true).unwrap();
        let w = states::make(CanonicalState::W, true).unwrap();
        let fg = fingerprint(&ghz).unwrap();
        let fw = fingerprint(&w).unwrap();
        // Unfolding spectra: {1/√2, 1/√2} vs {√(2/3), √(1/3)}.
        assert!((fg.unfold_spectra[0][0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((fw.unfold_spectra[0][0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(fingerprint_distance(&fg, &fw) > 1e-2);
    }

    #[test]
    fn probe_identical_states() {
        let mut rng = TestRng::seed_from_u64(213);
        let psi = random_pure(&[2, 2, 2], &mut rng);
        let report = lu_equivalence_probe(&psi, &psi, 0, 1).unwrap();
        assert_eq!(report.verdict, EquivalenceVerdict::EquivalentLikely);
        assert_eq!(report.best_match_residual.unwrap(), 0.0);
    }

    #[test]
    fn probe_lu_dressed_pair() {
        let mut rng = TestRng::seed_from_u64(217);
        let psi = random_pure(&[2, 2, 2], &mut rng);
        let dressing =
            LocalOperatorSet::new(random_unitary_set(&[2, 2, 2], &mut rng), OpFlavor::Unitary)
                .unwrap();
        let psi2 = psi.apply_all(&dressing).unwrap();
        let report = lu_equivalence_probe(&psi, &psi2, 4, 5).unwrap();
        assert_eq!(report.verdict, EquivalenceVerdict::EquivalentLikely);
    }

    #[test]
    fn probe_ghz_vs_w_is_inequivalent() {
        let ghz = states::make(CanonicalState::Ghz { parties: 3 }, true).unwrap();
        let w = states::make(CanonicalState::W, true).unwrap();
        let report = lu_equivalence_probe(&ghz, &w, 2, 7).unwrap();
        assert_eq!(report.verdict, EquivalenceVerdict::Inequivalent);
    }

    #[test]
    fn probe_rejects_unequal_dims() {
        let a = MultiTensor::zeros(vec![2, 2]).unwrap();
        let b = MultiTensor::zeros(vec![2, 3]).unwrap();
        assert!(lu_equivalence_probe(&a, &b, 0, 0).is_err());
    }

    #[test]
    fn phase_fit_recovers_diagonal_phases() {
        let mut rng = TestRng::seed_from_u64(219);
        let psi = random_pure(&[2, 3, 2], &mut rng);
        // Dress with per-party diagonal phases; the fit should drive the
        // residual to zero.
        let mut dressed = psi.clone();
        for (k, &n) in psi.dims().iter().enumerate() {
            let mut d = Array2::from_elem((n, n), C64::new(0.0, 0.0));
            for i in 0..n {
                let angle = 0.3 + 1.1 * (k as f64) + 0.7 * (i as f64);
                d[[i, i]] = C64::from_polar(1.0, angle);
            }
            dressed = dressed.apply_one(k, &d).unwrap();
        }
        let res = phase_fit_residual(&dressed, &psi).unwrap();
        assert!(res < 1e-7, "residual {res:.3e}");
    }

    #[test]
    fn fingerprints_agree_between_state_and_normal_form() {
        let mut rng = TestRng::seed_from_u64(223);
        let psi = random_pure(&[2, 2, 3], &mut rng);
        let r = lu_normal_form(&psi, &LuConfig::default()).unwrap();
        let d = fingerprint_distance(&fingerprint(&psi).unwrap(), &fingerprint(&r.psi_nf).unwrap());
        assert!(d < 1e-10, "fingerprint drift {d:.3e}");
    }
}
