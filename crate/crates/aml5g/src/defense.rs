//! Proactive decision-flipping defense.
//!
//! The defender deliberately flips a small ratio of its highest-confidence
//! decisions while the adversary is collecting training observations:
//! authentication grants in scenario 2, transmit decisions in scenario 1.
//! Decisions outside the flippable class are never altered, so the
//! defender's misdetection rate is untouched.

use rand_chacha::ChaCha8Rng;

pub use crate::harness::defense_tables::{
    evaluate_defense_scenario1, evaluate_defense_scenario2, Defense1Row, Defense2Row,
};

/// How flip candidates are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    TopConfidence,
}

/// Which decision class may be flipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Flip "intended UE" authentications (label 1) to denials.
    AuthDecisions,
    /// Flip "idle, transmit" decisions (label 0 under idle/busy semantics)
    /// to silence.
    TransmitDecisions,
}

impl Scope {
    /// The label value that marks a decision as flippable.
    pub fn flippable_label(&self) -> u8 {
        match self {
            Scope::AuthDecisions => 1,
            Scope::TransmitDecisions => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefensePolicy {
    /// Ratio of defense actions to flippable decision instances.
    pub p_d: f64,
    pub selection: Selection,
    pub scope: Scope,
}

impl DefensePolicy {
    pub fn new(p_d: f64, scope: Scope) -> Result<Self, String> {
        if !(0.0..=1.0).contains(&p_d) {
            return Err(format!("p_d must lie in [0, 1], got {p_d}"));
        }
        Ok(Self {
            p_d,
            selection: Selection::TopConfidence,
            scope,
        })
    }
}

/// Outcome of applying the defense to a batch of decisions.
#[derive(Debug, Clone)]
pub struct DefenseOutcome {
    /// The decision list with the selected labels flipped.
    pub decisions: Vec<(u8, f64)>,
    /// Indices that were flipped, ascending.
    pub flip_indices: Vec<usize>,
}

/// Audit record kept across defense runs: every flip with the label it had
/// before flipping, so scope safety is checkable after the fact.
#[derive(Debug, Clone, Default)]
pub struct FlipAudit {
    pub entries: Vec<(usize, u8)>,
}

impl FlipAudit {
    pub fn record(&mut self, outcome: &DefenseOutcome, original: &[(u8, f64)]) {
        for &idx in &outcome.flip_indices {
            self.entries.push((idx, original[idx].0));
        }
    }

    pub fn merge(&mut self, other: FlipAudit) {
        self.entries.extend(other.entries);
    }

    /// True when every recorded flip had the flippable label for `scope`.
    pub fn scope_safe(&self, scope: Scope) -> bool {
        self.entries
            .iter()
            .all(|&(_, label)| label == scope.flippable_label())
    }
}

/// Flips the ceil(p_d * N) highest-confidence flippable decisions, where N
/// counts the flippable decisions in the batch. Ties break toward the lower
/// index. The random stream is accepted for interface stability but the
/// top-confidence selection is deterministic.
pub fn apply_defense(
    decisions: &[(u8, f64)],
    policy: &DefensePolicy,
    _rng: &mut ChaCha8Rng,
) -> DefenseOutcome {
    let flippable_label = policy.scope.flippable_label();
    let mut candidates: Vec<(usize, f64)> = decisions
        .iter()
        .enumerate()
        .filter(|(_, (label, _))| *label == flippable_label)
        .map(|(i, (_, conf))| (i, *conf))
        .collect();
    let n_flips = (policy.p_d * candidates.len() as f64).ceil() as usize;
    // Descending confidence, ties toward the lower index.
    candidates.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut flip_indices: Vec<usize> =
        candidates.iter().take(n_flips).map(|&(i, _)| i).collect();
    flip_indices.sort_unstable();

    let mut flipped = decisions.to_vec();
    for &i in &flip_indices {
        flipped[i].0 ^= 1;
    }
    DefenseOutcome {
        decisions: flipped,
        flip_indices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::StreamFactory;

    fn rng() -> ChaCha8Rng {
        StreamFactory::new(70).stream("defense")
    }

    #[test]
    fn zero_ratio_is_identity() {
        let decisions = vec![(1u8, 0.9), (0, 0.8), (1, 0.7)];
        let policy = DefensePolicy::new(0.0, Scope::AuthDecisions).unwrap();
        let out = apply_defense(&decisions, &policy, &mut rng());
        assert_eq!(out.decisions, decisions);
        assert!(out.flip_indices.is_empty());
    }

    #[test]
    fn full_ratio_flips_every_flippable() {
        let decisions = vec![(1u8, 0.9), (1, 0.6), (1, 0.99)];
        let policy = DefensePolicy::new(1.0, Scope::AuthDecisions).unwrap();
        let out = apply_defense(&decisions, &policy, &mut rng());
        assert_eq!(out.flip_indices, vec![0, 1, 2]);
        assert!(out.decisions.iter().all(|&(l, _)| l == 0));
    }

    /// Sort oracle from the operation contract: ten intended decisions,
    /// nine at 0.91..0.99 and one at 0.6; p_d = 0.2 flips exactly the two
    /// highest-confidence ones.
    #[test]
    fn top_confidence_selection_matches_sort_oracle() {
        let mut decisions: Vec<(u8, f64)> =
            (0..9).map(|i| (1u8, 0.91 + 0.01 * i as f64)).collect();
        decisions.push((1, 0.6));
        let policy = DefensePolicy::new(0.2, Scope::AuthDecisions).unwrap();
        let out = apply_defense(&decisions, &policy, &mut rng());
        // ceil(0.2 * 10) = 2 flips: confidences 0.99 (idx 8) and 0.98 (idx 7).
        assert_eq!(out.flip_indices, vec![7, 8]);
    }

    #[test]
    fn flip_count_is_exactly_ceil() {
        for (n_flippable, p_d, expected) in
            [(10usize, 0.25, 3usize), (7, 0.5, 4), (3, 0.1, 1), (5, 0.0, 0)]
        {
            let decisions: Vec<(u8, f64)> = (0..n_flippable)
                .map(|i| (1u8, 0.5 + i as f64 * 0.01))
                .collect();
            let policy = DefensePolicy::new(p_d, Scope::AuthDecisions).unwrap();
            let out = apply_defense(&decisions, &policy, &mut rng());
            assert_eq!(out.flip_indices.len(), expected, "n={n_flippable} p_d={p_d}");
        }
    }

    #[test]
    fn scope_safety_non_flippable_untouched() {
        let decisions = vec![(0u8, 0.99), (1, 0.51), (0, 0.98), (1, 0.52)];
        let policy = DefensePolicy::new(1.0, Scope::AuthDecisions).unwrap();
        let out = apply_defense(&decisions, &policy, &mut rng());
        assert_eq!(out.flip_indices, vec![1, 3]);
        assert_eq!(out.decisions[0], (0, 0.99));
        assert_eq!(out.decisions[2], (0, 0.98));

        let mut audit = FlipAudit::default();
        audit.record(&out, &decisions);
        assert!(audit.scope_safe(Scope::AuthDecisions));
    }

    #[test]
    fn transmit_scope_flips_idle_decisions() {
        let decisions = vec![(0u8, 0.9), (1, 0.95), (0, 0.6)];
        let policy = DefensePolicy::new(0.5, Scope::TransmitDecisions).unwrap();
        let out = apply_defense(&decisions, &policy, &mut rng());
        // Two flippable (idle) decisions; ceil(0.5 * 2) = 1; top conf is idx 0.
        assert_eq!(out.flip_indices, vec![0]);
        assert_eq!(out.decisions[0].0, 1);
    }

    #[test]
    fn deterministic_given_inputs() {
        let decisions: Vec<(u8, f64)> = (0..20)
            .map(|i| ((i % 2) as u8, 0.5 + (i as f64) * 0.02))
            .collect();
        let policy = DefensePolicy::new(0.3, Scope::AuthDecisions).unwrap();
        let a = apply_defense(&decisions, &policy, &mut rng());
        let b = apply_defense(&decisions, &policy, &mut rng());
        assert_eq!(a.decisions, b.decisions);
        assert_eq!(a.flip_indices, b.flip_indices);
    }

    #[test]
    fn invalid_ratio_rejected() {
        assert!(DefensePolicy::new(1.5, Scope::AuthDecisions).is_err());
        assert!(DefensePolicy::new(-0.1, Scope::AuthDecisions).is_err());
    }
}
