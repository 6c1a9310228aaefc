use crate::model::{AgentType, SimResult, Threshold};

/// Which clique unhappiness test to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CliqueRule {
    /// An agent excludes itself: type X is unhappy iff
    /// `q·(C_X − 1) < p·(C_A + C_B − 1)`; a lone clique agent is happy.
    #[default]
    Exact,
    /// The shortcut `C_X < τ·(C_A + C_B)`, which drops self-exclusion.
    WithoutSelfExclusion,
}

/// Whether agents of a type holding `same` of the `total` clique agents are
/// unhappy. Meaningless (and false) when `same == 0`.
#[inline]
pub fn clique_type_unhappy(same: u64, total: u64, tau: Threshold, rule: CliqueRule) -> bool {
    if same == 0 {
        return false;
    }
    let p = u64::from(tau.numerator());
    let q = u64::from(tau.denominator());
    match rule {
        CliqueRule::Exact => total >= 2 && q * (same - 1) < p * (total - 1),
        CliqueRule::WithoutSelfExclusion => q * same < p * total,
    }
}

/// Number of unhappy agents in a clique holding `c_a` A and `c_b` B agents.
pub fn clique_unhappy(c_a: u64, c_b: u64, tau: Threshold) -> u64 {
    clique_unhappy_with(c_a, c_b, tau, CliqueRule::Exact)
}

pub fn clique_unhappy_with(c_a: u64, c_b: u64, tau: Threshold, rule: CliqueRule) -> u64 {
    let total = c_a + c_b;
    let mut unhappy = 0;
    if clique_type_unhappy(c_a, total, tau, rule) {
        unhappy += c_a;
    }
    if clique_type_unhappy(c_b, total, tau, rule) {
        unhappy += c_b;
    }
    unhappy
}

/// Decide a pure clique in O(1): moves inside a clique never change any
/// agent's neighborhood composition, so the answer is either zero moves or
/// never.
pub fn decide_clique(a: u64, b: u64, tau: Threshold) -> SimResult {
    if clique_unhappy(a, b, tau) == 0 {
        SimResult::Satisfied(0)
    } else {
        SimResult::Unsatisfiable
    }
}

pub(crate) fn count_of(t: AgentType, c_a: u64, c_b: u64) -> u64 {
    match t {
        AgentType::A => c_a,
        AgentType::B => c_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{count_unhappy, Configuration};
    use crate::topology::build_clique;

    fn tau(p: u32, q: u32) -> Threshold {
        Threshold::new(p, q).unwrap()
    }

    #[test]
    fn decisions() {
        assert_eq!(decide_clique(4, 3, tau(1, 3)), SimResult::Satisfied(0));
        assert_eq!(decide_clique(2, 2, tau(1, 2)), SimResult::Unsatisfiable);
        assert_eq!(decide_clique(5, 0, tau(1, 1)), SimResult::Satisfied(0));
        assert_eq!(decide_clique(1, 0, tau(1, 1)), SimResult::Satisfied(0));
    }

    #[test]
    fn unhappy_tallies() {
        assert_eq!(clique_unhappy(4, 3, tau(1, 2)), 3);
        assert_eq!(clique_unhappy(9, 0, tau(2, 3)), 0);
        assert_eq!(clique_unhappy(3, 3, tau(1, 2)), 6);
    }

    #[test]
    fn rules_differ_on_ties() {
        // 3A/3B at tau = 1/2: exact test sees 2/5 < 1/2; the shortcut sees 3/6.
        assert_eq!(
            clique_unhappy_with(3, 3, tau(1, 2), CliqueRule::WithoutSelfExclusion),
            0
        );
        assert_eq!(
            clique_unhappy_with(3, 2, tau(1, 2), CliqueRule::WithoutSelfExclusion),
            2
        );
    }

    #[test]
    fn matches_full_scan_on_small_cliques() {
        for p in 0..=4 {
            let t = tau(p, 4);
            for a in 0..7usize {
                for b in 0..7usize {
                    if a + b == 0 {
                        continue;
                    }
                    let topo = build_clique(a + b).unwrap();
                    let cells: String = "A".repeat(a) + &"B".repeat(b);
                    let config: Configuration = cells.parse().unwrap();
                    assert_eq!(
                        clique_unhappy(a as u64, b as u64, t) as usize,
                        count_unhappy(&config, &topo, t)
                    );
                }
            }
        }
    }
}
