use asm_eval::metrics::{aggregate, binomial, exec_corr_rate, success_at_1, success_at_1_exact, Counts, GroupBy, GroupKey, MetricsSummary, Observation};
use asm_eval::{TargetArch, VerdictKind};
use num_rational::Ratio;
use proptest::prelude::*;

struct Obs {
    case: String,
    kind: VerdictKind,
}

impl Observation for Obs {
    fn case_id(&self) -> &str {
        &self.case
    }
    fn model_name(&self) -> &str {
        "m"
    }
    fn arch(&self) -> TargetArch {
        TargetArch::X86_64
    }
    fn prompt_version(&self) -> &str {
        "v1"
    }
    fn verdict_kind(&self) -> VerdictKind {
        self.kind
    }
}

fn kind() -> impl Strategy<Value = VerdictKind> {
    prop_oneof![Just(VerdictKind::Success), Just(VerdictKind::CompileError), Just(VerdictKind::ExecError)]
}

proptest! {
    #[test]
    fn binomial_form_is_the_plain_ratio((n, c) in (1u64..=10_000).prop_flat_map(|n| (Just(n), 0..=n))) {
        prop_assert_eq!(success_at_1_exact(c, n).unwrap(), Ratio::new(u128::from(c), u128::from(n)));
        prop_assert_eq!(success_at_1(c, n).unwrap(), c as f64 / n as f64);
    }

    #[test]
    fn rates_stay_in_the_unit_interval(obs in proptest::collection::vec(("[a-c]", kind()), 1..60)) {
        let obs: Vec<Obs> = obs.into_iter().map(|(case, kind)| Obs { case, kind }).collect();
        for g in aggregate(&obs, GroupBy::CASE) {
            prop_assert!(g.n_succ <= g.n_exec && g.n_exec <= g.n_total);
            prop_assert!((0.0..=1.0).contains(&g.success_at_1));
            if let Some(r) = g.exec_corr_rate {
                prop_assert!((0.0..=1.0).contains(&r));
                prop_assert!(r >= g.success_at_1);
            }
        }
    }

    #[test]
    fn per_case_groups_sum_to_the_overall_group(obs in proptest::collection::vec(("[a-e]", kind()), 1..80)) {
        let obs: Vec<Obs> = obs.into_iter().map(|(case, kind)| Obs { case, kind }).collect();
        let mut total = Counts::default();
        for g in aggregate(&obs, GroupBy::CASE) {
            total.merge(&g.counts());
        }
        let overall = aggregate(&obs, GroupBy::OVERALL);
        prop_assert_eq!(overall.len(), 1);
        prop_assert_eq!(overall[0].counts(), total);
    }

    #[test]
    fn aggregation_ignores_record_order(mut obs in proptest::collection::vec(("[a-c]", kind()), 1..40), seed in any::<u64>()) {
        let before = aggregate(&obs.iter().map(|(c, k)| Obs { case: c.clone(), kind: *k }).collect::<Vec<_>>(), GroupBy::CASE);
        let n = obs.len();
        obs.rotate_left((seed % n as u64) as usize);
        obs.reverse();
        let after = aggregate(&obs.iter().map(|(c, k)| Obs { case: c.clone(), kind: *k }).collect::<Vec<_>>(), GroupBy::CASE);
        prop_assert_eq!(before, after);
    }

    #[test]
    fn first_binomial_coefficient_is_n(n in 0u64..1_000_000) {
        prop_assert_eq!(binomial(n, 1), Some(u128::from(n)));
        prop_assert_eq!(binomial(n, n), Some(1));
    }
}

#[test]
fn boundaries_are_exact() {
    for n in [1u64, 2, 7, 10_000] {
        assert_eq!(success_at_1(0, n).unwrap(), 0.0);
        assert_eq!(success_at_1(n, n).unwrap(), 1.0);
    }
    assert!(success_at_1(0, 0).is_err());
    assert!(success_at_1(3, 2).is_err());
    assert_eq!(exec_corr_rate(0, 0).unwrap(), None);
}

#[test]
fn summary_rejects_impossible_counts() {
    let c = Counts { n_total: 2, n_exec: 3, n_succ: 1 };
    assert!(MetricsSummary::from_counts(GroupKey::default(), c).is_err());
}
