mod common;

use std::collections::BTreeSet;

use dynsteiner::oracle::{dual_lower_bound, opt_steiner, opt_steiner_enumerate, OracleMethod};
use dynsteiner::{AmortizedDeleter, VertexId};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dreyfus_wagner_matches_enumeration(seed in any::<u64>(), n in 1usize..9, mask in any::<u32>()) {
        let m = common::random_metric(seed, n, 40);
        let t: BTreeSet<VertexId> = m.ids().iter().copied().filter(|v| mask >> (v.0 - 1) & 1 == 1).collect();
        let dw = opt_steiner(&m, &t).unwrap();
        let en = opt_steiner_enumerate(&m, &t).unwrap();
        prop_assert_eq!(dw.cost, en.cost);
        prop_assert_eq!((dw.method, en.method), (OracleMethod::DreyfusWagner, OracleMethod::Enumeration));
        for r in [&dw, &en] {
            prop_assert_eq!(r.tree.cost(), r.cost);
            if t.len() > 1 {
                prop_assert!(r.tree.is_acyclic());
                let covered = r.tree.vertices();
                prop_assert!(t.is_subset(&covered));
                prop_assert!(r.tree.spans_as_tree(&covered));
            }
        }
    }

    #[test]
    fn lower_bound_below_opt(seed in any::<u64>(), n in 2usize..14) {
        let m = common::grid_metric(seed, n);
        let mut st = AmortizedDeleter::new(m.clone());
        for v in common::deletion_order(seed, n).into_iter().take(n - 1) {
            st.delete(v).unwrap();
            let alive = st.alive();
            let opt = opt_steiner(&m, &alive).unwrap().cost as u128;
            prop_assert!(dual_lower_bound(st.clustering()).0 <= 4 * opt);
        }
    }
}
