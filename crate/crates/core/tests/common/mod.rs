#![allow(dead_code)]

use market_mech::{make_instance, AgentType, Instance, Money, TimePoint};
use proptest::prelude::*;

/// Valid instances with heavy cost and time ties. Costs are multiples of
/// `1/denom`; each strictly costlier cost group is strictly faster than every
/// cheaper one, while times inside a group are arbitrary.
pub fn instance_strategy(max_n: usize, denom: u64) -> impl Strategy<Value = Instance> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                proptest::collection::vec(1..denom, n),
                proptest::collection::vec(0u64..3, n),
                proptest::collection::vec(0u64..=1, n),
            )
        })
        .prop_map(move |(mut costs, spreads, shuffle)| {
            costs.sort();
            let mut types = Vec::with_capacity(costs.len());
            let mut floor = 10 * costs.len() as u64 + 10;
            let mut group_min = floor;
            for (i, &c) in costs.iter().enumerate() {
                if i > 0 && c != costs[i - 1] {
                    floor = group_min;
                }
                let t = floor - 1 - spreads[i];
                group_min = group_min.min(t);
                types.push(AgentType::new(
                    Money::ratio(c, denom),
                    TimePoint::integer(t),
                ));
            }
            // Present agents in a scrambled order; canonicalization restores it.
            let mut scrambled = Vec::with_capacity(types.len());
            for (a, s) in types.into_iter().zip(shuffle) {
                if s == 1 {
                    scrambled.insert(0, a);
                } else {
                    scrambled.push(a);
                }
            }
            let deadline = TimePoint::integer(10 * costs.len() as u64 + 10);
            make_instance(scrambled, deadline).expect("generated instances are valid")
        })
}

/// A bucket scheme with `m` buckets, and agents whose time lies in a bucket
/// and whose cost equals that bucket's cost.
pub fn bucket_instance_strategy(
    max_n: usize,
    max_buckets: usize,
) -> impl Strategy<Value = (Instance, market_mech::rules::BucketScheme)> {
    use market_mech::rules::{Bucket, BucketScheme};
    (1..=max_buckets)
        .prop_flat_map(move |m| {
            (
                proptest::collection::btree_set(1u64..12, m),
                proptest::collection::vec((0..m, 0u64..3), 1..=max_n),
            )
        })
        .prop_map(|(cost_set, picks)| {
            let m = cost_set.len();
            // Bucket b (0 = slowest) spans times [10(m - b), 10(m - b) + 5].
            let costs: Vec<u64> = cost_set.into_iter().collect();
            let buckets: Vec<Bucket> = (0..m)
                .map(|b| {
                    let lo = 10 * (m - b) as u64;
                    Bucket {
                        t_lo: TimePoint::integer(lo),
                        t_hi: TimePoint::integer(lo + 5),
                        cost: Money::ratio(costs[b], 24),
                    }
                })
                .collect();
            let types = picks
                .iter()
                .map(|&(b, dt)| {
                    let lo = 10 * (m - b) as u64;
                    AgentType::new(Money::ratio(costs[b], 24), TimePoint::integer(lo + 2 * dt))
                })
                .collect();
            let scheme = BucketScheme::new(buckets).expect("valid scheme");
            let deadline = TimePoint::integer(10 * m as u64 + 5);
            (
                make_instance(types, deadline).expect("valid instance"),
                scheme,
            )
        })
}
