//! Sub-packetization lower bounds and the flexibility/bandwidth trade-off.

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::constructions::{plan_t_list, CodePlan};
use crate::error::{Error, Result};
use crate::factor::primes;

/// A dimension together with the exclusion-set sizes of the groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundQuery {
    pub k: usize,
    t_list: Vec<usize>,
}

impl BoundQuery {
    /// Sorts `t_list` ascending; every entry must be at least 1.
    pub fn new(k: usize, mut t_list: Vec<usize>) -> Result<Self> {
        if k == 0 || t_list.is_empty() || t_list.contains(&0) {
            return Err(Error::InvalidInput("bound query needs k ≥ 1 and t_i ≥ 1".into()));
        }
        t_list.sort_unstable();
        Ok(Self { k, t_list })
    }

    /// Every group has flexibility `t`; enough groups are listed that w = ⌊k/t⌋.
    pub fn uniform(k: usize, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidInput("t must be at least 1".into()));
        }
        Self::new(k, vec![t; k / t + 1])
    }

    /// The query matching a built plan's groups.
    pub fn for_plan(plan: &CodePlan) -> Result<Self> {
        Self::new(plan.k, plan_t_list(plan))
    }

    pub fn t_list(&self) -> &[usize] {
        &self.t_list
    }

    /// Largest w with t_1 + … + t_w ≤ k.
    pub fn w(&self) -> usize {
        let mut sum = 0;
        self.t_list
            .iter()
            .take_while(|&&t| {
                sum += t;
                sum <= self.k
            })
            .count()
    }
}

/// Product of the first `count` primes.
pub fn primorial(count: usize) -> BigUint {
    primes().take(count).fold(BigUint::from(1u32), |acc, p| acc * p)
}

/// Smallest sub-packetization any scalar MDS code with these exclusion sets
/// can have under optimal repair: the product of the first w − 1 primes.
pub fn min_subpacketization(query: &BoundQuery) -> BigUint {
    primorial(query.w().saturating_sub(1))
}

/// Product of the first k − 1 primes.
pub fn conventional_lower_bound(k: usize) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    Ok(primorial(k - 1))
}

/// Exact bits per repaired bit.
pub fn normalized_bandwidth(bits: u64, l_bits: u64) -> Result<Ratio<u64>> {
    if l_bits == 0 {
        return Err(Error::InvalidInput("L must be positive".into()));
    }
    Ok(Ratio::new(bits, l_bits))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffRow {
    pub t: usize,
    pub l_min: BigUint,
    pub d_max: usize,
    pub beta_bar_min: Ratio<u64>,
}

/// One row per t in 1..=min(k, n − k).
pub fn tradeoff_table(n: usize, k: usize) -> Result<Vec<TradeoffRow>> {
    if k == 0 || n <= k {
        return Err(Error::InvalidInput(format!("need n > k ≥ 1, got n={n} k={k}")));
    }
    (1..=k.min(n - k))
        .map(|t| {
            let d_max = n - t;
            Ok(TradeoffRow {
                t,
                l_min: min_subpacketization(&BoundQuery::uniform(k, t)?),
                d_max,
                beta_bar_min: Ratio::new(d_max as u64, (d_max - k + 1) as u64),
            })
        })
        .collect()
}

pub const TRADEOFF_CSV_HEADER: &str = "t,L_min,d_max,beta_bar_min_num,beta_bar_min_den";

pub fn tradeoff_csv(rows: &[TradeoffRow]) -> String {
    let mut out = String::from(TRADEOFF_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.t,
            r.l_min,
            r.d_max,
            r.beta_bar_min.numer(),
            r.beta_bar_min.denom()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn quoted_bounds() {
        let b = |k, t| min_subpacketization(&BoundQuery::uniform(k, t).unwrap());
        assert_eq!(b(8, 1), big(510510));
        assert_eq!(b(9, 1), big(9699690));
        assert_eq!(b(10, 1), big(223092870));
        assert_eq!(b(3, 3), big(1));
        assert_eq!(b(3, 7), big(1));
        assert_eq!(conventional_lower_bound(1).unwrap(), big(1));
        assert_eq!(conventional_lower_bound(5).unwrap(), big(210));
        assert_eq!(conventional_lower_bound(8).unwrap(), big(510510));
        assert!(conventional_lower_bound(0).is_err());
    }

    #[test]
    fn w_uses_sorted_flexibilities() {
        let q = BoundQuery::new(8, vec![4, 1, 2, 3]).unwrap();
        assert_eq!(q.t_list(), &[1, 2, 3, 4]);
        assert_eq!(q.w(), 3);
        assert_eq!(min_subpacketization(&q), big(6));
        assert_eq!(BoundQuery::new(8, vec![9]).unwrap().w(), 0);
        assert_eq!(min_subpacketization(&BoundQuery::new(8, vec![9]).unwrap()), big(1));
        assert!(BoundQuery::new(8, vec![0, 1]).is_err());
    }

    #[test]
    fn conventional_matches_unit_flexibility() {
        for k in 1..=20 {
            let ones = BoundQuery::new(k, vec![1; k + 3]).unwrap();
            assert_eq!(min_subpacketization(&ones), conventional_lower_bound(k).unwrap(), "k={k}");
        }
    }

    #[test]
    fn tradeoff_14_10() {
        let rows = tradeoff_table(14, 10).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].l_min, big(223092870));
        assert_eq!(rows[0].beta_bar_min, Ratio::new(13, 4));
        assert_eq!(rows[1].l_min, big(210));
        assert_eq!(rows[2].l_min, big(6));
        assert_eq!(rows[3].l_min, big(2));
        assert_eq!(rows[3].beta_bar_min, Ratio::from_integer(10));
        assert_eq!(rows[3].d_max, 10);
        let csv = tradeoff_csv(&rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], TRADEOFF_CSV_HEADER);
        assert_eq!(lines[1], "1,223092870,13,13,4");
        assert_eq!(lines[4], "4,2,10,10,1");
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn tradeoff_12_8_t3() {
        let rows = tradeoff_table(12, 8).unwrap();
        assert_eq!(rows[2].beta_bar_min, Ratio::new(9, 2));
        assert!(tradeoff_table(5, 5).is_err());
        assert!(tradeoff_table(5, 0).is_err());
    }

    #[test]
    fn normalized_values() {
        assert_eq!(normalized_bandwidth(10395, 2310).unwrap(), Ratio::new(9, 2));
        assert_eq!(normalized_bandwidth(300, 60).unwrap(), Ratio::from_integer(5));
        assert_eq!(normalized_bandwidth(77, 77).unwrap(), Ratio::from_integer(1));
        assert!(normalized_bandwidth(1, 0).is_err());
    }

    #[test]
    fn bound_fits_big_k() {
        // product of the first 29 primes does not fit in 64 bits
        let b = conventional_lower_bound(30).unwrap();
        assert!(b.bits() > 64);
    }

    proptest! {
        #[test]
        fn tradeoff_monotone(k in 1usize..25, extra in 1usize..25) {
            let n = k + extra;
            let rows = tradeoff_table(n, k).unwrap();
            prop_assert_eq!(rows.len(), k.min(n - k));
            for w in rows.windows(2) {
                prop_assert!(w[1].l_min <= w[0].l_min);
                prop_assert!(w[1].beta_bar_min > w[0].beta_bar_min);
                prop_assert!(w[1].d_max < w[0].d_max);
            }
            for r in &rows {
                prop_assert!(r.beta_bar_min >= Ratio::from_integer(1));
            }
        }
    }
}
