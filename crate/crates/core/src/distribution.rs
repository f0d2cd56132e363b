//! Comparing history distributions.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::Result;
use crate::exec::Distribution;
use crate::protocol::{History, Protocol};

/// Half the L1 distance.
pub fn tv_distance<K: Ord>(a: &BTreeMap<K, f64>, b: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, pa) in a {
        sum += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, pb) in b {
        if !a.contains_key(k) {
            sum += pb.abs();
        }
    }
    sum / 2.0
}

/// Probability that the verifier accepts.
pub fn game_value(protocol: &Protocol, dist: &Distribution) -> Result<f64> {
    let mut v = 0.0;
    for (h, p) in dist {
        if protocol.accepts(h)? {
            v += p;
        }
    }
    Ok(v)
}

/// Push-forward of `dist` along `f`.
pub fn marginal<K: Ord>(dist: &Distribution, f: impl Fn(&History) -> K) -> BTreeMap<K, f64> {
    let mut out = BTreeMap::new();
    for (h, p) in dist {
        *out.entry(f(h)).or_insert(0.0) += p;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of `counts` against `expected`. Cells with an
/// expected count below 5 are pooled into one cell.
pub fn chi_square<K: Ord>(counts: &BTreeMap<K, u64>, expected: &BTreeMap<K, f64>) -> ChiSquare {
    let n: u64 = counts.values().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (k, p) in expected {
        let e = p * nf;
        let o = counts.get(k).copied().unwrap_or(0) as f64;
        if e < 5.0 {
            pooled_obs += o;
            pooled_exp += e;
        } else {
            cells.push((o, e));
        }
    }
    let stray: u64 = counts
        .iter()
        .filter(|(k, _)| !expected.contains_key(k))
        .map(|(_, c)| c)
        .sum();
    pooled_obs += stray as f64;
    if pooled_exp > 0.0 || pooled_obs > 0.0 {
        cells.push((pooled_obs, pooled_exp));
    }
    let mut statistic = 0.0;
    for &(o, e) in &cells {
        if e > 0.0 {
            statistic += (o - e).powi(2) / e;
        } else if o > 0.0 {
            statistic = f64::INFINITY;
        }
    }
    let dof = cells.len().saturating_sub(1);
    let p_value = if statistic.is_infinite() {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        chi.sf(statistic)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

/// Pearson test that two samples come from the same distribution.
/// Categories seen fewer than 10 times in total are pooled.
pub fn chi_square_homogeneity<K: Ord + Clone>(
    a: &BTreeMap<K, u64>,
    b: &BTreeMap<K, u64>,
) -> ChiSquare {
    let (na, nb) = (
        a.values().sum::<u64>() as f64,
        b.values().sum::<u64>() as f64,
    );
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for k in keys {
        let (x, y) = (
            a.get(k).copied().unwrap_or(0) as f64,
            b.get(k).copied().unwrap_or(0) as f64,
        );
        if x + y < 10.0 {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            cells.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let n = na + nb;
    let mut statistic = 0.0;
    if na > 0.0 && nb > 0.0 {
        for &(x, y) in &cells {
            let col = x + y;
            let (ea, eb) = (na * col / n, nb * col / n);
            statistic += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
        }
    }
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive degrees of freedom")
            .sf(statistic)
    };
    ChiSquare {
        statistic,
        dof,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let a: BTreeMap<u8, f64> = [(0, 0.5), (1, 0.5)].into();
        let b: BTreeMap<u8, f64> = [(0, 1.0)].into();
        assert!((tv_distance(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(tv_distance(&a, &a), 0.0);
        let c: BTreeMap<u8, f64> = [(2, 1.0)].into();
        assert!((tv_distance(&b, &c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chi_square_accepts_fair_and_rejects_biased() {
        let expected: BTreeMap<u8, f64> = [(0, 0.5), (1, 0.5)].into();
        let fair: BTreeMap<u8, u64> = [(0, 5030), (1, 4970)].into();
        assert!(chi_square(&fair, &expected).p_value > 0.1);
        let biased: BTreeMap<u8, u64> = [(0, 6000), (1, 4000)].into();
        assert!(chi_square(&biased, &expected).p_value < 1e-10);
        let impossible: BTreeMap<u8, u64> = [(0, 10), (7, 1)].into();
        let one: BTreeMap<u8, f64> = [(0, 1.0)].into();
        assert_eq!(chi_square(&impossible, &one).p_value, 0.0);
    }

    #[test]
    fn homogeneity_of_identical_and_disjoint_samples() {
        let a: BTreeMap<u8, u64> = [(0, 500), (1, 500)].into();
        assert_eq!(chi_square_homogeneity(&a, &a).statistic, 0.0);
        let b: BTreeMap<u8, u64> = [(0, 1000)].into();
        assert!(chi_square_homogeneity(&a, &b).p_value < 1e-12);
    }
}
