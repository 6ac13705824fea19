use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Ranks `values` with 1 = best. Tied values share the mean of the ranks
/// they span.
pub fn rank_with_ties(values: &[f64], lower_is_better: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let cmp = values[a].total_cmp(&values[b]);
        if lower_is_better {
            cmp
        } else {
            cmp.reverse()
        }
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `ranks[d][m]`: rank of method `m` on dataset `d`.
    pub ranks: Vec<Vec<f64>>,
    /// Mean rank of each method across datasets.
    pub average: Vec<f64>,
}

/// Ranks methods per dataset on one metric and averages the ranks.
///
/// `cells` holds `(dataset, method, value)`; every method must appear
/// exactly once for every dataset.
pub fn average_rank_table(cells: &[(String, String, f64)], lower_is_better: bool) -> Result<RankTable> {
    let datasets: BTreeSet<&str> = cells.iter().map(|c| c.0.as_str()).collect();
    let methods: BTreeSet<&str> = cells.iter().map(|c| c.1.as_str()).collect();
    if cells.is_empty() {
        return Err(Error::IncompleteGrid("no cells to rank".into()));
    }
    let mut grid: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for (dataset, method, value) in cells {
        if grid.insert((dataset.as_str(), method.as_str()), *value).is_some() {
            return Err(Error::IncompleteGrid(format!("duplicate cell {dataset}/{method}")));
        }
    }

    let mut ranks = Vec::with_capacity(datasets.len());
    for &dataset in &datasets {
        let mut row = Vec::with_capacity(methods.len());
        for &method in &methods {
            let value = grid
                .get(&(dataset, method))
                .ok_or_else(|| Error::IncompleteGrid(format!("missing {dataset}/{method}")))?;
            row.push(*value);
        }
        ranks.push(rank_with_ties(&row, lower_is_better));
    }
    let average = (0..methods.len())
        .map(|m| ranks.iter().map(|r| r[m]).sum::<f64>() / ranks.len() as f64)
        .collect();

    Ok(RankTable {
        methods: methods.into_iter().map(String::from).collect(),
        datasets: datasets.into_iter().map(String::from).collect(),
        ranks,
        average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(d: &str, m: &str, v: f64) -> (String, String, f64) {
        (d.into(), m.into(), v)
    }

    #[test]
    fn simple_ranks() {
        assert_eq!(rank_with_ties(&[0.2, 0.5, 0.9], true), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank_with_ties(&[0.2, 0.5, 0.9], false), vec![3.0, 2.0, 1.0]);
        assert_eq!(rank_with_ties(&[0.4, 0.4, 0.1], true), vec![2.5, 2.5, 1.0]);
        assert_eq!(rank_with_ties(&[0.3, 0.3], true), vec![1.5, 1.5]);
    }

    #[test]
    fn averages_over_datasets() {
        // d1: a=0.1 b=0.2 c=0.3 -> 1 2 3
        // d2: a=0.5 b=0.4 c=0.4 -> 3 1.5 1.5
        // d3: a=0.0 b=0.9 c=0.8 -> 1 3 2
        // mean: a=5/3, b=6.5/3, c=6.5/3
        let cells = vec![
            cell("d1", "a", 0.1), cell("d1", "b", 0.2), cell("d1", "c", 0.3),
            cell("d2", "a", 0.5), cell("d2", "b", 0.4), cell("d2", "c", 0.4),
            cell("d3", "a", 0.0), cell("d3", "b", 0.9), cell("d3", "c", 0.8),
        ];
        let table = average_rank_table(&cells, true).unwrap();
        assert_eq!(table.methods, vec!["a", "b", "c"]);
        let expected = [5.0 / 3.0, 6.5 / 3.0, 6.5 / 3.0];
        for (got, want) in table.average.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn missing_cell_is_an_incomplete_grid() {
        let cells = vec![cell("d1", "a", 0.1), cell("d1", "b", 0.2), cell("d2", "a", 0.3)];
        assert!(matches!(average_rank_table(&cells, true), Err(Error::IncompleteGrid(_))));
    }
}
