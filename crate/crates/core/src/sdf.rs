//! Synchronous-dataflow rate propagation over a mapped design.
//!
//! Each generator consumes and produces transactions in a fixed ratio per
//! frame, so edge rates follow from the input rate by multiplication.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::design::{Design, Generator};
use crate::types::Rate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdfError {
    #[error("inconsistent rates at {node}: edge {a} carries {ra} but edge {b} carries {rb}")]
    Inconsistent {
        node: String,
        a: String,
        ra: Rate,
        b: String,
        rb: Rate,
    },
}

/// Output transactions per input transaction of one instance.
pub fn token_ratio(g: &Generator) -> Rate {
    match g {
        Generator::Reorder {
            plan, vin, vout, ..
        } => {
            let n_in = plan.n_in() / *vin as u64;
            let n_out = plan.n_out() / *vout as u64;
            Rate::new(n_out as i64, n_in as i64)
        }
        Generator::Filter { vin, rate, .. } => *rate * Rate::from_int(*vin as i64),
        _ => Rate::ONE,
    }
}

/// Rates of every edge given the source's rate. Nodes without inputs other
/// than the source (constant ROMs) take their consumer's rate. Joins must
/// agree exactly. When the maximum rate exceeds one, all rates are scaled
/// down so the busiest edge runs every cycle.
pub fn propagate_rates(d: &Design, input_rate: Rate) -> Result<BTreeMap<usize, Rate>, SdfError> {
    let mut rate_in: Vec<Option<(usize, Rate)>> = vec![None; d.instances.len()];
    let mut out: BTreeMap<usize, Rate> = BTreeMap::new();
    let src = d.source();
    for v in d.topo_order() {
        let inst = &d.instances[v];
        let r = if v == src {
            Some(input_rate)
        } else {
            rate_in[v].map(|(_, r)| r * token_ratio(&inst.gen))
        };
        for (k, e) in d.edges.iter().enumerate() {
            if e.from.inst != v {
                continue;
            }
            // ROMs carry no rate of their own; they follow their consumer
            let er = match r {
                Some(r) => r,
                None => continue,
            };
            out.insert(k, er);
            check_join(d, &mut rate_in, e.to.inst, k, er)?;
        }
    }
    // second pass: edges from rate-free producers take the join's rate
    for (k, e) in d.edges.iter().enumerate() {
        if let (std::collections::btree_map::Entry::Vacant(slot), Some((_, r))) =
            (out.entry(k), rate_in[e.to.inst])
        {
            slot.insert(r);
        }
    }
    let max = out.values().copied().max().unwrap_or(Rate::ONE);
    if max > Rate::ONE {
        for r in out.values_mut() {
            *r = *r / max;
        }
    }
    Ok(out)
}

fn check_join(
    d: &Design,
    rate_in: &mut [Option<(usize, Rate)>],
    v: usize,
    e: usize,
    r: Rate,
) -> Result<(), SdfError> {
    match rate_in[v] {
        None => rate_in[v] = Some((e, r)),
        Some((e0, r0)) if r0 != r => {
            return Err(SdfError::Inconsistent {
                node: d.instances[v].name.clone(),
                a: d.edge_label(e0),
                ra: r0,
                b: d.edge_label(e),
                rb: r,
            })
        }
        _ => {}
    }
    Ok(())
}

/// Fraction of cycles an edge carries a transaction.
pub fn utilization(rate: Rate) -> Rate {
    rate
}
