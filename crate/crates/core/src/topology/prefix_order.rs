use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Link, ProcessId};

/// All `3^k` lossy-link `k`-prefixes in an order where neighbours are
/// indistinguishable to one process after round `k` (same inputs).
///
/// Built by extending the `(k-1)`-order: prefix number `j` gets the
/// letters `→ ↔ ←` when `j` is even and `← ↔ →` when odd. Within a
/// block `σ→ ~_r σ↔ ~_l σ←`; across blocks the shared last letter is
/// one the process that could not tell the parents apart receives nothing
/// on.
pub fn prefix_order_ll(k: usize) -> Result<Vec<Vec<Link>>> {
    Ok(prefix_order_with_witnesses(k)?.0)
}

/// The order together with, for each consecutive pair, the process that
/// cannot distinguish them.
pub fn prefix_order_with_witnesses(k: usize) -> Result<(Vec<Vec<Link>>, Vec<ProcessId>)> {
    if !(1..=8).contains(&k) {
        return Err(Error::Precondition(alloc::format!("prefix length must be in 1..=8, got {k}")));
    }
    let mut order: Vec<Vec<Link>> = alloc::vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(order.len() * 3);
        for (j, sigma) in order.iter().enumerate() {
            let letters = if j % 2 == 0 {
                [Link::Right, Link::Both, Link::Left]
            } else {
                [Link::Left, Link::Both, Link::Right]
            };
            for l in letters {
                let mut w = sigma.clone();
                w.push(l);
                next.push(w);
            }
        }
        order = next;
    }
    // Even-to-odd steps are invisible to r, odd-to-even ones to l.
    let witnesses = (0..order.len() - 1)
        .map(|i| if i % 2 == 0 { ProcessId::RIGHT } else { ProcessId::LEFT })
        .collect();
    Ok((order, witnesses))
}
