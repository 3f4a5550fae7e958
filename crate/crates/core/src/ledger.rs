//! Oracle-query accounting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Per-subroutine query counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub exact: u64,
    pub modeled: f64,
}

/// Exact (circuit-derived) and modeled (analytic) oracle-call counts.
///
/// Exact queries come from two sources only: controlled applications of the
/// reflection unitary (two queries each) and direct bit reads.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    entries: BTreeMap<String, LedgerEntry>,
    controlled_u: u64,
    direct_reads: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charge the cost of `count` controlled-U applications (2 queries each).
    pub fn charge_controlled_u(&mut self, name: &str, count: u64) {
        self.controlled_u += count;
        self.entry(name).exact += 2 * count;
    }

    /// Charge one direct read of an input bit.
    pub fn charge_read(&mut self, name: &str) {
        self.direct_reads += 1;
        self.entry(name).exact += 1;
    }

    pub fn charge_modeled(&mut self, name: &str, cost: f64) {
        debug_assert!(cost >= 0.0 && cost.is_finite());
        self.entry(name).modeled += cost;
    }

    fn entry(&mut self, name: &str) -> &mut LedgerEntry {
        self.entries.entry(name.to_string()).or_default()
    }

    pub fn exact_total(&self) -> u64 {
        self.entries.values().map(|e| e.exact).sum()
    }

    pub fn modeled_total(&self) -> f64 {
        self.entries.values().fold(0.0, |a, e| a + e.modeled)
    }

    /// Exact plus modeled queries.
    pub fn total(&self) -> f64 {
        self.exact_total() as f64 + self.modeled_total()
    }

    pub fn controlled_u(&self) -> u64 {
        self.controlled_u
    }

    pub fn direct_reads(&self) -> u64 {
        self.direct_reads
    }

    pub fn breakdown(&self) -> &BTreeMap<String, LedgerEntry> {
        &self.entries
    }

    pub fn get(&self, name: &str) -> LedgerEntry {
        self.entries.get(name).copied().unwrap_or_default()
    }

    /// `exact = 2·controlled_u + direct_reads`.
    pub fn is_conserved(&self) -> bool {
        self.exact_total() == 2 * self.controlled_u + self.direct_reads
    }

    pub fn merge(&mut self, other: &QueryLedger) {
        for (k, v) in &other.entries {
            let e = self.entry(k);
            e.exact += v.exact;
            e.modeled += v.modeled;
        }
        self.controlled_u += other.controlled_u;
        self.direct_reads += other.direct_reads;
    }
}
