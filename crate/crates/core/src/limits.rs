//! Process-wide size caps.
//!
//! Finite-table rings are stored as quadratic tables and module carriers are
//! materialized in full, so both are capped. The caps can be raised at
//! startup (the CLI exposes `--max-carrier`).

use std::sync::atomic::{AtomicUsize, Ordering};

pub const DEFAULT_RING_CAP: usize = 256;
pub const DEFAULT_MAX_CARRIER: usize = 4096;

/// Ambient spaces `Rᵍ` are enumerated densely; this bounds them.
pub const AMBIENT_CAP: usize = 1 << 22;

static RING_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_RING_CAP);
static MAX_CARRIER: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_CARRIER);

pub fn ring_cap() -> usize {
    RING_CAP.load(Ordering::Relaxed)
}

pub fn set_ring_cap(n: usize) {
    RING_CAP.store(n.max(2), Ordering::Relaxed);
}

pub fn max_carrier() -> usize {
    MAX_CARRIER.load(Ordering::Relaxed)
}

pub fn set_max_carrier(n: usize) {
    MAX_CARRIER.store(n.max(1), Ordering::Relaxed);
}
