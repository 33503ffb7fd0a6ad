//! Closed-form tradeoffs, memory sharing, measured metrics and figure data.

mod envelope;
mod metrics;
mod sharing;
mod theory;

pub use envelope::{
    default_gamma_grid, default_mt_list, figure3_data, figure4_data, EquivalentLoad, Fig3Row,
    Fig4Row, NocacheEnvelope, TradeoffPoint, DEFAULT_ENVELOPE_X_MAX,
};
pub use metrics::{measure_backhaul, measure_pudof, BackhaulLoad, Metrics};
pub use sharing::{
    even_gamma_backhaul, even_gamma_split, memory_share_parts, memory_share_pudof,
    memory_share_split, no_cache_pudof_integer, part_sizes, MemorySplit, ThreeWaySplit,
};
pub use theory::{
    corollary_transform, theory_backhaul_cached_even, theory_backhaul_cached_odd, theory_point,
    theory_pudof_eq1, theory_pudof_eq2, CorollaryPoint,
};
