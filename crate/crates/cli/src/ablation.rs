//! Component ablation over seeded benchmark scenarios.

use std::fmt::Write;

use rayon::prelude::*;

use motassoc::metrics::{evaluate, MetricsReport};
use motassoc::sim::{generate_scenario, SimConfig};
use motassoc::tracker::run_sequence;
use motassoc::TrackerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Variant {
    /// Appearance only, no feature accumulation.
    Cos,
    /// Appearance plus box distance, no feature accumulation.
    CosBbox,
    /// Appearance plus box distance with feature accumulation.
    CosBboxAcc,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Cos, Variant::CosBbox, Variant::CosBboxAcc];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Cos => "cos",
            Variant::CosBbox => "cos+bbox",
            Variant::CosBboxAcc => "cos+bbox+acc",
        }
    }

    /// Derives the variant from a full configuration; the base box weight and
    /// accumulation weight are kept where the variant uses them.
    pub fn apply(self, base: &TrackerConfig) -> TrackerConfig {
        let mut cfg = base.clone();
        match self {
            Variant::Cos => {
                cfg.assoc.bbox_weight = 0.0;
                cfg.beta = 1.0;
            }
            Variant::CosBbox => cfg.beta = 1.0,
            Variant::CosBboxAcc => {}
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: Variant,
    /// One report per seed, in seed order.
    pub per_seed: Vec<(u64, MetricsReport)>,
}

impl AblationRow {
    fn mean(&self, f: impl Fn(&MetricsReport) -> f64) -> f64 {
        self.per_seed.iter().map(|(_, r)| f(r)).sum::<f64>() / self.per_seed.len().max(1) as f64
    }

    pub fn mean_mota(&self) -> f64 {
        self.mean(|r| r.mota().unwrap_or(f64::NAN))
    }

    pub fn mean_idf1(&self) -> f64 {
        self.mean(|r| r.idf1().unwrap_or(f64::NAN))
    }

    pub fn mean_idsw(&self) -> f64 {
        self.mean(|r| r.idsw() as f64)
    }
}

/// Runs every variant on every seed. Scenarios are generated once per seed and
/// evaluated in parallel; results come back in seed order regardless of
/// scheduling. The tracker's embedding length follows the scenario's.
pub fn run_ablation(
    sim: &SimConfig,
    tracker: &TrackerConfig,
    seeds: &[u64],
    variants: &[Variant],
    iou_gate: f64,
) -> motassoc::Result<Vec<AblationRow>> {
    let per_seed: Vec<Vec<MetricsReport>> = seeds
        .par_iter()
        .map(|&seed| {
            let scenario = generate_scenario(&SimConfig { seed, ..sim.clone() })?;
            let input = scenario.tracker_input();
            let base = TrackerConfig { embedding_dim: sim.embedding_dim, ..tracker.clone() };
            variants
                .iter()
                .map(|v| {
                    let out = run_sequence(&input, &v.apply(&base))?;
                    evaluate(&scenario.gt, &out, iou_gate)
                })
                .collect()
        })
        .collect::<motassoc::Result<_>>()?;

    Ok(variants
        .iter()
        .enumerate()
        .map(|(k, &variant)| AblationRow {
            variant,
            per_seed: seeds.iter().zip(&per_seed).map(|(&s, reps)| (s, reps[k])).collect(),
        })
        .collect())
}

/// Mean MOTA, IDF1 and IDSW per variant.
pub fn format_ablation(rows: &[AblationRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{:<14} {:>6} {:>8} {:>8} {:>8}", "variant", "seeds", "MOTA", "IDF1", "IDSW").unwrap();
    for row in rows {
        writeln!(
            s,
            "{:<14} {:>6} {:>8.2} {:>8.2} {:>8.1}",
            row.variant.label(),
            row.per_seed.len(),
            100.0 * row.mean_mota(),
            100.0 * row.mean_idf1(),
            row.mean_idsw()
        )
        .unwrap();
    }
    s
}
