//! Monte Carlo batches across compliance levels, showing how re-planning
//! absorbs wrong turns.
//!
//!     cargo run --release --example batch

use std::sync::Arc;

use hexnav::map::clinic;
use hexnav::sim::{run_batch, ReaderModel, Scenario, WalkerModel};

fn main() {
    let map = Arc::new(clinic());
    println!("compliance  arrived  mean_hops  detour  mean_elapsed_s");
    for compliance in [1.0, 0.9, 0.8, 0.7, 0.6, 0.5] {
        let scenario = Scenario {
            src: 1,
            dst: 17,
            walker: WalkerModel { compliance, ..Default::default() },
            reader: ReaderModel::default(),
            step_cap: 70,
        };
        let a = run_batch(map.clone(), &scenario, 500, 0).unwrap().aggregate;
        println!(
            "{compliance:>10.1}  {:>7.3}  {:>9.2}  {:>6.2}  {:>14.1}",
            a.arrival_rate, a.mean_hops, a.mean_detour_factor, a.mean_elapsed_s
        );
    }
}
