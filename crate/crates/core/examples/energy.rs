//! Daily energy use and battery runtime under the two-level power model.
//!
//!     cargo run --example energy

use hexnav::sim::{battery_runtime, energy_consumption, PowerProfile};

fn main() {
    let profile = PowerProfile::default();
    println!("mean draw: {:.2} W", profile.average_w());
    println!("24 h: {:.2} Wh", energy_consumption(&profile, 24.0).unwrap());
    let hours = battery_runtime(&profile, 10_000.0, 3.7, 0.65).unwrap();
    println!("10000 mAh at 3.7 V, 65% conversion: {hours:.2} h");

    println!("idle share  Wh/day");
    for idle in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let p = PowerProfile { idle_fraction: idle, ..profile };
        println!("{idle:>10.1}  {:>6.2}", energy_consumption(&p, 24.0).unwrap());
    }
}
