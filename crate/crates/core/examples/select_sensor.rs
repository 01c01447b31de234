//! Ranks the shipped depth-sensor registry against working-range
//! requirements given on the command line.
//!
//! ```sh
//! cargo run --example select_sensor -- 0.2 3.0
//! ```

use signbot::skeleton3d::sensors::{default_registry, select_sensor, SensorRequirements};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let min_range = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.2);
    let max_range = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3.0);
    let req = SensorRequirements {
        min_range,
        max_range,
        ..SensorRequirements::default()
    };
    let registry = default_registry();
    for s in &registry {
        println!(
            "{:<22} range {:.2}-{:.2} m  {:>7} depth px  {}",
            s.name,
            s.depth_range_m[0],
            s.depth_range_m[1],
            s.depth_pixels(),
            if req.accepts(s) { "ok" } else { "rejected" }
        );
    }
    println!("selected: {}", select_sensor(&registry, &req)?.name);
    Ok(())
}
