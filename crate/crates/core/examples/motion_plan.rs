//! Compiles a gloss sequence against the demo motion table and prints the
//! right elbow angle over the simulated playback.
//!
//! ```sh
//! cargo run --example motion_plan -- Tú Nombre Cuál
//! ```

use signbot::motion::{compile_plan, demo_lut, simulate_execution, Joint, DEFAULT_INTER_SIGN_PAUSE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut tokens: Vec<String> = std::env::args().skip(1).collect();
    if tokens.is_empty() {
        tokens = vec!["Tú".into(), "Nombre".into(), "Cuál".into()];
    }
    let lut = demo_lut();
    let plan = compile_plan(&tokens, &lut)?;
    println!(
        "{} signs, {:.3} s of motion, {:.3} s with pauses",
        plan.len(),
        plan.duration(),
        plan.playback_duration(DEFAULT_INTER_SIGN_PAUSE)
    );
    for s in simulate_execution(&plan, 10.0, DEFAULT_INTER_SIGN_PAUSE)? {
        let angle = s.config.get(Joint::RElbow);
        println!(
            "{:6.2} s  {:+.3} rad  {}",
            s.time,
            angle,
            "#".repeat((angle * 20.0).max(0.0) as usize)
        );
    }
    Ok(())
}
