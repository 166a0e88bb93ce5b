//! Prints freshly fitted bound constants in the fixture format.
//!
//! `cargo run -p memlab-core --example calibrate > crates/core/fixtures/calibration.txt`

fn main() -> memlab_core::Result<()> {
    let constants = memlab_core::verify::calibrate_constants()?;
    println!("# fitted constants (grid maximum times {})", memlab_core::verify::SAFETY_FACTOR);
    print!("{}", constants.to_text());
    Ok(())
}
