//! Regenerates `data/scales.json` from the built-in classifier tables.
fn main() {
    println!("{}", shipcast_core::categorical::ScaleSet::builtin().to_json());
}
