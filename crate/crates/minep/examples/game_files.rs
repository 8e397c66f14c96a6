//! Saving and loading games as JSON documents with exact float
//! round-trips, plus structural validation diagnostics.
//!
//! Run with: cargo run --example game_files

use minep::{fixtures, io};

fn main() -> minep::Result<()> {
    let game = fixtures::example_2(0.3, 0.3, 0.1, 0.1);
    let path = std::env::temp_dir().join("minep-example-game.json");
    io::save_game(&path, &game)?;
    println!("wrote {}", path.display());

    let loaded = io::load_game(&path)?;
    assert_eq!(loaded, game, "round-trip must be exact");
    println!(
        "round-trip exact: {} players, dims {:?}",
        loaded.n_players(),
        loaded.dims
    );

    let diags = loaded.validate();
    if diags.is_empty() {
        println!("validation: clean");
    } else {
        for d in diags {
            println!("validation: {d}");
        }
    }

    let doc = io::GameDocument::from_game(&game);
    let text = serde_json::to_string_pretty(&doc)?;
    println!("\ndocument preview:\n{}", &text[..text.len().min(600)]);
    Ok(())
}
