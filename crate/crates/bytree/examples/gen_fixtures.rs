//! Regenerates the JSON fixture files in `fixtures/` from the built-in
//! definitions. Run from the crate root:
//!     cargo run --example gen_fixtures

use std::fs;
use std::path::Path;

use bytree::{genus2, io};

fn main() -> std::io::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(root.join("genus2"))?;

    fs::write(root.join("star.json"), io::serialize_forest(&genus2::star_fixture()))?;
    fs::write(
        root.join("comprehensive.json"),
        io::serialize_forest(&genus2::comprehensive_fixture()),
    )?;
    fs::write(root.join("wheel.json"), io::serialize_graph(&genus2::wheel_fixture()))?;

    let mut manifest = Vec::new();
    for row in genus2::genus2_rows() {
        let file = format!("{}.json", row.name.replace('+', "p").replace('-', "m"));
        fs::write(root.join("genus2").join(&file), io::serialize_forest(&row.forest))?;
        manifest.push(serde_json::json!({
            "name": row.name,
            "file": file,
            "expected": row.expected,
        }));
    }
    fs::write(
        root.join("genus2").join("manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )?;
    println!("wrote fixtures to {}", root.display());
    Ok(())
}
