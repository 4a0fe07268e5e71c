use std::path::PathBuf;

use arveson_cli::commands::example_files;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn bundled_example_files_match_library() {
    for (name, value) in example_files() {
        let path = data_dir().join(name);
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let on_disk: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(on_disk, value, "{name} is stale; run the ignored regenerate_example_files test");
    }
}

#[test]
#[ignore = "writes into the source tree"]
fn regenerate_example_files() {
    for (name, value) in example_files() {
        let text = arveson_cli::io::to_json_text(&value).unwrap();
        std::fs::write(data_dir().join(name), text).unwrap();
    }
}
