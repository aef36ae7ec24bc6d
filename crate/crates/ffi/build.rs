use std::env;
use std::path::PathBuf;

use cbindgen::{Config, Language, RenameRule};

fn main() {
    println!("cargo:rerun-if-changed=build.rs");
    println!("cargo:rerun-if-changed=src/lib.rs");

    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(&crate_dir).join("include").join("rmls.h");

    let mut config = Config {
        language: Language::C,
        include_guard: Some("RMLS_H".to_string()),
        cpp_compat: true,
        ..Config::default()
    };
    config.enumeration.rename_variants = RenameRule::ScreamingSnakeCase;
    config.enumeration.prefix_with_name = true;

    cbindgen::generate_with_config(&crate_dir, config)
        .expect("unable to generate C bindings")
        .write_to_file(header);
}
