use cbindgen::{Builder, Config, EnumConfig, Language};

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");

    let config = Config {
        language: Language::C,
        cpp_compat: true,
        include_guard: Some("OREDIFF_H".into()),
        header: Some("/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */".into()),
        enumeration: EnumConfig {
            prefix_with_name: true,
            ..EnumConfig::default()
        },
        ..Config::default()
    };

    Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("unable to generate C bindings")
        .write_to_file(format!("{crate_dir}/include/orediff.h"));
}
