fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.cpp_compat = true;
    config.include_guard = Some("DICEY_H".into());
    config.header = Some(
        "/* C interface to the dicey solver. Strings returned through out\n   parameters are owned by the caller; release them with dicey_string_free. */"
            .into(),
    );
    config.enumeration.prefix_with_name = true;
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("failed to generate C header")
        .write_to_file(format!("{crate_dir}/include/dicey.h"));
}
