use std::path::Path;

/// The netlib LAPACK backend links `-lcblas`, but several distributions ship
/// the CBLAS symbols inside libopenblas/libblas without a separate
/// `libcblas.so`. Nothing in this crate calls a `cblas_*` routine, so a
/// symlink to an existing BLAS library is enough to satisfy the linker.
fn main() {
    let lib_dirs = [
        "/usr/lib/x86_64-linux-gnu",
        "/usr/lib64",
        "/usr/lib",
        "/usr/local/lib",
    ];
    if lib_dirs.iter().any(|d| Path::new(d).join("libcblas.so").exists()) {
        return;
    }
    let donor = lib_dirs
        .iter()
        .flat_map(|d| ["libopenblas.so", "libblas.so"].map(|n| Path::new(d).join(n)))
        .find(|p| p.exists());
    let Some(donor) = donor else { return };
    let out_dir = std::env::var("OUT_DIR").expect("OUT_DIR");
    let shim = Path::new(&out_dir).join("libcblas.so");
    if !shim.exists() {
        std::os::unix::fs::symlink(&donor, &shim).expect("create libcblas.so shim");
    }
    println!("cargo:rustc-link-search=native={out_dir}");
}
