fn main() {
    // LAPACK symbols (zheevd_, zgbtrf_, ...) come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
