//! The generated header declares every exported symbol.

#[test]
fn header_declares_exports() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/minsurf.h")).unwrap();
    assert!(h.contains("#ifndef MINSURF_H"));
    assert!(h.contains("typedef struct MsMetric MsMetric;"));
    assert!(h.contains("typedef struct MsProfile MsProfile;"));
    for f in [
        "ms_last_error_message",
        "ms_version",
        "ms_metric_flat",
        "ms_metric_schwarzschild",
        "ms_metric_from_json",
        "ms_metric_free",
        "ms_metric_scalar_curvature",
        "ms_adm_mass",
        "ms_plateau_solve",
        "ms_profile_free",
        "ms_profile_eval",
        "ms_profile_sample_count",
        "ms_profile_samples",
        "ms_profile_verify",
        "ms_string_free",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing");
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { std::ffi::CStr::from_ptr(minsurf_ffi::ms_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
