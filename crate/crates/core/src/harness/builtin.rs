//! Configurations of the benchmark experiments shipped with the crate.

/// `(name, config text)` pairs.
pub const BUILTIN: &[(&str, &str)] = &[
    ("ex11", include_str!("../../configs/ex11.cfg")),
    ("ex11-mfac", include_str!("../../configs/ex11-mfac.cfg")),
    ("ex11-disturbance", include_str!("../../configs/ex11-disturbance.cfg")),
    ("ex11-disturbance-mfac", include_str!("../../configs/ex11-disturbance-mfac.cfg")),
    ("ex12", include_str!("../../configs/ex12.cfg")),
    ("ex12-mfac", include_str!("../../configs/ex12-mfac.cfg")),
    ("ex13", include_str!("../../configs/ex13.cfg")),
    ("ex13-mfac", include_str!("../../configs/ex13-mfac.cfg")),
    ("ex13-frozen", include_str!("../../configs/ex13-frozen.cfg")),
    ("ex2", include_str!("../../configs/ex2.cfg")),
    ("ex2-mfac", include_str!("../../configs/ex2-mfac.cfg")),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}
