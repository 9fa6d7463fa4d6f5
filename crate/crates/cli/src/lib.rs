//! File formats, scenario loading and the batch runner for `cogsyn-core`.

pub mod demo;
pub mod format;
pub mod manifest;
pub mod run;
pub mod scenario;

/// Scenarios shipped with the tool, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    (
        "complementary-pair",
        include_str!("../scenarios/complementary-pair.toml"),
    ),
    (
        "self-vs-self",
        include_str!("../scenarios/self-vs-self.toml"),
    ),
    (
        "rotation-triple",
        include_str!("../scenarios/rotation-triple.toml"),
    ),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
