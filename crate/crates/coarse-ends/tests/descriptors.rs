//! The descriptor files shipped under `descriptors/` must stay in sync with
//! the built-in generators. Run the ignored test to regenerate them after
//! changing a builtin.

use std::path::PathBuf;

use coarse_ends::spaces::{load_certificates, load_parametric_space, save_report, SpaceRecipe};

fn descriptor_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("descriptors")
}

fn recipes() -> Vec<SpaceRecipe> {
    vec![
        SpaceRecipe::Line { n: 100 },
        SpaceRecipe::Grid2d { n: 100 },
        SpaceRecipe::Vase { height: 100 },
        SpaceRecipe::FlaredVase { height: 100 },
    ]
}

#[test]
fn shipped_descriptors_match_builtins() {
    for recipe in recipes() {
        let name = recipe.name();
        let space_path = descriptor_dir().join(format!("{}.space.json", name));
        let certs_path = descriptor_dir().join(format!("{}.certs.json", name));
        let space = load_parametric_space(&space_path)
            .unwrap_or_else(|e| panic!("{}: {}", space_path.display(), e));
        let certs = load_certificates(&certs_path)
            .unwrap_or_else(|e| panic!("{}: {}", certs_path.display(), e));
        assert_eq!(space, recipe.parametric().unwrap(), "{} space drifted", name);
        assert_eq!(certs, recipe.certificates().unwrap(), "{} certificates drifted", name);
    }
}

#[test]
#[ignore = "regenerates the shipped descriptor files"]
fn regenerate_descriptor_files() {
    for recipe in recipes() {
        let name = recipe.name();
        let dir = descriptor_dir();
        save_report(
            &recipe.parametric().unwrap(),
            &dir.join(format!("{}.space.json", name)),
            true,
        )
        .unwrap();
        save_report(
            &recipe.certificates().unwrap(),
            &dir.join(format!("{}.certs.json", name)),
            true,
        )
        .unwrap();
    }
}
