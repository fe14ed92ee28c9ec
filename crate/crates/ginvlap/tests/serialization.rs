//! Lossless JSON round-trips for datasets and Fourier block spectra
//! through actual files on disk.

use std::fs;

use ginvlap::ggl::{self, AffinitySpectrum, BlockParams};
use ginvlap::Dataset;

#[test]
fn dataset_round_trips_through_a_file() {
    let points = ginvlap::experiments::sample_s4_tube(17, 0.3, 91).unwrap();
    let data = ginvlap::experiments::embed_dataset(&points).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shell.json");
    fs::write(&path, data.to_json()).unwrap();
    let back = Dataset::from_json(&fs::read_to_string(&path).unwrap()).unwrap();

    assert_eq!(back.layout().blocks(), data.layout().blocks());
    assert_eq!(back.len(), data.len());
    for i in 0..data.len() {
        // Shortest round-trip float formatting must reproduce every
        // coordinate bit for bit.
        assert_eq!(back.point(i), data.point(i), "point {i}");
    }
}

#[test]
fn spectrum_round_trips_through_a_file() {
    let points = ginvlap::experiments::sample_s4(6, 17);
    let data = ginvlap::experiments::embed_dataset(&points).unwrap();
    let spectrum = ggl::fourier_blocks(&data, &BlockParams::new(0.7, 2, 8)).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocks.json");
    fs::write(&path, spectrum.to_json()).unwrap();
    let back = AffinitySpectrum::from_json(&fs::read_to_string(&path).unwrap()).unwrap();

    assert_eq!(back.epsilon(), spectrum.epsilon());
    assert_eq!(back.band(), spectrum.band());
    assert_eq!(back.n_points(), spectrum.n_points());
    for (two_l, block) in spectrum.iter() {
        assert_eq!(back.block(two_l).unwrap(), block, "block 2ℓ = {two_l}");
    }

    // The eigensystems of the reloaded spectrum are byte-equal in value.
    let a = ggl::eig_normalized(&spectrum).unwrap();
    let b = ggl::eig_normalized(&back).unwrap();
    for (&two_l, blk) in &a.blocks {
        assert_eq!(blk.eigenvalues, b.blocks[&two_l].eigenvalues);
        assert_eq!(blk.eigenvectors, b.blocks[&two_l].eigenvectors);
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(Dataset::from_json("{").is_err());
    assert!(AffinitySpectrum::from_json("[1, 2, 3]").is_err());
    // Structurally valid JSON with inconsistent dimensions must also fail.
    let points = ginvlap::experiments::sample_s4(3, 1);
    let data = ginvlap::experiments::embed_dataset(&points).unwrap();
    let mut wire: serde_json::Value = serde_json::from_str(&data.to_json()).unwrap();
    wire["layout"] = serde_json::json!([3, 1]);
    assert!(Dataset::from_json(&wire.to_string()).is_err());
}
