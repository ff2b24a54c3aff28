mod common;

use common::{gaussian_vec, rng};
use fusso::basis::{BasisIndex, GridSample};
use fusso::dataset::{
    build_coefficients, load_dataset, read_f64le, save_dataset, write_f64le, Encoding,
    FunctionalDataset, Manifest, MANIFEST_FILE,
};
use fusso::FussoError;
use std::fs;

fn random_dataset(seed: u64, big_n: usize, p: usize, n: usize) -> FunctionalDataset {
    let mut r = rng(seed);
    let samples = gaussian_vec(&mut r, big_n * p * n);
    let y = gaussian_vec(&mut r, big_n);
    FunctionalDataset::new(big_n, p, n, samples, y).unwrap()
}

#[test]
fn round_trip_is_bit_exact_in_both_encodings() {
    let ds = random_dataset(1, 7, 3, 6);
    for enc in [Encoding::Csv, Encoding::F64le] {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&ds, dir.path(), enc).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap(), ds, "{enc:?}");
        assert_eq!(load_dataset(&dir.path().join(MANIFEST_FILE)).unwrap(), ds);
    }
}

#[test]
fn minimal_dataset_round_trip_into_fresh_directory() {
    let ds = FunctionalDataset::new(1, 1, 2, vec![0.1, -3.5e-300], vec![f64::MAX]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested").join("out");
    for enc in [Encoding::Csv, Encoding::F64le] {
        save_dataset(&ds, &target, enc).unwrap();
        assert_eq!(load_dataset(&target).unwrap(), ds);
    }
}

#[test]
fn csv_layout_matches_documented_headers() {
    let ds = random_dataset(2, 3, 2, 4);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path(), Encoding::Csv).unwrap();
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest.grid, "k_over_n");
    let text = fs::read_to_string(dir.path().join("covariates/x_1.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x_1,x_2,x_3,x_4");
    assert_eq!(text.lines().count(), 4);
    let resp = fs::read_to_string(dir.path().join(&manifest.responses)).unwrap();
    assert_eq!(resp.lines().next().unwrap(), "y");
}

#[test]
fn binary_header_is_rows_then_cols() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.f64le");
    write_f64le(&path, 2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let bytes = fs::read(&path).unwrap();
    assert_eq!(bytes.len(), 16 + 48);
    assert_eq!(u64::from_le_bytes(bytes[0..8].try_into().unwrap()), 2);
    assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
    assert_eq!(
        f64::from_le_bytes(bytes[16 + 8..16 + 16].try_into().unwrap()),
        2.0
    );
    assert_eq!(
        read_f64le(&path).unwrap(),
        (2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    );
}

#[test]
fn response_row_count_mismatch_is_rejected() {
    let ds = random_dataset(3, 3, 1, 4);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path(), Encoding::Csv).unwrap();
    fs::write(dir.path().join("responses.csv"), "y\n1.0\n2.0\n").unwrap();
    let err = load_dataset(dir.path()).unwrap_err();
    assert!(matches!(err, FussoError::DimensionMismatch(_)), "{err}");
    assert!(err.is_data_error());
}

#[test]
fn nan_in_grid_file_names_instance_and_covariate() {
    let ds = random_dataset(4, 3, 2, 4);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path(), Encoding::Csv).unwrap();
    let path = dir.path().join("covariates/x_1.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<&str> = lines[3].split(',').collect();
    cells[2] = "NaN";
    lines[3] = cells.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    match load_dataset(dir.path()).unwrap_err() {
        FussoError::NonFiniteSample {
            instance,
            covariate,
            point,
        } => {
            assert_eq!((instance, covariate, point), (2, 1, 2));
        }
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn malformed_header_and_missing_file_are_rejected() {
    let ds = random_dataset(5, 2, 1, 3);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(&ds, dir.path(), Encoding::Csv).unwrap();
    let path = dir.path().join("covariates/x_0.csv");
    let text = fs::read_to_string(&path).unwrap().replacen("x_1", "z_1", 1);
    fs::write(&path, text).unwrap();
    assert!(matches!(
        load_dataset(dir.path()),
        Err(FussoError::Malformed { .. })
    ));
    fs::remove_file(&path).unwrap();
    assert!(matches!(
        load_dataset(dir.path()),
        Err(FussoError::Io { .. })
    ));
}

#[test]
fn unwritable_target_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let ds = random_dataset(6, 2, 1, 3);
    assert!(matches!(
        save_dataset(&ds, &blocker.join("sub"), Encoding::F64le),
        Err(FussoError::Io { .. })
    ));
}

#[test]
fn build_coefficients_examples() {
    let zeros = FunctionalDataset::new(3, 2, 6, vec![0.0; 36], vec![0.0; 3]).unwrap();
    assert!(build_coefficients(&zeros, 4)
        .unwrap()
        .as_slice()
        .iter()
        .all(|&v| v == 0.0));

    let phi2 = GridSample::from_fn(8, |x| BasisIndex::new(2).unwrap().value(x)).unwrap();
    let one = FunctionalDataset::new(1, 1, 8, phi2.into_values(), vec![0.0]).unwrap();
    let c = build_coefficients(&one, 3).unwrap();
    let cell = c.cell(0, 0);
    assert!(cell[0].abs() < 1e-14 && (cell[1] - 1.0).abs() < 1e-14 && cell[2].abs() < 1e-14);

    assert!(matches!(
        build_coefficients(&one, 8),
        Err(FussoError::TruncationTooLarge { .. })
    ));
}

#[test]
fn build_coefficients_matches_brute_force_oracle() {
    use std::f64::consts::PI;
    let ds = random_dataset(7, 2, 2, 4);
    let c = build_coefficients(&ds, 2).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let y = ds.sample(i, j);
            let a1: f64 = y.iter().sum::<f64>() / 4.0;
            let a2: f64 = (1..=4)
                .map(|k| 2f64.sqrt() * (2.0 * PI * k as f64 / 4.0).cos() * y[k - 1])
                .sum::<f64>()
                / 4.0;
            assert!((c.get(i, j, 0) - a1).abs() < 1e-14);
            assert!((c.get(i, j, 1) - a2).abs() < 1e-14);
        }
    }
}

#[test]
fn projection_is_prefix_stable() {
    let ds = random_dataset(8, 5, 4, 11);
    let full = build_coefficients(&ds, 10).unwrap();
    for m in 1..10 {
        let part = build_coefficients(&ds, m).unwrap();
        assert_eq!(part.as_slice(), full.truncated(m).as_slice());
    }
}

#[test]
fn constructor_validation() {
    assert!(FunctionalDataset::new(0, 1, 3, vec![], vec![]).is_err());
    assert!(FunctionalDataset::new(1, 1, 3, vec![0.0; 2], vec![0.0]).is_err());
    assert!(FunctionalDataset::new(1, 1, 3, vec![0.0; 3], vec![f64::INFINITY]).is_err());
}
