use std::fs;
use std::path::Path;

use ccnmf::io::{
    fmt_f64, load_matrix, matrix_to_csv, matrix_to_matrix_market, parse_csv, parse_matrix_market, read_labels,
    read_matrix, sibling_labels_path, write_matrix, MatrixFormat, Orientation,
};
use ccnmf::CliError;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        0.0f64..1.0,
        Just(0.0),
        Just(1e-300),
        Just(f64::MAX),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn float_text_round_trips(v in finite()) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn csv_round_trip_is_bit_exact(rows in 1usize..6, cols in 1usize..6, vals in prop::collection::vec(finite(), 36)) {
        let m = DMatrix::from_fn(rows, cols, |i, j| vals[i * 6 + j]);
        let back = parse_csv(&matrix_to_csv(&m), Path::new("m.csv")).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        prop_assert!(back.iter().zip(m.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn matrix_market_round_trip_is_exact(rows in 1usize..6, cols in 1usize..6, vals in prop::collection::vec(0.0f64..10.0, 36)) {
        let m = DMatrix::from_fn(rows, cols, |i, j| if (i + j) % 3 == 0 { 0.0 } else { vals[i * 6 + j] });
        let back = parse_matrix_market(&matrix_to_matrix_market(&m), Path::new("m.mtx")).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn csv_with_comments_and_whitespace() {
    let m = parse_csv("# header\n1, 2.5 ,3\n\n4,5,6e-1\n", Path::new("x.csv")).unwrap();
    assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.0, 2.5, 3.0, 4.0, 5.0, 0.6]));
}

#[test]
fn csv_errors_carry_positions() {
    match parse_csv("1,2\n3,x\n", Path::new("x.csv")).unwrap_err() {
        CliError::Parse { line, column, .. } => assert_eq!((line, column), (2, 2)),
        e => panic!("unexpected {e:?}"),
    }
    match parse_csv("1,2\n3\n", Path::new("x.csv")).unwrap_err() {
        CliError::Parse { line, .. } => assert_eq!(line, 2),
        e => panic!("unexpected {e:?}"),
    }
    assert!(matches!(parse_csv("# only\n", Path::new("x.csv")), Err(CliError::Parse { .. })));
}

#[test]
fn matrix_market_formats() {
    let coord = "%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 1.5\n2 3 2\n2 3 0.5\n";
    let m = parse_matrix_market(coord, Path::new("a.mtx")).unwrap();
    assert_eq!(m, DMatrix::from_row_slice(2, 3, &[1.5, 0.0, 0.0, 0.0, 0.0, 2.5]));

    let array = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
    let m = parse_matrix_market(array, Path::new("a.mtx")).unwrap();
    assert_eq!(m, DMatrix::from_column_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));

    let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n";
    let err = parse_matrix_market(bad, Path::new("a.mtx")).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn format_from_extension() {
    assert_eq!(MatrixFormat::from_path(Path::new("a.mtx")), MatrixFormat::MatrixMarket);
    assert_eq!(MatrixFormat::from_path(Path::new("a.mm")), MatrixFormat::MatrixMarket);
    assert_eq!(MatrixFormat::from_path(Path::new("a.csv")), MatrixFormat::Csv);
    assert_eq!(MatrixFormat::from_path(Path::new("a")), MatrixFormat::Csv);
}

#[test]
fn files_sibling_labels_and_orientation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub/data.csv");
    let m = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.5, 3.0, 1.0]);
    write_matrix(&path, &m, MatrixFormat::Csv).unwrap();
    assert_eq!(read_matrix(&path, None).unwrap(), m);

    let ds = load_matrix(&path, None, Orientation::Cols, None).unwrap();
    assert!(ds.labels().is_none());
    assert_eq!((ds.features(), ds.samples()), (2, 3));

    fs::write(sibling_labels_path(&path), "1\n2\n1\n").unwrap();
    let ds = load_matrix(&path, None, Orientation::Cols, None).unwrap();
    assert_eq!(ds.labels().unwrap(), [1, 2, 1]);

    let rows = load_matrix(&path, None, Orientation::Rows, Some(&dir.path().join("none.labels")));
    assert_eq!(rows.unwrap_err().exit_code(), 3);
    fs::write(dir.path().join("two.labels"), "7\n8\n").unwrap();
    let ds = load_matrix(&path, None, Orientation::Rows, Some(&dir.path().join("two.labels"))).unwrap();
    assert_eq!((ds.features(), ds.samples()), (3, 2));
    assert_eq!(ds.matrix().as_dmatrix(), &m.transpose());
}

#[test]
fn bad_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let neg = dir.path().join("neg.csv");
    fs::write(&neg, "1,-1\n2,3\n").unwrap();
    assert_eq!(load_matrix(&neg, None, Orientation::Cols, None).unwrap_err().exit_code(), 3);
    let zero_col = dir.path().join("z.csv");
    fs::write(&zero_col, "1,0\n2,0\n").unwrap();
    assert_eq!(load_matrix(&zero_col, None, Orientation::Cols, None).unwrap_err().exit_code(), 3);
    let labels = dir.path().join("l.labels");
    fs::write(&labels, "1\nfoo\n").unwrap();
    assert!(matches!(read_labels(&labels), Err(CliError::Parse { line: 2, .. })));
    assert!(matches!(read_matrix(&dir.path().join("missing.csv"), None), Err(CliError::Io { .. })));
}
