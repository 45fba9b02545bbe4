use nalgebra::DMatrix;
use netcontract::io::{read_matrix, read_vector, write_matrix};
use netcontract::Error;

#[test]
fn files_round_trip_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let m = DMatrix::from_row_slice(2, 3, &[0.1, -1e-300, 1.0 / 3.0, 2.5e17, -0.0, std::f64::consts::PI]);
    for name in ["m.mtx", "m.csv", "m.txt"] {
        let path = dir.path().join(name);
        write_matrix(&path, &m).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            assert_eq!(a.to_bits(), b.to_bits(), "{name}");
        }
    }
}

#[test]
fn vectors_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    std::fs::write(&path, "1\n4\n").unwrap();
    assert_eq!(read_vector(&path).unwrap(), vec![1.0, 4.0]);
    assert!(matches!(read_matrix(dir.path().join("missing.mtx")), Err(Error::Io(_))));
    std::fs::write(&path, "1,2\nnope,4\n").unwrap();
    assert!(matches!(read_matrix(&path), Err(Error::Parse(_))));
}
