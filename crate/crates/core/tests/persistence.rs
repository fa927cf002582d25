use num_complex::Complex64;
use proptest::prelude::*;
use sglab::evolution::{CoefficientField, Domain, TimeGrid};
use sglab::grid::{assemble_operator, Grid, OperatorSpec};
use sglab::io::{
    decode_eig, decode_field, encode_eig, encode_field, format_real, load_eig, parse_real, read_csv, read_header,
    render_svg, save_eig_stamped, write_csv, ArchiveKind, Axes, CsvTable, Scale, Series,
};
use sglab::spectral::{eigendecompose, EigenDecomposition};
use sglab::{Error, ErrorKind};

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn fixture() -> EigenDecomposition {
    let grid = Grid::new(1.0, 3).unwrap();
    eigendecompose(&assemble_operator(&grid, OperatorSpec::new(2, 2).unwrap())).unwrap()
}

#[test]
fn fixture_archive_round_trips_bit_exact() {
    let eig = fixture();
    let back = decode_eig(&encode_eig(&eig, None)).unwrap();
    assert_eq!(bits(back.eigenvalues()), bits(eig.eigenvalues()));
    assert_eq!(bits(back.vectors()), bits(eig.vectors()));
    assert_eq!(back.spacing().to_bits(), eig.spacing().to_bits());
    assert_eq!(back.trusted_count(), eig.trusted_count());
    assert_eq!(back.origin(), eig.origin());
}

#[test]
fn stamped_archive_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixture.sgarc");
    let eig = fixture();
    save_eig_stamped(&eig, 1_700_000_000, &path).unwrap();
    let header = read_header(&path).unwrap();
    assert_eq!(header.kind, ArchiveKind::Eigen);
    assert_eq!(header.timestamp, Some(1_700_000_000));
    assert_eq!(header.dim, 3);
    assert_eq!(load_eig(&path).unwrap(), eig);
    let unstamped = encode_eig(&eig, None);
    assert_eq!(read_header_bytes(&unstamped).checksum, header.checksum);
}

fn read_header_bytes(bytes: &[u8]) -> sglab::io::ArchiveHeader {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.sgarc");
    std::fs::write(&path, bytes).unwrap();
    read_header(&path).unwrap()
}

#[test]
fn damaged_archives_are_io_errors() {
    let bytes = encode_eig(&fixture(), None);
    let mut flipped = bytes.clone();
    let last = flipped.len() - 20;
    flipped[last] ^= 1;
    assert!(matches!(decode_eig(&flipped), Err(Error::Checksum { .. })));
    assert!(matches!(decode_eig(&bytes[..10]), Err(Error::Truncated(_))));
    assert_eq!(decode_eig(b"").unwrap_err().kind(), ErrorKind::Io);
    let mut wrong_kind = encode_field(&CoefficientField::zeros(TimeGrid::new(8).unwrap(), 1, Domain::Time));
    assert!(decode_eig(&wrong_kind).is_err());
    wrong_kind[0] = b'X';
    assert!(matches!(decode_field(&wrong_kind), Err(Error::Format(_))));
    let missing = load_eig("/nonexistent/archive.sgarc").unwrap_err();
    assert_eq!(missing.kind(), ErrorKind::Io);
}

#[test]
fn csv_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let mut t = CsvTable::new(&["j", "lambda", "note"]);
    t.push(vec!["1".into(), format_real(1.0 / 3.0), "a,b".into()]);
    t.push(vec!["2".into(), format_real(f64::INFINITY), "resonant".into()]);
    write_csv(&t, &path).unwrap();
    assert_eq!(read_csv(&path).unwrap(), t);
}

#[test]
fn svg_output_is_byte_identical() {
    let series = vec![Series {
        label: "j^2".into(),
        points: (1..=100).map(|j| (j as f64, (j * j) as f64)).collect(),
    }];
    let axes = Axes {
        title: "synthetic".into(),
        x_label: "j".into(),
        y_label: "lambda".into(),
        x_scale: Scale::Log,
        y_scale: Scale::Log,
    };
    let a = render_svg(&series, &axes).unwrap();
    assert_eq!(a.as_bytes(), render_svg(&series, &axes).unwrap().as_bytes());
    assert!(a.contains("<polyline"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthetic_spectra_round_trip(values in prop::collection::vec(1.0f64..1e6, 1..30), h in 1e-3f64..1.0) {
        let eig = EigenDecomposition::synthetic(values, h);
        let back = decode_eig(&encode_eig(&eig, Some(42))).unwrap();
        prop_assert_eq!(bits(back.eigenvalues()), bits(eig.eigenvalues()));
        prop_assert_eq!(bits(back.vectors()), bits(eig.vectors()));
    }

    #[test]
    fn fields_round_trip(half in 4usize..20, modes in 1usize..5, seed in any::<u64>()) {
        let grid = TimeGrid::new(2 * half).unwrap();
        let f = CoefficientField::from_fn(grid, modes, |j, t| {
            Complex64::new((seed as f64 * 1e-19 + t * j as f64).sin(), (t - j as f64).cos())
        });
        prop_assert_eq!(decode_field(&encode_field(&f)).unwrap(), f.clone());
        let freq = f.to_frequency();
        prop_assert_eq!(decode_field(&encode_field(&freq)).unwrap(), freq);
    }

    #[test]
    fn reals_survive_text(x in any::<f64>().prop_filter("finite or infinite, not NaN", |x| !x.is_nan())) {
        prop_assert_eq!(parse_real(&format_real(x)).unwrap().to_bits(), x.to_bits());
    }
}
