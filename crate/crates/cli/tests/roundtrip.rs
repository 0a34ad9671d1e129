use dilatrix_cli::files::MatrixFile;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(f64::MAX),
    ]
}

proptest! {
    #[test]
    fn matrix_files_round_trip_bit_exactly(
        (rows, cols, data) in (0usize..5, 0usize..5).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), prop::collection::vec((finite(), finite()), r * c))
        })
    ) {
        let file = MatrixFile { rows, cols, data: data.iter().map(|&(a, b)| [a, b]).collect() };
        let m = file.to_matrix().unwrap();
        let text = serde_json::to_string(&MatrixFile::from_matrix(&m)).unwrap();
        let back: MatrixFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.rows, rows);
        prop_assert_eq!(back.cols, cols);
        for (x, y) in back.data.iter().zip(&file.data) {
            prop_assert_eq!(x[0].to_bits(), y[0].to_bits());
            prop_assert_eq!(x[1].to_bits(), y[1].to_bits());
        }
    }
}
