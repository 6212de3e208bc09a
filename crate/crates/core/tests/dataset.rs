use expband::{parse_series, series_to_delimited, Dataset64, FitError};
use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = Dataset64> {
    (3usize..40)
        .prop_flat_map(|n| {
            (
                -100.0f64..100.0,
                prop::collection::vec(1e-3f64..10.0, n - 1),
                prop::collection::vec(-1e6f64..1e6, n),
            )
        })
        .prop_map(|(t0, gaps, y)| {
            let mut t = vec![t0];
            for g in gaps {
                t.push(t.last().unwrap() + g);
            }
            Dataset64::new(t, y).unwrap()
        })
}

fn strictly_increasing(t: &[f64]) -> bool {
    t.windows(2).all(|w| w[0] < w[1])
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(d in dataset()) {
        let back = Dataset64::parse(&d.to_delimited()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn reflections_are_involutions(d in dataset()) {
        prop_assert_eq!(&d.reflect_t().reflect_t(), &d);
        prop_assert_eq!(&d.negate_values().negate_values(), &d);
        prop_assert_eq!(&d.reflect_both().reflect_both(), &d);
        prop_assert_eq!(d.reflect_both(), d.reflect_t().negate_values());
    }

    #[test]
    fn reflections_keep_size_and_order(d in dataset()) {
        for r in [d.reflect_t(), d.negate_values(), d.reflect_both()] {
            prop_assert_eq!(r.len(), d.len());
            prop_assert!(strictly_increasing(r.t()));
        }
    }

    #[test]
    fn series_round_trip(v in prop::collection::vec(-1e9f64..1e9, 1..50)) {
        let back: Vec<f64> = parse_series(&series_to_delimited(&v)).unwrap();
        prop_assert_eq!(back, v);
    }
}

#[test]
fn load_from_file() {
    let path = std::env::temp_dir().join(format!("expband-dataset-{}.csv", std::process::id()));
    std::fs::write(&path, "t,value\n0,1.5\n1,0.5\n2,0.25\n").unwrap();
    let d = Dataset64::load(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(d.t(), &[0.0, 1.0, 2.0]);
    assert_eq!(d.values(), &[1.5, 0.5, 0.25]);
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(Dataset64::parse("0,1\n0,2"), Err(FitError::DuplicateAbscissa { .. })));
    assert!(Dataset64::parse("0,1\nx,2").unwrap_err().is_input_error());
    assert!(Dataset64::new(vec![0.0, 1.0], vec![1.0]).is_err());
    assert!(Dataset64::new(vec![0.0, f64::NAN], vec![1.0, 2.0]).is_err());
}
