use proptest::prelude::*;
use skewlab_core::io::{load_dataset, read_dataset, save_dataset, write_dataset_csv, write_meta};
use skewlab_core::taskgen::{gen_2dim, gen_highdim_spurious, pairing_multiplicities, GenSpec};
use skewlab_core::{split_groups, validate_easy_task, Dataset, Label, LabeledPoint, Metadata};

fn roundtrip(d: &Dataset) -> Dataset {
    let mut csv = Vec::new();
    let mut meta = Vec::new();
    write_dataset_csv(d, &mut csv).unwrap();
    write_meta(d, &mut meta).unwrap();
    read_dataset(csv.as_slice(), Some(std::str::from_utf8(&meta).unwrap())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_tasks_are_easy(n in 2usize..200, p in 0.5f64..=1.0, b in 0.1f64..4.0, seed in any::<u64>()) {
        let d = gen_2dim(&GenSpec::new("2dim", n, p, b, seed)).unwrap();
        let r = validate_easy_task(&d);
        prop_assert!(r.all_hold(), "{:?}", r);
        let split = split_groups(&d).unwrap();
        prop_assert_eq!(split.majority.len() + split.minority.len(), d.len());
    }

    #[test]
    fn exact_counts_hit_the_target(n in 2usize..300, p in 0.5f64..=1.0, seed in any::<u64>()) {
        let d = gen_2dim(&GenSpec::new("2dim", n, p, 1.0, seed).exact()).unwrap();
        let g = split_groups(&d).unwrap();
        let per_class = |y: Label| d.points().iter().filter(|q| q.y == y).count();
        let expect: usize = [Label::Pos, Label::Neg]
            .iter()
            .map(|&y| ((p * per_class(y) as f64) - 1e-9).ceil() as usize)
            .sum();
        prop_assert_eq!(g.majority.len(), expect);
    }

    #[test]
    fn paired_data_realizes_p_exactly(k in 1usize..10, j in 0usize..10) {
        let p = 0.5 + 0.05 * (j as f64);
        let (q, r) = pairing_multiplicities(p);
        let d = gen_2dim(&GenSpec::new("2dim", 2 * k, p, 1.0, 0).paired()).unwrap();
        let g = split_groups(&d).unwrap();
        prop_assert_eq!(g.majority.len() * r, g.minority.len() * q);
    }

    #[test]
    fn split_follows_reordering(seed in any::<u64>(), rot in 0usize..50) {
        let d = gen_2dim(&GenSpec::new("2dim", 50, 0.8, 1.0, seed)).unwrap();
        let perm: Vec<usize> = (0..d.len()).map(|i| (i + rot) % d.len()).rev().collect();
        let shuffled = d.subset(&perm).unwrap();
        let a = split_groups(&d).unwrap();
        let b = split_groups(&shuffled).unwrap();
        let mut mapped: Vec<usize> = b.majority.iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, a.majority);
    }

    #[test]
    fn csv_roundtrip_is_lossless(
        rows in prop::collection::vec(
            (prop::collection::vec(-1e6f64..1e6, 3), any::<bool>(), any::<bool>()),
            1..40,
        ),
        b in 1e-3f64..1e3,
    ) {
        let pts = rows
            .iter()
            .map(|(x, pos, agree)| {
                let y = if *pos { Label::Pos } else { Label::Neg };
                let s = if *agree { b } else { -b } * y.value();
                LabeledPoint::new(x.clone(), vec![s], y)
            })
            .collect();
        let meta = Metadata::default().with("note", "a b").with("p_vec", "0.6;0.7");
        let d = Dataset::new(pts, b, true, meta).unwrap();
        prop_assert_eq!(roundtrip(&d), d);
    }
}

#[test]
fn highdim_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hd.csv");
    let d = gen_highdim_spurious(30, &[0.6, 0.9, 0.75], 0.5, 7).unwrap();
    save_dataset(&d, &path).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), d);
}

#[test]
fn generation_is_deterministic() {
    let spec = GenSpec::new("2dim", 100, 0.7, 1.0, 42);
    assert_eq!(gen_2dim(&spec).unwrap(), gen_2dim(&spec).unwrap());
    let other = GenSpec::new("2dim", 100, 0.7, 1.0, 43);
    assert_ne!(gen_2dim(&spec).unwrap(), gen_2dim(&other).unwrap());
}
