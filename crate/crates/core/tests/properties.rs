use proptest::prelude::*;

use k3orb_core::catalog::{Catalog, Expectations};
use k3orb_core::cyclotomic;
use k3orb_core::lattice::{self, DivisorClass, ExceptionalBlock, LatticeBasis, Profile, SearchBounds};
use k3orb_core::orbchar;
use k3orb_core::pipeline::{pipeline, PipelineOptions};
use k3orb_core::rational::{frac, int, Rational};
use k3orb_core::seifert::{self, ParameterBounds, SeifertContext, SeifertParameters};

fn block() -> impl Strategy<Value = ExceptionalBlock> {
    prop_oneof![Just(ExceptionalBlock::Single), (2u32..12).prop_map(ExceptionalBlock::Pair)]
}

fn basis_and_vectors() -> impl Strategy<Value = (LatticeBasis, Vec<i64>, Vec<i64>, Vec<i64>)> {
    (1i64..200, prop::collection::vec(block(), 0..5)).prop_flat_map(|(h, blocks)| {
        let basis = LatticeBasis::new(int(h), blocks).unwrap();
        let r = basis.rank();
        let v = || prop::collection::vec(-30i64..30, r);
        (Just(basis), v(), v(), v())
    })
}

fn gram_product(g: &[Vec<Rational>], x: &DivisorClass, y: &DivisorClass) -> Rational {
    let mut acc = int(0);
    for (i, row) in g.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            acc += &x.0[i] * gij * &y.0[j];
        }
    }
    acc
}

proptest! {
    #[test]
    fn intersection_is_symmetric_bilinear((b, x, y, z) in basis_and_vectors()) {
        let (x, y, z) = (DivisorClass::from_tuple(&x), DivisorClass::from_tuple(&y), DivisorClass::from_tuple(&z));
        prop_assert_eq!(b.intersect(&x, &y).unwrap(), b.intersect(&y, &x).unwrap());
        let lhs = b.intersect(&x.add(&y), &z).unwrap();
        prop_assert_eq!(lhs, b.intersect(&x, &z).unwrap() + b.intersect(&y, &z).unwrap());
        let s = frac(3, 7);
        prop_assert_eq!(b.intersect(&x.scale(&s), &z).unwrap(), b.intersect(&x, &z).unwrap() * &s);
    }

    #[test]
    fn intersection_matches_gram_matrix((b, x, y, _z) in basis_and_vectors()) {
        let g = b.gram();
        prop_assert_eq!(g.len(), b.rank());
        for i in 0..g.len() {
            for j in 0..g.len() {
                prop_assert_eq!(&g[i][j], &g[j][i]);
            }
        }
        let (x, y) = (DivisorClass::from_tuple(&x), DivisorClass::from_tuple(&y));
        prop_assert_eq!(b.intersect(&x, &y).unwrap(), gram_product(&g, &x, &y));
    }

    #[test]
    fn exceptional_part_is_negative_definite((b, x, _y, _z) in basis_and_vectors()) {
        let mut x = DivisorClass::from_tuple(&x);
        x.0[0] = int(0);
        let s = b.self_intersection(&x).unwrap();
        prop_assert!(s <= int(0));
        if x.0.iter().any(|a| *a != int(0)) {
            prop_assert!(s < int(0));
        }
    }

    #[test]
    fn seifert_closed_form_matches_pairing(n in 2u32..12, c in 1i64..100, m in 1i64..20, k in 1i64..20) {
        let ctx = SeifertContext::minimal(n, c).unwrap();
        let p = SeifertParameters::new(n as i64, c, m, k).unwrap();
        let cert = seifert::verify_seifert(&ctx, &p).unwrap();
        prop_assert_eq!(&cert.e_self, &seifert::e_self_formula(&p, &ctx.eref));
        prop_assert_eq!(cert.check("primitivity_D"), Some(true));
        prop_assert_eq!(cert.check("primitivity_Dprime"), Some(true));
    }

    #[test]
    fn found_seifert_parameters_reverify(n in 2u32..10, c in 1i64..60) {
        let ctx = SeifertContext::minimal(n, c).unwrap();
        if let Ok(cert) = seifert::find_parameters(&ctx, c, ParameterBounds::default()) {
            prop_assert!(cert.valid());
            let again = seifert::verify_seifert(&ctx, &cert.params).unwrap();
            prop_assert_eq!(again, cert);
        }
    }
}

#[test]
fn mu_closed_form_all_characters() {
    for m in 2..=40u64 {
        for j in 0..m {
            let closed = frac((m * m - 1) as i64, 12 * m as i64) - frac((j * (m - j)) as i64, 2 * m as i64);
            assert_eq!(orbchar::mu_local(m, j).unwrap(), closed, "m={m} j={j}");
        }
    }
}

#[test]
fn mu_maximal_at_trivial_character() {
    for m in 2..=64u64 {
        let all = cyclotomic::character_sums(m).unwrap();
        assert_eq!(all[0], orbchar::mu_local(m, 0).unwrap());
        for (j, v) in all.iter().enumerate().skip(1) {
            assert!(*v < all[0], "m={m} j={j}");
        }
    }
}

#[test]
fn mu_sing_is_additive() {
    let a = orbchar::mu_sing_trivial(&[7]).unwrap();
    let b = orbchar::mu_sing_trivial(&[10]).unwrap();
    assert_eq!(orbchar::mu_sing_trivial(&[7, 10]).unwrap(), &a + &b);
    assert_eq!(a + b, frac(21, 32) + frac(10, 11));
}

#[test]
fn searched_tuples_reverify() {
    let cat = Catalog::embedded();
    for id in ["Xt2", "Xt3", "Xt5", "Xt7"] {
        let s = cat.get(id).unwrap().state().unwrap();
        let found =
            lattice::search_q(&s.lattice, &int(2), Profile::AmpleOnly, SearchBounds::default(), Some(3)).unwrap();
        assert!(!found.is_empty(), "{id}");
        let mut sorted = found.clone();
        sorted.sort();
        assert_eq!(sorted, found, "{id}: lexicographic order");
        for t in &found {
            let v = lattice::verify_q(&s.lattice, &DivisorClass::from_tuple(t), &int(2), Profile::AmpleOnly).unwrap();
            assert!(v.passed, "{id}: {t:?}");
        }
        let again =
            lattice::search_q(&s.lattice, &int(2), Profile::AmpleOnly, SearchBounds::default(), Some(3)).unwrap();
        assert_eq!(again, found);
    }
}

#[test]
fn table_two_tuple_is_found_by_search() {
    let cat = Catalog::embedded();
    let e = cat.get("Xt3").unwrap();
    let s = e.state().unwrap();
    let t = e.expected.q_tuple.clone().unwrap();
    let all = lattice::search_q(&s.lattice, &int(2), Profile::AmpleOnly, SearchBounds::default(), None).unwrap();
    assert!(all.contains(&t), "{t:?} missing from search");
}

#[test]
fn catalog_entries_round_trip_individually() {
    let cat = Catalog::embedded();
    for e in &cat.entries {
        let one = Catalog { entries: vec![e.clone()] };
        assert_eq!(Catalog::parse(&one.to_toml().unwrap()).unwrap(), one, "{}", e.id);
    }
}

#[test]
fn catalog_loads_from_path() {
    let dir = std::env::temp_dir().join(format!("k3orb-cat-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("catalog.toml");
    std::fs::write(&path, Catalog::embedded().to_toml().unwrap()).unwrap();
    assert_eq!(Catalog::load(Some(&path)).unwrap(), Catalog::embedded());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn corrupted_chain_is_an_input_error() {
    let mut e = Catalog::embedded().get("Xt2").unwrap().clone();
    e.chain = vec!["A9".into()];
    let err = e.state().unwrap_err();
    assert!(err.is_input_error(), "{err}");
    let err = pipeline(&e, &Expectations::embedded(), &PipelineOptions::default()).unwrap_err();
    assert!(err.is_input_error(), "{err}");
}

#[test]
fn pipeline_reports_are_deterministic() {
    let cat = Catalog::embedded();
    let exp = Expectations::embedded();
    let opts = PipelineOptions::default();
    for id in ["Xt1", "Xt4", "Xt15"] {
        let e = cat.get(id).unwrap();
        let a = pipeline(e, &exp, &opts).unwrap().to_json();
        let b = pipeline(e, &exp, &opts).unwrap().to_json();
        assert_eq!(a, b, "{id}");
    }
}

#[test]
fn blow_up_grows_the_lattice() {
    let cat = Catalog::embedded();
    for e in &cat.entries {
        let stages = e.stages().unwrap();
        for w in stages.windows(2) {
            let grown = w[1].lattice.rank() - w[0].lattice.rank();
            let expect = match w[1].lattice.blocks.last().unwrap() {
                ExceptionalBlock::Pair(_) => 2,
                ExceptionalBlock::Single => 1,
            };
            assert_eq!(grown, expect, "{}", e.id);
            assert_eq!(w[1].euler, w[0].euler + expect as i64, "{}", e.id);
        }
    }
}
