use rand::Rng;
use rayon::prelude::*;

use super::*;
use crate::channels::{
    sample_dext, Channel, ChannelSetSpec, Classical, CustomSet, Quantum, Theory,
};
use crate::error::Error;
use crate::rng::rng_from;
use crate::supermaps::{switch_supermap, Comb, Supermap, SLOT1_IN, SLOT1_OUT, SLOT2_IN, SLOT2_OUT};
use crate::tensor::{ComplexMatrix, SystemType};

fn q(l: &str) -> SystemType {
    SystemType::single(l, 2).unwrap()
}

fn random_comb<T: Theory>(seed: u64) -> Comb<T> {
    let mut rng = rng_from(seed);
    let env = SystemType::single("e", rng.random_range(1..=2)).unwrap();
    Comb::random(&q("a"), &q("a'"), &q("b"), &q("b'"), &env, &mut rng).unwrap()
}

fn comb_supermap(seed: u64) -> Supermap {
    random_comb::<Quantum>(seed).to_supermap().unwrap()
}

/// Oracle that runs a comb directly, without passing through a body.
fn comb_oracle<T: Theory>(c: Comb<T>) -> LatOracle<T> {
    LatOracle::from_comb(&c)
}

fn aux_pair(rng: &mut rand_chacha::ChaCha8Rng) -> (SystemType, SystemType) {
    (
        SystemType::single("x", rng.random_range(1..=3)).unwrap(),
        SystemType::single("x'", rng.random_range(1..=3)).unwrap(),
    )
}

/// The extracted body read off the oracle's image of the swap by explicit
/// index permutation of Choi operators: the image `T: B⊗X → B'⊗X'` with
/// `X ≅ A'`, `X' ≅ A` gives `C_S[(y, x, b, b'), ·] = C_T[(b, x, b', y), ·]`
/// on the matching column indices.
fn brute_force_extract(o: &LatOracle) -> ComplexMatrix {
    let x = q("~bf.x");
    let xp = q("~bf.y");
    let swap = Channel::wire(
        &q("a").concat(&x).unwrap(),
        &q("a'").concat(&xp).unwrap(),
        &[("a", "~bf.y"), ("~bf.x", "a'")],
    )
    .unwrap();
    let t = o.eval(&swap).unwrap();
    let t = Channel::from_tensor(
        &q("b").concat(&x).unwrap(),
        &q("b'").concat(&xp).unwrap(),
        t.tensor().clone(),
    )
    .unwrap();
    let ct = t.choi_matrix();
    let t_idx = |b: usize, x: usize, bp: usize, y: usize| ((b * 2 + x) * 2 + bp) * 2 + y;
    let s_idx = |y: usize, x: usize, b: usize, bp: usize| ((y * 2 + x) * 2 + b) * 2 + bp;
    let mut cs = ComplexMatrix::zeros(16, 16);
    for r in 0..16usize {
        let (y, x, b, bp) = (r >> 3 & 1, r >> 2 & 1, r >> 1 & 1, r & 1);
        for c in 0..16usize {
            let (y2, x2, b2, bp2) = (c >> 3 & 1, c >> 2 & 1, c >> 1 & 1, c & 1);
            assert_eq!(s_idx(y, x, b, bp), r);
            cs.set(r, c, ct.get(t_idx(b, x, bp, y), t_idx(b2, x2, bp2, y2)));
        }
    }
    cs
}

#[test]
fn extraction_matches_brute_force_reshuffle() {
    for seed in 0..4 {
        let s = comb_supermap(seed);
        for o in [LatOracle::embed(&s), decorrelating_oracle(&s)] {
            let extracted = o.extract().unwrap();
            assert!(extracted.choi_matrix().distance(&brute_force_extract(&o)) < 1e-12);
        }
    }
}

#[test]
fn extract_inverts_embed_on_comb_supermaps() {
    for seed in 0..25 {
        let s = comb_supermap(seed);
        let back = LatOracle::embed(&s).extract().unwrap();
        assert!(back.distance(&s).unwrap() < 1e-8, "seed {seed}");
    }
}

#[test]
fn extract_of_comb_oracle_is_the_comb_supermap() {
    for seed in 0..5 {
        let c = random_comb::<Quantum>(seed);
        let s = comb_oracle(c.clone()).extract().unwrap();
        assert!(s.distance(&c.to_supermap().unwrap()).unwrap() < 1e-10);
    }
}

#[test]
fn embed_of_extract_agrees_pointwise() {
    let mut rng = rng_from(11);
    for seed in 0..3 {
        let o = comb_oracle(random_comb::<Quantum>(100 + seed));
        let e = LatOracle::embed(&o.extract().unwrap());
        for _ in 0..10 {
            let (x, xp) = aux_pair(&mut rng);
            let phi = sample_dext(o.source(), &x, &xp, &mut rng).unwrap();
            assert!(
                e.eval(&phi)
                    .unwrap()
                    .distance(&o.eval(&phi).unwrap())
                    .unwrap()
                    < 1e-8
            );
        }
    }
}

#[test]
fn identity_oracle_extracts_identity_supermap() {
    let o = LatOracle::<Quantum>::identity(&q("a"), &q("a'"));
    let s = o.extract().unwrap();
    let id = Supermap::identity(&q("a"), &q("a'")).unwrap();
    assert!(s.distance(&id).unwrap() < 1e-12);
}

#[test]
fn embedded_identity_is_identity_on_extended_channels() {
    let o = LatOracle::embed(&Supermap::<Quantum>::identity(&q("a"), &q("a'")).unwrap());
    let mut rng = rng_from(2);
    let (x, xp) = aux_pair(&mut rng);
    let phi = sample_dext(o.source(), &x, &xp, &mut rng).unwrap();
    assert!(o.eval(&phi).unwrap().distance(&phi).unwrap() < 1e-12);
}

#[test]
fn extraction_respects_composition() {
    let s1 = random_comb::<Quantum>(7).to_supermap().unwrap();
    let c2 = Comb::<Quantum>::random(
        &q("b"),
        &q("b'"),
        &q("c"),
        &q("c'"),
        &q("f"),
        &mut rng_from(8),
    )
    .unwrap();
    let (o1, o2) = (LatOracle::embed(&s1), comb_oracle(c2.clone()));
    let composite = o1.then(&o2).unwrap().extract().unwrap();
    let expected = s1.then(&c2.to_supermap().unwrap()).unwrap();
    assert!(composite.distance(&expected).unwrap() < 1e-10);
}

#[test]
fn embedded_oracles_are_locally_applicable() {
    for seed in 0..2 {
        let o = LatOracle::embed(&comb_supermap(seed));
        let r = check_local_applicability(&o, 20, seed, 1e-9).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(check_convex_linearity(&o, 20, seed, 1e-9).unwrap().passed());
        let c = comb_oracle(random_comb::<Quantum>(seed));
        assert!(check_local_applicability(&c, 20, seed, 1e-9)
            .unwrap()
            .passed());
    }
}

#[test]
fn decorrelating_oracle_is_refuted() {
    let o = decorrelating_oracle(&comb_supermap(3));
    let r = check_local_applicability(&o, 40, 1, 1e-9).unwrap();
    assert!(r.naturality.max_deviation >= 1e-3, "{r:?}");
    assert!(r.naturality.first_failing_seed.is_some());
}

#[test]
fn nonlinear_oracle_is_refuted() {
    let s1 = Supermap::<Quantum>::identity(&q("a"), &q("a'")).unwrap();
    let c = Comb::new(
        Channel::identity(&q("a")),
        Channel::unitary(&q("a'"), &crate::tensor::gates::hadamard()).unwrap(),
        &SystemType::trivial(),
    )
    .unwrap();
    let s2 = c.to_supermap().unwrap();
    let o = nonlinear_oracle(&s1, &s2).unwrap();
    let lin = check_convex_linearity(&o, 40, 5, 1e-9).unwrap();
    assert!(lin.max_deviation >= 1e-3, "{lin:?}");
    let r = check_local_applicability(&o, 40, 5, 1e-9).unwrap();
    assert!(r.max_deviation() >= 1e-3);
    let edge = check_convex_linearity_at(&o, &[0.0, 1.0], 10, 5, 0.0).unwrap();
    assert_eq!(edge.max_deviation, 0.0);
}

#[test]
fn natural_oracles_also_drag() {
    let s = comb_supermap(9);
    let corpus = [
        LatOracle::embed(&s),
        comb_oracle(random_comb::<Quantum>(10)),
        decorrelating_oracle(&s),
        nonlinear_oracle(&s, &comb_supermap(12)).unwrap(),
    ];
    for o in &corpus {
        let r = check_local_applicability(o, 15, 4, 1e-9).unwrap();
        if r.naturality.passed() {
            assert!(r.dragging.passed(), "{}", o.name());
        }
    }
}

#[test]
fn presentations_of_one_map_extend_alike() {
    let o = LatOracle::embed(&comb_supermap(4));
    let k = o.source().clone();
    let mut rng = rng_from(21);
    for _ in 0..8 {
        let base = CpPresentation::random(&k, &mut rng).unwrap();
        let p1 = base
            .flag_padded(&k, rng.random_range(1..=3), &mut rng)
            .unwrap();
        let p2 = base
            .input_padded(&k, rng.random_range(0.3..3.0), &mut rng)
            .unwrap();
        assert!(
            p1.reduced()
                .unwrap()
                .distance(&p2.reduced().unwrap())
                .unwrap()
                < 1e-10
        );
        let e1 = extend_to_cp(&o, &p1).unwrap();
        let e2 = extend_to_cp(&o, &p2).unwrap();
        assert!(e1.distance(&e2).unwrap() < 1e-8);
        assert!(Quantum::is_positive(&e1, 1e-9));
    }
}

#[test]
fn extension_scales_with_the_state() {
    let o = LatOracle::embed(&comb_supermap(5));
    let k = o.source().clone();
    let mut rng = rng_from(3);
    let p = CpPresentation::random(&k, &mut rng).unwrap();
    let base = extend_to_cp(&o, &p).unwrap();
    let scaled = extend_to_cp(&o, &p.scaled(&k, 2.5).unwrap()).unwrap();
    assert!(scaled.distance(&base.scale(2.5)).unwrap() < 1e-10);
}

#[test]
fn normalized_presentation_matches_reduced_evaluation() {
    let o = LatOracle::embed(&comb_supermap(6));
    let k = o.source().clone();
    let mut rng = rng_from(4);
    let (x, xp) = aux_pair(&mut rng);
    let phi = sample_dext(&k, &x, &xp, &mut rng).unwrap();
    let rho = Quantum::random_state(&x, &mut rng);
    let p = CpPresentation::new(&k, phi, rho, Channel::discard(&xp)).unwrap();
    let direct = o.eval(&p.reduced().unwrap()).unwrap();
    assert!(extend_to_cp(&o, &p).unwrap().distance(&direct).unwrap() < 1e-10);
}

#[test]
fn presentation_rejects_bad_data() {
    let k = ChannelSetSpec::<Quantum>::all(&q("a"), &q("a'"));
    let mut rng = rng_from(0);
    let (x, xp) = (q("x"), q("x'"));
    let phi = sample_dext(&k, &x, &xp, &mut rng).unwrap();
    let neg = Quantum::random_state(&x, &mut rng).scale(-1.0);
    assert!(CpPresentation::new(&k, phi.clone(), neg, Channel::discard(&xp)).is_err());
    let wrong = Quantum::random_state(&xp, &mut rng);
    assert!(CpPresentation::new(&k, phi, wrong, Channel::discard(&xp)).is_err());
}

#[test]
fn extraction_needs_normal_convex_source() {
    let (a, ap) = (q("a"), q("a'"));
    let custom =
        ChannelSetSpec::custom(&a, &ap, CustomSet::new("unitaries", |_| true), false, false);
    let o = LatOracle::<Quantum>::new("x", custom, ChannelSetSpec::all(&a, &ap), |_, _, phi| {
        Ok(phi.clone())
    });
    assert!(matches!(o.extract(), Err(Error::NotNormalConvex(_))));
}

#[test]
fn ill_behaved_oracles_are_reported() {
    let (a, ap) = (q("a"), q("a'"));
    let k = ChannelSetSpec::<Quantum>::all(&a, &ap);
    let halving = LatOracle::new("half", k.clone(), k.clone(), |_, _, phi| Ok(phi.scale(0.5)));
    assert!(matches!(halving.extract(), Err(Error::NonDeterministic(_))));
    let dropping = LatOracle::new("drop", k.clone(), k, |_, xp, phi| {
        if xp.is_empty() {
            Ok(phi.clone())
        } else {
            phi.discard_outputs(&xp.labels())
        }
    });
    assert!(matches!(dropping.extract(), Err(Error::TypeMismatch(_))));
}

#[test]
fn eval_is_reentrant() {
    let o = LatOracle::embed(&comb_supermap(13));
    let inputs: Vec<Channel> = (0..8)
        .map(|s| {
            let mut rng = rng_from(s);
            let (x, xp) = aux_pair(&mut rng);
            sample_dext(o.source(), &x, &xp, &mut rng).unwrap()
        })
        .collect();
    let seq: Vec<Channel> = inputs.iter().map(|p| o.eval(p).unwrap()).collect();
    let par: Vec<Channel> = inputs.par_iter().map(|p| o.eval(p).unwrap()).collect();
    for (s, p) in seq.iter().zip(&par) {
        assert_eq!(s.tensor().data(), p.tensor().data());
    }
}

#[test]
fn classical_oracles_round_trip() {
    for seed in 0..5 {
        let c = random_comb::<Classical>(seed);
        let s = c.to_supermap().unwrap();
        assert!(
            LatOracle::embed(&s)
                .extract()
                .unwrap()
                .distance(&s)
                .unwrap()
                < 1e-10
        );
        assert!(comb_oracle(c).extract().unwrap().distance(&s).unwrap() < 1e-10);
    }
}

fn slot_channel(seed: u64, i: &str, o: &str) -> Channel {
    Quantum::random_channel(&q(i), &q(o), &mut rng_from(seed))
}

#[test]
fn multi_slot_extraction_recovers_the_switch() {
    let sw = switch_supermap(2).unwrap();
    let o = MultiLatOracle::embed(&sw);
    let back = o.extract().unwrap();
    assert!(back.body().distance(sw.body()).unwrap() < 1e-10);
}

#[test]
fn curried_slots_extract_to_slot_contractions() {
    let sw = switch_supermap(2).unwrap();
    let o = MultiLatOracle::embed(&sw);
    let multi = o.extract().unwrap();
    let psi2 = slot_channel(1, SLOT2_IN, SLOT2_OUT);
    let psi1 = slot_channel(2, SLOT1_IN, SLOT1_OUT);
    let first = o
        .curry(0, std::slice::from_ref(&psi2))
        .unwrap()
        .extract()
        .unwrap();
    assert!(
        first
            .distance(&multi.curry(0, std::slice::from_ref(&psi2)).unwrap())
            .unwrap()
            < 1e-10
    );
    let second = o
        .curry(1, std::slice::from_ref(&psi1))
        .unwrap()
        .extract()
        .unwrap();
    assert!(
        second
            .distance(&multi.curry(1, std::slice::from_ref(&psi1)).unwrap())
            .unwrap()
            < 1e-10
    );
}

#[test]
fn multi_slot_checks_run_per_slot() {
    let o = MultiLatOracle::embed(&switch_supermap(2).unwrap());
    let reports = o.check_local_applicability(6, 3, 1e-9).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(LocalApplicabilityReport::passed));
    let psi = slot_channel(0, SLOT2_IN, SLOT2_OUT);
    assert!(o.curry(0, &[psi.clone(), psi]).is_err());
}

#[test]
fn non_signaling_source_extracts_a_supermap() {
    let sw = switch_supermap(2).unwrap();
    let s = sw.as_supermap_non_signaling().unwrap();
    let back = LatOracle::embed(&s).extract().unwrap();
    assert!(back.distance(&s).unwrap() < 1e-10);
    assert!(back.check(10, 1, 1e-8).unwrap().passed());
}
