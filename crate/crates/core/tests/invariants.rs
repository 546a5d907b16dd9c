mod common;

use std::sync::Arc;

use plectic_core::group::{Elem, FiniteGroup, Subgroup};
use plectic_core::plectic::{GaloisContext, PlecticElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// S4 over the stabilizer of 0 (non-abelian, index 4) and (Z/15)^× over {1,4,11,14}.
fn contexts() -> Vec<GaloisContext> {
    let s4 = Arc::new(FiniteGroup::symmetric(4));
    let stab: Vec<Elem> = s4.elements().filter(|&g| s4.name(g).starts_with('0')).collect();
    let h = Subgroup::new(&s4, &stab).unwrap();
    let u15 = Arc::new(FiniteGroup::units_mod(15).unwrap());
    let hf = Subgroup::from_names(&u15, &["1", "4", "11", "14"]).unwrap();
    vec![GaloisContext::new(&s4, &h).unwrap(), GaloisContext::new(&u15, &hf).unwrap()]
}

fn element(ctx: &GaloisContext, seed: &[usize]) -> PlecticElement {
    let r = ctx.r();
    let mut pi: Vec<usize> = (0..r).collect();
    for i in (1..r).rev() {
        pi.swap(i, seed[i] % (i + 1));
    }
    let hs = ctx.h_f().members();
    let h: Vec<Elem> = (0..r).map(|x| hs[seed[r + x] % hs.len()]).collect();
    ctx.element(pi, h).unwrap()
}

fn seeds() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..1000, 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn plectic_group_laws(which in 0usize..2, a in seeds(), b in seeds(), c in seeds()) {
        let ctx = &contexts()[which];
        let (a, b, c) = (element(ctx, &a), element(ctx, &b), element(ctx, &c));
        let ab_c = ctx.compose(&ctx.compose(&a, &b).unwrap(), &c).unwrap();
        let a_bc = ctx.compose(&a, &ctx.compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let inv = ctx.inverse(&a).unwrap();
        prop_assert_eq!(ctx.compose(&a, &inv).unwrap(), ctx.identity());
        prop_assert_eq!(ctx.compose(&ctx.identity(), &a).unwrap(), a);
    }

    #[test]
    fn maps_are_equivariant_and_factor_back(which in 0usize..2, a in seeds()) {
        let ctx = &contexts()[which];
        let a = element(ctx, &a);
        let g = ctx.gamma();
        let map = ctx.as_map(&a).unwrap();
        for x in g.elements() {
            for &h in ctx.h_f().members() {
                prop_assert_eq!(map[g.mul(x, h).0], g.mul(map[x.0], h));
            }
        }
        prop_assert_eq!(ctx.factor(&map).unwrap(), a);
    }

    #[test]
    fn composition_is_composition_of_maps(which in 0usize..2, a in seeds(), b in seeds()) {
        let ctx = &contexts()[which];
        let (a, b) = (element(ctx, &a), element(ctx, &b));
        let (ma, mb) = (ctx.as_map(&a).unwrap(), ctx.as_map(&b).unwrap());
        let mab = ctx.as_map(&ctx.compose(&a, &b).unwrap()).unwrap();
        for x in ctx.gamma().elements() {
            prop_assert_eq!(mab[x.0], ma[mb[x.0].0]);
        }
    }

    #[test]
    fn product_map_is_a_section_free_homomorphism(which in 0usize..2, a in seeds(), b in seeds(), t in seeds()) {
        let ctx = &contexts()[which];
        let (a, b) = (element(ctx, &a), element(ctx, &b));
        let hf = ctx.hf_ab().group();
        let pab = ctx.product_map(&ctx.compose(&a, &b).unwrap()).unwrap();
        prop_assert_eq!(pab, hf.add(&ctx.product_map(&a).unwrap(), &ctx.product_map(&b).unwrap()));
        let hs = ctx.h_f().members();
        let shift: Vec<Elem> = (0..ctx.r()).map(|x| hs[t[x] % hs.len()]).collect();
        let other = ctx.rebased(&shift).unwrap();
        let a2 = other.factor(&ctx.as_map(&a).unwrap()).unwrap();
        prop_assert_eq!(other.product_map(&a2).unwrap(), ctx.product_map(&a).unwrap());
    }

    #[test]
    fn transfer_is_a_homomorphism_and_matches_p(which in 0usize..2, i in 0usize..24, j in 0usize..24) {
        let ctx = &contexts()[which];
        let g = ctx.gamma();
        let (x, y) = (Elem(i % g.order()), Elem(j % g.order()));
        let hf = ctx.hf_ab().group();
        prop_assert_eq!(ctx.transfer(g.mul(x, y)), hf.add(&ctx.transfer(x), &ctx.transfer(y)));
        prop_assert_eq!(ctx.product_map(&ctx.embed(x)).unwrap(), ctx.transfer(x));
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lattice_solvers_match_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, failures) = common::lattice_sweep(&mut rng, 24, 1);
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }
}

#[test]
fn stabilizer_has_index_four() {
    let ctx = &contexts()[0];
    assert_eq!(ctx.r(), 4);
    assert!(!ctx.gamma().is_abelian());
}
