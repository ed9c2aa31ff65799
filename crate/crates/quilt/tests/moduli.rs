use num_traits::Zero;
use once_cell::sync::Lazy;
use quilt::associator::{solve_associator, solve_associator_with, Associator, TieBreak};
use quilt::chords::ChordSeries;
use quilt::hopf::{gamma_h, gamma_m, tau_morphism};
use quilt::jet::{monomials_up_to, Jet};
use quilt::liealg::{bch, double, LieBialgebra, ManinTriple, Subalgebra};
use quilt::linalg::SparseVec;
use quilt::moduli::*;
use quilt::rational::{q, Q};
use quilt::spaces::{apply_derivation, poisson_bracket, BoundStrand, ChordAction, Derivation, GSpace};

static ASSOC: Lazy<Associator> = Lazy::new(|| solve_associator(3).unwrap());

fn example() -> ManinTriple {
    double(&LieBialgebra::example()).unwrap()
}

/// Replace every space by one with the zero action.
fn trivial_spaces(s: &mut SkeletizedColouredSurface) {
    for x in s.spaces.values_mut() {
        for d in x.fields.iter_mut() {
            *d = Derivation::zero(d.nvars(), d.precision);
        }
    }
}

fn set_colour(s: &mut SkeletizedColouredSurface, c: Subalgebra) {
    for v in s.colours.values_mut() {
        *v = c.clone();
    }
}

#[test]
fn one_vertex_surfaces_validate() {
    let mt = example();
    for n in 0..=3 {
        assert!(gamma_h(&mt, n, 3).validate().is_empty(), "n = {n}");
    }
    let h = GSpace::group(&mt, 3);
    assert!(gamma_m(&mt, &h, 1, 3).validate().is_empty());
}

#[test]
fn diagnostics_name_the_failing_datum() {
    let mt = example();
    let mut s = gamma_h(&mt, 1, 3);
    s.graph.vertices.push(Vertex { name: "lonely".into(), sign: Sign::Minus });
    s.colours.insert("lonely".into(), Subalgebra::zero());
    let d = s.validate();
    assert!(d.iter().any(|x| x.contains("not surjective") && x.contains("lonely")), "{d:?}");

    let mut s = gamma_h(&mt, 1, 3);
    // The line through e1 + e^1 is a subalgebra but not coisotropic.
    set_colour(&mut s, Subalgebra::new(vec![vec![q(1), q(0), q(1), q(0)]]));
    let d = s.validate();
    assert_eq!(d, vec!["colour of vertex * is not coisotropic".to_string()]);

    let mut s = gamma_h(&mt, 1, 3);
    set_colour(&mut s, Subalgebra::new(vec![vec![q(0), q(1), q(0), q(0)], vec![q(0), q(0), q(0), q(1)]]));
    assert!(s.validate().iter().any(|x| x.contains("not a subalgebra")));

    let mut s = gamma_h(&mt, 1, 3);
    s.spaces.remove("1");
    assert_eq!(s.validate(), vec!["half-edge 1 has no space".to_string()]);

    let mut s = gamma_h(&mt, 1, 3);
    s.graph.edges.push(Edge { name: "e".into(), plus: "0".into(), minus: "1".into() });
    let d = s.validate();
    assert!(d.iter().any(|x| x.contains("wrong sign")), "{d:?}");
    assert!(matches!(classical_moduli(&s, 2), Err(ModuliError::Invalid(_))));
}

#[test]
fn graph_files_round_trip() {
    let src = r#"
[[vertex]]
name = "v"
sign = "+"
cilia = ["a", "b"]

[[vertex]]
name = "w"
sign = "-"
cilia = ["c"]

[[edge]]
name = "e"
plus = "a"
minus = "c"
"#;
    let g = CiliatedGraph::from_toml(src).unwrap();
    assert!(g.diagnostics().is_empty());
    assert_eq!(g.widowed(), vec!["b".to_string()]);
    assert_eq!(g.fiber("v"), vec!["a".to_string(), "b".to_string()]);
    assert_eq!(CiliatedGraph::from_toml(&g.to_toml()).unwrap(), g);
    assert!(render_graph(&g).contains("e: a ====== c"));
    assert!(matches!(CiliatedGraph::from_toml("[[vertex]]\nname = 3"), Err(ModuliError::Parse(_))));
}

#[test]
fn x_gamma_of_small_surfaces() {
    let mt = example();
    let one = gamma_h(&mt, 0, 3);
    let x = build_x_gamma(&one);
    assert_eq!(x.nvars, 2);
    assert_eq!(x.factors.len(), 1);
    assert_eq!(x.factors[0].space, GSpace::group(&mt, 3));

    let two = gamma_h(&mt, 1, 3);
    let x = build_x_gamma(&two);
    assert_eq!(x.nvars, 4);
    assert_eq!(x.strands.len(), 2);
    assert!(x.strands.values().all(|s| s.sign == Sign::Plus));
    assert_eq!(x.factor_vars(1, 0), vec![2, 3]);

    let (u, _) = disjoint_union(&one, &two);
    let x = build_x_gamma(&u);
    assert_eq!(x.nvars, 6);
    assert_eq!(u.components().len(), 2);
    let (same, rename) = disjoint_union(&two, &SkeletizedColouredSurface::empty(mt.clone()));
    assert_eq!(same, two);
    assert!(rename.is_empty());
}

#[test]
fn classical_moduli_dimensions() {
    let mt = example();
    let order = 3;
    let mut free = gamma_h(&mt, 1, order);
    trivial_spaces(&mut free);
    assert_eq!(classical_moduli(&free, order).unwrap().dim(), monomials_up_to(4, order).len());
    // Invariants of H × H under diagonal h look like jets on H.
    let cm = classical_moduli(&gamma_h(&mt, 1, order), order).unwrap();
    assert_eq!(cm.dim(), monomials_up_to(2, order).len());
    let cm0 = classical_moduli(&gamma_h(&mt, 0, order), order).unwrap();
    assert_eq!(cm0.dim(), 1);
    assert_eq!(cm0.basis[0], Jet::one(2, order));
}

fn classical_product_check(a: &QuantModuliAlgebra) {
    let cm = &a.classical;
    for i in 0..cm.dim() {
        for j in 0..cm.dim() {
            if cm.degrees[i] + cm.degrees[j] > cm.order {
                continue;
            }
            let prod = cm.basis[i].mul(&cm.basis[j]);
            let want = cm.decompose(&prod, cm.order).unwrap();
            let got = a.consts[0].get(&(i, j)).cloned().unwrap_or_default();
            assert_eq!(got, want, "({i}, {j})");
        }
    }
}

#[test]
fn singleton_fibers_give_the_classical_product() {
    let mt = example();
    let mut s = gamma_h(&mt, 0, 3);
    trivial_spaces(&mut s);
    let a = quantize(&s, &ASSOC, 2, 3).unwrap();
    assert_eq!(a.dim(), 10);
    assert!(a.consts[1..].iter().all(|c| c.is_empty()));
    classical_product_check(&a);
}

static EXAMPLE_Q: Lazy<QuantModuliAlgebra> = Lazy::new(|| quantize(&gamma_h(&example(), 1, 3), &ASSOC, 2, 3).unwrap());

#[test]
fn star_product_is_associative_and_unital() {
    let a = &*EXAMPLE_Q;
    assert_eq!(a.associativity_witness(), None);
    let s = a.space();
    let u = a.unit();
    for l in 0..a.dim() {
        let b = s.basis_elem(l);
        assert!(s.eq(&a.star(&u, &b), &s.mask(&b)));
        assert!(s.eq(&a.star(&b, &u), &s.mask(&b)));
    }
    let ab = quantize(&gamma_h(&double(&LieBialgebra::abelian(2)).unwrap(), 1, 3), &ASSOC, 2, 3).unwrap();
    assert_eq!(ab.associativity_witness(), None);
}

#[test]
fn classical_limit_is_the_pointwise_product() {
    classical_product_check(&EXAMPLE_Q);
}

/// ι(G)(x0, x1) = G(x0·x1⁻¹) on H × H.
fn iota(mt: &ManinTriple, g: &Jet, order: usize) -> Jet {
    let v = |i: usize| Jet::var(4, order, i);
    let x0 = [v(0), v(1)];
    let x1 = [v(2).neg(), v(3).neg()];
    g.with_order(order).compose(&bch(&mt.bialgebra.h, &x0, &x1))
}

#[test]
fn first_order_commutator_is_the_poisson_bracket() {
    let mt = example();
    let a = &*EXAMPLE_Q;
    let cm = &a.classical;
    let big = cm.order + 2;
    let h = GSpace::group(&mt, big);
    let at_identity = [Jet::var(2, big, 0), Jet::var(2, big, 1), Jet::zero(2, big), Jet::zero(2, big)];
    let reduce = |b: &Jet| b.with_order(big).compose(&at_identity);
    let trusted = cm.order - cm.weight;
    let mut nonzero = 0;
    for i in 0..cm.dim() {
        for j in 0..cm.dim() {
            if cm.degrees[i] + cm.degrees[j] > cm.order {
                continue;
            }
            let mut comm: SparseVec = a.consts[1].get(&(i, j)).cloned().unwrap_or_default();
            for (l, c) in a.consts[1].get(&(j, i)).cloned().unwrap_or_default() {
                *comm.entry(l).or_insert_with(Q::zero) -= c;
            }
            comm.retain(|l, c| !c.is_zero() && cm.degrees[*l] <= trusted);
            let pb = poisson_bracket(&h, &mt, &reduce(&cm.basis[i]), &reduce(&cm.basis[j])).unwrap();
            let want = cm.decompose(&iota(&mt, &pb, big), trusted).unwrap();
            assert_eq!(comm, want, "({i}, {j})");
            nonzero += !want.is_empty() as usize;
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn invariant_basis_factors_through_the_quotient() {
    let mt = example();
    let cm = &EXAMPLE_Q.classical;
    for b in &cm.basis {
        let at_identity = [Jet::var(2, 3, 0), Jet::var(2, 3, 1), Jet::zero(2, 3), Jet::zero(2, 3)];
        let f = b.compose(&at_identity);
        assert_eq!(&iota(&mt, &f, 3), b);
    }
}

#[test]
fn disjoint_union_quantizes_to_the_tensor_product() {
    let mt = example();
    let a = gamma_h(&mt, 1, 3);
    let mut b = gamma_h(&mt, 0, 3);
    trivial_spaces(&mut b);
    let (u, _) = disjoint_union(&a, &b);
    let qa = quantize(&a, &ASSOC, 2, 3).unwrap();
    let qb = quantize(&b, &ASSOC, 2, 3).unwrap();
    let qu = quantize(&u, &ASSOC, 2, 3).unwrap();
    let t = qa.tensor(&qb);
    assert_eq!(qu.classical.degrees, t.classical.degrees);
    assert_eq!(qu.classical.basis, t.classical.basis);
    assert_eq!(qu.consts, t.consts);
}

fn h1() -> SkeletizedColouredSurface {
    gamma_h(&example(), 1, 3)
}

fn tau(t: &[usize], n: usize, m: usize) -> SurfaceMorphism {
    let mt = example();
    tau_morphism(t, &gamma_h(&mt, n, 3), &gamma_h(&mt, m, 3)).unwrap()
}

fn star_map(m: &FMap, src: &QuantModuliAlgebra, dst: &QuantModuliAlgebra) -> Option<(usize, usize)> {
    let (s, d) = (src.space(), dst.space());
    for i in 0..src.dim() {
        for j in 0..src.dim() {
            let (x, y) = (s.basis_elem(i), s.basis_elem(j));
            let lhs = m.apply(&src.star(&x, &y));
            let rhs = dst.star(&m.apply(&x), &m.apply(&y));
            if !d.eq(&lhs, &rhs) {
                return Some((i, j));
            }
        }
    }
    None
}

fn gallery() -> Vec<(&'static str, SurfaceMorphism)> {
    let mut abelian_pt = gamma_h(&example(), 0, 3);
    trivial_spaces(&mut abelian_pt);
    vec![
        ("identity", SurfaceMorphism::identity(&h1())),
        ("merge", tau(&[0, 0], 1, 0)),
        ("skip", tau(&[0, 2], 1, 2)),
        ("collapse", tau(&[0, 1, 1], 2, 1)),
        ("union", tau(&[0, 2], 1, 2).disjoint(&SurfaceMorphism::identity(&abelian_pt))),
    ]
}

#[test]
fn gallery_morphisms_are_algebra_maps() {
    for (name, phi) in gallery() {
        let (m, _, _) = apply_morphism(&phi, &ASSOC, 2, 3).unwrap();
        let src = quantize(&phi.source, &ASSOC, 2, 3).unwrap();
        let dst = quantize(&phi.target, &ASSOC, 2, 3).unwrap();
        assert_eq!(star_map(&m, &src, &dst), None, "{name}");
        assert!(dst.space().eq(&m.apply(&src.unit()), &dst.unit()), "{name}");
    }
}

#[test]
fn identity_morphism_is_the_identity() {
    let (m, _, _) = apply_morphism(&SurfaceMorphism::identity(&h1()), &ASSOC, 2, 3).unwrap();
    assert_eq!(m, FMap::identity(&EXAMPLE_Q.space()).masked());
}

#[test]
fn morphisms_compose() {
    let pairs = [
        (tau(&[0, 2], 1, 2), tau(&[0, 1, 1], 2, 1)),
        (tau(&[0, 2], 1, 2), tau(&[0, 0, 0], 2, 0)),
        (tau(&[0, 0], 1, 0), SurfaceMorphism::identity(&gamma_h(&example(), 0, 3))),
        (tau(&[0, 1], 1, 2), tau(&[0, 2, 2], 2, 2)),
    ];
    for (phi, psi) in pairs {
        let whole = apply_morphism(&phi.then(&psi), &ASSOC, 2, 3).unwrap().0;
        let first = apply_morphism(&phi, &ASSOC, 2, 3).unwrap().0;
        let second = apply_morphism(&psi, &ASSOC, 2, 3).unwrap().0;
        assert_eq!(whole.first_difference(&second.compose(&first)), None);
    }
}

#[test]
fn morphisms_are_monoidal() {
    let (phi, psi) = (tau(&[0, 2], 1, 2), tau(&[0, 0], 1, 0));
    let joint = apply_morphism(&phi.disjoint(&psi), &ASSOC, 2, 3).unwrap().0;
    let a = apply_morphism(&phi, &ASSOC, 2, 3).unwrap().0;
    let b = apply_morphism(&psi, &ASSOC, 2, 3).unwrap().0;
    assert_eq!(joint.first_difference(&a.tensor(&b)), None);
}

#[test]
fn invalid_morphisms_are_rejected() {
    let mut phi = tau(&[0, 0], 1, 0);
    phi.half_edge_map.insert("1".into(), "7".into());
    assert!(matches!(apply_morphism(&phi, &ASSOC, 2, 3), Err(ModuliError::Morphism(_))));
    let short = Associator::trivial(1);
    assert!(matches!(
        apply_morphism(&tau(&[0, 0], 1, 0), &short, 2, 3),
        Err(ModuliError::AssociatorDegree { have: 1, want: 2 })
    ));
    assert!(matches!(quantize(&h1(), &short, 2, 3), Err(ModuliError::AssociatorDegree { .. })));
}

#[test]
fn diagonal_pullback() {
    let phi = tau(&[0, 0], 1, 0);
    let subst = pullback_diagonal(&phi, 3);
    // Both factors of H × H land on the single factor.
    assert_eq!(subst[0], subst[2]);
    assert_eq!(subst[1], subst[3]);
    let f = Jet::var(4, 3, 0).mul(&Jet::var(4, 3, 3));
    assert_eq!(pull_back(&f, &subst), Jet::var(2, 3, 0).mul(&Jet::var(2, 3, 1)));
    let id = pullback_diagonal(&SurfaceMorphism::identity(&h1()), 3);
    assert_eq!(id, (0..4).map(|i| Jet::var(4, 3, i)).collect::<Vec<_>>());
}

/// Operator matrix of the block chord between the fibers of the two copies
/// of H × H, on products of diagonal invariants.
#[test]
fn cross_chords_annihilate_reduced_invariants() {
    let mt = example();
    let order = 5;
    let cm = classical_moduli(&gamma_h(&mt, 1, order), 3).unwrap();
    let h = GSpace::group(&mt, order);
    let s: Vec<String> = ["0a", "1a", "0b", "1b"].iter().map(|x| x.to_string()).collect();
    let mut act = ChordAction::new(8, &quilt::liealg::casimir(&mt));
    for (k, l) in s.iter().enumerate() {
        act.bind(l, BoundStrand::new(&h, 8, &[2 * k, 2 * k + 1], false));
    }
    let block = ChordSeries::block_chord(&s, 1, &s[..2], &s[2..]).unwrap();
    let single = ChordSeries::chord(&s, 1, &s[0], &s[2]).unwrap();
    let left: Vec<usize> = (0..4).collect();
    let right: Vec<usize> = (4..8).collect();
    let mut single_nonzero = false;
    for f in &cm.basis {
        for g in &cm.basis {
            let fg = f.with_order(order).relabel(8, &left).mul(&g.with_order(order).relabel(8, &right));
            let img = act.apply(&block, &fg).unwrap();
            assert!(img[1].order >= 3);
            assert!(img[1].truncate(3).is_zero());
            single_nonzero |= !act.apply(&single, &fg).unwrap()[1].truncate(3).is_zero();
        }
    }
    assert!(single_nonzero);
}

#[test]
fn invariants_are_killed_by_the_colour() {
    let mt = example();
    let s = gamma_h(&mt, 1, 4);
    let cm = classical_moduli(&s, 3).unwrap();
    let xg = build_x_gamma(&s);
    let ds: Vec<Derivation> = xg.vertex_derivations(&s);
    for b in &cm.basis {
        for d in &ds {
            // Degree 3 of the image would need the truncated degree-4 terms.
            assert!(apply_derivation(d, &b.with_order(4)).unwrap().truncate(2).is_zero());
        }
    }
}

#[test]
fn first_order_constants_ignore_the_tie_break() {
    let mt = example();
    let s = gamma_h(&mt, 1, 3);
    let zero = solve_associator_with(3, TieBreak::Zero).unwrap();
    let one = solve_associator_with(3, TieBreak::One).unwrap();
    assert_ne!(zero.phi, one.phi);
    let a = quantize(&s, &zero, 3, 3).unwrap();
    let b = quantize(&s, &one, 3, 3).unwrap();
    assert_eq!(a.consts[0], b.consts[0]);
    assert_eq!(a.consts[1], b.consts[1]);
    assert_ne!(a.associator_id, b.associator_id);
}

#[test]
fn json_output_is_stable() {
    let a = &*EXAMPLE_Q;
    let j = a.to_json();
    assert_eq!(j["jet_order"], 3);
    assert_eq!(j["basis"].as_array().unwrap().len(), a.dim());
    assert_eq!(serde_json::to_string(&j).unwrap(), serde_json::to_string(&a.to_json()).unwrap());
}

#[test]
fn bracketings_give_isomorphic_algebras() {
    use quilt::ordcat::{ParenthesizedOrderedMorphism, Tree};
    use std::collections::BTreeMap;
    let mt = example();
    let s = gamma_h(&mt, 2, 3);
    let i = s.graph.incidence(Sign::Plus).unwrap();
    let leaves: Vec<String> = (0..3).map(|k| k.to_string()).collect();
    let left = ParenthesizedOrderedMorphism::new(i.clone(), vec![Tree::left_comb(&leaves)]).unwrap();
    let right = ParenthesizedOrderedMorphism::new(i, vec![Tree::right_comb(&leaves)]).unwrap();
    let with = |p: &ParenthesizedOrderedMorphism| {
        let parens: BTreeMap<Sign, ParenthesizedOrderedMorphism> = [(Sign::Plus, p.clone())].into_iter().collect();
        quantize_parenthesized(&s, &ASSOC, 2, 3, &parens).unwrap()
    };
    let (al, ar) = (with(&left), with(&right));
    assert_eq!(al.consts, quantize(&s, &ASSOC, 2, 3).unwrap().consts);
    assert_ne!(al.consts, ar.consts);
    assert_eq!(ar.associativity_witness(), None);
    let t = reparenthesization_map(&s, &ASSOC, 2, 3, Sign::Plus, &left, &right).unwrap();
    assert_eq!(star_map(&t, &al, &ar), None);
    assert!(ar.space().eq(&t.apply(&al.unit()), &ar.unit()));
    // The map is invertible: its ℏ⁰ part is the identity.
    assert_eq!(t.mats[0], quilt::linalg::Mat::identity(al.dim()));
}
