use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use latspi::independence::{indep_event, indep_loc};
use latspi::knowledge::{satisfies, static_equiv_witness, static_impl_witness};
use latspi::lts::{diamond_check, enabled_transitions, Event, ExplorationBounds, Location, LocationLabel};
use latspi::parse::{parse_message, parse_process_with};
use latspi::syntax::{apply_proc_subst, struct_congruent, ActionLabel, ExtendedProcess, Guard, Process};
use latspi::term::Atom;
use latspi::{Alias, AliasMap, Bits, Error, Message, Name, Substitution, Symbol, Theory};

// ---------------------------------------------------------------------------
// Generators.

fn leaf() -> impl Strategy<Value = Message> {
    prop_oneof![Just("a"), Just("b"), Just("k")].prop_map(Message::var)
}

/// Dolev-Yao messages over a, b, k.
fn dy_message() -> impl Strategy<Value = Message> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|m| Message::app("h", vec![m])),
            inner.clone().prop_map(|m| Message::app("fst", vec![m])),
            inner.clone().prop_map(|m| Message::app("snd", vec![m])),
            (inner.clone(), inner.clone()).prop_map(|(m, n)| Message::app("pair", vec![m, n])),
            (inner.clone(), inner.clone()).prop_map(|(m, n)| Message::app("enc", vec![m, n])),
            (inner.clone(), inner).prop_map(|(m, n)| Message::app("dec", vec![m, n])),
        ]
    })
}

fn bits(max: usize) -> impl Strategy<Value = Bits> {
    prop::collection::vec(0u8..2, 0..=max).prop_map(Bits)
}

fn alias() -> impl Strategy<Value = Alias> {
    (bits(2), 0u32..2).prop_map(|(p, s)| Alias::new(p, s))
}

fn location() -> impl Strategy<Value = Location> {
    (bits(4), bits(2)).prop_map(|(prefix, choice)| Location { prefix, choice })
}

fn location_label() -> impl Strategy<Value = LocationLabel> {
    prop_oneof![
        location().prop_map(LocationLabel::Single),
        (location(), location()).prop_map(|(a, b)| LocationLabel::Pair(a, b)),
    ]
}

fn recipe() -> impl Strategy<Value = Message> {
    let atom = prop_oneof![
        alias().prop_map(Message::Alias),
        Just(Message::var("a")),
        Just(Message::var("b")),
    ];
    atom.prop_recursive(2, 6, 1, |inner| inner.prop_map(|m| Message::app("h", vec![m])))
}

fn action() -> impl Strategy<Value = ActionLabel> {
    prop_oneof![
        (recipe(), alias()).prop_map(|(chan, alias)| ActionLabel::Output { chan, alias }),
        (recipe(), recipe()).prop_map(|(chan, payload)| ActionLabel::FreeInput { chan, payload }),
        Just(ActionLabel::Tau),
    ]
}

fn event() -> impl Strategy<Value = Event> {
    (action(), location_label()).prop_map(|(a, l)| Event::new(a, l))
}

fn name_msg() -> impl Strategy<Value = Message> {
    let v = prop_oneof![Just("a"), Just("b"), Just("x"), Just("y")].prop_map(Message::var);
    v.prop_recursive(1, 2, 1, |inner| inner.prop_map(|m| Message::app("h", vec![m])))
}

fn guard(inner: BoxedStrategy<Process>) -> BoxedStrategy<Guard> {
    let chan = prop_oneof![Just("a"), Just("b"), Just("x")].prop_map(Message::var);
    let base = prop_oneof![
        (chan.clone(), name_msg(), inner.clone()).prop_map(|(c, m, p)| Guard::Out(c, m, Arc::new(p))),
        (chan, prop_oneof![Just("x"), Just("y")], inner).prop_map(|(c, x, p)| Guard::In(c, Name::from(x), Arc::new(p))),
    ];
    base.prop_recursive(2, 4, 2, |g| {
        prop_oneof![
            (g.clone(), g.clone()).prop_map(|(a, b)| Guard::Sum(Arc::new(a), Arc::new(b))),
            (name_msg(), name_msg(), g.clone()).prop_map(|(m, n, g)| Guard::Match(m, n, Arc::new(g))),
            (name_msg(), name_msg(), g).prop_map(|(m, n, g)| Guard::Mismatch(m, n, Arc::new(g))),
        ]
    })
    .boxed()
}

/// Small finite processes over channels a, b and names x, y.
fn process() -> BoxedStrategy<Process> {
    Just(Process::Nil)
        .prop_recursive(4, 16, 2, |inner| {
            let inner = inner.boxed();
            prop_oneof![
                guard(inner.clone()).prop_map(Process::guard),
                (prop_oneof![Just("x"), Just("y")], inner.clone()).prop_map(|(x, p)| Process::new_name(x, p)),
                (inner.clone(), inner).prop_map(|(p, q)| Process::par(p, q)),
            ]
        })
        .boxed()
}

fn frame_of(values: &[Message], binders: &[&str]) -> ExtendedProcess {
    let mut frame = Substitution::id();
    for (i, v) in values.iter().enumerate() {
        frame.insert(
            Atom::Alias(Alias::new(Bits(vec![i as u8 % 2; i / 2 + 1]), 0)),
            v.clone(),
        );
    }
    ExtendedProcess {
        binders: binders.iter().map(|b| Name::from(*b)).collect(),
        frame,
        body: Process::Nil,
    }
}

fn frame_values() -> impl Strategy<Value = Vec<Message>> {
    let v = prop_oneof![Just("a"), Just("n"), Just("m")].prop_map(Message::var);
    let m = v.prop_recursive(2, 4, 1, |inner| inner.prop_map(|m| Message::app("h", vec![m])));
    prop::collection::vec(m, 1..3)
}

fn h_theory() -> Theory {
    let mut t = Theory::empty();
    t.add_symbols([Symbol::new("h", 1)]);
    t
}

// ---------------------------------------------------------------------------
// An independent innermost rewriter for the Dolev-Yao rules.

#[derive(Clone, Debug, PartialEq)]
enum T {
    V(String),
    F(String, Vec<T>),
}

fn to_t(m: &Message) -> T {
    match m {
        Message::Var(x) => T::V(x.to_string()),
        Message::App(f, args) => T::F(f.name.to_string(), args.iter().map(to_t).collect()),
        Message::Alias(a) => T::V(format!("{a}")),
    }
}

fn dy_nf(t: &T) -> T {
    let T::F(f, args) = t else { return t.clone() };
    let args: Vec<T> = args.iter().map(dy_nf).collect();
    match (f.as_str(), args.as_slice()) {
        ("fst", [T::F(p, xs)]) if p == "pair" => xs[0].clone(),
        ("snd", [T::F(p, xs)]) if p == "pair" => xs[1].clone(),
        ("dec", [T::F(e, xs), k]) if e == "enc" && &xs[1] == k => xs[0].clone(),
        _ => T::F(f.clone(), args),
    }
}

// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normal_forms_agree_with_a_hand_rewriter(m in dy_message()) {
        let t = Theory::dolev_yao();
        let nf = t.normalize(&m).unwrap();
        prop_assert_eq!(to_t(&nf), dy_nf(&to_t(&m)));
    }

    #[test]
    fn normalize_is_idempotent(m in dy_message()) {
        let t = Theory::dolev_yao();
        let nf = t.normalize(&m).unwrap();
        prop_assert_eq!(t.normalize(&nf).unwrap(), nf);
    }

    #[test]
    fn substitution_distributes_over_application(m in dy_message(), n in dy_message(), s in dy_message()) {
        let sigma = Substitution::var("a", s);
        let whole = Message::app("pair", vec![m.clone(), n.clone()]).apply(&sigma);
        prop_assert_eq!(whole, Message::app("pair", vec![m.apply(&sigma), n.apply(&sigma)]));
    }

    #[test]
    fn normalizing_before_substituting_changes_nothing(m in dy_message(), s in dy_message()) {
        let t = Theory::dolev_yao();
        let sigma = Substitution::var("k", s);
        let direct = t.normalize(&m.apply(&sigma)).unwrap();
        let early = t.normalize(&t.normalize(&m).unwrap().apply(&sigma)).unwrap();
        prop_assert_eq!(direct, early);
    }

    #[test]
    fn alias_maps_invert(pairs in prop::collection::btree_map(alias(), alias(), 1..4), pick in 0usize..4) {
        let mut seen = BTreeSet::new();
        let pairs: Vec<(Alias, Alias)> = pairs.into_iter().filter(|(_, b)| seen.insert(b.clone())).collect();
        let rho = AliasMap::from_pairs(pairs.clone()).unwrap();
        prop_assert!(rho.is_injective());
        prop_assert_eq!(rho.inverse().inverse(), rho.clone());
        // labels over the domain of rho come back unchanged
        let a = pairs[pick % pairs.len()].0.clone();
        let b = pairs[(pick + 1) % pairs.len()].0.clone();
        let labels = [
            ActionLabel::Output { chan: Message::app("h", vec![Message::Alias(b.clone())]), alias: a.clone() },
            ActionLabel::FreeInput { chan: Message::var("c"), payload: Message::Alias(b) },
        ];
        for pi in labels {
            prop_assert_eq!(pi.apply_alias_map(&rho).apply_alias_map(&rho.inverse()), pi);
        }
    }

    #[test]
    fn printing_then_parsing_is_identity(p in process()) {
        let sig = [Symbol::new("h", 1)];
        let back = parse_process_with(&p.to_string(), &sig);
        prop_assert!(back.is_ok(), "{} does not parse: {:?}", p, back);
        prop_assert_eq!(back.unwrap(), p);
    }

    #[test]
    fn congruence_is_an_equivalence(p in process(), q in process()) {
        let (a, b) = (ExtendedProcess::from_process(p), ExtendedProcess::from_process(q));
        prop_assert!(struct_congruent(&a, &a));
        prop_assert_eq!(struct_congruent(&a, &b), struct_congruent(&b, &a));
        prop_assert!(struct_congruent(&a, &a.alpha_canonical()));
        let c = b.alpha_canonical();
        if struct_congruent(&a, &b) {
            prop_assert!(struct_congruent(&a, &c));
        }
    }

    #[test]
    fn substitution_only_touches_its_domain(p in process(), m in name_msg()) {
        let s = Substitution::var("x", m.clone());
        let before = p.free_vars();
        let after = apply_proc_subst(&p, &s).free_vars();
        let mut allowed: BTreeSet<Name> = before.iter().filter(|v| &***v != "x").cloned().collect();
        if before.contains("x") {
            allowed.extend(m.free_vars());
        }
        let kept: BTreeSet<Name> = before.iter().filter(|v| &***v != "x").cloned().collect();
        prop_assert!(kept.is_subset(&after));
        prop_assert!(after.is_subset(&allowed));
    }

    #[test]
    fn location_independence_is_symmetric_and_prefix_invariant(u in location_label(), v in location_label(), b in 0u8..2) {
        prop_assert_eq!(indep_loc(&u, &v), indep_loc(&v, &u));
        prop_assert_eq!(indep_loc(&u.prepend_prefix(b), &v.prepend_prefix(b)), indep_loc(&u, &v));
    }

    #[test]
    fn event_independence_is_symmetric_and_respects_links(e in event(), f in event()) {
        prop_assert_eq!(indep_event(&e, &f), indep_event(&f, &e));
        if let Some(a) = e.action.output_alias() {
            if f.action.fa().contains(a) {
                prop_assert!(!indep_event(&e, &f));
            }
        }
    }

    #[test]
    fn static_comparison_is_symmetric(l in frame_values(), r in frame_values()) {
        prop_assume!(l.len() == r.len());
        let t = h_theory();
        let b = ExplorationBounds { test_depth: 2, ..Default::default() };
        let (fl, fr) = (frame_of(&l, &["n"]), frame_of(&r, &["m"]));
        let id = AliasMap::id();
        let there = static_equiv_witness(&fl, &fr, &id, &t, &b).unwrap();
        let back = static_equiv_witness(&fr, &fl, &id, &t, &b).unwrap();
        prop_assert_eq!(there.is_none(), back.is_none());
        prop_assert!(static_equiv_witness(&fl, &fl, &id, &t, &b).unwrap().is_none());
        if there.is_none() {
            prop_assert!(static_impl_witness(&fl, &fr, &id, &t, &b).unwrap().is_none());
        }
    }

    #[test]
    fn satisfaction_ignores_binder_names(l in frame_values(), m in recipe(), n in recipe()) {
        let t = h_theory();
        let a = frame_of(&l, &["n"]);
        prop_assert_eq!(
            satisfies(&a, &m, &n, &t).unwrap(),
            satisfies(&a.alpha_canonical(), &m, &n, &t).unwrap()
        );
        prop_assert_eq!(satisfies(&a, &m, &n, &t).unwrap(), satisfies(&a.struct_key(), &m, &n, &t).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn transitions_respect_frames_and_locations(p in process()) {
        let t = h_theory();
        let mut b = ExplorationBounds::for_processes(&[&p]);
        b.recipe_depth = 1;
        let a = ExtendedProcess::from_process(p);
        let first = enabled_transitions(&a, &t, &b).unwrap();
        prop_assert_eq!(
            enabled_transitions(&a, &t, &b).unwrap().iter().map(|(e, _)| e.clone()).collect::<Vec<_>>(),
            first.iter().map(|(e, _)| e.clone()).collect::<Vec<_>>()
        );
        for (e, target) in &first {
            let before = a.dom();
            let after = target.dom();
            prop_assert!(before.is_subset(&after));
            match (&e.action, &e.loc) {
                (ActionLabel::Output { alias, .. }, LocationLabel::Single(l)) => {
                    prop_assert_eq!(&alias.prefix, &l.prefix);
                    prop_assert_eq!(after.len(), before.len() + 1);
                }
                (ActionLabel::Output { .. }, _) => prop_assert!(false, "output at a pair location"),
                _ => prop_assert_eq!(after.len(), before.len()),
            }
        }
    }

    #[test]
    fn independent_events_commute(p in process()) {
        let t = h_theory();
        let mut b = ExplorationBounds::for_processes(&[&p]);
        b.recipe_depth = 1;
        b.state_budget = 2_000;
        match diamond_check(&ExtendedProcess::from_process(p.clone()), &t, &b) {
            Ok(v) => prop_assert!(v.is_empty(), "{}: {:?}", p, v),
            Err(Error::StateBudget(_)) => {}
            Err(e) => prop_assert!(false, "{}: {}", p, e),
        }
    }
}

#[test]
fn equality_modulo_the_theory_is_an_equivalence() {
    // every message up to depth 3 over fst, snd, pair and one constant
    let t = Theory::dolev_yao();
    let mut all = vec![Message::var("a")];
    for _ in 0..3 {
        let prev = all.clone();
        let mut next = vec![Message::var("a")];
        for m in &prev {
            next.push(Message::app("fst", vec![m.clone()]));
            next.push(Message::app("snd", vec![m.clone()]));
            for n in &prev {
                next.push(Message::app("pair", vec![m.clone(), n.clone()]));
            }
        }
        all = next;
    }
    assert_eq!(all.len(), 676);
    let nf: Vec<Message> = all.iter().map(|m| t.normalize(m).unwrap()).collect();
    let mut equal: Vec<Vec<usize>> = vec![Vec::new(); all.len()];
    for i in 0..all.len() {
        assert!(t.eq_mod(&all[i], &all[i]).unwrap());
        for j in i + 1..all.len() {
            let e = t.eq_mod(&all[i], &all[j]).unwrap();
            assert_eq!(e, t.eq_mod(&all[j], &all[i]).unwrap());
            assert_eq!(e, nf[i] == nf[j]);
            if e {
                equal[i].push(j);
                equal[j].push(i);
            }
        }
    }
    for (i, class) in equal.iter().enumerate() {
        for &j in class {
            for &k in &equal[j] {
                assert!(
                    k == i || t.eq_mod(&all[i], &all[k]).unwrap(),
                    "{} ~ {} ~ {}",
                    all[i],
                    all[j],
                    all[k]
                );
            }
        }
    }
}

#[test]
fn projections_of_pairs_rewrite_in_two_steps() {
    let t = Theory::dolev_yao();
    let m = parse_message("fst(pair(snd(pair(a,b)), c))").unwrap();
    assert_eq!(to_t(&t.normalize(&m).unwrap()), dy_nf(&to_t(&m)));
    assert_eq!(dy_nf(&to_t(&m)), T::V("b".into()));
    let (e1, e2) = (parse_message("enc(x,k)").unwrap(), parse_message("enc(x,k2)").unwrap());
    assert!(!t.eq_mod(&e1, &e2).unwrap());
    assert_ne!(dy_nf(&to_t(&e1)), dy_nf(&to_t(&e2)));
}
