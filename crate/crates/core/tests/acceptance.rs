//! Acceptance checks. Runs without the test harness so that the one
//! PASS/FAIL line per criterion is always printed; the process exits
//! nonzero if any criterion fails.
//!
//! Tolerances: finite pairs must give exact verdicts; replicated pairs are
//! run at the bounds listed next to them and must give a bounded `Related`
//! or a witness that replays. Witness depths are counted in rounds.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use latspi::corpus::{load_corpus, CorpusCase, Expected};
use latspi::equivalence::{
    check_with, prepare, witness_replay, CheckOptions, GameConfig, RelationKind, Verdict, Witness, ALL_RELATIONS,
};
use latspi::knowledge::satisfies;
use latspi::lts::{diamond_check, enabled_transitions, Event, ExplorationBounds, LocationLabel};
use latspi::parse::{parse_extended, parse_process_with};
use latspi::syntax::{struct_congruent, ActionLabel, ExtendedProcess, Process};
use latspi::{Alias, Message, Symbol, Theory};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
/// (pair name, relation, exhaustive ST attacker).
type Job<'a> = (String, &'a str, bool);

fn h_theory() -> Theory {
    let mut t = Theory::empty();
    t.add_symbols([Symbol::new("h", 1)]);
    t
}

fn proc(text: &str, theory: &Theory) -> Process {
    let sig: Vec<Symbol> = theory.signature.iter().cloned().collect();
    parse_process_with(text, &sig).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Runs one check and replays any strategy it returns. Bisimulation
/// verdicts are also checked for symmetry.
fn run(rel: &str, left: &str, right: &str, dy: bool, bounds: &str, opts: CheckOptions) -> Result<Verdict, String> {
    let base = if dy { Theory::dolev_yao() } else { h_theory() };
    let kind = RelationKind::parse(rel).ok_or_else(|| format!("unknown relation {rel}"))?;
    let (p, q) = (proc(left, &base), proc(right, &base));
    let mut b = ExplorationBounds::default();
    b.apply_overrides(bounds)?;
    let v = check_with(kind, &p, &q, &base, &b, opts).map_err(|e| format!("{rel}: {e}"))?;
    let (theory, prepared) = prepare(&p, &q, &base, &b);
    if !v.is_related() {
        witness_replay(&v, &GameConfig::initial(kind, &p, &q), &theory, &prepared, opts)
            .map_err(|e| format!("{rel}: strategy does not replay: {e}"))?;
    }
    if kind.is_bisim() {
        let back = check_with(kind, &q, &p, &base, &b, opts).map_err(|e| format!("{rel}: {e}"))?;
        if back.class() != v.class() {
            return Err(format!("{rel} is not symmetric: {} vs {}", v.class(), back.class()));
        }
        if let Some(w) = v.witness() {
            let flipped = Verdict::Distinguished {
                witness: w.mirrored(),
                bounds: prepared.clone(),
            };
            witness_replay(&flipped, &GameConfig::initial(kind, &q, &p), &theory, &prepared, opts)
                .map_err(|e| format!("{rel}: mirrored strategy does not replay: {e}"))?;
        }
    }
    Ok(v)
}

fn expect(rel: &str, left: &str, right: &str, dy: bool, bounds: &str, want: Expected) -> Result<Verdict, String> {
    let v = run(rel, left, right, dy, bounds, CheckOptions::default())?;
    let got = Expected::of(&v);
    if got != want {
        return Err(format!("{rel}: expected {} got {}", want.as_str(), got.as_str()));
    }
    Ok(v)
}

fn out_event(chan: &str, alias: &str, loc: &str) -> Event {
    Event::new(
        ActionLabel::Output {
            chan: Message::var(chan),
            alias: Alias::parse(alias).unwrap(),
        },
        LocationLabel::parse(loc).unwrap(),
    )
}

fn static_tests(w: &Witness, out: &mut Vec<(Message, Message)>) {
    match w {
        Witness::Static { test } => out.push((test.m.clone(), test.n.clone())),
        Witness::Failure { .. } => {}
        Witness::Move { responses, .. } => responses.iter().for_each(|r| static_tests(&r.next, out)),
    }
}

/// Leading events along every branch, outermost first.
fn leads(w: &Witness, out: &mut Vec<Event>) {
    if let Witness::Move { event, responses, .. } = w {
        out.push(event.clone());
        responses.iter().for_each(|r| leads(&r.next, out));
    }
}

fn on_channel(e: &Event, c: &str) -> bool {
    match &e.action {
        ActionLabel::Output { chan, .. } | ActionLabel::FreeInput { chan, .. } => chan == &Message::var(c),
        ActionLabel::Tau => false,
    }
}

// ---------------------------------------------------------------------------

fn c1() -> Outcome {
    let t = h_theory();
    let a = ExtendedProcess::from_process(proc("new x.(out(a,x) | out(b,h(x)))", &t));
    let b = ExplorationBounds::for_processes(&[&a.body]);
    let first = enabled_transitions(&a, &t, &b).map_err(|e| e.to_string())?;
    let got: BTreeSet<Event> = first.iter().map(|(e, _)| e.clone()).collect();
    let want: BTreeSet<Event> = [out_event("a", "0l", "0[]"), out_event("b", "1l", "1[]")]
        .into_iter()
        .collect();
    if got != want {
        return Err(format!("initial events {got:?}"));
    }
    let mut finals = Vec::new();
    for (e0, s0) in &first {
        let next = enabled_transitions(s0, &t, &b).map_err(|e| e.to_string())?;
        let [(_, s1)] = next.as_slice() else {
            return Err(format!("after {e0}: {} transitions", next.len()));
        };
        finals.push(s1.clone());
    }
    if !struct_congruent(&finals[0], &finals[1]) {
        return Err(format!("final states differ: {} / {}", finals[0], finals[1]));
    }
    Ok("two initial events; both orders meet".into())
}

fn c2() -> Outcome {
    let t = h_theory();
    let frame = parse_extended("new x.{0l := x, 1l := h(x)} | 0").map_err(|e| e.to_string())?;
    let h0 = Message::app("h", vec![Message::alias("0", 0)]);
    let ok1 = satisfies(&frame, &h0, &Message::alias("1", 0), &t).map_err(|e| e.to_string())?;
    let open = parse_extended("{l := x} | 0").map_err(|e| e.to_string())?;
    let closed = parse_extended("new y.{l := y} | 0").map_err(|e| e.to_string())?;
    let l = Message::alias("", 0);
    let x = Message::var("x");
    let ok2 = satisfies(&open, &l, &x, &t).map_err(|e| e.to_string())?;
    let ok3 = !satisfies(&closed, &l, &x, &t).map_err(|e| e.to_string())?;
    if ok1 && ok2 && ok3 {
        Ok("h(0l)=1l holds; l=x holds open, fails under new".into())
    } else {
        Err(format!("results {ok1} {ok2} {ok3}"))
    }
}

fn c3() -> Outcome {
    let (p, q) = ("new y.(out(a,x) + out(a,y))", "out(a,x)");
    expect("presim-i", p, q, false, "", Expected::RelatedExact)?;
    expect("presim-i", q, p, false, "", Expected::RelatedExact)?;
    let v = expect("sim-i", p, q, false, "", Expected::Distinguished)?;
    let mut tests = Vec::new();
    static_tests(v.witness().unwrap(), &mut tests);
    let want = (Message::alias("", 0), Message::var("x"));
    if !tests
        .iter()
        .any(|(m, n)| (m, n) == (&want.0, &want.1) || (n, m) == (&want.0, &want.1))
    {
        return Err(format!("static tests {tests:?}"));
    }
    Ok("presim both ways; sim-i separated by l = x".into())
}

fn c4() -> Outcome {
    expect(
        "sim-i",
        "new x.out(b,h(x)).out(a,x)",
        "new x.(out(b,h(x)) | out(a,x))",
        false,
        "",
        Expected::RelatedExact,
    )?;
    expect(
        "sim-i",
        "new x.(out(a,x) | out(x,h(x)))",
        "new x.out(a,x).out(x,h(x))",
        false,
        "",
        Expected::RelatedExact,
    )?;
    Ok("both similarities hold".into())
}

fn c5() -> Outcome {
    expect(
        "sim-i",
        "new c.new d.((out(d,d) | new n.out(a,n).in(d,z).in(n,x)) | (out(c,c) | in(c,y)))",
        "new c.new d.new n.((out(d,d) | out(a,n).in(d,z)) | (out(c,c) | in(c,y).in(n,x)))",
        false,
        "",
        Expected::RelatedExact,
    )?;
    Ok("swap similarity holds".into())
}

fn c6() -> Outcome {
    let (p, q) = ("(new x.out(a,x)) | (new x.out(a,x))", "new x.out(a,x).new x.out(a,x)");
    expect("bisim-i", p, q, false, "", Expected::RelatedExact)?;
    expect("sim-st", p, q, false, "", Expected::Distinguished)?;
    Ok("bisim-i holds; sim-st separates".into())
}

const EQ2: (&str, &str) = (
    "new x.new y.new z.out(a,x).(out(b,y) | out(c,z))",
    "new x.new y.new z.(out(a,x).out(b,y) | out(c,z))",
);

fn c7() -> Outcome {
    expect("sim-st", EQ2.0, EQ2.1, false, "", Expected::RelatedExact)?;
    let v = expect("sim-hp", EQ2.0, EQ2.1, false, "", Expected::Distinguished)?;
    let mut ev = Vec::new();
    leads(v.witness().unwrap(), &mut ev);
    if !ev.iter().any(|e| on_channel(e, "c")) {
        return Err(format!("no move on c in {ev:?}"));
    }
    Ok(format!(
        "sim-hp witness plays {}",
        ev.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" then ")
    ))
}

fn c8() -> Outcome {
    let (p, q) = (
        "new a.new b.((out(a,a) | (in(a,x) + in(b,x))) | out(c,c).out(b,b))",
        "new a.((out(a,a) | in(a,x)) | out(c,c))",
    );
    expect("bisim-st", p, q, false, "", Expected::RelatedExact)?;
    expect("sim-hp", p, q, false, "", Expected::Distinguished)?;
    Ok("bisim-st holds; sim-hp separates".into())
}

fn c9() -> Outcome {
    let one = "!new x.out(a,x)";
    let two = "!(new x.out(a,x).new x.out(a,x))";
    let mut notes = Vec::new();
    for unfold in [2, 3] {
        let bounds = format!("unfold={unfold},game=12");
        expect("bisim-st", one, two, false, &bounds, Expected::RelatedBounded)?;
        let v = expect("sim-hp", two, one, false, &bounds, Expected::Distinguished)?;
        let d = v.witness().unwrap().depth();
        if d > 3 {
            return Err(format!("sim-hp witness has depth {d} at unfold={unfold}"));
        }
        notes.push(format!("unfold={unfold}: hp depth {d}"));
    }
    Ok(format!("bisim-st bounded, {}", notes.join(", ")))
}

fn c10() -> Outcome {
    let (p, q) = ("new n.(out(a,n) | in(n,x))", "new n.out(a,n).in(n,x)");
    let v = expect("bisim-hp", p, q, false, "", Expected::RelatedExact)?;
    expect("bisim-ifull", p, q, false, "", Expected::RelatedExact)?;
    expect("bisim-iloc", p, q, false, "", Expected::Distinguished)?;
    expect(
        "bisim-ifull",
        "new n.(out(a,n) | in(n,x).out(ok,ok))",
        "new n.out(a,n).in(n,x).out(ok,ok)",
        false,
        "",
        Expected::Distinguished,
    )?;
    let Verdict::Related { relation_size, .. } = v else {
        unreachable!()
    };
    Ok(format!(
        "link pair hp-related ({relation_size} positions); located variants as expected"
    ))
}

const PRIV_LEFT: &str = "new k.((new r.out(a,enc(pair(r,hi),k)) | new m.new r2.(out(a,m) + out(a,enc(pair(r2,hi),k)))) | in(b,x).[snd(dec(x,k)) = hi] out(a,enc(ok,k)))";
const PRIV_RIGHT: &str =
    "new k.((new r.out(a,enc(pair(r,hi),k)) | new m.out(a,m)) | in(b,x).[snd(dec(x,k)) = hi] out(a,enc(ok,k)))";
const PRIV_REPL_LEFT: &str =
    "new k.((!new r.out(a,enc(pair(r,hi),k)) | !new m.out(a,m)) | in(b,x).[snd(dec(x,k)) = hi] out(a,enc(ok,k)))";
const PRIV_REPL_RIGHT: &str =
    "new k.((new r.out(a,enc(pair(r,hi),k)) | !new m.out(a,m)) | in(b,x).[snd(dec(x,k)) = hi] out(a,enc(ok,k)))";

fn c11() -> Outcome {
    let dy = "depth=1,test=1";
    let dyr = "depth=1,test=1,unfold=2";
    expect("sim-i", PRIV_LEFT, PRIV_RIGHT, true, dy, Expected::Distinguished)?;
    expect(
        "bisim-st",
        PRIV_REPL_LEFT,
        PRIV_REPL_RIGHT,
        true,
        dyr,
        Expected::RelatedBounded,
    )?;
    expect(
        "sim-hp",
        PRIV_REPL_LEFT,
        PRIV_REPL_RIGHT,
        true,
        dyr,
        Expected::Distinguished,
    )?;
    let (p, q) = (
        "!new n.out(a,n) | in(b,x).new n.out(a,h(n))",
        "!new n.out(a,n) | in(b,x)",
    );
    expect("bisim-st", p, q, true, dyr, Expected::RelatedBounded)?;
    expect("sim-hp", p, q, true, dyr, Expected::Distinguished)?;
    Ok(format!("privacy verdicts as expected at {dyr}"))
}

fn c12() -> Outcome {
    expect(
        "fsim-st",
        "new x.new y.out(a,x).out(a,y)",
        "new x.new y.(out(a,x) | out(a,y))",
        false,
        "",
        Expected::Distinguished,
    )?;
    let v = expect("fsim-st", EQ2.0, EQ2.1, false, "", Expected::Distinguished)?;
    if !matches!(v.witness(), Some(Witness::Failure { event, .. }) if on_channel(event, "c")) {
        return Err(format!("eq2 fsim-st witness is not a refusal of c: {:?}", v.witness()));
    }
    let perr_l = PRIV_LEFT.replace("= hi] out(a,enc(ok", "!= hi] out(a,enc(err");
    let perr_r = PRIV_RIGHT.replace("= hi] out(a,enc(ok", "!= hi] out(a,enc(err");
    let dy = "depth=1,test=1";
    expect("sim-st", &perr_l, &perr_r, true, dy, Expected::RelatedExact)?;
    expect("fsim-st", &perr_l, &perr_r, true, dy, Expected::Distinguished)?;
    let perr_rl = PRIV_REPL_LEFT.replace("= hi] out(a,enc(ok", "!= hi] out(a,enc(err");
    let perr_rr = PRIV_REPL_RIGHT.replace("= hi] out(a,enc(ok", "!= hi] out(a,enc(err");
    let dyr = "depth=1,test=1,unfold=2";
    expect("fsim-st", &perr_rl, &perr_rr, true, dyr, Expected::RelatedBounded)?;
    expect("fsim-hp", &perr_rl, &perr_rr, true, dyr, Expected::Distinguished)?;
    Ok("failure verdicts as expected; eq2 refuses c initially".into())
}

fn c13() -> Outcome {
    let v = expect(
        "bisim-hp",
        "new b.(out(a,a).out(b,b) | in(b,x).out(c,c))",
        "new b.(out(b,b) | out(a,a).in(b,x).out(c,c))",
        false,
        "",
        Expected::RelatedExact,
    )?;
    let Verdict::Related { relation_size, .. } = v else {
        unreachable!()
    };
    if relation_size != 4 {
        return Err(format!("relation has {relation_size} positions, want 4"));
    }
    Ok("exact, 4 related positions".into())
}

fn corpus_cases() -> Vec<CorpusCase> {
    load_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")).expect("corpus loads")
}

fn c14() -> Outcome {
    let cases = corpus_cases();
    let mut seen = BTreeSet::new();
    let mut lts_count = 0;
    for c in &cases {
        let p = c.prepare().map_err(|e| format!("{}: {e}", c.name))?;
        for side in [&p.left, &p.right] {
            if !seen.insert((side.to_string(), p.bounds.repl_unfold, c.theory)) {
                continue;
            }
            lts_count += 1;
            let a = ExtendedProcess::from_process(side.clone());
            let v = diamond_check(&a, &p.theory, &p.bounds).map_err(|e| format!("{}: {e}", c.name))?;
            if let Some(first) = v.first() {
                return Err(format!("{}: {} violations, e.g. {first:?}", c.name, v.len()));
            }
        }
    }
    Ok(format!("no violations over {lts_count} systems"))
}

/// `a` related implies `b` related.
const IMPLICATIONS: [(&str, &str); 13] = [
    ("sim-hp", "sim-st"),
    ("sim-st", "sim-i"),
    ("sim-i", "presim-i"),
    ("bisim-hp", "bisim-st"),
    ("bisim-st", "bisim-i"),
    ("fsim-hp", "fsim-st"),
    ("bisim-i", "sim-i"),
    ("bisim-st", "sim-st"),
    ("bisim-hp", "sim-hp"),
    ("bisim-iloc", "sim-iloc"),
    ("bisim-ifull", "sim-ifull"),
    ("fsim-st", "sim-st"),
    ("fsim-hp", "sim-hp"),
];

fn c15() -> Outcome {
    let mut pairs: Vec<&CorpusCase> = Vec::new();
    let cases = corpus_cases();
    let mut seen = BTreeSet::new();
    for c in &cases {
        if seen.insert((c.left.clone(), c.right.clone(), c.bounds.clone(), c.theory)) {
            pairs.push(c);
        }
    }
    let jobs: Vec<(&CorpusCase, &str, bool)> = pairs
        .iter()
        .flat_map(|c| {
            let finite = !(c.left.contains('!') || c.right.contains('!'));
            let mut v: Vec<(&CorpusCase, &str, bool)> = ALL_RELATIONS.iter().map(|r| (*c, *r, false)).collect();
            if finite {
                v.extend(["sim-st", "bisim-st", "fsim-st"].map(|r| (*c, r, true)));
            }
            v
        })
        .collect();
    let dy = |c: &CorpusCase| c.theory != latspi::corpus::TheoryPreset::None;
    let results: Vec<Result<(Job, bool), String>> = jobs
        .par_iter()
        .map(|(c, rel, exh)| {
            let opts = CheckOptions { st_exhaustive: *exh };
            let v = run(rel, &c.left, &c.right, dy(c), &c.bounds, opts).map_err(|e| format!("{}: {e}", c.name))?;
            Ok(((c.name.clone(), *rel, *exh), v.is_related()))
        })
        .collect();
    let mut table: BTreeMap<Job, bool> = BTreeMap::new();
    for r in results {
        let (k, related) = r?;
        table.insert(k, related);
    }
    for c in &pairs {
        for (a, b) in IMPLICATIONS {
            if table[&(c.name.clone(), a, false)] && !table[&(c.name.clone(), b, false)] {
                return Err(format!("{}: {a} holds but {b} does not", c.name));
            }
        }
        for rel in ["sim-st", "bisim-st", "fsim-st"] {
            if let Some(exh) = table.get(&(c.name.clone(), rel, true)) {
                if *exh != table[&(c.name.clone(), rel, false)] {
                    return Err(format!("{}: {rel} disagrees with the exhaustive ST attacker", c.name));
                }
            }
        }
    }
    Ok(format!(
        "{} pairs x {} relations, {} checks, no violations",
        pairs.len(),
        ALL_RELATIONS.len(),
        table.len()
    ))
}

fn main() {
    let criteria: [Criterion; 15] = [
        ("initial events of the running example", c1),
        ("frame satisfaction", c2),
        ("presimilarity versus similarity", c3),
        ("sequential versus parallel similarity", c4),
        ("swap similarity", c5),
        ("fresh outputs, bisim-i versus sim-st", c6),
        ("st versus hp on three outputs", c7),
        ("st bisimilarity versus hp similarity with a choice", c8),
        ("replicated fresh outputs (bounded)", c9),
        ("link causality and located relations", c10),
        ("privacy under Dolev-Yao", c11),
        ("failure-sensitive relations", c12),
        ("hp bisimulation size", c13),
        ("concurrency diamonds over the corpus", c14),
        ("relation hierarchy and exhaustive ST attacker", c15),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let ms = start.elapsed().as_millis();
        match &r {
            Ok(note) => println!("criterion {:>2} PASS {name}: {note} ({ms} ms)", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL {name}: {why} ({ms} ms)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
