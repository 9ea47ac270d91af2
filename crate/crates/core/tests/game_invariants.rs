//! Walks the game positions reachable from the corpus pairs through the
//! public move API and checks invariants of every position.

use std::collections::{HashSet, VecDeque};
use std::path::Path;

use latspi::corpus::load_corpus;
use latspi::equivalence::{follower_match, lead_plans, Family, GameConfig, RelationKind};
use latspi::independence::indep_event;
use latspi::lts::{enabled_transitions, Event};

const MAX_ROUNDS: usize = 4;
const MAX_POSITIONS: usize = 400;

fn pairwise_independent<'a>(events: impl Iterator<Item = &'a Event>) -> bool {
    let v: Vec<&Event> = events.collect();
    (0..v.len()).all(|i| (i + 1..v.len()).all(|j| indep_event(v[i], v[j])))
}

#[test]
fn reachable_positions_keep_their_invariants() {
    let cases = load_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")).unwrap();
    let mut visited_total = 0;
    for c in &cases {
        let p = c.prepare().unwrap();
        for rel in ["sim-st", "sim-hp", "sim-ifull", "sim-iloc"] {
            let kind = RelationKind::parse(rel).unwrap();
            let start = GameConfig::initial(kind, &p.left, &p.right);
            let mut seen = HashSet::new();
            let mut queue = VecDeque::from([(start, 0usize)]);
            while let Some((cfg, round)) = queue.pop_front() {
                if !seen.insert(cfg.clone()) || seen.len() > MAX_POSITIONS {
                    continue;
                }
                assert!(cfg.rho.is_injective(), "{}: rho not injective", c.name);
                if kind.family() == Family::Hp {
                    assert!(
                        pairwise_independent(cfg.pairing.dom()),
                        "{} {rel}: left events dependent",
                        c.name
                    );
                    assert!(
                        pairwise_independent(cfg.pairing.ran()),
                        "{} {rel}: right events dependent",
                        c.name
                    );
                }
                if round == MAX_ROUNDS {
                    continue;
                }
                for (e, target) in enabled_transitions(&cfg.left, &p.theory, &p.bounds).unwrap() {
                    for plan in lead_plans(&cfg, &e, false) {
                        let kept = cfg.pairing.subset(&plan.retained);
                        for (rho, e2, target2, frontier) in
                            follower_match(&cfg, &e, &plan.constraints, &p.theory, &p.bounds).unwrap()
                        {
                            if frontier {
                                continue;
                            }
                            // the extended map agrees with the old one on the old domain
                            for (a, b) in cfg.rho.iter() {
                                assert_eq!(rho.get(a), Some(b), "{} {rel}: rho changed on {a}", c.name);
                            }
                            let next = GameConfig {
                                left: target.clone(),
                                right: target2,
                                rho,
                                pairing: kept.with((e.clone(), e2)),
                                kind,
                                depth_used: cfg.depth_used + 1,
                            };
                            queue.push_back((next, round + 1));
                        }
                    }
                }
            }
            visited_total += seen.len();
        }
    }
    assert!(visited_total > 0);
}
