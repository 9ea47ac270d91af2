//! Independent re-checking of attacker strategies.
//!
//! The checker re-derives every transition it needs and applies the
//! answering constraints of each relation family directly, so a strategy is
//! only accepted if it wins against every admissible defence.

use crate::error::Error;
use crate::independence::indep_event;
use crate::knowledge::satisfies;
use crate::lts::{collect_garbage, matching_transitions, Event, ExplorationBounds};
use crate::term::Theory;

use super::{CheckOptions, EventPairing, Family, GameConfig, IndepParam, Side, Verdict, Witness};

fn fail<T>(msg: impl Into<String>) -> Result<T, Error> {
    Err(Error::Replay(msg.into()))
}

/// Checks that `verdict` carries a strategy that wins from `cfg`. Related
/// verdicts have nothing to replay and are rejected.
pub fn witness_replay(
    verdict: &Verdict,
    cfg: &GameConfig,
    theory: &Theory,
    bounds: &ExplorationBounds,
    opts: CheckOptions,
) -> Result<(), Error> {
    let Some(w) = verdict.witness() else {
        return fail("a related verdict has no strategy to replay");
    };
    let cfg = normal(cfg, theory)?;
    Replayer { theory, bounds, opts }.node(w, &cfg)
}

fn normal(cfg: &GameConfig, theory: &Theory) -> Result<GameConfig, Error> {
    Ok(GameConfig {
        left: collect_garbage(&cfg.left, theory)?.struct_key(),
        right: collect_garbage(&cfg.right, theory)?.struct_key(),
        ..cfg.clone()
    })
}

struct Replayer<'a> {
    theory: &'a Theory,
    bounds: &'a ExplorationBounds,
    opts: CheckOptions,
}

/// Leader-side and follower-side events of a pair, seen from `side`.
fn oriented(pair: &(Event, Event), side: Side) -> (&Event, &Event) {
    match side {
        Side::Left => (&pair.0, &pair.1),
        Side::Right => (&pair.1, &pair.0),
    }
}

impl<'a> Replayer<'a> {
    fn node(&self, w: &Witness, cfg: &GameConfig) -> Result<(), Error> {
        match w {
            Witness::Static { test } => self.static_node(test, cfg),
            Witness::Failure { side, event } => self.failure_node(*side, event, cfg),
            Witness::Move {
                side,
                event,
                retained,
                responses,
            } => self.move_node(*side, event, retained, responses, cfg),
        }
    }

    fn static_node(&self, test: &crate::knowledge::TestWitness, cfg: &GameConfig) -> Result<(), Error> {
        let left = satisfies(&cfg.left, &test.m, &test.n, self.theory)?;
        let right = satisfies(
            &cfg.right,
            &test.m.rename_aliases(&cfg.rho),
            &test.n.rename_aliases(&cfg.rho),
            self.theory,
        )?;
        if left != test.holds_left || right != test.holds_right {
            return fail(format!("test {} = {} does not evaluate as claimed", test.m, test.n));
        }
        let separates = if cfg.kind.static_iff() {
            left != right
        } else {
            left && !right
        };
        if !separates {
            return fail(format!("test {} = {} does not separate the frames", test.m, test.n));
        }
        Ok(())
    }

    fn failure_node(&self, side: Side, event: &Event, cfg: &GameConfig) -> Result<(), Error> {
        if !cfg.kind.is_failure() || side != Side::Right {
            return fail("failure moves are only available to the right side of a failure simulation");
        }
        let real = matching_transitions(&cfg.right, self.theory, self.bounds, &event.action)?;
        if !real.iter().any(|t| &t.event == event) {
            return fail(format!("{event} is not a transition of the right process"));
        }
        let mirror = event.action.apply_alias_map(&cfg.rho.inverse());
        for m in matching_transitions(&cfg.left, self.theory, self.bounds, &mirror)? {
            let admissible = cfg.pairing.pairs.iter().all(|(l, r)| {
                let rel = indep_event(event, r);
                match cfg.kind.family() {
                    Family::Hp => indep_event(&m.event, l) == rel,
                    _ => !rel || indep_event(&m.event, l),
                }
            });
            if admissible {
                return fail(format!("{event} is mirrored on the left by {}", m.event));
            }
        }
        Ok(())
    }

    fn move_node(
        &self,
        side: Side,
        event: &Event,
        retained: &[(Event, Event)],
        responses: &[super::Response],
        cfg: &GameConfig,
    ) -> Result<(), Error> {
        if side == Side::Right && !cfg.kind.is_bisim() {
            return fail("only the left side leads in a simulation game");
        }
        let (lead, follow) = match side {
            Side::Left => (&cfg.left, &cfg.right),
            Side::Right => (&cfg.right, &cfg.left),
        };
        let rho = match side {
            Side::Left => cfg.rho.clone(),
            Side::Right => cfg.rho.inverse(),
        };
        let moves = matching_transitions(lead, self.theory, self.bounds, &event.action)?;
        let Some(lead_t) = moves.into_iter().find(|t| &t.event == event) else {
            return fail(format!("{event} is not a transition of the {side} process"));
        };
        let pairs = &cfg.pairing.pairs;
        let Some(retained) = retained
            .iter()
            .map(|p| cfg.pairing.position(p))
            .collect::<Option<Vec<usize>>>()
        else {
            return fail("a retained pair is not running");
        };
        if retained.windows(2).any(|w| w[0] >= w[1]) {
            return fail("retained pairs are not listed once each in pairing order");
        }
        let retained = retained.as_slice();
        let indep_lead: Vec<bool> = pairs.iter().map(|p| indep_event(event, oriented(p, side).0)).collect();
        let all_indep: Vec<usize> = (0..pairs.len()).filter(|&i| indep_lead[i]).collect();
        let legal = match cfg.kind.family() {
            Family::Interleaving => retained.is_empty(),
            Family::St if self.opts.st_exhaustive => retained.iter().all(|&i| indep_lead[i]),
            Family::St | Family::Hp => retained == all_indep.as_slice(),
            Family::Located => retained.len() == pairs.len(),
        };
        if !legal {
            return fail(format!("{event} cannot retain the pairs {retained:?}"));
        }
        let param = cfg.kind.indep.unwrap_or(IndepParam::Full);
        let wanted = event.action.apply_alias_map(&rho);
        for cand in matching_transitions(follow, self.theory, self.bounds, &wanted)? {
            let e2 = &cand.event;
            let admissible = match cfg.kind.family() {
                Family::Interleaving => true,
                Family::St => retained.iter().all(|&i| indep_event(e2, oriented(&pairs[i], side).1)),
                Family::Hp => (0..pairs.len()).all(|i| indep_event(e2, oriented(&pairs[i], side).1) == indep_lead[i]),
                Family::Located => pairs.iter().all(|p| {
                    let (l, f) = oriented(p, side);
                    param.holds(e2, f) == param.holds(event, l)
                }),
            };
            if !admissible {
                continue;
            }
            let rho2 = match (event.action.output_alias(), e2.action.output_alias()) {
                (Some(a), Some(b)) => match rho.with(a.clone(), b.clone()) {
                    Ok(r) => r,
                    Err(_) => continue,
                },
                _ => rho.clone(),
            };
            if cand.frontier || lead_t.frontier {
                return fail(format!("the answer {e2} lies beyond the replication bound"));
            }
            let Some(resp) = responses.iter().find(|r| &r.event == e2) else {
                return fail(format!("no continuation for the answer {e2} to {event}"));
            };
            let mut kept: Vec<(Event, Event)> = retained.iter().map(|&i| pairs[i].clone()).collect();
            let new_pair = match side {
                Side::Left => (event.clone(), e2.clone()),
                Side::Right => (e2.clone(), event.clone()),
            };
            if cfg.kind.family() != Family::Interleaving {
                kept.push(new_pair);
            }
            let (left, right) = match side {
                Side::Left => (lead_t.target.clone(), cand.target.clone()),
                Side::Right => (cand.target.clone(), lead_t.target.clone()),
            };
            let child = GameConfig {
                left,
                right,
                rho: match side {
                    Side::Left => rho2,
                    Side::Right => rho2.inverse(),
                },
                pairing: EventPairing::new(kept),
                kind: cfg.kind,
                depth_used: cfg.depth_used + 1,
            };
            self.node(&resp.next, &normal(&child, self.theory)?)?;
        }
        Ok(())
    }
}
