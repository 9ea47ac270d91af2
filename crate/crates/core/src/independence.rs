//! Structural independence of locations and independence of events.

use std::collections::BTreeSet;

use crate::lts::{Event, Location, LocationLabel};

pub fn loc_set(u: &LocationLabel) -> BTreeSet<Location> {
    match u {
        LocationLabel::Single(l) => [l.clone()].into_iter().collect(),
        LocationLabel::Pair(a, b) => [a.clone(), b.clone()].into_iter().collect(),
    }
}

/// The prefix parts split as `s0..` and `s1..` for some common `s`. Choice
/// parts never make two locations independent.
fn locations_diverge(a: &Location, b: &Location) -> bool {
    a.prefix.0.iter().zip(b.prefix.0.iter()).any(|(x, y)| x != y)
}

/// Every location of `u0` diverges from every location of `u1`.
pub fn indep_loc(u0: &LocationLabel, u1: &LocationLabel) -> bool {
    let (s0, s1) = (loc_set(u0), loc_set(u1));
    s0.iter().all(|a| s1.iter().all(|b| locations_diverge(a, b)))
}

/// Structural independence plus freshness of each output alias for the
/// other label.
pub fn indep_event(e0: &Event, e1: &Event) -> bool {
    if !indep_loc(&e0.loc, &e1.loc) {
        return false;
    }
    if let Some(a) = e0.action.output_alias() {
        if e1.action.fa().contains(a) {
            return false;
        }
    }
    if let Some(a) = e1.action.output_alias() {
        if e0.action.fa().contains(a) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ActionLabel;
    use crate::term::{Alias, Message};

    fn l(p: &str, c: &str) -> LocationLabel {
        LocationLabel::single(p, c)
    }

    fn loc(p: &str) -> Location {
        Location::new(p, "")
    }

    fn out(ch: &str, alias: &str, at: LocationLabel) -> Event {
        Event::new(
            ActionLabel::Output {
                chan: Message::var(ch),
                alias: Alias::parse(alias).unwrap(),
            },
            at,
        )
    }

    #[test]
    fn location_sets() {
        assert_eq!(loc_set(&l("0", "")).len(), 1);
        assert_eq!(loc_set(&LocationLabel::Pair(loc("00"), loc("01"))).len(), 2);
        assert_eq!(loc_set(&LocationLabel::Pair(loc("0"), loc("0"))).len(), 1);
    }

    #[test]
    fn structural_independence() {
        assert!(indep_loc(&l("0", ""), &l("1", "")));
        assert!(!indep_loc(&LocationLabel::Pair(loc("00"), loc("01")), &l("01", "")));
        assert!(!indep_loc(&l("", "0"), &l("", "1")));
        assert!(!indep_loc(&l("0", ""), &l("01", "")));
        assert!(indep_loc(&l("10", "0"), &l("11", "1")));
    }

    #[test]
    fn event_independence() {
        let e = out("a", "01l", l("01", ""));
        let tau = Event::new(ActionLabel::Tau, LocationLabel::Pair(loc("10"), loc("11")));
        assert!(indep_event(&e, &tau));
        let uses = Event::new(
            ActionLabel::FreeInput {
                chan: Message::alias("01", 0),
                payload: Message::var("m"),
            },
            l("11", ""),
        );
        assert!(!indep_event(&e, &uses));
        assert!(!indep_event(&uses, &e));
        assert!(!indep_event(&e, &e));
    }
}
