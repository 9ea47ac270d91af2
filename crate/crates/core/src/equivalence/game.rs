//! Memoised attacker/defender search with iterative deepening.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, TermError};
use crate::knowledge::{static_compare, TestWitness, DEFAULT_CLASS_CAP};
use crate::lts::{collect_garbage, matching_transitions, step, ExplorationBounds, InputMode, Transition};
use crate::syntax::{ActionLabel, ExtendedProcess};
use crate::term::{AliasMap, Substitution, Theory};

use super::{
    admissible_answers, lead_plans, unmirrored, CheckOptions, EventPairing, Family, GameConfig, Response, Side,
    Skeleton, Verdict, Witness, RECIPE_CAVEAT,
};

/// Leaders range over one recipe per value class when the static tests are
/// deep enough to tell apart recipes of equal value on one side but not on
/// the other; otherwise over all recipes.
pub(crate) fn input_mode(bounds: &ExplorationBounds) -> InputMode {
    if bounds.test_depth >= bounds.recipe_depth {
        InputMode::ValueClasses
    } else {
        InputMode::Recipes
    }
}

#[derive(Clone, Debug)]
enum Outcome {
    Win(Box<Witness>),
    /// The defender survives every attack.
    Lose,
    /// Undecided within the bounds. `cutoff` is set when the game depth ran
    /// out; otherwise a replication bound was hit.
    Unknown {
        cutoff: bool,
    },
}

#[derive(Clone, Debug)]
enum Memo {
    Win(Box<Witness>),
    Lose,
    Unknown { remaining: usize, cutoff: bool },
}

type Key = (ExtendedProcess, ExtendedProcess, AliasMap, Vec<(Skeleton, Skeleton)>);

/// Search statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GameStats {
    pub positions: usize,
    pub related_positions: usize,
    pub rounds: usize,
}

struct Solver<'a> {
    theory: &'a Theory,
    bounds: &'a ExplorationBounds,
    opts: CheckOptions,
    mode: InputMode,
    memo: HashMap<Key, Memo>,
    statics: HashMap<(Substitution, Substitution, AliasMap), Option<TestWitness>>,
    /// Set once a static comparison passed only because the class cap cut it short.
    statics_truncated: bool,
    steps: HashMap<ExtendedProcess, Arc<Vec<Transition>>>,
    matching: HashMap<(ExtendedProcess, ActionLabel), Arc<Vec<Transition>>>,
}

/// Decides `cfg` within `bounds`: a winning attacker strategy gives
/// `Distinguished`, a finished defence gives an exact `Related`, and a
/// search stopped by the game depth or the replication bound gives a
/// bounded `Related`.
pub fn solve(
    cfg: &GameConfig,
    theory: &Theory,
    bounds: &ExplorationBounds,
    opts: CheckOptions,
) -> Result<(Verdict, GameStats), Error> {
    let mut s = Solver {
        theory,
        bounds,
        opts,
        mode: input_mode(bounds),
        memo: HashMap::new(),
        statics: HashMap::new(),
        statics_truncated: false,
        steps: HashMap::new(),
        matching: HashMap::new(),
    };
    let root = normalize(cfg, theory)?;
    let mut stats = GameStats::default();
    let mut exact = false;
    let mut decided = false;
    for d in 0..=bounds.game_depth {
        stats.rounds = d;
        match s.solve(&root, d)? {
            Outcome::Win(w) => {
                stats.positions = s.memo.len();
                return Ok((
                    Verdict::Distinguished {
                        witness: *w,
                        bounds: bounds.clone(),
                    },
                    stats,
                ));
            }
            Outcome::Lose => {
                exact = true;
                decided = true;
            }
            Outcome::Unknown { cutoff: false } => decided = true,
            Outcome::Unknown { cutoff: true } => {}
        }
        if decided {
            break;
        }
    }
    stats.positions = s.memo.len();
    stats.related_positions = s.memo.values().filter(|m| matches!(m, Memo::Lose)).count();
    let caveat = if exact && s.statics_truncated {
        exact = false;
        format!("{RECIPE_CAVEAT}; some static tests stopped at {DEFAULT_CLASS_CAP} recipe classes")
    } else if exact {
        RECIPE_CAVEAT.to_string()
    } else if decided {
        format!(
            "{RECIPE_CAVEAT}; some moves need more than {} replication unfoldings",
            bounds.repl_unfold
        )
    } else {
        format!(
            "{RECIPE_CAVEAT}; the game was cut off after {} rounds",
            bounds.game_depth
        )
    };
    Ok((
        Verdict::Related {
            exact,
            bounds: bounds.clone(),
            relation_size: stats.related_positions,
            caveat,
        },
        stats,
    ))
}

/// Positions are kept garbage-collected and in structural normal form.
pub(crate) fn normalize(cfg: &GameConfig, theory: &Theory) -> Result<GameConfig, TermError> {
    Ok(GameConfig {
        left: collect_garbage(&cfg.left, theory)?.struct_key(),
        right: collect_garbage(&cfg.right, theory)?.struct_key(),
        ..cfg.clone()
    })
}

fn key(cfg: &GameConfig) -> Key {
    (
        cfg.left.clone(),
        cfg.right.clone(),
        cfg.rho.clone(),
        cfg.pairing.skeletons(),
    )
}

impl<'a> Solver<'a> {
    fn normalized(&self, mut ts: Vec<Transition>) -> Result<Vec<Transition>, TermError> {
        for t in &mut ts {
            t.target = collect_garbage(&t.target, self.theory)?.struct_key();
        }
        Ok(ts)
    }

    fn step(&mut self, a: &ExtendedProcess) -> Result<Arc<Vec<Transition>>, TermError> {
        if let Some(v) = self.steps.get(a) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.normalized(step(a, self.theory, self.bounds, self.mode)?)?);
        self.steps.insert(a.clone(), v.clone());
        Ok(v)
    }

    fn matching(&mut self, a: &ExtendedProcess, label: &ActionLabel) -> Result<Arc<Vec<Transition>>, TermError> {
        let k = (a.clone(), label.clone());
        if let Some(v) = self.matching.get(&k) {
            return Ok(v.clone());
        }
        let v = Arc::new(self.normalized(matching_transitions(a, self.theory, self.bounds, label)?)?);
        self.matching.insert(k, v.clone());
        Ok(v)
    }

    fn static_check(&mut self, cfg: &GameConfig) -> Result<Option<TestWitness>, TermError> {
        let k = (cfg.left.frame.clone(), cfg.right.frame.clone(), cfg.rho.clone());
        if let Some(w) = self.statics.get(&k) {
            return Ok(w.clone());
        }
        let r = static_compare(
            &cfg.left.frame,
            &cfg.right.frame,
            &cfg.rho,
            &self.bounds.public_consts,
            self.bounds.test_depth,
            cfg.kind.static_iff(),
            self.theory,
        )?;
        if r.witness.is_none() && !r.complete {
            self.statics_truncated = true;
        }
        self.statics.insert(k, r.witness.clone());
        Ok(r.witness)
    }

    fn solve(&mut self, cfg: &GameConfig, remaining: usize) -> Result<Outcome, Error> {
        let k = key(cfg);
        match self.memo.get(&k) {
            Some(Memo::Win(w)) => return Ok(Outcome::Win(w.clone())),
            Some(Memo::Lose) => return Ok(Outcome::Lose),
            Some(Memo::Unknown { cutoff: false, .. }) => return Ok(Outcome::Unknown { cutoff: false }),
            Some(Memo::Unknown {
                remaining: r,
                cutoff: true,
            }) if *r >= remaining => return Ok(Outcome::Unknown { cutoff: true }),
            _ => {}
        }
        let out = self.solve_fresh(cfg, remaining)?;
        let entry = match &out {
            Outcome::Win(w) => Memo::Win(w.clone()),
            Outcome::Lose => Memo::Lose,
            Outcome::Unknown { cutoff } => Memo::Unknown {
                remaining,
                cutoff: *cutoff,
            },
        };
        self.memo.insert(k, entry);
        if self.memo.len() > self.bounds.state_budget {
            return Err(Error::StateBudget(self.bounds.state_budget));
        }
        Ok(out)
    }

    fn solve_fresh(&mut self, cfg: &GameConfig, remaining: usize) -> Result<Outcome, Error> {
        if let Some(test) = self.static_check(cfg)? {
            return Ok(Outcome::Win(Box::new(Witness::Static { test })));
        }
        if cfg.kind.is_failure() {
            let right_moves = self.step(&cfg.right)?;
            let found = unmirrored(cfg, &right_moves, |label| self.matching(&cfg.left, label))?;
            if let Some(event) = found {
                return Ok(Outcome::Win(Box::new(Witness::Failure {
                    side: Side::Right,
                    event,
                })));
            }
        }
        let sides: &[Side] = if cfg.kind.is_bisim() {
            &[Side::Left, Side::Right]
        } else {
            &[Side::Left]
        };
        let mut unknown = false;
        let mut cutoff = false;
        for &side in sides {
            let view = match side {
                Side::Left => cfg.clone(),
                Side::Right => cfg.swapped(),
            };
            let moves = self.step(&view.left)?;
            if moves.is_empty() {
                continue;
            }
            if remaining == 0 {
                return Ok(Outcome::Unknown { cutoff: true });
            }
            for t in moves.iter() {
                for plan in lead_plans(&view, &t.event, self.opts.st_exhaustive) {
                    let wanted = t.event.action.apply_alias_map(&view.rho);
                    let cands = self.matching(&view.right, &wanted)?;
                    let answers = admissible_answers(&view, &t.event, &plan.constraints, &cands);
                    let kept = view.pairing.subset(&plan.retained);
                    let retained = match side {
                        Side::Left => kept.pairs.clone(),
                        Side::Right => kept.inverse().pairs,
                    };
                    if t.frontier && !answers.is_empty() {
                        unknown = true;
                        continue;
                    }
                    let mut responses = Vec::new();
                    let mut defended = false;
                    let mut plan_unknown = false;
                    for (rho, e2, target2, frontier) in answers {
                        if frontier {
                            plan_unknown = true;
                            continue;
                        }
                        let pairing = match cfg.kind.family() {
                            Family::Interleaving => EventPairing::default(),
                            _ => kept.with((t.event.clone(), e2.clone())),
                        };
                        let child_view = GameConfig {
                            left: t.target.clone(),
                            right: target2,
                            rho,
                            pairing,
                            kind: cfg.kind,
                            depth_used: cfg.depth_used + 1,
                        };
                        let child = match side {
                            Side::Left => child_view,
                            Side::Right => child_view.swapped(),
                        };
                        match self.solve(&child, remaining - 1)? {
                            Outcome::Win(w) => responses.push(Response { event: e2, next: *w }),
                            Outcome::Lose => {
                                defended = true;
                                break;
                            }
                            Outcome::Unknown { cutoff: c } => {
                                plan_unknown = true;
                                cutoff |= c;
                            }
                        }
                    }
                    if defended {
                        continue;
                    }
                    if plan_unknown {
                        unknown = true;
                        continue;
                    }
                    return Ok(Outcome::Win(Box::new(Witness::Move {
                        side,
                        event: t.event.clone(),
                        retained,
                        responses,
                    })));
                }
            }
        }
        if unknown {
            Ok(Outcome::Unknown { cutoff })
        } else {
            Ok(Outcome::Lose)
        }
    }
}
