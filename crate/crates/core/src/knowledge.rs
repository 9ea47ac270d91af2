//! Attacker knowledge: frame satisfaction, recipe enumeration and bounded
//! static equivalence / implication.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TermError;
use crate::lts::ExplorationBounds;
use crate::syntax::{fresh_variant, ExtendedProcess};
use crate::term::{Alias, AliasMap, Message, Name, Substitution, Symbol, Theory};

/// Hard cap on the number of recipe classes explored in one enumeration.
pub const DEFAULT_CLASS_CAP: usize = 60_000;

/// Candidates built per level before the enumeration gives up, as a multiple
/// of the class cap. Keeps wide signatures from exhausting memory before a
/// single class is admitted.
const CANDIDATE_FACTOR: usize = 8;

/// A test `M = N` that holds on exactly one side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestWitness {
    pub m: Message,
    pub n: Message,
    pub holds_left: bool,
    pub holds_right: bool,
}

impl TestWitness {
    pub fn swapped(&self) -> TestWitness {
        TestWitness {
            m: self.m.clone(),
            n: self.n.clone(),
            holds_left: self.holds_right,
            holds_right: self.holds_left,
        }
    }

    /// Restates the test with aliases renamed, e.g. into the other side's
    /// alias space.
    pub fn renamed(&self, rho: &AliasMap) -> TestWitness {
        TestWitness {
            m: self.m.rename_aliases(rho),
            n: self.n.rename_aliases(rho),
            ..self.clone()
        }
    }
}

impl fmt::Display for TestWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match (self.holds_left, self.holds_right) {
            (true, false) => "left only",
            (false, true) => "right only",
            _ => "both or neither",
        };
        write!(f, "{} = {} holds {side}", self.m, self.n)
    }
}

/// `A |= M = N`: bound names are renamed apart from `M` and `N`, then the
/// two recipes are compared under the frame modulo the theory. Recipes that
/// mention an alias outside the frame's domain are only satisfied when they
/// are syntactically identical.
pub fn satisfies(a: &ExtendedProcess, m: &Message, n: &Message, theory: &Theory) -> Result<bool, TermError> {
    if m == n {
        return Ok(true);
    }
    let dom = a.dom();
    if m.free_aliases()
        .iter()
        .chain(n.free_aliases().iter())
        .any(|x| !dom.contains(x))
    {
        return Ok(false);
    }
    let mut avoid: BTreeSet<Name> = m.free_vars();
    n.collect_vars(&mut avoid);
    avoid.extend(a.free_vars());
    let mut renaming = BTreeMap::new();
    for b in &a.binders {
        let z = fresh_variant(b, &avoid);
        avoid.insert(z.clone());
        renaming.insert(b.clone(), Message::Var(z));
    }
    let frame = a.frame.map_values(|v| subst_vars(v, &renaming));
    theory.eq_mod(&m.apply(&frame), &n.apply(&frame))
}

fn subst_vars(m: &Message, map: &BTreeMap<Name, Message>) -> Message {
    match m {
        Message::Var(x) => map.get(x).cloned().unwrap_or_else(|| m.clone()),
        Message::Alias(_) => m.clone(),
        Message::App(f, args) => Message::App(f.clone(), args.iter().map(|a| subst_vars(a, map)).collect()),
    }
}

/// One class produced by [`ClassEnum`]: a representative recipe together
/// with its value under each valuation.
#[derive(Clone, Debug)]
pub struct Class {
    pub recipe: Message,
    pub values: Vec<Message>,
    pub fa: BTreeSet<Alias>,
    pub level: usize,
}

/// Bottom-up enumeration of recipes up to an application depth, keeping one
/// representative per class of recipes that agree on every valuation (and,
/// optionally, on their free aliases). Because normalization is a function of
/// the normalized arguments, building from representatives reaches exactly
/// the classes of all recipes within the depth.
pub struct ClassEnum<'a> {
    pub theory: &'a Theory,
    pub depth: usize,
    pub with_fa: bool,
    pub cap: usize,
}

pub struct ClassEnumResult {
    pub classes: Vec<Class>,
    /// False when the class cap stopped the enumeration early.
    pub complete: bool,
    pub stopped: bool,
}

type ClassKey = (Vec<Message>, Option<BTreeSet<Alias>>);

impl<'a> ClassEnum<'a> {
    pub fn new(theory: &'a Theory, depth: usize, with_fa: bool) -> Self {
        ClassEnum {
            theory,
            depth,
            with_fa,
            cap: DEFAULT_CLASS_CAP,
        }
    }

    /// `atoms` are `(recipe, values)` pairs; `visit` sees each new class in
    /// order of (level, size, recipe) and may return `true` to stop.
    pub fn run(
        &self,
        atoms: Vec<(Message, Vec<Message>)>,
        visit: &mut dyn FnMut(&Class) -> bool,
    ) -> Result<ClassEnumResult, TermError> {
        let symbols: Vec<Symbol> = self.theory.signature.iter().cloned().collect();
        let mut classes: Vec<Class> = Vec::new();
        let mut seen: HashSet<ClassKey> = HashSet::new();
        let mut level_start = vec![0usize];

        let mut level0: Vec<Class> = atoms
            .into_iter()
            .map(|(r, values)| Class {
                fa: r.free_aliases(),
                recipe: r,
                values,
                level: 0,
            })
            .collect();
        level0.sort_by(|a, b| (a.recipe.size(), &a.recipe).cmp(&(b.recipe.size(), &b.recipe)));
        let mut complete = true;
        for c in level0 {
            if self.admit(c, &mut classes, &mut seen, visit) {
                return Ok(ClassEnumResult {
                    classes,
                    complete,
                    stopped: true,
                });
            }
        }
        for d in 1..=self.depth {
            let lo = level_start[d - 1];
            let hi = classes.len();
            level_start.push(hi);
            let mut cands: Vec<Class> = Vec::new();
            let mut truncated = false;
            'symbols: for f in &symbols {
                let n = f.arity;
                if n == 0 {
                    if d == 1 {
                        let r = Message::App(f.clone(), vec![]);
                        let v = self.theory.apply_normal(f, vec![])?;
                        cands.push(Class {
                            values: vec![v; classes.first().map_or(1, |c| c.values.len())],
                            recipe: r,
                            fa: BTreeSet::new(),
                            level: d,
                        });
                    }
                    continue;
                }
                if hi == 0 {
                    continue;
                }
                let mut idx = vec![0usize; n];
                'tuples: loop {
                    if cands.len() >= self.cap * CANDIDATE_FACTOR {
                        truncated = true;
                        break 'symbols;
                    }
                    if idx.iter().any(|&i| i >= lo) {
                        let args: Vec<&Class> = idx.iter().map(|&i| &classes[i]).collect();
                        let width = args[0].values.len();
                        let mut values = Vec::with_capacity(width);
                        for w in 0..width {
                            let vs: Vec<Message> = args.iter().map(|c| c.values[w].clone()).collect();
                            values.push(self.theory.apply_normal(f, vs)?);
                        }
                        let mut fa = BTreeSet::new();
                        for c in &args {
                            fa.extend(c.fa.iter().cloned());
                        }
                        let recipe = Message::App(f.clone(), args.iter().map(|c| c.recipe.clone()).collect());
                        cands.push(Class {
                            recipe,
                            values,
                            fa,
                            level: d,
                        });
                    }
                    let mut k = n;
                    loop {
                        if k == 0 {
                            break 'tuples;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < hi {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
            cands.sort_by(|a, b| (a.recipe.size(), &a.recipe).cmp(&(b.recipe.size(), &b.recipe)));
            for c in cands {
                if classes.len() >= self.cap {
                    complete = false;
                    return Ok(ClassEnumResult {
                        classes,
                        complete,
                        stopped: false,
                    });
                }
                if self.admit(c, &mut classes, &mut seen, visit) {
                    return Ok(ClassEnumResult {
                        classes,
                        complete,
                        stopped: true,
                    });
                }
            }
            if truncated {
                return Ok(ClassEnumResult {
                    classes,
                    complete: false,
                    stopped: false,
                });
            }
        }
        Ok(ClassEnumResult {
            classes,
            complete,
            stopped: false,
        })
    }

    fn admit(
        &self,
        c: Class,
        classes: &mut Vec<Class>,
        seen: &mut HashSet<ClassKey>,
        visit: &mut dyn FnMut(&Class) -> bool,
    ) -> bool {
        let key = (c.values.clone(), if self.with_fa { Some(c.fa.clone()) } else { None });
        if !seen.insert(key) {
            return false;
        }
        let stop = visit(&c);
        classes.push(c);
        stop
    }
}

/// Sorted public constants followed by sorted aliases.
fn atom_recipes(dom: &BTreeSet<Alias>, consts: &BTreeSet<Name>) -> Vec<Message> {
    consts
        .iter()
        .map(|c| Message::Var(c.clone()))
        .chain(dom.iter().map(|a| Message::Alias(a.clone())))
        .collect()
}

/// All recipes over `dom` and `consts` up to the given depth, normalized and
/// deduplicated modulo the theory, ordered by size then lexicographically.
pub fn recipe_enum(
    dom: &BTreeSet<Alias>,
    consts: &BTreeSet<Name>,
    depth: usize,
    theory: &Theory,
) -> Result<Vec<Message>, TermError> {
    let atoms = atom_recipes(dom, consts)
        .into_iter()
        .map(|r| (r.clone(), vec![r]))
        .collect();
    let res = ClassEnum::new(theory, depth, false).run(atoms, &mut |_| false)?;
    let mut out: Vec<Message> = res
        .classes
        .into_iter()
        .map(|c| c.values.into_iter().next().unwrap())
        .collect();
    out.sort_by(|a, b| (a.size(), a).cmp(&(b.size(), b)));
    Ok(out)
}

/// Recipe classes of one frame keyed by (value, free aliases). Used for
/// channel recipes and for deduplicated attacker inputs.
pub fn frame_classes(
    frame: &Substitution,
    consts: &BTreeSet<Name>,
    depth: usize,
    theory: &Theory,
) -> Result<Vec<Class>, TermError> {
    let atoms = atom_recipes(&frame.alias_dom(), consts)
        .into_iter()
        .map(|r| {
            let v = r.apply(frame);
            (r, vec![v])
        })
        .collect();
    Ok(ClassEnum::new(theory, depth, true).run(atoms, &mut |_| false)?.classes)
}

/// Outcome of a bounded static comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticResult {
    pub witness: Option<TestWitness>,
    /// False when the class cap cut the search short.
    pub complete: bool,
}

/// Compares the frames of `a` and `b` (the latter through `rho`) on all
/// recipe pairs up to `depth`. With `iff` both directions count; otherwise
/// only tests that hold on `a` and fail on `b`.
pub fn static_compare(
    a: &Substitution,
    b: &Substitution,
    rho: &AliasMap,
    consts: &BTreeSet<Name>,
    depth: usize,
    iff: bool,
    theory: &Theory,
) -> Result<StaticResult, TermError> {
    let atoms: Vec<(Message, Vec<Message>)> = atom_recipes(&a.alias_dom(), consts)
        .into_iter()
        .map(|r| {
            let va = r.apply(a);
            let vb = r.rename_aliases(rho).apply(b);
            (r, vec![va, vb])
        })
        .collect();
    let mut by_a: HashMap<Message, (Message, Message)> = HashMap::new();
    let mut by_b: HashMap<Message, (Message, Message)> = HashMap::new();
    let mut found: Option<TestWitness> = None;
    let mut visit = |c: &Class| -> bool {
        let (va, vb) = (&c.values[0], &c.values[1]);
        if let Some((other_b, rep)) = by_a.get(va) {
            if other_b != vb {
                found = Some(TestWitness {
                    m: c.recipe.clone(),
                    n: rep.clone(),
                    holds_left: true,
                    holds_right: false,
                });
                return true;
            }
        }
        if iff {
            if let Some((other_a, rep)) = by_b.get(vb) {
                if other_a != va {
                    found = Some(TestWitness {
                        m: c.recipe.clone(),
                        n: rep.clone(),
                        holds_left: false,
                        holds_right: true,
                    });
                    return true;
                }
            }
        }
        by_a.entry(va.clone()).or_insert_with(|| (vb.clone(), c.recipe.clone()));
        by_b.entry(vb.clone()).or_insert_with(|| (va.clone(), c.recipe.clone()));
        false
    };
    let res = ClassEnum::new(theory, depth, false).run(atoms, &mut visit)?;
    Ok(StaticResult {
        witness: found,
        complete: res.complete,
    })
}

/// First recipe pair (up to `bounds.test_depth`) on which `a` and `b`
/// disagree, reading `b` through `rho`.
pub fn static_equiv_witness(
    a: &ExtendedProcess,
    b: &ExtendedProcess,
    rho: &AliasMap,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Option<TestWitness>, TermError> {
    let (a, b) = (a.alpha_canonical(), b.alpha_canonical());
    Ok(static_compare(
        &a.frame,
        &b.frame,
        rho,
        &bounds.public_consts,
        bounds.test_depth,
        true,
        theory,
    )?
    .witness)
}

/// First recipe pair that holds on `a` but fails on `b` through `rho`.
pub fn static_impl_witness(
    a: &ExtendedProcess,
    b: &ExtendedProcess,
    rho: &AliasMap,
    theory: &Theory,
    bounds: &ExplorationBounds,
) -> Result<Option<TestWitness>, TermError> {
    let (a, b) = (a.alpha_canonical(), b.alpha_canonical());
    Ok(static_compare(
        &a.frame,
        &b.frame,
        rho,
        &bounds.public_consts,
        bounds.test_depth,
        false,
        theory,
    )?
    .witness)
}
