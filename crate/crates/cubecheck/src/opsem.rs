//! Values, single steps, evaluation, and traces.
//!
//! Reduction is weak-head and deterministic: at most one rule applies to any
//! term. Terms that are neither values nor redexes report why they are stuck.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::{
    app, coe, expand_not, fresh_dim, fresh_var, fst, hcom, ifb, lam, notel, pair, s1elim, snd,
    Dim, DimName, Term, TermVar,
};

/// Evaluator rules that can be switched off, for sensitivity testing.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum KnockoutRule {
    /// Coercion along a constant boolean line returns its argument.
    CoeBool,
    /// An element of the negation line at 0 unfolds to a negation.
    NotelZero,
    /// A boolean composition with a constant extent collapses to a tube face.
    HcomBoolFace,
    /// A conditional on true takes the first branch.
    IfTrue,
    /// The loop at an endpoint collapses to the base point.
    LoopEndpoint,
}

pub const ALL_KNOCKOUTS: [KnockoutRule; 5] = [
    KnockoutRule::CoeBool,
    KnockoutRule::NotelZero,
    KnockoutRule::HcomBoolFace,
    KnockoutRule::IfTrue,
    KnockoutRule::LoopEndpoint,
];

thread_local! {
    static DISABLED: Cell<Option<KnockoutRule>> = const { Cell::new(None) };
}

/// Re-enables the disabled rule when dropped.
pub struct RuleGuard {
    previous: Option<KnockoutRule>,
}

/// Disables one evaluator rule on this thread until the guard drops.
pub fn disable_rule(rule: KnockoutRule) -> RuleGuard {
    let previous = DISABLED.with(|d| d.replace(Some(rule)));
    RuleGuard { previous }
}

impl Drop for RuleGuard {
    fn drop(&mut self) {
        DISABLED.with(|d| d.set(self.previous));
    }
}

fn enabled(rule: KnockoutRule) -> bool {
    DISABLED.with(|d| d.get()) != Some(rule)
}

/// The rule currently knocked out on this thread, if any.
pub fn disabled_rule() -> Option<KnockoutRule> {
    DISABLED.with(|d| d.get())
}

/// The default step budget for evaluation.
pub const DEFAULT_FUEL: usize = 100_000;

/// Outcome of attempting a single step.
#[derive(Clone, PartialEq, Debug)]
pub enum StepResult {
    /// The term reduced to the given successor.
    Stepped(Term),
    /// The term is a value.
    IsValue,
    /// No rule applies; the reason names the offending head.
    Stuck(String),
}

/// Errors from running a term to a value.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no value after {steps} steps")]
    FuelExhausted { steps: usize, last: Term },
    #[error("stuck: {reason}")]
    Stuck { term: Term, reason: String },
}

/// How a trace ended.
#[derive(Clone, PartialEq, Debug)]
pub enum TraceVerdict {
    Value,
    FuelExhausted,
    Stuck(String),
}

impl fmt::Display for TraceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceVerdict::Value => write!(f, "value"),
            TraceVerdict::FuelExhausted => write!(f, "fuel-exhausted"),
            TraceVerdict::Stuck(reason) => write!(f, "stuck: {reason}"),
        }
    }
}

/// A reduction sequence from a start term, including the final term.
#[derive(Clone, PartialEq, Debug)]
pub struct Trace {
    pub steps: Vec<Term>,
    pub verdict: TraceVerdict,
}

/// Whether a term is a weak-head value.
pub fn is_val(term: &Term) -> bool {
    match term {
        Term::Arr(..)
        | Term::Prd(..)
        | Term::Bool
        | Term::Circle
        | Term::Lam(..)
        | Term::Pair(..)
        | Term::True
        | Term::False
        | Term::Base => true,
        Term::Notb(d) | Term::Loop(d) => matches!(d, Dim::Name(_)),
        Term::Notel(d, _) => matches!(d, Dim::Name(_)),
        Term::Hcom {
            extent: Dim::Name(_),
            ty,
            from,
            to,
            ..
        } => from != to && matches!(**ty, Term::Bool | Term::Circle),
        _ => false,
    }
}

fn avoid_of(terms: &[&Term]) -> BTreeSet<DimName> {
    let mut avoid = BTreeSet::new();
    for t in terms {
        avoid.extend(t.free_dims());
    }
    avoid
}

/// Renames a tube binder away from names free in terms moving under it.
fn retube(
    binder: DimName,
    tube0: &Term,
    tube1: &Term,
    moving_frees: &BTreeSet<DimName>,
) -> (DimName, Term, Term) {
    if !moving_frees.contains(&binder) {
        return (binder, tube0.clone(), tube1.clone());
    }
    let mut avoid = moving_frees.clone();
    avoid.extend(tube0.free_dims());
    avoid.extend(tube1.free_dims());
    avoid.insert(binder);
    let renamed = fresh_dim(binder, &avoid);
    (
        renamed,
        tube0.subst_dim(binder, Dim::Name(renamed)),
        tube1.subst_dim(binder, Dim::Name(renamed)),
    )
}

fn fresh_param(base: &str, avoid_terms: &[&Term]) -> TermVar {
    let mut avoid = BTreeSet::new();
    for t in avoid_terms {
        avoid.extend(t.free_vars());
    }
    fresh_var(TermVar::new(base), &avoid)
}

/// Attempts one weak-head reduction step.
pub fn step(term: &Term) -> StepResult {
    use StepResult::*;
    if is_val(term) {
        return IsValue;
    }
    match term {
        Term::Var(v) => Stuck(format!("unbound variable {v}")),
        Term::Notb(_) => Stepped(Term::Bool),
        Term::Loop(_) => {
            if enabled(KnockoutRule::LoopEndpoint) {
                Stepped(Term::Base)
            } else {
                Stuck("loop at an endpoint".into())
            }
        }
        Term::Notel(d, body) => match d {
            Dim::Zero => {
                if enabled(KnockoutRule::NotelZero) {
                    Stepped(expand_not((**body).clone()))
                } else {
                    Stuck("negation line element at 0".into())
                }
            }
            Dim::One => Stepped((**body).clone()),
            Dim::Name(_) => IsValue,
        },
        Term::App(f, a) => match step(f) {
            Stepped(f2) => Stepped(app(f2, (**a).clone())),
            Stuck(r) => Stuck(r),
            IsValue => match &**f {
                Term::Lam(param, body) => Stepped(body.subst_term(*param, a)),
                _ => Stuck("application of a value that is not a function".into()),
            },
        },
        Term::Fst(p) => match step(p) {
            Stepped(p2) => Stepped(fst(p2)),
            Stuck(r) => Stuck(r),
            IsValue => match &**p {
                Term::Pair(l, _) => Stepped((**l).clone()),
                _ => Stuck("first projection of a value that is not a pair".into()),
            },
        },
        Term::Snd(p) => match step(p) {
            Stepped(p2) => Stepped(snd(p2)),
            Stuck(r) => Stuck(r),
            IsValue => match &**p {
                Term::Pair(_, r) => Stepped((**r).clone()),
                _ => Stuck("second projection of a value that is not a pair".into()),
            },
        },
        Term::If {
            motive,
            scrut,
            tt,
            ff,
        } => match step(scrut) {
            Stepped(s2) => Stepped(ifb(
                (**motive).clone(),
                s2,
                (**tt).clone(),
                (**ff).clone(),
            )),
            Stuck(r) => Stuck(r),
            IsValue => match &**scrut {
                Term::True => {
                    if enabled(KnockoutRule::IfTrue) {
                        Stepped((**tt).clone())
                    } else {
                        Stuck("conditional on true".into())
                    }
                }
                Term::False => Stepped((**ff).clone()),
                Term::Hcom {
                    extent,
                    from,
                    to,
                    cap,
                    tube_dim,
                    tube0,
                    tube1,
                    ..
                } => {
                    let moving = avoid_of(&[motive, tt, ff]);
                    let (y, t0, t1) = retube(*tube_dim, tube0, tube1, &moving);
                    let branch = |m: Term| ifb((**motive).clone(), m, (**tt).clone(), (**ff).clone());
                    Stepped(hcom(
                        *extent,
                        (**motive).clone(),
                        *from,
                        *to,
                        branch((**cap).clone()),
                        y,
                        branch(t0),
                        branch(t1),
                    ))
                }
                _ => Stuck("conditional on a value that is not a boolean".into()),
            },
        },
        Term::S1Elim {
            motive,
            scrut,
            base_case,
            loop_dim,
            loop_case,
        } => match step(scrut) {
            Stepped(s2) => Stepped(s1elim(
                (**motive).clone(),
                s2,
                (**base_case).clone(),
                *loop_dim,
                (**loop_case).clone(),
            )),
            Stuck(r) => Stuck(r),
            IsValue => match &**scrut {
                Term::Base => Stepped((**base_case).clone()),
                Term::Loop(Dim::Name(w)) => {
                    Stepped(loop_case.subst_dim(*loop_dim, Dim::Name(*w)))
                }
                Term::Hcom {
                    extent,
                    from,
                    to,
                    cap,
                    tube_dim,
                    tube0,
                    tube1,
                    ..
                } => {
                    let mut moving = avoid_of(&[motive, base_case]);
                    let mut loop_frees = loop_case.free_dims();
                    loop_frees.remove(loop_dim);
                    moving.extend(loop_frees);
                    let (y, t0, t1) = retube(*tube_dim, tube0, tube1, &moving);
                    let elim = |m: Term| {
                        s1elim(
                            (**motive).clone(),
                            m,
                            (**base_case).clone(),
                            *loop_dim,
                            (**loop_case).clone(),
                        )
                    };
                    Stepped(hcom(
                        *extent,
                        (**motive).clone(),
                        *from,
                        *to,
                        elim((**cap).clone()),
                        y,
                        elim(t0),
                        elim(t1),
                    ))
                }
                _ => Stuck("circle eliminator on a value that is not in the circle".into()),
            },
        },
        Term::Coe {
            dim,
            line,
            from,
            to,
            arg,
        } => {
            if !is_val(line) {
                return match step(line) {
                    Stepped(l2) => Stepped(coe(*dim, l2, *from, *to, (**arg).clone())),
                    Stuck(r) => Stuck(r),
                    IsValue => unreachable!("non-value cannot report IsValue"),
                };
            }
            match &**line {
                Term::Bool => {
                    if enabled(KnockoutRule::CoeBool) {
                        Stepped((**arg).clone())
                    } else {
                        Stuck("coercion along the boolean line".into())
                    }
                }
                Term::Circle => Stepped((**arg).clone()),
                Term::Arr(dom, cod) => {
                    let param = fresh_param("a", &[arg, dom, cod]);
                    Stepped(lam(
                        param,
                        coe(
                            *dim,
                            (**cod).clone(),
                            *from,
                            *to,
                            app(
                                (**arg).clone(),
                                coe(*dim, (**dom).clone(), *to, *from, Term::Var(param)),
                            ),
                        ),
                    ))
                }
                Term::Prd(left, right) => Stepped(pair(
                    coe(*dim, (**left).clone(), *from, *to, fst((**arg).clone())),
                    coe(*dim, (**right).clone(), *from, *to, snd((**arg).clone())),
                )),
                Term::Notb(Dim::Name(w)) if w == dim => match (*from, *to) {
                    (f, t) if f.is_constant() && t.is_constant() => {
                        if f == t {
                            Stepped((**arg).clone())
                        } else {
                            Stepped(expand_not((**arg).clone()))
                        }
                    }
                    (Dim::Zero, Dim::Name(z)) => {
                        Stepped(notel(Dim::Name(z), expand_not((**arg).clone())))
                    }
                    (Dim::One, Dim::Name(z)) => Stepped(notel(Dim::Name(z), (**arg).clone())),
                    (Dim::Name(w0), _) => match step(arg) {
                        Stepped(a2) => Stepped(coe(*dim, (**line).clone(), *from, *to, a2)),
                        Stuck(r) => Stuck(r),
                        IsValue => match &**arg {
                            Term::Notel(Dim::Name(aw), body) if *aw == w0 => {
                                Stepped(notel(*to, (**body).clone()))
                            }
                            _ => Stuck(
                                "coercion along the negation line of a value that is not an \
                                 element of it"
                                    .into(),
                            ),
                        },
                    },
                    _ => unreachable!("all dimension shapes covered"),
                },
                Term::Notb(_) => Stepped((**arg).clone()),
                _ => Stuck("coercion along a line that is not a type".into()),
            }
        }
        Term::Hcom {
            extent,
            ty,
            from,
            to,
            cap,
            tube_dim,
            tube0,
            tube1,
        } => {
            if !is_val(ty) {
                return match step(ty) {
                    Stepped(ty2) => Stepped(hcom(
                        *extent,
                        ty2,
                        *from,
                        *to,
                        (**cap).clone(),
                        *tube_dim,
                        (**tube0).clone(),
                        (**tube1).clone(),
                    )),
                    Stuck(r) => Stuck(r),
                    IsValue => unreachable!("non-value cannot report IsValue"),
                };
            }
            match &**ty {
                Term::Bool | Term::Circle => match extent {
                    Dim::Zero | Dim::One => {
                        let at_bool = matches!(**ty, Term::Bool);
                        if at_bool && !enabled(KnockoutRule::HcomBoolFace) {
                            return Stuck("boolean composition with a constant extent".into());
                        }
                        let tube = if *extent == Dim::Zero { tube0 } else { tube1 };
                        Stepped(tube.subst_dim(*tube_dim, *to))
                    }
                    Dim::Name(_) => {
                        if from == to {
                            Stepped((**cap).clone())
                        } else {
                            unreachable!("composition values were filtered by is_val")
                        }
                    }
                },
                Term::Arr(dom, cod) => {
                    let param = fresh_param("a", &[cap, tube0, tube1, dom, cod]);
                    Stepped(lam(
                        param,
                        hcom(
                            *extent,
                            (**cod).clone(),
                            *from,
                            *to,
                            app((**cap).clone(), Term::Var(param)),
                            *tube_dim,
                            app((**tube0).clone(), Term::Var(param)),
                            app((**tube1).clone(), Term::Var(param)),
                        ),
                    ))
                }
                Term::Prd(left, right) => Stepped(pair(
                    hcom(
                        *extent,
                        (**left).clone(),
                        *from,
                        *to,
                        fst((**cap).clone()),
                        *tube_dim,
                        fst((**tube0).clone()),
                        fst((**tube1).clone()),
                    ),
                    hcom(
                        *extent,
                        (**right).clone(),
                        *from,
                        *to,
                        snd((**cap).clone()),
                        *tube_dim,
                        snd((**tube0).clone()),
                        snd((**tube1).clone()),
                    ),
                )),
                Term::Notb(Dim::Name(w)) => {
                    let moving = BTreeSet::from([*w]);
                    let (y, t0, t1) = retube(*tube_dim, tube0, tube1, &moving);
                    let mut avoid = avoid_of(&[cap, &t0, &t1]);
                    avoid.insert(*w);
                    avoid.insert(y);
                    let line_dim = fresh_dim(DimName::new("x"), &avoid);
                    let unline = |m: Term| {
                        coe(
                            line_dim,
                            Term::Notb(Dim::Name(line_dim)),
                            Dim::Name(*w),
                            Dim::One,
                            m,
                        )
                    };
                    Stepped(notel(
                        Dim::Name(*w),
                        hcom(
                            *extent,
                            Term::Bool,
                            *from,
                            *to,
                            unline((**cap).clone()),
                            y,
                            unline(t0),
                            unline(t1),
                        ),
                    ))
                }
                _ => Stuck("composition at a term that is not a type".into()),
            }
        }
        Term::Bool
        | Term::Circle
        | Term::True
        | Term::False
        | Term::Base
        | Term::Arr(..)
        | Term::Prd(..)
        | Term::Lam(..)
        | Term::Pair(..) => unreachable!("values were filtered above"),
    }
}

/// Runs a term to a value within the given step budget.
pub fn eval(term: &Term, fuel: usize) -> Result<Term, EvalError> {
    let mut current = term.clone();
    let mut used = 0;
    loop {
        match step(&current) {
            StepResult::IsValue => return Ok(current),
            StepResult::Stuck(reason) => {
                return Err(EvalError::Stuck {
                    term: current,
                    reason,
                })
            }
            StepResult::Stepped(next) => {
                used += 1;
                if used > fuel {
                    return Err(EvalError::FuelExhausted {
                        steps: fuel,
                        last: current,
                    });
                }
                current = next;
            }
        }
    }
}

/// Runs a term like [`eval`] but records every intermediate term.
pub fn trace(term: &Term, fuel: usize) -> Trace {
    let mut steps = vec![term.clone()];
    let mut used = 0;
    loop {
        let current = steps.last().expect("trace starts nonempty");
        match step(current) {
            StepResult::IsValue => {
                return Trace {
                    steps,
                    verdict: TraceVerdict::Value,
                }
            }
            StepResult::Stuck(reason) => {
                return Trace {
                    steps,
                    verdict: TraceVerdict::Stuck(reason),
                }
            }
            StepResult::Stepped(next) => {
                used += 1;
                if used > fuel {
                    return Trace {
                        steps,
                        verdict: TraceVerdict::FuelExhausted,
                    };
                }
                steps.push(next);
            }
        }
    }
}
