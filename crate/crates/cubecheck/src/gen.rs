//! Seeded generation of well-typed terms and composition instances by
//! inverting the typing rules, plus a greedy shrinker for failing terms.

use crate::laws::{
    check_kan_hypotheses, dim_wf, equal, member, member_under, pretype, Judgment, KanInstance,
    RuleCase,
};
use crate::opsem::DEFAULT_FUEL;
use crate::semantics::{eval_type, CheckConfig, TypeValue};
use crate::syntax::{
    app, arr, coe, fresh_dim, fst, hcom, ifb, lam, loop_, notb, notel, pair, prd, s1elim, snd,
    Dim, DimCtx, DimName, DimSubst, Term, TermVar,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

/// Relative weights for choosing a type former when the generator invents an
/// auxiliary type, as for an application's domain.
#[derive(Clone, Debug)]
pub struct TypeWeights {
    pub booleans: u32,
    pub circle: u32,
    pub negation_lines: u32,
    pub products: u32,
    pub functions: u32,
}

impl Default for TypeWeights {
    fn default() -> Self {
        TypeWeights {
            booleans: 4,
            circle: 2,
            negation_lines: 2,
            products: 2,
            functions: 1,
        }
    }
}

/// Budgets and weights for one generation run. Identical configs produce
/// identical output.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub seed: u64,
    /// Node budget for the generated term.
    pub size: usize,
    /// How many context names the generator may mention.
    pub dim_budget: usize,
    pub type_weights: TypeWeights,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            size: 20,
            dim_budget: 2,
            type_weights: TypeWeights::default(),
        }
    }
}

/// Why no instance could be produced.
#[derive(Debug, Error)]
pub enum GenError {
    #[error("the context has no dimension name to compose along")]
    NeedsDimension,
    #[error("the type expression does not classify: {0}")]
    BadType(String),
    #[error("no instance with passing hypotheses after {attempts} attempts; last: {last}")]
    ResamplingExhausted { attempts: usize, last: String },
}

/// The type expression denoting a classified type value.
pub fn type_term(tv: &TypeValue) -> Term {
    match tv {
        TypeValue::Bool => Term::Bool,
        TypeValue::Circle => Term::Circle,
        TypeValue::NotLine(x) => notb(Dim::Name(*x)),
        TypeValue::Prod(a, b) => prd(a.clone(), b.clone()),
        TypeValue::Arrow(a, b) => arr(a.clone(), b.clone()),
    }
}

/// Generates a term of the goal type over the context.
pub fn gen_term(goal: &TypeValue, psi: &DimCtx, cfg: &GenConfig) -> Term {
    gen_term_case(goal, psi, cfg).0
}

/// Generates a term together with the rule case for its head constructor.
/// The case's premises cover the generated subterms, so running it checks
/// the whole term.
pub fn gen_term_case(goal: &TypeValue, psi: &DimCtx, cfg: &GenConfig) -> (Term, RuleCase) {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        weights: &cfg.type_weights,
        dim_budget: cfg.dim_budget,
    };
    let mut budget = cfg.size;
    g.term_case(goal, psi, &mut budget)
}

const RESAMPLE_LIMIT: usize = 16;

/// Samples a composition instance over the given context whose hypothesis
/// judgments pass the checker. Tubes are degenerate or cap faces, so
/// adjacency holds by construction and resampling is rare.
pub fn gen_kan_instance(
    type_expr: &Term,
    psi: &DimCtx,
    cfg: &GenConfig,
) -> Result<KanInstance, GenError> {
    if psi.is_empty() {
        return Err(GenError::NeedsDimension);
    }
    let goal = eval_type(type_expr, DEFAULT_FUEL).map_err(|e| GenError::BadType(e.to_string()))?;
    let check = CheckConfig::default();
    let mut last = String::new();
    for attempt in 0..RESAMPLE_LIMIT {
        let seed = cfg.seed.wrapping_add(attempt as u64).wrapping_mul(0x9e3779b97f4a7c15);
        let mut g = Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            weights: &cfg.type_weights,
            dim_budget: cfg.dim_budget,
        };
        let names = psi.names();
        let x = names[g.rng.gen_range(0..names.len())];
        let mut budget = cfg.size;
        let cap = g.term(&goal, psi, &mut budget);
        let from = g.pick_dim(psi);
        let to = g.pick_dim(psi);
        let mut avoid: BTreeSet<DimName> = psi.names().iter().copied().collect();
        avoid.extend(cap.free_dims());
        avoid.extend(type_expr.free_dims());
        let y = fresh_dim(DimName::new("y"), &avoid);
        let (tube0, tube1) = if g.coin() {
            (cap.subst_dim(x, Dim::Zero), cap.subst_dim(x, Dim::One))
        } else {
            (cap.clone(), cap.clone())
        };
        let inst = KanInstance {
            psi: DimSubst::identity(psi),
            x,
            from,
            to,
            cap,
            tube_dim: y,
            tube0,
            tube1,
            type_expr: type_expr.clone(),
        };
        let report = check_kan_hypotheses(&inst, &check);
        if report.holds() {
            return Ok(inst);
        }
        last = report.to_string();
    }
    Err(GenError::ResamplingExhausted {
        attempts: RESAMPLE_LIMIT,
        last,
    })
}

#[derive(Clone, Copy)]
enum Schema {
    Intro,
    Elim,
    Hcom,
    Coe,
}

#[derive(Clone, Copy)]
enum ElimKind {
    If,
    App,
    Fst,
    Snd,
    CircleElim,
}

#[derive(Clone, Copy)]
enum TypeFormer {
    Bool,
    Circle,
    NotLine,
    Prod,
    Arrow,
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    weights: &'a TypeWeights,
    dim_budget: usize,
}

impl Gen<'_> {
    fn coin(&mut self) -> bool {
        self.rng.gen()
    }

    fn weighted<T: Copy>(&mut self, entries: &[(u32, T)]) -> T {
        let total: u32 = entries.iter().map(|(w, _)| w).sum();
        if total == 0 {
            return entries[0].1;
        }
        let mut roll = self.rng.gen_range(0..total);
        for (w, t) in entries {
            if roll < *w {
                return *t;
            }
            roll -= w;
        }
        unreachable!("weighted roll within total")
    }

    /// Dimensions the generator may mention: the constants plus the first
    /// `dim_budget` context names.
    fn pick_dim(&mut self, psi: &DimCtx) -> Dim {
        let mut dims = vec![Dim::Zero, Dim::One];
        dims.extend(
            psi.names()
                .iter()
                .take(self.dim_budget)
                .map(|n| Dim::Name(*n)),
        );
        dims[self.rng.gen_range(0..dims.len())]
    }

    fn pick_name(&mut self, psi: &DimCtx) -> Option<DimName> {
        let names: Vec<DimName> = psi.names().iter().take(self.dim_budget).copied().collect();
        if names.is_empty() {
            None
        } else {
            Some(names[self.rng.gen_range(0..names.len())])
        }
    }

    fn term(&mut self, goal: &TypeValue, psi: &DimCtx, budget: &mut usize) -> Term {
        self.term_case(goal, psi, budget).0
    }

    fn term_case(&mut self, goal: &TypeValue, psi: &DimCtx, budget: &mut usize) -> (Term, RuleCase) {
        let schema = if *budget <= 1 {
            Schema::Intro
        } else {
            self.weighted(&[
                (5, Schema::Intro),
                (3, Schema::Elim),
                (2, Schema::Hcom),
                (2, Schema::Coe),
            ])
        };
        *budget = budget.saturating_sub(1);
        match schema {
            Schema::Intro => self.intro(goal, psi, budget),
            Schema::Elim => self.elim(goal, psi, budget),
            Schema::Hcom => self.hcom_term(goal, psi, budget),
            Schema::Coe => self.coe_term(goal, psi, budget),
        }
    }

    /// A type value for a component type expression, for recursing into
    /// product and function goals. A component that fails to classify falls
    /// back to booleans; the rule check on the result would report it.
    fn component(&self, t: &Term) -> TypeValue {
        eval_type(t, DEFAULT_FUEL).unwrap_or(TypeValue::Bool)
    }

    fn intro(&mut self, goal: &TypeValue, psi: &DimCtx, budget: &mut usize) -> (Term, RuleCase) {
        match goal {
            TypeValue::Bool => {
                let (t, rule_id) = if self.coin() {
                    (Term::True, "bool-true")
                } else {
                    (Term::False, "bool-false")
                };
                (t.clone(), case(rule_id, vec![], member(psi, Term::Bool, t)))
            }
            TypeValue::Circle => {
                if *budget >= 1 && self.coin() {
                    let r = self.pick_dim(psi);
                    (
                        loop_(r),
                        case(
                            "circle-loop",
                            vec![dim_wf(psi, r)],
                            member(psi, Term::Circle, loop_(r)),
                        ),
                    )
                } else {
                    (
                        Term::Base,
                        case("circle-base", vec![], member(psi, Term::Circle, Term::Base)),
                    )
                }
            }
            TypeValue::NotLine(x) => {
                let body = self.term(&TypeValue::Bool, psi, budget);
                let t = notel(Dim::Name(*x), body.clone());
                (
                    t.clone(),
                    case(
                        "not-intro",
                        vec![member(psi, Term::Bool, body)],
                        member(psi, notb(Dim::Name(*x)), t),
                    ),
                )
            }
            TypeValue::Prod(a, b) => {
                let left = self.term(&self.component(a), psi, budget);
                let right = self.term(&self.component(b), psi, budget);
                let t = pair(left.clone(), right.clone());
                (
                    t.clone(),
                    case(
                        "product-intro",
                        vec![
                            member(psi, a.clone(), left),
                            member(psi, b.clone(), right),
                        ],
                        member(psi, prd(a.clone(), b.clone()), t),
                    ),
                )
            }
            TypeValue::Arrow(a, b) => {
                let v = TermVar::new("a");
                let body = if a == b && self.coin() {
                    Term::Var(v)
                } else {
                    self.term(&self.component(b), psi, budget)
                };
                let t = lam(v, body.clone());
                (
                    t.clone(),
                    case(
                        "function-intro",
                        vec![member_under(psi, vec![(v, a.clone())], b.clone(), body)],
                        member(psi, arr(a.clone(), b.clone()), t),
                    ),
                )
            }
        }
    }

    fn elim(&mut self, goal: &TypeValue, psi: &DimCtx, budget: &mut usize) -> (Term, RuleCase) {
        let goal_ty = type_term(goal);
        let kind = self.weighted(&[
            (3, ElimKind::If),
            (3, ElimKind::App),
            (2, ElimKind::Fst),
            (2, ElimKind::Snd),
            (2, ElimKind::CircleElim),
        ]);
        match kind {
            ElimKind::If => {
                *budget = budget.saturating_sub(node_count(&goal_ty));
                let scrut = self.term(&TypeValue::Bool, psi, budget);
                let tt = self.term(goal, psi, budget);
                let ff = self.term(goal, psi, budget);
                let t = ifb(goal_ty.clone(), scrut.clone(), tt.clone(), ff.clone());
                (
                    t.clone(),
                    case(
                        "bool-if",
                        vec![
                            pretype(psi, goal_ty.clone()),
                            member(psi, Term::Bool, scrut),
                            member(psi, goal_ty.clone(), tt),
                            member(psi, goal_ty.clone(), ff),
                        ],
                        member(psi, goal_ty, t),
                    ),
                )
            }
            ElimKind::App => {
                let dom = self.invent_type(psi);
                let fun_goal = TypeValue::Arrow(dom.clone(), goal_ty.clone());
                let fun = self.term(&fun_goal, psi, budget);
                let arg = self.term(&self.component(&dom), psi, budget);
                let t = app(fun.clone(), arg.clone());
                (
                    t.clone(),
                    case(
                        "function-elim",
                        vec![
                            member(psi, arr(dom.clone(), goal_ty.clone()), fun),
                            member(psi, dom, arg),
                        ],
                        member(psi, goal_ty, t),
                    ),
                )
            }
            ElimKind::Fst => {
                let other = self.invent_type(psi);
                let p_goal = TypeValue::Prod(goal_ty.clone(), other.clone());
                let p = self.term(&p_goal, psi, budget);
                let t = fst(p.clone());
                (
                    t.clone(),
                    case(
                        "product-fst",
                        vec![member(psi, prd(goal_ty.clone(), other), p)],
                        member(psi, goal_ty, t),
                    ),
                )
            }
            ElimKind::Snd => {
                let other = self.invent_type(psi);
                let p_goal = TypeValue::Prod(other.clone(), goal_ty.clone());
                let p = self.term(&p_goal, psi, budget);
                let t = snd(p.clone());
                (
                    t.clone(),
                    case(
                        "product-snd",
                        vec![member(psi, prd(other, goal_ty.clone()), p)],
                        member(psi, goal_ty, t),
                    ),
                )
            }
            ElimKind::CircleElim => {
                *budget = budget.saturating_sub(node_count(&goal_ty));
                let scrut = self.term(&TypeValue::Circle, psi, budget);
                let mut base_budget = *budget / 2;
                let reserved = base_budget;
                let base_case = self.term(goal, psi, &mut base_budget);
                *budget = budget.saturating_sub(2 * (reserved - base_budget));
                let avoid: BTreeSet<DimName> = psi.names().iter().copied().collect();
                let z = fresh_dim(DimName::new("z"), &avoid);
                let loop_case = base_case.clone();
                let t = s1elim(
                    goal_ty.clone(),
                    scrut.clone(),
                    base_case.clone(),
                    z,
                    loop_case.clone(),
                );
                (
                    t.clone(),
                    case(
                        "circle-elim",
                        vec![
                            member(psi, Term::Circle, scrut),
                            member(psi, goal_ty.clone(), base_case.clone()),
                            member(&psi.extended(z), goal_ty.clone(), loop_case.clone()),
                            equal(
                                psi,
                                goal_ty.clone(),
                                loop_case.subst_dim(z, Dim::Zero),
                                base_case.clone(),
                            ),
                            equal(
                                psi,
                                goal_ty.clone(),
                                loop_case.subst_dim(z, Dim::One),
                                base_case,
                            ),
                        ],
                        member(psi, goal_ty, t),
                    ),
                )
            }
        }
    }

    /// A composition whose tubes are the cap or its faces, so adjacency
    /// holds by construction. The tubes and the type annotation are clones,
    /// so their node counts are charged against the budget too.
    fn hcom_term(&mut self, goal: &TypeValue, psi: &DimCtx, budget: &mut usize) -> (Term, RuleCase) {
        let goal_ty = type_term(goal);
        let extent = self.pick_dim(psi);
        let from = self.pick_dim(psi);
        let to = self.pick_dim(psi);
        let mut cap_budget = *budget / 3;
        let reserved = cap_budget;
        let cap = self.term(goal, psi, &mut cap_budget);
        *budget = budget.saturating_sub(3 * (reserved - cap_budget) + node_count(&goal_ty));
        let mut avoid: BTreeSet<DimName> = psi.names().iter().copied().collect();
        avoid.extend(cap.free_dims());
        avoid.extend(goal_ty.free_dims());
        let y = fresh_dim(DimName::new("y"), &avoid);
        let (tube0, tube1) = match extent {
            Dim::Name(x) if self.coin() => {
                (cap.subst_dim(x, Dim::Zero), cap.subst_dim(x, Dim::One))
            }
            _ => (cap.clone(), cap.clone()),
        };
        let t = hcom(
            extent,
            goal_ty.clone(),
            from,
            to,
            cap.clone(),
            y,
            tube0.clone(),
            tube1.clone(),
        );
        match extent {
            Dim::Name(x) => {
                let mut premises = vec![member(psi, goal_ty.clone(), cap.clone())];
                for (eps, tube) in [(Dim::Zero, &tube0), (Dim::One, &tube1)] {
                    let face_ty = goal_ty.subst_dim(x, eps);
                    premises.push(member(
                        &psi.extended(y),
                        face_ty.clone(),
                        tube.subst_dim(x, eps),
                    ));
                    premises.push(equal(
                        psi,
                        face_ty,
                        tube.subst_dim(y, from).subst_dim(x, eps),
                        cap.subst_dim(x, eps),
                    ));
                }
                (
                    t.clone(),
                    case("hcom-intro", premises, member(psi, goal_ty, t)),
                )
            }
            eps => {
                let tube = if eps == Dim::Zero { &tube0 } else { &tube1 };
                (
                    t.clone(),
                    case(
                        "hcom-tube-collapse",
                        vec![
                            member(psi, goal_ty.clone(), cap.clone()),
                            member(&psi.extended(y), goal_ty.clone(), tube.clone()),
                            equal(psi, goal_ty.clone(), tube.subst_dim(y, from), cap),
                        ],
                        equal(psi, goal_ty, t, tube.subst_dim(y, to)),
                    ),
                )
            }
        }
    }

    /// A coercion along a constant line, or along the negation line when the
    /// goal is booleans or a negation line.
    fn coe_term(&mut self, goal: &TypeValue, psi: &DimCtx, budget: &mut usize) -> (Term, RuleCase) {
        let goal_ty = type_term(goal);
        let mut avoid: BTreeSet<DimName> = psi.names().iter().copied().collect();
        avoid.extend(goal_ty.free_dims());
        let x = fresh_dim(DimName::new("x"), &avoid);
        let not_goal_end = match goal {
            TypeValue::Bool => Some(if self.coin() { Dim::Zero } else { Dim::One }),
            TypeValue::NotLine(w) => Some(Dim::Name(*w)),
            _ => None,
        };
        match not_goal_end {
            Some(to) if self.coin() => {
                let from = self.pick_dim(psi);
                *budget = budget.saturating_sub(1);
                let arg = match from {
                    Dim::Name(w) => self.term(&TypeValue::NotLine(w), psi, budget),
                    _ => self.term(&TypeValue::Bool, psi, budget),
                };
                let t = coe(x, notb(Dim::Name(x)), from, to, arg.clone());
                (
                    t.clone(),
                    case(
                        "coe-intro",
                        vec![member(psi, notb(from), arg)],
                        member(psi, notb(to), t),
                    ),
                )
            }
            _ => {
                let from = self.pick_dim(psi);
                let to = self.pick_dim(psi);
                *budget = budget.saturating_sub(node_count(&goal_ty));
                let arg = self.term(goal, psi, budget);
                let t = coe(x, goal_ty.clone(), from, to, arg.clone());
                (
                    t.clone(),
                    case(
                        "coe-intro",
                        vec![member(psi, goal_ty.clone(), arg)],
                        member(psi, goal_ty, t),
                    ),
                )
            }
        }
    }

    /// Invents an auxiliary type expression per the configured weights.
    /// Compound formers use shallow components.
    fn invent_type(&mut self, psi: &DimCtx) -> Term {
        let w = self.weights;
        let former = self.weighted(&[
            (w.booleans, TypeFormer::Bool),
            (w.circle, TypeFormer::Circle),
            (w.negation_lines, TypeFormer::NotLine),
            (w.products, TypeFormer::Prod),
            (w.functions, TypeFormer::Arrow),
        ]);
        match former {
            TypeFormer::Bool => Term::Bool,
            TypeFormer::Circle => Term::Circle,
            TypeFormer::NotLine => match self.pick_name(psi) {
                Some(n) => notb(Dim::Name(n)),
                None => Term::Bool,
            },
            TypeFormer::Prod => {
                let a = self.shallow_type(psi);
                let b = self.shallow_type(psi);
                prd(a, b)
            }
            TypeFormer::Arrow => {
                let a = self.shallow_type(psi);
                let b = self.shallow_type(psi);
                arr(a, b)
            }
        }
    }

    fn shallow_type(&mut self, psi: &DimCtx) -> Term {
        let w = self.weights;
        let former = self.weighted(&[
            (w.booleans.max(1), TypeFormer::Bool),
            (w.circle, TypeFormer::Circle),
            (w.negation_lines, TypeFormer::NotLine),
        ]);
        match former {
            TypeFormer::Circle => Term::Circle,
            TypeFormer::NotLine => match self.pick_name(psi) {
                Some(n) => notb(Dim::Name(n)),
                None => Term::Bool,
            },
            _ => Term::Bool,
        }
    }
}

fn case(rule_id: &'static str, premises: Vec<Judgment>, conclusion: Judgment) -> RuleCase {
    RuleCase {
        rule_id,
        case_id: format!("{rule_id}/generated"),
        premises,
        conclusion,
    }
}

/// Number of term constructors in a term.
pub fn node_count(t: &Term) -> usize {
    match t {
        Term::Var(_)
        | Term::Bool
        | Term::Circle
        | Term::Notb(_)
        | Term::True
        | Term::False
        | Term::Base
        | Term::Loop(_) => 1,
        Term::Arr(a, b) | Term::Prd(a, b) | Term::App(a, b) | Term::Pair(a, b) => {
            1 + node_count(a) + node_count(b)
        }
        Term::Lam(_, b) | Term::Fst(b) | Term::Snd(b) | Term::Notel(_, b) => 1 + node_count(b),
        Term::If {
            motive,
            scrut,
            tt,
            ff,
        } => 1 + node_count(motive) + node_count(scrut) + node_count(tt) + node_count(ff),
        Term::S1Elim {
            motive,
            scrut,
            base_case,
            loop_case,
            ..
        } => 1 + node_count(motive) + node_count(scrut) + node_count(base_case) + node_count(loop_case),
        Term::Coe { line, arg, .. } => 1 + node_count(line) + node_count(arg),
        Term::Hcom {
            ty,
            cap,
            tube0,
            tube1,
            ..
        } => 1 + node_count(ty) + node_count(cap) + node_count(tube0) + node_count(tube1),
    }
}

/// Greedily replaces subterms with smaller type-preserving alternatives
/// while the predicate keeps holding. The result is locally minimal for the
/// rewrite set: no single replacement both shrinks it and still fails.
pub fn shrink(m: &Term, failing: impl Fn(&Term) -> bool) -> Term {
    assert!(failing(m), "shrink needs a term the predicate holds for");
    let mut current = m.clone();
    loop {
        let before = node_count(&current);
        let next = shrink_candidates(&current)
            .into_iter()
            .find(|c| node_count(c) < before && failing(c));
        match next {
            Some(c) => current = c,
            None => return current,
        }
    }
}

/// One-step replacements anywhere in the term. Root rewrites keep the type:
/// branches for a conditional, the cap for a composition, the argument for a
/// coercion along a constant or endpoint-equal line, the base case for a
/// circle eliminator, beta and projection contractions, and the base point
/// for a loop.
/// Projects through a composition at a product type when every piece is a
/// literal pair, matching how the evaluator projects compositions.
fn project_composition(p: &Term, first: bool) -> Option<Term> {
    let Term::Hcom {
        extent,
        ty,
        from,
        to,
        cap,
        tube_dim,
        tube0,
        tube1,
    } = p
    else {
        return None;
    };
    let (Term::Prd(ta, tb), Term::Pair(ca, cb), Term::Pair(a0, b0), Term::Pair(a1, b1)) =
        (&**ty, &**cap, &**tube0, &**tube1)
    else {
        return None;
    };
    let (ty, cap, t0, t1) = if first {
        (ta, ca, a0, a1)
    } else {
        (tb, cb, b0, b1)
    };
    Some(hcom(
        *extent,
        (**ty).clone(),
        *from,
        *to,
        (**cap).clone(),
        *tube_dim,
        (**t0).clone(),
        (**t1).clone(),
    ))
}

fn shrink_candidates(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    match t {
        Term::If { motive, scrut, tt, ff } => {
            out.push((**tt).clone());
            out.push((**ff).clone());
            if **motive == Term::Bool {
                out.push((**scrut).clone());
            }
        }
        Term::App(f, a) => {
            if let Term::Lam(v, body) = &**f {
                out.push(body.subst_term(*v, a));
            } else if let Term::Hcom {
                extent,
                ty,
                from,
                to,
                cap,
                tube_dim,
                tube0,
                tube1,
            } = &**f
            {
                // Apply through a composition at a function type, as the
                // evaluator would, when every piece is a literal function.
                if let (Term::Arr(_, cod), Term::Lam(cv, cb), Term::Lam(v0, b0), Term::Lam(v1, b1)) =
                    (&**ty, &**cap, &**tube0, &**tube1)
                {
                    out.push(hcom(
                        *extent,
                        (**cod).clone(),
                        *from,
                        *to,
                        cb.subst_term(*cv, a),
                        *tube_dim,
                        b0.subst_term(*v0, a),
                        b1.subst_term(*v1, a),
                    ));
                }
            }
        }
        Term::Fst(p) => {
            if let Term::Pair(a, _) = &**p {
                out.push((**a).clone());
            } else if let Some(t) = project_composition(p, true) {
                out.push(t);
            }
        }
        Term::Snd(p) => {
            if let Term::Pair(_, b) = &**p {
                out.push((**b).clone());
            } else if let Some(t) = project_composition(p, false) {
                out.push(t);
            }
        }
        Term::Hcom { cap, .. } => out.push((**cap).clone()),
        Term::Coe {
            dim,
            line,
            from,
            to,
            arg,
        } => {
            // A negation line is boolean at every endpoint, so dropping the
            // coercion preserves the type even when the endpoints differ.
            if from == to
                || !line.free_dims().contains(dim)
                || matches!(&**line, Term::Notb(_))
            {
                out.push((**arg).clone());
            }
        }
        Term::S1Elim { motive, scrut, base_case, .. } => {
            out.push((**base_case).clone());
            if **motive == Term::Circle {
                out.push((**scrut).clone());
            }
        }
        Term::Loop(_) => out.push(Term::Base),
        _ => {}
    }
    match t {
        Term::Arr(a, b) => rebuild2(&mut out, a, b, |x, y| arr(x, y)),
        Term::Prd(a, b) => rebuild2(&mut out, a, b, |x, y| prd(x, y)),
        Term::App(a, b) => rebuild2(&mut out, a, b, |x, y| app(x, y)),
        Term::Pair(a, b) => rebuild2(&mut out, a, b, |x, y| pair(x, y)),
        Term::Lam(v, b) => rebuild1(&mut out, b, |x| lam(*v, x)),
        Term::Fst(p) => rebuild1(&mut out, p, fst),
        Term::Snd(p) => rebuild1(&mut out, p, snd),
        Term::Notel(d, b) => rebuild1(&mut out, b, |x| notel(*d, x)),
        Term::If {
            motive,
            scrut,
            tt,
            ff,
        } => {
            rebuild1(&mut out, motive, |x| {
                ifb(x, (**scrut).clone(), (**tt).clone(), (**ff).clone())
            });
            rebuild1(&mut out, scrut, |x| {
                ifb((**motive).clone(), x, (**tt).clone(), (**ff).clone())
            });
            rebuild1(&mut out, tt, |x| {
                ifb((**motive).clone(), (**scrut).clone(), x, (**ff).clone())
            });
            rebuild1(&mut out, ff, |x| {
                ifb((**motive).clone(), (**scrut).clone(), (**tt).clone(), x)
            });
        }
        Term::S1Elim {
            motive,
            scrut,
            base_case,
            loop_dim,
            loop_case,
        } => {
            rebuild1(&mut out, motive, |x| {
                s1elim(x, (**scrut).clone(), (**base_case).clone(), *loop_dim, (**loop_case).clone())
            });
            rebuild1(&mut out, scrut, |x| {
                s1elim((**motive).clone(), x, (**base_case).clone(), *loop_dim, (**loop_case).clone())
            });
            rebuild1(&mut out, base_case, |x| {
                s1elim((**motive).clone(), (**scrut).clone(), x, *loop_dim, (**loop_case).clone())
            });
            rebuild1(&mut out, loop_case, |x| {
                s1elim((**motive).clone(), (**scrut).clone(), (**base_case).clone(), *loop_dim, x)
            });
        }
        Term::Coe {
            dim,
            line,
            from,
            to,
            arg,
        } => {
            rebuild1(&mut out, line, |x| coe(*dim, x, *from, *to, (**arg).clone()));
            rebuild1(&mut out, arg, |x| coe(*dim, (**line).clone(), *from, *to, x));
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
            rebuild1(&mut out, ty, |x| {
                hcom(*extent, x, *from, *to, (**cap).clone(), *tube_dim, (**tube0).clone(), (**tube1).clone())
            });
            rebuild1(&mut out, cap, |x| {
                hcom(*extent, (**ty).clone(), *from, *to, x, *tube_dim, (**tube0).clone(), (**tube1).clone())
            });
            rebuild1(&mut out, tube0, |x| {
                hcom(*extent, (**ty).clone(), *from, *to, (**cap).clone(), *tube_dim, x, (**tube1).clone())
            });
            rebuild1(&mut out, tube1, |x| {
                hcom(*extent, (**ty).clone(), *from, *to, (**cap).clone(), *tube_dim, (**tube0).clone(), x)
            });
        }
        _ => {}
    }
    out
}

fn rebuild1(out: &mut Vec<Term>, child: &Term, rebuild: impl Fn(Term) -> Term) {
    for c in shrink_candidates(child) {
        out.push(rebuild(c));
    }
}

fn rebuild2(out: &mut Vec<Term>, a: &Term, b: &Term, rebuild: impl Fn(Term, Term) -> Term) {
    for c in shrink_candidates(a) {
        out.push(rebuild(c, b.clone()));
    }
    for c in shrink_candidates(b) {
        out.push(rebuild(a.clone(), c));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{check_kan, run_rule, CaseOutcome};
    use crate::opsem::{disable_rule, eval, KnockoutRule};
    use proptest::prelude::*;

    fn ctx(names: &[&str]) -> DimCtx {
        DimCtx::from_names(names.iter().map(|n| DimName::new(n))).expect("distinct names")
    }

    fn with_seed(seed: u64, size: usize) -> GenConfig {
        GenConfig {
            seed,
            size,
            ..GenConfig::default()
        }
    }

    fn children(t: &Term) -> Vec<&Term> {
        match t {
            Term::Arr(a, b) | Term::Prd(a, b) | Term::App(a, b) | Term::Pair(a, b) => {
                vec![a, b]
            }
            Term::Lam(_, b) | Term::Fst(b) | Term::Snd(b) | Term::Notel(_, b) => vec![b],
            Term::If {
                motive,
                scrut,
                tt,
                ff,
            } => vec![motive, scrut, tt, ff],
            Term::S1Elim {
                motive,
                scrut,
                base_case,
                loop_case,
                ..
            } => vec![motive, scrut, base_case, loop_case],
            Term::Coe { line, arg, .. } => vec![line, arg],
            Term::Hcom {
                ty,
                cap,
                tube0,
                tube1,
                ..
            } => vec![ty, cap, tube0, tube1],
            _ => vec![],
        }
    }

    fn any_node(t: &Term, pred: &impl Fn(&Term) -> bool) -> bool {
        pred(t) || children(t).into_iter().any(|c| any_node(c, pred))
    }

    fn has_hcom(t: &Term) -> bool {
        any_node(t, &|n| matches!(n, Term::Hcom { .. }))
    }

    #[test]
    fn size_one_requests_produce_boolean_constants() {
        for seed in 0..32 {
            let t = gen_term(&TypeValue::Bool, &ctx(&[]), &with_seed(seed, 1));
            assert!(matches!(t, Term::True | Term::False), "{t:?}");
        }
    }

    #[test]
    fn exhausted_budgets_fall_back_to_the_base_point() {
        for seed in 0..32 {
            let t = gen_term(&TypeValue::Circle, &ctx(&[]), &with_seed(seed, 1));
            assert_eq!(t, Term::Base);
        }
    }

    #[test]
    fn negation_line_coercion_computes_to_the_flipped_endpoint() {
        let x = DimName::new("x");
        let t = coe(x, notb(Dim::Name(x)), Dim::Zero, Dim::One, Term::True);
        assert_eq!(eval(&t, DEFAULT_FUEL).expect("evaluates"), Term::False);
    }

    #[test]
    fn generated_closed_boolean_terms_are_canonical() {
        for seed in 0..200 {
            let t = gen_term(&TypeValue::Bool, &ctx(&[]), &with_seed(seed, 20));
            let v = eval(&t, DEFAULT_FUEL).expect("closed boolean terms evaluate");
            assert!(matches!(v, Term::True | Term::False), "seed {seed}: {v:?}");
        }
    }

    #[test]
    fn named_contexts_admit_composition_values() {
        let psi = ctx(&["x"]);
        let found = (0..300).any(|seed| {
            let t = gen_term(&TypeValue::Circle, &psi, &with_seed(seed, 12));
            matches!(eval(&t, DEFAULT_FUEL), Ok(Term::Hcom { .. }))
        });
        assert!(found, "no seed evaluated to a composition value");
    }

    #[test]
    fn coercion_schema_emits_negation_lines() {
        let psi = ctx(&["x"]);
        let found = (0..300).any(|seed| {
            let t = gen_term(&TypeValue::Bool, &psi, &with_seed(seed, 12));
            any_node(&t, &|n| {
                matches!(n, Term::Coe { line, .. } if matches!(**line, Term::Notb(_)))
            })
        });
        assert!(found, "no seed used a negation line coercion");
    }

    #[test]
    fn every_constructor_class_appears_across_seeds() {
        let psi = ctx(&["x"]);
        let mut intro = false;
        let mut elim = false;
        let mut hcom_seen = false;
        let mut coe_seen = false;
        for seed in 0..1000 {
            let t = gen_term(&TypeValue::Bool, &psi, &with_seed(seed, 20));
            intro |= any_node(&t, &|n| {
                matches!(
                    n,
                    Term::True
                        | Term::False
                        | Term::Base
                        | Term::Loop(_)
                        | Term::Lam(..)
                        | Term::Pair(..)
                        | Term::Notel(..)
                )
            });
            elim |= any_node(&t, &|n| {
                matches!(
                    n,
                    Term::App(..)
                        | Term::Fst(_)
                        | Term::Snd(_)
                        | Term::If { .. }
                        | Term::S1Elim { .. }
                )
            });
            hcom_seen |= has_hcom(&t);
            coe_seen |= any_node(&t, &|n| matches!(n, Term::Coe { .. }));
        }
        assert!(intro && elim && hcom_seen && coe_seen);
    }

    #[test]
    fn kan_instances_pass_their_hypotheses_and_avoid_violations() {
        let psi = ctx(&["x"]);
        let types = [
            Term::Bool,
            Term::Circle,
            prd(Term::Bool, Term::Bool),
            arr(Term::Bool, Term::Bool),
            notb(Dim::Name(DimName::new("x"))),
        ];
        let check = CheckConfig::default();
        for (k, ty) in types.iter().enumerate() {
            let inst = gen_kan_instance(ty, &psi, &with_seed(k as u64, 6)).expect("instance");
            for condition in 1..=4 {
                let report = check_kan(condition, &inst, &check);
                match report.verdict {
                    crate::semantics::Verdict::Holds { .. } => {}
                    crate::semantics::Verdict::Fails => {
                        let clause = &report.witness.as_ref().expect("witness").clause;
                        assert!(
                            clause.starts_with("hypothesis"),
                            "condition {condition} violated at {ty:?}: {report}"
                        );
                    }
                    crate::semantics::Verdict::Inconclusive => {
                        panic!("condition {condition} inconclusive at {ty:?}: {report}")
                    }
                }
            }
        }
    }

    #[test]
    fn instance_generation_is_deterministic() {
        let psi = ctx(&["x", "z"]);
        let ty = prd(Term::Bool, Term::Bool);
        let a = gen_kan_instance(&ty, &psi, &with_seed(7, 8)).expect("instance");
        let b = gen_kan_instance(&ty, &psi, &with_seed(7, 8)).expect("instance");
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn instance_generation_reports_missing_dimensions_and_bad_types() {
        assert!(matches!(
            gen_kan_instance(&Term::Bool, &ctx(&[]), &GenConfig::default()),
            Err(GenError::NeedsDimension)
        ));
        assert!(matches!(
            gen_kan_instance(&Term::True, &ctx(&["x"]), &GenConfig::default()),
            Err(GenError::BadType(_))
        ));
    }

    #[test]
    fn shrink_returns_minimal_terms_unchanged() {
        assert_eq!(shrink(&Term::True, |t| *t == Term::True), Term::True);
        let x = DimName::new("x");
        let y = DimName::new("y");
        let h = hcom(
            Dim::Name(x),
            Term::Bool,
            Dim::Zero,
            Dim::One,
            Term::True,
            y,
            Term::True,
            Term::True,
        );
        assert_eq!(shrink(&h, has_hcom), h);
    }

    #[test]
    fn a_large_violating_term_shrinks_below_ten_nodes() {
        let violates = |t: &Term| {
            let _guard = disable_rule(KnockoutRule::HcomBoolFace);
            !matches!(eval(t, DEFAULT_FUEL), Ok(Term::True | Term::False))
        };
        let psi = ctx(&[]);
        let (seed, big) = (0..)
            .map(|seed| (seed, gen_term(&TypeValue::Bool, &psi, &with_seed(seed, 50))))
            .find(|(_, t)| node_count(t) >= 40 && violates(t))
            .expect("a large violating term exists");
        let shrunk = shrink(&big, violates);
        assert!(violates(&shrunk));
        assert!(has_hcom(&shrunk), "the stuck composition must survive");
        assert!(
            node_count(&shrunk) <= 10,
            "seed {seed}: {} nodes left",
            node_count(&shrunk)
        );
        let final_count = node_count(&shrunk);
        let improvable = shrink_candidates(&shrunk)
            .into_iter()
            .any(|c| node_count(&c) < final_count && violates(&c));
        assert!(!improvable, "shrink stopped before a local minimum");
    }

    proptest! {
        #[test]
        fn generation_is_deterministic(seed: u64, size in 1usize..40) {
            let psi = ctx(&["x"]);
            let cfg = with_seed(seed, size);
            let (t1, c1) = gen_term_case(&TypeValue::Bool, &psi, &cfg);
            let (t2, c2) = gen_term_case(&TypeValue::Bool, &psi, &cfg);
            prop_assert_eq!(t1, t2);
            prop_assert_eq!(c1.rule_id, c2.rule_id);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn generated_skeletons_run_sound(seed in 0u64..1_000_000, size in 1usize..12) {
            let psi = ctx(&["x"]);
            let (_, case) = gen_term_case(&TypeValue::Bool, &psi, &with_seed(seed, size));
            let cfg = CheckConfig {
                depth: 16,
                ..CheckConfig::default()
            };
            let result = run_rule(&case, &cfg);
            prop_assert_eq!(
                result.outcome,
                CaseOutcome::Sound,
                "case {} came out {} ({})",
                case.case_id,
                result.outcome,
                result
                    .detail
                    .map(|r| r.to_string())
                    .unwrap_or_default()
            );
        }
    }
}
