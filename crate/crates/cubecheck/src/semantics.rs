//! Decision procedures for the equality judgments: value membership, exact
//! equality of terms and pretypes, open sequents via closing instantiations,
//! and the canonicity check.

use crate::frontend;
use crate::opsem::{self, EvalError, Trace, TraceVerdict};
use crate::syntax::{
    app, compose_subst, fresh_dim, hcom, lam, loop_, notel, pair, Dim, DimCtx, DimName, DimSubst,
    Term, TermVar,
};
use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// Budgets for the checkers.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    /// Step budget per evaluation.
    pub fuel: usize,
    /// Extra unused names carried by each enumerated substitution's target.
    pub fresh_budget: usize,
    /// Recursion budget through composition value clauses.
    pub depth: usize,
    /// Number of arguments used when probing function values.
    pub probe_count: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            fuel: opsem::DEFAULT_FUEL,
            fresh_budget: 1,
            depth: 3,
            probe_count: 8,
        }
    }
}

/// Outcome of a check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The judgment holds; the flag records that function values were only
    /// compared on finitely many probe arguments.
    Holds { modulo_probes: bool },
    Fails,
    /// A budget ran out before the judgment could be decided.
    Inconclusive,
}

/// Where and how a check came apart, replayable through the evaluator.
#[derive(Clone, Debug)]
pub struct Witness {
    pub subst1: DimSubst,
    pub subst2: DimSubst,
    pub reduced: Vec<Term>,
    pub clause: String,
}

impl Witness {
    pub(crate) fn with_label(mut self, label: &str) -> Self {
        self.clause = format!("{label} / {}", self.clause);
        self
    }
}

/// Work counters accumulated during a check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub substs_tried: usize,
    pub evals_performed: usize,
}

/// Result of a check: verdict, optional witness, and work counters.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            Verdict::Holds {
                modulo_probes: false,
            } => writeln!(f, "verdict: holds")?,
            Verdict::Holds {
                modulo_probes: true,
            } => writeln!(f, "verdict: holds-modulo-probes")?,
            Verdict::Fails => writeln!(f, "verdict: fails")?,
            Verdict::Inconclusive => writeln!(f, "verdict: inconclusive")?,
        }
        if let Some(w) = &self.witness {
            writeln!(f, "clause: {}", w.clause)?;
            writeln!(f, "subst1: {}", w.subst1)?;
            writeln!(f, "subst2: {}", w.subst2)?;
            for v in &w.reduced {
                writeln!(f, "value: {}", frontend::print(v))?;
            }
        }
        write!(
            f,
            "stats: substs={} evals={}",
            self.stats.substs_tried, self.stats.evals_performed
        )
    }
}

/// A type expression evaluated to a value and classified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeValue {
    Bool,
    Circle,
    /// The negation line at a name; a constant argument would have reduced.
    NotLine(DimName),
    Prod(Term, Term),
    Arrow(Term, Term),
}

/// Failure to read a term as a type.
#[derive(Clone, Debug, Error, PartialEq)]
pub enum TypeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("not a type: {}", frontend::print(.0))]
    NotAType(Term),
}

fn classify(value: &Term) -> Option<TypeValue> {
    match value {
        Term::Bool => Some(TypeValue::Bool),
        Term::Circle => Some(TypeValue::Circle),
        Term::Notb(Dim::Name(x)) => Some(TypeValue::NotLine(*x)),
        Term::Prd(a, b) => Some(TypeValue::Prod((**a).clone(), (**b).clone())),
        Term::Arr(a, b) => Some(TypeValue::Arrow((**a).clone(), (**b).clone())),
        _ => None,
    }
}

/// Evaluates a type expression and classifies its value.
pub fn eval_type(a: &Term, fuel: usize) -> Result<TypeValue, TypeError> {
    let v = opsem::eval(a, fuel)?;
    classify(&v).ok_or(TypeError::NotAType(v))
}

/// All total substitutions out of a context, one representative per
/// assignment of names to 0, 1, or blocks of a partition of the kept names,
/// with block leaders keeping their own names. Each target additionally
/// carries `cfg.fresh_budget` unused fresh names so that later rounds and
/// element stocks can mention dimensions the terms do not.
pub fn enumerate_substs(ctx: &DimCtx, cfg: &CheckConfig) -> Vec<DimSubst> {
    let names = ctx.names();
    let n = names.len();
    let mut out = Vec::new();
    let pattern_count = 3usize.pow(n as u32);
    for code in 0..pattern_count {
        let mut digits = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            digits.push(rest % 3);
            rest /= 3;
        }
        let kept: Vec<DimName> = names
            .iter()
            .zip(&digits)
            .filter(|(_, &d)| d == 0)
            .map(|(&x, _)| x)
            .collect();
        for partition in set_partitions(kept.len()) {
            let mut leaders: Vec<DimName> = Vec::new();
            let mut map = std::collections::BTreeMap::new();
            for (i, &x) in kept.iter().enumerate() {
                let block = partition[i];
                if block == leaders.len() {
                    leaders.push(x);
                }
                map.insert(x, Dim::Name(leaders[block]));
            }
            for (&x, &d) in names.iter().zip(&digits) {
                match d {
                    0 => {}
                    1 => {
                        map.insert(x, Dim::Zero);
                    }
                    _ => {
                        map.insert(x, Dim::One);
                    }
                }
            }
            let mut target: Vec<DimName> = leaders.clone();
            let mut avoid: BTreeSet<DimName> = names.iter().copied().collect();
            for _ in 0..cfg.fresh_budget {
                let fresh = fresh_dim(DimName::new("t"), &avoid);
                avoid.insert(fresh);
                target.push(fresh);
            }
            let target = DimCtx::from_names(target).expect("leaders and fresh names are distinct");
            out.push(DimSubst::new(ctx.clone(), target, map).expect("assignments are total"));
        }
    }
    out
}

/// Restricted growth strings of length n: block index per position, blocks
/// numbered in order of first use.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    grow(&mut prefix, n, 0, &mut out);
    out
}

fn grow(prefix: &mut Vec<usize>, n: usize, blocks: usize, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for b in 0..=blocks {
        prefix.push(b);
        grow(prefix, n, blocks.max(b + 1), out);
        prefix.pop();
    }
}

/// A finite stock of canonical members of a type value over a context.
pub fn enumerate_elements(ty: &TypeValue, psi: &DimCtx, depth: usize) -> Vec<Term> {
    match ty {
        TypeValue::Bool => {
            let mut out = vec![Term::True, Term::False];
            if depth >= 1 {
                out.extend(hcom_stock(Term::Bool, &[Term::True, Term::False], psi));
            }
            out
        }
        TypeValue::Circle => {
            let mut out = vec![Term::Base];
            for &x in psi.names() {
                out.push(loop_(Dim::Name(x)));
            }
            if depth >= 1 {
                let mut caps = vec![Term::Base];
                for &x in psi.names() {
                    caps.push(loop_(Dim::Name(x)));
                }
                out.extend(hcom_stock(Term::Circle, &caps, psi));
            }
            out
        }
        TypeValue::NotLine(x) => enumerate_elements(&TypeValue::Bool, psi, depth)
            .into_iter()
            .map(|b| notel(Dim::Name(*x), b))
            .collect(),
        TypeValue::Prod(a, b) => {
            let lefts = component_stock(a, psi, depth);
            let rights = component_stock(b, psi, depth);
            let mut out = Vec::new();
            for l in &lefts {
                for r in &rights {
                    out.push(pair(l.clone(), r.clone()));
                }
            }
            out
        }
        TypeValue::Arrow(a, b) => {
            let mut out = Vec::new();
            let param = TermVar::new("a");
            for c in component_stock(b, psi, depth) {
                out.push(lam(param, c));
            }
            if a.alpha_eq(b) {
                out.push(lam(param, Term::Var(param)));
            }
            out
        }
    }
}

fn component_stock(ty: &Term, psi: &DimCtx, depth: usize) -> Vec<Term> {
    match eval_type(ty, opsem::DEFAULT_FUEL) {
        Ok(tv) => enumerate_elements(&tv, psi, depth),
        Err(_) => Vec::new(),
    }
}

/// Depth-1 composition values, one per direction and per available extent
/// name. Every entry is well adjacent: the constant tube either repeats the
/// cap outright, or is the base point when the cap's faces at the extent
/// already evaluate to it (the cap is the base point or the loop at the
/// extent name itself).
fn hcom_stock(ty: Term, caps: &[Term], psi: &DimCtx) -> Vec<Term> {
    let mut out = Vec::new();
    let mut avoid: BTreeSet<DimName> = psi.names().iter().copied().collect();
    let y = fresh_dim(DimName::new("y"), &avoid);
    avoid.insert(y);
    for &x in psi.names() {
        for (from, to) in [(Dim::Zero, Dim::One), (Dim::One, Dim::Zero)] {
            for cap in caps {
                let collapses_to_base =
                    *cap == Term::Base || *cap == loop_(Dim::Name(x));
                let tube = if ty == Term::Circle && collapses_to_base {
                    Term::Base
                } else {
                    cap.clone()
                };
                out.push(hcom(
                    Dim::Name(x),
                    ty.clone(),
                    from,
                    to,
                    cap.clone(),
                    y,
                    tube.clone(),
                    tube,
                ));
            }
        }
    }
    out
}

enum Out {
    Pass { probes: bool },
    Fail(Witness),
    Stop(Option<Witness>),
}

fn restrict(psi: &DimCtx, terms: &[&Term]) -> DimCtx {
    let mut used = BTreeSet::new();
    for t in terms {
        used.extend(t.free_dims());
    }
    DimCtx::from_names(psi.names().iter().copied().filter(|n| used.contains(n)))
        .expect("restriction of a valid context")
}

/// Everything a comparison verdict depends on. Passing verdicts are cached
/// under this key; the knockout field keeps results from a mutated evaluator
/// separate from stock ones.
#[derive(PartialEq, Eq, Hash)]
struct MemoKey {
    pretype: bool,
    depth: usize,
    names: Vec<DimName>,
    ty: Term,
    lhs: Term,
    rhs: Term,
    fuel: usize,
    fresh_budget: usize,
    probe_count: usize,
    knockout: Option<opsem::KnockoutRule>,
}

impl MemoKey {
    fn new(
        cfg: &CheckConfig,
        pretype: bool,
        depth: usize,
        psi: &DimCtx,
        ty: &Term,
        lhs: &Term,
        rhs: &Term,
    ) -> Self {
        MemoKey {
            pretype,
            depth,
            names: psi.names().to_vec(),
            ty: ty.clone(),
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            fuel: cfg.fuel,
            fresh_budget: cfg.fresh_budget,
            probe_count: cfg.probe_count,
            knockout: opsem::disabled_rule(),
        }
    }
}

const MEMO_CAPACITY: usize = 1 << 20;

thread_local! {
    static MEMO: RefCell<HashMap<MemoKey, bool>> = RefCell::new(HashMap::new());
}

fn memo_lookup(key: &MemoKey) -> Option<bool> {
    MEMO.with(|m| m.borrow().get(key).copied())
}

fn memo_store(key: MemoKey, probes: bool) {
    MEMO.with(|m| {
        let mut map = m.borrow_mut();
        if map.len() >= MEMO_CAPACITY {
            map.clear();
        }
        map.insert(key, probes);
    });
}

macro_rules! check {
    ($probes:ident, $out:expr) => {
        match $out {
            Out::Pass { probes } => $probes |= probes,
            other => return other,
        }
    };
}

macro_rules! check_labeled {
    ($probes:ident, $label:expr, $out:expr) => {
        match $out {
            Out::Pass { probes } => $probes |= probes,
            Out::Fail(w) => return Out::Fail(w.with_label($label)),
            Out::Stop(w) => return Out::Stop(w.map(|w| w.with_label($label))),
        }
    };
}

struct Ck<'a> {
    cfg: &'a CheckConfig,
    stats: Stats,
}

impl<'a> Ck<'a> {
    fn new(cfg: &'a CheckConfig) -> Self {
        Ck {
            cfg,
            stats: Stats::default(),
        }
    }

    fn finish(self, out: Out) -> CheckReport {
        let (verdict, witness) = match out {
            Out::Pass { probes } => (
                Verdict::Holds {
                    modulo_probes: probes,
                },
                None,
            ),
            Out::Fail(w) => (Verdict::Fails, Some(w)),
            Out::Stop(w) => (Verdict::Inconclusive, w),
        };
        CheckReport {
            verdict,
            witness,
            stats: self.stats,
        }
    }

    fn witness(&self, s1: &DimSubst, s2: &DimSubst, reduced: Vec<Term>, clause: String) -> Witness {
        Witness {
            subst1: s1.clone(),
            subst2: s2.clone(),
            reduced,
            clause,
        }
    }

    fn eval(&mut self, t: &Term, s1: &DimSubst, s2: &DimSubst) -> Result<Term, Out> {
        self.stats.evals_performed += 1;
        match opsem::eval(t, self.cfg.fuel) {
            Ok(v) => Ok(v),
            Err(EvalError::Stuck { term, reason }) => Err(Out::Fail(self.witness(
                s1,
                s2,
                vec![term],
                format!("evaluation stuck: {reason}"),
            ))),
            Err(EvalError::FuelExhausted { last, .. }) => Err(Out::Stop(Some(self.witness(
                s1,
                s2,
                vec![last],
                "fuel exhausted".to_string(),
            )))),
        }
    }

    fn apply(&self, t: &Term, s: &DimSubst, other: &DimSubst) -> Result<Term, Out> {
        t.apply_subst(s).map_err(|e| {
            Out::Fail(self.witness(
                s,
                other,
                vec![t.clone()],
                format!("substitution failed: {e}"),
            ))
        })
    }

    fn eval_type_value(
        &mut self,
        t: &Term,
        s1: &DimSubst,
        s2: &DimSubst,
    ) -> Result<TypeValue, Out> {
        let v = self.eval(t, s1, s2)?;
        classify(&v).ok_or_else(|| {
            Out::Fail(self.witness(
                s1,
                s2,
                vec![v.clone()],
                format!("not a type: {}", frontend::print(&v)),
            ))
        })
    }

    /// The coherent-aspect diamond for term equality. The context is first
    /// restricted to the names the terms mention; unused names cannot change
    /// any aspect, and the per-round fresh budget stands in for them.
    fn ceqtm_at(&mut self, depth: usize, psi: &DimCtx, ty: &Term, m: &Term, n: &Term) -> Out {
        let psi = restrict(psi, &[ty, m, n]);
        let key = MemoKey::new(self.cfg, false, depth, &psi, ty, m, n);
        if let Some(probes) = memo_lookup(&key) {
            return Out::Pass { probes };
        }
        let out = self.ceqtm_diamond(depth, &psi, ty, m, n);
        if let Out::Pass { probes } = out {
            memo_store(key, probes);
        }
        out
    }

    fn ceqtm_diamond(&mut self, depth: usize, psi: &DimCtx, ty: &Term, m: &Term, n: &Term) -> Out {
        let mut probes = false;
        for s1 in enumerate_substs(psi, self.cfg) {
            self.stats.substs_tried += 1;
            let id2 = DimSubst::identity(s1.target());
            let m1 = match self.apply(m, &s1, &id2).and_then(|t| self.eval(&t, &s1, &id2)) {
                Ok(v) => v,
                Err(out) => return out,
            };
            let n1 = match self.apply(n, &s1, &id2).and_then(|t| self.eval(&t, &s1, &id2)) {
                Ok(v) => v,
                Err(out) => return out,
            };
            for s2 in enumerate_substs(s1.target(), self.cfg) {
                self.stats.substs_tried += 1;
                let composed = compose_subst(&s1, &s2);
                let step = (|| -> Result<(Term, Term, Term, Term, TypeValue), Out> {
                    let m2 = self.apply(&m1, &s2, &s1).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let m12 =
                        self.apply(m, &composed, &s2).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let n2 = self.apply(&n1, &s2, &s1).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let n12 =
                        self.apply(n, &composed, &s2).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let ty12 = self.apply(ty, &composed, &s2)?;
                    let tv = self.eval_type_value(&ty12, &s1, &s2)?;
                    Ok((m2, m12, n2, n12, tv))
                })();
                let (m2, m12, n2, n12, tv) = match step {
                    Ok(parts) => parts,
                    Err(out) => return out,
                };
                let psi2 = s2.target().clone();
                for (a, b) in [(&m2, &m12), (&n2, &n12), (&m2, &n2), (&m12, &n12)] {
                    check!(probes, self.vinper_at(depth, &psi2, &tv, a, b, &s1, &s2));
                }
            }
        }
        Out::Pass { probes }
    }

    /// Value membership in the PER named by a type value.
    fn vinper_at(
        &mut self,
        depth: usize,
        psi: &DimCtx,
        tv: &TypeValue,
        m0: &Term,
        n0: &Term,
        s1: &DimSubst,
        s2: &DimSubst,
    ) -> Out {
        let mut probes = false;
        match tv {
            TypeValue::Bool => match (m0, n0) {
                (Term::True, Term::True) | (Term::False, Term::False) => Out::Pass { probes },
                (Term::Hcom { .. }, Term::Hcom { .. }) => {
                    self.hcom_clause(depth, psi, &Term::Bool, m0, n0, s1, s2)
                }
                _ => Out::Fail(self.witness(
                    s1,
                    s2,
                    vec![m0.clone(), n0.clone()],
                    "no value clause at bool".to_string(),
                )),
            },
            TypeValue::Circle => match (m0, n0) {
                (Term::Base, Term::Base) => Out::Pass { probes },
                (Term::Loop(Dim::Name(a)), Term::Loop(Dim::Name(b))) if a == b => {
                    Out::Pass { probes }
                }
                (Term::Hcom { .. }, Term::Hcom { .. }) => {
                    self.hcom_clause(depth, psi, &Term::Circle, m0, n0, s1, s2)
                }
                _ => Out::Fail(self.witness(
                    s1,
                    s2,
                    vec![m0.clone(), n0.clone()],
                    "no value clause at the circle".to_string(),
                )),
            },
            TypeValue::NotLine(x) => match (m0, n0) {
                (Term::Notel(Dim::Name(a), b1), Term::Notel(Dim::Name(c), b2))
                    if a == x && c == x =>
                {
                    check_labeled!(
                        probes,
                        "negation line body",
                        self.ceqtm_at(depth, psi, &Term::Bool, b1, b2)
                    );
                    Out::Pass { probes }
                }
                _ => Out::Fail(self.witness(
                    s1,
                    s2,
                    vec![m0.clone(), n0.clone()],
                    "no value clause at the negation line".to_string(),
                )),
            },
            TypeValue::Prod(a, b) => match (m0, n0) {
                (Term::Pair(l1, r1), Term::Pair(l2, r2)) => {
                    check_labeled!(
                        probes,
                        "first component",
                        self.ceqtm_at(depth, psi, a, l1, l2)
                    );
                    check_labeled!(
                        probes,
                        "second component",
                        self.ceqtm_at(depth, psi, b, r1, r2)
                    );
                    Out::Pass { probes }
                }
                _ => Out::Fail(self.witness(
                    s1,
                    s2,
                    vec![m0.clone(), n0.clone()],
                    "no value clause at the product".to_string(),
                )),
            },
            TypeValue::Arrow(a, b) => match (m0, n0) {
                (Term::Lam(..), Term::Lam(..)) => {
                    let dom = match self.eval_type_value(a, s1, s2) {
                        Ok(tv) => tv,
                        Err(out) => return out,
                    };
                    probes = true;
                    let stock = enumerate_elements(&dom, psi, 1);
                    for q in stock.into_iter().take(self.cfg.probe_count) {
                        let lhs = app(m0.clone(), q.clone());
                        let rhs = app(n0.clone(), q);
                        check_labeled!(
                            probes,
                            "function probe",
                            self.ceqtm_at(depth, psi, b, &lhs, &rhs)
                        );
                    }
                    Out::Pass { probes }
                }
                _ => Out::Fail(self.witness(
                    s1,
                    s2,
                    vec![m0.clone(), n0.clone()],
                    "no value clause at the function type".to_string(),
                )),
            },
        }
    }

    /// The three side conditions relating two composition values at a base
    /// type: equal caps, equal tube ends, and adjacency of each tube with
    /// its own cap.
    #[allow(clippy::too_many_arguments)]
    fn hcom_clause(
        &mut self,
        depth: usize,
        psi: &DimCtx,
        ty: &Term,
        m0: &Term,
        n0: &Term,
        s1: &DimSubst,
        s2: &DimSubst,
    ) -> Out {
        let mut probes = false;
        let (Term::Hcom {
            extent: Dim::Name(x1),
            ty: ty1,
            from: f1,
            to: t1,
            cap: c1,
            tube_dim: d1,
            tube0: a1,
            tube1: b1,
        }, Term::Hcom {
            extent: Dim::Name(x2),
            ty: ty2,
            from: f2,
            to: t2,
            cap: c2,
            tube_dim: d2,
            tube0: a2,
            tube1: b2,
        }) = (m0, n0)
        else {
            return Out::Fail(self.witness(
                s1,
                s2,
                vec![m0.clone(), n0.clone()],
                "composition with a constant extent is not a value".to_string(),
            ));
        };
        if **ty1 != *ty || **ty2 != *ty {
            return Out::Fail(self.witness(
                s1,
                s2,
                vec![m0.clone(), n0.clone()],
                "composition annotated at a different type".to_string(),
            ));
        }
        if x1 != x2 || f1 != f2 || t1 != t2 {
            return Out::Fail(self.witness(
                s1,
                s2,
                vec![m0.clone(), n0.clone()],
                "composition extents or endpoints differ".to_string(),
            ));
        }
        if !psi.contains(*x1) {
            return Out::Fail(self.witness(
                s1,
                s2,
                vec![m0.clone()],
                format!("composition extent {x1} is out of scope"),
            ));
        }
        if depth == 0 {
            return Out::Stop(Some(self.witness(
                s1,
                s2,
                vec![m0.clone(), n0.clone()],
                "depth exhausted inside a composition clause".to_string(),
            )));
        }
        let depth = depth - 1;

        check_labeled!(
            probes,
            "composition cap",
            self.ceqtm_at(depth, psi, ty, c1, c2)
        );

        let psi_minus = psi.removed(*x1);
        let mut avoid: BTreeSet<DimName> = psi.names().iter().copied().collect();
        avoid.extend(a1.free_dims());
        avoid.extend(b1.free_dims());
        avoid.extend(a2.free_dims());
        avoid.extend(b2.free_dims());
        avoid.insert(*d1);
        avoid.insert(*d2);
        let y = fresh_dim(*d1, &avoid);
        let tube_ctx = psi_minus.extended(y);

        for (eps, l1, l2) in [(Dim::Zero, a1, a2), (Dim::One, b1, b2)] {
            let lhs = l1.subst_dim(*d1, Dim::Name(y)).subst_dim(*x1, eps);
            let rhs = l2.subst_dim(*d2, Dim::Name(y)).subst_dim(*x1, eps);
            check_labeled!(
                probes,
                "composition tube end",
                self.ceqtm_at(depth, &tube_ctx, ty, &lhs, &rhs)
            );
        }

        for (cap, tube0, tube1, d) in [(c1, a1, b1, d1), (c2, a2, b2, d2)] {
            for (eps, tube) in [(Dim::Zero, tube0), (Dim::One, tube1)] {
                let lhs = tube.subst_dim(*d, *f1).subst_dim(*x1, eps);
                let rhs = cap.subst_dim(*x1, eps);
                check_labeled!(
                    probes,
                    "composition adjacency",
                    self.ceqtm_at(depth, &psi_minus, ty, &lhs, &rhs)
                );
            }
        }
        Out::Pass { probes }
    }

    /// The coherent-aspect diamond for pretype equality, with the same
    /// context restriction as the term diamond.
    fn ceqpretype_at(&mut self, depth: usize, psi: &DimCtx, a: &Term, b: &Term) -> Out {
        let psi = restrict(psi, &[a, b]);
        let key = MemoKey::new(self.cfg, true, depth, &psi, a, a, b);
        if let Some(probes) = memo_lookup(&key) {
            return Out::Pass { probes };
        }
        let out = self.ceqpretype_diamond(depth, &psi, a, b);
        if let Out::Pass { probes } = out {
            memo_store(key, probes);
        }
        out
    }

    fn ceqpretype_diamond(&mut self, depth: usize, psi: &DimCtx, a: &Term, b: &Term) -> Out {
        let mut probes = false;
        for s1 in enumerate_substs(psi, self.cfg) {
            self.stats.substs_tried += 1;
            let id2 = DimSubst::identity(s1.target());
            let a1 = match self.apply(a, &s1, &id2).and_then(|t| self.eval(&t, &s1, &id2)) {
                Ok(v) => v,
                Err(out) => return out,
            };
            let b1 = match self.apply(b, &s1, &id2).and_then(|t| self.eval(&t, &s1, &id2)) {
                Ok(v) => v,
                Err(out) => return out,
            };
            for s2 in enumerate_substs(s1.target(), self.cfg) {
                self.stats.substs_tried += 1;
                let composed = compose_subst(&s1, &s2);
                let step = (|| -> Result<(Term, Term, Term, Term), Out> {
                    let a2 = self.apply(&a1, &s2, &s1).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let a12 =
                        self.apply(a, &composed, &s2).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let b2 = self.apply(&b1, &s2, &s1).and_then(|t| self.eval(&t, &s1, &s2))?;
                    let b12 =
                        self.apply(b, &composed, &s2).and_then(|t| self.eval(&t, &s1, &s2))?;
                    Ok((a2, a12, b2, b12))
                })();
                let (a2, a12, b2, b12) = match step {
                    Ok(parts) => parts,
                    Err(out) => return out,
                };
                let psi2 = s2.target().clone();
                for (t, u) in [(&a2, &a12), (&b2, &b12), (&a2, &b2), (&a12, &b12)] {
                    check!(probes, self.same_per(depth, &psi2, t, u, &s1, &s2));
                }
            }
        }
        Out::Pass { probes }
    }

    /// Structural equality of the PERs named by two type values.
    fn same_per(
        &mut self,
        depth: usize,
        psi: &DimCtx,
        t_raw: &Term,
        u_raw: &Term,
        s1: &DimSubst,
        s2: &DimSubst,
    ) -> Out {
        let mut probes = false;
        let no_clause = |ck: &Ck, msg: &str| {
            Out::Fail(ck.witness(
                s1,
                s2,
                vec![t_raw.clone(), u_raw.clone()],
                msg.to_string(),
            ))
        };
        let (Some(t), Some(u)) = (classify(t_raw), classify(u_raw)) else {
            return no_clause(self, "not a type");
        };
        match (&t, &u) {
            (TypeValue::Bool, TypeValue::Bool) | (TypeValue::Circle, TypeValue::Circle) => {
                Out::Pass { probes }
            }
            (TypeValue::NotLine(x), TypeValue::NotLine(y)) => {
                if x == y {
                    Out::Pass { probes }
                } else {
                    no_clause(self, "negation lines over different names")
                }
            }
            (TypeValue::Prod(a1, b1), TypeValue::Prod(a2, b2))
            | (TypeValue::Arrow(a1, b1), TypeValue::Arrow(a2, b2)) => {
                check_labeled!(
                    probes,
                    "left component",
                    self.ceqpretype_at(depth, psi, a1, a2)
                );
                check_labeled!(
                    probes,
                    "right component",
                    self.ceqpretype_at(depth, psi, b1, b2)
                );
                Out::Pass { probes }
            }
            _ => no_clause(self, "distinct type heads"),
        }
    }

    /// Closes an open sequent over one hypothesis at a time and checks the
    /// closed instances.
    #[allow(clippy::too_many_arguments)]
    fn eq_open_at(
        &mut self,
        depth: usize,
        psi: &DimCtx,
        gamma: &[(TermVar, Term)],
        subst: &DimSubst,
        m: &Term,
        n: &Term,
        ty: &Term,
    ) -> Out {
        let mut probes = false;
        let id = DimSubst::identity(psi);
        let Some(((var, hyp_ty), rest)) = gamma.split_first() else {
            return self.ceqtm_at(depth, psi, ty, m, n);
        };
        let hyp = match self.apply(hyp_ty, subst, &id) {
            Ok(t) => t,
            Err(out) => return out,
        };
        let tv = match self.eval_type_value(&hyp, subst, &id) {
            Ok(tv) => tv,
            Err(out) => return out,
        };
        let stock = enumerate_elements(&tv, psi, 1);
        if stock.is_empty() {
            return Out::Stop(Some(self.witness(
                subst,
                &id,
                vec![hyp],
                "no closing instantiations available".to_string(),
            )));
        }
        for (i, q) in stock.iter().enumerate() {
            for p in &stock[i..] {
                if q != p {
                    let equal = self.ceqtm_at(depth, psi, &hyp, q, p);
                    match equal {
                        Out::Pass { .. } => {}
                        _ => continue,
                    }
                }
                let rest_gamma: Vec<(TermVar, Term)> = rest
                    .iter()
                    .map(|(v, t)| (*v, t.subst_term(*var, q)))
                    .collect();
                let label = format!("instantiation {} := {}", var, frontend::print(q));
                check_labeled!(
                    probes,
                    &label,
                    self.eq_open_at(
                        depth,
                        psi,
                        &rest_gamma,
                        subst,
                        &m.subst_term(*var, q),
                        &n.subst_term(*var, p),
                        &ty.subst_term(*var, q),
                    )
                );
            }
        }
        Out::Pass { probes }
    }
}

/// Exact equality of two terms at a type over a context.
pub fn ceqtm(ty: &Term, m: &Term, n: &Term, psi: &DimCtx, cfg: &CheckConfig) -> CheckReport {
    let mut ck = Ck::new(cfg);
    let out = ck.ceqtm_at(cfg.depth, psi, ty, m, n);
    ck.finish(out)
}

/// Exact equality of two pretypes over a context.
pub fn ceqpretype(a: &Term, b: &Term, psi: &DimCtx, cfg: &CheckConfig) -> CheckReport {
    let mut ck = Ck::new(cfg);
    let out = ck.ceqpretype_at(cfg.depth, psi, a, b);
    ck.finish(out)
}

/// The unary aspect-coherence check: a term against itself.
pub fn coherence_diamond(m: &Term, ty: &Term, psi: &DimCtx, cfg: &CheckConfig) -> CheckReport {
    ceqtm(ty, m, m, psi, cfg)
}

/// Value membership in the PER named by a type value.
pub fn vinper(
    tv: &TypeValue,
    m0: &Term,
    n0: &Term,
    psi: &DimCtx,
    cfg: &CheckConfig,
) -> CheckReport {
    let mut ck = Ck::new(cfg);
    let id = DimSubst::identity(psi);
    let out = if !opsem::is_val(m0) || !opsem::is_val(n0) {
        Out::Fail(ck.witness(
            &id,
            &id,
            vec![m0.clone(), n0.clone()],
            "membership is defined on values only".to_string(),
        ))
    } else {
        ck.vinper_at(cfg.depth, psi, tv, m0, n0, &id, &id)
    };
    ck.finish(out)
}

/// Equality of open terms under all closing instantiations of the context.
pub fn eq_open(
    gamma: &[(TermVar, Term)],
    m: &Term,
    n: &Term,
    ty: &Term,
    psi: &DimCtx,
    cfg: &CheckConfig,
) -> CheckReport {
    let mut ck = Ck::new(cfg);
    let mut probes = false;
    let mut result = Out::Pass { probes };
    'outer: for s in enumerate_substs(psi, cfg) {
        ck.stats.substs_tried += 1;
        let target = s.target().clone();
        let id = DimSubst::identity(&target);
        let parts = (|| -> Result<(Term, Term, Term), Out> {
            Ok((
                ck.apply(m, &s, &id)?,
                ck.apply(n, &s, &id)?,
                ck.apply(ty, &s, &id)?,
            ))
        })();
        let (m_s, n_s, ty_s) = match parts {
            Ok(p) => p,
            Err(out) => {
                result = out;
                break 'outer;
            }
        };
        match ck.eq_open_at(cfg.depth, &target, gamma, &s, &m_s, &n_s, &ty_s) {
            Out::Pass { probes: p } => probes |= p,
            other => {
                result = other;
                break 'outer;
            }
        }
    }
    if let Out::Pass { .. } = result {
        result = Out::Pass { probes };
    }
    ck.finish(result)
}

/// Outcome of running a closed dimensionless term to a boolean.
#[derive(Clone, Debug, PartialEq)]
pub enum CanonicityOutcome {
    True,
    False,
    /// The term reached a value outside bool.
    NonBoolean(Term),
    /// Evaluation got stuck or ran out of fuel; the trace is the evidence.
    Suspect(Trace),
}

impl fmt::Display for CanonicityOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicityOutcome::True => write!(f, "true"),
            CanonicityOutcome::False => write!(f, "false"),
            CanonicityOutcome::NonBoolean(v) => {
                write!(f, "violation: non-boolean value {}", frontend::print(v))
            }
            CanonicityOutcome::Suspect(trace) => write!(
                f,
                "violation suspect: {} after {} steps",
                trace.verdict,
                trace.steps.len().saturating_sub(1)
            ),
        }
    }
}

/// Runs a closed dimensionless term and reports which boolean it reaches.
pub fn canonicity_check(m: &Term, fuel: usize) -> CanonicityOutcome {
    let trace = opsem::trace(m, fuel);
    match trace.verdict {
        TraceVerdict::Value => match trace.steps.last() {
            Some(Term::True) => CanonicityOutcome::True,
            Some(Term::False) => CanonicityOutcome::False,
            Some(v) => CanonicityOutcome::NonBoolean(v.clone()),
            None => CanonicityOutcome::Suspect(trace),
        },
        _ => CanonicityOutcome::Suspect(trace),
    }
}
