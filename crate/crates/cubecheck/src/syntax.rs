//! Terms, dimensions, contexts, and substitution.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

struct Interner {
    texts: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn interner() -> &'static Mutex<Interner> {
    static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        Mutex::new(Interner {
            texts: Vec::new(),
            ids: HashMap::new(),
        })
    })
}

fn intern(text: &str) -> u32 {
    let mut table = interner().lock().unwrap();
    if let Some(&id) = table.ids.get(text) {
        return id;
    }
    let leaked: &'static str = Box::leak(text.to_owned().into_boxed_str());
    let id = table.texts.len() as u32;
    table.texts.push(leaked);
    table.ids.insert(leaked, id);
    id
}

fn resolve(id: u32) -> &'static str {
    interner().lock().unwrap().texts[id as usize]
}

/// An interned dimension name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimName(u32);

impl DimName {
    pub fn new(text: &str) -> Self {
        DimName(intern(text))
    }

    pub fn text(self) -> &'static str {
        resolve(self.0)
    }
}

impl PartialOrd for DimName {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DimName {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Order by text so that interning order never leaks into output.
        self.text().cmp(other.text())
    }
}

impl fmt::Debug for DimName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

impl fmt::Display for DimName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

/// An interned term variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermVar(u32);

impl TermVar {
    pub fn new(text: &str) -> Self {
        TermVar(intern(text))
    }

    pub fn text(self) -> &'static str {
        resolve(self.0)
    }
}

impl PartialOrd for TermVar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TermVar {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.text().cmp(other.text())
    }
}

impl fmt::Debug for TermVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

impl fmt::Display for TermVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.text())
    }
}

/// A dimension: one of the constants 0 and 1, or a dimension name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Dim {
    Zero,
    One,
    Name(DimName),
}

impl Dim {
    pub fn name(text: &str) -> Self {
        Dim::Name(DimName::new(text))
    }

    pub fn is_constant(self) -> bool {
        !matches!(self, Dim::Name(_))
    }

    /// The opposite endpoint; only meaningful for constants.
    pub fn flipped(self) -> Option<Dim> {
        match self {
            Dim::Zero => Some(Dim::One),
            Dim::One => Some(Dim::Zero),
            Dim::Name(_) => None,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Zero => write!(f, "0"),
            Dim::One => write!(f, "1"),
            Dim::Name(x) => write!(f, "{x}"),
        }
    }
}

/// An ordered context of distinct dimension names.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DimCtx(Vec<DimName>);

impl DimCtx {
    pub fn new() -> Self {
        DimCtx(Vec::new())
    }

    /// Builds a context from names, rejecting duplicates.
    pub fn from_names(names: impl IntoIterator<Item = DimName>) -> Result<Self, SubstError> {
        let mut ctx = DimCtx::new();
        for n in names {
            if ctx.contains(n) {
                return Err(SubstError::DuplicateName(n));
            }
            ctx.0.push(n);
        }
        Ok(ctx)
    }

    pub fn contains(&self, name: DimName) -> bool {
        self.0.contains(&name)
    }

    /// Extends with a name not already present.
    pub fn extended(&self, name: DimName) -> Self {
        assert!(!self.contains(name), "context already binds {name}");
        let mut names = self.0.clone();
        names.push(name);
        DimCtx(names)
    }

    pub fn names(&self) -> &[DimName] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Validates that a dimension is a constant or a name bound here.
    pub fn admits(&self, d: Dim) -> bool {
        match d {
            Dim::Zero | Dim::One => true,
            Dim::Name(x) => self.contains(x),
        }
    }

    /// Drops a name, keeping the order of the rest.
    pub fn removed(&self, name: DimName) -> Self {
        DimCtx(self.0.iter().copied().filter(|&n| n != name).collect())
    }
}

impl fmt::Display for DimCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for n in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
            first = false;
        }
        Ok(())
    }
}

/// Errors from substitution construction and application.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubstError {
    #[error("dimension name {0} appears twice in a context")]
    DuplicateName(DimName),
    #[error("source name {0} has no assignment")]
    MissingAssignment(DimName),
    #[error("assignment for {0} mentions {1}, which the target does not bind")]
    EscapesTarget(DimName, DimName),
    #[error("free dimension name {0} is not mapped by the substitution")]
    UnmappedName(DimName),
}

/// A total substitution from one dimension context into another.
///
/// Every source name is assigned a dimension that is valid in the target
/// context. Applying one to a term yields an aspect of that term: a face,
/// a degeneracy, or a renaming.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DimSubst {
    source: DimCtx,
    target: DimCtx,
    map: BTreeMap<DimName, Dim>,
}

impl DimSubst {
    /// Builds a substitution, checking totality and target validity.
    pub fn new(
        source: DimCtx,
        target: DimCtx,
        map: BTreeMap<DimName, Dim>,
    ) -> Result<Self, SubstError> {
        for &n in source.names() {
            match map.get(&n) {
                None => return Err(SubstError::MissingAssignment(n)),
                Some(&Dim::Name(t)) if !target.contains(t) => {
                    return Err(SubstError::EscapesTarget(n, t));
                }
                Some(_) => {}
            }
        }
        Ok(DimSubst {
            source,
            target,
            map,
        })
    }

    /// The identity substitution on a context.
    pub fn identity(ctx: &DimCtx) -> Self {
        let map = ctx
            .names()
            .iter()
            .map(|&n| (n, Dim::Name(n)))
            .collect();
        DimSubst {
            source: ctx.clone(),
            target: ctx.clone(),
            map,
        }
    }

    pub fn source(&self) -> &DimCtx {
        &self.source
    }

    pub fn target(&self) -> &DimCtx {
        &self.target
    }

    /// Looks up the assignment for a source name.
    pub fn lookup(&self, name: DimName) -> Result<Dim, SubstError> {
        self.map
            .get(&name)
            .copied()
            .ok_or(SubstError::UnmappedName(name))
    }

    /// Pushes a dimension through the substitution.
    pub fn apply_dim(&self, d: Dim) -> Result<Dim, SubstError> {
        match d {
            Dim::Zero | Dim::One => Ok(d),
            Dim::Name(x) => self.lookup(x),
        }
    }

    pub fn assignments(&self) -> impl Iterator<Item = (DimName, Dim)> + '_ {
        self.map.iter().map(|(&n, &d)| (n, d))
    }
}

impl fmt::Display for DimSubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.map.is_empty() {
            return write!(f, "id");
        }
        let mut first = true;
        for (n, d) in &self.map {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{n}={d}")?;
            first = false;
        }
        Ok(())
    }
}

/// Composes two substitutions so that applying the result equals applying
/// `first` and then `second`.
pub fn compose_subst(first: &DimSubst, second: &DimSubst) -> DimSubst {
    assert!(
        first.target == second.source,
        "composition requires matching contexts"
    );
    let map = first
        .map
        .iter()
        .map(|(&n, &d)| (n, second.apply_dim(d).expect("first lands in second's source")))
        .collect();
    DimSubst {
        source: first.source.clone(),
        target: second.target.clone(),
        map,
    }
}

/// A term of the language. Types are terms too.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(TermVar),
    /// Function type.
    Arr(Box<Term>, Box<Term>),
    /// Product type.
    Prd(Box<Term>, Box<Term>),
    Bool,
    /// The line type that connects bool to itself along a negation.
    Notb(Dim),
    /// The circle.
    Circle,
    Lam(TermVar, Box<Term>),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    True,
    False,
    If {
        motive: Box<Term>,
        scrut: Box<Term>,
        tt: Box<Term>,
        ff: Box<Term>,
    },
    /// Element of a negation line.
    Notel(Dim, Box<Term>),
    Base,
    Loop(Dim),
    S1Elim {
        motive: Box<Term>,
        scrut: Box<Term>,
        base_case: Box<Term>,
        loop_dim: DimName,
        loop_case: Box<Term>,
    },
    /// Coercion along a type line bound by `dim`.
    Coe {
        dim: DimName,
        line: Box<Term>,
        from: Dim,
        to: Dim,
        arg: Box<Term>,
    },
    /// Homogeneous composition: a cap at `from` with two tube faces bound
    /// by `tube_dim`, composed to `to` in direction `extent`.
    Hcom {
        extent: Dim,
        ty: Box<Term>,
        from: Dim,
        to: Dim,
        cap: Box<Term>,
        tube_dim: DimName,
        tube0: Box<Term>,
        tube1: Box<Term>,
    },
}

pub fn var(text: &str) -> Term {
    Term::Var(TermVar::new(text))
}

pub fn arr(dom: Term, cod: Term) -> Term {
    Term::Arr(Box::new(dom), Box::new(cod))
}

pub fn prd(fst: Term, snd: Term) -> Term {
    Term::Prd(Box::new(fst), Box::new(snd))
}

pub fn notb(r: Dim) -> Term {
    Term::Notb(r)
}

pub fn lam(param: TermVar, body: Term) -> Term {
    Term::Lam(param, Box::new(body))
}

pub fn app(func: Term, arg: Term) -> Term {
    Term::App(Box::new(func), Box::new(arg))
}

pub fn pair(left: Term, right: Term) -> Term {
    Term::Pair(Box::new(left), Box::new(right))
}

pub fn fst(p: Term) -> Term {
    Term::Fst(Box::new(p))
}

pub fn snd(p: Term) -> Term {
    Term::Snd(Box::new(p))
}

pub fn ifb(motive: Term, scrut: Term, tt: Term, ff: Term) -> Term {
    Term::If {
        motive: Box::new(motive),
        scrut: Box::new(scrut),
        tt: Box::new(tt),
        ff: Box::new(ff),
    }
}

pub fn notel(r: Dim, body: Term) -> Term {
    Term::Notel(r, Box::new(body))
}

pub fn loop_(r: Dim) -> Term {
    Term::Loop(r)
}

pub fn s1elim(
    motive: Term,
    scrut: Term,
    base_case: Term,
    loop_dim: DimName,
    loop_case: Term,
) -> Term {
    Term::S1Elim {
        motive: Box::new(motive),
        scrut: Box::new(scrut),
        base_case: Box::new(base_case),
        loop_dim,
        loop_case: Box::new(loop_case),
    }
}

pub fn coe(dim: DimName, line: Term, from: Dim, to: Dim, arg: Term) -> Term {
    Term::Coe {
        dim,
        line: Box::new(line),
        from,
        to,
        arg: Box::new(arg),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn hcom(
    extent: Dim,
    ty: Term,
    from: Dim,
    to: Dim,
    cap: Term,
    tube_dim: DimName,
    tube0: Term,
    tube1: Term,
) -> Term {
    Term::Hcom {
        extent,
        ty: Box::new(ty),
        from,
        to,
        cap: Box::new(cap),
        tube_dim,
        tube0: Box::new(tube0),
        tube1: Box::new(tube1),
    }
}

/// Replaces a use of boolean negation by its definition as a conditional.
pub fn expand_not(m: Term) -> Term {
    ifb(Term::Bool, m, Term::False, Term::True)
}

/// Picks a name based on `base` that avoids everything in `avoid`.
pub fn fresh_dim(base: DimName, avoid: &BTreeSet<DimName>) -> DimName {
    if !avoid.contains(&base) {
        return base;
    }
    let mut text = base.text().to_owned();
    loop {
        text.push('\'');
        let candidate = DimName::new(&text);
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
}

/// Picks a variable based on `base` that avoids everything in `avoid`.
pub fn fresh_var(base: TermVar, avoid: &BTreeSet<TermVar>) -> TermVar {
    if !avoid.contains(&base) {
        return base;
    }
    let mut text = base.text().to_owned();
    loop {
        text.push('\'');
        let candidate = TermVar::new(&text);
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
}

fn insert_dim(set: &mut BTreeSet<DimName>, d: Dim) {
    if let Dim::Name(x) = d {
        set.insert(x);
    }
}

impl Term {
    /// The set of dimension names occurring free.
    pub fn free_dims(&self) -> BTreeSet<DimName> {
        let mut out = BTreeSet::new();
        self.collect_free_dims(&mut out);
        out
    }

    fn collect_free_dims(&self, out: &mut BTreeSet<DimName>) {
        match self {
            Term::Var(_) | Term::Bool | Term::Circle | Term::True | Term::False | Term::Base => {}
            Term::Notb(r) | Term::Loop(r) => insert_dim(out, *r),
            Term::Arr(a, b) | Term::Prd(a, b) | Term::App(a, b) | Term::Pair(a, b) => {
                a.collect_free_dims(out);
                b.collect_free_dims(out);
            }
            Term::Lam(_, body) => body.collect_free_dims(out),
            Term::Fst(p) | Term::Snd(p) => p.collect_free_dims(out),
            Term::If {
                motive,
                scrut,
                tt,
                ff,
            } => {
                motive.collect_free_dims(out);
                scrut.collect_free_dims(out);
                tt.collect_free_dims(out);
                ff.collect_free_dims(out);
            }
            Term::Notel(r, body) => {
                insert_dim(out, *r);
                body.collect_free_dims(out);
            }
            Term::S1Elim {
                motive,
                scrut,
                base_case,
                loop_dim,
                loop_case,
            } => {
                motive.collect_free_dims(out);
                scrut.collect_free_dims(out);
                base_case.collect_free_dims(out);
                let mut inner = loop_case.free_dims();
                inner.remove(loop_dim);
                out.extend(inner);
            }
            Term::Coe {
                dim,
                line,
                from,
                to,
                arg,
            } => {
                let mut inner = line.free_dims();
                inner.remove(dim);
                out.extend(inner);
                insert_dim(out, *from);
                insert_dim(out, *to);
                arg.collect_free_dims(out);
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
                insert_dim(out, *extent);
                ty.collect_free_dims(out);
                insert_dim(out, *from);
                insert_dim(out, *to);
                cap.collect_free_dims(out);
                let mut inner = tube0.free_dims();
                inner.extend(tube1.free_dims());
                inner.remove(tube_dim);
                out.extend(inner);
            }
        }
    }

    /// The set of term variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<TermVar> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<TermVar>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Bool | Term::Circle | Term::True | Term::False | Term::Base => {}
            Term::Notb(_) | Term::Loop(_) => {}
            Term::Arr(a, b) | Term::Prd(a, b) | Term::App(a, b) | Term::Pair(a, b) => {
                a.collect_free_vars(out);
                b.collect_free_vars(out);
            }
            Term::Lam(param, body) => {
                let mut inner = body.free_vars();
                inner.remove(param);
                out.extend(inner);
            }
            Term::Fst(p) | Term::Snd(p) => p.collect_free_vars(out),
            Term::If {
                motive,
                scrut,
                tt,
                ff,
            } => {
                motive.collect_free_vars(out);
                scrut.collect_free_vars(out);
                tt.collect_free_vars(out);
                ff.collect_free_vars(out);
            }
            Term::Notel(_, body) => body.collect_free_vars(out),
            Term::S1Elim {
                motive,
                scrut,
                base_case,
                loop_case,
                ..
            } => {
                motive.collect_free_vars(out);
                scrut.collect_free_vars(out);
                base_case.collect_free_vars(out);
                loop_case.collect_free_vars(out);
            }
            Term::Coe { line, arg, .. } => {
                line.collect_free_vars(out);
                arg.collect_free_vars(out);
            }
            Term::Hcom {
                ty,
                cap,
                tube0,
                tube1,
                ..
            } => {
                ty.collect_free_vars(out);
                cap.collect_free_vars(out);
                tube0.collect_free_vars(out);
                tube1.collect_free_vars(out);
            }
        }
    }

    /// Substitutes the dimension `r` for the free name `x`, avoiding capture.
    pub fn subst_dim(&self, x: DimName, r: Dim) -> Term {
        let apply = |d: Dim| if d == Dim::Name(x) { r } else { d };
        match self {
            Term::Var(_) | Term::Bool | Term::Circle | Term::True | Term::False | Term::Base => {
                self.clone()
            }
            Term::Notb(d) => Term::Notb(apply(*d)),
            Term::Loop(d) => Term::Loop(apply(*d)),
            Term::Arr(a, b) => arr(a.subst_dim(x, r), b.subst_dim(x, r)),
            Term::Prd(a, b) => prd(a.subst_dim(x, r), b.subst_dim(x, r)),
            Term::App(f, a) => app(f.subst_dim(x, r), a.subst_dim(x, r)),
            Term::Pair(a, b) => pair(a.subst_dim(x, r), b.subst_dim(x, r)),
            Term::Lam(param, body) => lam(*param, body.subst_dim(x, r)),
            Term::Fst(p) => fst(p.subst_dim(x, r)),
            Term::Snd(p) => snd(p.subst_dim(x, r)),
            Term::If {
                motive,
                scrut,
                tt,
                ff,
            } => ifb(
                motive.subst_dim(x, r),
                scrut.subst_dim(x, r),
                tt.subst_dim(x, r),
                ff.subst_dim(x, r),
            ),
            Term::Notel(d, body) => notel(apply(*d), body.subst_dim(x, r)),
            Term::S1Elim {
                motive,
                scrut,
                base_case,
                loop_dim,
                loop_case,
            } => {
                let (loop_dim, loop_case) = subst_dim_under(*loop_dim, &[loop_case], x, r)
                    .map_bodies(|mut bodies| bodies.pop().unwrap());
                s1elim(
                    motive.subst_dim(x, r),
                    scrut.subst_dim(x, r),
                    base_case.subst_dim(x, r),
                    loop_dim,
                    loop_case,
                )
            }
            Term::Coe {
                dim,
                line,
                from,
                to,
                arg,
            } => {
                let (dim, line) =
                    subst_dim_under(*dim, &[line], x, r).map_bodies(|mut bodies| bodies.pop().unwrap());
                coe(dim, line, apply(*from), apply(*to), arg.subst_dim(x, r))
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
                let (tube_dim, mut tubes) =
                    subst_dim_under(*tube_dim, &[tube0, tube1], x, r).into_parts();
                let tube1_out = tubes.pop().unwrap();
                let tube0_out = tubes.pop().unwrap();
                hcom(
                    apply(*extent),
                    ty.subst_dim(x, r),
                    apply(*from),
                    apply(*to),
                    cap.subst_dim(x, r),
                    tube_dim,
                    tube0_out,
                    tube1_out,
                )
            }
        }
    }

    /// Applies a total substitution; errors on a free name it does not map.
    pub fn apply_subst(&self, subst: &DimSubst) -> Result<Term, SubstError> {
        let mut map = BTreeMap::new();
        for (n, d) in subst.assignments() {
            map.insert(n, d);
        }
        let mut in_scope: BTreeSet<DimName> = subst.target().names().iter().copied().collect();
        apply_subst_rec(self, &map, &mut in_scope)
    }

    /// Substitutes the term `n` for the free variable `a`, avoiding capture.
    pub fn subst_term(&self, a: TermVar, n: &Term) -> Term {
        let n_vars = n.free_vars();
        let n_dims = n.free_dims();
        subst_term_rec(self, a, n, &n_vars, &n_dims)
    }

    /// Structural equality up to renaming of bound names and variables.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        let mut scope = AlphaScope::default();
        alpha_rec(self, other, &mut scope)
    }
}

struct BinderOut {
    binder: DimName,
    bodies: Vec<Term>,
}

impl BinderOut {
    fn map_bodies<F: FnOnce(Vec<Term>) -> Term>(self, f: F) -> (DimName, Term) {
        (self.binder, f(self.bodies))
    }

    fn into_parts(self) -> (DimName, Vec<Term>) {
        (self.binder, self.bodies)
    }
}

/// Substitutes under a dimension binder shared by several bodies, renaming
/// the binder when the substituted dimension would be captured.
fn subst_dim_under(binder: DimName, bodies: &[&Term], x: DimName, r: Dim) -> BinderOut {
    if binder == x {
        return BinderOut {
            binder,
            bodies: bodies.iter().map(|b| (*b).clone()).collect(),
        };
    }
    if r == Dim::Name(binder) {
        let mut avoid = BTreeSet::new();
        for b in bodies {
            avoid.extend(b.free_dims());
        }
        avoid.insert(binder);
        avoid.insert(x);
        let renamed = fresh_dim(binder, &avoid);
        let bodies = bodies
            .iter()
            .map(|b| b.subst_dim(binder, Dim::Name(renamed)).subst_dim(x, r))
            .collect();
        BinderOut {
            binder: renamed,
            bodies,
        }
    } else {
        BinderOut {
            binder,
            bodies: bodies.iter().map(|b| b.subst_dim(x, r)).collect(),
        }
    }
}

fn apply_dim_map(d: Dim, map: &BTreeMap<DimName, Dim>) -> Result<Dim, SubstError> {
    match d {
        Dim::Zero | Dim::One => Ok(d),
        Dim::Name(x) => map.get(&x).copied().ok_or(SubstError::UnmappedName(x)),
    }
}

fn apply_subst_rec(
    term: &Term,
    map: &BTreeMap<DimName, Dim>,
    in_scope: &mut BTreeSet<DimName>,
) -> Result<Term, SubstError> {
    let under = |binder: DimName,
                 bodies: &[&Term],
                 map: &BTreeMap<DimName, Dim>,
                 in_scope: &mut BTreeSet<DimName>|
     -> Result<(DimName, Vec<Term>), SubstError> {
        let renamed = fresh_dim(binder, in_scope);
        let mut inner_map = map.clone();
        inner_map.insert(binder, Dim::Name(renamed));
        in_scope.insert(renamed);
        let out = bodies
            .iter()
            .map(|b| apply_subst_rec(b, &inner_map, in_scope))
            .collect::<Result<Vec<_>, _>>();
        in_scope.remove(&renamed);
        Ok((renamed, out?))
    };
    match term {
        Term::Var(_) | Term::Bool | Term::Circle | Term::True | Term::False | Term::Base => {
            Ok(term.clone())
        }
        Term::Notb(d) => Ok(Term::Notb(apply_dim_map(*d, map)?)),
        Term::Loop(d) => Ok(Term::Loop(apply_dim_map(*d, map)?)),
        Term::Arr(a, b) => Ok(arr(
            apply_subst_rec(a, map, in_scope)?,
            apply_subst_rec(b, map, in_scope)?,
        )),
        Term::Prd(a, b) => Ok(prd(
            apply_subst_rec(a, map, in_scope)?,
            apply_subst_rec(b, map, in_scope)?,
        )),
        Term::App(f, a) => Ok(app(
            apply_subst_rec(f, map, in_scope)?,
            apply_subst_rec(a, map, in_scope)?,
        )),
        Term::Pair(a, b) => Ok(pair(
            apply_subst_rec(a, map, in_scope)?,
            apply_subst_rec(b, map, in_scope)?,
        )),
        Term::Lam(param, body) => Ok(lam(*param, apply_subst_rec(body, map, in_scope)?)),
        Term::Fst(p) => Ok(fst(apply_subst_rec(p, map, in_scope)?)),
        Term::Snd(p) => Ok(snd(apply_subst_rec(p, map, in_scope)?)),
        Term::If {
            motive,
            scrut,
            tt,
            ff,
        } => Ok(ifb(
            apply_subst_rec(motive, map, in_scope)?,
            apply_subst_rec(scrut, map, in_scope)?,
            apply_subst_rec(tt, map, in_scope)?,
            apply_subst_rec(ff, map, in_scope)?,
        )),
        Term::Notel(d, body) => Ok(notel(
            apply_dim_map(*d, map)?,
            apply_subst_rec(body, map, in_scope)?,
        )),
        Term::S1Elim {
            motive,
            scrut,
            base_case,
            loop_dim,
            loop_case,
        } => {
            let (loop_dim, mut bodies) = under(*loop_dim, &[loop_case], map, in_scope)?;
            Ok(s1elim(
                apply_subst_rec(motive, map, in_scope)?,
                apply_subst_rec(scrut, map, in_scope)?,
                apply_subst_rec(base_case, map, in_scope)?,
                loop_dim,
                bodies.pop().unwrap(),
            ))
        }
        Term::Coe {
            dim,
            line,
            from,
            to,
            arg,
        } => {
            let (dim, mut bodies) = under(*dim, &[line], map, in_scope)?;
            Ok(coe(
                dim,
                bodies.pop().unwrap(),
                apply_dim_map(*from, map)?,
                apply_dim_map(*to, map)?,
                apply_subst_rec(arg, map, in_scope)?,
            ))
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
            let (tube_dim, mut bodies) = under(*tube_dim, &[tube0, tube1], map, in_scope)?;
            let tube1_out = bodies.pop().unwrap();
            let tube0_out = bodies.pop().unwrap();
            Ok(hcom(
                apply_dim_map(*extent, map)?,
                apply_subst_rec(ty, map, in_scope)?,
                apply_dim_map(*from, map)?,
                apply_dim_map(*to, map)?,
                apply_subst_rec(cap, map, in_scope)?,
                tube_dim,
                tube0_out,
                tube1_out,
            ))
        }
    }
}

fn subst_term_rec(
    term: &Term,
    a: TermVar,
    n: &Term,
    n_vars: &BTreeSet<TermVar>,
    n_dims: &BTreeSet<DimName>,
) -> Term {
    let rec = |t: &Term| subst_term_rec(t, a, n, n_vars, n_dims);
    let under_dim = |binder: DimName, bodies: &[&Term]| -> (DimName, Vec<Term>) {
        if n_dims.contains(&binder) {
            let mut avoid = n_dims.clone();
            for b in bodies {
                avoid.extend(b.free_dims());
            }
            avoid.insert(binder);
            let renamed = fresh_dim(binder, &avoid);
            let out = bodies
                .iter()
                .map(|b| rec(&b.subst_dim(binder, Dim::Name(renamed))))
                .collect();
            (renamed, out)
        } else {
            (binder, bodies.iter().map(|b| rec(b)).collect())
        }
    };
    match term {
        Term::Var(v) => {
            if *v == a {
                n.clone()
            } else {
                term.clone()
            }
        }
        Term::Bool | Term::Circle | Term::True | Term::False | Term::Base => term.clone(),
        Term::Notb(_) | Term::Loop(_) => term.clone(),
        Term::Arr(x, y) => arr(rec(x), rec(y)),
        Term::Prd(x, y) => prd(rec(x), rec(y)),
        Term::App(f, x) => app(rec(f), rec(x)),
        Term::Pair(x, y) => pair(rec(x), rec(y)),
        Term::Lam(param, body) => {
            if *param == a {
                term.clone()
            } else if n_vars.contains(param) {
                let mut avoid = n_vars.clone();
                avoid.extend(body.free_vars());
                avoid.insert(a);
                let renamed = fresh_var(*param, &avoid);
                let body = body.subst_term(*param, &Term::Var(renamed));
                lam(renamed, rec(&body))
            } else {
                lam(*param, rec(body))
            }
        }
        Term::Fst(p) => fst(rec(p)),
        Term::Snd(p) => snd(rec(p)),
        Term::If {
            motive,
            scrut,
            tt,
            ff,
        } => ifb(rec(motive), rec(scrut), rec(tt), rec(ff)),
        Term::Notel(d, body) => notel(*d, rec(body)),
        Term::S1Elim {
            motive,
            scrut,
            base_case,
            loop_dim,
            loop_case,
        } => {
            let (loop_dim, mut bodies) = under_dim(*loop_dim, &[loop_case]);
            s1elim(
                rec(motive),
                rec(scrut),
                rec(base_case),
                loop_dim,
                bodies.pop().unwrap(),
            )
        }
        Term::Coe {
            dim,
            line,
            from,
            to,
            arg,
        } => {
            let (dim, mut bodies) = under_dim(*dim, &[line]);
            coe(dim, bodies.pop().unwrap(), *from, *to, rec(arg))
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
            let (tube_dim, mut bodies) = under_dim(*tube_dim, &[tube0, tube1]);
            let tube1_out = bodies.pop().unwrap();
            let tube0_out = bodies.pop().unwrap();
            hcom(
                *extent,
                rec(ty),
                *from,
                *to,
                rec(cap),
                tube_dim,
                tube0_out,
                tube1_out,
            )
        }
    }
}

#[derive(Default)]
struct AlphaScope {
    dims_l: Vec<DimName>,
    dims_r: Vec<DimName>,
    vars_l: Vec<TermVar>,
    vars_r: Vec<TermVar>,
}

impl AlphaScope {
    fn dim_eq(&self, a: Dim, b: Dim) -> bool {
        match (a, b) {
            (Dim::Zero, Dim::Zero) | (Dim::One, Dim::One) => true,
            (Dim::Name(x), Dim::Name(y)) => {
                let lx = self.dims_l.iter().rposition(|&d| d == x);
                let ly = self.dims_r.iter().rposition(|&d| d == y);
                match (lx, ly) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            _ => false,
        }
    }

    fn var_eq(&self, a: TermVar, b: TermVar) -> bool {
        let la = self.vars_l.iter().rposition(|&v| v == a);
        let lb = self.vars_r.iter().rposition(|&v| v == b);
        match (la, lb) {
            (Some(i), Some(j)) => i == j,
            (None, None) => a == b,
            _ => false,
        }
    }

    fn with_dims<R>(&mut self, l: DimName, r: DimName, f: impl FnOnce(&mut Self) -> R) -> R {
        self.dims_l.push(l);
        self.dims_r.push(r);
        let out = f(self);
        self.dims_l.pop();
        self.dims_r.pop();
        out
    }

    fn with_vars<R>(&mut self, l: TermVar, r: TermVar, f: impl FnOnce(&mut Self) -> R) -> R {
        self.vars_l.push(l);
        self.vars_r.push(r);
        let out = f(self);
        self.vars_l.pop();
        self.vars_r.pop();
        out
    }
}

fn alpha_rec(a: &Term, b: &Term, scope: &mut AlphaScope) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => scope.var_eq(*x, *y),
        (Term::Bool, Term::Bool)
        | (Term::Circle, Term::Circle)
        | (Term::True, Term::True)
        | (Term::False, Term::False)
        | (Term::Base, Term::Base) => true,
        (Term::Notb(r), Term::Notb(s)) | (Term::Loop(r), Term::Loop(s)) => scope.dim_eq(*r, *s),
        (Term::Arr(a1, b1), Term::Arr(a2, b2))
        | (Term::Prd(a1, b1), Term::Prd(a2, b2))
        | (Term::App(a1, b1), Term::App(a2, b2))
        | (Term::Pair(a1, b1), Term::Pair(a2, b2)) => {
            alpha_rec(a1, a2, scope) && alpha_rec(b1, b2, scope)
        }
        (Term::Lam(p1, m1), Term::Lam(p2, m2)) => {
            scope.with_vars(*p1, *p2, |s| alpha_rec(m1, m2, s))
        }
        (Term::Fst(p1), Term::Fst(p2)) | (Term::Snd(p1), Term::Snd(p2)) => {
            alpha_rec(p1, p2, scope)
        }
        (
            Term::If {
                motive: a1,
                scrut: s1,
                tt: t1,
                ff: f1,
            },
            Term::If {
                motive: a2,
                scrut: s2,
                tt: t2,
                ff: f2,
            },
        ) => {
            alpha_rec(a1, a2, scope)
                && alpha_rec(s1, s2, scope)
                && alpha_rec(t1, t2, scope)
                && alpha_rec(f1, f2, scope)
        }
        (Term::Notel(r1, m1), Term::Notel(r2, m2)) => {
            scope.dim_eq(*r1, *r2) && alpha_rec(m1, m2, scope)
        }
        (
            Term::S1Elim {
                motive: a1,
                scrut: s1,
                base_case: p1,
                loop_dim: x1,
                loop_case: l1,
            },
            Term::S1Elim {
                motive: a2,
                scrut: s2,
                base_case: p2,
                loop_dim: x2,
                loop_case: l2,
            },
        ) => {
            alpha_rec(a1, a2, scope)
                && alpha_rec(s1, s2, scope)
                && alpha_rec(p1, p2, scope)
                && scope.with_dims(*x1, *x2, |s| alpha_rec(l1, l2, s))
        }
        (
            Term::Coe {
                dim: x1,
                line: l1,
                from: r1,
                to: t1,
                arg: m1,
            },
            Term::Coe {
                dim: x2,
                line: l2,
                from: r2,
                to: t2,
                arg: m2,
            },
        ) => {
            scope.dim_eq(*r1, *r2)
                && scope.dim_eq(*t1, *t2)
                && scope.with_dims(*x1, *x2, |s| alpha_rec(l1, l2, s))
                && alpha_rec(m1, m2, scope)
        }
        (
            Term::Hcom {
                extent: e1,
                ty: ty1,
                from: r1,
                to: t1,
                cap: c1,
                tube_dim: y1,
                tube0: a01,
                tube1: a11,
            },
            Term::Hcom {
                extent: e2,
                ty: ty2,
                from: r2,
                to: t2,
                cap: c2,
                tube_dim: y2,
                tube0: a02,
                tube1: a12,
            },
        ) => {
            scope.dim_eq(*e1, *e2)
                && scope.dim_eq(*r1, *r2)
                && scope.dim_eq(*t1, *t2)
                && alpha_rec(ty1, ty2, scope)
                && alpha_rec(c1, c2, scope)
                && scope.with_dims(*y1, *y2, |s| {
                    alpha_rec(a01, a02, s) && alpha_rec(a11, a12, s)
                })
        }
        _ => false,
    }
}

/// Proptest strategies over a fixed name pool, shared by unit tests.
#[cfg(test)]
pub(crate) mod testgen {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn dim_pool() -> Vec<DimName> {
        vec![DimName::new("x"), DimName::new("y"), DimName::new("z")]
    }

    pub(crate) fn arb_pool_dim() -> impl Strategy<Value = Dim> {
        (0..5usize).prop_map(|choice| match choice {
            0 => Dim::Zero,
            1 => Dim::One,
            n => Dim::Name(dim_pool()[n - 2]),
        })
    }

    pub(crate) fn arb_var() -> impl Strategy<Value = TermVar> {
        prop_oneof![Just(TermVar::new("a")), Just(TermVar::new("b"))]
    }

    fn arb_pool_name() -> impl Strategy<Value = DimName> {
        (0..3usize).prop_map(|i| dim_pool()[i])
    }

    pub(crate) fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            Just(Term::Bool),
            Just(Term::Circle),
            Just(Term::True),
            Just(Term::False),
            Just(Term::Base),
            arb_pool_dim().prop_map(Term::Notb),
            arb_pool_dim().prop_map(Term::Loop),
            arb_var().prop_map(Term::Var),
        ];
        leaf.prop_recursive(4, 48, 6, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| arr(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| prd(a, b)),
                (arb_var(), inner.clone()).prop_map(|(v, b)| lam(v, b)),
                (inner.clone(), inner.clone()).prop_map(|(f, a)| app(f, a)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| pair(a, b)),
                inner.clone().prop_map(fst),
                inner.clone().prop_map(snd),
                (inner.clone(), inner.clone(), inner.clone(), inner.clone())
                    .prop_map(|(m, s, t, f)| ifb(m, s, t, f)),
                (arb_pool_dim(), inner.clone()).prop_map(|(d, b)| notel(d, b)),
                (
                    inner.clone(),
                    inner.clone(),
                    inner.clone(),
                    arb_pool_name(),
                    inner.clone()
                )
                    .prop_map(|(m, s, p, d, l)| s1elim(m, s, p, d, l)),
                (
                    arb_pool_name(),
                    inner.clone(),
                    arb_pool_dim(),
                    arb_pool_dim(),
                    inner.clone()
                )
                    .prop_map(|(d, line, r, s, a)| coe(d, line, r, s, a)),
                (
                    arb_pool_dim(),
                    inner.clone(),
                    arb_pool_dim(),
                    arb_pool_dim(),
                    inner.clone(),
                    arb_pool_name(),
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(e, ty, r, s, c, d, t0, t1)| hcom(e, ty, r, s, c, d, t0, t1)),
            ]
        })
    }

    /// Renames every binder in a deterministic way, for alpha tests.
    pub(crate) fn salt_binders(term: &Term, salt: &str) -> Term {
        match term {
            Term::Lam(param, body) => {
                let renamed = TermVar::new(&format!("{}{salt}", param.text()));
                let body = body.subst_term(*param, &Term::Var(renamed));
                lam(renamed, salt_binders(&body, salt))
            }
            Term::S1Elim {
                motive,
                scrut,
                base_case,
                loop_dim,
                loop_case,
            } => {
                let renamed = DimName::new(&format!("{}{salt}", loop_dim.text()));
                let body = loop_case.subst_dim(*loop_dim, Dim::Name(renamed));
                s1elim(
                    salt_binders(motive, salt),
                    salt_binders(scrut, salt),
                    salt_binders(base_case, salt),
                    renamed,
                    salt_binders(&body, salt),
                )
            }
            Term::Coe {
                dim,
                line,
                from,
                to,
                arg,
            } => {
                let renamed = DimName::new(&format!("{}{salt}", dim.text()));
                let body = line.subst_dim(*dim, Dim::Name(renamed));
                coe(
                    renamed,
                    salt_binders(&body, salt),
                    *from,
                    *to,
                    salt_binders(arg, salt),
                )
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
                let renamed = DimName::new(&format!("{}{salt}", tube_dim.text()));
                let t0 = tube0.subst_dim(*tube_dim, Dim::Name(renamed));
                let t1 = tube1.subst_dim(*tube_dim, Dim::Name(renamed));
                hcom(
                    *extent,
                    salt_binders(ty, salt),
                    *from,
                    *to,
                    salt_binders(cap, salt),
                    renamed,
                    salt_binders(&t0, salt),
                    salt_binders(&t1, salt),
                )
            }
            Term::Arr(a, b) => arr(salt_binders(a, salt), salt_binders(b, salt)),
            Term::Prd(a, b) => prd(salt_binders(a, salt), salt_binders(b, salt)),
            Term::App(a, b) => app(salt_binders(a, salt), salt_binders(b, salt)),
            Term::Pair(a, b) => pair(salt_binders(a, salt), salt_binders(b, salt)),
            Term::Fst(p) => fst(salt_binders(p, salt)),
            Term::Snd(p) => snd(salt_binders(p, salt)),
            Term::If {
                motive,
                scrut,
                tt,
                ff,
            } => ifb(
                salt_binders(motive, salt),
                salt_binders(scrut, salt),
                salt_binders(tt, salt),
                salt_binders(ff, salt),
            ),
            Term::Notel(d, body) => notel(*d, salt_binders(body, salt)),
            _ => term.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testgen::*;
    use super::*;
    use proptest::prelude::*;

    fn x() -> DimName {
        DimName::new("x")
    }

    fn y() -> DimName {
        DimName::new("y")
    }

    fn z() -> DimName {
        DimName::new("z")
    }

    fn va() -> TermVar {
        TermVar::new("a")
    }

    fn vb() -> TermVar {
        TermVar::new("b")
    }

    #[test]
    fn interning_is_stable() {
        assert_eq!(DimName::new("q"), DimName::new("q"));
        assert_ne!(DimName::new("q"), DimName::new("r"));
        assert_eq!(DimName::new("q").text(), "q");
    }

    #[test]
    fn context_rejects_duplicates() {
        let err = DimCtx::from_names([x(), y(), x()]);
        assert_eq!(err, Err(SubstError::DuplicateName(x())));
    }

    #[test]
    fn free_dims_skip_bound_tube_name() {
        let m = hcom(
            Dim::Name(x()),
            Term::Bool,
            Dim::Zero,
            Dim::One,
            Term::True,
            y(),
            loop_(Dim::Name(y())),
            Term::Base,
        );
        let fd = m.free_dims();
        assert_eq!(fd.into_iter().collect::<Vec<_>>(), vec![x()]);
    }

    #[test]
    fn free_dims_of_coe_include_endpoints() {
        let m = coe(x(), notb(Dim::Name(x())), Dim::Name(y()), Dim::One, var("a"));
        assert_eq!(m.free_dims().into_iter().collect::<Vec<_>>(), vec![y()]);
    }

    #[test]
    fn subst_dim_renames_binder_to_avoid_capture() {
        let m = coe(y(), notb(Dim::Name(x())), Dim::Zero, Dim::One, var("a"));
        let out = m.subst_dim(x(), Dim::Name(y()));
        let expected = coe(z(), notb(Dim::Name(y())), Dim::Zero, Dim::One, var("a"));
        assert!(out.alpha_eq(&expected), "got {out:?}");
        if let Term::Coe { dim, line, .. } = &out {
            assert_ne!(*dim, y(), "binder must not capture the substituted name");
            assert_eq!(**line, notb(Dim::Name(y())));
        } else {
            panic!("expected a coercion");
        }
    }

    #[test]
    fn subst_dim_stops_at_shadowing_binder() {
        let m = coe(x(), notb(Dim::Name(x())), Dim::Zero, Dim::Name(x()), var("a"));
        let out = m.subst_dim(x(), Dim::One);
        let expected = coe(x(), notb(Dim::Name(x())), Dim::Zero, Dim::One, var("a"));
        assert!(out.alpha_eq(&expected));
    }

    #[test]
    fn apply_subst_reports_unmapped_names() {
        let m = notb(Dim::Name(x()));
        let source = DimCtx::from_names([y()]).unwrap();
        let subst = DimSubst::identity(&source);
        assert_eq!(m.apply_subst(&subst), Err(SubstError::UnmappedName(x())));
    }

    #[test]
    fn apply_subst_renames_binders_clashing_with_target() {
        let source = DimCtx::from_names([x()]).unwrap();
        let target = DimCtx::from_names([y()]).unwrap();
        let map = [(x(), Dim::Name(y()))].into_iter().collect();
        let subst = DimSubst::new(source, target, map).unwrap();
        let m = hcom(
            Dim::Name(x()),
            Term::Bool,
            Dim::Zero,
            Dim::One,
            Term::True,
            y(),
            expand_not(Term::True),
            loop_(Dim::Name(x())),
        );
        let out = m.apply_subst(&subst).unwrap();
        let expected = hcom(
            Dim::Name(y()),
            Term::Bool,
            Dim::Zero,
            Dim::One,
            Term::True,
            z(),
            expand_not(Term::True),
            loop_(Dim::Name(y())),
        );
        assert!(out.alpha_eq(&expected), "got {out:?}");
        assert!(out.free_dims().iter().all(|&d| d == y()));
    }

    #[test]
    fn subst_term_replaces_free_variable() {
        let m = app(lam(va(), var("a")), var("b"));
        let out = m.subst_term(vb(), &Term::True);
        assert!(out.alpha_eq(&app(lam(va(), var("a")), Term::True)));
    }

    #[test]
    fn subst_term_avoids_variable_capture() {
        let m = lam(va(), app(var("b"), var("a")));
        let out = m.subst_term(vb(), &var("a"));
        let expected = lam(TermVar::new("c"), app(var("a"), var("c")));
        assert!(out.alpha_eq(&expected), "got {out:?}");
    }

    #[test]
    fn subst_term_avoids_dimension_capture() {
        let m = hcom(
            Dim::Zero,
            Term::Circle,
            Dim::Zero,
            Dim::One,
            Term::Base,
            x(),
            var("a"),
            Term::Base,
        );
        let out = m.subst_term(va(), &loop_(Dim::Name(x())));
        if let Term::Hcom {
            tube_dim, tube0, ..
        } = &out
        {
            assert_ne!(*tube_dim, x(), "binder must not capture the payload name");
            assert_eq!(**tube0, loop_(Dim::Name(x())));
        } else {
            panic!("expected a composition");
        }
        assert!(out.free_dims().contains(&x()));
    }

    #[test]
    fn expand_not_builds_the_conditional() {
        assert_eq!(
            expand_not(var("a")),
            ifb(Term::Bool, var("a"), Term::False, Term::True)
        );
    }

    #[test]
    fn compose_subst_matches_sequential_application() {
        let source = DimCtx::from_names([x(), y()]).unwrap();
        let mid = DimCtx::from_names([z()]).unwrap();
        let target = DimCtx::new();
        let s1 = DimSubst::new(
            source,
            mid.clone(),
            [(x(), Dim::Name(z())), (y(), Dim::One)].into_iter().collect(),
        )
        .unwrap();
        let s2 = DimSubst::new(mid, target, [(z(), Dim::Zero)].into_iter().collect()).unwrap();
        let m = hcom(
            Dim::Name(x()),
            Term::Bool,
            Dim::Name(y()),
            Dim::One,
            Term::True,
            y(),
            Term::True,
            Term::True,
        );
        let composed = m.apply_subst(&compose_subst(&s1, &s2)).unwrap();
        let sequential = m.apply_subst(&s1).unwrap().apply_subst(&s2).unwrap();
        assert!(composed.alpha_eq(&sequential));
    }

    #[test]
    fn display_formats() {
        let source = DimCtx::from_names([x(), y()]).unwrap();
        let target = DimCtx::from_names([z()]).unwrap();
        let subst = DimSubst::new(
            source,
            target,
            [(x(), Dim::Zero), (y(), Dim::Name(z()))].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(subst.to_string(), "x=0,y=z");
        assert_eq!(DimSubst::identity(&DimCtx::new()).to_string(), "id");
    }

    fn arb_subst_pair() -> impl Strategy<Value = (DimSubst, DimSubst)> {
        let mid_names = [DimName::new("u"), DimName::new("v")];
        let final_name = DimName::new("w");
        let arb_mid_dim = prop_oneof![
            Just(Dim::Zero),
            Just(Dim::One),
            Just(Dim::Name(mid_names[0])),
            Just(Dim::Name(mid_names[1])),
        ];
        let arb_final_dim = prop_oneof![
            Just(Dim::Zero),
            Just(Dim::One),
            Just(Dim::Name(final_name)),
        ];
        (
            proptest::collection::vec(arb_mid_dim, 3),
            proptest::collection::vec(arb_final_dim, 2),
        )
            .prop_map(move |(firsts, seconds)| {
                let source = DimCtx::from_names(dim_pool()).unwrap();
                let mid = DimCtx::from_names(mid_names).unwrap();
                let target = DimCtx::from_names([final_name]).unwrap();
                let s1 = DimSubst::new(
                    source,
                    mid.clone(),
                    dim_pool().into_iter().zip(firsts).collect(),
                )
                .unwrap();
                let s2 = DimSubst::new(
                    mid,
                    target,
                    mid_names.iter().copied().zip(seconds).collect(),
                )
                .unwrap();
                (s1, s2)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn composition_law(m in arb_term(), (s1, s2) in arb_subst_pair()) {
            let composed = m.apply_subst(&compose_subst(&s1, &s2)).unwrap();
            let sequential = m.apply_subst(&s1).unwrap().apply_subst(&s2).unwrap();
            prop_assert!(composed.alpha_eq(&sequential));
        }

        #[test]
        fn identity_subst_is_identity(m in arb_term()) {
            for d in dim_pool() {
                prop_assert!(m.subst_dim(d, Dim::Name(d)).alpha_eq(&m));
            }
        }

        #[test]
        fn applied_subst_bounds_free_dims(m in arb_term(), (s1, _) in arb_subst_pair()) {
            let out = m.apply_subst(&s1).unwrap();
            let target: BTreeSet<DimName> = s1.target().names().iter().copied().collect();
            prop_assert!(out.free_dims().is_subset(&target));
        }

        #[test]
        fn alpha_eq_is_an_equivalence(m in arb_term()) {
            let m1 = salt_binders(&m, "1");
            let m2 = salt_binders(&m, "2");
            prop_assert!(m.alpha_eq(&m));
            prop_assert!(m.alpha_eq(&m1));
            prop_assert!(m1.alpha_eq(&m));
            prop_assert!(m1.alpha_eq(&m2));
            prop_assert!(m.alpha_eq(&m2));
        }
    }

    #[test]
    fn alpha_distinguishes_free_names() {
        assert!(!loop_(Dim::Name(x())).alpha_eq(&loop_(Dim::Name(y()))));
        assert!(!var("a").alpha_eq(&var("b")));
        assert!(!lam(va(), var("a")).alpha_eq(&lam(va(), var("b"))));
    }
}
