//! Executable law suites: the four composition conditions per type, the rule
//! summary, and the negation lemmas, all reduced to checker calls.

use std::fmt;

use crate::opsem::DEFAULT_FUEL;
use crate::semantics::{
    ceqpretype, ceqtm, enumerate_elements, eq_open, eval_type, CheckConfig, CheckReport, Stats,
    TypeValue, Verdict, Witness,
};
use crate::syntax::{
    app, arr, coe, expand_not, fst, hcom, ifb, lam, loop_, notb, notel, pair, prd, s1elim, snd,
    Dim, DimCtx, DimName, DimSubst, Term, TermVar,
};

/// One composition or coercion scenario over an instance context.
///
/// The substitution brings the type into the instance context; its target is
/// the ambient context of every judgment below, and `x` names the composition
/// direction within it. Both tubes share the binder `tube_dim`.
#[derive(Clone, Debug)]
pub struct KanInstance {
    pub psi: DimSubst,
    pub x: DimName,
    pub from: Dim,
    pub to: Dim,
    pub cap: Term,
    pub tube_dim: DimName,
    pub tube0: Term,
    pub tube1: Term,
    /// The type under test, over the substitution's source context.
    pub type_expr: Term,
}

/// Accumulates sub-check work and stops at the first non-holding report.
struct Gate {
    stats: Stats,
    probes: bool,
}

impl Gate {
    fn new() -> Self {
        Gate {
            stats: Stats::default(),
            probes: false,
        }
    }

    fn admit(&mut self, report: CheckReport, label: &str) -> Result<(), CheckReport> {
        self.stats.substs_tried += report.stats.substs_tried;
        self.stats.evals_performed += report.stats.evals_performed;
        match report.verdict {
            Verdict::Holds { modulo_probes } => {
                self.probes |= modulo_probes;
                Ok(())
            }
            _ => {
                let mut out = report;
                out.witness = out.witness.map(|w| w.with_label(label));
                out.stats = self.stats.clone();
                Err(out)
            }
        }
    }

    fn pass(self) -> CheckReport {
        CheckReport {
            verdict: Verdict::Holds {
                modulo_probes: self.probes,
            },
            witness: None,
            stats: self.stats,
        }
    }
}

fn fail_now(ctx: &DimCtx, clause: String) -> CheckReport {
    let id = DimSubst::identity(ctx);
    CheckReport {
        verdict: Verdict::Fails,
        witness: Some(Witness {
            subst1: id.clone(),
            subst2: id,
            reduced: Vec::new(),
            clause,
        }),
        stats: Stats::default(),
    }
}

/// A syntactically distinct term that evaluates to the original.
fn redex_copy(m: &Term) -> Term {
    fst(pair(m.clone(), m.clone()))
}

/// Checks one composition condition of a type on a concrete instance.
///
/// Conditions 1 and 2 conclude about a composition in direction `x`; condition
/// 3 about compositions with constant extents; condition 4 about coercion
/// along `x`. Hypotheses are checked first, and a failing report says whether
/// a hypothesis or the conclusion came apart.
pub fn check_kan(condition: u8, inst: &KanInstance, cfg: &CheckConfig) -> CheckReport {
    assert!(
        (1..=4).contains(&condition),
        "composition conditions are numbered 1 through 4"
    );
    let ctx = inst.psi.target().clone();
    let line = match inst.type_expr.apply_subst(&inst.psi) {
        Ok(t) => t,
        Err(e) => return fail_now(&ctx, format!("hypothesis: the type does not fit ({e})")),
    };
    if condition != 3 && !ctx.contains(inst.x) {
        return fail_now(
            &ctx,
            "hypothesis: the composition direction is missing from the context".to_string(),
        );
    }
    if ctx.contains(inst.tube_dim) || inst.tube_dim == inst.x {
        return fail_now(
            &ctx,
            "hypothesis: the tube binder collides with the context".to_string(),
        );
    }
    let mut gate = Gate::new();
    let result = match condition {
        1 | 2 => check_hcom_condition(condition, inst, &ctx, &line, cfg, &mut gate),
        3 => check_face_condition(inst, &ctx, &line, cfg, &mut gate),
        _ => check_coe_condition(inst, &ctx, &line, cfg, &mut gate),
    };
    match result {
        Ok(()) => gate.pass(),
        Err(report) => report,
    }
}

/// The hypothesis block shared by conditions 1 and 2: cap equality, tube
/// face equality, and adjacency of each tube with the cap.
fn hcom_hypotheses(
    inst: &KanInstance,
    ctx: &DimCtx,
    line: &Term,
    binary: bool,
    cfg: &CheckConfig,
    gate: &mut Gate,
) -> Result<(), CheckReport> {
    let base = ctx.removed(inst.x);
    let cap_other = if binary {
        redex_copy(&inst.cap)
    } else {
        inst.cap.clone()
    };
    let tube_other =
        |t: &Term| if binary { redex_copy(t) } else { t.clone() };
    gate.admit(
        ceqtm(line, &inst.cap, &cap_other, ctx, cfg),
        "hypothesis: cap",
    )?;
    for (eps, tube) in [(Dim::Zero, &inst.tube0), (Dim::One, &inst.tube1)] {
        let line_face = line.subst_dim(inst.x, eps);
        let tube_ctx = base.extended(inst.tube_dim);
        let end = tube.subst_dim(inst.x, eps);
        let end_other = tube_other(tube).subst_dim(inst.x, eps);
        gate.admit(
            ceqtm(&line_face, &end, &end_other, &tube_ctx, cfg),
            &format!("hypothesis: tube face at {eps}"),
        )?;
        let start = tube.subst_dim(inst.tube_dim, inst.from).subst_dim(inst.x, eps);
        let cap_face = inst.cap.subst_dim(inst.x, eps);
        gate.admit(
            ceqtm(&line_face, &start, &cap_face, &base, cfg),
            &format!("hypothesis: adjacency at {eps}"),
        )?;
    }
    Ok(())
}

/// Checks only the hypothesis judgments of the congruence condition. The
/// generator uses this to validate sampled instances without consulting any
/// conclusion.
pub fn check_kan_hypotheses(inst: &KanInstance, cfg: &CheckConfig) -> CheckReport {
    let ctx = inst.psi.target().clone();
    let line = match inst.type_expr.apply_subst(&inst.psi) {
        Ok(t) => t,
        Err(e) => return fail_now(&ctx, format!("hypothesis: the type does not fit ({e})")),
    };
    if !ctx.contains(inst.x) {
        return fail_now(
            &ctx,
            "hypothesis: the composition direction is missing from the context".to_string(),
        );
    }
    if ctx.contains(inst.tube_dim) || inst.tube_dim == inst.x {
        return fail_now(
            &ctx,
            "hypothesis: the tube binder collides with the context".to_string(),
        );
    }
    let mut gate = Gate::new();
    match hcom_hypotheses(inst, &ctx, &line, true, cfg, &mut gate) {
        Ok(()) => gate.pass(),
        Err(report) => report,
    }
}

/// Conditions 1 (congruence) and 2 (collapse at equal endpoints).
fn check_hcom_condition(
    condition: u8,
    inst: &KanInstance,
    ctx: &DimCtx,
    line: &Term,
    cfg: &CheckConfig,
    gate: &mut Gate,
) -> Result<(), CheckReport> {
    let binary = condition == 1;
    let to = if binary { inst.to } else { inst.from };
    let cap_other = if binary {
        redex_copy(&inst.cap)
    } else {
        inst.cap.clone()
    };
    let tube_other =
        |t: &Term| if binary { redex_copy(t) } else { t.clone() };
    hcom_hypotheses(inst, ctx, line, binary, cfg, gate)?;
    let lhs = hcom(
        Dim::Name(inst.x),
        line.clone(),
        inst.from,
        to,
        inst.cap.clone(),
        inst.tube_dim,
        inst.tube0.clone(),
        inst.tube1.clone(),
    );
    let rhs = if binary {
        hcom(
            Dim::Name(inst.x),
            line.clone(),
            inst.from,
            to,
            cap_other,
            inst.tube_dim,
            tube_other(&inst.tube0),
            tube_other(&inst.tube1),
        )
    } else {
        inst.cap.clone()
    };
    gate.admit(ceqtm(line, &lhs, &rhs, ctx, cfg), "conclusion")
}

/// Condition 3: a composition whose extent is constant is its tube face.
fn check_face_condition(
    inst: &KanInstance,
    ctx: &DimCtx,
    line: &Term,
    cfg: &CheckConfig,
    gate: &mut Gate,
) -> Result<(), CheckReport> {
    gate.admit(
        ceqtm(line, &inst.cap, &inst.cap, ctx, cfg),
        "hypothesis: cap",
    )?;
    for (eps, tube) in [(Dim::Zero, &inst.tube0), (Dim::One, &inst.tube1)] {
        let tube_ctx = ctx.extended(inst.tube_dim);
        gate.admit(
            ceqtm(line, tube, tube, &tube_ctx, cfg),
            &format!("hypothesis: tube at extent {eps}"),
        )?;
        let start = tube.subst_dim(inst.tube_dim, inst.from);
        gate.admit(
            ceqtm(line, &start, &inst.cap, ctx, cfg),
            &format!("hypothesis: adjacency at extent {eps}"),
        )?;
        let composite = hcom(
            eps,
            line.clone(),
            inst.from,
            inst.to,
            inst.cap.clone(),
            inst.tube_dim,
            inst.tube0.clone(),
            inst.tube1.clone(),
        );
        let end = tube.subst_dim(inst.tube_dim, inst.to);
        gate.admit(
            ceqtm(line, &composite, &end, ctx, cfg),
            &format!("conclusion at extent {eps}"),
        )?;
    }
    Ok(())
}

/// Condition 4: coercion along the line respects equality of arguments.
fn check_coe_condition(
    inst: &KanInstance,
    ctx: &DimCtx,
    line: &Term,
    cfg: &CheckConfig,
    gate: &mut Gate,
) -> Result<(), CheckReport> {
    let base = ctx.removed(inst.x);
    for d in [inst.from, inst.to] {
        if !base.admits(d) {
            return Err(fail_now(
                ctx,
                format!("hypothesis: endpoint {d} is not well-formed without the composition direction"),
            ));
        }
    }
    let line_from = line.subst_dim(inst.x, inst.from);
    let line_to = line.subst_dim(inst.x, inst.to);
    let other = redex_copy(&inst.cap);
    gate.admit(
        ceqtm(&line_from, &inst.cap, &other, &base, cfg),
        "hypothesis: coercion argument",
    )?;
    let lhs = coe(inst.x, line.clone(), inst.from, inst.to, inst.cap.clone());
    let rhs = coe(inst.x, line.clone(), inst.from, inst.to, other);
    gate.admit(ceqtm(&line_to, &lhs, &rhs, &base, cfg), "conclusion")
}

/// A checkable judgment form.
#[derive(Clone, Debug)]
pub enum Judgment {
    /// Exact equality of two terms at a type, under term hypotheses.
    EqTm {
        ctx: Vec<(TermVar, Term)>,
        psi: DimCtx,
        ty: Term,
        lhs: Term,
        rhs: Term,
    },
    /// Exact equality of two pretypes.
    EqPretype { psi: DimCtx, a: Term, b: Term },
    /// Well-formedness of a dimension expression.
    WfDim { psi: DimCtx, d: Dim },
}

pub fn equal(psi: &DimCtx, ty: Term, lhs: Term, rhs: Term) -> Judgment {
    Judgment::EqTm {
        ctx: Vec::new(),
        psi: psi.clone(),
        ty,
        lhs,
        rhs,
    }
}

pub fn member(psi: &DimCtx, ty: Term, m: Term) -> Judgment {
    equal(psi, ty, m.clone(), m)
}

pub fn member_under(psi: &DimCtx, ctx: Vec<(TermVar, Term)>, ty: Term, m: Term) -> Judgment {
    Judgment::EqTm {
        ctx,
        psi: psi.clone(),
        ty,
        lhs: m.clone(),
        rhs: m,
    }
}

pub fn pretype(psi: &DimCtx, a: Term) -> Judgment {
    Judgment::EqPretype {
        psi: psi.clone(),
        a: a.clone(),
        b: a,
    }
}

pub fn pretypes_equal(psi: &DimCtx, a: Term, b: Term) -> Judgment {
    Judgment::EqPretype {
        psi: psi.clone(),
        a,
        b,
    }
}

pub fn dim_wf(psi: &DimCtx, d: Dim) -> Judgment {
    Judgment::WfDim {
        psi: psi.clone(),
        d,
    }
}

impl Judgment {
    pub fn check(&self, cfg: &CheckConfig) -> CheckReport {
        match self {
            Judgment::EqTm {
                ctx,
                psi,
                ty,
                lhs,
                rhs,
            } => {
                if ctx.is_empty() {
                    ceqtm(ty, lhs, rhs, psi, cfg)
                } else {
                    eq_open(ctx, lhs, rhs, ty, psi, cfg)
                }
            }
            Judgment::EqPretype { psi, a, b } => ceqpretype(a, b, psi, cfg),
            Judgment::WfDim { psi, d } => {
                if psi.admits(*d) {
                    CheckReport {
                        verdict: Verdict::Holds {
                            modulo_probes: false,
                        },
                        witness: None,
                        stats: Stats::default(),
                    }
                } else {
                    fail_now(psi, format!("dimension {d} is not in scope"))
                }
            }
        }
    }
}

/// A rule instance: premises and the conclusion they support.
#[derive(Clone, Debug)]
pub struct RuleCase {
    pub rule_id: &'static str,
    pub case_id: String,
    pub premises: Vec<Judgment>,
    pub conclusion: Judgment,
}

/// How a case resolved.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CaseOutcome {
    /// Premises and conclusion all hold.
    Sound,
    /// A premise failed, so the conclusion was not consulted.
    Vacuous,
    /// Premises hold but the conclusion fails.
    Violated,
    /// A budget ran out before a verdict.
    Inconclusive,
}

impl fmt::Display for CaseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match self {
            CaseOutcome::Sound => "sound",
            CaseOutcome::Vacuous => "vacuous",
            CaseOutcome::Violated => "violated",
            CaseOutcome::Inconclusive => "inconclusive",
        };
        write!(f, "{word}")
    }
}

/// Result of running one suite case.
#[derive(Clone, Debug)]
pub struct CaseResult {
    pub case_id: String,
    pub outcome: CaseOutcome,
    /// The report behind a non-sound outcome.
    pub detail: Option<CheckReport>,
    pub stats: Stats,
}

/// Checks a rule case: first every premise, then the conclusion.
pub fn run_rule(case: &RuleCase, cfg: &CheckConfig) -> CaseResult {
    let mut stats = Stats::default();
    for (index, premise) in case.premises.iter().enumerate() {
        let report = premise.check(cfg);
        stats.substs_tried += report.stats.substs_tried;
        stats.evals_performed += report.stats.evals_performed;
        match report.verdict {
            Verdict::Holds { .. } => {}
            Verdict::Fails => {
                return CaseResult {
                    case_id: case.case_id.clone(),
                    outcome: CaseOutcome::Vacuous,
                    detail: Some(relabel(report, &format!("premise {}", index + 1))),
                    stats,
                }
            }
            Verdict::Inconclusive => {
                return CaseResult {
                    case_id: case.case_id.clone(),
                    outcome: CaseOutcome::Inconclusive,
                    detail: Some(relabel(report, &format!("premise {}", index + 1))),
                    stats,
                }
            }
        }
    }
    let report = case.conclusion.check(cfg);
    stats.substs_tried += report.stats.substs_tried;
    stats.evals_performed += report.stats.evals_performed;
    let outcome = match report.verdict {
        Verdict::Holds { .. } => CaseOutcome::Sound,
        Verdict::Fails => CaseOutcome::Violated,
        Verdict::Inconclusive => CaseOutcome::Inconclusive,
    };
    CaseResult {
        case_id: case.case_id.clone(),
        outcome,
        detail: match outcome {
            CaseOutcome::Sound => None,
            _ => Some(relabel(report, "conclusion")),
        },
        stats,
    }
}

fn relabel(mut report: CheckReport, label: &str) -> CheckReport {
    report.witness = report.witness.map(|w| w.with_label(label));
    report
}

/// One entry of the curated library.
#[derive(Clone, Debug)]
pub enum SuiteCase {
    Rule(RuleCase),
    Kan {
        case_id: String,
        condition: u8,
        instance: KanInstance,
    },
}

impl SuiteCase {
    pub fn case_id(&self) -> &str {
        match self {
            SuiteCase::Rule(case) => &case.case_id,
            SuiteCase::Kan { case_id, .. } => case_id,
        }
    }

    pub fn run(&self, cfg: &CheckConfig) -> CaseResult {
        match self {
            SuiteCase::Rule(case) => run_rule(case, cfg),
            SuiteCase::Kan {
                case_id,
                condition,
                instance,
            } => {
                let report = check_kan(*condition, instance, cfg);
                let outcome = match report.verdict {
                    Verdict::Holds { .. } => CaseOutcome::Sound,
                    Verdict::Inconclusive => CaseOutcome::Inconclusive,
                    Verdict::Fails => {
                        let hypothesis = report
                            .witness
                            .as_ref()
                            .is_some_and(|w| w.clause.starts_with("hypothesis"));
                        if hypothesis {
                            CaseOutcome::Vacuous
                        } else {
                            CaseOutcome::Violated
                        }
                    }
                };
                let stats = report.stats.clone();
                CaseResult {
                    case_id: case_id.clone(),
                    outcome,
                    detail: match outcome {
                        CaseOutcome::Sound => None,
                        _ => Some(report),
                    },
                    stats,
                }
            }
        }
    }
}

/// Totals for a suite run. Every non-sound outcome counts as a failure.
#[derive(Clone, Debug)]
pub struct SuiteSummary {
    pub results: Vec<CaseResult>,
    pub sound: usize,
    pub vacuous: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

impl SuiteSummary {
    pub fn failures(&self) -> usize {
        self.vacuous + self.violated + self.inconclusive
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for SuiteSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for result in &self.results {
            writeln!(f, "{}: {}", result.case_id, result.outcome)?;
            if result.outcome != CaseOutcome::Sound {
                if let Some(report) = &result.detail {
                    if let Some(witness) = &report.witness {
                        writeln!(f, "  clause: {}", witness.clause)?;
                    }
                }
            }
        }
        write!(
            f,
            "cases: {} sound: {} vacuous: {} violated: {} inconclusive: {}",
            self.results.len(),
            self.sound,
            self.vacuous,
            self.violated,
            self.inconclusive
        )
    }
}

/// Runs the given cases in order and tallies outcomes.
pub fn run_cases(cases: &[SuiteCase], cfg: &CheckConfig) -> SuiteSummary {
    let mut summary = SuiteSummary {
        results: Vec::new(),
        sound: 0,
        vacuous: 0,
        violated: 0,
        inconclusive: 0,
    };
    for case in cases {
        let result = case.run(cfg);
        match result.outcome {
            CaseOutcome::Sound => summary.sound += 1,
            CaseOutcome::Vacuous => summary.vacuous += 1,
            CaseOutcome::Violated => summary.violated += 1,
            CaseOutcome::Inconclusive => summary.inconclusive += 1,
        }
        summary.results.push(result);
    }
    summary
}

/// Runs the whole curated library.
pub fn run_suite(cfg: &CheckConfig) -> SuiteSummary {
    run_cases(&suite(), cfg)
}

/// The checked-in list of case ids, one per line.
pub const MANIFEST: &str = include_str!("../suite_manifest.txt");

/// The curated library, ordered by case id.
pub fn suite() -> Vec<SuiteCase> {
    let mut cases = Vec::new();
    rule_cases(&mut cases);
    kan_cases(&mut cases);
    lemma_cases(&mut cases);
    cases.sort_by(|a, b| a.case_id().cmp(b.case_id()));
    cases
}

fn dn(text: &str) -> DimName {
    DimName::new(text)
}

fn dctx(names: &[&str]) -> DimCtx {
    DimCtx::from_names(names.iter().map(|n| dn(n))).expect("distinct context names")
}

fn tv(text: &str) -> TermVar {
    TermVar::new(text)
}

fn rule(
    cases: &mut Vec<SuiteCase>,
    rule_id: &'static str,
    suffix: &str,
    premises: Vec<Judgment>,
    conclusion: Judgment,
) {
    cases.push(SuiteCase::Rule(RuleCase {
        rule_id,
        case_id: format!("{rule_id}/{suffix}"),
        premises,
        conclusion,
    }));
}

#[rustfmt::skip]
fn rule_cases(cases: &mut Vec<SuiteCase>) {
    let e = dctx(&[]);
    let cx = dctx(&["x"]);
    let cxz = dctx(&["x", "z"]);
    let x = Dim::name("x");
    let a = tv("a");
    let b = tv("b");
    let p = tv("p");
    let z = dn("z");
    let nx = notb(x);
    let idf = lam(a, Term::Var(a));
    let nel = |d: Dim, m: Term| notel(d, m);

    // Functions.
    rule(cases, "function-formation", "closed",
        vec![pretype(&e, Term::Bool), pretype(&e, Term::Bool)],
        pretype(&e, arr(Term::Bool, Term::Bool)));
    rule(cases, "function-formation", "line",
        vec![pretype(&cx, nx.clone()), pretype(&cx, Term::Bool)],
        pretype(&cx, arr(nx.clone(), Term::Bool)));
    rule(cases, "function-intro", "identity",
        vec![member_under(&e, vec![(a, Term::Bool)], Term::Bool, Term::Var(a))],
        member(&e, arr(Term::Bool, Term::Bool), idf.clone()));
    rule(cases, "function-intro", "line",
        vec![member_under(&cx, vec![(a, nx.clone())], nx.clone(), Term::Var(a))],
        member(&cx, arr(nx.clone(), nx.clone()), idf.clone()));
    rule(cases, "function-elim", "closed",
        vec![member(&e, arr(Term::Bool, Term::Bool), idf.clone()),
             member(&e, Term::Bool, Term::True)],
        member(&e, Term::Bool, app(idf.clone(), Term::True)));
    rule(cases, "function-elim", "line",
        vec![member(&cx, arr(nx.clone(), nx.clone()), idf.clone()),
             member(&cx, nx.clone(), nel(x, Term::True))],
        member(&cx, nx.clone(), app(idf.clone(), nel(x, Term::True))));
    rule(cases, "function-beta", "identity",
        vec![member_under(&e, vec![(a, Term::Bool)], Term::Bool, Term::Var(a)),
             member(&e, Term::Bool, Term::True)],
        equal(&e, Term::Bool, app(idf.clone(), Term::True), Term::True));
    rule(cases, "function-beta", "negate",
        vec![member_under(&cx, vec![(a, Term::Bool)], Term::Bool, expand_not(Term::Var(a))),
             member(&cx, Term::Bool, Term::False)],
        equal(&cx, Term::Bool,
            app(lam(a, expand_not(Term::Var(a))), Term::False),
            expand_not(Term::False)));
    rule(cases, "function-eta", "identity",
        vec![member(&e, arr(Term::Bool, Term::Bool), idf.clone())],
        equal(&e, arr(Term::Bool, Term::Bool),
            idf.clone(),
            lam(b, app(idf.clone(), Term::Var(b)))));
    let into_line = lam(a, nel(x, Term::Var(a)));
    rule(cases, "function-eta", "line",
        vec![member(&cx, arr(Term::Bool, nx.clone()), into_line.clone())],
        equal(&cx, arr(Term::Bool, nx.clone()),
            into_line.clone(),
            lam(b, app(into_line.clone(), Term::Var(b)))));

    // Products.
    let bool_pair = pair(Term::True, Term::False);
    let line_pair = pair(nel(x, Term::True), Term::Base);
    let line_prd = prd(nx.clone(), Term::Circle);
    rule(cases, "product-formation", "closed",
        vec![pretype(&e, Term::Bool), pretype(&e, Term::Bool)],
        pretype(&e, prd(Term::Bool, Term::Bool)));
    rule(cases, "product-formation", "line",
        vec![pretype(&cx, nx.clone()), pretype(&cx, Term::Circle)],
        pretype(&cx, line_prd.clone()));
    rule(cases, "product-intro", "closed",
        vec![member(&e, Term::Bool, Term::True), member(&e, Term::Bool, Term::False)],
        member(&e, prd(Term::Bool, Term::Bool), bool_pair.clone()));
    rule(cases, "product-intro", "line",
        vec![member(&cx, nx.clone(), nel(x, Term::True)), member(&cx, Term::Circle, Term::Base)],
        member(&cx, line_prd.clone(), line_pair.clone()));
    rule(cases, "product-fst", "closed",
        vec![member(&e, prd(Term::Bool, Term::Bool), bool_pair.clone())],
        member(&e, Term::Bool, fst(bool_pair.clone())));
    rule(cases, "product-fst", "line",
        vec![member(&cx, line_prd.clone(), line_pair.clone())],
        member(&cx, nx.clone(), fst(line_pair.clone())));
    rule(cases, "product-snd", "closed",
        vec![member(&e, prd(Term::Bool, Term::Bool), bool_pair.clone())],
        member(&e, Term::Bool, snd(bool_pair.clone())));
    rule(cases, "product-snd", "line",
        vec![member(&cx, line_prd.clone(), line_pair.clone())],
        member(&cx, Term::Circle, snd(line_pair.clone())));
    rule(cases, "product-fst-beta", "closed",
        vec![member(&e, Term::Bool, Term::True), member(&e, Term::Bool, Term::False)],
        equal(&e, Term::Bool, fst(bool_pair.clone()), Term::True));
    rule(cases, "product-fst-beta", "line",
        vec![member(&cx, nx.clone(), nel(x, Term::True)), member(&cx, Term::Circle, Term::Base)],
        equal(&cx, nx.clone(), fst(line_pair.clone()), nel(x, Term::True)));
    rule(cases, "product-snd-beta", "closed",
        vec![member(&e, Term::Bool, Term::True), member(&e, Term::Bool, Term::False)],
        equal(&e, Term::Bool, snd(bool_pair.clone()), Term::False));
    rule(cases, "product-snd-beta", "line",
        vec![member(&cx, nx.clone(), nel(x, Term::True)), member(&cx, Term::Circle, Term::Base)],
        equal(&cx, Term::Circle, snd(line_pair.clone()), Term::Base));
    let wrapped_pair = app(lam(p, Term::Var(p)), bool_pair.clone());
    rule(cases, "product-eta", "redex",
        vec![member(&e, prd(Term::Bool, Term::Bool), wrapped_pair.clone())],
        equal(&e, prd(Term::Bool, Term::Bool),
            wrapped_pair.clone(),
            pair(fst(wrapped_pair.clone()), snd(wrapped_pair.clone()))));
    rule(cases, "product-eta", "line",
        vec![member(&cx, line_prd.clone(), line_pair.clone())],
        equal(&cx, line_prd.clone(),
            line_pair.clone(),
            pair(fst(line_pair.clone()), snd(line_pair.clone()))));

    // Booleans.
    rule(cases, "bool-formation", "closed", vec![], pretype(&e, Term::Bool));
    rule(cases, "bool-formation", "cube", vec![], pretype(&cxz, Term::Bool));
    rule(cases, "bool-true", "closed", vec![], member(&e, Term::Bool, Term::True));
    rule(cases, "bool-true", "cube", vec![], member(&cxz, Term::Bool, Term::True));
    rule(cases, "bool-false", "closed", vec![], member(&e, Term::Bool, Term::False));
    rule(cases, "bool-false", "cube", vec![], member(&cxz, Term::Bool, Term::False));
    rule(cases, "bool-if", "closed",
        vec![pretype(&e, Term::Bool),
             member(&e, Term::Bool, Term::True),
             member(&e, Term::Bool, Term::False),
             member(&e, Term::Bool, Term::True)],
        member(&e, Term::Bool, ifb(Term::Bool, Term::True, Term::False, Term::True)));
    let wrapped_false = app(idf.clone(), Term::False);
    rule(cases, "bool-if", "line",
        vec![pretype(&cx, nx.clone()),
             member(&cx, Term::Bool, wrapped_false.clone()),
             member(&cx, nx.clone(), nel(x, Term::True)),
             member(&cx, nx.clone(), nel(x, Term::False))],
        member(&cx, nx.clone(),
            ifb(nx.clone(), wrapped_false.clone(), nel(x, Term::True), nel(x, Term::False))));
    rule(cases, "bool-if-true", "closed",
        vec![pretype(&e, Term::Bool),
             member(&e, Term::Bool, Term::False),
             member(&e, Term::Bool, Term::True)],
        equal(&e, Term::Bool,
            ifb(Term::Bool, Term::True, Term::False, Term::True), Term::False));
    rule(cases, "bool-if-true", "line",
        vec![pretype(&cx, nx.clone()),
             member(&cx, nx.clone(), nel(x, Term::True)),
             member(&cx, nx.clone(), nel(x, Term::False))],
        equal(&cx, nx.clone(),
            ifb(nx.clone(), Term::True, nel(x, Term::True), nel(x, Term::False)),
            nel(x, Term::True)));
    rule(cases, "bool-if-false", "closed",
        vec![pretype(&e, Term::Bool),
             member(&e, Term::Bool, Term::False),
             member(&e, Term::Bool, Term::True)],
        equal(&e, Term::Bool,
            ifb(Term::Bool, Term::False, Term::False, Term::True), Term::True));
    rule(cases, "bool-if-false", "line",
        vec![pretype(&cx, nx.clone()),
             member(&cx, nx.clone(), nel(x, Term::True)),
             member(&cx, nx.clone(), nel(x, Term::False))],
        equal(&cx, nx.clone(),
            ifb(nx.clone(), Term::False, nel(x, Term::True), nel(x, Term::False)),
            nel(x, Term::False)));

    // Circle.
    rule(cases, "circle-formation", "closed", vec![], pretype(&e, Term::Circle));
    rule(cases, "circle-formation", "cube", vec![], pretype(&cx, Term::Circle));
    rule(cases, "circle-base", "closed", vec![], member(&e, Term::Circle, Term::Base));
    rule(cases, "circle-base", "cube", vec![], member(&cx, Term::Circle, Term::Base));
    rule(cases, "circle-loop", "name",
        vec![dim_wf(&cx, x)],
        member(&cx, Term::Circle, loop_(x)));
    rule(cases, "circle-loop", "endpoint",
        vec![dim_wf(&e, Dim::Zero)],
        member(&e, Term::Circle, loop_(Dim::Zero)));
    rule(cases, "circle-loop-endpoint", "zero",
        vec![], equal(&e, Term::Circle, loop_(Dim::Zero), Term::Base));
    rule(cases, "circle-loop-endpoint", "one-cube",
        vec![], equal(&cx, Term::Circle, loop_(Dim::One), Term::Base));
    let cz = dctx(&["z"]);
    let loop_z = loop_(Dim::Name(z));
    rule(cases, "circle-elim", "constant",
        vec![pretype(&e, Term::Bool),
             member(&e, Term::Circle, Term::Base),
             member(&cz, Term::Bool, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True)],
        member(&e, Term::Bool, s1elim(Term::Bool, Term::Base, Term::True, z, Term::True)));
    
    rule(cases, "circle-elim", "loop",
        vec![pretype(&cx, Term::Circle),
             member(&cx, Term::Circle, loop_(x)),
             member(&cxz, Term::Circle, loop_z.clone()),
             equal(&cx, Term::Circle, loop_(Dim::Zero), Term::Base),
             equal(&cx, Term::Circle, loop_(Dim::One), Term::Base)],
        member(&cx, Term::Circle,
            s1elim(Term::Circle, loop_(x), Term::Base, z, loop_z.clone())));
    rule(cases, "circle-elim-base", "constant",
        vec![pretype(&e, Term::Bool),
             member(&cz, Term::Bool, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True)],
        equal(&e, Term::Bool,
            s1elim(Term::Bool, Term::Base, Term::True, z, Term::True), Term::True));
    rule(cases, "circle-elim-base", "line",
        vec![pretype(&cx, nx.clone()),
             member(&cxz, nx.clone(), nel(x, Term::True)),
             equal(&cx, nx.clone(), nel(x, Term::True), nel(x, Term::True)),
             equal(&cx, nx.clone(), nel(x, Term::True), nel(x, Term::True))],
        equal(&cx, nx.clone(),
            s1elim(nx.clone(), Term::Base, nel(x, Term::True), z, nel(x, Term::True)),
            nel(x, Term::True)));
    rule(cases, "circle-elim-loop", "name",
        vec![pretype(&cx, Term::Circle),
             dim_wf(&cx, x),
             member(&cxz, Term::Circle, loop_z.clone()),
             equal(&cx, Term::Circle, loop_(Dim::Zero), Term::Base),
             equal(&cx, Term::Circle, loop_(Dim::One), Term::Base)],
        equal(&cx, Term::Circle,
            s1elim(Term::Circle, loop_(x), Term::Base, z, loop_z.clone()),
            loop_(x)));
    rule(cases, "circle-elim-loop", "endpoint",
        vec![pretype(&e, Term::Circle),
             dim_wf(&e, Dim::Zero),
             member(&cz, Term::Circle, loop_z.clone()),
             equal(&e, Term::Circle, loop_(Dim::Zero), Term::Base),
             equal(&e, Term::Circle, loop_(Dim::One), Term::Base)],
        equal(&e, Term::Circle,
            s1elim(Term::Circle, loop_(Dim::Zero), Term::Base, z, loop_z.clone()),
            loop_(Dim::Zero)));

    // Compositions.
    let y = dn("y");
    let cy = dctx(&["y"]);
    rule(cases, "hcom-intro", "value",
        vec![pretype(&cx, Term::Bool),
             dim_wf(&cx, Dim::Zero),
             dim_wf(&cx, Dim::One),
             member(&cx, Term::Bool, Term::True),
             member(&cy, Term::Bool, Term::True),
             member(&cy, Term::Bool, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True)],
        member(&cx, Term::Bool,
            hcom(x, Term::Bool, Dim::Zero, Dim::One, Term::True, y, Term::True, Term::True)));
    rule(cases, "hcom-intro", "to-name",
        vec![pretype(&cx, Term::Circle),
             dim_wf(&cx, Dim::Zero),
             dim_wf(&cx, x),
             member(&cx, Term::Circle, Term::Base),
             member(&cy, Term::Circle, Term::Base),
             member(&cy, Term::Circle, Term::Base),
             equal(&e, Term::Circle, Term::Base, Term::Base),
             equal(&e, Term::Circle, Term::Base, Term::Base)],
        member(&cx, Term::Circle,
            hcom(x, Term::Circle, Dim::Zero, x, Term::Base, y, Term::Base, Term::Base)));
    rule(cases, "hcom-cap-collapse", "closed",
        vec![pretype(&cx, Term::Bool),
             dim_wf(&cx, Dim::Zero),
             member(&cx, Term::Bool, Term::True),
             member(&cy, Term::Bool, Term::True),
             member(&cy, Term::Bool, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True)],
        equal(&cx, Term::Bool,
            hcom(x, Term::Bool, Dim::Zero, Dim::Zero, Term::True, y, Term::True, Term::True),
            Term::True));
    rule(cases, "hcom-cap-collapse", "line",
        vec![pretype(&cx, nx.clone()),
             dim_wf(&cx, x),
             member(&cx, nx.clone(), nel(x, Term::True)),
             member(&cy, notb(Dim::Zero), nel(Dim::Zero, Term::True)),
             member(&cy, notb(Dim::One), nel(Dim::One, Term::True)),
             equal(&e, notb(Dim::Zero), nel(Dim::Zero, Term::True), nel(Dim::Zero, Term::True)),
             equal(&e, notb(Dim::One), nel(Dim::One, Term::True), nel(Dim::One, Term::True))],
        equal(&cx, nx.clone(),
            hcom(x, nx.clone(), x, x, nel(x, Term::True), y,
                nel(x, Term::True), nel(x, Term::True)),
            nel(x, Term::True)));
    rule(cases, "hcom-tube-collapse", "junk-opposite",
        vec![pretype(&e, Term::Bool),
             dim_wf(&e, Dim::Zero),
             dim_wf(&e, Dim::One),
             member(&e, Term::Bool, Term::True),
             member(&cy, Term::Bool, Term::True),
             equal(&e, Term::Bool, Term::True, Term::True)],
        equal(&e, Term::Bool,
            hcom(Dim::Zero, Term::Bool, Dim::Zero, Dim::One, Term::True, y,
                Term::True, Term::False),
            Term::True));
    rule(cases, "hcom-tube-collapse", "one-line",
        vec![pretype(&cx, Term::Circle),
             dim_wf(&cx, Dim::Zero),
             dim_wf(&cx, Dim::One),
             member(&cx, Term::Circle, Term::Base),
             member(&dctx(&["x", "y"]), Term::Circle, Term::Base),
             equal(&cx, Term::Circle, Term::Base, Term::Base)],
        equal(&cx, Term::Circle,
            hcom(Dim::One, Term::Circle, Dim::Zero, Dim::One, Term::Base, y,
                loop_(x), Term::Base),
            Term::Base));

    // Coercion.
    let nz = notb(Dim::Name(z));
    rule(cases, "coe-intro", "flip",
        vec![pretype(&cz, nz.clone()),
             dim_wf(&e, Dim::Zero),
             dim_wf(&e, Dim::One),
             member(&e, notb(Dim::Zero), Term::True)],
        member(&e, notb(Dim::One), coe(z, nz.clone(), Dim::Zero, Dim::One, Term::True)));
    rule(cases, "coe-intro", "to-name",
        vec![pretype(&cxz, Term::Bool),
             dim_wf(&cx, Dim::Zero),
             dim_wf(&cx, x),
             member(&cx, Term::Bool, Term::True)],
        member(&cx, Term::Bool, coe(z, Term::Bool, Dim::Zero, x, Term::True)));

    // The negation line.
    rule(cases, "not-formation", "line", vec![], pretype(&cx, nx.clone()));
    rule(cases, "not-formation", "cube", vec![], pretype(&cxz, nz.clone()));
    rule(cases, "not-endpoint-bool", "zero",
        vec![], pretypes_equal(&e, notb(Dim::Zero), Term::Bool));
    rule(cases, "not-endpoint-bool", "one-cube",
        vec![], pretypes_equal(&cx, notb(Dim::One), Term::Bool));
    rule(cases, "not-coe-same", "zero",
        vec![member(&e, Term::Bool, Term::True)],
        equal(&e, Term::Bool, coe(z, nz.clone(), Dim::Zero, Dim::Zero, Term::True), Term::True));
    rule(cases, "not-coe-same", "one-cube",
        vec![member(&cx, Term::Bool, wrapped_false.clone())],
        equal(&cx, Term::Bool,
            coe(z, nz.clone(), Dim::One, Dim::One, wrapped_false.clone()),
            wrapped_false.clone()));
    rule(cases, "not-coe-flip", "up",
        vec![member(&e, Term::Bool, Term::True)],
        equal(&e, Term::Bool,
            coe(z, nz.clone(), Dim::Zero, Dim::One, Term::True), expand_not(Term::True)));
    rule(cases, "not-coe-flip", "down-cube",
        vec![member(&cx, Term::Bool, Term::False)],
        equal(&cx, Term::Bool,
            coe(z, nz.clone(), Dim::One, Dim::Zero, Term::False), expand_not(Term::False)));
}

/// Builds a substitution from explicit name lists and assignments.
fn subst(source: &[&str], target: &[&str], map: &[(&str, Dim)]) -> DimSubst {
    DimSubst::new(
        dctx(source),
        dctx(target),
        map.iter().map(|&(n, d)| (dn(n), d)).collect(),
    )
    .expect("curated substitutions are total")
}

fn kan(
    cases: &mut Vec<SuiteCase>,
    case_id: &str,
    condition: u8,
    psi: DimSubst,
    x: &str,
    from: Dim,
    to: Dim,
    cap: Term,
    tube0: Term,
    tube1: Term,
    type_expr: Term,
) {
    cases.push(SuiteCase::Kan {
        case_id: case_id.to_string(),
        condition,
        instance: KanInstance {
            psi,
            x: dn(x),
            from,
            to,
            cap,
            tube_dim: dn("y"),
            tube0,
            tube1,
            type_expr,
        },
    });
}

#[rustfmt::skip]
fn kan_cases(cases: &mut Vec<SuiteCase>) {
    let x = Dim::name("x");
    let z = Dim::name("z");
    let closed_x = || subst(&[], &["x"], &[]);
    let closed_xz = || subst(&[], &["x", "z"], &[]);

    let deg = |cases: &mut Vec<SuiteCase>, id: &str, cond: u8, psi: DimSubst,
               from: Dim, to: Dim, cap: Term, ty: Term| {
        kan(cases, id, cond, psi, "x", from, to, cap.clone(), cap.clone(), cap, ty);
    };

    // Booleans.
    deg(cases, "kan-bool-1-congruence", 1, closed_x(), Dim::Zero, Dim::One,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-1-congruence-diagonal", 1, closed_x(), Dim::Zero, x,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-1-congruence-cube", 1, closed_xz(), Dim::Zero, z,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-2-cap", 2, closed_x(), Dim::Zero, Dim::Zero,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-3-face", 3, closed_x(), Dim::Zero, Dim::One,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-3-face-collapsed", 3, closed_x(), Dim::Zero, Dim::Zero,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-4-coe", 4, closed_x(), Dim::Zero, Dim::One,
        Term::True, Term::Bool);
    deg(cases, "kan-bool-4-coe-cube", 4, closed_xz(), Dim::Zero, z,
        Term::True, Term::Bool);

    // Circle.
    deg(cases, "kan-circle-1-congruence", 1, closed_x(), Dim::Zero, Dim::One,
        Term::Base, Term::Circle);
    kan(cases, "kan-circle-1-congruence-loop", 1, closed_x(), "x", Dim::Zero, Dim::One,
        Term::Base, loop_(Dim::name("y")), loop_(Dim::name("y")), Term::Circle);
    deg(cases, "kan-circle-2-cap", 2, closed_x(), Dim::Zero, Dim::Zero,
        Term::Base, Term::Circle);
    deg(cases, "kan-circle-2-cap-loop", 2, subst(&[], &["z", "x"], &[]), Dim::Zero, Dim::Zero,
        loop_(z), Term::Circle);
    deg(cases, "kan-circle-3-face", 3, closed_x(), Dim::Zero, Dim::One,
        Term::Base, Term::Circle);
    kan(cases, "kan-circle-3-face-loop", 3, closed_x(), "x", Dim::Zero, Dim::One,
        Term::Base, loop_(Dim::name("y")), loop_(Dim::name("y")), Term::Circle);
    deg(cases, "kan-circle-4-coe", 4, closed_x(), Dim::Zero, Dim::One,
        Term::Base, Term::Circle);

    // Pairs of booleans.
    let two_bools = prd(Term::Bool, Term::Bool);
    let tf = pair(Term::True, Term::False);
    deg(cases, "kan-pair-1-congruence", 1, closed_x(), Dim::Zero, Dim::One,
        tf.clone(), two_bools.clone());
    deg(cases, "kan-pair-2-cap", 2, closed_x(), Dim::Zero, Dim::Zero,
        tf.clone(), two_bools.clone());
    deg(cases, "kan-pair-3-face", 3, closed_x(), Dim::Zero, Dim::One,
        tf.clone(), two_bools.clone());
    deg(cases, "kan-pair-4-coe", 4, closed_x(), Dim::Zero, Dim::One,
        tf.clone(), two_bools.clone());

    // Functions on booleans.
    let bool_fun = arr(Term::Bool, Term::Bool);
    let idf = lam(TermVar::new("a"), Term::Var(TermVar::new("a")));
    deg(cases, "kan-fun-1-congruence", 1, closed_x(), Dim::Zero, Dim::One,
        idf.clone(), bool_fun.clone());
    deg(cases, "kan-fun-2-cap", 2, closed_x(), Dim::Zero, Dim::Zero,
        idf.clone(), bool_fun.clone());
    deg(cases, "kan-fun-3-face", 3, closed_x(), Dim::Zero, Dim::One,
        idf.clone(), bool_fun.clone());
    deg(cases, "kan-fun-4-coe", 4, closed_x(), Dim::Zero, Dim::One,
        idf.clone(), bool_fun.clone());

    // The negation line, carried into the context by the substitution.
    let not_line = notb(Dim::name("s"));
    let to_x = || subst(&["s"], &["x"], &[("s", x)]);
    deg(cases, "kan-not-1-congruence", 1, to_x(), Dim::Zero, Dim::One,
        notel(x, Term::True), not_line.clone());
    deg(cases, "kan-not-2-cap", 2, to_x(), x, x,
        notel(x, Term::True), not_line.clone());
    deg(cases, "kan-not-3-face", 3, subst(&["s"], &["z"], &[("s", z)]), Dim::Zero, Dim::One,
        notel(z, Term::True), not_line.clone());
    deg(cases, "kan-not-4-coe", 4, to_x(), Dim::Zero, Dim::One,
        Term::True, not_line.clone());
    deg(cases, "kan-not-4-coe-diagonal", 4, subst(&["s"], &["x", "z"], &[("s", x)]),
        Dim::Zero, z, Term::True, not_line.clone());
}

fn lemma_cases(cases: &mut Vec<SuiteCase>) {
    let s = dn("s");
    let contexts = [
        ("closed", dctx(&[])),
        ("line", dctx(&["z"])),
        ("square", dctx(&["z", "w"])),
    ];
    for (tag, psi) in &contexts {
        let stock = enumerate_elements(&TypeValue::Bool, psi, 1);
        for (index, m) in stock.iter().enumerate() {
            rule_owned(
                cases,
                "lemma-not-involution",
                format!("{tag}-{index:02}"),
                vec![member(psi, Term::Bool, m.clone())],
                equal(psi, Term::Bool, expand_not(expand_not(m.clone())), m.clone()),
            );
        }
    }
    let retractions = [
        ("zero", dctx(&[]), Dim::Zero),
        ("one", dctx(&["z"]), Dim::One),
        ("name", dctx(&["z"]), Dim::name("z")),
        ("square", dctx(&["z", "w"]), Dim::name("z")),
    ];
    for (tag, psi, r) in &retractions {
        let line_at_r = notb(*r);
        let Ok(elem_ty) = eval_type(&line_at_r, DEFAULT_FUEL) else {
            continue;
        };
        for (index, m) in enumerate_elements(&elem_ty, psi, 1).iter().enumerate() {
            let back = notel(*r, coe(s, notb(Dim::Name(s)), *r, Dim::One, m.clone()));
            rule_owned(
                cases,
                "lemma-not-retraction",
                format!("{tag}-{index:02}"),
                vec![member(psi, line_at_r.clone(), m.clone())],
                equal(psi, line_at_r.clone(), back, m.clone()),
            );
        }
    }
}

fn rule_owned(
    cases: &mut Vec<SuiteCase>,
    rule_id: &'static str,
    suffix: String,
    premises: Vec<Judgment>,
    conclusion: Judgment,
) {
    cases.push(SuiteCase::Rule(RuleCase {
        rule_id,
        case_id: format!("{rule_id}/{suffix}"),
        premises,
        conclusion,
    }));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opsem::{disable_rule, KnockoutRule};

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    fn bool_instance(from: Dim, to: Dim, cap: Term, tube: Term) -> KanInstance {
        KanInstance {
            psi: subst(&[], &["x"], &[]),
            x: dn("x"),
            from,
            to,
            cap,
            tube_dim: dn("y"),
            tube0: tube.clone(),
            tube1: tube,
            type_expr: Term::Bool,
        }
    }

    #[test]
    fn manifest_lists_every_case_in_order() {
        let ids: Vec<String> = suite()
            .iter()
            .map(|c| c.case_id().to_string())
            .collect();
        let expected = ids.join("\n") + "\n";
        if std::env::var("UPDATE_GOLDENS").is_ok() {
            let path = concat!(env!("CARGO_MANIFEST_DIR"), "/suite_manifest.txt");
            std::fs::write(path, &expected).expect("rewrite the manifest");
            return;
        }
        assert_eq!(
            MANIFEST, expected,
            "suite_manifest.txt is stale; rerun with UPDATE_GOLDENS=1"
        );
    }

    #[test]
    fn case_ids_are_unique_and_sorted() {
        let cases = suite();
        for pair in cases.windows(2) {
            assert!(
                pair[0].case_id() < pair[1].case_id(),
                "{} does not precede {}",
                pair[0].case_id(),
                pair[1].case_id()
            );
        }
    }

    #[test]
    fn every_rule_has_two_cases_and_a_cubical_one() {
        let mut by_rule: std::collections::BTreeMap<&str, (usize, bool)> =
            std::collections::BTreeMap::new();
        for case in suite() {
            if let SuiteCase::Rule(rule_case) = case {
                let entry = by_rule.entry(rule_case.rule_id).or_insert((0, false));
                entry.0 += 1;
                let ctx = match &rule_case.conclusion {
                    Judgment::EqTm { psi, .. } => psi.clone(),
                    Judgment::EqPretype { psi, .. } => psi.clone(),
                    Judgment::WfDim { psi, .. } => psi.clone(),
                };
                entry.1 |= !ctx.is_empty();
            }
        }
        for (rule_id, (count, cubical)) in by_rule {
            assert!(count >= 2, "{rule_id} has {count} case(s)");
            assert!(cubical, "{rule_id} has no case over a nonempty context");
        }
    }

    #[test]
    fn curated_kan_cases_cover_all_conditions_and_types() {
        let ids: Vec<String> = suite()
            .iter()
            .filter(|c| matches!(c, SuiteCase::Kan { .. }))
            .map(|c| c.case_id().to_string())
            .collect();
        for ty in ["bool", "circle", "pair", "fun", "not"] {
            for cond in 1..=4 {
                let prefix = format!("kan-{ty}-{cond}");
                assert!(
                    ids.iter().any(|id| id.starts_with(&prefix)),
                    "no case for {prefix}"
                );
            }
        }
    }

    #[test]
    fn lemma_cases_cover_every_endpoint_shape() {
        let ids: Vec<String> = suite().iter().map(|c| c.case_id().to_string()).collect();
        for prefix in [
            "lemma-not-retraction/zero",
            "lemma-not-retraction/one",
            "lemma-not-retraction/name",
            "lemma-not-retraction/square",
            "lemma-not-involution/closed",
            "lemma-not-involution/line",
            "lemma-not-involution/square",
        ] {
            assert!(
                ids.iter().any(|id| id.starts_with(prefix)),
                "no case starting with {prefix}"
            );
        }
    }

    #[test]
    fn cap_collapse_holds_for_a_degenerate_boolean_instance() {
        let inst = bool_instance(Dim::Zero, Dim::Zero, Term::True, Term::True);
        let report = check_kan(2, &inst, &cfg());
        assert!(report.holds(), "{report}");
    }

    #[test]
    fn constant_extents_collapse_to_the_tube_face() {
        let inst = bool_instance(Dim::Zero, Dim::One, Term::True, Term::True);
        let report = check_kan(3, &inst, &cfg());
        assert!(report.holds(), "{report}");
    }

    #[test]
    fn negation_coercion_respects_equal_arguments() {
        let inst = KanInstance {
            psi: subst(&["s"], &["x"], &[("s", Dim::name("x"))]),
            x: dn("x"),
            from: Dim::Zero,
            to: Dim::One,
            cap: Term::True,
            tube_dim: dn("y"),
            tube0: Term::True,
            tube1: Term::True,
            type_expr: notb(Dim::name("s")),
        };
        let report = check_kan(4, &inst, &cfg());
        assert!(report.holds(), "{report}");
        let flipped = coe(
            dn("x"),
            notb(Dim::name("x")),
            Dim::Zero,
            Dim::One,
            Term::True,
        );
        let direct = ceqtm(
            &Term::Bool,
            &flipped,
            &expand_not(Term::True),
            &dctx(&[]),
            &cfg(),
        );
        assert!(direct.holds(), "{direct}");
    }

    #[test]
    fn broken_adjacency_is_reported_as_a_hypothesis_failure() {
        let inst = bool_instance(Dim::Zero, Dim::Zero, Term::True, Term::False);
        let report = check_kan(2, &inst, &cfg());
        assert!(report.fails());
        let clause = &report.witness.as_ref().expect("witness").clause;
        assert!(
            clause.starts_with("hypothesis: adjacency"),
            "unexpected clause {clause}"
        );
        let case = SuiteCase::Kan {
            case_id: "broken".into(),
            condition: 2,
            instance: bool_instance(Dim::Zero, Dim::Zero, Term::True, Term::False),
        };
        assert_eq!(case.run(&cfg()).outcome, CaseOutcome::Vacuous);
    }

    #[test]
    fn conclusion_failures_are_violations() {
        let _guard = disable_rule(KnockoutRule::CoeBool);
        let inst = bool_instance(Dim::Zero, Dim::One, Term::True, Term::True);
        let report = check_kan(4, &inst, &cfg());
        assert!(report.fails());
        let clause = &report.witness.as_ref().expect("witness").clause;
        assert!(clause.starts_with("conclusion"), "unexpected clause {clause}");
        let case = SuiteCase::Kan {
            case_id: "mutated".into(),
            condition: 4,
            instance: bool_instance(Dim::Zero, Dim::One, Term::True, Term::True),
        };
        assert_eq!(case.run(&cfg()).outcome, CaseOutcome::Violated);
    }

    #[test]
    fn rule_checks_distinguish_vacuous_from_sound() {
        let e = dctx(&[]);
        let beta = RuleCase {
            rule_id: "function-beta",
            case_id: "function-beta/test".into(),
            premises: vec![member(&e, Term::Bool, Term::True)],
            conclusion: equal(
                &e,
                Term::Bool,
                app(lam(tv("a"), Term::Var(tv("a"))), Term::True),
                Term::True,
            ),
        };
        assert_eq!(run_rule(&beta, &cfg()).outcome, CaseOutcome::Sound);
        let vacuous = RuleCase {
            rule_id: "bool-true",
            case_id: "bool-true/test".into(),
            premises: vec![member(&e, Term::Bool, Term::Base)],
            conclusion: member(&e, Term::Bool, Term::True),
        };
        let result = run_rule(&vacuous, &cfg());
        assert_eq!(result.outcome, CaseOutcome::Vacuous);
        let clause = &result
            .detail
            .as_ref()
            .and_then(|r| r.witness.as_ref())
            .expect("witness")
            .clause;
        assert!(clause.starts_with("premise 1"), "unexpected clause {clause}");
    }

    #[test]
    fn circle_computation_sends_the_loop_through_the_motive() {
        let cx = dctx(&["x"]);
        let z = dn("z");
        let case = RuleCase {
            rule_id: "circle-elim-loop",
            case_id: "circle-elim-loop/test".into(),
            premises: vec![
                member(&dctx(&["x", "z"]), Term::Circle, loop_(Dim::Name(z))),
                equal(&cx, Term::Circle, loop_(Dim::Zero), Term::Base),
                equal(&cx, Term::Circle, loop_(Dim::One), Term::Base),
            ],
            conclusion: equal(
                &cx,
                Term::Circle,
                s1elim(
                    Term::Circle,
                    loop_(Dim::name("x")),
                    Term::Base,
                    z,
                    loop_(Dim::Name(z)),
                ),
                loop_(Dim::name("x")),
            ),
        };
        assert_eq!(run_rule(&case, &cfg()).outcome, CaseOutcome::Sound);
    }

    #[test]
    fn dimension_judgments_check_scope() {
        assert!(dim_wf(&dctx(&["x"]), Dim::name("x")).check(&cfg()).holds());
        assert!(dim_wf(&dctx(&[]), Dim::name("x")).check(&cfg()).fails());
        assert!(dim_wf(&dctx(&[]), Dim::Zero).check(&cfg()).holds());
    }

    #[test]
    fn full_suite_is_sound_on_the_stock_evaluator() {
        let summary = run_suite(&cfg());
        assert!(summary.passed(), "{summary}");
        assert_eq!(summary.sound, summary.results.len());
    }

    #[test]
    fn a_knocked_out_rule_fails_the_suite() {
        let _guard = disable_rule(KnockoutRule::HcomBoolFace);
        let summary = run_suite(&cfg());
        assert!(!summary.passed());
    }
}
