//! One-step golden vectors: every reduction rule of the evaluator, with the
//! expected successor written out by hand.

use cubecheck::frontend::{parse, print};
use cubecheck::opsem::{is_val, step, StepResult};

/// (rule, input, expected successor after exactly one step).
const VECTORS: &[(&str, &str, &str)] = &[
    // Type formation steps.
    ("notb-zero", "(notb 0)", "bool"),
    ("notb-one", "(notb 1)", "bool"),
    // Congruence on the type subscripts of coe and hcom.
    (
        "coe-type-step",
        "(coe [x (notb 0)] 0 1 true)",
        "(coe [x bool] 0 1 true)",
    ),
    (
        "hcom-type-step",
        "(hcom x (notb 1) 0 1 true [y true] [y true])",
        "(hcom x bool 0 1 true [y true] [y true])",
    ),
    // Function types.
    (
        "app-fn-step",
        "(app (fst (pair (lam [a a]) true)) false)",
        "(app (lam [a a]) false)",
    ),
    ("app-beta", "(app (lam [a (pair a a)]) true)", "(pair true true)"),
    (
        "hcom-arrow",
        "(hcom x (arr bool bool) 0 1 (lam [a a]) [y (lam [a true])] [y (lam [a false])])",
        "(lam [a (hcom x bool 0 1 (app (lam [a a]) a) \
         [y (app (lam [a true]) a)] [y (app (lam [a false]) a)])])",
    ),
    (
        "coe-arrow",
        "(coe [x (arr bool bool)] 0 1 (lam [a a]))",
        "(lam [a (coe [x bool] 0 1 (app (lam [a a]) (coe [x bool] 1 0 a)))])",
    ),
    // Product types.
    (
        "fst-step",
        "(fst (snd (pair true (pair false base))))",
        "(fst (pair false base))",
    ),
    (
        "snd-step",
        "(snd (snd (pair true (pair false base))))",
        "(snd (pair false base))",
    ),
    ("fst-pair", "(fst (pair true base))", "true"),
    ("snd-pair", "(snd (pair true base))", "base"),
    (
        "hcom-product",
        "(hcom x (prd bool S1) 0 1 (pair true base) [y (pair true base)] [y (pair false base)])",
        "(pair (hcom x bool 0 1 (fst (pair true base)) \
         [y (fst (pair true base))] [y (fst (pair false base))]) \
         (hcom x S1 0 1 (snd (pair true base)) \
         [y (snd (pair true base))] [y (snd (pair false base))]))",
    ),
    (
        "coe-product",
        "(coe [x (prd bool (notb x))] 0 1 (pair true (notel 0 true)))",
        "(pair (coe [x bool] 0 1 (fst (pair true (notel 0 true)))) \
         (coe [x (notb x)] 0 1 (snd (pair true (notel 0 true)))))",
    ),
    // Booleans. The zero-extent vector keeps the tube dimension free in the
    // tube so the substitution of the ending dimension is visible.
    (
        "hcom-bool-tube-zero",
        "(hcom 0 bool 0 1 true [y (hcom y bool 0 1 true [z true] [z true])] [y true])",
        "(hcom 1 bool 0 1 true [z true] [z true])",
    ),
    (
        "hcom-bool-tube-one",
        "(hcom 1 bool 0 1 true [y true] [y false])",
        "false",
    ),
    (
        "hcom-bool-cap",
        "(hcom x bool 1 1 true [y false] [y false])",
        "true",
    ),
    (
        "if-scrutinee-step",
        "(if bool (fst (pair true false)) false true)",
        "(if bool true false true)",
    ),
    ("if-true", "(if bool true false true)", "false"),
    ("if-false", "(if bool false false true)", "true"),
    (
        "if-hcom-commute",
        "(if bool (hcom x bool 0 1 true [y true] [y false]) false true)",
        "(hcom x bool 0 1 (if bool true false true) \
         [y (if bool true false true)] [y (if bool false false true)])",
    ),
    ("coe-bool", "(coe [x bool] 0 1 true)", "true"),
    // Circle.
    (
        "hcom-circle-tube-zero",
        "(hcom 0 S1 0 1 base [y (loop y)] [y base])",
        "(loop 1)",
    ),
    (
        "hcom-circle-tube-one",
        "(hcom 1 S1 0 1 base [y base] [y (loop y)])",
        "(loop 1)",
    ),
    (
        "hcom-circle-cap",
        "(hcom x S1 0 0 (loop x) [y base] [y base])",
        "(loop x)",
    ),
    ("loop-zero", "(loop 0)", "base"),
    ("loop-one", "(loop 1)", "base"),
    (
        "s1elim-scrutinee-step",
        "(S1-elim bool (fst (pair base base)) true [z true])",
        "(S1-elim bool base true [z true])",
    ),
    ("s1elim-base", "(S1-elim bool base true [z false])", "true"),
    (
        "s1elim-loop",
        "(S1-elim S1 (loop x) base [z (loop z)])",
        "(loop x)",
    ),
    (
        "s1elim-hcom-commute",
        "(S1-elim bool (hcom x S1 0 1 base [y base] [y (loop y)]) true [z false])",
        "(hcom x bool 0 1 (S1-elim bool base true [z false]) \
         [y (S1-elim bool base true [z false])] \
         [y (S1-elim bool (loop y) true [z false])])",
    ),
    ("coe-circle", "(coe [x S1] 0 1 base)", "base"),
    // Negation lines. not(M) is shorthand for (if bool M false true).
    ("notel-zero", "(notel 0 true)", "(if bool true false true)"),
    ("notel-one", "(notel 1 true)", "true"),
    (
        "coe-not-flip",
        "(coe [x (notb x)] 0 1 true)",
        "(if bool true false true)",
    ),
    (
        "coe-not-flip-rev",
        "(coe [x (notb x)] 1 0 false)",
        "(if bool false false true)",
    ),
    ("coe-not-fixed-zero", "(coe [x (notb x)] 0 0 true)", "true"),
    ("coe-not-fixed-one", "(coe [x (notb x)] 1 1 false)", "false"),
    (
        "coe-not-into-name-from-zero",
        "(coe [x (notb x)] 0 y true)",
        "(notel y (if bool true false true))",
    ),
    (
        "coe-not-into-name-from-one",
        "(coe [x (notb x)] 1 y false)",
        "(notel y false)",
    ),
    (
        "coe-not-arg-step",
        "(coe [x (notb x)] y 1 (notel 1 true))",
        "(coe [x (notb x)] y 1 true)",
    ),
    (
        "coe-not-from-name",
        "(coe [x (notb x)] y 0 (notel y true))",
        "(notel 0 true)",
    ),
    (
        "coe-not-constant-line",
        "(coe [x (notb y)] 0 1 (notel y true))",
        "(notel y true)",
    ),
    (
        "hcom-not",
        "(hcom 0 (notb w) 0 1 (notel w true) [y (notel w true)] [y (notel w false)])",
        "(notel w (hcom 0 bool 0 1 (coe [x (notb x)] w 1 (notel w true)) \
         [y (coe [x (notb x)] w 1 (notel w true))] \
         [y (coe [x (notb x)] w 1 (notel w false))]))",
    ),
];

/// The weak-head value forms; none of them may step.
const VALUE_FORMS: &[&str] = &[
    "(arr bool S1)",
    "(prd bool S1)",
    "bool",
    "(notb x)",
    "S1",
    "(lam [a a])",
    "(pair true base)",
    "true",
    "false",
    "base",
    "(loop x)",
    "(notel x true)",
    "(hcom x bool 0 1 true [y true] [y false])",
    "(hcom x S1 0 1 base [y base] [y base])",
];

fn step_once(source: &str) -> cubecheck::syntax::Term {
    let term = parse(source).unwrap_or_else(|e| panic!("{source}: {e}"));
    match step(&term) {
        StepResult::Stepped(next) => next,
        other => panic!("{source}: expected a step, got {other:?}"),
    }
}

#[test]
fn every_rule_steps_to_its_expected_successor() {
    for (rule, input, expected) in VECTORS {
        let actual = step_once(input);
        let want = parse(expected).unwrap_or_else(|e| panic!("{rule}: {e}"));
        assert!(
            actual.alpha_eq(&want),
            "{rule}: {input}\n  stepped to {}\n  expected  {expected}",
            print(&actual)
        );
    }
}

#[test]
fn rule_names_are_unique() {
    let mut seen = std::collections::BTreeSet::new();
    for (rule, _, _) in VECTORS {
        assert!(seen.insert(rule), "duplicate rule name {rule}");
    }
}

#[test]
fn value_forms_do_not_step() {
    for source in VALUE_FORMS {
        let term = parse(source).unwrap_or_else(|e| panic!("{source}: {e}"));
        assert!(is_val(&term), "{source} is not recognized as a value");
        assert_eq!(
            step(&term),
            StepResult::IsValue,
            "{source} stepped but is a value"
        );
    }
}

#[test]
fn golden_table_matches_the_checked_in_rendering() {
    let mut rendered = String::new();
    for (rule, input, _) in VECTORS {
        let actual = step_once(input);
        rendered.push_str(&format!("{rule}: {input} ==> {}\n", print(&actual)));
    }
    if std::env::var("UPDATE_GOLDENS").is_ok() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/step_goldens.txt");
        std::fs::write(path, &rendered).expect("rewrite the goldens");
        return;
    }
    assert_eq!(
        include_str!("step_goldens.txt"),
        rendered,
        "step_goldens.txt is stale; rerun with UPDATE_GOLDENS=1"
    );
}
