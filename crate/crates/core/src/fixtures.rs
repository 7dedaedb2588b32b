//! Corpus files compiled into the unit tests.

pub const WHILE_LOOP: &str = include_str!("../../../corpus/activity/while_loop.act");
pub const LOOP_WITH_BRANCH: &str = include_str!("../../../corpus/activity/loop_with_branch.act");

pub const ACTIVITIES: &[(&str, &str)] = &[
    ("dowhile.act", include_str!("../../../corpus/activity/dowhile.act")),
    ("empty.act", include_str!("../../../corpus/activity/empty.act")),
    ("guarded_step.act", include_str!("../../../corpus/activity/guarded_step.act")),
    ("loop_with_branch.act", include_str!("../../../corpus/activity/loop_with_branch.act")),
    ("loopnode.act", include_str!("../../../corpus/activity/loopnode.act")),
    ("number_machine.act", include_str!("../../../corpus/activity/number_machine.act")),
    ("parallel.act", include_str!("../../../corpus/activity/parallel.act")),
    ("sequential.act", include_str!("../../../corpus/activity/sequential.act")),
    ("while_loop.act", include_str!("../../../corpus/activity/while_loop.act")),
];

pub const SEQUENCES: &[(&str, &str)] = &[
    ("guarded_step.seq", include_str!("../../../corpus/sequence/guarded_step.seq")),
    ("loop_with_branch.seq", include_str!("../../../corpus/sequence/loop_with_branch.seq")),
    ("parallel.seq", include_str!("../../../corpus/sequence/parallel.seq")),
    ("while_loop.seq", include_str!("../../../corpus/sequence/while_loop.seq")),
];

pub const MUTATIONS: &[(&str, &str)] = &[
    ("m01_while_loop.act", include_str!("../../../corpus/mutations/m01_while_loop.act")),
    ("m02_loop_with_branch.act", include_str!("../../../corpus/mutations/m02_loop_with_branch.act")),
    ("m03_dowhile.act", include_str!("../../../corpus/mutations/m03_dowhile.act")),
    ("m04_sequential.act", include_str!("../../../corpus/mutations/m04_sequential.act")),
    ("m05_number_machine.act", include_str!("../../../corpus/mutations/m05_number_machine.act")),
    ("m06_while_loop.act", include_str!("../../../corpus/mutations/m06_while_loop.act")),
    ("m07_while_loop.act", include_str!("../../../corpus/mutations/m07_while_loop.act")),
    ("m08_loop_with_branch.act", include_str!("../../../corpus/mutations/m08_loop_with_branch.act")),
    ("m09_dowhile.act", include_str!("../../../corpus/mutations/m09_dowhile.act")),
    ("m10_guarded_step.act", include_str!("../../../corpus/mutations/m10_guarded_step.act")),
    ("m11_sequential.act", include_str!("../../../corpus/mutations/m11_sequential.act")),
    ("m12_while_loop.act", include_str!("../../../corpus/mutations/m12_while_loop.act")),
    ("m13_loop_with_branch.act", include_str!("../../../corpus/mutations/m13_loop_with_branch.act")),
    ("m14_number_machine.act", include_str!("../../../corpus/mutations/m14_number_machine.act")),
    ("m15_parallel.act", include_str!("../../../corpus/mutations/m15_parallel.act")),
    ("m16_while_loop.act", include_str!("../../../corpus/mutations/m16_while_loop.act")),
    ("m17_loop_with_branch.act", include_str!("../../../corpus/mutations/m17_loop_with_branch.act")),
    ("m18_loop_with_branch.act", include_str!("../../../corpus/mutations/m18_loop_with_branch.act")),
    ("m19_number_machine.act", include_str!("../../../corpus/mutations/m19_number_machine.act")),
    ("m20_dowhile.act", include_str!("../../../corpus/mutations/m20_dowhile.act")),
];

pub const RUBRICS: &[(&str, &str)] = &[
    ("forbidden.rub", include_str!("../../../corpus/rubric/forbidden.rub")),
    ("multiplicity.rub", include_str!("../../../corpus/rubric/multiplicity.rub")),
    ("relationship.rub", include_str!("../../../corpus/rubric/relationship.rub")),
    ("sequence_drawing.rub", include_str!("../../../corpus/rubric/sequence_drawing.rub")),
    ("while_diagram.rub", include_str!("../../../corpus/rubric/while_diagram.rub")),
];
