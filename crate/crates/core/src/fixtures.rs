//! Small named G-sets used by tests, the CLI and the verification harness.

use crate::group::{Group, GroupSpec};
use crate::gset::GSet;

/// `Z_2` acting on `{0,1,2,3}`: the generator fixes 0 and 3 and swaps 1 and 2.
pub fn example1() -> GSet {
    let group = Group::named(&GroupSpec::Cyclic(2)).expect("Z_2");
    let action = vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3]];
    GSet::new(group, (0..4).map(|i| i.to_string()).collect(), action).expect("valid action")
}

/// True if `x` is [`example1`] up to identical tables and names.
pub fn is_example1(x: &GSet) -> bool {
    let e = example1();
    x.group() == e.group() && x.action_table() == e.action_table() && x.point_names() == e.point_names()
}
