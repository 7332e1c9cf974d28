//! Shared inputs for the criterion benchmarks.

use std::sync::Arc;

use bidisk_core::parser;
use bidisk_core::series::Series;
use bidisk_core::VarContext;

pub const QUADRIC: &str = "abs2(z1)+abs2(z2)-abs2(z3)-abs2(z4)";
pub const CUBIC: &str = "abs2(z1)+abs2(z2)-abs2(z3)-abs2(z4)+abs2(z1)*(z1+conj(z1))";
pub const BLOCK: &str =
    "abs2(z1)+abs2(z2)-abs2(z3)-abs2(z4)+z1^2*conj(z1)*conj(z2)+conj(z1)^2*z1*z2";

pub fn series(text: &str, ctx: &Arc<VarContext>) -> Series {
    let e = parser::parse(text).expect("benchmark input parses");
    parser::to_series(&e, ctx).expect("benchmark input lowers")
}
