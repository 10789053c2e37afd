//! Generated rule files.

use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// A chain of constants `c0 … ck`. `cn` terminates with weight
/// `1/(2ⁿ+2)` and otherwise moves to `c(n+1)` with label `a`; `ck` keeps
/// only its termination rule.
pub fn leaky_chain(k: u32) -> String {
    let mut out = String::new();
    writeln!(out, "# Constants c0 … c{k}: cn stops with weight 1/(2^n+2)").unwrap();
    writeln!(out, "# and otherwise steps to c(n+1). Generated for k = {k}.").unwrap();
    out.push_str("dialect weighted\nsemiring rational\nlabels a\n\n");
    for n in 0..=k {
        writeln!(out, "op c{n} : 0").unwrap();
    }
    out.push('\n');
    for n in 0..=k {
        let stop = BigRational::new(BigInt::one(), BigInt::from(2).pow(n) + 2);
        writeln!(out, "rule c{n} -[{stop}]-> *").unwrap();
        if n < k {
            let go = BigRational::one() - &stop;
            writeln!(out, "rule c{n} -a[{go}]-> c{}", n + 1).unwrap();
        }
    }
    out
}
