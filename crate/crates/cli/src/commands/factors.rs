use qnrate_core::rate::precise_factors;

use super::{finish, Report};
use crate::cli::FactorsArgs;
use crate::config::Settings;
use crate::error::Result;
use crate::output::{fmt_num, Table};

pub const HEADER: [&str; 5] = ["k", "r_k", "r_star", "abs_gap", "envelope"];

/// Rows `(k, r_k, r_*, |r_k − r_*|, (1/2)^k |r_0 − r_*|)` for `k = 0 … k_max`.
/// Columns are computed in extended precision and rounded once, so
/// `abs_gap ≤ envelope` can be read off every row.
pub fn factors_table(q: u32, k_max: usize) -> Result<Table> {
    let f = precise_factors(q, k_max)?;
    let mut table = Table::new(&HEADER);
    for k in 0..=k_max {
        table.push(vec![
            k.to_string(),
            fmt_num(f.factors[k]),
            fmt_num(f.fixed_point),
            fmt_num(f.gaps[k]),
            fmt_num(f.envelopes[k]),
        ]);
    }
    Ok(table)
}

pub fn run(args: &FactorsArgs, mut s: Settings) -> Result<Report> {
    let q = s.value("q", args.q, 4u32)?;
    let k_max = s.value("k-max", args.k_max, 30usize)?;
    let out = s.out_path(args.out.clone(), &format!("factors_q{q}.csv"))?;
    let table = factors_table(q, k_max)?;
    finish(&s, &table, &out, Vec::new())
}
