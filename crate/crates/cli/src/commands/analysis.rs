use std::collections::HashMap;
use std::fs::File;

use hypergrid_core::evaluation::{compare as compare_sets, format_comparison, read_results, RankScore, ResultSet};
use hypergrid_core::network::gradcheck::{analytic_gradient, canonical_problem, compare_gradients, numeric_gradient};

use crate::error::{CliError, CliResult, VERIFICATION};
use crate::{CompareArgs, GradcheckArgs};

pub fn compare(a: CompareArgs) -> CliResult {
    let by: RankScore = a.by.parse()?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut sets = Vec::new();
    for path in &a.results {
        let file = File::open(path).map_err(|e| CliError::new(crate::error::IO, format!("{}: {e}", path.display())))?;
        let rows = read_results(file)?;
        let base = rows.first().map_or_else(|| path.display().to_string(), |r| r.method.clone());
        let n = seen.entry(base.clone()).or_default();
        *n += 1;
        let name = if *n == 1 { base } else { format!("{base}#{n}") };
        sets.push(ResultSet { name, rows });
    }
    let c = compare_sets(&sets, by)?;
    print!("{}", format_comparison(&c));
    Ok(())
}

pub fn gradcheck(a: GradcheckArgs) -> CliResult {
    let (cfg, params, patch, target) = canonical_problem(a.seed)?;
    let mut analytic = analytic_gradient(&params, &cfg, &patch, target)?;
    if a.corrupt_backward {
        let mut blocks = analytic.blocks_mut();
        let g = &mut blocks[2].data_mut()[5];
        *g = *g * 1.5 + 0.1;
    }
    let numeric = numeric_gradient(&params, &cfg, &patch, target, a.eps)?;
    let r = compare_gradients(&analytic, &numeric)?;
    println!("parameters checked: {}", r.checked);
    println!("max relative error: {:.3e}", r.max_relative_error);
    println!(
        "worst coordinate: block {} offset {} (analytic {:.9e}, numeric {:.9e})",
        r.worst_block, r.worst_offset, r.worst_analytic, r.worst_numeric
    );
    if r.passed(a.tolerance) {
        println!("PASS (tolerance {:.0e})", a.tolerance);
        Ok(())
    } else {
        println!("FAIL (tolerance {:.0e})", a.tolerance);
        Err(CliError::new(VERIFICATION, format!("gradient check failed: {:.3e} >= {:.0e}", r.max_relative_error, a.tolerance)))
    }
}
