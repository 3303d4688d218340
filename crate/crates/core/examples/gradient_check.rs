//! Finite-difference check of every autodiff op and of a tiny model.

use contextualizer::checks::{end_to_end_gradient_check, op_gradient_checks};
use contextualizer::model::DefaultContext;

fn main() -> contextualizer::Result<()> {
    for c in op_gradient_checks(1)? {
        println!("{:<24} {:.2e} over {} entries", c.name, c.max_rel_error, c.entries);
    }
    for (rec, dc) in [(true, DefaultContext::Learned), (false, DefaultContext::Random)] {
        let c = end_to_end_gradient_check(3, 6, 2, 2, rec, dc, 1)?;
        println!(
            "model n=3 m=6 u=2 K=2 recurrent={rec} default={dc}: {:.2e} over {} entries",
            c.max_rel_error, c.entries
        );
    }
    Ok(())
}
