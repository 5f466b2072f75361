//! Descriptive statistics, Pearson correlation and one-way ANOVA.

use wordassoc::stats::{describe, f_cdf, one_way_anova, pearson};

fn main() -> anyhow::Result<()> {
    let d = describe(&[1.0, 2.0, 3.0, 4.0, 5.0])?;
    println!("n {} mean {} sd {:.4} quartiles ({}, {}, {})", d.n, d.mean, d.sd, d.q1, d.median, d.q3);

    let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0])?;
    println!("r = {:.3}, p = {:.4}, n = {}", r.r, r.p, r.n);

    let a = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0], vec![3.0, 4.0, 5.0]])?;
    println!("F({}, {}) = {}, p = {:.4}, eta2 = {}", a.df_between, a.df_within, a.f, a.p, a.eta_squared);
    println!("F cdf at the median of F(5, 5): {:.6}", f_cdf(1.0, 5.0, 5.0)?);
    Ok(())
}
