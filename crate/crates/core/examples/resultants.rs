//! Sylvester matrices, determinants and resultants on small inputs.

use ideal_elim::resultant::{det_bareiss, det_cofactor, resultant_with, sylvester, Method};
use ideal_elim::{Limits, Poly, VarSet};

fn main() {
    let vars = VarSet::aux(&["x", "y"]);
    let x = vars.find("x").unwrap();
    let f = Poly::parse("x^2 + -1*y", &vars).unwrap();
    let g = Poly::parse("x^3 + x + -2", &vars).unwrap();

    let syl = sylvester(&f, &g, x).unwrap();
    println!("Sylvester matrix of f = {f} and g = {g} in x ({}x{}):", syl.size(), syl.size());
    for row in &syl.entries {
        let cells: Vec<String> = row.iter().map(|p| format!("{:>6}", p.to_string())).collect();
        println!("  [{}]", cells.join(" "));
    }
    let limits = Limits::default();
    let a = det_cofactor(&syl.entries, &vars);
    let b = det_bareiss(&syl.entries, &vars, &limits).unwrap();
    println!("cofactor expansion: {a}");
    println!("Bareiss:            {b}");

    for (name, m) in [("direct", Method::Direct), ("modular", Method::Modular), ("auto", Method::Auto)] {
        let r = resultant_with(&f, &g, x, m, &limits).unwrap();
        println!("Res_x via {name:<8} {r}");
    }

    // A shared root makes the resultant vanish.
    let p = Poly::parse("x^2 + -3*x + 2", &vars).unwrap();
    let q = Poly::parse("x^2 + -1", &vars).unwrap();
    println!("Res_x((x-1)(x-2), (x-1)(x+1)) = {}", resultant_with(&p, &q, x, Method::Auto, &limits).unwrap());
}
