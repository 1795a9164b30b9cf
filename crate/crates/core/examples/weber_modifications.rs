//! Writes the table of `zeta_48^k f2^e` class invariants by `D mod 192`.
//!
//! Usage: `cargo run --release --example weber_modifications > docs/weber_modifications.md`

use std::collections::BTreeMap;

use ccf::quadforms::Discriminant;
use ccf::shimura::{find_modification, FunctionSymbol, Weber};

fn main() {
    let f2 = FunctionSymbol::weber(Weber::F2);
    let mut first: BTreeMap<i64, i64> = BTreeMap::new();
    for n in 3..4000 {
        let d = -n;
        if Discriminant::new(d).is_ok_and(|x| x.is_fundamental()) {
            first.entry(d.rem_euclid(192)).or_insert(d);
        }
    }
    println!("# Modifications of f2 that are class invariants\n");
    println!("For each class of `D mod 192` met by a fundamental discriminant, the");
    println!("first `zeta48^k * f2^e` (smallest `e`, then `k`) whose value at");
    println!("`tau = (-B + sqrt D)/2` is fixed by every `g_tau(x)`, checked at the");
    println!("smallest `|D|` in the class. Generated by `examples/weber_modifications.rs`.\n");
    println!("| D mod 192 | D | modification |");
    println!("|---|---|---|");
    for (r, d) in first {
        let cell = match find_modification(&f2, d).expect("search") {
            Some((f, _)) => format!("`{f}`"),
            None => "none with e <= 24".to_string(),
        };
        println!("| {r} | {d} | {cell} |");
    }
}
