use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use ccf::arith::kronecker;
use ccf::cmcurve::{division_poly, division_poly_int, ray_class_poly, QuadIntPolyK};
use ccf::hilbert::{cornacchia, hilbert_class_poly, is_good_prime, split_check, SplitVerdict};
use ccf::modfunc;
use ccf::numerics::{BigComplex, IntPoly, PrecisionCtx, RetryPolicy};
use ccf::quadforms::{class_group, enumerate_reduced_forms, tau_of_form, QuadForm};
use ccf::rayclass::{conductor_of, discriminant_by_characters, ray_class_group};
use ccf::shimura::{class_invariant_poly, find_modification, is_class_invariant, FunctionSymbol, InvariantPoly, StabilizerReport};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::args::Command;
use crate::error::{CliError, Result};
use crate::input::{complex_strings, parse_complex, parse_disc, parse_form, parse_spec, parse_subgroup, DiscInput};

/// Default precision for `eval` when neither `--bits` nor the environment sets one.
pub const DEFAULT_EVAL_BITS: u32 = 128;

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Report {
    pub outputs: Value,
    pub bits: Option<u32>,
    /// Named phase timings in microseconds, besides the total.
    pub timings: BTreeMap<String, u64>,
    pub text: String,
}

/// Precision settings shared by all subcommands.
#[derive(Clone, Copy, Debug)]
pub struct Precision {
    pub start: Option<u32>,
    pub max: Option<u32>,
}

impl Precision {
    fn policy(&self) -> RetryPolicy {
        let mut p = RetryPolicy { start_bits: self.start, ..Default::default() };
        if let Some(m) = self.max {
            p.max_bits = m;
        }
        p
    }

    fn fixed(&self, default: u32) -> Result<PrecisionCtx> {
        let bits = self.start.unwrap_or(default);
        if let Some(cap) = self.max.filter(|&c| bits > c) {
            return Err(ccf::Error::PrecisionExhausted { bits, cap }.into());
        }
        Ok(PrecisionCtx::new(bits)?)
    }
}

fn form_json(f: &QuadForm) -> Value {
    json!([f.a, f.b, f.c])
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(|c| c.to_string()).collect()
}

fn micros(t: Instant) -> u64 {
    t.elapsed().as_micros() as u64
}

fn disc_json(d: &DiscInput) -> Value {
    let mut v = json!({ "discriminant": d.value().to_string() });
    if let (Some(f), Some(r)) = (d.form, d.reduced) {
        v["input_form"] = form_json(&f);
        v["reduced_form"] = form_json(&r);
    }
    v
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

fn quad_poly_json(p: &QuadIntPolyK) -> Value {
    json!({
        "field": { "b": p.field.b.to_string(), "c": p.field.c.to_string() },
        "coefficients": p.coeffs.iter().map(|(u, v)| json!([u.to_string(), v.to_string()])).collect::<Vec<_>>(),
    })
}

pub fn execute(cmd: &Command, prec: Precision) -> Result<Report> {
    match cmd {
        Command::Forms { disc } => forms(disc),
        Command::Classgroup { disc } => classgroup(disc),
        Command::Rayclass { disc, modulus } => rayclass(disc, *modulus),
        Command::Conductor { disc, modulus, subgroup } => conductor(disc, *modulus, subgroup),
        Command::Eval { function, tau, z } => eval(function, tau, z.as_deref(), prec),
        Command::Hilbert { disc } => hilbert(disc, prec),
        Command::Verify { disc, primes } => verify(disc, *primes, prec),
        Command::Divpoly { m, spec } => divpoly(*m, spec.as_deref()),
        Command::Raypoly { disc, modulus } => raypoly(disc, *modulus, prec),
        Command::Invariant { function, disc, check_only } => invariant(function, disc, *check_only, prec),
    }
}

fn forms(disc: &str) -> Result<Report> {
    let d = parse_disc(disc)?;
    let forms = enumerate_reduced_forms(d.disc);
    let mut text = String::new();
    writeln!(text, "D = {}: h = {}", d.value(), forms.len()).unwrap();
    if let (Some(f), Some(r)) = (d.form, d.reduced) {
        writeln!(text, "input {f} reduces to {r}").unwrap();
    }
    for f in &forms {
        writeln!(text, "{f}").unwrap();
    }
    let outputs = merge(
        disc_json(&d),
        json!({ "class_number": forms.len(), "forms": forms.iter().map(form_json).collect::<Vec<_>>() }),
    );
    Ok(Report { outputs, text, ..Default::default() })
}

fn classgroup(disc: &str) -> Result<Report> {
    let d = parse_disc(disc)?;
    let cg = class_group(d.disc)?;
    let g = cg.group();
    let mut text = String::new();
    writeln!(text, "D = {}: h = {}, Cl = {:?}", d.value(), cg.order(), g.invariants()).unwrap();
    writeln!(text, "generators: {}", cg.generators().iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", "))
        .unwrap();
    let mut elements = vec![];
    for f in cg.forms() {
        let c = cg.dlog(*f)?;
        writeln!(text, "{f} -> {c:?}").unwrap();
        elements.push(json!({ "form": form_json(f), "dlog": c }));
    }
    let outputs = merge(
        disc_json(&d),
        json!({
            "order": cg.order(),
            "invariants": g.invariants(),
            "generators": cg.generators().iter().map(form_json).collect::<Vec<_>>(),
            "elements": elements,
        }),
    );
    Ok(Report { outputs, text, ..Default::default() })
}

fn rayclass(disc: &str, m: i64) -> Result<Report> {
    let d = parse_disc(disc)?;
    let r = ray_class_group(d.value(), m)?;
    let text = format!(
        "Cl_{m}(D = {}) = {:?}, order {} (h = {}, |(Z_K/m)^*| = {}, unit image {})\n",
        d.value(),
        r.group().invariants(),
        r.order(),
        r.class_group().order(),
        r.residue_units().order(),
        r.unit_image_order()
    );
    let outputs = merge(
        disc_json(&d),
        json!({
            "modulus": m,
            "invariants": r.group().invariants(),
            "order": r.order(),
            "class_number": r.class_group().order(),
            "residue_units_order": r.residue_units().order(),
            "unit_image_order": r.unit_image_order(),
            "generators": r.group().labels(),
        }),
    );
    Ok(Report { outputs, text, ..Default::default() })
}

fn conductor(disc: &str, m: i64, subgroup: &str) -> Result<Report> {
    let d = parse_disc(disc)?;
    let r = ray_class_group(d.value(), m)?;
    let sub = parse_subgroup(subgroup, r.group().num_generators())?;
    let f = conductor_of(&r, &sub)?;
    let quotient = r.group().quotient(&sub)?;
    let delta = discriminant_by_characters(&r, &sub)?;
    let shown: Vec<String> = delta.iter().filter(|(_, e)| *e > 0).map(|(p, e)| format!("({p})^{e}")).collect();
    let text = format!(
        "conductor {f}, [L:K] = {} with Gal = {:?}, discriminant {}\n",
        quotient.order(),
        quotient.invariants(),
        if shown.is_empty() { "(1)".to_string() } else { shown.join(" ") }
    );
    let outputs = merge(
        disc_json(&d),
        json!({
            "modulus": m,
            "generators": r.group().labels(),
            "subgroup": sub,
            "conductor": f,
            "degree": quotient.order(),
            "galois_invariants": quotient.invariants(),
            "discriminant": delta.iter().map(|(p, e)| json!({ "prime": p, "exponent": e })).collect::<Vec<_>>(),
        }),
    );
    Ok(Report { outputs, text, ..Default::default() })
}

fn eval(function: &str, tau: &str, z: Option<&str>, prec: Precision) -> Result<Report> {
    let ctx = prec.fixed(DEFAULT_EVAL_BITS)?;
    let bits = ctx.bits();
    let (t, form) = if tau.contains(',') {
        let f = ccf::quadforms::reduce(parse_form(tau)?)?;
        (tau_of_form(f, ctx).value, Some(f))
    } else {
        (parse_complex(tau, bits)?, None)
    };
    let mut extra = None;
    let value: BigComplex = match function {
        "eta" => modfunc::eta(&t, ctx)?,
        "f" => modfunc::weber_f(&t, ctx)?,
        "f1" => modfunc::weber_f1(&t, ctx)?,
        "f2" => modfunc::weber_f2(&t, ctx)?,
        "j" => modfunc::j(&t, ctx)?,
        "g2" | "gamma2" => modfunc::gamma2(&t, ctx)?,
        "g3" | "gamma3" => modfunc::gamma3(&t, ctx)?,
        "wp" => {
            let z = z.ok_or_else(|| CliError::Usage("wp needs --z".into()))?;
            let v = modfunc::wp(&parse_complex(z, bits)?, &t, ctx)?;
            extra = Some(v.dwp);
            v.wp
        }
        other if other.starts_with("eta:") => FunctionSymbol::parse(other)?.eval(&t, ctx)?,
        other => return Err(CliError::Usage(format!("unknown function {other:?}"))),
    };
    let (re, im) = complex_strings(&value);
    let (tre, tim) = complex_strings(&t);
    let mut text = format!("{function}({}) = {}\n", show_complex(&tre, &tim), show_complex(&re, &im));
    let mut outputs = json!({
        "function": function,
        "tau": { "re": tre, "im": tim },
        "value": { "re": re, "im": im },
    });
    if let Some(f) = form {
        outputs["form"] = form_json(&f);
    }
    if let Some(d) = extra {
        let (dre, dim) = complex_strings(&d);
        writeln!(text, "derivative = {}", show_complex(&dre, &dim)).unwrap();
        outputs["derivative"] = json!({ "re": dre, "im": dim });
    }
    Ok(Report { outputs, bits: Some(bits), text, ..Default::default() })
}

fn show_complex(re: &str, im: &str) -> String {
    match im.strip_prefix('-') {
        Some(m) => format!("{re} - {m}i"),
        None => format!("{re} + {im}i"),
    }
}

fn hilbert(disc: &str, prec: Precision) -> Result<Report> {
    let d = parse_disc(disc)?;
    let t = Instant::now();
    let cp = hilbert_class_poly(d.value(), &prec.policy())?;
    let us = micros(t);
    let coeffs = cp.poly.coeffs().to_vec();
    let text = format!("Hil_{}(X) = {}\nprecision: {} bits\n", d.value(), cp.poly, cp.bits);
    let outputs = merge(
        disc_json(&d),
        json!({ "degree": cp.poly.degree(), "coefficients": strings(&coeffs), "height_bits": cp.poly.height_bits() }),
    );
    Ok(Report { outputs, bits: Some(cp.bits), timings: BTreeMap::from([("hilbert_us".into(), us)]), text })
}

fn verify(disc: &str, n: usize, prec: Precision) -> Result<Report> {
    let d = parse_disc(disc)?;
    let dv = d.value();
    let cp = hilbert_class_poly(dv, &prec.policy())?;
    let primes: Vec<i64> = (3..).filter(|&p| kronecker(dv, p) == 1 && is_good_prime(&cp.poly, dv, p)).take(n).collect();
    let mut rows = vec![];
    let mut text = format!("{:>8}  {:<18}  {:<10}  agree\n", "p", "split_check", "cornacchia");
    let mut agree = 0;
    for p in primes {
        let verdict = split_check(&cp, p)?;
        let rep = cornacchia(p, dv);
        let ok = (verdict == SplitVerdict::SplitsCompletely) == rep.is_some();
        agree += ok as usize;
        writeln!(text, "{p:>8}  {:<18}  {:<10}  {}", verdict.to_string(), rep.is_some(), if ok { "yes" } else { "NO" }).unwrap();
        rows.push(json!({
            "p": p.to_string(),
            "verdict": verdict.to_string(),
            "cornacchia": rep.map(|(x, y)| json!([x.to_string(), y.to_string()])),
            "agree": ok,
        }));
    }
    writeln!(text, "{agree}/{} agree", rows.len()).unwrap();
    let outputs = merge(disc_json(&d), json!({ "rows": rows, "agree": agree, "total": rows.len() }));
    Ok(Report { outputs, bits: Some(cp.bits), text, ..Default::default() })
}

fn divpoly(m: u32, spec: Option<&str>) -> Result<Report> {
    if m == 0 {
        return Err(CliError::Usage("--m must be positive".into()));
    }
    if let Some(s) = spec {
        let (a, b) = parse_spec(s)?;
        let p = IntPoly::new(division_poly_int(m, a, b));
        let text = format!("T_{m}(X) = {p}\n");
        let outputs = json!({ "m": m, "a": a.to_string(), "b": b.to_string(), "degree": p.degree(), "coefficients": strings(p.coeffs()) });
        return Ok(Report { outputs, text, ..Default::default() });
    }
    let t = division_poly(m)?;
    let coeffs: Vec<Value> = t
        .coeffs
        .iter()
        .map(|c| {
            Value::Array(c.terms().map(|((i, j), v)| json!({ "a": i, "b": j, "coefficient": v.to_string() })).collect())
        })
        .collect();
    let text = format!("T_{m}(X) = {t}\n");
    let outputs = json!({
        "m": m,
        "degree": t.degree(),
        "leading": t.leading().map(|l| l.to_string()),
        "coefficients": coeffs,
    });
    Ok(Report { outputs, text, ..Default::default() })
}

fn raypoly(disc: &str, m: u32, prec: Precision) -> Result<Report> {
    let d = parse_disc(disc)?;
    let t = Instant::now();
    let rp = ray_class_poly(d.value(), m, &prec.policy())?;
    let us = micros(t);
    let k = rp.poly.field;
    let text = format!(
        "{} = 0\nscale {}\nP(Y) = {}\nprecision: {} bits\n",
        IntPoly::from_i64(&[k.c, k.b, 1]).to_string().replace('X', "w"),
        rp.scale,
        rp.poly,
        rp.bits
    );
    let outputs = merge(
        disc_json(&d),
        merge(json!({ "modulus": m, "degree": rp.poly.degree(), "scale": rp.scale.to_string() }), quad_poly_json(&rp.poly)),
    );
    Ok(Report { outputs, bits: Some(rp.bits), timings: BTreeMap::from([("raypoly_us".into(), us)]), text })
}

fn report_json(r: &StabilizerReport) -> Value {
    json!({
        "function": r.function.to_string(),
        "level": r.level,
        "quotient_order": r.quotient_order,
        "invariant": r.invariant,
        "generators": r.generators.iter().map(|(x, g, f)| json!({
            "element": [x.x, x.y],
            "matrix": g.entries(),
            "image": f.to_string(),
        })).collect::<Vec<_>>(),
    })
}

fn poly_height(p: &InvariantPoly) -> u64 {
    match p {
        InvariantPoly::Rational(q) => q.height_bits(),
        InvariantPoly::Quadratic(q) => q.coeffs.iter().map(|(u, v)| u.bits().max(v.bits())).max().unwrap_or(0),
    }
}

fn invariant(function: &str, disc: &str, check_only: bool, prec: Precision) -> Result<Report> {
    let d = parse_disc(disc)?;
    let dv = d.value();
    let f = FunctionSymbol::parse(function)?;
    let mut timings = BTreeMap::new();
    let t = Instant::now();
    let direct = is_class_invariant(&f, dv)?;
    let chosen = if direct.invariant { Some((f.clone(), direct.clone())) } else { find_modification(&f, dv)? };
    timings.insert("check_us".into(), micros(t));
    let mut text = format!("{direct}");
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let mut outputs = merge(
        disc_json(&d),
        json!({
            "function": f.to_string(),
            "invariant": direct.invariant,
            "stabilizer": report_json(&direct),
            "modification": chosen.as_ref().filter(|_| !direct.invariant).map(|(g, _)| g.to_string()),
        }),
    );
    match &chosen {
        Some((g, rep)) if !direct.invariant => {
            writeln!(text, "class invariant modification: {g}").unwrap();
            outputs["modification_stabilizer"] = report_json(rep);
        }
        None => writeln!(text, "no class invariant of the form zeta48^k {f}^e with e <= 24").unwrap(),
        _ => {}
    }
    let mut bits = None;
    if let (false, Some((g, _))) = (check_only, &chosen) {
        let policy = prec.policy();
        let t = Instant::now();
        let cp = class_invariant_poly(g, dv, &policy)?;
        timings.insert("invariant_poly_us".into(), micros(t));
        let t = Instant::now();
        let hil = hilbert_class_poly(dv, &policy)?;
        timings.insert("hilbert_us".into(), micros(t));
        bits = Some(cp.bits);
        let (hi, hh) = (poly_height(&cp.poly), hil.poly.height_bits());
        let poly_json = match &cp.poly {
            InvariantPoly::Rational(p) => {
                writeln!(text, "P(X) = {p}").unwrap();
                json!({ "kind": "rational", "degree": p.degree(), "coefficients": strings(p.coeffs()) })
            }
            InvariantPoly::Quadratic(q) => {
                writeln!(text, "P(Y) = {q}").unwrap();
                merge(json!({ "kind": "quadratic", "degree": q.degree() }), quad_poly_json(q))
            }
        };
        writeln!(text, "height: {hi} bits against {hh} bits for Hil_{dv}").unwrap();
        writeln!(text, "precision: {} bits", cp.bits).unwrap();
        outputs["polynomial"] = poly_json;
        outputs["size"] = json!({ "invariant_height_bits": hi, "hilbert_height_bits": hh });
    }
    Ok(Report { outputs, bits, timings, text })
}
