use std::process::Command;

use ccf_cli::polytext::parse_poly;
use ccf_cli::{run_with_env, Outcome};
use num_bigint::BigInt;
use proptest::prelude::*;
use serde_json::Value;

const HIL_71: [&str; 8] = [
    "737707086760731113357714241006081263",
    "-425319473946139603274605151187659",
    "5138800366453976780323726329446",
    "-823534263439730779968091389",
    "98394038810047812049302",
    "-3091990138604570",
    "313645809715",
    "1",
];

fn ccf(args: &[&str]) -> Outcome {
    ccf_env(args, None)
}

fn ccf_env(args: &[&str], env: Option<&str>) -> Outcome {
    let argv = std::iter::once("ccf").chain(args.iter().copied());
    run_with_env(argv, env.map(String::from))
}

fn envelope(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let out = ccf(&a);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    serde_json::from_str(&out.stdout).expect("well-formed JSON")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|c| c.as_str().expect("coefficients are strings").to_string()).collect()
}

fn big(v: &[String]) -> Vec<BigInt> {
    v.iter().map(|s| s.parse().unwrap()).collect()
}

/// The text after `prefix` on the first line starting with it.
fn line_after<'a>(text: &'a str, prefix: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(prefix)).unwrap_or_else(|| panic!("no line {prefix:?} in\n{text}"))
}

#[test]
fn hilbert_minus_71_envelope() {
    let env = envelope(&["hilbert", "--disc", "-71"]);
    assert_eq!(env["command"], "hilbert");
    assert_eq!(strings(&env["outputs"]["coefficients"]), HIL_71);
    assert!(env["precision_bits"].as_u64().unwrap() >= 64);
    assert!(env["error"].is_null());
}

#[test]
fn forms_minus_3() {
    let env = envelope(&["forms", "--disc", "-3"]);
    assert_eq!(env["outputs"]["class_number"], 1);
    assert_eq!(env["outputs"]["forms"], serde_json::json!([[1, 1, 1]]));
}

#[test]
fn form_input_is_reduced() {
    let env = envelope(&["forms", "--disc", "(2,3,10)"]);
    assert_eq!(env["outputs"]["discriminant"], "-71");
    assert_eq!(env["outputs"]["reduced_form"], serde_json::json!([2, -1, 9]));
    assert_eq!(env["outputs"]["class_number"], 7);
}

#[test]
fn weber_invariant_minus_71_envelope() {
    let env = envelope(&["invariant", "--fn", "f2", "--disc", "-71"]);
    let out = &env["outputs"];
    assert_eq!(out["invariant"], false);
    assert_eq!(out["modification"], "zeta48*f2");
    assert_eq!(out["polynomial"]["kind"], "rational");
    assert_eq!(out["polynomial"]["degree"], 7);
    let c = strings(&out["polynomial"]["coefficients"]);
    // X^7 + X^6 - X^5 - X^4 - X^3 + X^2 + 2X - 1
    assert_eq!(c, ["-1", "2", "1", "-1", "-1", "-1", "1", "1"]);
    assert_eq!(out["size"]["hilbert_height_bits"], 120);
}

#[test]
fn check_only_skips_the_polynomial() {
    let env = envelope(&["invariant", "--fn", "gamma2", "--disc", "-23", "--check-only"]);
    assert_eq!(env["outputs"]["modification"], "zeta3*gamma2");
    assert!(env["outputs"].get("polynomial").is_none());
}

fn strip_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time");
    v
}

const DETERMINISM_CASES: &[&[&str]] = &[
    &["forms", "--disc", "-71"],
    &["classgroup", "--disc", "-84"],
    &["rayclass", "--disc", "-4", "--mod", "5"],
    &["conductor", "--disc", "-7", "--mod", "6"],
    &["eval", "--fn", "j", "--tau", "5i"],
    &["eval", "--fn", "wp", "--tau", "0.1+1.3i", "--z", "0.2+0.1i"],
    &["hilbert", "--disc", "-23"],
    &["verify", "--disc", "-15", "--primes", "10"],
    &["divpoly", "--m", "5"],
    &["raypoly", "--disc", "-7", "--mod", "3"],
    &["invariant", "--fn", "f2", "--disc", "-71"],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(11))]

    /// Identical inputs give byte-identical envelopes apart from the wall time.
    #[test]
    fn envelopes_are_deterministic(i in 0..DETERMINISM_CASES.len(), threads in 1usize..4) {
        let mut args = DETERMINISM_CASES[i].to_vec();
        let t = threads.to_string();
        args.extend(["--json", "--threads", &t]);
        let a = ccf(&args);
        let b = ccf(&args);
        prop_assert_eq!(a.code, 0);
        let (va, vb): (Value, Value) = (serde_json::from_str(&a.stdout).unwrap(), serde_json::from_str(&b.stdout).unwrap());
        prop_assert_eq!(
            serde_json::to_string(&strip_time(va)).unwrap(),
            serde_json::to_string(&strip_time(vb)).unwrap()
        );
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let one = envelope(&["invariant", "--fn", "f2", "--disc", "-47", "--threads", "1"]);
    let four = envelope(&["invariant", "--fn", "f2", "--disc", "-47", "--threads", "4"]);
    assert_eq!(one["outputs"], four["outputs"]);
}

#[test]
fn text_polynomials_reparse_to_json() {
    // Hilbert.
    let text = ccf(&["hilbert", "--disc", "-71"]).stdout;
    let json = envelope(&["hilbert", "--disc", "-71"]);
    let p = parse_poly(line_after(&text, "Hil_-71(X) = ")).unwrap();
    assert_eq!(p.univariate("X").unwrap(), big(&strings(&json["outputs"]["coefficients"])));

    // Weber invariant.
    let args = ["invariant", "--fn", "f2", "--disc", "-71"];
    let text = ccf(&args).stdout;
    let json = envelope(&args);
    let p = parse_poly(line_after(&text, "P(X) = ")).unwrap();
    assert_eq!(p.univariate("X").unwrap(), big(&strings(&json["outputs"]["polynomial"]["coefficients"])));

    // Specialised division polynomial.
    let args = ["divpoly", "--m", "7", "--spec", "-35,98"];
    let text = ccf(&args).stdout;
    let json = envelope(&args);
    let p = parse_poly(line_after(&text, "T_7(X) = ")).unwrap();
    assert_eq!(p.univariate("X").unwrap(), big(&strings(&json["outputs"]["coefficients"])));

    // Symbolic division polynomial: every term of every coefficient.
    let args = ["divpoly", "--m", "6"];
    let text = ccf(&args).stdout;
    let json = envelope(&args);
    let p = parse_poly(line_after(&text, "T_6(X) = ")).unwrap();
    let mut terms = 0;
    for (k, c) in json["outputs"]["coefficients"].as_array().unwrap().iter().enumerate() {
        for t in c.as_array().unwrap() {
            let (i, j) = (t["a"].as_u64().unwrap() as u32, t["b"].as_u64().unwrap() as u32);
            let want: BigInt = t["coefficient"].as_str().unwrap().parse().unwrap();
            assert_eq!(p.coeff(&[("a", i), ("b", j), ("X", k as u32)]), want);
            terms += 1;
        }
    }
    assert_eq!(p.0.len(), terms);

    // Ray class polynomial over Z[w].
    let args = ["raypoly", "--disc", "-7", "--mod", "3"];
    let text = ccf(&args).stdout;
    let json = envelope(&args);
    let p = parse_poly(line_after(&text, "P(Y) = ")).unwrap();
    for (k, c) in json["outputs"]["coefficients"].as_array().unwrap().iter().enumerate() {
        let (u, v): (BigInt, BigInt) = (c[0].as_str().unwrap().parse().unwrap(), c[1].as_str().unwrap().parse().unwrap());
        assert_eq!(p.coeff(&[("Y", k as u32)]), u, "Y^{k}");
        assert_eq!(p.coeff(&[("w", 1), ("Y", k as u32)]), v, "w Y^{k}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(ccf(&["hilbert", "--disc", "-5"]).code, 2);
    assert_eq!(ccf(&["hilbert", "--disc", "-12"]).code, 2, "non-fundamental");
    assert_eq!(ccf(&["forms", "--disc", "1,1,-3"]).code, 2);
    assert_eq!(ccf(&["hilbert", "--disc", "-71", "--bits", "32"]).code, 2);
    assert_eq!(ccf(&["rayclass", "--disc", "-4", "--mod", "0"]).code, 2);
    assert_eq!(ccf(&["frobnicate"]).code, 2);
    assert_eq!(ccf(&["conductor", "--disc", "-4", "--mod", "5", "--subgroup", "1,2,3"]).code, 2);
    assert_eq!(ccf(&["eval", "--fn", "wp", "--tau", "i"]).code, 2);
    assert_eq!(ccf(&["hilbert", "--disc", "-71", "--max-bits", "128"]).code, 3);
    assert_eq!(ccf(&["eval", "--fn", "j", "--tau", "i", "--bits", "256", "--max-bits", "128"]).code, 3);
}

#[test]
fn error_envelopes_are_json() {
    for args in [
        &["hilbert", "--disc", "-5", "--json"][..],
        &["hilbert", "--disc", "-71", "--max-bits", "100", "--json"][..],
        &["nope", "--json"][..],
    ] {
        let out = ccf(args);
        let v: Value = serde_json::from_str(&out.stdout).expect("well-formed JSON");
        assert_eq!(v["error"]["exit_code"].as_i64().unwrap() as i32, out.code);
        assert!(v["outputs"].is_null());
        assert!(!out.stderr.is_empty());
    }
    let v: Value = serde_json::from_str(&ccf(&["hilbert", "--disc", "-71", "--max-bits", "100", "--json"]).stdout).unwrap();
    assert_eq!(v["error"]["kind"], "precision-exhausted");
}

#[test]
fn default_bits_from_environment() {
    let out = ccf_env(&["eval", "--fn", "j", "--tau", "i", "--json"], Some("192"));
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["precision_bits"], 192);
    assert_eq!(v["inputs"]["bits_source"], "env");
    // j(i) = 1728.
    assert!(v["outputs"]["value"]["re"].as_str().unwrap().starts_with("1.7280000000"));

    // The flag wins over the environment.
    let out = ccf_env(&["eval", "--fn", "j", "--tau", "i", "--bits", "100", "--json"], Some("192"));
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["precision_bits"], 100);

    // Hilbert still certifies when started too low.
    let out = ccf_env(&["hilbert", "--disc", "-71", "--json"], Some("64"));
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(strings(&v["outputs"]["coefficients"]), HIL_71);
    assert!(v["precision_bits"].as_u64().unwrap() > 64);

    assert_eq!(ccf_env(&["hilbert", "--disc", "-23"], Some("lots")).code, 2);
    assert_eq!(ccf_env(&["hilbert", "--disc", "-23"], Some("16")).code, 2);
}

#[test]
fn group_commands() {
    let v = envelope(&["rayclass", "--disc", "-4", "--mod", "3"]);
    assert_eq!(v["outputs"]["invariants"], serde_json::json!([2]));
    let v = envelope(&["conductor", "--disc", "-4", "--mod", "5"]);
    assert_eq!(v["outputs"]["conductor"], 5);
    assert_eq!(v["outputs"]["discriminant"], serde_json::json!([{ "prime": 5, "exponent": 3 }]));
    let v = envelope(&["classgroup", "--disc", "-84"]);
    assert_eq!(v["outputs"]["invariants"], serde_json::json!([2, 2]));
    let v = envelope(&["verify", "--disc", "-71", "--primes", "20"]);
    assert_eq!(v["outputs"]["agree"], 20);
}

/// Top-level shape of every envelope against the schema shipped in docs/.
#[test]
fn envelopes_match_documented_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../../../docs/envelope.schema.json")).expect("schema is JSON");
    let required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let props = schema["properties"].as_object().unwrap();
    for case in DETERMINISM_CASES {
        let v = envelope(case);
        let obj = v.as_object().unwrap();
        for key in &required {
            assert!(obj.contains_key(*key), "{case:?} lacks {key}");
        }
        for key in obj.keys() {
            assert!(props.contains_key(key), "{case:?} has undocumented {key}");
        }
        let cmd = v["command"].as_str().unwrap();
        let out_props = schema["$defs"][format!("{cmd}_outputs")]["required"].as_array().unwrap_or_else(|| panic!("{cmd} schema"));
        for key in out_props {
            assert!(v["outputs"].get(key.as_str().unwrap()).is_some(), "{cmd} outputs lack {key}");
        }
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ccf");
    let ok = Command::new(bin).args(["forms", "--disc", "-3", "--json"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["outputs"]["forms"], serde_json::json!([[1, 1, 1]]));
    let bad = Command::new(bin).args(["forms", "--disc", "-5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("invalid discriminant"));
    let cap = Command::new(bin).args(["hilbert", "--disc", "-71", "--max-bits", "128"]).output().unwrap();
    assert_eq!(cap.status.code(), Some(3));
    let env = Command::new(bin).args(["eval", "--fn", "j", "--tau", "i", "--json"]).env("CCF_DEFAULT_BITS", "160").output().unwrap();
    let v: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(v["precision_bits"], 160);
}
