use fillcheck_cli::{analyze_all, run, EXIT_OK, EXIT_PARSE, EXIT_USAGE};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["fillcheck"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn no_floats(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::Array(a) => a.iter().all(no_floats),
        Value::Object(o) => o.values().all(no_floats),
        _ => true,
    }
}

fn num(v: &Value) -> (String, String) {
    (
        v["num"].as_str().unwrap().to_string(),
        v["den"].as_str().unwrap().to_string(),
    )
}

#[test]
fn rp_case_text() {
    let (code, out, _) = call(&["rp-case", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("5064442/305"));
    let (_, out, _) = call(&["rp-case", "2"]);
    assert!(out.contains("Â(Y) = 1/16"));
}

#[test]
fn rp_case_json() {
    let v = json(&["rp-case", "4", "--json"]);
    assert_eq!(v["equation"]["k_coefficient"], "26266354875");
    assert_eq!(v["residues"]["solutions"], Value::Array(vec![]));
    assert_eq!(v["contradiction"], true);
    assert!(no_floats(&v));
    assert!(no_floats(&json(&["z3-case", "18", "--json"])));
}

#[test]
fn trivial_group_report() {
    let v = json(&["analyze", "trivial:dim=4", "--json"]);
    assert_eq!(v["conclusion"], "NO_VERDICT");
    assert_eq!(num(&v["md"]), ("3".into(), "1".into()));
    let (_, text, _) = call(&["analyze", "trivial:dim=4"]);
    assert!(text.contains("md: 3"));
    assert!(text.contains("conclusion: NO_VERDICT"));
}

#[test]
fn report_schema_and_text_agree() {
    let v = json(&["analyze", "cyclic:m=3;w=1,1,1,2,2,2", "--json"]);
    for key in [
        "spec",
        "complex_dim",
        "group_order",
        "isolated",
        "terminal",
        "md",
        "conj_count",
        "hmi",
        "prediction",
        "cup_length_bound",
        "total_chern",
        "verdicts",
        "conclusion",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 8);
    assert_eq!(v["conclusion"], "NOT_EXACTLY_FILLABLE");
    let z3 = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["theorem"] == "z3")
        .unwrap();
    assert_eq!(z3["witness"]["kind"], "z3_pipeline");
    assert_eq!(num(&z3["witness"]["three_x"]), ("-461".into(), "31".into()));

    let (_, text, _) = call(&["analyze", "cyclic:m=3;w=1,1,1,2,2,2"]);
    let (n, d) = num(&v["hmi"]);
    let hmi = if d == "1" { n } else { format!("{n}/{d}") };
    assert!(text.contains(&format!("hmi: {hmi}")));
    assert!(text.contains("-461/31"));
    assert!(no_floats(&v));
}

#[test]
fn defect_and_bernoulli() {
    let (code, out, _) = call(&["defect", "cyclic:m=3;w=1,1,1,1,2,2,2,2"]);
    assert_eq!((code, out.trim()), (EXIT_OK, "2/243"));
    let v = json(&["bernoulli", "18", "--json"]);
    assert_eq!(v["numerator"], "26315271553053477373");
    assert_eq!(v["odd_denominator"], "959595");
}

#[test]
fn genus_and_chern() {
    let (code, out, _) = call(&["genus", "L", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("7/45"));
    let v = json(&["genus", "ahat", "2", "--json"]);
    assert_eq!(v["terms"].as_array().unwrap().len(), 2);
    let (_, out, _) = call(&["chern", "2t:copies=3"]);
    assert!(out.contains("1 + 21v + 3v^2 mod (24, v^3)"));
}

#[test]
fn chenruan_subcommand() {
    let (code, out, _) = call(&["chenruan", "cyclic:m=3;w=1,1,1", "--product", "1", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "[1] * [1] = 1·[2]");
    let v = json(&[
        "chenruan",
        "cyclic:m=2;w=1,1,1",
        "--coproduct",
        "0",
        "--json",
    ]);
    assert_eq!(v[0]["left"], 1);
    assert_eq!(num(&v[0]["coeff"]), ("2".into(), "1".into()));
    let v = json(&["chenruan", "2o:copies=2", "--json"]);
    assert_eq!(v["classes"].as_array().unwrap().len(), 8);
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(call(&["analyze", "cyclic:m=3;w=1,x"]).0, EXIT_PARSE);
    assert_eq!(call(&["analyze", "hexagon:m=3"]).0, EXIT_PARSE);
    assert_eq!(call(&["rp-case", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["z3-case", "4"]).0, EXIT_USAGE);
    assert_eq!(call(&["defect", "cyclic:m=3;w=1,1,1"]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn batch_preserves_order() {
    let specs: Vec<String> = [
        "2i:copies=3",
        "cyclic:m=2;w=1,1,1,1",
        "trivial:dim=2",
        "bogus",
        "bd:m=5;copies=3",
        "cyclic:m=7;w=1,6,3",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let serial = analyze_all(&specs, Some(1)).unwrap();
    let parallel = analyze_all(&specs, Some(4)).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(serial.len(), specs.len());
    for (v, s) in serial.iter().zip(&specs) {
        if s == "bogus" {
            assert_eq!(v["exit_code"], EXIT_PARSE);
        } else {
            assert_eq!(v["spec"], s.as_str());
        }
    }

    let path = std::env::temp_dir().join(format!("fillcheck-batch-{}.txt", std::process::id()));
    std::fs::write(&path, "# comment\ncyclic:m=2;w=1,1,1,1\n\n2t:copies=3\n").unwrap();
    let (code, out, _) = call(&["batch", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, EXIT_OK);
    let lines: Vec<Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["spec"], "cyclic:m=2;w=1,1,1,1");
    assert_eq!(lines[1]["conclusion"], "NOT_EXACTLY_FILLABLE");
}
