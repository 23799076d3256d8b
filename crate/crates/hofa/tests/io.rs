use hofa::io::{
    function_to_json, functions_to_csv, load_function, load_group, parse_function_csv, parse_function_json,
    parse_rational, parse_sequence,
};
use hofa_core::funcspace::DomainSpec;
use hofa_core::nilgroup::GroupElement;
use hofa_core::scalar::rat;

#[test]
fn function_json_and_csv_round_trip() {
    let f = load_function(None, Some("e(1/7*n^2) + 0.25"), "cyclic", Some(21)).unwrap();
    let back = parse_function_json(&function_to_json(&f).to_string(), "interval").unwrap();
    assert_eq!(back.domain(), DomainSpec::Cyclic(21));
    assert_eq!(back.values(), f.values());

    let csv = functions_to_csv(&["f"], &[&f]).unwrap();
    let again = parse_function_csv(&csv, "cyclic").unwrap();
    for (a, b) in again.values().iter().zip(f.values()) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn files_are_chosen_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("f.json");
    std::fs::write(&json, r#"{"domain": "interval", "n": 3, "values": [1, [0, 1], {"re": 0.5, "im": 0}]}"#).unwrap();
    let f = load_function(Some(&json), None, "cyclic", None).unwrap();
    assert_eq!(f.domain(), DomainSpec::Interval(3));
    assert_eq!(f.values()[1].im, 1.0);

    let csv = dir.path().join("f.csv");
    std::fs::write(&csv, "n,re,im\n0,1,0\n1,0.5,0\n").unwrap();
    assert_eq!(load_function(Some(&csv), None, "cyclic", None).unwrap().len(), 2);

    assert!(load_function(Some(&dir.path().join("missing.json")), None, "cyclic", None).is_err());
    assert!(load_function(None, None, "cyclic", None).is_err());
    assert!(load_function(None, Some("n"), "cyclic", None).is_err());
}

#[test]
fn group_files_and_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    std::fs::write(&path, r#"{"name": "h3", "dim": 3, "filtration": [3, 1], "brackets": [[0, 1, 2, 1]]}"#).unwrap();
    let g = load_group(path.to_str().unwrap()).unwrap();
    assert_eq!(g.name, "h3");
    assert_eq!(g.filtration_dims(), &[3, 1]);
    assert!(load_group("torus(2)").is_ok());
    assert!(load_group("klein").is_err());

    let seq = parse_sequence(&g, "0,0,0; 1,1,0").unwrap();
    // (1,1,0)^n has top coordinate C(n,2)
    assert_eq!(seq.eval(4), GroupElement { coords: vec![rat(4, 1), rat(4, 1), rat(6, 1)] });
    assert!(parse_sequence(&g, "0,0").is_err());

    assert_eq!(parse_rational("-0.125").unwrap(), rat(-1, 8));
    assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
    assert!(parse_rational("1e3").is_err());
}

#[test]
fn documented_file_layouts_are_accepted() {
    let f = parse_function_json(r#"{"domain": {"kind": "cyclic", "N": 4}, "values": [[1, 0], [0, 1], [-1, 0], [0, -1]]}"#, "interval")
        .unwrap();
    assert_eq!(f.domain(), DomainSpec::Cyclic(4));

    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"dim": 3, "step": 2, "filtrationDims": [3, 1], "structureConstants": [[0, 1, 2, 1]], "labels": ["x", "y", "z"]}"#)
        .unwrap();
    let group = load_group(g.to_str().unwrap()).unwrap();
    assert_eq!(group.labels, ["x", "y", "z"]);
    std::fs::write(&g, r#"{"dim": 3, "step": 3, "filtrationDims": [3, 1]}"#).unwrap();
    assert!(load_group(g.to_str().unwrap()).is_err());

    let s = dir.path().join("seq.json");
    std::fs::write(&s, r#"{"taylor": [[0, 0, 0], ["1/2", 0.25, "0"]]}"#).unwrap();
    let seq = parse_sequence(&group, s.to_str().unwrap()).unwrap();
    // g1^2 has top coordinate a*b = 1/8
    assert_eq!(seq.eval(2).coords, vec![rat(1, 1), rat(1, 2), rat(1, 8)]);
}
