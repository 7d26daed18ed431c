use impbounds_demo::{crossover_view, extension_view, jensen_view, tail_view};

#[test]
fn jensen_view_on_the_three_atom_example() {
    let v = jensen_view("-1, 1, 2", 0.75, f64::NAN, "square").unwrap();
    assert_eq!(v["exact"]["lower"].as_f64().unwrap(), 1.0);
    assert!((v["improved"]["combined"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["plain"]
        .as_array()
        .unwrap()
        .iter()
        .any(|b| (b["bound"].as_f64().unwrap() - 0.5625).abs() < 1e-9));
    assert_eq!(v["atoms"].as_array().unwrap().len(), 3);
}

#[test]
fn tail_view_points_are_certified() {
    let v = tail_view("0 2 6", 1.0, 3.0, 4.0).unwrap();
    let series = v["series"].as_array().unwrap();
    assert_eq!(series.len(), 6);
    assert!(series
        .iter()
        .any(|s| s["name"].as_str().unwrap().starts_with("markov-upper")));
    for s in series {
        for p in s["points"].as_array().unwrap() {
            assert_eq!(p["valid"], true, "{}", s["name"]);
        }
    }
}

#[test]
fn crossover_switches_at_eps2() {
    let v = crossover_view(1.0, 2.0, 0.5, 10.0).unwrap();
    let eps2 = v["eps2"].as_f64().unwrap();
    for p in v["points"].as_array().unwrap() {
        let eps = p["eps"].as_f64().unwrap();
        let (m, c) = (p["markov"].as_f64().unwrap(), p["cantelli"].as_f64().unwrap());
        if eps > eps2 + 1e-9 {
            assert!(c <= m);
        } else if eps < eps2 - 1e-9 {
            assert!(c >= m);
        }
    }
}

#[test]
fn bad_input_is_an_error_string() {
    assert!(jensen_view("1, x", 0.5, f64::NAN, "square").is_err());
    assert!(jensen_view("1, 2", 1.5, f64::NAN, "cosh").is_err());
    assert!(extension_view("0 1", 0.8, 0.2).is_err());
    assert!(crossover_view(1.0, 2.0, 0.5, 0.0).is_err());
}
