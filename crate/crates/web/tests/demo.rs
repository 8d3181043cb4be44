use rulealg_web::demo;
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn moments_start_at_the_initial_state() {
    let v = parse(&demo::edge_moments(4, 6, 1.0, 1.0, 5.0, 3).unwrap());
    assert_eq!(v["time"], serde_json::json!([0.0, 2.5, 5.0]));
    assert_eq!(v["mean"][0], 6.0);
    assert_eq!(v["variance"][0], 0.0);
    // Pure death from six edges: mean 6 e^{-t}.
    let v = parse(&demo::edge_moments(4, 6, 0.0, 1.0, 1.0, 2).unwrap());
    let mean = v["mean"][1].as_f64().unwrap();
    assert!((mean - 6.0 * (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn moments_reject_bad_input() {
    assert!(demo::edge_moments(4, 6, 1.0, 1.0, 5.0, 1).is_err());
    assert!(demo::edge_moments(4, 6, -1.0, 1.0, 5.0, 3).is_err());
}

#[test]
fn distribution_is_normalized() {
    let p = demo::edge_distribution(4, 6, 1.0, 1.0, 1.0).unwrap();
    let mass: f64 = p.iter().sum();
    assert!((mass - 1.0).abs() < 1e-8);
    assert_eq!(demo::edge_distribution(4, 2, 1.0, 1.0, 0.0).unwrap(), vec![0.0, 0.0, 1.0]);
}

#[test]
fn sequence_rows() {
    let v = parse(&demo::edge_sequence(3).unwrap());
    let rows: Vec<(String, String)> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["partition"].to_string(), r["coefficient"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(
        rows,
        vec![
            ("[3,0,0]".to_string(), "1".to_string()),
            ("[2,1,0]".to_string(), "6".to_string()),
            ("[1,1,1]".to_string(), "2".to_string()),
        ]
    );
    assert!(demo::edge_sequence(13).is_err());
}

#[test]
fn normal_order_terms() {
    let v = parse(&demo::normal_order(1, 2, 2, 1).unwrap());
    assert_eq!(v["agrees"], true);
    let mut terms: Vec<(u64, u64, String)> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            (
                t["created"].as_u64().unwrap(),
                t["deleted"].as_u64().unwrap(),
                t["coefficient"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    terms.sort();
    // Sum over n of C(2,n) C(2,n) n! words (3-n, 3-n).
    assert_eq!(
        terms,
        vec![(1, 1, "2".to_string()), (2, 2, "4".to_string()), (3, 3, "1".to_string())]
    );
    assert!(demo::normal_order(5, 0, 0, 0).is_err());
}
