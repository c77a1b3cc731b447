use roadgen::defaults::Defaults;
use roadgen::pipeline::generate;
use roadgen::svg::render;

fn svg_of(input: &str) -> String {
    render(&generate(input, &[], &Defaults::default()).unwrap().assembly.network)
}

#[test]
fn straight_road_has_two_edges_and_a_center_line() {
    let text = svg_of(
        r#"<roadNetwork><segments><connectionRoad id="C"><road id="r"><referenceLine><line length="20"/></referenceLine></road></connectionRoad></segments></roadNetwork>"#,
    );
    let doc = roxmltree::Document::parse(&text).unwrap();
    let lines: Vec<Vec<(f64, f64)>> = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| {
            n.attribute("points")
                .unwrap()
                .split_whitespace()
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect();
    assert_eq!(lines.len(), 3);
    let mut offsets: Vec<f64> = lines.iter().map(|l| l[0].1).collect();
    offsets.sort_by(f64::total_cmp);
    // y is flipped in the picture: left lane edge at -3.5.
    assert_eq!(offsets, [-3.5, 0.0, 3.5]);
    for l in &lines {
        assert!(l.iter().all(|p| p.1 == l[0].1));
        assert_eq!((l[0].0, l.last().unwrap().0), (0.0, 20.0));
    }
}

#[test]
fn x_junction_matches_the_reviewed_picture() {
    let input = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../maps/xjunction.xml")).unwrap();
    let golden = include_str!("golden/xjunction.svg");
    assert!(svg_of(&input) == golden, "rendering of maps/xjunction.xml changed; review and replace tests/golden/xjunction.svg");
}
