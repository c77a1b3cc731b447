use proptest::prelude::*;
use roadgen::defaults::Defaults;
use roadgen::input::{apply_overrides, parse, to_xml, InputError, SegmentKind};
use roadgen::model::ContactPoint;
use roadgen::pipeline::generate;

fn map(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../maps/{name}.xml", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const MAPS: [&str; 3] = ["xjunction", "two_tjunctions", "huge_network"];

fn t_junction(roads: &str) -> String {
    format!(
        r#"<roadNetwork><segments><tjunction id="J">{roads}<intersection><intersectionPoint road="a" s="50" partner="b" partnerS="0" angle="90"/></intersection></tjunction></segments></roadNetwork>"#
    )
}

fn line(id: &str, length: &str) -> String {
    format!(r#"<road id="{id}"><referenceLine><line length="{length}"/></referenceLine></road>"#)
}

#[test]
fn shipped_maps_parse() {
    let x = parse(&map("xjunction")).unwrap();
    assert_eq!(x.segments.len(), 1);
    assert_eq!(x.segments[0].kind, SegmentKind::XJunction);
    assert!(x.world_offset.defaulted);
    assert_eq!(x.world_offset.value.segment, "J1");

    let two = parse(&map("two_tjunctions")).unwrap();
    assert_eq!(two.segments.len(), 2);
    assert_eq!(two.links.len(), 1);
    assert_eq!(two.links[0].a.end, ContactPoint::End);
    assert_eq!(two.segments[1].intersection.as_ref().unwrap().coupler.additional_lanes.len(), 1);

    let huge = parse(&map("huge_network")).unwrap();
    let kinds: Vec<_> = huge.segments.iter().map(|s| s.kind).collect();
    assert_eq!(kinds.iter().filter(|k| matches!(k, SegmentKind::TJunction | SegmentKind::XJunction)).count(), 3);
    assert!(kinds.contains(&SegmentKind::Roundabout));
    assert!(kinds.contains(&SegmentKind::ConnectionRoad));
    assert_eq!(huge.close_requests.len(), 4);
}

#[test]
fn writing_back_reaches_a_fixpoint() {
    for name in MAPS {
        let once = to_xml(&parse(&map(name)).unwrap());
        let twice = to_xml(&parse(&once).unwrap());
        assert_eq!(once, twice, "{name}");
    }
}

#[test]
fn written_maps_keep_their_geometry() {
    for name in MAPS {
        let a = parse(&map(name)).unwrap();
        let b = parse(&to_xml(&a)).unwrap();
        for (sa, sb) in a.segments.iter().zip(&b.segments) {
            for (ra, rb) in sa.roads.iter().zip(&sb.roads) {
                assert_eq!(ra.profile, rb.profile, "{name} {} {}", sa.id, ra.id);
                assert_eq!(ra.lanes.lanes.len(), rb.lanes.lanes.len());
            }
        }
    }
}

#[test]
fn unset_values_are_marked_as_defaults() {
    let net = parse(&t_junction(&(line("a", "100") + &line("b", "40")))).unwrap();
    let road = &net.segments[0].roads[0];
    assert!(road.class.defaulted);
    assert!(road.lanes.defaulted);
    assert_eq!(road.lanes.lanes.len(), 2);
    assert!(!net.segments[0].intersection.as_ref().unwrap().coupler.present);
}

#[test]
fn too_many_roads_for_a_t_junction() {
    let roads = line("a", "100") + &line("b", "40") + &line("c", "40") + &line("d", "40");
    match parse(&t_junction(&roads)) {
        Err(InputError::Schema(d)) => assert!(!d.is_empty()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn negative_length_is_rejected() {
    let err = parse(&t_junction(&(line("a", "-100") + &line("b", "40")))).unwrap_err();
    assert!(matches!(err, InputError::Schema(_) | InputError::Semantic { .. }), "{err:?}");
    assert!(err.to_string().contains("-100"), "{err}");
}

#[test]
fn link_to_missing_segment() {
    let text = map("two_tjunctions").replace(r#"segmentB="J2""#, r#"segmentB="J9""#);
    let err = parse(&text).unwrap_err();
    assert!(err.to_string().contains("J9"), "{err}");
}

#[test]
fn road_end_used_twice() {
    let text = map("two_tjunctions").replace(
        "</links>",
        r#"<link segmentA="J1" roadA="access" endA="end" segmentB="J2" roadB="main" endB="end"/></links>"#,
    );
    match parse(&text) {
        Err(InputError::Semantic { pos, .. }) => assert!(pos.line > 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn errors_point_at_the_offending_element() {
    let text = map("xjunction").replace(r#"angle="90""#, r#"angle="0""#);
    match parse(&text) {
        Err(InputError::Semantic { pos, message }) => {
            assert_eq!(pos.line, 16, "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn override_changes_the_parsed_value() {
    let text = apply_overrides(&map("two_tjunctions"), &[("J2.main.arc.radius".into(), "150".into())]).unwrap();
    let net = parse(&text).unwrap();
    let arcs: Vec<String> = to_xml(&net).lines().filter(|l| l.contains("<arc")).map(|l| l.trim().to_owned()).collect();
    assert_eq!(arcs, [r#"<arc length="160" radius="300"/>"#, r#"<arc length="160" radius="150"/>"#]);
}

#[test]
fn override_that_breaks_continuity_is_reported() {
    let text = map("huge_network")
        .replace(r#"<spiral length="40"/>"#, r#"<spiral length="40" startRadius="-150" endRadius="inf"/>"#);
    let text = apply_overrides(&text, &[("C1.link.arc.radius".into(), "-120".into())]).unwrap();
    match parse(&text) {
        Err(InputError::Semantic { message, .. }) => assert!(message.contains("curvature"), "{message}"),
        other => panic!("{other:?}"),
    }
}

fn single_road(elements: &str) -> String {
    format!(
        r#"<roadNetwork><segments><connectionRoad id="C"><road id="r"><referenceLine>{elements}</referenceLine></road></connectionRoad></segments></roadNetwork>"#
    )
}

#[test]
fn spiral_radii_come_from_the_neighbours() {
    let explicit = parse(&single_road(
        r#"<line length="10"/><spiral length="20" startRadius="inf" endRadius="-80"/><arc length="30" radius="-80"/><spiral length="20" startRadius="-80" endRadius="inf"/><line length="5"/>"#,
    ))
    .unwrap();
    let inferred = parse(&single_road(
        r#"<line length="10"/><spiral length="20"/><arc length="30" radius="-80"/><spiral length="20"/><line length="5"/>"#,
    ))
    .unwrap();
    assert_eq!(explicit.segments[0].roads[0].profile, inferred.segments[0].roads[0].profile);
    assert_eq!(to_xml(&explicit), to_xml(&inferred));
}

#[test]
fn spiral_radii_need_a_neighbour() {
    for elements in [
        r#"<spiral length="20" endRadius="50"/><arc length="10" radius="50"/>"#,
        r#"<line length="10"/><spiral length="20"/>"#,
        r#"<line length="10"/><spiral length="20"/><spiral length="20" endRadius="inf"/>"#,
    ] {
        match parse(&single_road(elements)) {
            Err(InputError::Semantic { message, .. }) => assert!(message.contains("spiral"), "{message}"),
            other => panic!("{elements}: {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parsing_never_panics(cut in 0usize..600, len in 0usize..40, insert in "[<>=\"a-z0-9 /.-]{0,12}") {
        let text = map("xjunction");
        let start = cut.min(text.len());
        let end = (start + len).min(text.len());
        if text.is_char_boundary(start) && text.is_char_boundary(end) {
            let mutated = format!("{}{}{}", &text[..start], insert, &text[end..]);
            let _ = generate(&mutated, &[], &Defaults::default());
        }
    }

    #[test]
    fn any_numeric_attribute_value_is_handled(value in prop_oneof![
        any::<f64>().prop_map(|v| v.to_string()),
        Just("inf".to_string()),
        Just("NaN".to_string()),
        Just("".to_string()),
        "[0-9eE+-.]{1,8}",
    ], key in prop::sample::select(vec![
        "J1.main.line.length", "J1.side.line.length", "J1.intersectionPoint.s", "J1.intersectionPoint.angle", "J1.intersectionPoint.partnerS",
    ])) {
        if let Ok(text) = apply_overrides(&map("xjunction"), &[(key.to_string(), value)]) {
            let _ = generate(&text, &[], &Defaults::default());
        }
    }
}
