//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;
use roadgen::assembly::close_gap;
use roadgen::defaults::Defaults;
use roadgen::geometry::{fresnel, normalize_angle, Pose};
use roadgen::junction::connect;
use roadgen::lanes::{lapse, widening};
use roadgen::odr::{emit, validate_builtin, EmitOptions, OdrVersion};
use roadgen::pipeline::generate;
use roadgen::profile::{CurvatureProfile, Primitive};
use roxmltree::{Document, Node};

const MAPS: [&str; 3] = ["xjunction", "two_tjunctions", "huge_network"];

type Outcome = Result<String, String>;

fn maps() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../maps")
}

fn roadgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roadgen")).args(args).output().expect("roadgen runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn f(n: Node, name: &str) -> f64 {
    n.attribute(name).unwrap_or_else(|| panic!("missing {name}")).parse().unwrap()
}

fn children<'a, 'i>(n: Node<'a, 'i>, tag: &'a str) -> impl Iterator<Item = Node<'a, 'i>> {
    n.children().filter(move |c| c.has_tag_name(tag))
}

fn child<'a, 'i>(n: Node<'a, 'i>, tag: &str) -> Node<'a, 'i> {
    n.children().find(|c| c.has_tag_name(tag)).unwrap_or_else(|| panic!("no <{tag}>"))
}

/// Adaptive Simpson quadrature.
fn integrate(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(g: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (g(lm), g(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (g(a), g(b), g(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(g, a, b, fa, fm, fb, whole, tol, 40)
}

/// Start and end curvature of one emitted geometry record.
fn record_curvature(g: Node) -> (f64, f64) {
    let shape = g.first_element_child().unwrap();
    match shape.tag_name().name() {
        "line" => (0.0, 0.0),
        "arc" => (f(shape, "curvature"), f(shape, "curvature")),
        "spiral" => (f(shape, "curvStart"), f(shape, "curvEnd")),
        other => panic!("{other}"),
    }
}

/// End pose of one emitted geometry record, integrated from its heading.
fn record_end(g: Node) -> (f64, f64, f64) {
    let (x, y, hdg, len) = (f(g, "x"), f(g, "y"), f(g, "hdg"), f(g, "length"));
    let (k0, k1) = record_curvature(g);
    let heading = move |s: f64| hdg + k0 * s + (k1 - k0) * s * s / (2.0 * len);
    (
        x + integrate(&|s| heading(s).cos(), 0.0, len, 1e-12),
        y + integrate(&|s| heading(s).sin(), 0.0, len, 1e-12),
        heading(len),
    )
}

fn angle_gap(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

/// Largest position gap, heading gap and curvature jump between consecutive
/// records of every road. Curvature is only compared on roads with spirals.
fn chain_errors(xodr: &str) -> (f64, f64, f64, usize) {
    let doc = Document::parse(xodr).unwrap();
    let (mut dp, mut dh, mut dk, mut spiral_roads) = (0.0f64, 0.0f64, 0.0f64, 0);
    for road in doc.descendants().filter(|n| n.has_tag_name("road")) {
        let records: Vec<_> = children(child(road, "planView"), "geometry").collect();
        let has_spiral = records.iter().any(|g| g.first_element_child().unwrap().has_tag_name("spiral"));
        spiral_roads += has_spiral as usize;
        for pair in records.windows(2) {
            let (x, y, h) = record_end(pair[0]);
            dp = dp.max((x - f(pair[1], "x")).hypot(y - f(pair[1], "y")));
            dh = dh.max(angle_gap(h, f(pair[1], "hdg")));
            if has_spiral {
                dk = dk.max((record_curvature(pair[0]).1 - record_curvature(pair[1]).0).abs());
            }
        }
    }
    (dp, dh, dk, spiral_roads)
}

fn schema_validity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut slowest = Duration::ZERO;
    let mut failures = Vec::new();
    for name in MAPS {
        let input = maps().join(format!("{name}.xml"));
        for version in ["1.4", "1.5"] {
            let out = dir.path().join(format!("{name}-{version}.xodr"));
            let start = Instant::now();
            let o = roadgen(&["-i", path(&input), "-o", path(&out), "--odr-version", version, "--validate"]);
            slowest = slowest.max(start.elapsed());
            if !o.status.success() {
                failures.push(format!("{name} {version}: exit {:?}", o.status.code()));
                continue;
            }
            let xml = std::fs::read_to_string(&out).unwrap();
            let diagnostics = validate_builtin(&xml, version.parse().unwrap());
            if !diagnostics.is_empty() {
                failures.push(format!("{name} {version}: {} diagnostics", diagnostics.len()));
            }
        }
    }
    check(
        failures.is_empty() && slowest < Duration::from_secs(5),
        format!("6 outputs, failures {failures:?}, slowest run {:.2} s", slowest.as_secs_f64()),
    )
}

fn connection_construction() -> Outcome {
    let c = connect(Pose::new(0.0, 0.0, 0.0), Pose::new(4.0, 2.0, PI / 4.0)).map_err(|e| e.to_string())?;
    let i = c.intersection.ok_or("no tangent crossing")?;
    let r = c.radius.ok_or("no arc")?;
    let ok = (i.0 - 2.0).abs() <= 1e-12
        && i.1.abs() <= 1e-12
        && (c.h.0 - 3.41421).abs() <= 1e-4
        && (c.h.1 - 1.41421).abs() <= 1e-4
        && (r - 4.8284).abs() <= 1e-3;
    check(ok, format!("I = ({}, {}), H = ({:.6}, {:.6}), r = {:.6}", i.0, i.1, c.h.0, c.h.1, r))
}

fn radius_text(k: f64) -> String {
    if k == 0.0 { "inf".into() } else { (1.0 / k).to_string() }
}

/// Reference line elements walking through the given curvatures, with a
/// spiral into every new value and an arc (or line) holding it.
fn spiral_road(lead: f64, knots: &[(f64, f64, f64)]) -> (String, Vec<(f64, f64)>) {
    let mut xml = format!(r#"<line length="{lead}"/>"#);
    let mut expected = vec![(0.0, 0.0)];
    let mut k = 0.0;
    for &(next, l_sp, l_hold) in knots {
        if next != k {
            xml += &format!(r#"<spiral length="{l_sp}" startRadius="{}" endRadius="{}"/>"#, radius_text(k), radius_text(next));
            expected.push((k, next));
        }
        if next == 0.0 {
            xml += &format!(r#"<line length="{l_hold}"/>"#);
        } else {
            xml += &format!(r#"<arc length="{l_hold}" radius="{}"/>"#, radius_text(next));
        }
        expected.push((next, next));
        k = next;
    }
    let doc = format!(
        r#"<roadNetwork><segments><connectionRoad id="R"><road id="r"><referenceLine>{xml}</referenceLine></road></connectionRoad></segments></roadNetwork>"#
    );
    (doc, expected)
}

fn knot() -> impl Strategy<Value = (f64, f64, f64)> {
    let radius = prop_oneof![-500.0..-20.0f64, 20.0..500.0f64, Just(f64::INFINITY)];
    (radius, 1.0..60.0f64, 1.0..80.0f64).prop_map(|(r, l_sp, l_hold)| {
        let round = |v: f64| (v * 10.0).round() / 10.0;
        let k = if r.is_finite() { 1.0 / round(r) } else { 0.0 };
        (k, round(l_sp), round(l_hold))
    })
}

fn geometry_continuity() -> Outcome {
    let (mut dp, mut dh, mut dk) = (0.0f64, 0.0f64, 0.0f64);
    for name in MAPS {
        let g = generate(&std::fs::read_to_string(maps().join(format!("{name}.xml"))).unwrap(), &[], &Defaults::default())
            .map_err(|e| format!("{name}: {e}"))?;
        let (p, h, k, _) = chain_errors(&emit(&g.assembly.network, &EmitOptions::new(OdrVersion::V1_4)));
        dp = dp.max(p);
        dh = dh.max(h);
        dk = dk.max(k);
    }

    let cases = 250;
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let strategy = (1.0..50.0f64, prop::collection::vec(knot(), 1..6))
        .prop_filter("needs a spiral", |(_, knots)| knots.iter().any(|k| k.0 != 0.0));
    let worst = std::cell::Cell::new((0.0f64, 0.0f64, 0.0f64));
    let result = runner.run(&strategy, |(lead, knots)| {
        let (doc, expected) = spiral_road((lead * 10.0).round() / 10.0, &knots);
        let g = generate(&doc, &[], &Defaults::default()).map_err(|e| TestCaseError::fail(format!("{e}\n{doc}")))?;
        let xodr = emit(&g.assembly.network, &EmitOptions::new(OdrVersion::V1_4));
        let (p, h, k, spiral_roads) = chain_errors(&xodr);
        prop_assert_eq!(spiral_roads, 1);
        let parsed = Document::parse(&xodr).unwrap();
        let records: Vec<_> = parsed.descendants().filter(|n| n.has_tag_name("geometry")).map(record_curvature).collect();
        prop_assert_eq!(records.len(), expected.len());
        let mut off = 0.0f64;
        for (got, want) in records.iter().zip(&expected) {
            off = off.max((got.0 - want.0).abs()).max((got.1 - want.1).abs());
        }
        let w = worst.get();
        worst.set((w.0.max(p), w.1.max(h), w.2.max(k).max(off)));
        prop_assert!(p <= 1e-6 && h <= 1e-8 && k <= 1e-9 && off <= 1e-9, "{} {} {} {}\n{}", p, h, k, off, doc);
        Ok(())
    });
    let (rp, rh, rk) = worst.get();
    let detail = format!(
        "maps: {dp:.1e} m / {dh:.1e} rad / {dk:.1e} 1/m; {cases} random spiral roads: {rp:.1e} m / {rh:.1e} rad / {rk:.1e} 1/m"
    );
    match result {
        Ok(()) => check(dp <= 1e-6 && dh <= 1e-8 && dk <= 1e-9, detail),
        Err(e) => Err(format!("{detail}; {e}")),
    }
}

fn fresnel_accuracy() -> Outcome {
    let n = 10_000;
    let mut worst = 0.0f64;
    for i in 0..n {
        let u = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
        let (c, s) = fresnel(u).map_err(|e| e.to_string())?;
        let c_ref = integrate(&|t| (t * t).cos(), 0.0, u, 1e-14);
        let s_ref = integrate(&|t| (t * t).sin(), 0.0, u, 1e-14);
        worst = worst.max((c - c_ref).abs()).max((s - s_ref).abs());
    }
    check(worst <= 1e-9, format!("max error {worst:.2e} over {n} points"))
}

fn lane_cubics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let w0 = rng.gen_range(0.5..6.0);
        let ds = rng.gen_range(1.0..100.0);
        let s0 = rng.gen_range(0.0..200.0);
        let open = widening(w0, s0, ds).map_err(|e| e.to_string())?;
        let close = lapse(w0, s0, ds).map_err(|e| e.to_string())?;
        let errors = [
            open.eval(s0),
            open.eval(s0 + ds) - w0,
            open.slope(s0),
            open.slope(s0 + ds),
            close.eval(s0) - w0,
            close.eval(s0 + ds),
            close.slope(s0),
            close.slope(s0 + ds),
        ];
        worst = errors.iter().fold(worst, |m, e| m.max(e.abs()));
    }
    check(worst <= 1e-12, format!("max boundary error {worst:.2e} over 1000 widenings and lapses"))
}

fn gap_closing() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut converged = 0;
    let mut times = Vec::new();
    let mut failures = Vec::new();
    for _ in 0..100 {
        let l_sp = rng.gen_range(5.0..50.0);
        let l_arc = rng.gen_range(5.0..100.0);
        let r = rng.gen_range(20.0..500.0);
        let k = if rng.gen_bool(0.5) { 1.0 / r } else { -1.0 / r };
        let start = Pose::new(rng.gen_range(-1000.0..1000.0), rng.gen_range(-1000.0..1000.0), rng.gen_range(-PI..PI));
        let forward = CurvatureProfile::new()
            .append(Primitive::Spiral { length: l_sp, k_start: 0.0, k_end: k })
            .and_then(|p| p.append(Primitive::Arc { length: l_arc, curvature: k }))
            .and_then(|p| p.append(Primitive::Spiral { length: l_sp, k_start: k, k_end: 0.0 }))
            .map_err(|e| e.to_string())?;
        let goal = forward.resolve(start).end;
        let t = Instant::now();
        let result = close_gap(start, goal);
        times.push(t.elapsed());
        match result {
            Ok(c) => {
                let end = c.profile.resolve(start).end;
                let dp = end.distance(goal);
                let dh = angle_gap(end.phi, goal.phi);
                if dp <= 1e-3 && dh <= 1e-4 {
                    converged += 1;
                } else {
                    failures.push(format!("L_sp {l_sp:.1} L_arc {l_arc:.1} R {r:.1}: {dp:.1e} m {dh:.1e} rad"));
                }
            }
            Err(e) => failures.push(format!("L_sp {l_sp:.1} L_arc {l_arc:.1} R {r:.1}: {e}")),
        }
    }
    times.sort();
    let median = (times[49] + times[50]) / 2;
    let mut detail = format!("{converged}/100 converged, median {:.2} ms", median.as_secs_f64() * 1e3);
    if !failures.is_empty() {
        detail += &format!("; misses: {}", failures.join(", "));
    }
    check(converged >= 95 && median < Duration::from_millis(50), detail)
}

fn compression() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = maps().join("two_tjunctions.xml");
    let out = dir.path().join("t.xodr");
    let o = roadgen(&["-i", path(&input), "-o", path(&out), "--stats"]);
    if !o.status.success() {
        return Err(format!("exit {:?}", o.status.code()));
    }
    let input_chars = std::fs::read_to_string(&input).unwrap().chars().count();
    let output_chars = std::fs::read_to_string(&out).unwrap().chars().count();
    let ratio = 100.0 * input_chars as f64 / output_chars as f64;
    let report = String::from_utf8(o.stdout).unwrap();
    let reported = report.lines().find(|l| l.starts_with("ratio")).ok_or("no ratio row in --stats")?;
    let reported_chars = reported.split_whitespace().nth(2).unwrap_or("");
    check(
        ratio <= 10.0 && reported_chars == format!("{ratio:.1}%"),
        format!("{input_chars} of {output_chars} chars = {ratio:.1}% (reported {reported_chars})"),
    )
}

fn numbers(xml: &str) -> Vec<f64> {
    let doc = Document::parse(xml).unwrap();
    doc.descendants().flat_map(|n| n.attributes().filter_map(|a| a.value().parse::<f64>().ok()).collect::<Vec<_>>()).collect()
}

fn counts(xml: &str) -> [usize; 3] {
    let doc = Document::parse(xml).unwrap();
    let n = |tag: &str| doc.descendants().filter(|d| d.has_tag_name(tag)).count();
    [n("road"), n("junction"), n("connection")]
}

fn variation() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = maps().join("huge_network.xml");
    let base = dir.path().join("base.xodr");
    let varied = dir.path().join("varied.xodr");
    let a = roadgen(&["-i", path(&input), "-o", path(&base)]);
    let b = roadgen(&["-i", path(&input), "-o", path(&varied), "--set", "C1.link.arc.radius=-120"]);
    if !a.status.success() || !b.status.success() {
        return Err(format!("exit {:?} / {:?}", a.status.code(), b.status.code()));
    }
    let (x, y) = (std::fs::read_to_string(&base).unwrap(), std::fs::read_to_string(&varied).unwrap());
    let (cx, cy) = (counts(&x), counts(&y));
    let (nx, ny) = (numbers(&x), numbers(&y));
    let changed = nx.iter().zip(&ny).filter(|(p, q)| p != q).count();
    check(
        cx == cy && nx.len() == ny.len() && changed >= 100,
        format!("roads/junctions/connections {cx:?} -> {cy:?}, {changed} of {} numbers changed", nx.len()),
    )
}

/// Every (incoming lane, outgoing lane) pair on different arms of each
/// junction, read from the arms' lanes and links alone.
fn lane_pairs(doc: &Document) -> HashMap<String, BTreeSet<(String, i64, String, i64)>> {
    let mut arms: HashMap<String, Vec<(String, bool, Vec<i64>)>> = HashMap::new();
    for road in doc.descendants().filter(|n| n.has_tag_name("road") && n.attribute("junction") == Some("-1")) {
        let link = child(road, "link");
        for (tag, at_end) in [("predecessor", false), ("successor", true)] {
            let Some(to) = link.children().find(|c| c.has_tag_name(tag)) else { continue };
            if to.attribute("elementType") != Some("junction") {
                continue;
            }
            let sections: Vec<_> = children(child(road, "lanes"), "laneSection").collect();
            let section = if at_end { sections.last().unwrap() } else { &sections[0] };
            let ids = section
                .descendants()
                .filter(|n| n.has_tag_name("lane") && n.attribute("type") == Some("driving"))
                .map(|n| n.attribute("id").unwrap().parse().unwrap())
                .collect();
            arms.entry(to.attribute("elementId").unwrap().to_owned()).or_default().push((
                road.attribute("id").unwrap().to_owned(),
                at_end,
                ids,
            ));
        }
    }
    let mut pairs: HashMap<String, BTreeSet<_>> = HashMap::new();
    for (junction, arms) in &arms {
        let set = pairs.entry(junction.clone()).or_default();
        for (from, from_end, from_ids) in arms {
            for (to, to_end, to_ids) in arms {
                if from == to && from_end == to_end {
                    continue;
                }
                // Traffic drives toward the end on right lanes.
                for &i in from_ids.iter().filter(|&&i| (i < 0) == *from_end) {
                    for &o in to_ids.iter().filter(|&&o| (o < 0) != *to_end) {
                        set.insert((from.clone(), i, to.clone(), o));
                    }
                }
            }
        }
    }
    pairs
}

/// Pairs realised by the connecting roads of each junction.
fn connected_pairs(doc: &Document) -> HashMap<String, BTreeSet<(String, i64, String, i64)>> {
    let mut pairs: HashMap<String, BTreeSet<_>> = HashMap::new();
    for road in doc.descendants().filter(|n| n.has_tag_name("road") && n.attribute("junction") != Some("-1")) {
        let link = child(road, "link");
        let lane = road.descendants().find(|n| n.has_tag_name("lane") && n.attribute("type") == Some("driving")).unwrap();
        let lane_link = child(lane, "link");
        let id = |n: Node| -> i64 { n.attribute("id").unwrap().parse().unwrap() };
        let (mut from, mut to) = (
            (child(link, "predecessor").attribute("elementId").unwrap().to_owned(), id(child(lane_link, "predecessor"))),
            (child(link, "successor").attribute("elementId").unwrap().to_owned(), id(child(lane_link, "successor"))),
        );
        if id(lane) > 0 {
            std::mem::swap(&mut from, &mut to);
        }
        pairs.entry(road.attribute("junction").unwrap().to_owned()).or_default().insert((from.0, from.1, to.0, to.1));
    }
    pairs
}

fn junction_combinatorics() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let t_input = dir.path().join("t.xml");
    std::fs::write(
        &t_input,
        r#"<roadNetwork><segments><tjunction id="T">
<road id="main"><referenceLine><line length="100"/></referenceLine></road>
<road id="access"><referenceLine><line length="60"/></referenceLine></road>
<intersection><intersectionPoint road="main" s="50" partner="access" partnerS="0" angle="-90"/></intersection>
</tjunction></segments></roadNetwork>"#,
    )
    .unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, input, want) in [("X", maps().join("xjunction.xml"), 12), ("T", t_input, 6)] {
        let out = dir.path().join(format!("{name}.xodr"));
        let o = roadgen(&["-i", path(&input), "-o", path(&out)]);
        if !o.status.success() {
            return Err(format!("{name}: exit {:?}", o.status.code()));
        }
        let xml = std::fs::read_to_string(&out).unwrap();
        let doc = Document::parse(&xml).unwrap();
        let connecting = doc.descendants().filter(|n| n.has_tag_name("road") && n.attribute("junction") != Some("-1")).count();
        let oracle: usize = lane_pairs(&doc).values().map(BTreeSet::len).sum();
        let same_pairs = lane_pairs(&doc) == connected_pairs(&doc);
        ok &= connecting == want && oracle == want && same_pairs;
        detail.push(format!("{name}: {connecting} connecting roads, {oracle} enumerated lane pairs, pairs match {same_pairs}"));
    }
    check(ok, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("schema validity of the shipped maps", schema_validity),
        ("line-arc connection construction", connection_construction),
        ("geometry continuity", geometry_continuity),
        ("Fresnel integrals", fresnel_accuracy),
        ("lane width cubics", lane_cubics),
        ("gap closing", gap_closing),
        ("input size against output size", compression),
        ("single radius variation", variation),
        ("junction connection count", junction_combinatorics),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
