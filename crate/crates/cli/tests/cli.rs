use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn maps() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../maps")
}

fn roadgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roadgen")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generates_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.xodr");
    let input = maps().join("xjunction.xml");
    for version in ["1.4", "1.5"] {
        let o = roadgen(&["-i", path(&input), "-o", path(&out), "--odr-version", version, "--validate"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains(&format!(r#"revMinor="{}""#, &version[2..])));
    }
}

#[test]
fn output_defaults_to_the_input_name() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("net.xml");
    std::fs::copy(maps().join("xjunction.xml"), &input).unwrap();
    let o = roadgen(&["--input", path(&input)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("net.xodr").exists());
}

#[test]
fn missing_input_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.xodr");
    let o = roadgen(&["-i", path(&dir.path().join("nope.xml")), "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: input: cannot read"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn input_errors_exit_with_1_and_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.xml");
    let text = std::fs::read_to_string(maps().join("xjunction.xml")).unwrap().replace(r#"partnerS="50""#, r#"partnerS="500""#);
    std::fs::write(&input, text).unwrap();
    let out = dir.path().join("bad.xodr");
    let o = roadgen(&["-i", path(&input), "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: input: 16:"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_override_target_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = roadgen(&[
        "-i",
        path(&maps().join("xjunction.xml")),
        "-o",
        path(&dir.path().join("x.xodr")),
        "--set",
        "J1.main.arc.radius=10",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("J1.main.arc.radius"), "{}", stderr(&o));
}

#[test]
fn impossible_gap_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("gap.xml");
    std::fs::write(
        &input,
        r#"<roadNetwork>
  <segments>
    <connectionRoad id="A"><road id="r"><referenceLine><line length="50"/></referenceLine></road></connectionRoad>
    <connectionRoad id="B"><road id="r"><referenceLine><line length="50"/></referenceLine></road></connectionRoad>
  </segments>
  <links><link segmentA="A" roadA="r" endA="end" segmentB="B" roadB="r" endB="start"/></links>
  <closeRoadNetwork><close segmentA="B" roadA="r" endA="end" segmentB="A" roadB="r" endB="start"/></closeRoadNetwork>
</roadNetwork>"#,
    )
    .unwrap();
    let o = roadgen(&["-i", path(&input), "-o", path(&dir.path().join("gap.xodr"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: assemble: 7:"), "{}", stderr(&o));
}

#[test]
fn schema_violations_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let xsd = dir.path().join("other.xsd");
    std::fs::write(
        &xsd,
        r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"><xs:element name="other"/></xs:schema>"#,
    )
    .unwrap();
    let out = dir.path().join("x.xodr");
    let o = roadgen(&["-i", path(&maps().join("xjunction.xml")), "-o", path(&out), "--validate", path(&xsd)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("error: validate:"), "{}", stderr(&o));
    assert!(out.exists());

    let o = roadgen(&["-i", path(&maps().join("xjunction.xml")), "-o", path(&out), "--validate", path(&dir.path().join("none.xsd"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = maps().join("huge_network.xml");
    let mut results = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("{k}.xodr"));
        let svg = dir.path().join(format!("{k}.svg"));
        let o = roadgen(&["-i", path(&input), "-o", path(&out), "--svg", path(&svg)]);
        assert!(o.status.success(), "{}", stderr(&o));
        results.push((std::fs::read(&out).unwrap(), std::fs::read(&svg).unwrap()));
    }
    assert!(results[0] == results[1]);
}

#[test]
fn stats_report_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let input = maps().join("two_tjunctions.xml");
    let out = dir.path().join("t.xodr");
    let o = roadgen(&["-i", path(&input), "-o", path(&out), "--stats"]);
    assert!(o.status.success());
    let report = String::from_utf8(o.stdout).unwrap();
    let input_chars = std::fs::read(&input).unwrap().len();
    let output_chars = std::fs::read(&out).unwrap().len();
    let rows: Vec<Vec<&str>> = report.lines().map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(rows[1][0], "OpenDRIVE");
    assert_eq!(rows[1][2], output_chars.to_string());
    assert_eq!(rows[2][2], input_chars.to_string());
    assert_eq!(rows[3][2], format!("{:.1}%", 100.0 * input_chars as f64 / output_chars as f64));
}

#[test]
fn defaults_file_changes_lane_widths() {
    let dir = tempfile::tempdir().unwrap();
    let defaults = dir.path().join("d.toml");
    std::fs::write(&defaults, "[main]\nwidth = 3.25\n").unwrap();
    let out = dir.path().join("x.xodr");
    let o = roadgen(&["-i", path(&maps().join("xjunction.xml")), "-o", path(&out), "--defaults", path(&defaults), "--validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&out).unwrap().contains(r#"a="3.25""#));

    std::fs::write(&defaults, "[main]\nwidth = \"wide\"\n").unwrap();
    let o = roadgen(&["-i", path(&maps().join("xjunction.xml")), "-o", path(&out), "--defaults", path(&defaults)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn svg_draws_one_reference_line_per_road() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("x.svg");
    let xodr = dir.path().join("x.xodr");
    let o = roadgen(&["-i", path(&maps().join("xjunction.xml")), "-o", path(&xodr), "--svg", path(&svg)]);
    assert!(o.status.success());
    let roads = std::fs::read_to_string(&xodr).unwrap().matches("<road ").count();
    let text = std::fs::read_to_string(&svg).unwrap();
    let reference = text.split("stroke=\"#c0392b\"").nth(1).unwrap();
    assert_eq!(reference.matches("<polyline").count(), roads);
    assert_eq!(roads, 16);
}
