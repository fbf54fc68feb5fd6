use std::fs;
use std::process::{Command, Output};

fn tropcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropcount"))
        .args(args)
        .env_remove("TROPCOUNT_JOBS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const P1: &str = "rank 1\nray 1\nray -1\ncone 0\ncone 1\n";
const P2: &str = "rank 2\nray 1 0\nray 0 1\nray -1 -1\ncone 0 1\ncone 1 2\ncone 0 2\n";

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn severi_commands() {
    let o = tropcount(&["severi", "-d", "2", "-g", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("total: 1\n"));
    let o = tropcount(&["severi", "-d", "3", "-g", "0", "--oracle"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("total: 12\n") && s.contains("oracle_check: ok"));
    assert_eq!(tropcount(&["severi", "-d", "0", "-g", "0"]).status.code(), Some(2));
    assert_eq!(tropcount(&["severi", "-d", "5"]).status.code(), Some(2));
    assert_eq!(tropcount(&["severi"]).status.code(), Some(2));
}

#[test]
fn hurwitz_commands() {
    assert!(stdout(&tropcount(&["hurwitz", "-d", "2", "-g", "0"])).contains("total: 1/2\n"));
    let o = tropcount(&["hurwitz", "-d", "3", "-g", "0", "--oracle"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("total: 4\n"));
    assert!(stdout(&tropcount(&["hurwitz", "-d", "1", "-g", "0"])).contains("total: 1\n"));
}

#[test]
fn json_lines_carry_the_seed() {
    let o = tropcount(&["--seed", "17", "--format", "json-lines", "severi", "-d", "2"]);
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() >= 2);
    assert!(lines.iter().all(|l| l["seed"] == 17));
    assert_eq!(lines.last().unwrap()["total"], "1");
}

#[test]
fn effectivity_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = write(&dir, "p1.fan", P1);
    let p2 = write(&dir, "p2.fan", P2);
    let c = write(&dir, "p1.ct", "genus 0\ncontacts\n1\n-1\n");
    assert!(stdout(&tropcount(&["effectivity", &p1, &c])).contains("verdict: NOT effective"));
    let severi = "genus 0\ncontacts\n1 0\n1 0\n0 1\n0 1\n-1 -1\n-1 -1\n0 0\n0 0\n0 0\n0 0\n0 0\n";
    let c = write(&dir, "s.ct", severi);
    assert!(stdout(&tropcount(&["effectivity", &p2, &c])).contains("verdict: effective\n"));
    let ev = stdout(&tropcount(&["evalspace", &p2, &c]));
    assert!(ev.contains("product_rank: 16") && ev.contains("rubber_rank: 14"));
    let c = write(&dir, "e.ct", "genus 0\ncontacts\n");
    assert!(stdout(&tropcount(&["effectivity", &p1, &c])).contains("effective (vacuous)"));
    let bad = write(&dir, "bad.ct", "genus x\n");
    assert_eq!(tropcount(&["effectivity", &p1, &bad]).status.code(), Some(2));
}

fn attr(line: &str, name: &str) -> f64 {
    let key = format!(" {name}=\"");
    let start = line.find(&key).unwrap() + key.len();
    line[start..].split('"').next().unwrap().parse().unwrap()
}

#[test]
fn render_matches_solver_positions() {
    let dir = tempfile::tempdir().unwrap();
    let star = write(
        &dir,
        "star.curve",
        "vertex 0 genus 0 at 0 0\nleg 0 marking 1 slope -1 0\nleg 0 marking 2 slope 0 -1\nleg 0 marking 3 slope 1 1\nleg 0 marking 4 slope 0 0\n",
    );
    let svg = stdout(&tropcount(&["render", &star]));
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("marker-end").count(), 3);
    assert_eq!(svg.matches("stroke-dasharray").count(), 1);

    let conic = stdout(&tropcount(&["severi", "-d", "2"]));
    let text: String = conic
        .lines()
        .filter(|l| l.starts_with("  "))
        .map(|l| format!("{}\n", &l[2..]))
        .collect();
    let curve = tropcount::curve::TropicalMap::parse(&text).unwrap();
    let file = write(&dir, "conic.curve", &text);
    let out = dir.path().join("conic.svg");
    assert!(tropcount(&["render", &file, "--out", out.to_str().unwrap()])
        .status
        .success());
    let svg = fs::read_to_string(&out).unwrap();
    let edges: Vec<&str> = svg.lines().filter(|l| l.contains("class=\"edge\"")).collect();
    assert_eq!(edges.len(), curve.combinatorial_type().edges().len());
    for (line, e) in edges.iter().zip(curve.combinatorial_type().edges()) {
        let f = |v: usize, k: usize| {
            let x: f64 = num_traits::ToPrimitive::to_f64(&curve.positions()[v][k]).unwrap();
            if k == 0 {
                x * 40.0
            } else {
                -x * 40.0
            }
        };
        for (name, want) in [
            ("x1", f(e.a, 0)),
            ("y1", f(e.a, 1)),
            ("x2", f(e.b, 0)),
            ("y2", f(e.b, 1)),
        ] {
            assert!((attr(line, name) - want).abs() < 1e-3, "{name}");
        }
    }

    let bad = write(&dir, "bad.curve", "vertex zero\n");
    assert_eq!(tropcount(&["render", &bad]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_job_counts() {
    let a = tropcount(&["--seed", "3", "severi", "-d", "3"]);
    let b = tropcount(&["--seed", "3", "--jobs", "8", "severi", "-d", "3"]);
    let c = tropcount(&["--seed", "3", "--jobs", "1", "severi", "-d", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn oracle_command() {
    assert!(stdout(&tropcount(&["oracle", "severi", "-d", "4"])).contains("total: 620"));
    assert!(stdout(&tropcount(&["oracle", "hurwitz", "-d", "3", "-g", "1"])).contains("total:"));
}

#[test]
fn gammarub_reports_support() {
    let o = tropcount(&["gammarub", "-d", "2", "--format", "json-lines"]);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines
        .iter()
        .any(|l| l["shape"] == "polynomial" && l["degree"] == 8 && l["interpolated_degree"] == 8));
}
