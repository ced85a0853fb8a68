use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cts")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn compress_decompress_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.txt");
    let data: Vec<u8> = b"she sells sea shells by the sea shore\n".repeat(50);
    fs::write(&input, &data).unwrap();
    for variant in ["ctw", "cts", "cts-star"] {
        let packed = dir.path().join(format!("{variant}.cts"));
        let back = dir.path().join(format!("{variant}.out"));
        let out = cts(&["compress", "-i", p(&input), "-o", p(&packed), "--variant", variant, "--depth", "24"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(fs::metadata(&packed).unwrap().len() < data.len() as u64 / 4);
        let out = cts(&["decompress", "-i", p(&packed), "-o", p(&back)]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(fs::read(&back).unwrap(), data);
    }
}

#[test]
fn default_configuration_is_cts_48() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let packed = dir.path().join("packed");
    fs::write(&input, b"abc").unwrap();
    assert_eq!(cts(&["compress", "-i", p(&input), "-o", p(&packed)]).status.code(), Some(0));
    let header = fs::read(&packed).unwrap();
    assert_eq!(&header[..4], b"CTS1");
    assert_eq!(header[4], 1);
    assert_eq!(u16::from_le_bytes([header[5], header[6]]), 48);
}

#[test]
fn corrupted_header_exits_four_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let packed = dir.path().join("packed");
    let back = dir.path().join("back");
    fs::write(&input, b"hello, hello, hello").unwrap();
    assert_eq!(cts(&["compress", "-i", p(&input), "-o", p(&packed)]).status.code(), Some(0));
    let mut bytes = fs::read(&packed).unwrap();
    bytes[0] ^= 0xff;
    fs::write(&packed, &bytes).unwrap();
    let out = cts(&["decompress", "-i", p(&packed), "-o", p(&back)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!back.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2, "no temporary files left");

    bytes[0] ^= 0xff;
    bytes[4] = 7;
    fs::write(&packed, &bytes).unwrap();
    assert_eq!(cts(&["decompress", "-i", p(&packed), "-o", p(&back)]).status.code(), Some(4));
    assert!(!back.exists());
}

#[test]
fn bad_flags_exit_two_with_usage() {
    let out = cts(&["compress", "--variant", "lz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(cts(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cts(&["compress", "-i", "a", "-o", "b", "--depth", "-3"]).status.code(), Some(2));
}

#[test]
fn missing_input_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let code = cts(&["decompress", "-i", p(&dir.path().join("absent")), "-o", p(&out)]).status.code();
    assert_eq!(code, Some(3));
    assert!(!out.exists());
}

#[test]
fn bench_check_against_baseline() {
    let corpus = tempfile::tempdir().unwrap();
    let work = tempfile::tempdir().unwrap();
    fs::write(corpus.path().join("zeros"), vec![0u8; 4000]).unwrap();
    let csv = work.path().join("results.csv");
    let out = cts(&["bench", "--dir", p(corpus.path()), "--configs", "ctw:8", "--csv", p(&csv), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("file,variant,depth,input_bytes,output_bytes,bpb,elapsed_s"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..4], ["zeros", "ctw", "8", "4000"]);
    let bpb: f64 = row[5].parse().unwrap();

    let good = work.path().join("good.csv");
    fs::write(&good, format!("file,variant,depth,bpb\nzeros,ctw,8,{bpb}\n")).unwrap();
    let args = ["bench", "--dir", p(corpus.path()), "--configs", "ctw:8", "--check", "--baseline", p(&good), "--csv", p(&csv)];
    assert_eq!(cts(&args).status.code(), Some(0));

    let bad = work.path().join("bad.csv");
    fs::write(&bad, format!("file,variant,depth,bpb\nzeros,ctw,8,{}\n", bpb + 1.0)).unwrap();
    let args = ["bench", "--dir", p(corpus.path()), "--configs", "ctw:8", "--check", "--baseline", p(&bad), "--tolerance", "0.05", "--csv", p(&csv)];
    assert_eq!(cts(&args).status.code(), Some(5));

    let absent = work.path().join("absent");
    assert_eq!(cts(&["bench", "--dir", p(&absent)]).status.code(), Some(3));
}

#[test]
fn selftest_passes() {
    let out = cts(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
