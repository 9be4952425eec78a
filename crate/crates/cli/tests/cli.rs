use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const W9: &str = r#"{"n":9,"one_edges":[[0,1],[0,2],[0,3],[1,2],[1,4],[2,5],[3,6],[4,7],[5,8],[6,7],[6,8],[7,8]]}"#;

fn tsp12(args: &[&str], env: &[(&str, &str)]) -> (i32, Value, Output) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tsp12"));
    cmd.args(args).env_remove("TSP12_PIVOT_BUDGET").env_remove("TSP12_NODE_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn tsp12");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), json, out)
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn lp_and_ip_on_w9() {
    let dir = TempDir::new().unwrap();
    let w9 = write(&dir, "w9.json", W9);
    let (code, v, _) = tsp12(&["lp", "--instance", s(&w9), "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["objective"], "9");
    let (code, v, _) = tsp12(&["ip", "--instance", s(&w9), "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["cost"], 10);
    let (code, v, _) = tsp12(&["oracle", "--instance", s(&w9)], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["cost"], 10);
}

#[test]
fn instance_hash_is_git_blob_sha1() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "k3.json", "{\"n\":3,\"one_edges\":[]}\n");
    let (code, v, _) = tsp12(&["oracle", "--instance", s(&p)], &[]);
    assert_eq!(code, 0);
    let bytes = std::fs::read(&p).unwrap();
    let expected = {
        use std::fmt::Write;
        let header = format!("blob {}\0", bytes.len());
        let digest = sha1_reference(&[header.as_bytes(), &bytes].concat());
        digest.iter().fold(String::new(), |mut acc, b| {
            write!(acc, "{b:02x}").unwrap();
            acc
        })
    };
    assert_eq!(v["instance_hash"], expected);
    assert_eq!(expected, "40aba259e87551535c3f269cfef059b8083bdab6");
    assert_eq!(v["cost"], 6);
}

/// Straight-line SHA-1, independent of the crate the binary uses.
fn sha1_reference(msg: &[u8]) -> [u8; 20] {
    let mut h: [u32; 5] = [0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476, 0xC3D2E1F0];
    let mut data = msg.to_vec();
    data.push(0x80);
    while data.len() % 64 != 56 {
        data.push(0);
    }
    data.extend_from_slice(&((msg.len() as u64) * 8).to_be_bytes());
    for chunk in data.chunks(64) {
        let mut w = [0u32; 80];
        for i in 0..16 {
            w[i] = u32::from_be_bytes(chunk[4 * i..4 * i + 4].try_into().unwrap());
        }
        for i in 16..80 {
            w[i] = (w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16]).rotate_left(1);
        }
        let [mut a, mut b, mut c, mut d, mut e] = h;
        for (i, wi) in w.iter().enumerate() {
            let (f, k) = match i {
                0..=19 => ((b & c) | (!b & d), 0x5A827999),
                20..=39 => (b ^ c ^ d, 0x6ED9EBA1),
                40..=59 => ((b & c) | (b & d) | (c & d), 0x8F1BBCDC),
                _ => (b ^ c ^ d, 0xCA62C1D6),
            };
            let t = a.rotate_left(5).wrapping_add(f).wrapping_add(e).wrapping_add(k).wrapping_add(*wi);
            e = d;
            d = c;
            c = b.rotate_left(30);
            b = a;
            a = t;
        }
        for (x, y) in h.iter_mut().zip([a, b, c, d, e]) {
            *x = x.wrapping_add(y);
        }
    }
    let mut out = [0u8; 20];
    for (i, x) in h.iter().enumerate() {
        out[4 * i..4 * i + 4].copy_from_slice(&x.to_be_bytes());
    }
    out
}

#[test]
fn sweep_n6() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.json");
    let (code, v, _) = tsp12(&["enum", "sweep", "--n", "6", "--workers", "2", "--verify", "--out", s(&out)], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["worst_ratio"], "16/15");
    assert_eq!(v["count"], 56);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, v);
}

#[test]
fn sweep_checkpoint_corruption_is_structural() {
    let dir = TempDir::new().unwrap();
    let ck = write(&dir, "ck.jsonl", "{not json\n");
    let (code, v, _) = tsp12(&["enum", "sweep", "--n", "5", "--checkpoint", s(&ck)], &[]);
    assert_eq!(code, 3);
    assert_eq!(v["exit_code"], 3);
}

#[test]
fn tour_and_dual_verify() {
    let dir = TempDir::new().unwrap();
    let w9 = write(&dir, "w9.json", W9);
    for method in ["auto", "76", "109", "stitch"] {
        let (code, v, _) = tsp12(&["tour", "--instance", s(&w9), "--method", method, "--verify"], &[]);
        assert_eq!(code, 0, "method {method}");
        assert_eq!(v["cost"], 10, "method {method}");
    }
    let (code, v, _) = tsp12(&["tour", "--instance", s(&w9), "--method", "109", "--trace"], &[]);
    assert_eq!(code, 0);
    assert!(v["trace"].as_array().is_some_and(|t| !t.is_empty()));

    let cert = dir.path().join("cert.json");
    let (code, v, _) = tsp12(&["dual", "--instance", s(&w9), "--verify", "--out", s(&cert)], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], "9");
    let body: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let cert_only = write(&dir, "c.json", &body["certificate"].to_string());
    let (code, v, _) = tsp12(&["dual", "--instance", s(&w9), "--check", s(&cert_only)], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], "9");

    let mut inflated = body["certificate"].clone();
    inflated["y_node"]["0"] = Value::from("3/2");
    inflated["value"] = Value::from("19/2");
    let inflated = write(&dir, "c2.json", &inflated.to_string());
    let (code, _, _) = tsp12(&["dual", "--instance", s(&w9), "--check", s(&inflated)], &[]);
    assert_eq!(code, 3);
}

#[test]
fn f2m_and_two_match() {
    let dir = TempDir::new().unwrap();
    let w9 = write(&dir, "w9.json", W9);
    let sol = dir.path().join("x.json");
    let (code, v, _) = tsp12(&["lp", "--instance", s(&w9), "--f2m", "--out", s(&sol)], &[]);
    assert_eq!(code, 0);
    let x = write(&dir, "xx.json", &v["solution"].to_string());
    let (code, v, _) = tsp12(&["f2m", "--instance", s(&w9), "--solution", s(&x), "--canonicalize", "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["objective"], "9");
    let (code, v, _) = tsp12(&["two-match", "--instance", s(&w9), "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["cost"], 10);
    assert_eq!(v["r"], 0);
}

#[test]
fn cost_search_on_w9_vertex() {
    let dir = TempDir::new().unwrap();
    let w9 = write(&dir, "w9.json", W9);
    let (_, v, _) = tsp12(&["lp", "--instance", s(&w9)], &[]);
    let x = write(&dir, "x.json", &v["solution"].to_string());
    let (code, v, _) = tsp12(&["cost-search", "--vertex", s(&x), "--alpha", "10/9", "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["objective"], "0");
    let (code, _, _) = tsp12(&["cost-search", "--vertex", s(&x), "--alpha", "ten"], &[]);
    assert_eq!(code, 2);
}

#[test]
fn transforms() {
    let dir = TempDir::new().unwrap();
    let two_triangles = write(&dir, "tt.json", r#"{"n":6,"one_edges":[[0,1],[0,2],[1,2],[3,4],[3,5],[4,5]]}"#);
    let (code, v, _) = tsp12(&["transform", "--instance", s(&two_triangles), "--op", "connectify", "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["instance"]["n"], 7);
    let (code, v, _) = tsp12(&["transform", "--instance", s(&two_triangles), "--op", "absorber", "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["instance"]["n"], 7);
    assert_eq!(v["solution"]["objective"], "8");
    let bowtie = write(&dir, "bt.json", r#"{"n":6,"one_edges":[[0,1],[0,2],[1,2],[2,3],[3,4],[3,5],[4,5]]}"#);
    let (code, v, _) = tsp12(&["transform", "--instance", s(&bowtie), "--op", "biconnectify", "--verify"], &[]);
    assert_eq!(code, 0);
    assert_eq!(v["instance"]["n"], 7);

    let w9 = write(&dir, "w9.json", W9);
    let (code, _, _) = tsp12(&["transform", "--instance", s(&w9), "--op", "connectify"], &[]);
    assert_eq!(code, 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let w9 = write(&dir, "w9.json", W9);

    let bad = write(&dir, "bad.json", r#"{"n":3,"one_edges":[[0,0]]}"#);
    let (code, v, out) = tsp12(&["lp", "--instance", s(&bad)], &[]);
    assert_eq!(code, 2);
    assert_eq!(v["exit_code"], 2);
    assert!(!out.stderr.is_empty());

    let missing = dir.path().join("nope.json");
    assert_eq!(tsp12(&["ip", "--instance", s(&missing)], &[]).0, 2);

    let (code, _, _) = tsp12(&["ip", "--instance", s(&w9)], &[("TSP12_NODE_BUDGET", "1")]);
    assert_eq!(code, 4);
    let (code, _, _) = tsp12(&["lp", "--instance", s(&w9)], &[("TSP12_PIVOT_BUDGET", "1")]);
    assert_eq!(code, 4);

    // An integral solution is not something the 10/9 builder accepts.
    let tt = write(&dir, "tt.json", r#"{"n":6,"one_edges":[[0,1],[0,2],[1,2],[3,4],[3,5],[4,5]]}"#);
    let (code, _, _) = tsp12(&["tour", "--instance", s(&tt), "--method", "109"], &[]);
    assert_eq!(code, 2);

    // Degree-violating solution file.
    let x = write(&dir, "x.json", r#"{"x":{"0-1":"1"}}"#);
    let (code, _, _) = tsp12(&["f2m", "--instance", s(&tt), "--solution", s(&x)], &[]);
    assert_ne!(code, 0);
}
