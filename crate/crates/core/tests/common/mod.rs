#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Cue -> response pool; participant `p` answers pool[(p * k) % len] at rank k.
pub const HUMAN_POOLS: &[(&str, &[&str])] = &[
    ("beach", &["sand", "sand", "ocean", "sun", "sand", "towel", "waves", "ocean"]),
    ("dog", &["cat", "bone", "cat", "bark", "leash", "cat", "puppy"]),
    ("tree", &["leaf", "leaf", "green", "forest", "bark", "leaf"]),
    ("idea", &["thought", "light", "brain", "thought", "plan"]),
    ("music", &["song", "song", "sound", "dance", "notes", "song", "band"]),
    ("cold", &["ice", "snow", "winter", "ice", "hot"]),
    ("truth", &["lie", "honesty", "lie", "fact"]),
    ("apple", &["fruit", "red", "pie", "fruit", "tree", "fruit"]),
];

pub const PARTICIPANTS: usize = 12;

/// SWOW-style wide CSV with a few "No more responses" gaps.
pub fn human_csv() -> String {
    let mut out = String::from("participantID,cue,R1,R2,R3\n");
    for (ci, (cue, pool)) in HUMAN_POOLS.iter().enumerate() {
        for p in 1..=PARTICIPANTS {
            let pick = |k: usize| pool[(p * k + ci) % pool.len()];
            let r3 = if (p + ci) % 5 == 0 { "No more responses" } else { pick(3) };
            out.push_str(&format!("{},{},{},{},{}\n", p + 100 * ci, cue.to_uppercase(), pick(1), pick(2), r3));
        }
    }
    out
}

pub fn frequency_list() -> String {
    let words = [
        ("beach", 900, 40),
        ("sand", 1200, 50),
        ("ocean", 2500, 60),
        ("sun", 8000, 90),
        ("towel", 300, 20),
        ("waves", 700, 30),
        ("dog", 6000, 80),
        ("cat", 5000, 70),
        ("bone", 1100, 40),
        ("bark", 400, 25),
        ("leash", 90, 9),
        ("puppy", 600, 30),
        ("tree", 4000, 70),
        ("leaf", 800, 35),
        ("green", 7000, 90),
        ("forest", 1500, 50),
        ("idea", 9000, 95),
        ("thought", 9500, 95),
        ("light", 12000, 99),
        ("brain", 2000, 60),
        ("plan", 6500, 85),
        ("music", 7000, 90),
        ("song", 5000, 80),
        ("sound", 6000, 85),
        ("dance", 1800, 55),
        ("notes", 1300, 45),
        ("band", 2600, 60),
        ("cold", 4000, 75),
        ("ice", 3000, 65),
        ("snow", 1700, 50),
        ("winter", 2100, 55),
        ("hot", 5200, 80),
        ("truth", 3300, 70),
        ("lie", 2900, 65),
        ("honesty", 500, 30),
        ("fact", 6100, 85),
        ("apple", 1600, 50),
        ("fruit", 1400, 45),
        ("red", 6900, 90),
        ("pie", 800, 35),
        ("rare", 2, 1),
        ("mp3", 400, 30),
    ];
    words.iter().map(|(w, c, d)| format!("{w} {c} {d}\n")).collect()
}

pub fn concreteness_csv() -> String {
    let ratings = [
        ("beach", 4.9),
        ("sand", 4.9),
        ("ocean", 4.8),
        ("sun", 4.8),
        ("towel", 4.9),
        ("waves", 4.6),
        ("dog", 4.9),
        ("cat", 4.9),
        ("bone", 4.8),
        ("bark", 4.2),
        ("leash", 4.7),
        ("tree", 5.0),
        ("leaf", 4.9),
        ("green", 4.0),
        ("forest", 4.7),
        ("idea", 1.6),
        ("thought", 1.9),
        ("light", 4.2),
        ("brain", 4.7),
        ("plan", 2.1),
        ("music", 3.8),
        ("song", 3.7),
        ("sound", 3.9),
        ("dance", 4.0),
        ("cold", 3.6),
        ("ice", 4.9),
        ("snow", 5.0),
        ("winter", 4.1),
        ("hot", 3.8),
        ("truth", 1.5),
        ("lie", 2.1),
        ("honesty", 1.6),
        ("fact", 1.9),
        ("apple", 5.0),
        ("fruit", 4.9),
        ("red", 4.0),
        ("pie", 4.9),
    ];
    let mut out = String::from("Word,Bigram,Conc.M,Conc.SD\n");
    for (w, r) in ratings {
        out.push_str(&format!("{w},0,{r},0.5\n"));
    }
    out
}

/// Synthetic agent over the same cues: a mix of point-mass answers and
/// per-rank categoricals.
pub fn synthetic_spec() -> String {
    let mut out = String::from("cue\trank\tresponse\tprobability\n");
    out.push_str("beach\t*\tsand|ocean|sun\t1\n");
    out.push_str("dog\t1\tcat\t0.7\ndog\t1\tbone\t0.3\ndog\t2\tbark\t1\ndog\t3\tleash\t1\n");
    out.push_str("tree\t*\tleaf|green|forest\t0.6\ntree\t*\tforest|leaf|bark\t0.4\n");
    out.push_str("idea\t1\tthought\t0.5\nidea\t1\tlight\t0.25\nidea\t1\tbrain\t0.25\nidea\t2\tplan\t1\nidea\t3\tlight\t1\n");
    out.push_str("music\t*\tsong|dance|band\t1\n");
    out.push_str("cold\t1\tice\t0.6\ncold\t1\tsnow\t0.4\ncold\t2\twinter\t1\ncold\t3\thot\t1\n");
    out.push_str("truth\t1\tlie\t0.8\ntruth\t1\tfact\t0.2\ntruth\t2\thonesty\t1\ntruth\t3\tfact\t1\n");
    out.push_str("apple\t*\tfruit|red|pie\t1\n");
    out
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        let ws = Self { dir: tempfile::tempdir().unwrap() };
        std::fs::write(ws.path("swow.csv"), human_csv()).unwrap();
        std::fs::write(ws.path("freq.txt"), frequency_list()).unwrap();
        std::fs::write(ws.path("concreteness.csv"), concreteness_csv()).unwrap();
        std::fs::write(ws.path("agent.tsv"), synthetic_spec()).unwrap();
        std::fs::write(ws.path("corrections.tsv"), "ocaen\tocean\n").unwrap();
        ws
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    pub fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_wordassoc"))
            .args(args)
            .current_dir(self.dir.path())
            .env("RUST_LOG", "warn")
            .output()
            .unwrap()
    }

    pub fn run_ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    /// Ingests the human table and generates two synthetic temperatures.
    pub fn pipeline(&self) {
        self.run_ok(&["ingest", "--input", "swow.csv", "--out", "human.tsv", "--corrections", "corrections.tsv"]);
        self.run_ok(&[
            "generate",
            "--cues",
            "human.tsv",
            "--synthetic-spec",
            "agent.tsv",
            "--model",
            "agent",
            "--temperatures",
            "0.5,1",
            "--repetitions",
            "30",
            "--seed",
            "7",
            "--out-dir",
            "gen",
        ]);
    }

    pub fn norms_args(&self) -> Vec<String> {
        vec!["--freq-norms".into(), "freq.txt".into(), "--concr-norms".into(), "concreteness.csv".into()]
    }
}

pub fn file_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}
