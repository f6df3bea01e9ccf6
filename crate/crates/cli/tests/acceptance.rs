//! Acceptance criterion 9: a 20-entry toy KB and 5 sentences flow through
//! resolve -> perturb (synthetic 8x8x4 clips) -> loss -> eval, and re-running
//! every stage from its manifest reproduces each output byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use sha2::{Digest, Sha256};

use signpipe_core::distill::{save_distribution_file, DistributionSequence};
use signpipe_core::kb::{entry_to_json, GlossEntry, Keypoint, PoseFrame, PoseLayout, PoseSequence};
use signpipe_core::perturb::{load_clip, save_clip, save_landmarks, FrameGrid, VideoClip};

fn signpipe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signpipe"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn check(output: &Output, what: &str) {
    assert!(
        output.status.success(),
        "{what} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

/// 20 toy entries: two-point poses at distinct coordinates, synonyms on a
/// few entries so level 3 fires.
fn toy_entries() -> Vec<GlossEntry> {
    let symbols = [
        "你好", "世界", "再见", "谢谢", "朋友", "学习", "工作", "吃饭", "喝水", "回家",
        "早上", "晚上", "今天", "明天", "高兴", "难过", "帮助", "时间", "地方", "名字",
    ];
    symbols
        .iter()
        .enumerate()
        .map(|(i, symbol)| {
            let a = Keypoint::new(i as f64 + 0.5, 2.0 * i as f64, 1.0).unwrap();
            let b = Keypoint::new(i as f64 + 3.0, 2.0 * i as f64 + 1.0, 0.9).unwrap();
            let frame = PoseFrame::new(PoseLayout::Custom(2), vec![a, b]).unwrap();
            let pose = PoseSequence::new(vec![frame.clone(), frame], 25.0).unwrap();
            let mut entry = GlossEntry::new(*symbol, pose);
            if i % 7 == 0 {
                entry = entry.with_synonyms(vec!["嗨".to_string()]);
            }
            entry
        })
        .collect()
}

/// Deterministic 8x8 grayscale clip of 4 frames derived from a sentence's
/// resolved symbols, with one landmark per symbol sweeping across the frame.
fn synthesize_clip(symbols: &[String]) -> VideoClip {
    let mut frames = Vec::new();
    for t in 0..4usize {
        let mut values = vec![0.1; 8 * 8];
        for (k, symbol) in symbols.iter().enumerate() {
            let code: u32 = symbol.chars().map(|c| c as u32).sum();
            let x = (code as usize + 3 * t + k) % 8;
            let y = (code as usize / 7 + t + 2 * k) % 8;
            values[y * 8 + x] = 0.2 + 0.1 * ((t + k) % 8) as f64;
        }
        frames.push(FrameGrid::new(8, 8, 1, values).unwrap());
    }
    VideoClip::new(frames).unwrap()
}

fn synthesize_landmarks(symbols: &[String]) -> Vec<Vec<Keypoint>> {
    (0..4usize)
        .map(|t| {
            symbols
                .iter()
                .enumerate()
                .map(|(k, symbol)| {
                    let code: u32 = symbol.chars().map(|c| c as u32).sum();
                    // Big jumps between frames so the speed threshold trips.
                    let x = ((code as usize + 5 * t + k) % 8) as f64;
                    let y = ((code as usize / 3 + 4 * t + k) % 8) as f64;
                    Keypoint::new(x, y, 1.0).unwrap()
                })
                .collect()
        })
        .collect()
}

/// Per-frame 4-bin pixel-value histogram, floored and normalized.
fn histogram_sequence(clip: &VideoClip) -> DistributionSequence {
    let steps: Vec<Vec<f64>> = clip
        .frames()
        .iter()
        .map(|frame| {
            let mut bins = [1.0f64; 4]; // one-count floor keeps bins positive
            for &v in frame.values() {
                let bin = ((v * 4.0) as usize).min(3);
                bins[bin] += 1.0;
            }
            let total: f64 = bins.iter().sum();
            bins.iter().map(|b| b / total).collect()
        })
        .collect();
    DistributionSequence::new(steps).unwrap()
}

#[test]
fn criterion_9_end_to_end_golden() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // Toy KB.
    let records: Vec<String> = toy_entries().iter().map(entry_to_json).collect();
    std::fs::write(root.join("records.jsonl"), records.join("\n") + "\n").unwrap();
    check(
        &signpipe(
            root,
            &[
                "kb", "build",
                "--input", "records.jsonl",
                "--output", "kb.jsonl",
                "--embedding-dim", "32",
                "--embed", "hashed",
                "--quiet",
            ],
        ),
        "kb build",
    );

    // Five sentences: direct hits, one synonym-only token, one junk token.
    let sentences = "你好世界\n嗨再见\n谢谢朋友\n学习工作时间\n今天回家吃饭乙\n";
    std::fs::write(root.join("sentences.txt"), sentences).unwrap();
    check(
        &signpipe(
            root,
            &[
                "resolve",
                "--kb", "kb.jsonl",
                "--input", "sentences.txt",
                "--output", "resolved.jsonl",
                "--tokenizer", "lexicon",
                "--on-unresolved", "skip",
                "--quiet",
            ],
        ),
        "resolve",
    );

    // Every resolved symbol must be a KB entry; collect them per sentence.
    let resolved_text = std::fs::read_to_string(root.join("resolved.jsonl")).unwrap();
    let kb_symbols: Vec<String> = toy_entries().iter().map(|e| e.symbol.clone()).collect();
    let mut per_sentence_symbols: Vec<Vec<String>> = Vec::new();
    for line in resolved_text.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        let symbols: Vec<String> = record["items"]
            .as_array()
            .unwrap()
            .iter()
            .map(|item| item["symbol"].as_str().unwrap().to_string())
            .collect();
        for symbol in &symbols {
            assert!(kb_symbols.contains(symbol), "{symbol} not in the KB");
        }
        per_sentence_symbols.push(symbols);
    }
    assert_eq!(per_sentence_symbols.len(), 5);
    assert!(per_sentence_symbols.iter().all(|s| !s.is_empty()));

    // Synthetic clips per sentence -> perturb.
    let mut perturb_manifests = Vec::new();
    for (i, symbols) in per_sentence_symbols.iter().enumerate() {
        let clip = synthesize_clip(symbols);
        let clip_path = root.join(format!("clip{i}.spc1"));
        save_clip(&clip, &clip_path).unwrap();
        save_landmarks(
            &synthesize_landmarks(symbols),
            root.join(format!("lm{i}.jsonl")),
        )
        .unwrap();
        check(
            &signpipe(
                root,
                &[
                    "perturb",
                    "--clip", &format!("clip{i}.spc1"),
                    "--landmarks", &format!("lm{i}.jsonl"),
                    "--output", &format!("pert{i}.spc1"),
                    "--theta", "1.0",
                    "--radius", "2.0",
                    "--seed", "99",
                    "--ops-large", "pixel_shuffle,block_occlude:3x3",
                    "--ops-small", "gaussian_noise:0.05",
                    "--quiet",
                ],
            ),
            "perturb",
        );
        perturb_manifests.push(format!("pert{i}.spc1.manifest.json"));
    }

    // Distributions from the original/perturbed clips of sentence 0.
    let original = load_clip(root.join("clip0.spc1")).unwrap();
    let perturbed = load_clip(root.join("pert0.spc1")).unwrap();
    let p3d = histogram_sequence(&original);
    let p_t = histogram_sequence(&perturbed);
    save_distribution_file(&p3d, root.join("p3d.jsonl")).unwrap();
    save_distribution_file(&p_t, root.join("pT.jsonl")).unwrap();
    save_distribution_file(&p3d, root.join("lt.jsonl")).unwrap();
    save_distribution_file(&p_t, root.join("vt.jsonl")).unwrap();
    let targets: Vec<String> = p3d
        .steps()
        .iter()
        .map(|step| {
            let argmax = step
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            argmax.to_string()
        })
        .collect();
    std::fs::write(root.join("targets.txt"), targets.join("\n") + "\n").unwrap();
    check(
        &signpipe(
            root,
            &[
                "loss",
                "--pairs", "self:p3d.jsonl,pT.jsonl",
                "--pairs", "lm-video:lt.jsonl,vt.jsonl",
                "--pairs", "lm-t:lt.jsonl,vt.jsonl",
                "--ce", "pT.jsonl,targets.txt",
                "--output", "loss.json",
                "--quiet",
            ],
        ),
        "loss",
    );
    let loss: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("loss.json")).unwrap()).unwrap();
    let total = loss["total"].as_f64().unwrap();
    let parts = loss["self_kl"].as_f64().unwrap()
        + loss["lm_video_kl"].as_f64().unwrap()
        + loss["lm_t_kl"].as_f64().unwrap()
        + loss["ce"].as_f64().unwrap();
    assert!((total - parts).abs() < 1e-9);

    // Eval: hypotheses are the resolved symbol strings, references the
    // original sentences.
    let hyp: Vec<String> = per_sentence_symbols
        .iter()
        .map(|symbols| symbols.concat())
        .collect();
    std::fs::write(root.join("hyp.txt"), hyp.join("\n") + "\n").unwrap();
    std::fs::write(root.join("ref.txt"), sentences).unwrap();
    check(
        &signpipe(
            root,
            &[
                "eval",
                "--hyp", "hyp.txt",
                "--ref", "ref.txt",
                "--tokenizer", "char",
                "--quiet",
                "--json", "report.json",
            ],
        ),
        "eval",
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("report.json")).unwrap()).unwrap();
    // Four sentences resolve fully; sentence 2's synonym swap (嗨 -> 你好)
    // and sentence 5's dropped junk token keep CER above zero.
    assert!(report["cer"].as_f64().unwrap() > 0.0);
    assert!(report["bleu"]["1"].as_f64().unwrap() > 50.0);

    // Hash every artifact, rerun every stage from its manifest in pipeline
    // order, and require byte-identical outputs.
    let artifacts: Vec<PathBuf> = {
        let mut paths = vec![
            root.join("kb.jsonl"),
            root.join("resolved.jsonl"),
            root.join("loss.json"),
            root.join("report.json"),
        ];
        for i in 0..5 {
            paths.push(root.join(format!("pert{i}.spc1")));
            paths.push(root.join(format!("pert{i}.spc1.meta.json")));
        }
        paths
    };
    let before: BTreeMap<String, String> = artifacts
        .iter()
        .map(|p| (p.display().to_string(), sha256(p)))
        .collect();

    let mut manifests = vec![
        "kb.jsonl.manifest.json".to_string(),
        "resolved.jsonl.manifest.json".to_string(),
    ];
    manifests.extend(perturb_manifests);
    manifests.push("loss.json.manifest.json".to_string());
    manifests.push("report.json.manifest.json".to_string());
    for manifest in &manifests {
        check(
            &signpipe(root, &["rerun", "--manifest", manifest, "--quiet"]),
            &format!("rerun {manifest}"),
        );
    }

    let after: BTreeMap<String, String> = artifacts
        .iter()
        .map(|p| (p.display().to_string(), sha256(p)))
        .collect();
    assert_eq!(before, after, "rerun must be bit-identical");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("[acceptance] criterion 9 (end-to-end golden rerun): PASS");
}
