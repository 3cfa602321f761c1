//! Acceptance checks for the pipeline, one test per criterion. Each test
//! prints a PASS line (visible with `--nocapture`). The heavy corpus runs
//! are serialized through a mutex so the wall-clock budgets stay honest.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{LazyLock, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgain_core::corpus::{FrameLayout, ImageBox, RegionBox, RegionClass};
use kgain_core::eval::{
    cross_validate, importance_csv_string, percent, rank_importance, render_report,
    ConfusionMatrix, EvalOptions, ReportRow,
};
use kgain_core::forest::{fit_forest, mdi_importance, HyperParams};
use kgain_core::labeling::{classify_with_stats, gains_from_sessions, sigma_classify, sigma_labels, Label};
use kgain_core::mmfeat::{aggregate_layout, filter_images, image_type_vector, layout_vector, MmConfig};
use kgain_core::pipeline::{assemble_dataset, extract_features, PipelineConfig};
use kgain_core::synthgen::{generate_sessions, Effect, SynthSpec, SYNTH_LEXICON};
use kgain_core::textfeat::{
    flesch_kincaid, gunning_fog, is_complex, readability, smog, syllables, tokenize_text,
    Lexicon, PageText, RuleTagger,
};

static SERIAL: LazyLock<Mutex<()>> = LazyLock::new(|| Mutex::new(()));

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn page_text(text: &str) -> PageText {
    let t = tokenize_text(text);
    PageText {
        url: String::new(),
        tokens: t.tokens,
        sentences: t.sentences,
        punct_count: t.punct_count,
        paragraphs: Vec::new(),
    }
}

#[test]
fn criterion_01_readability_indices_match_hand_counts() {
    let _guard = serial();
    let start = Instant::now();

    // (text, words, sentences, syllables, complex words, fog, smog, fk),
    // all counted and computed by hand from the published formulas
    #[allow(clippy::type_complexity)]
    let cases: [(&str, usize, usize, usize, usize, f64, f64, f64); 12] = [
        ("The cat sat.", 3, 1, 3, 0, 1.2000000000000002, 3.1291, -2.619999999999999),
        (
            "Warm air rises. Water vapor forms clouds.",
            7, 2, 10, 0, 1.4000000000000001, 3.1291, 2.6321428571428562,
        ),
        (
            "The electricity builds up quickly. Humidity and temperature rise together.",
            10, 2, 23, 4, 18.0, 11.20814326018867, 13.5,
        ),
        (
            "Thunder follows lightning. Sound travels slower than light.",
            8, 2, 13, 0, 1.6, 3.1291, 5.145,
        ),
        (
            "Ice crystals collide inside the cloud. Charges build up until a flash appears.",
            13, 2, 19, 0, 2.6, 3.1291, 4.191153846153846,
        ),
        (
            "The storm is dark and heavy. Rain falls to the ground.",
            11, 2, 12, 0, 2.2, 3.1291, -0.5722727272727273,
        ),
        (
            "A beautiful atmosphere needs understanding. Pressure and energy interact.",
            9, 2, 21, 5, 24.022222222222226, 12.161744961471694, 13.698333333333334,
        ),
        (
            "Hot wind blows. Cold rain falls. The sky turns dark.",
            10, 3, 10, 0, 1.3333333333333335, 3.1291, -2.4899999999999984,
        ),
        (
            "It forms when warm humid air rises rapidly into the atmosphere.",
            11, 1, 18, 2, 11.672727272727274, 11.20814326018867, 8.009090909090911,
        ),
        (
            "Don't panic in a storm. Stay inside and wait.",
            9, 2, 11, 0, 1.8, 3.1291, 0.5872222222222234,
        ),
        (
            "Clouds gather. Thunder roars. Lightning strikes the tallest tree.",
            9, 3, 14, 0, 1.2000000000000002, 3.1291, 3.935555555555556,
        ),
        (
            "The temperature difference creates electrical separation inside enormous clouds.",
            9, 1, 24, 5, 25.822222222222223, 15.903189008614273, 19.386666666666667,
        ),
    ];

    for (text, w, s, syl, cx, fog, smog_v, fk) in cases {
        let page = page_text(text);
        assert_eq!(page.tokens.len(), w, "word count of {text:?}");
        assert_eq!(page.sentences.len(), s, "sentence count of {text:?}");
        let syl_total: usize = page.tokens.iter().map(|t| syllables(t)).sum();
        assert_eq!(syl_total, syl, "syllable count of {text:?}");
        let cx_total = page.tokens.iter().filter(|t| is_complex(t)).count();
        assert_eq!(cx_total, cx, "complex-word count of {text:?}");
        let r = readability(&page);
        assert!((r.c_gi - fog).abs() < 1e-9, "fog of {text:?}: {} vs {fog}", r.c_gi);
        assert!((r.c_smog - smog_v).abs() < 1e-9, "smog of {text:?}: {} vs {smog_v}", r.c_smog);
        assert!((r.c_fk - fk).abs() < 1e-9, "fk of {text:?}: {} vs {fk}", r.c_fk);
    }

    assert!((smog(30.0, 15.0) - 7.168621630094336).abs() < 1e-9);
    assert!((gunning_fog(100.0, 5.0, 10.0) - 12.0).abs() < 1e-9);
    assert!((flesch_kincaid(3.0, 1.0, 3.0) - -2.619999999999999).abs() < 1e-9);

    let empty = readability(&page_text(""));
    assert_eq!((empty.c_gi, empty.c_smog, empty.c_fk), (0.0, 0.0, 0.0));

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("acceptance criterion 1: PASS (12 hand-verified texts within 1e-9, {elapsed:?})");
}

fn random_frame(rng: &mut ChaCha8Rng, index: u32) -> FrameLayout {
    let width_px: u32 = rng.gen_range(200..=1000);
    let height_px: u32 = rng.gen_range(200..=1000);
    let with_bg_boxes = rng.gen_bool(0.5);
    let n_regions = rng.gen_range(0usize..=12);
    let mut regions = Vec::new();
    for _ in 0..n_regions {
        let region_class = loop {
            let c = RegionClass::ALL[rng.gen_range(0..6)];
            if with_bg_boxes || c != RegionClass::Background {
                break c;
            }
        };
        let x = rng.gen_range(0..width_px);
        let y = rng.gen_range(0..height_px);
        let w = rng.gen_range(1..=width_px - x);
        let h = rng.gen_range(1..=height_px - y);
        regions.push(RegionBox { region_class, x, y, w, h });
    }
    let n_images = rng.gen_range(0usize..=5);
    let mut images = Vec::new();
    for _ in 0..n_images {
        let w = rng.gen_range(20..=600).min(width_px);
        let h = rng.gen_range(20..=600).min(height_px);
        let x = rng.gen_range(0..=width_px - w);
        let y = rng.gen_range(0..=height_px - h);
        let mut type_probs = [0.0f64; 6];
        for p in type_probs.iter_mut() {
            *p = rng.gen_range(0.01..1.0);
        }
        let sum: f64 = type_probs.iter().sum();
        for p in type_probs.iter_mut() {
            *p /= sum;
        }
        images.push(ImageBox { x, y, w, h, type_probs });
    }
    FrameLayout {
        frame_index: index,
        timestamp_ms: 1000 * (index as u64 + 1),
        width_px,
        height_px,
        regions,
        images,
    }
}

/// Brute-force layout vector: rasterize every region onto per-class pixel
/// bitmaps and count.
fn pixel_layout_oracle(frame: &FrameLayout, config: &MmConfig) -> [f64; 7] {
    let w = frame.width_px as usize;
    let h = frame.height_px as usize;
    let area = (w * h) as f64;
    let class_index = |c: RegionClass| RegionClass::ALL.iter().position(|&a| a == c).unwrap();
    let mut planes = vec![vec![false; w * h]; 6];
    for region in &frame.regions {
        let plane = &mut planes[class_index(region.region_class)];
        for py in region.y..(region.y + region.h).min(frame.height_px) {
            for px in region.x..(region.x + region.w).min(frame.width_px) {
                plane[py as usize * w + px as usize] = true;
            }
        }
    }
    let count = |plane: &[bool]| plane.iter().filter(|&&b| b).count() as f64;
    let has_bg_boxes = frame.regions.iter().any(|r| r.region_class == RegionClass::Background);
    let bg = if has_bg_boxes {
        count(&planes[5]) / area
    } else {
        let mut uncovered = 0usize;
        for i in 0..w * h {
            if !(0..5).any(|c| planes[c][i]) {
                uncovered += 1;
            }
        }
        uncovered as f64 / area
    };
    let retained = filter_images(frame, config.min_image_side);
    let mean_img_size = if retained.is_empty() {
        0.0
    } else {
        let total: f64 = retained.iter().map(|b| (b.w as f64) * (b.h as f64)).sum();
        total / retained.len() as f64 / area
    };
    [
        count(&planes[0]) / area,
        count(&planes[1]) / area,
        count(&planes[2]) / area,
        count(&planes[3]) / area,
        count(&planes[4]) / area,
        bg,
        mean_img_size,
    ]
}

#[test]
fn criterion_02_layout_vectors_match_pixel_rasterization() {
    let _guard = serial();
    let config = MmConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(20240202);
    let mut vectors = Vec::new();
    for i in 0..100 {
        let frame = random_frame(&mut rng, i);
        let got = layout_vector(&frame, &config);
        let want = pixel_layout_oracle(&frame, &config);
        for (j, (g, w)) in got.as_array().iter().zip(want).enumerate() {
            assert!(
                (g - w).abs() < 1e-6,
                "frame {i} component {j}: {g} vs pixel oracle {w}"
            );
        }
        vectors.push(got);
    }

    let aggregated = aggregate_layout(&vectors).unwrap();
    let n = vectors.len() as f64;
    for j in 0..7 {
        let brute = vectors.iter().map(|v| v.as_array()[j]).sum::<f64>() / n;
        assert!(
            (aggregated[j] - brute).abs() < 1e-12,
            "aggregate component {j}: {} vs brute mean {brute}",
            aggregated[j]
        );
    }
    println!("acceptance criterion 2: PASS (100 random frames against the pixel oracle)");
}

#[test]
fn criterion_03_image_type_mass_equals_retained_count() {
    let _guard = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for corpus in 0..20 {
        let frames: Vec<FrameLayout> =
            (0..rng.gen_range(1..=8)).map(|i| random_frame(&mut rng, i)).collect();
        let retained: usize = frames.iter().map(|f| filter_images(f, 100).len()).sum();
        let v = image_type_vector(frames.iter(), 100);
        let mass: f64 = v.iter().sum();
        assert!(
            (mass - retained as f64).abs() < 1e-6,
            "corpus {corpus}: type mass {mass} vs {retained} retained images"
        );
    }

    // the 100 px threshold is inclusive and applies to both sides
    let frame = FrameLayout {
        frame_index: 0,
        timestamp_ms: 1000,
        width_px: 1280,
        height_px: 800,
        regions: vec![],
        images: vec![
            ImageBox { x: 0, y: 0, w: 99, h: 500, type_probs: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0] },
            ImageBox { x: 200, y: 0, w: 500, h: 99, type_probs: [1.0, 0.0, 0.0, 0.0, 0.0, 0.0] },
            ImageBox { x: 800, y: 0, w: 100, h: 100, type_probs: [0.0, 1.0, 0.0, 0.0, 0.0, 0.0] },
        ],
    };
    assert_eq!(filter_images(&frame, 100).len(), 1);
    assert_eq!(image_type_vector(std::iter::once(&frame), 100), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    println!("acceptance criterion 3: PASS (type mass equals retained count, 100 px side rule)");
}

#[test]
fn criterion_04_sigma_classification_thresholds_and_invariance() {
    let _guard = serial();

    let (mean, sigma) = (2.15f64, 1.84f64);
    assert!((mean - sigma / 2.0 - 1.23).abs() < 1e-12);
    assert!((mean + sigma / 2.0 - 3.07).abs() < 1e-12);
    assert_eq!(classify_with_stats(1.0, mean, sigma), Label::Low);
    assert_eq!(classify_with_stats(2.0, mean, sigma), Label::Moderate);
    assert_eq!(classify_with_stats(3.0, mean, sigma), Label::Moderate);
    assert_eq!(classify_with_stats(4.0, mean, sigma), Label::High);

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..1000 {
        let n = rng.gen_range(5..=40);
        let values: Vec<i64> = (0..n).map(|_| rng.gen_range(-10..=10)).collect();
        let base = sigma_labels(&values).unwrap();
        let c: i64 = rng.gen_range(-5..=5);
        let shifted: Vec<i64> = values.iter().map(|&x| x + c).collect();
        assert_eq!(sigma_labels(&shifted).unwrap(), base, "translation by {c} changed labels");
        let k: i64 = rng.gen_range(1..=4);
        let scaled: Vec<i64> = values.iter().map(|&x| x * k).collect();
        assert_eq!(sigma_labels(&scaled).unwrap(), base, "scaling by {k} changed labels");
    }

    let constant = sigma_labels(&[3, 3, 3, 3]).unwrap();
    assert!(constant.iter().all(|&l| l == Label::Moderate));
    println!("acceptance criterion 4: PASS (thresholds 1.23/3.07, affine invariance, sigma 0)");
}

const TEN_FEATURES: [&str; 10] = [
    "mm_heading",
    "c_word",
    "mm_menubar",
    "mm_contentlist",
    "mm_text",
    "mm_avg_imgsize",
    "img_map",
    "img_outdoor",
    "c_sentence",
    "h_link",
];

fn synth_dataset(
    spec: &SynthSpec,
) -> (kgain_core::forest::LabeledDataset, kgain_core::labeling::SigmaSummary) {
    let sessions = generate_sessions(spec).unwrap();
    let config = PipelineConfig::default();
    let lexicon = Lexicon::parse(SYNTH_LEXICON).unwrap();
    let extracted = extract_features(&sessions, &config, &RuleTagger, &lexicon).unwrap();
    assert!(extracted.failures.is_empty(), "failures: {:?}", extracted.failures);
    let names: Vec<String> = TEN_FEATURES.iter().map(|s| s.to_string()).collect();
    let ten = extracted.matrix.subset(&names).unwrap();
    let (labeled, summary) = sigma_classify(&gains_from_sessions(&sessions)).unwrap();
    (assemble_dataset(&ten, &labeled).unwrap(), summary)
}

#[test]
fn criterion_05_planted_signal_is_learned_and_ranked() {
    let _guard = serial();
    let start = Instant::now();

    let spec = SynthSpec {
        n_sessions: 300,
        frames_per_session: 3,
        effect_map: vec![
            Effect { feature: "mm_heading".into(), direction: 1.0, strength: 1.0 },
            Effect { feature: "c_word".into(), direction: 1.0, strength: 1.0 },
        ],
        noise_level: 0.25,
        seed: 424242,
    };
    let (data, _) = synth_dataset(&spec);
    assert_eq!(data.feature_names.len(), 10);
    assert_eq!(data.n_rows(), 300);

    let params = HyperParams::default();
    let outcome =
        cross_validate(&data, &params, 10, 10, 4242, EvalOptions::default()).unwrap();
    let accuracy = outcome.pooled.metrics().accuracy;
    assert!(accuracy >= 0.85, "pooled 10x10 CV accuracy {accuracy} below 0.85");

    let model = fit_forest(&data, &params, 4242).unwrap();
    let ranked = rank_importance(&mdi_importance(&model));
    let top3: Vec<&str> = ranked[..3].iter().map(|(_, name, _)| name.as_str()).collect();
    assert!(top3.contains(&"mm_heading"), "mm_heading not in MDI top 3: {top3:?}");
    assert!(top3.contains(&"c_word"), "c_word not in MDI top 3: {top3:?}");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "acceptance criterion 5: PASS (accuracy {:.3}, planted features in top 3, {elapsed:?})",
        accuracy
    );
}

#[test]
fn criterion_06_null_corpus_stays_at_the_majority_baseline() {
    let _guard = serial();
    let spec = SynthSpec {
        n_sessions: 300,
        frames_per_session: 3,
        effect_map: vec![],
        noise_level: 0.25,
        seed: 77777,
    };
    let (data, summary) = synth_dataset(&spec);
    let baseline = *summary.counts.iter().max().unwrap() as f64 / data.n_rows() as f64;

    let outcome = cross_validate(
        &data,
        &HyperParams::default(),
        10,
        10,
        606,
        EvalOptions::default(),
    )
    .unwrap();
    let accuracy = outcome.pooled.metrics().accuracy;
    assert!(
        (accuracy - baseline).abs() <= 0.05,
        "accuracy {accuracy} strays more than 5 points from majority baseline {baseline}"
    );
    println!(
        "acceptance criterion 6: PASS (accuracy {:.3} vs baseline {:.3})",
        accuracy, baseline
    );
}

fn matrix_from_counts(counts: [[u64; 3]; 3]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::new(vec!["low".into(), "moderate".into(), "high".into()]);
    for (t, row) in counts.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            for _ in 0..n {
                cm.record(t, p);
            }
        }
    }
    cm
}

#[test]
fn criterion_07_confusion_metrics_match_manual_arithmetic() {
    let _guard = serial();

    let cm = matrix_from_counts([[5, 2, 1], [1, 6, 2], [0, 3, 4]]);
    assert_eq!(cm.total(), 24);
    let m = cm.metrics();
    assert_eq!(m.accuracy, 15.0 / 24.0);
    assert_eq!(m.accuracy, 0.625);
    assert_eq!(m.per_class[0].precision, 5.0 / 6.0);
    assert_eq!(m.per_class[0].recall, 5.0 / 8.0);
    assert_eq!(m.per_class[0].f1, 0.7142857142857143);
    assert_eq!(m.per_class[1].precision, 6.0 / 11.0);
    assert_eq!(m.per_class[1].recall, 2.0 / 3.0);
    assert_eq!(m.per_class[1].f1, 0.6);
    assert_eq!(m.per_class[2].precision, 4.0 / 7.0);
    assert_eq!(m.per_class[2].recall, 4.0 / 7.0);
    assert_eq!(m.per_class[2].f1, 0.5714285714285714);
    assert_eq!(m.macro_precision, (5.0 / 6.0 + 6.0 / 11.0 + 4.0 / 7.0) / 3.0);
    assert_eq!(m.macro_recall, (5.0 / 8.0 + 2.0 / 3.0 + 4.0 / 7.0) / 3.0);
    assert_eq!(m.macro_f1, (5.0 / 7.0 + 3.0 / 5.0 + 4.0 / 7.0) / 3.0);
    assert!((m.macro_precision - 0.6500721500721501).abs() < 1e-15);
    assert!((m.macro_recall - 0.6210317460317459).abs() < 1e-15);
    assert!((m.macro_f1 - 0.6285714285714286).abs() < 1e-15);
    assert!(m.warnings.is_empty());

    // a classifier stuck on "moderate" over the 44/42/27 class split
    let stuck = matrix_from_counts([[0, 44, 0], [0, 42, 0], [0, 27, 0]]);
    let sm = stuck.metrics();
    assert_eq!(sm.accuracy, 42.0 / 113.0);
    assert_eq!(sm.accuracy, 0.37168141592920356);
    assert_eq!(percent(sm.accuracy), "37.2");
    assert_eq!(sm.warnings.len(), 2);

    println!("acceptance criterion 7: PASS (frozen 3x3 matrix and constant-moderate baseline)");
}

fn kgain_bin(args: &[&str], threads: &str) {
    let out = Command::new(env!("CARGO_BIN_EXE_kgain"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("failed to run kgain");
    assert!(
        out.status.success(),
        "kgain {:?} exited with {:?}\nstdout:\n{}\nstderr:\n{}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn walk_files(root: &Path) -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    files
}

fn assert_trees_identical(a: &Path, b: &Path) {
    let files_a = walk_files(a);
    let files_b = walk_files(b);
    assert_eq!(files_a, files_b, "{} and {} hold different files", a.display(), b.display());
    for rel in &files_a {
        let bytes_a = std::fs::read(a.join(rel)).unwrap();
        let bytes_b = std::fs::read(b.join(rel)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{} differs between runs", rel.display());
    }
}

fn run_pipeline(config: &Path, out: &Path, threads: &str) {
    let config = config.to_str().unwrap();
    let out = out.to_str().unwrap();
    for cmd in ["extract", "label", "train", "evaluate", "importance"] {
        kgain_bin(&[cmd, "--config", config, "--out", out], threads);
    }
}

#[test]
fn criterion_08_pipeline_runs_are_byte_identical() {
    let _guard = serial();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let spec_path = root.join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
  "n_sessions": 30,
  "frames_per_session": 3,
  "effect_map": [
    {"feature": "mm_heading", "direction": 1.0, "strength": 1.0},
    {"feature": "c_word", "direction": 1.0, "strength": 1.0}
  ],
  "noise_level": 0.25,
  "seed": 808
}
"#,
    )
    .unwrap();

    let corpus_a = root.join("corpus_a");
    let corpus_b = root.join("corpus_b");
    kgain_bin(&["synth", "--spec", spec_path.to_str().unwrap(), "--out", corpus_a.to_str().unwrap()], "1");
    kgain_bin(&["synth", "--spec", spec_path.to_str().unwrap(), "--out", corpus_b.to_str().unwrap()], "4");
    assert_trees_identical(&corpus_a, &corpus_b);

    let config_path = root.join("config.toml");
    std::fs::write(
        &config_path,
        format!(
            r#"corpus_root = "{}"
seed = 7
repetitions = 3
folds = 5

[grid]
n_trees = [25]
max_depth = [0]
min_samples_split = [2]
max_features = ["sqrt"]
"#,
            corpus_a.display()
        ),
    )
    .unwrap();

    let out_a = root.join("out_a");
    let out_b = root.join("out_b");
    run_pipeline(&config_path, &out_a, "1");
    run_pipeline(&config_path, &out_b, "4");
    assert_trees_identical(&out_a, &out_b);

    let names = walk_files(&out_a);
    for expected in [
        "features.csv",
        "labels.csv",
        "model.json",
        "grid-search.json",
        "report.txt",
        "report.json",
        "importance.csv",
    ] {
        assert!(names.iter().any(|p| p == Path::new(expected)), "missing artifact {expected}");
    }
    println!("acceptance criterion 8: PASS ({} artifacts byte-identical across 1 and 4 threads)", names.len());
}

/// The full 33-column feature schema in extraction order.
const SCHEMA_33: [&str; 33] = [
    "mm_heading",
    "mm_menubar",
    "mm_contentlist",
    "mm_text",
    "mm_image",
    "mm_background",
    "mm_avg_imgsize",
    "img_infovis",
    "img_infographic",
    "img_indoor",
    "img_map",
    "img_outdoor",
    "img_techdraw",
    "c_word",
    "c_char",
    "c_sentence",
    "c_noun",
    "c_verb",
    "c_adj",
    "c_oth",
    "c_gi",
    "c_smog",
    "c_fk",
    "h_link",
    "h_p",
    "h_oth_ul",
    "h_script",
    "h_vid",
    "h_aud",
    "h_obj",
    "l_nature",
    "l_motion",
    "l_AllPunc",
];

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check_golden(name: &str, rendered: &str) {
    let path = golden_path(name);
    if std::env::var_os("GOLDEN_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, rendered).unwrap();
    }
    let want = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read golden file {}: {e}", path.display()));
    assert_eq!(rendered, want, "{name} drifted from its golden copy");
}

#[test]
fn criterion_09_report_and_importance_match_golden_files() {
    let _guard = serial();

    let rows = vec![
        ReportRow {
            label: "MI&TI".into(),
            metrics: matrix_from_counts([[5, 2, 1], [1, 6, 2], [0, 3, 4]]).metrics(),
        },
        ReportRow {
            label: "TI".into(),
            metrics: matrix_from_counts([[10, 2, 0], [3, 15, 1], [0, 2, 9]]).metrics(),
        },
        ReportRow {
            label: "MI".into(),
            metrics: matrix_from_counts([[0, 44, 0], [0, 42, 0], [0, 27, 0]]).metrics(),
        },
    ];
    let importance: IndexMap<String, f64> = SCHEMA_33
        .iter()
        .enumerate()
        .map(|(i, name)| (name.to_string(), (33 - i) as f64 / 561.0))
        .collect();

    let report = render_report(&rows, Some(&importance)).unwrap();
    check_golden("report.txt", &report);

    // structural checks on top of the byte comparison
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "Classification performance (percent)");
    let header: Vec<&str> = lines[2].split_whitespace().collect();
    assert_eq!(
        header,
        [
            "features", "low_P", "low_R", "low_F1", "moderate_P", "moderate_R", "moderate_F1",
            "high_P", "high_R", "high_F1", "macro_P", "macro_R", "macro_F1", "accuracy"
        ]
    );
    assert!(lines[4].starts_with("MI&TI"));
    assert!(lines[6].starts_with("MI "));
    assert!(lines[6].ends_with("37.2"));
    assert!(report.contains("Feature importance (MDI)"));
    let ellipsis = report.lines().filter(|l| l.trim_start().starts_with("...")).count();
    assert_eq!(ellipsis, 1, "top-10/bottom-10 table needs one elision row");

    let csv = importance_csv_string(&importance);
    check_golden("importance.csv", &csv);
    let csv_lines: Vec<&str> = csv.lines().collect();
    assert_eq!(csv_lines[0], "rank,feature,mdi");
    assert_eq!(csv_lines.len(), 34);
    assert!(csv_lines[1].starts_with("1,mm_heading,"));
    assert!(csv_lines[33].starts_with("33,l_AllPunc,"));

    println!("acceptance criterion 9: PASS (report.txt and importance.csv match their golden copies)");
}

#[test]
fn criterion_10_full_grid_end_to_end_within_budget() {
    let _guard = serial();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let spec_path = root.join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
  "n_sessions": 113,
  "frames_per_session": 3,
  "effect_map": [
    {"feature": "mm_heading", "direction": 1.0, "strength": 1.0},
    {"feature": "c_word", "direction": -1.0, "strength": 0.8}
  ],
  "noise_level": 0.25,
  "seed": 1001
}
"#,
    )
    .unwrap();
    let corpus = root.join("corpus");
    kgain_bin(&["synth", "--spec", spec_path.to_str().unwrap(), "--out", corpus.to_str().unwrap()], "0");

    let config_path = root.join("config.toml");
    std::fs::write(
        &config_path,
        format!("corpus_root = \"{}\"\nseed = 42\n", corpus.display()),
    )
    .unwrap();

    let out = root.join("out");
    for cmd in ["extract", "label", "train", "evaluate", "importance"] {
        kgain_bin(
            &[cmd, "--config", config_path.to_str().unwrap(), "--out", out.to_str().unwrap()],
            "0",
        );
    }

    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    for row in ["MI&TI", "TI", "MI"] {
        assert!(report.lines().any(|l| l.starts_with(row)), "report row {row} missing");
    }
    let importance = std::fs::read_to_string(out.join("importance.csv")).unwrap();
    assert_eq!(importance.lines().count(), 34);

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!("acceptance criterion 10: PASS (113-session corpus, full grid, {elapsed:?})");
}
