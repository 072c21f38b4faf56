use std::path::Path;

use qalpha_core::corpus::{converged_corpus, generate, load_corpus, CorpusKind};
use qalpha_core::verify::{embedding_check, kernel_decay_check};

#[test]
fn shipped_corpus_loads_and_generates() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let specs = load_corpus(&path).unwrap();
    assert_eq!(specs.len(), 9);
    assert!(specs.iter().any(|s| matches!(s.kind, CorpusKind::SpectralNoise { .. })));
    for spec in specs {
        let f = generate(&spec.with_shape(2, 16)).unwrap();
        assert_eq!(f.values().len(), 256);
        assert!(f.values().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn malformed_corpus_is_rejected() {
    let dir = std::env::temp_dir().join(format!("qalpha-corpus-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(&path, r#"[{"kind": "harmonic"}]"#).unwrap();
    assert!(load_corpus(&path).is_err());
    std::fs::write(&path, r#"[{"kind": "spectral_noise", "slope": -1.0, "N": 32, "n": 1}]"#).unwrap();
    let spec = load_corpus(&path).unwrap().remove(0);
    assert!(generate(&spec).is_err());
    std::fs::remove_dir_all(dir).unwrap();
}

// Frozen: the ring-1 count never exceeds half of m^n for n = 1, m = 2, in
// either half of the sampled distance range.
#[test]
fn ring_one_count_is_bounded() {
    let r = kernel_decay_check(0.5, 2.0, 1, 1000, 7).unwrap();
    let mut sorted: Vec<_> = r.samples.iter().collect();
    sorted.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    let (near, far) = sorted.split_at(sorted.len() / 2);
    for half in [near, far] {
        let worst = half.iter().map(|s| s.counts.max_first_normalized).fold(0.0, f64::max);
        assert!(worst <= 0.5, "{worst}");
    }
}

#[test]
fn embedding_ratio_settles() {
    let corpus = converged_corpus(0.5);
    let coarse = embedding_check(&corpus, 0.5, 1, 128).unwrap();
    let fine = embedding_check(&corpus, 0.5, 1, 256).unwrap();
    assert!(coarse.violations.is_empty() && fine.violations.is_empty());
    let (a, b) = (coarse.max_ratio.unwrap(), fine.max_ratio.unwrap());
    assert!((b / a - 1.0).abs() < 0.1, "{a} -> {b}");
}
