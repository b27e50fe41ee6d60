//! The acceptance gate: one test per release criterion, each printing a
//! single PASS line (visible with `--nocapture`) once its checks hold.

use mktree::infer::{evidence_probability, marginal, mpe, Evidence};
use mktree::ktree::{
    backbone_edges, build_from_order, enumerate_all_ktrees, is_backbone_ktree, ktree_edge_count,
    markov_chain_ktree, orient, validate_ktree, CreationOrder, KTree,
};
use mktree::learn::{
    backbone_dp, brute_force_mskt, chow_liu, orientation_score, TableScore,
};
use mktree::model::{
    divergence_report, fit, joint_probability, model_joint, order_invariance_check, DataSource,
    MarkovKTree,
};
use mktree::tables::{decode_assignment, JointTable, VariableId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn v(i: u16) -> VariableId {
    VariableId(i)
}

fn random_joint(rng: &mut ChaCha8Rng, n: usize) -> JointTable {
    let mut probs: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    JointTable::new((1..=n as u16).map(v).collect(), vec![2; n], probs).unwrap()
}

/// A random k-tree creation order over randomly relabeled vertices.
fn random_order(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CreationOrder {
    let mut labels: Vec<u16> = (1..=n as u16).collect();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    let mut base: Vec<VariableId> = labels[..k].iter().map(|&l| v(l)).collect();
    base.sort_unstable();
    let mut cliques: Vec<Vec<VariableId>> = vec![base.clone()];
    let mut steps = Vec::new();
    for &l in &labels[k..] {
        let c = cliques[rng.gen_range(0..cliques.len())].clone();
        steps.push((c.clone(), v(l)));
        for drop in 0..k {
            let mut next: Vec<VariableId> = c
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != drop)
                .map(|(_, &u)| u)
                .collect();
            next.push(v(l));
            next.sort_unstable();
            cliques.push(next);
        }
    }
    CreationOrder::new(k, base, steps).unwrap()
}

fn random_score(rng: &mut ChaCha8Rng, n: usize, k: usize) -> TableScore {
    let mut table = TableScore::new();
    for x in 1..=n as u16 {
        for bits in 0u32..1 << n {
            if bits >> (x - 1) & 1 == 1 {
                continue;
            }
            let parents: Vec<u16> = (1..=n as u16).filter(|p| bits >> (p - 1) & 1 == 1).collect();
            if parents.is_empty() || parents.len() > k {
                continue;
            }
            table.insert(x, parents, rng.gen_range(-1.0..1.0));
        }
    }
    table
}

fn random_model(rng: &mut ChaCha8Rng, n: usize, k: usize) -> MarkovKTree {
    let joint = random_joint(rng, n);
    let ds = DataSource::exact(&joint).unwrap();
    let order = random_order(rng, n, k);
    let tree = build_from_order(&order).unwrap();
    fit(&tree, &order, &ds).unwrap()
}

/// Criterion 1: the KL decomposition residual vanishes on random exact joints
/// and random backbone 2-trees.
#[test]
fn criterion_01_divergence_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let families: Vec<(usize, Vec<KTree>)> = (3..=6)
        .map(|n| (n, enumerate_all_ktrees(n, 2.min(n - 1), &backbone_edges(n), 9).unwrap()))
        .collect();
    for trial in 0..200 {
        let (n, family) = &families[trial % families.len()];
        let joint = random_joint(&mut rng, *n);
        let ds = DataSource::exact(&joint).unwrap();
        let tree = &family[rng.gen_range(0..family.len())];
        let order = validate_ktree(tree.edges(), *n, tree.k()).unwrap();
        let m = fit(tree, &order, &ds).unwrap();
        let rep = divergence_report(&joint, &m).unwrap();
        assert!(rep.kl_finite, "trial {trial}: unexpected infinite divergence");
        assert!(
            rep.residual().abs() <= 1e-9,
            "trial {trial}: residual {}",
            rep.residual()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "criterion 1 took {elapsed:.2?}");
    println!("ACCEPTANCE 1 (divergence identity, 200 trials, {elapsed:.2?}): PASS");
}

/// Criterion 2: fitted joints are invariant across creation orders.
#[test]
fn criterion_02_order_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for trial in 0..50 {
        let k = 1 + trial % 2;
        let n = rng.gen_range(k + 2..=7);
        let joint = random_joint(&mut rng, n);
        let ds = DataSource::exact(&joint).unwrap();
        let order = random_order(&mut rng, n, k);
        let tree = build_from_order(&order).unwrap();
        assert!(
            order_invariance_check(&tree, &ds, 5, 1000 + trial as u64).unwrap(),
            "trial {trial}: order-dependent fit (n = {n}, k = {k})"
        );
    }
    println!("ACCEPTANCE 2 (creation-order invariance, 50 trees x 5 orders): PASS");
}

/// Criterion 3: over every backbone 2-tree, the maximum-delta set is exactly
/// the minimum-KL set.
#[test]
fn criterion_03_delta_kl_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for trial in 0..20 {
        let n = 5 + trial % 2;
        let joint = random_joint(&mut rng, n);
        let ds = DataSource::exact(&joint).unwrap();
        let mut rows = Vec::new();
        for tree in enumerate_all_ktrees(n, 2, &backbone_edges(n), 9).unwrap() {
            let order = validate_ktree(tree.edges(), n, 2).unwrap();
            let m = fit(&tree, &order, &ds).unwrap();
            let rep = divergence_report(&joint, &m).unwrap();
            rows.push((rep.delta, rep.kl));
        }
        let max_delta = rows.iter().map(|r| r.0).fold(f64::MIN, f64::max);
        let min_kl = rows.iter().map(|r| r.1).fold(f64::MAX, f64::min);
        for (i, (delta, kl)) in rows.iter().enumerate() {
            let in_argmax = (max_delta - delta).abs() <= 1e-9;
            let in_argmin = (kl - min_kl).abs() <= 1e-9;
            assert_eq!(
                in_argmax, in_argmin,
                "trial {trial}, tree {i}: argmax/argmin sets differ"
            );
        }
    }
    println!("ACCEPTANCE 3 (delta/KL duality over exhaustive families): PASS");
}

/// Criterion 4: the dynamic program matches the exhaustive oracle on random
/// score tables.
#[test]
fn criterion_04_dp_equals_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut runs = 0;
    for n in 4..=8usize {
        for k in 1..=2usize {
            for trial in 0..50 {
                let f = random_score(&mut rng, n, k);
                let dp = backbone_dp(n, k, &f).unwrap();
                let oracle = brute_force_mskt(n, k, &f, &backbone_edges(n), 9).unwrap();
                assert!(
                    (dp.score - oracle.score).abs() <= 1e-9,
                    "n {n} k {k} trial {trial}: dp {} vs oracle {}",
                    dp.score,
                    oracle.score
                );
                assert!(is_backbone_ktree(&dp.tree), "n {n} k {k} trial {trial}");
                let recomputed = orientation_score(&orient(&dp.order), &f);
                assert!((dp.score - recomputed).abs() <= 1e-9, "n {n} k {k} trial {trial}");
                runs += 1;
            }
        }
    }
    println!("ACCEPTANCE 4 (dp = oracle on {runs} random score tables): PASS");
}

/// Criterion 5: Chow-Liu matches brute force over all labeled spanning trees.
#[test]
fn criterion_05_chow_liu_baseline() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for trial in 0..50 {
        let n = rng.gen_range(3..=7usize);
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let x = rng.gen_range(0.0..1.0);
                w[i][j] = x;
                w[j][i] = x;
            }
        }
        // Prüfer-sequence enumeration of all n^(n-2) labeled trees.
        let mut best = f64::NEG_INFINITY;
        for code in 0..(n as u64).pow(n as u32 - 2) {
            let mut pruefer = Vec::new();
            let mut c = code;
            for _ in 0..n - 2 {
                pruefer.push((c % n as u64) as usize);
                c /= n as u64;
            }
            let mut deg = vec![1usize; n];
            for &p in &pruefer {
                deg[p] += 1;
            }
            let mut total = 0.0;
            for &p in &pruefer {
                let leaf = (0..n).find(|&i| deg[i] == 1).unwrap();
                total += w[leaf][p];
                deg[leaf] = usize::MAX;
                deg[p] -= 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&i| deg[i] == 1).collect();
            total += w[rest[0]][rest[1]];
            best = best.max(total);
        }
        let r = chow_liu(&w).unwrap();
        assert!(
            (r.score - best).abs() <= 1e-9,
            "trial {trial}: chow_liu {} vs oracle {best}",
            r.score
        );
    }
    println!("ACCEPTANCE 5 (Chow-Liu = spanning-tree brute force, 50 trials): PASS");
}

/// Criterion 6: the k-th order Markov chain construction is a valid backbone
/// k-tree with the right edge count at every size.
#[test]
fn criterion_06_markov_chain_ktrees() {
    for k in 1..=4usize {
        for n in k..=50usize {
            let t = markov_chain_ktree(n, k).unwrap();
            validate_ktree(t.edges(), n, k).unwrap();
            assert!(is_backbone_ktree(&t), "n {n} k {k}");
            assert_eq!(t.edges().len(), ktree_edge_count(n, k), "n {n} k {k}");
        }
    }
    println!("ACCEPTANCE 6 (Markov chain k-trees, n <= 50, k <= 4): PASS");
}

/// Criterion 7: structure counts match the labeled k-tree formula.
#[test]
fn criterion_07_structure_counts() {
    let trees = enumerate_all_ktrees(5, 2, &[], 9).unwrap();
    // C(n,k) * (k(n-k)+1)^(n-k-2) = 10 * 7 = 70 for n = 5, k = 2.
    assert_eq!(trees.len(), 70);
    for t in &trees {
        assert_eq!(t.cliques().len(), 5 - 2);
    }
    println!("ACCEPTANCE 7 (70 labeled 2-trees on 5 vertices, n-k cliques each): PASS");
}

/// Criterion 8: inference matches full-joint enumeration.
#[test]
fn criterion_08_inference_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    for trial in 0..30 {
        let n = rng.gen_range(4..=10usize);
        let m = random_model(&mut rng, n, 2);
        let joint = model_joint(&m).unwrap();
        let cards = vec![2u32; n];
        let mut e = Evidence::empty();
        for i in 1..=n as u16 {
            if rng.gen_bool(0.25) && e.len() + 1 < n {
                e.fix(v(i), rng.gen_range(0..2));
            }
        }
        let mut st = vec![0u32; n];
        let mut mask = joint.probs().to_vec();
        for (flat, p) in mask.iter_mut().enumerate() {
            decode_assignment(flat, &cards, &mut st);
            if e.iter().any(|(var, s)| st[var.idx()] != s) {
                *p = 0.0;
            }
        }
        let pe: f64 = mask.iter().sum();
        let lp = evidence_probability(&m, &e).unwrap();
        assert!((lp - pe.log2()).abs() <= 1e-9, "trial {trial}: evidence probability");
        for i in 1..=n as u16 {
            if e.is_fixed(v(i)) {
                continue;
            }
            let marg = marginal(&m, v(i), &e).unwrap();
            let mut expect = [0.0f64; 2];
            for (flat, &p) in mask.iter().enumerate() {
                decode_assignment(flat, &cards, &mut st);
                expect[st[(i - 1) as usize] as usize] += p;
            }
            for s in 0..2usize {
                assert!(
                    (marg.probs()[s] - expect[s] / pe).abs() <= 1e-9,
                    "trial {trial} var {i}: marginal"
                );
            }
        }
        let mut best = 0.0f64;
        for (flat, &p) in mask.iter().enumerate() {
            decode_assignment(flat, &cards, &mut st);
            let _ = flat;
            if p > best {
                best = p;
            }
        }
        let (a, log2p) = mpe(&m, &e).unwrap();
        assert!((log2p - best.log2()).abs() <= 1e-12, "trial {trial}: mpe value");
        let (_, check) = joint_probability(&m, &a).unwrap();
        assert!((check - log2p).abs() <= 1e-12, "trial {trial}: mpe consistency");
    }
    println!("ACCEPTANCE 8 (inference vs enumeration, 30 random models): PASS");
}

/// Criterion 9: the dynamic program stays inside its wall-time and state
/// budgets at engineering scale.
#[test]
fn criterion_09_performance_envelope() {
    for (n, k, budget_s) in [(100usize, 2usize, 120u64), (40, 3, 300)] {
        let mut rng = ChaCha8Rng::seed_from_u64(109);
        let mut table = TableScore::new();
        let mut subset: Vec<u16> = (1..=k as u16).collect();
        loop {
            for x in 1..=n as u16 {
                if !subset.contains(&x) {
                    table.insert(x, subset.clone(), rng.gen_range(0.0..1.0));
                }
            }
            if !next_subset(&mut subset, n) {
                break;
            }
        }
        let r = backbone_dp(n, k, &table).unwrap();
        let mut bound = 1usize;
        for i in 0..k + 1 {
            bound = bound * (n - i) / (i + 1);
        }
        bound *= 1 << (k + 2);
        assert!(
            r.stats.states_expanded <= bound,
            "n {n} k {k}: {} states over bound {bound}",
            r.stats.states_expanded
        );
        assert!(
            r.stats.wall.as_secs() < budget_s,
            "n {n} k {k}: {:?} over budget {budget_s}s",
            r.stats.wall
        );
        println!(
            "ACCEPTANCE 9 (dp n = {n}, k = {k}: {:?}, {} states): PASS",
            r.stats.wall, r.stats.states_expanded
        );
    }
}

fn next_subset(s: &mut [u16], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if (s[i] as usize) < n - (k - 1 - i) {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Criterion 10: every subcommand is byte-reproducible on the bundled
/// fixtures.
#[test]
fn criterion_10_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_mktree");
    let fixtures = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap();
    let out = tempfile::tempdir().unwrap();
    let model = out.path().join("model.json");
    // Seed the model file the later subcommands consume.
    let status = std::process::Command::new(bin)
        .args(["learn", "--k", "2", "--kind", "json-joint"])
        .arg("--input")
        .arg(fixtures.join("xor.json"))
        .arg("--out")
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let xor = fixtures.join("xor.json");
    let chain = fixtures.join("chain.csv");
    let scores = fixtures.join("scores_n6_k2.json");
    let cases: Vec<Vec<String>> = vec![
        vec!["learn".into(), "--k".into(), "2".into(), "--input".into(), p(&chain)],
        vec![
            "learn".into(), "--k".into(), "2".into(), "--kind".into(),
            "json-score-table".into(), "--input".into(), p(&scores),
        ],
        vec![
            "score".into(), "--input".into(), p(&xor), "--model".into(), p(&model),
        ],
        vec![
            "infer".into(), "--model".into(), p(&model), "--query".into(), "mpe".into(),
            "--evidence".into(), "X3=1".into(),
        ],
        vec![
            "infer".into(), "--model".into(), p(&model), "--query".into(),
            "marginal".into(), "--x".into(), "X3".into(), "--evidence".into(), "X1=1".into(),
        ],
        vec![
            "oracle-check".into(), "--k".into(), "2".into(), "--n".into(), "6".into(),
            "--trials".into(), "5".into(), "--seed".into(), "31".into(),
        ],
        vec!["export-dot".into(), "--model".into(), p(&model)],
        vec![
            "export-dot".into(), "--model".into(), p(&model), "--what".into(),
            "cliques".into(),
        ],
    ];
    for case in &cases {
        let run = || {
            let outp = std::process::Command::new(bin).args(case).output().unwrap();
            assert!(
                outp.status.success(),
                "subcommand {case:?} failed: {}",
                String::from_utf8_lossy(&outp.stderr)
            );
            outp.stdout
        };
        assert_eq!(run(), run(), "nondeterministic output for {case:?}");
    }
    println!("ACCEPTANCE 10 (byte-identical CLI reruns, {} cases): PASS", cases.len());
}

fn p(path: &std::path::Path) -> String {
    path.to_string_lossy().into_owned()
}
