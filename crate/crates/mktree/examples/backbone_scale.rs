//! Timing probe for the backbone dynamic program at non-toy sizes.
//!
//! Usage: backbone_scale [n] [k]

use mktree::learn::{backbone_dp, TableScore};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100, |a| a.parse().expect("n"));
    let k: usize = args.next().map_or(2, |a| a.parse().expect("k"));
    let f = synthetic_table(n, k);
    let r = backbone_dp(n, k, &f).expect("dp");
    eprintln!(
        "n = {n}, k = {k}: score {:.6}, {} states, {:.2?}",
        r.score,
        r.stats.states_expanded,
        r.stats.wall
    );
}

/// A deterministic dense score table over all parent sets of size ≤ k.
fn synthetic_table(n: usize, k: usize) -> TableScore {
    let mut table = TableScore::new();
    let mut subset: Vec<u16> = (1..=k as u16).collect();
    loop {
        for x in 1..=n as u16 {
            if !subset.contains(&x) {
                // A fixed mildly irregular value, cheap to recompute.
                let mut h = x as u64;
                for &p in &subset {
                    h = h.wrapping_mul(6364136223846793005).wrapping_add(p as u64);
                }
                table.insert(x, subset.clone(), (h % 1000) as f64 / 1000.0);
            }
        }
        if !next(&mut subset, n) {
            break;
        }
    }
    table
}

fn next(s: &mut [u16], n: usize) -> bool {
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
