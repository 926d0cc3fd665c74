use backhaul_core::pinwheel::{brute_force_schedulable, is_schedule, sxy_schedule, KVector};

fn multisets(m: usize, lo: u64, hi: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    fn rec(m: usize, lo: u64, hi: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == m { out.push(cur.clone()); return; }
        let start = cur.last().copied().unwrap_or(lo);
        for v in start..=hi { cur.push(v); rec(m, lo, hi, cur, out); cur.pop(); }
    }
    rec(m, lo, hi, &mut Vec::new(), &mut out);
    out
}

#[test]
#[ignore]
fn grid() {
    let mut disagreements = 0;
    let mut total = 0;
    for m in 1..=4usize {
        for v in multisets(m, 2, 9) {
            total += 1;
            let k = KVector::from_finite(&v);
            let oracle = brute_force_schedulable(&k, 50_000_000).is_schedulable();
            let is = is_schedule(&k).is_some();
            let sxy = sxy_schedule(&k).is_some();
            assert!(!(is && !oracle), "IS false positive on {v:?}");
            assert!(!(sxy && !is), "containment violated on {v:?}");
            if oracle && !is {
                disagreements += 1;
                println!("oracle-yes IS-no: {v:?}");
            }
        }
    }
    println!("total {total}, oracle-yes-IS-no {disagreements}");
}
