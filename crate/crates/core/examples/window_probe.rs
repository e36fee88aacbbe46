use std::collections::BTreeMap;
use std::time::Instant;

use achlioptas::analysis::{gelation_window, GelationConfig};
use achlioptas::rules::builtin;

fn main() {
    let k: usize = std::env::args().nth(1).map_or(1000, |s| s.parse().unwrap());
    for name in std::env::args().skip(2) {
        let mut cfg = GelationConfig::new(builtin(&name, &BTreeMap::new()).unwrap(), k);
        cfg.t_probe = 2.0;
        let start = Instant::now();
        let w = gelation_window(&cfg).unwrap();
        println!("{:?}\n{w}", start.elapsed());
    }
}
