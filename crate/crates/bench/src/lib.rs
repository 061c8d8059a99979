//! Benchmark fixtures.

use csrlnc::rng::Stream;
use csrlnc::schemes::{CodedPacket, Ratio, Scheme, SchemeConfig};
use csrlnc::verify::random_session;

/// The headline configuration: `P = 15`, `M = 1024`, `L = 4`, `p0 = 1/4`.
pub fn configs() -> Vec<(&'static str, SchemeConfig)> {
    let p0 = Ratio { num: 1, den: 4 };
    vec![
        ("gf2", SchemeConfig::conv(1, 15, 1024).unwrap()),
        ("gf16", SchemeConfig::conv(4, 15, 1024).unwrap()),
        ("circ", SchemeConfig::circ(4, 15, 1024, p0).unwrap()),
        ("circ_red", SchemeConfig::circ_red(4, 15, 1024, p0).unwrap()),
    ]
}

/// A scheme with a decodable set of received packets.
pub fn session(cfg: SchemeConfig, seed: u64) -> (Scheme, Vec<CodedPacket>) {
    let scheme = Scheme::new(cfg).unwrap();
    let mut s = Stream::new(seed);
    let g = scheme.generation(scheme.random_originals(&mut s)).unwrap();
    let pkts = random_session(&scheme, &g, &mut s).unwrap();
    (scheme, pkts)
}
