//! Writes synthetic demo corpora, handy for trying out the CLI.
//!
//! Usage: `cargo run --example gen -- flat|nested SENTENCES SEED OUT`

use npchunk::io;
use npchunk_core::chunkrepr::TagScheme;
use npchunk_core::synth;
use std::path::Path;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() != 5 {
        eprintln!("usage: gen flat|nested SENTENCES SEED OUT");
        std::process::exit(1);
    }
    let sentences: usize = args[2].parse().expect("sentence count");
    let seed: u64 = args[3].parse().expect("seed");
    let out = Path::new(&args[4]);
    match args[1].as_str() {
        "flat" => {
            let data = synth::flat_corpus(sentences, seed);
            io::write_corpus(out, &data, TagScheme::IOB1).expect("write");
        }
        "nested" => {
            let data = synth::nested_corpus(sentences, seed);
            io::write_nested_corpus(out, &data).expect("write");
        }
        other => {
            eprintln!("unknown kind {other:?}");
            std::process::exit(1);
        }
    }
}
