//! Golden vectors pinning bit-exact behavior of the hash families and the
//! wire formats, for cross-implementation and cross-platform checks.
//!
//! `tests/data/hash_golden.txt` — whitespace-separated, `#` comments:
//!   universal <input> <seed> <trial> <bits>      <hex output>
//!   row       <input> <seed> <trial> <k>:<width> <hex elements, comma-sep>
//!   bloom     <input> <seed> <trial> <t>:<len>   <positions, comma-sep>
//!
//! `tests/data/message_golden.txt` — one message per line:
//!   scheme,N,K,seed,trial,hex(payload)
//!
//! Set ACKSET_REGEN_GOLDEN=1 to rewrite both files from the current
//! implementation after an intentional format change.

use std::fmt::Write as _;
use std::path::PathBuf;

use ackset::codec::{
    bloom, enumerative, hash_concat, le, naive_concat, BloomConfig, DecodedSet,
    EnumerativeConfig, HashConcatConfig, LeConfig, NaiveConcatConfig,
};
use ackset::hashing::{BloomHasher, HashSeed, RowHasher, UniversalHasher};

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn check_or_regen(name: &str, generated: &str) {
    let path = data_path(name);
    if std::env::var("ACKSET_REGEN_GOLDEN").as_deref() == Ok("1") {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, generated).unwrap();
        eprintln!("regenerated {}", path.display());
        return;
    }
    let committed = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        committed, generated,
        "{name} drifted from the committed golden vectors"
    );
}

fn generate_hash_golden() -> String {
    let mut out = String::new();
    out.push_str("# kind input seed trial param output\n");
    let inputs = [0u64, 1, 42, 0xDEAD_BEEF, u64::MAX];
    for &(seed, trial) in &[(0u64, 0u16), (0xFEED_FACE, 0), (0xFEED_FACE, 3)] {
        let hs = HashSeed::new(seed, trial);
        let uni = UniversalHasher::new(&hs);
        for &x in &inputs {
            for bits in [8u32, 16, 64] {
                writeln!(out, "universal {x} {seed:#x} {trial} {bits} {:#x}", uni.hash(x, bits))
                    .unwrap();
            }
        }
        let rows = RowHasher::new(&hs, 4, 7);
        for &x in &inputs {
            let elems: Vec<String> =
                rows.row(x).as_slice().iter().map(|e| format!("{e:#04x}")).collect();
            writeln!(out, "row {x} {seed:#x} {trial} 4:7 {}", elems.join(",")).unwrap();
        }
        let bloom = BloomHasher::new(&hs, 7, 960);
        for &x in &inputs {
            let pos: Vec<String> =
                (0..7).map(|i| bloom.position(x, i).to_string()).collect();
            writeln!(out, "bloom {x} {seed:#x} {trial} 7:960 {}", pos.join(",")).unwrap();
        }
    }
    out
}

#[test]
fn hash_golden_vectors() {
    check_or_regen("hash_golden.txt", &generate_hash_golden());
}

fn generate_message_golden() -> String {
    let population: u128 = 1 << 32;
    let seed = 0x601DE2;
    let members = vec![3u64, 1_000, 77_777, 123_456_789, 4_294_967_295];
    let set = DecodedSet::new(population, members).unwrap();
    let empty = DecodedSet::empty(population);
    let mut out = String::new();
    out.push_str("# scheme,N,K,seed,trial,hex(payload)\n");

    let le_cfg = LeConfig::new(0.01, 16, seed).unwrap();
    for s in [&empty, &set] {
        let msg = le::encode(s, &le_cfg).unwrap();
        let trial = le::LeDecoder::new(&msg, &le_cfg).unwrap().trial();
        out.push_str(&msg.dump_line(population, s.k(), seed, trial));
        out.push('\n');
    }

    let bloom_cfg = BloomConfig::new(96, 7, seed).unwrap();
    for s in [&empty, &set] {
        let msg = bloom::encode(s, &bloom_cfg).unwrap();
        out.push_str(&msg.dump_line(population, s.k(), seed, 0));
        out.push('\n');
    }

    let hc_cfg = HashConcatConfig::for_target(0.01, 5, 16, seed).unwrap();
    for s in [&empty, &set] {
        let msg = hash_concat::encode(s, &hc_cfg).unwrap();
        out.push_str(&msg.dump_line(population, s.k(), seed, 0));
        out.push('\n');
    }

    let enum_cfg = EnumerativeConfig::new(population, 16).unwrap();
    for s in [&empty, &set] {
        let msg = enumerative::encode(s, &enum_cfg).unwrap();
        out.push_str(&msg.dump_line(population, s.k(), seed, 0));
        out.push('\n');
    }

    let nc_cfg = NaiveConcatConfig::unbounded();
    for s in [&empty, &set] {
        let msg = naive_concat::encode(s, &nc_cfg).unwrap();
        out.push_str(&msg.dump_line(population, s.k(), seed, 0));
        out.push('\n');
    }
    out
}

#[test]
fn message_golden_vectors() {
    check_or_regen("message_golden.txt", &generate_message_golden());
}

#[test]
fn naive_concat_payload_is_plain_big_endian_ids() {
    // The identifier list is directly readable from the hex dump.
    let set = DecodedSet::new(1 << 32, vec![0x0102_0304, 0xAABB_CCDD]).unwrap();
    let msg = naive_concat::encode(&set, &NaiveConcatConfig::unbounded()).unwrap();
    assert_eq!(msg.payload.to_hex(), "01020304aabbccdd");
}
